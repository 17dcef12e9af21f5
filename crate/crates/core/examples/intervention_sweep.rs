//! Trains one model per intervened-training fraction. All variants share
//! the same validation and test partitions.
//!
//!     cargo run --release --example intervention_sweep -- [f1,f2,...]

use debias_rec::config::{parse_list, RunConfig};
use debias_rec::eval::{evaluate, Truth};
use debias_rec::ingest::{binarize, parse_file, positives};
use debias_rec::split::intervention_variants;
use debias_rec::train;

fn main() -> debias_rec::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let fractions: Vec<f64> = parse_list("fractions", &std::env::args().nth(1).unwrap_or("0,0.05,0.1".into()))?;
    let mut cfg = RunConfig::from_file(format!("{root}/configs/toy.cfg"))?;
    cfg.resolve_seeds();
    let b = binarize(&parse_file(format!("{root}/data/toy/ratings.dat"), &cfg.delimiter)?);
    let pos = positives(&b.interactions);
    let variants = intervention_variants(&pos, b.ids.num_users(), b.ids.num_items(), &cfg.split, &fractions)?;
    let k = cfg.ks[0];
    for (f, ds) in fractions.iter().zip(&variants) {
        let trained = train(ds, &cfg.hp, cfg.method)?;
        let m = evaluate(&trained.scoring, ds, Truth::Test, &[k])?.per_k[&k];
        println!("intervention {f:<5} train {:>5}  recall@{k} {:.4}  iou@{k} {:.4}", ds.train.len(), m.recall, m.iou);
    }
    Ok(())
}
