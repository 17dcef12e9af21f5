//! Same objective on two backbones: plain MF and LightGCN propagation over
//! the train graph.
//!
//!     cargo run --release --example lightgcn_backbone -- [layers]

use debias_rec::config::RunConfig;
use debias_rec::eval::{evaluate, Truth};
use debias_rec::ingest::{binarize, parse_file, positives};
use debias_rec::split::split;
use debias_rec::{train, Backbone, HyperParams, Method};

fn main() -> debias_rec::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let layers: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut cfg = RunConfig::from_file(format!("{root}/configs/toy.cfg"))?;
    cfg.resolve_seeds();
    let b = binarize(&parse_file(format!("{root}/data/toy/ratings.dat"), &cfg.delimiter)?);
    let ds = split(&positives(&b.interactions), b.ids.num_users(), b.ids.num_items(), &cfg.split)?;

    for backbone in [Backbone::Mf, Backbone::LightGcn] {
        let hp = HyperParams { backbone, gcn_layers: layers, ..cfg.hp.clone() };
        let trained = train(&ds, &hp, Method::Dclmdb)?;
        let r = evaluate(&trained.scoring, &ds, Truth::Test, &cfg.ks)?;
        let k = cfg.ks[cfg.ks.len() - 1];
        let m = &r.per_k[&k];
        println!(
            "{backbone:<9} recall@{k} {:.4}  ndcg@{k} {:.4}  iou@{k} {:.4}  ({:.1}s)",
            m.recall, m.ndcg, m.iou, trained.report.wall_time_secs
        );
    }
    Ok(())
}
