//! Trains DCLMDB on the bundled toy data with the MF backbone and prints the
//! per-epoch loss terms and test metrics.
//!
//!     cargo run --release --example train_dclmdb -- [key=value ...]

use debias_rec::config::RunConfig;
use debias_rec::eval::{evaluate, Truth};
use debias_rec::ingest::{binarize, parse_file, positives};
use debias_rec::split::split;
use debias_rec::{train, Method};

fn main() -> debias_rec::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let mut cfg = RunConfig::from_file(format!("{root}/configs/toy.cfg"))?;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').unwrap_or((&arg, ""));
        cfg.set(k, v)?;
    }
    cfg.resolve_seeds();
    let b = binarize(&parse_file(format!("{root}/data/toy/ratings.dat"), &cfg.delimiter)?);
    let ds = split(&positives(&b.interactions), b.ids.num_users(), b.ids.num_items(), &cfg.split)?;

    let trained = train(&ds, &cfg.hp, Method::Dclmdb)?;
    println!("epoch  total      bpr        l_u        l_i        val@20");
    for e in &trained.report.epochs {
        println!(
            "{:>5}  {:<9.5}  {:<9.5}  {:<9.5}  {:<9.5}  {}",
            e.epoch,
            e.total,
            e.bpr,
            e.l_u,
            e.l_i,
            e.val_recall.map_or("-".into(), |r| format!("{r:.4}"))
        );
    }
    println!("best epoch {:?}, stopped early: {}", trained.report.best_epoch, trained.report.stopped_early);
    let r = evaluate(&trained.scoring, &ds, Truth::Test, &cfg.ks)?;
    for (k, m) in &r.per_k {
        println!("@{k:<3} recall {:.4}  hr {:.4}  ndcg {:.4}  iou {:.4}", m.recall, m.hr, m.ndcg, m.iou);
    }
    Ok(())
}
