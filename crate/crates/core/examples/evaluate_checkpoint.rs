//! Saves a checkpoint, reloads it and reports metrics with the relative
//! improvement over a BPR reference run.
//!
//!     cargo run --release --example evaluate_checkpoint

use debias_rec::backbone::{read_checkpoint, write_checkpoint};
use debias_rec::config::RunConfig;
use debias_rec::eval::{evaluate, CSV_HEADER, Truth};
use debias_rec::ingest::{binarize, parse_file, positives};
use debias_rec::split::split;
use debias_rec::{train, Method};

fn main() -> debias_rec::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let mut cfg = RunConfig::from_file(format!("{root}/configs/toy.cfg"))?;
    cfg.resolve_seeds();
    let b = binarize(&parse_file(format!("{root}/data/toy/ratings.dat"), &cfg.delimiter)?);
    let ds = split(&positives(&b.interactions), b.ids.num_users(), b.ids.num_items(), &cfg.split)?;

    let path = std::env::temp_dir().join("debias-rec-example.ckpt");
    write_checkpoint(&path, &train(&ds, &cfg.hp, Method::Dclmdb)?.scoring)?;
    let reference = evaluate(&train(&ds, &cfg.hp, Method::Bpr)?.scoring, &ds, Truth::Test, &cfg.ks)?;

    let emb = read_checkpoint(&path)?;
    let mut report = evaluate(&emb, &ds, Truth::Test, &cfg.ks)?;
    report.set_reference("bpr", &reference)?;
    print!("{CSV_HEADER}\n{}", report.csv_rows("example", "dclmdb", "mf"));
    Ok(())
}
