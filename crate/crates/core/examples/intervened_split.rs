//! Builds the intervened validation/test/train split and writes it to a
//! directory.
//!
//!     cargo run --example intervened_split -- [out_dir]

use debias_rec::config::RunConfig;
use debias_rec::ingest::{binarize, parse_file, positives};
use debias_rec::split::{partition_sizes, split, write_split};

fn main() -> debias_rec::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("debias-rec-split").display().to_string());
    let mut cfg = RunConfig::from_file(format!("{root}/configs/toy.cfg"))?;
    cfg.resolve_seeds();

    let b = binarize(&parse_file(format!("{root}/data/toy/ratings.dat"), &cfg.delimiter)?);
    let pos = positives(&b.interactions);
    let ds = split(&pos, b.ids.num_users(), b.ids.num_items(), &cfg.split)?;
    let sizes = partition_sizes(pos.len(), &cfg.split);
    println!("{} positives", pos.len());
    println!(
        "validation {}  test {}  train {} (uniform {}, biased {})",
        ds.validation.len(),
        ds.test.len(),
        ds.train.len(),
        sizes.uniform_train,
        sizes.biased_train
    );
    write_split(&out, &ds, Some(&cfg.split))?;
    println!("written to {out}");
    Ok(())
}
