//! BPR and its inverse-propensity variants next to DCLMDB on confounded
//! synthetic data.
//!
//!     cargo run --release --example ips_baselines -- [key=value ...]

use debias_rec::config::RunConfig;
use debias_rec::eval::{evaluate, Truth};
use debias_rec::synth::generate;
use debias_rec::{train, Method};

fn main() -> debias_rec::Result<()> {
    let mut cfg = RunConfig::default();
    // small enough to finish in seconds
    cfg.merge_str(
        "dim = 16\nlr = 0.005\nepochs = 20\nbatch_size = 256\npatience = 5\n\
         synth_users = 500\nsynth_items = 200\nk = 20",
    )?;
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').unwrap_or((&arg, ""));
        cfg.set(k, v)?;
    }
    cfg.resolve_seeds();
    let ds = generate(&cfg.synth)?.to_split(cfg.synth_val_share)?;
    for method in [Method::Bpr, Method::Ips, Method::IpsC, Method::IpsCn, Method::Dclmdb] {
        let trained = train(&ds, &cfg.hp, method)?;
        let m = evaluate(&trained.scoring, &ds, Truth::Test, &cfg.ks)?.per_k[&20];
        println!("{:<8} recall@20 {:.4}  ndcg@20 {:.4}  iou@20 {:.4}", method.name(), m.recall, m.ndcg, m.iou);
    }
    Ok(())
}
