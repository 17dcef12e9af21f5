//! Trains BPR and DCLMDB on confounded synthetic data and compares them on
//! the unbiased held-out log. Starts from `configs/synthetic.cfg`.
//!
//!     cargo run --release --example synthetic_debiasing -- seeds=3 epochs=40
//!
//! Any `key=value` argument is a config key (see docs/config.md); `seeds=N`
//! averages over seeds 0..N and `methods=a,b` picks the methods.

use std::time::Instant;

use debias_rec::config::{parse_list, RunConfig};
use debias_rec::eval::{evaluate, Truth};
use debias_rec::synth::{generate, gini};
use debias_rec::{train, Method};

fn main() -> debias_rec::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEBIAS_REC_LOG", "warn")).init();
    let mut cfg = RunConfig::from_file(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/synthetic.cfg"))?;
    let mut seeds = 1u64;
    let mut methods = vec![Method::Bpr, Method::Dclmdb];
    for arg in std::env::args().skip(1) {
        let (k, v) = arg
            .split_once('=')
            .ok_or_else(|| debias_rec::Error::Config(format!("expected key=value, got '{arg}'")))?;
        match k {
            "seeds" => seeds = v.parse().map_err(|_| debias_rec::Error::Config(arg.clone()))?,
            "methods" => methods = parse_list("methods", v)?,
            _ => cfg.set(k, v)?,
        }
    }
    let ks = [10, 20, 50];

    println!("method        seed  val@20  recall@20  ndcg@20  iou@10  iou@20  iou@50  secs");
    let mut sums = vec![(0.0, 0.0); methods.len()];
    for seed in 0..seeds {
        cfg.seed = seed;
        cfg.resolve_seeds();
        let data = generate(&cfg.synth)?;
        let ds = data.to_split(cfg.synth_val_share)?;
        if seed == 0 {
            println!(
                "# train {} (gini {:.3}), validation {}, test {} (gini {:.3})",
                ds.train.len(),
                gini(ds.num_items, &ds.train),
                ds.validation.len(),
                ds.test.len(),
                gini(ds.num_items, &ds.test)
            );
        }
        for (m, sum) in methods.iter().zip(sums.iter_mut()) {
            let t = Instant::now();
            let trained = train(&ds, &cfg.hp, *m)?;
            let r = evaluate(&trained.scoring, &ds, Truth::Test, &ks)?;
            let at = |k: usize| &r.per_k[&k];
            println!(
                "{:<12} {:>5}  {:>6.4}  {:>9.4}  {:>7.4}  {:>6.3}  {:>6.3}  {:>6.3}  {:>4.1}",
                m.name(),
                seed,
                trained.report.best_val_recall.unwrap_or(f64::NAN),
                at(20).recall,
                at(20).ndcg,
                at(10).iou,
                at(20).iou,
                at(50).iou,
                t.elapsed().as_secs_f64()
            );
            sum.0 += at(20).recall;
            sum.1 += at(20).iou;
        }
    }
    println!("# means over {seeds} seed(s)");
    for (m, (r, i)) in methods.iter().zip(&sums) {
        println!("{:<12} recall@20 {:.4}  iou@20 {:.4}", m.name(), r / seeds as f64, i / seeds as f64);
    }
    Ok(())
}
