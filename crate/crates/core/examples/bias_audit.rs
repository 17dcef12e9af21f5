//! Praise/popularity correlation audit on a generated star-rated log where
//! both follow one latent trend per item.
//!
//!     cargo run --release --example bias_audit -- [stages] [top_items]

use debias_rec::audit::audit;
use debias_rec::synth::{generate_trend_log, TrendConfig};

fn main() -> debias_rec::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let stages = args.next().flatten().unwrap_or(20);
    let top = args.next().flatten().unwrap_or(10);
    let events = generate_trend_log(&TrendConfig::default())?;
    let report = audit(&events, stages, top)?;
    println!("{} events, {stages} stages", events.len());
    println!("item  pearson  first/last popularity share");
    for row in &report.rows {
        let m = &row.series.popularity_share;
        println!(
            "{:>4}  {:>7}  {:.4} -> {:.4}",
            row.series.item,
            row.pearson.map_or("n/a".into(), |p| format!("{p:.4}")),
            m[0],
            m[m.len() - 1]
        );
    }
    Ok(())
}
