//! Popularity of sampled negatives relative to the positive under each PNSM
//! mode. Pairs with no item satisfying the gap fall back to any unobserved
//! item, so "met" is below 100% for very popular or very rare positives.
//!
//!     cargo run --example pnsm_sampling -- [margin]

use debias_rec::sampler::SamplerState;
use debias_rec::synth::generate;
use debias_rec::synth::SynthConfig;
use debias_rec::PnsmMode;

fn main() -> debias_rec::Result<()> {
    let margin: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let cfg = SynthConfig { num_users: 300, num_items: 150, ..SynthConfig::default() };
    let ds = generate(&cfg)?.to_split(1.0 / 3.0)?;
    println!("margin {margin}");
    for mode in [PnsmMode::Symmetric, PnsmMode::MorePopular, PnsmMode::LessPopular] {
        let mut s = SamplerState::new(&ds, margin, mode, 1);
        let batch = s.sample_batch(20_000)?;
        let gap: Vec<f64> = batch
            .iter()
            .map(|t| ds.popularity[t.neg as usize] as f64 - ds.popularity[t.pos as usize] as f64)
            .collect();
        let met = batch.iter().filter(|t| s.eligible(t.user, t.pos, t.neg)).count();
        let mean = gap.iter().sum::<f64>() / gap.len() as f64;
        let min = gap.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = gap.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{mode:<13} met {:>5.1}%  pop(n)-pop(p): mean {mean:+8.2}  min {min:+6}  max {max:+6}",
            100.0 * met as f64 / batch.len() as f64
        );
    }
    Ok(())
}
