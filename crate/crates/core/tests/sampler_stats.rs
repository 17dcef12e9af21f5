use debias_rec::sampler::SamplerState;
use debias_rec::{Interaction, PnsmMode, SplitDataset};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// 30 users, 40 items, each user positive on a deterministic pattern with
/// popularity spread across items.
fn dataset() -> SplitDataset {
    let (nu, ni) = (30u32, 40u32);
    let mut train = Vec::new();
    for u in 0..nu {
        for i in 0..ni {
            if (u * 7 + i * i) % 5 == 0 || (i < 5 && u % 2 == 0) {
                train.push(Interaction::positive(u, i, 0));
            }
        }
    }
    SplitDataset::new(nu as usize, ni as usize, train, Vec::new(), Vec::new(), 0.0)
}

#[test]
fn triples_satisfy_invariants_over_many_draws() {
    let ds = dataset();
    for (margin, mode) in [
        (0, PnsmMode::Symmetric),
        (3, PnsmMode::Symmetric),
        (2, PnsmMode::MorePopular),
        (2, PnsmMode::LessPopular),
    ] {
        let mut s = SamplerState::new(&ds, margin, mode, 9);
        let train = ds.train_items_by_user();
        let mut drawn = 0;
        while drawn < 100_000 {
            for t in s.sample_batch(1000).unwrap() {
                let pos_set = &train[t.user as usize];
                assert!(pos_set.binary_search(&t.pos).is_ok(), "positive must be a train pair");
                assert!(pos_set.binary_search(&t.neg).is_err(), "negative must not be positive");
                assert_ne!(t.pos, t.neg);
                // either the popularity-gap rule holds or no item satisfied it
                let any_eligible = (0..ds.num_items as u32).any(|n| s.eligible(t.user, t.pos, n));
                assert!(!any_eligible || s.eligible(t.user, t.pos, t.neg));
            }
            drawn += 1000;
        }
    }
}

#[test]
fn zero_margin_negatives_are_uniform() {
    let ds = dataset();
    let mut s = SamplerState::new(&ds, 0, PnsmMode::Symmetric, 123);
    let user = 3u32;
    let pos = ds.train_items_by_user()[user as usize][0];
    let candidates: Vec<u32> = (0..ds.num_items as u32)
        .filter(|&n| n != pos && !s.is_positive(user, n))
        .collect();
    let mut counts = vec![0u64; ds.num_items];
    let draws = 100_000;
    for _ in 0..draws {
        counts[s.sample_negative(user, pos).unwrap() as usize] += 1;
    }
    let expected = draws as f64 / candidates.len() as f64;
    let stat: f64 = candidates
        .iter()
        .map(|&c| (counts[c as usize] as f64 - expected).powi(2) / expected)
        .sum();
    let dof = (candidates.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    assert!(p > 0.01, "chi2 {stat} on {dof} dof, p = {p}");
    let off: u64 = (0..ds.num_items)
        .filter(|i| !candidates.contains(&(*i as u32)))
        .map(|i| counts[i])
        .sum();
    assert_eq!(off, 0);
}

#[test]
fn same_seed_same_batches() {
    let ds = dataset();
    let mut a = SamplerState::new(&ds, 2, PnsmMode::Symmetric, 5);
    let mut b = SamplerState::new(&ds, 2, PnsmMode::Symmetric, 5);
    assert_eq!(a.epoch_batches(64, 2).unwrap(), b.epoch_batches(64, 2).unwrap());
    let mut c = SamplerState::for_worker(&ds, 2, PnsmMode::Symmetric, 5, 1);
    let mut d = SamplerState::for_worker(&ds, 2, PnsmMode::Symmetric, 5, 2);
    assert_ne!(c.sample_batch(50).unwrap(), d.sample_batch(50).unwrap());
}
