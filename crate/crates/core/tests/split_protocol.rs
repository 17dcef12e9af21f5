mod common;

use std::fs;

use common::Fixture;
use debias_rec::split::{
    intervention_variants, partition_sizes, split, write_split, SplitConfig, TEST_FILE, VALID_FILE,
};
use debias_rec::Interaction;

fn interactions(n: usize, nu: usize, ni: usize) -> Vec<Interaction> {
    let mut f = Fixture::new(99);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (u, i) = (f.below(nu) as u32, f.below(ni) as u32);
        if seen.insert((u, i)) {
            out.push(Interaction::positive(u, i, out.len() as i64));
        }
    }
    out
}

#[test]
fn ten_thousand_interactions_partition_as_specified() {
    let xs = interactions(10_000, 400, 300);
    let cfg = SplitConfig::default();
    let ds = split(&xs, 400, 300, &cfg).unwrap();
    assert_eq!(ds.validation.len(), 1000);
    assert_eq!(ds.test.len(), 2000);
    assert_eq!(ds.train.len(), 7000);
    let sizes = partition_sizes(10_000, &cfg);
    assert_eq!(sizes.uniform_train, 1000);
    assert_eq!(sizes.biased_train, 6000);
    ds.validate().unwrap();
}

#[test]
fn sweep_variants_share_test_bytes() {
    let xs = interactions(3000, 100, 120);
    let fractions = [0.0, 0.1, 0.2];
    let variants = intervention_variants(&xs, 100, 120, &SplitConfig::default(), &fractions).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (f, ds) in fractions.iter().zip(&variants) {
        let d = dir.path().join(format!("v{f}"));
        write_split(&d, ds, None).unwrap();
        bytes.push((fs::read(d.join(TEST_FILE)).unwrap(), fs::read(d.join(VALID_FILE)).unwrap()));
        assert_eq!(ds.intervention_fraction, *f);
        let sizes = partition_sizes(3000, &SplitConfig::default().with_intervention(*f));
        assert_eq!(sizes.uniform_train, (f * 3000.0).round() as usize);
    }
    assert!(bytes.windows(2).all(|w| w[0] == w[1]));
    // one log: the intervened share is a relabelled subset of the same train set
    assert!(variants.windows(2).all(|w| w[0].train == w[1].train));
}
