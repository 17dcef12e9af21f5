//! Intervened evaluation split.
//!
//! A seeded uniform sample of the interactions stands in for data gathered
//! under random exposure. Validation and test come only from that sample;
//! train is the unsampled (biased) remainder plus an optional slice of the
//! uniform sample.
//!
//! Positions of a single seeded permutation are laid out as
//! `[validation | test | uniform-train | biased-train]`, so sweeping the
//! uniform-train share leaves validation and test untouched.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{read_interactions, write_interactions};
use crate::types::{Interaction, SplitDataset};

const FRACTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Share of all interactions treated as uniformly exposed.
    pub uniform_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    /// Share of all interactions moved from the uniform sample into train.
    pub uniform_train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            uniform_fraction: 0.4,
            val_fraction: 0.1,
            test_fraction: 0.2,
            uniform_train_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("uniform_fraction", self.uniform_fraction),
            ("val_fraction", self.val_fraction),
            ("test_fraction", self.test_fraction),
            ("uniform_train_fraction", self.uniform_train_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        let sum = self.val_fraction + self.test_fraction + self.uniform_train_fraction;
        if (sum - self.uniform_fraction).abs() > FRACTION_TOL {
            return Err(Error::config(format!(
                "val + test + uniform_train = {sum} but uniform_fraction = {}",
                self.uniform_fraction
            )));
        }
        Ok(())
    }

    /// Config for one point of an intervention sweep: same validation and
    /// test shares, `fraction` of the data as uniform train.
    pub fn with_intervention(&self, fraction: f64) -> SplitConfig {
        SplitConfig {
            uniform_train_fraction: fraction,
            uniform_fraction: self.val_fraction + self.test_fraction + fraction,
            ..self.clone()
        }
    }
}

fn floor_count(fraction: f64, n: usize) -> usize {
    // tolerate representation error such as 0.29 * 100 = 28.999999999999996
    ((fraction * n as f64) + FRACTION_TOL).floor() as usize
}

/// Splits positive interactions (unique (user, item) pairs) into train,
/// validation and test.
pub fn split(
    interactions: &[Interaction],
    num_users: usize,
    num_items: usize,
    cfg: &SplitConfig,
) -> Result<SplitDataset> {
    cfg.validate()?;
    if interactions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if interactions.iter().any(|x| x.rating != 1) {
        return Err(Error::config("split expects binarized positives only"));
    }
    let n = interactions.len();
    let n_val = floor_count(cfg.val_fraction, n);
    let n_test = floor_count(cfg.test_fraction, n);
    let n_uniform_train = floor_count(cfg.uniform_train_fraction, n).min(n - n_val - n_test);
    if cfg.val_fraction > 0.0 && n_val == 0 {
        return Err(Error::EmptySplit("validation"));
    }
    if cfg.test_fraction > 0.0 && n_test == 0 {
        return Err(Error::EmptySplit("test"));
    }
    if n_val + n_test >= n {
        return Err(Error::EmptySplit("train"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    order.shuffle(&mut rng);

    let take = |range: std::ops::Range<usize>| -> Vec<Interaction> {
        let mut part: Vec<Interaction> = order[range].iter().map(|&k| interactions[k]).collect();
        part.sort_unstable();
        part
    };
    let validation = take(0..n_val);
    let test = take(n_val..n_val + n_test);
    // uniform-train and biased-train both land in train
    let train = take(n_val + n_test..n);
    debug_assert!(n_uniform_train <= train.len());

    let ds = SplitDataset::new(
        num_users,
        num_items,
        train,
        validation,
        test,
        cfg.uniform_train_fraction,
    );
    ds.validate()?;
    Ok(ds)
}

/// Partition sizes of a split, for manifests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSizes {
    pub validation: usize,
    pub test: usize,
    pub train: usize,
    pub uniform_train: usize,
    pub biased_train: usize,
}

pub fn partition_sizes(n: usize, cfg: &SplitConfig) -> PartitionSizes {
    let validation = floor_count(cfg.val_fraction, n);
    let test = floor_count(cfg.test_fraction, n);
    let train = n.saturating_sub(validation + test);
    let uniform_train = floor_count(cfg.uniform_train_fraction, n).min(train);
    PartitionSizes {
        validation,
        test,
        train,
        uniform_train,
        biased_train: train - uniform_train,
    }
}

/// One split per intervention fraction, all sharing validation and test.
pub fn intervention_variants(
    interactions: &[Interaction],
    num_users: usize,
    num_items: usize,
    base: &SplitConfig,
    fractions: &[f64],
) -> Result<Vec<SplitDataset>> {
    if fractions.is_empty() {
        return Err(Error::config("intervention sweep needs at least one fraction"));
    }
    fractions
        .iter()
        .map(|&f| split(interactions, num_users, num_items, &base.with_intervention(f)))
        .collect()
}

/// Sidecar describing a split directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub num_users: usize,
    pub num_items: usize,
    pub intervention_fraction: f64,
    pub config: Option<SplitConfig>,
    pub sizes: Option<PartitionSizes>,
}

pub const TRAIN_FILE: &str = "train.tsv";
pub const VALID_FILE: &str = "valid.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const SPLIT_MANIFEST_FILE: &str = "split.json";

/// Writes `train.tsv`, `valid.tsv`, `test.tsv` and `split.json` into `dir`.
pub fn write_split(
    dir: impl AsRef<Path>,
    ds: &SplitDataset,
    cfg: Option<&SplitConfig>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_interactions(dir.join(TRAIN_FILE), &ds.train)?;
    write_interactions(dir.join(VALID_FILE), &ds.validation)?;
    write_interactions(dir.join(TEST_FILE), &ds.test)?;
    let n = ds.train.len() + ds.validation.len() + ds.test.len();
    let manifest = SplitManifest {
        num_users: ds.num_users,
        num_items: ds.num_items,
        intervention_fraction: ds.intervention_fraction,
        config: cfg.cloned(),
        sizes: cfg.map(|c| partition_sizes(n, c)),
    };
    let path = dir.join(SPLIT_MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))
}

pub fn read_split(dir: impl AsRef<Path>) -> Result<SplitDataset> {
    let dir = dir.as_ref();
    let path = dir.join(SPLIT_MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: SplitManifest = serde_json::from_str(&text)?;
    let ds = SplitDataset::new(
        manifest.num_users,
        manifest.num_items,
        read_interactions(dir.join(TRAIN_FILE))?,
        read_interactions(dir.join(VALID_FILE))?,
        read_interactions(dir.join(TEST_FILE))?,
        manifest.intervention_fraction,
    );
    ds.validate()?;
    Ok(ds)
}
