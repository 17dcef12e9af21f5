//! Training-triple sampling with popularity-gap negative selection.
//!
//! A negative `n` for the pair `(v, p)` must be unobserved for `v` and sit at
//! least `margin` popularity counts away from `p` (one-sided in the
//! directional modes). When no item qualifies the draw falls back to any
//! unobserved item.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{PnsmMode, SplitDataset, TrainTriple};

const REJECTION_ATTEMPTS: usize = 200;

/// Seed for worker `index` derived from a master seed.
pub fn worker_seed(master: u64, index: u64) -> u64 {
    master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub struct SamplerState {
    rng: ChaCha8Rng,
    num_items: usize,
    /// Sorted positive items per user.
    positives: Vec<Vec<u32>>,
    /// All train (user, item) pairs in a fixed order.
    pairs: Vec<(u32, u32)>,
    popularity: Vec<u32>,
    margin: u32,
    mode: PnsmMode,
}

impl SamplerState {
    pub fn new(ds: &SplitDataset, margin: u32, mode: PnsmMode, seed: u64) -> Self {
        let positives = ds.train_items_by_user();
        let pairs = positives
            .iter()
            .enumerate()
            .flat_map(|(u, items)| items.iter().map(move |&i| (u as u32, i)))
            .collect();
        SamplerState {
            rng: ChaCha8Rng::seed_from_u64(seed),
            num_items: ds.num_items,
            positives,
            pairs,
            popularity: ds.popularity.clone(),
            margin,
            mode,
        }
    }

    /// Independent state for one worker of a parallel sampler.
    pub fn for_worker(
        ds: &SplitDataset,
        margin: u32,
        mode: PnsmMode,
        master_seed: u64,
        worker: u64,
    ) -> Self {
        SamplerState::new(ds, margin, mode, worker_seed(master_seed, worker))
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_positive(&self, user: u32, item: u32) -> bool {
        self.positives[user as usize].binary_search(&item).is_ok()
    }

    fn gap_ok(&self, pos: u32, neg: u32) -> bool {
        let pp = self.popularity[pos as usize] as i64;
        let pn = self.popularity[neg as usize] as i64;
        let m = self.margin as i64;
        match self.mode {
            PnsmMode::Symmetric => (pn - pp).abs() >= m,
            PnsmMode::MorePopular => pn >= pp + m,
            PnsmMode::LessPopular => pn + m <= pp,
        }
    }

    /// Whether `neg` is an acceptable popularity-gap negative for `(user, pos)`.
    pub fn eligible(&self, user: u32, pos: u32, neg: u32) -> bool {
        neg != pos && !self.is_positive(user, neg) && self.gap_ok(pos, neg)
    }

    pub fn sample_negative(&mut self, user: u32, pos: u32) -> Result<u32> {
        if self.positives[user as usize].len() >= self.num_items {
            return Err(Error::NoNegativeAvailable(user as usize));
        }
        for _ in 0..REJECTION_ATTEMPTS {
            let n = self.rng.random_range(0..self.num_items as u32);
            if self.eligible(user, pos, n) {
                return Ok(n);
            }
        }
        let eligible: Vec<u32> = (0..self.num_items as u32)
            .filter(|&n| self.eligible(user, pos, n))
            .collect();
        if let Some(&n) = eligible.choose(&mut self.rng) {
            return Ok(n);
        }
        let fallback: Vec<u32> = (0..self.num_items as u32)
            .filter(|&n| n != pos && !self.is_positive(user, n))
            .collect();
        fallback
            .choose(&mut self.rng)
            .copied()
            .ok_or(Error::NoNegativeAvailable(user as usize))
    }

    /// `batch_size` triples with positives drawn uniformly from train.
    pub fn sample_batch(&mut self, batch_size: usize) -> Result<Vec<TrainTriple>> {
        if self.pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        (0..batch_size)
            .map(|_| {
                let (user, pos) = self.pairs[self.rng.random_range(0..self.pairs.len())];
                let neg = self.sample_negative(user, pos)?;
                Ok(TrainTriple { user, pos, neg })
            })
            .collect()
    }

    /// One pass over all train positives in a fresh random order, chunked
    /// into `ceil(|train| / batch_size)` batches.
    pub fn epoch_batches(
        &mut self,
        batch_size: usize,
        negatives_per_positive: usize,
    ) -> Result<Vec<Vec<TrainTriple>>> {
        let mut order = self.pairs.clone();
        order.shuffle(&mut self.rng);
        order
            .chunks(batch_size.max(1))
            .map(|chunk| {
                let mut batch = Vec::with_capacity(chunk.len() * negatives_per_positive);
                for &(user, pos) in chunk {
                    for _ in 0..negatives_per_positive {
                        let neg = self.sample_negative(user, pos)?;
                        batch.push(TrainTriple { user, pos, neg });
                    }
                }
                Ok(batch)
            })
            .collect()
    }
}
