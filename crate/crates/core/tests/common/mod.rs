//! Independent reference implementations shared by integration tests and
//! the acceptance target. Nothing here calls into the code under test
//! except for plain data types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use debias_rec::audit::RatedEvent;
use debias_rec::objective::composite_loss;
use debias_rec::{EmbeddingSet, HyperParams, TableId, TrainTriple};

/// Full sort by (score desc, id asc) over items not in `exclude`.
pub fn brute_rank(scores: &[f64], exclude: &[u32], k: usize) -> Vec<u32> {
    let mut all: Vec<(f64, u32)> = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| !exclude.contains(&(*i as u32)))
        .map(|(i, &s)| (s, i as u32))
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, i)| i).collect()
}

/// (recall, hr, ndcg) straight from the definitions.
pub fn brute_metrics(topk: &[u32], truth: &[u32], k: usize) -> (f64, f64, f64) {
    let list: Vec<u32> = topk.iter().copied().take(k).collect();
    let hits = list.iter().filter(|i| truth.contains(i)).count();
    let recall = hits as f64 / truth.len() as f64;
    let hr = if hits > 0 { 1.0 } else { 0.0 };
    let mut dcg = 0.0;
    for (pos, item) in list.iter().enumerate() {
        if truth.contains(item) {
            dcg += 1.0 / ((pos + 2) as f64).log2();
        }
    }
    let ideal = k.min(truth.len());
    let idcg: f64 = (0..ideal).map(|pos| 1.0 / ((pos + 2) as f64).log2()).sum();
    (recall, hr, dcg / idcg)
}

pub fn brute_iou(a: &[u32], b: &[u32]) -> f64 {
    let a: BTreeSet<u32> = a.iter().copied().collect();
    let b: BTreeSet<u32> = b.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// K most popular ids, ties by ascending id.
pub fn brute_top_popular(pop: &[u32], k: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..pop.len() as u32).collect();
    ids.sort_by(|&a, &b| pop[b as usize].cmp(&pop[a as usize]).then(a.cmp(&b)));
    ids.truncate(k);
    ids
}

/// Layer-averaged propagation with an explicit dense normalized adjacency
/// over `num_users + num_items` nodes. Returns (users, items) row-major.
pub fn dense_propagation(
    num_users: usize,
    num_items: usize,
    edges: &[(u32, u32)],
    users: &[f64],
    items: &[f64],
    dim: usize,
    layers: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = num_users + num_items;
    let mut a = vec![vec![0.0f64; n]; n];
    for &(u, i) in edges {
        let (r, c) = (u as usize, num_users + i as usize);
        a[r][c] = 1.0;
        a[c][r] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let mut norm = vec![vec![0.0f64; n]; n];
    for r in 0..n {
        for c in 0..n {
            if a[r][c] != 0.0 {
                norm[r][c] = 1.0 / (deg[r].sqrt() * deg[c].sqrt());
            }
        }
    }
    let mut e: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            if r < num_users {
                users[r * dim..(r + 1) * dim].to_vec()
            } else {
                let i = r - num_users;
                items[i * dim..(i + 1) * dim].to_vec()
            }
        })
        .collect();
    let mut acc = e.clone();
    for _ in 0..layers {
        let mut next = vec![vec![0.0; dim]; n];
        for r in 0..n {
            for c in 0..n {
                if norm[r][c] != 0.0 {
                    for j in 0..dim {
                        next[r][j] += norm[r][c] * e[c][j];
                    }
                }
            }
        }
        for r in 0..n {
            for j in 0..dim {
                acc[r][j] += next[r][j];
            }
        }
        e = next;
    }
    let scale = 1.0 / (layers as f64 + 1.0);
    let flat: Vec<f64> = acc.into_iter().flatten().map(|x| x * scale).collect();
    let split = num_users * dim;
    (flat[..split].to_vec(), flat[split..].to_vec())
}

/// Central finite difference of the composite loss along one coordinate.
pub fn finite_difference(
    batch: &[TrainTriple],
    emb: &EmbeddingSet,
    hp: &HyperParams,
    table: TableId,
    row: usize,
    col: usize,
    h: f64,
) -> f64 {
    let mut plus = emb.clone();
    plus.table_mut(table).row_mut(row)[col] += h;
    let mut minus = emb.clone();
    minus.table_mut(table).row_mut(row)[col] -= h;
    (composite_loss(batch, &plus, hp).total - composite_loss(batch, &minus, hp).total) / (2.0 * h)
}

/// Per-stage (five-star count of item, five-star total, item count, total)
/// by direct counting over a (ts, user, item)-sorted copy.
pub fn brute_stage_counts(
    events: &[RatedEvent],
    stages: usize,
    item: u32,
) -> Vec<(usize, usize, usize, usize)> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(|e| (e.timestamp, e.user, e.item));
    let n = sorted.len();
    let mut out = vec![(0, 0, 0, 0); stages];
    // position p lands in the first stage whose cumulative size exceeds p
    let sizes: Vec<usize> = (0..stages)
        .map(|s| n / stages + if s < n % stages { 1 } else { 0 })
        .collect();
    let mut bounds = Vec::new();
    let mut run = 0;
    for s in &sizes {
        run += s;
        bounds.push(run);
    }
    for (p, e) in sorted.iter().enumerate() {
        let s = bounds.iter().position(|&b| p < b).unwrap();
        let five = e.stars == 5.0;
        let o = &mut out[s];
        if five && e.item == item {
            o.0 += 1;
        }
        if five {
            o.1 += 1;
        }
        if e.item == item {
            o.2 += 1;
        }
        o.3 += 1;
    }
    out
}

/// Sample Pearson via the two-pass textbook formula.
pub fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx: f64 = x.iter().sum::<f64>() / n;
    let my: f64 = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Tiny deterministic generator for test fixtures (SplitMix64).
pub struct Fixture(u64);

impl Fixture {
    pub fn new(seed: u64) -> Self {
        Fixture(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform in [-1, 1).
    pub fn signed(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    /// `k` distinct values from `0..n`, sorted.
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<u32> {
        let mut pool: Vec<u32> = (0..n as u32).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut out = pool[..k].to_vec();
        out.sort_unstable();
        out
    }
}
