//! Synthetic interaction logs with known popularity and conformity effects.
//!
//! Generative roles:
//!
//! * genuine user preference `g_u` and item attributes `a_i`, i.i.d. normal;
//! * item popularity score `z_i`, Zipf over a random item ranking;
//! * conformity pulls each user's expressed preference toward the
//!   population mean: `u_obs = (g_u + λ_w · mean(g)) / (1 + λ_w)`;
//! * biased exposure draws items `∝ z_i^λ_z`;
//! * a biased click fires with probability
//!   `σ(u_obs·a_i + λ_z·std(z)_i + λ_w·std(praise)_i + offset)`, where
//!   praise is the item's click count so far, refreshed each round;
//! * the unbiased log exposes items uniformly and clicks with
//!   `σ(g_u·a_i + offset)`.
//!
//! The unbiased log reads only `g`, `a` and its own random stream, so it is
//! identical for any popularity or conformity weight under a fixed seed.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::audit::RatedEvent;
use crate::error::{Error, Result};
use crate::ingest::RawRecord;
use crate::objective::sigmoid;
use crate::split::write_split;
use crate::types::{dot, Interaction, SplitDataset, Table};

const STREAM_LATENT: u64 = 1;
const STREAM_POPULARITY: u64 = 2;
const STREAM_BIASED: u64 = 3;
const STREAM_UNBIASED: u64 = 4;
const STREAM_SPLIT: u64 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_users: usize,
    pub num_items: usize,
    pub latent_dim: usize,
    /// Strength of popularity on exposure and clicks.
    pub popularity_weight: f64,
    /// Strength of conformity on preferences and clicks.
    pub conformity_weight: f64,
    /// Biased exposures per user.
    pub interactions_per_user: usize,
    /// Uniform exposures per user in the unbiased log.
    pub unbiased_per_user: usize,
    /// Generation rounds; crowd praise is refreshed between rounds.
    pub rounds: usize,
    /// Zipf shape of the popularity scores.
    pub popularity_exponent: f64,
    /// Standard deviation of the genuine preference score `g_u · a_i`.
    pub preference_scale: f64,
    /// Standard deviation of the population mean preference, relative to
    /// the per-user spread.
    pub taste_mean_scale: f64,
    /// Logit offset of every click.
    pub click_offset: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_users: 2000,
            num_items: 500,
            latent_dim: 8,
            popularity_weight: 2.0,
            conformity_weight: 1.0,
            interactions_per_user: 100,
            unbiased_per_user: 30,
            rounds: 5,
            popularity_exponent: 0.5,
            preference_scale: 4.0,
            taste_mean_scale: 0.5,
            click_offset: -1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_users", self.num_users),
            ("num_items", self.num_items),
            ("latent_dim", self.latent_dim),
            ("interactions_per_user", self.interactions_per_user),
            ("rounds", self.rounds),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::config(format!("{name} must be >= 1")));
            }
        }
        for (name, v) in [
            ("popularity_weight", self.popularity_weight),
            ("conformity_weight", self.conformity_weight),
            ("popularity_exponent", self.popularity_exponent),
            ("preference_scale", self.preference_scale),
            ("taste_mean_scale", self.taste_mean_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.click_offset.is_finite() {
            return Err(Error::config("click_offset must be finite"));
        }
        if self.interactions_per_user > self.num_items || self.unbiased_per_user > self.num_items {
            return Err(Error::config("exposures per user exceed the item count"));
        }
        Ok(())
    }
}

/// Latent quantities behind a generated log.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Genuine preferences, one row per user.
    pub preference: Table,
    /// Preferences after the conformity pull.
    pub expressed_preference: Table,
    pub attributes: Table,
    pub popularity_score: Vec<f64>,
}

impl GroundTruth {
    /// Genuine preference score `g_u · a_i`.
    pub fn preference_score(&self, user: usize, item: usize) -> f64 {
        dot(self.preference.row(user), self.attributes.row(item))
    }

    /// Dense users × items matrix of genuine preference scores.
    pub fn preference_matrix(&self) -> Table {
        let (nu, ni) = (self.preference.rows(), self.attributes.rows());
        let mut out = Table::zeros(nu, ni);
        for u in 0..nu {
            for i in 0..ni {
                out.row_mut(u)[i] = self.preference_score(u, i);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SynthData {
    pub config: SynthConfig,
    /// Clicks under biased exposure.
    pub train: Vec<Interaction>,
    /// Clicks under uniform exposure driven by genuine preference only.
    pub test: Vec<Interaction>,
    pub truth: GroundTruth,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal_table(rng: &mut ChaCha8Rng, rows: usize, dim: usize, std: f64) -> Table {
    let mut t = Table::zeros(rows, dim);
    for v in t.as_mut_slice() {
        let z: f64 = rng.sample(StandardNormal);
        *v = std * z;
    }
    t
}

/// Zero-mean unit-variance copy; a constant vector maps to zeros.
fn standardize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return vec![0.0; xs.len()];
    }
    let sd = var.sqrt();
    xs.iter().map(|x| (x - mean) / sd).collect()
}

/// Up to `k` distinct items not yet in `seen`, drawn without replacement
/// with probability proportional to `weights` (exponential-key method).
fn weighted_without_replacement(
    rng: &mut ChaCha8Rng,
    weights: &[f64],
    seen: &[bool],
    k: usize,
) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .filter(|&(i, &w)| !seen[i] && w > 0.0)
        .map(|(i, &w)| {
            let u: f64 = rng.random::<f64>();
            // larger key wins: ln(u) / w
            ((1.0 - u).ln() / w, i)
        })
        .collect();
    let k = k.min(keyed.len());
    if k == 0 {
        return Vec::new();
    }
    keyed.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    keyed.truncate(k);
    keyed.sort_unstable_by_key(|&(_, i)| i);
    keyed.into_iter().map(|(_, i)| i).collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let (nu, ni, d) = (cfg.num_users, cfg.num_items, cfg.latent_dim);

    // Scores g·a have std preference_scale when g ~ N(0, s²/d), a ~ N(0, 1).
    let mut latent = rng(cfg.seed, STREAM_LATENT);
    let spread = cfg.preference_scale / (d as f64 * (1.0 + cfg.taste_mean_scale.powi(2))).sqrt();
    let taste_mean: Vec<f64> = (0..d)
        .map(|_| cfg.taste_mean_scale * spread * latent.sample::<f64, _>(StandardNormal))
        .collect();
    let mut preference = normal_table(&mut latent, nu, d, spread);
    for u in 0..nu {
        for (p, m) in preference.row_mut(u).iter_mut().zip(&taste_mean) {
            *p += m;
        }
    }
    let attributes = normal_table(&mut latent, ni, d, 1.0);

    let mut pop_rng = rng(cfg.seed, STREAM_POPULARITY);
    let mut ranks: Vec<usize> = (1..=ni).collect();
    ranks.shuffle(&mut pop_rng);
    let popularity_score: Vec<f64> = ranks
        .iter()
        .map(|&r| (r as f64).powf(-cfg.popularity_exponent))
        .collect();

    let crowd_mean: Vec<f64> = (0..d)
        .map(|j| (0..nu).map(|u| preference.row(u)[j]).sum::<f64>() / nu as f64)
        .collect();
    let lw = cfg.conformity_weight;
    let mut expressed = preference.clone();
    for u in 0..nu {
        for (e, m) in expressed.row_mut(u).iter_mut().zip(&crowd_mean) {
            *e = (*e + lw * m) / (1.0 + lw);
        }
    }

    let truth = GroundTruth {
        preference,
        expressed_preference: expressed,
        attributes,
        popularity_score,
    };
    let train = biased_log(cfg, &truth);
    let test = unbiased_log(cfg, &truth.preference, &truth.attributes, nu * cfg.rounds);
    Ok(SynthData {
        config: cfg.clone(),
        train,
        test,
        truth,
    })
}

fn biased_log(cfg: &SynthConfig, truth: &GroundTruth) -> Vec<Interaction> {
    let (nu, ni) = (cfg.num_users, cfg.num_items);
    let lz = cfg.popularity_weight;
    let lw = cfg.conformity_weight;
    let mut r = rng(cfg.seed, STREAM_BIASED);
    let exposure: Vec<f64> = truth.popularity_score.iter().map(|z| z.powf(lz)).collect();
    let z_std = standardize(&truth.popularity_score);
    let mut seen = vec![vec![false; ni]; nu];
    let mut clicks = vec![0usize; ni];
    let mut out = Vec::new();
    let mut clock = 0i64;

    for round in 0..cfg.rounds {
        let praise = standardize(&clicks.iter().map(|&c| c as f64).collect::<Vec<_>>());
        let mut new_clicks = vec![0usize; ni];
        // spread the per-user budget over rounds, earlier rounds take the remainder
        let per_round = cfg.interactions_per_user / cfg.rounds
            + usize::from(round < cfg.interactions_per_user % cfg.rounds);
        for (u, seen_u) in seen.iter_mut().enumerate() {
            let items = weighted_without_replacement(&mut r, &exposure, seen_u, per_round);
            for i in items {
                seen_u[i] = true;
                let logit = dot(truth.expressed_preference.row(u), truth.attributes.row(i))
                    + lz * z_std[i]
                    + lw * praise[i]
                    + cfg.click_offset;
                clock += 1;
                if r.random::<f64>() < sigmoid(logit) {
                    new_clicks[i] += 1;
                    out.push(Interaction::positive(u as u32, i as u32, clock));
                }
            }
        }
        for (c, n) in clicks.iter_mut().zip(new_clicks) {
            *c += n;
        }
    }
    out
}

/// Uniform-exposure clicks from genuine preference only.
fn unbiased_log(cfg: &SynthConfig, preference: &Table, attributes: &Table, t0: usize) -> Vec<Interaction> {
    let (nu, ni) = (cfg.num_users, cfg.num_items);
    let mut r = rng(cfg.seed, STREAM_UNBIASED);
    let mut items: Vec<usize> = (0..ni).collect();
    let mut out = Vec::new();
    let mut clock = (t0 * ni) as i64;
    for u in 0..nu {
        let (chosen, _) = items.partial_shuffle(&mut r, cfg.unbiased_per_user);
        let mut chosen = chosen.to_vec();
        chosen.sort_unstable();
        for i in chosen {
            let logit = dot(preference.row(u), attributes.row(i)) + cfg.click_offset;
            clock += 1;
            if r.random::<f64>() < sigmoid(logit) {
                out.push(Interaction::positive(u as u32, i as u32, clock));
            }
        }
    }
    out
}

/// Gini coefficient of per-item interaction counts (0 = perfectly even).
pub fn gini(num_items: usize, xs: &[Interaction]) -> f64 {
    let mut counts = vec![0f64; num_items];
    for x in xs {
        counts[x.item as usize] += 1.0;
    }
    gini_of(&mut counts)
}

fn gini_of(values: &mut [f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total == 0.0 {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let weighted: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| (2.0 * (k as f64 + 1.0) - n as f64 - 1.0) * v)
        .sum();
    weighted / (n as f64 * total)
}

impl SynthData {
    /// Train on the biased log; validation and test from the unbiased log
    /// (minus pairs already in train), `val_share` of it to validation.
    pub fn to_split(&self, val_share: f64) -> Result<SplitDataset> {
        if !(0.0..=1.0).contains(&val_share) {
            return Err(Error::config("val_share must be in [0, 1]"));
        }
        let train_pairs: HashSet<(u32, u32)> = self.train.iter().map(Interaction::pair).collect();
        let mut held: Vec<Interaction> = self
            .test
            .iter()
            .filter(|x| !train_pairs.contains(&x.pair()))
            .copied()
            .collect();
        held.shuffle(&mut rng(self.config.seed, STREAM_SPLIT));
        let n_val = (val_share * held.len() as f64).floor() as usize;
        let mut validation = held[..n_val].to_vec();
        let mut test = held[n_val..].to_vec();
        validation.sort_unstable();
        test.sort_unstable();
        let ds = SplitDataset::new(
            self.config.num_users,
            self.config.num_items,
            self.train.clone(),
            validation,
            test,
            0.0,
        );
        ds.validate()?;
        Ok(ds)
    }

    pub fn manifest(&self) -> SynthManifest {
        let ni = self.config.num_items;
        SynthManifest {
            config: self.config.clone(),
            train_interactions: self.train.len(),
            unbiased_interactions: self.test.len(),
            gini_train: gini(ni, &self.train),
            gini_unbiased: gini(ni, &self.test),
        }
    }

    /// Writes the split layout plus `synth.json`.
    pub fn write(&self, dir: impl AsRef<Path>, val_share: f64) -> Result<()> {
        let dir = dir.as_ref();
        write_split(dir, &self.to_split(val_share)?, None)?;
        let path = dir.join("synth.json");
        fs::write(&path, serde_json::to_string_pretty(&self.manifest())?)
            .map_err(|e| Error::io(&path, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub config: SynthConfig,
    pub train_interactions: usize,
    pub unbiased_interactions: usize,
    pub gini_train: f64,
    pub gini_unbiased: f64,
}

/// Star-rated log where each item's popularity and praise follow one shared
/// latent trend.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub num_users: usize,
    pub num_items: usize,
    /// Time steps; each becomes one audit stage when the stage count matches.
    pub steps: usize,
    pub events_per_step: usize,
    /// Std of the per-step log-trend random walk.
    pub volatility: f64,
    /// How strongly the trend raises the five-star probability.
    pub praise_sensitivity: f64,
    pub seed: u64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            num_users: 500,
            num_items: 100,
            steps: 20,
            events_per_step: 5000,
            volatility: 0.3,
            praise_sensitivity: 1.0,
            seed: 0,
        }
    }
}

pub fn generate_trend_log(cfg: &TrendConfig) -> Result<Vec<RatedEvent>> {
    if cfg.num_users == 0 || cfg.num_items == 0 || cfg.steps == 0 || cfg.events_per_step == 0 {
        return Err(Error::config("trend log sizes must be >= 1"));
    }
    let mut r = rng(cfg.seed, STREAM_LATENT);
    let ni = cfg.num_items;
    let mut log_trend: Vec<f64> = (0..ni).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let mut out = Vec::with_capacity(cfg.steps * cfg.events_per_step);
    for step in 0..cfg.steps {
        if step > 0 {
            for t in &mut log_trend {
                *t += cfg.volatility * r.sample::<f64, _>(StandardNormal);
            }
        }
        let mean = log_trend.iter().sum::<f64>() / ni as f64;
        let weights: Vec<f64> = log_trend.iter().map(|t| t.exp()).collect();
        let total: f64 = weights.iter().sum();
        let cdf: Vec<f64> = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w / total;
                Some(*acc)
            })
            .collect();
        for k in 0..cfg.events_per_step {
            let x: f64 = r.random();
            let item = cdf.partition_point(|&c| c < x).min(ni - 1);
            let p5 = sigmoid(cfg.praise_sensitivity * (log_trend[item] - mean));
            let stars = if r.random::<f64>() < p5 {
                5.0
            } else {
                r.random_range(1..=4) as f64
            };
            out.push(RatedEvent {
                user: r.random_range(0..cfg.num_users as u32),
                item: item as u32,
                stars,
                timestamp: (step * cfg.events_per_step + k) as i64,
            });
        }
    }
    Ok(out)
}

/// Renders rated events as raw records with decimal ids.
pub fn to_raw_records(events: &[RatedEvent]) -> Vec<RawRecord> {
    events
        .iter()
        .map(|e| RawRecord {
            user: e.user.to_string(),
            item: e.item.to_string(),
            rating: e.stars,
            timestamp: e.timestamp,
        })
        .collect()
}
