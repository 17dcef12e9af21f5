//! Scores, losses and their analytic gradients.
//!
//! For a triple `(v, p, n)` with debiased user `w`, base user `u`,
//! debiased items `z_p`, `z_n` and base item `i_p`:
//!
//! ```text
//! S_wz = <w, z_p>   S_uz = <u, z_p>   S_wi = <w, i_p>
//! L_u   = max(S_wz - S_uz + m, 0)
//! L_i   = max(S_wz - S_wi + m, 0)
//! L_BPR = -ln sigmoid(<w, z_p> - <w, z_n>)
//! L     = alpha * L_BPR + beta * (L_u + L_i)
//! ```
//!
//! Each term is averaged over the batch. The hinge subgradient at an
//! argument of exactly zero is zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{dot, EmbeddingSet, HingeOrientation, HyperParams, TableId, TrainTriple};

pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    Ok(dot(a, b))
}

/// `ln(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// BPR loss for one triple given the debiased user and item vectors.
pub fn bpr_loss(user: &[f64], pos: &[f64], neg: &[f64]) -> f64 {
    softplus(-(dot(user, pos) - dot(user, neg)))
}

/// Hinge arguments `(user side, item side)` before clamping at zero.
pub fn hinge_arguments(
    user_base: &[f64],
    user_debiased: &[f64],
    item_base: &[f64],
    item_debiased: &[f64],
    margin: f64,
    orientation: HingeOrientation,
) -> (f64, f64) {
    let s_wz = dot(user_debiased, item_debiased);
    let s_uz = dot(user_base, item_debiased);
    let s_wi = dot(user_debiased, item_base);
    match orientation {
        HingeOrientation::AsWritten => (s_wz - s_uz + margin, s_wz - s_wi + margin),
        HingeOrientation::Swapped => (s_uz - s_wz + margin, s_wi - s_wz + margin),
    }
}

/// `(L_u, L_i)` for one user / positive-item pair.
pub fn hinge_losses(
    user_base: &[f64],
    user_debiased: &[f64],
    item_base: &[f64],
    item_debiased: &[f64],
    margin: f64,
    orientation: HingeOrientation,
) -> (f64, f64) {
    let (a_u, a_i) = hinge_arguments(
        user_base,
        user_debiased,
        item_base,
        item_debiased,
        margin,
        orientation,
    );
    (a_u.max(0.0), a_i.max(0.0))
}

/// Gradient rows keyed by table and row id. Only rows touched by a batch
/// are present; iteration order is deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseGrad {
    dim: usize,
    tables: [BTreeMap<u32, Vec<f64>>; 4],
}

impl SparseGrad {
    pub fn new(dim: usize) -> Self {
        SparseGrad {
            dim,
            tables: Default::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `row += coef * v`
    pub fn add_scaled(&mut self, table: TableId, row: u32, coef: f64, v: &[f64]) {
        let dim = self.dim;
        let acc = self.tables[table.index()]
            .entry(row)
            .or_insert_with(|| vec![0.0; dim]);
        for (a, x) in acc.iter_mut().zip(v) {
            *a += coef * x;
        }
    }

    pub fn rows(&self, table: TableId) -> &BTreeMap<u32, Vec<f64>> {
        &self.tables[table.index()]
    }

    pub fn get(&self, table: TableId, row: u32) -> Option<&[f64]> {
        self.tables[table.index()].get(&row).map(Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.tables.iter().all(BTreeMap::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TableId, u32, &[f64])> {
        TableId::ALL.into_iter().flat_map(move |id| {
            self.tables[id.index()]
                .iter()
                .map(move |(&r, g)| (id, r, g.as_slice()))
        })
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|(_, _, g)| g.iter().all(|v| v.is_finite()))
    }
}

/// Loss values for one batch plus the gradient of `total`.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchLoss {
    /// Mean (optionally weighted) BPR term.
    pub l_bpr: f64,
    /// Mean user-side hinge.
    pub l_u: f64,
    /// Mean item-side hinge.
    pub l_i: f64,
    /// `bpr_weight * l_bpr + user_weight * l_u + item_weight * l_i`
    pub total: f64,
    pub grad: SparseGrad,
}

/// Term weights of a training objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub bpr_weight: f64,
    pub user_hinge_weight: f64,
    pub item_hinge_weight: f64,
    pub margin: f64,
    pub orientation: HingeOrientation,
}

impl Objective {
    /// Full dual-debiasing objective.
    pub fn dclmdb(hp: &HyperParams) -> Self {
        Objective {
            bpr_weight: hp.alpha,
            user_hinge_weight: hp.beta,
            item_hinge_weight: hp.beta,
            margin: hp.margin,
            orientation: hp.hinge_orientation,
        }
    }

    /// Conformity side only.
    pub fn user_only(hp: &HyperParams) -> Self {
        Objective {
            item_hinge_weight: 0.0,
            ..Objective::dclmdb(hp)
        }
    }

    /// Popularity side only.
    pub fn item_only(hp: &HyperParams) -> Self {
        Objective {
            user_hinge_weight: 0.0,
            ..Objective::dclmdb(hp)
        }
    }

    /// Plain BPR on the debiased pair.
    pub fn bpr(hp: &HyperParams) -> Self {
        Objective {
            user_hinge_weight: 0.0,
            item_hinge_weight: 0.0,
            ..Objective::dclmdb(hp)
        }
    }

    fn uses_hinges(&self) -> bool {
        self.user_hinge_weight != 0.0 || self.item_hinge_weight != 0.0
    }

    /// Evaluates the objective on `batch`. `bpr_weights`, when given, scales
    /// each triple's BPR term (inverse-propensity baselines).
    pub fn evaluate(
        &self,
        batch: &[TrainTriple],
        emb: &EmbeddingSet,
        bpr_weights: Option<&[f64]>,
    ) -> BatchLoss {
        let d = emb.dim();
        let mut grad = SparseGrad::new(d);
        if batch.is_empty() {
            return BatchLoss {
                l_bpr: 0.0,
                l_u: 0.0,
                l_i: 0.0,
                total: 0.0,
                grad,
            };
        }
        if let Some(w) = bpr_weights {
            assert_eq!(w.len(), batch.len(), "one BPR weight per triple");
        }
        let inv_b = 1.0 / batch.len() as f64;
        let (mut sum_bpr, mut sum_u, mut sum_i) = (0.0, 0.0, 0.0);
        let mut diff = vec![0.0; d];

        for (k, t) in batch.iter().enumerate() {
            let (v, p, n) = (t.user as usize, t.pos as usize, t.neg as usize);
            let w = emb.user_debiased.row(v);
            let u = emb.user_base.row(v);
            let zp = emb.item_debiased.row(p);
            let zn = emb.item_debiased.row(n);
            let ip = emb.item_base.row(p);

            // BPR: d/dx softplus(-x) = -sigmoid(-x)
            let weight = bpr_weights.map_or(1.0, |ws| ws[k]);
            let x = dot(w, zp) - dot(w, zn);
            sum_bpr += weight * softplus(-x);
            let c = -self.bpr_weight * inv_b * weight * sigmoid(-x);
            if c != 0.0 {
                for ((dj, a), b) in diff.iter_mut().zip(zp).zip(zn) {
                    *dj = a - b;
                }
                grad.add_scaled(TableId::UserDebiased, t.user, c, &diff);
                grad.add_scaled(TableId::ItemDebiased, t.pos, c, w);
                grad.add_scaled(TableId::ItemDebiased, t.neg, -c, w);
            }

            let (a_u, a_i) = hinge_arguments(u, w, ip, zp, self.margin, self.orientation);
            sum_u += a_u.max(0.0);
            sum_i += a_i.max(0.0);
            if !self.uses_hinges() {
                continue;
            }
            // as written: dL_u = (dw: z_p, dz_p: w - u, du: -z_p)
            //             dL_i = (dw: z_p - i_p, dz_p: w, di_p: -w)
            // swapped negates both.
            let sign = match self.orientation {
                HingeOrientation::AsWritten => 1.0,
                HingeOrientation::Swapped => -1.0,
            };
            if a_u > 0.0 && self.user_hinge_weight != 0.0 {
                let c = sign * self.user_hinge_weight * inv_b;
                grad.add_scaled(TableId::UserDebiased, t.user, c, zp);
                grad.add_scaled(TableId::ItemDebiased, t.pos, c, w);
                grad.add_scaled(TableId::ItemDebiased, t.pos, -c, u);
                grad.add_scaled(TableId::UserBase, t.user, -c, zp);
            }
            if a_i > 0.0 && self.item_hinge_weight != 0.0 {
                let c = sign * self.item_hinge_weight * inv_b;
                grad.add_scaled(TableId::UserDebiased, t.user, c, zp);
                grad.add_scaled(TableId::UserDebiased, t.user, -c, ip);
                grad.add_scaled(TableId::ItemDebiased, t.pos, c, w);
                grad.add_scaled(TableId::ItemBase, t.pos, -c, w);
            }
        }

        let l_bpr = sum_bpr * inv_b;
        let l_u = sum_u * inv_b;
        let l_i = sum_i * inv_b;
        BatchLoss {
            l_bpr,
            l_u,
            l_i,
            total: self.bpr_weight * l_bpr + self.user_hinge_weight * l_u + self.item_hinge_weight * l_i,
            grad,
        }
    }
}

/// Full objective with gradients for a batch.
pub fn composite_loss(batch: &[TrainTriple], emb: &EmbeddingSet, hp: &HyperParams) -> BatchLoss {
    Objective::dclmdb(hp).evaluate(batch, emb, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IpsVariant {
    /// `1 / popularity`
    Ips,
    /// `min(1 / popularity, cap)`
    Capped,
    /// Capped weights divided by their batch mean.
    CappedNormalized,
}

/// Per-item inverse-propensity weight before any batch normalization.
pub fn ips_weight(popularity: u32, item: usize, variant: IpsVariant, cap: f64) -> Result<f64> {
    if popularity == 0 {
        return Err(Error::ZeroPopularity(item));
    }
    let w = 1.0 / popularity as f64;
    Ok(match variant {
        IpsVariant::Ips => w,
        IpsVariant::Capped | IpsVariant::CappedNormalized => w.min(cap),
    })
}

/// Rescales weights to mean one. All-zero or empty input is left as is.
pub fn normalize_batch_weights(weights: &mut [f64]) {
    if weights.is_empty() {
        return;
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    if mean > 0.0 {
        weights.iter_mut().for_each(|w| *w /= mean);
    }
}

/// Weights for every triple of a batch, keyed by the positive item.
pub fn ips_batch_weights(
    batch: &[TrainTriple],
    popularity: &[u32],
    variant: IpsVariant,
    cap: f64,
) -> Result<Vec<f64>> {
    let mut ws = batch
        .iter()
        .map(|t| ips_weight(popularity[t.pos as usize], t.pos as usize, variant, cap))
        .collect::<Result<Vec<f64>>>()?;
    if variant == IpsVariant::CappedNormalized {
        normalize_batch_weights(&mut ws);
    }
    Ok(ws)
}
