//! Optimization loop: sampled batches, objective, sparse Adam, validation
//! early stopping.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::backbone::{effective_embeddings, init_embeddings, NormalizedGraph};
use crate::error::{Error, Result};
use crate::eval::{mean_recall, Truth};
use crate::objective::{ips_batch_weights, BatchLoss, IpsVariant, Objective, SparseGrad};
use crate::sampler::{worker_seed, SamplerState};
use crate::types::{Backbone, EmbeddingSet, HyperParams, SplitDataset, Table, TableId};

/// Recall cutoff used for model selection.
pub const SELECTION_K: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dclmdb,
    DclmdbUser,
    DclmdbItem,
    Bpr,
    Ips,
    IpsC,
    IpsCn,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Dclmdb,
        Method::DclmdbUser,
        Method::DclmdbItem,
        Method::Bpr,
        Method::Ips,
        Method::IpsC,
        Method::IpsCn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dclmdb => "dclmdb",
            Method::DclmdbUser => "dclmdb-user",
            Method::DclmdbItem => "dclmdb-item",
            Method::Bpr => "bpr",
            Method::Ips => "ips",
            Method::IpsC => "ips-c",
            Method::IpsCn => "ips-cn",
        }
    }

    fn objective(self, hp: &HyperParams) -> Objective {
        match self {
            Method::Dclmdb => Objective::dclmdb(hp),
            Method::DclmdbUser => Objective::user_only(hp),
            Method::DclmdbItem => Objective::item_only(hp),
            Method::Bpr | Method::Ips | Method::IpsC | Method::IpsCn => Objective::bpr(hp),
        }
    }

    fn ips_variant(self) -> Option<IpsVariant> {
        match self {
            Method::Ips => Some(IpsVariant::Ips),
            Method::IpsC => Some(IpsVariant::Capped),
            Method::IpsCn => Some(IpsVariant::CappedNormalized),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let valid: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::config(format!(
                    "unknown method '{s}' (valid: {})",
                    valid.join(", ")
                ))
            })
    }
}

/// First and second moment estimates shaped like the embedding tables.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first: EmbeddingSet,
    second: EmbeddingSet,
}

impl AdamState {
    pub fn new(num_users: usize, num_items: usize, dim: usize) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: EmbeddingSet::zeros(num_users, num_items, dim),
            second: EmbeddingSet::zeros(num_users, num_items, dim),
        }
    }

    pub fn first_moment(&self, table: TableId, row: usize) -> &[f64] {
        self.first.table(table).row(row)
    }

    pub fn second_moment(&self, table: TableId, row: usize) -> &[f64] {
        self.second.table(table).row(row)
    }
}

/// Bias-corrected Adam update applied only to the rows present in `grads`.
pub fn adam_step(params: &mut EmbeddingSet, grads: &SparseGrad, state: &mut AdamState, lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (table, row, g) in grads.iter() {
        let r = row as usize;
        let m = state.first.table_mut(table).row_mut(r);
        let v = state.second.table_mut(table).row_mut(r);
        let p = params.table_mut(table).row_mut(r);
        for j in 0..g.len() {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub total: f64,
    pub bpr: f64,
    pub l_u: f64,
    pub l_i: f64,
    pub val_recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub method: Method,
    pub backbone: Backbone,
    pub epochs: Vec<EpochStats>,
    /// Best validation Recall@20, when a validation set exists.
    pub best_val_recall: Option<f64>,
    /// Epoch whose parameters were returned (`None` when no epoch ran).
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
    pub wall_time_secs: f64,
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct Trained {
    /// Selected trainable parameters.
    pub base: EmbeddingSet,
    /// Embeddings after the backbone; what gets scored and checkpointed.
    pub scoring: EmbeddingSet,
    pub report: TrainReport,
}

fn backprop(
    grad: SparseGrad,
    graph: Option<&NormalizedGraph>,
    hp: &HyperParams,
    num_users: usize,
    num_items: usize,
) -> SparseGrad {
    let Some(graph) = graph.filter(|_| hp.backbone == Backbone::LightGcn) else {
        return grad;
    };
    let d = grad.dim();
    let mut dense = EmbeddingSet::zeros(num_users, num_items, d);
    for (table, row, g) in grad.iter() {
        dense.table_mut(table).row_mut(row as usize).copy_from_slice(g);
    }
    let (gu, gi) = graph.propagate(&dense.user_base, &dense.item_base, hp.gcn_layers);
    let (gw, gz) = graph.propagate(&dense.user_debiased, &dense.item_debiased, hp.gcn_layers);
    let mut out = SparseGrad::new(d);
    for (id, table) in [
        (TableId::UserBase, &gu),
        (TableId::ItemBase, &gi),
        (TableId::UserDebiased, &gw),
        (TableId::ItemDebiased, &gz),
    ] {
        push_nonzero_rows(&mut out, id, table);
    }
    out
}

fn push_nonzero_rows(out: &mut SparseGrad, id: TableId, table: &Table) {
    for r in 0..table.rows() {
        let row = table.row(r);
        if row.iter().any(|&v| v != 0.0) {
            out.add_scaled(id, r as u32, 1.0, row);
        }
    }
}

fn check_finite(loss: &BatchLoss, epoch: usize) -> Result<()> {
    if !(loss.total.is_finite() && loss.l_bpr.is_finite() && loss.l_u.is_finite() && loss.l_i.is_finite())
    {
        return Err(Error::Diverged {
            epoch,
            what: format!("non-finite loss {}", loss.total),
        });
    }
    if !loss.grad.is_finite() {
        return Err(Error::Diverged {
            epoch,
            what: "non-finite gradient".into(),
        });
    }
    Ok(())
}

/// Trains `method` on `ds` and returns the parameters with the best
/// validation Recall@20 (or the last epoch when there is no validation set
/// or patience is zero).
pub fn train(ds: &SplitDataset, hp: &HyperParams, method: Method) -> Result<Trained> {
    hp.validate()?;
    ds.validate()?;
    let started = Instant::now();
    let graph = match hp.backbone {
        Backbone::Mf => None,
        Backbone::LightGcn => Some(NormalizedGraph::from_interactions(
            ds.num_users,
            ds.num_items,
            &ds.train,
        )),
    };
    let mut emb = init_embeddings(ds.num_users, ds.num_items, hp.dim, hp.seed, hp.init_std);
    let mut adam = AdamState::new(ds.num_users, ds.num_items, hp.dim);
    let mut sampler = SamplerState::new(ds, hp.pnsm_margin, hp.pnsm_mode, worker_seed(hp.seed, 0));
    let objective = method.objective(hp);
    let ips = method.ips_variant();
    let select = !ds.validation.is_empty() && hp.patience > 0;

    let mut stats = Vec::with_capacity(hp.epochs);
    let mut best: Option<(f64, usize, EmbeddingSet)> = None;
    let mut since_best = 0usize;
    let mut stopped_early = false;

    for epoch in 0..hp.epochs {
        let batches = sampler.epoch_batches(hp.batch_size, hp.negatives_per_positive)?;
        let (mut total, mut bpr, mut l_u, mut l_i) = (0.0, 0.0, 0.0, 0.0);
        for batch in &batches {
            let eff: Cow<EmbeddingSet> = match hp.backbone {
                Backbone::Mf => Cow::Borrowed(&emb),
                Backbone::LightGcn => Cow::Owned(effective_embeddings(&emb, graph.as_ref(), hp)?),
            };
            let weights = match ips {
                Some(v) => Some(ips_batch_weights(batch, &ds.popularity, v, hp.ips_cap)?),
                None => None,
            };
            let loss = objective.evaluate(batch, &eff, weights.as_deref());
            drop(eff);
            check_finite(&loss, epoch)?;
            total += loss.total;
            bpr += loss.l_bpr;
            l_u += loss.l_u;
            l_i += loss.l_i;
            let grad = backprop(loss.grad, graph.as_ref(), hp, ds.num_users, ds.num_items);
            adam_step(&mut emb, &grad, &mut adam, hp.lr);
        }
        if !emb.is_finite() {
            return Err(Error::Diverged {
                epoch,
                what: "non-finite embeddings".into(),
            });
        }
        let nb = batches.len().max(1) as f64;
        let mut row = EpochStats {
            epoch,
            total: total / nb,
            bpr: bpr / nb,
            l_u: l_u / nb,
            l_i: l_i / nb,
            val_recall: None,
        };

        if select {
            let scoring = effective_embeddings(&emb, graph.as_ref(), hp)?;
            let recall = mean_recall(&scoring, ds, Truth::Validation, SELECTION_K)?;
            row.val_recall = Some(recall);
            if best.as_ref().is_none_or(|(b, _, _)| recall > *b) {
                best = Some((recall, epoch, emb.clone()));
                since_best = 0;
            } else {
                since_best += 1;
            }
        }
        debug!(
            "{method} epoch {epoch}: total {:.6} bpr {:.6} l_u {:.6} l_i {:.6} val {:?}",
            row.total, row.bpr, row.l_u, row.l_i, row.val_recall
        );
        stats.push(row);
        if select && since_best >= hp.patience {
            stopped_early = true;
            break;
        }
    }

    let (best_val_recall, best_epoch, base) = match best {
        Some((r, e, params)) => (Some(r), Some(e), params),
        None => (None, stats.last().map(|s| s.epoch), emb),
    };
    let scoring = effective_embeddings(&base, graph.as_ref(), hp)?;
    let report = TrainReport {
        method,
        backbone: hp.backbone,
        epochs: stats,
        best_val_recall,
        best_epoch,
        stopped_early,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    info!(
        "{method}/{}: {} epochs, best epoch {:?}, val recall@{SELECTION_K} {:?}",
        hp.backbone,
        report.epochs.len(),
        report.best_epoch,
        report.best_val_recall
    );
    Ok(Trained {
        base,
        scoring,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_grad(g: f64) -> SparseGrad {
        let mut grad = SparseGrad::new(1);
        grad.add_scaled(TableId::UserDebiased, 0, 1.0, &[g]);
        grad
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut p = EmbeddingSet::zeros(1, 1, 1);
        let mut st = AdamState::new(1, 1, 1);
        adam_step(&mut p, &scalar_grad(1.0), &mut st, 0.001);
        // m_hat = 1, v_hat = 1 at t = 1
        let want = -0.001 * 1.0 / (1.0 + 1e-8);
        assert!((p.user_debiased.row(0)[0] - want).abs() < 1e-18);
    }

    #[test]
    fn adam_zero_lr_and_zero_grad_leave_params() {
        let mut p = EmbeddingSet::zeros(1, 1, 1);
        p.user_debiased.row_mut(0)[0] = 0.7;
        let mut st = AdamState::new(1, 1, 1);
        adam_step(&mut p, &scalar_grad(3.0), &mut st, 0.0);
        assert_eq!(p.user_debiased.row(0)[0], 0.7);

        let mut p2 = p.clone();
        let mut fresh = AdamState::new(1, 1, 1);
        adam_step(&mut p2, &scalar_grad(0.0), &mut fresh, 0.01);
        assert_eq!(p2, p);
        assert_eq!(fresh.first_moment(TableId::UserDebiased, 0), &[0.0]);

        // moments decay under a zero gradient after accumulating
        let before = st.first_moment(TableId::UserDebiased, 0)[0];
        adam_step(&mut p, &scalar_grad(0.0), &mut st, 0.0);
        let after = st.first_moment(TableId::UserDebiased, 0)[0];
        assert!(after.abs() < before.abs());
    }

    #[test]
    fn untouched_rows_are_not_updated() {
        let mut p = EmbeddingSet::zeros(2, 1, 1);
        p.user_debiased.row_mut(1)[0] = 0.5;
        let mut st = AdamState::new(2, 1, 1);
        adam_step(&mut p, &scalar_grad(1.0), &mut st, 0.1);
        assert_eq!(p.user_debiased.row(1)[0], 0.5);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        let err = "dice".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("dclmdb-user") && err.contains("ips-cn"));
    }
}
