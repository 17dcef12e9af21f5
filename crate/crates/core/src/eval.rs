//! Top-K ranking metrics: Recall, HR, NDCG, overlap with the most popular
//! items, and relative improvement against a reference run.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{dot, EmbeddingSet, SplitDataset};

/// Descending score, then ascending item id.
fn rank_order(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// The `k` best items for `user` by debiased score, skipping `exclude`
/// (sorted train positives of the user).
pub fn rank_topk(emb: &EmbeddingSet, exclude: &[u32], user: usize, k: usize) -> Result<Vec<u32>> {
    let available = emb.num_items() - exclude.len();
    if k > available {
        return Err(Error::KTooLarge { user, k, available });
    }
    let w = emb.user_debiased.row(user);
    let mut scored: Vec<(f64, u32)> = (0..emb.num_items() as u32)
        .filter(|i| exclude.binary_search(i).is_err())
        .map(|i| (dot(w, emb.item_debiased.row(i as usize)), i))
        .collect();
    Ok(select_top(&mut scored, k))
}

pub(crate) fn select_top(scored: &mut Vec<(f64, u32)>, k: usize) -> Vec<u32> {
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    scored.iter().map(|&(_, i)| i).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub recall: f64,
    pub hr: f64,
    pub ndcg: f64,
}

/// Metrics of one ranked list against a non-empty truth set (sorted ids).
///
/// NDCG uses binary relevance with the ideal DCG truncated at
/// `min(k, |truth|)`.
pub fn recall_hr_ndcg(topk: &[u32], truth: &[u32], k: usize) -> Result<RankMetrics> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let mut hits = 0usize;
    let mut dcg = 0.0;
    for (r, item) in topk.iter().take(k).enumerate() {
        if truth.binary_search(item).is_ok() {
            hits += 1;
            dcg += 1.0 / ((r + 2) as f64).log2();
        }
    }
    let idcg: f64 = (0..k.min(truth.len()))
        .map(|r| 1.0 / ((r + 2) as f64).log2())
        .sum();
    Ok(RankMetrics {
        recall: hits as f64 / truth.len() as f64,
        hr: if hits > 0 { 1.0 } else { 0.0 },
        ndcg: if idcg > 0.0 { dcg / idcg } else { 0.0 },
    })
}

/// The `k` most train-popular items, ties by ascending id.
pub fn top_popular(popularity: &[u32], k: usize) -> Vec<u32> {
    let mut scored: Vec<(f64, u32)> = popularity
        .iter()
        .enumerate()
        .map(|(i, &p)| (p as f64, i as u32))
        .collect();
    select_top(&mut scored, k.min(popularity.len()))
}

/// `|a ∩ b| / |a ∪ b|` of two id lists; zero when both are empty.
pub fn iou(a: &[u32], b: &[u32]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    let inter = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean over users of the IOU between each user's top-`k` list and the
/// `k` most popular items.
pub fn iou_with_popular(topk_per_user: &[Vec<u32>], popularity: &[u32], k: usize) -> f64 {
    if topk_per_user.is_empty() {
        return 0.0;
    }
    let pop_k = top_popular(popularity, k);
    let sum: f64 = topk_per_user
        .iter()
        .map(|list| iou(&list[..k.min(list.len())], &pop_k))
        .sum();
    sum / topk_per_user.len() as f64
}

/// Signed percentage change of `method` relative to `reference`.
pub fn improvement(method: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(100.0 * (method - reference) / reference)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMetrics {
    pub recall: f64,
    pub hr: f64,
    pub ndcg: f64,
    pub iou: f64,
    /// Relative recall gain (%) against the reference run, when one is set.
    pub imp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_k: BTreeMap<usize, KMetrics>,
    pub users_evaluated: usize,
    /// Name of the run `imp` is measured against.
    pub reference: Option<String>,
}

/// Per-user metrics behind a report.
#[derive(Clone, Debug, PartialEq)]
pub struct UserEval {
    pub user: usize,
    /// Top list at the largest requested K.
    pub topk: Vec<u32>,
    pub per_k: Vec<(usize, RankMetrics)>,
}

/// Which held-out partition serves as ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Validation,
    Test,
}

/// Ranks every eligible user and returns per-user metrics in user order.
///
/// A user is evaluated when they have at least one train positive and a
/// non-empty truth set. Users with fewer candidates than the largest K are
/// ranked over all of their candidates.
pub fn evaluate_users(
    emb: &EmbeddingSet,
    ds: &SplitDataset,
    truth: Truth,
    ks: &[usize],
) -> Result<Vec<UserEval>> {
    let max_k = ks.iter().copied().max().unwrap_or(0);
    if max_k == 0 {
        return Err(Error::config("need at least one K >= 1"));
    }
    let train = ds.train_items_by_user();
    let truth = match truth {
        Truth::Validation => ds.validation_items_by_user(),
        Truth::Test => ds.test_items_by_user(),
    };
    let users: Vec<usize> = (0..ds.num_users)
        .filter(|&u| !train[u].is_empty() && !truth[u].is_empty())
        .collect();
    users
        .par_iter()
        .map(|&u| {
            let k = max_k.min(emb.num_items() - train[u].len());
            let topk = rank_topk(emb, &train[u], u, k)?;
            let per_k = ks
                .iter()
                .map(|&k| {
                    let list = &topk[..k.min(topk.len())];
                    Ok((k, recall_hr_ndcg(list, &truth[u], k)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(UserEval { user: u, topk, per_k })
        })
        .collect()
}

/// Aggregates per-user metrics into a report (means over users, in user order).
pub fn aggregate(users: &[UserEval], popularity: &[u32], ks: &[usize]) -> MetricsReport {
    let n = users.len();
    let mut per_k = BTreeMap::new();
    for (idx, &k) in ks.iter().enumerate() {
        let (mut r, mut h, mut g) = (0.0, 0.0, 0.0);
        for u in users {
            let m = &u.per_k[idx].1;
            r += m.recall;
            h += m.hr;
            g += m.ndcg;
        }
        let lists: Vec<Vec<u32>> = users.iter().map(|u| u.topk.clone()).collect();
        let iou = iou_with_popular(&lists, popularity, k);
        let denom = n.max(1) as f64;
        per_k.insert(
            k,
            KMetrics {
                recall: r / denom,
                hr: h / denom,
                ndcg: g / denom,
                iou,
                imp: None,
            },
        );
    }
    MetricsReport {
        per_k,
        users_evaluated: n,
        reference: None,
    }
}

pub fn evaluate(
    emb: &EmbeddingSet,
    ds: &SplitDataset,
    truth: Truth,
    ks: &[usize],
) -> Result<MetricsReport> {
    let users = evaluate_users(emb, ds, truth, ks)?;
    Ok(aggregate(&users, &ds.popularity, ks))
}

/// Mean Recall@k only; used for early stopping.
pub fn mean_recall(emb: &EmbeddingSet, ds: &SplitDataset, truth: Truth, k: usize) -> Result<f64> {
    let report = evaluate(emb, ds, truth, &[k])?;
    Ok(report.per_k[&k].recall)
}

impl MetricsReport {
    /// Fills `imp` for every K present in both reports.
    pub fn set_reference(&mut self, name: &str, reference: &MetricsReport) -> Result<()> {
        for (k, m) in self.per_k.iter_mut() {
            if let Some(r) = reference.per_k.get(k) {
                m.imp = Some(improvement(m.recall, r.recall)?);
            }
        }
        self.reference = Some(name.to_string());
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One CSV row per K, without header.
    pub fn csv_rows(&self, run_id: &str, method: &str, backbone: &str) -> String {
        let mut s = String::new();
        for (k, m) in &self.per_k {
            let imp = m.imp.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{run_id},{method},{backbone},{k},{},{},{},{},{imp}",
                m.recall, m.hr, m.ndcg, m.iou
            );
        }
        s
    }
}

pub const CSV_HEADER: &str = "run_id,method,backbone,k,recall,hr,ndcg,iou,imp";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Table;

    fn single_user(scores: &[f64]) -> EmbeddingSet {
        let mut emb = EmbeddingSet::zeros(1, scores.len(), 1);
        emb.user_debiased.row_mut(0)[0] = 1.0;
        emb.item_debiased = Table::from_vec(scores.len(), 1, scores.to_vec()).unwrap();
        emb
    }

    #[test]
    fn topk_sorted_by_score() {
        let emb = single_user(&[0.1, 0.9, 0.5]);
        assert_eq!(rank_topk(&emb, &[], 0, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn ties_break_by_id() {
        let emb = single_user(&[0.3, 0.3, 0.3]);
        assert_eq!(rank_topk(&emb, &[], 0, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn train_positives_are_excluded() {
        let emb = single_user(&[0.1, 0.9, 0.5, 0.7]);
        assert_eq!(rank_topk(&emb, &[1, 3], 0, 2).unwrap(), vec![2, 0]);
        assert!(matches!(
            rank_topk(&emb, &[1, 3], 0, 3),
            Err(Error::KTooLarge { available: 2, .. })
        ));
    }

    #[test]
    fn metric_examples() {
        let m = recall_hr_ndcg(&[0, 1], &[0, 1], 2).unwrap();
        assert_eq!((m.recall, m.hr, m.ndcg), (1.0, 1.0, 1.0));
        let m = recall_hr_ndcg(&[9, 0], &[0], 2).unwrap();
        assert_eq!((m.recall, m.hr), (1.0, 1.0));
        assert!((m.ndcg - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((m.ndcg - 0.63093).abs() < 1e-5);
        let m = recall_hr_ndcg(&[8, 9], &[0], 2).unwrap();
        assert_eq!((m.recall, m.hr, m.ndcg), (0.0, 0.0, 0.0));
        assert!(matches!(recall_hr_ndcg(&[1], &[], 1), Err(Error::EmptyTruth)));
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&[1, 2], &[2, 3]), 1.0 / 3.0);
        assert_eq!(iou(&[1, 2], &[3, 4]), 0.0);
        let pop = [5, 9, 9, 1];
        let pop2 = top_popular(&pop, 2);
        assert_eq!(pop2, vec![1, 2]);
        assert_eq!(iou_with_popular(&[pop2.clone(), pop2], &pop, 2), 1.0);
        assert_eq!(iou_with_popular(&[vec![0, 3]], &pop, 2), 0.0);
    }

    #[test]
    fn improvement_examples() {
        let a = improvement(0.1724, 0.1276).unwrap();
        assert_eq!(format!("{a:+.2}"), "+35.11");
        let b = improvement(0.1626, 0.1276).unwrap();
        assert_eq!(format!("{b:+.2}"), "+27.43");
        assert_eq!(improvement(0.2, 0.2).unwrap(), 0.0);
        assert!(matches!(improvement(0.2, 0.0), Err(Error::ZeroReference)));
    }

    #[test]
    fn csv_rows_have_fixed_columns() {
        let mut per_k = BTreeMap::new();
        per_k.insert(20, KMetrics { recall: 0.5, hr: 1.0, ndcg: 0.25, iou: 0.1, imp: None });
        let r = MetricsReport { per_k, users_evaluated: 3, reference: None };
        assert_eq!(r.csv_rows("r1", "bpr", "mf"), "r1,bpr,mf,20,0.5,1,0.25,0.1,\n");
        assert_eq!(CSV_HEADER.split(',').count(), 9);
    }
}
