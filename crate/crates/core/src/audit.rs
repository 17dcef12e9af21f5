//! Popularity / conformity correlation audit.
//!
//! The log is cut into `T` time-ordered stages. Per stage `t` and item `i`,
//! the local praise rate is the item's share of five-star ratings and the
//! local popularity is its share of all interactions. A high Pearson
//! correlation between the two series means the biases move together.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of stages.
pub const DEFAULT_STAGES: usize = 20;
/// Default number of audited items.
pub const DEFAULT_TOP_ITEMS: usize = 10;

/// A star-rated interaction with dense ids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatedEvent {
    pub user: u32,
    pub item: u32,
    pub stars: f64,
    pub timestamp: i64,
}

impl RatedEvent {
    pub fn is_five_star(&self) -> bool {
        self.stars == 5.0
    }
}

/// Sorts by timestamp and cuts into `stages` contiguous buckets whose sizes
/// differ by at most one (earlier buckets take the extra element).
pub fn stage_split(events: &[RatedEvent], stages: usize) -> Result<Vec<Vec<RatedEvent>>> {
    if events.is_empty() {
        return Err(Error::EmptyInput);
    }
    if stages == 0 || stages > events.len() {
        return Err(Error::config(format!(
            "stage count {stages} must be in 1..={}",
            events.len()
        )));
    }
    let mut sorted = events.to_vec();
    sorted.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(a.user.cmp(&b.user))
            .then(a.item.cmp(&b.item))
    });
    let base = sorted.len() / stages;
    let extra = sorted.len() % stages;
    let mut out = Vec::with_capacity(stages);
    let mut start = 0;
    for s in 0..stages {
        let len = base + usize::from(s < extra);
        out.push(sorted[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

/// Per-stage praise-rate and popularity shares of one item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasSeries {
    pub item: u32,
    /// `None` where the stage has no five-star ratings at all.
    pub praise_rate: Vec<Option<f64>>,
    pub popularity_share: Vec<f64>,
}

impl BiasSeries {
    pub fn stages(&self) -> usize {
        self.popularity_share.len()
    }

    /// Pearson correlation over stages where the praise rate is defined.
    pub fn pearson(&self) -> Result<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .praise_rate
            .iter()
            .zip(&self.popularity_share)
            .filter_map(|(r, m)| r.map(|r| (r, *m)))
            .unzip();
        pearson(&x, &y)
    }
}

/// Stage totals needed by every item's series.
struct StageCounts {
    five_star_total: usize,
    total: usize,
}

fn stage_counts(buckets: &[Vec<RatedEvent>]) -> Vec<StageCounts> {
    buckets
        .iter()
        .map(|b| StageCounts {
            five_star_total: b.iter().filter(|e| e.is_five_star()).count(),
            total: b.len(),
        })
        .collect()
}

fn series_with(buckets: &[Vec<RatedEvent>], counts: &[StageCounts], item: u32) -> BiasSeries {
    let mut praise_rate = Vec::with_capacity(buckets.len());
    let mut popularity_share = Vec::with_capacity(buckets.len());
    for (b, c) in buckets.iter().zip(counts) {
        let mine = b.iter().filter(|e| e.item == item);
        let (d, r) = mine.fold((0usize, 0usize), |(d, r), e| (d + 1, r + usize::from(e.is_five_star())));
        praise_rate.push((c.five_star_total > 0).then(|| r as f64 / c.five_star_total as f64));
        popularity_share.push(if c.total > 0 { d as f64 / c.total as f64 } else { 0.0 });
    }
    BiasSeries {
        item,
        praise_rate,
        popularity_share,
    }
}

pub fn local_series(buckets: &[Vec<RatedEvent>], item: u32) -> BiasSeries {
    series_with(buckets, &stage_counts(buckets), item)
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::config("pearson needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Items with the most interactions, ties by ascending id.
pub fn top_items(events: &[RatedEvent], n: usize) -> Vec<u32> {
    let num_items = events.iter().map(|e| e.item as usize + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; num_items];
    for e in events {
        counts[e.item as usize] += 1;
    }
    let mut order: Vec<u32> = (0..num_items as u32).collect();
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub series: BiasSeries,
    /// `None` when either series is constant over the usable stages.
    pub pearson: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub stages: usize,
    pub rows: Vec<AuditRow>,
}

/// Runs the audit on the `top_n` most-interacted items.
pub fn audit(events: &[RatedEvent], stages: usize, top_n: usize) -> Result<AuditReport> {
    let buckets = stage_split(events, stages)?;
    let counts = stage_counts(&buckets);
    let rows = top_items(events, top_n)
        .into_iter()
        .map(|item| {
            let series = series_with(&buckets, &counts, item);
            let pearson = series.pearson().ok();
            AuditRow { series, pearson }
        })
        .collect();
    Ok(AuditReport { stages, rows })
}

impl AuditReport {
    /// `item, r_1..r_T, m_1..m_T, pearson`; undefined values are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("item");
        for t in 1..=self.stages {
            let _ = write!(s, ",r_{t}");
        }
        for t in 1..=self.stages {
            let _ = write!(s, ",m_{t}");
        }
        s.push_str(",pearson\n");
        for row in &self.rows {
            let _ = write!(s, "{}", row.series.item);
            for r in &row.series.praise_rate {
                let _ = write!(s, ",{}", r.map(|v| v.to_string()).unwrap_or_default());
            }
            for m in &row.series.popularity_share {
                let _ = write!(s, ",{m}");
            }
            let _ = writeln!(s, ",{}", row.pearson.map(|v| v.to_string()).unwrap_or_default());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(item: u32, stars: f64, ts: i64) -> RatedEvent {
        RatedEvent {
            user: 0,
            item,
            stars,
            timestamp: ts,
        }
    }

    #[test]
    fn ten_events_two_stages() {
        let events: Vec<RatedEvent> = (0..10).rev().map(|t| ev(0, 3.0, t)).collect();
        let b = stage_split(&events, 2).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].len(), 5);
        assert_eq!(b[1].len(), 5);
        assert!(b[0].iter().all(|e| e.timestamp < 5));
        let single = stage_split(&events, 1).unwrap();
        assert_eq!(single[0].len(), 10);
        assert!(stage_split(&events, 11).is_err());
        assert!(matches!(stage_split(&[], 1), Err(Error::EmptyInput)));
    }

    #[test]
    fn praise_rate_splits_evenly() {
        let buckets = vec![vec![ev(1, 5.0, 0), ev(1, 5.0, 1), ev(2, 5.0, 2), ev(2, 5.0, 3)]];
        assert_eq!(local_series(&buckets, 1).praise_rate, vec![Some(0.5)]);
    }

    #[test]
    fn absent_item_has_zero_share() {
        let buckets = vec![vec![ev(1, 4.0, 0)], vec![ev(2, 5.0, 1)]];
        let s = local_series(&buckets, 1);
        assert_eq!(s.popularity_share, vec![1.0, 0.0]);
        // stage 0 has no five-star ratings at all
        assert_eq!(s.praise_rate, vec![None, Some(0.0)]);
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantSeries)));
    }

    #[test]
    fn csv_layout() {
        let events = vec![ev(0, 5.0, 0), ev(1, 5.0, 1), ev(0, 3.0, 2), ev(0, 5.0, 3)];
        let report = audit(&events, 2, 1).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "item,r_1,r_2,m_1,m_2,pearson");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..5], &["0", "0.5", "1", "0.5", "1"]);
        assert!((row[5].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30),
            a in 0.1f64..5.0, b in -5.0f64..5.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((r - pearson(&y, &x).unwrap()).abs() < 1e-12);
                let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                prop_assert!((r - pearson(&xs, &y).unwrap()).abs() < 1e-9);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn stages_preserve_multiset_and_shares_sum_to_one(
            raw in prop::collection::vec((0u32..6, 1u32..=5, 0i64..1000), 1..120),
            stages in 1usize..8,
        ) {
            let events: Vec<RatedEvent> = raw.iter().enumerate()
                .map(|(k, &(item, s, ts))| RatedEvent { user: k as u32, item, stars: s as f64, timestamp: ts })
                .collect();
            prop_assume!(stages <= events.len());
            let buckets = stage_split(&events, stages).unwrap();
            let sizes: Vec<usize> = buckets.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let flat: Vec<RatedEvent> = buckets.concat();
            prop_assert!(flat.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
            prop_assert_eq!(flat.len(), events.len());
            for t in 0..stages {
                let series: Vec<BiasSeries> = (0..6).map(|i| local_series(&buckets, i)).collect();
                let m: f64 = series.iter().map(|s| s.popularity_share[t]).sum();
                prop_assert!((m - 1.0).abs() < 1e-9);
                if series[0].praise_rate[t].is_some() {
                    let r: f64 = series.iter().map(|s| s.praise_rate[t].unwrap()).sum();
                    prop_assert!((r - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
