//! Shared domain types: interactions, dataset partitions, embedding tables
//! and training hyperparameters.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One (user, item, rating, timestamp) event with dense ids.
///
/// After binarization `rating` is 1 for a positive (five-star) interaction
/// and 0 otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interaction {
    pub user: u32,
    pub item: u32,
    pub rating: u8,
    pub timestamp: i64,
}

impl Interaction {
    pub fn positive(user: u32, item: u32, timestamp: i64) -> Self {
        Interaction {
            user,
            item,
            rating: 1,
            timestamp,
        }
    }

    pub fn pair(&self) -> (u32, u32) {
        (self.user, self.item)
    }
}

/// Train / validation / test partitions of positive interactions together
/// with train-set item popularity.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDataset {
    pub num_users: usize,
    pub num_items: usize,
    pub train: Vec<Interaction>,
    pub validation: Vec<Interaction>,
    pub test: Vec<Interaction>,
    /// Count of train positives per item.
    pub popularity: Vec<u32>,
    /// Share of the total data that is uniformly-exposed and sits in train.
    pub intervention_fraction: f64,
}

impl SplitDataset {
    /// Builds a dataset and computes popularity from `train`.
    pub fn new(
        num_users: usize,
        num_items: usize,
        train: Vec<Interaction>,
        validation: Vec<Interaction>,
        test: Vec<Interaction>,
        intervention_fraction: f64,
    ) -> Self {
        let popularity = count_popularity(num_items, &train);
        SplitDataset {
            num_users,
            num_items,
            train,
            validation,
            test,
            popularity,
            intervention_fraction,
        }
    }

    /// Checks partition disjointness, id ranges and popularity counts.
    pub fn validate(&self) -> Result<()> {
        let parts: [(&'static str, &[Interaction]); 3] = [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ];
        let mut owner: HashMap<(u32, u32), &'static str> = HashMap::new();
        for (name, part) in parts {
            for x in part {
                if x.user as usize >= self.num_users {
                    return Err(Error::Range {
                        kind: "user",
                        id: x.user,
                        count: self.num_users,
                    });
                }
                if x.item as usize >= self.num_items {
                    return Err(Error::Range {
                        kind: "item",
                        id: x.item,
                        count: self.num_items,
                    });
                }
                if let Some(first) = owner.get(&x.pair()) {
                    if *first != name {
                        return Err(Error::Overlap {
                            user: x.user,
                            item: x.item,
                            first,
                            second: name,
                        });
                    }
                } else {
                    owner.insert(x.pair(), name);
                }
            }
        }
        if self.popularity.len() != self.num_items {
            return Err(Error::config(format!(
                "popularity has {} entries for {} items",
                self.popularity.len(),
                self.num_items
            )));
        }
        let actual = count_popularity(self.num_items, &self.train);
        for (item, (&stored, &actual)) in self.popularity.iter().zip(&actual).enumerate() {
            if stored != actual {
                return Err(Error::PopularityMismatch {
                    item,
                    stored,
                    actual,
                });
            }
        }
        Ok(())
    }

    /// Sorted train-positive item ids per user.
    pub fn train_items_by_user(&self) -> Vec<Vec<u32>> {
        group_by_user(self.num_users, &self.train)
    }

    pub fn validation_items_by_user(&self) -> Vec<Vec<u32>> {
        group_by_user(self.num_users, &self.validation)
    }

    pub fn test_items_by_user(&self) -> Vec<Vec<u32>> {
        group_by_user(self.num_users, &self.test)
    }
}

pub(crate) fn count_popularity(num_items: usize, train: &[Interaction]) -> Vec<u32> {
    let mut pop = vec![0u32; num_items];
    for x in train {
        if let Some(p) = pop.get_mut(x.item as usize) {
            *p += 1;
        }
    }
    pop
}

pub(crate) fn group_by_user(num_users: usize, xs: &[Interaction]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); num_users];
    for x in xs {
        out[x.user as usize].push(x.item);
    }
    for items in &mut out {
        items.sort_unstable();
        items.dedup();
    }
    out
}

/// Dense row-major table of `rows × dim` reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Table {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Table {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::DimensionMismatch(data.len(), rows * dim));
        }
        Ok(Table { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }
}

/// Identifies one of the four embedding tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableId {
    /// Base user embeddings; absorb conformity.
    UserBase,
    /// Debiased user embeddings; used for scoring.
    UserDebiased,
    /// Base item embeddings; absorb popularity.
    ItemBase,
    /// Debiased item embeddings; used for scoring.
    ItemDebiased,
}

impl TableId {
    pub const ALL: [TableId; 4] = [
        TableId::UserBase,
        TableId::UserDebiased,
        TableId::ItemBase,
        TableId::ItemDebiased,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The four embedding tables: base and debiased, for users and items.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    pub user_base: Table,
    pub user_debiased: Table,
    pub item_base: Table,
    pub item_debiased: Table,
}

impl EmbeddingSet {
    pub fn zeros(num_users: usize, num_items: usize, dim: usize) -> Self {
        EmbeddingSet {
            user_base: Table::zeros(num_users, dim),
            user_debiased: Table::zeros(num_users, dim),
            item_base: Table::zeros(num_items, dim),
            item_debiased: Table::zeros(num_items, dim),
        }
    }

    pub fn num_users(&self) -> usize {
        self.user_base.rows()
    }

    pub fn num_items(&self) -> usize {
        self.item_base.rows()
    }

    pub fn dim(&self) -> usize {
        self.user_base.dim()
    }

    pub fn table(&self, id: TableId) -> &Table {
        match id {
            TableId::UserBase => &self.user_base,
            TableId::UserDebiased => &self.user_debiased,
            TableId::ItemBase => &self.item_base,
            TableId::ItemDebiased => &self.item_debiased,
        }
    }

    pub fn table_mut(&mut self, id: TableId) -> &mut Table {
        match id {
            TableId::UserBase => &mut self.user_base,
            TableId::UserDebiased => &mut self.user_debiased,
            TableId::ItemBase => &mut self.item_base,
            TableId::ItemDebiased => &mut self.item_debiased,
        }
    }

    /// Checks finiteness and that all tables agree on `dim` and row counts.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for id in TableId::ALL {
            let t = self.table(id);
            if t.dim() != d {
                return Err(Error::DimensionMismatch(t.dim(), d));
            }
            if !t.is_finite() {
                return Err(Error::config(format!("{id:?} table has non-finite entries")));
            }
        }
        if self.user_debiased.rows() != self.num_users() {
            return Err(Error::DimensionMismatch(
                self.user_debiased.rows(),
                self.num_users(),
            ));
        }
        if self.item_debiased.rows() != self.num_items() {
            return Err(Error::DimensionMismatch(
                self.item_debiased.rows(),
                self.num_items(),
            ));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        TableId::ALL.iter().all(|&id| self.table(id).is_finite())
    }

    /// Score used for ranking: debiased user · debiased item.
    pub fn score(&self, user: usize, item: usize) -> f64 {
        dot(self.user_debiased.row(user), self.item_debiased.row(item))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One BPR training instance: user, positive item, negative item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrainTriple {
    pub user: u32,
    pub pos: u32,
    pub neg: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backbone {
    Mf,
    LightGcn,
}

impl fmt::Display for Backbone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Backbone::Mf => "mf",
            Backbone::LightGcn => "lightgcn",
        })
    }
}

impl FromStr for Backbone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mf" => Ok(Backbone::Mf),
            "lightgcn" => Ok(Backbone::LightGcn),
            other => Err(Error::config(format!(
                "unknown backbone '{other}' (valid: mf, lightgcn)"
            ))),
        }
    }
}

/// Which way round the contrastive hinge compares debiased and base scores.
///
/// `AsWritten` is `max(S_wz - S_uz + m, 0)`; `Swapped` is
/// `max(S_uz - S_wz + m, 0)` (and likewise for the item hinge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeOrientation {
    AsWritten,
    Swapped,
}

impl fmt::Display for HingeOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            HingeOrientation::AsWritten => "as_written",
            HingeOrientation::Swapped => "swapped",
        })
    }
}

impl FromStr for HingeOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_written" => Ok(HingeOrientation::AsWritten),
            "swapped" => Ok(HingeOrientation::Swapped),
            other => Err(Error::config(format!(
                "unknown hinge_orientation '{other}' (valid: as_written, swapped)"
            ))),
        }
    }
}

/// Popularity-gap rule applied when drawing negatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PnsmMode {
    /// `|pop(n) - pop(p)| >= margin`
    Symmetric,
    /// `pop(n) >= pop(p) + margin`
    MorePopular,
    /// `pop(n) + margin <= pop(p)`
    LessPopular,
}

impl fmt::Display for PnsmMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            PnsmMode::Symmetric => "symmetric",
            PnsmMode::MorePopular => "more_popular",
            PnsmMode::LessPopular => "less_popular",
        })
    }
}

impl FromStr for PnsmMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(PnsmMode::Symmetric),
            "more_popular" => Ok(PnsmMode::MorePopular),
            "less_popular" => Ok(PnsmMode::LessPopular),
            other => Err(Error::config(format!(
                "unknown pnsm_mode '{other}' (valid: symmetric, more_popular, less_popular)"
            ))),
        }
    }
}

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    /// Weight on the BPR term.
    pub alpha: f64,
    /// Weight on the two contrastive hinge terms.
    pub beta: f64,
    /// Hinge margin.
    pub margin: f64,
    pub hinge_orientation: HingeOrientation,
    /// Minimum popularity gap between positive and negative item.
    pub pnsm_margin: u32,
    pub pnsm_mode: PnsmMode,
    pub lr: f64,
    pub dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub backbone: Backbone,
    pub gcn_layers: usize,
    /// Standard deviation of the normal initialization.
    pub init_std: f64,
    /// Upper bound on inverse-propensity weights for the capped variants.
    pub ips_cap: f64,
    /// Early-stopping patience in epochs (0 disables early stopping).
    pub patience: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams::mf_defaults()
    }
}

impl HyperParams {
    /// Full-scale settings for the MF backbone.
    pub fn mf_defaults() -> Self {
        HyperParams {
            alpha: 0.05,
            beta: 0.005,
            margin: 0.1,
            hinge_orientation: HingeOrientation::AsWritten,
            pnsm_margin: 0,
            pnsm_mode: PnsmMode::Symmetric,
            lr: 0.001,
            dim: 128,
            epochs: 200,
            batch_size: 128,
            negatives_per_positive: 1,
            backbone: Backbone::Mf,
            gcn_layers: 2,
            init_std: 0.1,
            ips_cap: 0.3,
            patience: 10,
            seed: 0,
        }
    }

    /// Full-scale settings for the graph-convolution backbone.
    pub fn lightgcn_defaults() -> Self {
        HyperParams {
            alpha: 0.5,
            backbone: Backbone::LightGcn,
            ..HyperParams::mf_defaults()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be > 0, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("lr", self.lr)?;
        // beta = 0 is allowed: it isolates the BPR term.
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::config(format!(
                "margin must be >= 0, got {}",
                self.margin
            )));
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return Err(Error::config("init_std must be >= 0"));
        }
        if self.dim == 0 {
            return Err(Error::config("dim must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.negatives_per_positive == 0 {
            return Err(Error::config("negatives_per_positive must be >= 1"));
        }
        if self.backbone == Backbone::LightGcn && self.gcn_layers == 0 {
            return Err(Error::config("gcn_layers must be >= 1 for lightgcn"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(u: u32, i: u32) -> Interaction {
        Interaction::positive(u, i, 0)
    }

    #[test]
    fn empty_dataset_is_valid() {
        let ds = SplitDataset::new(2, 2, vec![], vec![], vec![], 0.0);
        assert!(ds.validate().is_ok());
    }

    #[test]
    fn overlap_between_train_and_test_is_rejected() {
        let ds = SplitDataset::new(2, 2, vec![pos(0, 1)], vec![], vec![pos(0, 1)], 0.0);
        assert!(matches!(ds.validate(), Err(Error::Overlap { .. })));
    }

    #[test]
    fn stale_popularity_is_rejected() {
        let mut ds = SplitDataset::new(2, 2, vec![pos(0, 1), pos(1, 1)], vec![], vec![], 0.0);
        // brute-force recount: item 0 never appears, item 1 twice
        let recount: Vec<u32> = (0..2)
            .map(|i| ds.train.iter().filter(|x| x.item == i).count() as u32)
            .collect();
        assert_eq!(recount, vec![0, 2]);
        assert_eq!(ds.popularity, recount);
        assert!(ds.validate().is_ok());

        ds.popularity = vec![0, 1];
        assert!(matches!(
            ds.validate(),
            Err(Error::PopularityMismatch { item: 1, stored: 1, actual: 2 })
        ));
    }

    #[test]
    fn out_of_range_ids_are_rejected() {
        let ds = SplitDataset::new(2, 2, vec![pos(0, 5)], vec![], vec![], 0.0);
        assert!(matches!(ds.validate(), Err(Error::Range { kind: "item", .. })));
        let ds = SplitDataset::new(2, 2, vec![], vec![pos(3, 0)], vec![], 0.0);
        assert!(matches!(ds.validate(), Err(Error::Range { kind: "user", .. })));
    }

    #[test]
    fn hyperparams_validation() {
        assert!(HyperParams::mf_defaults().validate().is_ok());
        assert!(HyperParams::lightgcn_defaults().validate().is_ok());
        let bad = HyperParams {
            alpha: 0.0,
            ..HyperParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = HyperParams {
            gcn_layers: 0,
            ..HyperParams::lightgcn_defaults()
        };
        assert!(bad.validate().is_err());
    }
}
