//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key maps onto one field
//! of [`RunConfig`]; unknown keys are rejected. See `docs/config.md` for
//! the key list.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::split::SplitConfig;
use crate::synth::{SynthConfig, TrendConfig};
use crate::trainer::Method;
use crate::types::HyperParams;

/// Everything a command may need, resolved from defaults, a config file and
/// command-line overrides (in that order).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub method: Method,
    pub hp: HyperParams,
    pub ks: Vec<usize>,
    pub delimiter: String,
    pub split: SplitConfig,
    pub synth: SynthConfig,
    pub trend: TrendConfig,
    /// Share of the synthetic unbiased log used for validation.
    pub synth_val_share: f64,
    pub audit_stages: usize,
    pub audit_top_items: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            method: Method::Dclmdb,
            hp: HyperParams::mf_defaults(),
            ks: vec![20, 50],
            delimiter: crate::ingest::DEFAULT_DELIMITER.to_string(),
            split: SplitConfig::default(),
            synth: SynthConfig::default(),
            trend: TrendConfig::default(),
            synth_val_share: 1.0 / 3.0,
            audit_stages: crate::audit::DEFAULT_STAGES,
            audit_top_items: crate::audit::DEFAULT_TOP_ITEMS,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("bad value '{value}' for key '{key}'")))
}

pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    pub fn merge_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_str(&text)
    }

    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected 'key = value'", n + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let hp = &mut self.hp;
        match key {
            "seed" => self.seed = parse(key, value)?,
            "method" => self.method = value.parse()?,
            "alpha" => hp.alpha = parse(key, value)?,
            "beta" => hp.beta = parse(key, value)?,
            "margin" => hp.margin = parse(key, value)?,
            "hinge_orientation" => hp.hinge_orientation = value.parse()?,
            "pnsm_margin" => hp.pnsm_margin = parse(key, value)?,
            "pnsm_mode" => hp.pnsm_mode = value.parse()?,
            "lr" => hp.lr = parse(key, value)?,
            "dim" => hp.dim = parse(key, value)?,
            "epochs" => hp.epochs = parse(key, value)?,
            "batch_size" => hp.batch_size = parse(key, value)?,
            "negatives_per_positive" => hp.negatives_per_positive = parse(key, value)?,
            "backbone" => hp.backbone = value.parse()?,
            "gcn_layers" => hp.gcn_layers = parse(key, value)?,
            "init_std" => hp.init_std = parse(key, value)?,
            "ips_cap" => hp.ips_cap = parse(key, value)?,
            "patience" => hp.patience = parse(key, value)?,
            "k" => self.ks = parse_list(key, value)?,
            "delimiter" => self.delimiter = value.to_string(),
            "uniform_fraction" => self.split.uniform_fraction = parse(key, value)?,
            "val_fraction" => self.split.val_fraction = parse(key, value)?,
            "test_fraction" => self.split.test_fraction = parse(key, value)?,
            "uniform_train_fraction" => self.split.uniform_train_fraction = parse(key, value)?,
            "synth_users" => self.synth.num_users = parse(key, value)?,
            "synth_items" => self.synth.num_items = parse(key, value)?,
            "synth_latent_dim" => self.synth.latent_dim = parse(key, value)?,
            "synth_popularity_weight" => self.synth.popularity_weight = parse(key, value)?,
            "synth_conformity_weight" => self.synth.conformity_weight = parse(key, value)?,
            "synth_interactions_per_user" => self.synth.interactions_per_user = parse(key, value)?,
            "synth_unbiased_per_user" => self.synth.unbiased_per_user = parse(key, value)?,
            "synth_rounds" => self.synth.rounds = parse(key, value)?,
            "synth_popularity_exponent" => self.synth.popularity_exponent = parse(key, value)?,
            "synth_preference_scale" => self.synth.preference_scale = parse(key, value)?,
            "synth_taste_mean_scale" => self.synth.taste_mean_scale = parse(key, value)?,
            "synth_click_offset" => self.synth.click_offset = parse(key, value)?,
            "synth_val_share" => self.synth_val_share = parse(key, value)?,
            "trend_users" => self.trend.num_users = parse(key, value)?,
            "trend_items" => self.trend.num_items = parse(key, value)?,
            "trend_steps" => self.trend.steps = parse(key, value)?,
            "trend_events_per_step" => self.trend.events_per_step = parse(key, value)?,
            "trend_volatility" => self.trend.volatility = parse(key, value)?,
            "trend_praise_sensitivity" => self.trend.praise_sensitivity = parse(key, value)?,
            "audit_stages" => self.audit_stages = parse(key, value)?,
            "audit_top_items" => self.audit_top_items = parse(key, value)?,
            other => return Err(Error::config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Pushes the master seed into every seeded component.
    pub fn resolve_seeds(&mut self) {
        self.hp.seed = self.seed;
        self.split.seed = self.seed;
        self.synth.seed = self.seed;
        self.trend.seed = self.seed;
    }

    /// Full snapshot; feeding it back through [`RunConfig::set`] reproduces
    /// this config.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        let hp = &self.hp;
        let s = &self.synth;
        let t = &self.trend;
        let pairs: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("method", self.method.to_string()),
            ("alpha", hp.alpha.to_string()),
            ("beta", hp.beta.to_string()),
            ("margin", hp.margin.to_string()),
            ("hinge_orientation", hp.hinge_orientation.to_string()),
            ("pnsm_margin", hp.pnsm_margin.to_string()),
            ("pnsm_mode", hp.pnsm_mode.to_string()),
            ("lr", hp.lr.to_string()),
            ("dim", hp.dim.to_string()),
            ("epochs", hp.epochs.to_string()),
            ("batch_size", hp.batch_size.to_string()),
            ("negatives_per_positive", hp.negatives_per_positive.to_string()),
            ("backbone", hp.backbone.to_string()),
            ("gcn_layers", hp.gcn_layers.to_string()),
            ("init_std", hp.init_std.to_string()),
            ("ips_cap", hp.ips_cap.to_string()),
            ("patience", hp.patience.to_string()),
            ("k", join(&self.ks)),
            ("delimiter", self.delimiter.clone()),
            ("uniform_fraction", self.split.uniform_fraction.to_string()),
            ("val_fraction", self.split.val_fraction.to_string()),
            ("test_fraction", self.split.test_fraction.to_string()),
            ("uniform_train_fraction", self.split.uniform_train_fraction.to_string()),
            ("synth_users", s.num_users.to_string()),
            ("synth_items", s.num_items.to_string()),
            ("synth_latent_dim", s.latent_dim.to_string()),
            ("synth_popularity_weight", s.popularity_weight.to_string()),
            ("synth_conformity_weight", s.conformity_weight.to_string()),
            ("synth_interactions_per_user", s.interactions_per_user.to_string()),
            ("synth_unbiased_per_user", s.unbiased_per_user.to_string()),
            ("synth_rounds", s.rounds.to_string()),
            ("synth_popularity_exponent", s.popularity_exponent.to_string()),
            ("synth_preference_scale", s.preference_scale.to_string()),
            ("synth_taste_mean_scale", s.taste_mean_scale.to_string()),
            ("synth_click_offset", s.click_offset.to_string()),
            ("synth_val_share", self.synth_val_share.to_string()),
            ("trend_users", t.num_users.to_string()),
            ("trend_items", t.num_items.to_string()),
            ("trend_steps", t.steps.to_string()),
            ("trend_events_per_step", t.events_per_step.to_string()),
            ("trend_volatility", t.volatility.to_string()),
            ("trend_praise_sensitivity", t.praise_sensitivity.to_string()),
            ("audit_stages", self.audit_stages.to_string()),
            ("audit_top_items", self.audit_top_items.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Renders the snapshot in config-file syntax.
    pub fn to_config_text(&self) -> String {
        self.snapshot()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Backbone;

    #[test]
    fn parses_comments_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.merge_str("# header\nalpha = 0.5  # trailing\n\nbackbone = lightgcn\nk = 10, 20\n")
            .unwrap();
        assert_eq!(cfg.hp.alpha, 0.5);
        assert_eq!(cfg.hp.backbone, Backbone::LightGcn);
        assert_eq!(cfg.ks, vec![10, 20]);
    }

    #[test]
    fn unknown_key_and_bad_value_fail() {
        let mut cfg = RunConfig::default();
        assert!(cfg.merge_str("learning_rate = 1").is_err());
        assert!(cfg.merge_str("dim = many").is_err());
        assert!(cfg.merge_str("just a line").is_err());
        assert!(cfg.merge_str("method = dice").is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.merge_str("seed = 17\nmargin = 0.25\nmethod = ips-cn\npnsm_mode = more_popular\n")
            .unwrap();
        let mut back = RunConfig::default();
        back.merge_str(&cfg.to_config_text()).unwrap();
        assert_eq!(back, cfg);
    }
}
