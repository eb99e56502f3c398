//! Flat `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Unset keys keep their reference values. Per-model seeds are not
//! configurable: every model derives its seed from the single `seed` key.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::dataio::SplitSpec;
use crate::error::{Error, Result};
use crate::linear::SgdConfig;
use crate::lstm::LstmConfig;
use crate::svr::SvrConfig;
use crate::trees::{BoostConfig, ForestConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub split: SplitSpec,
    pub top_k: usize,
    /// Skip selection and give every model all columns.
    pub all_features: bool,
    /// Rank features on the whole dataset instead of the training block.
    /// Leaks the hold-out period into selection; kept for comparison only.
    pub select_on_full: bool,
    /// Months between the feature row and the target it predicts.
    pub horizon: usize,
    pub sgd: SgdConfig,
    pub forest: ForestConfig,
    /// Depth-wise second-order booster.
    pub xgb: BoostConfig,
    /// Oblivious booster, also used for feature selection.
    pub cat: BoostConfig,
    pub svr: SvrConfig,
    pub lstm: LstmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            split: SplitSpec::default(),
            top_k: 20,
            all_features: false,
            select_on_full: false,
            horizon: 0,
            sgd: SgdConfig::default(),
            forest: ForestConfig::default(),
            xgb: BoostConfig::depthwise(),
            cat: BoostConfig::oblivious(),
            svr: SvrConfig::default(),
            lstm: LstmConfig::default(),
        }
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value.parse().map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn parse_auto<V: FromStr>(key: &str, value: &str) -> Result<Option<V>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn auto<V: ToString>(v: &Option<V>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), ToString::to_string)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: n + 1, message: format!("expected key = value, got {line:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse { line: n + 1, message: format!("duplicate key {key}") });
            }
            cfg.set(key, value).map_err(|e| Error::Parse { line: n + 1, message: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "train_fraction" => self.split = SplitSpec::new(parse(key, v)?)?,
            "top_k" => self.top_k = parse(key, v)?,
            "all_features" => self.all_features = parse(key, v)?,
            "select_on_full" => self.select_on_full = parse(key, v)?,
            "horizon" => self.horizon = parse(key, v)?,
            "sgd.epochs" => self.sgd.epochs = parse(key, v)?,
            "sgd.initial_step" => self.sgd.initial_step = parse(key, v)?,
            "sgd.decay" => self.sgd.decay = parse(key, v)?,
            "sgd.l2_penalty" => self.sgd.l2_penalty = parse(key, v)?,
            "forest.n_trees" => self.forest.n_trees = parse(key, v)?,
            "forest.max_depth" => self.forest.max_depth = parse(key, v)?,
            "forest.min_samples_leaf" => self.forest.min_samples_leaf = parse(key, v)?,
            "forest.features_per_split" => self.forest.features_per_split = parse_auto(key, v)?,
            "forest.bootstrap" => self.forest.bootstrap = parse(key, v)?,
            "svr.c_penalty" => self.svr.c_penalty = parse(key, v)?,
            "svr.epsilon_tube" => self.svr.epsilon_tube = parse(key, v)?,
            "svr.gamma" => self.svr.gamma = parse_auto(key, v)?,
            "svr.kkt_tolerance" => self.svr.kkt_tolerance = parse(key, v)?,
            "svr.max_passes" => self.svr.max_passes = parse(key, v)?,
            "lstm.window_length" => self.lstm.window_length = parse(key, v)?,
            "lstm.hidden_size" => self.lstm.hidden_size = parse(key, v)?,
            "lstm.epochs" => self.lstm.epochs = parse(key, v)?,
            "lstm.step_size" => self.lstm.step_size = parse(key, v)?,
            "lstm.gradient_clip_norm" => self.lstm.gradient_clip_norm = parse(key, v)?,
            _ => {
                let (prefix, field) = key.split_once('.').ok_or_else(|| Error::config(format!("unknown key {key}")))?;
                let b = match prefix {
                    "xgb" => &mut self.xgb,
                    "cat" => &mut self.cat,
                    _ => return Err(Error::config(format!("unknown key {key}"))),
                };
                match field {
                    "rounds" => b.rounds = parse(key, v)?,
                    "learning_rate" => b.learning_rate = parse(key, v)?,
                    "max_depth" => b.max_depth = parse(key, v)?,
                    "l2_leaf" => b.l2_leaf = parse(key, v)?,
                    "min_split_gain" => b.min_split_gain = parse(key, v)?,
                    _ => return Err(Error::config(format!("unknown key {key}"))),
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k == 0 {
            return Err(Error::config("top_k must be positive"));
        }
        self.sgd.validate()?;
        self.forest.validate()?;
        self.xgb.validate()?;
        self.cat.validate()?;
        self.svr.validate()?;
        self.lstm.validate()
    }

    /// Every key with its current value; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to string");
        kv("seed", self.seed.to_string());
        kv("train_fraction", self.split.train_fraction.to_string());
        kv("top_k", self.top_k.to_string());
        kv("all_features", self.all_features.to_string());
        kv("select_on_full", self.select_on_full.to_string());
        kv("horizon", self.horizon.to_string());
        kv("sgd.epochs", self.sgd.epochs.to_string());
        kv("sgd.initial_step", self.sgd.initial_step.to_string());
        kv("sgd.decay", self.sgd.decay.to_string());
        kv("sgd.l2_penalty", self.sgd.l2_penalty.to_string());
        kv("forest.n_trees", self.forest.n_trees.to_string());
        kv("forest.max_depth", self.forest.max_depth.to_string());
        kv("forest.min_samples_leaf", self.forest.min_samples_leaf.to_string());
        kv("forest.features_per_split", auto(&self.forest.features_per_split));
        kv("forest.bootstrap", self.forest.bootstrap.to_string());
        for (p, b) in [("xgb", &self.xgb), ("cat", &self.cat)] {
            kv(&format!("{p}.rounds"), b.rounds.to_string());
            kv(&format!("{p}.learning_rate"), b.learning_rate.to_string());
            kv(&format!("{p}.max_depth"), b.max_depth.to_string());
            kv(&format!("{p}.l2_leaf"), b.l2_leaf.to_string());
            kv(&format!("{p}.min_split_gain"), b.min_split_gain.to_string());
        }
        kv("svr.c_penalty", self.svr.c_penalty.to_string());
        kv("svr.epsilon_tube", self.svr.epsilon_tube.to_string());
        kv("svr.gamma", auto(&self.svr.gamma));
        kv("svr.kkt_tolerance", self.svr.kkt_tolerance.to_string());
        kv("svr.max_passes", self.svr.max_passes.to_string());
        kv("lstm.window_length", self.lstm.window_length.to_string());
        kv("lstm.hidden_size", self.lstm.hidden_size.to_string());
        kv("lstm.epochs", self.lstm.epochs.to_string());
        kv("lstm.step_size", self.lstm.step_size.to_string());
        kv("lstm.gradient_clip_norm", self.lstm.gradient_clip_norm.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.svr.gamma = Some(0.25);
        cfg.xgb.rounds = 7;
        cfg.cat.l2_leaf = 3.5;
        cfg.split = SplitSpec::new(0.75).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&RunConfig::default().to_text()).unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_and_blanks() {
        let cfg = RunConfig::parse("# header\n\nseed = 7 # trailing\nforest.features_per_split=auto\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.forest.features_per_split, None);
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in ["seed", "seed = x", "nope = 1", "xgb.foo = 1", "seed = 1\nseed = 2", "top_k = 0", "svr.c_penalty = -1"] {
            assert!(RunConfig::parse(bad).is_err(), "{bad}");
        }
    }
}
