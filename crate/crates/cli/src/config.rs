//! Flat `key = value` run configuration. Later sources override earlier
//! ones: built-in defaults, then a config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use senseball::{GeometryConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inventory: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub balls: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub geometry: GeometryConfig,
    pub train: TrainConfig,
    pub levels: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inventory: None,
            embeddings: None,
            balls: None,
            checkpoint: None,
            out: None,
            geometry: GeometryConfig::default(),
            train: TrainConfig::default(),
            levels: vec![0, 1, 2, 3, 4],
        }
    }
}

/// Marks a configuration problem so `main` can exit with the usage code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let mut levels: Vec<usize> = s
        .split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| usage(format!("bad level {t:?}"))))
        .collect::<Result<_>>()?;
    levels.sort_unstable();
    levels.dedup();
    if levels.iter().any(|&l| l > 4) {
        return Err(usage("levels must be within 0..=4"));
    }
    Ok(levels)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| usage(format!("bad value for {key}: {value:?}")))
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    pub const KEYS: [&'static str; 18] = [
        "inventory",
        "embeddings",
        "balls",
        "checkpoint",
        "out",
        "epsilon",
        "margin",
        "initial_leaf_radius",
        "extension_code_width",
        "seed",
        "window",
        "learning_rate",
        "epochs",
        "batch_size",
        "layers",
        "heads",
        "ff_multiplier",
        "levels",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "inventory" => self.inventory = path(value),
            "embeddings" => self.embeddings = path(value),
            "balls" => self.balls = path(value),
            "checkpoint" => self.checkpoint = path(value),
            "out" => self.out = path(value),
            "epsilon" => self.geometry.epsilon = num(key, value)?,
            "margin" => self.geometry.margin = num(key, value)?,
            "initial_leaf_radius" => self.geometry.initial_leaf_radius = num(key, value)?,
            "extension_code_width" => self.geometry.extension_code_width = num(key, value)?,
            "seed" => self.train.seed = num(key, value)?,
            "window" => self.train.window = num(key, value)?,
            "learning_rate" => self.train.learning_rate = num(key, value)?,
            "epochs" => self.train.epochs = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "layers" => self.train.layers = num(key, value)?,
            "heads" => self.train.heads = num(key, value)?,
            "ff_multiplier" => self.train.ff_multiplier = num(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            _ => return Err(usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(usage(format!("{source}:{}: expected `key = value`", n + 1)));
            };
            cfg.set(k.trim(), v)
                .map_err(|e| usage(format!("{source}:{}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let p = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let g = &self.geometry;
        let t = &self.train;
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        BTreeMap::from([
            ("inventory", p(&self.inventory)),
            ("embeddings", p(&self.embeddings)),
            ("balls", p(&self.balls)),
            ("checkpoint", p(&self.checkpoint)),
            ("out", p(&self.out)),
            ("epsilon", g.epsilon.to_string()),
            ("margin", g.margin.to_string()),
            ("initial_leaf_radius", g.initial_leaf_radius.to_string()),
            ("extension_code_width", g.extension_code_width.to_string()),
            ("seed", t.seed.to_string()),
            ("window", t.window.to_string()),
            ("learning_rate", t.learning_rate.to_string()),
            ("epochs", t.epochs.to_string()),
            ("batch_size", t.batch_size.to_string()),
            ("layers", t.layers.to_string()),
            ("heads", t.heads.to_string()),
            ("ff_multiplier", t.ff_multiplier.to_string()),
            ("levels", levels.join(",")),
        ])
    }

    /// Renders in the config-file format; parsing it back gives `self`.
    pub fn render(&self) -> String {
        let entries = self.entries();
        let mut s = String::new();
        for k in Self::KEYS {
            let _ = writeln!(s, "{k} = {}", entries[k]);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate().map_err(|e| usage(e.to_string()))?;
        self.train.validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
        match value {
            Some(p) => Ok(p),
            None => bail!(UsageError(format!("missing `{key}` (set it in the config file or with --{key})"))),
        }
    }
}

/// Command-line overrides, one flag per config key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Taxonomy file (`child<TAB>parent` lines).
    #[arg(long, global = true)]
    pub inventory: Option<String>,
    /// Word embeddings, one `word c1 ... cd` per line.
    #[arg(long, global = true)]
    pub embeddings: Option<String>,
    /// Ball configuration file.
    #[arg(long, global = true)]
    pub balls: Option<String>,
    /// Encoder checkpoint file.
    #[arg(long, global = true)]
    pub checkpoint: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    #[arg(long, global = true)]
    pub margin: Option<String>,
    #[arg(long, global = true)]
    pub initial_leaf_radius: Option<String>,
    #[arg(long, global = true)]
    pub extension_code_width: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub window: Option<String>,
    #[arg(long, global = true)]
    pub learning_rate: Option<String>,
    #[arg(long, global = true)]
    pub epochs: Option<String>,
    #[arg(long, global = true)]
    pub batch_size: Option<String>,
    #[arg(long, global = true)]
    pub layers: Option<String>,
    #[arg(long, global = true)]
    pub heads: Option<String>,
    #[arg(long, global = true)]
    pub ff_multiplier: Option<String>,
    /// Comma-separated hypernym levels, e.g. `0,1,2`.
    #[arg(long, global = true)]
    pub levels: Option<String>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let pairs = [
            ("inventory", &self.inventory),
            ("embeddings", &self.embeddings),
            ("balls", &self.balls),
            ("checkpoint", &self.checkpoint),
            ("out", &self.out),
            ("epsilon", &self.epsilon),
            ("margin", &self.margin),
            ("initial_leaf_radius", &self.initial_leaf_radius),
            ("extension_code_width", &self.extension_code_width),
            ("seed", &self.seed),
            ("window", &self.window),
            ("learning_rate", &self.learning_rate),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("layers", &self.layers),
            ("heads", &self.heads),
            ("ff_multiplier", &self.ff_multiplier),
            ("levels", &self.levels),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("inventory", "tax.tsv").unwrap();
        cfg.set("learning_rate", "0.05").unwrap();
        cfg.set("levels", "1, 0").unwrap();
        let back = RunConfig::parse(&cfg.render(), "rendered").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.levels, [0, 1]);
        assert_eq!(RunConfig::parse(&RunConfig::default().render(), "d").unwrap(), RunConfig::default());
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        for text in ["nonsense", "colour = red", "epochs = many", "levels = 0,7"] {
            let err = RunConfig::parse(text, "cfg").unwrap_err();
            assert!(err.downcast_ref::<UsageError>().is_some(), "{text}: {err}");
        }
        let cfg = RunConfig::parse("# comment\n\nseed = 7\nout =\n", "cfg").unwrap();
        assert_eq!(cfg.train.seed, 7);
        assert_eq!(cfg.out, None);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::parse("seed = 7\nepochs = 3\n", "cfg").unwrap();
        let o = Overrides {
            seed: Some("9".into()),
            ..Overrides::default()
        };
        o.apply(&mut cfg).unwrap();
        assert_eq!(cfg.train.seed, 9);
        assert_eq!(cfg.train.epochs, 3);
    }

    #[test]
    fn every_key_is_settable_and_listed() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.entries().len(), RunConfig::KEYS.len());
        for k in RunConfig::KEYS {
            let mut c = RunConfig::default();
            c.set(k, &cfg.entries()[k]).unwrap();
            assert_eq!(c, cfg, "{k}");
        }
    }
}
