use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::complex::ComplexKind;
use crate::error::{Error, Result};
use crate::genmetric::MetricKind;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [3.5, 4.0, 5.0, 6.0];

/// Seeded Gaussian coordinate noise, written `sigma,seed` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jitter {
    pub sigma: f64,
    pub seed: u64,
}

impl FromStr for Jitter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("jitter must look like 'sigma,seed', got '{s}'"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let sigma: f64 = a.trim().parse().map_err(|_| bad())?;
        let seed: u64 = b.trim().parse().map_err(|_| bad())?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(bad());
        }
        Ok(Jitter { sigma, seed })
    }
}

impl fmt::Display for Jitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.sigma, self.seed)
    }
}

impl<'de> Deserialize<'de> for Jitter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Fields { sigma: f64, seed: u64 },
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Fields { sigma, seed } => Ok(Jitter { sigma, seed }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Inputs {
    One(String),
    Many(Vec<String>),
}

impl Inputs {
    pub fn paths(&self) -> Vec<&str> {
        match self {
            Inputs::One(p) => vec![p.as_str()],
            Inputs::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }
}

impl Default for Inputs {
    fn default() -> Self {
        Inputs::Many(Vec::new())
    }
}

fn default_kind() -> ComplexKind {
    ComplexKind::Alpha
}
fn default_thresholds() -> Vec<f64> {
    DEFAULT_THRESHOLDS.to_vec()
}
fn default_metric() -> MetricKind {
    MetricKind::L1
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}

/// Pipeline run configuration as read from `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// XYZ files or directories; relative paths resolve against the config file.
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default = "default_kind")]
    pub kind: ComplexKind,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_metric")]
    pub metric: MetricKind,
    #[serde(default = "one")]
    pub p: usize,
    /// Highest simplex dimension kept in each complex.
    #[serde(default = "two")]
    pub kmax_dim: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "ten")]
    pub restarts: usize,
    #[serde(default)]
    pub jitter: Option<Jitter>,
    /// Score clusters against the source tags.
    #[serde(default = "yes")]
    pub evaluate: bool,
}

impl RunConfig {
    /// Defaults for everything but the inputs and the cluster count.
    pub fn new(inputs: Inputs, k: usize) -> Self {
        RunConfig {
            inputs,
            kind: default_kind(),
            thresholds: default_thresholds(),
            metric: default_metric(),
            p: 1,
            kmax_dim: 2,
            k,
            seed: 0,
            restarts: 10,
            jitter: None,
            evaluate: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.thresholds.is_empty() {
            return bad("thresholds must not be empty".into());
        }
        for (i, &t) in self.thresholds.iter().enumerate() {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("threshold {t} is not a finite non-negative length"));
            }
            if self.thresholds[..i].contains(&t) {
                return bad(format!("threshold {t} is listed twice"));
            }
        }
        if !(1..=3).contains(&self.kmax_dim) {
            return bad(format!("kmax_dim must lie in 1..=3, got {}", self.kmax_dim));
        }
        if self.p > self.kmax_dim {
            return bad(format!("p = {} exceeds kmax_dim = {}", self.p, self.kmax_dim));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        Ok(())
    }
}
