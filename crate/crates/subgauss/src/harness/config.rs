//! Experiment configuration: a single JSON-backed struct validated per
//! experiment kind, hashed for provenance.

use crate::ensemble::EnsembleKind;
use crate::geometry::SetDescriptor;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EnsembleCheck,
    Width,
    Rstar,
    Empirical,
    Recover,
    Phase,
    Neighborly,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::EnsembleCheck => "ensemble-check",
            ExperimentKind::Width => "width",
            ExperimentKind::Rstar => "rstar",
            ExperimentKind::Empirical => "empirical",
            ExperimentKind::Recover => "recover",
            ExperimentKind::Phase => "phase",
            ExperimentKind::Neighborly => "neighborly",
        }
    }
}

/// Set selector as written on the command line: `l1`, `l2`,
/// `weaklp:<p>`, `sparse:<m>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec(pub String);

impl SetSpec {
    pub fn to_descriptor(&self, n: usize) -> Result<SetDescriptor> {
        let s = self.0.trim().to_ascii_lowercase();
        if s == "l1" {
            return Ok(SetDescriptor::L1Ball { n, radius: 1.0 });
        }
        if s == "l2" {
            return Ok(SetDescriptor::EuclideanBall { n, radius: 1.0 });
        }
        if let Some(p) = s.strip_prefix("weaklp:") {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::Config(format!("bad weak-lp exponent in '{}'", self.0)))?;
            return Ok(SetDescriptor::WeakLpBall { n, p });
        }
        if let Some(m) = s.strip_prefix("sparse:") {
            let m: usize = m
                .parse()
                .map_err(|_| Error::Config(format!("bad sparsity in '{}'", self.0)))?;
            return Ok(SetDescriptor::SparseCap { n, m });
        }
        Err(Error::Config(format!(
            "unknown set '{}' (expected l1 | l2 | weaklp:<p> | sparse:<m>)",
            self.0
        )))
    }
}

fn default_trials() -> usize {
    100
}
fn default_samples() -> usize {
    1000
}
fn default_c_norm() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    1.0
}
fn default_theta() -> f64 {
    0.5
}
fn default_max_iters() -> usize {
    10_000
}

/// One experiment request. Unused fields for a given kind are ignored by
/// that kind's validator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleKind,
    pub n: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_grid: Vec<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub m_grid: Vec<usize>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub set: Option<SetSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_c_norm")]
    pub c_norm: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub strict_lt: bool,
    #[serde(default)]
    pub sampled_queries: Option<usize>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_ensemble() -> EnsembleKind {
    EnsembleKind::Gaussian
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        let need_k = |v: &Option<usize>| -> Result<usize> {
            v.filter(|&k| k > 0)
                .ok_or_else(|| Error::Config("this experiment needs k >= 1".into()))
        };
        match self.experiment {
            ExperimentKind::EnsembleCheck => {
                if self.samples == 0 {
                    return Err(Error::Config("samples must be positive".into()));
                }
            }
            ExperimentKind::Width => {
                if self.set.is_none() {
                    return Err(Error::Config("width needs a set".into()));
                }
                if self.samples < 2 {
                    return Err(Error::Config("width needs samples >= 2".into()));
                }
                self.set.as_ref().unwrap().to_descriptor(self.n)?;
            }
            ExperimentKind::Rstar => {
                if self.set.is_none() {
                    return Err(Error::Config("rstar needs a set".into()));
                }
                self.set.as_ref().unwrap().to_descriptor(self.n)?;
                need_k(&self.k)?;
                if !(self.theta > 0.0 && self.theta < 1.0) {
                    return Err(Error::Config("theta must lie in (0,1)".into()));
                }
            }
            ExperimentKind::Empirical => {
                if self.k_grid.is_empty() {
                    return Err(Error::Config("empirical needs k_grid".into()));
                }
                if self.k_grid.windows(2).any(|w| w[0] >= w[1]) || self.k_grid[0] < 4 {
                    return Err(Error::Config(
                        "k_grid must be strictly increasing with minimum >= 4".into(),
                    ));
                }
            }
            ExperimentKind::Recover => {
                need_k(&self.k)?;
                match self.mode.as_deref() {
                    Some("exact") => {
                        if self.m.is_none() {
                            return Err(Error::Config("recover exact needs m".into()));
                        }
                    }
                    Some("approx") => {
                        if self.epsilon.is_none() {
                            return Err(Error::Config("recover approx needs epsilon".into()));
                        }
                    }
                    _ => {
                        return Err(Error::Config(
                            "recover needs mode = \"exact\" or \"approx\"".into(),
                        ))
                    }
                }
            }
            ExperimentKind::Phase => {
                if self.k_grid.is_empty() || self.m_grid.is_empty() {
                    return Err(Error::Config("phase needs k_grid and m_grid".into()));
                }
            }
            ExperimentKind::Neighborly => {
                need_k(&self.k)?;
                if self.m.is_none() {
                    return Err(Error::Config("neighborly needs m".into()));
                }
            }
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON encoding, for output headers.
    pub fn hash(&self) -> u64 {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_phase_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment":"phase","n":64,"k_grid":[16,32],"m_grid":[1,2,3],"trials":5}"#,
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Phase);
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_field_rejected_with_position() {
        let err = ExperimentConfig::from_json(r#"{"experiment":"width","n":4,"bogus":1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line"), "diagnostic should cite a position: {err}");
    }

    #[test]
    fn set_spec_parses() {
        assert!(matches!(
            SetSpec("l1".into()).to_descriptor(4).unwrap(),
            SetDescriptor::L1Ball { .. }
        ));
        assert!(matches!(
            SetSpec("weaklp:0.5".into()).to_descriptor(4).unwrap(),
            SetDescriptor::WeakLpBall { .. }
        ));
        assert!(matches!(
            SetSpec("sparse:2".into()).to_descriptor(4).unwrap(),
            SetDescriptor::SparseCap { .. }
        ));
        assert!(SetSpec("cube".into()).to_descriptor(4).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_json(
            r#"{"experiment":"width","n":8,"set":"l1","samples":10}"#,
        )
        .unwrap();
        let b = ExperimentConfig::from_json(
            r#"{"experiment":"width","n":8,"set":"l1","samples":11}"#,
        )
        .unwrap();
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
