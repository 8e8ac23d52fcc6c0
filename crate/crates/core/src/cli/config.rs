use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleKind, EnsembleSpec, Signs};
use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_BOX_HALF_WIDTH: f64 = 2.0;
pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_MIN_EXPECTED: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    RadialFinite,
    RadialLimit,
    Moments,
    KernelPair,
    Gschur,
    Angular,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::RadialFinite,
        TestKind::RadialLimit,
        TestKind::Moments,
        TestKind::KernelPair,
        TestKind::Gschur,
        TestKind::Angular,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::RadialFinite => "radial-finite",
            TestKind::RadialLimit => "radial-limit",
            TestKind::Moments => "moments",
            TestKind::KernelPair => "kernel-pair",
            TestKind::Gschur => "gschur",
            TestKind::Angular => "angular",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "test: unknown test {s:?}, expected one of {}",
                    TestKind::ALL.map(|t| t.as_str()).join(", ")
                ))
            })
    }
}

/// One experiment. `allowance` is the per-test tolerance knob: the KS model
/// allowance for radial and angular tests, the relative error bound for
/// `kernel-pair` and `moments`, and the reconstruction bound for `gschur`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: EnsembleSpec,
    pub test: TestKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowance: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_box")]
    pub box_half_width: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_min_expected")]
    pub min_expected: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_box() -> f64 {
    DEFAULT_BOX_HALF_WIDTH
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_min_expected() -> f64 {
    DEFAULT_MIN_EXPECTED
}

impl ExperimentConfig {
    pub fn new(spec: EnsembleSpec, test: TestKind, seed: u64) -> Self {
        Self {
            spec,
            test,
            seed,
            trials: DEFAULT_TRIALS,
            samples: DEFAULT_SAMPLES,
            allowance: None,
            delta: DEFAULT_DELTA,
            box_half_width: DEFAULT_BOX_HALF_WIDTH,
            bins: DEFAULT_BINS,
            min_expected: DEFAULT_MIN_EXPECTED,
            out: None,
            svg: None,
        }
    }

    /// Checks ranges and normalizes the ensemble spec.
    pub fn validate(mut self) -> Result<Self> {
        self.spec = self.spec.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials: must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples: must be at least 1".into()));
        }
        if let Some(a) = self.allowance {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidSpec(format!("allowance: must be >= 0, got {a}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidSpec(format!("delta: must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.box_half_width > 0.0 && self.box_half_width.is_finite()) {
            return Err(Error::InvalidSpec("box_half_width: must be positive".into()));
        }
        if self.bins < 4 {
            return Err(Error::InvalidSpec(format!("bins: must be at least 4, got {}", self.bins)));
        }
        if !(self.min_expected >= 25.0) {
            return Err(Error::InvalidSpec(format!(
                "min_expected: must be at least 25, got {}",
                self.min_expected
            )));
        }
        Ok(self)
    }

    /// Tolerance knob with the per-test default filled in.
    pub fn resolved_allowance(&self) -> f64 {
        self.allowance.unwrap_or_else(|| default_allowance(self.test, &self.spec))
    }
}

/// Default tolerance for each test.
pub fn default_allowance(test: TestKind, spec: &EnsembleSpec) -> f64 {
    match test {
        TestKind::RadialLimit => 0.03 * 100.0 / spec.point_count().max(1) as f64,
        TestKind::RadialFinite | TestKind::Angular => 0.005,
        TestKind::KernelPair => 0.10,
        TestKind::Moments => {
            if spec.k() <= 2 {
                1e-5
            } else {
                1e-3
            }
        }
        TestKind::Gschur => 1e-10,
    }
}

/// Reads a JSON config; unknown fields are rejected.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Command-line values that override a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub ensemble: Option<EnsembleKind>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub signs: Option<Signs>,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub test: Option<TestKind>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub allowance: Option<f64>,
}

impl Overrides {
    /// Builds the final config from an optional base file.
    pub fn resolve(self, base: Option<ExperimentConfig>) -> Result<ExperimentConfig> {
        let mut cfg = match base {
            Some(c) => c,
            None => {
                let kind = self.ensemble.ok_or_else(|| {
                    Error::InvalidSpec("ensemble: required when no --config is given".into())
                })?;
                let test = self
                    .test
                    .ok_or_else(|| Error::InvalidSpec("test: required when no --config is given".into()))?;
                let spec = EnsembleSpec {
                    kind,
                    n: 0,
                    dims: Vec::new(),
                    signs: Signs::default(),
                };
                ExperimentConfig::new(spec, test, 0)
            }
        };
        if let Some(k) = self.ensemble {
            cfg.spec.kind = k;
        }
        if let Some(n) = self.n {
            cfg.spec.n = n;
        }
        if let Some(m) = self.m {
            if cfg.spec.kind != EnsembleKind::TruncatedUnitaryProduct {
                return Err(Error::InvalidSpec("m: only used by truncated-unitary-product".into()));
            }
            cfg.spec.n = m;
        }
        if let Some(d) = self.dims {
            cfg.spec.dims = d;
        }
        if let Some(s) = self.signs {
            cfg.spec.signs = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.test {
            cfg.test = t;
        }
        if let Some(o) = self.out {
            cfg.out = Some(o);
        }
        if let Some(s) = self.svg {
            cfg.svg = Some(s);
        }
        if let Some(a) = self.allowance {
            cfg.allowance = Some(a);
        }
        cfg.validate()
    }
}

/// Parses `40,50,60`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("dims: cannot parse {p:?} as a size")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"spec": {"kind": "ginibre-product", "n": 5, "signs": "+-"}, "test": "radial-limit", "seed": 9}"#,
        )
        .unwrap();
        let cfg = cfg.validate().unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.samples, 1_000_000);
        assert!((cfg.resolved_allowance() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<ExperimentConfig, _> = serde_json::from_str(
            r#"{"spec": {"kind": "ginibre-product", "n": 5, "signs": "+"}, "test": "moments", "bogus": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn sign_count_must_match_dims() {
        let o = Overrides {
            ensemble: Some(EnsembleKind::TruncatedUnitaryProduct),
            m: Some(3),
            dims: Some(vec![5, 6, 7]),
            signs: Some("+-".parse().unwrap()),
            test: Some(TestKind::RadialFinite),
            ..Default::default()
        };
        assert!(matches!(o.resolve(None), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn unknown_test_name() {
        let e = "radial".parse::<TestKind>().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("40,50, 60").unwrap(), vec![40, 50, 60]);
        assert!(parse_dims("4,x").is_err());
    }
}
