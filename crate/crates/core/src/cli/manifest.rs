use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::stats::KsReport;

/// Record of one run: the configuration, resolved defaults, every check
/// performed and the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub allowance: f64,
    pub seed: u64,
    pub retries: u64,
    pub wall_time_seconds: f64,
    pub checks: Vec<KsReport>,
    pub outputs: Vec<PathBuf>,
    pub verdict: bool,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is serializable")
    }
}
