//! Experiment specification: CLI flags or a JSON config file, validated
//! before anything runs.

use serde::{Deserialize, Serialize};
use ucec_core::baselines::partitioned;
use ucec_core::directions;
use ucec_core::model::SystemConfig;
use ucec_core::SchemeTag;

use crate::CliError;

/// One experiment: a scheme, its system parameters, the power sweep, and
/// the trial budget. Field names double as the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scheme: SchemeTag,
    pub users: usize,
    pub nodes: usize,
    #[serde(rename = "N")]
    pub direction_n: u32,
    #[serde(rename = "B")]
    pub outputs: usize,
    #[serde(rename = "Q")]
    pub input_dim: usize,
    pub powers: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub noiseless: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scheme: SchemeTag::Ucec,
            users: 2,
            nodes: 2,
            direction_n: 1,
            outputs: 2,
            input_dim: 4,
            powers: vec![1e4],
            trials: 100,
            seed: 7,
            noiseless: false,
        }
    }
}

impl ExperimentSpec {
    pub fn from_config_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_system_config(&self) -> SystemConfig {
        SystemConfig {
            users: self.users,
            nodes: self.nodes,
            outputs: self.outputs,
            input_dim: self.input_dim,
            direction_param: self.direction_n,
            power: self.powers.first().copied().unwrap_or(1.0),
            noise_variance: 1.0,
            seed: self.seed,
        }
    }

    /// Input vectors per user the scheme consumes; for the partitioned
    /// wrapper this is the standard (first-partition) block length.
    pub fn block_len(&self) -> usize {
        match self.scheme {
            SchemeTag::Ucec => {
                (self.direction_n as usize).pow((self.users * self.users) as u32)
            }
            SchemeTag::ZfReady | SchemeTag::Tdma => 1,
            SchemeTag::Ain22 => 3,
            SchemeTag::PartitionedUcec => {
                let size = self.users.min(self.nodes);
                partitioned::partition_block_len(self.direction_n, size)
            }
        }
    }

    /// Rejects every scheme-constraint violation with a named reason.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |reason: String| Err(CliError::Config(reason));
        if self.users < 1 || self.nodes < 1 {
            return fail("users and nodes must be at least 1".into());
        }
        if self.outputs < 1 {
            return fail("B (outputs) must be at least 1".into());
        }
        if self.input_dim < 1 {
            return fail("Q (input dimension) must be at least 1".into());
        }
        if self.direction_n < 1 {
            return fail("N (direction parameter) must be at least 1".into());
        }
        if self.powers.is_empty() {
            return fail("powers must list at least one value".into());
        }
        if self.powers.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return fail("every power must be positive and finite".into());
        }
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        match self.scheme {
            SchemeTag::ZfReady => {
                if self.users != 2 || self.nodes != 2 {
                    return fail("zf-ready requires exactly 2 users and 2 nodes".into());
                }
            }
            SchemeTag::Ain22 => {
                if self.users != 2 || self.nodes != 2 {
                    return fail("ain22 requires exactly 2 users and 2 nodes".into());
                }
            }
            SchemeTag::Ucec => {
                if self.users != self.nodes {
                    return fail(format!(
                        "ucec requires as many nodes as users (got {} users, {} nodes)",
                        self.users, self.nodes
                    ));
                }
                if let Err(e) = directions::lattice_size(self.users, self.direction_n + 1) {
                    return fail(format!("ucec configuration too large: {e}"));
                }
            }
            SchemeTag::PartitionedUcec => {
                for size in partitioned::partition_sizes(self.users, self.nodes) {
                    if let Err(e) = directions::lattice_size(size, self.direction_n + 1) {
                        return fail(format!(
                            "partitioned-ucec partition of size {size} too large: {e}"
                        ));
                    }
                }
            }
            SchemeTag::Tdma => {}
        }
        Ok(())
    }
}
