//! Machine-readable experiment reports: a JSON document per run and CSV
//! rows with fixed columns. Loads are serialized as exact
//! numerator/denominator pairs so no float printing ambiguity enters the
//! load columns. The CSV carries no wall-clock or other nondeterministic
//! fields; identical spec and seed produce byte-identical CSV.

use serde::Serialize;
use ucec_core::metrics::{DistortionReport, LoadPair};
use ucec_core::TrialSeeds;

use crate::spec::ExperimentSpec;

pub const CSV_HEADER: &str =
    "scheme,K,M,N,B,Q,F,P,trials,seed,r_num,r_den,L_num,L_den,mean_distortion,dof_slope,cond_median,discarded";

#[derive(Debug, Clone, Serialize)]
pub struct LoadsOut {
    pub r_num: u64,
    pub r_den: u64,
    pub l_num: u64,
    pub l_den: u64,
}

impl From<LoadPair> for LoadsOut {
    fn from(loads: LoadPair) -> Self {
        Self {
            r_num: *loads.computation.numer(),
            r_den: *loads.computation.denom(),
            l_num: *loads.communication.numer(),
            l_den: *loads.communication.denom(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerPoint {
    pub power: f64,
    pub mean_distortion: f64,
    pub signal_power: f64,
    pub trials_used: u64,
    pub discarded: u64,
    pub cond_median: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedScheduleOut {
    pub master: u64,
    pub dataset_seed: u64,
    pub trials: Vec<TrialSeeds>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub block_len: usize,
    pub loads: LoadsOut,
    pub per_power: Vec<PowerPoint>,
    pub dof_slope: Option<f64>,
    pub condition_summary: Option<ConditionSummary>,
    pub discarded_trials: u64,
    pub wall_clock_seconds: f64,
    pub library_version: &'static str,
    pub seed_schedule: SeedScheduleOut,
}

/// Median of an unsorted sample; None when empty. Even-sized samples
/// average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("condition numbers are comparable"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 { sorted[mid] } else { (sorted[mid - 1] + sorted[mid]) / 2.0 })
}

pub fn condition_summary(values: &[f64]) -> Option<ConditionSummary> {
    let median = median(values)?;
    let min = values.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    let max = values.iter().fold(0.0_f64, |a, v| a.max(*v));
    Some(ConditionSummary { min, median, max })
}

fn opt_cell(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| format!("{v:e}"))
}

/// One CSV row per power point.
pub fn csv_rows(
    spec: &ExperimentSpec,
    block_len: usize,
    loads: &LoadsOut,
    per_power: &[(DistortionReport, Option<f64>)],
    dof_slope: Option<f64>,
) -> Vec<String> {
    per_power
        .iter()
        .map(|(report, cond_median)| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:e},{},{},{}",
                spec.scheme,
                spec.users,
                spec.nodes,
                spec.direction_n,
                spec.outputs,
                spec.input_dim,
                block_len,
                report.power,
                spec.trials,
                spec.seed,
                loads.r_num,
                loads.r_den,
                loads.l_num,
                loads.l_den,
                report.mean,
                opt_cell(dof_slope),
                opt_cell(*cond_median),
                report.discarded,
            )
        })
        .collect()
}
