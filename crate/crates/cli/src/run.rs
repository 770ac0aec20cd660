//! The `run` subcommand: execute one scheme across the power list and the
//! trial budget, then emit the JSON report and CSV.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use ucec_core::metrics::{self, compute_loads, DistortionReport, TrialRunner};
use ucec_core::model::{generate_inputs, Dataset, InputBlock};
use ucec_core::seeds::{self, SeedSchedule};
use ucec_core::{Error, SchemeTag, SystemConfig};

use crate::report::{self, csv_rows, ExperimentReport, LoadsOut, SeedScheduleOut, CSV_HEADER};
use crate::spec::ExperimentSpec;
use crate::CliError;

/// Optional debug dumps taken from trial 0 at the first power.
#[derive(Debug, Clone, Default)]
pub struct DumpPaths {
    pub transcript: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub channel: Option<PathBuf>,
}

pub struct RunArtifacts {
    pub report: ExperimentReport,
    pub csv: String,
}

fn core_failure(e: Error) -> CliError {
    CliError::Failure(format!("scheme execution failed: {e}"))
}

/// Blocks trial 0 consumes, one per partition (a single block for the
/// non-partitioned schemes). Used only by the model dump.
fn trial_blocks(spec: &ExperimentSpec, cfg: &SystemConfig, schedule: &SeedSchedule) -> Vec<InputBlock> {
    let mut input_rng = seeds::stream(schedule.trial(0).input);
    match spec.scheme {
        SchemeTag::PartitionedUcec => {
            ucec_core::baselines::partitioned::partition_sizes(cfg.users, cfg.nodes)
                .iter()
                .map(|size| {
                    let sub = SystemConfig { users: *size, nodes: *size, ..cfg.clone() };
                    let f = ucec_core::baselines::partitioned::partition_block_len(
                        cfg.direction_param,
                        *size,
                    );
                    generate_inputs(&sub, f, &mut input_rng)
                })
                .collect()
        }
        _ => vec![generate_inputs(cfg, spec.block_len(), &mut input_rng)],
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

/// Executes the experiment and assembles report plus CSV in memory;
/// nothing is written until the whole run has succeeded.
pub fn execute(spec: &ExperimentSpec, dumps: &DumpPaths) -> Result<RunArtifacts, CliError> {
    spec.validate()?;
    let started = Instant::now();
    let cfg = spec.to_system_config();
    let schedule = SeedSchedule::new(spec.seed);

    // Representative trial: loads are power-independent, and the debug
    // dumps come from here.
    let representative =
        spec.scheme.run_trial(&cfg, schedule.trial(0), spec.noiseless).map_err(core_failure)?;
    let loads: LoadsOut = compute_loads(&representative.transcript).into();

    if let Some(path) = &dumps.transcript {
        write_json(path, &representative.transcript)?;
    }
    if let Some(path) = &dumps.channel {
        write_json(path, &representative.transcript.channels)?;
    }
    if let Some(path) = &dumps.model {
        let dataset = Dataset::generate(&cfg, &mut seeds::stream(schedule.dataset_seed()));
        let blocks = trial_blocks(spec, &cfg, &schedule);
        #[derive(Serialize)]
        struct ModelDump<'a> {
            dataset: &'a Dataset,
            inputs: &'a [InputBlock],
        }
        write_json(path, &ModelDump { dataset: &dataset, inputs: &blocks })?;
    }

    let mut per_power: Vec<(DistortionReport, Option<f64>)> = Vec::with_capacity(spec.powers.len());
    for power in &spec.powers {
        let report = metrics::measure_distortion(
            &spec.scheme,
            &cfg,
            *power,
            spec.trials,
            &schedule,
            spec.noiseless,
        )
        .map_err(core_failure)?;
        let cond_median = report::median(&report.condition_numbers);
        per_power.push((report, cond_median));
    }

    // Slope only when the power list supports the fit and noise is on.
    let span_ok = {
        let max = spec.powers.iter().fold(0.0_f64, |a, p| a.max(*p));
        let min = spec.powers.iter().fold(f64::INFINITY, |a, p| a.min(*p));
        max / min >= 1e4
    };
    let dof_slope = if !spec.noiseless && spec.powers.len() >= 3 && span_ok {
        let points: Vec<(f64, f64)> = per_power
            .iter()
            .map(|(r, _)| (r.power.ln(), (1.0 / r.mean).ln()))
            .collect();
        Some(metrics::ols_slope(&points))
    } else {
        None
    };

    let all_conditions: Vec<f64> = per_power
        .iter()
        .flat_map(|(r, _)| r.condition_numbers.iter().copied())
        .collect();
    let discarded_trials = per_power.iter().map(|(r, _)| r.discarded).sum();

    let csv = {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in csv_rows(spec, spec.block_len(), &loads, &per_power, dof_slope) {
            out.push_str(&row);
            out.push('\n');
        }
        out
    };

    let report = ExperimentReport {
        spec: spec.clone(),
        block_len: spec.block_len(),
        loads,
        per_power: per_power
            .iter()
            .map(|(r, cond_median)| report::PowerPoint {
                power: r.power,
                mean_distortion: r.mean,
                signal_power: r.signal_power,
                trials_used: r.trials_used,
                discarded: r.discarded,
                cond_median: *cond_median,
            })
            .collect(),
        dof_slope,
        condition_summary: report::condition_summary(&all_conditions),
        discarded_trials,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        library_version: env!("CARGO_PKG_VERSION"),
        seed_schedule: SeedScheduleOut {
            master: spec.seed,
            dataset_seed: schedule.dataset_seed(),
            trials: (0..spec.trials).map(|i| schedule.trial(i)).collect(),
        },
    };

    Ok(RunArtifacts { report, csv })
}

/// Runs and writes `report.json` and `results.csv` into the output
/// directory.
pub fn command(spec: &ExperimentSpec, out_dir: &Path, dumps: &DumpPaths) -> Result<(), CliError> {
    let artifacts = execute(spec, dumps)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Failure(format!("cannot create {}: {e}", out_dir.display())))?;
    write_json(&out_dir.join("report.json"), &artifacts.report)?;
    std::fs::write(out_dir.join("results.csv"), &artifacts.csv)
        .map_err(|e| CliError::Failure(format!("cannot write results.csv: {e}")))?;
    println!(
        "{}: r={}/{} L={}/{} mean_distortion={:e}{}",
        artifacts.report.spec.scheme,
        artifacts.report.loads.r_num,
        artifacts.report.loads.r_den,
        artifacts.report.loads.l_num,
        artifacts.report.loads.l_den,
        artifacts.report.per_power.last().map_or(f64::NAN, |p| p.mean_distortion),
        artifacts
            .report
            .dof_slope
            .map_or_else(String::new, |s| format!(" dof_slope={s:.4}")),
    );
    Ok(())
}
