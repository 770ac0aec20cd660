//! Load accounting, Monte-Carlo distortion measurement, and the
//! degrees-of-freedom slope estimator.
//!
//! Loads are exact rationals built from the transcript's integer counters,
//! so no floating error ever enters the load columns. Distortion is the
//! per-entry mean squared decode error against ground truth, averaged over
//! trials that share a deterministic seed schedule; rank-deficient trials
//! (a measure-zero channel event) are excluded and counted. The DoF slope
//! is the least-squares slope of log(1/distortion) against log(power),
//! with the same trial seeds reused at every power point.

use num_rational::Ratio;

use crate::baselines::{self, SchemeTag, SchemeTranscript};
use crate::directions;
use crate::error::{Error, Result};
use crate::model::{self, Dataset, LinearFunctionFamily, SystemConfig};
use crate::seeds::{self, SeedSchedule, TrialSeeds};
use crate::ucec;

/// Computation and communication loads as exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadPair {
    pub computation: Ratio<u64>,
    pub communication: Ratio<u64>,
}

/// Loads from a transcript's counters: computation is total computed over
/// total required; communication sums the per-segment slot-per-function
/// ratios, which for a single segment is the plain definition and for the
/// partitioned scheme adds the sequentially served partitions.
pub fn compute_loads(t: &SchemeTranscript) -> LoadPair {
    let computed: u64 = t.segments.iter().map(|s| s.computed_functions).sum();
    let required: u64 = t.segments.iter().map(|s| s.required_functions).sum();
    let communication = t
        .segments
        .iter()
        .map(|s| Ratio::new(s.slots, s.functions_per_user))
        .fold(Ratio::new(0, 1), |acc, r| acc + r);
    LoadPair { computation: Ratio::new(computed, required), communication }
}

/// One executed trial: the transcript plus the ground truth it is judged
/// against, aligned as `[user][input][function]`.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub transcript: SchemeTranscript,
    pub truth: Vec<Vec<Vec<f64>>>,
}

/// Anything that can execute one seeded trial of a scheme.
pub trait TrialRunner {
    fn run_trial(&self, cfg: &SystemConfig, seeds: TrialSeeds, noiseless: bool) -> Result<TrialRun>;
}

fn family_for(cfg: &SystemConfig) -> LinearFunctionFamily {
    let schedule = SeedSchedule::new(cfg.seed);
    let dataset = Dataset::generate(cfg, &mut seeds::stream(schedule.dataset_seed()));
    LinearFunctionFamily::from_dataset(&dataset)
}

impl TrialRunner for SchemeTag {
    fn run_trial(&self, cfg: &SystemConfig, seeds: TrialSeeds, noiseless: bool) -> Result<TrialRun> {
        let fam = family_for(cfg);
        let mut input_rng = seeds::stream(seeds.input);
        let mut channel_rng = seeds::stream(seeds.channel);
        let mut noise_rng = seeds::stream(seeds.noise);
        match self {
            SchemeTag::Ucec => {
                let f = directions::lattice_size(cfg.users, cfg.direction_param)?;
                let block = model::generate_inputs(cfg, f, &mut input_rng);
                let truth = model::ground_truth(&fam, &block);
                let t = ucec::run(cfg, &fam, &block, &mut channel_rng, &mut noise_rng, noiseless)?;
                Ok(TrialRun { transcript: t.into(), truth: truth.values })
            }
            SchemeTag::ZfReady => {
                let block = model::generate_inputs(cfg, 1, &mut input_rng);
                let truth = model::ground_truth(&fam, &block);
                let t = baselines::zf_ready::run(
                    cfg, &fam, &block, &mut channel_rng, &mut noise_rng, noiseless,
                )?;
                Ok(TrialRun { transcript: t, truth: truth.values })
            }
            SchemeTag::Ain22 => {
                let block = model::generate_inputs(cfg, 3, &mut input_rng);
                let truth = model::ground_truth(&fam, &block);
                let t = baselines::ain22::run(
                    cfg, &fam, &block, &mut channel_rng, &mut noise_rng, noiseless,
                )?;
                Ok(TrialRun { transcript: t, truth: truth.values })
            }
            SchemeTag::Tdma => {
                let block = model::generate_inputs(cfg, 1, &mut input_rng);
                let truth = model::ground_truth(&fam, &block);
                let t = baselines::tdma::run(
                    cfg, &fam, &block, &mut channel_rng, &mut noise_rng, noiseless,
                )?;
                Ok(TrialRun { transcript: t, truth: truth.values })
            }
            SchemeTag::PartitionedUcec => {
                let sizes = baselines::partitioned::partition_sizes(cfg.users, cfg.nodes);
                for size in &sizes {
                    directions::lattice_size(*size, cfg.direction_param + 1)?;
                }
                let blocks: Vec<_> = sizes
                    .iter()
                    .map(|size| {
                        let sub = SystemConfig { users: *size, nodes: *size, ..cfg.clone() };
                        let f = baselines::partitioned::partition_block_len(
                            cfg.direction_param,
                            *size,
                        );
                        model::generate_inputs(&sub, f, &mut input_rng)
                    })
                    .collect();
                let truth: Vec<Vec<Vec<f64>>> = blocks
                    .iter()
                    .flat_map(|b| model::ground_truth(&fam, b).values)
                    .collect();
                let t = baselines::partitioned::run(
                    cfg, &fam, &blocks, &mut channel_rng, &mut noise_rng, noiseless,
                )?;
                Ok(TrialRun { transcript: t, truth })
            }
        }
    }
}

/// Negative control: the CSI-aware scheme with a decoder that ignores the
/// cross-path term of the effective gain, leaving interference in the
/// estimate. Its distortion floors instead of decaying with power.
#[derive(Debug, Clone, Copy)]
pub struct BrokenDecoderControl;

impl TrialRunner for BrokenDecoderControl {
    fn run_trial(&self, cfg: &SystemConfig, seeds: TrialSeeds, noiseless: bool) -> Result<TrialRun> {
        let fam = family_for(cfg);
        let block = model::generate_inputs(cfg, 1, &mut seeds::stream(seeds.input));
        let truth = model::ground_truth(&fam, &block);
        let t = baselines::zf_ready::run_with_gain_model(
            cfg,
            &fam,
            &block,
            &mut seeds::stream(seeds.channel),
            &mut seeds::stream(seeds.noise),
            noiseless,
            baselines::zf_ready::GainModel::DirectPathOnly,
        )?;
        Ok(TrialRun { transcript: t, truth: truth.values })
    }
}

/// Monte-Carlo distortion estimate at one power level.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    /// Mean squared error per (user, input, function).
    pub per_entry: Vec<Vec<Vec<f64>>>,
    /// Mean over all entries.
    pub mean: f64,
    /// Trials that contributed.
    pub trials_used: u64,
    /// Rank-deficient trials that were excluded.
    pub discarded: u64,
    pub power: f64,
    /// Mean square of the ground truth, the scale distortions compare to.
    pub signal_power: f64,
    /// Condition numbers collected from every contributing trial.
    pub condition_numbers: Vec<f64>,
}

/// Averages squared decode error over seeded trials with fresh inputs,
/// channels, and noise per trial. Trial `i` always uses `schedule.trial(i)`
/// regardless of power, so power sweeps compare matched realizations.
pub fn measure_distortion(
    runner: &dyn TrialRunner,
    cfg: &SystemConfig,
    power: f64,
    trials: u64,
    schedule: &SeedSchedule,
    noiseless: bool,
) -> Result<DistortionReport> {
    assert!(trials >= 1, "need at least one trial");
    let cfg = SystemConfig { power, ..cfg.clone() };
    let mut accum: Option<Vec<Vec<Vec<f64>>>> = None;
    let mut signal_sum = 0.0;
    let mut used = 0u64;
    let mut discarded = 0u64;
    let mut condition_numbers = Vec::new();
    for index in 0..trials {
        match runner.run_trial(&cfg, schedule.trial(index), noiseless) {
            Ok(run) => {
                let acc = accum.get_or_insert_with(|| {
                    run.truth
                        .iter()
                        .map(|u| u.iter().map(|i| vec![0.0; i.len()]).collect())
                        .collect()
                });
                let mut truth_sum = 0.0;
                let mut entries = 0usize;
                for (k, user) in run.truth.iter().enumerate() {
                    for (i, vec) in user.iter().enumerate() {
                        for (b, expected) in vec.iter().enumerate() {
                            let err = run.transcript.decoded[k][i][b] - expected;
                            acc[k][i][b] += err * err;
                            truth_sum += expected * expected;
                            entries += 1;
                        }
                    }
                }
                signal_sum += truth_sum / entries.max(1) as f64;
                condition_numbers.extend(run.transcript.condition_numbers.iter().copied());
                used += 1;
            }
            Err(Error::RankDeficient { .. }) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    let Some(mut per_entry) = accum else {
        // Every trial hit the measure-zero discard path.
        return Err(Error::RankDeficient { rank: 0, unknowns: 0 });
    };
    let mut total = 0.0;
    let mut count = 0usize;
    for user in &mut per_entry {
        for vec in user {
            for v in vec.iter_mut() {
                *v /= used as f64;
                total += *v;
                count += 1;
            }
        }
    }
    Ok(DistortionReport {
        per_entry,
        mean: total / count.max(1) as f64,
        trials_used: used,
        discarded,
        power,
        signal_power: signal_sum / used.max(1) as f64,
        condition_numbers,
    })
}

/// DoF slope fit across power points.
#[derive(Debug, Clone)]
pub struct SlopeReport {
    /// Least-squares slope of log(1/mean distortion) vs log(power).
    pub slope: f64,
    /// The same fit per (user, input, function) entry, for inspection.
    pub per_entry_slopes: Vec<Vec<Vec<f64>>>,
    pub reports: Vec<DistortionReport>,
}

/// Fits the high-power growth rate of `log(1/D)` against `log(P)`.
/// Requires at least three power points spanning four decades.
pub fn dof_slope(
    runner: &dyn TrialRunner,
    cfg: &SystemConfig,
    powers: &[f64],
    trials: u64,
    schedule: &SeedSchedule,
) -> Result<SlopeReport> {
    assert!(powers.len() >= 3, "need at least three power points");
    let max = powers.iter().fold(0.0_f64, |a, p| a.max(*p));
    let min = powers.iter().fold(f64::INFINITY, |a, p| a.min(*p));
    assert!(max / min >= 1e4, "power points must span at least four decades");
    let reports = powers
        .iter()
        .map(|p| measure_distortion(runner, cfg, *p, trials, schedule, false))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> =
        reports.iter().map(|r| (r.power.ln(), (1.0 / r.mean).ln())).collect();
    let first = &reports[0].per_entry;
    let per_entry_slopes = (0..first.len())
        .map(|k| {
            (0..first[k].len())
                .map(|i| {
                    (0..first[k][i].len())
                        .map(|b| {
                            let entry_points: Vec<(f64, f64)> = reports
                                .iter()
                                .map(|r| (r.power.ln(), (1.0 / r.per_entry[k][i][b]).ln()))
                                .collect();
                            ols_slope(&entry_points)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SlopeReport { slope: ols_slope(&points), per_entry_slopes, reports })
}

/// Ordinary least-squares slope of y against x.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    sxy / sxx
}
