//! Acceptance suite: every criterion as its own test, printing one
//! pass/fail line (run with `-- --nocapture` to see them) and holding its
//! runtime budget. Tolerances are pinned in the assertions.

use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use ucec_core::channel::CsiView;
use ucec_core::metrics::{compute_loads, dof_slope, BrokenDecoderControl, TrialRunner};
use ucec_core::model::{generate_inputs, ground_truth, Dataset, LinearFunctionFamily, SystemConfig};
use ucec_core::seeds::{stream, SeedSchedule};
use ucec_core::{ucec, SchemeTag};

fn conclude(number: u32, name: &str, started: Instant, budget: Duration, ok: bool, detail: &str) {
    let elapsed = started.elapsed();
    let in_budget = elapsed <= budget;
    let status = if ok && in_budget { "PASS" } else { "FAIL" };
    println!(
        "criterion {number} [{status}] {name}: {detail} ({:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
    assert!(in_budget, "criterion {number} ({name}) exceeded its {budget:?} budget: {elapsed:?}");
}

fn config(users: usize, nodes: usize, n: u32, outputs: usize, seed: u64) -> SystemConfig {
    SystemConfig {
        users,
        nodes,
        outputs,
        input_dim: 4,
        direction_param: n,
        power: 100.0,
        noise_variance: 1.0,
        seed,
    }
}

fn family(cfg: &SystemConfig, seed: u64) -> LinearFunctionFamily {
    LinearFunctionFamily::from_dataset(&Dataset::generate(cfg, &mut stream(seed)))
}

#[test]
fn criterion_1_interference_neutralization() {
    let started = Instant::now();
    let mut worst_residual = 0.0_f64;
    let mut silenced_ok = true;
    for n in [1u32, 2] {
        let cfg = config(2, 2, n, 2, 7);
        let fam = family(&cfg, 2003);
        let block_len = (n as usize).pow(4);
        for seed in 0..20u64 {
            let block = generate_inputs(&cfg, block_len, &mut stream(1000 + seed));
            let truth = ground_truth(&fam, &block);
            let comp = ucec::compute_phase(&cfg, &fam, &block).unwrap();
            let t = ucec::run(
                &cfg,
                &fam,
                &block,
                &mut stream(2000 + seed),
                &mut stream(3000 + seed),
                true,
            )
            .unwrap();
            for b in 0..cfg.outputs {
                let csi = CsiView::from_channel(&t.channels[b]).unwrap();
                for k in 0..cfg.users {
                    let mut scale = 0.0_f64;
                    let mut dev = 0.0_f64;
                    for slot in 0..t.received[b].len() {
                        let predicted: f64 = comp
                            .inner_lattice()
                            .iter()
                            .enumerate()
                            .map(|(i, p)| t.gammas[b] * csi.monomial(slot, p) * truth.value(k, i, b))
                            .sum();
                        scale = scale.max(predicted.abs());
                        dev = dev.max((t.received[b][slot][k] - predicted).abs());
                    }
                    worst_residual = worst_residual.max(dev / scale.max(1e-300));
                }
            }
        }
        // Zeroing one user's inputs silences exactly that user.
        for victim in 0..2usize {
            for seed in 0..3u64 {
                let mut block = generate_inputs(&cfg, block_len, &mut stream(4000 + seed));
                block.zero_user(victim);
                let t = ucec::run(
                    &cfg,
                    &fam,
                    &block,
                    &mut stream(5000 + seed),
                    &mut stream(6000 + seed),
                    true,
                )
                .unwrap();
                for b in 0..cfg.outputs {
                    let overall =
                        t.received[b].iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
                    let heard = t.received[b]
                        .iter()
                        .map(|row| row[victim].abs())
                        .fold(0.0_f64, f64::max);
                    silenced_ok &= overall > 0.0 && heard <= 1e-8 * overall;
                }
            }
        }
    }
    conclude(
        1,
        "interference neutralization",
        started,
        Duration::from_secs(5),
        worst_residual <= 1e-8 && silenced_ok,
        &format!("worst residual {worst_residual:.2e}, silenced users silent: {silenced_ok}"),
    );
}

#[test]
fn criterion_2_load_formulas() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(11);
    let mut ok = true;
    let mut detail = String::from("loads equal (N+1)^(K^2)/N^(K^2) exactly");
    let mut last_per_k = [None::<Ratio<u64>>; 3];
    for (users, n) in [(1usize, 1u32), (1, 3), (2, 1), (2, 2), (2, 3)] {
        let cfg = config(users, users, n, 1, 11);
        let run = SchemeTag::Ucec.run_trial(&cfg, schedule.trial(0), true).unwrap();
        let loads = compute_loads(&run.transcript);
        let dim = (users * users) as u32;
        let expected = Ratio::new((n as u64 + 1).pow(dim), (n as u64).pow(dim));
        if loads.computation != expected || loads.communication != expected {
            ok = false;
            detail = format!("K={users} N={n}: got {:?}", loads.communication);
        }
        if let Some(prev) = last_per_k[users] {
            if loads.communication >= prev {
                ok = false;
                detail = format!("K={users}: load did not decrease with N");
            }
        }
        if loads.communication <= Ratio::new(1, 1) {
            ok = false;
            detail = format!("K={users} N={n}: load not above 1");
        }
        last_per_k[users] = Some(loads.communication);
    }
    conclude(2, "load formulas", started, Duration::from_secs(5), ok, &detail);
}

#[test]
fn criterion_3_aligned_two_user_scheme() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(13);
    let cfg = config(2, 2, 1, 2, 13);
    let run = SchemeTag::Ain22.run_trial(&cfg, schedule.trial(0), true).unwrap();
    let loads = compute_loads(&run.transcript);
    let loads_ok =
        loads.computation == Ratio::new(1, 1) && loads.communication == Ratio::new(4, 3);
    let mut worst = 0.0_f64;
    for seed in 0..20u64 {
        let run = SchemeTag::Ain22.run_trial(&cfg, schedule.trial(seed), true).unwrap();
        let scale = run
            .truth
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        for (k, user) in run.truth.iter().enumerate() {
            for (i, vec) in user.iter().enumerate() {
                for (b, expected) in vec.iter().enumerate() {
                    worst =
                        worst.max((run.transcript.decoded[k][i][b] - expected).abs() / scale);
                }
            }
        }
    }
    conclude(
        3,
        "aligned two-user scheme",
        started,
        Duration::from_secs(5),
        loads_ok && worst <= 1e-6,
        &format!("loads (1, 4/3): {loads_ok}; worst recovery error {worst:.2e} over 20 seeds"),
    );
}

#[test]
fn criterion_4_csi_aware_scheme() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(17);
    let cfg = config(2, 2, 1, 3, 17);
    let run = SchemeTag::ZfReady.run_trial(&cfg, schedule.trial(0), true).unwrap();
    let loads = compute_loads(&run.transcript);
    let loads_ok =
        loads.computation == Ratio::new(1, 1) && loads.communication == Ratio::new(1, 1);
    // Noiseless effective gain per slot is -gamma * det H(t).
    let gamma = run.transcript.gammas[0];
    let ch = &run.transcript.channels[0];
    let mut gain_ok = true;
    let mut worst = 0.0_f64;
    for t in 0..cfg.outputs {
        let det =
            ch.gain(t, 0, 0) * ch.gain(t, 1, 1) - ch.gain(t, 0, 1) * ch.gain(t, 1, 0);
        for k in 0..2 {
            let expected = -gamma * det * run.truth[k][0][t];
            let err = (run.transcript.received[0][t][k] - expected).abs()
                / expected.abs().max(1.0);
            worst = worst.max(err);
            gain_ok &= err <= 1e-9;
        }
    }
    conclude(
        4,
        "csi-aware scheme",
        started,
        Duration::from_secs(2),
        loads_ok && gain_ok,
        &format!("loads (1, 1): {loads_ok}; effective-gain deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_5_tdma_load() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(19);
    let mut ok = true;
    let mut detail = String::from("L = K for K in {1, 2, 3}");
    for users in [1usize, 2, 3] {
        let cfg = config(users, users, 1, 2, 19);
        let run = SchemeTag::Tdma.run_trial(&cfg, schedule.trial(0), true).unwrap();
        let loads = compute_loads(&run.transcript);
        if loads.communication != Ratio::new(users as u64, 1)
            || loads.computation != Ratio::new(1, 1)
        {
            ok = false;
            detail = format!("K={users}: got {:?}", loads.communication);
        }
    }
    conclude(5, "tdma baseline", started, Duration::from_secs(2), ok, &detail);
}

#[test]
fn criterion_6_partitioned_wrapper() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(23);

    // K=3, M=2 at N=1: partitions {2, 1}; L = 16/1 + 2/1, r = 34/3.
    let cfg = config(3, 2, 1, 2, 23);
    let run = SchemeTag::PartitionedUcec.run_trial(&cfg, schedule.trial(0), true).unwrap();
    let loads = compute_loads(&run.transcript);
    let mut ok = loads.communication == Ratio::new(18, 1) && loads.computation == Ratio::new(34, 3);
    let mut detail = format!(
        "K=3,M=2: r={:?} L={:?}",
        loads.computation, loads.communication
    );
    for (segment, size) in run.transcript.segments.iter().zip([2usize, 1]) {
        let dim = (size * size) as u32;
        let expected = Ratio::new(2u64.pow(dim), 1);
        if Ratio::new(segment.slots, segment.functions_per_user) != expected {
            ok = false;
            detail = format!("partition of size {size} off the formula");
        }
    }

    // K=2, M=4 reduces to the plain scheme bit for bit.
    let wide = config(2, 4, 1, 2, 23);
    let wrapped = SchemeTag::PartitionedUcec.run_trial(&wide, schedule.trial(1), true).unwrap();
    let square = config(2, 2, 1, 2, 23);
    let plain = SchemeTag::Ucec.run_trial(&square, schedule.trial(1), true).unwrap();
    let equal = wrapped.transcript.decoded == plain.transcript.decoded
        && wrapped.transcript.coded_results == plain.transcript.coded_results
        && wrapped.transcript.transmit == plain.transcript.transmit
        && wrapped.transcript.received == plain.transcript.received
        && wrapped.transcript.segments == plain.transcript.segments;
    if !equal {
        ok = false;
        detail = "K=2,M=4 did not reduce to the plain scheme".to_string();
    }
    conclude(6, "partitioned wrapper", started, Duration::from_secs(10), ok, &detail);
}

#[test]
fn criterion_7_dof_slopes() {
    let started = Instant::now();
    let powers = [1e2, 1e4, 1e6];
    let schedule = SeedSchedule::new(29);
    let cfg = config(2, 2, 1, 2, 29);
    let coded = dof_slope(&SchemeTag::Ucec, &cfg, &powers, 200, &schedule).unwrap().slope;
    let aware = dof_slope(&SchemeTag::ZfReady, &cfg, &powers, 200, &schedule).unwrap().slope;
    let control =
        dof_slope(&BrokenDecoderControl, &cfg, &powers, 200, &schedule).unwrap().slope;
    let ok = (0.85..=1.1).contains(&coded)
        && (0.85..=1.1).contains(&aware)
        && control < 0.5;
    conclude(
        7,
        "dof slopes",
        started,
        Duration::from_secs(600),
        ok,
        &format!("coded {coded:.4}, csi-aware {aware:.4}, negative control {control:.4}"),
    );
}

#[test]
fn criterion_8_universality() {
    let started = Instant::now();
    let schedule = SeedSchedule::new(31);
    let base = schedule.trial(0);
    let mut ok = true;
    let mut detail = String::from(
        "coded artifacts bit-identical across 10 channel seeds; csi-aware control differs",
    );
    for tag in [SchemeTag::Ucec, SchemeTag::Ain22, SchemeTag::ZfReady] {
        let cfg = config(2, 2, 1, 2, 31);
        let reference = tag.run_trial(&cfg, base, true).unwrap();
        let mut all_identical = true;
        for other in 1..11u64 {
            let mut seeds = schedule.trial(other);
            seeds.input = base.input;
            seeds.noise = base.noise;
            let run = tag.run_trial(&cfg, seeds, true).unwrap();
            let identical = reference.transcript.coded_results.len()
                == run.transcript.coded_results.len()
                && reference
                    .transcript
                    .coded_results
                    .iter()
                    .zip(&run.transcript.coded_results)
                    .all(|(a, b)| a.to_bits() == b.to_bits())
                && reference.transcript.coded_inputs == run.transcript.coded_inputs;
            all_identical &= identical;
        }
        let expected_identical = tag != SchemeTag::ZfReady;
        if all_identical != expected_identical {
            ok = false;
            detail = format!("{tag}: channel-seed invariance = {all_identical}, expected {expected_identical}");
        }
    }
    conclude(8, "universality", started, Duration::from_secs(5), ok, &detail);
}

#[test]
fn criterion_9_run_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_ucec"))
            .args([
                "run", "--scheme", "ucec", "--users", "2", "--nodes", "2", "--N", "1", "--B",
                "2", "--Q", "4", "--powers", "1e2,1e4,1e6", "--trials", "50", "--seed", "41",
            ])
            .env("UCEC_OUT_DIR", &out)
            .status()
            .expect("binary runs");
        assert!(status.success());
        std::fs::read(out.join("results.csv")).unwrap()
    };
    let first = run("a");
    let second = run("b");
    conclude(
        9,
        "run determinism",
        started,
        Duration::from_secs(60),
        first == second && !first.is_empty(),
        &format!("{} CSV bytes, byte-identical repeat", first.len()),
    );
}
