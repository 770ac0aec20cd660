//! The `verify` subcommand: self-checks of the scheme invariants. `quick`
//! covers noiseless neutralization and exact load accounting; `full` adds
//! the Monte-Carlo DoF-slope checks with their negative control.

use std::time::Instant;

use num_rational::Ratio;
use ucec_core::channel::CsiView;
use ucec_core::metrics::{compute_loads, dof_slope, BrokenDecoderControl, TrialRunner};
use ucec_core::model::{generate_inputs, ground_truth, Dataset, LinearFunctionFamily, SystemConfig};
use ucec_core::seeds::{stream, SeedSchedule};
use ucec_core::{ucec, SchemeTag};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

fn config(users: usize, n: u32, seed: u64) -> SystemConfig {
    SystemConfig {
        users,
        nodes: users,
        outputs: 2,
        input_dim: 4,
        direction_param: n,
        power: 100.0,
        noise_variance: 1.0,
        seed,
    }
}

struct Checker {
    failures: u32,
}

impl Checker {
    fn report(&mut self, name: &str, started: Instant, ok: bool, detail: String) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("[{status}] {name}: {detail} ({:.2}s)", started.elapsed().as_secs_f64());
        if !ok {
            self.failures += 1;
        }
    }
}

/// Worst relative deviation of all received sequences from the
/// interference-free prediction over a noiseless run.
fn neutralization_residual(cfg: &SystemConfig, seed: u64) -> f64 {
    let fam = LinearFunctionFamily::from_dataset(&Dataset::generate(cfg, &mut stream(4099)));
    let f = (cfg.direction_param as usize).pow((cfg.users * cfg.users) as u32);
    let block = generate_inputs(cfg, f, &mut stream(seed));
    let truth = ground_truth(&fam, &block);
    let comp = ucec::compute_phase(cfg, &fam, &block).expect("computation phase");
    let t = ucec::run(cfg, &fam, &block, &mut stream(seed + 1), &mut stream(seed + 2), true)
        .expect("noiseless run");
    let mut worst = 0.0_f64;
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
            worst = worst.max(dev / scale.max(1e-300));
        }
    }
    worst
}

fn check_neutralization(checker: &mut Checker) {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for n in [1u32, 2] {
        let cfg = config(2, n, 7);
        for seed in 0..5u64 {
            worst = worst.max(neutralization_residual(&cfg, 300 + 10 * seed));
        }
    }
    checker.report(
        "interference neutralization",
        started,
        worst <= 1e-8,
        format!("worst residual {worst:.2e}"),
    );
}

fn check_silencing(checker: &mut Checker) {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = String::from("silenced users hear nothing");
    'outer: for n in [1u32, 2] {
        let cfg = config(2, n, 7);
        let fam = LinearFunctionFamily::from_dataset(&Dataset::generate(&cfg, &mut stream(4099)));
        let f = (n as usize).pow(4);
        for victim in 0..2usize {
            let mut block = generate_inputs(&cfg, f, &mut stream(81));
            block.zero_user(victim);
            let t = ucec::run(&cfg, &fam, &block, &mut stream(82), &mut stream(83), true).unwrap();
            for b in 0..cfg.outputs {
                let overall =
                    t.received[b].iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
                let heard = t.received[b]
                    .iter()
                    .map(|row| row[victim].abs())
                    .fold(0.0_f64, f64::max);
                if heard > 1e-8 * overall {
                    ok = false;
                    detail = format!("victim {victim} heard {heard:.2e} at N={n}");
                    break 'outer;
                }
            }
        }
    }
    checker.report("silenced-user isolation", started, ok, detail);
}

fn check_loads(checker: &mut Checker) {
    let started = Instant::now();
    let schedule = SeedSchedule::new(11);
    let mut ok = true;
    let mut detail = String::from("all counted loads match the closed forms");
    for (users, n) in [(1usize, 1u32), (1, 3), (2, 1), (2, 2), (2, 3)] {
        let cfg = config(users, n, 11);
        let run = SchemeTag::Ucec.run_trial(&cfg, schedule.trial(0), true).unwrap();
        let loads = compute_loads(&run.transcript);
        let dim = (users * users) as u32;
        let expected = Ratio::new((n as u64 + 1).pow(dim), (n as u64).pow(dim));
        if loads.computation != expected || loads.communication != expected {
            ok = false;
            detail = format!("ucec K={users} N={n} loads mismatch");
        }
    }
    let pairs: [(SchemeTag, Ratio<u64>, Ratio<u64>); 3] = [
        (SchemeTag::ZfReady, Ratio::new(1, 1), Ratio::new(1, 1)),
        (SchemeTag::Ain22, Ratio::new(1, 1), Ratio::new(4, 3)),
        (SchemeTag::Tdma, Ratio::new(1, 1), Ratio::new(2, 1)),
    ];
    for (tag, r, l) in pairs {
        let cfg = config(2, 1, 11);
        let run = tag.run_trial(&cfg, schedule.trial(0), true).unwrap();
        let loads = compute_loads(&run.transcript);
        if loads.computation != r || loads.communication != l {
            ok = false;
            detail = format!("{tag} loads mismatch");
        }
    }
    let cfg = SystemConfig { users: 3, nodes: 2, ..config(2, 1, 11) };
    let run = SchemeTag::PartitionedUcec.run_trial(&cfg, schedule.trial(0), true).unwrap();
    let loads = compute_loads(&run.transcript);
    if loads.communication != Ratio::new(18, 1) {
        ok = false;
        detail = "partitioned-ucec load mismatch".to_string();
    }
    checker.report("load accounting", started, ok, detail);
}

fn check_noiseless_recovery(checker: &mut Checker) {
    let started = Instant::now();
    let schedule = SeedSchedule::new(13);
    let mut worst = 0.0_f64;
    for tag in SchemeTag::ALL {
        let cfg = match tag {
            SchemeTag::PartitionedUcec => SystemConfig { users: 3, nodes: 2, ..config(2, 1, 13) },
            _ => config(2, 1, 13),
        };
        let run = tag.run_trial(&cfg, schedule.trial(0), true).unwrap();
        let scale = run
            .truth
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        for (k, user) in run.truth.iter().enumerate() {
            for (i, vec) in user.iter().enumerate() {
                for (b, expected) in vec.iter().enumerate() {
                    let err = (run.transcript.decoded[k][i][b] - expected).abs() / scale;
                    worst = worst.max(err);
                }
            }
        }
    }
    checker.report(
        "noiseless recovery",
        started,
        worst <= 1e-6,
        format!("worst relative error {worst:.2e}"),
    );
}

fn check_slopes(checker: &mut Checker) {
    let powers = [1e2, 1e4, 1e6];
    let schedule = SeedSchedule::new(17);

    let started = Instant::now();
    let cfg = config(2, 1, 17);
    let ucec_slope = dof_slope(&SchemeTag::Ucec, &cfg, &powers, 200, &schedule).unwrap().slope;
    checker.report(
        "coded-scheme DoF slope",
        started,
        (0.85..=1.1).contains(&ucec_slope),
        format!("slope {ucec_slope:.4}"),
    );

    let started = Instant::now();
    let zf_slope = dof_slope(&SchemeTag::ZfReady, &cfg, &powers, 200, &schedule).unwrap().slope;
    checker.report(
        "csi-aware-scheme DoF slope",
        started,
        (0.85..=1.1).contains(&zf_slope),
        format!("slope {zf_slope:.4}"),
    );

    let started = Instant::now();
    let control = dof_slope(&BrokenDecoderControl, &cfg, &powers, 200, &schedule).unwrap().slope;
    checker.report(
        "broken-decoder negative control",
        started,
        control < 0.5,
        format!("slope {control:.4}"),
    );
}

pub fn command(level: Level) -> Result<(), CliError> {
    let mut checker = Checker { failures: 0 };
    check_neutralization(&mut checker);
    check_silencing(&mut checker);
    check_loads(&mut checker);
    check_noiseless_recovery(&mut checker);
    if level == Level::Full {
        check_slopes(&mut checker);
    }
    if checker.failures == 0 {
        println!("verify: all checks passed");
        Ok(())
    } else {
        Err(CliError::Failure(format!("verify: {} check(s) failed", checker.failures)))
    }
}
