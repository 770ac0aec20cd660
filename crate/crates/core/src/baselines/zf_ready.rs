//! The CSI-aware two-user scheme: channel gains are known before the
//! computation phase, so each node codes its inputs with the gains baked
//! in and a single slot per function suffices. Deliberately non-universal;
//! it is the control the universality checks compare against.

use crate::baselines::{LoadSegment, SchemeTag, SchemeTranscript};
use crate::channel::{self, ChannelRealization};
use crate::error::{Error, Result};
use crate::model::{InputBlock, LinearFunctionFamily, SystemConfig};
use crate::seeds::Stream;

/// Effective-gain model used by the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModel {
    /// The true effective gain, minus gamma times the slot determinant.
    Full,
    /// Negative control: keeps only the direct-path product and ignores
    /// the cross-path term, so interference is never removed from the
    /// estimate and distortion floors instead of decaying with power.
    DirectPathOnly,
}

pub fn run(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<SchemeTranscript> {
    run_with_gain_model(cfg, fam, block, channel_rng, noise_rng, noiseless, GainModel::Full)
}

pub fn run_with_gain_model(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
    model: GainModel,
) -> Result<SchemeTranscript> {
    if cfg.users != 2 || cfg.nodes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: cfg.users.max(cfg.nodes) });
    }
    if block.block_len() != 1 {
        return Err(Error::BlockSizeMismatch { expected: 1, found: block.block_len() });
    }
    let outputs = fam.outputs();
    // CSI arrives before computation: the draw precedes the coding step.
    let ch = ChannelRealization::draw(2, 2, outputs, channel_rng);

    let d0 = block.vector(0, 0);
    let d1 = block.vector(1, 0);
    let mut coded_inputs = Vec::with_capacity(2 * outputs);
    let mut results = [Vec::with_capacity(outputs), Vec::with_capacity(outputs)];
    for t in 0..outputs {
        let node0: Vec<f64> = d0
            .iter()
            .zip(d1)
            .map(|(a, b)| -ch.gain(t, 1, 1) * a + ch.gain(t, 0, 1) * b)
            .collect();
        let node1: Vec<f64> = d0
            .iter()
            .zip(d1)
            .map(|(a, b)| ch.gain(t, 1, 0) * a - ch.gain(t, 0, 0) * b)
            .collect();
        results[0].push(fam.evaluate(t, &node0)?);
        results[1].push(fam.evaluate(t, &node1)?);
        coded_inputs.push(node0);
        coded_inputs.push(node1);
    }

    let worst = (0..2)
        .map(|m| results[m].iter().map(|s| s * s).sum::<f64>() / outputs as f64)
        .fold(0.0_f64, f64::max);
    let gamma = if worst == 0.0 { 1.0 } else { (cfg.power / worst).sqrt() };

    let symbols: Vec<Vec<f64>> =
        (0..outputs).map(|t| vec![gamma * results[0][t], gamma * results[1][t]]).collect();
    let received = channel::transmit(&ch, &symbols, noise_rng, noiseless)?;

    let mut decoded = vec![vec![vec![0.0; outputs]; 1]; 2];
    for t in 0..outputs {
        let direct = ch.gain(t, 0, 0) * ch.gain(t, 1, 1);
        let det = direct - ch.gain(t, 0, 1) * ch.gain(t, 1, 0);
        let effective = match model {
            GainModel::Full => -gamma * det,
            GainModel::DirectPathOnly => -gamma * direct,
        };
        if effective.abs() < f64::MIN_POSITIVE {
            return Err(Error::NearSingularEffectiveGain);
        }
        for k in 0..2 {
            decoded[k][0][t] = received[t][k] / effective;
        }
    }

    let coded_results: Vec<f64> = results[0].iter().chain(&results[1]).copied().collect();
    Ok(SchemeTranscript {
        scheme: SchemeTag::ZfReady,
        segments: vec![LoadSegment {
            computed_functions: 2 * outputs as u64,
            required_functions: 2 * outputs as u64,
            slots: outputs as u64,
            functions_per_user: outputs as u64,
        }],
        coded_inputs,
        coded_results,
        gammas: vec![gamma],
        transmit: vec![symbols],
        received: vec![received],
        decoded,
        condition_numbers: Vec::new(),
        channels: vec![ch],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_inputs, ground_truth, Dataset};
    use crate::seeds::stream;

    fn config() -> SystemConfig {
        SystemConfig {
            users: 2,
            nodes: 2,
            outputs: 4,
            input_dim: 3,
            direction_param: 1,
            power: 50.0,
            noise_variance: 1.0,
            seed: 7,
        }
    }

    fn setup(input_seed: u64) -> (SystemConfig, LinearFunctionFamily, InputBlock) {
        let cfg = config();
        let dataset = Dataset::generate(&cfg, &mut stream(100));
        let fam = LinearFunctionFamily::from_dataset(&dataset);
        let block = generate_inputs(&cfg, 1, &mut stream(input_seed));
        (cfg, fam, block)
    }

    #[test]
    fn received_symbol_is_the_scaled_determinant_times_truth() {
        let (cfg, fam, block) = setup(3);
        let truth = ground_truth(&fam, &block);
        let t = run(&cfg, &fam, &block, &mut stream(5), &mut stream(7), true).unwrap();
        let gamma = t.gammas[0];
        let ch = &t.channels[0];
        for slot in 0..cfg.outputs {
            let det = ch.gain(slot, 0, 0) * ch.gain(slot, 1, 1)
                - ch.gain(slot, 0, 1) * ch.gain(slot, 1, 0);
            for k in 0..2 {
                let expected = -gamma * det * truth.value(k, 0, slot);
                let got = t.received[0][slot][k];
                assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn noiseless_run_recovers_ground_truth() {
        let (cfg, fam, block) = setup(9);
        let truth = ground_truth(&fam, &block);
        let t = run(&cfg, &fam, &block, &mut stream(11), &mut stream(13), true).unwrap();
        for k in 0..2 {
            for b in 0..cfg.outputs {
                let expected = truth.value(k, 0, b);
                assert!((t.decoded[k][0][b] - expected).abs() <= 1e-6 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_inputs_receive_zero() {
        let (cfg, fam, mut block) = setup(15);
        block.zero_user(0);
        block.zero_user(1);
        let t = run(&cfg, &fam, &block, &mut stream(17), &mut stream(19), true).unwrap();
        assert!(t.received[0].iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn counters_give_unit_loads() {
        let (cfg, fam, block) = setup(21);
        let t = run(&cfg, &fam, &block, &mut stream(23), &mut stream(25), true).unwrap();
        let seg = &t.segments[0];
        assert_eq!(seg.computed_functions, seg.required_functions);
        assert_eq!(seg.slots, seg.functions_per_user);
    }

    #[test]
    fn direct_path_decoder_leaves_interference_in() {
        let (cfg, fam, block) = setup(27);
        let truth = ground_truth(&fam, &block);
        let t = run_with_gain_model(
            &cfg,
            &fam,
            &block,
            &mut stream(29),
            &mut stream(31),
            true,
            GainModel::DirectPathOnly,
        )
        .unwrap();
        let mut worst = 0.0_f64;
        for k in 0..2 {
            for b in 0..cfg.outputs {
                worst = worst.max((t.decoded[k][0][b] - truth.value(k, 0, b)).abs());
            }
        }
        assert!(worst > 1e-3, "mismatched decoder should not recover the truth");
    }

    #[test]
    fn requires_two_by_two() {
        let (cfg, fam, block) = setup(33);
        let bad = SystemConfig { users: 3, nodes: 3, ..cfg };
        assert!(run(&bad, &fam, &block, &mut stream(1), &mut stream(2), true).is_err());
    }
}
