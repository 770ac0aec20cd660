//! Two-user aligned scheme over blocks of three inputs. The computation
//! phase is CSI-free: each half of the block codes three linear
//! combinations whose structure lets the nodes later pick transmit
//! directions that cancel the cross-user terms in two slots per function.
//! Halves swap the primary user so both users end up with all three
//! outputs, giving loads (1, 4/3).

use crate::baselines::{LoadSegment, SchemeTag, SchemeTranscript};
use crate::channel::{self, ChannelRealization};
use crate::error::{Error, Result};
use crate::model::{InputBlock, LinearFunctionFamily, SystemConfig};
use crate::numerics::{self, RealMatrix};
use crate::seeds::Stream;

/// Block indices used by one half: the primary user's pair and the
/// secondary user's single input.
struct HalfPlan {
    primary: usize,
    first: usize,
    second: usize,
    secondary_input: usize,
}

const HALVES: [HalfPlan; 2] = [
    HalfPlan { primary: 0, first: 0, second: 1, secondary_input: 0 },
    HalfPlan { primary: 1, first: 1, second: 2, secondary_input: 2 },
];

/// Transmit directions for one 2-slot block: (v11, v12, v2) with v2 fixed
/// at (1, 1) and the others solving the per-user cancellation constraints.
pub(crate) fn transmit_directions(
    ch: &ChannelRealization,
    primary: usize,
) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let secondary = 1 - primary;
    let v2 = [1.0, 1.0];
    let mut v11 = [0.0; 2];
    let mut v12 = [0.0; 2];
    for slot in 0..2 {
        v12[slot] = -ch.gain(slot, primary, 1) / ch.gain(slot, primary, 0) * v2[slot];
        v11[slot] = -ch.gain(slot, secondary, 1) / ch.gain(slot, secondary, 0) * v2[slot];
    }
    (v11, v12, v2)
}

pub fn run(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<SchemeTranscript> {
    if cfg.users != 2 || cfg.nodes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: cfg.users.max(cfg.nodes) });
    }
    if block.block_len() != 3 {
        return Err(Error::BlockSizeMismatch { expected: 3, found: block.block_len() });
    }
    let outputs = fam.outputs();
    let dim = block.dim();

    // Computation phase, both halves, no channel in sight.
    let mut coded_inputs = Vec::with_capacity(6);
    // s[half][0..3][b]: function values of (L_a, L_b, L_c).
    let mut s = Vec::with_capacity(2);
    for plan in &HALVES {
        let alpha = plan.primary;
        let beta = 1 - alpha;
        let l_a: Vec<f64> = block.vector(alpha, plan.first).to_vec();
        let l_b: Vec<f64> = (0..dim)
            .map(|q| block.vector(alpha, plan.second)[q] + block.vector(beta, plan.secondary_input)[q])
            .collect();
        let l_c: Vec<f64> = (0..dim)
            .map(|q| block.vector(alpha, plan.first)[q] + block.vector(beta, plan.secondary_input)[q])
            .collect();
        let mut half_s = Vec::with_capacity(3);
        for l in [&l_a, &l_b, &l_c] {
            half_s.push((0..outputs).map(|b| fam.evaluate(b, l).expect("dims checked")).collect::<Vec<f64>>());
        }
        s.push(half_s);
        coded_inputs.push(l_a);
        coded_inputs.push(l_b);
        coded_inputs.push(l_c);
    }

    // Communication phase: two fresh slots per (half, function).
    let mut gammas = Vec::with_capacity(2 * outputs);
    let mut transmit = Vec::with_capacity(2 * outputs);
    let mut received = Vec::with_capacity(2 * outputs);
    let mut channels = Vec::with_capacity(2 * outputs);
    let mut condition_numbers = Vec::with_capacity(4 * outputs);
    let mut decoded = vec![vec![vec![0.0; outputs]; 3]; 2];

    for (half, plan) in HALVES.iter().enumerate() {
        let alpha = plan.primary;
        let beta = 1 - alpha;
        for b in 0..outputs {
            let ch = ChannelRealization::draw(2, 2, 2, channel_rng);
            let (v11, v12, v2) = transmit_directions(&ch, alpha);
            let s_a = s[half][0][b];
            let s_b = s[half][1][b];
            let s_c = s[half][2][b];
            let unnormalized: Vec<Vec<f64>> = (0..2)
                .map(|slot| vec![v11[slot] * s_a + v12[slot] * s_b, v2[slot] * s_c])
                .collect();
            let worst = (0..2)
                .map(|m| unnormalized.iter().map(|row| row[m] * row[m]).sum::<f64>() / 2.0)
                .fold(0.0_f64, f64::max);
            let gamma = if worst == 0.0 { 1.0 } else { (cfg.power / worst).sqrt() };
            let symbols: Vec<Vec<f64>> = unnormalized
                .iter()
                .map(|row| row.iter().map(|u| gamma * u).collect())
                .collect();
            let rx = channel::transmit(&ch, &symbols, noise_rng, noiseless)?;

            // Primary user solves for its two function values; the
            // cross term cancels by the choice of v12.
            let mut primary_design = RealMatrix::zeros(2, 2);
            let mut secondary_design = RealMatrix::zeros(2, 2);
            for slot in 0..2 {
                let h_a0 = ch.gain(slot, alpha, 0);
                let h_a1 = ch.gain(slot, alpha, 1);
                let h_b0 = ch.gain(slot, beta, 0);
                let h_b1 = ch.gain(slot, beta, 1);
                primary_design.set(slot, 0, gamma * (h_a0 * v11[slot] + h_a1 * v2[slot]));
                primary_design.set(slot, 1, gamma * h_a0 * v12[slot]);
                // Secondary user: the primary's first value is zero-forced;
                // its second stays as a solvable nuisance unknown.
                secondary_design.set(slot, 0, gamma * h_b0 * v12[slot]);
                secondary_design.set(slot, 1, gamma * (h_b0 * v12[slot] + h_b1 * v2[slot]));
            }
            // Row equilibration cannot move the solution of a square
            // system; it keeps ill-scaled direction vectors from tripping
            // the rank guard.
            let primary_scales = numerics::equilibrate_rows(&mut primary_design);
            let secondary_scales = numerics::equilibrate_rows(&mut secondary_design);
            let rhs_alpha: Vec<f64> =
                (0..2).map(|slot| rx[slot][alpha] / primary_scales[slot]).collect();
            let rhs_beta: Vec<f64> =
                (0..2).map(|slot| rx[slot][beta] / secondary_scales[slot]).collect();
            condition_numbers.push(numerics::condition_number(&primary_design));
            condition_numbers.push(numerics::condition_number(&secondary_design));
            let alpha_values = numerics::solve_least_squares(&primary_design, &rhs_alpha)?;
            let beta_values = numerics::solve_least_squares(&secondary_design, &rhs_beta)?;
            decoded[alpha][plan.first][b] = alpha_values[0];
            decoded[alpha][plan.second][b] = alpha_values[1];
            decoded[beta][plan.secondary_input][b] = beta_values[1];

            gammas.push(gamma);
            transmit.push(symbols);
            received.push(rx);
            channels.push(ch);
        }
    }

    let coded_results: Vec<f64> = s
        .iter()
        .flat_map(|half| half.iter().flat_map(|values| values.iter().copied()))
        .collect();
    Ok(SchemeTranscript {
        scheme: SchemeTag::Ain22,
        segments: vec![LoadSegment {
            computed_functions: 6 * outputs as u64,
            required_functions: 6 * outputs as u64,
            slots: 4 * outputs as u64,
            functions_per_user: 3 * outputs as u64,
        }],
        coded_inputs,
        coded_results,
        gammas,
        transmit,
        received,
        decoded,
        condition_numbers,
        channels,
    })
}
