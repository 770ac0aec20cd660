//! Uncoded baseline: every function value is computed once at its user's
//! home node and sent in its own slot, so the communication load equals
//! the number of users.

use crate::baselines::{LoadSegment, SchemeTag, SchemeTranscript};
use crate::channel::{self, ChannelRealization};
use crate::error::Result;
use crate::model::{InputBlock, LinearFunctionFamily, SystemConfig};
use crate::seeds::Stream;

pub fn run(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<SchemeTranscript> {
    let users = cfg.users;
    let nodes = cfg.nodes;
    let block_len = block.block_len();
    let outputs = fam.outputs();
    let slots = users * block_len * outputs;
    let ch = ChannelRealization::draw(users, nodes, slots, channel_rng);

    // One uncoded value per slot, slot order (user, input, function).
    let mut values = Vec::with_capacity(slots);
    for k in 0..users {
        for i in 0..block_len {
            for b in 0..outputs {
                values.push(fam.evaluate(b, block.vector(k, i))?);
            }
        }
    }

    // Per-node power factor over the node's own slots.
    let home = |k: usize| k % nodes;
    let mut gammas = vec![1.0; nodes];
    for m in 0..nodes {
        let (sum, count) = values
            .iter()
            .enumerate()
            .filter(|(t, _)| home(t / (block_len * outputs)) == m)
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v * v, c + 1));
        if count > 0 && sum > 0.0 {
            gammas[m] = (cfg.power / (sum / count as f64)).sqrt();
        }
    }

    let symbols: Vec<Vec<f64>> = values
        .iter()
        .enumerate()
        .map(|(t, v)| {
            let m = home(t / (block_len * outputs));
            let mut row = vec![0.0; nodes];
            row[m] = gammas[m] * v;
            row
        })
        .collect();
    let received = channel::transmit(&ch, &symbols, noise_rng, noiseless)?;

    let mut decoded = vec![vec![vec![0.0; outputs]; block_len]; users];
    for k in 0..users {
        let m = home(k);
        for i in 0..block_len {
            for b in 0..outputs {
                let t = (k * block_len + i) * outputs + b;
                decoded[k][i][b] = received[t][k] / (gammas[m] * ch.gain(t, k, m));
            }
        }
    }

    Ok(SchemeTranscript {
        scheme: SchemeTag::Tdma,
        segments: vec![LoadSegment {
            computed_functions: slots as u64,
            required_functions: slots as u64,
            slots: slots as u64,
            functions_per_user: (block_len * outputs) as u64,
        }],
        coded_inputs: Vec::new(),
        coded_results: values,
        gammas,
        transmit: vec![symbols],
        received: vec![received],
        decoded,
        condition_numbers: Vec::new(),
        channels: vec![ch],
    })
}
