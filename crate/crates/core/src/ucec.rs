//! Universal coded edge computing: a computation phase that needs no
//! channel knowledge, and a communication phase that weights the coded
//! results by inverse-channel monomials so that every cross-user term
//! cancels over the air.
//!
//! The computation phase labels each user's block of `N^(K*K)` inputs by
//! the inner direction lattice. For every outer-lattice direction, node `m`
//! sums the inputs whose label is the direction shifted down in the (k, m)
//! coordinate, then evaluates all `B` output functions on the sum. The
//! phase is a pure function of the inputs; its signature takes no channel
//! object, which is the universality guarantee.
//!
//! The communication phase spends `(N+1)^(K*K)` slots per output function.
//! In each slot every node sends the monomial-weighted combination of its
//! coded results, scaled by a power factor chosen so the busiest node meets
//! the average power budget exactly. What survives at user `k` is the
//! monomial-weighted combination of that user's own function values, from
//! which a least-squares solve recovers them individually.

use serde::Serialize;

use crate::channel::{self, ChannelRealization, CsiView};
use crate::directions::{self, decrement, DirectionIndex, Shift};
use crate::error::{Error, Result};
use crate::model::{InputBlock, LinearFunctionFamily, SystemConfig};
use crate::numerics::{self, RealMatrix};
use crate::seeds::Stream;

/// Everything the edge nodes hold after the computation phase.
#[derive(Debug, Clone, PartialEq)]
pub struct UcecComputation {
    users: usize,
    n: u32,
    inner: Vec<DirectionIndex>,
    outer: Vec<DirectionIndex>,
    /// coded_inputs[m][p] is node m's coded vector for outer direction p.
    pub coded_inputs: Vec<Vec<Vec<f64>>>,
    /// coded_results[m][b][p] is function b evaluated on coded_inputs[m][p].
    pub coded_results: Vec<Vec<Vec<f64>>>,
}

impl UcecComputation {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn direction_param(&self) -> u32 {
        self.n
    }

    /// Inner lattice: labels of the original inputs, in flat-index order.
    pub fn inner_lattice(&self) -> &[DirectionIndex] {
        &self.inner
    }

    /// Outer lattice: one coded input per element, in flat-index order.
    pub fn outer_lattice(&self) -> &[DirectionIndex] {
        &self.outer
    }
}

/// Transmit and receive record for one output function's slot block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTransmission {
    /// symbols[t][m]: what node m sent in slot t.
    pub symbols: Vec<Vec<f64>>,
    /// received[t][k]: what user k heard in slot t.
    pub received: Vec<Vec<f64>>,
    /// Power factor applied to every symbol of the block.
    pub gamma: f64,
}

/// Per-user estimates for one output function plus the solve diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// estimates[k][i]: user k's estimate of function value for input i
    /// (flat inner-lattice order).
    pub estimates: Vec<Vec<f64>>,
    pub condition: f64,
}

/// Full record of one scheme execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UcecTranscript {
    pub users: usize,
    pub direction_param: u32,
    pub outputs: usize,
    pub coded_inputs: Vec<Vec<Vec<f64>>>,
    pub coded_results: Vec<Vec<Vec<f64>>>,
    /// One power factor per output function.
    pub gammas: Vec<f64>,
    /// transmit[b][t][m].
    pub transmit: Vec<Vec<Vec<f64>>>,
    /// received[b][t][k].
    pub received: Vec<Vec<Vec<f64>>>,
    /// decoded[k][i][b], with i in flat inner-lattice order.
    pub decoded: Vec<Vec<Vec<f64>>>,
    /// Least-squares condition number per output function.
    pub condition_numbers: Vec<f64>,
    /// Channel draw used for each output function's block.
    pub channels: Vec<ChannelRealization>,
    pub computed_functions: u64,
    pub slots_used: u64,
}

/// Runs the CSI-free computation phase. The block must hold exactly
/// `N^(K*K)` inputs per user, labelled by the inner lattice in flat order.
pub fn compute_phase(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
) -> Result<UcecComputation> {
    if cfg.users != cfg.nodes {
        return Err(Error::DimensionMismatch { expected: cfg.users, found: cfg.nodes });
    }
    let users = cfg.users;
    let n = cfg.direction_param;
    let inner = directions::enumerate_lattice(users, n)?;
    let outer = directions::enumerate_lattice(users, n + 1)?;
    if block.block_len() != inner.len() {
        return Err(Error::BlockSizeMismatch { expected: inner.len(), found: block.block_len() });
    }
    assert_eq!(block.users(), users, "block user count must match the config");
    assert_eq!(block.dim(), fam.input_dim(), "block dimension must match the dataset");

    let dim = block.dim();
    let mut coded_inputs = Vec::with_capacity(users);
    let mut coded_results = Vec::with_capacity(users);
    for node in 0..users {
        let mut node_inputs = Vec::with_capacity(outer.len());
        for p in &outer {
            let mut combined = vec![0.0; dim];
            for user in 0..users {
                if let Shift::Within(q) = decrement(p, user, node) {
                    let source = block.vector(user, q.flat_index());
                    for (acc, v) in combined.iter_mut().zip(source) {
                        *acc += v;
                    }
                }
            }
            node_inputs.push(combined);
        }
        let node_results = (0..fam.outputs())
            .map(|b| {
                node_inputs
                    .iter()
                    .map(|v| fam.evaluate(b, v).expect("dims checked"))
                    .collect()
            })
            .collect();
        coded_inputs.push(node_inputs);
        coded_results.push(node_results);
    }
    Ok(UcecComputation { users, n, inner, outer, coded_inputs, coded_results })
}

/// Power factor meeting the per-node average power budget exactly at the
/// busiest node; 1.0 when every symbol is zero.
fn power_factor(unnormalized: &[Vec<f64>], nodes: usize, power: f64) -> f64 {
    let slots = unnormalized.len() as f64;
    let worst = (0..nodes)
        .map(|m| unnormalized.iter().map(|row| row[m] * row[m]).sum::<f64>() / slots)
        .fold(0.0_f64, f64::max);
    if worst == 0.0 {
        1.0
    } else {
        (power / worst).sqrt()
    }
}

/// Runs the communication phase for one output function over the block's
/// `(N+1)^(K*K)` slots.
pub fn communicate_phase(
    comp: &UcecComputation,
    ch: &ChannelRealization,
    csi: &CsiView,
    b: usize,
    power: f64,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<BlockTransmission> {
    let d = comp.outer.len();
    if ch.len() != d || csi.slots() != d {
        return Err(Error::DimensionMismatch { expected: d, found: ch.len() });
    }
    // One weight row at a time; the full slots-by-lattice table would not
    // fit in memory at the larger configurations the cap still allows.
    let mut weights = vec![0.0; comp.outer.len()];
    let unnormalized: Vec<Vec<f64>> = (0..d)
        .map(|t| {
            for (w, p) in weights.iter_mut().zip(&comp.outer) {
                *w = csi.monomial(t, p);
            }
            (0..comp.users)
                .map(|m| {
                    let results = &comp.coded_results[m][b];
                    weights.iter().zip(results).map(|(w, s)| w * s).sum()
                })
                .collect()
        })
        .collect();
    let gamma = power_factor(&unnormalized, comp.users, power);
    let symbols: Vec<Vec<f64>> = unnormalized
        .iter()
        .map(|row| row.iter().map(|u| gamma * u).collect())
        .collect();
    let received = channel::transmit(ch, &symbols, noise_rng, noiseless)?;
    Ok(BlockTransmission { symbols, received, gamma })
}

/// Recovers every user's function values for one output function from the
/// block's received symbols by least squares on the monomial system.
///
/// Equations are equilibrated to unit max coefficient before the solve:
/// slots whose inverse gains blow up would otherwise dominate the singular
/// spectrum and trip the rank guard on a perfectly solvable system. The
/// reported condition number is that of the system actually solved.
pub fn decode(
    received: &[Vec<f64>],
    csi: &CsiView,
    gamma: f64,
    inner: &[DirectionIndex],
) -> Result<DecodeOutcome> {
    let d = received.len();
    let unknowns = inner.len();
    let users = received.first().map_or(0, |row| row.len());
    let mut design = RealMatrix::zeros(d, unknowns);
    for t in 0..d {
        for (j, p) in inner.iter().enumerate() {
            design.set(t, j, gamma * csi.monomial(t, p));
        }
    }
    let scales = numerics::equilibrate_rows(&mut design);
    let condition = numerics::condition_number(&design);
    let mut estimates = Vec::with_capacity(users);
    for k in 0..users {
        let rhs: Vec<f64> =
            received.iter().zip(&scales).map(|(row, s)| row[k] / s).collect();
        estimates.push(numerics::solve_least_squares(&design, &rhs)?);
    }
    Ok(DecodeOutcome { estimates, condition })
}

/// Executes the whole scheme: one computation phase, then a communication
/// phase and decode per output function, each on fresh channel slots.
pub fn run(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<UcecTranscript> {
    let comp = compute_phase(cfg, fam, block)?;
    let d = comp.outer.len();
    let channels: Vec<ChannelRealization> = (0..fam.outputs())
        .map(|_| ChannelRealization::draw(cfg.users, cfg.nodes, d, channel_rng))
        .collect();
    run_with_channels(cfg, fam, block, &channels, noise_rng, noiseless)
}

/// Same as [`run`] but over externally supplied channel realizations (one
/// per output function), enabling bit-exact replay of a dumped trial.
pub fn run_with_channels(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    block: &InputBlock,
    channels: &[ChannelRealization],
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<UcecTranscript> {
    let comp = compute_phase(cfg, fam, block)?;
    let d = comp.outer.len();
    let outputs = fam.outputs();
    if channels.len() != outputs {
        return Err(Error::DimensionMismatch { expected: outputs, found: channels.len() });
    }

    let mut gammas = Vec::with_capacity(outputs);
    let mut transmit = Vec::with_capacity(outputs);
    let mut received = Vec::with_capacity(outputs);
    let mut condition_numbers = Vec::with_capacity(outputs);
    let mut decoded =
        vec![vec![vec![0.0; outputs]; comp.inner.len()]; cfg.users];
    for b in 0..outputs {
        let ch = &channels[b];
        let csi = CsiView::from_channel(ch)?;
        let tx = communicate_phase(&comp, ch, &csi, b, cfg.power, noise_rng, noiseless)?;
        let outcome = decode(&tx.received, &csi, tx.gamma, &comp.inner)?;
        for k in 0..cfg.users {
            for i in 0..comp.inner.len() {
                decoded[k][i][b] = outcome.estimates[k][i];
            }
        }
        gammas.push(tx.gamma);
        transmit.push(tx.symbols);
        received.push(tx.received);
        condition_numbers.push(outcome.condition);
    }

    Ok(UcecTranscript {
        users: cfg.users,
        direction_param: cfg.direction_param,
        outputs,
        coded_inputs: comp.coded_inputs,
        coded_results: comp.coded_results,
        gammas,
        transmit,
        received,
        decoded,
        condition_numbers,
        channels: channels.to_vec(),
        computed_functions: (cfg.users * d * outputs) as u64,
        slots_used: (outputs * d) as u64,
    })
}
