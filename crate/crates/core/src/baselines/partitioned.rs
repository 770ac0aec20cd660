//! General user/node counts via partitioning: with enough nodes the coded
//! scheme runs directly on a node subset; otherwise users are split into
//! ceil(K/M) partitions served sequentially, so the per-partition
//! communication loads add while the computation load stays at the
//! per-partition formula.

use crate::baselines::{SchemeTag, SchemeTranscript};
use crate::error::{Error, Result};
use crate::model::{InputBlock, LinearFunctionFamily, SystemConfig};
use crate::seeds::Stream;
use crate::ucec;

/// Partition sizes: one partition when nodes cover all users, otherwise
/// full partitions of the node count plus a remainder partition served
/// with that many nodes.
pub fn partition_sizes(users: usize, nodes: usize) -> Vec<usize> {
    assert!(users >= 1 && nodes >= 1);
    if nodes >= users {
        return vec![users];
    }
    let mut sizes = vec![nodes; users / nodes];
    if !users.is_multiple_of(nodes) {
        sizes.push(users % nodes);
    }
    sizes
}

/// Block length each partition needs: `N^(s*s)` for partition size `s`.
pub fn partition_block_len(n: u32, size: usize) -> usize {
    (n as usize).pow((size * size) as u32)
}

/// Runs the coded scheme per partition and stitches the transcripts into
/// one record with a load segment per partition. `blocks[p]` holds the
/// inputs of partition `p`'s users, in global user order.
pub fn run(
    cfg: &SystemConfig,
    fam: &LinearFunctionFamily,
    blocks: &[InputBlock],
    channel_rng: &mut Stream,
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<SchemeTranscript> {
    let sizes = partition_sizes(cfg.users, cfg.nodes);
    if blocks.len() != sizes.len() {
        return Err(Error::DimensionMismatch { expected: sizes.len(), found: blocks.len() });
    }

    let mut segments = Vec::with_capacity(sizes.len());
    let mut coded_inputs = Vec::new();
    let mut coded_results = Vec::new();
    let mut gammas = Vec::new();
    let mut transmit = Vec::new();
    let mut received = Vec::new();
    let mut decoded = Vec::with_capacity(cfg.users);
    let mut condition_numbers = Vec::new();
    let mut channels = Vec::new();

    for (size, block) in sizes.iter().zip(blocks) {
        let sub_cfg = SystemConfig { users: *size, nodes: *size, ..cfg.clone() };
        let t = ucec::run(&sub_cfg, fam, block, channel_rng, noise_rng, noiseless)?;
        let part: SchemeTranscript = t.into();
        segments.push(part.segments[0]);
        coded_inputs.extend(part.coded_inputs);
        coded_results.extend(part.coded_results);
        gammas.extend(part.gammas);
        transmit.extend(part.transmit);
        received.extend(part.received);
        decoded.extend(part.decoded);
        condition_numbers.extend(part.condition_numbers);
        channels.extend(part.channels);
    }

    Ok(SchemeTranscript {
        scheme: SchemeTag::PartitionedUcec,
        segments,
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
