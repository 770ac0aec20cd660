//! Reference schemes sharing one transcript shape with the coded scheme:
//! the CSI-aware zero-forcing-ready scheme, the two-user aligned scheme
//! over blocks of three inputs, the uncoded TDMA baseline, and the
//! partitioned wrapper for general user/node counts.

pub mod ain22;
pub mod partitioned;
pub mod tdma;
pub mod zf_ready;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::ucec::UcecTranscript;

/// Scheme selector; the string forms are the CLI tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    Ucec,
    ZfReady,
    Ain22,
    Tdma,
    PartitionedUcec,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 5] =
        [SchemeTag::Ucec, SchemeTag::ZfReady, SchemeTag::Ain22, SchemeTag::Tdma, SchemeTag::PartitionedUcec];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::Ucec => "ucec",
            SchemeTag::ZfReady => "zf-ready",
            SchemeTag::Ain22 => "ain22",
            SchemeTag::Tdma => "tdma",
            SchemeTag::PartitionedUcec => "partitioned-ucec",
        }
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeTag::ALL
            .iter()
            .copied()
            .find(|tag| tag.as_str() == s)
            .ok_or_else(|| format!("unknown scheme '{s}' (expected ucec | zf-ready | ain22 | tdma | partitioned-ucec)"))
    }
}

/// Integer counters behind the load definitions. Simple schemes fill one
/// segment; the partitioned wrapper fills one per partition so the
/// communication loads add across sequentially served partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoadSegment {
    /// Functions computed across all edge nodes in this segment.
    pub computed_functions: u64,
    /// Functions required in this segment (block length x users x outputs).
    pub required_functions: u64,
    /// Communication slots spent in this segment.
    pub slots: u64,
    /// Functions each served user requires (block length x outputs).
    pub functions_per_user: u64,
}

/// Uniform execution record; every scheme produces one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeTranscript {
    pub scheme: SchemeTag,
    pub segments: Vec<LoadSegment>,
    /// Computation-phase coded vectors in scheme-defined deterministic
    /// order; the universality checks compare these across channel seeds.
    pub coded_inputs: Vec<Vec<f64>>,
    /// Computation-phase function values, flattened in scheme-defined
    /// deterministic order.
    pub coded_results: Vec<f64>,
    /// Power factors, one per transmission block.
    pub gammas: Vec<f64>,
    /// transmit[block][slot][node].
    pub transmit: Vec<Vec<Vec<f64>>>,
    /// received[block][slot][user].
    pub received: Vec<Vec<Vec<f64>>>,
    /// decoded[user][input][function].
    pub decoded: Vec<Vec<Vec<f64>>>,
    /// Condition numbers of whatever linear systems the decoder solved.
    pub condition_numbers: Vec<f64>,
    /// Channel draw per transmission block, sufficient for replay.
    pub channels: Vec<ChannelRealization>,
}

impl From<UcecTranscript> for SchemeTranscript {
    fn from(t: UcecTranscript) -> Self {
        let coded_inputs = t.coded_inputs.into_iter().flatten().collect();
        let coded_results = t
            .coded_results
            .into_iter()
            .flat_map(|per_node| per_node.into_iter().flatten())
            .collect();
        let lattice = (0..t.users * t.users).fold(1u64, |acc, _| acc * (t.direction_param as u64));
        let segment = LoadSegment {
            computed_functions: t.computed_functions,
            required_functions: lattice * t.users as u64 * t.outputs as u64,
            slots: t.slots_used,
            functions_per_user: lattice * t.outputs as u64,
        };
        SchemeTranscript {
            scheme: SchemeTag::Ucec,
            segments: vec![segment],
            coded_inputs,
            coded_results,
            gammas: t.gammas,
            transmit: t.transmit,
            received: t.received,
            decoded: t.decoded,
            condition_numbers: t.condition_numbers,
            channels: t.channels,
        }
    }
}
