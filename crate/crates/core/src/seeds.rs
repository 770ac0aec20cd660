//! Deterministic seed schedule: one master seed splits into named
//! sub-streams so trials are independent yet replayable.
//!
//! Derivation: `derive(seed, lane) = splitmix64(seed ^ splitmix64(lane ^ C))`
//! with the splitmix64 golden-ratio constant `C`. The master seed derives
//! one dataset lane plus a per-trial lane; each trial lane derives
//! `{input, channel, noise}` sub-seeds. Streams are ChaCha8, so the
//! schedule is stable across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// RNG stream used throughout the crate.
pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const DATASET_LANE: u64 = u64::MAX;
const INPUT_LANE: u64 = 1;
const CHANNEL_LANE: u64 = 2;
const NOISE_LANE: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed for a named lane.
pub fn derive(seed: u64, lane: u64) -> u64 {
    splitmix64(seed ^ splitmix64(lane ^ GOLDEN))
}

/// Opens the ChaCha stream for a seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeds for the three independent randomness sources of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub input: u64,
    pub channel: u64,
    pub noise: u64,
}

/// Splits a master seed into the dataset lane and per-trial lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSchedule {
    master: u64,
}

impl SeedSchedule {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Seed of the dataset stream, shared by every trial of an experiment.
    pub fn dataset_seed(&self) -> u64 {
        derive(self.master, DATASET_LANE)
    }

    pub fn trial(&self, index: u64) -> TrialSeeds {
        let base = derive(self.master, index);
        TrialSeeds {
            input: derive(base, INPUT_LANE),
            channel: derive(base, CHANNEL_LANE),
            noise: derive(base, NOISE_LANE),
        }
    }
}
