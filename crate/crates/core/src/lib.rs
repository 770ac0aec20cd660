//! Deterministic simulator for coded mobile-edge computation.
//!
//! Edge nodes compute linear output functions of user inputs and deliver
//! them over a simulated time-varying wireless channel. The crate provides
//! the universal coded scheme (CSI-free computation phase, monomial-weighted
//! communication phase, least-squares decoding), three reference schemes,
//! and the load/distortion/DoF metrics used to compare them. Every run is
//! reproducible from a single master seed.

pub mod baselines;
pub mod channel;
pub mod directions;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod seeds;
pub mod ucec;

pub use baselines::{SchemeTag, SchemeTranscript};
pub use channel::{ChannelRealization, CsiView};
pub use directions::DirectionIndex;
pub use error::{Error, Result};
pub use metrics::{DistortionReport, LoadPair, TrialRun, TrialRunner};
pub use model::{Dataset, GroundTruth, InputBlock, LinearFunctionFamily, SystemConfig};
pub use numerics::RealMatrix;
pub use seeds::{SeedSchedule, TrialSeeds};
pub use ucec::UcecTranscript;
