use std::fmt;

/// Errors produced by the simulator library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A square matrix failed the singularity guard. For channels drawn
    /// from a continuous distribution this is a measure-zero event; the
    /// caller regenerates the draw or aborts.
    SingularMatrix { det: f64, threshold: f64 },
    /// A solve found fewer independent equations than unknowns.
    RankDeficient { rank: usize, unknowns: usize },
    /// Operand shapes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// A lattice enumeration would exceed the configured cap.
    SizeOverflow { requested: u128, cap: u64 },
    /// The input block length does not match what the scheme requires.
    BlockSizeMismatch { expected: usize, found: usize },
    /// The effective channel gain stayed below the guard after redraws.
    NearSingularEffectiveGain,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularMatrix { det, threshold } => {
                write!(f, "matrix is numerically singular (|det| = {:e} < {:e})", det.abs(), threshold)
            }
            Error::RankDeficient { rank, unknowns } => {
                write!(f, "rank-deficient system: rank {rank} < {unknowns} unknowns")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::SizeOverflow { requested, cap } => {
                write!(f, "lattice of size {requested} exceeds the cap of {cap}")
            }
            Error::BlockSizeMismatch { expected, found } => {
                write!(f, "input block must hold {expected} vectors per user, found {found}")
            }
            Error::NearSingularEffectiveGain => {
                write!(f, "effective channel gain below the singularity guard")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
