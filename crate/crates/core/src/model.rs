//! System configuration, datasets, input blocks, and the linear
//! output-function family.
//!
//! The dataset matrix and all input vectors are drawn standard normal, which
//! keeps output variances at known scales for distortion normalization.
//! Ground truth is evaluated directly from the inputs and is consumed only
//! by the metrics layer; no scheme ever sees it.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::seeds::Stream;

/// Full parameterization of one experiment instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of mobile users K.
    pub users: usize,
    /// Number of edge nodes M.
    pub nodes: usize,
    /// Number of output functions B.
    pub outputs: usize,
    /// Input vector dimension Q.
    pub input_dim: usize,
    /// Direction lattice parameter N (used by the coded scheme).
    pub direction_param: u32,
    /// Per-node average transmit power budget.
    pub power: f64,
    /// Receiver noise variance; the model fixes this at 1.
    pub noise_variance: f64,
    /// Master seed for the experiment's seed schedule.
    pub seed: u64,
}

impl SystemConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.users < 1 || self.nodes < 1 || self.outputs < 1 || self.input_dim < 1 {
            return Err("users, nodes, outputs, and input_dim must all be at least 1".into());
        }
        if self.direction_param < 1 {
            return Err("direction parameter N must be at least 1".into());
        }
        if self.power.is_nan() || self.power <= 0.0 {
            return Err("power must be positive".into());
        }
        if self.noise_variance.is_nan() || self.noise_variance < 0.0 {
            return Err("noise variance must be nonnegative".into());
        }
        Ok(())
    }
}

/// The dataset stored at every edge node: a B x Q matrix whose rows realize
/// the linear output functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub matrix_a: RealMatrix,
}

impl Dataset {
    pub fn generate(cfg: &SystemConfig, rng: &mut Stream) -> Self {
        let entries = (0..cfg.outputs * cfg.input_dim)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Self { matrix_a: RealMatrix::new(cfg.outputs, cfg.input_dim, entries) }
    }
}

/// A block of F input vectors per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBlock {
    /// vectors[k][i] is the i-th input of user k, a Q-vector.
    vectors: Vec<Vec<Vec<f64>>>,
}

impl InputBlock {
    pub fn new(vectors: Vec<Vec<Vec<f64>>>) -> Self {
        assert!(!vectors.is_empty(), "block needs at least one user");
        let f = vectors[0].len();
        assert!(f >= 1, "block length must be at least 1");
        let q = vectors[0][0].len();
        for user in &vectors {
            assert_eq!(user.len(), f, "every user holds the same number of vectors");
            for v in user {
                assert_eq!(v.len(), q, "every vector has the same dimension");
                debug_assert!(v.iter().all(|e| e.is_finite()));
            }
        }
        Self { vectors }
    }

    pub fn users(&self) -> usize {
        self.vectors.len()
    }

    pub fn block_len(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0][0].len()
    }

    pub fn vector(&self, user: usize, index: usize) -> &[f64] {
        &self.vectors[user][index]
    }

    /// Replaces every vector of one user with zeros. Used by the
    /// interference tests.
    pub fn zero_user(&mut self, user: usize) {
        for v in &mut self.vectors[user] {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
    }
}

/// Draws a block of F i.i.d. standard-normal input vectors per user.
pub fn generate_inputs(cfg: &SystemConfig, block_len: usize, rng: &mut Stream) -> InputBlock {
    assert!(block_len >= 1, "block length must be at least 1");
    let vectors = (0..cfg.users)
        .map(|_| {
            (0..block_len)
                .map(|_| (0..cfg.input_dim).map(|_| rng.sample(StandardNormal)).collect())
                .collect()
        })
        .collect();
    InputBlock::new(vectors)
}

/// The family of B linear output functions; function b maps a vector to its
/// inner product with row b of the dataset matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctionFamily {
    matrix: RealMatrix,
}

impl LinearFunctionFamily {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        Self { matrix: dataset.matrix_a.clone() }
    }

    pub fn outputs(&self) -> usize {
        self.matrix.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// Evaluates function `b` (zero-based) on a vector.
    pub fn evaluate(&self, b: usize, v: &[f64]) -> Result<f64> {
        assert!(b < self.outputs(), "function index out of range");
        if v.len() != self.matrix.cols() {
            return Err(Error::DimensionMismatch { expected: self.matrix.cols(), found: v.len() });
        }
        Ok(self.matrix.row(b).iter().zip(v).map(|(a, x)| a * x).sum())
    }
}

/// Exact output values for a whole block: `values[k][i][b]`. This is the
/// oracle the metrics compare against; decoders never see it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub values: Vec<Vec<Vec<f64>>>,
}

impl GroundTruth {
    pub fn value(&self, user: usize, index: usize, b: usize) -> f64 {
        self.values[user][index][b]
    }

    /// Mean square over all entries; the natural scale for distortion
    /// tolerances.
    pub fn signal_power(&self) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for user in &self.values {
            for vec in user {
                for v in vec {
                    sum += v * v;
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

pub fn ground_truth(fam: &LinearFunctionFamily, block: &InputBlock) -> GroundTruth {
    assert_eq!(fam.input_dim(), block.dim(), "dataset and block dimensions must agree");
    let values = (0..block.users())
        .map(|k| {
            (0..block.block_len())
                .map(|i| {
                    (0..fam.outputs())
                        .map(|b| fam.evaluate(b, block.vector(k, i)).expect("dims checked"))
                        .collect()
                })
                .collect()
        })
        .collect();
    GroundTruth { values }
}
