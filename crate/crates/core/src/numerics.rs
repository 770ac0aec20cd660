//! Small dense real-matrix utilities shared by every scheme: inversion,
//! least-squares solving, and conditioning diagnostics.
//!
//! Matrices here are tiny (channel matrices and decoding systems, at most a
//! few hundred rows), so everything is dense `f64` in row-major order. The
//! decompositions are delegated to `nalgebra`; the types and guards exposed
//! here are the contract the rest of the crate relies on.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative determinant threshold below which a square matrix is treated as
/// singular. Scaled by the product of row max-norms.
pub const SINGULARITY_GUARD: f64 = 1e-12;

/// Singular values below `RANK_TOLERANCE` times the largest singular value
/// do not count towards the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Smallest singular value considered nonzero by [`condition_number`];
/// anything below maps to an infinite condition number.
pub const CONDITION_FLOOR: f64 = 1e-300;

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    /// Builds a matrix from row-major entries. Panics if the entry count
    /// does not equal `rows * cols` or any entry is non-finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
        assert!(entries.iter().all(|e| e.is_finite()), "matrix entries must be finite");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        self.entries[row * self.cols + col] = value;
    }

    /// Row `row` as a slice of length `cols`.
    pub fn row(&self, row: usize) -> &[f64] {
        assert!(row < self.rows, "row out of bounds");
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn mul(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = RealMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length must equal cols");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, e| acc.max(e.abs()))
    }

    fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_na(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push(m[(i, j)]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }
}

/// Product of row max-norms; the scale against which the determinant guard
/// is measured.
fn row_norm_scale(m: &RealMatrix) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().fold(0.0_f64, |acc, e| acc.max(e.abs())))
        .product()
}

/// Inverts a square matrix.
///
/// Fails with [`Error::SingularMatrix`] when `|det|` falls below
/// [`SINGULARITY_GUARD`] times the product of row max-norms, which for
/// continuously drawn channels signals a measure-zero draw: the caller
/// regenerates or aborts.
pub fn invert(m: &RealMatrix) -> Result<RealMatrix> {
    assert!(m.is_square(), "invert requires a square matrix");
    let na = m.to_na();
    let det = na.determinant();
    let threshold = SINGULARITY_GUARD * row_norm_scale(m);
    if det.abs() < threshold || threshold == 0.0 {
        return Err(Error::SingularMatrix { det, threshold });
    }
    let inv = na.try_inverse().ok_or(Error::SingularMatrix { det, threshold })?;
    Ok(RealMatrix::from_na(&inv))
}

/// Solves `a * x = y` in the least-squares sense via SVD.
///
/// Requires `a.rows >= a.cols`; fails with [`Error::RankDeficient`] when the
/// numerical rank (singular values above [`RANK_TOLERANCE`] relative to the
/// largest) is below the number of unknowns.
pub fn solve_least_squares(a: &RealMatrix, y: &[f64]) -> Result<Vec<f64>> {
    assert!(a.rows() >= a.cols(), "least squares requires rows >= cols");
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: y.len() });
    }
    let svd = a.to_na().svd(true, true);
    let sv_max = svd.singular_values.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let cutoff = RANK_TOLERANCE * sv_max;
    let rank = svd.singular_values.iter().filter(|s| **s > cutoff).count();
    if rank < a.cols() {
        return Err(Error::RankDeficient { rank, unknowns: a.cols() });
    }
    let rhs = DVector::from_column_slice(y);
    let x = svd
        .solve(&rhs, cutoff)
        .map_err(|_| Error::RankDeficient { rank, unknowns: a.cols() })?;
    Ok(x.iter().copied().collect())
}

/// Scales every row to unit max magnitude, returning the applied scales.
/// Callers divide their right-hand sides by the same scales. Solutions of
/// consistent or square systems are unchanged; the point is to keep
/// per-equation gain imbalance out of the rank test and the conditioning.
/// All-zero rows keep scale 1.
pub fn equilibrate_rows(m: &mut RealMatrix) -> Vec<f64> {
    let mut scales = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let s = m.row(r).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let s = if s == 0.0 { 1.0 } else { s };
        for c in 0..m.cols() {
            let v = m.get(r, c);
            m.set(r, c, v / s);
        }
        scales.push(s);
    }
    scales
}

/// Ratio of the largest to the smallest singular value; `f64::INFINITY`
/// when the smallest falls below [`CONDITION_FLOOR`].
pub fn condition_number(a: &RealMatrix) -> f64 {
    assert!(a.rows() > 0 && a.cols() > 0, "condition number of an empty matrix");
    let svd = a.to_na().svd(false, false);
    let sv_max = svd.singular_values.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let sv_min = svd.singular_values.iter().fold(f64::INFINITY, |acc, s| acc.min(*s));
    if sv_min < CONDITION_FLOOR {
        f64::INFINITY
    } else {
        sv_max / sv_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
        let entries = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        RealMatrix::new(n, n, entries)
    }

    fn residual_from_identity(product: &RealMatrix) -> f64 {
        let n = product.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((product.get(i, j) - target).abs());
            }
        }
        worst
    }

    #[test]
    fn invert_identity() {
        let id = RealMatrix::identity(2);
        assert_eq!(invert(&id).unwrap(), id);
    }

    #[test]
    fn invert_diagonal() {
        let m = RealMatrix::new(2, 2, vec![2.0, 0.0, 0.0, 4.0]);
        let inv = invert(&m).unwrap();
        assert_eq!(inv, RealMatrix::new(2, 2, vec![0.5, 0.0, 0.0, 0.25]));
    }

    #[test]
    fn invert_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(3, &mut rng);
        let inv = invert(&m).unwrap();
        let tol = 1e-9 * m.max_norm().max(1.0);
        assert!(residual_from_identity(&m.mul(&inv)) <= tol);
    }

    #[test]
    fn invert_rejects_singular() {
        let m = RealMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(invert(&m), Err(Error::SingularMatrix { .. })));
        let zero_row = RealMatrix::new(2, 2, vec![0.0, 0.0, 1.0, 2.0]);
        assert!(matches!(invert(&zero_row), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn invert_multiply_back_sweep() {
        // 1000 seeded well-conditioned draws across small sizes.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0usize;
        while checked < 1000 {
            let n = 1 + (rng.random::<u32>() % 6) as usize;
            let m = random_matrix(n, &mut rng);
            if condition_number(&m) > 1e6 {
                continue;
            }
            let inv = invert(&m).expect("well-conditioned draw");
            let tol = 1e-9 * m.max_norm().max(1.0);
            assert!(residual_from_identity(&m.mul(&inv)) <= tol);
            checked += 1;
        }
    }

    #[test]
    fn least_squares_identity() {
        let a = RealMatrix::identity(2);
        let x = solve_least_squares(&a, &[3.0, -1.0]).unwrap();
        assert_eq!(x, vec![3.0, -1.0]);
    }

    #[test]
    fn least_squares_overdetermined_mean() {
        let a = RealMatrix::new(2, 1, vec![1.0, 1.0]);
        let x = solve_least_squares(&a, &[1.0, 3.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_rejects_rank_deficient() {
        let a = RealMatrix::new(3, 2, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            solve_least_squares(&a, &[1.0, 2.0, 3.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn least_squares_matches_inverse_on_square_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut checked = 0usize;
        while checked < 200 {
            let n = 1 + (rng.random::<u32>() % 5) as usize;
            let m = random_matrix(n, &mut rng);
            if condition_number(&m) > 1e6 {
                continue;
            }
            let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let by_inverse = invert(&m).unwrap().mul_vec(&y);
            let by_ls = solve_least_squares(&m, &y).unwrap();
            let scale = by_inverse.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
            for (a, b) in by_ls.iter().zip(&by_inverse) {
                assert!((a - b).abs() <= 1e-9 * scale);
            }
            checked += 1;
        }
    }

    #[test]
    fn equilibration_preserves_square_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let m = random_matrix(3, &mut rng);
            if condition_number(&m) > 1e6 {
                continue;
            }
            let y: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let plain = solve_least_squares(&m, &y).unwrap();
            let mut scaled = m.clone();
            let scales = equilibrate_rows(&mut scaled);
            let scaled_y: Vec<f64> = y.iter().zip(&scales).map(|(v, s)| v / s).collect();
            let solved = solve_least_squares(&scaled, &scaled_y).unwrap();
            for (a, b) in plain.iter().zip(&solved) {
                let scale = a.abs().max(b.abs()).max(1.0);
                assert!((a - b).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn equilibration_tames_row_imbalance() {
        // One enormous equation must not swamp the rank test.
        let mut m = RealMatrix::new(3, 2, vec![1e12, 2e12, 1.0, -1.0, 0.5, 2.0]);
        assert!(condition_number(&m) > 1e10);
        let scales = equilibrate_rows(&mut m);
        assert_eq!(scales[0], 2e12);
        assert!(condition_number(&m) < 1e2);
        assert!(solve_least_squares(&m, &[1.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn condition_number_identity_is_one() {
        assert!((condition_number(&RealMatrix::identity(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_number_diagonal() {
        let m = RealMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1e-6]);
        let c = condition_number(&m);
        assert!((c - 1e6).abs() / 1e6 < 1e-9);
    }

    #[test]
    fn condition_number_infinite_for_exactly_singular() {
        let m = RealMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(condition_number(&m).is_infinite());
    }
}
