//! Sketching operators: dense dependent-entry projections, partial Toeplitz
//! matrices applied by FFT, CountSketch, and the V_θ reshaping operators.
//!
//! Toeplitz convention: for ξ of length 2p−1 (0-based), the p × p matrix is
//! A[r][c] = ξ[p−1+c−r], so row 0 is ξ[p−1..2p−1] and the first column runs
//! down from ξ[p−1] to ξ[0]. Row selectors are 0-based.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::linalg::{dot, Matrix};
use crate::processes::{sample_dependent_matrix_with, DependentMatrixConfig};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SketchOperator {
    /// `scale · matrix`.
    Dense { matrix: Matrix, scale: f64 },
    /// `scale · R A_ξ`, R keeping `rows`.
    PartialToeplitz { p: usize, xi: Vec<f64>, rows: Vec<usize>, scale: f64 },
    /// Column j has `signs[j][k] / √d` at row `indices[j][k]`.
    CountSketch { n: usize, p: usize, d: usize, indices: Vec<Vec<usize>>, signs: Vec<Vec<f64>> },
}

impl SketchOperator {
    /// Logical (rows, cols).
    pub fn dims(&self) -> (usize, usize) {
        match self {
            SketchOperator::Dense { matrix, .. } => matrix.shape(),
            SketchOperator::PartialToeplitz { p, rows, .. } => (rows.len(), *p),
            SketchOperator::CountSketch { n, p, .. } => (*n, *p),
        }
    }

    pub fn with_scale(self, s: f64) -> Self {
        match self {
            SketchOperator::Dense { matrix, .. } => SketchOperator::Dense { matrix, scale: s },
            SketchOperator::PartialToeplitz { p, xi, rows, .. } => SketchOperator::PartialToeplitz { p, xi, rows, scale: s },
            cs @ SketchOperator::CountSketch { .. } => cs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SketchOperator::Dense { scale, .. } => finite_scale(*scale),
            SketchOperator::PartialToeplitz { p, xi, rows, scale } => {
                finite_scale(*scale)?;
                check_toeplitz(*p, xi, rows)
            }
            SketchOperator::CountSketch { n, p, d, indices, signs } => {
                if *d == 0 || d > n {
                    return Err(invalid(format!("CountSketch needs 1 <= d <= n (d = {d}, n = {n})")));
                }
                if indices.len() != *p || signs.len() != *p {
                    return Err(Error::DimensionMismatch { expected: *p, found: indices.len() });
                }
                for (j, (idx, sg)) in indices.iter().zip(signs).enumerate() {
                    let mut seen = vec![false; *n];
                    if idx.len() != *d || sg.len() != *d {
                        return Err(invalid(format!("column {j} does not have exactly {d} entries")));
                    }
                    for &r in idx {
                        if r >= *n || core::mem::replace(&mut seen[r], true) {
                            return Err(invalid(format!("column {j} has a repeated or out-of-range row")));
                        }
                    }
                    if sg.iter().any(|&s| s != 1.0 && s != -1.0) {
                        return Err(invalid(format!("column {j} has a sign outside {{-1, +1}}")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let (_, p) = self.dims();
        if u.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: u.len() });
        }
        Ok(match self {
            SketchOperator::Dense { matrix, scale } => matrix.matvec(u)?.into_iter().map(|x| x * scale).collect(),
            SketchOperator::PartialToeplitz { p, xi, rows, scale } => {
                let full = toeplitz_apply_fft(*p, xi, u);
                rows.iter().map(|&r| full[r] * scale).collect()
            }
            SketchOperator::CountSketch { n, d, indices, signs, .. } => {
                let w = 1.0 / libm::sqrt(*d as f64);
                let mut y = vec![0.0; *n];
                for (j, &uj) in u.iter().enumerate() {
                    for (&r, &s) in indices[j].iter().zip(&signs[j]) {
                        y[r] += s * w * uj;
                    }
                }
                y
            }
        })
    }

    /// Materialises the operator, scale included.
    pub fn to_dense(&self) -> Matrix {
        match self {
            SketchOperator::Dense { matrix, scale } => matrix.scaled(*scale),
            SketchOperator::PartialToeplitz { p, xi, rows, scale } => {
                Matrix::from_fn(rows.len(), *p, |i, c| scale * xi[p - 1 + c - rows[i]])
            }
            SketchOperator::CountSketch { n, p, d, indices, signs } => {
                let w = 1.0 / libm::sqrt(*d as f64);
                let mut m = Matrix::zeros(*n, *p);
                for j in 0..*p {
                    for (&r, &s) in indices[j].iter().zip(&signs[j]) {
                        m[(r, j)] = s * w;
                    }
                }
                m
            }
        }
    }

    /// Non-zero count of column j (CountSketch only).
    pub fn column_nnz(&self, j: usize) -> Option<usize> {
        match self {
            SketchOperator::CountSketch { indices, .. } => indices.get(j).map(Vec::len),
            _ => None,
        }
    }
}

fn finite_scale(s: f64) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(invalid("operator scale must be finite"))
    }
}

fn check_toeplitz(p: usize, xi: &[f64], rows: &[usize]) -> Result<()> {
    if p == 0 {
        return Err(invalid("Toeplitz dimension must be positive"));
    }
    if xi.len() != 2 * p - 1 {
        return Err(Error::DimensionMismatch { expected: 2 * p - 1, found: xi.len() });
    }
    if rows.is_empty() || rows.len() > p {
        return Err(invalid(format!("selector must keep between 1 and {p} rows")));
    }
    if rows.windows(2).any(|w| w[0] >= w[1]) || rows.iter().any(|&r| r >= p) {
        return Err(invalid(format!("selector must be strictly increasing within 0..{p}")));
    }
    Ok(())
}

/// Full product A_ξ u via one circular convolution of length
/// `next_power_of_two(2p)`.
pub fn toeplitz_apply_fft(p: usize, xi: &[f64], u: &[f64]) -> Vec<f64> {
    // y_r = Σ_c ξ[p−1+c−r] u_c = (ξ ∗ rev(u))[2p−2−r]. Indices p−1..2p−2 of
    // the circular result are free of wrap-around since 3p−2 − L < p−1.
    let rev: Vec<f64> = u.iter().rev().copied().collect();
    let size = (2 * p).next_power_of_two();
    let conv = fft::circular_convolve_real(xi, &rev, size);
    (0..p).map(|r| conv[2 * p - 2 - r]).collect()
}

/// Dense Toeplitz product, for comparison.
pub fn toeplitz_apply_dense(p: usize, xi: &[f64], u: &[f64]) -> Vec<f64> {
    (0..p).map(|r| (0..p).map(|c| xi[p - 1 + c - r] * u[c]).sum()).collect()
}

/// Dense JL sketch (1/√n)·X̃ with X̃ from the dependent generator.
pub fn build_jl(n: usize, p: usize, generator: &DependentMatrixConfig, seed: u64) -> Result<SketchOperator> {
    build_jl_at(n, p, generator, seed, 0)
}

pub fn build_jl_at(n: usize, p: usize, generator: &DependentMatrixConfig, seed: u64, index: u64) -> Result<SketchOperator> {
    let cfg = generator.with_dims(n, p);
    let matrix = sample_dependent_matrix_with(&cfg, &mut rng::stream(seed, index))?;
    Ok(SketchOperator::Dense { matrix, scale: 1.0 / libm::sqrt(n as f64) })
}

/// Partial Toeplitz operator R A_ξ with scale 1/√n, n = `rows.len()`.
pub fn build_toeplitz(xi: Vec<f64>, rows: Vec<usize>) -> Result<SketchOperator> {
    if xi.is_empty() || xi.len().is_multiple_of(2) {
        return Err(invalid(format!("xi must have odd length 2p-1, got {}", xi.len())));
    }
    let p = xi.len().div_ceil(2);
    check_toeplitz(p, &xi, &rows)?;
    let scale = 1.0 / libm::sqrt(rows.len() as f64);
    Ok(SketchOperator::PartialToeplitz { p, xi, rows, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountSketchPattern {
    /// d rows uniformly without replacement, independently per column.
    Uniform,
    /// Rows drawn without replacement with weight 1/(1 + occupancy), where
    /// occupancy counts how often the row was used by earlier columns.
    Adaptive,
}

pub fn build_countsketch(n: usize, p: usize, d: usize, pattern: CountSketchPattern, seed: u64) -> Result<SketchOperator> {
    build_countsketch_with(n, p, d, pattern, &mut rng::stream(seed, 0))
}

pub fn build_countsketch_with<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    d: usize,
    pattern: CountSketchPattern,
    rng: &mut R,
) -> Result<SketchOperator> {
    if d == 0 || d > n {
        return Err(invalid(format!("CountSketch needs 1 <= d <= n (d = {d}, n = {n})")));
    }
    if p == 0 {
        return Err(invalid("CountSketch needs p >= 1"));
    }
    let mut occupancy = vec![0usize; n];
    let mut indices = Vec::with_capacity(p);
    let mut signs = Vec::with_capacity(p);
    for _ in 0..p {
        let rows: Vec<usize> = match pattern {
            CountSketchPattern::Uniform => index::sample(rng, n, d).into_vec(),
            CountSketchPattern::Adaptive => {
                let mut w: Vec<f64> = occupancy.iter().map(|&o| 1.0 / (1.0 + o as f64)).collect();
                let mut chosen = Vec::with_capacity(d);
                for _ in 0..d {
                    let total: f64 = w.iter().sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = w.iter().rposition(|&x| x > 0.0).expect("rows remain");
                    for (r, &wr) in w.iter().enumerate() {
                        if wr > 0.0 && u < wr {
                            pick = r;
                            break;
                        }
                        u -= wr;
                    }
                    w[pick] = 0.0;
                    chosen.push(pick);
                }
                chosen
            }
        };
        for &r in &rows {
            occupancy[r] += 1;
        }
        signs.push(rows.iter().map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect());
        indices.push(rows);
    }
    Ok(SketchOperator::CountSketch { n, p, d, indices, signs })
}

/// θ ↦ V_θ as an operator on stacked entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VThetaOperator {
    pub theta: Vec<f64>,
    pub n: usize,
    /// Band form: p rows over inputs of length 2p−1, row b holding θ at
    /// columns b..b+p. Band row b matches Toeplitz row p−1−b.
    pub banded: bool,
}

pub fn build_vtheta(theta: Vec<f64>, n: usize, banded: bool) -> Result<VThetaOperator> {
    if theta.is_empty() || n == 0 {
        return Err(invalid("V_theta needs a non-empty theta and n >= 1"));
    }
    Ok(VThetaOperator { theta, n, banded })
}

impl VThetaOperator {
    pub fn p(&self) -> usize {
        self.theta.len()
    }

    pub fn input_len(&self) -> usize {
        if self.banded {
            2 * self.p() - 1
        } else {
            self.n * self.p()
        }
    }

    pub fn output_len(&self) -> usize {
        if self.banded {
            self.p()
        } else {
            self.n
        }
    }

    fn scale(&self) -> f64 {
        1.0 / libm::sqrt(self.n as f64)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_len() {
            return Err(Error::DimensionMismatch { expected: self.input_len(), found: x.len() });
        }
        let p = self.p();
        let s = self.scale();
        Ok((0..self.output_len())
            .map(|i| {
                let start = if self.banded { i } else { i * p };
                s * dot(&self.theta, &x[start..start + p])
            })
            .collect())
    }

    pub fn to_dense(&self) -> Matrix {
        let p = self.p();
        let s = self.scale();
        let mut m = Matrix::zeros(self.output_len(), self.input_len());
        for i in 0..self.output_len() {
            let start = if self.banded { i } else { i * p };
            for (k, &t) in self.theta.iter().enumerate() {
                m[(i, start + k)] = s * t;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_reads_off_display() {
        let op = build_toeplitz(vec![1.0, 2.0, 3.0], vec![0, 1]).unwrap().with_scale(1.0);
        assert_eq!(op.to_dense(), Matrix::from_rows(&[vec![2.0, 3.0], vec![1.0, 2.0]]).unwrap());
        let y = op.apply(&[1.0, 0.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
        let first = build_toeplitz(vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0]).unwrap().with_scale(1.0);
        assert_eq!(first.to_dense().row(0), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn toeplitz_errors() {
        assert!(build_toeplitz(vec![1.0, 2.0], vec![0]).is_err());
        assert!(build_toeplitz(vec![1.0, 2.0, 3.0], vec![2]).is_err());
        assert!(build_toeplitz(vec![1.0, 2.0, 3.0], vec![1, 0]).is_err());
    }

    #[test]
    fn banded_vtheta_rows() {
        let v = build_vtheta(vec![2.0, 3.0], 4, true).unwrap();
        let d = v.to_dense();
        assert_eq!(d.row(0), &[1.0, 1.5, 0.0]);
        assert_eq!(d.row(1), &[0.0, 1.0, 1.5]);
    }

    #[test]
    fn countsketch_columns() {
        for pattern in [CountSketchPattern::Uniform, CountSketchPattern::Adaptive] {
            let op = build_countsketch(8, 20, 3, pattern, 5).unwrap();
            op.validate().unwrap();
            let dense = op.to_dense();
            for j in 0..20 {
                assert_eq!(op.column_nnz(j), Some(3));
                let norm: f64 = dense.column(j).iter().map(|x| x * x).sum();
                assert!((norm - 1.0).abs() < 1e-15);
            }
        }
        assert!(build_countsketch(4, 3, 5, CountSketchPattern::Uniform, 1).is_err());
    }
}
