//! Small dense matrices and observation samples.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real vector of dimension `d ≥ 1`.
pub type Vector = DVector<f64>;

/// A dense `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Domain(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Domain(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self(DMatrix::identity(dim, dim) * s)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Inverse via LU with partial pivoting.
    pub fn invert(&self) -> Result<Self> {
        let scale = self.0.amax();
        let lu = self.0.clone().lu();
        // relative pivot check: nalgebra only refuses exact zeros
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if !(scale > 0.0) || min_pivot <= scale * 1e-13 * self.dim() as f64 {
            return Err(Error::Factorization(format!(
                "matrix is singular to working precision (min pivot {min_pivot:e})"
            )));
        }
        lu.try_inverse()
            .map(Self)
            .ok_or_else(|| Error::Factorization("matrix is singular".into()))
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
    pub fn cholesky(&self) -> Result<Self> {
        if !self.is_symmetric(1e-12) {
            return Err(Error::Factorization("matrix is not symmetric".into()));
        }
        self.0
            .clone()
            .cholesky()
            .map(|c| Self(c.l()))
            .ok_or_else(|| Error::Factorization("matrix is not positive definite".into()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let d = self.dim();
        let scale = self.0.amax().max(1.0);
        (0..d).all(|i| (0..i).all(|j| (self.0[(i, j)] - self.0[(j, i)]).abs() <= tol * scale))
    }

    /// Quadratic form `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.0[(i, j)] * v[j];
            }
            s += v[i] * row;
        }
        s
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }
}

/// `n` observations in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
}

impl Sample {
    /// Wraps row-major data; every entry must be finite.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("sample dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Domain(format!(
                "{} values do not form rows of length {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::InsufficientData("no rows".into()))?;
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, data)
    }

    /// A one-dimensional sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_row_major(1, values.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Sample) -> Result<Sample> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Sample { dim: self.dim, data })
    }

    /// Applies `x ↦ A x + b` to every row.
    pub fn affine_map(&self, a: &SquareMatrix, b: &[f64]) -> Result<Sample> {
        if a.dim() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        let mut data = Vec::with_capacity(self.data.len());
        for r in self.rows() {
            let ar = a.mul_vec(r);
            data.extend(ar.iter().zip(b).map(|(x, s)| x + s));
        }
        Ok(Sample { dim: self.dim, data })
    }

    /// Projections `uᵀ X_i` of every row onto `u`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.rows().map(|r| dot(r, u)).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sample mean and unbiased (`n − 1` divisor) covariance.
pub fn sample_mean_cov(sample: &Sample) -> Result<(Vector, SquareMatrix)> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "mean and covariance need at least 2 rows, got {n}"
        )));
    }
    let d = sample.dim();
    let mut mean = vec![0.0; d];
    for r in sample.rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for r in sample.rows() {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((DVector::from_vec(mean), SquareMatrix(cov)))
}
