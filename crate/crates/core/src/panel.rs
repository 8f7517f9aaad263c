//! Observed panels and covariance-matrix paths.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::mcd::cov_to_corr;
use crate::scalar::Scalar;

/// `n x p` panel of mean-zero observations, one row per time point.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesPanel<S> {
    values: Matrix<S>,
    labels: Vec<String>,
}

impl<S: Scalar> TimeSeriesPanel<S> {
    /// Requires `p >= 1`, `n > p`, finite values and one unique label per column.
    pub fn new(values: Matrix<S>, labels: Vec<String>) -> Result<Self> {
        let (n, p) = (values.rows(), values.cols());
        if p == 0 {
            return Err(Error::InvalidPanel("panel has no columns".into()));
        }
        if n <= p {
            return Err(Error::InvalidPanel(format!(
                "need more time points than variables, got n = {n}, p = {p}"
            )));
        }
        if labels.len() != p {
            return Err(Error::InvalidPanel(format!("{} labels for {p} columns", labels.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidPanel(format!("duplicate label {l:?}")));
            }
        }
        if let Some(pos) = values.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPanel(format!(
                "non-finite value at t = {}, column {}",
                pos / p,
                pos % p
            )));
        }
        Ok(Self { values, labels })
    }

    /// Panel with default labels `y1..yp`.
    pub fn from_matrix(values: Matrix<S>) -> Result<Self> {
        let labels = (1..=values.cols()).map(|j| format!("y{j}")).collect();
        Self::new(values, labels)
    }

    pub fn from_columns(columns: &[Vec<S>], labels: Vec<String>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidPanel("columns differ in length".into()));
        }
        Self::new(Matrix::from_fn(n, columns.len(), |t, j| columns[j][t]), labels)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.values.cols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Matrix<S> {
        &self.values
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Observation vector `Y_t`.
    pub fn row(&self, t: usize) -> &[S] {
        self.values.row(t)
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.n()).map(|t| self.values[(t, j)]).collect()
    }

    /// Columns `0..j` as an `n x j` regressor matrix.
    pub fn predecessors(&self, j: usize) -> Matrix<S> {
        Matrix::from_fn(self.n(), j, |t, k| self.values[(t, k)])
    }

    /// Panel whose column `k` is column `perm[k]` of this one.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.p())?;
        let values = Matrix::from_fn(self.n(), self.p(), |t, k| self.values[(t, perm[k])]);
        let labels = perm.iter().map(|&j| self.labels[j].clone()).collect();
        Ok(Self { values, labels })
    }

    /// `(1/n) Σ_t Y_t Y_t'`.
    pub fn second_moment(&self) -> SymMatrix<S> {
        let n = S::of_usize(self.n());
        SymMatrix::from_lower_fn(self.p(), |i, j| {
            (0..self.n())
                .map(|t| self.values[(t, i)] * self.values[(t, j)])
                .sum::<S>()
                / n
        })
    }
}

/// Checks that `perm` is a permutation of `0..p`.
pub fn validate_permutation(perm: &[usize], p: usize) -> Result<()> {
    if perm.len() != p {
        return Err(Error::InvalidPermutation(format!(
            "length {} for {p} variables",
            perm.len()
        )));
    }
    let mut seen = vec![false; p];
    for &j in perm {
        if j >= p || seen[j] {
            return Err(Error::InvalidPermutation(format!("{perm:?}")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Inverse permutation: `inv[perm[k]] = k`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &j) in perm.iter().enumerate() {
        inv[j] = k;
    }
    inv
}

/// Sequence of `p x p` symmetric matrices indexed by time.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariancePath<S> {
    sigmas: Vec<SymMatrix<S>>,
}

impl<S: Scalar> CovariancePath<S> {
    pub fn new(sigmas: Vec<SymMatrix<S>>) -> Result<Self> {
        let p = sigmas
            .first()
            .map(SymMatrix::dim)
            .ok_or_else(|| Error::InvalidArgument("empty covariance path".into()))?;
        if let Some(t) = sigmas.iter().position(|s| s.dim() != p) {
            return Err(Error::DimensionMismatch(format!(
                "matrix at t = {t} is {0}x{0}, expected {p}x{p}",
                sigmas[t].dim()
            )));
        }
        Ok(Self { sigmas })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.sigmas.len()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.sigmas[0].dim()
    }

    pub fn at(&self, t: usize) -> &SymMatrix<S> {
        &self.sigmas[t]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SymMatrix<S>> {
        self.sigmas.iter()
    }

    pub fn as_slice(&self) -> &[SymMatrix<S>] {
        &self.sigmas
    }

    /// Path of entry `(i, j)` over time.
    pub fn entry_path(&self, i: usize, j: usize) -> Vec<S> {
        self.sigmas.iter().map(|s| s[(i, j)]).collect()
    }

    pub fn to_correlation(&self) -> Result<Self> {
        Ok(Self {
            sigmas: self.sigmas.iter().map(cov_to_corr).collect::<Result<_>>()?,
        })
    }

    /// First `t` whose matrix fails the Cholesky test, if any.
    pub fn first_non_pd(&self) -> Option<usize> {
        self.sigmas.iter().position(|s| !s.is_positive_definite())
    }

    pub fn all_positive_definite(&self) -> bool {
        self.first_non_pd().is_none()
    }

    /// Relabels variables: entry `(a, b)` of the result is entry
    /// `(perm[a], perm[b])` of this path.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        validate_permutation(perm, self.p())?;
        Ok(Self {
            sigmas: self.sigmas.iter().map(|s| s.permuted(perm)).collect(),
        })
    }

    /// Time average of the matrices.
    pub fn mean(&self) -> SymMatrix<S> {
        let n = S::of_usize(self.n());
        SymMatrix::from_lower_fn(self.p(), |i, j| {
            self.sigmas.iter().map(|s| s[(i, j)]).sum::<S>() / n
        })
    }
}
