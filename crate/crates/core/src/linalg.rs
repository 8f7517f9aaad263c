//! Small dense matrices.
//!
//! Every matrix in the estimators is at most a few dozen rows, so storage is
//! a plain row-major `Vec` and the factorizations are textbook loops.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot threshold for the positive-definiteness test.
pub const PD_RELATIVE_TOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diag(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<S> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> S {
        self.diag().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[S]) -> Result<Vec<S>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, c: S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> S {
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_abs_off_diag(&self) -> S {
        let mut m = S::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self[(i, j)].abs());
                }
            }
        }
        m
    }

    /// `(A + A') / 2`, exactly symmetric.
    pub fn symmetrized(&self) -> Result<SymMatrix<S>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("symmetrizing a non-square matrix".into()));
        }
        let half = S::of(0.5);
        let m = Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * half);
        Ok(SymMatrix(m))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverting a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (piv, piv_abs) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, S::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs == S::zero() || !piv_abs.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: col,
                    pivot: piv_abs.as_f64(),
                });
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == S::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= f * ac;
                    inv[(r, j)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<S: fmt::Debug> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// Square matrix whose entries satisfy `a[i][j] == a[j][i]` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<S>(Matrix<S>);

impl<S: Scalar> SymMatrix<S> {
    /// Wraps `m`, rejecting it unless it is square and exactly symmetric.
    pub fn new(m: Matrix<S>) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn from_diag(diag: &[S]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    pub fn scaled_identity(dim: usize, c: S) -> Self {
        Self(Matrix::identity(dim).scale(c))
    }

    /// Builds a symmetric matrix from the lower triangle produced by `f(i, j)`, `j <= i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &Matrix<S> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.0
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&rhs.0)?))
    }

    pub fn scale(&self, c: S) -> Self {
        Self(self.0.scale(c))
    }

    /// Adds `c` to every diagonal entry.
    pub fn add_diag(&self, c: S) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.rows() {
            m[(i, i)] += c;
        }
        Self(m)
    }

    pub fn trace(&self) -> S {
        self.0.trace()
    }

    pub fn max_diag(&self) -> S {
        self.0.diag().into_iter().fold(S::zero(), S::max)
    }

    /// Lower Cholesky factor, failing when a pivot drops below
    /// `PD_RELATIVE_TOL` times the largest diagonal entry.
    pub fn cholesky(&self) -> Result<Cholesky<S>> {
        let n = self.dim();
        let tol = S::of(PD_RELATIVE_TOL) * self.max_diag();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > tol) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Inverse of a positive definite matrix, exactly symmetric.
    pub fn inverse_spd(&self) -> Result<Self> {
        self.cholesky()?.inverse()
    }

    /// Leading principal minors `det(A[..k, ..k])` for `k = 1..=dim`.
    pub fn leading_minors(&self) -> Vec<S> {
        (1..=self.dim())
            .map(|k| {
                let sub = Matrix::from_fn(k, k, |i, j| self[(i, j)]);
                determinant(&sub)
            })
            .collect()
    }

    /// Leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self(Matrix::from_fn(k, k, |i, j| self[(i, j)]))
    }

    /// `P A P'` where `perm[k]` is the source index placed at position `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(Matrix::from_fn(self.dim(), self.dim(), |i, j| self[(perm[i], perm[j])]))
    }
}

impl<S> Index<(usize, usize)> for SymMatrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &S {
        &self.0[idx]
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L L'`.
#[derive(Clone, Debug)]
pub struct Cholesky<S> {
    l: Matrix<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn factor(&self) -> &Matrix<S> {
        &self.l
    }

    pub fn log_det(&self) -> S {
        let two = S::of(2.0);
        self.l.diag().into_iter().map(|d| two * d.ln()).sum()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "rhs of length {} for a {n}x{n} system",
                b.len()
            )));
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let v = self.l[(i, k)] * y[k];
                y[i] -= v;
            }
            y[i] /= self.l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let v = self.l[(k, i)] * y[k];
                y[i] -= v;
            }
            y[i] /= self.l[(i, i)];
        }
        Ok(y)
    }

    /// `b' A^{-1} b`.
    pub fn quad_form_inv(&self, b: &[S]) -> Result<S> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch("quadratic form length".into()));
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let v = self.l[(i, k)] * y[k];
                y[i] -= v;
            }
            y[i] /= self.l[(i, i)];
        }
        Ok(y.iter().map(|&v| v * v).sum())
    }

    pub fn inverse(&self) -> Result<SymMatrix<S>> {
        let n = self.l.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = S::zero());
            e[j] = S::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrized()
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Determinant by LU with partial pivoting.
pub fn determinant<S: Scalar>(m: &Matrix<S>) -> S {
    let n = m.rows();
    let mut a = m.clone();
    let mut det = S::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| {
                a[(x, col)]
                    .abs()
                    .partial_cmp(&a[(y, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[(piv, col)] == S::zero() {
            return S::zero();
        }
        if piv != col {
            a.swap_rows(piv, col);
            det = -det;
        }
        let d = a[(col, col)];
        det *= d;
        for r in (col + 1)..n {
            let f = a[(r, col)] / d;
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= f * v;
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, unsorted.
pub fn symmetric_eigenvalues<S: Scalar>(m: &SymMatrix<S>) -> Vec<S> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let scale = a.as_slice().iter().fold(S::zero(), |acc, v| acc.max(v.abs()));
    if scale == S::zero() {
        return vec![S::zero(); n];
    }
    let tol = S::eps() * scale;
    for _sweep in 0..100 {
        if a.max_abs_off_diag() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (S::of(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = (t * t + S::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    a.diag()
}

/// Outer product `v v'`.
pub fn outer<S: Scalar>(v: &[S]) -> SymMatrix<S> {
    SymMatrix::from_lower_fn(v.len(), |i, j| v[i] * v[j])
}
