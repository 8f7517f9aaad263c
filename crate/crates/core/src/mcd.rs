//! Modified Cholesky decomposition.
//!
//! A covariance matrix `Σ` is written as `T Σ T' = D`, where row `j` of the
//! unit lower triangular `T` holds the negated coefficients of the regression
//! of variable `j` on variables `0..j`, and `D` holds the prediction-error
//! variances of those regressions. Any unit lower triangular `T` combined
//! with a strictly positive `D` yields a positive definite `Σ`.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::scalar::Scalar;

/// Unit lower triangular matrix whose strict lower part holds `-φ_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitLowerTriangular<S> {
    m: Matrix<S>,
}

impl<S: Scalar> UnitLowerTriangular<S> {
    pub fn identity(dim: usize) -> Self {
        Self {
            m: Matrix::identity(dim),
        }
    }

    /// Builds `T` from regression coefficients: `coeffs[j]` is the
    /// coefficient vector of variable `j` on variables `0..j`
    /// (so `coeffs[0]` is empty).
    pub fn from_coefficients(coeffs: &[Vec<S>]) -> Result<Self> {
        let dim = coeffs.len();
        let mut m = Matrix::identity(dim);
        for (j, row) in coeffs.iter().enumerate() {
            if row.len() != j {
                return Err(Error::DimensionMismatch(format!(
                    "row {j} needs {j} coefficients, got {}",
                    row.len()
                )));
            }
            for (k, &phi) in row.iter().enumerate() {
                m[(j, k)] = -phi;
            }
        }
        Ok(Self { m })
    }

    /// Validates a full matrix: diagonal exactly one, strict upper exactly zero.
    pub fn from_matrix(m: Matrix<S>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("T must be square".into()));
        }
        for i in 0..m.rows() {
            if m[(i, i)] != S::one() {
                return Err(Error::InvalidArgument(format!("T[{i}][{i}] must be 1")));
            }
            for j in (i + 1)..m.cols() {
                if m[(i, j)] != S::zero() {
                    return Err(Error::InvalidArgument(format!("T[{i}][{j}] must be 0")));
                }
            }
        }
        Ok(Self { m })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    /// Regression coefficient `φ_jk` (`k < j`).
    #[inline]
    pub fn coefficient(&self, j: usize, k: usize) -> S {
        -self.m[(j, k)]
    }

    /// Coefficient vector of variable `j` on its predecessors.
    pub fn coefficients(&self, j: usize) -> Vec<S> {
        (0..j).map(|k| self.coefficient(j, k)).collect()
    }

    pub fn as_matrix(&self) -> &Matrix<S> {
        &self.m
    }

    /// `T y`, the innovations implied by observation `y`.
    pub fn apply(&self, y: &[S]) -> Result<Vec<S>> {
        self.m.matvec(y)
    }

    /// `T^{-1}` by forward substitution; also unit lower triangular.
    pub fn inverse(&self) -> Matrix<S> {
        let n = self.dim();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            for i in (col + 1)..n {
                let mut s = S::zero();
                for k in col..i {
                    s -= self.m[(i, k)] * inv[(k, col)];
                }
                inv[(i, col)] = s;
            }
        }
        inv
    }
}

/// Strictly positive innovation variances `σ²_1..σ²_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagVariances<S>(Vec<S>);

impl<S: Scalar> DiagVariances<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch("empty variance vector".into()));
        }
        for (index, &v) in values.iter().enumerate() {
            if !(v > S::zero()) || !v.is_finite() {
                return Err(Error::NonPositiveVariance {
                    index,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self(values))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[S] {
        &self.0
    }
}

/// Decomposes a positive definite `Σ` into `(T, D)` with `T Σ T' = D`.
///
/// Row `j` of `T` comes from solving the normal equations of the regression
/// of variable `j` on variables `0..j` against the leading block of `Σ`.
pub fn mcd_decompose<S: Scalar>(
    sigma: &SymMatrix<S>,
) -> Result<(UnitLowerTriangular<S>, DiagVariances<S>)> {
    sigma.cholesky()?;
    let p = sigma.dim();
    let mut coeffs = Vec::with_capacity(p);
    let mut d = Vec::with_capacity(p);
    coeffs.push(Vec::new());
    d.push(sigma[(0, 0)]);
    for j in 1..p {
        let block = sigma.leading_block(j).cholesky()?;
        let cross: Vec<S> = (0..j).map(|k| sigma[(k, j)]).collect();
        let phi = block.solve(&cross)?;
        let explained: S = phi.iter().zip(&cross).map(|(&a, &b)| a * b).sum();
        d.push(sigma[(j, j)] - explained);
        coeffs.push(phi);
    }
    let d = DiagVariances::new(d).map_err(|e| match e {
        Error::NonPositiveVariance { index, value } => Error::NotPositiveDefinite {
            index,
            pivot: value,
        },
        other => other,
    })?;
    Ok((UnitLowerTriangular::from_coefficients(&coeffs)?, d))
}

/// `Σ = T^{-1} D T'^{-1}`.
pub fn mcd_reconstruct<S: Scalar>(
    t: &UnitLowerTriangular<S>,
    d: &DiagVariances<S>,
) -> Result<SymMatrix<S>> {
    if t.dim() != d.dim() {
        return Err(Error::DimensionMismatch(format!(
            "T is {0}x{0} but D has {1} entries",
            t.dim(),
            d.dim()
        )));
    }
    let inv = t.inverse();
    let dv = d.values();
    Ok(SymMatrix::from_lower_fn(t.dim(), |i, j| {
        // T^{-1} is lower triangular, so only k <= j contributes.
        (0..=j).map(|k| inv[(i, k)] * dv[k] * inv[(j, k)]).sum()
    }))
}

/// Correlation matrix `σ_ij / sqrt(σ_ii σ_jj)`.
pub fn cov_to_corr<S: Scalar>(sigma: &SymMatrix<S>) -> Result<SymMatrix<S>> {
    let diag = sigma.as_matrix().diag();
    for (index, &v) in diag.iter().enumerate() {
        if !(v > S::zero()) {
            return Err(Error::NonPositiveDiagonal {
                index,
                value: v.as_f64(),
            });
        }
    }
    let sd: Vec<S> = diag.iter().map(|v| v.sqrt()).collect();
    let one = S::one();
    Ok(SymMatrix::from_lower_fn(sigma.dim(), |i, j| {
        if i == j {
            one
        } else {
            (sigma[(i, j)] / (sd[i] * sd[j])).max(-one).min(one)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix<f64> {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_decomposes_trivially() {
        let (t, d) = mcd_decompose(&SymMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(t, UnitLowerTriangular::identity(3));
        assert_eq!(d.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_decomposes_to_itself() {
        let (t, d) = mcd_decompose(&SymMatrix::from_diag(&[2.0, 3.0, 4.0])).unwrap();
        assert_eq!(t, UnitLowerTriangular::identity(3));
        assert_eq!(d.values(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn three_by_three_matches_normal_equations() {
        // Variable 2 on variable 1: φ21 = 1/2, d2 = 3 - 1/2 = 2.5.
        // Variable 3 on (1, 2): [[2,1],[1,3]] φ = (0.5, 1)
        //   => φ31 = 0.1, φ32 = 0.3, d3 = 4 - (0.5*0.1 + 1*0.3) = 3.65.
        let s = sym(&[&[2.0, 1.0, 0.5], &[1.0, 3.0, 1.0], &[0.5, 1.0, 4.0]]);
        let (t, d) = mcd_decompose(&s).unwrap();
        let expect_phi = [(1, 0, 0.5), (2, 0, 0.1), (2, 1, 0.3)];
        for (j, k, v) in expect_phi {
            assert!((t.coefficient(j, k) - v).abs() < 1e-14, "phi_{j}{k}");
        }
        let expect_d = [2.0, 2.5, 3.65];
        for (got, want) in d.values().iter().zip(expect_d) {
            assert!((got - want).abs() < 1e-14);
        }
        let tst = t
            .as_matrix()
            .matmul(s.as_matrix())
            .unwrap()
            .matmul(&t.as_matrix().transpose())
            .unwrap();
        assert!(tst.max_abs_diff(&Matrix::from_diag(d.values())) < 1e-10);
        let back = mcd_reconstruct(&t, &d).unwrap();
        assert!(back.as_matrix().max_abs_diff(s.as_matrix()) < 1e-12);
    }

    #[test]
    fn reconstruct_two_by_two_by_hand() {
        let t = UnitLowerTriangular::from_coefficients(&[vec![], vec![0.5]]).unwrap();
        let d = DiagVariances::new(vec![1.0, 1.0]).unwrap();
        let s = mcd_reconstruct(&t, &d).unwrap();
        assert_eq!(s, sym(&[&[1.0, 0.5], &[0.5, 1.25]]));
        assert_eq!(mcd_reconstruct(&UnitLowerTriangular::identity(3), &DiagVariances::new(vec![1.0; 3]).unwrap()).unwrap(), SymMatrix::identity(3));
    }

    #[test]
    fn scalar_case() {
        let (t, d) = mcd_decompose(&sym(&[&[7.5]])).unwrap();
        assert_eq!(t.as_matrix()[(0, 0)], 1.0);
        assert_eq!(d.values(), &[7.5]);
    }

    #[test]
    fn rejects_indefinite_and_mismatched() {
        let s = sym(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(mcd_decompose(&s), Err(Error::NotPositiveDefinite { .. })));
        let t = UnitLowerTriangular::<f64>::identity(2);
        let d = DiagVariances::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(mcd_reconstruct(&t, &d), Err(Error::DimensionMismatch(_))));
        assert!(DiagVariances::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn correlation_conversion() {
        let r = cov_to_corr(&SymMatrix::from_diag(&[2.0, 3.0, 4.0])).unwrap();
        assert_eq!(r, SymMatrix::identity(3));
        let r = cov_to_corr(&sym(&[&[1.0, 0.5], &[0.5, 1.25]])).unwrap();
        assert!((r[(0, 1)] - 0.5 / 1.25_f64.sqrt()).abs() < 1e-15);
        let again = cov_to_corr(&r).unwrap();
        assert!(again.as_matrix().max_abs_diff(r.as_matrix()) < 1e-15);
        let bad = sym(&[&[0.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(cov_to_corr(&bad), Err(Error::NonPositiveDiagonal { index: 0, .. })));
    }

    #[test]
    fn unit_lower_validation() {
        let mut m = Matrix::<f64>::identity(2);
        m[(0, 1)] = 0.1;
        assert!(UnitLowerTriangular::from_matrix(m).is_err());
        let mut m = Matrix::<f64>::identity(2);
        m[(1, 0)] = -0.3;
        let t = UnitLowerTriangular::from_matrix(m).unwrap();
        assert_eq!(t.coefficient(1, 0), 0.3);
        let prod = t.as_matrix().matmul(&t.inverse()).unwrap();
        assert_eq!(prod, Matrix::identity(2));
    }
}
