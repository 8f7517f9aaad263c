//! Synthetic data: random-walk regressions, the sine-driven trivariate
//! covariance design, GARCH(1,1) series and multivariate normal draws.
//!
//! All generators use ChaCha8 seeded from a `u64`, so output is identical
//! across platforms and repeated calls.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::garch::GarchParams;
use crate::linalg::{symmetric_eigenvalues, Cholesky, Matrix, SymMatrix};
use crate::panel::{CovariancePath, TimeSeriesPanel};
use crate::scalar::Scalar;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of replication `rep` derived from a base seed.
pub fn replication_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

pub fn standard_normal<S: Scalar>(rng: &mut SimRng) -> S {
    let z: f64 = StandardNormal.sample(rng);
    S::of(z)
}

pub fn standard_normals<S: Scalar>(rng: &mut SimRng, count: usize) -> Vec<S> {
    (0..count).map(|_| standard_normal(rng)).collect()
}

/// Draws `mean + L z` with `z` standard normal and `L` the Cholesky factor.
pub fn sample_mvn_factored<S: Scalar>(rng: &mut SimRng, mean: &[S], chol: &Cholesky<S>) -> Vec<S> {
    let z: Vec<S> = standard_normals(rng, mean.len());
    let l = chol.factor();
    mean.iter()
        .enumerate()
        .map(|(i, &m)| m + (0..=i).map(|k| l[(i, k)] * z[k]).sum::<S>())
        .collect()
}

/// One draw from `N(mean, sigma)`, determined by `seed`.
pub fn sample_mvn<S: Scalar>(mean: &[S], sigma: &SymMatrix<S>, seed: u64) -> Result<Vec<S>> {
    sample_mvn_with(&mut rng_from_seed(seed), mean, sigma)
}

pub fn sample_mvn_with<S: Scalar>(rng: &mut SimRng, mean: &[S], sigma: &SymMatrix<S>) -> Result<Vec<S>> {
    if mean.len() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mean of length {} with {1}x{1} covariance",
            mean.len(),
            sigma.dim()
        )));
    }
    let chol = sigma.cholesky()?;
    Ok(sample_mvn_factored(rng, mean, &chol))
}

/// Random-walk coefficient regression.
#[derive(Clone, Debug, PartialEq)]
pub struct Sim1Config {
    pub n: usize,
    /// Variance of the coefficient's random-walk increments.
    pub q_true: f64,
    /// Variance of the regression noise.
    pub meas_var: f64,
    pub seed: u64,
}

impl Default for Sim1Config {
    fn default() -> Self {
        Self {
            n: 500,
            q_true: 0.01,
            meas_var: 1.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sim1Data<S> {
    pub y: Vec<S>,
    pub x: Vec<S>,
    pub phi_true: Vec<S>,
}

impl<S: Scalar> Sim1Data<S> {
    /// Two-column panel `(x, y)`, ready for fitting `y` on `x`.
    pub fn panel(&self) -> Result<TimeSeriesPanel<S>> {
        TimeSeriesPanel::from_columns(&[self.x.clone(), self.y.clone()], vec!["x".into(), "y".into()])
    }
}

/// `φ_0 ~ N(0, 1)`, `φ_t = φ_{t-1} + N(0, q_true)`, `x_t ~ N(0, 1)`,
/// `y_t = x_t φ_t + N(0, meas_var)` for `t = 1..n`.
pub fn generate_sim1<S: Scalar>(cfg: &Sim1Config) -> Result<Sim1Data<S>> {
    if !(cfg.q_true >= 0.0) || !(cfg.meas_var > 0.0) || cfg.n == 0 {
        return Err(Error::InvalidArgument(format!(
            "sim1 needs n >= 1, q_true >= 0, meas_var > 0; got {cfg:?}"
        )));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let (sq, sr) = (cfg.q_true.sqrt(), cfg.meas_var.sqrt());
    let mut phi: f64 = StandardNormal.sample(&mut rng);
    let mut out = Sim1Data {
        y: Vec::with_capacity(cfg.n),
        x: Vec::with_capacity(cfg.n),
        phi_true: Vec::with_capacity(cfg.n),
    };
    for _ in 0..cfg.n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let x: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        phi += sq * a;
        out.phi_true.push(S::of(phi));
        out.x.push(S::of(x));
        out.y.push(S::of(x * phi + sr * e));
    }
    Ok(out)
}

/// Trivariate design with diagonal `diag` and off-diagonals
/// `σ_21 = sin(t/δ_21)`, `σ_31 = sin(t/δ_31)`, `σ_32 = sin(t/δ_32)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sim2Config {
    pub n: usize,
    /// `(δ_21, δ_31, δ_32)`.
    pub deltas: [f64; 3],
    pub diag: [f64; 3],
    pub seed: u64,
}

impl Default for Sim2Config {
    fn default() -> Self {
        Self {
            n: 1024,
            deltas: [1024.0 / 8.0, 1024.0 / 4.0, 1024.0 / 16.0],
            diag: [2.0, 3.0, 4.0],
            seed: 1,
        }
    }
}

impl Sim2Config {
    /// True covariance at (1-based) time `t`, before any repair.
    pub fn sigma_at<S: Scalar>(&self, t: usize) -> SymMatrix<S> {
        let tf = t as f64;
        let [d21, d31, d32] = self.deltas;
        let (s21, s31, s32) = ((tf / d21).sin(), (tf / d31).sin(), (tf / d32).sin());
        let rows = [
            [self.diag[0], s21, s31],
            [s21, self.diag[1], s32],
            [s31, s32, self.diag[2]],
        ];
        SymMatrix::from_lower_fn(3, |i, j| S::of(rows[i][j]))
    }
}

#[derive(Clone, Debug)]
pub struct Sim2Data<S> {
    pub panel: TimeSeriesPanel<S>,
    pub truth: CovariancePath<S>,
    /// Number of time points whose covariance needed a diagonal shift.
    pub repairs: usize,
}

/// Shifts `sigma` by `(|λ_min| + 1e-8) I` when it fails the PD test.
pub fn repair_pd<S: Scalar>(sigma: &SymMatrix<S>) -> Result<(SymMatrix<S>, bool)> {
    if sigma.is_positive_definite() {
        return Ok((sigma.clone(), false));
    }
    let lambda_min = symmetric_eigenvalues(sigma)
        .into_iter()
        .fold(S::infinity(), S::min);
    let fixed = sigma.add_diag(lambda_min.abs() + S::of(1e-8));
    fixed.cholesky()?;
    Ok((fixed, true))
}

pub fn generate_sim2<S: Scalar>(cfg: &Sim2Config) -> Result<Sim2Data<S>> {
    if cfg.n == 0 || cfg.diag.iter().any(|&d| !(d > 0.0)) || cfg.deltas.iter().any(|&d| d == 0.0) {
        return Err(Error::InvalidArgument(format!("invalid sim2 configuration {cfg:?}")));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut sigmas = Vec::with_capacity(cfg.n);
    let mut rows = Vec::with_capacity(cfg.n * 3);
    let mut repairs = 0;
    let zero = [S::zero(); 3];
    for t in 1..=cfg.n {
        let (sigma, repaired) = repair_pd(&cfg.sigma_at::<S>(t))?;
        repairs += usize::from(repaired);
        let chol = sigma.cholesky()?;
        rows.extend(sample_mvn_factored(&mut rng, &zero, &chol));
        sigmas.push(sigma);
    }
    let panel = TimeSeriesPanel::new(
        Matrix::from_row_major(cfg.n, 3, rows)?,
        vec!["y1".into(), "y2".into(), "y3".into()],
    )?;
    Ok(Sim2Data {
        panel,
        truth: CovariancePath::new(sigmas)?,
        repairs,
    })
}

/// GARCH(1,1) innovations `ε_t = σ_t z_t` after discarding `burn_in` steps
/// started at the unconditional variance.
pub fn simulate_garch11<S: Scalar>(
    params: &GarchParams<S>,
    n: usize,
    burn_in: usize,
    rng: &mut SimRng,
) -> Result<(Vec<S>, Vec<S>)> {
    params.validate()?;
    let uncond = params.unconditional_variance().ok_or_else(|| {
        Error::InvalidParameters("simulation requires alpha + beta < 1".into())
    })?;
    let (omega, alpha, beta) = (params.omega, params.alpha1(), params.beta1());
    let mut s2 = uncond;
    let mut e2 = uncond;
    let mut eps = Vec::with_capacity(n);
    let mut sig = Vec::with_capacity(n);
    for t in 0..(n + burn_in) {
        s2 = omega + alpha * e2 + beta * s2;
        let e = s2.sqrt() * standard_normal::<S>(rng);
        e2 = e * e;
        if t >= burn_in {
            eps.push(e);
            sig.push(s2);
        }
    }
    Ok((eps, sig))
}
