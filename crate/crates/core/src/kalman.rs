//! Kalman filter for regressions with random-walk coefficients.
//!
//! Observation: `y_t = x_t' φ_t + e_t`, `e_t ~ N(0, σ²)`.
//! State: `φ_t = φ_{t-1} + a_t`, `a_t ~ N(0, Q)`.
//!
//! The update step is computed in information form,
//! `P = [(P⁻)^{-1} + x x'/σ²]^{-1}` and `φ = P [x y/σ² + (P⁻)^{-1} φ⁻]`.

use crate::error::{Error, Result};
use crate::linalg::{dot, outer, Matrix, SymMatrix};
use crate::scalar::Scalar;

/// Prior variance scale of the initial state when none is given.
pub const DEFAULT_KAPPA: f64 = 10.0;
/// Default random-walk variance per coefficient.
pub const DEFAULT_STATE_NOISE: f64 = 1e-4;
/// Relative diagonal jitter applied when `P⁻` cannot be inverted.
pub const JITTER: f64 = 1e-10;

/// Half-decade grid from 1e-6 to 1e-1 used for state-noise tuning.
pub fn default_q_grid<S: Scalar>() -> Vec<S> {
    (0..=10).map(|i| S::of(10f64.powf(-6.0 + 0.5 * i as f64))).collect()
}

/// Prior, state-noise and measurement-noise settings for one regression.
#[derive(Clone, Debug, PartialEq)]
pub struct KalmanConfig<S> {
    pub phi0: Vec<S>,
    pub p0: SymMatrix<S>,
    pub q: SymMatrix<S>,
    pub meas_var: S,
}

impl<S: Scalar> KalmanConfig<S> {
    pub fn new(phi0: Vec<S>, p0: SymMatrix<S>, q: SymMatrix<S>, meas_var: S) -> Result<Self> {
        let k = phi0.len();
        if k == 0 {
            return Err(Error::DimensionMismatch("state dimension must be at least 1".into()));
        }
        if p0.dim() != k || q.dim() != k {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {k}, P0 is {0}x{0}, Q is {1}x{1}",
                p0.dim(),
                q.dim()
            )));
        }
        if !is_psd(&p0) {
            return Err(Error::InvalidArgument("P0 must be positive semi-definite".into()));
        }
        if !is_psd(&q) {
            return Err(Error::InvalidArgument("Q must be positive semi-definite".into()));
        }
        if !(meas_var > S::zero()) || !meas_var.is_finite() {
            return Err(Error::NonPositiveMeasurementVariance(meas_var.as_f64()));
        }
        Ok(Self {
            phi0,
            p0,
            q,
            meas_var,
        })
    }

    /// Zero prior mean, `P0 = κ I`, `Q = q I`.
    pub fn isotropic(state_dim: usize, kappa: S, q: S, meas_var: S) -> Result<Self> {
        if q < S::zero() || kappa < S::zero() {
            return Err(Error::InvalidArgument("kappa and q must be non-negative".into()));
        }
        Self::new(
            vec![S::zero(); state_dim],
            SymMatrix::scaled_identity(state_dim, kappa),
            SymMatrix::scaled_identity(state_dim, q),
            meas_var,
        )
    }

    #[inline]
    pub fn state_dim(&self) -> usize {
        self.phi0.len()
    }

    /// Same prior and measurement variance with `Q = q I`.
    pub fn with_state_noise(&self, q: S) -> Self {
        Self {
            q: SymMatrix::scaled_identity(self.state_dim(), q),
            ..self.clone()
        }
    }
}

fn is_psd<S: Scalar>(m: &SymMatrix<S>) -> bool {
    let max_diag = m.max_diag();
    if m.as_matrix().diag().iter().any(|&d| d < S::zero()) {
        return false;
    }
    if max_diag == S::zero() {
        return m.as_matrix().as_slice().iter().all(|&v| v == S::zero());
    }
    m.add_diag(S::of(1e-9) * max_diag).is_positive_definite()
}

/// Output of one filter pass over `n` observations.
#[derive(Clone, Debug)]
pub struct KalmanRun<S> {
    /// Posterior means `φ_t`, one row per time point.
    pub phi_path: Matrix<S>,
    /// Posterior covariances `P_t`.
    pub p_path: Vec<SymMatrix<S>>,
    /// Predicted means `φ⁻_t`.
    pub phi_pred_path: Matrix<S>,
    /// Predicted covariances `P⁻_t`.
    pub p_pred_path: Vec<SymMatrix<S>>,
    /// `y_t - x_t' φ_t` using the posterior mean.
    pub innovations: Vec<S>,
    /// Prediction-error decomposition log-likelihood.
    pub loglik_pe: S,
}

impl<S: Scalar> KalmanRun<S> {
    pub fn len(&self) -> usize {
        self.innovations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.innovations.is_empty()
    }

    /// Posterior mean at `t`.
    pub fn phi(&self, t: usize) -> &[S] {
        self.phi_path.row(t)
    }
}

/// Random-walk prediction: `φ⁻ = φ`, `P⁻ = P + Q`.
pub fn kalman_predict<S: Scalar>(
    phi_prev: &[S],
    p_prev: &SymMatrix<S>,
    cfg: &KalmanConfig<S>,
) -> Result<(Vec<S>, SymMatrix<S>)> {
    let k = cfg.state_dim();
    if phi_prev.len() != k || p_prev.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {k}, got mean of length {} and {1}x{1} covariance",
            phi_prev.len(),
            p_prev.dim()
        )));
    }
    Ok((phi_prev.to_vec(), p_prev.add(&cfg.q)?))
}

/// Inverse of the predicted covariance, jittering the diagonal once if needed.
fn invert_prediction<S: Scalar>(p_pred: &SymMatrix<S>) -> Result<SymMatrix<S>> {
    if let Ok(inv) = p_pred.inverse_spd() {
        return Ok(inv);
    }
    let dim = S::of_usize(p_pred.dim());
    let jitter = S::of(JITTER) * p_pred.trace().abs() / dim;
    if jitter > S::zero() {
        if let Ok(inv) = p_pred.add_diag(jitter).inverse_spd() {
            return Ok(inv);
        }
    }
    Err(Error::SingularPrediction { t: 0 })
}

/// Conditions the predicted state on one observation `y = x' φ + e`.
pub fn kalman_update<S: Scalar>(
    phi_pred: &[S],
    p_pred: &SymMatrix<S>,
    x: &[S],
    y: S,
    meas_var: S,
) -> Result<(Vec<S>, SymMatrix<S>)> {
    let k = phi_pred.len();
    if p_pred.dim() != k || x.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {k}, covariance {0}x{0}, regressor length {1}",
            p_pred.dim(),
            x.len()
        )));
    }
    if !(meas_var > S::zero()) || !meas_var.is_finite() {
        return Err(Error::NonPositiveMeasurementVariance(meas_var.as_f64()));
    }
    let prior_info = invert_prediction(p_pred)?;
    let info = prior_info.add(&outer(x).scale(meas_var.recip()))?;
    let p_post = info
        .inverse_spd()
        .map_err(|_| Error::SingularPrediction { t: 0 })?;
    let weighted_prior = prior_info.as_matrix().matvec(phi_pred)?;
    let rhs: Vec<S> = x
        .iter()
        .zip(&weighted_prior)
        .map(|(&xi, &w)| xi * y / meas_var + w)
        .collect();
    let phi = p_post.as_matrix().matvec(&rhs)?;
    Ok((phi, p_post))
}

/// Runs predict/update over all `n` rows of `x_panel`, starting from the prior in `cfg`.
pub fn filter_regression<S: Scalar>(
    y: &[S],
    x_panel: &Matrix<S>,
    cfg: &KalmanConfig<S>,
) -> Result<KalmanRun<S>> {
    run_filter(y, x_panel, cfg, |_| cfg.meas_var)
}

/// As [`filter_regression`] but with a per-step measurement variance path.
pub fn filter_regression_with_variances<S: Scalar>(
    y: &[S],
    x_panel: &Matrix<S>,
    cfg: &KalmanConfig<S>,
    meas_vars: &[S],
) -> Result<KalmanRun<S>> {
    if meas_vars.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} measurement variances for {} observations",
            meas_vars.len(),
            y.len()
        )));
    }
    run_filter(y, x_panel, cfg, |t| meas_vars[t])
}

fn run_filter<S: Scalar>(
    y: &[S],
    x_panel: &Matrix<S>,
    cfg: &KalmanConfig<S>,
    meas_var_at: impl Fn(usize) -> S,
) -> Result<KalmanRun<S>> {
    let n = y.len();
    let k = cfg.state_dim();
    if n == 0 {
        return Err(Error::InvalidArgument("filter needs at least one observation".into()));
    }
    if x_panel.rows() != n || x_panel.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "regressors are {}x{}, expected {n}x{k}",
            x_panel.rows(),
            x_panel.cols()
        )));
    }
    let half = S::of(0.5);
    let ln_2pi = (S::of(2.0) * S::PI()).ln();

    let mut phi_path = Matrix::zeros(n, k);
    let mut phi_pred_path = Matrix::zeros(n, k);
    let mut p_path = Vec::with_capacity(n);
    let mut p_pred_path = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    let mut loglik = S::zero();

    let mut phi = cfg.phi0.clone();
    let mut p = cfg.p0.clone();
    let tag = |t: usize| move |e: Error| Error::KalmanStep { t, source: Box::new(e) };
    for t in 0..n {
        let x = x_panel.row(t);
        let r = meas_var_at(t);
        let (phi_pred, p_pred) = kalman_predict(&phi, &p, cfg).map_err(tag(t))?;

        let pred_err = y[t] - dot(x, &phi_pred);
        let px = p_pred.as_matrix().matvec(x).map_err(tag(t))?;
        let pred_var = dot(x, &px) + r;
        loglik -= half * (ln_2pi + pred_var.ln() + pred_err * pred_err / pred_var);

        let (phi_post, p_post) = kalman_update(&phi_pred, &p_pred, x, y[t], r).map_err(|e| {
            match e {
                Error::SingularPrediction { .. } => Error::SingularPrediction { t },
                other => tag(t)(other),
            }
        })?;
        innovations.push(y[t] - dot(x, &phi_post));
        for c in 0..k {
            phi_path[(t, c)] = phi_post[c];
            phi_pred_path[(t, c)] = phi_pred[c];
        }
        p_pred_path.push(p_pred);
        p_path.push(p_post.clone());
        phi = phi_post;
        p = p_post;
    }
    Ok(KalmanRun {
        phi_path,
        p_path,
        phi_pred_path,
        p_pred_path,
        innovations,
        loglik_pe: loglik,
    })
}

/// Picks `q` from `grid` maximizing the prediction-error log-likelihood with
/// `Q = q I`; ties go to the smaller value.
pub fn tune_state_noise<S: Scalar>(
    y: &[S],
    x_panel: &Matrix<S>,
    cfg_base: &KalmanConfig<S>,
    grid: &[S],
) -> Result<S> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("state-noise grid is empty".into()));
    }
    if grid.iter().any(|&q| !(q >= S::zero())) {
        return Err(Error::InvalidArgument("state-noise grid values must be >= 0".into()));
    }
    let mut best: Option<(S, S)> = None;
    for &q in grid {
        let ll = filter_regression(y, x_panel, &cfg_base.with_state_noise(q))?.loglik_pe;
        best = match best {
            None => Some((q, ll)),
            Some((bq, bll)) if ll > bll || (ll == bll && q < bq) => Some((q, ll)),
            keep => keep,
        };
    }
    Ok(best.map(|(q, _)| q).unwrap_or_else(S::zero))
}

/// Least-squares fit of `y` on the columns of `x` (no intercept).
///
/// Returns the coefficients and the residual variance `RSS / (n - k)`.
pub fn least_squares<S: Scalar>(y: &[S], x: &Matrix<S>) -> Result<(Vec<S>, S)> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} responses for {n} rows", y.len())));
    }
    if n <= k {
        return Err(Error::SeriesTooShort { len: n, min: k + 1 });
    }
    let xtx = SymMatrix::from_lower_fn(k, |i, j| (0..n).map(|t| x[(t, i)] * x[(t, j)]).sum());
    let xty: Vec<S> = (0..k).map(|i| (0..n).map(|t| x[(t, i)] * y[t]).sum()).collect();
    let beta = xtx.cholesky()?.solve(&xty)?;
    let rss: S = (0..n)
        .map(|t| {
            let r = y[t] - dot(x.row(t), &beta);
            r * r
        })
        .sum();
    Ok((beta, rss / S::of_usize(n - k)))
}
