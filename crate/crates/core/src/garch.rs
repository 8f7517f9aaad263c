//! Univariate GARCH variance recursion and Gaussian maximum likelihood.
//!
//! The recursion is
//! `σ²_t = ω + Σ_i α_i ε²_{t-i} + Σ_l β_l σ²_{t-l}`, with every pre-sample
//! `ε²` and `σ²` term set to a common initial value. The log-likelihood is
//! reported in maximized form with the constant dropped:
//! `L(θ) = -Σ_t (ln σ²_t + ε²_t / σ²_t)`.
//!
//! Fitting is restricted to GARCH(1,1). The parameters are mapped to an
//! unconstrained space,
//!
//! ```text
//! ω = exp(a)
//! s = (1 - 1e-6) * logistic(b),  u = logistic(c)
//! α = s u,  β = s (1 - u)
//! ```
//!
//! so positivity and `α + β < 1` hold for every `(a, b, c)`.

use crate::error::{Error, Result};
use crate::optim::{minimize_bfgs, BfgsSettings};
use crate::scalar::Scalar;

/// Shortest series `garch_fit` accepts.
pub const MIN_FIT_LEN: usize = 20;
/// `α + β` is kept at or below `1 - STATIONARITY_MARGIN`.
pub const STATIONARITY_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GarchParams<S> {
    pub omega: S,
    /// ARCH coefficients, lag 1 first.
    pub alpha: Vec<S>,
    /// GARCH coefficients, lag 1 first.
    pub beta: Vec<S>,
}

impl<S: Scalar> GarchParams<S> {
    pub fn new(omega: S, alpha: Vec<S>, beta: Vec<S>) -> Result<Self> {
        let p = Self { omega, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn garch11(omega: S, alpha: S, beta: S) -> Result<Self> {
        Self::new(omega, vec![alpha], vec![beta])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > S::zero()) || !self.omega.is_finite() {
            return Err(Error::InvalidParameters(format!("omega = {} must be > 0", self.omega)));
        }
        if let Some(a) = self.alpha.iter().find(|&&a| !(a >= S::zero()) || !a.is_finite()) {
            return Err(Error::InvalidParameters(format!("alpha = {a} must be >= 0")));
        }
        if let Some(b) = self.beta.iter().find(|&&b| !(b >= S::zero()) || !b.is_finite()) {
            return Err(Error::InvalidParameters(format!("beta = {b} must be >= 0")));
        }
        Ok(())
    }

    pub fn arch_order(&self) -> usize {
        self.alpha.len()
    }

    pub fn garch_order(&self) -> usize {
        self.beta.len()
    }

    /// `Σα + Σβ`.
    pub fn persistence(&self) -> S {
        self.alpha.iter().copied().sum::<S>() + self.beta.iter().copied().sum::<S>()
    }

    pub fn is_stationary(&self) -> bool {
        self.persistence() < S::one()
    }

    /// `ω / (1 - Σα - Σβ)`, or `None` when not covariance stationary.
    pub fn unconditional_variance(&self) -> Option<S> {
        self.is_stationary().then(|| self.omega / (S::one() - self.persistence()))
    }

    /// First ARCH and GARCH coefficients (zero when absent).
    pub fn alpha1(&self) -> S {
        self.alpha.first().copied().unwrap_or_else(S::zero)
    }

    pub fn beta1(&self) -> S {
        self.beta.first().copied().unwrap_or_else(S::zero)
    }
}

/// Conditional variance path `σ²_1..σ²_n`.
pub fn garch_filter<S: Scalar>(params: &GarchParams<S>, eps: &[S], sigma2_init: S) -> Result<Vec<S>> {
    params.validate()?;
    if !(sigma2_init > S::zero()) || !sigma2_init.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "initial variance {sigma2_init} must be > 0"
        )));
    }
    if eps.is_empty() {
        return Err(Error::InvalidArgument("empty innovation series".into()));
    }
    let n = eps.len();
    let mut sigma2 = Vec::with_capacity(n);
    for t in 0..n {
        let mut v = params.omega;
        for (i, &a) in params.alpha.iter().enumerate() {
            let lag = i + 1;
            v += a * if t >= lag { eps[t - lag] * eps[t - lag] } else { sigma2_init };
        }
        for (l, &b) in params.beta.iter().enumerate() {
            let lag = l + 1;
            v += b * if t >= lag { sigma2[t - lag] } else { sigma2_init };
        }
        sigma2.push(v);
    }
    Ok(sigma2)
}

fn loglik_of_path<S: Scalar>(eps: &[S], sigma2: &[S]) -> S {
    -eps
        .iter()
        .zip(sigma2)
        .map(|(&e, &v)| v.ln() + e * e / v)
        .sum::<S>()
}

/// `-Σ_t (ln σ²_t + ε²_t / σ²_t)`; larger is better.
pub fn garch_loglik<S: Scalar>(params: &GarchParams<S>, eps: &[S], sigma2_init: S) -> Result<S> {
    let sigma2 = garch_filter(params, eps, sigma2_init)?;
    Ok(loglik_of_path(eps, &sigma2))
}

/// GARCH(1,1) log-likelihood and its gradient with respect to `(ω, α, β)`.
pub fn garch11_loglik_grad<S: Scalar>(
    omega: S,
    alpha: S,
    beta: S,
    eps: &[S],
    sigma2_init: S,
) -> (S, [S; 3]) {
    let (mut prev_e2, mut prev_s2) = (sigma2_init, sigma2_init);
    let mut d = [S::zero(); 3];
    let mut ll = S::zero();
    let mut grad = [S::zero(); 3];
    for &e in eps {
        let s2 = omega + alpha * prev_e2 + beta * prev_s2;
        d = [
            S::one() + beta * d[0],
            prev_e2 + beta * d[1],
            prev_s2 + beta * d[2],
        ];
        let e2 = e * e;
        ll -= s2.ln() + e2 / s2;
        // d/dσ² of -(ln σ² + ε²/σ²)
        let w = (e2 / s2 - S::one()) / s2;
        for k in 0..3 {
            grad[k] += w * d[k];
        }
        prev_e2 = e2;
        prev_s2 = s2;
    }
    (ll, grad)
}

#[inline]
fn logistic<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

#[inline]
fn logit<S: Scalar>(p: S) -> S {
    (p / (S::one() - p)).ln()
}

/// Maps unconstrained `(a, b, c)` to `(ω, α, β)`.
pub fn to_natural<S: Scalar>(z: &[S]) -> (S, S, S) {
    let cap = S::one() - S::of(STATIONARITY_MARGIN);
    let omega = z[0].exp();
    let s = cap * logistic(z[1]);
    let u = logistic(z[2]);
    (omega, s * u, s * (S::one() - u))
}

/// Inverse of [`to_natural`]; requires `ω > 0`, `α, β > 0`, `α + β < 1 - 1e-6`.
pub fn to_unconstrained<S: Scalar>(omega: S, alpha: S, beta: S) -> [S; 3] {
    let cap = S::one() - S::of(STATIONARITY_MARGIN);
    let s = alpha + beta;
    [omega.ln(), logit(s / cap), logit(alpha / s)]
}

/// Negative mean log-likelihood and gradient in the unconstrained space.
pub fn transformed_objective<S: Scalar>(z: &[S], eps: &[S], sigma2_init: S) -> (S, Vec<S>) {
    let (omega, alpha, beta) = to_natural(z);
    let (ll, g) = garch11_loglik_grad(omega, alpha, beta, eps, sigma2_init);
    let cap = S::one() - S::of(STATIONARITY_MARGIN);
    let lb = logistic(z[1]);
    let u = logistic(z[2]);
    let s = cap * lb;
    let ds_db = s * (S::one() - lb);
    let du_dc = u * (S::one() - u);
    let grad_a = g[0] * omega;
    let grad_b = (g[1] * u + g[2] * (S::one() - u)) * ds_db;
    let grad_c = (g[1] - g[2]) * s * du_dc;
    let n = S::of_usize(eps.len().max(1));
    let value = if ll.is_finite() { -ll / n } else { S::infinity() };
    (value, vec![-grad_a / n, -grad_b / n, -grad_c / n])
}

/// ARCH and GARCH orders of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GarchOrder {
    pub arch: usize,
    pub garch: usize,
}

impl GarchOrder {
    pub const GARCH11: GarchOrder = GarchOrder { arch: 1, garch: 1 };
}

impl Default for GarchOrder {
    fn default() -> Self {
        Self::GARCH11
    }
}

#[derive(Clone, Debug)]
pub struct GarchSettings<S> {
    pub order: GarchOrder,
    pub optimizer: BfgsSettings<S>,
    /// Starting `(α, β)` pairs; `ω` starts at `v (1 - α - β)` for sample variance `v`.
    pub starts: Vec<(f64, f64)>,
}

impl<S: Scalar> Default for GarchSettings<S> {
    fn default() -> Self {
        Self {
            order: GarchOrder::GARCH11,
            optimizer: BfgsSettings::default(),
            starts: vec![(0.05, 0.90), (0.10, 0.80), (0.20, 0.50)],
        }
    }
}

#[derive(Clone, Debug)]
pub struct GarchFit<S> {
    pub params: GarchParams<S>,
    pub sigma2_path: Vec<S>,
    pub loglik: S,
    pub sigma2_init: S,
    pub converged: bool,
    pub iterations: usize,
    /// Negative mean log-likelihood after each accepted optimizer step of the
    /// winning start.
    pub trace: Vec<S>,
}

/// Mean-subtracted sample variance.
pub fn sample_variance<S: Scalar>(x: &[S]) -> S {
    let n = S::of_usize(x.len());
    let mean = x.iter().copied().sum::<S>() / n;
    x.iter().map(|&v| (v - mean) * (v - mean)).sum::<S>() / n
}

/// Maximum-likelihood GARCH(1,1) fit with default settings.
pub fn garch_fit<S: Scalar>(eps: &[S], order: GarchOrder) -> Result<GarchFit<S>> {
    garch_fit_with(
        eps,
        &GarchSettings {
            order,
            ..GarchSettings::default()
        },
    )
}

/// Maximum-likelihood GARCH(1,1) fit.
///
/// Each start is optimized with BFGS in the unconstrained space and the
/// best log-likelihood wins. A fit whose optimizer stopped without meeting
/// the gradient or step tolerance is still returned, with `converged = false`.
pub fn garch_fit_with<S: Scalar>(eps: &[S], settings: &GarchSettings<S>) -> Result<GarchFit<S>> {
    if settings.order != GarchOrder::GARCH11 {
        return Err(Error::InvalidArgument(format!(
            "only GARCH(1,1) can be fitted, got ({}, {})",
            settings.order.arch, settings.order.garch
        )));
    }
    if eps.len() < MIN_FIT_LEN {
        return Err(Error::SeriesTooShort {
            len: eps.len(),
            min: MIN_FIT_LEN,
        });
    }
    if eps.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("innovations contain non-finite values".into()));
    }
    let var = sample_variance(eps);
    let mean_sq = eps.iter().map(|&e| e * e).sum::<S>() / S::of_usize(eps.len());
    if !(var > S::eps() * S::of(16.0) * mean_sq) || var == S::zero() {
        return Err(Error::DegenerateSeries);
    }
    let sigma2_init = var;

    let mut best: Option<(crate::optim::Minimum<S>, S)> = None;
    for &(a0, b0) in &settings.starts {
        let (a0, b0) = (S::of(a0), S::of(b0));
        let omega0 = var * (S::one() - a0 - b0);
        let z0 = to_unconstrained(omega0, a0, b0);
        let m = minimize_bfgs(
            |z: &[S]| transformed_objective(z, eps, sigma2_init),
            &z0,
            &settings.optimizer,
        );
        let better = match &best {
            None => true,
            Some((b, _)) => m.value < b.value || (m.value == b.value && m.converged && !b.converged),
        };
        if better {
            best = Some((m, omega0));
        }
    }
    let (m, _) = best.ok_or_else(|| Error::InvalidArgument("no starting points".into()))?;
    let (omega, alpha, beta) = to_natural(&m.x);
    let params = GarchParams::garch11(omega, alpha, beta)?;
    let sigma2_path = garch_filter(&params, eps, sigma2_init)?;
    let loglik = loglik_of_path(eps, &sigma2_path);
    if !loglik.is_finite() {
        return Err(Error::NonConvergence {
            iterations: m.iterations,
        });
    }
    Ok(GarchFit {
        params,
        sigma2_path,
        loglik,
        sigma2_init,
        converged: m.converged,
        iterations: m.iterations,
        trace: m.trace,
    })
}
