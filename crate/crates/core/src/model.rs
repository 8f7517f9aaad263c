//! Two-step Cholesky GARCH estimation.
//!
//! Step one turns the panel into uncorrelated innovations `ε_t = T_t Y_t`,
//! either with Kalman-filtered time-varying regression coefficients
//! (SCGARCH) or with a single full-sample `T` (CGARCH). Step two fits a
//! GARCH(1,1) to each innovation series, giving `D_t`, and the covariance
//! path is assembled as `Σ_t = T_t^{-1} D_t T_t'^{-1}`.
//!
//! Variables can be reordered before fitting. The Cholesky path and the
//! innovations are reported in fitted order; the covariance path is always
//! mapped back to the panel's original column order.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::garch::{garch_fit_with, GarchFit, GarchSettings};
use crate::kalman::{
    filter_regression, filter_regression_with_variances, least_squares, tune_state_noise,
    KalmanConfig, KalmanRun, DEFAULT_KAPPA, DEFAULT_STATE_NOISE,
};
use crate::linalg::Matrix;
use crate::mcd::{mcd_decompose, mcd_reconstruct, DiagVariances, UnitLowerTriangular};
use crate::panel::{invert_permutation, validate_permutation, CovariancePath, TimeSeriesPanel};
use crate::scalar::Scalar;
use crate::simgen::rng_from_seed;

/// Shortest panel the estimators accept.
pub const MIN_FIT_LEN: usize = 50;
/// Largest dimension searched exhaustively by default.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 6;
/// Permutations drawn when the dimension is too large for exhaustive search.
pub const DEFAULT_ORDER_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Time-varying Cholesky factor from Kalman filtering.
    Scgarch,
    /// Constant Cholesky factor from full-sample regressions.
    Cgarch,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Scgarch => "scgarch",
            ModelKind::Cgarch => "cgarch",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scgarch" => Ok(ModelKind::Scgarch),
            "cgarch" => Ok(ModelKind::Cgarch),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// How the variable ordering is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingStrategy {
    /// Use the given permutation; an empty vector means the panel's own order.
    Fixed(Vec<usize>),
    /// Try every permutation; refuses dimensions above `limit`.
    BicExhaustive { limit: usize },
    /// Try the identity plus `samples - 1` random permutations.
    BicSampled { samples: usize, seed: u64 },
}

impl Default for OrderingStrategy {
    fn default() -> Self {
        OrderingStrategy::Fixed(Vec::new())
    }
}

/// Kalman-filter settings shared by every regression.
#[derive(Clone, Debug)]
pub struct KalmanSettings<S> {
    /// Prior covariance `P0 = κ I`.
    pub kappa: S,
    /// State noise `Q = q I`, used unless `q_grid` is set.
    pub q: S,
    /// When set, `q` is tuned per regression over this grid.
    pub q_grid: Option<Vec<S>>,
    /// Re-run the filter with the GARCH variance path as measurement variance.
    pub two_pass: bool,
}

impl<S: Scalar> Default for KalmanSettings<S> {
    fn default() -> Self {
        Self {
            kappa: S::of(DEFAULT_KAPPA),
            q: S::of(DEFAULT_STATE_NOISE),
            q_grid: None,
            two_pass: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScgarchConfig<S> {
    pub ordering: OrderingStrategy,
    pub kalman: KalmanSettings<S>,
    pub garch: GarchSettings<S>,
}

impl<S: Scalar> Default for ScgarchConfig<S> {
    fn default() -> Self {
        Self {
            ordering: OrderingStrategy::default(),
            kalman: KalmanSettings::default(),
            garch: GarchSettings::default(),
        }
    }
}

/// Unit lower triangular factors and innovation variances over time.
#[derive(Clone, Debug)]
pub struct CholeskyPath<S> {
    pub t_path: Vec<UnitLowerTriangular<S>>,
    pub d_path: Vec<DiagVariances<S>>,
}

impl<S: Scalar> CholeskyPath<S> {
    pub fn n(&self) -> usize {
        self.t_path.len()
    }

    pub fn p(&self) -> usize {
        self.t_path.first().map_or(0, UnitLowerTriangular::dim)
    }

    /// `φ_jk` over time.
    pub fn coefficient_path(&self, j: usize, k: usize) -> Vec<S> {
        self.t_path.iter().map(|t| t.coefficient(j, k)).collect()
    }
}

/// Output of the first estimation step.
#[derive(Clone, Debug)]
pub struct Innovations<S> {
    pub t_path: Vec<UnitLowerTriangular<S>>,
    /// `n x p`; column `j` is `ε_j`.
    pub innovations: Matrix<S>,
    /// One run per variable `j >= 1` (index `j - 1`).
    pub kalman_runs: Vec<KalmanRun<S>>,
}

#[derive(Clone, Debug)]
pub struct ScgarchFitResult<S> {
    pub model: ModelKind,
    /// `ordering[k]` is the panel column fitted in position `k`.
    pub ordering: Vec<usize>,
    /// Fitted-order labels.
    pub labels: Vec<String>,
    pub cholesky: CholeskyPath<S>,
    /// Fitted-order innovations, `n x p`.
    pub innovations: Matrix<S>,
    pub garch_fits: Vec<GarchFit<S>>,
    pub kalman_runs: Vec<KalmanRun<S>>,
    /// State noise used per regression (index `j - 1`); empty for CGARCH.
    pub state_noise: Vec<S>,
    /// `Σ_t` in the panel's original column order.
    pub cov_path: CovariancePath<S>,
    /// `Σ_j garch_loglik(ε_j)`.
    pub total_loglik: S,
}

impl<S: Scalar> ScgarchFitResult<S> {
    pub fn n(&self) -> usize {
        self.cov_path.n()
    }

    pub fn p(&self) -> usize {
        self.cov_path.p()
    }

    pub fn bic(&self) -> S {
        bic(self.total_loglik, self.n(), self.p())
    }

    pub fn all_converged(&self) -> bool {
        self.garch_fits.iter().all(|f| f.converged)
    }
}

/// `n p ln(2π) - total_loglik + 3p ln(n)`: the Gaussian BIC of a fit whose
/// constant-free log-likelihood is `total_loglik`, counting three GARCH
/// parameters per series.
pub fn bic<S: Scalar>(total_loglik: S, n: usize, p: usize) -> S {
    let (nf, pf) = (S::of_usize(n), S::of_usize(p));
    let ln_2pi = (S::of(2.0) * S::PI()).ln();
    nf * pf * ln_2pi - total_loglik + S::of(3.0) * pf * nf.ln()
}

/// Builds the per-regression Kalman configurations: zero prior mean,
/// `P0 = κ I`, `Q = q I` (tuned over `q_grid` when set), and the full-sample
/// least-squares residual variance as measurement variance.
pub fn kalman_configs<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    settings: &KalmanSettings<S>,
) -> Result<Vec<KalmanConfig<S>>> {
    (1..panel.p())
        .into_par_iter()
        .map(|j| {
            let x = panel.predecessors(j);
            let y = panel.column(j);
            let (_, resid_var) =
                least_squares(&y, &x).map_err(|e| Error::pipeline("regression", j, e))?;
            let meas_var = if resid_var > S::zero() {
                resid_var
            } else {
                S::of(1e-12) * panel.second_moment()[(j, j)].max(S::min_positive_value())
            };
            let cfg = KalmanConfig::isotropic(j, settings.kappa, settings.q, meas_var)
                .map_err(|e| Error::pipeline("kalman-config", j, e))?;
            match &settings.q_grid {
                Some(grid) => {
                    let q = tune_state_noise(&y, &x, &cfg, grid)
                        .map_err(|e| Error::pipeline("tune-state-noise", j, e))?;
                    Ok(cfg.with_state_noise(q))
                }
                None => Ok(cfg),
            }
        })
        .collect()
}

/// First estimation step with Kalman-filtered coefficients.
///
/// `kalman_cfgs[j - 1]` drives the regression of column `j` on columns `0..j`.
pub fn extract_innovations<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kalman_cfgs: &[KalmanConfig<S>],
) -> Result<Innovations<S>> {
    extract_innovations_inner(panel, kalman_cfgs, None)
}

/// As [`extract_innovations`], with measurement variances `meas_vars[j - 1][t]`.
pub fn extract_innovations_with_variances<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kalman_cfgs: &[KalmanConfig<S>],
    meas_vars: &[Vec<S>],
) -> Result<Innovations<S>> {
    extract_innovations_inner(panel, kalman_cfgs, Some(meas_vars))
}

fn extract_innovations_inner<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kalman_cfgs: &[KalmanConfig<S>],
    meas_vars: Option<&[Vec<S>]>,
) -> Result<Innovations<S>> {
    let (n, p) = (panel.n(), panel.p());
    if kalman_cfgs.len() != p - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} Kalman configurations for {p} variables",
            kalman_cfgs.len()
        )));
    }
    if let Some(v) = meas_vars {
        if v.len() != p - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} variance paths for {p} variables",
                v.len()
            )));
        }
    }
    let runs: Vec<KalmanRun<S>> = (1..p)
        .into_par_iter()
        .map(|j| {
            let cfg = &kalman_cfgs[j - 1];
            if cfg.state_dim() != j {
                return Err(Error::pipeline(
                    "kalman",
                    j,
                    Error::DimensionMismatch(format!(
                        "state dimension {} for variable {j}",
                        cfg.state_dim()
                    )),
                ));
            }
            let x = panel.predecessors(j);
            let y = panel.column(j);
            match meas_vars {
                Some(v) => filter_regression_with_variances(&y, &x, cfg, &v[j - 1]),
                None => filter_regression(&y, &x, cfg),
            }
            .map_err(|e| Error::pipeline("kalman", j, e))
        })
        .collect::<Result<_>>()?;

    let mut innovations = Matrix::zeros(n, p);
    let mut t_path = Vec::with_capacity(n);
    for t in 0..n {
        innovations[(t, 0)] = panel.row(t)[0];
        let mut coeffs = Vec::with_capacity(p);
        coeffs.push(Vec::new());
        for (j, run) in runs.iter().enumerate().map(|(i, r)| (i + 1, r)) {
            innovations[(t, j)] = run.innovations[t];
            coeffs.push(run.phi(t).to_vec());
        }
        t_path.push(UnitLowerTriangular::from_coefficients(&coeffs)?);
    }
    Ok(Innovations {
        t_path,
        innovations,
        kalman_runs: runs,
    })
}

/// First estimation step with a constant factor from the decomposition of
/// the sample second-moment matrix (equivalently, full-sample least squares).
pub fn static_innovations<S: Scalar>(panel: &TimeSeriesPanel<S>) -> Result<Innovations<S>> {
    let (t_static, _) =
        mcd_decompose(&panel.second_moment()).map_err(|e| Error::pipeline("static-mcd", 0, e))?;
    let (n, p) = (panel.n(), panel.p());
    let mut innovations = Matrix::zeros(n, p);
    for t in 0..n {
        let e = t_static.apply(panel.row(t))?;
        for j in 0..p {
            innovations[(t, j)] = e[j];
        }
    }
    Ok(Innovations {
        t_path: vec![t_static; n],
        innovations,
        kalman_runs: Vec::new(),
    })
}

fn column<S: Scalar>(m: &Matrix<S>, j: usize) -> Vec<S> {
    (0..m.rows()).map(|t| m[(t, j)]).collect()
}

fn fit_garch_columns<S: Scalar>(
    innovations: &Matrix<S>,
    settings: &GarchSettings<S>,
) -> Result<Vec<GarchFit<S>>> {
    (0..innovations.cols())
        .into_par_iter()
        .map(|j| garch_fit_with(&column(innovations, j), settings).map_err(|e| Error::pipeline("garch", j, e)))
        .collect()
}

/// Fits the SCGARCH model, resolving the ordering from `config.ordering`.
pub fn fit_scgarch<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    config: &ScgarchConfig<S>,
) -> Result<ScgarchFitResult<S>> {
    fit_model(panel, ModelKind::Scgarch, config)
}

/// Fits the constant-factor CGARCH baseline.
pub fn fit_cgarch<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    config: &ScgarchConfig<S>,
) -> Result<ScgarchFitResult<S>> {
    fit_model(panel, ModelKind::Cgarch, config)
}

pub fn fit_model<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kind: ModelKind,
    config: &ScgarchConfig<S>,
) -> Result<ScgarchFitResult<S>> {
    let ordering = match &config.ordering {
        OrderingStrategy::Fixed(perm) if perm.is_empty() => (0..panel.p()).collect(),
        OrderingStrategy::Fixed(perm) => perm.clone(),
        _ => order_by_bic(panel, kind, config)?.permutation,
    };
    fit_with_ordering(panel, kind, &ordering, config)
}

/// Fits `kind` with variable `ordering[k]` placed in position `k`.
pub fn fit_with_ordering<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kind: ModelKind,
    ordering: &[usize],
    config: &ScgarchConfig<S>,
) -> Result<ScgarchFitResult<S>> {
    validate_permutation(ordering, panel.p())?;
    if panel.n() < MIN_FIT_LEN {
        return Err(Error::SeriesTooShort {
            len: panel.n(),
            min: MIN_FIT_LEN,
        });
    }
    let fitted = panel.permuted(ordering)?;

    let (mut step1, cfgs) = match kind {
        ModelKind::Scgarch => {
            let cfgs = kalman_configs(&fitted, &config.kalman)?;
            (extract_innovations(&fitted, &cfgs)?, cfgs)
        }
        ModelKind::Cgarch => (static_innovations(&fitted)?, Vec::new()),
    };
    let mut garch_fits = fit_garch_columns(&step1.innovations, &config.garch)?;

    if kind == ModelKind::Scgarch && config.kalman.two_pass && fitted.p() > 1 {
        let var_paths: Vec<Vec<S>> = garch_fits[1..].iter().map(|f| f.sigma2_path.clone()).collect();
        step1 = extract_innovations_with_variances(&fitted, &cfgs, &var_paths)?;
        garch_fits = fit_garch_columns(&step1.innovations, &config.garch)?;
    }

    let n = fitted.n();
    let mut d_path = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    let back = invert_permutation(ordering);
    for t in 0..n {
        let d = DiagVariances::new(garch_fits.iter().map(|f| f.sigma2_path[t]).collect())
            .map_err(|e| Error::pipeline("assemble", t, e))?;
        let sigma = mcd_reconstruct(&step1.t_path[t], &d)?;
        if let Err(e) = sigma.cholesky() {
            return Err(Error::pipeline("assemble", t, e));
        }
        sigmas.push(sigma.permuted(&back));
        d_path.push(d);
    }
    let total_loglik = garch_fits.iter().map(|f| f.loglik).sum();

    Ok(ScgarchFitResult {
        model: kind,
        ordering: ordering.to_vec(),
        labels: fitted.labels().to_vec(),
        cholesky: CholeskyPath {
            t_path: step1.t_path,
            d_path,
        },
        innovations: step1.innovations,
        garch_fits,
        kalman_runs: step1.kalman_runs,
        state_noise: cfgs.iter().map(|c| c.q[(0, 0)]).collect(),
        cov_path: CovariancePath::new(sigmas)?,
        total_loglik,
    })
}

/// `-Σ_t (ln|Σ_t| + Y_t' Σ_t^{-1} Y_t)` evaluated directly on the covariance path.
pub fn gaussian_loglik_direct<S: Scalar>(
    cov_path: &CovariancePath<S>,
    panel: &TimeSeriesPanel<S>,
) -> Result<S> {
    if cov_path.n() != panel.n() || cov_path.p() != panel.p() {
        return Err(Error::DimensionMismatch(format!(
            "path is {}x{} but panel is {}x{}",
            cov_path.n(),
            cov_path.p(),
            panel.n(),
            panel.p()
        )));
    }
    let mut total = S::zero();
    for (t, sigma) in cov_path.iter().enumerate() {
        let ch = sigma.cholesky()?;
        total -= ch.log_det() + ch.quad_form_inv(panel.row(t))?;
    }
    Ok(total)
}

/// Ordering search outcome.
#[derive(Clone, Debug)]
pub struct OrderSelection<S> {
    pub permutation: Vec<usize>,
    pub bic: S,
    /// Every candidate with its BIC, or `None` if its fit failed.
    pub candidates: Vec<(Vec<usize>, Option<S>)>,
}

fn factorial(p: usize) -> Option<usize> {
    (1..=p).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Chooses the variable ordering with the smallest BIC.
///
/// Ties go to the lexicographically smallest permutation.
pub fn order_by_bic<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    kind: ModelKind,
    config: &ScgarchConfig<S>,
) -> Result<OrderSelection<S>> {
    let p = panel.p();
    let mut candidates: Vec<Vec<usize>> = match &config.ordering {
        OrderingStrategy::Fixed(perm) if perm.is_empty() => vec![(0..p).collect()],
        OrderingStrategy::Fixed(perm) => vec![perm.clone()],
        OrderingStrategy::BicExhaustive { limit } => {
            if p > *limit {
                return Err(Error::TooManyPermutations {
                    count: factorial(p).unwrap_or(usize::MAX),
                    limit: *limit,
                });
            }
            (0..p).permutations(p).collect()
        }
        OrderingStrategy::BicSampled { samples, seed } => {
            let total = factorial(p).unwrap_or(usize::MAX);
            let want = (*samples).max(1).min(total);
            let mut rng = rng_from_seed(*seed);
            let mut out: Vec<Vec<usize>> = vec![(0..p).collect()];
            let mut attempts = 0usize;
            while out.len() < want && attempts < want.saturating_mul(50) {
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(&mut rng);
                if !out.contains(&perm) {
                    out.push(perm);
                }
                attempts += 1;
            }
            out
        }
    };
    candidates.sort();

    let fixed = ScgarchConfig {
        ordering: OrderingStrategy::Fixed(Vec::new()),
        ..config.clone()
    };
    let scored: Vec<(Vec<usize>, Option<S>)> = candidates
        .into_par_iter()
        .map(|perm| {
            let score = fit_with_ordering(panel, kind, &perm, &fixed)
                .ok()
                .map(|fit| fit.bic())
                .filter(|b| b.is_finite());
            (perm, score)
        })
        .collect();

    let mut best: Option<(&Vec<usize>, S)> = None;
    for (perm, score) in &scored {
        if let Some(b) = *score {
            if best.as_ref().map_or(true, |(_, bb)| b < *bb) {
                best = Some((perm, b));
            }
        }
    }
    let (perm, b) = best.ok_or_else(|| {
        Error::pipeline(
            "order-by-bic",
            0,
            Error::InvalidArgument("every candidate ordering failed to fit".into()),
        )
    })?;
    Ok(OrderSelection {
        permutation: perm.clone(),
        bic: b,
        candidates: scored.clone(),
    })
}
