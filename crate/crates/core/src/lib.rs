//! Time-varying covariance matrices via the modified Cholesky decomposition.
//!
//! A `p`-variate panel `Y_t` is whitened as `T_t Y_t = ε_t`, where the unit
//! lower triangular `T_t` holds negated coefficients of the regressions of
//! each variable on its predecessors. The coefficients follow random walks
//! and are tracked with a Kalman filter; each innovation series `ε_j` gets a
//! GARCH(1,1) variance `σ²_jt`. The covariance estimate
//! `Σ_t = T_t^{-1} D_t T_t'^{-1}` with `D_t = diag(σ²_1t, .., σ²_pt)` is
//! positive definite at every `t` by construction.
//!
//! Every estimator is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.
//!
//! ```no_run
//! use scgarch::{fit_scgarch, generate_sim2, ScgarchConfig, Sim2Config};
//!
//! let data = generate_sim2::<f64>(&Sim2Config::default()).unwrap();
//! let fit = fit_scgarch(&data.panel, &ScgarchConfig::default()).unwrap();
//! let corr = fit.cov_path.to_correlation().unwrap();
//! println!("rho_21 at t=200: {}", corr.at(199)[(1, 0)]);
//! ```

pub mod error;
pub mod eval;
pub mod garch;
pub mod io;
pub mod kalman;
pub mod linalg;
pub mod mcd;
pub mod model;
pub mod optim;
pub mod panel;
pub mod scalar;
pub mod simgen;

pub use error::{Error, Result};
pub use eval::{
    loss_paths, moving_block_proxy, select_block_size, BlockSelection, ComparisonScale, EvalConfig,
    EvalReport,
};
pub use garch::{garch_filter, garch_fit, garch_loglik, GarchFit, GarchOrder, GarchParams, GarchSettings};
pub use kalman::{filter_regression, kalman_predict, kalman_update, tune_state_noise, KalmanConfig, KalmanRun};
pub use linalg::{Matrix, SymMatrix};
pub use mcd::{cov_to_corr, mcd_decompose, mcd_reconstruct, DiagVariances, UnitLowerTriangular};
pub use model::{
    extract_innovations, fit_cgarch, fit_model, fit_scgarch, order_by_bic, CholeskyPath, KalmanSettings,
    ModelKind, OrderingStrategy, ScgarchConfig, ScgarchFitResult,
};
pub use panel::{CovariancePath, TimeSeriesPanel};
pub use scalar::Scalar;
pub use simgen::{generate_sim1, generate_sim2, sample_mvn, Sim1Config, Sim2Config};

pub type Matrix64 = Matrix<f64>;
pub type SymMatrix64 = SymMatrix<f64>;
pub type UnitLowerTriangular64 = UnitLowerTriangular<f64>;
pub type DiagVariances64 = DiagVariances<f64>;
pub type KalmanConfig64 = KalmanConfig<f64>;
pub type KalmanRun64 = KalmanRun<f64>;
pub type GarchParams64 = GarchParams<f64>;
pub type GarchFit64 = GarchFit<f64>;
pub type Panel64 = TimeSeriesPanel<f64>;
pub type CovariancePath64 = CovariancePath<f64>;
pub type ScgarchConfig64 = ScgarchConfig<f64>;
pub type ScgarchFit64 = ScgarchFitResult<f64>;
pub type EvalReport64 = EvalReport<f64>;

pub type Matrix32 = Matrix<f32>;
pub type SymMatrix32 = SymMatrix<f32>;
pub type Panel32 = TimeSeriesPanel<f32>;
pub type CovariancePath32 = CovariancePath<f32>;
pub type ScgarchFit32 = ScgarchFitResult<f32>;
