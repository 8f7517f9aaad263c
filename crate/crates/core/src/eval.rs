//! Accuracy measures for covariance paths and the moving-block proxy used
//! when the true covariance is unobserved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{outer, SymMatrix};
use crate::panel::{CovariancePath, TimeSeriesPanel};
use crate::scalar::Scalar;

/// Default relative stabilization threshold for block-size selection.
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ComparisonScale {
    #[default]
    Covariance,
    Correlation,
}

impl ComparisonScale {
    pub fn name(self) -> &'static str {
        match self {
            ComparisonScale::Covariance => "covariance",
            ComparisonScale::Correlation => "correlation",
        }
    }
}

impl std::str::FromStr for ComparisonScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "covariance" | "cov" => Ok(ComparisonScale::Covariance),
            "correlation" | "corr" => Ok(ComparisonScale::Correlation),
            other => Err(Error::InvalidArgument(format!("unknown scale {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    /// Odd moving-block width, at least 3.
    pub block_size: usize,
    pub scale: ComparisonScale,
}

impl EvalConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        validate_block(self.block_size, n)
    }
}

/// Per-time and averaged absolute and squared errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport<S> {
    pub mae_path: Vec<S>,
    pub mse_path: Vec<S>,
    pub mae: S,
    pub mse: S,
}

fn validate_block(q: usize, n: usize) -> Result<()> {
    if q < 3 || q % 2 == 0 {
        return Err(Error::BlockTooSmall { q });
    }
    if q > n {
        return Err(Error::BlockTooLarge { q, n });
    }
    Ok(())
}

/// Moving-block second moments: `Σ̃_t` averages `Y_s Y_s'` over the `q`
/// points centred on `t`. Near the ends the window is shifted inward rather
/// than truncated, so every `Σ̃_t` averages exactly `q` outer products and
/// `q = n` gives the full-sample moment at every `t`.
pub fn moving_block_proxy<S: Scalar>(panel: &TimeSeriesPanel<S>, q: usize) -> Result<CovariancePath<S>> {
    let n = panel.n();
    validate_block(q, n)?;
    let half = (q - 1) / 2;
    let p = panel.p();
    let sigmas = (0..n)
        .into_par_iter()
        .map(|t| {
            let lo = t.saturating_sub(half).min(n - q);
            let hi = lo + q - 1;
            let count = S::of_usize(q);
            SymMatrix::from_lower_fn(p, |i, j| {
                (lo..=hi)
                    .map(|s| {
                        let y = panel.row(s);
                        y[i] * y[j]
                    })
                    .sum::<S>()
                    / count
            })
        })
        .collect();
    CovariancePath::new(sigmas)
}

/// Path of single-observation outer products `Y_t Y_t'`.
pub fn observed_outer_products<S: Scalar>(panel: &TimeSeriesPanel<S>) -> Result<CovariancePath<S>> {
    CovariancePath::new((0..panel.n()).map(|t| outer(panel.row(t))).collect())
}

/// `MAE_t = (1/p²) Σ_ij |Σ̂_ij - Σ_ij|` and `MSE_t = (1/p²) Σ_ij (Σ̂_ij - Σ_ij)²`
/// over all `p²` ordered entries, plus their time averages.
pub fn loss_paths<S: Scalar>(
    estimate: &CovariancePath<S>,
    truth: &CovariancePath<S>,
    scale: ComparisonScale,
) -> Result<EvalReport<S>> {
    if estimate.n() != truth.n() || estimate.p() != truth.p() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} steps with p = {}, truth has {} steps with p = {}",
            estimate.n(),
            estimate.p(),
            truth.n(),
            truth.p()
        )));
    }
    let (est, tru);
    let (est, tru) = match scale {
        ComparisonScale::Covariance => (estimate, truth),
        ComparisonScale::Correlation => {
            est = estimate.to_correlation()?;
            tru = truth.to_correlation()?;
            (&est, &tru)
        }
    };
    let p = est.p();
    let denom = S::of_usize(p * p);
    let mut mae_path = Vec::with_capacity(est.n());
    let mut mse_path = Vec::with_capacity(est.n());
    for (a, b) in est.iter().zip(tru.iter()) {
        let diffs = a.as_matrix().sub(b.as_matrix())?;
        let (mut abs, mut sq) = (S::zero(), S::zero());
        for &d in diffs.as_slice() {
            abs += d.abs();
            sq += d * d;
        }
        mae_path.push(abs / denom);
        mse_path.push(sq / denom);
    }
    let n = S::of_usize(mae_path.len());
    let mae = mae_path.iter().copied().sum::<S>() / n;
    let mse = mse_path.iter().copied().sum::<S>() / n;
    Ok(EvalReport {
        mae_path,
        mse_path,
        mae,
        mse,
    })
}

/// One candidate block size in the selection table.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagnostics<S> {
    pub q: usize,
    pub mae: S,
    pub mse: S,
    /// `|Δ(q_k) - Δ(q_{k-1})|`; `None` for the first candidate.
    pub diff_mae: Option<S>,
    pub diff_mse: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSelection<S> {
    pub q_star: usize,
    /// False when no candidate met the stabilization rule and the last
    /// candidate was returned instead.
    pub stable: bool,
    pub threshold: S,
    pub table: Vec<BlockDiagnostics<S>>,
}

/// Chooses the moving-block width.
///
/// For each candidate `q_k` the average MAE and MSE between the proxy and
/// the observed outer products are computed; the first `q_k` whose change
/// from `q_{k-1}` is below `threshold_rel * Δ(q_1)` for both losses wins.
pub fn select_block_size<S: Scalar>(
    panel: &TimeSeriesPanel<S>,
    candidates: &[usize],
    threshold_rel: S,
) -> Result<BlockSelection<S>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no block-size candidates".into()));
    }
    if candidates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("block-size candidates must be strictly increasing".into()));
    }
    for &q in candidates {
        validate_block(q, panel.n())?;
    }
    let observed = observed_outer_products(panel)?;
    let losses: Vec<(S, S)> = candidates
        .par_iter()
        .map(|&q| {
            let proxy = moving_block_proxy(panel, q)?;
            let r = loss_paths(&proxy, &observed, ComparisonScale::Covariance)?;
            Ok((r.mae, r.mse))
        })
        .collect::<Result<_>>()?;

    let mut table = Vec::with_capacity(candidates.len());
    for (k, (&q, &(mae, mse))) in candidates.iter().zip(&losses).enumerate() {
        let (diff_mae, diff_mse) = if k == 0 {
            (None, None)
        } else {
            let (pm, ps) = losses[k - 1];
            (Some((mae - pm).abs()), Some((mse - ps).abs()))
        };
        table.push(BlockDiagnostics {
            q,
            mae,
            mse,
            diff_mae,
            diff_mse,
        });
    }
    if table.len() == 1 {
        return Ok(BlockSelection {
            q_star: candidates[0],
            stable: true,
            threshold: threshold_rel,
            table,
        });
    }
    let (mae1, mse1) = losses[0];
    let stable_at = table.iter().position(|row| match (row.diff_mae, row.diff_mse) {
        (Some(dm), Some(ds)) => dm < threshold_rel * mae1 && ds < threshold_rel * mse1,
        _ => false,
    });
    Ok(match stable_at {
        Some(k) => BlockSelection {
            q_star: candidates[k],
            stable: true,
            threshold: threshold_rel,
            table,
        },
        None => BlockSelection {
            q_star: *candidates.last().unwrap_or(&candidates[0]),
            stable: false,
            threshold: threshold_rel,
            table,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn panel(cols: &[Vec<f64>]) -> TimeSeriesPanel<f64> {
        let labels = (0..cols.len()).map(|j| format!("v{j}")).collect();
        TimeSeriesPanel::from_columns(cols, labels).unwrap()
    }

    #[test]
    fn hand_window_sum() {
        let p = panel(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
        let proxy = moving_block_proxy(&p, 3).unwrap();
        assert!((proxy.at(2)[(0, 0)] - 29.0 / 3.0).abs() < 1e-14);
        // Edge windows shift inward: (1 + 4 + 9) / 3 and (9 + 16 + 25) / 3.
        assert!((proxy.at(0)[(0, 0)] - 14.0 / 3.0).abs() < 1e-14);
        assert!((proxy.at(1)[(0, 0)] - 14.0 / 3.0).abs() < 1e-14);
        assert!((proxy.at(4)[(0, 0)] - 50.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_panel() {
        let p = panel(&[vec![1.5; 9], vec![-2.0; 9]]);
        let proxy = moving_block_proxy(&p, 5).unwrap();
        for s in proxy.iter() {
            assert!((s[(0, 0)] - 2.25).abs() < 1e-14);
            assert!((s[(0, 1)] + 3.0).abs() < 1e-14);
            assert!((s[(1, 1)] - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn full_window_is_batch_moment() {
        let cols = vec![
            (0..7).map(|t| (t as f64 * 0.7).sin()).collect::<Vec<_>>(),
            (0..7).map(|t| (t as f64 * 1.3).cos()).collect(),
        ];
        let p = panel(&cols);
        let proxy = moving_block_proxy(&p, 7).unwrap();
        let batch = p.second_moment();
        for s in proxy.iter() {
            assert!(s.as_matrix().max_abs_diff(batch.as_matrix()) < 1e-12);
        }
    }

    #[test]
    fn block_validation() {
        let p = panel(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
        assert!(matches!(moving_block_proxy(&p, 1), Err(Error::BlockTooSmall { .. })));
        assert!(matches!(moving_block_proxy(&p, 4), Err(Error::BlockTooSmall { .. })));
        assert!(matches!(moving_block_proxy(&p, 7), Err(Error::BlockTooLarge { .. })));
    }

    #[test]
    fn hand_loss_example() {
        let est = CovariancePath::new(vec![SymMatrix::from_rows(&[vec![1.1_f64, 0.3], vec![0.3, 2.3]]).unwrap()]).unwrap();
        let tru = CovariancePath::new(vec![SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap()]).unwrap();
        // Differences (0.1, -0.2, -0.2, 0.3).
        let r = loss_paths(&est, &tru, ComparisonScale::Covariance).unwrap();
        assert!((r.mae - 0.2).abs() < 1e-15);
        assert!((r.mse - 0.045).abs() < 1e-15);
        let z = loss_paths(&est, &est, ComparisonScale::Covariance).unwrap();
        assert_eq!((z.mae, z.mse), (0.0, 0.0));
    }

    #[test]
    fn correlation_scale_ignores_diagonal_congruence() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let b = SymMatrix::from_rows(&[vec![1.5, -0.2], vec![-0.2, 1.0]]).unwrap();
        let d = Matrix::from_diag(&[2.0, 0.5]);
        let congr = |s: &SymMatrix<f64>| d.matmul(s.as_matrix()).unwrap().matmul(&d).unwrap().symmetrized().unwrap();
        let base = loss_paths(
            &CovariancePath::new(vec![a.clone()]).unwrap(),
            &CovariancePath::new(vec![b.clone()]).unwrap(),
            ComparisonScale::Correlation,
        )
        .unwrap();
        let scaled = loss_paths(
            &CovariancePath::new(vec![congr(&a)]).unwrap(),
            &CovariancePath::new(vec![congr(&b)]).unwrap(),
            ComparisonScale::Correlation,
        )
        .unwrap();
        assert!((base.mae - scaled.mae).abs() < 1e-14);
        assert!((base.mse - scaled.mse).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CovariancePath::new(vec![SymMatrix::<f64>::identity(2)]).unwrap();
        let b = CovariancePath::new(vec![SymMatrix::identity(2), SymMatrix::identity(2)]).unwrap();
        assert!(matches!(loss_paths(&a, &b, ComparisonScale::Covariance), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn single_candidate_is_forced() {
        let p = panel(&[(0..20).map(|t| (t as f64).sin()).collect()]);
        let sel = select_block_size(&p, &[5], 0.05).unwrap();
        assert_eq!(sel.q_star, 5);
        assert!(sel.stable);
        assert!(select_block_size(&p, &[7, 5], 0.05).is_err());
        assert!(select_block_size(&p, &[], 0.05).is_err());
    }

    #[test]
    fn unstable_returns_last_candidate() {
        let p = panel(&[(0..40).map(|t| (t as f64 * 0.37).sin() * (1.0 + t as f64)).collect()]);
        let sel = select_block_size(&p, &[3, 5, 7], 0.0).unwrap();
        assert!(!sel.stable);
        assert_eq!(sel.q_star, 7);
        assert_eq!(sel.table.len(), 3);
        assert!(sel.table[0].diff_mae.is_none());
    }
}
