//! BFGS minimization with a backtracking Armijo line search.

use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct BfgsSettings<S> {
    pub max_iter: usize,
    /// Stop when the gradient's Euclidean norm falls below this.
    pub grad_tol: S,
    /// Stop when an accepted step moves no coordinate by more than this.
    pub step_tol: S,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: S,
    pub max_backtracks: usize,
}

impl<S: Scalar> Default for BfgsSettings<S> {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: S::of(1e-6),
            step_tol: S::of(1e-9),
            armijo: S::of(1e-4),
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum<S> {
    pub x: Vec<S>,
    pub value: S,
    pub grad: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step, starting with `f(x0)`.
    pub trace: Vec<S>,
}

fn norm<S: Scalar>(v: &[S]) -> S {
    dot(v, v).sqrt()
}

/// Minimizes `f`, which returns the objective and its gradient.
///
/// Non-finite objective values are treated as infeasible and rejected by the
/// line search, so every accepted step strictly decreases the objective.
pub fn minimize_bfgs<S, F>(mut f: F, x0: &[S], settings: &BfgsSettings<S>) -> Minimum<S>
where
    S: Scalar,
    F: FnMut(&[S]) -> (S, Vec<S>),
{
    let dim = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    let mut trace = vec![fx];
    let mut h = Matrix::<S>::identity(dim);
    let mut converged = false;
    let mut iterations = 0;
    let mut first_step = true;

    if !fx.is_finite() {
        return Minimum {
            x,
            value: fx,
            grad: g,
            iterations,
            converged,
            trace,
        };
    }

    while iterations < settings.max_iter {
        if norm(&g) < settings.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<S> = h.matvec(&g).unwrap_or_else(|_| g.clone());
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope = dot(&g, &dir);
        if !(slope < S::zero()) {
            h = Matrix::identity(dim);
            dir = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &dir);
        }

        let mut step = S::one();
        let mut accepted = None;
        for _ in 0..settings.max_backtracks {
            let cand: Vec<S> = x.iter().zip(&dir).map(|(&xi, &di)| xi + step * di).collect();
            let (fc, gc) = f(&cand);
            if fc.is_finite() && fc <= fx + settings.armijo * step * slope && fc < fx {
                accepted = Some((cand, fc, gc));
                break;
            }
            step = step * S::of(0.5);
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No decrease along the search direction: at a minimum up to rounding.
            converged = norm(&g) < settings.grad_tol.sqrt();
            break;
        };

        let s: Vec<S> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<S> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let max_move = s.iter().fold(S::zero(), |m, v| m.max(v.abs()));
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);

        let sy = dot(&s, &y);
        if sy > S::of(1e-12) * norm(&s) * norm(&y) {
            if first_step {
                // Scale the initial inverse Hessian to the observed curvature.
                let scale = sy / dot(&y, &y);
                h = Matrix::identity(dim).scale(scale);
                first_step = false;
            }
            let hy = h.matvec(&y).unwrap_or_else(|_| y.clone());
            let yhy = dot(&y, &hy);
            let rho = sy.recip();
            let coef = (S::one() + yhy * rho) * rho;
            for i in 0..dim {
                for j in 0..dim {
                    h[(i, j)] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }

        if max_move < settings.step_tol {
            converged = true;
            break;
        }
    }
    if !converged && norm(&g) < settings.grad_tol {
        converged = true;
    }

    Minimum {
        x,
        value: fx,
        grad: g,
        iterations,
        converged,
        trace,
    }
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn numerical_gradient<S: Scalar>(mut f: impl FnMut(&[S]) -> S, x: &[S], h: S) -> Vec<S> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (S::of(2.0) * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let m = minimize_bfgs(rosenbrock, &[-1.2, 1.0], &BfgsSettings::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
        assert!(m.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn quadratic_in_one_step_direction() {
        let f = |x: &[f64]| {
            let v = 3.0 * (x[0] - 2.0).powi(2) + 0.5 * (x[1] + 1.0).powi(2);
            (v, vec![6.0 * (x[0] - 2.0), (x[1] + 1.0)])
        };
        let m = minimize_bfgs(f, &[0.0, 0.0], &BfgsSettings::default());
        assert!(m.converged);
        assert!((m.x[0] - 2.0).abs() < 1e-7 && (m.x[1] + 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_non_finite_region() {
        // log barrier: infinite for x <= 0; minimum at x = 1.
        let f = |x: &[f64]| {
            if x[0] <= 0.0 {
                (f64::INFINITY, vec![0.0])
            } else {
                (x[0] - x[0].ln(), vec![1.0 - 1.0 / x[0]])
            }
        };
        let m = minimize_bfgs(f, &[5.0], &BfgsSettings::default());
        assert!((m.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn finite_differences() {
        let g = numerical_gradient(|x: &[f64]| rosenbrock(x).0, &[0.3, 0.7], 1e-6);
        let exact = rosenbrock(&[0.3, 0.7]).1;
        for (a, b) in g.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
