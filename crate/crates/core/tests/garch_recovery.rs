mod common;

use rand::Rng;
use rayon::prelude::*;
use scgarch::garch::{garch11_loglik_grad, transformed_objective};
use scgarch::optim::numerical_gradient;
use scgarch::simgen::{rng_from_seed, simulate_garch11, standard_normals};
use scgarch::{garch_fit, garch_loglik, Error, GarchOrder, GarchParams};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[test]
fn recovers_simulated_parameters() {
    let truth = GarchParams::garch11(0.1_f64, 0.1, 0.8).unwrap();
    let errs: Vec<[f64; 3]> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_from_seed(seed);
            let (eps, _) = simulate_garch11(&truth, 2000, 500, &mut rng).unwrap();
            let fit = garch_fit(&eps, GarchOrder::GARCH11).unwrap();
            [
                (fit.params.omega - 0.1).abs(),
                (fit.params.alpha1() - 0.1).abs(),
                (fit.params.beta1() - 0.8).abs(),
            ]
        })
        .collect();
    for k in 0..3 {
        let m = common::median(errs.iter().map(|e| e[k]).collect());
        assert!(m < 0.1, "parameter {k}: median error {m}");
    }
}

#[test]
fn iid_data_recovers_its_variance() {
    let v: f64 = 2.5;
    let ratios: Vec<f64> = (0..20u64)
        .map(|seed| {
            let mut rng = rng_from_seed(7000 + seed);
            let eps: Vec<f64> = standard_normals::<f64>(&mut rng, 2000).iter().map(|z| z * v.sqrt()).collect();
            let fit = garch_fit(&eps, GarchOrder::GARCH11).unwrap();
            fit.params.unconditional_variance().unwrap() / v
        })
        .collect();
    let m = common::median(ratios);
    assert!((m - 1.0).abs() < 0.15, "median ratio {m}");
}

#[test]
fn long_run_variance_matches_formula() {
    let p = GarchParams::garch11(0.1_f64, 0.1, 0.8).unwrap();
    let (_, s2) = simulate_garch11(&p, 100_000, 1000, &mut rng_from_seed(3)).unwrap();
    let mean = s2.iter().sum::<f64>() / s2.len() as f64;
    assert!((mean / 1.0 - 1.0).abs() < 0.05, "mean sigma2 {mean}");
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = common::rng(21);
    let eps = standard_normals::<f64>(&mut rng_from_seed(22), 300);
    for _ in 0..20 {
        let omega = rng.random_range(0.01..1.0);
        let alpha = rng.random_range(0.01..0.4);
        let beta = rng.random_range(0.01..(0.98 - alpha));
        let (_, g) = garch11_loglik_grad(omega, alpha, beta, &eps, 1.0);
        let fd = numerical_gradient(
            |x: &[f64]| garch11_loglik_grad(x[0], x[1], x[2], &eps, 1.0).0,
            &[omega, alpha, beta],
            1e-6,
        );
        for k in 0..3 {
            assert!(rel_err(g[k], fd[k]) < 1e-4, "natural {k}: {} vs {}", g[k], fd[k]);
        }

        let z = [rng.random_range(-3.0..1.0), rng.random_range(-2.0..4.0), rng.random_range(-3.0..3.0)];
        let (_, gz) = transformed_objective(&z, &eps, 1.0);
        let fdz = numerical_gradient(|x: &[f64]| transformed_objective(x, &eps, 1.0).0, &z, 1e-6);
        for k in 0..3 {
            assert!(
                rel_err(gz[k], fdz[k]) < 1e-4 || (gz[k] - fdz[k]).abs() < 1e-8,
                "transformed {k}: {} vs {}",
                gz[k],
                fdz[k]
            );
        }
    }
}

#[test]
fn optimizer_trace_improves_and_loglik_is_consistent() {
    let truth = GarchParams::garch11(0.2_f64, 0.15, 0.7).unwrap();
    for seed in 0..10 {
        let (eps, _) = simulate_garch11(&truth, 800, 200, &mut rng_from_seed(40 + seed)).unwrap();
        let fit = garch_fit(&eps, GarchOrder::GARCH11).unwrap();
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
        let direct = garch_loglik(&fit.params, &eps, fit.sigma2_init).unwrap();
        assert!((direct - fit.loglik).abs() < 1e-10);
        assert!(fit.sigma2_path.iter().all(|&s| s > 0.0));
        assert!(fit.params.persistence() < 1.0 - 1e-6 + 1e-15);
    }
}

#[test]
fn rejects_degenerate_and_short_series() {
    assert!(matches!(garch_fit::<f64>(&[1.5; 100], GarchOrder::GARCH11), Err(Error::DegenerateSeries)));
    assert!(matches!(
        garch_fit(&[1.0_f64, -1.0, 0.5], GarchOrder::GARCH11),
        Err(Error::SeriesTooShort { .. })
    ));
}
