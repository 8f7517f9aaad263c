mod common;

use scgarch::linalg::Matrix;
use scgarch::simgen::{rng_from_seed, sample_mvn_with};
use scgarch::{
    filter_regression, generate_sim1, generate_sim2, loss_paths, moving_block_proxy, sample_mvn,
    ComparisonScale, KalmanConfig, Sim1Config, Sim2Config, SymMatrix,
};

#[test]
fn mvn_sample_covariance_converges() {
    let sigma = SymMatrix::from_rows(&[vec![2.0_f64, 1.0], vec![1.0, 3.0]]).unwrap();
    let mut rng = rng_from_seed(8);
    let n = 100_000;
    let mut acc = [[0.0; 2]; 2];
    for _ in 0..n {
        let x = sample_mvn_with(&mut rng, &[0.0, 0.0], &sigma).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                acc[i][j] += x[i] * x[j] / n as f64;
            }
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            assert!((acc[i][j] / sigma[(i, j)] - 1.0).abs() < 0.03, "entry ({i},{j}) = {}", acc[i][j]);
        }
    }
}

#[test]
fn generators_are_deterministic() {
    let s = SymMatrix::from_rows(&[vec![2.0_f64, 1.0], vec![1.0, 3.0]]).unwrap();
    assert_eq!(sample_mvn(&[0.0, 1.0], &s, 5).unwrap(), sample_mvn(&[0.0, 1.0], &s, 5).unwrap());
    let cfg = Sim1Config { n: 50, ..Default::default() };
    assert_eq!(generate_sim1::<f64>(&cfg).unwrap(), generate_sim1::<f64>(&cfg).unwrap());
    let a = generate_sim2::<f64>(&Sim2Config::default()).unwrap();
    let b = generate_sim2::<f64>(&Sim2Config::default()).unwrap();
    assert_eq!(a.panel.values().as_slice(), b.panel.values().as_slice());
    let c = generate_sim2::<f64>(&Sim2Config { seed: 2, ..Default::default() }).unwrap();
    assert_ne!(a.panel.values().as_slice(), c.panel.values().as_slice());
}

#[test]
fn sim1_without_noise_is_identified_quickly() {
    let cfg = Sim1Config { n: 500, q_true: 0.0, meas_var: 1e-10, seed: 4 };
    let d = generate_sim1::<f64>(&cfg).unwrap();
    assert!(d.phi_true.iter().all(|&p| p == d.phi_true[0]));
    let x = Matrix::from_fn(500, 1, |t, _| d.x[t]);
    let kcfg = KalmanConfig::isotropic(1, 10.0, 0.0, cfg.meas_var).unwrap();
    let run = filter_regression(&d.y, &x, &kcfg).unwrap();
    assert!((run.phi(499)[0] - d.phi_true[0]).abs() < 0.01);
    assert!((run.phi(10)[0] - d.phi_true[0]).abs() < 0.01);
}

#[test]
fn sim2_truth_follows_the_design() {
    let cfg = Sim2Config::default();
    let d = generate_sim2::<f64>(&cfg).unwrap();
    assert_eq!((d.panel.n(), d.panel.p()), (1024, 3));
    assert_eq!(d.repairs, 0);
    assert!(d.truth.all_positive_definite());
    assert_eq!(cfg.sigma_at::<f64>(0).as_matrix(), SymMatrix::from_diag(&[2.0, 3.0, 4.0]).as_matrix());
    // Index 200 holds t = 201.
    assert!((d.truth.at(200)[(1, 0)] - 1.0).abs() < 1e-4);
    assert_eq!(d.truth.at(200)[(1, 0)], (201.0_f64 / 128.0).sin());
    let s32 = d.truth.entry_path(2, 1);
    for t in 0..600 {
        assert!((s32[t] - s32[t + 402]).abs() < 0.01);
    }
}

#[test]
fn block_proxy_tracks_sim2_correlation() {
    let d = generate_sim2::<f64>(&Sim2Config { seed: 12, ..Default::default() }).unwrap();
    let proxy = moving_block_proxy(&d.panel, 65).unwrap();
    let r = loss_paths(&proxy, &d.truth, ComparisonScale::Correlation).unwrap();
    assert!(r.mae < 0.25, "MAE {}", r.mae);
}
