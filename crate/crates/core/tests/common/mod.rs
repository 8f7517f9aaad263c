#![allow(dead_code)]

use rand::Rng;
use scgarch::linalg::Matrix;
use scgarch::simgen::{rng_from_seed, SimRng};
use scgarch::SymMatrix;

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `A A' + 0.1 I` with entries of `A` uniform on `[-1, 1]`.
pub fn random_pd(rng: &mut SimRng, p: usize) -> SymMatrix<f64> {
    let a = Matrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let aat = a.matmul(&a.transpose()).unwrap();
    SymMatrix::from_lower_fn(p, |i, j| aat[(i, j)] + if i == j { 0.1 } else { 0.0 })
}

pub fn rng(seed: u64) -> SimRng {
    rng_from_seed(seed)
}

/// Ordinary least squares by the normal equations, solved with Gaussian
/// elimination independent of the crate's own routines.
pub fn ols(y: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
    let k = x[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &yt) in x.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * yt;
        }
    }
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, piv);
        for r in 0..k {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..=k {
                    a[r][j] -= f * a[c][j];
                }
            }
        }
    }
    (0..k).map(|i| a[i][k] / a[i][i]).collect()
}
