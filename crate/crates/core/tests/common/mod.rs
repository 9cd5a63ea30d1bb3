#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Block form `[[0, 1], [-1, 0]]` rebuilt here so tests do not lean on the
/// library's own constructor.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn uniform_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    let dir = gaussian_vector(rng, dim, 1.0);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    let scale = r / dir.norm();
    dir * scale
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `M = ‖J - AᵀJA‖_F · I + PᵀP`, admissible because the Frobenius norm
/// bounds the spectral radius of `i(J - AᵀJA)`.
pub fn admissible_noise<R: Rng>(rng: &mut R, a: &DMatrix<f64>, extra: f64) -> DMatrix<f64> {
    let dim = a.nrows();
    let j = j_matrix(dim / 2);
    let twist = &j - a.transpose() * &j * a;
    let p = gaussian_matrix(rng, dim, dim, extra);
    DMatrix::identity(dim, dim) * frobenius(&twist) + p.transpose() * p
}

/// `N = ‖AᵀJ + JA‖_F · I + PᵀP`.
pub fn admissible_rate<R: Rng>(rng: &mut R, a: &DMatrix<f64>, extra: f64) -> DMatrix<f64> {
    let dim = a.nrows();
    let j = j_matrix(dim / 2);
    let twist = a.transpose() * &j + &j * a;
    let p = gaussian_matrix(rng, dim, dim, extra);
    DMatrix::identity(dim, dim) * frobenius(&twist) + p.transpose() * p
}

/// Random symplectic matrix from single-mode squeezers, single-mode
/// rotations and two-mode mixers.
pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize, layers: usize) -> DMatrix<f64> {
    let dim = 2 * n;
    let mut s = DMatrix::identity(dim, dim);
    for _ in 0..layers {
        let k = rng.random_range(0..n);
        let mut g = DMatrix::identity(dim, dim);
        match rng.random_range(0..3) {
            0 => {
                let r = rng.random_range(0.6..1.6);
                g[(2 * k, 2 * k)] = r;
                g[(2 * k + 1, 2 * k + 1)] = 1.0 / r;
            }
            1 => {
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                g[(2 * k, 2 * k)] = th.cos();
                g[(2 * k, 2 * k + 1)] = th.sin();
                g[(2 * k + 1, 2 * k)] = -th.sin();
                g[(2 * k + 1, 2 * k + 1)] = th.cos();
            }
            _ if n > 1 => {
                let l = (k + 1 + rng.random_range(0..n - 1)) % n;
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let (c, sn) = (th.cos(), th.sin());
                for off in 0..2 {
                    let (p, q) = (2 * k + off, 2 * l + off);
                    g[(p, p)] = c;
                    g[(p, q)] = sn;
                    g[(q, p)] = -sn;
                    g[(q, q)] = c;
                }
            }
            _ => {}
        }
        s = g * s;
    }
    s
}

/// A physical Gaussian covariance `SᵀS/2 + PᵀP` (vacuum is `I/2`).
pub fn random_state_covariance<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let s = random_symplectic(rng, n, 4 * n);
    let p = gaussian_matrix(rng, 2 * n, 2 * n, 0.2);
    s.transpose() * s * 0.5 + p.transpose() * p
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
