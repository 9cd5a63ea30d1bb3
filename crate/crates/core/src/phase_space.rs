//! Real phase-space primitives.
//!
//! A point of `C^n` with `z_j = x_j + i y_j` corresponds to the phase-space
//! vector `(x_1, y_1, x_2, y_2, ..., x_n, y_n)` of `R^{2n}`. The symplectic
//! form `J` is block diagonal with 2x2 blocks `[[0, 1], [-1, 0]]`, so that
//! `ξᵀ J η = Im⟨z|z'⟩` for the scalar product that is conjugate linear in its
//! first argument.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, ensure_square, max_abs_complex, ComplexMatrix, RealMatrix};

/// Default relative tolerance for every positive-semidefiniteness test.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// A point of `R^{2n}` in interleaved `(x_1, y_1, ..., x_n, y_n)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    coords: DVector<f64>,
}

impl PhaseVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(coords))
    }

    pub fn from_vector(coords: DVector<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroModes);
        }
        if !coords.len().is_multiple_of(2) {
            return Err(Error::OddLength(coords.len()));
        }
        Ok(Self { coords })
    }

    pub fn zeros(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self {
            coords: DVector::zeros(2 * modes),
        })
    }

    pub fn modes(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            coords: &self.coords * t,
        }
    }
}

/// The form `J_{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    modes: usize,
    matrix: RealMatrix,
}

impl SymplecticForm {
    pub fn new(modes: usize) -> Result<Self> {
        build_symplectic_form(modes)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// `ξᵀ J η`, evaluated blockwise.
    pub fn product(&self, xi: &DVector<f64>, eta: &DVector<f64>) -> f64 {
        (0..self.modes)
            .map(|j| xi[2 * j] * eta[2 * j + 1] - xi[2 * j + 1] * eta[2 * j])
            .sum()
    }
}

pub fn build_symplectic_form(modes: usize) -> Result<SymplecticForm> {
    if modes == 0 {
        return Err(Error::ZeroModes);
    }
    let mut matrix = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        matrix[(2 * j, 2 * j + 1)] = 1.0;
        matrix[(2 * j + 1, 2 * j)] = -1.0;
    }
    Ok(SymplecticForm { modes, matrix })
}

pub fn complex_to_phase(z: &[Complex64]) -> Result<PhaseVector> {
    let coords = z.iter().flat_map(|c| [c.re, c.im]).collect();
    PhaseVector::new(coords)
}

pub fn phase_to_complex(xi: &PhaseVector) -> Vec<Complex64> {
    xi.as_slice()
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Spectrum summary of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    /// Full spectrum in ascending order.
    pub eigenvalues: Vec<f64>,
    pub is_psd: bool,
    pub tolerance: f64,
    /// Spectral norm of the symmetrized input.
    pub norm: f64,
}

impl PsdReport {
    fn from_eigenvalues(mut eigenvalues: Vec<f64>, tolerance: f64) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let min_eigenvalue = eigenvalues.first().copied().unwrap_or(0.0);
        let norm = eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        Self {
            min_eigenvalue,
            is_psd: min_eigenvalue >= -tolerance * norm.max(1.0),
            eigenvalues,
            tolerance,
            norm,
        }
    }
}

/// Positive-semidefiniteness test of a complex Hermitian matrix with the
/// relative acceptance rule `λ_min ≥ -tol · max(1, ‖H‖)`.
pub fn hermitian_psd_check(h: &ComplexMatrix, tol: f64) -> Result<PsdReport> {
    ensure_square(h)?;
    if !h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let adjoint = h.adjoint();
    let asymmetry = max_abs_complex(&(h - &adjoint));
    let tolerance = tol * max_abs_complex(h).max(1.0);
    if asymmetry > tolerance {
        return Err(Error::NotHermitian { asymmetry, tolerance });
    }
    Ok(PsdReport::from_eigenvalues(
        hermitian_eigenvalues(&((h + adjoint) * Complex64::new(0.5, 0.0))),
        tol,
    ))
}

/// Same rule for a real symmetric matrix.
pub fn symmetric_psd_check(m: &RealMatrix, tol: f64) -> Result<PsdReport> {
    let sym = crate::linalg::symmetrized(m, tol)?;
    let eig = SymmetricEigen::new(sym);
    Ok(PsdReport::from_eigenvalues(
        eig.eigenvalues.iter().copied().collect(),
        tol,
    ))
}

pub(crate) fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    if h.is_empty() {
        return Vec::new();
    }
    SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect()
}

/// `M + i S` for real `M` and real `S`, the shape of every admissibility matrix.
pub(crate) fn real_plus_i(m: &RealMatrix, s: &RealMatrix) -> Result<ComplexMatrix> {
    ensure_dim(m.nrows(), s.nrows())?;
    ensure_dim(m.ncols(), s.ncols())?;
    Ok(m.zip_map(s, Complex64::new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Cholesky;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inner_im(z: &[Complex64], w: &[Complex64]) -> f64 {
        z.iter().zip(w).map(|(a, b)| a.conj() * b).sum::<Complex64>().im
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect()
    }

    #[test]
    fn one_mode_form() {
        let j = build_symplectic_form(1).unwrap();
        assert_eq!(j.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let xi = DVector::from_vec(vec![1.0, 0.0]);
        let eta = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(j.product(&xi, &eta), 1.0);
        assert_eq!(xi.dot(&(j.matrix() * &eta)), 1.0);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(matches!(build_symplectic_form(0), Err(Error::ZeroModes)));
        assert!(PhaseVector::new(vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn form_matches_imaginary_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let j = build_symplectic_form(n).unwrap();
            for _ in 0..1000 {
                let z = random_complex(&mut rng, n);
                let w = random_complex(&mut rng, n);
                let xi = complex_to_phase(&z).unwrap();
                let eta = complex_to_phase(&w).unwrap();
                let via_matrix = xi.as_vector().dot(&(j.matrix() * eta.as_vector()));
                assert!((via_matrix - inner_im(&z, &w)).abs() <= 1e-12);
                assert!((j.product(xi.as_vector(), eta.as_vector()) - via_matrix).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn form_is_direct_sum_and_skew() {
        let block = build_symplectic_form(1).unwrap();
        for n in 1..=4 {
            let j = build_symplectic_form(n).unwrap();
            let m = j.matrix();
            assert_eq!(m.transpose(), -m.clone());
            assert_eq!(m * m, -DMatrix::<f64>::identity(2 * n, 2 * n));
            for r in 0..2 * n {
                for c in 0..2 * n {
                    let expected = if r / 2 == c / 2 {
                        block.matrix()[(r % 2, c % 2)]
                    } else {
                        0.0
                    };
                    assert_eq!(m[(r, c)], expected);
                }
            }
            let xi = DVector::from_fn(2 * n, |i, _| (i as f64).sin() + 0.3);
            assert_eq!(j.product(&xi, &xi), 0.0);
        }
    }

    #[test]
    fn complex_phase_correspondence() {
        let z = [Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0)];
        let xi = complex_to_phase(&z).unwrap();
        assert_eq!(xi.as_slice(), &[1.0, 2.0, 3.0, -1.0]);
        assert_eq!(phase_to_complex(&xi), z.to_vec());
        let zero = complex_to_phase(&[Complex64::new(0.0, 0.0); 3]).unwrap();
        assert_eq!(zero.as_slice(), &[0.0; 6]);
    }

    #[test]
    fn psd_examples() {
        let id = ComplexMatrix::identity(2, 2);
        let r = hermitian_psd_check(&id, 1e-9).unwrap();
        assert_abs_diff_eq!(r.min_eigenvalue, 1.0, epsilon = 1e-14);
        assert!(r.is_psd);

        let j = build_symplectic_form(1).unwrap();
        let h = real_plus_i(&RealMatrix::identity(2, 2), &(-j.matrix())).unwrap();
        let r = hermitian_psd_check(&h, 1e-9).unwrap();
        // eigenvalues of I - iJ are 1 ± 1
        assert_abs_diff_eq!(r.min_eigenvalue, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.eigenvalues[1], 2.0, epsilon = 1e-14);
        assert!(r.is_psd);

        let r = hermitian_psd_check(&(-id), 1e-9).unwrap();
        assert!(!r.is_psd);
    }

    #[test]
    fn psd_rejects_non_hermitian_and_nan() {
        let mut h = ComplexMatrix::identity(2, 2);
        h[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(hermitian_psd_check(&h, 1e-9), Err(Error::NotHermitian { .. })));
        h[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(hermitian_psd_check(&h, 1e-9), Err(Error::NonFinite)));
    }

    #[test]
    fn psd_agrees_with_characteristic_polynomial_on_2x2() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let a = rng.random_range(-2.0..2.0);
            let d = rng.random_range(-2.0..2.0);
            let b = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let h = ComplexMatrix::from_row_slice(2, 2, &[Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0)]);
            // both roots of λ² - tr λ + det are ≥ 0 iff tr ≥ 0 and det ≥ 0
            let tr = a + d;
            let det = a * d - b.norm_sqr();
            let margin = det.abs().min(tr.abs());
            if margin < 1e-6 {
                continue;
            }
            let oracle = tr >= 0.0 && det >= 0.0;
            assert_eq!(hermitian_psd_check(&h, 1e-12).unwrap().is_psd, oracle);
        }
    }

    #[test]
    fn psd_agrees_with_cholesky_on_gram_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = RealMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
            let gram = a.transpose() * &a;
            let report = symmetric_psd_check(&gram, 1e-9).unwrap();
            assert!(report.is_psd);
            assert!(Cholesky::new(&gram + RealMatrix::identity(4, 4) * 1e-12).is_some());
            // push below the boundary by more than the tolerance
            let shifted = &gram - RealMatrix::identity(4, 4) * (report.min_eigenvalue + 1e-3);
            assert!(Cholesky::new(shifted.clone()).is_none());
            assert!(!symmetric_psd_check(&shifted, 1e-9).unwrap().is_psd);
            let complex = gram.map(|x| Complex64::new(x, 0.0));
            assert!(hermitian_psd_check(&complex, 1e-9).unwrap().is_psd);
        }
    }
}
