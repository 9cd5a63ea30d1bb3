//! Sampled-kernel positivity tests.
//!
//! A failing report certifies that the function is not a (quantum)
//! characteristic function. A passing report is evidence on the sampled
//! points only.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::char_fn::{ClassicalCF, QuantumCF};
use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, max_abs_complex, ComplexMatrix};
use crate::phase_space::{hermitian_eigenvalues, PhaseVector, SymplecticForm};

/// Kernel spectra are accepted when `λ_min ≥ -tol · max(1, #points)`.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;
pub const DEFAULT_POINT_COUNT: usize = 50;
pub const DEFAULT_RADIUS: f64 = 2.0;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    RandomGaussian,
    Lattice,
    User,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub modes: usize,
    pub points: Vec<PhaseVector>,
    pub seed: u64,
    pub scheme: Scheme,
}

impl PointSet {
    pub fn user(points: Vec<PhaseVector>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Config("point set is empty".into()));
        };
        let modes = first.modes();
        for p in &points {
            ensure_dim(2 * modes, p.dim())?;
        }
        Ok(Self {
            modes,
            points,
            seed: 0,
            scheme: Scheme::User,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same set shifted by `c`.
    pub fn translated(&self, c: &PhaseVector) -> Result<Self> {
        ensure_dim(2 * self.modes, c.dim())?;
        let points = self
            .points
            .iter()
            .map(|p| PhaseVector::from_vector(p.as_vector() + c.as_vector()))
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            scheme: Scheme::User,
            ..self.clone()
        })
    }
}

/// Deterministic point sets.
///
/// `RandomGaussian` always starts with the origin, followed by `count - 1`
/// points whose coordinates are i.i.d. normal scaled so that the RMS norm is
/// `radius`. `Lattice` uses `k` points per axis on `[-radius, radius]`, where
/// `k` is the largest integer with `k^{2n} ≤ count`.
pub fn sample_points(modes: usize, count: usize, radius: f64, seed: u64, scheme: Scheme) -> Result<PointSet> {
    if modes == 0 {
        return Err(Error::ZeroModes);
    }
    if count == 0 {
        return Err(Error::Config("point count must be at least 1".into()));
    }
    let dim = 2 * modes;
    let points = match scheme {
        Scheme::RandomGaussian | Scheme::User => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = radius / (dim as f64).sqrt();
            let mut pts = vec![PhaseVector::zeros(modes)?];
            for _ in 1..count {
                let coords = DVector::from_fn(dim, |_, _| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g * scale
                });
                pts.push(PhaseVector::from_vector(coords)?);
            }
            pts
        }
        Scheme::Lattice => {
            let mut k = 1usize;
            while (k + 1).checked_pow(dim as u32).is_some_and(|c| c <= count) {
                k += 1;
            }
            let axis: Vec<f64> = if k == 1 {
                vec![0.0]
            } else {
                (0..k)
                    .map(|i| -radius + 2.0 * radius * i as f64 / (k - 1) as f64)
                    .collect()
            };
            let total = k.pow(dim as u32);
            (0..total)
                .map(|mut idx| {
                    let mut coords = vec![0.0; dim];
                    for c in coords.iter_mut().rev() {
                        *c = axis[idx % k];
                        idx /= k;
                    }
                    PhaseVector::new(coords)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(PointSet {
        modes,
        points,
        seed,
        scheme: if scheme == Scheme::User {
            Scheme::RandomGaussian
        } else {
            scheme
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Twisted,
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    pub point_count: usize,
    pub min_eigenvalue: f64,
    pub is_positive: bool,
    pub tolerance: f64,
    pub kernel_kind: KernelKind,
}

impl KernelReport {
    fn new(kernel: &ComplexMatrix, tolerance: f64, kernel_kind: KernelKind) -> Self {
        let eig = hermitian_eigenvalues(kernel);
        let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let point_count = kernel.nrows();
        Self {
            point_count,
            min_eigenvalue,
            is_positive: min_eigenvalue >= -tolerance * (point_count as f64).max(1.0),
            tolerance,
            kernel_kind,
        }
    }
}

fn check_hermitian(k: ComplexMatrix) -> Result<ComplexMatrix> {
    let asymmetry = max_abs_complex(&(&k - k.adjoint()));
    if !k.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            asymmetry,
            tolerance: HERMITIAN_TOL,
        });
    }
    let adj = k.adjoint();
    Ok((k + adj) * Complex64::new(0.5, 0.0))
}

/// `K_{ij} = f(ξ_j - ξ_i) · exp(i ξ_iᵀ J ξ_j)`.
pub fn kernel_matrix(f: &QuantumCF, points: &PointSet, form: &SymplecticForm) -> Result<ComplexMatrix> {
    ensure_dim(f.dim(), 2 * points.modes)?;
    ensure_dim(form.dim(), 2 * points.modes)?;
    let n = points.len();
    let mut k = ComplexMatrix::zeros(n, n);
    for (i, xi) in points.points.iter().enumerate() {
        for (j, xj) in points.points.iter().enumerate() {
            let diff = xj.as_vector() - xi.as_vector();
            let phase = form.product(xi.as_vector(), xj.as_vector());
            k[(i, j)] = f.eval(&diff)? * Complex64::new(0.0, phase).exp();
        }
    }
    check_hermitian(k)
}

/// `K_{ij} = φ(ξ_j - ξ_i)`.
pub fn classical_kernel_matrix(phi: &ClassicalCF, points: &PointSet) -> Result<ComplexMatrix> {
    if let Some(d) = phi.dim() {
        ensure_dim(d, 2 * points.modes)?;
    }
    let n = points.len();
    let mut k = ComplexMatrix::zeros(n, n);
    for (i, xi) in points.points.iter().enumerate() {
        for (j, xj) in points.points.iter().enumerate() {
            k[(i, j)] = phi.eval(&(xj.as_vector() - xi.as_vector()))?;
        }
    }
    check_hermitian(k)
}

pub fn verify_bochner(f: &QuantumCF, points: &PointSet, form: &SymplecticForm, tol: f64) -> Result<KernelReport> {
    let k = kernel_matrix(f, points, form)?;
    Ok(KernelReport::new(&k, tol, KernelKind::Twisted))
}

pub fn verify_classical_pd(phi: &ClassicalCF, points: &PointSet, tol: f64) -> Result<KernelReport> {
    let k = classical_kernel_matrix(phi, points)?;
    Ok(KernelReport::new(&k, tol, KernelKind::Classical))
}
