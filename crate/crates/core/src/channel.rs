//! Twisted convolution channels `T(φ, M, A)`.
//!
//! On characteristic functions the channel acts as
//! `f ↦ f'(ξ) = f(Aξ) · exp(-½ ξᵀMξ) · φ(ξ)` and is admissible (maps states to
//! states) iff `M + i(J - AᵀJA) ⪰ 0`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::char_fn::{cf_from_measure, ClassicalCF, QuantumCF};
use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, ensure_finite, ensure_square, symmetrized, RealMatrix};
use crate::phase_space::{
    hermitian_eigenvalues, hermitian_psd_check, real_plus_i, symmetric_psd_check, PsdReport, SymplecticForm,
    DEFAULT_PSD_TOL,
};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct TwistedChannel {
    form: SymplecticForm,
    phi: ClassicalCF,
    m: RealMatrix,
    a: RealMatrix,
}

/// Spectrum of `M + i(J - AᵀJA)`.
pub fn admissibility(m: &RealMatrix, a: &RealMatrix, form: &SymplecticForm, tol: f64) -> Result<PsdReport> {
    ensure_dim(form.dim(), ensure_square(m)?)?;
    ensure_dim(form.dim(), ensure_square(a)?)?;
    ensure_finite(a)?;
    let m = symmetrized(m, tol)?;
    let j = form.matrix();
    let twist = j - a.transpose() * j * a;
    hermitian_psd_check(&real_plus_i(&m, &twist)?, tol)
}

/// Largest eigenvalue `λ₁` of `i(J - AᵀJA)`: `(λ₁ I + P, A)` is admissible for
/// every PSD `P`.
pub fn minimal_isotropic_noise(a: &RealMatrix, form: &SymplecticForm) -> Result<f64> {
    ensure_dim(form.dim(), ensure_square(a)?)?;
    let j = form.matrix();
    let twist = j - a.transpose() * j * a;
    let h = real_plus_i(&RealMatrix::zeros(form.dim(), form.dim()), &twist)?;
    Ok(hermitian_eigenvalues(&h).into_iter().fold(0.0_f64, f64::max))
}

pub fn make_channel(phi: ClassicalCF, m: RealMatrix, a: RealMatrix) -> Result<TwistedChannel> {
    TwistedChannel::with_tolerance(phi, m, a, DEFAULT_PSD_TOL)
}

impl TwistedChannel {
    pub fn new(phi: ClassicalCF, m: RealMatrix, a: RealMatrix) -> Result<Self> {
        make_channel(phi, m, a)
    }

    pub fn with_tolerance(phi: ClassicalCF, m: RealMatrix, a: RealMatrix, tol: f64) -> Result<Self> {
        let dim = ensure_square(&a)?;
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::OddLength(dim));
        }
        ensure_dim(dim, ensure_square(&m)?)?;
        if let Some(d) = phi.dim() {
            ensure_dim(dim, d)?;
        }
        let form = SymplecticForm::new(dim / 2)?;
        let m = symmetrized(&m, SYMMETRY_TOL)?;
        let noise = symmetric_psd_check(&m, tol)?;
        if !noise.is_psd {
            return Err(Error::NotPsd {
                what: "noise matrix M",
                report: noise,
            });
        }
        let report = admissibility(&m, &a, &form, tol)?;
        if !report.is_psd {
            return Err(Error::NotPsd {
                what: "M + i(J - AᵀJA)",
                report,
            });
        }
        Ok(Self { form, phi, m, a })
    }

    /// `T(1, 0, I)`.
    pub fn identity(modes: usize) -> Result<Self> {
        let dim = 2 * modes;
        Self::new(
            ClassicalCF::Unit,
            RealMatrix::zeros(dim, dim),
            RealMatrix::identity(dim, dim),
        )
    }

    /// Pure-loss channel `T(1, (1 - η) I, √η I)` for transmissivity `η ∈ [0, 1]`.
    pub fn attenuator(modes: usize, eta: f64) -> Result<Self> {
        let dim = 2 * modes;
        let id = RealMatrix::identity(dim, dim);
        Self::new(ClassicalCF::Unit, &id * (1.0 - eta), &id * eta.sqrt())
    }

    pub fn modes(&self) -> usize {
        self.form.modes()
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    pub fn form(&self) -> &SymplecticForm {
        &self.form
    }

    pub fn phi(&self) -> &ClassicalCF {
        &self.phi
    }

    pub fn m(&self) -> &RealMatrix {
        &self.m
    }

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    pub fn admissibility(&self, tol: f64) -> Result<PsdReport> {
        admissibility(&self.m, &self.a, &self.form, tol)
    }

    pub fn apply(&self, f: &QuantumCF) -> Result<QuantumCF> {
        apply(self, f)
    }

    pub fn apply_gaussian(&self, g: &QuantumCF) -> Result<QuantumCF> {
        apply_gaussian(self, g)
    }

    /// The channel "apply `self`, then `next`".
    pub fn then(&self, next: &TwistedChannel) -> Result<TwistedChannel> {
        compose(next, self)
    }
}

pub fn apply(ch: &TwistedChannel, f: &QuantumCF) -> Result<QuantumCF> {
    ensure_dim(ch.dim(), f.dim())?;
    Ok(QuantumCF::ChannelOutput {
        base: Arc::new(f.clone()),
        a: ch.a.clone(),
        m: ch.m.clone(),
        phi: ch.phi.clone(),
    })
}

/// Closed form on Gaussian inputs: `(λ, K) ↦ (Aᵀλ + μ, AᵀKA + ½M + ½Σ)` for
/// `φ = Gaussian(μ, Σ)`; the unit and point-mass cfs are the degenerate cases.
pub fn apply_gaussian(ch: &TwistedChannel, g: &QuantumCF) -> Result<QuantumCF> {
    let QuantumCF::GaussianState { mean, covariance } = g else {
        return Err(Error::Config("apply_gaussian needs a Gaussian input state".into()));
    };
    ensure_dim(ch.dim(), mean.len())?;
    let dim = ch.dim();
    let (mu, sigma) = match &ch.phi {
        ClassicalCF::Unit => (DVector::zeros(dim), RealMatrix::zeros(dim, dim)),
        ClassicalCF::PointMass { shift } => (shift.clone(), RealMatrix::zeros(dim, dim)),
        ClassicalCF::Gaussian { mean, covariance } => (mean.clone(), covariance.clone()),
        other => return Err(Error::NonGaussianPhi(other.kind())),
    };
    let at = ch.a.transpose();
    let new_mean = &at * mean + mu;
    let new_cov = &at * covariance * &ch.a + (&ch.m + sigma) * 0.5;
    QuantumCF::gaussian_state(new_mean, (&new_cov + new_cov.transpose()) * 0.5)
}

/// `compose(ch2, ch1)` applies `ch1` first and `ch2` second:
/// `T(φ₂ · (φ₁∘A₂), M₂ + A₂ᵀM₁A₂, A₁A₂)`.
pub fn compose(ch2: &TwistedChannel, ch1: &TwistedChannel) -> Result<TwistedChannel> {
    ensure_dim(ch2.dim(), ch1.dim())?;
    let phi = ClassicalCF::product(vec![ch2.phi.clone(), ch1.phi.clone().pullback(ch2.a.clone())?])?;
    let m = &ch2.m + ch2.a.transpose() * &ch1.m * &ch2.a;
    let m = (&m + m.transpose()) * 0.5;
    let a = &ch1.a * &ch2.a;
    TwistedChannel::new(phi, m, a)
}

/// Random-displacement channel `T(μ̂(2J·), 0, I)` for a discrete law `μ`.
pub fn convolution_channel(atoms: &[(DVector<f64>, f64)], form: &SymplecticForm) -> Result<TwistedChannel> {
    let phi = cf_from_measure(atoms, form)?;
    let dim = form.dim();
    TwistedChannel::new(phi, RealMatrix::zeros(dim, dim), RealMatrix::identity(dim, dim))
}
