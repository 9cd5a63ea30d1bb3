//! One-parameter semigroups `T_t = T(φ_t, M_t, e^{tA})` built from a
//! generator triple `(A, N, γ)`:
//!
//! * `A_t = e^{tA}`
//! * `M_t = ∫_0^t e^{τAᵀ} N e^{τA} dτ`
//! * `φ_t(ξ) = exp(∫_0^t γ(e^{τA}ξ) dτ)`
//!
//! The triple is admissible iff `N + i(AᵀJ + JA) ⪰ 0`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::TwistedChannel;
use crate::char_fn::{levy_flow_exponent_on, ClassicalCF, LevyFunction, MatrixFlow, QuantumCF};
use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, ensure_finite, ensure_square, expm, quad_form, symmetrized, RealMatrix};
use crate::phase_space::{
    hermitian_psd_check, real_plus_i, symmetric_psd_check, PhaseVector, PsdReport, SymplecticForm, DEFAULT_PSD_TOL,
};
use crate::quadrature::{SimpsonConfig, DEFAULT_MAX_PANELS, DEFAULT_QUAD_TOL};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
/// Largest tolerated disagreement between the h and h/2 difference quotients.
const RICHARDSON_TOL: f64 = 1e-6;
/// Quadrature tolerance used under finite differencing.
const FD_QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SemigroupGenerator {
    form: SymplecticForm,
    a: RealMatrix,
    noise: RealMatrix,
    gamma: LevyFunction,
    flow: Arc<MatrixFlow>,
}

/// Spectrum of `N + i(AᵀJ + JA)`.
pub fn check_generator(a: &RealMatrix, noise: &RealMatrix, form: &SymplecticForm, tol: f64) -> Result<PsdReport> {
    ensure_dim(form.dim(), ensure_square(a)?)?;
    ensure_dim(form.dim(), ensure_square(noise)?)?;
    ensure_finite(a)?;
    let noise = symmetrized(noise, tol)?;
    let j = form.matrix();
    let twist = a.transpose() * j + j * a;
    hermitian_psd_check(&real_plus_i(&noise, &twist)?, tol)
}

impl SemigroupGenerator {
    pub fn new(a: RealMatrix, noise: RealMatrix, gamma: LevyFunction) -> Result<Self> {
        Self::with_tolerance(a, noise, gamma, DEFAULT_PSD_TOL)
    }

    pub fn with_tolerance(a: RealMatrix, noise: RealMatrix, gamma: LevyFunction, tol: f64) -> Result<Self> {
        let dim = ensure_square(&a)?;
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::OddLength(dim));
        }
        ensure_dim(dim, ensure_square(&noise)?)?;
        ensure_dim(dim, gamma.dim())?;
        if gamma.gaussian_part().iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidLevy(
                "the Gaussian part of γ must be folded into the noise rate N".into(),
            ));
        }
        let form = SymplecticForm::new(dim / 2)?;
        let noise = symmetrized(&noise, 1e-12)?;
        let report = check_generator(&a, &noise, &form, tol)?;
        if !report.is_psd {
            return Err(Error::NotPsd {
                what: "N + i(AᵀJ + JA)",
                report,
            });
        }
        let flow = Arc::new(MatrixFlow::new(a.clone())?);
        Ok(Self {
            form,
            a,
            noise,
            gamma,
            flow,
        })
    }

    /// Generator without a jump part.
    pub fn gaussian(a: RealMatrix, noise: RealMatrix) -> Result<Self> {
        let dim = a.nrows();
        Self::new(a, noise, LevyFunction::zero(dim)?)
    }

    /// Damping at rate `κ` towards the vacuum: `A = -κI`, `N = 2κI`.
    pub fn attenuator(modes: usize, kappa: f64) -> Result<Self> {
        let dim = 2 * modes;
        let id = RealMatrix::identity(dim, dim);
        Self::gaussian(&id * -kappa, &id * (2.0 * kappa))
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

    pub fn a(&self) -> &RealMatrix {
        &self.a
    }

    pub fn noise(&self) -> &RealMatrix {
        &self.noise
    }

    pub fn gamma(&self) -> &LevyFunction {
        &self.gamma
    }

    pub fn check(&self, tol: f64) -> Result<PsdReport> {
        check_generator(&self.a, &self.noise, &self.form, tol)
    }
}

fn ensure_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

fn quad_config(abs_tol: f64) -> SimpsonConfig {
    SimpsonConfig {
        abs_tol,
        max_panels: DEFAULT_MAX_PANELS,
    }
}

pub fn propagate_a(gen: &SemigroupGenerator, t: f64) -> Result<RealMatrix> {
    ensure_time(t)?;
    gen.flow.at(t)
}

/// `M_t` from the augmented exponential `exp(t [[-Aᵀ, N], [0, A]])`, whose
/// top-right block is `e^{-tAᵀ} M_t` and bottom-right block is `e^{tA}`.
pub fn propagate_m(gen: &SemigroupGenerator, t: f64) -> Result<RealMatrix> {
    ensure_time(t)?;
    let dim = gen.dim();
    if t == 0.0 {
        return Ok(RealMatrix::zeros(dim, dim));
    }
    let mut block = RealMatrix::zeros(2 * dim, 2 * dim);
    block.view_mut((0, 0), (dim, dim)).copy_from(&(-gen.a.transpose() * t));
    block.view_mut((0, dim), (dim, dim)).copy_from(&(&gen.noise * t));
    block.view_mut((dim, dim), (dim, dim)).copy_from(&(&gen.a * t));
    let e = expm(&block)?;
    let top_right = e.view((0, dim), (dim, dim));
    let bottom_right = e.view((dim, dim), (dim, dim));
    let m = bottom_right.transpose() * top_right;
    let m = (&m + m.transpose()) * 0.5;
    let report = symmetric_psd_check(&m, DEFAULT_PSD_TOL)?;
    if !report.is_psd {
        return Err(Error::NotPsd { what: "M_t", report });
    }
    Ok(m)
}

/// `ψ_t(ξ) = ∫_0^t γ(e^{τA}ξ) dτ`.
pub fn propagate_psi(gen: &SemigroupGenerator, t: f64, xi: &PhaseVector, quad_tol: f64) -> Result<Complex64> {
    ensure_time(t)?;
    levy_flow_exponent_on(&gen.gamma, &gen.flow, t, xi.as_vector(), quad_config(quad_tol))
}

/// The jump factor `φ_t` as a classical cf.
pub fn phi_at(gen: &SemigroupGenerator, t: f64, quad_tol: f64) -> Result<ClassicalCF> {
    ensure_time(t)?;
    if gen.gamma.is_zero() || t == 0.0 {
        return Ok(ClassicalCF::Unit);
    }
    Ok(ClassicalCF::LevyFlow {
        levy: gen.gamma.clone(),
        flow: Arc::clone(&gen.flow),
        t,
        quadrature: quad_config(quad_tol),
    })
}

pub fn channel_at(gen: &SemigroupGenerator, t: f64, quad_tol: f64) -> Result<TwistedChannel> {
    let a_t = propagate_a(gen, t)?;
    let m_t = propagate_m(gen, t)?;
    TwistedChannel::new(phi_at(gen, t, quad_tol)?, m_t, a_t)
}

fn evolve_with(
    gen: &SemigroupGenerator,
    f0: &QuantumCF,
    t: f64,
    xi: &DVector<f64>,
    quad_tol: f64,
) -> Result<Complex64> {
    ensure_dim(gen.dim(), f0.dim())?;
    ensure_dim(gen.dim(), xi.len())?;
    let a_t = propagate_a(gen, t)?;
    let m_t = propagate_m(gen, t)?;
    let psi = levy_flow_exponent_on(&gen.gamma, &gen.flow, t, xi, quad_config(quad_tol))?;
    Ok(f0.eval(&(a_t * xi))? * Complex64::new(-0.5 * quad_form(&m_t, xi), 0.0).exp() * psi.exp())
}

/// `Ψ(t, ξ) = f₀(e^{tA}ξ) · exp(-½ ξᵀM_tξ) · φ_t(ξ)`.
pub fn evolve_qcf(gen: &SemigroupGenerator, f0: &QuantumCF, t: f64, xi: &PhaseVector) -> Result<Complex64> {
    evolve_with(gen, f0, t, xi.as_vector(), DEFAULT_QUAD_TOL)
}

/// `V(ξ) = -½ ξᵀNξ + γ(ξ)`.
pub fn potential_v(gen: &SemigroupGenerator, xi: &PhaseVector) -> Result<Complex64> {
    potential_with(gen, xi.as_vector(), 0.5)
}

fn potential_with(gen: &SemigroupGenerator, xi: &DVector<f64>, noise_coefficient: f64) -> Result<Complex64> {
    ensure_dim(gen.dim(), xi.len())?;
    Ok(gen.gamma.eval(xi)? - noise_coefficient * quad_form(&gen.noise, xi))
}

struct Derivatives {
    dt: Complex64,
    grad: Vec<Complex64>,
}

fn differentiate(gen: &SemigroupGenerator, f0: &QuantumCF, t: f64, xi: &DVector<f64>, h: f64) -> Result<Derivatives> {
    let psi = |s: f64, x: &DVector<f64>| evolve_with(gen, f0, s, x, FD_QUAD_TOL);
    let dt = (psi(t + h, xi)? - psi(t - h, xi)?) / (2.0 * h);
    let mut grad = Vec::with_capacity(xi.len());
    for k in 0..xi.len() {
        let mut plus = xi.clone();
        let mut minus = xi.clone();
        plus[k] += h;
        minus[k] -= h;
        grad.push((psi(t, &plus)? - psi(t, &minus)?) / (2.0 * h));
    }
    Ok(Derivatives { dt, grad })
}

/// `|∂ₜΨ - (ξᵀAᵀ∇Ψ + VΨ)| / max(1, |Ψ|)` by central differences with step `h`.
pub fn generator_residual(gen: &SemigroupGenerator, f0: &QuantumCF, t: f64, xi: &PhaseVector, h: f64) -> Result<f64> {
    generator_residual_with_noise_coefficient(gen, f0, t, xi, h, 0.5)
}

/// As [`generator_residual`], with `V(ξ) = -c ξᵀNξ + γ(ξ)`.
pub fn generator_residual_with_noise_coefficient(
    gen: &SemigroupGenerator,
    f0: &QuantumCF,
    t: f64,
    xi: &PhaseVector,
    h: f64,
    noise_coefficient: f64,
) -> Result<f64> {
    if !(h > 0.0 && t > h) {
        return Err(Error::InvalidStep(format!("need t > h > 0, got t = {t}, h = {h}")));
    }
    let x = xi.as_vector();
    ensure_dim(gen.dim(), x.len())?;
    let value = evolve_with(gen, f0, t, x, FD_QUAD_TOL)?;
    let scale = value.norm().max(1.0);
    let coarse = differentiate(gen, f0, t, x, h)?;
    let fine = differentiate(gen, f0, t, x, 0.5 * h)?;
    let disagreement = coarse
        .grad
        .iter()
        .zip(&fine.grad)
        .map(|(a, b)| (a - b).norm())
        .fold((coarse.dt - fine.dt).norm(), f64::max)
        / scale;
    if disagreement > RICHARDSON_TOL {
        return Err(Error::StepTooSmall { disagreement });
    }
    // ξᵀAᵀ∇Ψ = (Aξ)·∇Ψ
    let drift = &gen.a * x;
    let transport: Complex64 = drift.iter().zip(&fine.grad).map(|(d, g)| g * *d).sum();
    let rhs = transport + potential_with(gen, x, noise_coefficient)? * value;
    Ok((fine.dt - rhs).norm() / scale)
}

#[derive(Clone, Debug)]
pub struct EvolvedChannel {
    pub t: f64,
    pub channel: TwistedChannel,
    pub quadrature_tolerance: f64,
}

/// Per-time memo of `channel_at`.
#[derive(Debug)]
pub struct ChannelCache {
    generator: SemigroupGenerator,
    quadrature_tolerance: f64,
    entries: Mutex<HashMap<u64, Arc<EvolvedChannel>>>,
}

impl ChannelCache {
    pub fn new(generator: SemigroupGenerator, quadrature_tolerance: f64) -> Self {
        Self {
            generator,
            quadrature_tolerance,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn generator(&self) -> &SemigroupGenerator {
        &self.generator
    }

    pub fn get(&self, t: f64) -> Result<Arc<EvolvedChannel>> {
        ensure_time(t)?;
        if let Some(hit) = self.entries.lock().expect("cache poisoned").get(&t.to_bits()) {
            return Ok(Arc::clone(hit));
        }
        let evolved = Arc::new(EvolvedChannel {
            t,
            channel: channel_at(&self.generator, t, self.quadrature_tolerance)?,
            quadrature_tolerance: self.quadrature_tolerance,
        });
        self.entries
            .lock()
            .expect("cache poisoned")
            .insert(t.to_bits(), Arc::clone(&evolved));
        Ok(evolved)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
