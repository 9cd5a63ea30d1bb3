//! Single-mode truncated Fock-space ground truth.
//!
//! Operators live on span{|0⟩, …, |D-1⟩}. Operator identities are compared
//! on a top-left "safe block" whose size shrinks with the displacement
//! budget, so that truncation leakage near level `D` stays out of the
//! residuals.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::char_fn::cf_from_measure;
use crate::error::{Error, Result};
use crate::linalg::{expm_complex, max_abs_complex, ComplexMatrix, RealMatrix};
use crate::phase_space::{hermitian_eigenvalues, PhaseVector, SymplecticForm};
use crate::semigroup::SemigroupGenerator;

pub const WEYL_THRESHOLD: f64 = 1e-8;
pub const VACUUM_TRACE_THRESHOLD: f64 = 1e-10;
pub const COHERENT_TRACE_THRESHOLD: f64 = 1e-8;
pub const CONJUGATION_THRESHOLD: f64 = 1e-7;
pub const MIXTURE_THRESHOLD: f64 = 1e-6;
pub const PHASE_ACTION_THRESHOLD: f64 = 1e-5;
pub const GENERATOR_THRESHOLD: f64 = 1e-5;
pub const DEFAULT_DIFF_STEP: f64 = 1e-4;

/// Identity names understood by [`run_suite`], in execution order.
pub const SUITE_IDENTITIES: &[&str] = &[
    "weyl-composition",
    "quadrature-form",
    "commutators",
    "vacuum-trace",
    "coherent-trace",
    "conjugation-phase",
    "mixture-channel",
    "phase-action",
    "operator-generator",
];

const I: Complex64 = Complex64::new(0.0, 1.0);
const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
const DENSITY_TRACE_TOL: f64 = 1e-10;
const DENSITY_EIGEN_TOL: f64 = 1e-10;

fn ensure_cutoff(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::CutoffTooSmall(d));
    }
    Ok(())
}

fn ensure_same_cutoff(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::CutoffMismatch { expected, found });
    }
    Ok(())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `Tr(m w) = Σ_ij m_ij w_ji`.
fn trace_product(m: &ComplexMatrix, w: &ComplexMatrix) -> Complex64 {
    m.component_mul(&w.transpose()).sum()
}

fn block_residual(m: &ComplexMatrix, block: usize) -> f64 {
    max_abs_complex(&m.view((0, 0), (block, block)).into_owned())
}

/// Size of the top-left block on which identities involving a total
/// displacement `budget` are trusted: `⌊(√D - budget - 1)²⌋`, or 0.
pub fn safe_block(d: usize, budget: f64) -> usize {
    let edge = (d as f64).sqrt() - budget - 1.0;
    if edge <= 0.0 {
        0
    } else {
        ((edge * edge).floor() as usize).min(d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    cutoff: usize,
    matrix: ComplexMatrix,
}

impl FockOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = crate::linalg::ensure_square(&matrix)?;
        ensure_cutoff(d)?;
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { cutoff: d, matrix })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(d, d))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        ensure_same_cutoff(self.cutoff, other.cutoff)?;
        Ok(Self {
            cutoff: self.cutoff,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }
}

/// `(a, a†)` with `a|k⟩ = √k |k-1⟩`.
pub fn ladder_ops(d: usize) -> Result<(FockOperator, FockOperator)> {
    ensure_cutoff(d)?;
    let mut a = ComplexMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = real((k as f64).sqrt());
    }
    let adag = a.adjoint();
    Ok((
        FockOperator { cutoff: d, matrix: a },
        FockOperator {
            cutoff: d,
            matrix: adag,
        },
    ))
}

/// `q = (a + a†)/√2`.
pub fn position(d: usize) -> Result<FockOperator> {
    let (a, adag) = ladder_ops(d)?;
    FockOperator::new((a.matrix + adag.matrix) * real(std::f64::consts::FRAC_1_SQRT_2))
}

/// `p = (a - a†)/(i√2)`.
pub fn momentum(d: usize) -> Result<FockOperator> {
    let (a, adag) = ladder_ops(d)?;
    FockOperator::new((a.matrix - adag.matrix) / (I * std::f64::consts::SQRT_2))
}

/// `W(z) = exp(z a† - z̄ a)` on the truncated space. Requires `|z| ≤ D/8`.
pub fn weyl_matrix(z: Complex64, d: usize) -> Result<FockOperator> {
    ensure_cutoff(d)?;
    let bound = d as f64 / 8.0;
    if z.norm() > bound {
        return Err(Error::DisplacementTooLarge {
            modulus: z.norm(),
            bound,
            cutoff: d,
        });
    }
    let (a, adag) = ladder_ops(d)?;
    FockOperator::new(expm_complex(&(adag.matrix * z - a.matrix * z.conj()))?)
}

fn single_mode(xi: &PhaseVector) -> Result<Complex64> {
    if xi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: xi.dim(),
        });
    }
    Ok(Complex64::new(xi.as_slice()[0], xi.as_slice()[1]))
}

/// `W̃(ξ) = exp(i√2(ξ₂q - ξ₁p))`, built from the quadrature matrices.
pub fn weyl_from_quadratures(xi: &PhaseVector, d: usize) -> Result<FockOperator> {
    let z = single_mode(xi)?;
    let bound = d as f64 / 8.0;
    if z.norm() > bound {
        return Err(Error::DisplacementTooLarge {
            modulus: z.norm(),
            bound,
            cutoff: d,
        });
    }
    let q = position(d)?.matrix;
    let p = momentum(d)?.matrix;
    let generator = (q * real(z.im) - p * real(z.re)) * (I * std::f64::consts::SQRT_2);
    FockOperator::new(expm_complex(&generator)?)
}

fn weyl_phase(xi: &PhaseVector, d: usize) -> Result<ComplexMatrix> {
    Ok(weyl_matrix(single_mode(xi)?, d)?.matrix)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    cutoff: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and spectrum (≥ -1e-10).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let op = FockOperator::new(matrix)?;
        let m = op.matrix;
        let asymmetry = max_abs_complex(&(&m - m.adjoint()));
        if asymmetry > DENSITY_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("asymmetry {asymmetry:.3e}")));
        }
        let trace = m.trace();
        if (trace - real(1.0)).norm() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace}")));
        }
        let sym = (&m + m.adjoint()) * real(0.5);
        let min = hermitian_eigenvalues(&sym).into_iter().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            cutoff: op.cutoff,
            matrix: sym,
        })
    }

    pub fn vacuum(d: usize) -> Result<Self> {
        ensure_cutoff(d)?;
        let mut m = ComplexMatrix::zeros(d, d);
        m[(0, 0)] = real(1.0);
        Ok(Self { cutoff: d, matrix: m })
    }

    /// `|α⟩⟨α|` from the number-basis amplitudes `e^{-|α|²/2} αᵏ/√k!`,
    /// renormalized after truncation.
    pub fn coherent(alpha: Complex64, d: usize) -> Result<Self> {
        ensure_cutoff(d)?;
        let mut amp = DVector::<Complex64>::zeros(d);
        amp[0] = real((-0.5 * alpha.norm_sqr()).exp());
        for k in 1..d {
            amp[k] = amp[k - 1] * alpha / (k as f64).sqrt();
        }
        let norm = amp.norm();
        amp /= real(norm);
        Ok(Self {
            cutoff: d,
            matrix: &amp * amp.adjoint(),
        })
    }

    /// A rank-`rank` state supported on the first `support` levels.
    pub fn random(d: usize, support: usize, rank: usize, seed: u64) -> Result<Self> {
        ensure_cutoff(d)?;
        if support == 0 || support > d || rank == 0 {
            return Err(Error::InvalidState(format!(
                "need 1 ≤ support ≤ {d} and rank ≥ 1, got support {support}, rank {rank}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(support, rank, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let small = &g * g.adjoint();
        let small = &small / small.trace();
        let mut m = ComplexMatrix::zeros(d, d);
        m.view_mut((0, 0), (support, support)).copy_from(&small);
        let m = (&m + m.adjoint()) * real(0.5);
        Ok(Self { cutoff: d, matrix: m })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `Tr(ρ W̃(ξ))`.
pub fn qcf_trace(rho: &DensityMatrix, xi: &PhaseVector, d: usize) -> Result<Complex64> {
    ensure_same_cutoff(rho.cutoff, d)?;
    Ok(trace_product(&rho.matrix, &weyl_phase(xi, d)?))
}

fn raw_qcf(m: &ComplexMatrix, xi: &PhaseVector) -> Result<Complex64> {
    Ok(trace_product(m, &weyl_phase(xi, m.nrows())?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub identity: String,
    pub max_residual: f64,
    pub cutoff: usize,
    pub threshold: f64,
    pub pass: bool,
    /// Residual of a deliberately wrong variant, where one is computed.
    pub control_residual: Option<f64>,
    pub note: Option<String>,
}

impl OracleReport {
    fn new(identity: &str, max_residual: f64, cutoff: usize, threshold: f64) -> Self {
        Self {
            identity: identity.to_string(),
            max_residual,
            cutoff,
            threshold,
            pass: max_residual <= threshold,
            control_residual: None,
            note: None,
        }
    }

    fn failed(identity: &str, cutoff: usize, threshold: f64, note: String) -> Self {
        Self {
            identity: identity.to_string(),
            max_residual: f64::INFINITY,
            cutoff,
            threshold,
            pass: false,
            control_residual: None,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

fn no_block(identity: &str, d: usize, threshold: f64, budget: f64) -> OracleReport {
    OracleReport::failed(
        identity,
        d,
        threshold,
        format!("no safe block at cutoff {d} for displacement budget {budget:.3}"),
    )
}

/// `W(z)W(z′) = e^{-i Im⟨z|z′⟩} W(z+z′)` on the safe block.
pub fn weyl_composition_check(z: Complex64, z2: Complex64, d: usize) -> Result<OracleReport> {
    const NAME: &str = "weyl-composition";
    let budget = z.norm() + z2.norm();
    let block = safe_block(d, budget);
    if block == 0 {
        return Ok(no_block(NAME, d, WEYL_THRESHOLD, budget));
    }
    let lhs = weyl_matrix(z, d)?.matrix * weyl_matrix(z2, d)?.matrix;
    let phase = (-I * (z.conj() * z2).im).exp();
    let rhs = weyl_matrix(z + z2, d)?.matrix * phase;
    Ok(
        OracleReport::new(NAME, block_residual(&(lhs - rhs), block), d, WEYL_THRESHOLD)
            .with_note(format!("block {block}")),
    )
}

/// `exp(i√2(ξ₂q - ξ₁p)) = W(ξ₁ + iξ₂)` on the safe block.
pub fn quadrature_form_check(xi: &PhaseVector, d: usize) -> Result<OracleReport> {
    const NAME: &str = "quadrature-form";
    let z = single_mode(xi)?;
    let block = safe_block(d, z.norm());
    if block == 0 {
        return Ok(no_block(NAME, d, WEYL_THRESHOLD, z.norm()));
    }
    let diff = weyl_from_quadratures(xi, d)?.matrix - weyl_matrix(z, d)?.matrix;
    Ok(OracleReport::new(NAME, block_residual(&diff, block), d, WEYL_THRESHOLD).with_note(format!("block {block}")))
}

/// Largest entry of `[a, W(z)] - zW(z)` and `[a†, W(z)] - z̄W(z)` on the
/// top-left `block × block` corner.
pub fn commutation_residual_on_block(z: Complex64, d: usize, block: usize) -> Result<f64> {
    if block == 0 || block > d {
        return Err(Error::InvalidState(format!("block {block} outside 1..={d}")));
    }
    let (a, adag) = ladder_ops(d)?;
    let w = weyl_matrix(z, d)?;
    let r1 = a.commutator(&w)?.matrix - &w.matrix * z;
    let r2 = adag.commutator(&w)?.matrix - &w.matrix * z.conj();
    Ok(block_residual(&r1, block).max(block_residual(&r2, block)))
}

pub fn commutation_checks(z: Complex64, d: usize) -> Result<OracleReport> {
    const NAME: &str = "commutators";
    let block = safe_block(d, z.norm());
    if block == 0 {
        return Ok(no_block(NAME, d, WEYL_THRESHOLD, z.norm()));
    }
    let residual = commutation_residual_on_block(z, d, block)?;
    Ok(OracleReport::new(NAME, residual, d, WEYL_THRESHOLD).with_note(format!("block {block}")))
}

/// `Tr(|0⟩⟨0| W̃(ξ))` against `e^{-|ξ|²/2}`.
pub fn vacuum_trace_check(points: &[PhaseVector], d: usize) -> Result<OracleReport> {
    let rho = DensityMatrix::vacuum(d)?;
    let mut worst = 0.0_f64;
    for xi in points {
        let expected = (-0.5 * xi.norm().powi(2)).exp();
        worst = worst.max((qcf_trace(&rho, xi, d)? - expected).norm());
    }
    Ok(OracleReport::new("vacuum-trace", worst, d, VACUUM_TRACE_THRESHOLD))
}

/// Coherent state `|α⟩⟨α|` against `e^{2i Im(ᾱz)} e^{-|ξ|²/2}`; the
/// control is the modulus-only comparison `||f| - e^{-|ξ|²/2}|`.
pub fn coherent_trace_check(alpha: Complex64, points: &[PhaseVector], d: usize) -> Result<OracleReport> {
    let rho = DensityMatrix::coherent(alpha, d)?;
    let mut worst = 0.0_f64;
    let mut modulus = 0.0_f64;
    for xi in points {
        let z = single_mode(xi)?;
        let envelope = (-0.5 * z.norm_sqr()).exp();
        let got = qcf_trace(&rho, xi, d)?;
        let expected = (I * 2.0 * (alpha.conj() * z).im).exp() * envelope;
        worst = worst.max((got - expected).norm());
        modulus = modulus.max((got.norm() - envelope).abs());
    }
    let mut report = OracleReport::new("coherent-trace", worst, d, COHERENT_TRACE_THRESHOLD);
    report.note = Some(format!("modulus residual {modulus:.3e}"));
    Ok(report)
}

/// `Tr(W̃(η)ρW̃(η)⁻¹ W̃(ξ))` against `e^{2iηᵀJξ} Tr(ρW̃(ξ))`. The control
/// residual uses the phase `e^{iηᵀJξ}`.
pub fn conjugation_phase_check(rho: &DensityMatrix, eta: &PhaseVector, xi: &PhaseVector) -> Result<OracleReport> {
    let d = rho.cutoff;
    let w_eta = weyl_phase(eta, d)?;
    let shifted = &w_eta * &rho.matrix * w_eta.adjoint();
    let lhs = raw_qcf(&shifted, xi)?;
    let base = qcf_trace(rho, xi, d)?;
    let form = SymplecticForm::new(1)?;
    let s = form.product(eta.as_vector(), xi.as_vector());
    let mut report = OracleReport::new(
        "conjugation-phase",
        (lhs - (I * 2.0 * s).exp() * base).norm(),
        d,
        CONJUGATION_THRESHOLD,
    );
    report.control_residual = Some((lhs - (I * s).exp() * base).norm());
    Ok(report)
}

/// `ρ′ = Σ p_k W̃(η_k)ρW̃(η_k)⁻¹` against `f_ρ(ξ) μ̂(2Jξ)`.
pub fn mixture_channel_check(
    rho: &DensityMatrix,
    atoms: &[(DVector<f64>, f64)],
    points: &[PhaseVector],
) -> Result<OracleReport> {
    let d = rho.cutoff;
    let form = SymplecticForm::new(1)?;
    let phi = cf_from_measure(atoms, &form)?;
    let mut mixed = ComplexMatrix::zeros(d, d);
    for (eta, p) in atoms {
        let w = weyl_phase(&PhaseVector::from_vector(eta.clone())?, d)?;
        mixed += (&w * &rho.matrix * w.adjoint()) * real(*p);
    }
    let mut worst = 0.0_f64;
    for xi in points {
        let expected = qcf_trace(rho, xi, d)? * phi.eval(xi.as_vector())?;
        worst = worst.max((raw_qcf(&mixed, xi)? - expected).norm());
    }
    Ok(OracleReport::new("mixture-channel", worst, d, MIXTURE_THRESHOLD))
}

/// Left/right multiplication superoperators on a fixed cutoff.
struct Superops {
    q: ComplexMatrix,
    p: ComplexMatrix,
}

impl Superops {
    fn new(d: usize) -> Result<Self> {
        Ok(Self {
            q: position(d)?.matrix,
            p: momentum(d)?.matrix,
        })
    }

    /// Multiplication by `ξ₁` (k = 0) or `ξ₂` (k = 1).
    fn x(&self, k: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let op = if k == 0 { &self.q } else { &self.p };
        (rho * op - op * rho) * real(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Differentiation in `ξ₁` (k = 0) or `ξ₂` (k = 1).
    fn d(&self, k: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        if k == 0 {
            (rho * &self.p + &self.p * rho) * (-I * c)
        } else {
            (rho * &self.q + &self.q * rho) * (I * c)
        }
    }
}

fn central_gradient(m: &ComplexMatrix, xi: &PhaseVector, h: f64) -> Result<[Complex64; 2]> {
    let mut grad = [Complex64::new(0.0, 0.0); 2];
    for (k, slot) in grad.iter_mut().enumerate() {
        let mut plus = xi.as_vector().clone();
        let mut minus = xi.as_vector().clone();
        plus[k] += h;
        minus[k] -= h;
        *slot = (raw_qcf(m, &PhaseVector::from_vector(plus)?)? - raw_qcf(m, &PhaseVector::from_vector(minus)?)?)
            / (2.0 * h);
    }
    Ok(grad)
}

/// Residuals of `ξ₁f`, `ξ₂f`, `∂₁f`, `∂₂f` against the traces of the
/// corresponding superoperator images of `ρ`.
pub fn phase_action_residuals(rho: &DensityMatrix, xi: &PhaseVector, h: f64) -> Result<[f64; 4]> {
    let ops = Superops::new(rho.cutoff)?;
    let f = qcf_trace(rho, xi, rho.cutoff)?;
    let grad = central_gradient(&rho.matrix, xi, h)?;
    let x = xi.as_slice();
    Ok([
        (x[0] * f - raw_qcf(&ops.x(0, &rho.matrix), xi)?).norm(),
        (x[1] * f - raw_qcf(&ops.x(1, &rho.matrix), xi)?).norm(),
        (grad[0] - raw_qcf(&ops.d(0, &rho.matrix), xi)?).norm(),
        (grad[1] - raw_qcf(&ops.d(1, &rho.matrix), xi)?).norm(),
    ])
}

pub fn phase_action_checks(rho: &DensityMatrix, xi: &PhaseVector, h: f64) -> Result<OracleReport> {
    let r = phase_action_residuals(rho, xi, h)?;
    let worst = r.iter().copied().fold(0.0, f64::max);
    Ok(
        OracleReport::new("phase-action", worst, rho.cutoff, PHASE_ACTION_THRESHOLD).with_note(format!(
            "xi1 {:.2e}, xi2 {:.2e}, d1 {:.2e}, d2 {:.2e}",
            r[0], r[1], r[2], r[3]
        )),
    )
}

fn ensure_operator_generator(gen: &SemigroupGenerator) -> Result<()> {
    if gen.modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: gen.dim(),
        });
    }
    if !gen.gamma().is_zero() {
        return Err(Error::InvalidLevy(
            "the operator generator is only built for γ = 0".into(),
        ));
    }
    Ok(())
}

fn generator_action_signed(gen: &SemigroupGenerator, rho: &ComplexMatrix, signs: [f64; 4]) -> Result<ComplexMatrix> {
    let d = rho.nrows();
    let ops = Superops::new(d)?;
    let at: RealMatrix = gen.a().transpose();
    let n = gen.noise();
    let mut out = ComplexMatrix::zeros(d, d);
    for k in 0..2 {
        let dk = ops.d(k, rho) * real(signs[2 + k]);
        let xk = ops.x(k, rho) * real(signs[k]);
        for j in 0..2 {
            if at[(j, k)] != 0.0 {
                out += ops.x(j, &dk) * real(signs[j] * at[(j, k)]);
            }
            if n[(j, k)] != 0.0 {
                out -= ops.x(j, &xk) * real(0.5 * signs[j] * n[(j, k)]);
            }
        }
    }
    Ok(out)
}

/// `ℒρ = Σ_jk (Aᵀ)_jk X_j D_k ρ - ½ Σ_jk N_jk X_j X_k ρ`, where `X_j` and
/// `D_k` are the superoperators realizing multiplication by `ξ_j` and
/// differentiation in `ξ_k` on the characteristic-function side.
pub fn generator_action(gen: &SemigroupGenerator, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    ensure_operator_generator(gen)?;
    generator_action_signed(gen, &rho.matrix, [1.0; 4])
}

/// `ξᵀAᵀ∇f + (-½ξᵀNξ) f` with the gradient by central differences.
fn dynamical_generator_fd(
    gen: &SemigroupGenerator,
    rho: &ComplexMatrix,
    xi: &PhaseVector,
    h: f64,
) -> Result<Complex64> {
    let grad = central_gradient(rho, xi, h)?;
    let drift = gen.a() * xi.as_vector();
    let v = -0.5 * crate::linalg::quad_form(gen.noise(), xi.as_vector());
    Ok(grad[0] * drift[0] + grad[1] * drift[1] + raw_qcf(rho, xi)? * v)
}

fn generator_residual_signed(
    gen: &SemigroupGenerator,
    rho: &DensityMatrix,
    points: &[PhaseVector],
    h: f64,
    signs: [f64; 4],
) -> Result<f64> {
    let l_rho = generator_action_signed(gen, &rho.matrix, signs)?;
    let mut worst = 0.0_f64;
    for xi in points {
        let lhs = raw_qcf(&l_rho, xi)?;
        worst = worst.max((lhs - dynamical_generator_fd(gen, &rho.matrix, xi, h)?).norm());
    }
    Ok(worst)
}

/// `Tr((ℒρ) W̃(ξ))` against `𝒟 f_ρ(ξ)` at `t = 0`.
pub fn operator_generator_check(
    gen: &SemigroupGenerator,
    rho: &DensityMatrix,
    points: &[PhaseVector],
    h: f64,
) -> Result<OracleReport> {
    ensure_operator_generator(gen)?;
    let residual = generator_residual_signed(gen, rho, points, h, [1.0; 4])?;
    Ok(OracleReport::new(
        "operator-generator",
        residual,
        rho.cutoff,
        GENERATOR_THRESHOLD,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignSweep {
    /// Signs on `(X₁, X₂, D₁, D₂)` with the smallest residual. Flipping all
    /// four leaves `ℒ` unchanged, so assignments come in equivalent pairs.
    pub best: [i8; 4],
    pub best_residual: f64,
    pub table: Vec<([i8; 4], f64)>,
}

/// Residual of every `±` assignment on the four superoperators in `ℒ`.
pub fn generator_sign_sweep(
    gen: &SemigroupGenerator,
    rho: &DensityMatrix,
    points: &[PhaseVector],
    h: f64,
) -> Result<SignSweep> {
    ensure_operator_generator(gen)?;
    let mut table = Vec::with_capacity(16);
    for mask in 0..16u8 {
        let signs: [i8; 4] = std::array::from_fn(|k| if mask >> k & 1 == 1 { -1 } else { 1 });
        let r = generator_residual_signed(gen, rho, points, h, signs.map(f64::from))?;
        table.push((signs, r));
    }
    let (best, best_residual) = table
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("sixteen entries");
    Ok(SignSweep {
        best,
        best_residual,
        table,
    })
}

/// Points drawn uniformly from the disc of the given radius.
pub fn disc_points(count: usize, radius: f64, seed: u64) -> Vec<PhaseVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            PhaseVector::new(vec![r * theta.cos(), r * theta.sin()]).expect("two coordinates")
        })
        .collect()
}

fn pv(x: f64, y: f64) -> PhaseVector {
    PhaseVector::new(vec![x, y]).expect("two coordinates")
}

fn suite_entry(name: &str, d: usize) -> Result<OracleReport> {
    match name {
        "weyl-composition" => weyl_composition_check(Complex64::new(0.6, 0.3), Complex64::new(-0.2, 0.5), d),
        "quadrature-form" => quadrature_form_check(&pv(0.7, -0.4), d),
        "commutators" => commutation_checks(Complex64::new(0.5, -0.5), d),
        "vacuum-trace" => vacuum_trace_check(&disc_points(20, 1.0, 11), d),
        "coherent-trace" => coherent_trace_check(Complex64::new(0.5, 0.2), &disc_points(20, 1.0, 12), d),
        "conjugation-phase" => {
            let rho = DensityMatrix::random(d, 4.min(d), 2, 13)?;
            conjugation_phase_check(&rho, &pv(0.6, -0.3), &pv(0.4, 0.8))
        }
        "mixture-channel" => {
            let rho = DensityMatrix::random(d, 4.min(d), 3, 14)?;
            let atoms = vec![
                (DVector::from_column_slice(&[0.3, 0.1]), 0.5),
                (DVector::from_column_slice(&[-0.2, 0.4]), 0.3),
                (DVector::from_column_slice(&[0.0, -0.3]), 0.2),
            ];
            mixture_channel_check(&rho, &atoms, &disc_points(50, 1.0, 15))
        }
        "phase-action" => {
            let rho = DensityMatrix::random(d, 4.min(d), 2, 16)?;
            phase_action_checks(&rho, &pv(0.6, -0.4), DEFAULT_DIFF_STEP)
        }
        "operator-generator" => {
            let gen = SemigroupGenerator::attenuator(1, 0.5)?;
            let rho = DensityMatrix::coherent(Complex64::new(0.5, 0.0), d)?;
            operator_generator_check(&gen, &rho, &disc_points(20, 1.0, 17), DEFAULT_DIFF_STEP)
        }
        other => Err(Error::Config(format!("unknown oracle identity {other:?}"))),
    }
}

fn threshold_of(name: &str) -> f64 {
    match name {
        "vacuum-trace" => VACUUM_TRACE_THRESHOLD,
        "coherent-trace" => COHERENT_TRACE_THRESHOLD,
        "conjugation-phase" => CONJUGATION_THRESHOLD,
        "mixture-channel" => MIXTURE_THRESHOLD,
        "phase-action" => PHASE_ACTION_THRESHOLD,
        "operator-generator" => GENERATOR_THRESHOLD,
        _ => WEYL_THRESHOLD,
    }
}

/// Runs the named identities (all of [`SUITE_IDENTITIES`] when `None`) at
/// every cutoff. Numerical failures, including cutoffs too small for a test
/// point, become failing rows; unknown names are errors.
pub fn run_suite(cutoffs: &[usize], identities: Option<&[String]>) -> Result<Vec<OracleReport>> {
    let names: Vec<String> = match identities {
        Some(list) => list.to_vec(),
        None => SUITE_IDENTITIES.iter().map(|s| s.to_string()).collect(),
    };
    for name in &names {
        if !SUITE_IDENTITIES.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown oracle identity {name:?}")));
        }
    }
    let mut rows = Vec::with_capacity(cutoffs.len() * names.len());
    for &d in cutoffs {
        for name in &names {
            rows.push(match suite_entry(name, d) {
                Ok(report) => report,
                Err(e) => OracleReport::failed(name, d, threshold_of(name), e.to_string()),
            });
        }
    }
    Ok(rows)
}
