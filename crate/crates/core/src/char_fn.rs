//! Classical and quantum characteristic functions on `R^{2n}`.
//!
//! Two quadratic conventions coexist and are never converted into each other:
//! a classical Gaussian law has `exp(iμᵀξ - ½ ξᵀΣξ)`, while a Gaussian *state*
//! has the quantum characteristic function `exp(iλᵀξ - ξᵀKξ)` with no ½.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, ensure_square, expm, quad_form, symmetrized, RealMatrix};
use crate::phase_space::{symmetric_psd_check, PhaseVector, SymplecticForm, DEFAULT_PSD_TOL};
use crate::quadrature::{adaptive_simpson, SimpsonConfig};

/// Black-box evaluator. Must be pure and reentrant: it may be called from
/// several threads at once.
pub type CfEvaluator = Arc<dyn Fn(&DVector<f64>) -> Complex64 + Send + Sync>;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn ensure_phase_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::ZeroModes);
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::OddLength(dim));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyAtom {
    pub location: DVector<f64>,
    pub weight: f64,
}

/// Lévy–Khintchine exponent
/// `γ(ξ) = -ξᵀBξ - iλᵀξ + Σ_k w_k (e^{iη_kᵀξ} - 1 - iη_kᵀξ / (1 + |η_k|²))`
/// with a finite atomic Lévy measure, plus an optional black-box term.
#[derive(Clone)]
pub struct LevyFunction {
    dim: usize,
    drift: DVector<f64>,
    gaussian_part: RealMatrix,
    atoms: Vec<LevyAtom>,
    external: Option<CfEvaluator>,
}

impl fmt::Debug for LevyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevyFunction")
            .field("dim", &self.dim)
            .field("drift", &self.drift.as_slice())
            .field("gaussian_part", &self.gaussian_part)
            .field("atoms", &self.atoms)
            .field("external", &self.external.is_some())
            .finish()
    }
}

impl LevyFunction {
    /// The identically zero exponent on `R^dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        ensure_phase_dim(dim)?;
        Ok(Self {
            dim,
            drift: DVector::zeros(dim),
            gaussian_part: RealMatrix::zeros(dim, dim),
            atoms: Vec::new(),
            external: None,
        })
    }

    pub fn with_drift(mut self, drift: DVector<f64>) -> Result<Self> {
        ensure_dim(self.dim, drift.len())?;
        if !drift.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.drift = drift;
        Ok(self)
    }

    pub fn with_gaussian_part(mut self, b: RealMatrix) -> Result<Self> {
        ensure_dim(self.dim, ensure_square(&b)?)?;
        let b = symmetrized(&b, 1e-12)?;
        let report = symmetric_psd_check(&b, DEFAULT_PSD_TOL)?;
        if !report.is_psd {
            return Err(Error::NotPsd {
                what: "Gaussian part of the Levy exponent",
                report,
            });
        }
        self.gaussian_part = b;
        Ok(self)
    }

    pub fn with_atom(mut self, location: DVector<f64>, weight: f64) -> Result<Self> {
        ensure_dim(self.dim, location.len())?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidLevy(format!("atom weight {weight} must be positive")));
        }
        if !location.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if location.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidLevy("atom located at the origin".into()));
        }
        self.atoms.push(LevyAtom { location, weight });
        Ok(self)
    }

    pub fn with_external(mut self, gamma: CfEvaluator) -> Self {
        self.external = Some(gamma);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    pub fn gaussian_part(&self) -> &RealMatrix {
        &self.gaussian_part
    }

    pub fn atoms(&self) -> &[LevyAtom] {
        &self.atoms
    }

    pub fn external(&self) -> Option<&CfEvaluator> {
        self.external.as_ref()
    }

    /// True when the exponent vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
            && self.external.is_none()
            && self.drift.iter().all(|&x| x == 0.0)
            && self.gaussian_part.iter().all(|&x| x == 0.0)
    }

    pub fn eval(&self, xi: &DVector<f64>) -> Result<Complex64> {
        ensure_dim(self.dim, xi.len())?;
        let mut value = Complex64::new(-quad_form(&self.gaussian_part, xi), -self.drift.dot(xi));
        for atom in &self.atoms {
            let s = atom.location.dot(xi);
            let compensator = s / (1.0 + atom.location.norm_squared());
            value += ((I * s).exp() - 1.0 - I * compensator) * atom.weight;
        }
        if let Some(ext) = &self.external {
            value += ext(xi);
        }
        Ok(value)
    }

    /// Sample check of `γ(0) = 0` and `Re γ ≤ 0`. Only meaningful for the
    /// black-box part; the atomic part satisfies both by construction.
    pub fn check_samples(&self, points: &[PhaseVector], tol: f64) -> Result<()> {
        let at_zero = self.eval(&DVector::zeros(self.dim))?;
        if at_zero.norm() > tol {
            return Err(Error::InvalidLevy(format!("γ(0) = {at_zero} is not zero")));
        }
        for p in points {
            let v = self.eval(p.as_vector())?;
            if v.re > tol * v.norm().max(1.0) {
                return Err(Error::InvalidLevy(format!("Re γ = {} > 0 at {:?}", v.re, p.as_slice())));
            }
        }
        Ok(())
    }
}

pub fn eval_gamma(gamma: &LevyFunction, xi: &PhaseVector) -> Result<Complex64> {
    gamma.eval(xi.as_vector())
}

const FLOW_MEMO_LIMIT: usize = 1 << 16;

/// `τ ↦ e^{τA}`, memoized per `τ`. Quadrature nodes are dyadic points of
/// `[0, t]` and recur across evaluation points.
pub struct MatrixFlow {
    generator: RealMatrix,
    memo: Mutex<HashMap<u64, RealMatrix>>,
}

impl fmt::Debug for MatrixFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MatrixFlow").field(&self.generator).finish()
    }
}

impl MatrixFlow {
    pub fn new(generator: RealMatrix) -> Result<Self> {
        ensure_square(&generator)?;
        Ok(Self {
            generator,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn generator(&self) -> &RealMatrix {
        &self.generator
    }

    pub fn is_static(&self) -> bool {
        self.generator.iter().all(|&x| x == 0.0)
    }

    pub fn at(&self, tau: f64) -> Result<RealMatrix> {
        let key = tau.to_bits();
        if let Some(e) = self.memo.lock().expect("flow memo poisoned").get(&key) {
            return Ok(e.clone());
        }
        let e = expm(&(&self.generator * tau))?;
        let mut memo = self.memo.lock().expect("flow memo poisoned");
        if memo.len() >= FLOW_MEMO_LIMIT {
            memo.clear();
        }
        memo.insert(key, e.clone());
        Ok(e)
    }
}

/// `∫_0^t γ(e^{τA} ξ) dτ` by adaptive Simpson quadrature.
pub fn levy_flow_exponent(
    gamma: &LevyFunction,
    drift_matrix: &RealMatrix,
    t: f64,
    xi: &DVector<f64>,
    cfg: SimpsonConfig,
) -> Result<Complex64> {
    levy_flow_exponent_on(gamma, &MatrixFlow::new(drift_matrix.clone())?, t, xi, cfg)
}

/// As [`levy_flow_exponent`], reusing the memo of `flow`.
pub fn levy_flow_exponent_on(
    gamma: &LevyFunction,
    flow: &MatrixFlow,
    t: f64,
    xi: &DVector<f64>,
    cfg: SimpsonConfig,
) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    ensure_dim(gamma.dim(), xi.len())?;
    ensure_dim(gamma.dim(), flow.generator.nrows())?;
    if gamma.is_zero() || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if flow.is_static() {
        return Ok(gamma.eval(xi)? * t);
    }
    adaptive_simpson(|tau| gamma.eval(&(flow.at(tau)? * xi)), 0.0, t, cfg)
}

/// Characteristic function of a probability law on `R^{2n}`.
#[derive(Clone)]
pub enum ClassicalCF {
    /// The constant 1 (point mass at the origin); fits every dimension.
    Unit,
    Gaussian {
        mean: DVector<f64>,
        covariance: RealMatrix,
    },
    PointMass {
        shift: DVector<f64>,
    },
    /// Finite mixture of point masses: `Σ_k p_k e^{iη_kᵀξ}`.
    Mixture {
        atoms: Vec<(DVector<f64>, f64)>,
    },
    CompoundLevy {
        levy: LevyFunction,
    },
    Product {
        factors: Vec<ClassicalCF>,
    },
    /// `ξ ↦ inner(Bξ)`.
    Pullback {
        inner: Box<ClassicalCF>,
        map: RealMatrix,
    },
    /// `exp(∫_0^t γ(e^{τA}ξ) dτ)`, the jump factor of an evolved semigroup channel.
    LevyFlow {
        levy: LevyFunction,
        flow: Arc<MatrixFlow>,
        t: f64,
        quadrature: SimpsonConfig,
    },
    BlackBox {
        dim: usize,
        evaluator: CfEvaluator,
    },
}

impl fmt::Debug for ClassicalCF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unit => write!(f, "Unit"),
            Self::Gaussian { mean, covariance } => f
                .debug_struct("Gaussian")
                .field("mean", &mean.as_slice())
                .field("covariance", covariance)
                .finish(),
            Self::PointMass { shift } => f.debug_struct("PointMass").field("shift", &shift.as_slice()).finish(),
            Self::Mixture { atoms } => f.debug_struct("Mixture").field("atoms", atoms).finish(),
            Self::CompoundLevy { levy } => f.debug_struct("CompoundLevy").field("levy", levy).finish(),
            Self::Product { factors } => f.debug_struct("Product").field("factors", factors).finish(),
            Self::Pullback { inner, map } => f
                .debug_struct("Pullback")
                .field("inner", inner)
                .field("map", map)
                .finish(),
            Self::LevyFlow { levy, flow, t, .. } => f
                .debug_struct("LevyFlow")
                .field("levy", levy)
                .field("drift_matrix", flow.generator())
                .field("t", t)
                .finish(),
            Self::BlackBox { dim, .. } => f.debug_struct("BlackBox").field("dim", dim).finish(),
        }
    }
}

impl ClassicalCF {
    pub fn gaussian(mean: DVector<f64>, covariance: RealMatrix) -> Result<Self> {
        ensure_phase_dim(mean.len())?;
        ensure_dim(mean.len(), ensure_square(&covariance)?)?;
        let covariance = symmetrized(&covariance, 1e-12)?;
        let report = symmetric_psd_check(&covariance, DEFAULT_PSD_TOL)?;
        if !report.is_psd {
            return Err(Error::NotPsd {
                what: "classical covariance",
                report,
            });
        }
        Ok(Self::Gaussian { mean, covariance })
    }

    pub fn point_mass(shift: DVector<f64>) -> Result<Self> {
        ensure_phase_dim(shift.len())?;
        Ok(Self::PointMass { shift })
    }

    pub fn mixture(atoms: Vec<(DVector<f64>, f64)>) -> Result<Self> {
        let dim = validate_probability_atoms(&atoms)?;
        ensure_phase_dim(dim)?;
        Ok(Self::Mixture { atoms })
    }

    pub fn compound_levy(levy: LevyFunction) -> Self {
        Self::CompoundLevy { levy }
    }

    /// Product of the given factors; unit factors are dropped.
    pub fn product(factors: Vec<ClassicalCF>) -> Result<Self> {
        let mut dim = None;
        let mut kept = Vec::with_capacity(factors.len());
        for f in factors {
            if let Some(d) = f.dim() {
                if let Some(prev) = dim {
                    ensure_dim(prev, d)?;
                }
                dim = Some(d);
            }
            match f {
                Self::Unit => {}
                Self::Product { factors } => kept.extend(factors),
                other => kept.push(other),
            }
        }
        Ok(match kept.len() {
            0 => Self::Unit,
            1 => kept.pop().expect("one factor"),
            _ => Self::Product { factors: kept },
        })
    }

    /// `ξ ↦ self(Bξ)`. Pulling back the unit cf, or pulling back by the exact
    /// identity, returns `self` unchanged.
    pub fn pullback(self, map: RealMatrix) -> Result<Self> {
        let n = ensure_square(&map)?;
        ensure_phase_dim(n)?;
        if let Some(d) = self.dim() {
            ensure_dim(d, n)?;
        }
        if matches!(self, Self::Unit) || map == RealMatrix::identity(n, n) {
            return Ok(self);
        }
        Ok(Self::Pullback {
            inner: Box::new(self),
            map,
        })
    }

    pub fn black_box(dim: usize, evaluator: CfEvaluator) -> Result<Self> {
        ensure_phase_dim(dim)?;
        Ok(Self::BlackBox { dim, evaluator })
    }

    /// Phase-space dimension `2n`, or `None` for the dimension-free unit cf.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Unit => None,
            Self::Gaussian { mean, .. } => Some(mean.len()),
            Self::PointMass { shift } => Some(shift.len()),
            Self::Mixture { atoms } => atoms.first().map(|(eta, _)| eta.len()),
            Self::CompoundLevy { levy } | Self::LevyFlow { levy, .. } => Some(levy.dim()),
            Self::Product { factors } => factors.iter().find_map(ClassicalCF::dim),
            Self::Pullback { map, .. } => Some(map.nrows()),
            Self::BlackBox { dim, .. } => Some(*dim),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Self::Unit)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::Gaussian { .. } => "gaussian",
            Self::PointMass { .. } => "point_mass",
            Self::Mixture { .. } => "mixture",
            Self::CompoundLevy { .. } => "compound_levy",
            Self::Product { .. } => "product",
            Self::Pullback { .. } => "pullback",
            Self::LevyFlow { .. } => "levy_flow",
            Self::BlackBox { .. } => "black_box",
        }
    }

    pub fn eval(&self, xi: &DVector<f64>) -> Result<Complex64> {
        if let Some(d) = self.dim() {
            ensure_dim(d, xi.len())?;
        }
        Ok(match self {
            Self::Unit => ONE,
            Self::Gaussian { mean, covariance } => Complex64::new(-0.5 * quad_form(covariance, xi), mean.dot(xi)).exp(),
            Self::PointMass { shift } => (I * shift.dot(xi)).exp(),
            Self::Mixture { atoms } => atoms.iter().map(|(eta, p)| (I * eta.dot(xi)).exp() * *p).sum(),
            Self::CompoundLevy { levy } => levy.eval(xi)?.exp(),
            Self::Product { factors } => {
                let mut acc = ONE;
                for f in factors {
                    acc *= f.eval(xi)?;
                }
                acc
            }
            Self::Pullback { inner, map } => inner.eval(&(map * xi))?,
            Self::LevyFlow {
                levy,
                flow,
                t,
                quadrature,
            } => levy_flow_exponent_on(levy, flow, *t, xi, *quadrature)?.exp(),
            Self::BlackBox { evaluator, .. } => evaluator(xi),
        })
    }
}

pub fn eval_classical(phi: &ClassicalCF, xi: &PhaseVector) -> Result<Complex64> {
    phi.eval(xi.as_vector())
}

/// Checks a discrete probability vector and returns the common dimension.
pub(crate) fn validate_probability_atoms(atoms: &[(DVector<f64>, f64)]) -> Result<usize> {
    let Some((first, _)) = atoms.first() else {
        return Err(Error::InvalidMeasure("no atoms".into()));
    };
    let dim = first.len();
    let mut total = 0.0;
    for (eta, p) in atoms {
        ensure_dim(dim, eta.len())?;
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::InvalidMeasure(format!("weight {p} is negative")));
        }
        if !eta.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
    }
    Ok(dim)
}

/// The cf `φ(ξ) = μ̂(2Jξ)` of a discrete law `μ = Σ p_k δ_{η_k}`.
pub fn cf_from_measure(atoms: &[(DVector<f64>, f64)], form: &SymplecticForm) -> Result<ClassicalCF> {
    let dim = validate_probability_atoms(atoms)?;
    ensure_dim(form.dim(), dim)?;
    let support: Vec<_> = atoms.iter().filter(|(_, p)| *p > 0.0).cloned().collect();
    if support.iter().all(|(eta, _)| eta.iter().all(|&x| x == 0.0)) {
        return Ok(ClassicalCF::Unit);
    }
    ClassicalCF::Mixture { atoms: support }.pullback(form.matrix() * 2.0)
}

/// Quantum characteristic function of a state.
#[derive(Clone)]
pub enum QuantumCF {
    /// `exp(iλᵀξ - ξᵀKξ)`.
    GaussianState {
        mean: DVector<f64>,
        covariance: RealMatrix,
    },
    BlackBox {
        modes: usize,
        evaluator: CfEvaluator,
    },
    /// `base(Aξ) · exp(-½ ξᵀMξ) · φ(ξ)`, evaluated lazily.
    ChannelOutput {
        base: Arc<QuantumCF>,
        a: RealMatrix,
        m: RealMatrix,
        phi: ClassicalCF,
    },
}

impl fmt::Debug for QuantumCF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianState { mean, covariance } => f
                .debug_struct("GaussianState")
                .field("mean", &mean.as_slice())
                .field("covariance", covariance)
                .finish(),
            Self::BlackBox { modes, .. } => f.debug_struct("BlackBox").field("modes", modes).finish(),
            Self::ChannelOutput { base, a, m, phi } => f
                .debug_struct("ChannelOutput")
                .field("base", base)
                .field("a", a)
                .field("m", m)
                .field("phi", phi)
                .finish(),
        }
    }
}

impl QuantumCF {
    /// Gaussian qcf with mean `λ` and covariance `K`. `K` must be symmetric;
    /// physicality is not required here (that is what the Bochner test is for).
    pub fn gaussian_state(mean: DVector<f64>, covariance: RealMatrix) -> Result<Self> {
        ensure_phase_dim(mean.len())?;
        ensure_dim(mean.len(), ensure_square(&covariance)?)?;
        let covariance = symmetrized(&covariance, 1e-12)?;
        Ok(Self::GaussianState { mean, covariance })
    }

    /// The vacuum, `K = I/2`.
    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ZeroModes);
        }
        Self::gaussian_state(
            DVector::zeros(2 * modes),
            RealMatrix::identity(2 * modes, 2 * modes) * 0.5,
        )
    }

    pub fn black_box(modes: usize, evaluator: CfEvaluator) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self::BlackBox { modes, evaluator })
    }

    pub fn modes(&self) -> usize {
        match self {
            Self::GaussianState { mean, .. } => mean.len() / 2,
            Self::BlackBox { modes, .. } => *modes,
            Self::ChannelOutput { a, .. } => a.nrows() / 2,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn eval(&self, xi: &DVector<f64>) -> Result<Complex64> {
        ensure_dim(self.dim(), xi.len())?;
        match self {
            Self::GaussianState { mean, covariance } => {
                Ok(Complex64::new(-quad_form(covariance, xi), mean.dot(xi)).exp())
            }
            Self::BlackBox { evaluator, .. } => Ok(evaluator(xi)),
            Self::ChannelOutput { base, a, m, phi } => {
                let inner = base.eval(&(a * xi))?;
                Ok(inner * (-0.5 * quad_form(m, xi)).exp() * phi.eval(xi)?)
            }
        }
    }
}

pub fn eval_quantum(f: &QuantumCF, xi: &PhaseVector) -> Result<Complex64> {
    f.eval(xi.as_vector())
}

/// `t ↦ f(tξ)`, the classical cf of the observable attached to direction `ξ`.
pub fn section_cf(f: &QuantumCF, xi: &PhaseVector, t: f64) -> Result<Complex64> {
    f.eval(&(xi.as_vector() * t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    /// Joint cf of `√2 (q_1, ..., q_n)`, read off at `(0, r_1, 0, r_2, ...)`.
    Position,
    /// Joint cf of `-√2 (p_1, ..., p_n)`, read off at `(r_1, 0, r_2, 0, ...)`.
    Momentum,
}

/// Embeds `r ∈ R^n` into phase space along the chosen quadrature.
pub fn embed_marginal(which: Quadrature, r: &[f64]) -> Result<PhaseVector> {
    let mut coords = vec![0.0; 2 * r.len()];
    let offset = match which {
        Quadrature::Position => 1,
        Quadrature::Momentum => 0,
    };
    for (j, &x) in r.iter().enumerate() {
        coords[2 * j + offset] = x;
    }
    PhaseVector::new(coords)
}

pub fn marginal_cf(f: &QuantumCF, which: Quadrature, r: &[f64]) -> Result<Complex64> {
    ensure_dim(f.modes(), r.len())?;
    f.eval(embed_marginal(which, r)?.as_vector())
}
