//! JSON config files. Matrices are row-major arrays of length `(2n)²`.
//!
//! ```json
//! {"n": 1, "A": [1, 0, 0, 1], "M": [0, 0, 0, 0], "phi": {"type": "unit"}}
//! ```

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channel::TwistedChannel;
use crate::char_fn::{cf_from_measure, ClassicalCF, LevyFunction, MatrixFlow, QuantumCF};
use crate::error::{Error, Result};
use crate::linalg::{from_row_major, to_row_major, RealMatrix};
use crate::phase_space::SymplecticForm;
use crate::quadrature::{SimpsonConfig, DEFAULT_MAX_PANELS, DEFAULT_QUAD_TOL};
use crate::semigroup::SemigroupGenerator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub eta: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
    #[serde(default)]
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian_part: Option<Vec<f64>>,
}

fn default_quad_tol() -> f64 {
    DEFAULT_QUAD_TOL
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    #[default]
    Unit,
    Gaussian {
        mean: Vec<f64>,
        covariance: Vec<f64>,
    },
    PointMass {
        shift: Vec<f64>,
    },
    Mixture {
        atoms: Vec<AtomConfig>,
    },
    /// `μ̂(2Jξ)` for a discrete law; read-only shorthand.
    Convolution {
        atoms: Vec<AtomConfig>,
    },
    CompoundLevy {
        gamma: GammaConfig,
    },
    Product {
        factors: Vec<PhiConfig>,
    },
    Pullback {
        inner: Box<PhiConfig>,
        map: Vec<f64>,
    },
    LevyFlow {
        gamma: GammaConfig,
        #[serde(rename = "A")]
        a: Vec<f64>,
        t: f64,
        #[serde(default = "default_quad_tol")]
        quad_tol: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    #[serde(default)]
    pub phi: PhiConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "N")]
    pub noise: Vec<f64>,
    #[serde(default)]
    pub gamma: GammaConfig,
}

/// Gaussian state `exp(iλᵀξ - ξᵀKξ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BochnerTarget {
    ChannelOutput { state: StateConfig, channel: ChannelConfig },
    State(StateConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSuiteConfig {
    pub cutoffs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<String>>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn matrix(dim: usize, data: &[f64], what: &str) -> Result<RealMatrix> {
    if data.len() != dim * dim {
        return Err(Error::Config(format!(
            "{what} needs {} entries for a {dim}x{dim} matrix, got {}",
            dim * dim,
            data.len()
        )));
    }
    from_row_major(dim, data)
}

fn vector(dim: usize, data: &[f64], what: &str) -> Result<DVector<f64>> {
    if data.len() != dim {
        return Err(Error::Config(format!("{what} needs {dim} entries, got {}", data.len())));
    }
    Ok(DVector::from_column_slice(data))
}

fn phase_dim(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    Ok(2 * n)
}

fn atoms(dim: usize, list: &[AtomConfig]) -> Result<Vec<(DVector<f64>, f64)>> {
    list.iter()
        .map(|a| Ok((vector(dim, &a.eta, "atom eta")?, a.weight)))
        .collect()
}

impl GammaConfig {
    pub fn build(&self, dim: usize) -> Result<LevyFunction> {
        let mut gamma = LevyFunction::zero(dim)?;
        if let Some(drift) = &self.drift {
            gamma = gamma.with_drift(vector(dim, drift, "gamma drift")?)?;
        }
        if let Some(b) = &self.gaussian_part {
            gamma = gamma.with_gaussian_part(matrix(dim, b, "gamma gaussian_part")?)?;
        }
        for atom in &self.atoms {
            gamma = gamma.with_atom(vector(dim, &atom.eta, "atom eta")?, atom.weight)?;
        }
        Ok(gamma)
    }

    pub fn from_levy(levy: &LevyFunction) -> Result<Self> {
        if levy.external().is_some() {
            return Err(Error::NotSerializable("a black-box Lévy exponent"));
        }
        let drift = levy.drift();
        let b = levy.gaussian_part();
        Ok(Self {
            drift: drift.iter().any(|&x| x != 0.0).then(|| drift.as_slice().to_vec()),
            atoms: levy
                .atoms()
                .iter()
                .map(|a| AtomConfig {
                    eta: a.location.as_slice().to_vec(),
                    weight: a.weight,
                })
                .collect(),
            gaussian_part: b.iter().any(|&x| x != 0.0).then(|| to_row_major(b)),
        })
    }
}

impl PhiConfig {
    pub fn build(&self, dim: usize) -> Result<ClassicalCF> {
        match self {
            Self::Unit => Ok(ClassicalCF::Unit),
            Self::Gaussian { mean, covariance } => ClassicalCF::gaussian(
                vector(dim, mean, "phi mean")?,
                matrix(dim, covariance, "phi covariance")?,
            ),
            Self::PointMass { shift } => ClassicalCF::point_mass(vector(dim, shift, "phi shift")?),
            Self::Mixture { atoms: list } => ClassicalCF::mixture(atoms(dim, list)?),
            Self::Convolution { atoms: list } => cf_from_measure(&atoms(dim, list)?, &SymplecticForm::new(dim / 2)?),
            Self::CompoundLevy { gamma } => Ok(ClassicalCF::compound_levy(gamma.build(dim)?)),
            Self::Product { factors } => {
                ClassicalCF::product(factors.iter().map(|f| f.build(dim)).collect::<Result<Vec<_>>>()?)
            }
            Self::Pullback { inner, map } => inner.build(dim)?.pullback(matrix(dim, map, "pullback map")?),
            Self::LevyFlow { gamma, a, t, quad_tol } => {
                if t.is_nan() || *t < 0.0 {
                    return Err(Error::NegativeTime(*t));
                }
                Ok(ClassicalCF::LevyFlow {
                    levy: gamma.build(dim)?,
                    flow: Arc::new(MatrixFlow::new(matrix(dim, a, "levy_flow A")?)?),
                    t: *t,
                    quadrature: SimpsonConfig {
                        abs_tol: *quad_tol,
                        max_panels: DEFAULT_MAX_PANELS,
                    },
                })
            }
        }
    }

    pub fn from_cf(phi: &ClassicalCF) -> Result<Self> {
        Ok(match phi {
            ClassicalCF::Unit => Self::Unit,
            ClassicalCF::Gaussian { mean, covariance } => Self::Gaussian {
                mean: mean.as_slice().to_vec(),
                covariance: to_row_major(covariance),
            },
            ClassicalCF::PointMass { shift } => Self::PointMass {
                shift: shift.as_slice().to_vec(),
            },
            ClassicalCF::Mixture { atoms } => Self::Mixture {
                atoms: atoms
                    .iter()
                    .map(|(eta, w)| AtomConfig {
                        eta: eta.as_slice().to_vec(),
                        weight: *w,
                    })
                    .collect(),
            },
            ClassicalCF::CompoundLevy { levy } => Self::CompoundLevy {
                gamma: GammaConfig::from_levy(levy)?,
            },
            ClassicalCF::Product { factors } => Self::Product {
                factors: factors.iter().map(Self::from_cf).collect::<Result<_>>()?,
            },
            ClassicalCF::Pullback { inner, map } => Self::Pullback {
                inner: Box::new(Self::from_cf(inner)?),
                map: to_row_major(map),
            },
            ClassicalCF::LevyFlow {
                levy,
                flow,
                t,
                quadrature,
            } => Self::LevyFlow {
                gamma: GammaConfig::from_levy(levy)?,
                a: to_row_major(flow.generator()),
                t: *t,
                quad_tol: quadrature.abs_tol,
            },
            ClassicalCF::BlackBox { .. } => return Err(Error::NotSerializable("a black-box cf")),
        })
    }
}

/// Raw matrices of a channel config, before any admissibility check.
pub struct ChannelParts {
    pub dim: usize,
    pub a: RealMatrix,
    pub m: RealMatrix,
    pub phi: ClassicalCF,
}

impl ChannelConfig {
    pub fn parts(&self) -> Result<ChannelParts> {
        let dim = phase_dim(self.n)?;
        Ok(ChannelParts {
            dim,
            a: matrix(dim, &self.a, "A")?,
            m: matrix(dim, &self.m, "M")?,
            phi: self.phi.build(dim)?,
        })
    }

    pub fn build(&self, tol: f64) -> Result<TwistedChannel> {
        let parts = self.parts()?;
        TwistedChannel::with_tolerance(parts.phi, parts.m, parts.a, tol)
    }

    pub fn from_channel(ch: &TwistedChannel) -> Result<Self> {
        Ok(Self {
            n: ch.modes(),
            a: to_row_major(ch.a()),
            m: to_row_major(ch.m()),
            phi: PhiConfig::from_cf(ch.phi())?,
        })
    }
}

impl GeneratorConfig {
    pub fn matrices(&self) -> Result<(usize, RealMatrix, RealMatrix)> {
        let dim = phase_dim(self.n)?;
        Ok((dim, matrix(dim, &self.a, "A")?, matrix(dim, &self.noise, "N")?))
    }

    pub fn build(&self, tol: f64) -> Result<SemigroupGenerator> {
        let (dim, a, noise) = self.matrices()?;
        SemigroupGenerator::with_tolerance(a, noise, self.gamma.build(dim)?, tol)
    }
}

impl StateConfig {
    pub fn build(&self) -> Result<QuantumCF> {
        let dim = self.mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddLength(dim));
        }
        QuantumCF::gaussian_state(
            DVector::from_column_slice(&self.mean),
            matrix(dim, &self.covariance, "covariance")?,
        )
    }
}
