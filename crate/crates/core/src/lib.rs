//! Twisted convolution channels on bosonic phase space.
//!
//! A channel `T(φ, M, A)` acts on quantum characteristic functions by
//! `f ↦ f(Aξ) · exp(-½ ξᵀMξ) · φ(ξ)`. The crate builds and validates such
//! channels, composes them, generates one-parameter semigroups of them, and
//! checks the underlying operator identities against a truncated Fock space.

pub mod bochner;
pub mod channel;
pub mod char_fn;
pub mod cli;
pub mod error;
pub mod fock_oracle;
pub mod linalg;
pub mod phase_space;
pub mod quadrature;
pub mod semigroup;

pub use channel::{compose, TwistedChannel};
pub use char_fn::{ClassicalCF, LevyFunction, QuantumCF};
pub use error::{Error, Result};
pub use phase_space::{PhaseVector, PsdReport, SymplecticForm};
pub use semigroup::SemigroupGenerator;
