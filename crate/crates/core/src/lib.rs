//! Adiabatic analysis of time-dependent Lindblad dynamics.
//!
//! The crate works in the coherence-vector picture: density matrices are
//! expanded in an orthogonal operator basis and the Lindblad generator
//! becomes a (generally non-Hermitian) matrix acting on that vector. Its
//! Jordan decomposition along a scheduled path drives the adiabatic
//! conditions, the adiabatic propagators and the thermodynamic rates.

pub mod adiabatic_conditions;
pub mod error;
pub mod evolution;
pub mod hilbert_schmidt;
pub mod linalg;
pub mod lindblad;
pub mod models;
pub mod quadrature;
pub mod spectral;
pub mod thermo;

pub use adiabatic_conditions::{AdiabaticityReport, PairReport, XiProfile};
pub use error::{Error, Result};
pub use evolution::{AdiabaticPropagator, PropagatorKind};
pub use hilbert_schmidt::{CoherenceVector, OperatorBasis};
pub use linalg::{CMatrix, CVector};
pub use lindblad::{LindbladModel, Superoperator};
pub use spectral::{JordanBasis, JordanBlockChain, SpectralTrajectory};

pub use num_complex::Complex64;
