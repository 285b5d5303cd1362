//! Quantum message authentication from purity-testing stabilizer codes.
//!
//! Layers, bottom up:
//!
//! * [`gf2e`]: binary extension fields and the tower `GF((2^s)^(2r))`.
//! * [`pauli`]: Pauli labels, symplectic forms, and the field-to-standard
//!   basis alignment.
//! * [`ptcodes`]: the curve-indexed family of codes and its exact error bound.
//! * [`stabcode`]: symplectic completion, syndromes, logical actions and
//!   dense encoders.
//! * [`authproto`]: keys, the quantum one-time pad, encode/verify, and exact
//!   soundness for Pauli attacks.
//! * [`densesim`]: small-system density-matrix simulation of adversaries and
//!   the lower-bound demonstrations.

pub mod authproto;
pub mod densesim;
pub mod error;
pub mod gf2;
pub mod gf2e;
pub mod pauli;
pub mod ptcodes;
pub mod stabcode;
pub mod state;

pub use error::{Error, Result};
pub use gf2e::{BaseField, FieldDescriptor, TowerElement, TowerField};
pub use pauli::{
    align_bases, symplectic_field, symplectic_standard, PauliVector, SymplecticBasisMap,
};
pub use state::{DenseState, DensityMatrix};
