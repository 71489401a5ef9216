//! Index theory for finite-dimensional inclusions of C*-algebras: Watatani
//! indices, Jones basic constructions, Markov traces, Pimsner-Popa
//! constants and angles between intermediate subalgebras.
//!
//! Everything is realized concretely inside full matrix algebras with dense
//! complex linear algebra. The crate is `no_std` with `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod angle;
pub mod basic_construction;
pub mod error;
pub mod expectation;
pub mod linalg;
pub mod markov;
pub mod inclusion;
pub mod instances;
pub mod multimatrix;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use multimatrix::{AmbientAlgebra, DimensionVector, TraceFunctional};
