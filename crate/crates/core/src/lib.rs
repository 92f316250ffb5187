//! Dense Hamiltonian simulation limits, made executable.
//!
//! The crate builds the hard-instance Hamiltonians behind the lower bounds
//! for simulating non-sparse Hamiltonians, evaluates the norm hierarchy that
//! governs simulation cost, reproduces the parity and sign-detection
//! experiments by exact time evolution, and implements the tree and
//! star-forest decompositions that give efficient simulations.
//!
//! See the guide under `book/` for a walk through the concepts.

pub mod error;
pub mod experiments;
pub mod format;
pub mod graphdecomp;
pub mod instances;
pub mod matcore;
pub mod norms;
pub mod stochastic;

pub use error::{Error, Result};
pub use matcore::{C64, HermitianMatrix, Matrix, Spectrum, StateVector};

/// The guide's chapters, compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/graph-decomposition.md")]
    mod graph_decomposition {}
    #[doc = include_str!("../../../book/src/concentration.md")]
    mod concentration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
