//! Numerical toolkit for the complex geometric (Garrison–Wright) phase of
//! metastable quantum systems.
//!
//! A metastable state evolves under a non-Hermitian effective Hamiltonian
//! whose complex eigenfrequencies carry both level positions (real part) and
//! half-widths (imaginary part). When such a system is driven around a closed
//! loop, the surviving amplitude factorizes into a dynamical piece and a
//! purely geometric piece: a complex phase attached to the cyclic evolution
//! of a left/right eigenvector pair. Its real part is the geometric phase,
//! its imaginary part the geometric decay.
//!
//! The crate provides:
//!
//! - [`numerics`]: dense complex linear algebra (eigensolver, matrix
//!   exponential), a fixed-step Schrödinger integrator, and quadrature.
//! - [`biortho`]: biorthogonal left/right eigensystems and smooth eigenbranch
//!   tracking around closed Hamiltonian loops.
//! - [`geomphase`]: the complex phase in all its forms — Aharonov–Anandan
//!   limit, gauge-dependent and gauge-invariant line integrals, open-path
//!   decay accumulation, the curvature two-form with its surface integral,
//!   and the sudden-limit non-Abelian holonomy.
//! - [`dynamics`]: exact time evolution, dynamical-phase subtraction, and
//!   adiabatic-limit validation.
//! - [`scenarios`]: concrete models — the complex-cone two-level system,
//!   dichroic Jones-calculus optics, and the Aharonov–Casher effective
//!   moment with its topological winding factors.
//! - [`bornopp`]: Born–Oppenheimer reduction with a metastable fast
//!   subsystem — complex scalar/vector potentials and the ring spectrum.
//!
//! The crate is `no_std` (with `alloc`); every operation is a pure function
//! of its inputs and safe to call from multiple threads.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

use alloc::string::String;

pub mod biortho;
pub mod bornopp;
pub mod dynamics;
pub mod geomphase;
pub mod numerics;
pub mod scenarios;

pub use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GwError {
    #[error("contract violation: {what}")]
    ContractViolation { what: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("eigensolver failed to converge: worst residual {residual:.3e} (budget {iterations} iterations)")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("integration blew up: non-finite state at t = {t}")]
    Blowup { t: f64 },

    #[error("eigenvalue gap {gap:.3e} below degeneracy floor {floor:.3e}")]
    NearDegeneracy { gap: f64, floor: f64 },

    #[error("normalized left/right overlap {overlap:.3e} below exceptional-point floor {floor:.3e}")]
    ExceptionalPoint { overlap: f64, floor: f64 },

    #[error("ambiguous branch matching at t = {t}: candidate separation {separation:.3e} below tolerance")]
    BranchCollision { t: f64, separation: f64 },

    #[error("branch {branch} does not return to its initial subspace: overlap {overlap:.3e}")]
    NonCyclicBranch { branch: usize, overlap: f64 },

    #[error("polarization circuit is not cyclic: output/input overlap {overlap:.3e}")]
    NonCyclicPolarization { overlap: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, GwError>;

impl GwError {
    pub(crate) fn contract(what: impl Into<String>) -> Self {
        GwError::ContractViolation { what: what.into() }
    }
}
