//! The complex geometric phase of cyclic two-state (left/right) evolution.
//!
//! For a tracked eigenbranch with right states `|psi(t)>` and left states
//! `<phi(t)|`, the cyclic evolution carries the complex phase
//!
//! ```text
//! phi = i oint dt <phi|d_t psi> / <phi|psi>
//!     = -(i/2) ln[ <psi(0)|psi(T)> / <phi(T)|phi(0)> ]
//!       + (i/2) oint dt ( <phi|d_t psi> - <d_t phi|psi> ) / <phi|psi>
//! ```
//!
//! whose second form is independent of the per-sample phase (and, once the
//! states are unit-normalized, of arbitrary smooth complex rescalings). The
//! real part is the geometric phase, the imaginary part the geometric decay
//! exponent; the imaginary part stays meaningful on open paths.
//!
//! Discretization: the time integrals are accumulated interval by interval
//! as principal logarithms of two-point transport ratios, symmetrized over
//! the bra/ket sampling ends. Each half-term is the exact log-derivative
//! integral for a frozen partner state, so the accumulation is second-order
//! accurate and — crucially — absorbs the one O(1) phase jump that endpoint
//! identification concentrates in the final interval of a tracked cyclic
//! branch. Central differences of the raw samples would alias that jump.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::{EigenbranchPath, EXCEPTIONAL_POINT_FLOOR};
use crate::numerics::{c64, pairwise_sum, wrap_principal, ComplexVector};
use crate::{GwError, Result};

mod holonomy;
mod surface;

pub use holonomy::nonabelian_holonomy;
pub use surface::{boundary_loop, phase_surface_integral, two_form, ParameterSurface};

/// Complex geometric phase with branch bookkeeping and grid diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct GwPhase {
    value: Complex64,
    real_part_branch: i32,
    max_integrand: f64,
    samples: usize,
}

impl GwPhase {
    pub(crate) fn from_accumulated(value: Complex64, max_integrand: f64, samples: usize) -> Self {
        let principal = wrap_principal(value.re);
        let winding = ((value.re - principal) / (2.0 * core::f64::consts::PI)).round();
        Self {
            value,
            real_part_branch: winding as i32,
            max_integrand,
            samples,
        }
    }

    /// Full accumulated complex value (real part not reduced mod 2pi).
    pub fn value(&self) -> Complex64 {
        self.value
    }

    /// Real part reduced to (-pi, pi].
    pub fn principal_re(&self) -> f64 {
        wrap_principal(self.value.re)
    }

    /// Integer winding such that `re = principal_re + 2 pi branch`.
    pub fn real_part_branch(&self) -> i32 {
        self.real_part_branch
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }

    /// Largest per-interval integrand magnitude encountered.
    pub fn max_integrand(&self) -> f64 {
        self.max_integrand
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// Unit-normalized copies of the branch states.
fn normalized_states(branch: &EigenbranchPath) -> Result<(Vec<ComplexVector>, Vec<ComplexVector>)> {
    let n = branch.len();
    let mut psis = Vec::with_capacity(n);
    let mut phis = Vec::with_capacity(n);
    for k in 0..n {
        psis.push(branch.right(k).normalized()?);
        phis.push(branch.left(k).normalized()?);
    }
    Ok((psis, phis))
}

fn check_overlaps(psis: &[ComplexVector], phis: &[ComplexVector]) -> Result<()> {
    for (psi, phi) in psis.iter().zip(phis) {
        let ov = phi.dot(psi).norm();
        if ov < EXCEPTIONAL_POINT_FLOOR {
            return Err(GwError::ExceptionalPoint {
                overlap: ov,
                floor: EXCEPTIONAL_POINT_FLOOR,
            });
        }
    }
    Ok(())
}

fn principal_log(z: Complex64) -> Result<Complex64> {
    if z.norm() < 1e-300 {
        return Err(GwError::ExceptionalPoint {
            overlap: z.norm(),
            floor: EXCEPTIONAL_POINT_FLOOR,
        });
    }
    Ok(z.ln())
}

/// Per-interval transport increments.
///
/// `ket[k]` integrates `<phi|d_t psi>/<phi|psi>` over `[t_k, t_{k+1}]`
/// (bra frozen at the interval ends, symmetrized); `bra[k]` likewise
/// integrates `<d_t phi|psi>/<phi|psi>`.
pub(crate) struct TransportIncrements {
    pub ket: Vec<Complex64>,
    pub bra: Vec<Complex64>,
}

pub(crate) fn transport_increments(
    psis: &[ComplexVector],
    phis: &[ComplexVector],
) -> Result<TransportIncrements> {
    let n = psis.len();
    let mut ket = Vec::with_capacity(n - 1);
    let mut bra = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let p0s0 = phis[k].dot(&psis[k]);
        let p0s1 = phis[k].dot(&psis[k + 1]);
        let p1s0 = phis[k + 1].dot(&psis[k]);
        let p1s1 = phis[k + 1].dot(&psis[k + 1]);

        let b = (principal_log(p0s1 / p0s0)? + principal_log(p1s1 / p1s0)?) * 0.5;
        let c = (principal_log(p1s0 / p0s0)? + principal_log(p1s1 / p0s1)?) * 0.5;
        ket.push(b);
        bra.push(c);
    }
    Ok(TransportIncrements { ket, bra })
}

fn require_cyclic(branch: &EigenbranchPath) -> Result<()> {
    if !branch.is_cyclic() {
        return Err(GwError::contract(
            "operation requires a cyclic eigenbranch (tracked over a closed loop)",
        ));
    }
    Ok(())
}

/// Aharonov–Anandan phase of a cyclic branch of a Hermitian loop:
/// `-i ln<psi(0)|psi(T)> + i int dt <psi|d_t psi>` with unit-normalized
/// states. The result is real by construction; non-Hermitian input is
/// rejected through the left/right alignment of the branch.
pub fn aa_phase(branch: &EigenbranchPath) -> Result<GwPhase> {
    require_cyclic(branch)?;
    let (psis, phis) = normalized_states(branch)?;

    // Hermitian loops have parallel left and right eigenvectors.
    for (psi, phi) in psis.iter().zip(&phis) {
        let parallel = phi.dot(psi).norm();
        if parallel < 1.0 - 1e-8 {
            return Err(GwError::contract(
                "aa_phase requires a Hermitian loop (left and right vectors parallel)",
            ));
        }
    }

    let n = psis.len();
    let mut total = 0.0f64;
    let mut max_integrand = 0.0f64;
    let dt = branch.grid().step();
    for k in 0..n - 1 {
        let arg = psis[k].dot(&psis[k + 1]).arg();
        total -= arg;
        max_integrand = max_integrand.max(arg.abs() / dt);
    }
    // Endpoint term -i ln<psi(0)|psi(T)>: identically zero for identified
    // endpoints, kept for form.
    let endpoint = principal_log(psis[0].dot(&psis[n - 1]))? * c64(0.0, -1.0);
    Ok(GwPhase::from_accumulated(
        c64(total, 0.0) + endpoint,
        max_integrand,
        n,
    ))
}

/// Gauge-dependent line integral `i oint dt <phi|d_t psi>/<phi|psi>`.
///
/// On an endpoint-identified branch the value is defined modulo the 2 pi
/// winding of the per-sample phase choice; left-vector rescalings cancel
/// identically.
pub fn phase_naive(branch: &EigenbranchPath) -> Result<GwPhase> {
    require_cyclic(branch)?;
    let (psis, phis) = normalized_states(branch)?;
    check_overlaps(&psis, &phis)?;
    let inc = transport_increments(&psis, &phis)?;
    let dt = branch.grid().step();
    let max_integrand = inc
        .ket
        .iter()
        .map(|b| b.norm() / dt)
        .fold(0.0, f64::max);
    let value = pairwise_sum(&inc.ket) * c64(0.0, 1.0);
    Ok(GwPhase::from_accumulated(value, max_integrand, psis.len()))
}

/// Gauge-invariant line integral (the symmetric two-state form).
///
/// States are unit-normalized internally, which extends the phase-choice
/// invariance to arbitrary smooth nonvanishing complex rescalings of either
/// family. The real part accumulates interval by interval; the reported
/// winding separates it from the principal value.
pub fn phase_line_integral(branch: &EigenbranchPath) -> Result<GwPhase> {
    require_cyclic(branch)?;
    let value = symmetric_accumulation(branch)?;
    Ok(value)
}

fn symmetric_accumulation(branch: &EigenbranchPath) -> Result<GwPhase> {
    let (psis, phis) = normalized_states(branch)?;
    check_overlaps(&psis, &phis)?;
    let inc = transport_increments(&psis, &phis)?;
    let n = psis.len();
    let dt = branch.grid().step();

    let diffs: Vec<Complex64> = inc
        .ket
        .iter()
        .zip(&inc.bra)
        .map(|(b, c)| b - c)
        .collect();
    let max_integrand = diffs
        .iter()
        .map(|d| 0.5 * d.norm() / dt)
        .fold(0.0, f64::max);

    let integral = pairwise_sum(&diffs) * c64(0.0, 0.5);
    let ratio = psis[0].dot(&psis[n - 1]) / phis[n - 1].dot(&phis[0]);
    let endpoint = principal_log(ratio)? * c64(0.0, -0.5);
    Ok(GwPhase::from_accumulated(
        integral + endpoint,
        max_integrand,
        n,
    ))
}

/// Geometric decay accumulated along an open segment: the imaginary part of
/// the symmetric line integral plus the endpoint log-magnitude term.
/// Invariant under reparametrization and per-sample complex rescaling.
pub fn im_phase_open_path(branch: &EigenbranchPath) -> Result<f64> {
    let (psis, phis) = normalized_states(branch)?;
    check_overlaps(&psis, &phis)?;
    let inc = transport_increments(&psis, &phis)?;
    let n = psis.len();

    let diffs: Vec<Complex64> = inc
        .ket
        .iter()
        .zip(&inc.bra)
        .map(|(b, c)| b - c)
        .collect();
    let integral = pairwise_sum(&diffs) * c64(0.0, 0.5);
    let ratio = psis[0].dot(&psis[n - 1]) / phis[n - 1].dot(&phis[0]);
    // Im of -(i/2) Ln(ratio) = -(1/2) ln|ratio|: only the magnitude enters,
    // so no branch ambiguity on open paths.
    Ok(integral.im - 0.5 * ratio.norm().ln())
}
