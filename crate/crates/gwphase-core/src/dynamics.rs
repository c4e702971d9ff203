//! Exact non-Hermitian Schrödinger evolution and adiabatic-limit checks.
//!
//! `evolve` integrates `i d_t |psi> = H(t) |psi>` with the loop linearly
//! interpolated between samples, then splits the cyclic survival amplitude
//! into dynamical and geometric parts: starting from the branch eigenstate,
//! the adiabatic solution is `psi(T) = e^{-i int omega dt} e^{i phi} psi(0)`,
//! so the extracted geometric phase is `-i ln(c) + int omega dt`, unwrapped
//! against the adiabatic prediction from the gauge-invariant line integral.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::{track_branches, EigenbranchPath, HamiltonianLoop};
use crate::geomphase::{nonabelian_holonomy, phase_line_integral};
use crate::numerics::{c64, integrate_ode, quadrature, ComplexMatrix, ComplexVector, TimeGrid};
use crate::{GwError, Result};

/// Ratio of the minimal real eigenvalue gap to the drive frequency above
/// which a loop is reported as adiabatic. Reporting convention only.
pub const ADIABATIC_RATIO_FLOOR: f64 = 10.0;

/// Outcome of one exact evolution around a loop.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: ComplexVector,
    /// Survival amplitude `c = <phi_i(0)|psi(T)> / <phi_i(0)|psi_i(0)>`.
    pub survival_amplitude: Complex64,
    /// `int omega_i dt` along the tracked branch.
    pub dynamical_phase: Complex64,
    /// `-i ln(c) + dynamical_phase`, real part unwrapped against the
    /// adiabatic prediction.
    pub extracted_geometric: Complex64,
    /// Line-integral prediction used as the unwrapping reference.
    pub adiabatic_prediction: Complex64,
}

/// Integrate the loop exactly from the branch-`i` eigenstate.
pub fn evolve(
    lp: &HamiltonianLoop,
    branch: usize,
    steps: usize,
    tol: f64,
) -> Result<EvolutionResult> {
    if steps + 1 < lp.samples().len() {
        return Err(GwError::contract(
            "integrator steps must be at least the loop sample count",
        ));
    }
    let branches = track_branches(lp, tol)?;
    if branch >= branches.len() {
        return Err(GwError::contract("branch index out of range"));
    }
    let path = &branches[branch];
    let prediction = phase_line_integral(path)?.value();
    evolve_against(lp, path, steps, prediction)
}

fn evolve_against(
    lp: &HamiltonianLoop,
    path: &EigenbranchPath,
    steps: usize,
    prediction: Complex64,
) -> Result<EvolutionResult> {
    let grid = lp.grid();
    let psi0 = path.right(0).normalized()?;
    let phi0 = path.left(0).normalized()?;

    let fine = TimeGrid::new(grid.t0(), grid.t1(), steps + 1)?;
    let mut rhs = |t: f64, y: &ComplexVector| lp.interpolate(t).matvec(y).scale(c64(0.0, -1.0));
    let final_state = integrate_ode(&mut rhs, &psi0, &fine)?;

    let survival = phi0.dot(&final_state) / phi0.dot(&psi0);
    if survival.norm() < 1e-300 {
        return Err(GwError::contract("survival amplitude vanished"));
    }
    let dynamical = quadrature(path.omegas(), grid)?;

    let raw = survival.ln() * c64(0.0, -1.0) + dynamical;
    let two_pi = 2.0 * core::f64::consts::PI;
    let winding = ((prediction.re - raw.re) / two_pi).round();
    let extracted = c64(raw.re + two_pi * winding, raw.im);

    Ok(EvolutionResult {
        final_state,
        survival_amplitude: survival,
        dynamical_phase: dynamical,
        extracted_geometric: extracted,
        adiabatic_prediction: prediction,
    })
}

/// Extraction error `|extracted - predicted|` across a family of loops
/// sharing one shape but rescaled in duration.
pub fn adiabatic_sweep(
    family: &dyn Fn(f64) -> Result<HamiltonianLoop>,
    branch: usize,
    periods: &[f64],
    steps_per_unit_time: f64,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if periods.is_empty() {
        return Err(GwError::contract("sweep needs at least one period"));
    }
    let mut out = Vec::with_capacity(periods.len());
    for &period in periods {
        let lp = family(period)?;
        let steps = ((period * steps_per_unit_time).ceil() as usize).max(lp.samples().len());
        let result = evolve(&lp, branch, steps, tol)?;
        let err = (result.extracted_geometric - result.adiabatic_prediction).norm();
        out.push((period, err));
    }
    Ok(out)
}

/// Spectral-gap diagnostic of a loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    /// `min over t, i != j` of `|Re(omega_i - omega_j)|`.
    pub min_re_gap: f64,
    /// `2 pi / T`.
    pub drive_frequency: f64,
    pub ratio: f64,
    pub adiabatic: bool,
}

pub fn adiabaticity_diagnostic(lp: &HamiltonianLoop, tol: f64) -> Result<AdiabaticityReport> {
    if lp.dim() < 2 {
        return Err(GwError::contract(
            "adiabaticity needs at least two branches",
        ));
    }
    let branches = track_branches(lp, tol)?;
    let n = lp.samples().len();
    let mut min_gap = f64::INFINITY;
    for k in 0..n {
        for i in 0..branches.len() {
            for j in i + 1..branches.len() {
                let gap = (branches[i].omega(k).re - branches[j].omega(k).re).abs();
                min_gap = min_gap.min(gap);
            }
        }
    }
    let drive = 2.0 * core::f64::consts::PI / lp.grid().span();
    let ratio = min_gap / drive;
    Ok(AdiabaticityReport {
        min_re_gap: min_gap,
        drive_frequency: drive,
        ratio,
        adiabatic: ratio >= ADIABATIC_RATIO_FLOOR,
    })
}

/// Deviation of the exact cycle propagator from the sudden-limit holonomy:
/// `| U_exact(T) e^{+i int omega_bar dt} - W |_F` with `omega_bar(t)` the
/// trace-averaged eigenvalue. Shrinks as the cycle gets faster relative to
/// the eigenvalue splittings.
pub fn sudden_propagator_check(lp: &HamiltonianLoop, steps: usize, tol: f64) -> Result<f64> {
    if !lp.is_cyclic() {
        return Err(GwError::contract("sudden check requires a cyclic loop"));
    }
    if steps + 1 < lp.samples().len() {
        return Err(GwError::contract(
            "integrator steps must be at least the loop sample count",
        ));
    }
    let dim = lp.dim();
    let grid = lp.grid();

    // Mean eigenvalue (trace average) sampled along the loop.
    let omega_bar: Vec<Complex64> = lp
        .samples()
        .iter()
        .map(|h| h.trace() / dim as f64)
        .collect();
    let dyn_phase = quadrature(&omega_bar, grid)?;

    // Exact propagator: matrix RK4 on U' = -i H(t) U.
    let fine = TimeGrid::new(grid.t0(), grid.t1(), steps + 1)?;
    let h = fine.step();
    let mut u = ComplexMatrix::identity(dim);
    let deriv = |t: f64, m: &ComplexMatrix| lp.interpolate(t).matmul(m).scale(c64(0.0, -1.0));
    for k in 0..steps {
        let t = fine.sample(k);
        let k1 = deriv(t, &u);
        let k2 = deriv(t + 0.5 * h, &u.add(&k1.scale(c64(0.5 * h, 0.0))));
        let k3 = deriv(t + 0.5 * h, &u.add(&k2.scale(c64(0.5 * h, 0.0))));
        let k4 = deriv(t + h, &u.add(&k3.scale(c64(h, 0.0))));
        let incr = k1
            .add(&k2.scale(c64(2.0, 0.0)))
            .add(&k3.scale(c64(2.0, 0.0)))
            .add(&k4);
        u = u.add(&incr.scale(c64(h / 6.0, 0.0)));
        if !u.is_finite() {
            return Err(GwError::Blowup { t: t + h });
        }
    }

    let w = nonabelian_holonomy(lp, tol)?;
    let undone = u.scale((dyn_phase * c64(0.0, 1.0)).exp());
    Ok(undone.sub(&w).frobenius_norm())
}
