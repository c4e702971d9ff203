//! Aharonov–Casher effect with a metastable magnetic moment.
//!
//! A particle with magnetic moment circling a line charge picks up a
//! topological phase proportional to the winding number. When the particle
//! is metastable with internal effective Hamiltonian `h_int`, the moment is
//! replaced by its biorthogonal expectation value
//! `mu^i = <phi_i|mu|psi_i>/<phi_i|psi_i>`, which is complex whenever `mu`
//! fails to commute with `h_int`: on top of the topological phase
//! `e^{i Re(mu) rho n}` the paths acquire a topological decay probability
//! `e^{-Im(mu) rho n}` that depends only on the winding number.
//!
//! Winding convention: `n` counts full turns of the trajectory around the
//! line charge, the wrapped endpoint angle difference rides in a separate
//! endpoint factor `e^{i mu rho (theta_2 - theta_1)}`, and the topological
//! factor is `e^{i mu rho n}` per turn.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::biorthogonal_decompose;
use crate::geomphase::GwPhase;
use crate::numerics::{c64, wrap_principal, ComplexMatrix};
use crate::{GwError, Result};

/// Discretized particle trajectory in the plane, in polar coordinates,
/// excluding the origin. Consecutive samples must subtend less than a half
/// turn so the winding is unambiguous. Closed paths duplicate the first
/// vertex at the end (equal radius, equal angle modulo 2 pi).
#[derive(Debug, Clone)]
pub struct PlanarPath {
    vertices: Vec<(f64, f64)>,
    closed: bool,
}

impl PlanarPath {
    pub fn new(vertices: Vec<(f64, f64)>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(GwError::contract("path needs at least two vertices"));
        }
        for &(r, theta) in &vertices {
            if !(r.is_finite() && theta.is_finite()) {
                return Err(GwError::contract("path vertices must be finite"));
            }
            if r <= 0.0 {
                return Err(GwError::contract("path vertex at the origin"));
            }
        }
        for w in vertices.windows(2) {
            let inc = wrap_principal(w[1].1 - w[0].1);
            if inc.abs() >= core::f64::consts::PI - 1e-12 {
                return Err(GwError::contract(
                    "consecutive angular increments must lie strictly inside (-pi, pi)",
                ));
            }
        }
        if closed {
            let first = vertices[0];
            let last = vertices[vertices.len() - 1];
            let dr = (first.0 - last.0).abs();
            let dth = wrap_principal(first.1 - last.1).abs();
            if dr > 1e-12 * first.0.max(1.0) || dth > 1e-12 {
                return Err(GwError::contract(
                    "closed path must end at its starting vertex",
                ));
            }
        }
        Ok(Self { vertices, closed })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Circle of radius `r` with `turns` full windings (positive =
    /// counterclockwise), closed.
    pub fn circle(r: f64, turns: i32, samples_per_turn: usize) -> Result<Self> {
        let total = (turns.unsigned_abs() as usize * samples_per_turn).max(2);
        let sign = if turns >= 0 { 1.0 } else { -1.0 };
        let mut vertices = Vec::with_capacity(total + 1);
        for k in 0..=total {
            let theta =
                sign * 2.0 * core::f64::consts::PI * turns.unsigned_abs() as f64 * k as f64
                    / total as f64;
            vertices.push((r, theta));
        }
        Self::new(vertices, true)
    }
}

/// Winding data of a planar path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult {
    /// Accumulated angle along the path (sum of wrapped increments).
    pub net_angle: f64,
    /// Full turns: `net_angle = wrap(theta_end - theta_start) + 2 pi turns`.
    pub turns: i64,
}

/// Accumulate wrapped angular increments along the path.
pub fn winding_number(path: &PlanarPath) -> Result<WindingResult> {
    let verts = path.vertices();
    let mut net = 0.0f64;
    for w in verts.windows(2) {
        net += wrap_principal(w[1].1 - w[0].1);
    }
    let endpoint = wrap_principal(verts[verts.len() - 1].1 - verts[0].1);
    let turns = ((net - endpoint) / (2.0 * core::f64::consts::PI)).round() as i64;
    Ok(WindingResult {
        net_angle: net,
        turns,
    })
}

/// Metastable moment circling a line charge.
#[derive(Debug, Clone)]
pub struct AcModel {
    /// Internal effective Hamiltonian of the metastable multiplet.
    pub h_int: ComplexMatrix,
    /// Moment operator projected on the line axis.
    pub moment: ComplexMatrix,
    /// Charge per unit length of the line.
    pub rho: f64,
    pub path: PlanarPath,
}

impl AcModel {
    pub fn new(
        h_int: ComplexMatrix,
        moment: ComplexMatrix,
        rho: f64,
        path: PlanarPath,
    ) -> Result<Self> {
        if h_int.dim() != moment.dim() {
            return Err(GwError::LengthMismatch {
                expected: h_int.dim(),
                actual: moment.dim(),
            });
        }
        if !rho.is_finite() {
            return Err(GwError::contract("line charge density must be finite"));
        }
        Ok(Self {
            h_int,
            moment,
            rho,
            path,
        })
    }
}

/// Effective moment of internal branch `i`:
/// `mu^i = <phi_i|mu|psi_i> / <phi_i|psi_i>`.
pub fn effective_moment(model: &AcModel, branch: usize, tol: f64) -> Result<Complex64> {
    let sys = biorthogonal_decompose(&model.h_int, tol)?;
    if branch >= sys.dim() {
        return Err(GwError::contract("branch index out of range"));
    }
    let psi = sys.right(branch);
    let phi = sys.left(branch);
    Ok(phi.dot(&model.moment.matvec(psi)) / sys.overlap(branch))
}

/// Endpoint and topological factors of the no-decay amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologicalFactor {
    /// `exp(i mu rho (theta_2 - theta_1))` with the wrapped endpoint angle.
    pub endpoint: Complex64,
    /// `exp(i mu rho n)` with `n` the number of full turns.
    pub topological: Complex64,
}

impl TopologicalFactor {
    pub fn total(&self) -> Complex64 {
        self.endpoint * self.topological
    }
}

/// Winding factors of a path for a (possibly complex) effective moment.
pub fn topological_factor(mu: Complex64, rho: f64, path: &PlanarPath) -> Result<TopologicalFactor> {
    let winding = winding_number(path)?;
    let verts = path.vertices();
    let dtheta = wrap_principal(verts[verts.len() - 1].1 - verts[0].1);
    let endpoint = (c64(0.0, 1.0) * mu * rho * dtheta).exp();
    let topological = (c64(0.0, 1.0) * mu * rho * winding.turns as f64).exp();
    Ok(TopologicalFactor {
        endpoint,
        topological,
    })
}

/// Geometric part of the cyclic phase of branch `i` dragged around a closed
/// path: `n mu^i rho` (the kinetic `oint p . dr` part is dynamical and
/// excluded). Depends on the path only through its winding number.
pub fn ac_geometric_phase(model: &AcModel, branch: usize, tol: f64) -> Result<GwPhase> {
    if !model.path.is_closed() {
        return Err(GwError::contract("geometric phase requires a closed path"));
    }
    let mu = effective_moment(model, branch, tol)?;
    let winding = winding_number(&model.path)?;
    let value = mu * model.rho * winding.turns as f64;
    Ok(GwPhase::from_accumulated(value, mu.norm() * model.rho.abs(), model.path.vertices().len()))
}

/// Magnitudes of the terms dropped when the moment is replaced by its
/// effective branch value: the second-moment spread `a^2/(2m) |<mu^2> -
/// (mu^i)^2|` and the worst inter-branch coupling `|<phi_j|mu|psi_i>| a
/// p / m`. Reported for the path's largest gauge field `a = rho
/// theta_max / 2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeglectedTerms {
    pub second_moment: f64,
    pub inter_branch: f64,
}

pub fn neglected_term_report(
    model: &AcModel,
    branch: usize,
    mass: f64,
    momentum_scale: f64,
    tol: f64,
) -> Result<NeglectedTerms> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(GwError::contract("mass must be positive"));
    }
    let sys = biorthogonal_decompose(&model.h_int, tol)?;
    if branch >= sys.dim() {
        return Err(GwError::contract("branch index out of range"));
    }
    let psi = sys.right(branch);
    let phi = sys.left(branch);
    let d = sys.overlap(branch);
    let mu = phi.dot(&model.moment.matvec(psi)) / d;
    let mu_sq = phi.dot(&model.moment.matmul(&model.moment).matvec(psi)) / d;

    let winding = winding_number(&model.path)?;
    let theta_max = winding.net_angle.abs().max(2.0 * core::f64::consts::PI);
    let a_scale = model.rho.abs() * theta_max / (2.0 * core::f64::consts::PI);

    let second_moment = (mu_sq - mu * mu).norm() * a_scale * a_scale / (2.0 * mass);
    let mut inter = 0.0f64;
    for j in 0..sys.dim() {
        if j == branch {
            continue;
        }
        let coupling = sys.left(j).dot(&model.moment.matvec(psi)) / sys.overlap(j);
        inter = inter.max(coupling.norm());
    }
    Ok(NeglectedTerms {
        second_moment,
        inter_branch: inter * a_scale * momentum_scale.abs() / mass,
    })
}
