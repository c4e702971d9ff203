//! Curvature two-form of the left/right eigenvector pair over a parameter
//! chart, and its surface integral (the Stokes form of the complex phase).

use alloc::{boxed::Box, vec::Vec};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::{biorthogonal_decompose, BiorthogonalSystem, HamiltonianLoop};
use crate::numerics::{c64, pairwise_sum, ComplexMatrix, ComplexVector, TimeGrid};
use crate::{GwError, Result};

use super::GwPhase;

/// Chart stencil half-width for the central differences inside [`two_form`].
/// Small enough that stencil truncation is negligible against the surface
/// quadrature, large enough to stay clear of eigensolver noise.
const STENCIL_H: f64 = 1e-5;

/// A Hamiltonian-valued chart over the unit square.
///
/// Contract: `chart(u, v)` is smooth, periodic in `u` (`chart(0, v) =
/// chart(1, v)`), and collapses to a single `u`-independent Hamiltonian on
/// the `v = 0` edge (the cap apex). The surface boundary is the `v = 1`
/// perimeter traversed in increasing `u`, which makes the surface integral
/// directly comparable with the line integral of that loop.
pub struct ParameterSurface {
    chart: Box<dyn Fn(f64, f64) -> ComplexMatrix + Send + Sync>,
    n_u: usize,
    n_v: usize,
}

impl ParameterSurface {
    pub fn new(
        chart: Box<dyn Fn(f64, f64) -> ComplexMatrix + Send + Sync>,
        n_u: usize,
        n_v: usize,
    ) -> Result<Self> {
        if n_u < 4 || n_v < 4 {
            return Err(GwError::contract("surface resolution must be at least 4x4"));
        }
        let s = Self { chart, n_u, n_v };
        // Validate u-periodicity on a few rows.
        for v in [0.0, 0.37, 1.0] {
            let a = s.eval(0.0, v);
            let b = s.eval(1.0, v);
            let defect = a.sub(&b).max_entry_norm();
            if defect > 1e-10 * a.max_entry_norm().max(1.0) {
                return Err(GwError::contract(
                    "surface chart must be periodic in u: chart(0,v) = chart(1,v)",
                ));
            }
        }
        // Validate apex degeneracy in u.
        let a = s.eval(0.0, 0.0);
        let b = s.eval(0.43, 0.0);
        if a.sub(&b).max_entry_norm() > 1e-10 * a.max_entry_norm().max(1.0) {
            return Err(GwError::contract(
                "surface chart must be u-independent on the v = 0 edge",
            ));
        }
        Ok(s)
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.n_u, self.n_v)
    }

    /// Chart evaluation with `u` wrapped into `[0, 1)`.
    pub fn eval(&self, u: f64, v: f64) -> ComplexMatrix {
        let mut uw = u - u.floor();
        if uw < 0.0 {
            uw += 1.0;
        }
        (self.chart)(uw, v.clamp(0.0, 1.0))
    }
}

pub(crate) struct AlignedPoint {
    pub psi: ComplexVector,
    pub phi: ComplexVector,
}

/// Gauge-align a stencil state pair to the center states: the component
/// along the center state is normalized to one, so per-point complex
/// rescalings of the stencil states (eigensolver phases included) cancel
/// exactly.
pub(crate) fn align_to_center(
    psi_center: &ComplexVector,
    phi_center: &ComplexVector,
    psi_raw: &ComplexVector,
    phi_raw: &ComplexVector,
) -> Result<AlignedPoint> {
    let ps = psi_center.dot(psi_raw);
    let ph = phi_center.dot(phi_raw);
    if ps.norm() < 1e-8 * psi_center.norm() * psi_raw.norm()
        || ph.norm() < 1e-8 * phi_center.norm() * phi_raw.norm()
    {
        return Err(GwError::ExceptionalPoint {
            overlap: ps.norm().min(ph.norm()),
            floor: 1e-8,
        });
    }
    Ok(AlignedPoint {
        psi: psi_raw.scale(ps.inv()),
        phi: phi_raw.scale(ph.inv()),
    })
}

/// Assemble the antisymmetric coefficient from the center pair and the
/// gauge-aligned partial derivatives.
pub(crate) fn b_from_derivatives(
    psi_c: &ComplexVector,
    phi_c: &ComplexVector,
    du_psi: &ComplexVector,
    du_phi: &ComplexVector,
    dv_psi: &ComplexVector,
    dv_phi: &ComplexVector,
) -> Complex64 {
    let d = phi_c.dot(psi_c);
    let term = |db_phi: &ComplexVector, da_psi: &ComplexVector| -> Complex64 {
        db_phi.dot(da_psi) / d - db_phi.dot(psi_c) * phi_c.dot(da_psi) / (d * d)
    };
    term(dv_phi, du_psi) - term(du_phi, dv_psi)
}

/// Decompose the chart at a stencil point, select the branch closest to the
/// center eigenvalue, and gauge-align to the center states.
fn aligned_branch(
    surface: &ParameterSurface,
    u: f64,
    v: f64,
    omega_center: Complex64,
    psi_center: &ComplexVector,
    phi_center: &ComplexVector,
    tol: f64,
) -> Result<AlignedPoint> {
    let sys = biorthogonal_decompose(&surface.eval(u, v), tol)?;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, w) in sys.eigenvalues().iter().enumerate() {
        let d = (w - omega_center).norm();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    align_to_center(psi_center, phi_center, sys.right(best), sys.left(best))
}

enum Stencil {
    Central,
    ForwardEdge,
    BackwardEdge,
}

/// Antisymmetric curvature coefficient `B_uv` of branch `i` at `(u, v)`:
///
/// ```text
/// B_uv = <d_v phi|d_u psi>/<phi|psi> - <d_v phi|psi><phi|d_u psi>/<phi|psi>^2
///        - (u <-> v)
/// ```
///
/// evaluated by central differences with stencil states gauge-aligned to the
/// center state (one-sided second-order stencils on the `v` edges). The
/// branch index refers to the `(Re, Im)`-sorted spectrum at the center.
pub fn two_form(surface: &ParameterSurface, branch: usize, u: f64, v: f64, tol: f64) -> Result<Complex64> {
    let center_sys = biorthogonal_decompose(&surface.eval(u, v), tol)?;
    if branch >= center_sys.dim() {
        return Err(GwError::contract("branch index out of range"));
    }
    two_form_at(surface, &center_sys, branch, u, v, tol)
}

pub(crate) fn two_form_at(
    surface: &ParameterSurface,
    center_sys: &BiorthogonalSystem,
    branch: usize,
    u: f64,
    v: f64,
    tol: f64,
) -> Result<Complex64> {
    let omega = center_sys.eigenvalues()[branch];
    let psi_c = center_sys.right(branch);
    let phi_c = center_sys.left(branch);
    let h = STENCIL_H;

    let fetch = |uu: f64, vv: f64| -> Result<AlignedPoint> {
        aligned_branch(surface, uu, vv, omega, psi_c, phi_c, tol)
    };

    // u direction: always central (periodic chart).
    let east = fetch(u + h, v)?;
    let west = fetch(u - h, v)?;
    let du_psi = east.psi.sub(&west.psi).scale(c64(0.5 / h, 0.0));
    let du_phi = east.phi.sub(&west.phi).scale(c64(0.5 / h, 0.0));

    // v direction: central inside, one-sided second order at the edges.
    let mode = if v - h < 0.0 {
        Stencil::ForwardEdge
    } else if v + h > 1.0 {
        Stencil::BackwardEdge
    } else {
        Stencil::Central
    };
    let (dv_psi, dv_phi) = match mode {
        Stencil::Central => {
            let n = fetch(u, v + h)?;
            let s = fetch(u, v - h)?;
            (
                n.psi.sub(&s.psi).scale(c64(0.5 / h, 0.0)),
                n.phi.sub(&s.phi).scale(c64(0.5 / h, 0.0)),
            )
        }
        Stencil::ForwardEdge => {
            // f'(v) = (-3 f0 + 4 f1 - f2) / (2h); f0 is the aligned center.
            let f1 = fetch(u, v + h)?;
            let f2 = fetch(u, v + 2.0 * h)?;
            let dpsi = psi_c
                .scale(c64(-3.0, 0.0))
                .add(&f1.psi.scale(c64(4.0, 0.0)))
                .sub(&f2.psi)
                .scale(c64(0.5 / h, 0.0));
            let dphi = phi_c
                .scale(c64(-3.0, 0.0))
                .add(&f1.phi.scale(c64(4.0, 0.0)))
                .sub(&f2.phi)
                .scale(c64(0.5 / h, 0.0));
            (dpsi, dphi)
        }
        Stencil::BackwardEdge => {
            let f1 = fetch(u, v - h)?;
            let f2 = fetch(u, v - 2.0 * h)?;
            let dpsi = psi_c
                .scale(c64(3.0, 0.0))
                .sub(&f1.psi.scale(c64(4.0, 0.0)))
                .add(&f2.psi)
                .scale(c64(0.5 / h, 0.0));
            let dphi = phi_c
                .scale(c64(3.0, 0.0))
                .sub(&f1.phi.scale(c64(4.0, 0.0)))
                .add(&f2.phi)
                .scale(c64(0.5 / h, 0.0));
            (dpsi, dphi)
        }
    };

    Ok(b_from_derivatives(
        psi_c, phi_c, &du_psi, &du_phi, &dv_psi, &dv_phi,
    ))
}

/// Surface integral of the two-form over the chart:
/// `phi = i * integral B_uv du dv`, which matches the line integral of the
/// `v = 1` boundary loop up to discretization (and winding in the real
/// part). Summation is a fixed-order pairwise reduction.
pub fn phase_surface_integral(surface: &ParameterSurface, branch: usize, tol: f64) -> Result<GwPhase> {
    let (n_u, n_v) = surface.resolution();
    let du = 1.0 / n_u as f64;
    let dv = 1.0 / n_v as f64;

    let mut terms: Vec<Complex64> = Vec::with_capacity(n_u * (n_v + 1));
    let mut max_b = 0.0f64;
    for l in 0..=n_v {
        let v = l as f64 * dv;
        let wv = if l == 0 || l == n_v { 0.5 } else { 1.0 };
        for j in 0..n_u {
            let u = j as f64 * du;
            let center_sys = biorthogonal_decompose(&surface.eval(u, v), tol)?;
            if branch >= center_sys.dim() {
                return Err(GwError::contract("branch index out of range"));
            }
            let b = two_form_at(surface, &center_sys, branch, u, v, tol)?;
            max_b = max_b.max(b.norm());
            terms.push(b * c64(wv * du * dv, 0.0));
        }
    }
    let value = pairwise_sum(&terms) * c64(0.0, 1.0);
    Ok(GwPhase::from_accumulated(value, max_b, n_u * (n_v + 1)))
}

/// The `v = 1` perimeter of the chart as a cyclic loop over `u` in `[0, 1]`.
pub fn boundary_loop(surface: &ParameterSurface, n_samples: usize) -> Result<HamiltonianLoop> {
    let grid = TimeGrid::new(0.0, 1.0, n_samples)?;
    let mut samples = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        samples.push(surface.eval(grid.sample(k), 1.0));
    }
    let first = samples[0].clone();
    *samples.last_mut().unwrap() = first;
    HamiltonianLoop::new_cyclic(grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biortho::track_branches;
    use crate::geomphase::phase_line_integral;
    use crate::scenarios::{cone_chart, cone_loop, ComplexCone, Handedness};
    use core::f64::consts::PI;

    fn cone_surface(theta: Complex64, n: usize) -> ParameterSurface {
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: theta,
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        cone_chart(&spec, n, n).unwrap()
    }

    // Branch index of the +b/2 eigenvalue in sorted order (b real positive
    // puts it second).
    const PLUS: usize = 1;

    #[test]
    fn flat_chart_vanishes() {
        let chart = Box::new(|_u: f64, _v: f64| {
            ComplexMatrix::diagonal(&[c64(0.5, -0.1), c64(-0.5, -0.3)])
        });
        let s = ParameterSurface::new(chart, 16, 16).unwrap();
        let b = two_form(&s, 0, 0.3, 0.4, 1e-9).unwrap();
        assert!(b.norm() < 1e-10);
        let phase = phase_surface_integral(&s, 0, 1e-9).unwrap();
        assert!(phase.value().norm() < 1e-10);
    }

    #[test]
    fn hermitian_sphere_curvature_density() {
        // For the cap chart of a real cone the two-form equals i times half
        // the solid-angle density: B_uv = i * pi * theta * sin(theta v).
        let theta = 1.1;
        let s = cone_surface(c64(theta, 0.0), 32);
        for (u, v) in [(0.2, 0.35), (0.7, 0.6), (0.05, 0.9)] {
            let b = two_form(&s, PLUS, u, v, 1e-9).unwrap();
            let expected = c64(0.0, PI * theta * (theta * v).sin());
            assert!(
                (b - expected).norm() < 1e-6,
                "B({u},{v}) = {b:?}, want {expected:?}"
            );
        }
    }

    #[test]
    fn gauge_rescaled_stencil_states_leave_two_form_unchanged() {
        // The alignment normalizes the component along the center state, so
        // arbitrary per-point complex rescalings of the stencil states
        // cancel exactly in the assembled coefficient.
        let theta = c64(0.8, 0.15);
        let s = cone_surface(theta, 32);
        let (u, v, h) = (0.3, 0.55, 1e-4);
        let fetch = |uu: f64, vv: f64| {
            let sys = crate::biortho::biorthogonal_decompose(&s.eval(uu, vv), 1e-9).unwrap();
            (sys.right(PLUS).clone(), sys.left(PLUS).clone())
        };
        let (psi_c, phi_c) = fetch(u, v);
        let stencil = [
            fetch(u + h, v),
            fetch(u - h, v),
            fetch(u, v + h),
            fetch(u, v - h),
        ];

        let assemble = |gauges: &[(Complex64, Complex64); 4]| {
            let mut aligned = alloc::vec::Vec::new();
            for (k, (psi, phi)) in stencil.iter().enumerate() {
                let (gp, gf) = gauges[k];
                aligned.push(
                    align_to_center(&psi_c, &phi_c, &psi.scale(gp), &phi.scale(gf)).unwrap(),
                );
            }
            let inv2h = c64(0.5 / h, 0.0);
            let du_psi = aligned[0].psi.sub(&aligned[1].psi).scale(inv2h);
            let du_phi = aligned[0].phi.sub(&aligned[1].phi).scale(inv2h);
            let dv_psi = aligned[2].psi.sub(&aligned[3].psi).scale(inv2h);
            let dv_phi = aligned[2].phi.sub(&aligned[3].phi).scale(inv2h);
            b_from_derivatives(&psi_c, &phi_c, &du_psi, &du_phi, &dv_psi, &dv_phi)
        };

        let unit = c64(1.0, 0.0);
        let clean = assemble(&[(unit, unit); 4]);
        let wild = assemble(&[
            (c64(1.3, -0.7), c64(0.2, 2.1)),
            (c64(-0.4, 0.9), c64(1.7, -0.3)),
            (c64(0.1, -3.0), c64(-1.1, 0.6)),
            (c64(2.4, 0.5), c64(0.8, 1.4)),
        ]);
        assert!(
            (clean - wild).norm() < 1e-9,
            "two-form moved under stencil gauges: {clean:?} vs {wild:?}"
        );
        // Sanity: the clean value matches the public entry point.
        let public = two_form(&s, PLUS, u, v, 1e-9).unwrap();
        assert!((clean - public).norm() < 1e-4);
    }

    #[test]
    fn stokes_complex_cone_cap() {
        let theta = c64(0.5, 0.2);
        let s = cone_surface(theta, 96);
        let surf = phase_surface_integral(&s, PLUS, 1e-9).unwrap();

        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: theta,
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        let lp = cone_loop(&spec, 4001).unwrap();
        let branches = track_branches(&lp, 1e-9).unwrap();
        let line = phase_line_integral(&branches[PLUS]).unwrap();

        let diff_re = crate::numerics::wrap_principal(surf.value().re - line.value().re).abs();
        let diff_im = (surf.value().im - line.value().im).abs();
        assert!(
            diff_re < 1e-5 && diff_im < 1e-5,
            "surface {:?} vs line {:?}",
            surf.value(),
            line.value()
        );
    }

    #[test]
    fn hermitian_cap_is_real() {
        let s = cone_surface(c64(0.9, 0.0), 48);
        let surf = phase_surface_integral(&s, PLUS, 1e-9).unwrap();
        assert!(surf.im().abs() < 1e-8, "Im = {}", surf.im());
    }

    #[test]
    fn boundary_loop_matches_cone_loop() {
        let theta = c64(0.5, 0.2);
        let s = cone_surface(theta, 16);
        let boundary = boundary_loop(&s, 257).unwrap();
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: theta,
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        let lp = cone_loop(&spec, 257).unwrap();
        for k in 0..257 {
            let defect = boundary.sample(k).sub(lp.sample(k)).max_entry_norm();
            assert!(defect < 1e-12, "boundary deviates at sample {k}");
        }
    }
}
