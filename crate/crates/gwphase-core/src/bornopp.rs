//! Born–Oppenheimer reduction with a metastable fast subsystem on a ring.
//!
//! Eliminating a fast degree of freedom whose effective Hamiltonian
//! `h(Q)` is non-Hermitian leaves the slow coordinate with complex scalar
//! and vector potentials built from the tracked left/right eigenbranch:
//!
//! ```text
//! A_i(Q) = (i/2) ( <phi|d_Q psi> - <d_Q phi|psi> ) / <phi|psi>
//! V_i(Q) = V(Q) + omega_i(Q)
//!        + (1/2M) ( <d_Q phi|d_Q psi>/<phi|psi>
//!                   - <d_Q phi|psi><phi|d_Q psi>/<phi|psi>^2 )
//! ```
//!
//! Both expressions are pointwise gauge invariant (the vector potential up
//! to the usual `A -> A + d_Q Lambda` freedom, carried here by per-interval
//! link integrals), and both reduce to the familiar real Berry connection
//! and diagonal correction in the Hermitian limit. The loop integral
//! `oint A dQ` equals the fast loop's complex geometric phase.
//!
//! The slow ring Hamiltonian `(1/2M)(-i d_Q - A)^2 + V` is discretized with
//! exponential link factors `exp(-i theta_k)`, `theta_k` the interval
//! integral of `A`, which keeps the gauge covariance of the spectrum exact
//! whenever the gauge increments are supplied exactly.

use alloc::{boxed::Box, vec::Vec};
use num_complex::Complex64;

use crate::biortho::{track_branches, HamiltonianLoop};
use crate::geomphase::transport_increments;
use crate::numerics::{c64, eig_dense, wrap_principal, ComplexMatrix, ComplexVector, TimeGrid};
use crate::{GwError, Result};

const MAX_RING_DIM: usize = 512;

/// Fast subsystem parameterized by a periodic slow coordinate `Q in [0, 2pi)`.
pub struct FastFamily {
    hamiltonian: Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
    potential: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    mass: f64,
}

impl FastFamily {
    pub fn new(
        hamiltonian: Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
        potential: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        mass: f64,
    ) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(GwError::contract("slow mass must be positive"));
        }
        let h0 = hamiltonian(0.0);
        let h1 = hamiltonian(2.0 * core::f64::consts::PI);
        if h1.sub(&h0).max_entry_norm() > 1e-10 * h0.max_entry_norm().max(1.0) {
            return Err(GwError::contract(
                "fast family must be 2 pi periodic in the slow coordinate",
            ));
        }
        Ok(Self {
            hamiltonian,
            potential,
            mass,
        })
    }

    pub fn hamiltonian_at(&self, q: f64) -> ComplexMatrix {
        (self.hamiltonian)(q)
    }

    pub fn potential_at(&self, q: f64) -> f64 {
        (self.potential)(q)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

/// Complex scalar and vector potentials of one fast branch on the ring.
#[derive(Debug, Clone)]
pub struct BoPotentials {
    grid: TimeGrid,
    /// Pointwise vector potential (gauge of the tracked branch).
    a: Vec<Complex64>,
    /// Scalar potential including the fast eigenvalue and curvature term.
    v: Vec<Complex64>,
    /// Interval integrals of `A` (the gauge-covariant link content).
    links: Vec<Complex64>,
    mass: f64,
}

impl BoPotentials {
    /// Assemble from pointwise samples (links from the trapezoid rule).
    /// Sample arrays run over `grid_n + 1` nodes with the endpoint
    /// duplicated.
    pub fn from_pointwise(
        grid: TimeGrid,
        a: Vec<Complex64>,
        v: Vec<Complex64>,
        mass: f64,
    ) -> Result<Self> {
        let n = grid.n_samples();
        if a.len() != n || v.len() != n {
            return Err(GwError::LengthMismatch {
                expected: n,
                actual: a.len().min(v.len()),
            });
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(GwError::contract("slow mass must be positive"));
        }
        let h = grid.step();
        let links = (0..n - 1)
            .map(|k| (a[k] + a[k + 1]) * 0.5 * h)
            .collect();
        Ok(Self {
            grid,
            a,
            v,
            links,
            mass,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of distinct ring sites.
    pub fn ring_sites(&self) -> usize {
        self.links.len()
    }

    pub fn vector_potential(&self) -> &[Complex64] {
        &self.a
    }

    pub fn scalar_potential(&self) -> &[Complex64] {
        &self.v
    }

    pub fn links(&self) -> &[Complex64] {
        &self.links
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `oint A dQ` accumulated from the links; equals the fast branch's
    /// complex geometric phase.
    pub fn loop_integral_a(&self) -> Complex64 {
        self.links.iter().sum()
    }
}

/// Build the branch potentials by tracking the fast eigenbranch around the
/// ring at `grid_n + 1` nodes.
pub fn bo_potentials(
    family: &FastFamily,
    branch: usize,
    grid_n: usize,
    tol: f64,
) -> Result<BoPotentials> {
    if grid_n < 8 {
        return Err(GwError::contract("ring grid must have at least 8 sites"));
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    let grid = TimeGrid::new(0.0, two_pi, grid_n + 1)?;
    let mut samples = Vec::with_capacity(grid_n + 1);
    for k in 0..=grid_n {
        samples.push(family.hamiltonian_at(grid.sample(k)));
    }
    let first = samples[0].clone();
    *samples.last_mut().unwrap() = first;
    let lp = HamiltonianLoop::new_cyclic(grid.clone(), samples)?;

    let branches = track_branches(&lp, tol)?;
    if branch >= branches.len() {
        return Err(GwError::contract("branch index out of range"));
    }
    let path = &branches[branch];
    let n = grid_n + 1;

    let mut psis: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut phis: Vec<ComplexVector> = Vec::with_capacity(n);
    for k in 0..n {
        psis.push(path.right(k).normalized()?);
        phis.push(path.left(k).normalized()?);
    }

    // Links: interval integrals of the symmetric connection.
    let inc = transport_increments(&psis, &phis)?;
    let links: Vec<Complex64> = inc
        .ket
        .iter()
        .zip(&inc.bra)
        .map(|(b, c)| (b - c) * c64(0.0, 0.5))
        .collect();

    let h = grid.step();
    // Periodic neighbor indexing over the distinct sites 0..grid_n-1; the
    // duplicated endpoint copies site 0.
    let prev = |k: usize| if k == 0 { grid_n - 1 } else { k - 1 };
    let next = |k: usize| if k + 1 >= grid_n { (k + 1) % grid_n } else { k + 1 };

    let mut a = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for k in 0..grid_n {
        let km = prev(k);
        let kp = next(k);
        // Pointwise symmetric log-derivative connection.
        let z_p = phis[k].dot(&psis[kp]);
        let z_m = phis[k].dot(&psis[km]);
        let w_p = phis[kp].dot(&psis[k]);
        let w_m = phis[km].dot(&psis[k]);
        if z_p.norm().min(z_m.norm()).min(w_p.norm()).min(w_m.norm()) < 1e-300 {
            return Err(GwError::ExceptionalPoint {
                overlap: 0.0,
                floor: 1e-300,
            });
        }
        let a_k = ((z_p / z_m).ln() - (w_p / w_m).ln()) * c64(0.0, 0.25 / h);
        a.push(a_k);

        // Curvature term from a locally phase-aligned stencil.
        let psi_p = align(&psis[k], &psis[kp]);
        let psi_m = align(&psis[k], &psis[km]);
        let phi_p = align(&phis[k], &phis[kp]);
        let phi_m = align(&phis[k], &phis[km]);
        let dpsi = psi_p.sub(&psi_m).scale(c64(0.5 / h, 0.0));
        let dphi = phi_p.sub(&phi_m).scale(c64(0.5 / h, 0.0));
        let d = phis[k].dot(&psis[k]);
        let curv = dphi.dot(&dpsi) / d - dphi.dot(&psis[k]) * phis[k].dot(&dpsi) / (d * d);

        let q = grid.sample(k);
        v.push(c64(family.potential_at(q), 0.0) + path.omega(k) + curv / (2.0 * family.mass()));
    }
    a.push(a[0]);
    v.push(v[0]);

    Ok(BoPotentials {
        grid,
        a,
        v,
        links,
        mass: family.mass(),
    })
}

fn align(center: &ComplexVector, neighbor: &ComplexVector) -> ComplexVector {
    let ov = center.dot(neighbor);
    if ov.norm() < 1e-300 {
        return neighbor.clone();
    }
    neighbor.scale(ov.conj() / ov.norm())
}

fn ring_hamiltonian(links: &[Complex64], diag: &[Complex64], mass: f64, h: f64) -> ComplexMatrix {
    let n = links.len();
    let kin = 1.0 / (2.0 * mass * h * h);
    let mut m = ComplexMatrix::zeros(n);
    for k in 0..n {
        m[(k, k)] = diag[k] + c64(2.0 * kin, 0.0);
        let kp = (k + 1) % n;
        // Forward link e^{-i theta_k} transports site k+1 onto site k.
        let theta = links[k];
        m[(k, kp)] = -(theta * c64(0.0, -1.0)).exp() * kin;
        m[(kp, k)] = -(theta * c64(0.0, 1.0)).exp() * kin;
    }
    m
}

/// Complex spectrum of `(1/2M)(-i d_Q - A)^2 + V` on the periodic ring,
/// sorted by real part.
pub fn ring_spectrum(pot: &BoPotentials, tol: f64) -> Result<Vec<Complex64>> {
    let n = pot.ring_sites();
    if n > MAX_RING_DIM {
        return Err(GwError::contract("ring grid exceeds 512 sites"));
    }
    let m = ring_hamiltonian(&pot.links, &pot.v[..n], pot.mass, pot.grid.step());
    let pairs = eig_dense(&m, tol)?;
    Ok(pairs.into_iter().map(|p| p.0).collect())
}

/// Spectral deviation under the gauge shift `A -> A + d_Q Lambda`.
///
/// The gauge function is supplied analytically so the link increments
/// `Lambda(Q_{k+1}) - Lambda(Q_k)` are exact; `exp(i Lambda)` must be
/// single-valued on the ring (`Lambda(2 pi) - Lambda(0)` a multiple of
/// `2 pi`). Returns the maximal eigenvalue displacement after sorting.
pub fn flux_equivalence(
    pot: &BoPotentials,
    lambda: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64> {
    let n = pot.ring_sites();
    if n > MAX_RING_DIM {
        return Err(GwError::contract("ring grid exceeds 512 sites"));
    }
    let total = lambda(2.0 * core::f64::consts::PI) - lambda(0.0);
    if wrap_principal(total).abs() > 1e-9 {
        return Err(GwError::contract(
            "gauge function must wind by a multiple of 2 pi over the ring",
        ));
    }
    let grid = &pot.grid;
    let shifted: Vec<Complex64> = (0..n)
        .map(|k| {
            let q0 = grid.sample(k);
            let q1 = grid.sample(k + 1);
            pot.links[k] + c64(lambda(q1) - lambda(q0), 0.0)
        })
        .collect();

    let h = grid.step();
    let base = ring_hamiltonian(&pot.links, &pot.v[..n], pot.mass, h);
    let gauged = ring_hamiltonian(&shifted, &pot.v[..n], pot.mass, h);

    let mut s0: Vec<Complex64> = eig_dense(&base, tol)?.into_iter().map(|p| p.0).collect();
    let mut s1: Vec<Complex64> = eig_dense(&gauged, tol)?.into_iter().map(|p| p.0).collect();
    let key = |z: &Complex64| (z.re, z.im);
    s0.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    s1.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    Ok(s0
        .iter()
        .zip(&s1)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomphase::phase_line_integral;
    use crate::scenarios::{cone_loop, ComplexCone, Handedness};
    use core::f64::consts::PI;

    fn cone_family(theta: Complex64, mass: f64) -> FastFamily {
        FastFamily::new(
            Box::new(move |q| {
                ComplexCone {
                    field_strength: c64(1.0, 0.0),
                    polar_angle: theta,
                    period: 2.0 * PI,
                    handedness: Handedness::CounterClockwise,
                }
                .hamiltonian(q)
            }),
            Box::new(|_| 0.0),
            mass,
        )
        .unwrap()
    }

    const PLUS: usize = 1;

    #[test]
    fn q_independent_family_gives_bare_potentials() {
        let family = FastFamily::new(
            Box::new(|_| ComplexMatrix::diagonal(&[c64(0.4, -0.1), c64(-0.4, -0.3)])),
            Box::new(|_| 0.25),
            5.0,
        )
        .unwrap();
        let pot = bo_potentials(&family, 0, 64, 1e-10).unwrap();
        for a in pot.vector_potential() {
            assert!(a.norm() < 1e-14);
        }
        for v in pot.scalar_potential() {
            assert!((v - c64(0.25 - 0.4, -0.3)).norm() < 1e-12, "v = {v:?}");
        }
        assert!(pot.loop_integral_a().norm() < 1e-13);
    }

    #[test]
    fn hermitian_family_has_real_vector_potential() {
        let family = cone_family(c64(0.8, 0.0), 3.0);
        let pot = bo_potentials(&family, PLUS, 128, 1e-9).unwrap();
        for a in pot.vector_potential() {
            assert!(a.im.abs() < 1e-9, "Im A = {}", a.im);
        }
        for v in pot.scalar_potential() {
            assert!(v.im.abs() < 1e-9, "Im V = {}", v.im);
        }
    }

    #[test]
    fn loop_integral_matches_fast_phase() {
        let theta = c64(0.5, 0.2);
        let family = cone_family(theta, 2.0);
        let pot = bo_potentials(&family, PLUS, 4096, 1e-9).unwrap();

        let lp = cone_loop(
            &ComplexCone {
                field_strength: c64(1.0, 0.0),
                polar_angle: theta,
                period: 2.0 * PI,
                handedness: Handedness::CounterClockwise,
            },
            8001,
        )
        .unwrap();
        let branches = crate::biortho::track_branches(&lp, 1e-9).unwrap();
        let phase = phase_line_integral(&branches[PLUS]).unwrap();
        let diff = (pot.loop_integral_a() - phase.value()).norm();
        assert!(diff < 1e-6, "loop integral differs from phase by {diff}");

        // Both agree with the complex solid angle.
        let analytic = -(Complex64::from(1.0) - theta.cos()) * PI;
        assert!((pot.loop_integral_a() - analytic).norm() < 1e-6);
    }

    fn free_ring(n: usize, mass: f64) -> BoPotentials {
        let grid = TimeGrid::new(0.0, 2.0 * PI, n + 1).unwrap();
        let zeros = alloc::vec![Complex64::default(); n + 1];
        BoPotentials::from_pointwise(grid, zeros.clone(), zeros, mass).unwrap()
    }

    #[test]
    fn free_ring_spectrum_is_quadratic() {
        let mass = 1.0;
        let n = 128;
        let pot = free_ring(n, mass);
        let spectrum = ring_spectrum(&pot, 1e-8).unwrap();
        let h = 2.0 * PI / n as f64;
        // Eight smallest |Re| eigenvalues against k^2/2M, k in
        // {0, +-1, +-2, +-3, 4}: second-order grid error k^4 h^2 / 24 M.
        let mut sorted = spectrum.clone();
        sorted.sort_by(|a, b| a.re.abs().partial_cmp(&b.re.abs()).unwrap());
        let mut expected: Vec<f64> = alloc::vec![0.0];
        for k in 1..=3 {
            expected.push((k * k) as f64 / (2.0 * mass));
            expected.push((k * k) as f64 / (2.0 * mass));
        }
        expected.push(16.0 / (2.0 * mass));
        for (i, &e) in expected.iter().enumerate() {
            let k4 = (e * 2.0 * mass).powi(2);
            let bound = 1.5 * k4 * h * h / (24.0 * mass) + 1e-9;
            assert!(
                (sorted[i].re - e).abs() < bound,
                "k^2/2M: eigenvalue {} = {:?}, want {e} within {bound}",
                i,
                sorted[i]
            );
            assert!(sorted[i].im.abs() < 1e-9);
        }
    }

    #[test]
    fn constant_vector_potential_shifts_momenta() {
        let mass = 1.0;
        let n = 128;
        let c = 0.3;
        let grid = TimeGrid::new(0.0, 2.0 * PI, n + 1).unwrap();
        let a = alloc::vec![c64(c, 0.0); n + 1];
        let v = alloc::vec![Complex64::default(); n + 1];
        let pot = BoPotentials::from_pointwise(grid, a, v, mass).unwrap();
        let spectrum = ring_spectrum(&pot, 1e-8).unwrap();
        let h = 2.0 * PI / n as f64;
        // Exact discrete eigenvalues: (2/M h^2) sin^2((k - c) h / 2).
        let mut expected: Vec<f64> = (0..n as i64)
            .map(|m| {
                let k = if m <= n as i64 / 2 { m as f64 } else { m as f64 - n as f64 };
                (2.0 / (mass * h * h)) * ((k - c) * h / 2.0).sin().powi(2)
            })
            .collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut got: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-9, "discrete flux shift: {g} vs {e}");
        }
        // Continuum check on the lowest few: (k - c)^2 / 2M.
        let low: Vec<f64> = got.iter().take(3).copied().collect();
        let mut cont: Vec<f64> = [0.0f64, 1.0, -1.0]
            .iter()
            .map(|k| (k - c).powi(2) / (2.0 * mass))
            .collect();
        cont.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (g, e) in low.iter().zip(&cont) {
            assert!((g - e).abs() < 2e-3, "continuum flux shift: {g} vs {e}");
        }
    }

    #[test]
    fn constant_imaginary_scalar_shift_is_exact() {
        let mass = 1.0;
        let n = 64;
        let gamma = 0.35;
        let grid = TimeGrid::new(0.0, 2.0 * PI, n + 1).unwrap();
        let zeros = alloc::vec![Complex64::default(); n + 1];
        let v = alloc::vec![c64(0.0, -gamma); n + 1];
        let base = ring_spectrum(&free_ring(n, mass), 1e-8).unwrap();
        let shifted =
            ring_spectrum(&BoPotentials::from_pointwise(grid, zeros, v, mass).unwrap(), 1e-8)
                .unwrap();
        for (s, b) in shifted.iter().zip(&base) {
            assert!((s - (b + c64(0.0, -gamma))).norm() < 1e-10);
        }
    }

    #[test]
    fn flux_equivalence_identity_gauge() {
        let family = cone_family(c64(0.5, 0.2), 2.0);
        let pot = bo_potentials(&family, PLUS, 96, 1e-9).unwrap();
        let dev = flux_equivalence(&pot, &|_| 0.0, 1e-8).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn flux_equivalence_smooth_gauge() {
        let family = cone_family(c64(0.5, 0.2), 2.0);
        let pot = bo_potentials(&family, PLUS, 256, 1e-9).unwrap();
        let dev = flux_equivalence(&pot, &|q: f64| 0.3 * q.sin(), 1e-8).unwrap();
        assert!(dev < 1e-6, "gauge deviation {dev}");
    }

    #[test]
    fn flux_equivalence_large_gauge_winding() {
        let family = cone_family(c64(0.5, 0.2), 2.0);
        let pot = bo_potentials(&family, PLUS, 256, 1e-9).unwrap();
        let dev = flux_equivalence(&pot, &|q: f64| q, 1e-8).unwrap();
        assert!(dev < 1e-6, "winding gauge deviation {dev}");
    }

    #[test]
    fn fractional_winding_gauge_rejected() {
        let family = cone_family(c64(0.5, 0.2), 2.0);
        let pot = bo_potentials(&family, PLUS, 64, 1e-9).unwrap();
        assert!(flux_equivalence(&pot, &|q: f64| 0.5 * q, 1e-8).is_err());
    }

    #[test]
    fn hermitian_family_real_ring_spectrum() {
        let family = cone_family(c64(0.8, 0.0), 3.0);
        let pot = bo_potentials(&family, PLUS, 96, 1e-9).unwrap();
        let spectrum = ring_spectrum(&pot, 1e-8).unwrap();
        for z in &spectrum {
            assert!(z.im.abs() < 1e-7, "Hermitian ring eigenvalue Im {}", z.im);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn grid_refinement_is_second_order() {
        let family = cone_family(c64(0.5, 0.2), 2.0);
        let spectra: Vec<Vec<Complex64>> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let pot = bo_potentials(&family, PLUS, n, 1e-9).unwrap();
                let mut s = ring_spectrum(&pot, 1e-8).unwrap();
                s.sort_by(|a, b| {
                    a.re.abs()
                        .partial_cmp(&b.re.abs())
                        .unwrap()
                });
                s
            })
            .collect();
        for i in 0..8 {
            let d1 = (spectra[1][i] - spectra[0][i]).norm();
            let d2 = (spectra[2][i] - spectra[1][i]).norm();
            assert!(
                d2 <= 0.5 * d1 + 1e-12,
                "eigenvalue {i}: refinement changes {d1} -> {d2}"
            );
        }
    }
}
