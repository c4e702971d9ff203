//! Two-level system on a cone with a complex opening angle.
//!
//! `H(t) = (b/2) (sin T cos(2 pi t/T_p) sx + sin T sin(2 pi t/T_p) sy
//!         + cos T sz)` with complex polar angle `T` analytically continues
//! the rotating-field spin. Its cyclic phase is the complex solid angle
//! `-pi (1 - cos T)` on the aligned branch, which makes it the canonical
//! cross-check for every phase form in this crate.

use alloc::{boxed::Box, vec::Vec};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::{biorthogonal_decompose, HamiltonianLoop};
use crate::geomphase::ParameterSurface;
use crate::numerics::{c64, ComplexMatrix, TimeGrid};
use crate::{GwError, Result};

/// Orientation of the azimuthal sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Handedness {
    CounterClockwise,
    Clockwise,
}

/// Complex-cone drive parameters.
#[derive(Debug, Clone, Copy)]
pub struct ComplexCone {
    /// Field strength `b` (complex angular frequency).
    pub field_strength: Complex64,
    /// Complex polar angle.
    pub polar_angle: Complex64,
    /// Cycle duration.
    pub period: f64,
    pub handedness: Handedness,
}

impl ComplexCone {
    /// Hamiltonian at azimuthal angle `phi`.
    pub fn hamiltonian(&self, phi: f64) -> ComplexMatrix {
        let b = self.field_strength * 0.5;
        let sin_t = self.polar_angle.sin();
        let cos_t = self.polar_angle.cos();
        let phi = match self.handedness {
            Handedness::CounterClockwise => phi,
            Handedness::Clockwise => -phi,
        };
        let e_minus = c64(phi.cos(), -phi.sin());
        let e_plus = c64(phi.cos(), phi.sin());
        // (b/2) [[cos T, sin T e^{-i phi}], [sin T e^{i phi}, -cos T]]
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = b * cos_t;
        m[(0, 1)] = b * sin_t * e_minus;
        m[(1, 0)] = b * sin_t * e_plus;
        m[(1, 1)] = -b * cos_t;
        m
    }

    /// The complex solid-angle phase of the branch aligned with the field,
    /// `-pi (1 - cos T)`.
    pub fn aligned_branch_phase(&self) -> Complex64 {
        let sign = match self.handedness {
            Handedness::CounterClockwise => 1.0,
            Handedness::Clockwise => -1.0,
        };
        (Complex64::from(1.0) - self.polar_angle.cos()) * c64(-core::f64::consts::PI * sign, 0.0)
    }
}

/// Sample the cone drive into a cyclic loop.
pub fn cone_loop(spec: &ComplexCone, samples: usize) -> Result<HamiltonianLoop> {
    if samples < 100 {
        return Err(GwError::contract("cone loop requires at least 100 samples"));
    }
    if !(spec.period.is_finite() && spec.period > 0.0) {
        return Err(GwError::contract("cone period must be positive"));
    }
    // The normalized left/right overlap is t-independent; probe it once so
    // a loop skirting an exceptional point fails fast.
    biorthogonal_decompose(&spec.hamiltonian(0.0), 1e-12)?;

    let grid = TimeGrid::new(0.0, spec.period, samples)?;
    let mut hs = Vec::with_capacity(samples);
    for k in 0..samples {
        let phi = 2.0 * core::f64::consts::PI * grid.sample(k) / spec.period;
        hs.push(spec.hamiltonian(phi));
    }
    let first = hs[0].clone();
    *hs.last_mut().unwrap() = first;
    HamiltonianLoop::new_cyclic(grid, hs)
}

/// Cap chart for the cone: `v` scales the polar angle from the pole down to
/// the loop, `u` is the azimuth. The `v = 1` boundary reproduces
/// [`cone_loop`] over one period.
pub fn cone_chart(spec: &ComplexCone, n_u: usize, n_v: usize) -> Result<ParameterSurface> {
    let spec = *spec;
    ParameterSurface::new(
        Box::new(move |u, v| {
            let scaled = ComplexCone {
                polar_angle: spec.polar_angle * v,
                ..spec
            };
            scaled.hamiltonian(2.0 * core::f64::consts::PI * u)
        }),
        n_u,
        n_v,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angle_gives_constant_diagonal_loop() {
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: Complex64::default(),
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        let lp = cone_loop(&spec, 128).unwrap();
        for h in lp.samples() {
            assert!(h[(0, 1)].norm() < 1e-15);
            assert!((h[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn real_angle_gives_hermitian_loop() {
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: c64(0.9, 0.0),
            period: 2.0,
            handedness: Handedness::CounterClockwise,
        };
        let lp = cone_loop(&spec, 256).unwrap();
        assert!(lp.hermiticity_defect() < 1e-14);
    }

    #[test]
    fn complex_angle_breaks_hermiticity() {
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: c64(0.5, 0.2),
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        let lp = cone_loop(&spec, 128).unwrap();
        assert!(lp.hermiticity_defect() > 1e-3);
    }

    #[test]
    fn large_imaginary_angle_hits_exceptional_floor() {
        // The normalized overlap decays like 1/cosh^2(Im theta / 2).
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: c64(0.5, 16.0),
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        assert!(matches!(
            cone_loop(&spec, 128),
            Err(GwError::ExceptionalPoint { .. })
        ));
    }

    #[test]
    fn undersampled_loop_rejected() {
        let spec = ComplexCone {
            field_strength: c64(1.0, 0.0),
            polar_angle: c64(0.5, 0.0),
            period: 1.0,
            handedness: Handedness::CounterClockwise,
        };
        assert!(cone_loop(&spec, 99).is_err());
    }
}
