//! Cross-cutting invariants: reparametrization and orientation behavior of
//! the phase integrals, randomized algebraic properties of the numerical
//! kernels, and the survival-amplitude decay law.

use core::f64::consts::PI;
use num_complex::Complex64;
use proptest::prelude::*;

use gwphase_core::biortho::{track_branches, EigenbranchPath, HamiltonianLoop};
use gwphase_core::dynamics::evolve;
use gwphase_core::geomphase::phase_line_integral;
use gwphase_core::numerics::{eig_dense, quadrature, ComplexMatrix, ComplexVector, TimeGrid};
use gwphase_core::scenarios::{winding_number, ComplexCone, Handedness, PlanarPath};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cone_spec(theta: Complex64, period: f64) -> ComplexCone {
    ComplexCone {
        field_strength: c64(1.0, 0.0),
        polar_angle: theta,
        period,
        handedness: Handedness::CounterClockwise,
    }
}

fn plus_branch(lp: &HamiltonianLoop) -> EigenbranchPath {
    track_branches(lp, 1e-9)
        .unwrap()
        .into_iter()
        .min_by(|x, y| {
            let dx = (x.omega(0) - c64(0.5, 0.0)).norm();
            let dy = (y.omega(0) - c64(0.5, 0.0)).norm();
            dx.partial_cmp(&dy).unwrap()
        })
        .unwrap()
}

#[test]
fn monotone_reparametrization_preserves_phase() {
    let theta = c64(0.5, 0.2);
    let spec = cone_spec(theta, 1.0);
    let n = 8001;

    let sampled = |map: &dyn Fn(f64) -> f64| {
        let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            let s = grid.sample(k);
            samples.push(spec.hamiltonian(2.0 * PI * map(s)));
        }
        let first = samples[0].clone();
        *samples.last_mut().unwrap() = first;
        let lp = HamiltonianLoop::new_cyclic(grid, samples).unwrap();
        phase_line_integral(&plus_branch(&lp)).unwrap().value()
    };

    let base = sampled(&|s| s);
    for (a, b) in [(0.2, 0.05), (-0.15, 0.1), (0.1, -0.09)] {
        // Monotone map of [0,1] onto itself with fixed endpoints.
        let map = move |s: f64| s + a * (PI * s).sin() / PI + b * (2.0 * PI * s).sin() / (2.0 * PI);
        let value = sampled(&map);
        assert!(
            (value - base).norm() < 1e-6,
            "reparametrized phase moved by {:?}",
            (value - base).norm()
        );
    }
}

#[test]
fn branch_eigenvalues_are_continuous_on_refined_grids() {
    let spec = cone_spec(c64(0.7, 0.15), 1.0);
    for n in [500usize, 2000] {
        let lp = {
            let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
            let mut samples = Vec::with_capacity(n);
            for k in 0..n {
                samples.push(spec.hamiltonian(2.0 * PI * grid.sample(k)));
            }
            let first = samples[0].clone();
            *samples.last_mut().unwrap() = first;
            HamiltonianLoop::new_cyclic(grid, samples).unwrap()
        };
        let dt = lp.grid().step();
        // Eigenvalues +-b/2 are constant here, so the bound is generous; the
        // point is that matching never swaps branches between samples.
        let speed_bound = 10.0 * spec.field_strength.norm() * 2.0 * PI;
        for branch in track_branches(&lp, 1e-9).unwrap() {
            for k in 0..branch.len() - 1 {
                let jump = (branch.omega(k + 1) - branch.omega(k)).norm();
                assert!(jump < speed_bound * dt, "eigenvalue jump {jump} at {k}");
            }
        }
    }
}

#[test]
fn survival_decay_law_tightens_with_period() {
    let family = |period: f64| cone_spec(c64(0.5, 0.2), period);
    let mismatch = |period: f64| {
        let spec = family(period);
        let n = 2001;
        let grid = TimeGrid::new(0.0, period, n).unwrap();
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            samples.push(spec.hamiltonian(2.0 * PI * grid.sample(k) / period));
        }
        let first = samples[0].clone();
        *samples.last_mut().unwrap() = first;
        let lp = HamiltonianLoop::new_cyclic(grid, samples).unwrap();
        let result = evolve(&lp, 1, (period * 250.0) as usize, 1e-9).unwrap();
        let lhs = result.survival_amplitude.norm().ln();
        let rhs = result.dynamical_phase.im - result.adiabatic_prediction.im;
        (lhs - rhs).abs()
    };
    let coarse = mismatch(40.0);
    let mid = mismatch(120.0);
    let fine = mismatch(320.0);
    assert!(
        coarse > mid && mid > fine && fine < 1e-2,
        "decay-law mismatch did not tighten: {coarse} -> {mid} -> {fine}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_exact_on_affine_integrands(
        a_re in -5.0f64..5.0,
        a_im in -5.0f64..5.0,
        b_re in -5.0f64..5.0,
        b_im in -5.0f64..5.0,
        n in 2usize..400,
        t0 in -3.0f64..3.0,
        span in 0.1f64..10.0,
    ) {
        let grid = TimeGrid::new(t0, t0 + span, n).unwrap();
        let a = c64(a_re, a_im);
        let b = c64(b_re, b_im);
        let samples: Vec<Complex64> = grid.samples().map(|t| a + b * t).collect();
        let got = quadrature(&samples, &grid).unwrap();
        let expected = a * span + b * 0.5 * ((t0 + span).powi(2) - t0 * t0);
        let scale = expected.norm().max(1.0);
        prop_assert!((got - expected).norm() < 1e-12 * scale * n as f64);
    }

    #[test]
    fn winding_reversal_is_antisymmetric(
        turns in -3i32..=3,
        r0 in 0.2f64..3.0,
        wobble in 0.0f64..0.6,
    ) {
        prop_assume!(turns != 0);
        let total = 64 * turns.unsigned_abs() as usize;
        let sign = if turns > 0 { 1.0 } else { -1.0 };
        let mut vertices = Vec::with_capacity(total + 1);
        for k in 0..=total {
            let theta = sign * 2.0 * PI * turns.unsigned_abs() as f64 * k as f64 / total as f64;
            let r = r0 * (1.0 + wobble * (2.0 * theta).sin().powi(2));
            vertices.push((r, theta));
        }
        let first = vertices[0];
        let last_theta = vertices[vertices.len() - 1].1;
        *vertices.last_mut().unwrap() = (first.0, last_theta);
        let path = PlanarPath::new(vertices.clone(), true).unwrap();
        vertices.reverse();
        let reversed = PlanarPath::new(vertices, true).unwrap();

        let w = winding_number(&path).unwrap();
        let wr = winding_number(&reversed).unwrap();
        prop_assert_eq!(w.turns, turns as i64);
        prop_assert_eq!(wr.turns, -(turns as i64));
        prop_assert!((w.net_angle + wr.net_angle).abs() < 1e-9);
    }

    #[test]
    fn eigenpairs_satisfy_residual_and_trace(
        dim in 2usize..6,
        seed in 0u64..1000,
    ) {
        // Seeded dense complex matrix.
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = c64(next(), next());
            }
        }
        let pairs = eig_dense(&m, 1e-9).unwrap();
        prop_assert_eq!(pairs.len(), dim);
        let scale = m.frobenius_norm();
        for (lambda, v) in &pairs {
            let res = m.matvec(v).sub(&v.scale(*lambda)).norm() / scale;
            prop_assert!(res < 1e-9, "residual {}", res);
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let sum: Complex64 = pairs.iter().map(|p| p.0).sum();
        prop_assert!((sum - m.trace()).norm() < 1e-8 * scale.max(1.0));
    }

    #[test]
    fn unitary_similarity_preserves_spectrum(
        seed in 0u64..500,
    ) {
        let dim = 4usize;
        let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = c64(next(), next());
            }
        }
        // Random unitary from a product of Givens-like rotations; its
        // inverse is the adjoint, so P M P^{-1} is well conditioned.
        let mut p = ComplexMatrix::identity(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let ang = next() * PI;
                let phase = c64(0.0, next() * PI).exp();
                let mut g = ComplexMatrix::identity(dim);
                g[(i, i)] = c64(ang.cos(), 0.0);
                g[(j, j)] = c64(ang.cos(), 0.0);
                g[(i, j)] = phase * ang.sin();
                g[(j, i)] = -phase.conj() * ang.sin();
                p = p.matmul(&g);
            }
        }
        let sim = p.matmul(&m).matmul(&p.adjoint());
        let mut s0: Vec<Complex64> = eig_dense(&m, 1e-9).unwrap().into_iter().map(|x| x.0).collect();
        let mut s1: Vec<Complex64> = eig_dense(&sim, 1e-9).unwrap().into_iter().map(|x| x.0).collect();
        let key = |z: &Complex64| (z.re, z.im);
        s0.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        s1.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (a, b) in s0.iter().zip(&s1) {
            prop_assert!((a - b).norm() < 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn hermitian_generators_preserve_norm(
        seed in 0u64..200,
        span in 0.5f64..3.0,
    ) {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(11);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let mut h = ComplexMatrix::zeros(2);
        let (d0, d1, re, im) = (next(), next(), next(), next());
        h[(0, 0)] = c64(d0, 0.0);
        h[(1, 1)] = c64(d1, 0.0);
        h[(0, 1)] = c64(re, im);
        h[(1, 0)] = c64(re, -im);
        let grid = TimeGrid::new(0.0, span, 2001).unwrap();
        let y0 = ComplexVector::new(vec![c64(next(), next()), c64(next(), next())]).unwrap()
            .normalized().unwrap();
        let mut rhs = |_t: f64, y: &ComplexVector| h.matvec(y).scale(c64(0.0, -1.0));
        let y = gwphase_core::numerics::integrate_ode(&mut rhs, &y0, &grid).unwrap();
        prop_assert!((y.norm() - 1.0).abs() < 1e-8 * span.max(1.0));
    }
}
