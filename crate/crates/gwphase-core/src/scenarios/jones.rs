//! Jones-calculus optics with absorbing dichroic media.
//!
//! A homogeneous slab is a 2x2 complex generator `N` (refractive action per
//! unit length) with transfer matrix `exp(-i N L)`. Dichroic absorption
//! makes `N` non-Hermitian, so the eigenpolarizations are non-orthogonal and
//! a cyclic polarization circuit picks up a complex geometric phase: a
//! rotation plus an attenuation that no per-medium bookkeeping accounts for.
//!
//! The measurement protocol compares two runs with identical dwell lengths
//! in each medium. In the merged run the beam traverses the media back to
//! back as one coherent block; in the reference run each medium sits between
//! vacuum stretches and is measured on its own eigenpolarization, so the
//! reference amplitude is the product of the individual transfer
//! eigenvalues. Dynamical attenuation and phase cancel in the ratio, leaving
//! the geometric part of the merged cycle. Vacuum segments act as the
//! separators between coherent blocks.

use alloc::{string::String, vec::Vec};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::biortho::HamiltonianLoop;
use crate::geomphase::GwPhase;
use crate::numerics::{c64, eig_dense, expm, ComplexMatrix, ComplexVector, TimeGrid};
use crate::{GwError, Result};

const VACUUM_ACTION_FLOOR: f64 = 1e-14;
const CYCLIC_INPUT_TOL: f64 = 1e-9;

/// A homogeneous optical slab: generator `N` per unit length and a length.
#[derive(Debug, Clone)]
pub struct JonesSegment {
    generator: ComplexMatrix,
    length: f64,
    label: String,
}

impl JonesSegment {
    pub fn new(generator: ComplexMatrix, length: f64, label: impl Into<String>) -> Result<Self> {
        if generator.dim() != 2 {
            return Err(GwError::contract("Jones generator must be 2x2"));
        }
        if !(length.is_finite() && length >= 0.0) {
            return Err(GwError::contract("segment length must be finite and >= 0"));
        }
        Ok(Self {
            generator,
            length,
            label: label.into(),
        })
    }

    /// Vacuum stretch: zero generator, identity transfer.
    pub fn vacuum(length: f64) -> Self {
        Self {
            generator: ComplexMatrix::zeros(2),
            length,
            label: String::from("vacuum"),
        }
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Transfer matrix `exp(-i N L)`.
    pub fn transfer(&self) -> Result<ComplexMatrix> {
        expm(&self.generator.scale(c64(0.0, -self.length)))
    }

    /// Segments with negligible optical action separate coherent blocks.
    pub fn is_vacuum(&self) -> bool {
        self.generator.frobenius_norm() * self.length.max(1.0) < VACUUM_ACTION_FLOOR
    }
}

/// Apply the segment transfers in order to an input Jones vector.
pub fn propagate_sequence(
    segments: &[JonesSegment],
    input: &ComplexVector,
) -> Result<ComplexVector> {
    if input.dim() != 2 {
        return Err(GwError::contract("Jones vectors are two-component"));
    }
    let mut state = input.clone();
    for seg in segments {
        state = seg.transfer()?.matvec(&state);
    }
    Ok(state)
}

/// Eigenpolarizations of the merged (vacuum-separator-free) cycle map of a
/// sequence, sorted by descending |eigenvalue| (dominant first).
pub fn cycle_eigenpolarizations(
    segments: &[JonesSegment],
) -> Result<Vec<(Complex64, ComplexVector)>> {
    let m = merged_product(segments)?;
    let mut pairs = eig_dense(&m, 1e-10)?;
    pairs.sort_by(|a, b| b.0.norm().partial_cmp(&a.0.norm()).unwrap());
    Ok(pairs)
}

fn merged_product(segments: &[JonesSegment]) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::identity(2);
    for seg in segments {
        m = seg.transfer()?.matmul(&m);
    }
    Ok(m)
}

/// Coherent blocks of a sequence, split at vacuum segments (in traversal
/// order).
fn coherent_blocks(segments: &[JonesSegment]) -> Vec<Vec<&JonesSegment>> {
    let mut blocks = Vec::new();
    let mut current: Vec<&JonesSegment> = Vec::new();
    for seg in segments {
        if seg.is_vacuum() {
            if !current.is_empty() {
                blocks.push(core::mem::take(&mut current));
            }
        } else {
            current.push(seg);
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

/// Cyclic amplitude of a sequence: the product over coherent blocks of the
/// block transfer eigenvalue on the branch continuing the input
/// polarization.
fn segmented_cycle_amplitude(segments: &[JonesSegment], input: &ComplexVector) -> Result<Complex64> {
    let mut amplitude = c64(1.0, 0.0);
    for block in coherent_blocks(segments) {
        let mut m = ComplexMatrix::identity(2);
        for seg in block {
            m = seg.transfer()?.matmul(&m);
        }
        let pairs = eig_dense(&m, 1e-10)?;
        // Branch continuing the input polarization: maximal normalized
        // overlap.
        let (mu, _) = pairs
            .iter()
            .max_by(|a, b| {
                let oa = input.dot(&a.1).norm() / input.norm();
                let ob = input.dot(&b.1).norm() / input.norm();
                oa.partial_cmp(&ob).unwrap()
            })
            .expect("2x2 spectrum is nonempty");
        amplitude *= mu;
    }
    Ok(amplitude)
}

/// Complex geometric phase of a merged media cycle, extracted as the ratio
/// of the cyclic output amplitudes of the merged and reference sequences on
/// the returning eigenpolarization:
///
/// `phi = -i ln( c_merged / c_reference )`.
///
/// Both sequences must dwell identically long in each medium so that the
/// dynamical factors cancel; the reference sequence (each medium isolated
/// between vacuum stretches and scored on its own eigenpolarization) yields
/// zero by construction.
pub fn sequence_phase_extract(
    seq_entangled: &[JonesSegment],
    seq_reference: &[JonesSegment],
    input: &ComplexVector,
) -> Result<GwPhase> {
    if input.dim() != 2 {
        return Err(GwError::contract("Jones vectors are two-component"));
    }
    // Matched dwell lengths per medium: compare the sorted non-vacuum
    // generator actions.
    let mut a: Vec<f64> = seq_entangled
        .iter()
        .filter(|s| !s.is_vacuum())
        .map(|s| s.generator.frobenius_norm() * s.length)
        .collect();
    let mut b: Vec<f64> = seq_reference
        .iter()
        .filter(|s| !s.is_vacuum())
        .map(|s| s.generator.frobenius_norm() * s.length)
        .collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if a.len() != b.len()
        || a.iter()
            .zip(&b)
            .any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0))
    {
        return Err(GwError::contract(
            "entangled and reference sequences must dwell identically in each medium",
        ));
    }

    // The input must be a cyclic polarization of the merged map.
    let m = merged_product(seq_entangled)?;
    let input_n = input.normalized()?;
    let mapped = m.matvec(&input_n);
    let rayleigh = input_n.dot(&mapped);
    let residual = mapped.sub(&input_n.scale(rayleigh)).norm();
    let overlap = if mapped.norm() < 1e-300 {
        0.0
    } else {
        input_n.dot(&mapped).norm() / mapped.norm()
    };
    if residual > CYCLIC_INPUT_TOL * mapped.norm().max(1e-300) {
        return Err(GwError::NonCyclicPolarization { overlap });
    }

    let c_ent = segmented_cycle_amplitude(seq_entangled, &input_n)?;
    let c_ref = segmented_cycle_amplitude(seq_reference, &input_n)?;
    if c_ref.norm() < 1e-300 {
        return Err(GwError::contract("reference amplitude vanished"));
    }
    let value = (c_ent / c_ref).ln() * c64(0.0, -1.0);
    Ok(GwPhase::from_accumulated(value, value.norm(), 1))
}

/// Fiber with a generator that rotates once about the propagation axis over
/// the total length: `N(z) = R(alpha z) N R(-alpha z)`, packaged as a cyclic
/// loop in `z`.
pub fn helical_fiber_loop(
    rotation_rate: f64,
    generator: &ComplexMatrix,
    total_length: f64,
    samples: usize,
) -> Result<HamiltonianLoop> {
    if generator.dim() != 2 {
        return Err(GwError::contract("fiber generator must be 2x2"));
    }
    if !(total_length.is_finite() && total_length > 0.0) {
        return Err(GwError::contract("fiber length must be positive"));
    }
    let turn = rotation_rate * total_length;
    if (turn - 2.0 * core::f64::consts::PI).abs() > 1e-9 {
        return Err(GwError::contract(
            "fiber must complete exactly one rotation over its length",
        ));
    }
    let grid = TimeGrid::new(0.0, total_length, samples)?;
    let mut hs = Vec::with_capacity(samples);
    for k in 0..samples {
        let angle = rotation_rate * grid.sample(k);
        hs.push(rotate_generator(generator, angle));
    }
    // R(2 pi) is the identity rotation; close the loop exactly.
    let first = hs[0].clone();
    *hs.last_mut().unwrap() = first;
    HamiltonianLoop::new_cyclic(grid, hs)
}

fn rotate_generator(n: &ComplexMatrix, angle: f64) -> ComplexMatrix {
    let (s, c) = angle.sin_cos();
    let mut r = ComplexMatrix::zeros(2);
    r[(0, 0)] = c64(c, 0.0);
    r[(0, 1)] = c64(-s, 0.0);
    r[(1, 0)] = c64(s, 0.0);
    r[(1, 1)] = c64(c, 0.0);
    let mut rt = ComplexMatrix::zeros(2);
    rt[(0, 0)] = c64(c, 0.0);
    rt[(0, 1)] = c64(s, 0.0);
    rt[(1, 0)] = c64(-s, 0.0);
    rt[(1, 1)] = c64(c, 0.0);
    r.matmul(n).matmul(&rt)
}
