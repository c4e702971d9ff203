//! Biorthogonal (left/right) eigensystems of non-Hermitian matrices and
//! smooth eigenbranch tracking around closed Hamiltonian loops.
//!
//! A non-Hermitian matrix H has right eigenvectors `H |psi_i> = w_i |psi_i>`
//! and left eigenvectors `<phi_i| H = w_i <phi_i|`, stored here as kets of
//! the conjugate-transpose problem (`H^dag |phi_i> = conj(w_i) |phi_i>`).
//! For non-degenerate spectra the two families are mutually orthogonal,
//! `<phi_i|psi_j> = delta_ij <phi_i|psi_i>`, and H is recovered as
//! `sum_i w_i |psi_i><phi_i| / <phi_i|psi_i>`.
//!
//! Near an exceptional point the diagonal overlap `<phi_i|psi_i>` collapses
//! to zero and every formula built on it degenerates; a normalized-overlap
//! floor guards all downstream phase computations.

use alloc::{format, vec::Vec};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{c64, eig_dense, ComplexMatrix, ComplexVector, TimeGrid};
use crate::{GwError, Result};

/// Normalized overlap |<phi|psi>| / (|phi| |psi|) below which a pair of
/// left/right vectors counts as exceptional.
pub const EXCEPTIONAL_POINT_FLOOR: f64 = 1e-6;

/// Minimum normalized overlap for a branch to count as having returned to
/// its initial subspace after a cyclic loop.
pub const SUBSPACE_RETURN_FLOOR: f64 = 0.99;

/// Complex eigenvalues with paired left/right eigenvectors.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    dim: usize,
    eigenvalues: Vec<Complex64>,
    right_vectors: Vec<ComplexVector>,
    left_vectors: Vec<ComplexVector>,
    overlaps: Vec<Complex64>,
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn right(&self, i: usize) -> &ComplexVector {
        &self.right_vectors[i]
    }

    pub fn left(&self, i: usize) -> &ComplexVector {
        &self.left_vectors[i]
    }

    /// Diagonal overlap `<phi_i|psi_i>`.
    pub fn overlap(&self, i: usize) -> Complex64 {
        self.overlaps[i]
    }

    /// Reconstruct `sum_i w_i |psi_i><phi_i| / <phi_i|psi_i>`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            let w = self.eigenvalues[i] / self.overlaps[i];
            let psi = self.right_vectors[i].entries();
            let phi = self.left_vectors[i].entries();
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] += w * psi[r] * phi[c].conj();
                }
            }
        }
        m
    }
}

/// Decompose a non-Hermitian matrix into its biorthogonal eigensystem.
///
/// Left vectors are eigenvectors of the conjugate-transpose problem, matched
/// to right vectors through the conjugated eigenvalue. Fails when the
/// eigenvalue gap drops below `tol * max(1, |H|_F)` or when a normalized
/// overlap falls under [`EXCEPTIONAL_POINT_FLOOR`].
pub fn biorthogonal_decompose(h: &ComplexMatrix, tol: f64) -> Result<BiorthogonalSystem> {
    let n = h.dim();
    let scale = h.frobenius_norm().max(1.0);

    let rights = eig_dense(h, tol.max(1e-12))?;
    let lefts = eig_dense(&h.adjoint(), tol.max(1e-12))?;

    // Degeneracy floor on the right spectrum.
    let floor = tol * scale;
    for i in 0..n {
        for j in i + 1..n {
            let gap = (rights[i].0 - rights[j].0).norm();
            if gap <= floor {
                return Err(GwError::NearDegeneracy { gap, floor });
            }
        }
    }

    // Match left eigenpairs by conjugated eigenvalue.
    let mut used = alloc::vec![false; n];
    let mut left_vectors = Vec::with_capacity(n);
    for (w, _) in &rights {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (j, (wl, _)) in lefts.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (wl.conj() - w).norm();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if best == usize::MAX || best_d > 1e-6 * scale {
            return Err(GwError::contract(format!(
                "left/right eigenvalue matching failed: residual {best_d:.3e}"
            )));
        }
        used[best] = true;
        left_vectors.push(lefts[best].1.clone());
    }

    let eigenvalues: Vec<Complex64> = rights.iter().map(|p| p.0).collect();
    let right_vectors: Vec<ComplexVector> = rights.into_iter().map(|p| p.1).collect();

    let mut overlaps = Vec::with_capacity(n);
    for i in 0..n {
        let d = left_vectors[i].dot(&right_vectors[i]);
        let normalized = d.norm() / (left_vectors[i].norm() * right_vectors[i].norm());
        if normalized < EXCEPTIONAL_POINT_FLOOR {
            return Err(GwError::ExceptionalPoint {
                overlap: normalized,
                floor: EXCEPTIONAL_POINT_FLOOR,
            });
        }
        overlaps.push(d);
    }

    Ok(BiorthogonalSystem {
        dim: n,
        eigenvalues,
        right_vectors,
        left_vectors,
        overlaps,
    })
}

/// A sampled path of Hamiltonians over a uniform grid, cyclic or open.
#[derive(Debug, Clone)]
pub struct HamiltonianLoop {
    grid: TimeGrid,
    samples: Vec<ComplexMatrix>,
    cyclic: bool,
}

impl HamiltonianLoop {
    /// Cyclic loop: the last sample must equal the first entrywise within
    /// `1e-12` relative to the matrix scale.
    pub fn new_cyclic(grid: TimeGrid, samples: Vec<ComplexMatrix>) -> Result<Self> {
        let lp = Self::new_open(grid, samples)?;
        let first = &lp.samples[0];
        let last = &lp.samples[lp.samples.len() - 1];
        let defect = last.sub(first).max_entry_norm();
        let scale = first.max_entry_norm().max(1.0);
        if defect > 1e-12 * scale {
            return Err(GwError::contract(format!(
                "loop is not cyclic: endpoint defect {defect:.3e}"
            )));
        }
        Ok(Self { cyclic: true, ..lp })
    }

    /// Open path: no closure requirement.
    pub fn new_open(grid: TimeGrid, samples: Vec<ComplexMatrix>) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(GwError::LengthMismatch {
                expected: grid.n_samples(),
                actual: samples.len(),
            });
        }
        let dim = samples[0].dim();
        if samples.iter().any(|m| m.dim() != dim) {
            return Err(GwError::contract("loop samples must share one dimension"));
        }
        if samples.iter().any(|m| !m.is_finite()) {
            return Err(GwError::contract("loop samples must be finite"));
        }
        Ok(Self {
            grid,
            samples,
            cyclic: false,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> &ComplexMatrix {
        &self.samples[k]
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    /// Max Hermiticity defect over all samples.
    pub fn hermiticity_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|m| m.hermiticity_defect())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of H(t) between samples.
    pub fn interpolate(&self, t: f64) -> ComplexMatrix {
        let h = self.grid.step();
        let n = self.samples.len();
        let pos = ((t - self.grid.t0()) / h).max(0.0);
        let k = (pos.floor() as usize).min(n - 2);
        let frac = (pos - k as f64).clamp(0.0, 1.0);
        let a = &self.samples[k];
        let b = &self.samples[k + 1];
        a.scale(c64(1.0 - frac, 0.0)).add(&b.scale(c64(frac, 0.0)))
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            grid: self.grid.clone(),
            samples,
            cyclic: self.cyclic,
        }
    }
}

/// One smoothly tracked eigenbranch along a loop.
///
/// Consecutive right (and left) vectors carry the continuity gauge
/// `Re <v(t_k)|v(t_{k+1})> > 0`; for cyclic loops the terminal vectors are
/// identified with the initial ones exactly, so the final interval absorbs
/// the loop's holonomy phase (the one consecutive pair exempt from the
/// continuity-gauge sign rule).
#[derive(Debug, Clone)]
pub struct EigenbranchPath {
    branch: usize,
    grid: TimeGrid,
    omegas: Vec<Complex64>,
    rights: Vec<ComplexVector>,
    lefts: Vec<ComplexVector>,
    cyclic: bool,
}

impl EigenbranchPath {
    pub fn branch_index(&self) -> usize {
        self.branch
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn omega(&self, k: usize) -> Complex64 {
        self.omegas[k]
    }

    pub fn omegas(&self) -> &[Complex64] {
        &self.omegas
    }

    pub fn right(&self, k: usize) -> &ComplexVector {
        &self.rights[k]
    }

    pub fn left(&self, k: usize) -> &ComplexVector {
        &self.lefts[k]
    }

    /// Gauge transformation: per-sample complex rescalings of the right and
    /// left vectors. The physical content of cyclic-phase computations must
    /// not depend on it.
    pub fn rescaled(
        &self,
        mut psi_factor: impl FnMut(f64) -> Complex64,
        mut phi_factor: impl FnMut(f64) -> Complex64,
    ) -> Self {
        let mut out = self.clone();
        for k in 0..out.len() {
            let t = out.grid.sample(k);
            out.rights[k] = out.rights[k].scale(psi_factor(t));
            out.lefts[k] = out.lefts[k].scale(phi_factor(t));
        }
        out
    }

    /// Construct directly from per-sample data (the scenario modules build
    /// analytic branches this way in tests).
    pub fn from_parts(
        branch: usize,
        grid: TimeGrid,
        omegas: Vec<Complex64>,
        rights: Vec<ComplexVector>,
        lefts: Vec<ComplexVector>,
        cyclic: bool,
    ) -> Result<Self> {
        let n = grid.n_samples();
        if omegas.len() != n || rights.len() != n || lefts.len() != n {
            return Err(GwError::LengthMismatch {
                expected: n,
                actual: omegas.len().min(rights.len()).min(lefts.len()),
            });
        }
        Ok(Self {
            branch,
            grid,
            omegas,
            rights,
            lefts,
            cyclic,
        })
    }
}

/// Track all eigenbranches along a loop.
///
/// Branches are matched between adjacent samples by minimal eigenvalue
/// distance (greedy, adequate for the small dimensions used here); the
/// continuity gauge fixes inter-sample phases. For cyclic loops each branch
/// must return to its initial subspace (normalized overlap above
/// [`SUBSPACE_RETURN_FLOOR`]), after which the terminal sample is overwritten
/// by the initial one to make the endpoint identification exact.
pub fn track_branches(lp: &HamiltonianLoop, tol: f64) -> Result<Vec<EigenbranchPath>> {
    let n_samples = lp.samples().len();
    let dim = lp.dim();

    let mut omegas = alloc::vec![Vec::with_capacity(n_samples); dim];
    let mut rights: Vec<Vec<ComplexVector>> = alloc::vec![Vec::with_capacity(n_samples); dim];
    let mut lefts: Vec<Vec<ComplexVector>> = alloc::vec![Vec::with_capacity(n_samples); dim];

    let first = biorthogonal_decompose(lp.sample(0), tol)?;
    for b in 0..dim {
        omegas[b].push(first.eigenvalues()[b]);
        rights[b].push(first.right(b).clone());
        lefts[b].push(first.left(b).clone());
    }

    for k in 1..n_samples {
        let sys = biorthogonal_decompose(lp.sample(k), tol)?;
        let t = lp.grid().sample(k);
        let mut taken = alloc::vec![false; dim];
        for b in 0..dim {
            let prev = omegas[b][k - 1];
            // Best and runner-up among unassigned candidates.
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            let mut second_d = f64::INFINITY;
            for (j, w) in sys.eigenvalues().iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let d = (w - prev).norm();
                if d < best_d {
                    second_d = best_d;
                    best_d = d;
                    best = j;
                } else if d < second_d {
                    second_d = d;
                }
            }
            if second_d.is_finite() && (second_d - best_d).abs() < tol {
                return Err(GwError::BranchCollision {
                    t,
                    separation: second_d - best_d,
                });
            }
            taken[best] = true;

            // Continuity gauge: rotate the new vectors so the inner product
            // with the previous sample is real positive.
            let psi = align_phase(&rights[b][k - 1], sys.right(best));
            let phi = align_phase(&lefts[b][k - 1], sys.left(best));
            omegas[b].push(sys.eigenvalues()[best]);
            rights[b].push(psi);
            lefts[b].push(phi);
        }
    }

    let mut out = Vec::with_capacity(dim);
    for b in 0..dim {
        let mut cyclic = false;
        if lp.is_cyclic() {
            let ret = rights[b][0].dot(&rights[b][n_samples - 1]).norm()
                / (rights[b][0].norm() * rights[b][n_samples - 1].norm());
            if ret <= SUBSPACE_RETURN_FLOOR {
                return Err(GwError::NonCyclicBranch {
                    branch: b,
                    overlap: ret,
                });
            }
            // Endpoint identification: terminal state set to the initial one.
            omegas[b][n_samples - 1] = omegas[b][0];
            rights[b][n_samples - 1] = rights[b][0].clone();
            lefts[b][n_samples - 1] = lefts[b][0].clone();
            cyclic = true;
        }
        out.push(EigenbranchPath {
            branch: b,
            grid: lp.grid().clone(),
            omegas: core::mem::take(&mut omegas[b]),
            rights: core::mem::take(&mut rights[b]),
            lefts: core::mem::take(&mut lefts[b]),
            cyclic,
        });
    }
    Ok(out)
}

/// Multiply `next` by a phase making `<prev|next>` real positive.
fn align_phase(prev: &ComplexVector, next: &ComplexVector) -> ComplexVector {
    let ov = prev.dot(next);
    if ov.norm() < 1e-300 {
        return next.clone();
    }
    let phase = ov.conj() / ov.norm();
    next.scale(phase)
}
