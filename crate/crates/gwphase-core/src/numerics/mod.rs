//! Self-contained dense complex linear algebra, ODE integration, and
//! quadrature. Everything is plain `Vec<Complex64>` storage; matrices are
//! square and row-major. Dimensions stay small (two-level scenarios up to a
//! few hundred for ring discretizations), so no blocking or sparsity.

use alloc::{vec, vec::Vec};
use core::fmt;
use num_complex::Complex64;
// Required for f64 math in pure no_std builds; shadowed by std's inherent
// methods whenever std is in the crate graph, hence the allow.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{GwError, Result};

mod eig;
mod expm;
mod ode;

pub use eig::eig_dense;
pub use expm::expm;
pub use ode::integrate_ode;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Wrap an angle to the principal interval (-pi, pi].
pub fn wrap_principal(x: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut w = x - two_pi * (x / two_pi).round();
    if w <= -core::f64::consts::PI {
        w += two_pi;
    } else if w > core::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Fixed-order pairwise reduction; deterministic and more stable than a
/// left fold for long sums.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::default(),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Complex column vector.
#[derive(Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GwError::contract("vector must have dim >= 1"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GwError::contract("vector entries must be finite"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::default(); dim],
        }
    }

    /// Standard basis vector e_k.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = c64(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Sesquilinear inner product `<self|other>` (self conjugated).
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Unit-normalized copy; errors on (near-)zero vectors.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(GwError::contract("cannot normalize zero vector"));
        }
        Ok(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter()).finish()
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = c64(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(GwError::contract("matrix must have dim >= 1"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(GwError::contract("matrix rows must all have length dim"));
        }
        let entries: Vec<Complex64> = rows.iter().flatten().copied().collect();
        let m = Self { dim, entries };
        if !m.is_finite() {
            return Err(GwError::contract("matrix entries must be finite"));
        }
        Ok(m)
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matvec(&self, v: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = Complex64::default();
            for j in 0..self.dim {
                acc += self[(i, j)] * v.entries()[j];
            }
            out.entries_mut()[i] = acc;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::default() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.entries.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max relative asymmetry against the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.frobenius_norm().max(1e-300);
        self.sub(&self.adjoint()).frobenius_norm() / scale
    }

    pub fn max_entry_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                write!(f, " {:+.4e}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Uniform time grid over `[t0, t1]` with at least two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_samples: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(GwError::contract("time grid requires finite t1 > t0"));
        }
        if n_samples < 2 {
            return Err(GwError::contract("time grid requires n_samples >= 2"));
        }
        Ok(Self { t0, t1, n_samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_samples - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Sample position; exactly `t1` at the last index.
    pub fn sample(&self, k: usize) -> f64 {
        if k + 1 == self.n_samples {
            self.t1
        } else {
            self.t0 + self.step() * k as f64
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |k| self.sample(k))
    }
}

/// Trapezoid rule for samples aligned with a uniform grid.
///
/// Exact on affine integrands; second-order in the step size otherwise.
pub fn quadrature(samples: &[Complex64], grid: &TimeGrid) -> Result<Complex64> {
    if samples.len() != grid.n_samples() {
        return Err(GwError::LengthMismatch {
            expected: grid.n_samples(),
            actual: samples.len(),
        });
    }
    let h = grid.step();
    let n = samples.len();
    let mut terms: Vec<Complex64> = Vec::with_capacity(n);
    for (k, &s) in samples.iter().enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        terms.push(s * w);
    }
    Ok(pairwise_sum(&terms) * c64(h, 0.0))
}
