//! Dense complex eigensolver.
//!
//! Dimensions 1-3 use closed-form characteristic roots (polished by Newton
//! steps on the characteristic polynomial); larger matrices go through a
//! Householder reduction to upper Hessenberg form followed by an explicitly
//! shifted QR iteration with Wilkinson shifts and deflation. Eigenvectors
//! come from back-substitution on the Schur factor.

use alloc::{vec, vec::Vec};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{c64, ComplexMatrix, ComplexVector};
use crate::{GwError, Result};

const MAX_DIM: usize = 1024;
const ITERS_PER_EIGENVALUE: usize = 40;

/// Eigenvalues and unit-norm right eigenvectors of a dense complex matrix.
///
/// Pairs are sorted by `(Re, Im)` of the eigenvalue. Every returned pair
/// satisfies `|M v - lambda v| <= tol * |M|_F` (unit `v`); otherwise a
/// solver failure with the worst residual is reported.
pub fn eig_dense(m: &ComplexMatrix, tol: f64) -> Result<Vec<(Complex64, ComplexVector)>> {
    let n = m.dim();
    if n == 0 || n > MAX_DIM {
        return Err(GwError::contract("eig_dense requires 1 <= dim <= 1024"));
    }
    if !m.is_finite() {
        return Err(GwError::contract("eig_dense requires finite entries"));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(GwError::contract("eig_dense requires tol > 0"));
    }

    let scale = m.frobenius_norm();
    if scale == 0.0 {
        // Zero matrix: eigenvalue 0 with the standard basis.
        return Ok((0..n)
            .map(|k| (Complex64::default(), ComplexVector::basis(n, k)))
            .collect());
    }

    let mut pairs = if is_diagonal(m, scale) {
        (0..n)
            .map(|k| (m[(k, k)], ComplexVector::basis(n, k)))
            .collect()
    } else {
        match n {
            1 => vec![(m[(0, 0)], ComplexVector::basis(1, 0))],
            2 | 3 => closed_form_small(m)?,
            _ => schur_eig(m)?,
        }
    };

    pairs.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .expect("finite eigenvalues")
    });

    let mut worst = 0.0f64;
    for (lambda, v) in &pairs {
        let r = m.matvec(v).sub(&v.scale(*lambda)).norm() / (scale * v.norm());
        worst = worst.max(r);
    }
    if worst > tol {
        return Err(GwError::SolverFailure {
            residual: worst * scale,
            iterations: ITERS_PER_EIGENVALUE * n,
        });
    }
    Ok(pairs)
}

fn is_diagonal(m: &ComplexMatrix, scale: f64) -> bool {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)].norm() > 1e-15 * scale {
                return false;
            }
        }
    }
    true
}

/// Characteristic-polynomial coefficients for dims 2 and 3, Newton-polished
/// roots, eigenvectors from null spaces.
fn closed_form_small(m: &ComplexMatrix) -> Result<Vec<(Complex64, ComplexVector)>> {
    let n = m.dim();
    let lambdas = match n {
        2 => {
            let tr = m.trace();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let half = tr * 0.5;
            let disc = (half * half - det).sqrt();
            vec![half + disc, half - disc]
        }
        3 => {
            // p(x) = x^3 - tr x^2 + c1 x - det
            let tr = m.trace();
            let det = det3(m);
            let c1 = minor_sum3(m);
            let roots = cubic_roots(-tr, c1, -det);
            let mut polished: Vec<Complex64> = roots
                .into_iter()
                .map(|r| newton_polish_cubic(r, -tr, c1, -det))
                .collect();
            polished.truncate(3);
            polished
        }
        _ => unreachable!(),
    };

    let mut out = Vec::with_capacity(n);
    for lambda in lambdas {
        let v = null_vector(m, lambda)?;
        out.push((lambda, v));
    }
    Ok(out)
}

fn det3(m: &ComplexMatrix) -> Complex64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Sum of principal 2x2 minors.
fn minor_sum3(m: &ComplexMatrix) -> Complex64 {
    (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)])
        + (m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)])
        + (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
}

/// Roots of x^3 + a x^2 + b x + c (complex coefficients, Cardano).
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let third = c64(1.0 / 3.0, 0.0);
    let shift = a * third;
    // depressed: t^3 + p t + q
    let p = b - a * a * third;
    let q = c64(2.0 / 27.0, 0.0) * a * a * a - a * b * third + c;

    let half_q = q * 0.5;
    let disc = (half_q * half_q + p * p * p / 27.0).sqrt();
    // Choose the cube-root argument with larger magnitude to avoid
    // cancellation.
    let u_candidate_1 = -half_q + disc;
    let u_candidate_2 = -half_q - disc;
    let w = if u_candidate_1.norm() >= u_candidate_2.norm() {
        u_candidate_1
    } else {
        u_candidate_2
    };

    if w.norm() < 1e-300 {
        // p == q == 0: triple root at -a/3.
        return vec![-shift, -shift, -shift];
    }

    let u0 = w.cbrt();
    let omega = c64(-0.5, 0.75f64.sqrt());
    let mut roots = Vec::with_capacity(3);
    let mut u = u0;
    for _ in 0..3 {
        let t = if u.norm() < 1e-300 {
            Complex64::default()
        } else {
            u - p / (u * 3.0)
        };
        roots.push(t - shift);
        u *= omega;
    }
    roots
}

fn newton_polish_cubic(x0: Complex64, a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let mut x = x0;
    for _ in 0..3 {
        let f = ((x + a) * x + b) * x + c;
        let df = (x * 3.0 + a * 2.0) * x + b;
        if df.norm() < 1e-300 {
            break;
        }
        let step = f / df;
        x -= step;
        if step.norm() < 1e-16 * x.norm().max(1.0) {
            break;
        }
    }
    x
}

/// Unit null vector of (M - lambda I) for small dims via the best row cross
/// product (3x3) or explicit 2x2 structure.
fn null_vector(m: &ComplexMatrix, lambda: Complex64) -> Result<ComplexVector> {
    let n = m.dim();
    match n {
        2 => {
            let a = m[(0, 0)] - lambda;
            let b = m[(0, 1)];
            let cc = m[(1, 0)];
            let d = m[(1, 1)] - lambda;
            // Rows of (M - lambda) are proportional; null vector from the
            // larger row.
            let cand1 = [b, -a];
            let cand2 = [d, -cc];
            let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
            let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
            let raw = if n1 >= n2 { cand1 } else { cand2 };
            let nrm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
            if nrm < 1e-14 * m.frobenius_norm().max(1.0) {
                // Both rows vanish: lambda is a double eigenvalue of a
                // scalar matrix.
                return Ok(ComplexVector::basis(2, 0));
            }
            ComplexVector::new(vec![raw[0] / nrm, raw[1] / nrm])
        }
        3 => {
            let rows: Vec<[Complex64; 3]> = (0..3)
                .map(|i| {
                    [
                        m[(i, 0)] - if i == 0 { lambda } else { Complex64::default() },
                        m[(i, 1)] - if i == 1 { lambda } else { Complex64::default() },
                        m[(i, 2)] - if i == 2 { lambda } else { Complex64::default() },
                    ]
                })
                .collect();
            let mut best: Option<(f64, [Complex64; 3])> = None;
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let cr = cross3(&rows[i], &rows[j]);
                let nrm = (cr[0].norm_sqr() + cr[1].norm_sqr() + cr[2].norm_sqr()).sqrt();
                if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                    best = Some((nrm, cr));
                }
            }
            let (nrm, cr) = best.unwrap();
            if nrm < 1e-13 * m.frobenius_norm().max(1.0) {
                // Degenerate null space; fall back to inverse-iteration-free
                // basis guess: the column of the adjugate with largest norm
                // has already been covered by the cross products, so just
                // pick the basis vector minimizing the residual.
                let mut best_k = 0;
                let mut best_r = f64::INFINITY;
                for k in 0..3 {
                    let e = ComplexVector::basis(3, k);
                    let r = m.matvec(&e).sub(&e.scale(lambda)).norm();
                    if r < best_r {
                        best_r = r;
                        best_k = k;
                    }
                }
                return Ok(ComplexVector::basis(3, best_k));
            }
            ComplexVector::new(vec![cr[0] / nrm, cr[1] / nrm, cr[2] / nrm])
        }
        _ => unreachable!(),
    }
}

fn cross3(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

// ----- Hessenberg + shifted QR path -----

struct Givens {
    c: f64,
    s: Complex64,
}

/// Compute a Givens rotation G such that G [f, g]^T = [r, 0]^T.
fn givens(f: Complex64, g: Complex64) -> (Givens, Complex64) {
    let fn_ = f.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return (
            Givens {
                c: 1.0,
                s: Complex64::default(),
            },
            f,
        );
    }
    if fn_ == 0.0 {
        return (
            Givens {
                c: 0.0,
                s: c64(1.0, 0.0),
            },
            g,
        );
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / d;
    let fsign = f / fn_;
    let s = fsign * g.conj() / d;
    (Givens { c, s }, fsign * d)
}

fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal.
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm < 1e-300 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 {
            c64(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        x[0] += phase * xnorm;
        let vnorm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // H <- P H, rows k+1..n
        for j in 0..n {
            let mut dot = Complex64::default();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += x[idx].conj() * h[(i, j)];
            }
            dot *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let upd = h[(i, j)] - x[idx] * dot;
                h[(i, j)] = upd;
            }
        }
        // H <- H P, cols k+1..n
        for i in 0..n {
            let mut dot = Complex64::default();
            for (idx, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                let upd = h[(i, j)] - dot * x[idx].conj();
                h[(i, j)] = upd;
            }
        }
        // Q <- Q P
        for i in 0..n {
            let mut dot = Complex64::default();
            for (idx, j) in (k + 1..n).enumerate() {
                dot += q[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                let upd = q[(i, j)] - dot * x[idx].conj();
                q[(i, j)] = upd;
            }
        }
        // Clean explicit zeros below the subdiagonal.
        for i in k + 2..n {
            h[(i, k)] = Complex64::default();
        }
    }
    (h, q)
}

/// Schur decomposition by explicit single-shift QR with deflation;
/// eigenvectors by back-substitution on the triangular factor.
fn schur_eig(m: &ComplexMatrix) -> Result<Vec<(Complex64, ComplexVector)>> {
    let n = m.dim();
    let (mut h, mut z) = hessenberg(m);
    let scale = m.frobenius_norm();
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iters_this = 0usize;
    let mut total_budget = ITERS_PER_EIGENVALUE * n;

    loop {
        // Deflate converged subdiagonals.
        while hi > 0 {
            let off = h[(hi, hi - 1)].norm();
            let diag = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            if off <= eps * diag.max(eps * scale) {
                h[(hi, hi - 1)] = Complex64::default();
                hi -= 1;
                iters_this = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        // Active window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let off = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if off <= eps * diag.max(eps * scale) {
                h[(lo, lo - 1)] = Complex64::default();
                break;
            }
            lo -= 1;
        }

        if total_budget == 0 {
            let worst = (1..=hi).map(|i| h[(i, i - 1)].norm()).fold(0.0, f64::max);
            return Err(GwError::SolverFailure {
                residual: worst,
                iterations: ITERS_PER_EIGENVALUE * n,
            });
        }
        total_budget -= 1;
        iters_this += 1;

        // Wilkinson shift from the trailing 2x2, exceptional shift when
        // progress stalls.
        let shift = if iters_this.is_multiple_of(13) {
            let mag = h[(hi, hi - 1)].norm() + if hi > 1 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + c64(0.75 * mag, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // Explicit shifted QR step on the window: factor H - sigma I by
        // Givens rotations on the left, then complete the similarity on the
        // right and restore the shift.
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations: Vec<(usize, Givens)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (rot, r) = givens(h[(k, k)], h[(k + 1, k)]);
            h[(k, k)] = r;
            h[(k + 1, k)] = Complex64::default();
            for j in k + 1..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * rot.c + b * rot.s;
                h[(k + 1, j)] = -a * rot.s.conj() + b * rot.c;
            }
            rotations.push((k, rot));
        }
        for (k, rot) in &rotations {
            let k = *k;
            // Apply G^H to columns k, k+1; R is upper triangular so rows
            // below k+1 hold zeros in both columns.
            let end = (k + 2).min(hi + 1);
            for i in 0..end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * rot.c + b * rot.s.conj();
                h[(i, k + 1)] = -a * rot.s + b * rot.c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * rot.c + b * rot.s.conj();
                z[(i, k + 1)] = -a * rot.s + b * rot.c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }

    // Eigenvectors of the triangular factor by back-substitution.
    let tnorm = h.frobenius_norm().max(1e-300);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = h[(i, i)];
        let mut y = vec![Complex64::default(); n];
        y[i] = c64(1.0, 0.0);
        for k in (0..i).rev() {
            let mut acc = Complex64::default();
            for j in k + 1..=i {
                acc += h[(k, j)] * y[j];
            }
            let mut denom = h[(k, k)] - lambda;
            if denom.norm() < eps * tnorm {
                denom = c64(eps * tnorm, 0.0);
            }
            y[k] = -acc / denom;
        }
        // v = Z y, normalized.
        let mut v = ComplexVector::zeros(n);
        for r in 0..n {
            let mut acc = Complex64::default();
            for k in 0..=i {
                acc += z[(r, k)] * y[k];
            }
            v.entries_mut()[r] = acc;
        }
        let v = v.normalized()?;
        out.push((lambda, v));
    }
    Ok(out)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let half = tr * 0.5;
    let disc = (half * half - det).sqrt();
    let l1 = half + disc;
    let l2 = half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &ComplexMatrix, lambda: Complex64, v: &ComplexVector) -> f64 {
        m.matvec(v).sub(&v.scale(lambda)).norm() / m.frobenius_norm().max(1.0)
    }

    #[test]
    fn diagonal_matrix_is_exact() {
        let m = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(2.0, -0.5)]);
        let pairs = eig_dense(&m, 1e-12).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].0 - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((pairs[1].0 - c64(2.0, -0.5)).norm() < 1e-15);
        assert_eq!(pairs[0].1.entries()[0], c64(1.0, 0.0));
        assert_eq!(pairs[1].1.entries()[1], c64(1.0, 0.0));
    }

    #[test]
    fn companion_matrix_roots() {
        // lambda^2 + c1 lambda + c0 with roots 1+i and 2-3i.
        let l1 = c64(1.0, 1.0);
        let l2 = c64(2.0, -3.0);
        let c1 = -(l1 + l2);
        let c0 = l1 * l2;
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::default(), c64(1.0, 0.0)],
            vec![-c0, -c1],
        ])
        .unwrap();
        let pairs = eig_dense(&m, 1e-10).unwrap();
        let found: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
        assert!(found.iter().any(|&l| (l - l1).norm() < 1e-10));
        assert!(found.iter().any(|&l| (l - l2).norm() < 1e-10));
    }

    #[test]
    fn three_by_three_known_spectrum() {
        // M = P D P^{-1} with unit-triangular P; spectrum is exactly diag(D).
        let d = [c64(1.0, 0.0), c64(-2.0, 1.0), c64(0.0, 0.5)];
        // P = [[1,1,0],[0,1,1],[0,0,1]], P^{-1} = [[1,-1,1],[0,1,-1],[0,0,1]]
        let p = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        ])
        .unwrap();
        let pinv = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        ])
        .unwrap();
        let m = p.matmul(&ComplexMatrix::diagonal(&d)).matmul(&pinv);
        let pairs = eig_dense(&m, 1e-10).unwrap();
        for target in d {
            assert!(
                pairs.iter().any(|(l, _)| (l - target).norm() < 1e-10),
                "missing eigenvalue {target}"
            );
        }
        for (l, v) in &pairs {
            assert!(residual(&m, *l, v) < 1e-10);
        }
    }

    #[test]
    fn qr_path_on_seeded_8x8() {
        // Deterministic pseudo-random entries from a small LCG.
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let n = 8;
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c64(next(), next());
            }
        }
        let pairs = eig_dense(&m, 1e-10).unwrap();
        assert_eq!(pairs.len(), n);
        for (l, v) in &pairs {
            assert!(
                residual(&m, *l, v) < 1e-10,
                "residual {} too large",
                residual(&m, *l, v)
            );
        }
        // Trace equals eigenvalue sum.
        let sum: Complex64 = pairs.iter().map(|p| p.0).sum();
        assert!((sum - m.trace()).norm() < 1e-9);
    }

    #[test]
    fn hermitian_eigenvalues_are_real() {
        let m = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.5, 0.25), c64(0.0, -0.3), c64(0.1, 0.0)],
            vec![c64(0.5, -0.25), c64(-0.7, 0.0), c64(0.2, 0.1), c64(0.0, 0.4)],
            vec![c64(0.0, 0.3), c64(0.2, -0.1), c64(0.3, 0.0), c64(-0.6, 0.0)],
            vec![c64(0.1, 0.0), c64(0.0, -0.4), c64(-0.6, 0.0), c64(1.2, 0.0)],
        ])
        .unwrap();
        let pairs = eig_dense(&m, 1e-10).unwrap();
        for (l, _) in &pairs {
            assert!(l.im.abs() < 1e-10, "Hermitian eigenvalue has Im {}", l.im);
        }
    }

    #[test]
    fn rejects_oversized_matrix() {
        let m = ComplexMatrix::zeros(1025);
        assert!(eig_dense(&m, 1e-10).is_err());
    }
}
