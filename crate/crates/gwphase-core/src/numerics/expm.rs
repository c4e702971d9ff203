//! Matrix exponential by scaling-and-squaring with a Taylor kernel.
//!
//! The argument is scaled by a power of two until its Frobenius norm is
//! below 1/4, exponentiated by a degree-16 Taylor sum (truncation error
//! ~1e-25 at that norm), and squared back up. Matrices here are small, so
//! the extra multiplications over a Pade kernel are irrelevant.


#[allow(unused_imports)]
use num_traits::Float;

use super::{c64, ComplexMatrix};
use crate::{GwError, Result};

const TAYLOR_ORDER: usize = 16;
const SCALE_TARGET: f64 = 0.25;

pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(GwError::contract("expm requires finite entries"));
    }
    let norm = m.frobenius_norm();
    let squarings = if norm <= SCALE_TARGET {
        0
    } else {
        (norm / SCALE_TARGET).log2().ceil() as u32
    };
    let scaled = m.scale(c64(0.5f64.powi(squarings as i32), 0.0));

    let n = m.dim();
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=TAYLOR_ORDER {
        term = term.matmul(&scaled).scale(c64(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }

    let mut result = sum;
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    if !result.is_finite() {
        return Err(GwError::contract("expm overflowed"));
    }
    Ok(result)
}
