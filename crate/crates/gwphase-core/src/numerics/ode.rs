//! Classic fixed-step fourth-order Runge-Kutta over a uniform grid.
//!
//! Fixed steps keep parameter sweeps bit-reproducible; the step count is the
//! caller's resolution knob.


use super::{c64, ComplexVector, TimeGrid};
use crate::{GwError, Result};

/// Integrate `y' = rhs(t, y)` from `grid.t0()` to `grid.t1()` and return the
/// final state. A non-finite intermediate state aborts with the failing time.
pub fn integrate_ode(
    rhs: &mut dyn FnMut(f64, &ComplexVector) -> ComplexVector,
    y0: &ComplexVector,
    grid: &TimeGrid,
) -> Result<ComplexVector> {
    let h = grid.step();
    let half = 0.5 * h;
    let sixth = h / 6.0;
    let mut y = y0.clone();

    for k in 0..grid.n_samples() - 1 {
        let t = grid.sample(k);
        let k1 = rhs(t, &y);
        let k2 = rhs(t + half, &y.add(&k1.scale(c64(half, 0.0))));
        let k3 = rhs(t + half, &y.add(&k2.scale(c64(half, 0.0))));
        let k4 = rhs(t + h, &y.add(&k3.scale(c64(h, 0.0))));

        let incr = k1
            .add(&k2.scale(c64(2.0, 0.0)))
            .add(&k3.scale(c64(2.0, 0.0)))
            .add(&k4);
        y = y.add(&incr.scale(c64(sixth, 0.0)));

        if !y.is_finite() {
            return Err(GwError::Blowup { t: t + h });
        }
    }
    Ok(y)
}
