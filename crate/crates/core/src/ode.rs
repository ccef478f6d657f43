//! Fixed-step classical Runge-Kutta with Richardson step halving.

use crate::error::{Error, Result};

/// Upper bound on step doublings before giving up.
const MAX_HALVINGS: u32 = 22;
const INITIAL_STEPS: usize = 4;

fn rk4_fixed<const N: usize, F>(f: &F, y0: [f64; N], x0: f64, x1: f64, steps: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (x1 - x0) / steps as f64;
    let axpy = |y: &[f64; N], k: &[f64; N], a: f64| -> [f64; N] {
        let mut out = *y;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    let mut y = y0;
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        let k1 = f(x, &y);
        let k2 = f(x + 0.5 * h, &axpy(&y, &k1, 0.5 * h));
        let k3 = f(x + 0.5 * h, &axpy(&y, &k2, 0.5 * h));
        let k4 = f(x + h, &axpy(&y, &k3, h));
        for j in 0..N {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// Integrate `y' = f(x, y)` from `x0` to `x1`.
///
/// Runs RK4 with `n` and `2n` steps, doubling `n` until the Richardson error
/// estimate `|y_2n - y_n| / 15` falls below `tolerance` (absolute, max-norm),
/// and returns the extrapolated `y_2n + (y_2n - y_n) / 15`.
pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], x0: f64, x1: f64, tolerance: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("step tolerance must be > 0, got {tolerance}")));
    }
    if x1 == x0 {
        return Ok(y0);
    }
    let mut steps = INITIAL_STEPS;
    let mut coarse = rk4_fixed(&f, y0, x0, x1, steps);
    for _ in 0..MAX_HALVINGS {
        steps *= 2;
        let fine = rk4_fixed(&f, y0, x0, x1, steps);
        let err = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (f - c).abs() / 15.0)
            .fold(0.0, f64::max);
        if !err.is_finite() {
            break;
        }
        if err <= tolerance {
            let mut out = fine;
            for i in 0..N {
                out[i] += (fine[i] - coarse[i]) / 15.0;
            }
            return Ok(out);
        }
        coarse = fine;
    }
    Err(Error::NonConvergent(format!(
        "no convergence to {tolerance:e} after {steps} steps"
    )))
}
