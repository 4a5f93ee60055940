//! Small quadrature kernels shared by the numeric modules.

use crate::error::{Error, Result};
use crate::Complex;

fn simpson<F: Fn(f64) -> Complex>(_f: &F, a: f64, b: f64, fa: Complex, fm: Complex, fb: Complex) -> Complex {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> Complex>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex,
    fm: Complex,
    fb: Complex,
    whole: Complex,
    tol: f64,
    depth: usize,
) -> Complex {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(f, a, m, fa, flm, fm);
    let right = simpson(f, m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson rule on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> Complex>(f: F, a: f64, b: f64, tol: f64) -> Complex {
    if a == b {
        return Complex::new(0.0, 0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(&f, a, b, fa, fm, fb);
    adapt(&f, a, b, fa, fm, fb, whole, tol.max(1e-15), 48)
}

/// Adaptive Simpson with an a-posteriori convergence check: the result on the
/// whole interval is compared against the sum over two halves and an error is
/// returned when they disagree beyond `tol`-scale.
pub fn checked_simpson<F: Fn(f64) -> Complex>(f: F, a: f64, b: f64, tol: f64) -> Result<Complex> {
    let whole = adaptive_simpson(&f, a, b, tol);
    let m = 0.5 * (a + b);
    let split = adaptive_simpson(&f, a, m, 0.5 * tol) + adaptive_simpson(&f, m, b, 0.5 * tol);
    let scale = whole.norm().max(split.norm()).max(1.0);
    if (whole - split).norm() > 100.0 * tol * scale {
        return Err(Error::QuadratureFailure(format!(
            "split check failed on [{a}, {b}]: {} vs {}",
            whole, split
        )));
    }
    Ok(split)
}

/// Least-squares straight line through `(x_i, y_i)`, returning `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
