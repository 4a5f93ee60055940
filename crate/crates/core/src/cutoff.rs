//! The reference cut-off function and smooth bump profiles.
//!
//! All quadratures in the toolkit use one fixed cut-off `omega`: identically 1
//! for `t <= 1/4`, identically 0 for `t >= 3/4`, with the classical
//! `exp(-1/x)` transition in between.  The domain statements are independent
//! of the choice of cut-off; fixing one makes every reported number
//! reproducible.

/// `exp(-1/x)` for `x > 0`, else 0.  Smooth on the whole line.
fn sigma(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn sigma_d1(x: f64) -> f64 {
    if x > 0.0 {
        sigma(x) / (x * x)
    } else {
        0.0
    }
}

fn sigma_d2(x: f64) -> f64 {
    if x > 0.0 {
        sigma(x) * (1.0 / (x * x * x * x) - 2.0 / (x * x * x))
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, increasing in between.
fn step(x: f64) -> f64 {
    let f = sigma(x);
    let g = sigma(1.0 - x);
    f / (f + g)
}

fn step_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let f = sigma(x);
    let g = sigma(1.0 - x);
    let fp = sigma_d1(x);
    let gp = -sigma_d1(1.0 - x);
    let d = f + g;
    (fp * g - f * gp) / (d * d)
}

fn step_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let f = sigma(x);
    let g = sigma(1.0 - x);
    let fp = sigma_d1(x);
    let gp = -sigma_d1(1.0 - x);
    let fpp = sigma_d2(x);
    let gpp = sigma_d2(1.0 - x);
    let d = f + g;
    ((fpp * g - f * gpp) * d - 2.0 * (fp * g - f * gp) * (fp + gp)) / (d * d * d)
}

/// Where the transition region of `omega` starts and ends.
pub const OMEGA_ONE_UNTIL: f64 = 0.25;
pub const OMEGA_ZERO_FROM: f64 = 0.75;

/// The reference cut-off `omega(t)`.
pub fn omega(t: f64) -> f64 {
    step((OMEGA_ZERO_FROM - t) / (OMEGA_ZERO_FROM - OMEGA_ONE_UNTIL))
}

/// First derivative of `omega`.
pub fn omega_d1(t: f64) -> f64 {
    let w = OMEGA_ZERO_FROM - OMEGA_ONE_UNTIL;
    -step_d1((OMEGA_ZERO_FROM - t) / w) / w
}

/// Second derivative of `omega`.
pub fn omega_d2(t: f64) -> f64 {
    let w = OMEGA_ZERO_FROM - OMEGA_ONE_UNTIL;
    step_d2((OMEGA_ZERO_FROM - t) / w) / (w * w)
}

/// Smooth bump supported exactly on `[lo, hi]`, normalised to peak value 1.
pub fn bump(t: f64, lo: f64, hi: f64) -> f64 {
    if t <= lo || t >= hi {
        return 0.0;
    }
    let y = (t - lo) / (hi - lo);
    (4.0 - 1.0 / (y * (1.0 - y))).exp()
}
