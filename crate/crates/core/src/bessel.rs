//! Bessel functions of the first kind and their zeros.
//!
//! Only `J_0` and `J_1` on moderate arguments are needed: their first zeros,
//! squared, are the reference values for the unit-disk spectrum cross-check.
//! The power series converges rapidly for `|x| <= 12`, and the zeros are
//! bracketed and bisected — no library call, so the values are an independent
//! oracle for the resolvent module.

/// `J_n(x)` by the ascending power series, valid for small and moderate `x`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // first term: (x/2)^order / order!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let mut sum = term;
    let z = half * half;
    for m in 1..200 {
        term *= -z / (m as f64 * (m as f64 + order as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// First positive zero of `J_order` for `order` in `{0, 1}`, by sign-change
/// bracketing and bisection to ~1e-13.
pub fn first_zero(order: u32) -> f64 {
    let (mut lo, mut hi) = match order {
        0 => (2.0, 3.0),
        1 => (3.0, 4.5),
        _ => panic!("first_zero implemented for orders 0 and 1 only"),
    };
    let flo = bessel_j(order, lo);
    assert!(flo * bessel_j(order, hi) < 0.0, "zero not bracketed");
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let fm = bessel_j(order, mid);
        if flo * fm <= 0.0 && bessel_j(order, lo) * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}
