//! Numerical Mellin transform and finite-rank Green actions.
//!
//! Conventions: `(Mu)(z) = Int_0^inf t^{z-1} u(t) dt`, so that
//! `M(t^s u)(z) = (Mu)(z+s)`; the Mellin operator with weight `w` integrates
//! along the line `Re z = (n+1)/2 - w`, and contour measures carry the
//! `1/(2 pi i)` factor so residues come out with unit coefficients.
//!
//! The difference of two Mellin quantizations of the same symbol across a
//! weight strip is a finite-rank operator: its value on `u` is a finite sum
//! of terms `zeta * t^{-p} log^l t` over the poles `p` of the symbol inside
//! the strip, with coefficients assembled from the Laurent data and the jets
//! of `Mu` at the poles.  [`green_action`] builds that sum; the rectangle
//! contour integral in [`green_action_contour_oracle`] is the independent
//! cross-check.

use serde::Deserialize;

use crate::conormal::ModeMeromorphic;
use crate::cutoff;
use crate::error::{Error, Result};
use crate::quad;
use crate::Complex;

/// Analytically evaluable radial profiles for test inputs.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactProfile {
    /// Smooth bump supported on `[lo, hi]`.
    Bump { lo: f64, hi: f64 },
    /// `t^a` on `[lo, hi]`, zero elsewhere.
    PowerWindow { a: f64, lo: f64, hi: f64 },
    /// Indicator of `[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
}

impl ExactProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ExactProfile::Bump { lo, hi } => cutoff::bump(t, lo, hi),
            ExactProfile::PowerWindow { a, lo, hi } => {
                if t >= lo && t <= hi {
                    t.powf(a)
                } else {
                    0.0
                }
            }
            ExactProfile::Indicator { lo, hi } => {
                if t >= lo && t <= hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            ExactProfile::Bump { lo, hi }
            | ExactProfile::PowerWindow { lo, hi, .. }
            | ExactProfile::Indicator { lo, hi } => (lo, hi),
        }
    }
}

/// A radial function given per mode, either on a log-spaced grid or by an
/// exact profile (scaled per mode).
#[derive(Clone, Debug)]
pub struct RadialFunction {
    /// Strictly increasing grid, bounded away from zero.
    pub grid: Vec<f64>,
    /// Per-mode samples on `grid` (unused when `exact` is set).
    pub samples: Vec<Vec<Complex>>,
    /// Exact profile with per-mode scaling factors.
    pub exact: Option<(ExactProfile, Vec<Complex>)>,
}

impl RadialFunction {
    pub fn exact(profile: ExactProfile, mode_weights: Vec<Complex>) -> Self {
        RadialFunction { grid: vec![], samples: vec![], exact: Some((profile, mode_weights)) }
    }

    pub fn sampled(grid: Vec<f64>, samples: Vec<Vec<Complex>>) -> Result<Self> {
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::QuadratureFailure("grid not strictly increasing".into()));
        }
        if grid.first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::QuadratureFailure("grid must stay away from 0".into()));
        }
        Ok(RadialFunction { grid, samples, exact: None })
    }

    pub fn modes(&self) -> usize {
        match &self.exact {
            Some((_, w)) => w.len(),
            None => self.samples.len(),
        }
    }

    pub fn eval(&self, mode: usize, t: f64) -> Complex {
        match &self.exact {
            Some((profile, w)) => w[mode] * profile.eval(t),
            None => {
                // linear interpolation in log t
                let g = &self.grid;
                if t <= g[0] || t >= *g.last().unwrap() {
                    return Complex::new(0.0, 0.0);
                }
                let s = t.ln();
                let pos = g.partition_point(|&x| x.ln() < s);
                let (i0, i1) = (pos - 1, pos);
                let (s0, s1) = (g[i0].ln(), g[i1].ln());
                let w = (s - s0) / (s1 - s0);
                self.samples[mode][i0] * (1.0 - w) + self.samples[mode][i1] * w
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match &self.exact {
            Some((p, _)) => p.support(),
            None => (self.grid[0], *self.grid.last().unwrap()),
        }
    }

    /// Load `{"exact": {...}, "mode_weights": [[re, im], ...]}` or
    /// `{"grid": [...], "samples": [[[re, im], ...], ...]}`.
    pub fn from_json(doc: &str) -> Result<RadialFunction> {
        #[derive(Deserialize)]
        struct Doc {
            #[serde(default)]
            exact: Option<ExactProfile>,
            #[serde(default)]
            mode_weights: Option<Vec<(f64, f64)>>,
            #[serde(default)]
            grid: Option<Vec<f64>>,
            #[serde(default)]
            samples: Option<Vec<Vec<(f64, f64)>>>,
        }
        let d: Doc = serde_json::from_str(doc)?;
        match (d.exact, d.grid) {
            (Some(p), _) => {
                let w = d
                    .mode_weights
                    .unwrap_or_else(|| vec![(1.0, 0.0)])
                    .into_iter()
                    .map(|(re, im)| Complex::new(re, im))
                    .collect();
                Ok(RadialFunction::exact(p, w))
            }
            (None, Some(grid)) => {
                let samples = d
                    .samples
                    .unwrap_or_default()
                    .into_iter()
                    .map(|row| row.into_iter().map(|(re, im)| Complex::new(re, im)).collect())
                    .collect();
                RadialFunction::sampled(grid, samples)
            }
            _ => Err(Error::Json("radial function needs `exact` or `grid`".into())),
        }
    }
}

/// `d^k/dz^k (Mu)(z)` on one mode, by adaptive quadrature in `s = log t`
/// (the kernel derivative inserts `s^k`).
pub fn mellin_transform(u: &RadialFunction, mode: usize, z: Complex, k: usize) -> Result<Complex> {
    let (lo, hi) = u.support();
    let (a, b) = (lo.ln(), hi.ln());
    let f = |s: f64| {
        let t = s.exp();
        let kern = (z * s).exp() * s.powi(k as i32);
        kern * u.eval(mode, t)
    };
    // scale the tolerance to the kernel size on the support
    let kscale = (z.re * a).exp().max((z.re * b).exp()) * a.abs().max(b.abs()).powi(k as i32).max(1.0);
    quad::checked_simpson(f, a, b, 1e-13 * kscale.max(1.0))
}

/// One output term `zeta * omega(t) t^{-p} log^l t` on a mode.
#[derive(Clone, Debug)]
pub struct GreenGenerator {
    pub mode: usize,
    pub p: Complex,
    pub log_power: usize,
    pub zeta: Complex,
}

/// Result of the finite-rank strip action.
#[derive(Clone, Debug)]
pub struct GreenAction {
    pub n: i64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub generators: Vec<GreenGenerator>,
}

impl GreenAction {
    /// Evaluate the action at radius `t` on a mode (cut-off included).
    pub fn eval(&self, mode: usize, t: f64) -> Complex {
        let w = cutoff::omega(t);
        if w == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let lg = t.ln();
        self.generators
            .iter()
            .filter(|g| g.mode == mode)
            .map(|g| g.zeta * w * (-g.p * lg).exp() * lg.powi(g.log_power as i32))
            .sum()
    }

    /// Evaluate without the cut-off (for comparison against raw contours).
    pub fn eval_raw(&self, mode: usize, t: f64) -> Complex {
        let lg = t.ln();
        self.generators
            .iter()
            .filter(|g| g.mode == mode)
            .map(|g| g.zeta * (-g.p * lg).exp() * lg.powi(g.log_power as i32))
            .sum()
    }
}

/// Strip bounds in the complex plane for weights `gamma1 < gamma2`:
/// poles with `(n+1)/2 - gamma2 < Re p < (n+1)/2 - gamma1` contribute.
fn strip(n: i64, gamma1: f64, gamma2: f64) -> (f64, f64) {
    let c = (n as f64 + 1.0) / 2.0;
    (c - gamma2, c - gamma1)
}

/// Difference of the two Mellin quantizations of `g` across the weight strip
/// applied to `u`: the explicit finite-rank generator list.
pub fn green_action(
    symbols: &[ModeMeromorphic],
    n: i64,
    gamma1: f64,
    gamma2: f64,
    u: &RadialFunction,
) -> Result<GreenAction> {
    if gamma1 >= gamma2 {
        return Err(Error::QuadratureFailure("need gamma1 < gamma2".into()));
    }
    let (lo, hi) = strip(n, gamma1, gamma2);
    let mut generators = vec![];
    for mm in symbols {
        if mm.mode >= u.modes() {
            continue;
        }
        for pole in &mm.poles {
            let p = pole.location.value();
            if (p.re - lo).abs() < 1e-9 || (p.re - hi).abs() < 1e-9 {
                return Err(Error::PoleOnLine(format!("{p}"), 1e-9));
            }
            if p.re <= lo || p.re >= hi {
                continue;
            }
            // jets of Mu at the pole, orders 0..order-1
            let jets: Vec<Complex> = (0..pole.order)
                .map(|d| mellin_transform(u, mm.mode, p, d))
                .collect::<Result<_>>()?;
            for l in 0..pole.order {
                let mut zeta = Complex::new(0.0, 0.0);
                let fact = |m: usize| (1..=m).product::<usize>() as f64;
                for k in l..pole.order {
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    zeta += pole.principal[k].value() * jets[k - l] * sign / (fact(l) * fact(k - l));
                }
                generators.push(GreenGenerator { mode: mm.mode, p, log_power: l, zeta });
            }
        }
    }
    Ok(GreenAction { n, gamma1, gamma2, generators })
}

/// Rectangle-contour evaluation of the same action at given radii:
/// `(1/2 pi i) Int_C t^{-z} g(z) (Mu)(z) dz` with `C` enclosing exactly the
/// strip poles.  Trapezoid rule with at least 2048 nodes in total.
pub fn green_action_contour_oracle(
    symbols: &[ModeMeromorphic],
    n: i64,
    gamma1: f64,
    gamma2: f64,
    u: &RadialFunction,
    t_samples: &[f64],
) -> Result<Vec<Vec<Complex>>> {
    if gamma1 >= gamma2 {
        return Err(Error::QuadratureFailure("need gamma1 < gamma2".into()));
    }
    let (lo, hi) = strip(n, gamma1, gamma2);
    let mut out = vec![];
    for mm in symbols {
        if mm.mode >= u.modes() {
            continue;
        }
        // the rectangle must clear every pole of the symbol; the trapezoid
        // step is tied to the nearest pole distance (the discretization error
        // of the trapezoid rule decays like exp(-2 pi d / h))
        let mut height: f64 = 40.0;
        let mut d_min: f64 = 1.0;
        for pole in &mm.poles {
            let p = pole.location.value();
            if (p.re - lo).abs() < 1e-9 || (p.re - hi).abs() < 1e-9 {
                return Err(Error::PoleOnLine(format!("{p}"), 1e-9));
            }
            if p.re > lo && p.re < hi {
                height = height.max(2.0 * p.im.abs() + 8.0);
            }
            d_min = d_min.min((p.re - lo).abs()).min((p.re - hi).abs());
        }
        for pole in &mm.poles {
            let p = pole.location.value();
            if p.re > lo && p.re < hi {
                d_min = d_min.min(height - p.im.abs());
            }
        }
        let h_step = (d_min / 5.0).min(0.05);
        let mut row = vec![Complex::new(0.0, 0.0); t_samples.len()];
        // counterclockwise rectangle: right edge up, top leftwards, left edge
        // down, bottom rightwards
        let corners = [
            Complex::new(hi, -height),
            Complex::new(hi, height),
            Complex::new(lo, height),
            Complex::new(lo, -height),
        ];
        let total_len = 2.0 * (hi - lo) + 4.0 * height;
        for seg in 0..4 {
            let a = corners[seg];
            let b = corners[(seg + 1) % 4];
            let len = (b - a).norm();
            // keep the spec floor of 2048 nodes over the whole rectangle
            let nseg = ((len / h_step).ceil() as usize).max((2048.0 * len / total_len).ceil() as usize).max(64);
            let dz = (b - a) / nseg as f64;
            for k in 0..=nseg {
                let z = a + dz * k as f64;
                let w = if k == 0 || k == nseg { 0.5 } else { 1.0 };
                let mu = mellin_transform(u, mm.mode, z, 0)?;
                let gz = mm.eval(z);
                for (ti, &t) in t_samples.iter().enumerate() {
                    row[ti] += (-z * t.ln()).exp() * gz * mu * dz * w;
                }
            }
        }
        let two_pi_i = Complex::new(0.0, 2.0 * std::f64::consts::PI);
        for v in row.iter_mut() {
            *v /= two_pi_i;
        }
        out.push(row);
    }
    Ok(out)
}

/// Split the strip action at an intermediate weight: the two parts have
/// disjoint pole sets and concatenate to the full action.
pub fn green_split(
    symbols: &[ModeMeromorphic],
    n: i64,
    gamma1: f64,
    gamma_mid: f64,
    gamma2: f64,
    u: &RadialFunction,
) -> Result<(GreenAction, GreenAction)> {
    if !(gamma1 < gamma_mid && gamma_mid < gamma2) {
        return Err(Error::QuadratureFailure("need gamma1 < gamma < gamma2".into()));
    }
    let upper = green_action(symbols, n, gamma1, gamma_mid, u)?;
    let lower = green_action(symbols, n, gamma_mid, gamma2, u)?;
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundarySpectrum;
    use crate::conormal::{conormal_symbol, invert_conormal};
    use crate::operator::ConeOperator;

    fn one_mode(profile: ExactProfile) -> RadialFunction {
        RadialFunction::exact(profile, vec![Complex::new(1.0, 0.0)])
    }

    #[test]
    fn mellin_indicator_closed_form() {
        // M[1_{[1,e]}](z) = (e^z - 1)/z
        let u = one_mode(ExactProfile::Indicator { lo: 1.0, hi: std::f64::consts::E });
        let z = Complex::new(1.0, 0.0);
        let got = mellin_transform(&u, 0, z, 0).unwrap();
        let want = (z.exp() - 1.0) / z;
        assert!((got - want).norm() <= 1e-8 * want.norm(), "{got} vs {want}");
        // a complex point too
        let z = Complex::new(0.3, 2.0);
        let got = mellin_transform(&u, 0, z, 0).unwrap();
        let want = (z.exp() - 1.0) / z;
        assert!((got - want).norm() <= 1e-8 * want.norm());
    }

    #[test]
    fn mellin_power_window_closed_form() {
        // M[t^a 1_{[1,2]}](z) = (2^{z+a} - 1)/(z+a)
        let a = 0.7;
        let u = one_mode(ExactProfile::PowerWindow { a, lo: 1.0, hi: 2.0 });
        for z in [Complex::new(0.5, 0.0), Complex::new(-1.2, 3.0)] {
            let za = z + a;
            let want = ((za * 2f64.ln()).exp() - 1.0) / za;
            let got = mellin_transform(&u, 0, z, 0).unwrap();
            assert!((got - want).norm() <= 1e-8 * want.norm(), "{z}");
        }
    }

    #[test]
    fn mellin_large_imaginary_bounded() {
        // |t^{z-1}| = t^{Re z - 1}: the modulus is bounded by the value at Im z = 0
        let u = one_mode(ExactProfile::Indicator { lo: 1.0, hi: 2.0 });
        let bound = mellin_transform(&u, 0, Complex::new(1.0, 0.0), 0).unwrap().norm();
        let big = mellin_transform(&u, 0, Complex::new(1.0, 50.0), 0).unwrap();
        assert!(big.norm() <= bound + 1e-9);
    }

    #[test]
    fn mellin_derivative_matches_difference_quotient() {
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        let z = Complex::new(0.4, 0.8);
        let h = 1e-5;
        let d = mellin_transform(&u, 0, z, 1).unwrap();
        let fd = (mellin_transform(&u, 0, z + h, 0).unwrap()
            - mellin_transform(&u, 0, z - h, 0).unwrap())
            / (2.0 * h);
        assert!((d - fd).norm() < 1e-7 * d.norm().max(1.0));
    }

    #[test]
    fn mellin_shift_rule() {
        // M(t^s u)(z) = (Mu)(z + s) on exact power windows
        let a = 0.9;
        let s = 1.3;
        let u = one_mode(ExactProfile::PowerWindow { a, lo: 1.0, hi: 2.0 });
        let shifted = one_mode(ExactProfile::PowerWindow { a: a + s, lo: 1.0, hi: 2.0 });
        for z in [Complex::new(0.2, 0.0), Complex::new(-0.7, 1.5)] {
            let lhs = mellin_transform(&shifted, 0, z, 0).unwrap();
            let rhs = mellin_transform(&u, 0, z + s, 0).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }

    fn laplacian_inverse(n: i64, modes: usize) -> Vec<ModeMeromorphic> {
        let spec = BoundarySpectrum::preset(n, modes);
        invert_conormal(&conormal_symbol(&ConeOperator::laplacian(n), &spec).unwrap()).unwrap()
    }

    #[test]
    fn simple_pole_action_is_residue_times_transform() {
        // n=0: inverse has simple poles at 0 (residue 1) and -1 (residue -1)
        let inv = laplacian_inverse(0, 1);
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        // strip Re p in (-1/2, 1/2): only the pole at 0
        let act = green_action(&inv, 0, 0.0, 1.0, &u).unwrap();
        assert_eq!(act.generators.len(), 1);
        let g = &act.generators[0];
        assert_eq!(g.log_power, 0);
        let want = mellin_transform(&u, 0, Complex::new(0.0, 0.0), 0).unwrap();
        assert!((g.zeta - want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn holomorphic_strip_gives_empty_action() {
        let inv = laplacian_inverse(0, 1);
        // strip Re p in (-0.75, -0.25): between the two poles
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        let act = green_action(&inv, 0, 0.75, 1.25, &u).unwrap();
        assert!(act.generators.is_empty());
        let vals = green_action_contour_oracle(&inv, 0, 0.75, 1.25, &u, &[0.05, 0.1]).unwrap();
        for row in vals {
            for v in row {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pole_on_line_reported() {
        let inv = laplacian_inverse(0, 1);
        // upper line exactly through 0
        assert!(matches!(
            green_action(&inv, 0, 0.5, 1.5, &one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 })),
            Err(Error::PoleOnLine(..))
        ));
    }

    #[test]
    fn residue_formula_matches_contour_simple_and_double() {
        // n=1 mode 0 carries the double pole at 0: the log case
        let inv = laplacian_inverse(1, 2);
        let u = RadialFunction::exact(
            ExactProfile::Bump { lo: 0.5, hi: 2.0 },
            vec![Complex::new(1.0, 0.0), Complex::new(0.7, 0.2)],
        );
        let (g1, g2) = (0.5, 1.5);
        let act = green_action(&inv, 1, g1, g2, &u).unwrap();
        assert_eq!(act.generators.len(), 2, "double pole gives two log powers");
        let ts = [0.01, 0.02, 0.05, 0.08, 0.1, 0.13, 0.16, 0.2, 0.11, 0.17];
        let oracle = green_action_contour_oracle(&inv, 1, g1, g2, &u, &ts).unwrap();
        for (mode, row) in oracle.iter().enumerate() {
            for (i, &t) in ts.iter().enumerate() {
                let direct = act.eval(mode, t);
                let want = row[i];
                assert!(
                    (direct - want).norm() <= 1e-8 * want.norm().max(1.0),
                    "mode {mode} t={t}: {direct} vs {want}"
                );
            }
        }
    }

    #[test]
    fn action_is_linear_in_input() {
        let inv = laplacian_inverse(1, 1);
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        let u2 = RadialFunction::exact(ExactProfile::Bump { lo: 0.5, hi: 2.0 }, vec![Complex::new(2.0, 0.0)]);
        let a1 = green_action(&inv, 1, 0.5, 1.5, &u).unwrap();
        let a2 = green_action(&inv, 1, 0.5, 1.5, &u2).unwrap();
        for (g1, g2) in a1.generators.iter().zip(&a2.generators) {
            assert!((g2.zeta - g1.zeta * 2.0).norm() < 1e-12 * g1.zeta.norm().max(1.0));
        }
    }

    #[test]
    fn split_partitions_generators() {
        // n=0 has poles at 0 and -1; split the strip between them
        let inv = laplacian_inverse(0, 1);
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        let full = green_action(&inv, 0, 0.1, 1.9, &u).unwrap();
        let (upper, lower) = green_split(&inv, 0, 0.1, 1.0, 1.9, &u).unwrap();
        assert_eq!(full.generators.len(), 2);
        assert_eq!(upper.generators.len(), 1);
        assert_eq!(lower.generators.len(), 1);
        // disjoint by pole and jointly exhaustive
        assert!((upper.generators[0].p - Complex::new(0.0, 0.0)).norm() < 1e-12);
        assert!((lower.generators[0].p - Complex::new(-1.0, 0.0)).norm() < 1e-12);
        for g in &full.generators {
            let twin = upper
                .generators
                .iter()
                .chain(&lower.generators)
                .find(|h| (h.p - g.p).norm() < 1e-9)
                .unwrap();
            assert!((twin.zeta - g.zeta).norm() <= 1e-10 * g.zeta.norm().max(1.0));
        }
        // all poles on one side
        let (up, lo) = green_split(&inv, 0, 0.1, 1.6, 1.9, &u).unwrap();
        assert_eq!(up.generators.len(), 2);
        assert!(lo.generators.is_empty());
    }

    #[test]
    fn entire_symbol_additions_do_not_change_action() {
        use crate::rational::{Poly, RatFn};
        let spec = BoundarySpectrum::circle(1);
        let sym = conormal_symbol(&ConeOperator::laplacian(1), &spec).unwrap();
        let base = RatFn::new(Poly::one(), sym.mode_polys[0].clone());
        let poly_added = base.add(&RatFn::from_poly(Poly::from_i64(&[3, -2, 1])));
        let mm1 = ModeMeromorphic::from_ratfn(0, &base);
        let mm2 = ModeMeromorphic::from_ratfn(0, &poly_added);
        let u = one_mode(ExactProfile::Bump { lo: 0.5, hi: 2.0 });
        let a1 = green_action(&[mm1], 1, 0.5, 1.5, &u).unwrap();
        let a2 = green_action(&[mm2], 1, 0.5, 1.5, &u).unwrap();
        for t in [0.02, 0.1, 0.2] {
            let d = (a1.eval(0, t) - a2.eval(0, t)).norm();
            assert!(d <= 1e-10 * a1.eval(0, t).norm().max(1.0));
        }
    }
}
