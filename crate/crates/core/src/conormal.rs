//! Conormal symbols, their meromorphic inverses, and the shifted recursion.
//!
//! On a boundary eigenmode with eigenvalue `l` the conormal symbol of a cone
//! operator is the scalar polynomial `z -> sum_j a_j(0)(l) z^j`.  Its inverse
//! is an exact rational function per mode; poles, orders and Laurent principal
//! parts are extracted exactly where the roots are rational and numerically
//! (companion matrix + Newton polish + clustering) otherwise.

use num::{One, Zero};

use crate::boundary::BoundarySpectrum;
use crate::error::{Error, Result};
use crate::operator::ConeOperator;
use crate::rational::{cluster_roots, Poly, RatFn, POLE_CLUSTER_TOL};
use crate::{rat_to_f64, Complex, Rat};

/// Exact-when-possible scalar; numeric fallback otherwise.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rat),
    Numeric(Complex),
}

impl Scalar {
    pub fn value(&self) -> Complex {
        match self {
            Scalar::Exact(r) => Complex::new(rat_to_f64(r), 0.0),
            Scalar::Numeric(c) => *c,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Numeric(_) => None,
        }
    }
}

/// Root/pole location, exact where available.
pub type PoleLocation = Scalar;

/// One pole with its Laurent principal part: `principal[k]` multiplies
/// `(z - p)^{-(k+1)}`, `k = 0..order-1`.
#[derive(Clone, Debug)]
pub struct PoleData {
    pub location: PoleLocation,
    pub order: usize,
    pub principal: Vec<Scalar>,
}

/// A per-mode rational function in partial-fraction form: polynomial quotient
/// plus Laurent principal parts at each pole, together with the factored data.
#[derive(Clone, Debug)]
pub struct ModeMeromorphic {
    pub mode: usize,
    pub func: RatFn,
    pub quotient: Poly,
    pub zeros: Vec<(PoleLocation, usize)>,
    pub poles: Vec<PoleData>,
}

impl ModeMeromorphic {
    pub fn from_ratfn(mode: usize, f: &RatFn) -> ModeMeromorphic {
        let (quotient, rem) = f.num().divmod(f.den());
        let zeros = roots_of(f.num());
        let den_roots = roots_of(f.den());
        let poles = den_roots
            .into_iter()
            .map(|(loc, order)| {
                let principal = principal_part(&rem, f.den(), &loc, order);
                PoleData { location: loc, order, principal }
            })
            .collect();
        ModeMeromorphic { mode, func: f.clone(), quotient, zeros, poles }
    }

    /// Direct evaluation through the reduced numerator/denominator.
    pub fn eval(&self, z: Complex) -> Complex {
        self.func.eval_c(z)
    }

    /// Evaluation through the partial-fraction data; agreement with `eval` is
    /// the completeness check on the extracted pole structure.
    pub fn eval_partial_fractions(&self, z: Complex) -> Complex {
        let mut acc = self.quotient.eval_c(z);
        for p in &self.poles {
            let d = z - p.location.value();
            let mut pw = d;
            for r in &p.principal {
                acc += r.value() / pw;
                pw *= d;
            }
        }
        acc
    }
}

/// All roots of a rational-coefficient polynomial with multiplicities; the
/// rational ones come out exact, the rest numeric and clustered.
pub fn roots_of(p: &Poly) -> Vec<(PoleLocation, usize)> {
    if p.is_zero() || p.degree() == Some(0) {
        return vec![];
    }
    let (rational, cofactor) = p.rational_roots();
    let mut out: Vec<(PoleLocation, usize)> = rational
        .into_iter()
        .map(|(r, m)| (Scalar::Exact(r), m))
        .collect();
    for (z, m) in cluster_roots(cofactor.complex_roots_numeric()) {
        out.push((Scalar::Numeric(z), m));
    }
    out.sort_by(|a, b| {
        let x = a.0.value();
        let y = b.0.value();
        (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap()
    });
    out
}

/// Laurent principal part of `rem/den` at the pole `loc` of order `order`.
fn principal_part(rem: &Poly, den: &Poly, loc: &PoleLocation, order: usize) -> Vec<Scalar> {
    match loc {
        Scalar::Exact(p) => {
            // den = (z-p)^order * cof; series-divide rem by cof around p.
            let lin = Poly::new(vec![-p.clone(), Rat::one()]);
            let mut cof = den.clone();
            for _ in 0..order {
                let (q, r) = cof.divmod(&lin);
                debug_assert!(r.is_zero());
                cof = q;
            }
            let a = rem.shift(p); // Taylor coefficients of rem at p
            let b = cof.shift(p);
            let b0 = b.coeff(0);
            debug_assert!(!b0.is_zero());
            let mut c: Vec<Rat> = Vec::with_capacity(order);
            for i in 0..order {
                let mut v = a.coeff(i);
                for (k, ck) in c.iter().enumerate() {
                    v -= ck * b.coeff(i - k);
                }
                c.push(v / b0.clone());
            }
            (0..order).map(|k| Scalar::Exact(c[order - 1 - k].clone())).collect()
        }
        Scalar::Numeric(p) => {
            // Cauchy integral of h(z) = (rem/den)(z) (z-p)^order on a small circle.
            let rho = 1e-3;
            let nodes = 256;
            let mut taylor = vec![Complex::new(0.0, 0.0); order];
            for k in 0..nodes {
                let th = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
                let w = Complex::new(0.0, th).exp() * rho;
                let z = p + w;
                let mut h = rem.eval_c(z) / den.eval_c(z);
                for _ in 0..order {
                    h *= w;
                }
                for (m, t) in taylor.iter_mut().enumerate() {
                    *t += h * (Complex::new(0.0, -(m as f64) * th)).exp() / rho.powi(m as i32);
                }
            }
            for t in taylor.iter_mut() {
                *t /= nodes as f64;
            }
            (0..order).map(|k| Scalar::Numeric(taylor[order - 1 - k])).collect()
        }
    }
}

/// The conormal symbol: one polynomial in `z` per boundary mode.
#[derive(Clone, Debug)]
pub struct ConormalSymbol {
    pub n: i64,
    pub mu: usize,
    pub mode_polys: Vec<Poly>,
}

/// `sigma(z) = sum_j a_j(0)(l) z^j` per mode.
pub fn conormal_symbol(op: &ConeOperator, spec: &BoundarySpectrum) -> Result<ConormalSymbol> {
    if op.n != spec.dim_boundary {
        return Err(Error::DimensionMismatch { op_n: op.n, spec_n: spec.dim_boundary });
    }
    let mode_polys = spec
        .modes
        .iter()
        .map(|m| {
            let mut c = vec![Rat::zero(); op.mu + 1];
            for (j, cj) in op.coeffs.iter().enumerate() {
                c[j] = cj.at_zero().eval_rat(&m.eigenvalue);
            }
            Poly::new(c)
        })
        .collect();
    Ok(ConormalSymbol { n: op.n, mu: op.mu, mode_polys })
}

/// Rescaled principal symbol: the boundary-frozen symbol with the boundary
/// Laplacian replaced by `-|xi|^2` in each coefficient's principal part.
pub struct RescaledSymbol {
    /// `(power of (-i tau), power of (-|xi|^2), scalar)` triples.
    terms: Vec<(usize, usize, f64)>,
}

impl RescaledSymbol {
    pub fn eval(&self, xi_sq: f64, tau: f64) -> Complex {
        let m_i_tau = Complex::new(0.0, -tau);
        let mut acc = Complex::new(0.0, 0.0);
        for &(j, d, c) in &self.terms {
            acc += m_i_tau.powu(j as u32) * (-xi_sq).powi(d as i32) * c;
        }
        acc
    }
}

/// Build the rescaled symbol of `op` using coefficients frozen at `t`.
/// (`t = 0` is the proper rescaled symbol; positive `t` samples the interior
/// principal symbol of the straight-cone continuation.)
pub fn rescaled_symbol_at(op: &ConeOperator, t: &Rat) -> Result<RescaledSymbol> {
    let mut terms = vec![];
    for (j, cj) in op.coeffs.iter().enumerate() {
        let lam_poly = cj.eval_t(t);
        if lam_poly.is_zero() {
            continue;
        }
        let d = lam_poly.degree().unwrap();
        let budget = op.mu - j;
        if 2 * d > budget {
            return Err(Error::UnsupportedCoefficient(j));
        }
        if 2 * d == budget {
            terms.push((j, d, rat_to_f64(&lam_poly.leading())));
        }
        // order deficit: no contribution to the principal symbol
    }
    Ok(RescaledSymbol { terms })
}

pub fn rescaled_symbol(op: &ConeOperator) -> Result<RescaledSymbol> {
    rescaled_symbol_at(op, &Rat::zero())
}

/// Exact per-mode inverse of the conormal symbol, in partial fraction form.
pub fn invert_conormal(sym: &ConormalSymbol) -> Result<Vec<ModeMeromorphic>> {
    sym.mode_polys
        .iter()
        .enumerate()
        .map(|(mode, p)| {
            if p.is_zero() {
                return Err(Error::IdenticallyZero(mode));
            }
            Ok(ModeMeromorphic::from_ratfn(mode, &RatFn::new(Poly::one(), p.clone())))
        })
        .collect()
}

/// A non-bijectivity point of the conormal symbol: a root of some mode
/// polynomial, merged across modes.
#[derive(Clone, Debug)]
pub struct NonBijectivityPoint {
    pub q: PoleLocation,
    /// Maximal root order across contributing modes.
    pub order: usize,
    pub modes: Vec<usize>,
}

/// All roots of all mode polynomials with real part in the open strip
/// `(a, b)`, merged across modes.
pub fn nonbijectivity_points(sym: &ConormalSymbol, strip: (f64, f64)) -> Vec<NonBijectivityPoint> {
    let (a, b) = strip;
    let mut merged: Vec<NonBijectivityPoint> = vec![];
    for (mode, p) in sym.mode_polys.iter().enumerate() {
        for (loc, order) in roots_of(p) {
            let v = loc.value();
            if !(v.re > a && v.re < b) {
                continue;
            }
            match merged.iter_mut().find(|m| (m.q.value() - v).norm() <= POLE_CLUSTER_TOL) {
                Some(m) => {
                    m.order = m.order.max(order);
                    m.modes.push(mode);
                    // prefer exact representatives
                    if m.q.as_exact().is_none() && loc.as_exact().is_some() {
                        m.q = loc;
                    }
                }
                None => merged.push(NonBijectivityPoint { q: loc, order, modes: vec![mode] }),
            }
        }
    }
    merged.sort_by(|x, y| {
        let a = x.q.value();
        let b = y.q.value();
        (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap()
    });
    merged
}

/// Taylor family `f_l` and recursion family `g_l` of a cone operator, per
/// mode.  `f` entries are polynomials; `g` entries exact rational functions.
#[derive(Clone, Debug)]
pub struct SymbolSequence {
    pub n: i64,
    pub mu: usize,
    /// `f[l][mode]`, `l = 0..mu-1`; `f[0]` is the conormal symbol.
    pub f: Vec<Vec<Poly>>,
    /// `g[l][mode]`, filled by [`g_recursion`].
    pub g: Vec<Vec<RatFn>>,
}

/// `f_l(z) = (1/l!) sum_j (d_t^l a_j)(0) z^j`, i.e. the `t^l` Taylor
/// coefficient of each `a_j` promoted to a polynomial in `z`.
pub fn taylor_sequence(op: &ConeOperator, spec: &BoundarySpectrum) -> Result<SymbolSequence> {
    if op.n != spec.dim_boundary {
        return Err(Error::DimensionMismatch { op_n: op.n, spec_n: spec.dim_boundary });
    }
    let mut f = vec![];
    for l in 0..op.mu {
        let per_mode = spec
            .modes
            .iter()
            .map(|m| {
                let mut c = vec![Rat::zero(); op.mu + 1];
                for (j, cj) in op.coeffs.iter().enumerate() {
                    c[j] = cj.t_coeff(l).eval_rat(&m.eigenvalue);
                }
                Poly::new(c)
            })
            .collect();
        f.push(per_mode);
    }
    Ok(SymbolSequence { n: op.n, mu: op.mu, f, g: vec![] })
}

/// The recursion `g_0 = f_0^{-1}`,
/// `g_l = -(T^{-l} f_0^{-1}) sum_{j<l} (T^{-j} f_{l-j}) g_j`,
/// carried out exactly per mode.
pub fn g_recursion(seq: &SymbolSequence) -> Result<SymbolSequence> {
    let modes = seq.f[0].len();
    let mut g: Vec<Vec<RatFn>> = vec![];
    for mode in 0..modes {
        if seq.f[0][mode].is_zero() {
            return Err(Error::IdenticallyZero(mode));
        }
    }
    // g_0
    g.push(
        (0..modes)
            .map(|m| RatFn::new(Poly::one(), seq.f[0][m].clone()))
            .collect(),
    );
    for l in 1..seq.mu {
        let mut layer = vec![];
        for m in 0..modes {
            let mut sum = RatFn::zero();
            for j in 0..l {
                let shift = -Rat::from_integer(num::BigInt::from(j as i64));
                let f_shift = RatFn::from_poly(seq.f[l - j][m].shift(&shift));
                sum = sum.add(&f_shift.mul(&g[j][m]));
            }
            let shift_l = -Rat::from_integer(num::BigInt::from(l as i64));
            let f0_inv_shift = RatFn::new(Poly::one(), seq.f[0][m].shift(&shift_l));
            layer.push(f0_inv_shift.mul(&sum).neg());
        }
        g.push(layer);
    }
    Ok(SymbolSequence { n: seq.n, mu: seq.mu, f: seq.f.clone(), g })
}

/// Exact verification of `sum_{l<=j} (T^{-l} f_{j-l}) g_l = delta_{0j}` as
/// rational functions, for all `j < mu` and all modes.
pub fn kronecker_identity_holds(seq: &SymbolSequence) -> bool {
    if seq.g.len() != seq.mu {
        return false;
    }
    let modes = seq.f[0].len();
    for j in 0..seq.mu {
        for m in 0..modes {
            let mut sum = RatFn::zero();
            for l in 0..=j {
                let shift = -Rat::from_integer(num::BigInt::from(l as i64));
                let f_shift = RatFn::from_poly(seq.f[j - l][m].shift(&shift));
                sum = sum.add(&f_shift.mul(&seq.g[l][m]));
            }
            let ok = if j == 0 { sum.is_one() } else { sum.is_zero() };
            if !ok {
                return false;
            }
        }
    }
    true
}
