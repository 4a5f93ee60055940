//! Exact univariate polynomials and rational functions over the rationals.
//!
//! All symbol-level algebra (conormal symbols, their inverses, the shifted
//! recursion) runs in this layer, so identities like the Kronecker property of
//! the recursion hold exactly, not up to floating tolerance.  Numerics enter
//! only when roots are extracted: rational roots are found exactly, the rest
//! via companion-matrix eigenvalues polished by one Newton step and clustered
//! within [`POLE_CLUSTER_TOL`].

use nalgebra::DMatrix;
use num::{BigInt, One, Signed, Zero};

use crate::{Complex, Rat};

/// Roots closer than this merge into a single higher-order root.
pub const POLE_CLUSTER_TOL: f64 = 1e-9;

/// Polynomial with exact rational coefficients, ascending order, trimmed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

fn rz() -> Rat {
    Rat::zero()
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::new(vec![c])
    }

    /// The variable `z`.
    pub fn var() -> Self {
        Poly::new(vec![rz(), Rat::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Rat::from_integer(BigInt::from(c))).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(rz)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(rz)
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        let mut acc = rz();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_c(&self, z: Complex) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex::new(crate::rat_to_f64(c), 0.0);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![rz(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Taylor shift: returns `q` with `q(z) = self(z + sigma)`.
    pub fn shift(&self, sigma: &Rat) -> Poly {
        // Horner in (z + sigma).
        let linear = Poly::new(vec![sigma.clone(), Rat::one()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&linear).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Euclidean division: `self = q * div + r` with `deg r < deg div`.
    pub fn divmod(&self, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(), "division by the zero polynomial");
        let dd = div.degree().unwrap();
        let lead = div.leading();
        let mut rem = self.clone();
        let mut q = vec![rz(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let f = rem.leading() / lead.clone();
            q[rd - dd] = f.clone();
            let mut sub = vec![rz(); rd - dd];
            sub.push(f);
            rem = rem.sub(&Poly::new(sub).mul(div));
        }
        (Poly::new(q), rem)
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = Rat::one() / self.leading();
        self.scale(&inv)
    }

    /// Scale coefficients to coprime integers (content removed).
    fn primitive_integer(&self) -> Vec<BigInt> {
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = num::integer::lcm(den, c.denom().clone());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Rat::from_integer(den.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for i in &ints {
            g = num::integer::gcd(g, i.abs());
        }
        if g.is_zero() || g.is_one() {
            ints
        } else {
            ints.iter().map(|i| i / &g).collect()
        }
    }

    /// Exact rational roots with multiplicities, plus the deflated cofactor.
    ///
    /// Candidate search uses the rational-root theorem on the primitive
    /// integer form; it is skipped (returning the input untouched) when the
    /// divisor sets would be impractically large.
    pub fn rational_roots(&self) -> (Vec<(Rat, usize)>, Poly) {
        if self.is_zero() || self.degree() == Some(0) {
            return (vec![], self.clone());
        }
        let ints = self.primitive_integer();
        let a0_pos = ints.iter().position(|c| !c.is_zero()).unwrap();
        // Factor out z^a0_pos first: root 0 with that multiplicity.
        let mut roots: Vec<(Rat, usize)> = vec![];
        let mut work = self.clone();
        if a0_pos > 0 {
            roots.push((rz(), a0_pos));
            let mut c = work.coeffs.clone();
            c.drain(0..a0_pos);
            work = Poly::new(c);
        }
        if work.degree() == Some(0) {
            return (roots, work);
        }
        let ints = work.primitive_integer();
        let a0 = ints.first().unwrap().abs();
        let an = ints.last().unwrap().abs();
        let d0 = divisors_bounded(&a0, 3000);
        let dn = divisors_bounded(&an, 3000);
        let (d0, dn) = match (d0, dn) {
            (Some(a), Some(b)) => (a, b),
            _ => return (roots, work),
        };
        let mut candidates: Vec<Rat> = vec![];
        for p in &d0 {
            for q in &dn {
                let r = Rat::new(p.clone(), q.clone());
                candidates.push(r.clone());
                candidates.push(-r);
            }
        }
        candidates.sort();
        candidates.dedup();
        for cand in candidates {
            let mut mult = 0;
            while !work.is_zero() && work.degree().unwrap_or(0) >= 1 && work.eval_rat(&cand).is_zero() {
                let lin = Poly::new(vec![-cand.clone(), Rat::one()]);
                let (q, r) = work.divmod(&lin);
                debug_assert!(r.is_zero());
                work = q;
                mult += 1;
            }
            if mult > 0 {
                roots.push((cand, mult));
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, work)
    }

    /// All complex roots of the deflated (root-free rational part) polynomial,
    /// by companion matrix eigenvalues plus one Newton polish step.
    pub fn complex_roots_numeric(&self) -> Vec<Complex> {
        let deg = match self.degree() {
            None | Some(0) => return vec![],
            Some(d) => d,
        };
        let lead = crate::rat_to_f64(&self.leading());
        let mut m = DMatrix::<f64>::zeros(deg, deg);
        for i in 0..deg {
            m[(i, deg - 1)] = -crate::rat_to_f64(&self.coeff(i)) / lead;
            if i + 1 < deg {
                m[(i + 1, i)] = 1.0;
            }
        }
        let eigs = m.complex_eigenvalues();
        let deriv = self.derivative();
        eigs.iter()
            .map(|&z| {
                let mut r = z;
                for _ in 0..2 {
                    let dv = deriv.eval_c(r);
                    if dv.norm() > 1e-300 {
                        let step = self.eval_c(r) / dv;
                        if step.norm() < 1.0 {
                            r -= step;
                        }
                    }
                }
                r
            })
            .collect()
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = vec![];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = match i {
                0 => format!("{c}"),
                1 => format!("{c}*{var}"),
                _ => format!("{c}*{var}^{i}"),
            };
            parts.push(term);
        }
        parts.join(" + ")
    }
}

/// All positive divisors of `n`, or `None` if there would be more than `cap`
/// or `n` does not fit a reasonable trial-division budget.
fn divisors_bounded(n: &BigInt, cap: usize) -> Option<Vec<BigInt>> {
    use num::ToPrimitive;
    if n.is_zero() {
        return Some(vec![BigInt::one()]);
    }
    let v = n.to_u64()?;
    let mut divs = vec![];
    let mut i = 1u64;
    while i.saturating_mul(i) <= v {
        if v % i == 0 {
            divs.push(BigInt::from(i));
            if i != v / i {
                divs.push(BigInt::from(v / i));
            }
            if divs.len() > cap {
                return None;
            }
        }
        if i > 100_000_000 {
            return None;
        }
        i += 1;
    }
    Some(divs)
}

/// Reduced rational function `num/den` with monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn { num: Poly::zero(), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree().unwrap_or(0) >= 1 {
            (num.divmod(&g).0, den.divmod(&g).0)
        } else {
            (num, den)
        };
        let lead = den.leading();
        let inv = Rat::one() / lead;
        RatFn { num: num.scale(&inv), den: den.monic() }
    }

    pub fn from_poly(p: Poly) -> RatFn {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn zero() -> RatFn {
        RatFn::from_poly(Poly::zero())
    }

    pub fn one() -> RatFn {
        RatFn::from_poly(Poly::one())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn inv(&self) -> Option<RatFn> {
        if self.is_zero() {
            None
        } else {
            Some(RatFn::new(self.den.clone(), self.num.clone()))
        }
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    /// `(T^sigma f)(z) = f(z + sigma)`.
    pub fn shift(&self, sigma: &Rat) -> RatFn {
        RatFn::new(self.num.shift(sigma), self.den.shift(sigma))
    }

    pub fn eval_c(&self, z: Complex) -> Complex {
        self.num.eval_c(z) / self.den.eval_c(z)
    }

    pub fn eval_rat(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval_rat(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval_rat(x) / d)
        }
    }
}

/// Cluster numerically computed roots: points within [`POLE_CLUSTER_TOL`] of
/// each other merge into one root of higher order, located at the mean.
pub fn cluster_roots(mut roots: Vec<Complex>) -> Vec<(Complex, usize)> {
    let mut out: Vec<(Complex, usize)> = vec![];
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    for r in roots {
        if let Some((c, m)) = out.last_mut() {
            if (*c - r).norm() <= POLE_CLUSTER_TOL {
                // running mean keeps the cluster centre stable
                *c = (*c * (*m as f64) + r) / (*m as f64 + 1.0);
                *m += 1;
                continue;
            }
        }
        out.push((r, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn shift_is_evaluation_at_shifted_argument() {
        let p = Poly::from_i64(&[1, -3, 0, 2]); // 1 - 3z + 2z^3
        let s = r(7, 3);
        let q = p.shift(&s);
        for k in -4..4 {
            let x = r(k, 2);
            assert_eq!(q.eval_rat(&x), p.eval_rat(&(x.clone() + s.clone())));
        }
    }

    #[test]
    fn divmod_reconstructs() {
        let a = Poly::from_i64(&[2, 0, -1, 4, 1]);
        let b = Poly::from_i64(&[1, 1, 1]);
        let (q, rem) = a.divmod(&b);
        assert_eq!(q.mul(&b).add(&rem), a);
        assert!(rem.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (z-1)^2 (2z+3) z
        let p = Poly::from_i64(&[0, 1])
            .mul(&Poly::from_i64(&[-1, 1]).pow(2))
            .mul(&Poly::from_i64(&[3, 2]));
        let (roots, rest) = p.rational_roots();
        assert_eq!(rest.degree(), Some(0));
        assert!(roots.contains(&(r(0, 1), 1)));
        assert!(roots.contains(&(r(1, 1), 2)));
        assert!(roots.contains(&(r(-3, 2), 1)));
    }

    #[test]
    fn companion_roots_of_quadratic() {
        // z^2 + 1 -> +-i
        let p = Poly::from_i64(&[1, 0, 1]);
        let mut roots = p.complex_roots_numeric();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((roots[0] - Complex::new(0.0, -1.0)).norm() < 1e-12);
        assert!((roots[1] - Complex::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn ratfn_reduces() {
        // (z^2-1)/(z-1) = z+1
        let f = RatFn::new(Poly::from_i64(&[-1, 0, 1]), Poly::from_i64(&[-1, 1]));
        assert_eq!(f.num(), &Poly::from_i64(&[1, 1]));
        assert_eq!(f.den(), &Poly::one());
    }

    #[test]
    fn cluster_merges_close_roots() {
        let roots = vec![
            Complex::new(1.0, 0.0),
            Complex::new(1.0 + 1e-12, 0.0),
            Complex::new(2.0, 0.0),
        ];
        let c = cluster_roots(roots);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].1, 2);
    }
}
