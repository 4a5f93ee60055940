//! Cone differential operators with boundary coefficients that are
//! polynomials in the boundary Laplacian.
//!
//! Near the tip the operator reads `t^{-mu} sum_{j=0..mu} a_j(t) (-t d/dt)^j`
//! where each `a_j(t)` is a polynomial in `t` whose coefficients are
//! polynomials in the boundary Laplacian; on an eigenmode with eigenvalue `l`
//! the coefficient becomes the scalar polynomial value `a_j(t)(l)`.

use num::{BigInt, One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rational::Poly;
use crate::{rat_from_f64, Rat};

/// `a_j(t)` as a polynomial in `t` with lambda-polynomial coefficients:
/// `terms[p]` is the lambda-polynomial multiplying `t^p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficient {
    pub terms: Vec<Poly>,
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient { terms: vec![] }
    }

    pub fn constant_scalar(c: Rat) -> Self {
        Coefficient { terms: vec![Poly::constant(c)] }
    }

    /// Value at `t = 0`: a polynomial in the eigenvalue variable.
    pub fn at_zero(&self) -> Poly {
        self.terms.first().cloned().unwrap_or_else(Poly::zero)
    }

    /// Coefficient of `t^p` (a lambda-polynomial).
    pub fn t_coeff(&self, p: usize) -> Poly {
        self.terms.get(p).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn t_degree(&self) -> usize {
        self.terms.iter().rposition(|p| !p.is_zero()).unwrap_or(0)
    }

    /// Evaluate at a concrete `t` (rational), leaving a lambda-polynomial.
    pub fn eval_t(&self, t: &Rat) -> Poly {
        let mut acc = Poly::zero();
        let mut tp = Rat::one();
        for lp in &self.terms {
            acc = acc.add(&lp.scale(&tp));
            tp *= t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|p| p.is_zero())
    }

    fn neg(&self) -> Self {
        Coefficient { terms: self.terms.iter().map(|p| p.neg()).collect() }
    }
}

/// Descriptor for the operator away from the boundary; only the straight-cone
/// continuation up to the unit circle is realised by the solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InteriorExtension {
    StraightCone,
}

/// A cone differential operator of order `mu` on a base with `n`-dimensional
/// cross-section.
#[derive(Clone, Debug)]
pub struct ConeOperator {
    pub mu: usize,
    pub n: i64,
    /// `coeffs[j]` is `a_j(t)`, for `j = 0..=mu`.
    pub coeffs: Vec<Coefficient>,
    pub interior: InteriorExtension,
    pub name: String,
}

impl ConeOperator {
    pub fn new(mu: usize, n: i64, coeffs: Vec<Coefficient>, name: &str) -> Result<ConeOperator> {
        if mu == 0 {
            return Err(Error::InvalidOperator("order mu must be positive".into()));
        }
        if coeffs.len() != mu + 1 {
            return Err(Error::InvalidOperator(format!(
                "need {} coefficients for order {mu}, got {}",
                mu + 1,
                coeffs.len()
            )));
        }
        let top = coeffs[mu].at_zero();
        if top.is_zero() || top.degree() != Some(0) {
            return Err(Error::InvalidOperator(
                "top coefficient at t=0 must be a nonzero scalar".into(),
            ));
        }
        Ok(ConeOperator { mu, n, coeffs, interior: InteriorExtension::StraightCone, name: name.into() })
    }

    /// The Laplace-Beltrami operator of a straight conical metric:
    /// `t^{-2} ((t d/dt)^2 + (n-1) t d/dt + boundary Laplacian)`.
    /// In `(-t d/dt)` powers: `a_2 = 1`, `a_1 = -(n-1)`, `a_0 = lambda`.
    pub fn laplacian(n: i64) -> ConeOperator {
        let a0 = Coefficient { terms: vec![Poly::var()] };
        let a1 = Coefficient::constant_scalar(-Rat::from_integer(BigInt::from(n - 1)));
        let a2 = Coefficient::constant_scalar(Rat::one());
        ConeOperator::new(2, n, vec![a0, a1, a2], "laplacian").unwrap()
    }

    /// The two-dimensional example operator
    /// `t^{-2} ( (1/4)((t d/dt)^2 - t (t d/dt)) + boundary Laplacian )` on the
    /// circle cross-section: `a_2 = 1/4`, `a_1 = (1/4) t`, `a_0 = lambda`.
    pub fn example_abcd() -> ConeOperator {
        let quarter = Rat::new(BigInt::one(), BigInt::from(4));
        let a0 = Coefficient { terms: vec![Poly::var()] };
        let a1 = Coefficient { terms: vec![Poly::zero(), Poly::constant(quarter.clone())] };
        let a2 = Coefficient::constant_scalar(quarter);
        ConeOperator::new(2, 1, vec![a0, a1, a2], "example-abcd").unwrap()
    }

    /// Named preset lookup.
    pub fn preset(name: &str, n: i64) -> Result<ConeOperator> {
        match name {
            "laplacian" => Ok(ConeOperator::laplacian(n)),
            "example-abcd" => Ok(ConeOperator::example_abcd()),
            other => Err(Error::InvalidOperator(format!("unknown preset `{other}`"))),
        }
    }

    /// `-A`; same order, negated coefficients.
    pub fn negated(&self) -> ConeOperator {
        ConeOperator {
            mu: self.mu,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            interior: self.interior.clone(),
            name: format!("-({})", self.name),
        }
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| c.t_degree() == 0)
    }

    /// Recognise `sign * laplacian(n)`; returns the sign when it matches.
    pub fn laplacian_sign(&self) -> Option<f64> {
        for sign in [1i64, -1] {
            let reference = ConeOperator::laplacian(self.n);
            let s = Rat::from_integer(BigInt::from(sign));
            let matches = self.mu == 2
                && (0..=2).all(|j| {
                    let want = Coefficient {
                        terms: reference.coeffs[j].terms.iter().map(|p| p.scale(&s)).collect(),
                    };
                    let got = &self.coeffs[j];
                    let max = want.terms.len().max(got.terms.len());
                    (0..max).all(|p| want.t_coeff(p) == got.t_coeff(p))
                });
            if matches {
                return Some(sign as f64);
            }
        }
        None
    }

    /// Load from the JSON document
    /// `{"mu": m, "n": n, "coeffs": [[j, [[t_power, [c0, c1, ...]], ...]], ...]}`,
    /// where the lambda-polynomial coefficients may be numbers or `"p/q"` strings.
    pub fn from_json(doc: &str) -> Result<ConeOperator> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            F(f64),
            S(String),
        }
        #[derive(Deserialize)]
        struct Doc {
            mu: usize,
            n: i64,
            coeffs: Vec<(usize, Vec<(usize, Vec<Num>)>)>,
            #[serde(default)]
            name: Option<String>,
        }
        fn to_rat(n: &Num) -> Result<Rat> {
            match n {
                Num::F(x) => rat_from_f64(*x)
                    .ok_or_else(|| Error::InvalidOperator(format!("non-finite coefficient {x}"))),
                Num::S(s) => {
                    let parts: Vec<&str> = s.split('/').collect();
                    let parse = |t: &str| {
                        t.trim().parse::<BigInt>().map_err(|_| {
                            Error::InvalidOperator(format!("cannot parse rational `{s}`"))
                        })
                    };
                    match parts.as_slice() {
                        [a] => Ok(Rat::from_integer(parse(a)?)),
                        [a, b] => {
                            let d = parse(b)?;
                            if d.is_zero() {
                                return Err(Error::InvalidOperator(format!("zero denominator in `{s}`")));
                            }
                            Ok(Rat::new(parse(a)?, d))
                        }
                        _ => Err(Error::InvalidOperator(format!("cannot parse rational `{s}`"))),
                    }
                }
            }
        }
        let d: Doc = serde_json::from_str(doc)?;
        let mut coeffs = vec![Coefficient::zero(); d.mu + 1];
        for (j, tpolys) in &d.coeffs {
            if *j > d.mu {
                return Err(Error::InvalidOperator(format!("coefficient index {j} exceeds mu")));
            }
            let mut terms: Vec<Poly> = vec![];
            for (tp, lcoeffs) in tpolys {
                if terms.len() <= *tp {
                    terms.resize(*tp + 1, Poly::zero());
                }
                let cs: Vec<Rat> = lcoeffs.iter().map(to_rat).collect::<Result<_>>()?;
                terms[*tp] = Poly::new(cs);
            }
            coeffs[*j] = Coefficient { terms };
        }
        ConeOperator::new(d.mu, d.n, coeffs, d.name.as_deref().unwrap_or("custom"))
    }

    /// Deterministic pseudo-random operator with small rational coefficients,
    /// used by the recursion-identity battery.
    pub fn random(seed: u64, mu: usize, n: i64) -> ConeOperator {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![];
        for j in 0..=mu {
            let mut terms = vec![];
            for _tp in 0..=2usize {
                let lam_deg = rng.gen_range(0..=1usize);
                let poly = Poly::new(
                    (0..=lam_deg)
                        .map(|_| {
                            Rat::new(
                                BigInt::from(rng.gen_range(-4i64..=4)),
                                BigInt::from(*[1i64, 2, 4].get(rng.gen_range(0..3)).unwrap()),
                            )
                        })
                        .collect(),
                );
                terms.push(poly);
            }
            if j == mu {
                // top coefficient must be a nonzero scalar at t = 0
                let mut lead = Rat::from_integer(BigInt::from(rng.gen_range(1i64..=4)));
                if rng.gen_bool(0.5) {
                    lead = -lead;
                }
                terms[0] = Poly::constant(lead);
            }
            coeffs.push(Coefficient { terms });
        }
        ConeOperator::new(mu, n, coeffs, &format!("random-{seed}")).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_rejected() {
        let err = ConeOperator::new(0, 1, vec![Coefficient::constant_scalar(Rat::one())], "bad");
        assert!(err.is_err());
    }

    #[test]
    fn degenerate_top_rejected() {
        // top coefficient vanishing at t=0
        let a0 = Coefficient::constant_scalar(Rat::one());
        let a1 = Coefficient { terms: vec![Poly::zero(), Poly::one()] };
        assert!(ConeOperator::new(1, 1, vec![a0, a1], "bad").is_err());
        // top coefficient depending on the eigenvalue
        let a0 = Coefficient::constant_scalar(Rat::one());
        let a1 = Coefficient { terms: vec![Poly::var()] };
        assert!(ConeOperator::new(1, 1, vec![a0, a1], "bad").is_err());
    }

    #[test]
    fn laplacian_family_detection() {
        assert_eq!(ConeOperator::laplacian(1).laplacian_sign(), Some(1.0));
        assert_eq!(ConeOperator::laplacian(3).negated().laplacian_sign(), Some(-1.0));
        assert_eq!(ConeOperator::example_abcd().laplacian_sign(), None);
    }

    #[test]
    fn json_load_matches_preset() {
        let doc = r#"{
            "mu": 2, "n": 1,
            "coeffs": [[0, [[0, [0, 1]]]], [1, [[0, [0]]]], [2, [[0, [1]]]]]
        }"#;
        let op = ConeOperator::from_json(doc).unwrap();
        let reference = ConeOperator::laplacian(1);
        for j in 0..=2 {
            assert_eq!(op.coeffs[j].at_zero(), reference.coeffs[j].at_zero());
        }
        let frac = r#"{
            "mu": 2, "n": 1,
            "coeffs": [[0, [[0, [0, 1]]]], [1, [[1, ["1/4"]]]], [2, [[0, ["1/4"]]]]]
        }"#;
        let op = ConeOperator::from_json(frac).unwrap();
        let reference = ConeOperator::example_abcd();
        for j in 0..=2 {
            assert_eq!(op.coeffs[j].terms, reference.coeffs[j].terms);
        }
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let a = ConeOperator::random(7, 3, 1);
        let b = ConeOperator::random(7, 3, 1);
        for j in 0..=3 {
            assert_eq!(a.coeffs[j].terms, b.coeffs[j].terms);
        }
    }
}
