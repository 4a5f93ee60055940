//! Spectrum of the boundary Laplacian on the cross-section of the cone.
//!
//! Every operator in the toolkit is diagonal over these modes, so a mode is
//! just an index carrying an eigenvalue and a multiplicity; eigenspaces are
//! never materialised.  Eigenvalues follow the convention `0 = l_0 > l_1 > ...`
//! (the Laplacian is non-positive).  Presets keep eigenvalues as exact
//! rationals so that downstream pole locations are exact.

use num::{BigInt, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{rat_from_f64, rat_to_f64, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumSource {
    Circle,
    Sphere(u32),
    Custom,
}

/// One eigenvalue of the boundary Laplacian with its multiplicity.
#[derive(Clone, Debug)]
pub struct Mode {
    pub label: String,
    /// Exact eigenvalue (<= 0).
    pub eigenvalue: Rat,
    pub multiplicity: usize,
}

impl Mode {
    pub fn eigenvalue_f64(&self) -> f64 {
        rat_to_f64(&self.eigenvalue)
    }
}

/// Ordered spectrum of the boundary Laplacian, strictly decreasing.
#[derive(Clone, Debug)]
pub struct BoundarySpectrum {
    pub modes: Vec<Mode>,
    /// Dimension n of the cross-section (the cone base has dimension n+1).
    pub dim_boundary: i64,
    pub source: SpectrumSource,
}

impl BoundarySpectrum {
    fn validate(modes: &[Mode]) -> Result<()> {
        for m in modes {
            if m.eigenvalue > Rat::zero() {
                return Err(Error::PositiveEigenvalue(m.eigenvalue_f64()));
            }
        }
        for (i, w) in modes.windows(2).enumerate() {
            if w[1].eigenvalue >= w[0].eigenvalue {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        Ok(())
    }

    /// Circle cross-section: eigenvalues `-k^2`, multiplicity 1 for `k = 0`
    /// and 2 otherwise.
    pub fn circle(max_modes: usize) -> BoundarySpectrum {
        assert!(max_modes >= 1);
        let modes = (0..max_modes)
            .map(|k| Mode {
                label: format!("k={k}"),
                eigenvalue: -Rat::from_integer(BigInt::from((k * k) as i64)),
                multiplicity: if k == 0 { 1 } else { 2 },
            })
            .collect();
        BoundarySpectrum { modes, dim_boundary: 1, source: SpectrumSource::Circle }
    }

    /// Sphere `S^d`: eigenvalues `-l(l+d-1)` with the spherical-harmonic
    /// multiplicities.
    pub fn sphere(d: u32, max_modes: usize) -> BoundarySpectrum {
        assert!(d >= 2);
        assert!(max_modes >= 1);
        let modes = (0..max_modes)
            .map(|l| Mode {
                label: format!("l={l}"),
                eigenvalue: -Rat::from_integer(BigInt::from((l as i64) * (l as i64 + d as i64 - 1))),
                multiplicity: harmonic_dim(d, l),
            })
            .collect();
        BoundarySpectrum { modes, dim_boundary: d as i64, source: SpectrumSource::Sphere(d) }
    }

    /// The point boundary of a one-dimensional cone base: a single constant
    /// mode with eigenvalue 0.
    pub fn point() -> BoundarySpectrum {
        BoundarySpectrum {
            modes: vec![Mode { label: "pt".into(), eigenvalue: Rat::zero(), multiplicity: 1 }],
            dim_boundary: 0,
            source: SpectrumSource::Custom,
        }
    }

    /// Wrap an explicit eigenvalue list, validating monotonicity and sign.
    pub fn custom(entries: &[(f64, usize)], dim_boundary: i64) -> Result<BoundarySpectrum> {
        let modes: Vec<Mode> = entries
            .iter()
            .enumerate()
            .map(|(i, &(ev, mult))| {
                Ok(Mode {
                    label: format!("j={i}"),
                    eigenvalue: rat_from_f64(ev)
                        .ok_or_else(|| Error::InvalidOperator(format!("non-finite eigenvalue {ev}")))?,
                    multiplicity: mult,
                })
            })
            .collect::<Result<_>>()?;
        Self::validate(&modes)?;
        Ok(BoundarySpectrum { modes, dim_boundary, source: SpectrumSource::Custom })
    }

    /// Preset by name plus truncation, used by the CLI.
    pub fn preset(n: i64, max_modes: usize) -> BoundarySpectrum {
        match n {
            0 => BoundarySpectrum::point(),
            1 => BoundarySpectrum::circle(max_modes),
            d => BoundarySpectrum::sphere(d as u32, max_modes),
        }
    }

    /// Load `{"dim_boundary": n, "modes": [[ev, mult], ...]}`.
    pub fn from_json(doc: &str) -> Result<BoundarySpectrum> {
        #[derive(Deserialize)]
        struct Doc {
            dim_boundary: i64,
            modes: Vec<(f64, usize)>,
        }
        let d: Doc = serde_json::from_str(doc)?;
        BoundarySpectrum::custom(&d.modes, d.dim_boundary)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Dimension of the space of degree-`l` spherical harmonics on `S^d`:
/// homogeneous harmonic polynomials of degree `l` in `d+1` variables.
pub fn harmonic_dim(d: u32, l: usize) -> usize {
    let vars = d as usize + 1;
    let h = |deg: i64| -> i64 {
        if deg < 0 {
            0
        } else {
            // C(deg + vars - 1, vars - 1)
            let mut num = BigInt::from(1);
            let mut den = BigInt::from(1);
            for i in 0..(vars - 1) {
                num *= BigInt::from(deg + 1 + i as i64);
                den *= BigInt::from(1 + i as i64);
            }
            (num / den).to_i64().unwrap()
        }
    };
    (h(l as i64) - h(l as i64 - 2)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_examples() {
        let s = BoundarySpectrum::circle(3);
        let got: Vec<(f64, usize)> = s.modes.iter().map(|m| (m.eigenvalue_f64(), m.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (-1.0, 2), (-4.0, 2)]);
        assert_eq!(BoundarySpectrum::circle(1).modes.len(), 1);
        let s10 = BoundarySpectrum::circle(10);
        assert_eq!(s10.modes.last().unwrap().eigenvalue_f64(), -81.0);
        assert_eq!(s.dim_boundary, 1);
    }

    #[test]
    fn sphere_examples() {
        let s = BoundarySpectrum::sphere(2, 3);
        assert_eq!(s.modes[0].multiplicity, 1);
        assert_eq!((s.modes[1].eigenvalue_f64(), s.modes[1].multiplicity), (-2.0, 3));
        assert_eq!((s.modes[2].eigenvalue_f64(), s.modes[2].multiplicity), (-6.0, 5));
        let s3 = BoundarySpectrum::sphere(3, 2);
        assert_eq!((s3.modes[1].eigenvalue_f64(), s3.modes[1].multiplicity), (-3.0, 4));
    }

    /// Brute-force oracle for the degree-1 harmonic count on S^3: build the
    /// Laplacian as a linear map on homogeneous degree-l polynomials in 4
    /// variables and count the kernel dimension by integer Gaussian
    /// elimination.
    #[test]
    fn sphere_multiplicity_against_kernel_count() {
        fn monomials(deg: usize, vars: usize) -> Vec<Vec<usize>> {
            if vars == 1 {
                return vec![vec![deg]];
            }
            let mut out = vec![];
            for first in 0..=deg {
                for mut rest in monomials(deg - first, vars - 1) {
                    let mut m = vec![first];
                    m.append(&mut rest);
                    out.push(m);
                }
            }
            out
        }
        fn harmonic_kernel_dim(deg: usize, vars: usize) -> usize {
            let dom = monomials(deg, vars);
            if deg < 2 {
                return dom.len(); // Laplacian is identically zero there
            }
            let cod = monomials(deg - 2, vars);
            let idx = |m: &Vec<usize>| cod.iter().position(|c| c == m).unwrap();
            // rows: codomain monomials, cols: domain monomials
            let mut mat = vec![vec![0.0_f64; dom.len()]; cod.len()];
            for (j, m) in dom.iter().enumerate() {
                for v in 0..vars {
                    if m[v] >= 2 {
                        let mut t = m.clone();
                        t[v] -= 2;
                        mat[idx(&t)][j] += (m[v] * (m[v] - 1)) as f64;
                    }
                }
            }
            // rank by Gaussian elimination
            let mut rank = 0;
            let mut row = 0;
            for col in 0..dom.len() {
                if row >= cod.len() {
                    break;
                }
                let piv = (row..cod.len()).max_by(|&a, &b| {
                    mat[a][col].abs().partial_cmp(&mat[b][col].abs()).unwrap()
                });
                let piv = piv.unwrap();
                if mat[piv][col].abs() < 1e-9 {
                    continue;
                }
                mat.swap(row, piv);
                for r in 0..cod.len() {
                    if r != row && mat[r][col].abs() > 0.0 {
                        let f = mat[r][col] / mat[row][col];
                        for c in col..dom.len() {
                            mat[r][c] -= f * mat[row][c];
                        }
                    }
                }
                rank += 1;
                row += 1;
            }
            dom.len() - rank
        }
        for l in 0..4 {
            assert_eq!(harmonic_dim(3, l), harmonic_kernel_dim(l, 4), "S^3 degree {l}");
            assert_eq!(harmonic_dim(2, l), harmonic_kernel_dim(l, 3), "S^2 degree {l}");
        }
    }

    #[test]
    fn custom_validation() {
        assert!(BoundarySpectrum::custom(&[(0.0, 1), (-1.0, 2)], 1).is_ok());
        assert!(matches!(
            BoundarySpectrum::custom(&[(-1.0, 2), (0.0, 1)], 1),
            Err(Error::NonMonotone(_))
        ));
        assert!(matches!(
            BoundarySpectrum::custom(&[(0.0, 1), (0.5, 1)], 1),
            Err(Error::PositiveEigenvalue(_))
        ));
    }

    #[test]
    fn circle_agrees_with_custom_oracle() {
        for m in 1..=64usize {
            let a = BoundarySpectrum::circle(m);
            let entries: Vec<(f64, usize)> = (0..m)
                .map(|k| (-((k * k) as f64), if k == 0 { 1 } else { 2 }))
                .collect();
            let b = BoundarySpectrum::custom(&entries, 1).unwrap();
            for (x, y) in a.modes.iter().zip(&b.modes) {
                assert_eq!(x.eigenvalue, y.eigenvalue);
                assert_eq!(x.multiplicity, y.multiplicity);
            }
        }
    }

    #[test]
    fn sphere_cumulative_multiplicity() {
        let s = BoundarySpectrum::sphere(2, 8);
        let mut total = 0;
        for (l, m) in s.modes.iter().enumerate() {
            total += m.multiplicity;
            assert_eq!(total, (l + 1) * (l + 1));
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = BoundarySpectrum::from_json(r#"{"dim_boundary": 1, "modes": [[0, 1], [-1, 2]]}"#).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim_boundary, 1);
    }
}
