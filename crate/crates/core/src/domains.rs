//! Minimal/maximal domains, asymptotics spaces and the extension lattice of
//! the cone Laplacian.
//!
//! For the Laplacian the indicial roots on a mode with eigenvalue `l` are
//! `q = (n-1)/2 +- sqrt(((n-1)/2)^2 - l)`; they are kept exact whenever the
//! radicand is a perfect square (true for all preset spectra), so interval
//! membership, adjoint maps and self-adjointness tests are exact.  The
//! maximal-domain asymptotics of a general operator are assembled from the
//! recursion symbols `g_l`: each pole in a shifted weight window feeds a
//! finite-rank generator matrix over Mellin jet coordinates whose column
//! space is the asymptotics space.

use std::collections::BTreeMap;

use num::{BigInt, One, Signed, Zero};

use crate::boundary::BoundarySpectrum;
use crate::conormal::{self, Scalar};
use crate::cutoff;
use crate::error::{Error, Result};
use crate::operator::ConeOperator;
use crate::quad;
use crate::rational::POLE_CLUSTER_TOL;
use crate::{rat_to_f64, Complex, Rat};

/// Exact square root of a non-negative rational, when it is a perfect square.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &(&sn * &sn) == r.numer() && &(&sd * &sd) == r.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RootSign {
    Minus,
    Plus,
}

/// Indicial-root data of the Laplacian on one boundary mode.
#[derive(Clone, Debug)]
pub struct ModeRootData {
    pub mode: usize,
    pub multiplicity: usize,
    /// `(n-1)/2`.
    pub center: Rat,
    /// `center^2 - eigenvalue`, always >= 0.
    pub radicand: Rat,
    pub nu: f64,
    pub exact_nu: Option<Rat>,
    pub q_plus: Scalar,
    pub q_minus: Scalar,
    /// Coincident roots (the two-dimensional log case).
    pub double: bool,
}

impl ModeRootData {
    pub fn q(&self, s: RootSign) -> &Scalar {
        match s {
            RootSign::Plus => &self.q_plus,
            RootSign::Minus => &self.q_minus,
        }
    }
}

/// Indicial roots `q_j^±` for the Laplacian over a spectrum.
pub fn laplace_mode_data(spec: &BoundarySpectrum, n: i64) -> Vec<ModeRootData> {
    let center = Rat::new(BigInt::from(n - 1), BigInt::from(2));
    spec.modes
        .iter()
        .enumerate()
        .map(|(mode, m)| {
            let radicand = &center * &center - &m.eigenvalue;
            let exact_nu = rat_sqrt(&radicand);
            let nu = match &exact_nu {
                Some(e) => rat_to_f64(e),
                None => rat_to_f64(&radicand).sqrt(),
            };
            let (q_plus, q_minus) = match &exact_nu {
                Some(e) => (Scalar::Exact(&center + e), Scalar::Exact(&center - e)),
                None => (
                    Scalar::Numeric(Complex::new(rat_to_f64(&center) + nu, 0.0)),
                    Scalar::Numeric(Complex::new(rat_to_f64(&center) - nu, 0.0)),
                ),
            };
            ModeRootData {
                mode,
                multiplicity: m.multiplicity,
                center: center.clone(),
                radicand: radicand.clone(),
                nu,
                exact_nu,
                q_plus,
                q_minus,
                double: radicand.is_zero(),
            }
        })
        .collect()
}

pub fn scalar_close(a: &Scalar, b: &Scalar) -> bool {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
        _ => (a.value() - b.value()).norm() <= POLE_CLUSTER_TOL,
    }
}

/// One admissible exponent of the weight interval, merged across modes.
#[derive(Clone, Debug)]
pub struct ExponentPoint {
    pub value: Scalar,
    pub entries: Vec<(usize, RootSign)>,
    /// Coincident-root point carrying `{omega, omega log t}`.
    pub log_point: bool,
}

/// Strictly-open interval test with exact comparison where possible.
fn in_open_interval(v: &Scalar, lo: &Rat, hi: &Rat) -> bool {
    match v {
        Scalar::Exact(q) => q > lo && q < hi,
        Scalar::Numeric(z) => {
            z.im.abs() <= POLE_CLUSTER_TOL && z.re > rat_to_f64(lo) && z.re < rat_to_f64(hi)
        }
    }
}

/// The exponents `q_j^±` lying in the open interval
/// `] (n-1)/2 - gamma - 1, (n-1)/2 - gamma + 1 [`.
pub fn i_gamma(data: &[ModeRootData], n: i64, gamma: &Rat) -> Vec<ExponentPoint> {
    let center = Rat::new(BigInt::from(n - 1), BigInt::from(2));
    let lo = &center - gamma - Rat::one();
    let hi = &center - gamma + Rat::one();
    let mut points: Vec<ExponentPoint> = vec![];
    let mut push = |value: &Scalar, entry: (usize, RootSign), log_point: bool| {
        if !in_open_interval(value, &lo, &hi) {
            return;
        }
        match points.iter_mut().find(|p| scalar_close(&p.value, value)) {
            Some(p) => {
                p.entries.push(entry);
                p.log_point |= log_point;
            }
            None => points.push(ExponentPoint { value: value.clone(), entries: vec![entry], log_point }),
        }
    };
    for d in data {
        if d.double {
            push(&d.q_plus, (d.mode, RootSign::Plus), true);
            push(&d.q_plus, (d.mode, RootSign::Minus), true);
        } else {
            push(&d.q_plus, (d.mode, RootSign::Plus), false);
            push(&d.q_minus, (d.mode, RootSign::Minus), false);
        }
    }
    points.sort_by(|a, b| {
        let x = a.value.value().re;
        let y = b.value.value().re;
        x.partial_cmp(&y).unwrap()
    });
    points
}

/// Subspace choice on one contributing mode.
#[derive(Clone, Debug)]
pub enum ModeChoice {
    Zero,
    Full,
    /// Proper subspace of the eigenspace, given by orthonormal basis rows.
    Proper(Vec<Vec<Complex>>),
}

/// Choice at the coincident-root point (`span{omega, omega log t}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogSel {
    Zero,
    OmegaOnly,
    /// `span{omega log t}` alone; closed but not dilation invariant.
    LogOnly,
    Full,
}

#[derive(Clone, Debug)]
pub enum PointSel {
    Simple(BTreeMap<usize, ModeChoice>),
    LogPoint(LogSel),
}

/// A closed extension: minimal domain plus a subspace selection per exponent.
#[derive(Clone, Debug)]
pub struct Extension {
    pub n: i64,
    pub gamma: Rat,
    pub p: f64,
    pub points: Vec<(ExponentPoint, PointSel)>,
    pub label: String,
}

impl Extension {
    pub fn gamma_f64(&self) -> f64 {
        rat_to_f64(&self.gamma)
    }

    fn uniform(data: &[ModeRootData], n: i64, gamma: &Rat, p: f64, full: bool, label: &str) -> Extension {
        let points = i_gamma(data, n, gamma)
            .into_iter()
            .map(|pt| {
                let sel = if pt.log_point {
                    PointSel::LogPoint(if full { LogSel::Full } else { LogSel::Zero })
                } else {
                    let choice = if full { ModeChoice::Full } else { ModeChoice::Zero };
                    PointSel::Simple(pt.entries.iter().map(|&(m, _)| (m, choice.clone())).collect())
                };
                (pt, sel)
            })
            .collect();
        Extension { n, gamma: gamma.clone(), p, points, label: label.into() }
    }

    pub fn minimal(data: &[ModeRootData], n: i64, gamma: &Rat, p: f64) -> Extension {
        Extension::uniform(data, n, gamma, p, false, "minimal")
    }

    pub fn maximal(data: &[ModeRootData], n: i64, gamma: &Rat, p: f64) -> Extension {
        Extension::uniform(data, n, gamma, p, true, "maximal")
    }

    pub fn is_minimal_selection(&self) -> bool {
        self.points.iter().all(|(_, s)| match s {
            PointSel::Simple(m) => m.values().all(|c| matches!(c, ModeChoice::Zero)),
            PointSel::LogPoint(l) => *l == LogSel::Zero,
        })
    }

    pub fn is_maximal_selection(&self) -> bool {
        self.points.iter().all(|(_, s)| match s {
            PointSel::Simple(m) => m.values().all(|c| matches!(c, ModeChoice::Full)),
            PointSel::LogPoint(l) => *l == LogSel::Full,
        })
    }

    pub fn selection_at(&self, value: &Scalar) -> Option<&PointSel> {
        self.points
            .iter()
            .find(|(pt, _)| scalar_close(&pt.value, value))
            .map(|(_, s)| s)
    }
}

fn choice_complement(c: &ModeChoice, dim: usize) -> ModeChoice {
    match c {
        ModeChoice::Zero => ModeChoice::Full,
        ModeChoice::Full => ModeChoice::Zero,
        ModeChoice::Proper(rows) => {
            // orthogonal complement within C^dim via Gram-Schmidt
            let mut comp: Vec<Vec<Complex>> = vec![];
            for i in 0..dim {
                let mut v = vec![Complex::new(0.0, 0.0); dim];
                v[i] = Complex::new(1.0, 0.0);
                for b in rows.iter().chain(comp.iter()) {
                    let ip: Complex = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= ip * bi;
                    }
                }
                let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-9 {
                    continue;
                }
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                comp.push(v);
                if comp.len() + rows.len() == dim {
                    break;
                }
            }
            if comp.is_empty() {
                ModeChoice::Zero
            } else if comp.len() == dim {
                ModeChoice::Full
            } else {
                ModeChoice::Proper(comp)
            }
        }
    }
}

fn choices_equal(a: &ModeChoice, b: &ModeChoice, dim: usize) -> bool {
    let projector = |c: &ModeChoice| -> Vec<Vec<Complex>> {
        let zero = vec![vec![Complex::new(0.0, 0.0); dim]; dim];
        match c {
            ModeChoice::Zero => zero,
            ModeChoice::Full => {
                let mut m = zero;
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = Complex::new(1.0, 0.0);
                }
                m
            }
            ModeChoice::Proper(rows) => {
                let mut m = zero;
                for r in rows {
                    for i in 0..dim {
                        for j in 0..dim {
                            m[i][j] += r[i] * r[j].conj();
                        }
                    }
                }
                m
            }
        }
    };
    let pa = projector(a);
    let pb = projector(b);
    let mut diff = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            diff += (pa[i][j] - pb[i][j]).norm_sqr();
        }
    }
    diff.sqrt() < 1e-10
}

/// Enumeration granularity for [`enumerate_extensions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enumeration {
    All,
    DilationInvariant,
}

/// All extensions of the Laplacian at weight `gamma`, up to the implemented
/// granularity (zero / full per contributing mode; the coincident-root point
/// gets its three dilation-invariant choices, plus the non-invariant log-only
/// choice under [`Enumeration::All`]).
pub fn enumerate_extensions(
    op: &ConeOperator,
    spec: &BoundarySpectrum,
    gamma: &Rat,
    p: f64,
    filter: Enumeration,
) -> Result<Vec<Extension>> {
    if op.laplacian_sign().is_none() {
        return Err(Error::UnsupportedOperator("enumerate_extensions"));
    }
    let data = laplace_mode_data(spec, op.n);
    let points = i_gamma(&data, op.n, gamma);
    let mut partial: Vec<Vec<PointSel>> = vec![vec![]];
    for pt in &points {
        let options: Vec<PointSel> = if pt.log_point {
            let mut v = vec![
                PointSel::LogPoint(LogSel::Zero),
                PointSel::LogPoint(LogSel::OmegaOnly),
                PointSel::LogPoint(LogSel::Full),
            ];
            if filter == Enumeration::All {
                v.insert(2, PointSel::LogPoint(LogSel::LogOnly));
            }
            v
        } else {
            let modes: Vec<usize> = pt.entries.iter().map(|&(m, _)| m).collect();
            let mut v = vec![];
            for mask in 0..(1usize << modes.len()) {
                let sel: BTreeMap<usize, ModeChoice> = modes
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| {
                        (m, if mask & (1 << i) != 0 { ModeChoice::Full } else { ModeChoice::Zero })
                    })
                    .collect();
                v.push(PointSel::Simple(sel));
            }
            v
        };
        let mut next = vec![];
        for stem in &partial {
            for opt in &options {
                let mut s = stem.clone();
                s.push(opt.clone());
                next.push(s);
            }
        }
        partial = next;
    }
    Ok(partial
        .into_iter()
        .enumerate()
        .map(|(i, sels)| Extension {
            n: op.n,
            gamma: gamma.clone(),
            p,
            points: points.iter().cloned().zip(sels).collect(),
            label: format!("ext-{i}"),
        })
        .collect())
}

/// Domain of the adjoint of a dilation-invariant extension: weight `-gamma`,
/// dual integrability, orthocomplement selections attached to the mirrored
/// exponents `(n-1) - q`.
pub fn adjoint_extension(spec: &BoundarySpectrum, ext: &Extension) -> Result<Extension> {
    for (_, sel) in &ext.points {
        if matches!(sel, PointSel::LogPoint(LogSel::LogOnly)) {
            return Err(Error::NotDilationInvariant);
        }
    }
    let data = laplace_mode_data(spec, ext.n);
    let minus_gamma = -ext.gamma.clone();
    let dual_p = ext.p / (ext.p - 1.0);
    let mirror_points = i_gamma(&data, ext.n, &minus_gamma);
    let n_minus_1 = Rat::from_integer(BigInt::from(ext.n - 1));
    let points = mirror_points
        .into_iter()
        .map(|pt| {
            // the source point is (n-1) - q
            let source_value = match &pt.value {
                Scalar::Exact(q) => Scalar::Exact(&n_minus_1 - q),
                Scalar::Numeric(z) => Scalar::Numeric(Complex::new(rat_to_f64(&n_minus_1), 0.0) - z),
            };
            let sel = match ext.selection_at(&source_value) {
                Some(PointSel::LogPoint(l)) => PointSel::LogPoint(match l {
                    LogSel::Zero => LogSel::Full,
                    LogSel::Full => LogSel::Zero,
                    LogSel::OmegaOnly => LogSel::OmegaOnly,
                    LogSel::LogOnly => unreachable!(),
                }),
                Some(PointSel::Simple(map)) => PointSel::Simple(
                    pt.entries
                        .iter()
                        .map(|&(m, _)| {
                            let dim = spec.modes[m].multiplicity;
                            let src = map.get(&m).cloned().unwrap_or(ModeChoice::Zero);
                            (m, choice_complement(&src, dim))
                        })
                        .collect(),
                ),
                // exponent absent on the source side defaults to the zero
                // selection there, so the complement is full
                None => {
                    if pt.log_point {
                        PointSel::LogPoint(LogSel::Full)
                    } else {
                        PointSel::Simple(
                            pt.entries.iter().map(|&(m, _)| (m, ModeChoice::Full)).collect(),
                        )
                    }
                }
            };
            (pt, sel)
        })
        .collect();
    Ok(Extension {
        n: ext.n,
        gamma: minus_gamma,
        p: dual_p,
        points,
        label: format!("adjoint({})", ext.label),
    })
}

/// Selection-level equality of two extensions at the same weight.
pub fn extensions_equal(spec: &BoundarySpectrum, a: &Extension, b: &Extension) -> bool {
    if a.gamma != b.gamma || a.points.len() != b.points.len() {
        return false;
    }
    for (pt, sel) in &a.points {
        let other = match b.selection_at(&pt.value) {
            Some(s) => s,
            None => return false,
        };
        let same = match (sel, other) {
            (PointSel::LogPoint(x), PointSel::LogPoint(y)) => x == y,
            (PointSel::Simple(x), PointSel::Simple(y)) => pt.entries.iter().all(|&(m, _)| {
                let dim = spec.modes[m].multiplicity;
                let cx = x.get(&m).cloned().unwrap_or(ModeChoice::Zero);
                let cy = y.get(&m).cloned().unwrap_or(ModeChoice::Zero);
                choices_equal(&cx, &cy, dim)
            }),
            _ => false,
        };
        if !same {
            return false;
        }
    }
    true
}

/// Self-adjointness in the `gamma = 0`, `p = 2` classification.
pub fn is_selfadjoint(spec: &BoundarySpectrum, ext: &Extension) -> Result<bool> {
    if !ext.gamma.is_zero() || (ext.p - 2.0).abs() > 1e-12 {
        return Err(Error::WrongWeight { gamma: ext.gamma_f64(), p: ext.p });
    }
    let adj = adjoint_extension(spec, ext)?;
    Ok(extensions_equal(spec, ext, &adj))
}

/// All self-adjoint dilation-invariant extensions at `gamma = 0`, `p = 2`.
pub fn selfadjoint_extensions(op: &ConeOperator, spec: &BoundarySpectrum) -> Result<Vec<Extension>> {
    let zero = Rat::zero();
    let all = enumerate_extensions(op, spec, &zero, 2.0, Enumeration::DilationInvariant)?;
    let mut out = vec![];
    for e in all {
        if is_selfadjoint(spec, &e)? {
            out.push(e);
        }
    }
    Ok(out)
}

/// The Friedrichs extension at `gamma = 0`, `p = 2`: for a two-dimensional
/// base everything below 0 plus the omega-span at 0; otherwise everything up
/// to `(n-1)/2`.
pub fn friedrichs_domain(spec: &BoundarySpectrum, n: i64) -> Extension {
    let data = laplace_mode_data(spec, n);
    let zero = Rat::zero();
    let half = Rat::new(BigInt::from(n - 1), BigInt::from(2));
    let points = i_gamma(&data, n, &zero)
        .into_iter()
        .map(|pt| {
            let sel = if pt.log_point {
                PointSel::LogPoint(LogSel::OmegaOnly)
            } else {
                let keep = match &pt.value {
                    Scalar::Exact(q) => {
                        if n == 1 {
                            q < &zero
                        } else {
                            q <= &half
                        }
                    }
                    Scalar::Numeric(z) => {
                        if n == 1 {
                            z.re < 0.0
                        } else {
                            z.re <= rat_to_f64(&half) + POLE_CLUSTER_TOL
                        }
                    }
                };
                let choice = if keep { ModeChoice::Full } else { ModeChoice::Zero };
                PointSel::Simple(pt.entries.iter().map(|&(m, _)| (m, choice.clone())).collect())
            };
            (pt, sel)
        })
        .collect();
    Extension { n, gamma: zero, p: 2.0, points, label: "friedrichs".into() }
}

/// How the minimal domain sits in the weighted Sobolev scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimalKind {
    /// Exactly the weighted Sobolev space of order `mu`, weight `gamma + mu`.
    MinimalPlain,
    /// Conormal roots on the critical line force the epsilon-family.
    MinimalWithEpsLoss,
}

#[derive(Clone, Debug)]
pub struct DomainDescription {
    pub kind: MinimalKind,
    pub sobolev_order: usize,
    pub weight: f64,
    /// Conormal roots sitting on `Re z = (n+1)/2 - gamma - mu`.
    pub critical_line_roots: Vec<(usize, Scalar)>,
}

/// Description of the closure's domain at weight `gamma`.
pub fn minimal_domain(
    op: &ConeOperator,
    spec: &BoundarySpectrum,
    gamma: &Rat,
    _p: f64,
) -> Result<DomainDescription> {
    let sym = conormal::conormal_symbol(op, spec)?;
    let line = critical_line(op.n, gamma, op.mu);
    let mut on_line = vec![];
    for (mode, poly) in sym.mode_polys.iter().enumerate() {
        for (root, _) in conormal::roots_of(poly) {
            let hit = match &root {
                Scalar::Exact(q) => q == &line,
                Scalar::Numeric(z) => (z.re - rat_to_f64(&line)).abs() <= POLE_CLUSTER_TOL,
            };
            if hit {
                on_line.push((mode, root));
            }
        }
    }
    Ok(DomainDescription {
        kind: if on_line.is_empty() { MinimalKind::MinimalPlain } else { MinimalKind::MinimalWithEpsLoss },
        sobolev_order: op.mu,
        weight: rat_to_f64(gamma) + op.mu as f64,
        critical_line_roots: on_line,
    })
}

/// `Re z = (n+1)/2 - gamma - mu`.
pub fn critical_line(n: i64, gamma: &Rat, mu: usize) -> Rat {
    Rat::new(BigInt::from(n + 1), BigInt::from(2)) - gamma - Rat::from_integer(BigInt::from(mu as i64))
}

/// One basis atom `omega t^{-q} log^k t` on a mode.
#[derive(Clone, Debug)]
pub struct Atom {
    pub mode: usize,
    pub q: Scalar,
    pub log_power: usize,
}

/// Basis generator of the asymptotics space: a linear combination of atoms.
#[derive(Clone, Debug)]
pub struct Generator {
    pub terms: Vec<(Atom, Complex)>,
}

#[derive(Clone, Debug)]
pub struct AsymptoticEntry {
    pub q: Scalar,
    /// Highest `log` power present at this exponent.
    pub log_powers: usize,
    pub modes: Vec<usize>,
    /// Whether some generator ties this exponent to another one.
    pub coupled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Directness {
    Direct,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct AsymptoticSpace {
    pub n: i64,
    pub mu: usize,
    pub gamma: f64,
    pub entries: Vec<AsymptoticEntry>,
    pub generators: Vec<Generator>,
    pub dim: usize,
    pub critical_line_poles: Vec<(usize, Scalar)>,
    pub directness: Directness,
}

/// Maximal-domain asymptotics at weight `gamma`, from the recursion symbols.
pub fn maximal_domain_asymptotics(
    op: &ConeOperator,
    spec: &BoundarySpectrum,
    gamma: &Rat,
) -> Result<AsymptoticSpace> {
    let seq = conormal::g_recursion(&conormal::taylor_sequence(op, spec)?)?;
    let mu = op.mu;
    let n = op.n;
    // weight lines L_k = (n+1)/2 - gamma - mu + k, k = 0..=mu
    let lines: Vec<Rat> = (0..=mu)
        .map(|k| critical_line(n, gamma, mu) + Rat::from_integer(BigInt::from(k as i64)))
        .collect();

    // classify Re p into a window index:
    //   window 0: strictly between L_0 and L_1;
    //   window k >= 1: L_k <= Re p < L_{k+1};
    //   on L_0 or at/above L_mu: none.
    let window_of = |p: &Scalar| -> Option<usize> {
        let close = |line: &Rat| match p {
            Scalar::Exact(q) => q == line,
            Scalar::Numeric(z) => (z.re - rat_to_f64(line)).abs() <= POLE_CLUSTER_TOL,
        };
        for (k, line) in lines.iter().enumerate() {
            if close(line) {
                return if k == 0 || k == mu { None } else { Some(k) };
            }
        }
        let re = p.value().re;
        if re <= rat_to_f64(&lines[0]) || re >= rat_to_f64(&lines[mu]) {
            return None;
        }
        (0..mu).find(|&k| re > rat_to_f64(&lines[k]) && re < rat_to_f64(&lines[k + 1]))
    };

    struct Contribution {
        mode: usize,
        t_power: usize,
        window: usize,
        pole: conormal::PoleData,
    }
    let mut contributions = vec![];
    let mut critical_poles = vec![];
    let modes = spec.len();
    for l in 0..mu {
        for m in 0..modes {
            let g = &seq.g[l][m];
            if g.is_zero() {
                continue;
            }
            let mm = conormal::ModeMeromorphic::from_ratfn(m, g);
            for pole in mm.poles {
                if l == 0 {
                    let on_l0 = match &pole.location {
                        Scalar::Exact(q) => q == &lines[0],
                        Scalar::Numeric(z) => (z.re - rat_to_f64(&lines[0])).abs() <= POLE_CLUSTER_TOL,
                    };
                    if on_l0 {
                        critical_poles.push((m, pole.location.clone()));
                    }
                }
                if let Some(w) = window_of(&pole.location) {
                    if l <= w {
                        contributions.push(Contribution { mode: m, t_power: l, window: w, pole });
                    }
                }
            }
        }
    }

    // Atoms index the output basis; columns of the generator matrix are
    // (window, mode, pole, derivative-order) jet coordinates.  Distinct
    // windows get independent inputs, while within a window all t-powers
    // share the same input — that sharing is what produces couplings.
    let mut atoms: Vec<Atom> = vec![];
    let mut atom_index = |atoms: &mut Vec<Atom>, mode: usize, q: &Scalar, lp: usize| -> usize {
        if let Some(i) = atoms
            .iter()
            .position(|a| a.mode == mode && a.log_power == lp && scalar_close(&a.q, q))
        {
            return i;
        }
        atoms.push(Atom { mode, q: q.clone(), log_power: lp });
        atoms.len() - 1
    };
    struct JetKey {
        window: usize,
        mode: usize,
        p: Complex,
        d: usize,
    }
    let mut jets: Vec<JetKey> = vec![];
    let mut columns: Vec<BTreeMap<usize, Complex>> = vec![];
    let mut exact_columns: Vec<BTreeMap<usize, Rat>> = vec![];
    let mut all_exact = true;

    for c in &contributions {
        let order = c.pole.order;
        let p_shift = match &c.pole.location {
            Scalar::Exact(q) => Scalar::Exact(q - Rat::from_integer(BigInt::from(c.t_power as i64))),
            Scalar::Numeric(z) => Scalar::Numeric(z - Complex::new(c.t_power as f64, 0.0)),
        };
        for lp in 0..order {
            let ai = atom_index(&mut atoms, c.mode, &p_shift, lp);
            for d in 0..(order - lp) {
                let pv = c.pole.location.value();
                let ji = match jets.iter().position(|j| {
                    j.window == c.window && j.mode == c.mode && j.d == d && (j.p - pv).norm() <= POLE_CLUSTER_TOL
                }) {
                    Some(i) => i,
                    None => {
                        jets.push(JetKey { window: c.window, mode: c.mode, p: pv, d });
                        columns.push(BTreeMap::new());
                        exact_columns.push(BTreeMap::new());
                        jets.len() - 1
                    }
                };
                // zeta_{p,lp} weights R_{p, lp+d} by (-1)^lp / (lp! d!)
                let r = &c.pole.principal[lp + d];
                let fact = |k: usize| (1..=k).product::<usize>() as f64;
                let sign = if lp % 2 == 0 { 1.0 } else { -1.0 };
                let wgt = sign / (fact(lp) * fact(d));
                *columns[ji].entry(ai).or_insert(Complex::new(0.0, 0.0)) += r.value() * wgt;
                match r.as_exact() {
                    Some(rv) => {
                        let wr = Rat::new(
                            BigInt::from(if lp % 2 == 0 { 1i64 } else { -1 }),
                            BigInt::from(((1..=lp).product::<usize>().max(1) * (1..=d).product::<usize>().max(1)) as i64),
                        ) * rv;
                        let e = exact_columns[ji].entry(ai).or_insert_with(Rat::zero);
                        *e += wr;
                    }
                    None => all_exact = false,
                }
            }
        }
    }

    // Row-reduce the columns (as vectors over atoms) to a canonical basis.
    let n_atoms = atoms.len();
    let generators: Vec<Generator> = if all_exact {
        let mut rows: Vec<Vec<Rat>> = exact_columns
            .iter()
            .map(|col| {
                let mut v = vec![Rat::zero(); n_atoms];
                for (&ai, val) in col {
                    v[ai] = val.clone();
                }
                v
            })
            .collect();
        rref_exact(&mut rows);
        rows.into_iter()
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .map(|r| Generator {
                terms: r
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (atoms[i].clone(), Complex::new(rat_to_f64(x), 0.0)))
                    .collect(),
            })
            .collect()
    } else {
        let mut rows: Vec<Vec<Complex>> = columns
            .iter()
            .map(|col| {
                let mut v = vec![Complex::new(0.0, 0.0); n_atoms];
                for (&ai, val) in col {
                    v[ai] = *val;
                }
                v
            })
            .collect();
        rref_numeric(&mut rows, 1e-9);
        rows.into_iter()
            .filter(|r| r.iter().any(|x| x.norm() > 1e-9))
            .map(|r| Generator {
                terms: r
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| x.norm() > 1e-9)
                    .map(|(i, x)| (atoms[i].clone(), *x))
                    .collect(),
            })
            .collect()
    };

    // Aggregate entries per exponent value.
    let mut entries: Vec<AsymptoticEntry> = vec![];
    for g in &generators {
        let coupled = {
            let mut qs: Vec<Complex> = g.terms.iter().map(|(a, _)| a.q.value()).collect();
            qs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            qs.dedup_by(|a, b| (*a - *b).norm() <= POLE_CLUSTER_TOL);
            qs.len() > 1
        };
        for (a, _) in &g.terms {
            match entries.iter_mut().find(|e| scalar_close(&e.q, &a.q)) {
                Some(e) => {
                    e.log_powers = e.log_powers.max(a.log_power);
                    if !e.modes.contains(&a.mode) {
                        e.modes.push(a.mode);
                    }
                    e.coupled |= coupled;
                }
                None => entries.push(AsymptoticEntry {
                    q: a.q.clone(),
                    log_powers: a.log_power,
                    modes: vec![a.mode],
                    coupled,
                }),
            }
        }
    }
    entries.sort_by(|a, b| a.q.value().re.partial_cmp(&b.q.value().re).unwrap());

    // Multiplicity-weighted dimension: each scalar generator acts on the
    // eigenspace of its modes.
    let dim: usize = generators
        .iter()
        .map(|g| {
            g.terms
                .iter()
                .map(|(a, _)| spec.modes[a.mode].multiplicity)
                .max()
                .unwrap_or(1)
        })
        .sum();

    let directness = if op.has_constant_coefficients() || critical_poles.is_empty() {
        Directness::Direct
    } else {
        Directness::Unknown
    };

    Ok(AsymptoticSpace {
        n,
        mu,
        gamma: rat_to_f64(gamma),
        entries,
        generators,
        dim,
        critical_line_poles: critical_poles,
        directness,
    })
}

fn rref_exact(rows: &mut [Vec<Rat>]) {
    let nrows = rows.len();
    if nrows == 0 {
        return;
    }
    let ncols = rows[0].len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row >= nrows {
            break;
        }
        let Some(sel) = (pivot_row..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, sel);
        let inv = Rat::one() / rows[pivot_row][col].clone();
        for c in col..ncols {
            rows[pivot_row][c] = &rows[pivot_row][c] * &inv;
        }
        for r in 0..nrows {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..ncols {
                    let sub = &rows[pivot_row][c] * &f;
                    rows[r][c] = &rows[r][c] - &sub;
                }
            }
        }
        pivot_row += 1;
    }
}

fn rref_numeric(rows: &mut [Vec<Complex>], tol: f64) {
    let nrows = rows.len();
    if nrows == 0 {
        return;
    }
    let ncols = rows[0].len();
    let mut pivot_row = 0;
    for col in 0..ncols {
        if pivot_row >= nrows {
            break;
        }
        let sel = (pivot_row..nrows)
            .max_by(|&a, &b| rows[a][col].norm().partial_cmp(&rows[b][col].norm()).unwrap())
            .unwrap();
        if rows[sel][col].norm() <= tol {
            continue;
        }
        rows.swap(pivot_row, sel);
        let inv = Complex::new(1.0, 0.0) / rows[pivot_row][col];
        for c in col..ncols {
            rows[pivot_row][c] *= inv;
        }
        for r in 0..nrows {
            if r != pivot_row && rows[r][col].norm() > 0.0 {
                let f = rows[r][col];
                for c in col..ncols {
                    let sub = rows[pivot_row][c] * f;
                    rows[r][c] -= sub;
                }
            }
        }
        pivot_row += 1;
    }
}

/// A finite combination `sum_k c_k omega(t) t^{-q_k} log^{j_k} t` on one mode,
/// as fed to the boundary pairing.
#[derive(Clone, Debug)]
pub struct BracketElement {
    pub mode: usize,
    pub terms: Vec<(f64, usize, Complex)>,
}

impl BracketElement {
    pub fn single(mode: usize, q: f64, log_power: usize) -> Self {
        BracketElement { mode, terms: vec![(q, log_power, Complex::new(1.0, 0.0))] }
    }

    fn eval(&self, t: f64) -> Complex {
        let w = cutoff::omega(t);
        if w == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        let lg = t.ln();
        self.terms
            .iter()
            .map(|&(q, k, c)| c * w * t.powf(-q) * lg.powi(k as i32))
            .sum()
    }

    /// The Laplacian applied to this element on its mode (eigenvalue `lam`):
    /// `u'' + (n/t) u' + (lam/t^2) u` with the cut-off differentiated exactly.
    fn eval_laplace(&self, t: f64, n: i64, lam: f64) -> Complex {
        let w = cutoff::omega(t);
        let w1 = cutoff::omega_d1(t);
        let w2 = cutoff::omega_d2(t);
        let lg = t.ln();
        let lg_pows = |j: i32| if j < 0 { 0.0 } else { lg.powi(j) };
        let mut acc = Complex::new(0.0, 0.0);
        for &(q, k, c) in &self.terms {
            let kf = k as f64;
            let pw = t.powf(-q);
            let phi = pw * lg_pows(k as i32);
            let phi1 = pw / t * (-q * lg_pows(k as i32) + kf * lg_pows(k as i32 - 1));
            let phi2 = pw / (t * t)
                * (q * (q + 1.0) * lg_pows(k as i32)
                    - kf * (2.0 * q + 1.0) * lg_pows(k as i32 - 1)
                    + kf * (kf - 1.0) * lg_pows(k as i32 - 2));
            let u2 = w2 * phi + 2.0 * w1 * phi1 + w * phi2;
            let u1 = w1 * phi + w * phi1;
            let u0 = w * phi;
            acc += c * (u2 + (n as f64 / t) * u1 + (lam / (t * t)) * u0);
        }
        acc
    }
}

/// Boundary pairing `<Lap u, v> - <u, Lap v>` in the pivot inner product
/// (radial measure `t^n dt`; eigenfunction factors are orthonormal, so
/// cross-mode brackets vanish identically).
pub fn pairing_bracket(
    spec: &BoundarySpectrum,
    n: i64,
    u: &BracketElement,
    v: &BracketElement,
) -> Result<Complex> {
    if u.mode != v.mode {
        return Ok(Complex::new(0.0, 0.0));
    }
    let lam = spec.modes[u.mode].eigenvalue_f64();
    // does Lap(omega t^{-q} log^k) vanish identically near 0?
    let indicial = |q: f64, k: usize| -> bool {
        let sigma = q * q - (n as f64 - 1.0) * q + lam;
        let sigma1 = 2.0 * q - (n as f64 - 1.0);
        match k {
            0 => sigma.abs() < 1e-12,
            1 => sigma.abs() < 1e-12 && sigma1.abs() < 1e-12,
            _ => false,
        }
    };
    let mut singular = false;
    for &(qu, ku, _) in &u.terms {
        for &(qv, kv, _) in &v.terms {
            if !indicial(qu, ku) || !indicial(qv, kv) {
                // worst near-zero power of the integrand including measure
                let expo = n as f64 - qu - qv - 2.0;
                if expo <= -1.0 + 1e-12 {
                    return Err(Error::QuadratureFailure(format!(
                        "non-integrable bracket: exponents ({qu}, {qv}) leave t^{expo} at 0"
                    )));
                }
                singular = true;
            }
        }
    }
    let f = |t: f64| -> Complex {
        let lap_u = u.eval_laplace(t, n, lam);
        let lap_v = v.eval_laplace(t, n, lam);
        (lap_u * v.eval(t).conj() - u.eval(t) * lap_v.conj()) * t.powi(n as i32)
    };
    if singular {
        let g = |s: f64| {
            let t = s.exp();
            f(t) * t
        };
        let val = quad::checked_simpson(g, (1e-7f64).ln(), 0.0, 1e-12)?;
        Ok(val)
    } else {
        // integrand supported where the cut-off varies
        let val = quad::checked_simpson(
            f,
            cutoff::OMEGA_ONE_UNTIL - 0.01,
            cutoff::OMEGA_ZERO_FROM + 0.01,
            1e-12,
        )?;
        Ok(val)
    }
}

/// Membership window `[wl, wr)` for admissibility decisions at weight
/// `gamma`: `wl = (n+1)/2 - gamma - 2`, `wr = (n+1)/2 - gamma`.
pub fn weight_window(n: i64, gamma: &Rat) -> (f64, f64) {
    let wl = rat_to_f64(&critical_line(n, gamma, 2));
    (wl, wl + 2.0)
}

/// Is the single component `omega t^{-q} log^k` (on `mode`) contained in the
/// extension's domain?  Below the window it sits in the minimal domain, on
/// the lower edge it needs an indicial root of sufficient multiplicity, in
/// the window it must be covered by the selection, at or above the upper
/// edge it is never in the base space.
pub fn component_admissible(
    data: &[ModeRootData],
    ext: &Extension,
    q: f64,
    log_power: usize,
    mode: usize,
) -> bool {
    let tol = 1e-9;
    let (wl, wr) = weight_window(ext.n, &ext.gamma);
    if q >= wr - tol {
        return false;
    }
    if q < wl - tol {
        return true;
    }
    let d = &data[mode];
    if (q - wl).abs() <= tol {
        // on the critical line: needs root multiplicity exceeding the log power
        let mult = if d.double && (q - d.q_plus.value().re).abs() <= tol {
            2
        } else if (q - d.q_plus.value().re).abs() <= tol || (q - d.q_minus.value().re).abs() <= tol {
            1
        } else {
            0
        };
        return mult > log_power;
    }
    // inside the window: selection must cover (mode, log_power)
    let probe = Scalar::Numeric(Complex::new(q, 0.0));
    match ext.selection_at(&probe) {
        None => false,
        Some(PointSel::LogPoint(l)) => match log_power {
            0 => matches!(l, LogSel::OmegaOnly | LogSel::Full),
            1 => matches!(l, LogSel::LogOnly | LogSel::Full),
            _ => false,
        },
        Some(PointSel::Simple(map)) => {
            if log_power > 0 {
                return false;
            }
            matches!(map.get(&mode), Some(ModeChoice::Full))
        }
    }
}

/// The two fundamental near-zero behaviours of the mode equation with their
/// component lists `(q, log_power)`.
#[derive(Clone, Debug)]
pub struct ModeDirections {
    pub plus: Vec<(f64, usize)>,
    pub minus: Vec<(f64, usize)>,
}

pub fn mode_directions(d: &ModeRootData) -> ModeDirections {
    let qp = d.q_plus.value().re;
    let qm = d.q_minus.value().re;
    if d.double {
        // log case: the singular direction normalises to a pure log profile
        // (constant admixtures are absorbed into the regular direction)
        ModeDirections { plus: vec![(qp, 1)], minus: vec![(qm, 0)] }
    } else if d.exact_nu.as_ref().map_or(false, |nu| nu.is_integer()) {
        // resonant integer separation: the singular direction drags an
        // intrinsic log partner at the regular exponent; the log-free part
        // there is removable
        ModeDirections { plus: vec![(qp, 0), (qm, 1)], minus: vec![(qm, 0)] }
    } else {
        ModeDirections { plus: vec![(qp, 0)], minus: vec![(qm, 0)] }
    }
}

/// Count of admissible fundamental directions at 0 for a mode.
pub fn admissible_direction_count(data: &[ModeRootData], ext: &Extension, mode: usize) -> usize {
    let dirs = mode_directions(&data[mode]);
    let adm = |comps: &[(f64, usize)]| {
        comps
            .iter()
            .all(|&(q, lp)| component_admissible(data, ext, q, lp, mode))
    };
    adm(&dirs.plus) as usize + adm(&dirs.minus) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundarySpectrum;
    use crate::operator::ConeOperator;

    fn rat(x: f64) -> Rat {
        crate::rat_from_f64(x).unwrap()
    }

    fn circle_ext_points(gamma: f64) -> Vec<f64> {
        let spec = BoundarySpectrum::circle(4);
        let data = laplace_mode_data(&spec, 1);
        i_gamma(&data, 1, &rat(gamma)).iter().map(|p| p.value.value().re).collect()
    }

    #[test]
    fn i_gamma_circle() {
        assert_eq!(circle_ext_points(0.0), vec![0.0]);
        assert_eq!(circle_ext_points(0.5), vec![-1.0, 0.0]);
        assert_eq!(circle_ext_points(-0.5), vec![0.0, 1.0]);
    }

    #[test]
    fn i_gamma_sphere_s3_empty() {
        // q values for S^3 are {l+2} and {-l}: nothing in ]0,2[
        let spec = BoundarySpectrum::sphere(3, 4);
        let data = laplace_mode_data(&spec, 3);
        assert!(i_gamma(&data, 3, &Rat::zero()).is_empty());
        // sanity: the roots of mode l=1 are exactly {3, -1}
        assert_eq!(data[1].q_plus.value().re, 3.0);
        assert_eq!(data[1].q_minus.value().re, -1.0);
    }

    #[test]
    fn enumerate_counts() {
        let spec = BoundarySpectrum::circle(4);
        let op = ConeOperator::laplacian(1);
        let exts =
            enumerate_extensions(&op, &spec, &Rat::zero(), 2.0, Enumeration::DilationInvariant).unwrap();
        assert_eq!(exts.len(), 3);
        let all = enumerate_extensions(&op, &spec, &Rat::zero(), 2.0, Enumeration::All).unwrap();
        assert_eq!(all.len(), 4);
        // S^3 at gamma=0: empty interval, single (trivial) extension
        let s3 = BoundarySpectrum::sphere(3, 4);
        let exts3 = enumerate_extensions(
            &ConeOperator::laplacian(3),
            &s3,
            &Rat::zero(),
            2.0,
            Enumeration::DilationInvariant,
        )
        .unwrap();
        assert_eq!(exts3.len(), 1);
        // non-Laplacian preset refused
        assert!(matches!(
            enumerate_extensions(
                &ConeOperator::example_abcd(),
                &spec,
                &Rat::zero(),
                2.0,
                Enumeration::DilationInvariant
            ),
            Err(Error::UnsupportedOperator(_))
        ));
    }

    #[test]
    fn adjoint_log_point_rules() {
        let spec = BoundarySpectrum::circle(4);
        let data = laplace_mode_data(&spec, 1);
        let mk = |l: LogSel| {
            let pts = i_gamma(&data, 1, &Rat::zero());
            Extension {
                n: 1,
                gamma: Rat::zero(),
                p: 2.0,
                points: pts.into_iter().map(|pt| (pt, PointSel::LogPoint(l))).collect(),
                label: "t".into(),
            }
        };
        let adj = adjoint_extension(&spec, &mk(LogSel::OmegaOnly)).unwrap();
        assert!(matches!(adj.points[0].1, PointSel::LogPoint(LogSel::OmegaOnly)));
        let adj = adjoint_extension(&spec, &mk(LogSel::Zero)).unwrap();
        assert!(matches!(adj.points[0].1, PointSel::LogPoint(LogSel::Full)));
        assert!(matches!(
            adjoint_extension(&spec, &mk(LogSel::LogOnly)),
            Err(Error::NotDilationInvariant)
        ));
    }

    #[test]
    fn minimal_adjoint_is_maximal() {
        let spec = BoundarySpectrum::circle(4);
        let data = laplace_mode_data(&spec, 1);
        for gamma in [0.0, 0.5, -0.5] {
            let g = rat(gamma);
            let min = Extension::minimal(&data, 1, &g, 2.0);
            let adj = adjoint_extension(&spec, &min).unwrap();
            assert!(adj.is_maximal_selection(), "gamma={gamma}");
        }
    }

    #[test]
    fn biduality_over_enumerations() {
        for (n, spec) in [(1i64, BoundarySpectrum::circle(4)), (2, BoundarySpectrum::sphere(2, 4))] {
            let op = ConeOperator::laplacian(n);
            for gamma in [-0.5, 0.0, 0.5] {
                let g = rat(gamma);
                for ext in
                    enumerate_extensions(&op, &spec, &g, 2.0, Enumeration::DilationInvariant).unwrap()
                {
                    let back =
                        adjoint_extension(&spec, &adjoint_extension(&spec, &ext).unwrap()).unwrap();
                    assert!(extensions_equal(&spec, &ext, &back), "n={n} gamma={gamma} {}", ext.label);
                }
            }
        }
    }

    #[test]
    fn proper_subspace_biduality() {
        // a 1-dimensional slice of the 3-dimensional l=1 eigenspace on S^2;
        // its exponent q = -1 enters the interval once gamma > 1/2
        let spec = BoundarySpectrum::sphere(2, 4);
        let data = laplace_mode_data(&spec, 2);
        let dir = vec![vec![
            Complex::new(1.0 / 2f64.sqrt(), 0.0),
            Complex::new(0.0, 1.0 / 2f64.sqrt()),
            Complex::new(0.0, 0.0),
        ]];
        let gamma = rat(0.75);
        let mut points = i_gamma(&data, 2, &gamma);
        assert!(points.iter().any(|p| p.value.value().re == -1.0));
        let sels: Vec<PointSel> = points
            .iter()
            .map(|pt| {
                let q = pt.value.value().re;
                PointSel::Simple(
                    pt.entries
                        .iter()
                        .map(|&(m, _)| {
                            (m, if q == -1.0 { ModeChoice::Proper(dir.clone()) } else { ModeChoice::Zero })
                        })
                        .collect(),
                )
            })
            .collect();
        let ext = Extension {
            n: 2,
            gamma,
            p: 2.0,
            points: points.drain(..).zip(sels).collect(),
            label: "proper".into(),
        };
        let back = adjoint_extension(&spec, &adjoint_extension(&spec, &ext).unwrap()).unwrap();
        assert!(extensions_equal(&spec, &ext, &back));
    }

    #[test]
    fn selfadjoint_classification_circle() {
        let spec = BoundarySpectrum::circle(4);
        let op = ConeOperator::laplacian(1);
        let sa = selfadjoint_extensions(&op, &spec).unwrap();
        assert_eq!(sa.len(), 1);
        assert!(matches!(sa[0].points[0].1, PointSel::LogPoint(LogSel::OmegaOnly)));
        // minimal is not selfadjoint when the interval is nonempty
        let data = laplace_mode_data(&spec, 1);
        let min = Extension::minimal(&data, 1, &Rat::zero(), 2.0);
        assert!(!is_selfadjoint(&spec, &min).unwrap());
        // wrong weight errors
        let bad = Extension::minimal(&data, 1, &rat(0.5), 2.0);
        assert!(matches!(is_selfadjoint(&spec, &bad), Err(Error::WrongWeight { .. })));
    }

    #[test]
    fn friedrichs_is_selfadjoint() {
        for (n, spec) in [
            (1i64, BoundarySpectrum::circle(4)),
            (2, BoundarySpectrum::sphere(2, 4)),
            (3, BoundarySpectrum::sphere(3, 4)),
        ] {
            let fr = friedrichs_domain(&spec, n);
            assert!(is_selfadjoint(&spec, &fr).unwrap(), "n={n}");
        }
    }

    #[test]
    fn friedrichs_sphere_structure() {
        // n=2: interval holds {0, 1}; keep q=0 full, q=1 zero
        let spec = BoundarySpectrum::sphere(2, 4);
        let fr = friedrichs_domain(&spec, 2);
        assert_eq!(fr.points.len(), 2);
        for (pt, sel) in &fr.points {
            let q = pt.value.value().re;
            match sel {
                PointSel::Simple(map) => {
                    if q == 0.0 {
                        assert!(map.values().all(|c| matches!(c, ModeChoice::Full)));
                    } else {
                        assert_eq!(q, 1.0);
                        assert!(map.values().all(|c| matches!(c, ModeChoice::Zero)));
                    }
                }
                _ => panic!("unexpected log point"),
            }
        }
    }

    #[test]
    fn minimal_domain_kinds() {
        let circle = BoundarySpectrum::circle(4);
        // circle Laplacian at gamma=0: root -1 sits on the critical line
        let d = minimal_domain(&ConeOperator::laplacian(1), &circle, &Rat::zero(), 2.0).unwrap();
        assert_eq!(d.kind, MinimalKind::MinimalWithEpsLoss);
        assert_eq!(d.sobolev_order, 2);
        assert_eq!(d.weight, 2.0);
        // the example operator has even roots only: plain
        let d = minimal_domain(&ConeOperator::example_abcd(), &circle, &Rat::zero(), 2.0).unwrap();
        assert_eq!(d.kind, MinimalKind::MinimalPlain);
        // sphere: no root with real part 1/2
        let sphere = BoundarySpectrum::sphere(2, 6);
        let d = minimal_domain(&ConeOperator::laplacian(2), &sphere, &Rat::zero(), 2.0).unwrap();
        assert_eq!(d.kind, MinimalKind::MinimalPlain);
    }

    #[test]
    fn abcd_asymptotics_span() {
        let spec = BoundarySpectrum::circle(4);
        let e = maximal_domain_asymptotics(&ConeOperator::example_abcd(), &spec, &Rat::zero()).unwrap();
        assert_eq!(e.dim, 2);
        assert_eq!(e.generators.len(), 2);
        // basis after reduction: {omega, omega(t + log t)}
        let mut descr: Vec<Vec<(f64, usize, f64)>> = e
            .generators
            .iter()
            .map(|g| {
                let mut v: Vec<(f64, usize, f64)> =
                    g.terms.iter().map(|(a, c)| (a.q.value().re, a.log_power, c.re)).collect();
                v.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
                v
            })
            .collect();
        descr.sort_by_key(|v| v.len());
        assert_eq!(descr[0], vec![(0.0, 0, 1.0)]); // omega
        assert_eq!(descr[1], vec![(-1.0, 0, 1.0), (0.0, 1, 1.0)]); // omega (t + log t)
        assert!(e.entries.iter().any(|en| en.q.value().re == -1.0 && en.coupled));
    }

    #[test]
    fn laplacian_asymptotics_log_pair() {
        let spec = BoundarySpectrum::circle(4);
        let e = maximal_domain_asymptotics(&ConeOperator::laplacian(1), &spec, &Rat::zero()).unwrap();
        assert_eq!(e.dim, 2);
        assert_eq!(e.entries.len(), 1);
        assert_eq!(e.entries[0].q.value().re, 0.0);
        assert_eq!(e.entries[0].log_powers, 1);
        assert_eq!(e.entries[0].modes, vec![0]);
        assert!(!e.entries[0].coupled);
        assert_eq!(e.directness, Directness::Direct);
    }

    #[test]
    fn constant_coefficient_dimension_matches_pole_count() {
        // dim E equals multiplicity-weighted pole count in the open strip
        for (n, spec) in [
            (0i64, BoundarySpectrum::point()),
            (1, BoundarySpectrum::circle(4)),
            (2, BoundarySpectrum::sphere(2, 4)),
        ] {
            let op = ConeOperator::laplacian(n);
            let gamma = Rat::zero();
            let e = maximal_domain_asymptotics(&op, &spec, &gamma).unwrap();
            let sym = conormal::conormal_symbol(&op, &spec).unwrap();
            let line = rat_to_f64(&critical_line(n, &gamma, 2));
            let mut count = 0usize;
            for (mode, poly) in sym.mode_polys.iter().enumerate() {
                for (root, order) in conormal::roots_of(poly) {
                    let re = root.value().re;
                    if re > line + 1e-12 && re < line + 2.0 - 1e-12 {
                        count += order * spec.modes[mode].multiplicity;
                    }
                }
            }
            assert_eq!(e.dim, count, "n={n}");
        }
    }

    #[test]
    fn empty_strip_empty_space() {
        let spec = BoundarySpectrum::sphere(3, 4);
        let e = maximal_domain_asymptotics(&ConeOperator::laplacian(3), &spec, &Rat::zero()).unwrap();
        assert_eq!(e.dim, 0);
        assert!(e.entries.is_empty());
    }

    #[test]
    fn bracket_orthogonality_cases() {
        let spec = BoundarySpectrum::circle(4);
        // same exponent, same mode -> zero
        let u = BracketElement::single(1, 1.0, 0);
        let b = pairing_bracket(&spec, 1, &u, &u).unwrap();
        assert!(b.norm() < 1e-10, "{b}");
        // different modes -> exactly zero
        let v = BracketElement::single(2, 2.0, 0);
        assert_eq!(pairing_bracket(&spec, 1, &u, &v).unwrap(), Complex::new(0.0, 0.0));
        // log pair: value -(conj(c0) d - conj(d0) c)
        let log_u = BracketElement { mode: 0, terms: vec![(0.0, 1, Complex::new(1.0, 0.0))] }; // d=1
        let const_v = BracketElement::single(0, 0.0, 0); // c0=1
        let b = pairing_bracket(&spec, 1, &log_u, &const_v).unwrap();
        assert!((b - Complex::new(-1.0, 0.0)).norm() < 1e-9, "{b}");
        // mirror-exponent pair on the same eigenvector direction does NOT
        // vanish; this is the pairing the adjoint construction excludes
        let w = BracketElement::single(1, -1.0, 0);
        let b = pairing_bracket(&spec, 1, &u, &w).unwrap();
        assert!((b - Complex::new(2.0, 0.0)).norm() < 1e-9, "{b}");
    }

    #[test]
    fn bracket_matches_closed_form() {
        // <Lap u, v> - <u, Lap v> = 2 (q_v - q_u) Int omega omega' t^{n - q_u - q_v - 1} dt
        let spec = BoundarySpectrum::custom(&[(0.0, 1), (-1.0, 2), (-4.0, 2), (-9.0, 2)], 1).unwrap();
        let n = 1i64;
        let u = BracketElement::single(1, 1.0, 0);
        let v = BracketElement::single(1, -1.0, 0);
        let direct = pairing_bracket(&spec, n, &u, &v).unwrap();
        let closed = quad::adaptive_simpson(
            |t| {
                Complex::new(
                    2.0 * (-1.0 - 1.0)
                        * cutoff::omega(t)
                        * cutoff::omega_d1(t)
                        * t.powf(n as f64 - 1.0 - (-1.0) - 1.0),
                    0.0,
                )
            },
            0.2,
            0.8,
            1e-13,
        );
        assert!((direct - closed).norm() < 1e-9, "{direct} vs {closed}");
    }

    #[test]
    fn bracket_non_integrable_reported() {
        let spec = BoundarySpectrum::circle(4);
        // q = 1.7 is not an indicial root on mode 0, and the pair leaves a
        // non-integrable power at zero
        let u = BracketElement::single(0, 1.7, 0);
        assert!(matches!(pairing_bracket(&spec, 1, &u, &u), Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn admissibility_window_rules() {
        let spec = BoundarySpectrum::circle(4);
        let data = laplace_mode_data(&spec, 1);
        let fr = friedrichs_domain(&spec, 1);
        // constants admissible under the omega-only selection, log is not
        assert!(component_admissible(&data, &fr, 0.0, 0, 0));
        assert!(!component_admissible(&data, &fr, 0.0, 1, 0));
        // t^{+1} on mode 1 sits on the critical line and is a simple root
        assert!(component_admissible(&data, &fr, -1.0, 0, 1));
        assert!(!component_admissible(&data, &fr, -1.0, 1, 1));
        // t^{-1} on mode 1 is at the upper edge: excluded
        assert!(!component_admissible(&data, &fr, 1.0, 0, 1));
        // direction counts: exactly one admissible direction per mode
        for mode in 0..4 {
            assert_eq!(admissible_direction_count(&data, &fr, mode), 1, "mode {mode}");
        }
        // maximal at gamma=0 has two admissible directions on mode 0
        let max = Extension::maximal(&data, 1, &Rat::zero(), 2.0);
        assert_eq!(admissible_direction_count(&data, &max, 0), 2);
        let min = Extension::minimal(&data, 1, &Rat::zero(), 2.0);
        assert_eq!(admissible_direction_count(&data, &min, 0), 0);
    }
}
