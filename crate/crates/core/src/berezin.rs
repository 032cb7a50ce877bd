//! Berezin integration over lattice Grassmann fields, the deformed
//! ε-tensor, Pfaffians and Gaussian integrals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::coeff::{LaurentPoly, ParamContext};
use crate::fieldalg::{
    derive_same_kind, push_pattern, AlgebraElement, CalculusOps, FieldAlgebra, FieldError, FieldSpec, GenKind,
    Generator, PrintedTable, RuleTable, Statistics, Word,
};
use crate::report::{VerificationReport, Witness};
use crate::rmatrix::Variant;
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BerezinError {
    #[error("Berezin integration needs grassmann statistics")]
    Statistics,
    #[error("total generator count {0} is odd")]
    Parity(usize),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A full-length index sequence `(component, site)` for ε.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonQuery(pub Vec<(u16, u16)>);

fn require_grassmann(spec: &FieldSpec) -> Result<(), BerezinError> {
    if spec.statistics != Statistics::Grassmann {
        return Err(BerezinError::Statistics);
    }
    Ok(())
}

/// Exchange coefficient `c` in `x·y = c·y·x` for fields `x > y`, read from
/// the printed component table of the given variant.
fn printed_swap<S: Scalar>(x: &Generator, y: &Generator, variant: Variant) -> LaurentPoly<S> {
    let m = |qe: i32, le: i32| LaurentPoly::monomial(-S::one(), qe, le);
    if x.site == y.site {
        return m(1, 0);
    }
    if x.component == y.component {
        return m(0, 1);
    }
    let higher = x.component > y.component;
    match (variant, higher) {
        (Variant::Q, true) | (Variant::QTranspose, false) => m(1, 1),
        _ => m(-1, 1),
    }
}

/// Canonical full word `ψ¹_{r₁}ψ²_{r₁}···ψⁿ_{r_N}`.
pub fn full_word(spec: &FieldSpec) -> Word {
    Word(spec.generators(GenKind::Field))
}

/// The deformed ε: product of exchange coefficients over the inversions of
/// the query, 0 on repeats. Computed without the rewriting engine.
pub fn epsilon<S: Scalar>(qry: &EpsilonQuery, spec: &FieldSpec) -> Result<LaurentPoly<S>, BerezinError> {
    require_grassmann(spec)?;
    if qry.0.len() != spec.dim() {
        return Err(BerezinError::Input(format!("query has length {}, expected {}", qry.0.len(), spec.dim())));
    }
    let gens: Vec<Generator> = qry.0.iter().map(|&(a, r)| Generator::field(a, r)).collect();
    for g in &gens {
        spec.check(g)?;
    }
    let mut c = LaurentPoly::one();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            if gens[i] == gens[j] {
                return Ok(LaurentPoly::zero());
            }
            if gens[i] > gens[j] {
                c = &c * &printed_swap(&gens[i], &gens[j], spec.variant);
            }
        }
    }
    Ok(c)
}

/// Coefficient of the full canonical word in the normal form of `e`.
pub fn berezin_integrate<S: Scalar>(e: &AlgebraElement<S>, alg: &FieldAlgebra<S>) -> Result<LaurentPoly<S>, BerezinError> {
    require_grassmann(alg.spec())?;
    if e.terms().keys().any(|w| w.0.iter().any(|g| g.kind != GenKind::Field)) {
        return Err(BerezinError::Input("integrand must contain only field generators".into()));
    }
    let nf = alg.normal_form(e)?;
    Ok(nf.coefficient(&full_word(alg.spec())))
}

/// Upper-triangular quadratic form `w = Σ_{x<y} b_xy ψ_x ψ_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<S> {
    pub spec: FieldSpec,
    pub entries: BTreeMap<(Generator, Generator), LaurentPoly<S>>,
}

/// Default symbol name of the entry for `(x, y)`.
pub fn default_symbol(spec: &FieldSpec, x: &Generator, y: &Generator) -> Vec<u32> {
    if spec.sites == 1 {
        vec![x.component as u32, y.component as u32]
    } else {
        vec![x.component as u32, x.site as u32, y.component as u32, y.site as u32]
    }
}

#[derive(Deserialize)]
struct FormJson {
    n: usize,
    #[serde(rename = "N")]
    sites: usize,
    #[serde(default)]
    statistics: Option<String>,
    #[serde(default)]
    entries: Vec<(u16, u16, u16, u16, String)>,
}

impl<S: Scalar> QuadraticForm<S> {
    fn pairs(spec: &FieldSpec) -> Vec<(Generator, Generator)> {
        let gens = spec.generators(GenKind::Field);
        let mut out = Vec::new();
        for (i, x) in gens.iter().enumerate() {
            for y in &gens[i + 1..] {
                out.push((*x, *y));
            }
        }
        out
    }

    /// Every entry a distinct parameter symbol.
    pub fn symbolic(spec: FieldSpec, ctx: &ParamContext) -> Self {
        let entries = Self::pairs(&spec).into_iter().map(|(x, y)| ((x, y), ctx.symbol(&default_symbol(&spec, &x, &y)))).collect();
        QuadraticForm { spec, entries }
    }

    /// Entries from an antisymmetric matrix indexed by flat generator index.
    pub fn from_matrix(spec: FieldSpec, m: &[Vec<Rational>]) -> Result<Self, BerezinError> {
        if m.len() != spec.dim() || m.iter().any(|r| r.len() != spec.dim()) {
            return Err(BerezinError::Input("matrix shape does not match n*N".into()));
        }
        let entries = Self::pairs(&spec)
            .into_iter()
            .map(|(x, y)| ((x, y), LaurentPoly::constant(S::from_rational(&m[spec.flat(&x)][spec.flat(&y)]))))
            .collect();
        Ok(QuadraticForm { spec, entries })
    }

    /// Reads the JSON form; omitted entries become parameter symbols.
    pub fn from_json(text: &str, ctx: &ParamContext) -> Result<QuadraticForm<Rational>, BerezinError> {
        let raw: FormJson = serde_json::from_str(text).map_err(|e| BerezinError::Input(e.to_string()))?;
        if let Some(s) = &raw.statistics {
            if s != "grassmann" {
                return Err(BerezinError::Statistics);
            }
        }
        let spec = FieldSpec::grassmann(raw.n, raw.sites);
        let mut form = QuadraticForm::<Rational>::symbolic(spec, ctx);
        for (a, i, b, j, c) in raw.entries {
            let (x, y) = (Generator::field(a, i), Generator::field(b, j));
            spec.check(&x)?;
            spec.check(&y)?;
            if x >= y {
                return Err(BerezinError::Input(format!("entry ({},{},{},{}) is not strictly upper", a, i, b, j)));
            }
            let p = crate::exprio::parse_coeff(&c, Some(ctx)).map_err(|e| BerezinError::Input(e.to_string()))?;
            form.entries.insert((x, y), p);
        }
        Ok(form)
    }

    pub fn element(&self) -> AlgebraElement<S> {
        let mut e = AlgebraElement::zero().with_spec(self.spec);
        for ((x, y), c) in &self.entries {
            e.add_term(Word(vec![*x, *y]), c);
        }
        e
    }
}

fn half_dim(spec: &FieldSpec) -> Result<usize, BerezinError> {
    require_grassmann(spec)?;
    if !spec.dim().is_multiple_of(2) {
        return Err(BerezinError::Parity(spec.dim()));
    }
    Ok(spec.dim() / 2)
}

fn factorial<S: Scalar>(m: usize) -> S {
    (1..=m as i64).fold(S::one(), |acc, k| acc * S::from_i64(k))
}

fn check_alg<S: Scalar>(w: &QuadraticForm<S>, alg: &FieldAlgebra<S>) -> Result<(), BerezinError> {
    if *alg.spec() != w.spec {
        return Err(FieldError::SpecMismatch.into());
    }
    Ok(())
}

/// Coefficient of the full word in `w^m / m!`, `m = nN/2`; `w^m` by repeated squaring.
pub fn pfaffian<S: Scalar>(w: &QuadraticForm<S>, alg: &FieldAlgebra<S>) -> Result<LaurentPoly<S>, BerezinError> {
    check_alg(w, alg)?;
    let m = half_dim(&w.spec)?;
    let base = w.element();
    let mut result = AlgebraElement::one().with_spec(w.spec);
    let mut square = base;
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = alg.multiply(&result, &square)?;
        }
        e >>= 1;
        if e > 0 {
            square = alg.multiply(&square, &square)?;
        }
    }
    let top = result.coefficient(&full_word(&w.spec));
    Ok(top.scale(&(S::one() / factorial::<S>(m))))
}

/// `∫ exp(w)`: the truncated series `Σ_k w^k/k!` built term by term, then
/// integrated.
pub fn gaussian_integral<S: Scalar>(w: &QuadraticForm<S>, alg: &FieldAlgebra<S>) -> Result<LaurentPoly<S>, BerezinError> {
    check_alg(w, alg)?;
    let m = half_dim(&w.spec)?;
    let base = w.element();
    let mut term = AlgebraElement::one().with_spec(w.spec);
    let mut series = term.clone();
    for k in 1..=m {
        term = alg.multiply(&term, &base)?.scale(&LaurentPoly::constant(S::one() / S::from_i64(k as i64)));
        series = series.add(&term)?;
    }
    berezin_integrate(&series, alg)
}

fn check_antisymmetric(m: &[Vec<Rational>]) -> Result<(), BerezinError> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(BerezinError::Input("matrix is not square".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if m[i][j] != -m[j][i].clone() {
                return Err(BerezinError::Input("matrix is not antisymmetric".into()));
            }
        }
    }
    Ok(())
}

/// Classical Pfaffian by first-row expansion.
pub fn classical_pfaffian_oracle(m: &[Vec<Rational>]) -> Result<Rational, BerezinError> {
    check_antisymmetric(m)?;
    if !m.len().is_multiple_of(2) {
        return Err(BerezinError::Parity(m.len()));
    }
    fn rec(m: &[Vec<Rational>], idx: &[usize]) -> Rational {
        if idx.is_empty() {
            return Rational::one();
        }
        let first = idx[0];
        let mut acc = Rational::zero();
        for (k, &j) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != first && x != j).collect();
            let term = m[first][j].clone() * rec(m, &rest);
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }
    let idx: Vec<usize> = (0..m.len()).collect();
    Ok(rec(m, &idx))
}

/// Exact determinant by Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= piv.clone();
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone() / piv.clone();
            for k in c..n {
                let v = a[c][k].clone() * f.clone();
                a[r][k] -= v;
            }
        }
    }
    det
}

/// The ∧-algebra of differentials: `Ŝ·(dψ∧dψ) = 0`, i.e. the same exchange
/// pattern as the fields, as its own rule table.
pub fn exterior_algebra<S: Scalar>(spec: &FieldSpec) -> Result<FieldAlgebra<S>, BerezinError> {
    require_grassmann(spec)?;
    let ops = CalculusOps::<S>::new(spec)?;
    let fam = derive_same_kind(spec, GenKind::Differential, &ops.jr, 1)?;
    let mut table = RuleTable::default();
    table.add_same_kind(&fam);
    Ok(FieldAlgebra::from_table(*spec, table))
}

/// The printed ∧ table. Its last line is printed in the opposite direction
/// (`dψ^α_{r_i}∧dψ^β_{r_j} = -(q/l) dψ^β_{r_j}∧dψ^α_{r_i}`); it is inverted here.
pub fn printed_exterior_table<S: Scalar>(spec: &FieldSpec) -> PrintedTable<S> {
    let m = |qe: i32, le: i32| LaurentPoly::monomial(-S::one(), qe, le);
    let mut t = PrintedTable { name: "exterior-exchange".into(), lines: Vec::new(), notes: Vec::new() };
    push_pattern(&mut t, spec.n, spec.sites, GenKind::Differential, [m(1, 0), m(0, 1), m(1, 1), m(-1, 1)]);
    t
}

/// Compares the ∧ relations with the differential rules of the calculus,
/// pair by pair, and the ∧ relations with their printed table.
pub fn compare_exterior_with_calculus<S: Scalar>(alg: &FieldAlgebra<S>) -> Result<VerificationReport, BerezinError> {
    let spec = *alg.spec();
    let ext = exterior_algebra::<S>(&spec)?;
    let mut rep = VerificationReport::new("exterior-vs-calculus");
    let mut agree = VerificationReport::new("wedge-rules-equal-differential-rules");
    let gens = spec.generators(GenKind::Differential);
    for x in &gens {
        for y in &gens {
            let a = ext.rules().get(x, y);
            let b = alg.rules().get(x, y);
            agree.checked += 1;
            if a != b {
                let show = |r: Option<&crate::fieldalg::Rhs<S>>| match r {
                    None => "canonical".to_string(),
                    Some(rhs) => {
                        let mut e = AlgebraElement::zero().with_spec(spec);
                        for (w, c) in rhs {
                            e.add_term(Word(w.clone()), c);
                        }
                        e.to_string()
                    }
                };
                agree.fail(Witness::Mismatch {
                    item: format!("{}*{}", x.name(spec.statistics), y.name(spec.statistics)),
                    expected: show(a),
                    actual: show(b),
                });
            }
        }
    }
    rep.push_check(agree);
    if spec.variant == Variant::Q {
        let table = ext.compare_table(&printed_exterior_table(&spec))?;
        rep.push_check(table);
    }
    Ok(rep)
}
