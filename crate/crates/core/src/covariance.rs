//! The two-component quantum matrix algebra and its covariance checks.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::coeff::LaurentPoly;
use crate::fieldalg::{AlgebraElement, FieldAlgebra, FieldError, FieldSpec, GenKind, Generator, Statistics, Word};
use crate::report::{VerificationReport, Witness};
use crate::rmatrix::{build_projectors_small, build_small_r, RMatrixError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CovarianceError {
    #[error("only n = 2 is supported, got {0}")]
    Unsupported(usize),
    #[error("derivation failed: {0}")]
    Derivation(String),
    #[error("sites must be 1 or 2, got {0}")]
    Sites(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
}

/// Matrix entry `A^row_col`, stored as `(row−1)·2 + (col−1)`: a, b, c, d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QGen(pub u8);

impl QGen {
    pub const A: QGen = QGen(0);
    pub const B: QGen = QGen(1);
    pub const C: QGen = QGen(2);
    pub const D: QGen = QGen(3);

    /// Entry `A^row_col`, 1-based.
    pub fn entry(row: usize, col: usize) -> QGen {
        QGen(((row - 1) * 2 + (col - 1)) as u8)
    }

    pub fn all() -> [QGen; 4] {
        [QGen::A, QGen::B, QGen::C, QGen::D]
    }

    pub fn name(self) -> &'static str {
        ["a", "b", "c", "d"][self.0 as usize]
    }
}

/// Word in the matrix entries, ordered by degree then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QWord(pub Vec<QGen>);

impl QWord {
    pub fn concat(&self, other: &QWord) -> QWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        QWord(v)
    }

    pub fn text(&self) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0.iter().map(|g| g.name()).collect::<Vec<_>>().join("*")
    }
}

impl Ord for QWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for QWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in the matrix entries.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoly<S> {
    terms: BTreeMap<QWord, LaurentPoly<S>>,
}

impl<S: Scalar> QPoly<S> {
    pub fn zero() -> Self {
        QPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::term(QWord::default(), LaurentPoly::one())
    }

    pub fn term(w: QWord, c: LaurentPoly<S>) -> Self {
        let mut p = Self::zero();
        p.add_term(w, &c);
        p
    }

    pub fn gen(g: QGen) -> Self {
        Self::term(QWord(vec![g]), LaurentPoly::one())
    }

    pub fn terms(&self) -> &BTreeMap<QWord, LaurentPoly<S>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &QWord) -> LaurentPoly<S> {
        self.terms.get(w).cloned().unwrap_or_else(LaurentPoly::zero)
    }

    pub fn add_term(&mut self, w: QWord, c: &LaurentPoly<S>) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_insert_with(LaurentPoly::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&LaurentPoly::from_i64(-1)))
    }

    pub fn scale(&self, c: &LaurentPoly<S>) -> Self {
        let mut out = Self::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    /// Unreduced product.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), &(c1 * c2));
            }
        }
        out
    }

    /// Substitutes `q`, `l` and commuting numeric values for a, b, c, d.
    pub fn eval_commutative(&self, q0: &S, entries: &[S; 4]) -> Result<S, crate::coeff::CoeffError> {
        let mut acc = S::zero();
        for (w, c) in &self.terms {
            let mut v = c.eval(q0, q0, &BTreeMap::new())?;
            for g in &w.0 {
                v = v * entries[g.0 as usize].clone();
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Sets `q = q0` in every coefficient.
    pub fn at_q(&self, q0: &S) -> Result<Self, crate::coeff::CoeffError> {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &c.eval_ql(q0, q0)?);
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for QPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let ct = c.to_string();
            let mut t = if w.0.is_empty() {
                ct
            } else if ct == "1" {
                w.text()
            } else if ct == "-1" {
                format!("-{}", w.text())
            } else if c.num_terms() == 1 {
                format!("{}*{}", ct, w.text())
            } else {
                format!("({})*{}", ct, w.text())
            };
            if k > 0 {
                t = match t.strip_prefix('-') {
                    Some(rest) => format!(" - {}", rest),
                    None => format!(" + {}", t),
                };
            }
            write!(f, "{}", t)?;
        }
        Ok(())
    }
}

/// Oriented quadratic relations `x·y → replacement`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSet<S> {
    rules: BTreeMap<(QGen, QGen), QPoly<S>>,
}

impl<S: Scalar> RelationSet<S> {
    pub fn relations(&self) -> impl Iterator<Item = (&(QGen, QGen), &QPoly<S>)> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, x: QGen, y: QGen) -> Option<&QPoly<S>> {
        self.rules.get(&(x, y))
    }

    /// A copy with one relation removed.
    pub fn without(&self, x: QGen, y: QGen) -> Self {
        let mut r = self.clone();
        r.rules.remove(&(x, y));
        r
    }

    /// Rewrites until no leading monomial occurs.
    pub fn normal_form(&self, p: &QPoly<S>) -> QPoly<S> {
        let mut out = QPoly::zero();
        let mut work: Vec<(QWord, LaurentPoly<S>)> = p.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect();
        while let Some((w, c)) = work.pop() {
            let hit = w.0.windows(2).position(|p| self.rules.contains_key(&(p[0], p[1])));
            match hit {
                None => out.add_term(w, &c),
                Some(i) => {
                    let rhs = &self.rules[&(w.0[i], w.0[i + 1])];
                    for (rw, rc) in &rhs.terms {
                        let mut v = w.0[..i].to_vec();
                        v.extend_from_slice(&rw.0);
                        v.extend_from_slice(&w.0[i + 2..]);
                        work.push((QWord(v), &c * rc));
                    }
                }
            }
        }
        out
    }

    pub fn multiply(&self, a: &QPoly<S>, b: &QPoly<S>) -> QPoly<S> {
        self.normal_form(&a.concat(b))
    }

    /// One rewrite of the leading pair at position `i`, then normal form.
    fn rewrite_at(&self, w: &QWord, i: usize) -> QPoly<S> {
        let rhs = &self.rules[&(w.0[i], w.0[i + 1])];
        let mut p = QPoly::zero();
        for (rw, rc) in &rhs.terms {
            let mut v = w.0[..i].to_vec();
            v.extend_from_slice(&rw.0);
            v.extend_from_slice(&w.0[i + 2..]);
            p.add_term(QWord(v), rc);
        }
        self.normal_form(&p)
    }

    /// Resolves every overlap `x·y·z` where both pairs are leading.
    pub fn check_overlaps(&self) -> VerificationReport {
        let mut rep = VerificationReport::new("rtt-overlaps");
        for x in QGen::all() {
            for y in QGen::all() {
                for z in QGen::all() {
                    if !(self.rules.contains_key(&(x, y)) && self.rules.contains_key(&(y, z))) {
                        continue;
                    }
                    rep.checked += 1;
                    let w = QWord(vec![x, y, z]);
                    let left = self.rewrite_at(&w, 0);
                    let right = self.rewrite_at(&w, 1);
                    if left != right {
                        rep.fail(Witness::Word { word: w.text(), left: left.to_string(), right: right.to_string() });
                    }
                }
            }
        }
        rep
    }

    /// Irreducible words of the given degree.
    pub fn normal_words(&self, degree: usize) -> Vec<QWord> {
        let mut words = vec![Vec::new()];
        for _ in 0..degree {
            let mut next = Vec::new();
            for w in &words {
                for g in QGen::all() {
                    let mut v: Vec<QGen> = w.clone();
                    if let Some(&last) = v.last() {
                        if self.rules.contains_key(&(last, g)) {
                            continue;
                        }
                    }
                    v.push(g);
                    next.push(v);
                }
            }
            words = next;
        }
        words.into_iter().map(QWord).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let list: Vec<_> = self
            .rules
            .iter()
            .map(|((x, y), rhs)| {
                serde_json::json!({
                    "lhs": format!("{}*{}", x.name(), y.name()),
                    "rhs": rhs.to_string(),
                })
            })
            .collect();
        serde_json::Value::Array(list)
    }
}

/// All component equations `R̂(A⊗A) − (A⊗A)R̂`, one per `(α,β,μ,ν)`.
pub fn rtt_equations<S: Scalar>() -> Result<Vec<QPoly<S>>, CovarianceError> {
    let r = build_small_r::<S>(2)?;
    let rc = |a: usize, b: usize, c: usize, d: usize| r.get(a * 2 + b, c * 2 + d);
    let pair = |g1: QGen, g2: QGen| QWord(vec![g1, g2]);
    let ent = |row: usize, col: usize| QGen::entry(row + 1, col + 1);
    let mut out = Vec::new();
    for al in 0..2 {
        for be in 0..2 {
            for mu in 0..2 {
                for nu in 0..2 {
                    let mut p = QPoly::zero();
                    for ga in 0..2 {
                        for rho in 0..2 {
                            p.add_term(pair(ent(ga, mu), ent(rho, nu)), &rc(al, be, ga, rho));
                            p.add_term(pair(ent(al, ga), ent(be, rho)), &-rc(ga, rho, mu, nu));
                        }
                    }
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// Eliminates the component equations into oriented rules.
///
/// Columns are processed from the largest word down; each pivot must be a
/// unit, otherwise the derivation fails rather than changing the order.
pub fn derive_rtt_relations<S: Scalar>(n: usize) -> Result<RelationSet<S>, CovarianceError> {
    if n != 2 {
        return Err(CovarianceError::Unsupported(n));
    }
    let mut rows: Vec<QPoly<S>> = rtt_equations::<S>()?.into_iter().filter(|p| !p.is_zero()).collect();
    let mut cols: Vec<QWord> = Vec::new();
    for x in QGen::all() {
        for y in QGen::all() {
            cols.push(QWord(vec![x, y]));
        }
    }
    cols.sort();
    cols.reverse();
    let mut rules = BTreeMap::new();
    for col in cols {
        let nonzero: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].coefficient(&col).is_zero()).collect();
        if nonzero.is_empty() {
            continue;
        }
        let Some(&piv) = nonzero.iter().find(|&&i| rows[i].coefficient(&col).is_unit()) else {
            return Err(CovarianceError::Derivation(format!("no unit pivot for {}", col.text())));
        };
        let inv = rows[piv].coefficient(&col).inverse().map_err(|e| CovarianceError::Derivation(e.to_string()))?;
        let prow = rows.remove(piv).scale(&inv);
        for row in rows.iter_mut() {
            let c = row.coefficient(&col);
            if !c.is_zero() {
                *row = row.sub(&prow.scale(&c));
            }
        }
        rows.retain(|p| !p.is_zero());
        let mut rhs = prow.scale(&LaurentPoly::from_i64(-1));
        rhs.add_term(col.clone(), &LaurentPoly::one());
        rules.insert((col.0[0], col.0[1]), rhs);
    }
    let set = RelationSet { rules };
    let overlaps = set.check_overlaps();
    if !overlaps.passed {
        return Err(CovarianceError::Derivation(format!("{} unresolved overlaps", overlaps.witness_count)));
    }
    Ok(set)
}

/// Both directions of soundness: every component equation reduces to zero,
/// and every rule lies in the span of the equations (rank test at a sample
/// point of `q`).
pub fn verify_round_trip<S: Scalar>(set: &RelationSet<S>, q0: &S) -> Result<VerificationReport, CovarianceError> {
    let eqs = rtt_equations::<S>()?;
    let mut rep = VerificationReport::new("rtt-round-trip");
    let mut fwd = VerificationReport::new("equations-reduce-to-zero");
    for (k, e) in eqs.iter().enumerate() {
        fwd.checked += 1;
        let nf = set.normal_form(e);
        if !nf.is_zero() {
            fwd.fail(Witness::Mismatch { item: format!("equation {}", k + 1), expected: "0".into(), actual: nf.to_string() });
        }
    }
    rep.push_check(fwd);

    let mut back = VerificationReport::new("rules-follow-from-equations");
    let at = |p: &QPoly<S>| p.at_q(q0).map_err(|e| CovarianceError::Derivation(e.to_string()));
    let mut base = Vec::new();
    for e in &eqs {
        base.push(at(e)?);
    }
    let base_rank = rank(&base);
    for ((x, y), rhs) in set.relations() {
        back.checked += 1;
        let rel = QPoly::gen(*x).concat(&QPoly::gen(*y)).sub(rhs);
        let mut aug = base.clone();
        aug.push(at(&rel)?);
        if rank(&aug) != base_rank {
            back.fail(Witness::Mismatch {
                item: format!("{}*{}", x.name(), y.name()),
                expected: format!("rank {}", base_rank),
                actual: format!("rank {}", base_rank + 1),
            });
        }
    }
    back.note(format!("equation rank {} at the sample point", base_rank));
    rep.push_check(back);
    Ok(rep)
}

/// Rank of constant-coefficient polynomials viewed as vectors over words.
fn rank<S: Scalar>(rows: &[QPoly<S>]) -> usize {
    let mut m: Vec<BTreeMap<QWord, S>> = rows
        .iter()
        .map(|p| p.terms.iter().filter_map(|(w, c)| c.as_constant().map(|v| (w.clone(), v))).collect())
        .collect();
    let mut r = 0;
    while let Some(i) = m.iter().position(|row| !row.is_empty()) {
        let row = m.swap_remove(i);
        let (pw, pv) = row.iter().next().map(|(w, v)| (w.clone(), v.clone())).unwrap();
        for other in m.iter_mut() {
            if let Some(c) = other.get(&pw).cloned() {
                let f = c / pv.clone();
                for (w, v) in &row {
                    let slot = other.entry(w.clone()).or_insert_with(S::zero);
                    *slot = slot.clone() - f.clone() * v.clone();
                }
                other.retain(|_, v| !v.is_zero());
            }
        }
        r += 1;
    }
    r
}

/// `Σ_σ (−q)^{l(σ)} A¹_{σ1} A²_{σ2} = a·d − q·b·c`.
pub fn qdet<S: Scalar>(set: &RelationSet<S>) -> QPoly<S> {
    let mut p = QPoly::zero();
    for (perm, inversions) in [([1usize, 2usize], 0u32), ([2, 1], 1)] {
        let c = LaurentPoly::<S>::q().scale(&S::from_i64(-1)).pow(inversions);
        p.add_term(QWord(vec![QGen::entry(1, perm[0]), QGen::entry(2, perm[1])]), &c);
    }
    set.normal_form(&p)
}

pub fn verify_qdet_central<S: Scalar>(set: &RelationSet<S>) -> VerificationReport {
    let mut rep = VerificationReport::new("qdet-central");
    let det = qdet(set);
    for g in QGen::all() {
        rep.checked += 1;
        let gp = QPoly::gen(g);
        let comm = set.normal_form(&det.concat(&gp).sub(&gp.concat(&det)));
        if !comm.is_zero() {
            rep.fail(Witness::Mismatch { item: format!("[qdet, {}]", g.name()), expected: "0".into(), actual: comm.to_string() });
        }
    }
    rep
}

/// Normal words of degree 2 and 3 number as for four commuting variables.
pub fn verify_pbw<S: Scalar>(set: &RelationSet<S>) -> VerificationReport {
    let mut rep = VerificationReport::new("rtt-pbw");
    for (deg, expected) in [(2usize, 10usize), (3, 20)] {
        rep.checked += 1;
        let got = set.normal_words(deg).len();
        if got != expected {
            rep.fail(Witness::Mismatch { item: format!("degree {}", deg), expected: expected.to_string(), actual: got.to_string() });
        }
    }
    rep
}

/// Matrix entries (always leftmost) times a field word.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedElement<S> {
    terms: BTreeMap<(QWord, Word), LaurentPoly<S>>,
}

impl<S: Scalar> MixedElement<S> {
    pub fn zero() -> Self {
        MixedElement { terms: BTreeMap::new() }
    }

    pub fn term(q: QWord, w: Word, c: LaurentPoly<S>) -> Self {
        let mut e = Self::zero();
        e.add_term(q, w, &c);
        e
    }

    pub fn terms(&self) -> &BTreeMap<(QWord, Word), LaurentPoly<S>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, q: QWord, w: Word, c: &LaurentPoly<S>) {
        if c.is_zero() {
            return;
        }
        let key = (q, w);
        let slot = self.terms.entry(key.clone()).or_insert_with(LaurentPoly::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((q, w), c) in &other.terms {
            out.add_term(q.clone(), w.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &LaurentPoly<S>) -> Self {
        let mut out = Self::zero();
        for ((q, w), v) in &self.terms {
            out.add_term(q.clone(), w.clone(), &(v * c));
        }
        out
    }

    /// Unreduced product; entries move past field generators freely.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for ((q1, w1), c1) in &self.terms {
            for ((q2, w2), c2) in &other.terms {
                out.add_term(q1.concat(q2), w1.concat(w2), &(c1 * c2));
            }
        }
        out
    }

    /// Normal form in both segments.
    pub fn reduce(&self, set: &RelationSet<S>, alg: &FieldAlgebra<S>) -> Result<Self, FieldError> {
        let mut out = Self::zero();
        for ((q, w), c) in &self.terms {
            let qn = set.normal_form(&QPoly::term(q.clone(), c.clone()));
            let fnf = alg.normal_form(&AlgebraElement::term(w.clone(), LaurentPoly::one()))?;
            for (qw, qc) in qn.terms() {
                for (fw, fc) in fnf.terms() {
                    out.add_term(qw.clone(), fw.clone(), &(qc * fc));
                }
            }
        }
        Ok(out)
    }

    /// Collects the matrix-entry coefficient of each field word.
    pub fn by_field_word(&self) -> BTreeMap<Word, QPoly<S>> {
        let mut out: BTreeMap<Word, QPoly<S>> = BTreeMap::new();
        for ((q, w), c) in &self.terms {
            out.entry(w.clone()).or_insert_with(QPoly::zero).add_term(q.clone(), c);
        }
        out.retain(|_, p| !p.is_zero());
        out
    }
}

/// `ξ̃^α_r = Σ_β A^α_β ξ^β_r` for the field generators of a spec.
pub fn transformed_field<S: Scalar>(alpha: u16, site: u16) -> MixedElement<S> {
    let mut e = MixedElement::zero();
    for beta in 1..=2u16 {
        e.add_term(
            QWord(vec![QGen::entry(alpha as usize, beta as usize)]),
            Word(vec![Generator::field(beta, site)]),
            &LaurentPoly::one(),
        );
    }
    e
}

/// The quadratic relations survive `ξ → Aξ`: the symmetrizer (Grassmann)
/// or antisymmetrizer (boson) still annihilates `ξ̃⊗ξ̃`.
pub fn verify_plane_covariance<S: Scalar>(stat: Statistics, set: &RelationSet<S>) -> Result<VerificationReport, CovarianceError> {
    let spec = FieldSpec::new(2, 1, stat);
    let alg = FieldAlgebra::<S>::new(spec)?;
    let (a, s) = build_projectors_small::<S>(2)?;
    let proj = match stat {
        Statistics::Grassmann => s.numerator,
        Statistics::Boson => a.numerator,
    };
    let mut rep = VerificationReport::new(format!("plane-covariance-{}", stat.name()));
    let x: Vec<MixedElement<S>> = (1..=2).map(|al| transformed_field(al, 1)).collect();
    let xf: Vec<AlgebraElement<S>> = (1..=2).map(|al| AlgebraElement::generator(Generator::field(al, 1))).collect();
    for al in 0..2 {
        for be in 0..2 {
            let mut acc = MixedElement::zero();
            let mut plain = AlgebraElement::zero();
            for ga in 0..2 {
                for rho in 0..2 {
                    let c = proj.get(al * 2 + be, ga * 2 + rho);
                    if c.is_zero() {
                        continue;
                    }
                    acc = acc.add(&x[ga].concat(&x[rho]).scale(&c));
                    plain = plain.add(&xf[ga].concat(&xf[rho])?.scale(&c))?;
                }
            }
            // the untransformed relation must hold first
            rep.checked += 1;
            let pn = alg.normal_form(&plain)?;
            if !pn.is_zero() {
                rep.fail(Witness::Mismatch { item: format!("plane relation ({},{})", al + 1, be + 1), expected: "0".into(), actual: pn.to_string() });
            }
            rep.checked += 1;
            let red = acc.reduce(set, &alg)?;
            for (w, p) in red.by_field_word() {
                rep.fail(Witness::Mismatch {
                    item: format!("component ({},{}) at {}", al + 1, be + 1, w.text(stat)),
                    expected: "0".into(),
                    actual: p.to_string(),
                });
            }
        }
    }
    Ok(rep)
}

/// `A¹_{β₁}A²_{β₂} ξ^{β₁}ξ^{β₂} = det·ξ¹ξ²` with `det` the candidate (default qdet).
pub fn verify_det_top_form<S: Scalar>(set: &RelationSet<S>, candidate: Option<&QPoly<S>>) -> Result<(VerificationReport, QPoly<S>), CovarianceError> {
    let (rep, det) = top_form(set, 1, candidate.cloned().unwrap_or_else(|| qdet(set)), "det-top-form")?;
    Ok((rep, det))
}

/// The volume word over `sites` sites transforms with `qdet^sites`.
pub fn verify_lq_det<S: Scalar>(set: &RelationSet<S>, sites: usize) -> Result<VerificationReport, CovarianceError> {
    if !(1..=2).contains(&sites) {
        return Err(CovarianceError::Sites(sites));
    }
    let det = qdet(set);
    let mut target = QPoly::one();
    for _ in 0..sites {
        target = set.multiply(&target, &det);
    }
    let (mut rep, extracted) = top_form(set, sites, target, "lq-det")?;
    // classical limit with numeric entries
    let vals = [S::from_i64(3), S::from_i64(-2), S::from_i64(5), S::from_i64(7)];
    let one = S::one();
    let classical = vals[0].clone() * vals[3].clone() - vals[1].clone() * vals[2].clone();
    let mut expected = S::one();
    for _ in 0..sites {
        expected = expected * classical.clone();
    }
    rep.checked += 1;
    match extracted.eval_commutative(&one, &vals) {
        Ok(v) if v == expected => {}
        Ok(v) => rep.fail(Witness::Mismatch { item: "q = 1, (a,b,c,d) = (3,-2,5,7)".into(), expected: expected.to_text(), actual: v.to_text() }),
        Err(e) => rep.fail(Witness::Mismatch { item: "q = 1 evaluation".into(), expected: expected.to_text(), actual: e.to_string() }),
    }
    Ok(rep)
}

fn top_form<S: Scalar>(set: &RelationSet<S>, sites: usize, expected: QPoly<S>, name: &str) -> Result<(VerificationReport, QPoly<S>), CovarianceError> {
    let spec = FieldSpec::grassmann(2, sites);
    let alg = FieldAlgebra::<S>::new(spec)?;
    let mut acc = MixedElement::term(QWord::default(), Word::empty(), LaurentPoly::one());
    for r in 1..=sites as u16 {
        for al in 1..=2 {
            acc = acc.concat(&transformed_field(al, r));
        }
    }
    let red = acc.reduce(set, &alg)?;
    let volume = Word(spec.generators(GenKind::Field));
    let mut rep = VerificationReport::new(name);
    let mut extracted = QPoly::zero();
    for (w, p) in red.by_field_word() {
        if w == volume {
            extracted = p;
        } else {
            rep.fail(Witness::Mismatch { item: w.text(Statistics::Grassmann), expected: "0".into(), actual: p.to_string() });
        }
    }
    rep.checked += 1;
    if extracted != expected {
        rep.fail(Witness::Mismatch { item: "volume coefficient".into(), expected: expected.to_string(), actual: extracted.to_string() });
    }
    rep.note("det_q kept symbolic; the SL condition det_q = 1 is not imposed");
    Ok((rep, extracted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn set() -> RelationSet<Rational> {
        derive_rtt_relations(2).unwrap()
    }

    fn w(s: &str) -> QWord {
        QWord(s.bytes().map(|b| QGen(b - b'a')).collect())
    }

    #[test]
    fn derived_relations() {
        let s = set();
        assert_eq!(s.len(), 6);
        let txt: Vec<String> = s.relations().map(|((x, y), r)| format!("{}{}={}", x.name(), y.name(), r)).collect();
        assert_eq!(
            txt,
            ["ba=q^-1*a*b", "ca=q^-1*a*c", "cb=b*c", "da=a*d + (q^-1 - q)*b*c", "db=q^-1*b*d", "dc=q^-1*c*d"]
        );
    }

    #[test]
    fn bc_commute() {
        let s = set();
        let p = QPoly::term(w("bc"), LaurentPoly::one()).sub(&QPoly::term(w("cb"), LaurentPoly::one()));
        assert!(s.normal_form(&p).is_zero());
    }

    #[test]
    fn classical_limit_commutes() {
        let s = set();
        let one = Rational::from_integer(1.into());
        for ((x, y), rhs) in s.relations() {
            let at1 = rhs.at_q(&one).unwrap();
            assert_eq!(at1, QPoly::term(QWord(vec![*y, *x]), LaurentPoly::one()));
        }
    }

    #[test]
    fn round_trip_and_pbw() {
        let s = set();
        let q0 = crate::rational(7, 3);
        assert!(verify_round_trip(&s, &q0).unwrap().passed);
        assert!(verify_pbw(&s).passed);
        assert!(s.check_overlaps().passed);
    }

    #[test]
    fn qdet_form_and_centrality() {
        let s = set();
        assert_eq!(qdet(&s).to_string(), "a*d - q*b*c");
        assert!(verify_qdet_central(&s).passed);
    }

    #[test]
    fn plane_covariance() {
        let s = set();
        for stat in [Statistics::Grassmann, Statistics::Boson] {
            let rep = verify_plane_covariance(stat, &s).unwrap();
            assert!(rep.passed, "{:?}", rep);
        }
        let broken = s.without(QGen::D, QGen::A);
        assert!(!verify_plane_covariance(Statistics::Grassmann, &broken).unwrap().passed);
    }

    #[test]
    fn det_top_form() {
        let s = set();
        let (rep, det) = verify_det_top_form(&s, None).unwrap();
        assert!(rep.passed, "{:?}", rep);
        assert_eq!(det, qdet(&s));
        let wrong = QPoly::term(w("ad"), LaurentPoly::one()).sub(&QPoly::term(w("bc"), LaurentPoly::one()));
        assert!(!verify_det_top_form(&s, Some(&wrong)).unwrap().0.passed);
    }

    #[test]
    fn lq_det() {
        let s = set();
        for n in [1, 2] {
            let rep = verify_lq_det(&s, n).unwrap();
            assert!(rep.passed, "{:?}", rep);
        }
        assert!(verify_lq_det(&s, 3).is_err());
        assert!(derive_rtt_relations::<Rational>(3).is_err());
    }
}
