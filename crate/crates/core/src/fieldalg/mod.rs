//! Lattice field algebra: fields, differentials and derivatives with a
//! rewriting system that brings words to canonical normal order.
//!
//! Canonical order is differentials, then fields, then derivatives; within a
//! kind ascending by (site, component).

mod calculus;
mod rules;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::coeff::{CoeffError, LaurentPoly};
use crate::rmatrix::{RMatrixError, Variant};
use crate::scalar::Scalar;

pub use calculus::{PrintedTable, TableLine};
pub(crate) use calculus::push_pattern;
pub use rules::{derive_same_kind, CalculusOps, Rhs, RuleTable, SameKindRules};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("index error: {0}")]
    Index(String),
    #[error("elements belong to different field specs")]
    SpecMismatch,
    #[error("pair {0} {1} is already canonical")]
    NoOp(String, String),
    #[error("word of degree {0} exceeds the degree cap {1}")]
    DegreeCap(usize, usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("rule derivation failed: {0}")]
    Derivation(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistics {
    Grassmann,
    Boson,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Grassmann => "grassmann",
            Statistics::Boson => "boson",
        }
    }
}

/// Generator kind, declared in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Differential,
    Field,
    Derivative,
}

/// One generator. The derived order is the canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub kind: GenKind,
    pub site: u16,
    pub component: u16,
}

impl Generator {
    pub fn new(kind: GenKind, component: u16, site: u16) -> Self {
        Generator { kind, site, component }
    }

    pub fn field(component: u16, site: u16) -> Self {
        Self::new(GenKind::Field, component, site)
    }

    pub fn differential(component: u16, site: u16) -> Self {
        Self::new(GenKind::Differential, component, site)
    }

    pub fn derivative(component: u16, site: u16) -> Self {
        Self::new(GenKind::Derivative, component, site)
    }

    pub fn with_kind(self, kind: GenKind) -> Self {
        Generator { kind, ..self }
    }

    /// Textual name under the given statistics, e.g. `psi[1,2]`.
    pub fn name(&self, stat: Statistics) -> String {
        let head = match (self.kind, stat) {
            (GenKind::Field, Statistics::Grassmann) => "psi",
            (GenKind::Differential, Statistics::Grassmann) => "dpsi",
            (GenKind::Field, Statistics::Boson) => "phi",
            (GenKind::Differential, Statistics::Boson) => "dphi",
            (GenKind::Derivative, _) => "dd",
        };
        format!("{}[{},{}]", head, self.component, self.site)
    }
}

/// Ordered generator sequence. Words compare by length first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Generator>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_kind(&self, kind: GenKind) -> bool {
        self.0.iter().any(|g| g.kind == kind)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Whether the word is in canonical order for the given nilpotent set.
    pub fn is_sorted(&self) -> bool {
        self.0.windows(2).all(|p| p[0] <= p[1])
    }

    pub fn text(&self, stat: Statistics) -> String {
        self.0.iter().map(|g| g.name(stat)).collect::<Vec<_>>().join("*")
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// Lattice shape, statistics and options of a field algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub n: usize,
    pub sites: usize,
    pub statistics: Statistics,
    pub variant: Variant,
    /// Build every operator on the specialization `l = q`.
    pub l_equals_q: bool,
    /// Largest word length accepted by reductions.
    pub degree_cap: usize,
}

pub const DEFAULT_DEGREE_CAP: usize = 24;

impl FieldSpec {
    pub fn new(n: usize, sites: usize, statistics: Statistics) -> Self {
        FieldSpec { n, sites, statistics, variant: Variant::Q, l_equals_q: false, degree_cap: DEFAULT_DEGREE_CAP }
    }

    pub fn grassmann(n: usize, sites: usize) -> Self {
        Self::new(n, sites, Statistics::Grassmann)
    }

    pub fn boson(n: usize, sites: usize) -> Self {
        Self::new(n, sites, Statistics::Boson)
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn with_l_equals_q(mut self, on: bool) -> Self {
        self.l_equals_q = on;
        self
    }

    pub fn with_degree_cap(mut self, cap: usize) -> Self {
        self.degree_cap = cap;
        self
    }

    /// Total number of generators of one kind.
    pub fn dim(&self) -> usize {
        self.n * self.sites
    }

    pub fn check(&self, g: &Generator) -> Result<(), FieldError> {
        if g.component < 1 || g.component as usize > self.n || g.site < 1 || g.site as usize > self.sites {
            return Err(FieldError::Index(format!(
                "{} outside n={}, N={}",
                g.name(self.statistics),
                self.n,
                self.sites
            )));
        }
        Ok(())
    }

    /// 0-based flat index `(site-1)·n + (component-1)`.
    pub fn flat(&self, g: &Generator) -> usize {
        (g.site as usize - 1) * self.n + (g.component as usize - 1)
    }

    pub fn from_flat(&self, kind: GenKind, k: usize) -> Generator {
        Generator::new(kind, (k % self.n + 1) as u16, (k / self.n + 1) as u16)
    }

    /// All generators of a kind in canonical order.
    pub fn generators(&self, kind: GenKind) -> Vec<Generator> {
        (0..self.dim()).map(|k| self.from_flat(kind, k)).collect()
    }

    /// All generators of every kind in canonical order.
    pub fn all_generators(&self) -> Vec<Generator> {
        [GenKind::Differential, GenKind::Field, GenKind::Derivative]
            .into_iter()
            .flat_map(|k| self.generators(k))
            .collect()
    }

    /// Grading parity used by the Leibniz rule.
    pub fn is_odd(&self, kind: GenKind) -> bool {
        match (self.statistics, kind) {
            (Statistics::Grassmann, GenKind::Differential) => false,
            (Statistics::Grassmann, _) => true,
            (Statistics::Boson, GenKind::Differential) => true,
            (Statistics::Boson, _) => false,
        }
    }
}

pub type Terms<S> = BTreeMap<Word, LaurentPoly<S>>;

/// Finite linear combination of words.
#[derive(Debug, Clone)]
pub struct AlgebraElement<S> {
    terms: Terms<S>,
    spec: Option<FieldSpec>,
}

impl<S: Scalar> PartialEq for AlgebraElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<S: Scalar> AlgebraElement<S> {
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new(), spec: None }
    }

    pub fn scalar(c: LaurentPoly<S>) -> Self {
        Self::term(Word::empty(), c)
    }

    pub fn one() -> Self {
        Self::scalar(LaurentPoly::one())
    }

    pub fn term(w: Word, c: LaurentPoly<S>) -> Self {
        let mut e = Self::zero();
        e.add_term(w, &c);
        e
    }

    pub fn word(gens: &[Generator]) -> Self {
        Self::term(Word(gens.to_vec()), LaurentPoly::one())
    }

    pub fn generator(g: Generator) -> Self {
        Self::word(&[g])
    }

    pub fn from_terms(terms: Terms<S>, spec: Option<FieldSpec>) -> Self {
        let mut e = AlgebraElement { terms: BTreeMap::new(), spec };
        for (w, c) in terms {
            e.add_term(w, &c);
        }
        e
    }

    pub fn spec(&self) -> Option<FieldSpec> {
        self.spec
    }

    pub fn with_spec(mut self, spec: FieldSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn terms(&self) -> &Terms<S> {
        &self.terms
    }

    pub fn into_terms(self) -> Terms<S> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> LaurentPoly<S> {
        self.terms.get(w).cloned().unwrap_or_else(LaurentPoly::zero)
    }

    pub fn add_term(&mut self, w: Word, c: &LaurentPoly<S>) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(w.clone()).or_insert_with(LaurentPoly::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&w);
        }
    }

    fn join_spec(&self, other: &Self) -> Result<Option<FieldSpec>, FieldError> {
        match (self.spec, other.spec) {
            (Some(a), Some(b)) if a != b => Err(FieldError::SpecMismatch),
            (Some(a), _) => Ok(Some(a)),
            (None, b) => Ok(b),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        let spec = self.join_spec(other)?;
        let mut out = self.clone();
        out.spec = spec;
        for (w, c) in &other.terms {
            let slot = out.terms.entry(w.clone()).or_insert_with(LaurentPoly::zero);
            *slot = slot.checked_add(c)?;
            if slot.is_zero() {
                out.terms.remove(w);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.scale(&LaurentPoly::from_i64(-1)))
    }

    pub fn scale(&self, c: &LaurentPoly<S>) -> Self {
        let mut out = AlgebraElement { terms: BTreeMap::new(), spec: self.spec };
        for (w, v) in &self.terms {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    /// Unreduced product: concatenation of words.
    pub fn concat(&self, other: &Self) -> Result<Self, FieldError> {
        let spec = self.join_spec(other)?;
        let mut out = AlgebraElement { terms: BTreeMap::new(), spec };
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), &c1.checked_mul(c2)?);
            }
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, f: impl Fn(&LaurentPoly<S>) -> LaurentPoly<S>) -> Self {
        let mut out = AlgebraElement { terms: BTreeMap::new(), spec: self.spec };
        for (w, c) in &self.terms {
            out.add_term(w.clone(), &f(c));
        }
        out
    }

    /// Drops every word containing a generator of the given kind.
    pub fn without_kind(&self, kind: GenKind) -> Self {
        AlgebraElement {
            terms: self.terms.iter().filter(|(w, _)| !w.contains_kind(kind)).map(|(w, c)| (w.clone(), c.clone())).collect(),
            spec: self.spec,
        }
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn text(&self, stat: Statistics) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let mut t = if w.is_empty() {
                c.to_string()
            } else if c.num_terms() == 1 {
                let ct = c.to_string();
                match ct.as_str() {
                    "1" => w.text(stat),
                    "-1" => format!("-{}", w.text(stat)),
                    _ => format!("{}*{}", ct, w.text(stat)),
                }
            } else {
                format!("({})*{}", c, w.text(stat))
            };
            if k > 0 {
                if let Some(rest) = t.strip_prefix('-') {
                    out.push_str(" - ");
                    t = rest.to_string();
                } else {
                    out.push_str(" + ");
                }
            }
            out.push_str(&t);
        }
        out
    }
}

impl<S: Scalar> fmt::Display for AlgebraElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stat = self.spec.map(|s| s.statistics).unwrap_or(Statistics::Grassmann);
        write!(f, "{}", self.text(stat))
    }
}

/// Reduction order used by `normal_form_with`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    LeftmostFirst,
    RightmostFirst,
}

type Memo<S> = Mutex<HashMap<Vec<Generator>, Arc<Terms<S>>>>;

/// A field algebra over a fixed spec: rule table plus reduction caches.
pub struct FieldAlgebra<S: Scalar> {
    spec: FieldSpec,
    table: RuleTable<S>,
    memo_left: Memo<S>,
    memo_right: Memo<S>,
}

impl<S: Scalar> fmt::Debug for FieldAlgebra<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldAlgebra").field("spec", &self.spec).field("rules", &self.table.len()).finish()
    }
}

impl<S: Scalar> FieldAlgebra<S> {
    pub fn new(spec: FieldSpec) -> Result<Self, FieldError> {
        if spec.n < 1 || spec.sites < 1 {
            return Err(FieldError::Index("need n >= 1 and N >= 1".into()));
        }
        let ops = CalculusOps::new(&spec)?;
        let table = rules::build_table(&spec, &ops)?;
        Ok(Self::from_table(spec, table))
    }

    pub fn from_table(spec: FieldSpec, table: RuleTable<S>) -> Self {
        FieldAlgebra { spec, table, memo_left: Mutex::new(HashMap::new()), memo_right: Mutex::new(HashMap::new()) }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn rules(&self) -> &RuleTable<S> {
        &self.table
    }

    /// Copy of this algebra with one swap rule replaced (fault injection).
    pub fn with_rule_override(&self, left: Generator, right: Generator, rhs: Rhs<S>) -> Self {
        let mut table = self.table.clone();
        table.insert(left, right, rhs);
        Self::from_table(self.spec, table)
    }

    pub fn gen(&self, kind: GenKind, component: u16, site: u16) -> Result<Generator, FieldError> {
        let g = Generator::new(kind, component, site);
        self.spec.check(&g)?;
        Ok(g)
    }

    /// Element consisting of a single generator.
    pub fn element(&self, g: Generator) -> Result<AlgebraElement<S>, FieldError> {
        self.spec.check(&g)?;
        Ok(AlgebraElement::generator(g).with_spec(self.spec))
    }

    pub fn word_element(&self, gens: &[Generator]) -> Result<AlgebraElement<S>, FieldError> {
        for g in gens {
            self.spec.check(g)?;
        }
        Ok(AlgebraElement::word(gens).with_spec(self.spec))
    }

    pub fn is_nilpotent(&self, g: &Generator) -> bool {
        matches!(self.table.get(g, g), Some(rhs) if rhs.is_empty())
    }

    /// Rewrites a disordered adjacent pair.
    pub fn swap_pair(&self, left: Generator, right: Generator) -> Result<AlgebraElement<S>, FieldError> {
        self.spec.check(&left)?;
        self.spec.check(&right)?;
        match self.table.get(&left, &right) {
            None => Err(FieldError::NoOp(left.name(self.spec.statistics), right.name(self.spec.statistics))),
            Some(rhs) => {
                let mut e = AlgebraElement::zero().with_spec(self.spec);
                for (w, c) in rhs {
                    e.add_term(Word(w.clone()), c);
                }
                Ok(e)
            }
        }
    }

    fn validate(&self, e: &AlgebraElement<S>) -> Result<(), FieldError> {
        if let Some(s) = e.spec {
            if s != self.spec {
                return Err(FieldError::SpecMismatch);
            }
        }
        for w in e.terms.keys() {
            if w.len() > self.spec.degree_cap {
                return Err(FieldError::DegreeCap(w.len(), self.spec.degree_cap));
            }
            for g in &w.0 {
                self.spec.check(g)?;
            }
        }
        Ok(())
    }

    pub fn normal_form(&self, e: &AlgebraElement<S>) -> Result<AlgebraElement<S>, FieldError> {
        self.normal_form_with(e, Strategy::LeftmostFirst)
    }

    pub fn normal_form_with(&self, e: &AlgebraElement<S>, strategy: Strategy) -> Result<AlgebraElement<S>, FieldError> {
        self.validate(e)?;
        let mut out = AlgebraElement::zero().with_spec(self.spec);
        for (w, c) in &e.terms {
            let nf = self.reduce_word(&w.0, strategy);
            for (w2, c2) in nf.iter() {
                let slot = out.terms.entry(w2.clone()).or_insert_with(LaurentPoly::zero);
                *slot = slot.checked_add(&c2.checked_mul(c)?)?;
                if slot.is_zero() {
                    out.terms.remove(w2);
                }
            }
        }
        Ok(out)
    }

    /// Normal form of one word under a strategy, memoized.
    pub(crate) fn reduce_word(&self, w: &[Generator], strategy: Strategy) -> Arc<Terms<S>> {
        let memo = match strategy {
            Strategy::LeftmostFirst => &self.memo_left,
            Strategy::RightmostFirst => &self.memo_right,
        };
        if let Some(hit) = memo.lock().unwrap().get(w) {
            return hit.clone();
        }
        let found = match strategy {
            Strategy::LeftmostFirst => (0..w.len().saturating_sub(1)).find_map(|i| self.table.get(&w[i], &w[i + 1]).map(|r| (i, r))),
            Strategy::RightmostFirst => {
                (0..w.len().saturating_sub(1)).rev().find_map(|i| self.table.get(&w[i], &w[i + 1]).map(|r| (i, r)))
            }
        };
        let result = match found {
            None => {
                let mut t = BTreeMap::new();
                t.insert(Word(w.to_vec()), LaurentPoly::one());
                t
            }
            Some((i, rhs)) => {
                let mut acc: Terms<S> = BTreeMap::new();
                for (rw, c) in rhs {
                    let mut next = Vec::with_capacity(w.len() + rw.len());
                    next.extend_from_slice(&w[..i]);
                    next.extend_from_slice(rw);
                    next.extend_from_slice(&w[i + 2..]);
                    let sub = self.reduce_word(&next, strategy);
                    for (w2, c2) in sub.iter() {
                        let slot = acc.entry(w2.clone()).or_insert_with(LaurentPoly::zero);
                        *slot += &(c2 * c);
                        if slot.is_zero() {
                            acc.remove(w2);
                        }
                    }
                }
                acc
            }
        };
        let result = Arc::new(result);
        memo.lock().unwrap().insert(w.to_vec(), result.clone());
        result
    }

    /// Normal form of the concatenation product.
    pub fn multiply(&self, a: &AlgebraElement<S>, b: &AlgebraElement<S>) -> Result<AlgebraElement<S>, FieldError> {
        self.validate(a)?;
        self.validate(b)?;
        self.normal_form(&a.concat(b)?.with_spec(self.spec))
    }

    /// Whether every word is canonical (no rule applies anywhere).
    pub fn is_normal(&self, e: &AlgebraElement<S>) -> bool {
        e.terms.keys().all(|w| w.0.windows(2).all(|p| self.table.get(&p[0], &p[1]).is_none()))
    }

    /// Canonical words built from field generators only, all degrees.
    pub fn canonical_field_basis(&self, max_len: usize) -> Vec<Word> {
        self.canonical_words(&self.spec.generators(GenKind::Field), max_len)
    }

    /// Canonical words over the given generators up to `max_len`.
    pub fn canonical_words(&self, gens: &[Generator], max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Vec::<Generator>::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for g in gens {
                    if let Some(last) = w.last() {
                        if self.table.get(last, g).is_some() {
                            continue;
                        }
                    }
                    let mut v = w.clone();
                    v.push(*g);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned().map(Word));
            frontier = next;
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests;
