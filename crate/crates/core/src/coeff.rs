//! Laurent polynomials in `q`, `l` over a scalar field, extended by commuting
//! parameter symbols `a[i,j,...]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("parameter universes differ ({0} vs {1})")]
    UniverseMismatch(u64, u64),
    #[error("evaluation point outside the Laurent domain: {0}")]
    EvalDomain(String),
    #[error("no binding for parameter {0}")]
    Unbound(String),
    #[error("{0} has no inverse in the coefficient ring")]
    NotInvertible(String),
}

/// Identifies the computation context a set of parameter symbols belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Universe(u64);

impl Universe {
    pub fn id(self) -> u64 {
        self.0
    }
}

static NEXT_UNIVERSE: AtomicU64 = AtomicU64::new(1);

/// Interning scope for parameter symbols. Polynomials built from symbols of
/// different contexts refuse to combine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamContext {
    universe: Universe,
}

impl Default for ParamContext {
    fn default() -> Self {
        Self::new()
    }
}

impl ParamContext {
    pub fn new() -> Self {
        ParamContext { universe: Universe(NEXT_UNIVERSE.fetch_add(1, Ordering::Relaxed)) }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// The symbol `a[indices]` as a polynomial.
    pub fn symbol<S: Scalar>(&self, indices: &[u32]) -> LaurentPoly<S> {
        let mono = Monomial { q: 0, l: 0, params: vec![(ParamSym(indices.to_vec()), 1)] };
        let mut terms = BTreeMap::new();
        terms.insert(mono, S::one());
        LaurentPoly { terms, universe: Some(self.universe) }
    }
}

/// A commuting parameter `a[i,j,...]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamSym(pub Vec<u32>);

impl fmt::Display for ParamSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a[")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i)?;
        }
        write!(f, "]")
    }
}

/// `q^q l^l Π a^e`. Parameter list is sorted by symbol with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub q: i32,
    pub l: i32,
    pub params: Vec<(ParamSym, u32)>,
}

impl Monomial {
    pub fn ql(q: i32, l: i32) -> Self {
        Monomial { q, l, params: Vec::new() }
    }

    pub fn is_one(&self) -> bool {
        self.q == 0 && self.l == 0 && self.params.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut params: BTreeMap<ParamSym, u32> = BTreeMap::new();
        for (s, e) in self.params.iter().chain(other.params.iter()) {
            *params.entry(s.clone()).or_insert(0) += e;
        }
        Monomial { q: self.q + other.q, l: self.l + other.l, params: params.into_iter().collect() }
    }

    fn fmt_factors(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            Ok(())
        };
        for (name, e) in [("l", self.l), ("q", self.q)] {
            if e != 0 {
                sep(f)?;
                if e == 1 {
                    write!(f, "{}", name)?;
                } else {
                    write!(f, "{}^{}", name, e)?;
                }
            }
        }
        for (s, e) in &self.params {
            sep(f)?;
            if *e == 1 {
                write!(f, "{}", s)?;
            } else {
                write!(f, "{}^{}", s, e)?;
            }
        }
        Ok(())
    }
}

/// Canonical sparse Laurent polynomial. No stored coefficient is zero.
#[derive(Debug, Clone)]
pub struct LaurentPoly<S> {
    terms: BTreeMap<Monomial, S>,
    universe: Option<Universe>,
}

impl<S: PartialEq> PartialEq for LaurentPoly<S> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<S: Eq> Eq for LaurentPoly<S> {}

impl<S: Scalar> Default for LaurentPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

fn join_universe(a: Option<Universe>, b: Option<Universe>) -> Result<Option<Universe>, CoeffError> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(CoeffError::UniverseMismatch(x.0, y.0)),
        (Some(x), _) => Ok(Some(x)),
        (None, y) => Ok(y),
    }
}

fn spow<S: Scalar>(base: &S, e: i32) -> S {
    let mut acc = S::one();
    for _ in 0..e.unsigned_abs() {
        acc = acc * base.clone();
    }
    if e < 0 {
        S::one() / acc
    } else {
        acc
    }
}

impl<S: Scalar> LaurentPoly<S> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new(), universe: None }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::term(Monomial::default(), c)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::constant(S::from_i64(v))
    }

    pub fn term(m: Monomial, c: S) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms, universe: None }
    }

    /// `c * q^qe * l^le`
    pub fn monomial(c: S, qe: i32, le: i32) -> Self {
        Self::term(Monomial::ql(qe, le), c)
    }

    pub fn q() -> Self {
        Self::q_pow(1)
    }

    pub fn l() -> Self {
        Self::l_pow(1)
    }

    pub fn q_pow(e: i32) -> Self {
        Self::monomial(S::one(), e, 0)
    }

    pub fn l_pow(e: i32) -> Self {
        Self::monomial(S::one(), 0, e)
    }

    pub fn universe(&self) -> Option<Universe> {
        self.universe
    }

    /// Rebuilds a polynomial from raw terms, dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, S)>>(it: I, universe: Option<Universe>) -> Self {
        let mut p = LaurentPoly { terms: BTreeMap::new(), universe };
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    /// The scalar value if the polynomial is constant (zero included).
    pub fn as_constant(&self) -> Option<S> {
        match self.terms.len() {
            0 => Some(S::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Leading sign of the canonical printed form.
    pub fn leading_is_negative(&self) -> bool {
        self.terms.values().next().map(|c| c.is_negative()).unwrap_or(false)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CoeffError> {
        let universe = join_universe(self.universe, other.universe)?;
        let mut out = self.clone();
        out.universe = universe;
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CoeffError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CoeffError> {
        let universe = join_universe(self.universe, other.universe)?;
        let mut out = LaurentPoly { terms: BTreeMap::new(), universe };
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
        Ok(out)
    }

    fn neg_ref(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
            universe: self.universe,
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return LaurentPoly { terms: BTreeMap::new(), universe: self.universe };
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone())).collect(),
            universe: self.universe,
        }
    }

    /// Multiplies by `q^qe l^le`.
    pub fn shift(&self, qe: i32, le: i32) -> Self {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Monomial { q: m.q + qe, l: m.l + le, params: m.params.clone() }, c.clone()))
                .collect(),
            universe: self.universe,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        acc.universe = self.universe;
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse of a unit: a single term `c q^a l^b` without parameters.
    pub fn inverse(&self) -> Result<Self, CoeffError> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.params.is_empty() {
                return Ok(Self::monomial(S::one() / c.clone(), -m.q, -m.l));
            }
        }
        Err(CoeffError::NotInvertible(self.to_string()))
    }

    pub fn is_unit(&self) -> bool {
        self.inverse().is_ok()
    }

    /// Full evaluation to a scalar.
    pub fn eval(&self, q0: &S, l0: &S, bindings: &BTreeMap<ParamSym, S>) -> Result<S, CoeffError> {
        let p = self.eval_ql(q0, l0)?;
        let mut acc = S::zero();
        for (m, c) in &p.terms {
            let mut v = c.clone();
            for (s, e) in &m.params {
                let b = bindings.get(s).ok_or_else(|| CoeffError::Unbound(s.to_string()))?;
                v = v * spow(b, *e as i32);
            }
            acc = acc + v;
        }
        Ok(acc)
    }

    /// Substitutes numeric `q`, `l`; parameter symbols stay symbolic.
    pub fn eval_ql(&self, q0: &S, l0: &S) -> Result<Self, CoeffError> {
        if q0.is_zero() {
            return Err(CoeffError::EvalDomain("q = 0".into()));
        }
        if l0.is_zero() {
            return Err(CoeffError::EvalDomain("l = 0".into()));
        }
        let mut out = LaurentPoly { terms: BTreeMap::new(), universe: self.universe };
        for (m, c) in &self.terms {
            let v = c.clone() * spow(q0, m.q) * spow(l0, m.l);
            out.add_term(Monomial { q: 0, l: 0, params: m.params.clone() }, v);
        }
        Ok(out)
    }

    /// The specialization `l = q`.
    pub fn specialize_l_to_q(&self) -> Self {
        let mut out = LaurentPoly { terms: BTreeMap::new(), universe: self.universe };
        for (m, c) in &self.terms {
            out.add_term(Monomial { q: m.q + m.l, l: 0, params: m.params.clone() }, c.clone());
        }
        out
    }

    pub fn params(&self) -> BTreeSet<ParamSym> {
        self.terms.keys().flat_map(|m| m.params.iter().map(|(s, _)| s.clone())).collect()
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LaurentPoly<T> {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), f(c))), self.universe)
    }

    /// Coefficient (a polynomial in `q`, `l`) of a given parameter monomial.
    pub fn param_coefficient(&self, params: &[(ParamSym, u32)]) -> Self {
        LaurentPoly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.params == params)
                .map(|(m, c)| (Monomial::ql(m.q, m.l), c.clone())),
            None,
        )
    }
}

impl<S: Scalar> fmt::Display for LaurentPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", mag.to_text())?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", mag.to_text())?;
                }
                m.fmt_factors(f)?;
            }
        }
        Ok(())
    }
}

fn expect<T>(r: Result<T, CoeffError>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => panic!("coefficient arithmetic: {}", e),
    }
}

impl<S: Scalar> Add for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn add(self, rhs: Self) -> LaurentPoly<S> {
        expect(self.checked_add(rhs))
    }
}

impl<S: Scalar> Sub for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn sub(self, rhs: Self) -> LaurentPoly<S> {
        expect(self.checked_sub(rhs))
    }
}

impl<S: Scalar> Mul for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn mul(self, rhs: Self) -> LaurentPoly<S> {
        expect(self.checked_mul(rhs))
    }
}

impl<S: Scalar> Neg for &LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn neg(self) -> LaurentPoly<S> {
        self.neg_ref()
    }
}

impl<S: Scalar> Add for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn add(self, rhs: Self) -> LaurentPoly<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn sub(self, rhs: Self) -> LaurentPoly<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn mul(self, rhs: Self) -> LaurentPoly<S> {
        &self * &rhs
    }
}

impl<S: Scalar> Neg for LaurentPoly<S> {
    type Output = LaurentPoly<S>;
    fn neg(self) -> LaurentPoly<S> {
        self.neg_ref()
    }
}

impl<S: Scalar> AddAssign<&LaurentPoly<S>> for LaurentPoly<S> {
    fn add_assign(&mut self, rhs: &LaurentPoly<S>) {
        self.universe = expect(join_universe(self.universe, rhs.universe));
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<S: Scalar> SubAssign<&LaurentPoly<S>> for LaurentPoly<S> {
    fn sub_assign(&mut self, rhs: &LaurentPoly<S>) {
        self.universe = expect(join_universe(self.universe, rhs.universe));
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<S: Scalar> MulAssign<&LaurentPoly<S>> for LaurentPoly<S> {
    fn mul_assign(&mut self, rhs: &LaurentPoly<S>) {
        *self = &*self * rhs;
    }
}
