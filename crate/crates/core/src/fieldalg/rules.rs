//! Swap rules derived by contraction with the lattice R-matrix operators.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{FieldError, FieldSpec, GenKind, Generator, Statistics};
use crate::coeff::LaurentPoly;
use crate::rmatrix::{build_diag_ops, big_r_any_n, TensorOp};
use crate::scalar::Scalar;

/// Right-hand side of a rule: words with coefficients. Empty means zero.
pub type Rhs<S> = Vec<(Vec<Generator>, LaurentPoly<S>)>;

/// Rules keyed by the disordered pair they rewrite. A pair without an
/// entry is canonical.
#[derive(Debug, Clone)]
pub struct RuleTable<S> {
    rules: HashMap<(Generator, Generator), Rhs<S>>,
}

impl<S: Scalar> Default for RuleTable<S> {
    fn default() -> Self {
        RuleTable { rules: HashMap::new() }
    }
}

impl<S: Scalar> RuleTable<S> {
    pub fn get(&self, a: &Generator, b: &Generator) -> Option<&Rhs<S>> {
        self.rules.get(&(*a, *b))
    }

    pub fn insert(&mut self, a: Generator, b: Generator, rhs: Rhs<S>) {
        self.rules.insert((a, b), rhs);
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules sorted by their left-hand pair.
    pub fn sorted(&self) -> Vec<(&(Generator, Generator), &Rhs<S>)> {
        let mut v: Vec<_> = self.rules.iter().collect();
        v.sort_by_key(|(k, _)| **k);
        v
    }

    /// Adds the rules of a same-kind family.
    pub fn add_same_kind(&mut self, fam: &SameKindRules<S>) {
        for (&(x, y), c) in &fam.swaps {
            self.insert(x, y, vec![(vec![y, x], c.clone())]);
        }
        for g in &fam.nilpotent {
            self.insert(*g, *g, Vec::new());
        }
    }
}

/// The operators every rule is contracted from.
#[derive(Debug, Clone)]
pub struct CalculusOps<S> {
    pub r: TensorOp<S>,
    pub i: TensorOp<S>,
    pub j: TensorOp<S>,
    /// `𝓘·𝓡̂`
    pub ir: TensorOp<S>,
    /// `𝓙·𝓡̂`
    pub jr: TensorOp<S>,
    /// `𝓡̂⁻¹ = 𝓡̂ − (𝓙 − 𝓘)`
    pub r_inv: TensorOp<S>,
}

impl<S: Scalar> CalculusOps<S> {
    pub fn new(spec: &FieldSpec) -> Result<Self, FieldError> {
        let mut r = big_r_any_n::<S>(spec.n, spec.sites, spec.variant);
        let (mut i, mut j) = build_diag_ops::<S>(spec.n, spec.sites)?;
        if spec.l_equals_q {
            r = r.specialize_l_to_q();
            i = i.specialize_l_to_q();
            j = j.specialize_l_to_q();
        }
        let ir = i.compose(&r)?;
        let jr = j.compose(&r)?;
        let r_inv = r.sub(&j.sub(&i)?)?;
        Ok(CalculusOps { r, i, j, ir, jr, r_inv })
    }

    /// `P·Mᵀ·P`, the operator the derivative–derivative relation contracts with.
    pub fn flip_transpose(m: &TensorOp<S>) -> Result<TensorOp<S>, FieldError> {
        Ok(m.transpose().flip_conjugate()?)
    }
}

/// Swaps `x·y → c·y·x` for disordered pairs of one kind, plus the set of
/// generators whose square vanishes.
#[derive(Debug, Clone)]
pub struct SameKindRules<S> {
    pub swaps: BTreeMap<(Generator, Generator), LaurentPoly<S>>,
    pub nilpotent: BTreeSet<Generator>,
}

/// Solves the quadratic relations `e_xy + sign·M e_xy = 0` for one kind.
///
/// Each relation must involve only `e_xy` and `e_yx`; the disordered word is
/// eliminated when its coefficient is a unit, and the relation coming from
/// the opposite input must agree.
pub fn derive_same_kind<S: Scalar>(
    spec: &FieldSpec,
    kind: GenKind,
    m: &TensorOp<S>,
    sign: i64,
) -> Result<SameKindRules<S>, FieldError> {
    let d = spec.dim();
    let sgn = LaurentPoly::<S>::from_i64(sign);
    let mut cols: HashMap<usize, Vec<(usize, LaurentPoly<S>)>> = HashMap::new();
    for (&(r, c), v) in m.entries() {
        cols.entry(c).or_default().push((r, v * &sgn));
    }
    // relation vector for input (x,y)
    let relation = |x: usize, y: usize| -> BTreeMap<usize, LaurentPoly<S>> {
        let mut out = BTreeMap::new();
        out.insert(x * d + y, LaurentPoly::one());
        for (r, v) in cols.get(&(x * d + y)).into_iter().flatten() {
            let slot = out.entry(*r).or_insert_with(LaurentPoly::zero);
            *slot += v;
        }
        out.retain(|_, v| !v.is_zero());
        out
    };
    let gen = |k: usize| spec.from_flat(kind, k);
    let mut swaps = BTreeMap::new();
    let mut nilpotent = BTreeSet::new();
    for x in 0..d {
        for y in 0..=x {
            let xy = x * d + y;
            let yx = y * d + x;
            let rel = relation(x, y);
            if rel.keys().any(|&k| k != xy && k != yx) {
                return Err(FieldError::Derivation(format!(
                    "relation for {:?} {:?} is not a two-term exchange",
                    gen(x),
                    gen(y)
                )));
            }
            if x == y {
                if rel.contains_key(&xy) {
                    nilpotent.insert(gen(x));
                }
                continue;
            }
            let zero = LaurentPoly::zero();
            let u = rel.get(&xy).unwrap_or(&zero).clone();
            let v = rel.get(&yx).unwrap_or(&zero).clone();
            let rel2 = relation(y, x);
            let u2 = rel2.get(&xy).unwrap_or(&zero).clone();
            let v2 = rel2.get(&yx).unwrap_or(&zero).clone();
            let (num, den) = if u.is_unit() {
                (v.clone(), u.clone())
            } else if u2.is_unit() {
                (v2.clone(), u2.clone())
            } else {
                return Err(FieldError::Derivation(format!(
                    "no unit pivot for {:?} {:?}",
                    gen(x),
                    gen(y)
                )));
            };
            if !(&(&u * &v2) - &(&u2 * &v)).is_zero() {
                return Err(FieldError::Derivation(format!(
                    "inconsistent exchange relations for {:?} {:?}",
                    gen(x),
                    gen(y)
                )));
            }
            let c = -(&num * &den.inverse()?);
            swaps.insert((gen(x), gen(y)), c);
        }
    }
    Ok(SameKindRules { swaps, nilpotent })
}

struct Acc<S> {
    rules: BTreeMap<(Generator, Generator), BTreeMap<Vec<Generator>, LaurentPoly<S>>>,
}

impl<S: Scalar> Acc<S> {
    fn touch(&mut self, a: Generator, b: Generator) {
        self.rules.entry((a, b)).or_default();
    }

    fn push(&mut self, a: Generator, b: Generator, w: Vec<Generator>, c: LaurentPoly<S>) {
        let slot = self.rules.entry((a, b)).or_default().entry(w).or_insert_with(LaurentPoly::zero);
        *slot += &c;
    }
}

/// Per-statistics choice of operators, signs and nilpotency.
pub(crate) struct Recipe<S> {
    pub field: (TensorOp<S>, i64),
    pub differential: (TensorOp<S>, i64),
    pub derivative: (TensorOp<S>, i64),
    /// Field–differential exchange and derivative–field contraction.
    pub cross: TensorOp<S>,
    pub cross_sign: i64,
    /// Derivative–differential exchange.
    pub cross_inv: TensorOp<S>,
}

pub(crate) fn recipe<S: Scalar>(spec: &FieldSpec, ops: &CalculusOps<S>) -> Result<Recipe<S>, FieldError> {
    Ok(match spec.statistics {
        Statistics::Grassmann => Recipe {
            field: (ops.jr.clone(), 1),
            differential: (ops.ir.clone(), -1),
            derivative: (CalculusOps::flip_transpose(&ops.jr)?, 1),
            cross: ops.ir.clone(),
            cross_sign: -1,
            cross_inv: ops.r_inv.compose(&ops.j)?,
        },
        Statistics::Boson => Recipe {
            field: (ops.ir.clone(), -1),
            differential: (ops.jr.clone(), 1),
            derivative: (CalculusOps::flip_transpose(&ops.ir)?, -1),
            cross: ops.jr.clone(),
            cross_sign: 1,
            cross_inv: ops.r_inv.compose(&ops.i)?,
        },
    })
}

pub(crate) fn build_table<S: Scalar>(spec: &FieldSpec, ops: &CalculusOps<S>) -> Result<RuleTable<S>, FieldError> {
    let rc = recipe(spec, ops)?;
    let mut table = RuleTable::default();
    for (kind, (m, sign)) in [
        (GenKind::Field, &rc.field),
        (GenKind::Differential, &rc.differential),
        (GenKind::Derivative, &rc.derivative),
    ] {
        table.add_same_kind(&derive_same_kind(spec, kind, m, *sign)?);
    }

    let d = spec.dim();
    let f = |k: usize| spec.from_flat(GenKind::Field, k);
    let x = |k: usize| spec.from_flat(GenKind::Differential, k);
    let p = |k: usize| spec.from_flat(GenKind::Derivative, k);
    let mut acc = Acc { rules: BTreeMap::new() };
    for a in 0..d {
        for b in 0..d {
            acc.touch(f(a), x(b));
            acc.touch(p(a), f(b));
            acc.touch(p(a), x(b));
        }
        acc.push(p(a), f(a), Vec::new(), LaurentPoly::one());
    }
    let sigma = LaurentPoly::<S>::from_i64(rc.cross_sign);
    // C[(c,d),(a,b)]: x_a ξ_b → C ξ_c x_d ; ∂^c x_a → δ + σ C x_d ∂^b
    for ((c, dd), (a, b), v) in rc.cross.pair_entries() {
        acc.push(f(a), x(b), vec![x(c), f(dd)], v.clone());
        acc.push(p(c), f(a), vec![f(dd), p(b)], v * &sigma);
    }
    // D[(c,d),(a,b)]: ∂^c ξ_a → D ξ_d ∂^b
    for ((c, dd), (a, b), v) in rc.cross_inv.pair_entries() {
        acc.push(p(c), x(a), vec![x(dd), p(b)], v.clone());
    }
    for ((l, r), words) in acc.rules {
        let rhs: Rhs<S> = words.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        table.insert(l, r, rhs);
    }
    Ok(table)
}
