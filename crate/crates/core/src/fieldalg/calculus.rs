//! Exterior derivative, partial derivatives, the confluence check and the
//! printed component tables used as oracles.

use super::{AlgebraElement, FieldAlgebra, FieldError, GenKind, Generator, Statistics, Strategy, Word};
use crate::coeff::LaurentPoly;
use crate::report::{VerificationReport, Witness};
use crate::rmatrix::Variant;
use crate::scalar::Scalar;

/// One printed exchange line instantiated at concrete indices:
/// `left.0 · left.1 = coefficient · right`.
#[derive(Debug, Clone)]
pub struct TableLine<S> {
    pub label: String,
    pub left: (Generator, Generator),
    pub right: Vec<Generator>,
    pub coefficient: LaurentPoly<S>,
}

/// A printed table, with notes on lines that had to be read non-literally.
#[derive(Debug, Clone)]
pub struct PrintedTable<S> {
    pub name: String,
    pub lines: Vec<TableLine<S>>,
    pub notes: Vec<String>,
}

fn mono<S: Scalar>(c: i64, qe: i32, le: i32) -> LaurentPoly<S> {
    LaurentPoly::monomial(S::from_i64(c), qe, le)
}

impl<S: Scalar> FieldAlgebra<S> {
    fn ensure_no(&self, e: &AlgebraElement<S>, kind: GenKind, what: &str) -> Result<(), FieldError> {
        if e.terms().keys().any(|w| w.contains_kind(kind)) {
            return Err(FieldError::Domain(format!("{} must not contain {:?} generators", what, kind)));
        }
        Ok(())
    }

    /// Graded Leibniz action `d(fg) = (df)g + (-1)^{|f|} f dg`, then normal form.
    pub fn apply_d(&self, e: &AlgebraElement<S>) -> Result<AlgebraElement<S>, FieldError> {
        self.ensure_no(e, GenKind::Derivative, "argument of d")?;
        let mut out = AlgebraElement::zero().with_spec(self.spec);
        for (w, c) in e.terms() {
            let mut odd = false;
            for (i, g) in w.0.iter().enumerate() {
                if g.kind == GenKind::Field {
                    let mut v = w.0.clone();
                    v[i] = g.with_kind(GenKind::Differential);
                    let coeff = if odd { -c.clone() } else { c.clone() };
                    out.add_term(Word(v), &coeff);
                }
                if self.spec.is_odd(g.kind) {
                    odd = !odd;
                }
            }
        }
        self.normal_form(&out)
    }

    /// `d` as left multiplication by `Σ dx_k ∂^k`, keeping the vacuum part.
    pub fn apply_d_via_derivatives(&self, e: &AlgebraElement<S>) -> Result<AlgebraElement<S>, FieldError> {
        self.ensure_no(e, GenKind::Derivative, "argument of d")?;
        let mut op = AlgebraElement::zero().with_spec(self.spec);
        for k in 0..self.spec.dim() {
            let w = vec![self.spec.from_flat(GenKind::Differential, k), self.spec.from_flat(GenKind::Derivative, k)];
            op.add_term(Word(w), &LaurentPoly::one());
        }
        Ok(self.multiply(&op, e)?.without_kind(GenKind::Derivative))
    }

    /// `∂(e)`: left multiplication, reduction, vacuum truncation.
    pub fn apply_derivative(&self, g: Generator, e: &AlgebraElement<S>) -> Result<AlgebraElement<S>, FieldError> {
        if g.kind != GenKind::Derivative {
            return Err(FieldError::Domain(format!("{} is not a derivative", g.name(self.spec.statistics))));
        }
        self.spec.check(&g)?;
        self.ensure_no(e, GenKind::Derivative, "argument of a derivative")?;
        Ok(self.multiply(&AlgebraElement::generator(g).with_spec(self.spec), e)?.without_kind(GenKind::Derivative))
    }

    /// Compares leftmost-first and rightmost-first reduction of every word
    /// of length `2..=max_len` over all generators.
    pub fn check_local_confluence(&self, max_len: usize) -> VerificationReport {
        let gens = self.spec.all_generators();
        let stat = self.spec.statistics;
        let mut rep = VerificationReport::new("local-confluence");
        let mut frontier: Vec<Vec<Generator>> = gens.iter().map(|g| vec![*g]).collect();
        for _ in 2..=max_len {
            let mut next = Vec::with_capacity(frontier.len() * gens.len());
            for w in &frontier {
                for g in &gens {
                    let mut v = w.clone();
                    v.push(*g);
                    next.push(v);
                }
            }
            for w in &next {
                rep.checked += 1;
                let a = self.reduce_word(w, Strategy::LeftmostFirst);
                let b = self.reduce_word(w, Strategy::RightmostFirst);
                if a != b {
                    let ea = AlgebraElement::from_terms((*a).clone(), None);
                    let eb = AlgebraElement::from_terms((*b).clone(), None);
                    rep.fail(Witness::Word { word: Word(w.clone()).text(stat), left: ea.text(stat), right: eb.text(stat) });
                }
            }
            frontier = next;
        }
        rep
    }

    /// `d∘d = 0` on canonical words with at most `max_deg` fields and at
    /// most `max_deg` differentials.
    pub fn check_d_squared(&self, max_deg: usize) -> Result<VerificationReport, FieldError> {
        let mut rep = VerificationReport::new("d-squared");
        for w in self.mixed_basis(max_deg)? {
            rep.checked += 1;
            let e = AlgebraElement::term(w.clone(), LaurentPoly::one()).with_spec(self.spec);
            let dd = self.apply_d(&self.apply_d(&e)?)?;
            if !dd.is_zero() {
                rep.fail(Witness::Mismatch { item: w.text(self.spec.statistics), expected: "0".into(), actual: dd.to_string() });
            }
        }
        Ok(rep)
    }

    /// Agreement of the Leibniz and `dx·∂` implementations of `d`.
    pub fn check_d_routes(&self, max_deg: usize) -> Result<VerificationReport, FieldError> {
        let mut rep = VerificationReport::new("d-routes-agree");
        for w in self.mixed_basis(max_deg)? {
            rep.checked += 1;
            let e = AlgebraElement::term(w.clone(), LaurentPoly::one()).with_spec(self.spec);
            let a = self.apply_d(&e)?;
            let b = self.apply_d_via_derivatives(&e)?;
            if a != b {
                rep.fail(Witness::Mismatch { item: w.text(self.spec.statistics), expected: a.to_string(), actual: b.to_string() });
            }
        }
        Ok(rep)
    }

    /// Canonical words: up to `max_deg` differentials followed by up to
    /// `max_deg` fields.
    fn mixed_basis(&self, max_deg: usize) -> Result<Vec<Word>, FieldError> {
        let diffs = self.canonical_words(&self.spec.generators(GenKind::Differential), max_deg);
        let fields = self.canonical_words(&self.spec.generators(GenKind::Field), max_deg);
        let mut out = Vec::new();
        for a in &diffs {
            for b in &fields {
                out.push(a.concat(b));
            }
        }
        out.sort();
        Ok(out)
    }

    /// `∂^k_α(x^β_l) = δ δ` and `∂(dx) = 0` on single generators.
    pub fn check_derivative_on_generators(&self) -> Result<VerificationReport, FieldError> {
        let mut rep = VerificationReport::new("derivative-on-generators");
        for p in self.spec.generators(GenKind::Derivative) {
            for kind in [GenKind::Field, GenKind::Differential] {
                for g in self.spec.generators(kind) {
                    rep.checked += 1;
                    let got = self.apply_derivative(p, &AlgebraElement::generator(g).with_spec(self.spec))?;
                    let hit = kind == GenKind::Field && g.site == p.site && g.component == p.component;
                    let want = if hit {
                        AlgebraElement::one().with_spec(self.spec)
                    } else {
                        AlgebraElement::zero().with_spec(self.spec)
                    };
                    if got != want {
                        rep.fail(Witness::Mismatch {
                            item: format!("{}({})", p.name(self.spec.statistics), g.name(self.spec.statistics)),
                            expected: want.to_string(),
                            actual: got.to_string(),
                        });
                    }
                }
            }
        }
        Ok(rep)
    }

    /// The printed field exchange table for this spec's statistics and
    /// variant, instantiated at every `α > β`, `r_i < r_j`.
    pub fn printed_field_table(&self) -> PrintedTable<S> {
        let (same, cross, hi, lo): (LaurentPoly<S>, LaurentPoly<S>, LaurentPoly<S>, LaurentPoly<S>) =
            match (self.spec.statistics, self.spec.variant) {
                (Statistics::Grassmann, Variant::Q) => (mono(-1, 1, 0), mono(-1, 0, 1), mono(-1, 1, 1), mono(-1, -1, 1)),
                (Statistics::Grassmann, Variant::QTranspose) => {
                    (mono(-1, 1, 0), mono(-1, 0, 1), mono(-1, -1, 1), mono(-1, 1, 1))
                }
                (Statistics::Boson, Variant::Q) => (mono(1, -1, 0), mono(1, 0, -1), mono(1, 1, -1), mono(1, -1, -1)),
                (Statistics::Boson, Variant::QTranspose) => {
                    (mono(1, -1, 0), mono(1, 0, -1), mono(1, -1, -1), mono(1, 1, -1))
                }
            };
        let mut t = PrintedTable { name: "field-exchange".into(), lines: Vec::new(), notes: Vec::new() };
        push_pattern(&mut t, self.spec.n, self.spec.sites, GenKind::Field, [same, cross, hi, lo]);
        t
    }

    /// The printed derivative exchange table (Grassmann). Its last line
    /// puts both factors on site `r_j`, which is not an exchange; it is
    /// compared under the reading with the right factor on `r_i`.
    pub fn printed_derivative_table(&self) -> PrintedTable<S> {
        let mut t = PrintedTable { name: "derivative-exchange".into(), lines: Vec::new(), notes: Vec::new() };
        push_pattern(
            &mut t,
            self.spec.n,
            self.spec.sites,
            GenKind::Derivative,
            [mono(-1, 1, 0), mono(-1, 0, 1), mono(-1, 1, 1), mono(-1, -1, 1)],
        );
        t.notes.push(
            "last printed line reads dd[b,r_j]*dd[a,r_j] on the left; compared as dd[b,r_j]*dd[a,r_i]".to_string(),
        );
        t
    }

    /// Checks each table line against the derived swap rule.
    pub fn compare_table(&self, table: &PrintedTable<S>) -> Result<VerificationReport, FieldError> {
        let mut rep = VerificationReport::new(table.name.clone());
        let stat = self.spec.statistics;
        for line in &table.lines {
            rep.checked += 1;
            let got = self.swap_pair(line.left.0, line.left.1)?;
            let want = AlgebraElement::term(Word(line.right.clone()), line.coefficient.clone()).with_spec(self.spec);
            if got != want {
                rep.fail(Witness::Mismatch {
                    item: format!("{}: {}*{}", line.label, line.left.0.name(stat), line.left.1.name(stat)),
                    expected: want.to_string(),
                    actual: got.to_string(),
                });
            }
        }
        for n in &table.notes {
            rep.note(n.clone());
        }
        Ok(rep)
    }
}

/// Instantiates the four-line exchange pattern
/// same site / same component / higher component first / lower component first.
pub(crate) fn push_pattern<S: Scalar>(t: &mut PrintedTable<S>, n: usize, sites: usize, kind: GenKind, coeffs: [LaurentPoly<S>; 4]) {
    let g = |a: usize, r: usize| Generator::new(kind, a as u16, r as u16);
    let [same, cross, hi, lo] = coeffs;
    for a in 1..=n {
        for b in 1..a {
            for r in 1..=sites {
                t.lines.push(TableLine {
                    label: "same site".into(),
                    left: (g(a, r), g(b, r)),
                    right: vec![g(b, r), g(a, r)],
                    coefficient: same.clone(),
                });
            }
        }
    }
    for ri in 1..=sites {
        for rj in ri + 1..=sites {
            for a in 1..=n {
                t.lines.push(TableLine {
                    label: "same component".into(),
                    left: (g(a, rj), g(a, ri)),
                    right: vec![g(a, ri), g(a, rj)],
                    coefficient: cross.clone(),
                });
                for b in 1..a {
                    t.lines.push(TableLine {
                        label: "higher component on later site".into(),
                        left: (g(a, rj), g(b, ri)),
                        right: vec![g(b, ri), g(a, rj)],
                        coefficient: hi.clone(),
                    });
                    t.lines.push(TableLine {
                        label: "lower component on later site".into(),
                        left: (g(b, rj), g(a, ri)),
                        right: vec![g(a, ri), g(b, rj)],
                        coefficient: lo.clone(),
                    });
                }
            }
        }
    }
}
