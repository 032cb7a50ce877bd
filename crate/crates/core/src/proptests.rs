//! Randomized checks of the algebraic invariants.

use std::collections::BTreeMap;

use crate::berezin::{classical_pfaffian_oracle, determinant, pfaffian, QuadraticForm};
use crate::exprio::{parse, print};
use crate::rmatrix::{build_big_r, build_small_r};
use crate::{rational, CoeffPoly, FieldSpec, GenKind, Generator, RatAlgebra, RatElement, Rational, Statistics, Word};
use crate::Strategy as Reduction;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rational(n, d))
}

fn poly() -> impl Strategy<Value = CoeffPoly> {
    prop::collection::vec((small_rat(), -3i32..=3, -2i32..=2), 0..5).prop_map(|terms| {
        terms.into_iter().fold(CoeffPoly::zero(), |acc, (c, qe, le)| &acc + &CoeffPoly::monomial(c, qe, le))
    })
}

fn nonzero_rat() -> impl Strategy<Value = Rational> {
    small_rat().prop_filter("nonzero", |v| *v != rational(0, 1))
}

fn gen_of(spec: FieldSpec) -> impl Strategy<Value = Generator> {
    let kinds = if spec.statistics == Statistics::Grassmann {
        vec![GenKind::Field, GenKind::Differential, GenKind::Derivative]
    } else {
        vec![GenKind::Field, GenKind::Differential]
    };
    (prop::sample::select(kinds), 1..=spec.n as u16, 1..=spec.sites as u16).prop_map(|(k, a, r)| Generator::new(k, a, r))
}

fn element(spec: FieldSpec, max_len: usize) -> impl Strategy<Value = RatElement> {
    prop::collection::vec((prop::collection::vec(gen_of(spec), 0..=max_len), poly()), 0..4).prop_map(move |terms| {
        let mut e = RatElement::zero().with_spec(spec);
        for (w, c) in terms {
            e.add_term(Word(w), &c);
        }
        e
    })
}

fn antisymmetric(n: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(small_rat(), n * (n - 1) / 2).prop_map(move |vals| {
        let mut m = vec![vec![rational(0, 1); n]; n];
        let mut it = vals.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = it.next().unwrap();
                m[j][i] = -v.clone();
                m[i][j] = v;
            }
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &CoeffPoly::one(), a.clone());
    }

    #[test]
    fn eval_is_a_homomorphism(a in poly(), b in poly(), q0 in nonzero_rat(), l0 in nonzero_rat()) {
        let none = BTreeMap::new();
        let ev = |p: &CoeffPoly| p.eval(&q0, &l0, &none).unwrap();
        prop_assert_eq!(ev(&(&a * &b)), ev(&a) * ev(&b));
        prop_assert_eq!(ev(&(&a + &b)), ev(&a) + ev(&b));
    }

    #[test]
    fn coefficient_text_round_trips(a in poly()) {
        let back = crate::parse_coeff(&a.to_string(), None).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn transpose_and_compose(n in 2usize..=3) {
        let r = build_small_r::<Rational>(n).unwrap();
        prop_assert_eq!(r.transpose().transpose(), r.clone());
        let r2 = r.compose(&r).unwrap();
        prop_assert_eq!(r2.compose(&r).unwrap(), r.compose(&r2).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn print_parse_round_trip(e in element(FieldSpec::grassmann(2, 2), 3), boson in any::<bool>()) {
        let spec = if boson { FieldSpec::boson(2, 2) } else { FieldSpec::grassmann(2, 2) };
        let e = if boson {
            let mut b = RatElement::zero().with_spec(spec);
            for (w, c) in e.terms() {
                if !w.contains_kind(GenKind::Derivative) {
                    b.add_term(w.clone(), c);
                }
            }
            b
        } else {
            e
        };
        let alg = RatAlgebra::new(spec).unwrap();
        let nf = alg.normal_form(&e).unwrap();
        let text = print(&nf);
        let back = alg.normal_form(&parse(&text, &spec, None).unwrap().evaluate().unwrap()).unwrap();
        prop_assert_eq!(&back, &nf);
        prop_assert_eq!(print(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normal_form_is_idempotent(e in element(FieldSpec::grassmann(2, 2), 4)) {
        let alg = RatAlgebra::new(FieldSpec::grassmann(2, 2)).unwrap();
        let nf = alg.normal_form(&e).unwrap();
        prop_assert!(alg.is_normal(&nf));
        prop_assert_eq!(alg.normal_form(&nf).unwrap(), nf);
    }

    #[test]
    fn strategies_agree_when_l_is_q(e in element(FieldSpec::grassmann(2, 2), 3)) {
        let spec = FieldSpec::grassmann(2, 2).with_l_equals_q(true);
        let alg = RatAlgebra::new(spec).unwrap();
        let e = e.with_spec(spec);
        let l = alg.normal_form_with(&e, Reduction::LeftmostFirst).unwrap();
        let r = alg.normal_form_with(&e, Reduction::RightmostFirst).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn multiplication_associates_when_l_is_q(
        a in element(FieldSpec::grassmann(2, 2), 2),
        b in element(FieldSpec::grassmann(2, 2), 2),
        c in element(FieldSpec::grassmann(2, 2), 2),
    ) {
        let spec = FieldSpec::grassmann(2, 2).with_l_equals_q(true);
        let alg = RatAlgebra::new(spec).unwrap();
        let (a, b, c) = (a.with_spec(spec), b.with_spec(spec), c.with_spec(spec));
        let ab_c = alg.multiply(&alg.multiply(&a, &b).unwrap(), &c).unwrap();
        let a_bc = alg.multiply(&a, &alg.multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn classical_pfaffian_limit(m in (1usize..=3).prop_flat_map(|h| antisymmetric(2 * h))) {
        let spec = FieldSpec::grassmann(m.len(), 1);
        let alg = RatAlgebra::new(spec).unwrap();
        let form = QuadraticForm::from_matrix(spec, &m).unwrap();
        let one = rational(1, 1);
        let pf = pfaffian(&form, &alg).unwrap().eval(&one, &one, &BTreeMap::new()).unwrap();
        let oracle = classical_pfaffian_oracle(&m).unwrap();
        prop_assert_eq!(&pf, &oracle);
        prop_assert_eq!(pf.clone() * pf, determinant(&m));
    }

    #[test]
    fn big_r_reduces_to_blocks_at_one_site(n in 2usize..=3) {
        // with a single site the lattice matrix is the small one
        let big = build_big_r::<Rational>(n, 1, crate::Variant::Q).unwrap();
        prop_assert_eq!(big, build_small_r::<Rational>(n).unwrap());
    }
}
