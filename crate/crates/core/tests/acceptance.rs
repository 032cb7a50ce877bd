//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line
//! each, and exits nonzero if any failed.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use lqcalc::berezin::{berezin_integrate, classical_pfaffian_oracle, determinant, epsilon, gaussian_integral, pfaffian};
use lqcalc::covariance::{self, QGen, QPoly, QWord};
use lqcalc::rmatrix::{self, ProjectorVerdict};
use lqcalc::{
    rational, AlgebraElement, CoeffPoly, EpsilonQuery, FieldSpec, GenKind, Generator, ParamContext, QuadraticForm,
    RatAlgebra, RatOp, Rational, Statistics, Variant, VerificationReport, Word,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, detail: String::new() }
    }

    fn require(&mut self, ok: bool, what: impl AsRef<str>) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(what.as_ref());
        }
    }

    fn report(&mut self, rep: &VerificationReport, ctx: &str) {
        let msg = format!("{} {} failed ({} witnesses)", ctx, rep.identity, rep.witness_count);
        self.require(rep.passed, msg);
    }

    fn within(&mut self, start: Instant, limit: Duration, ctx: &str) {
        let t = start.elapsed();
        self.require(t < limit, format!("{} took {:.1?}, limit {:?}", ctx, t, limit));
    }

    fn info(&mut self, s: impl AsRef<str>) {
        if self.passed {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(s.as_ref());
        }
    }
}

fn small_matrix_suite() -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=4 {
        let start = Instant::now();
        let r = rmatrix::build_small_r::<Rational>(n).unwrap();
        let (i, j) = rmatrix::small_diag_ops::<Rational>(n);
        let ctx = format!("n={}", n);
        o.report(&rmatrix::verify_ybe(&r).unwrap(), &ctx);
        let hecke = rmatrix::verify_hecke(&r, &i, &j).unwrap();
        o.report(&hecke, &ctx);
        for form in ["hecke-quadratic", "hecke-factored"] {
            o.require(hecke.check(form).is_some_and(|c| c.passed), format!("{} {} missing or failed", ctx, form));
        }
        o.report(&rmatrix::verify_index_symmetry(&r).unwrap(), &ctx);
        o.report(&rmatrix::verify_eigenvalues(&r).unwrap(), &ctx);
        o.within(start, Duration::from_secs(10), &ctx);
    }
    o
}

fn small_projectors() -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=3 {
        let (a, s) = rmatrix::build_projectors_small::<Rational>(n).unwrap();
        o.report(&rmatrix::verify_small_projectors(&a, &s).unwrap(), &format!("n={}", n));
    }
    o
}

fn lattice_matrix_suite() -> Outcome {
    let mut o = Outcome::new();
    for (n, sites) in [(2, 2), (2, 3), (3, 2)] {
        for v in [Variant::Q, Variant::QTranspose] {
            let start = Instant::now();
            let ctx = format!("(n,N)=({},{}) {}", n, sites, v.name());
            let r = rmatrix::build_big_r::<Rational>(n, sites, v).unwrap();
            let (i, j) = rmatrix::build_diag_ops::<Rational>(n, sites).unwrap();
            o.report(&rmatrix::verify_ybe(&r).unwrap(), &ctx);
            let hecke = rmatrix::verify_hecke(&r, &i, &j).unwrap();
            o.report(&hecke, &ctx);
            for form in ["hecke-quadratic", "hecke-factored"] {
                o.require(hecke.check(form).is_some_and(|c| c.passed), format!("{} {} missing or failed", ctx, form));
            }
            o.within(start, Duration::from_secs(120), &ctx);
        }
    }
    o
}

fn projector_adjudication() -> Outcome {
    let mut o = Outcome::new();
    let (a, s) = rmatrix::build_big_projectors::<Rational>(2, 2, Variant::Q).unwrap();
    let (i, j) = rmatrix::build_diag_ops::<Rational>(2, 2).unwrap();
    let (rep, verdict) = rmatrix::verify_projector_identities(&a, &s, &i, &j).unwrap();
    // orthogonality recomputed directly
    let zero = RatOp::zero(2, 2, 2);
    o.require(a.compose(&s).unwrap() == zero, "A*S != 0");
    o.require(s.compose(&a).unwrap() == zero, "S*A != 0");
    for name in ["a-s-orthogonal", "s-a-orthogonal"] {
        o.require(rep.check(name).is_some_and(|c| c.passed), format!("{} failed", name));
    }
    o.require(verdict != ProjectorVerdict::Neither, "neither normalization holds");
    o.require(rep.verdict.as_deref().is_some_and(|v| !v.is_empty()), "empty verdict");
    o.info(format!("verdict: {}", verdict.text()));
    o
}

fn confluence() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for stat in [Statistics::Grassmann, Statistics::Boson] {
        for v in [Variant::Q, Variant::QTranspose] {
            let alg = RatAlgebra::new(FieldSpec::new(2, 2, stat).with_variant(v)).unwrap();
            let rep = alg.check_local_confluence(3);
            o.report(&rep, &format!("{} {}", stat.name(), v.name()));
        }
    }
    o.within(start, Duration::from_secs(60), "all cases");
    o
}

fn differential_calculus() -> Outcome {
    let mut o = Outcome::new();
    for stat in [Statistics::Grassmann, Statistics::Boson] {
        for v in [Variant::Q, Variant::QTranspose] {
            let ctx = format!("{} {}", stat.name(), v.name());
            let alg = RatAlgebra::new(FieldSpec::new(2, 2, stat).with_variant(v)).unwrap();
            o.report(&alg.check_d_squared(2).unwrap(), &ctx);
            o.report(&alg.check_derivative_on_generators().unwrap(), &ctx);
            o.report(&alg.compare_table(&alg.printed_field_table()).unwrap(), &ctx);
        }
    }
    let alg = RatAlgebra::new(FieldSpec::grassmann(2, 2)).unwrap();
    let rep = alg.compare_table(&alg.printed_derivative_table()).unwrap();
    o.require(rep.checked > 0, "derivative table comparison examined nothing");
    o.info(format!(
        "derivative table: {}",
        if rep.passed { "match".to_string() } else { format!("mismatch on {} of {} lines", rep.witness_count, rep.checked) }
    ));
    o
}

fn pfaffian_closed_form() -> Outcome {
    let mut o = Outcome::new();
    let ctx = ParamContext::new();
    let spec = FieldSpec::grassmann(4, 1);
    let alg = RatAlgebra::new(spec).unwrap();
    let w = QuadraticForm::symbolic(spec, &ctx);
    let got = pfaffian(&w, &alg).unwrap();
    let a = |i: u32, j: u32| -> CoeffPoly { ctx.symbol(&[i, j]) };
    let q = CoeffPoly::q;
    let half = CoeffPoly::constant(rational(1, 2));
    let one = CoeffPoly::one();
    let expected = &(&(&(&half * &(&one + &q().pow(4))) * &a(1, 2)) * &a(3, 4))
        - &(&(&(&(&half * &q()) * &(&one + &q().pow(2))) * &a(1, 3)) * &a(2, 4))
        + &(&q().pow(2) * &a(1, 4)) * &a(2, 3);
    o.require(got == expected, format!("got {}", got));
    o
}

fn gaussian_theorem() -> Outcome {
    let mut o = Outcome::new();
    for (n, sites) in [(2, 1), (4, 1), (2, 2)] {
        let start = Instant::now();
        let ctx = ParamContext::new();
        let spec = FieldSpec::grassmann(n, sites);
        let alg = RatAlgebra::new(spec).unwrap();
        let w = QuadraticForm::symbolic(spec, &ctx);
        let pf = pfaffian(&w, &alg).unwrap();
        let g = gaussian_integral(&w, &alg).unwrap();
        o.require(pf == g, format!("({},{}): pfaffian {} != gaussian {}", n, sites, pf, g));
        o.require(!pf.is_zero(), format!("({},{}): pfaffian vanishes", n, sites));
        if (n, sites) == (2, 2) {
            o.within(start, Duration::from_secs(60), "(2,2)");
        }
    }
    o
}

fn classical_limit() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let one = rational(1, 1);
    let mut samples = 0;
    for size in [2usize, 4, 6] {
        let spec = FieldSpec::grassmann(size, 1);
        let alg = RatAlgebra::new(spec).unwrap();
        for _ in 0..8 {
            let mut m = vec![vec![rational(0, 1); size]; size];
            for i in 0..size {
                for j in i + 1..size {
                    let v = rational(rng.gen_range(-9..=9), rng.gen_range(1..=5));
                    m[j][i] = -v.clone();
                    m[i][j] = v;
                }
            }
            let form = QuadraticForm::from_matrix(spec, &m).unwrap();
            let pf = pfaffian(&form, &alg).unwrap().eval(&one, &one, &BTreeMap::new()).unwrap();
            let oracle = classical_pfaffian_oracle(&m).unwrap();
            o.require(pf == oracle, format!("size {}: {} != {}", size, pf, oracle));
            o.require(pf.clone() * pf == determinant(&m), format!("size {}: Pf^2 != det", size));
            samples += 1;
        }
    }
    o.require(samples >= 20, "too few samples");
    o.info(format!("{} samples", samples));
    o
}

fn covariance_n2() -> Outcome {
    let mut o = Outcome::new();
    let set = covariance::derive_rtt_relations::<Rational>(2).unwrap();
    o.report(&covariance::verify_round_trip(&set, &rational(7, 3)).unwrap(), "");
    o.report(&covariance::verify_qdet_central(&set), "");
    for stat in [Statistics::Grassmann, Statistics::Boson] {
        o.report(&covariance::verify_plane_covariance(stat, &set).unwrap(), "");
    }
    let (rep, det) = covariance::verify_det_top_form(&set, None).unwrap();
    o.report(&rep, "");
    let word = |x: QGen, y: QGen| QWord(vec![x, y]);
    let expected = QPoly::term(word(QGen::A, QGen::D), CoeffPoly::one())
        .add(&QPoly::term(word(QGen::B, QGen::C), -CoeffPoly::q()));
    o.require(det == expected, format!("extracted determinant {}", det));
    for sites in [1, 2] {
        o.report(&covariance::verify_lq_det(&set, sites).unwrap(), &format!("N={}", sites));
    }
    o
}

/// All index tuples of length `len` over the spec's fields.
fn tuples(spec: &FieldSpec, len: usize) -> Vec<Vec<Generator>> {
    let gens = spec.generators(GenKind::Field);
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Generator>| {
                gens.iter().map(move |g| {
                    let mut v = w.clone();
                    v.push(*g);
                    v
                })
            })
            .collect();
    }
    out
}

fn berezin_rules() -> Outcome {
    let mut o = Outcome::new();
    for (n, sites) in [(2, 1), (2, 2)] {
        let spec = FieldSpec::grassmann(n, sites);
        let alg = RatAlgebra::new(spec).unwrap();
        let dim = spec.dim();
        let ctx = format!("({},{})", n, sites);
        let mut perms = 0;
        for w in tuples(&spec, dim) {
            let qry = EpsilonQuery(w.iter().map(|g| (g.component, g.site)).collect());
            let eps = epsilon::<Rational>(&qry, &spec).unwrap();
            let got = berezin_integrate(&AlgebraElement::word(&w).with_spec(spec), &alg).unwrap();
            let mut sorted = w.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() == dim {
                perms += 1;
            }
            o.require(got == eps, format!("{} {}: integral {} != epsilon {}", ctx, Word(w.clone()).text(Statistics::Grassmann), got, eps));
        }
        o.require(perms == (1..=dim).product::<usize>(), format!("{} enumerated {} orderings", ctx, perms));
        for len in 0..dim {
            for w in tuples(&spec, len) {
                let got = berezin_integrate(&AlgebraElement::word(&w).with_spec(spec), &alg).unwrap();
                o.require(got.is_zero(), format!("{} short word {} integrates to {}", ctx, Word(w).text(Statistics::Grassmann), got));
            }
        }
        let top = AlgebraElement::word(&spec.generators(GenKind::Field)).with_spec(spec);
        o.require(berezin_integrate(&top, &alg).unwrap().is_one(), format!("{} volume word does not integrate to 1", ctx));
    }
    o
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lqcalc")).args(args).output().expect("run lqcalc");
    let text = String::from_utf8(out.stdout).expect("utf8");
    // timing is the only field allowed to vary
    let stable = match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(mut doc) => {
            if let Some(m) = doc.as_object_mut() {
                m.remove("timing-ms");
            }
            doc.to_string()
        }
        Err(_) => text,
    };
    (out.status.code().unwrap_or(-1), stable)
}

fn cli_determinism() -> Outcome {
    let mut o = Outcome::new();
    let code = |passed: bool| if passed { 0 } else { 1 };
    let big = |n, s, v| rmatrix::build_big_r::<Rational>(n, s, v).unwrap();
    let ybe22 = rmatrix::verify_ybe(&big(2, 2, Variant::Q)).unwrap().passed;
    let ybe22t = rmatrix::verify_ybe(&big(2, 2, Variant::QTranspose)).unwrap().passed;
    let (i, j) = rmatrix::build_diag_ops::<Rational>(2, 2).unwrap();
    let hecke22 = rmatrix::verify_hecke(&big(2, 2, Variant::Q), &i, &j).unwrap().passed;
    let (a, s) = rmatrix::build_big_projectors::<Rational>(2, 2, Variant::Q).unwrap();
    let proj22 = rmatrix::verify_projector_identities(&a, &s, &i, &j).unwrap().0.passed;
    let conf = |stat, lq| RatAlgebra::new(FieldSpec::new(2, 2, stat).with_l_equals_q(lq)).unwrap().check_local_confluence(3).passed;

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["verify", "ybe", "--n", "3", "--small"], 0),
        (vec!["verify", "hecke", "--n", "3", "--small"], 0),
        (vec!["verify", "projectors", "--n", "3", "--small"], 0),
        (vec!["verify", "ybe", "--n", "2", "--sites", "2"], code(ybe22)),
        (vec!["verify", "ybe", "--n", "2", "--sites", "2", "--variant", "qt"], code(ybe22t)),
        (vec!["verify", "hecke", "--n", "2", "--sites", "2"], code(hecke22)),
        (vec!["verify", "projectors", "--n", "2", "--sites", "2"], code(proj22)),
        (vec!["confluence", "--n", "2", "--sites", "2", "--stat", "grassmann", "--max-len", "3"], code(conf(Statistics::Grassmann, false))),
        (vec!["confluence", "--n", "2", "--sites", "2", "--stat", "boson", "--max-len", "3", "--l-equals-q"], code(conf(Statistics::Boson, true))),
        (vec!["covariance"], 0),
        (vec!["covariance", "--check", "lqdet", "--sites", "2"], 0),
        (vec!["pfaffian", "--n", "4", "--sites", "1"], 0),
        (vec!["gaussian", "--n", "2", "--sites", "2"], 0),
        (vec!["epsilon", "--indices", "2:2,1:1,2:1,1:2", "--n", "2", "--sites", "2"], 0),
        (vec!["integrate", "psi[2,1]*psi[1,1]", "--n", "2"], 0),
        (vec!["nf", "psi[1,1]*psi[1,1]", "--n", "2", "--sites", "1", "--stat", "grassmann"], 0),
        (vec!["nf", "psi[3,1]", "--n", "2"], 2),
        (vec!["verify", "ybe", "--n", "1", "--small"], 2),
        (vec!["no-such-command"], 2),
    ];
    for (args, want) in &cases {
        let (c1, out1) = run_cli(args);
        let (c2, out2) = run_cli(args);
        let line = args.join(" ");
        o.require(out1 == out2, format!("`{}` output differs between runs", line));
        o.require(c1 == c2, format!("`{}` exit codes differ", line));
        o.require(c1 == *want, format!("`{}` exited {} (expected {})", line, c1, want));
        let doc: serde_json::Value = serde_json::from_str(&out1).unwrap_or(serde_json::Value::Null);
        if *want == 2 {
            o.require(doc.get("reason").is_some_and(|r| r.is_string()), format!("`{}` has no reason", line));
        } else if let Some(p) = doc.get("passed") {
            o.require(p.as_bool() == Some(*want == 0), format!("`{}` passed flag disagrees with exit code", line));
        }
    }
    o.info(format!("{} commands", cases.len()));
    o
}

/// Checks that hold once the cross-site deformation is tied to `q`.
fn supplementary() -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    let mut o = Outcome::new();
    for stat in [Statistics::Grassmann, Statistics::Boson] {
        for v in [Variant::Q, Variant::QTranspose] {
            let alg = RatAlgebra::new(FieldSpec::new(2, 2, stat).with_variant(v).with_l_equals_q(true)).unwrap();
            o.report(&alg.check_local_confluence(3), &format!("{} {}", stat.name(), v.name()));
        }
    }
    out.push(("confluence with l = q".to_string(), o));
    let mut o = Outcome::new();
    for (n, sites) in [(2, 2), (2, 3), (3, 2)] {
        for v in [Variant::Q, Variant::QTranspose] {
            let r = rmatrix::build_big_r::<Rational>(n, sites, v).unwrap().specialize_l_to_q();
            o.report(&rmatrix::verify_ybe(&r).unwrap(), &format!("({},{}) {}", n, sites, v.name()));
        }
    }
    out.push(("lattice Yang-Baxter with l = q".to_string(), o));
    out
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("small R-matrix suite", small_matrix_suite),
        ("small projectors", small_projectors),
        ("lattice R-matrix suite", lattice_matrix_suite),
        ("projector adjudication", projector_adjudication),
        ("confluence", confluence),
        ("differential calculus", differential_calculus),
        ("pfaffian closed form", pfaffian_closed_form),
        ("gaussian integral equals pfaffian", gaussian_theorem),
        ("classical limit oracle", classical_limit),
        ("covariance at n = 2", covariance_n2),
        ("berezin rules", berezin_rules),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {}: {} [{:.2?}] {}", k + 1, name, status, start.elapsed(), o.detail);
        if !o.passed {
            failed.push(k + 1);
        }
    }
    for (name, o) in supplementary() {
        println!("supplementary {}: {} {}", name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed criteria: {:?}", failed);
        std::process::exit(1);
    }
}
