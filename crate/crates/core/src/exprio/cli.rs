//! Command-line surface. Every command prints one JSON document.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use super::parse::{parse, parse_coeff, ParseError};
use crate::berezin::{self, BerezinError, EpsilonQuery, QuadraticForm};
use crate::coeff::{CoeffError, ParamContext, ParamSym};
use crate::covariance::{self, CovarianceError};
use crate::fieldalg::{FieldError, FieldSpec, Statistics};
use crate::report::VerificationReport;
use crate::rmatrix::{self, RMatrixError, Variant};
use crate::{CoeffPoly, RatAlgebra, Rational};

#[derive(Debug, Parser)]
#[command(name = "lqcalc", version, about = "Exact computations with (l,q)-deformed lattice fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Q,
    Qt,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Q => Variant::Q,
            VariantArg::Qt => Variant::QTranspose,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatArg {
    Grassmann,
    Boson,
}

impl From<StatArg> for Statistics {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::Grassmann => Statistics::Grassmann,
            StatArg::Boson => Statistics::Boson,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Identity {
    Ybe,
    Hecke,
    Projectors,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CovCheck {
    Plane,
    Det,
    Lqdet,
}

#[derive(Debug, Clone, Args)]
struct Shape {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    sites: usize,
    #[arg(long, value_enum, default_value = "q")]
    variant: VariantArg,
    /// Set l = q before computing.
    #[arg(long)]
    l_equals_q: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an R-matrix identity.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        #[command(flatten)]
        shape: Shape,
        /// Use the single-site R-matrix.
        #[arg(long)]
        small: bool,
    },
    /// Normal form of an expression.
    Nf {
        expr: String,
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value = "grassmann")]
        stat: StatArg,
        /// Evaluation point, e.g. "q=2,l=3/2,a[1,2]=5".
        #[arg(long)]
        eval: Option<String>,
        #[arg(long)]
        degree_cap: Option<usize>,
    },
    /// Deformed epsilon for a full index list "α:r,...".
    Epsilon {
        #[arg(long, allow_hyphen_values = true)]
        indices: String,
        #[command(flatten)]
        shape: Shape,
    },
    /// Berezin integral of a field expression.
    Integrate {
        expr: String,
        #[command(flatten)]
        shape: Shape,
    },
    /// Pfaffian of a quadratic form.
    Pfaffian {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        entries: Option<String>,
    },
    /// Gaussian integral of a quadratic form.
    Gaussian {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        entries: Option<String>,
    },
    /// Local confluence of the rewriting rules.
    Confluence {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum, default_value = "grassmann")]
        stat: StatArg,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
    },
    /// Quantum matrix relations and covariance checks at n = 2.
    Covariance {
        #[arg(long, value_enum)]
        check: Option<CovCheck>,
        #[arg(long)]
        sites: Option<usize>,
    },
}

#[derive(Debug)]
struct Failure {
    reason: &'static str,
    message: String,
}

impl Failure {
    fn new(reason: &'static str, message: impl ToString) -> Self {
        Failure { reason, message: message.to_string() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure { reason: e.reason(), message: e.to_string() }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        let reason = match e {
            FieldError::Index(_) | FieldError::SpecMismatch => "input",
            FieldError::DegreeCap(..) => "degree-cap",
            _ => "computation",
        };
        Failure::new(reason, e)
    }
}

impl From<RMatrixError> for Failure {
    fn from(e: RMatrixError) -> Self {
        Failure::new("input", e)
    }
}

impl From<BerezinError> for Failure {
    fn from(e: BerezinError) -> Self {
        let reason = match e {
            BerezinError::Statistics => "statistics",
            BerezinError::Field(_) => "computation",
            _ => "input",
        };
        Failure::new(reason, e)
    }
}

impl From<CovarianceError> for Failure {
    fn from(e: CovarianceError) -> Self {
        let reason = match e {
            CovarianceError::Unsupported(_) | CovarianceError::Sites(_) => "unsupported",
            _ => "computation",
        };
        Failure::new(reason, e)
    }
}

impl From<CoeffError> for Failure {
    fn from(e: CoeffError) -> Self {
        Failure::new("evaluation", e)
    }
}

/// Command output before the envelope is added.
struct Outcome {
    config: Value,
    passed: Option<bool>,
    result: Value,
    witnesses: Option<Value>,
}

/// Runs the CLI and prints to stdout; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_cli_to(argv, &mut lock)
}

/// As `run_cli`, writing to `out`.
pub fn run_cli_to<I, T, W>(argv: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e);
                return 0;
            }
            let doc = json!({ "command": Value::Null, "reason": "usage", "error": e.to_string().trim_end() });
            let _ = writeln!(out, "{}", doc);
            return 2;
        }
    };
    let name = command_name(&cli.command);
    let start = Instant::now();
    let res = dispatch(&cli.command);
    let ms = start.elapsed().as_millis() as u64;
    let (doc, code) = match res {
        Ok(o) => {
            let mut m = serde_json::Map::new();
            m.insert("command".into(), json!(name));
            m.insert("config".into(), o.config);
            if let Some(p) = o.passed {
                m.insert("passed".into(), json!(p));
            }
            m.insert("result".into(), o.result);
            if let Some(w) = o.witnesses {
                m.insert("witnesses".into(), w);
            }
            m.insert("timing-ms".into(), json!(ms));
            (Value::Object(m), if o.passed == Some(false) { 1 } else { 0 })
        }
        Err(f) => (json!({ "command": name, "reason": f.reason, "error": f.message, "timing-ms": ms }), 2),
    };
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
    code
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Verify { identity, .. } => format!("verify {}", identity_name(*identity)),
        Command::Nf { .. } => "nf".into(),
        Command::Epsilon { .. } => "epsilon".into(),
        Command::Integrate { .. } => "integrate".into(),
        Command::Pfaffian { .. } => "pfaffian".into(),
        Command::Gaussian { .. } => "gaussian".into(),
        Command::Confluence { .. } => "confluence".into(),
        Command::Covariance { .. } => "covariance".into(),
    }
}

fn identity_name(i: Identity) -> &'static str {
    match i {
        Identity::Ybe => "ybe",
        Identity::Hecke => "hecke",
        Identity::Projectors => "projectors",
    }
}

fn shape_config(s: &Shape) -> Value {
    let v: Variant = s.variant.into();
    json!({ "n": s.n, "sites": s.sites, "variant": v.name(), "l-equals-q": s.l_equals_q })
}

fn spec_of(s: &Shape, stat: Statistics) -> Result<FieldSpec, Failure> {
    if s.n == 0 || s.sites == 0 {
        return Err(Failure::new("input", "n and sites must be positive"));
    }
    Ok(FieldSpec::new(s.n, s.sites, stat).with_variant(s.variant.into()).with_l_equals_q(s.l_equals_q))
}

fn report_outcome(config: Value, rep: &VerificationReport) -> Outcome {
    let mut result = rep.to_json();
    if let Some(m) = result.as_object_mut() {
        m.remove("witnesses");
    }
    Outcome { config, passed: Some(rep.passed), witnesses: Some(json!(rep.witnesses)), result }
}

fn dispatch(c: &Command) -> Result<Outcome, Failure> {
    match c {
        Command::Verify { identity, shape, small } => verify(*identity, shape, *small),
        Command::Nf { expr, shape, stat, eval, degree_cap } => {
            let mut spec = spec_of(shape, (*stat).into())?;
            if let Some(cap) = degree_cap {
                spec = spec.with_degree_cap(*cap);
            }
            let ctx = ParamContext::new();
            let ast = parse(expr, &spec, Some(&ctx))?;
            let alg = RatAlgebra::new(spec)?;
            let nf = alg.normal_form(&ast.evaluate()?)?;
            let mut config = shape_config(shape);
            config["stat"] = json!(spec.statistics.name());
            config["expr"] = json!(expr);
            let mut result = json!({ "normal-form": nf.text(spec.statistics) });
            if let Some(point) = eval {
                let (q0, l0, bindings) = parse_eval_point(point, &ctx)?;
                config["eval"] = json!(point);
                let mut out = Vec::new();
                for (w, c) in nf.terms() {
                    let v = c.eval(&q0, &l0, &bindings)?;
                    let cp = CoeffPoly::constant(v);
                    out.push((w.clone(), cp));
                }
                let ev = crate::fieldalg::AlgebraElement::from_terms(out.into_iter().collect(), Some(spec));
                result["evaluated"] = json!(ev.text(spec.statistics));
            }
            Ok(Outcome { config, passed: None, result, witnesses: None })
        }
        Command::Epsilon { indices, shape } => {
            let spec = spec_of(shape, Statistics::Grassmann)?;
            let qry = parse_indices(indices)?;
            let eps = berezin::epsilon::<Rational>(&qry, &spec)?;
            let mut config = shape_config(shape);
            config["indices"] = json!(indices);
            Ok(Outcome { config, passed: None, result: json!(eps.to_string()), witnesses: None })
        }
        Command::Integrate { expr, shape } => {
            let spec = spec_of(shape, Statistics::Grassmann)?;
            let ctx = ParamContext::new();
            let ast = parse(expr, &spec, Some(&ctx))?;
            let alg = RatAlgebra::new(spec)?;
            let v = berezin::berezin_integrate(&ast.evaluate()?, &alg)?;
            let mut config = shape_config(shape);
            config["expr"] = json!(expr);
            Ok(Outcome { config, passed: None, result: json!(v.to_string()), witnesses: None })
        }
        Command::Pfaffian { shape, entries } | Command::Gaussian { shape, entries } => {
            let ctx = ParamContext::new();
            let form = match entries {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {}", path, e)))?;
                    QuadraticForm::<Rational>::from_json(&text, &ctx)?
                }
                None => QuadraticForm::symbolic(spec_of(shape, Statistics::Grassmann)?, &ctx),
            };
            let spec = form.spec.with_variant(shape.variant.into()).with_l_equals_q(shape.l_equals_q);
            let form = QuadraticForm { spec, ..form };
            let alg = RatAlgebra::new(spec)?;
            let v = if matches!(c, Command::Pfaffian { .. }) {
                berezin::pfaffian(&form, &alg)?
            } else {
                berezin::gaussian_integral(&form, &alg)?
            };
            let mut config = json!({ "n": spec.n, "sites": spec.sites, "variant": spec.variant.name(), "l-equals-q": spec.l_equals_q });
            if let Some(p) = entries {
                config["entries"] = json!(p);
            }
            Ok(Outcome { config, passed: None, result: json!(v.to_string()), witnesses: None })
        }
        Command::Confluence { shape, stat, max_len } => {
            let spec = spec_of(shape, (*stat).into())?;
            let alg = RatAlgebra::new(spec)?;
            let rep = alg.check_local_confluence(*max_len);
            let mut config = shape_config(shape);
            config["stat"] = json!(spec.statistics.name());
            config["max-len"] = json!(max_len);
            Ok(report_outcome(config, &rep))
        }
        Command::Covariance { check, sites } => covariance_cmd(*check, *sites),
    }
}

fn verify(identity: Identity, shape: &Shape, small: bool) -> Result<Outcome, Failure> {
    let (n, sites, variant) = (shape.n, shape.sites, Variant::from(shape.variant));
    let spec_l = |t: rmatrix::TensorOp<Rational>| if shape.l_equals_q { t.specialize_l_to_q() } else { t };
    let rep = if small {
        match identity {
            Identity::Ybe => rmatrix::verify_ybe(&rmatrix::build_small_r::<Rational>(n)?)?,
            Identity::Hecke => {
                let r = rmatrix::build_small_r::<Rational>(n)?;
                let (i, j) = rmatrix::small_diag_ops::<Rational>(n);
                let mut rep = VerificationReport::new("small-hecke");
                rep.push_check(rmatrix::verify_hecke(&r, &i, &j)?);
                rep.push_check(rmatrix::verify_eigenvalues(&r)?);
                rep.push_check(rmatrix::verify_index_symmetry(&r)?);
                rep
            }
            Identity::Projectors => {
                let (a, s) = rmatrix::build_projectors_small::<Rational>(n)?;
                rmatrix::verify_small_projectors(&a, &s)?
            }
        }
    } else {
        let r = spec_l(rmatrix::build_big_r::<Rational>(n, sites, variant)?);
        let (i, j) = rmatrix::build_diag_ops::<Rational>(n, sites)?;
        let (i, j) = (spec_l(i), spec_l(j));
        match identity {
            Identity::Ybe => rmatrix::verify_ybe(&r)?,
            Identity::Hecke => rmatrix::verify_hecke(&r, &i, &j)?,
            Identity::Projectors => {
                let (a, s) = rmatrix::build_big_projectors::<Rational>(n, sites, variant)?;
                let (rep, _) = rmatrix::verify_projector_identities(&spec_l(a), &spec_l(s), &i, &j)?;
                rep
            }
        }
    };
    let mut config = shape_config(shape);
    config["small"] = json!(small);
    Ok(report_outcome(config, &rep))
}

fn covariance_cmd(check: Option<CovCheck>, sites: Option<usize>) -> Result<Outcome, Failure> {
    let set = covariance::derive_rtt_relations::<Rational>(2)?;
    let mut rep = VerificationReport::new("covariance");
    let mut result = serde_json::Map::new();
    result.insert("relations".into(), set.to_json());
    let det = covariance::qdet(&set);
    result.insert("qdet".into(), json!(det.to_string()));
    if check.is_none() {
        rep.push_check(covariance::verify_round_trip(&set, &crate::rational(7, 3))?);
        rep.push_check(covariance::verify_pbw(&set));
        rep.push_check(covariance::verify_qdet_central(&set));
    }
    if matches!(check, None | Some(CovCheck::Plane)) {
        for stat in [Statistics::Grassmann, Statistics::Boson] {
            rep.push_check(covariance::verify_plane_covariance(stat, &set)?);
        }
    }
    if matches!(check, None | Some(CovCheck::Det)) {
        let (r, extracted) = covariance::verify_det_top_form(&set, None)?;
        result.insert("det-extracted".into(), json!(extracted.to_string()));
        rep.push_check(r);
    }
    if matches!(check, None | Some(CovCheck::Lqdet)) {
        let list = match sites {
            Some(s) => vec![s],
            None => vec![1, 2],
        };
        for s in list {
            let mut r = covariance::verify_lq_det(&set, s)?;
            r.identity = format!("lq-det-sites-{}", s);
            rep.push_check(r);
        }
    }
    result.insert("report".into(), rep.to_json());
    let config = json!({
        "n": 2,
        "check": match check { None => "all", Some(CovCheck::Plane) => "plane", Some(CovCheck::Det) => "det", Some(CovCheck::Lqdet) => "lqdet" },
        "sites": sites,
    });
    let witnesses: Vec<_> = rep.checks.iter().flat_map(|c| c.witnesses.iter().cloned()).collect();
    Ok(Outcome { config, passed: Some(rep.passed), result: Value::Object(result), witnesses: Some(json!(witnesses)) })
}

/// "1:1,2:1" → [(1,1), (2,1)].
fn parse_indices(text: &str) -> Result<EpsilonQuery, Failure> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (a, r) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| Failure::new("input", format!("index '{}' is not of the form component:site", part)))?;
        let a: u16 = a.trim().parse().map_err(|_| Failure::new("input", format!("bad component '{}'", a)))?;
        let r: u16 = r.trim().parse().map_err(|_| Failure::new("input", format!("bad site '{}'", r)))?;
        out.push((a, r));
    }
    Ok(EpsilonQuery(out))
}

type EvalPoint = (Rational, Rational, BTreeMap<ParamSym, Rational>);

/// "q=2,l=3/2,a[1,2]=5". Unset q or l default to 1.
fn parse_eval_point(text: &str, ctx: &ParamContext) -> Result<EvalPoint, Failure> {
    let mut q0 = Rational::from_integer(1.into());
    let mut l0 = q0.clone();
    let mut bindings = BTreeMap::new();
    // split on commas outside brackets
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in text.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    for part in parts {
        let (lhs, rhs) = part
            .split_once('=')
            .ok_or_else(|| Failure::new("usage", format!("binding '{}' has no '='", part)))?;
        let value = parse_coeff(rhs.trim(), None)?
            .as_constant()
            .ok_or_else(|| Failure::new("usage", format!("value '{}' is not a number", rhs)))?;
        match lhs.trim() {
            "q" => q0 = value,
            "l" => l0 = value,
            other => {
                let sym = parse_coeff(other, Some(ctx))?;
                let p = sym.params();
                let name = p.iter().next().filter(|_| p.len() == 1).cloned();
                let name = name.ok_or_else(|| Failure::new("usage", format!("'{}' is not a parameter", other)))?;
                bindings.insert(name, value);
            }
        }
    }
    use num_traits::Zero;
    if q0.is_zero() || l0.is_zero() {
        return Err(Failure::new("usage", "q and l must be nonzero"));
    }
    Ok((q0, l0, bindings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, Value) {
        let mut buf = Vec::new();
        let code = run_cli_to(std::iter::once("lqcalc").chain(args.iter().copied()), &mut buf);
        (code, serde_json::from_slice(&buf).unwrap())
    }

    #[test]
    fn nf_nilpotent() {
        let (code, v) = run(&["nf", "psi[1,1]*psi[1,1]", "--n", "2", "--sites", "1", "--stat", "grassmann"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"]["normal-form"], "0");
    }

    #[test]
    fn nf_eval() {
        let (code, v) = run(&["nf", "a[1,2]*psi[2,1]*psi[1,1]", "--n", "2", "--eval", "q=2,a[1,2]=3"]);
        assert_eq!(code, 0, "{}", v);
        assert_eq!(v["result"]["normal-form"], "-q*a[1,2]*psi[1,1]*psi[2,1]");
        assert_eq!(v["result"]["evaluated"], "-6*psi[1,1]*psi[2,1]");
    }

    #[test]
    fn small_ybe_passes() {
        let (code, v) = run(&["verify", "ybe", "--n", "2", "--small"]);
        assert_eq!(code, 0);
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn errors_exit_two() {
        let (code, v) = run(&["nf", "psi[3,1]", "--n", "2"]);
        assert_eq!(code, 2);
        assert_eq!(v["reason"], "bounds");
        let (code, v) = run(&["nf", "phi[1,1]", "--n", "2", "--stat", "grassmann"]);
        assert_eq!(code, 2);
        assert_eq!(v["reason"], "statistics");
        let (code, v) = run(&["frobnicate"]);
        assert_eq!(code, 2);
        assert_eq!(v["reason"], "usage");
        let (code, v) = run(&["nf", "q", "--eval", "q=0"]);
        assert_eq!(code, 2);
        assert_eq!(v["reason"], "usage");
    }

    #[test]
    fn epsilon_and_integrate() {
        let (code, v) = run(&["epsilon", "--indices", "2:1,1:1", "--n", "2"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"], "-q");
        let (code, v) = run(&["integrate", "psi[2,1]*psi[1,1]", "--n", "2"]);
        assert_eq!(code, 0);
        assert_eq!(v["result"], "-q");
    }

    #[test]
    fn covariance_det() {
        let (code, v) = run(&["covariance", "--check", "det"]);
        assert_eq!(code, 0, "{}", v);
        assert_eq!(v["result"]["det-extracted"], "a*d - q*b*c");
    }
}
