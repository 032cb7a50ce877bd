//! Lexer and recursive-descent parser for the expression grammar.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::coeff::ParamContext;
use crate::fieldalg::{AlgebraElement, FieldError, FieldSpec, GenKind, Generator, Statistics};
use crate::{CoeffPoly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {kind}")]
pub struct ParseError {
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("index out of bounds: {0}")]
    Bounds(String),
    #[error("generator {0} does not belong to {1} statistics")]
    Statistics(String, String),
    #[error("invalid exponent: {0}")]
    Exponent(String),
    #[error("{0}")]
    Eval(String),
}

impl ParseError {
    fn new(column: usize, kind: ParseErrorKind) -> Self {
        ParseError { column, kind }
    }

    pub fn reason(&self) -> &'static str {
        match self.kind {
            ParseErrorKind::Syntax(_) => "syntax",
            ParseErrorKind::Bounds(_) => "bounds",
            ParseErrorKind::Statistics(_, _) => "statistics",
            ParseErrorKind::Exponent(_) => "exponent",
            ParseErrorKind::Eval(_) => "evaluation",
        }
    }
}

/// Parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Literal(CoeffPoly),
    Generator(Generator),
    Product(Vec<ExprAst>),
    Sum(Vec<ExprAst>),
    Power(Box<ExprAst>, i32),
    Negation(Box<ExprAst>),
}

impl ExprAst {
    /// Whether the expression contains no generators.
    pub fn is_coefficient(&self) -> bool {
        match self {
            ExprAst::Literal(_) => true,
            ExprAst::Generator(_) => false,
            ExprAst::Product(v) | ExprAst::Sum(v) => v.iter().all(|e| e.is_coefficient()),
            ExprAst::Power(b, _) | ExprAst::Negation(b) => b.is_coefficient(),
        }
    }

    /// Unreduced value: products are concatenations.
    pub fn evaluate(&self) -> Result<AlgebraElement<Rational>, FieldError> {
        Ok(match self {
            ExprAst::Literal(p) => AlgebraElement::scalar(p.clone()),
            ExprAst::Generator(g) => AlgebraElement::generator(*g),
            ExprAst::Product(v) => {
                let mut acc = AlgebraElement::one();
                for e in v {
                    acc = acc.concat(&e.evaluate()?)?;
                }
                acc
            }
            ExprAst::Sum(v) => {
                let mut acc = AlgebraElement::zero();
                for e in v {
                    acc = acc.add(&e.evaluate()?)?;
                }
                acc
            }
            ExprAst::Negation(b) => b.evaluate()?.scale(&CoeffPoly::from_i64(-1)),
            ExprAst::Power(b, e) => {
                let base = b.evaluate()?;
                if *e < 0 {
                    // only q or l reach here (checked by the parser)
                    let c = base.coefficient(&crate::fieldalg::Word::empty()).inverse()?;
                    let mut acc = AlgebraElement::one();
                    for _ in 0..e.unsigned_abs() {
                        acc = acc.concat(&AlgebraElement::scalar(c.clone()))?;
                    }
                    acc
                } else {
                    let mut acc = AlgebraElement::one();
                    for _ in 0..*e {
                        acc = acc.concat(&base)?;
                    }
                    acc
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "{}", v),
            Tok::Ident(s) => write!(f, "{}", s),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Caret => write!(f, "^"),
            Tok::Slash => write!(f, "/"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), col));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            _ => return Err(ParseError::new(col, ParseErrorKind::Syntax(format!("unexpected character '{}'", c)))),
        };
        out.push((t, col));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    spec: Option<&'a FieldSpec>,
    ctx: Option<&'a ParamContext>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end)
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.col(), ParseErrorKind::Syntax(msg.into()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            let found = self.peek().map(|t| format!("'{}'", t)).unwrap_or_else(|| "end of input".into());
            Err(self.syntax(format!("expected '{}', found {}", t, found)))
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.syntax("expected an integer")),
        }
    }

    fn small_int(&mut self) -> Result<u32, ParseError> {
        let col = self.col();
        let v = self.int()?;
        u32::try_from(v).map_err(|_| ParseError::new(col, ParseErrorKind::Syntax("index too large".into())))
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut terms = Vec::new();
        let first_neg = self.eat(&Tok::Minus);
        let t = self.term()?;
        terms.push(if first_neg { ExprAst::Negation(Box::new(t)) } else { t });
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                terms.push(ExprAst::Negation(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { ExprAst::Sum(terms) })
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.eat(&Tok::Star) {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { ExprAst::Product(factors) })
    }

    fn factor(&mut self) -> Result<ExprAst, ParseError> {
        let base_col = self.col();
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let exp_col = self.col();
        let neg = self.eat(&Tok::Minus);
        let mag = self.int()?;
        let mag = i32::try_from(mag).map_err(|_| ParseError::new(exp_col, ParseErrorKind::Exponent("too large".into())))?;
        let e = if neg { -mag } else { mag };
        if e < 0 {
            let ok = matches!(&base, ExprAst::Literal(p) if *p == CoeffPoly::q() || *p == CoeffPoly::l());
            if !ok {
                return Err(ParseError::new(base_col, ParseErrorKind::Exponent("negative exponents apply only to q and l".into())));
            }
        }
        Ok(ExprAst::Power(Box::new(base), e))
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(_)) => {
                let num = self.int()?;
                if self.eat(&Tok::Slash) {
                    let dcol = self.col();
                    let den = self.int()?;
                    if den == BigInt::from(0) {
                        return Err(ParseError::new(dcol, ParseErrorKind::Syntax("zero denominator".into())));
                    }
                    return Ok(ExprAst::Literal(CoeffPoly::constant(Rational::new(num, den))));
                }
                Ok(ExprAst::Literal(CoeffPoly::constant(Rational::from_integer(num))))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "q" => Ok(ExprAst::Literal(CoeffPoly::q())),
                    "l" => Ok(ExprAst::Literal(CoeffPoly::l())),
                    "a" => {
                        self.expect(Tok::LBracket)?;
                        let mut idx = vec![self.small_int()?];
                        while self.eat(&Tok::Comma) {
                            idx.push(self.small_int()?);
                        }
                        self.expect(Tok::RBracket)?;
                        let ctx = self.ctx.ok_or_else(|| {
                            ParseError::new(col, ParseErrorKind::Syntax("parameter symbols need a context".into()))
                        })?;
                        Ok(ExprAst::Literal(ctx.symbol(&idx)))
                    }
                    "psi" | "dpsi" | "dd" | "phi" | "dphi" => self.generator(&name, col),
                    _ => Err(ParseError::new(col, ParseErrorKind::Syntax(format!("unknown symbol '{}'", name)))),
                }
            }
            Some(t) => Err(self.syntax(format!("unexpected '{}'", t))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn generator(&mut self, name: &str, col: usize) -> Result<ExprAst, ParseError> {
        self.expect(Tok::LBracket)?;
        let a = self.small_int()?;
        self.expect(Tok::Comma)?;
        let r = self.small_int()?;
        self.expect(Tok::RBracket)?;
        let spec = self
            .spec
            .ok_or_else(|| ParseError::new(col, ParseErrorKind::Syntax(format!("generator '{}' in a coefficient", name))))?;
        let (kind, stat) = match name {
            "psi" => (GenKind::Field, Some(Statistics::Grassmann)),
            "dpsi" => (GenKind::Differential, Some(Statistics::Grassmann)),
            "phi" => (GenKind::Field, Some(Statistics::Boson)),
            "dphi" => (GenKind::Differential, Some(Statistics::Boson)),
            _ => (GenKind::Derivative, None),
        };
        if let Some(s) = stat {
            if s != spec.statistics {
                return Err(ParseError::new(col, ParseErrorKind::Statistics(name.to_string(), spec.statistics.name().to_string())));
            }
        }
        let to16 = |v: u32| u16::try_from(v).unwrap_or(u16::MAX);
        let g = Generator::new(kind, to16(a), to16(r));
        spec.check(&g).map_err(|e| ParseError::new(col, ParseErrorKind::Bounds(e.to_string())))?;
        Ok(ExprAst::Generator(g))
    }
}

fn run(text: &str, spec: Option<&FieldSpec>, ctx: Option<&ParamContext>) -> Result<ExprAst, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() + 1, spec, ctx };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.syntax(format!("unexpected '{}'", p.toks[p.pos].0)));
    }
    Ok(e)
}

/// Parses an expression over the given spec's generators.
pub fn parse(text: &str, spec: &FieldSpec, ctx: Option<&ParamContext>) -> Result<ExprAst, ParseError> {
    run(text, Some(spec), ctx)
}

/// Parses a pure coefficient.
pub fn parse_coeff(text: &str, ctx: Option<&ParamContext>) -> Result<CoeffPoly, ParseError> {
    let ast = run(text, None, ctx)?;
    let e = ast.evaluate().map_err(|e| ParseError::new(1, ParseErrorKind::Eval(e.to_string())))?;
    Ok(e.coefficient(&crate::fieldalg::Word::empty()))
}
