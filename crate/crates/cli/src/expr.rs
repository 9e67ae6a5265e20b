//! Ring expressions: parser, canonical form and evaluator.
//!
//! ```text
//! expr  := zmod(N) | gf(P[,K]) | m(N,expr) | t(N,expr) | tri(expr)
//!        | prod(expr,expr) | trivext(expr) | corner(expr,N)
//!        | quot(expr,label{,label}) | series(expr,N) | paper(e2|e5,N)
//! label := bare token | "double-quoted string"
//! ```
//!
//! Names are case-insensitive. The canonical form is lowercase with no
//! whitespace, and `gf(p,1)` is written `gf(p)`.

use std::fmt;

use jring_core::constructions::{
    self, corner, direct_product, gf, matrix_ring, paper_ring, quote_label, quotient, trivial_extension,
    triangular, truncated_series, upper_triangular, zmod, BimoduleTriangularSpec, IdealSpec, PaperRing,
};
use jring_core::structure::idempotent_indices;
use jring_core::FiniteRing;

use crate::cache::Cache;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingExpr {
    Zmod(u64),
    Gf(u64, u32),
    Matrix(usize, Box<RingExpr>),
    Upper(usize, Box<RingExpr>),
    Tri(Box<RingExpr>),
    Prod(Box<RingExpr>, Box<RingExpr>),
    TrivExt(Box<RingExpr>),
    /// Index into the idempotents of the inner ring, in element order.
    Corner(Box<RingExpr>, usize),
    /// Ideal generators as element labels of the inner ring.
    Quot(Box<RingExpr>, Vec<String>),
    Series(Box<RingExpr>, usize),
    Paper(PaperRing, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

impl fmt::Display for RingExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingExpr::Zmod(n) => write!(f, "zmod({n})"),
            RingExpr::Gf(p, 1) => write!(f, "gf({p})"),
            RingExpr::Gf(p, k) => write!(f, "gf({p},{k})"),
            RingExpr::Matrix(n, e) => write!(f, "m({n},{e})"),
            RingExpr::Upper(n, e) => write!(f, "t({n},{e})"),
            RingExpr::Tri(e) => write!(f, "tri({e})"),
            RingExpr::Prod(a, b) => write!(f, "prod({a},{b})"),
            RingExpr::TrivExt(e) => write!(f, "trivext({e})"),
            RingExpr::Corner(e, i) => write!(f, "corner({e},{i})"),
            RingExpr::Quot(e, gens) => {
                write!(f, "quot({e}")?;
                for g in gens {
                    write!(f, ",{}", quote_label(g))?;
                }
                write!(f, ")")
            }
            RingExpr::Series(e, k) => write!(f, "series({e},{k})"),
            RingExpr::Paper(which, k) => write!(f, "paper({},{k})", which.tag()),
        }
    }
}

pub fn parse_ring_expr(text: &str) -> Result<RingExpr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn is_label_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, b'_' | b'^' | b'*' | b'+' | b'.' | b'-')
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { offset: self.pos, message: message.into() }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError { offset, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.error(format!("expected `{}`, found `{}`", c as char, x as char))),
            None => Err(self.error(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn ident(&mut self) -> Result<(usize, String), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a ring constructor"));
        }
        Ok((start, String::from_utf8_lossy(&self.src[start..self.pos]).to_ascii_lowercase()))
    }

    fn number(&mut self) -> Result<(usize, u64), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a non-negative integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        digits
            .parse()
            .map(|n| (start, n))
            .map_err(|_| self.error_at(start, "integer out of range"))
    }

    /// A number that must satisfy `ok`; `what` names the constraint.
    fn bounded(&mut self, ok: impl Fn(u64) -> bool, what: &str) -> Result<u64, ParseError> {
        let (at, n) = self.number()?;
        if ok(n) {
            Ok(n)
        } else {
            Err(self.error_at(at, format!("{what}, got {n}")))
        }
    }

    fn label(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(b'"') => {
                self.pos += 1;
                let mut out = Vec::new();
                loop {
                    match self.src.get(self.pos) {
                        None => return Err(self.error_at(start, "unterminated string")),
                        Some(b'"') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b'\\') => {
                            match self.src.get(self.pos + 1) {
                                Some(&c @ (b'"' | b'\\')) => out.push(c),
                                _ => return Err(self.error("bad escape in string")),
                            }
                            self.pos += 2;
                        }
                        Some(&c) => {
                            if !c.is_ascii_whitespace() {
                                out.push(c);
                            }
                            self.pos += 1;
                        }
                    }
                }
                let s = String::from_utf8(out).map_err(|_| self.error_at(start, "label is not UTF-8"))?;
                if s.is_empty() {
                    return Err(self.error_at(start, "empty label"));
                }
                Ok(s)
            }
            Some(&c) if is_label_char(c) => {
                while self.pos < self.src.len() && is_label_char(self.src[self.pos]) {
                    self.pos += 1;
                }
                Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            }
            _ => Err(self.error("expected an element label")),
        }
    }

    fn boxed(&mut self) -> Result<Box<RingExpr>, ParseError> {
        self.expr().map(Box::new)
    }

    fn expr(&mut self) -> Result<RingExpr, ParseError> {
        let (at, name) = self.ident()?;
        self.expect(b'(')?;
        let e = match name.as_str() {
            "zmod" => RingExpr::Zmod(self.bounded(|n| n >= 2, "zmod needs n >= 2")?),
            "gf" => {
                let p = self.bounded(constructions::is_prime, "gf needs a prime characteristic")?;
                let k = if self.peek() == Some(b',') {
                    self.expect(b',')?;
                    self.bounded(|k| (1..=16).contains(&k), "gf degree must be between 1 and 16")?
                } else {
                    1
                };
                RingExpr::Gf(p, k as u32)
            }
            "m" | "t" => {
                let n = self.bounded(|n| (1..=8).contains(&n), "matrix size must be between 1 and 8")? as usize;
                self.expect(b',')?;
                let inner = self.boxed()?;
                if name == "m" {
                    RingExpr::Matrix(n, inner)
                } else {
                    RingExpr::Upper(n, inner)
                }
            }
            "tri" => RingExpr::Tri(self.boxed()?),
            "prod" => {
                let a = self.boxed()?;
                self.expect(b',')?;
                RingExpr::Prod(a, self.boxed()?)
            }
            "trivext" => RingExpr::TrivExt(self.boxed()?),
            "corner" => {
                let inner = self.boxed()?;
                self.expect(b',')?;
                RingExpr::Corner(inner, self.number()?.1 as usize)
            }
            "quot" => {
                let inner = self.boxed()?;
                let mut gens = Vec::new();
                while self.peek() == Some(b',') {
                    self.expect(b',')?;
                    gens.push(self.label()?);
                }
                if gens.is_empty() {
                    return Err(self.error("quot needs at least one generator label"));
                }
                RingExpr::Quot(inner, gens)
            }
            "series" => {
                let inner = self.boxed()?;
                self.expect(b',')?;
                let k = self.bounded(|k| (1..=16).contains(&k), "truncation must be between 1 and 16")?;
                RingExpr::Series(inner, k as usize)
            }
            "paper" => {
                let (case_at, case) = self.ident()?;
                let which = match case.as_str() {
                    "e2" => PaperRing::E2,
                    "e5" => PaperRing::E5,
                    _ => return Err(self.error_at(case_at, format!("unknown example ring `{case}`, expected E2 or E5"))),
                };
                self.expect(b',')?;
                RingExpr::Paper(which, self.number()?.1 as usize)
            }
            _ => return Err(self.error_at(at, format!("unknown constructor `{name}`"))),
        };
        self.expect(b')')?;
        Ok(e)
    }
}

/// Evaluation context: element cap for materialization and an optional
/// table cache.
pub struct Evaluator<'a> {
    pub cap: usize,
    pub cache: Option<&'a Cache>,
}

impl Evaluator<'_> {
    /// Builds the ring, materialized and named by its canonical expression.
    pub fn eval(&self, expr: &RingExpr) -> Result<FiniteRing, CliError> {
        let canonical = expr.to_string();
        if let Some(cache) = self.cache {
            if let Some(ring) = cache.load(&canonical) {
                return Ok(ring);
            }
        }
        let ring = self.build(expr)?.renamed(canonical.clone());
        if let Some(cache) = self.cache {
            cache.store(&canonical, &ring)?;
        }
        Ok(ring)
    }

    fn build(&self, expr: &RingExpr) -> Result<FiniteRing, CliError> {
        let cap = self.cap;
        let ring = match expr {
            RingExpr::Zmod(n) => zmod(*n)?,
            RingExpr::Gf(p, k) => gf(*p, *k)?,
            RingExpr::Matrix(n, e) => matrix_ring(*n, &self.eval(e)?)?.materialize(cap)?,
            RingExpr::Upper(n, e) => upper_triangular(*n, &self.eval(e)?)?.materialize(cap)?,
            RingExpr::Tri(e) => triangular(&BimoduleTriangularSpec::same_ring(&self.eval(e)?))?.materialize(cap)?,
            RingExpr::Prod(a, b) => direct_product(&self.eval(a)?, &self.eval(b)?)?.materialize(cap)?,
            RingExpr::TrivExt(e) => trivial_extension(&self.eval(e)?)?.materialize(cap)?,
            RingExpr::Corner(e, i) => {
                let inner = self.eval(e)?;
                let idem = idempotent_indices(inner.require_table()?);
                let &at = idem.get(*i).ok_or_else(|| {
                    CliError::Expr(format!("{} has {} idempotents, index {i} is out of range", inner.name(), idem.len()))
                })?;
                corner(&inner, &inner.element(at)?)?
            }
            RingExpr::Quot(e, gens) => {
                let inner = self.eval(e)?;
                let generators = gens
                    .iter()
                    .map(|g| {
                        inner
                            .element_by_label(g)
                            .ok_or_else(|| CliError::Expr(format!("`{g}` is not an element of {}", inner.name())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                quotient(&inner, &IdealSpec { generators })?
            }
            RingExpr::Series(e, k) => truncated_series(&self.eval(e)?, *k)?.materialize(cap)?,
            RingExpr::Paper(which, k) => paper_ring(*which, *k, cap)?,
        };
        Ok(ring)
    }
}
