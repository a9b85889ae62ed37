//! Text syntax for polynomials: identifiers, `+ - * / ^`, parentheses and
//! rational literals such as `3/2*x^2*y - 1`. Division is only allowed by a
//! nonzero constant. [`format_polynomial`] output parses back to the same
//! polynomial.

use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::polynomial::{Monomial, Polynomial, Rational};
use crate::error::{Error, Result};

/// Ordered list of variable names shared by every polynomial of a ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Variables {
    names: Vec<String>,
}

impl Variables {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) {
                return Err(Error::Invalid(format!("`{n}` is not a valid variable name")));
            }
            if names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate variable `{n}`")));
            }
        }
        Ok(Variables { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<Polynomial> {
        Ok(Polynomial::var(self.len(), self.index_of(name)?))
    }

    pub fn parse(&self, src: &str) -> Result<Polynomial> {
        let mut p = Parser { src: src.as_bytes(), pos: 0, vars: self };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(out)
    }

    pub fn format(&self, p: &Polynomial) -> String {
        format_polynomial(p, &self.names)
    }

    /// Partial derivative with respect to a named variable.
    pub fn differentiate(&self, p: &Polynomial, name: &str) -> Result<Polynomial> {
        crate::error::check_len(self.len(), p.nvars())?;
        p.derivative(self.index_of(name)?)
    }

    /// A copy with one more variable appended (a fresh name derived from `hint`).
    pub fn with_fresh(&self, hint: &str) -> Variables {
        let mut name = hint.to_string();
        let mut k = 0;
        while self.names.contains(&name) {
            k += 1;
            name = format!("{hint}{k}");
        }
        let mut names = self.names.clone();
        names.push(name);
        Variables { names }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn format_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Terms are printed by decreasing total degree, ties broken by decreasing
/// exponent vector.
pub fn format_polynomial(p: &Polynomial, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(&Monomial, &Rational)> = p.terms().collect();
    terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
    let mut out = String::new();
    for (idx, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if !abs.is_one() || m.is_one() {
            factors.push(format_rational(&abs));
        }
        for (i, &e) in m.exponents().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(names[i].clone()),
                _ => factors.push(format!("{}^{}", names[i], e)),
            }
        }
        let _ = write!(out, "{}", factors.join("*"));
    }
    out
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a Variables,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.factor()?;
                    match d.constant_value() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        Some(_) => return Err(Error::Parse { pos: at, msg: "division by zero".into() }),
                        None => {
                            return Err(Error::Parse { pos: at, msg: "division by a non-constant".into() })
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.vars.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(Polynomial::constant(n, Rational::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let i = self.vars.index_of(name)?;
                Ok(Polynomial::var(n, i))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
