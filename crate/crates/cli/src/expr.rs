//! Polynomial literals for the command line.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*'? unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'x' | 'Phi(' integer ')' | 'compose1m(' expr ',' integer ')' | '(' expr ')'
//! ```
//!
//! `compose1m(p, n)` is `p(1 - x^n)`.

use std::fmt;

use equidist_core::zpoly::{self, IntPolynomial};
use num_bigint::BigInt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Largest exponent or index accepted, to keep literals at desk scale.
const MAX_EXPONENT: u64 = 1 << 20;

pub fn parse(src: &str) -> Result<IntPolynomial, ParseError> {
    let mut p = Parser {
        s: src.as_bytes(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self
            .s
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<IntPolynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<IntPolynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let implicit = |c: u8| matches!(c, b'x' | b'P' | b'c' | b'(');
            if self.eat(b'*') || self.peek().is_some_and(implicit) {
                acc = &acc * &self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<IntPolynomial, ParseError> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<IntPolynomial, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.small_uint()?;
            Ok(base.pow(e as u32))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<IntPolynomial, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(IntPolynomial::constant(self.integer()?)),
            Some(b'x') => {
                self.pos += 1;
                Ok(IntPolynomial::from_i64(&[0, 1]))
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(b'P') if self.keyword("Phi") => {
                self.expect(b'(')?;
                let m = self.small_uint()?;
                if m == 0 {
                    return Err(self.err("Phi needs a positive index"));
                }
                self.expect(b')')?;
                Ok(zpoly::cyclotomic(m))
            }
            Some(b'c') if self.keyword("compose1m") => {
                self.expect(b'(')?;
                let p = self.expr()?;
                self.expect(b',')?;
                let n = self.small_uint()?;
                if n == 0 {
                    return Err(self.err("compose1m needs a positive power"));
                }
                self.expect(b')')?;
                Ok(zpoly::compose_shift_power(&p, n as usize))
            }
            Some(_) => Err(self.err("expected a number, x, Phi(..), compose1m(..) or '('")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits"))
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let d = self.digits()?;
        Ok(d.parse().expect("digits parse"))
    }

    fn small_uint(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        let d = self.digits()?;
        match d.parse::<u64>() {
            Ok(v) if v <= MAX_EXPONENT => Ok(v),
            _ => Err(ParseError {
                pos: start,
                msg: format!("integer {d} exceeds {MAX_EXPONENT}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn basic_literals() {
        assert_eq!(parse("x^64-2").unwrap().degree(), Some(64));
        assert_eq!(parse("x^2 - x - 1").unwrap(), p(&[-1, -1, 1]));
        assert_eq!(parse("3*x^2 + 2x - 7").unwrap(), p(&[-7, 2, 3]));
        assert_eq!(parse("-x + 1").unwrap(), p(&[1, -1]));
        assert_eq!(parse("(x+1)^3").unwrap(), p(&[1, 3, 3, 1]));
        assert_eq!(parse("(x-1)(x+1)").unwrap(), p(&[-1, 0, 1]));
    }

    #[test]
    fn families() {
        assert_eq!(parse("Phi(3)").unwrap(), p(&[1, 1, 1]));
        assert_eq!(parse("compose1m(Phi(3), 2)").unwrap(), p(&[3, 0, -3, 0, 1]));
        assert_eq!(parse("Phi(105)").unwrap(), zpoly::cyclotomic(105));
    }

    #[test]
    fn big_coefficients() {
        let v = parse("123456789012345678901234567890*x + 1").unwrap();
        assert_eq!(v.coeff(1).to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn errors_carry_position() {
        let e = parse("x^2 + + 1").unwrap_err();
        assert_eq!(e.pos, 6);
        assert!(parse("Phi(0)").is_err());
        assert!(parse("x^99999999999").is_err());
        assert!(parse("x)").is_err());
        assert!(parse("").is_err());
        assert!(parse("y").is_err());
    }
}
