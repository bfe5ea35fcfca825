//! Text parser for polynomials (`3/2*x^2*y - z + 1`), also used by the
//! vector-field parser for the coefficient parts of `2*z d/dx + y d/dz`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::polynomial::Polynomial;
use super::ring::Ring;
use super::{AlgebraError, Rational};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Token {
    Num(BigInt),
    Ident(String),
    /// `d/d<var>`
    Deriv(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, AlgebraError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((start, Token::Num(digits.parse().expect("digits"))));
            continue;
        }
        if c == 'd'
            && chars.get(i + 1) == Some(&'/')
            && chars.get(i + 2) == Some(&'d')
            && chars.get(i + 3).is_some_and(|ch| ch.is_alphabetic())
        {
            i += 3;
            let vstart = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Deriv(chars[vstart..i].iter().collect())));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
            continue;
        }
        let tok = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            _ => {
                return Err(AlgebraError::Parse {
                    position: start,
                    message: format!("unexpected character '{c}'"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

pub(crate) struct Parser {
    ring: Ring,
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    pub(crate) fn new(ring: &Ring, text: &str) -> Result<Self, AlgebraError> {
        Ok(Self {
            ring: ring.clone(),
            tokens: lex(text)?,
            pos: 0,
            len: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    pub(crate) fn tokens_ahead(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n).map(|(_, t)| t)
    }

    pub(crate) fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> AlgebraError {
        AlgebraError::Parse {
            position: self
                .tokens
                .get(self.pos)
                .map(|(p, _)| *p)
                .unwrap_or(self.len),
            message: message.into(),
        }
    }

    pub(crate) fn expect_end(&self) -> Result<(), AlgebraError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("trailing input"))
        }
    }

    /// sum := term (('+'|'-') term)*
    pub(crate) fn parse_sum(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    acc = &acc + &self.parse_term()?;
                }
                Some(Token::Minus) => {
                    self.next();
                    acc = &acc - &self.parse_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    /// term := unary (('*'|'/') unary)*
    pub(crate) fn parse_term(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    acc = &acc * &self.parse_unary()?;
                }
                Some(Token::Slash) => {
                    self.next();
                    let divisor = self.parse_unary()?;
                    let c = divisor
                        .as_constant()
                        .ok_or_else(|| self.error("division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(self.error("division by zero"));
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.next();
                Ok(-&self.parse_unary()?)
            }
            Some(Token::Plus) => {
                self.next();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> Result<Polynomial, AlgebraError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.next();
            match self.next() {
                Some(Token::Num(n)) => {
                    let e: u32 = n.try_into().map_err(|_| self.error("exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(self.error("expected a non-negative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Polynomial::constant(&self.ring, Rational::from_integer(n))),
            Some(Token::Ident(name)) => Polynomial::var_named(&self.ring, &name).map_err(|_| {
                self.pos -= 1;
                let e = self.error(format!("unknown variable '{name}'"));
                self.pos += 1;
                e
            }),
            Some(Token::LParen) => {
                let inner = self.parse_sum()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected a number, variable or '('"))
            }
        }
    }
}

/// Parses and normal-forms a polynomial in `ring`.
pub fn parse_polynomial(ring: &Ring, text: &str) -> Result<Polynomial, AlgebraError> {
    let mut p = Parser::new(ring, text)?;
    if p.at_end() {
        return Err(p.error("empty polynomial"));
    }
    let poly = p.parse_sum()?;
    p.expect_end()?;
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CoordinateRing;

    #[test]
    fn canonical_text_round_trips() {
        let ring = CoordinateRing::quadric();
        for text in [
            "0",
            "1",
            "-3/2",
            "x",
            "-x",
            "3/2*x^2*y - 7*z + 1",
            "x*y*z - 1/3*y",
        ] {
            let p = parse_polynomial(&ring, text).unwrap();
            assert_eq!(p.to_text(), text);
        }
    }

    #[test]
    fn accepts_products_of_sums() {
        let ring = CoordinateRing::affine(&["x"]);
        let p = parse_polynomial(&ring, "(x - 2)*(x + 1)").unwrap();
        assert_eq!(p.to_text(), "x^2 - x - 2");
    }

    #[test]
    fn reports_errors() {
        let ring = CoordinateRing::quadric();
        assert!(parse_polynomial(&ring, "x + w").is_err());
        assert!(parse_polynomial(&ring, "x / y").is_err());
        assert!(parse_polynomial(&ring, "x / 0").is_err());
        assert!(parse_polynomial(&ring, "(x").is_err());
        assert!(parse_polynomial(&ring, "").is_err());
        assert!(parse_polynomial(&ring, "x $").is_err());
    }
}
