use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::BracketError;
use crate::algebra::{parse_polynomial, parse_rational, Polynomial, Rational, Ring};
use crate::fields::{bracket, VectorField};

#[derive(Debug)]
pub enum Node {
    Gen(String),
    Brk(BracketExpr, BracketExpr),
    Scl(Rational, BracketExpr),
    Sum(Vec<BracketExpr>),
    /// Polynomial multiple; only used to state identities.
    Mul(Polynomial, BracketExpr),
}

/// Bracket word over named generators. Subtrees are shared, so a
/// certificate is a DAG and evaluation is memoized per node.
#[derive(Clone, Debug)]
pub struct BracketExpr(Arc<Node>);

impl BracketExpr {
    pub fn gen(name: &str) -> Self {
        Self(Arc::new(Node::Gen(name.to_string())))
    }

    pub fn brk(a: &Self, b: &Self) -> Self {
        Self(Arc::new(Node::Brk(a.clone(), b.clone())))
    }

    pub fn scl(c: Rational, e: &Self) -> Self {
        Self(Arc::new(Node::Scl(c, e.clone())))
    }

    pub fn sum(parts: Vec<Self>) -> Self {
        Self(Arc::new(Node::Sum(parts)))
    }

    pub fn mul(p: Polynomial, e: &Self) -> Self {
        Self(Arc::new(Node::Mul(p, e.clone())))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// `sum c_i e_i`, dropping zero terms and unit scalings.
    pub fn combination(terms: impl IntoIterator<Item = (Rational, Self)>) -> Self {
        let parts: Vec<Self> = terms
            .into_iter()
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, e)| if c.is_one() { e } else { Self::scl(c, &e) })
            .collect();
        if parts.len() == 1 {
            parts.into_iter().next().expect("one part")
        } else {
            Self::sum(parts)
        }
    }

    /// True when no `mul` node occurs, i.e. the word is a genuine Lie
    /// algebra element built from the generators.
    pub fn is_lie_word(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.node() {
                Node::Gen(_) => {}
                Node::Brk(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Scl(_, a) => stack.push(a.clone()),
                Node::Sum(parts) => stack.extend(parts.iter().cloned()),
                Node::Mul(..) => return false,
            }
        }
        true
    }

    /// Number of distinct nodes.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.node() {
                Node::Gen(_) => {}
                Node::Brk(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                Node::Scl(_, a) | Node::Mul(_, a) => stack.push(a.clone()),
                Node::Sum(parts) => stack.extend(parts.iter().cloned()),
            }
        }
        seen.len()
    }

    pub fn evaluate(
        &self,
        env: &BTreeMap<String, VectorField>,
    ) -> Result<VectorField, BracketError> {
        Evaluator::new(env).eval(self)
    }

    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(&mut out);
        out
    }

    fn write_sexpr(&self, out: &mut String) {
        match self.node() {
            Node::Gen(name) => {
                out.push_str("(gen ");
                out.push_str(name);
                out.push(')');
            }
            Node::Brk(a, b) => {
                out.push_str("(brk ");
                a.write_sexpr(out);
                out.push(' ');
                b.write_sexpr(out);
                out.push(')');
            }
            Node::Scl(c, a) => {
                out.push_str(&format!("(scl {c} "));
                a.write_sexpr(out);
                out.push(')');
            }
            Node::Sum(parts) => {
                out.push_str("(sum");
                for p in parts {
                    out.push(' ');
                    p.write_sexpr(out);
                }
                out.push(')');
            }
            Node::Mul(p, a) => {
                out.push_str(&format!("(mul \"{}\" ", p.to_text()));
                a.write_sexpr(out);
                out.push(')');
            }
        }
    }

    /// Parses the s-expression grammar; identical subtrees become one node.
    /// `ring` is needed only for `mul` nodes.
    pub fn parse(text: &str, ring: &Ring) -> Result<Self, BracketError> {
        let tokens = tokenize(text)?;
        let mut parser = SexprParser {
            tokens,
            pos: 0,
            ring: ring.clone(),
            interned: HashMap::new(),
        };
        let e = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(BracketError::Parse(
                "trailing input after expression".into(),
            ));
        }
        Ok(e)
    }
}

impl fmt::Display for BracketExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

/// Memoizing evaluator; reusing one across expressions shares work on
/// common subtrees.
pub struct Evaluator<'a> {
    env: &'a BTreeMap<String, VectorField>,
    memo: HashMap<usize, (BracketExpr, VectorField)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(env: &'a BTreeMap<String, VectorField>) -> Self {
        Self {
            env,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &BracketExpr) -> Result<VectorField, BracketError> {
        if let Some((_, v)) = self.memo.get(&e.id()) {
            return Ok(v.clone());
        }
        let value = match e.node() {
            Node::Gen(name) => self
                .env
                .get(name)
                .cloned()
                .ok_or_else(|| BracketError::UnknownGenerator(name.clone()))?,
            Node::Brk(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                bracket(&a, &b)?
            }
            Node::Scl(c, a) => self.eval(a)?.scale(c),
            Node::Sum(parts) => {
                let mut acc: Option<VectorField> = None;
                for p in parts {
                    let v = self.eval(p)?;
                    acc = Some(match acc {
                        None => v,
                        Some(a) => a.checked_add(&v)?,
                    });
                }
                match acc {
                    Some(v) => v,
                    None => {
                        let ring = self
                            .env
                            .values()
                            .next()
                            .map(|f| f.ring().clone())
                            .ok_or_else(|| {
                                BracketError::Parse("empty sum without generators".into())
                            })?;
                        VectorField::zero(&ring)
                    }
                }
            }
            Node::Mul(p, a) => self.eval(a)?.mul_poly(p)?,
        };
        // the expression is kept alive so its address is not reused
        self.memo.insert(e.id(), (e.clone(), value.clone()));
        Ok(value)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
    Str(String),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, BracketError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                        None => return Err(BracketError::Parse("unterminated string".into())),
                    }
                }
                out.push(Tok::Str(s));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == '"' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                out.push(Tok::Atom(s));
            }
        }
    }
    Ok(out)
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Gen(String),
    Brk(usize, usize),
    Scl(String, usize),
    Sum(Vec<usize>),
    Mul(String, usize),
}

struct SexprParser {
    tokens: Vec<Tok>,
    pos: usize,
    ring: Ring,
    interned: HashMap<Key, BracketExpr>,
}

impl SexprParser {
    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn intern(&mut self, key: Key, make: impl FnOnce() -> BracketExpr) -> BracketExpr {
        self.interned.entry(key).or_insert_with(make).clone()
    }

    fn expect_close(&mut self) -> Result<(), BracketError> {
        match self.next() {
            Some(Tok::Close) => Ok(()),
            _ => Err(BracketError::Parse(format!(
                "expected ')' at token {}",
                self.pos - 1
            ))),
        }
    }

    fn expr(&mut self) -> Result<BracketExpr, BracketError> {
        if self.next() != Some(Tok::Open) {
            return Err(BracketError::Parse(format!(
                "expected '(' at token {}",
                self.pos - 1
            )));
        }
        let head = match self.next() {
            Some(Tok::Atom(a)) => a,
            _ => return Err(BracketError::Parse("expected an operator".into())),
        };
        let e = match head.as_str() {
            "gen" => {
                let name = match self.next() {
                    Some(Tok::Atom(a)) => a,
                    _ => return Err(BracketError::Parse("expected a generator name".into())),
                };
                self.intern(Key::Gen(name.clone()), || BracketExpr::gen(&name))
            }
            "brk" => {
                let a = self.expr()?;
                let b = self.expr()?;
                self.intern(Key::Brk(a.id(), b.id()), || BracketExpr::brk(&a, &b))
            }
            "scl" => {
                let c = match self.next() {
                    Some(Tok::Atom(a)) => parse_rational(&a)?,
                    _ => return Err(BracketError::Parse("expected a rational".into())),
                };
                let a = self.expr()?;
                self.intern(Key::Scl(c.to_string(), a.id()), || BracketExpr::scl(c, &a))
            }
            "sum" => {
                let mut parts = Vec::new();
                while self.tokens.get(self.pos) == Some(&Tok::Open) {
                    parts.push(self.expr()?);
                }
                let ids = parts.iter().map(BracketExpr::id).collect();
                self.intern(Key::Sum(ids), || BracketExpr::sum(parts))
            }
            "mul" => {
                let p = match self.next() {
                    Some(Tok::Str(s)) => parse_polynomial(&self.ring, &s)?,
                    _ => return Err(BracketError::Parse("expected a quoted polynomial".into())),
                };
                let a = self.expr()?;
                self.intern(Key::Mul(p.to_text(), a.id()), || BracketExpr::mul(p, &a))
            }
            other => return Err(BracketError::Parse(format!("unknown operator '{other}'"))),
        };
        self.expect_close()?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Variety;
    use crate::fields::catalog;

    #[test]
    fn sexpr_round_trip_and_sharing() {
        let ring = Variety::Quadric.ring();
        let text = "(sum (brk (gen THETA) (gen XI)) (scl -3/2 (brk (gen THETA) (gen XI))) (mul \"x*z\" (gen H)))";
        let e = BracketExpr::parse(text, &ring).unwrap();
        assert_eq!(e.to_sexpr(), text);
        // sum, two shared brk, gen THETA, gen XI, scl, mul, gen H
        assert_eq!(e.dag_size(), 7);
        assert!(!e.is_lie_word());
    }

    #[test]
    fn evaluation_matches_direct_bracket() {
        let env = catalog(Variety::Quadric);
        let ring = Variety::Quadric.ring();
        let e = BracketExpr::parse("(scl 1/2 (brk (gen THETA) (gen XI)))", &ring).unwrap();
        let h = &env["H"];
        assert_eq!(
            e.evaluate(&env).unwrap(),
            h.scale(&Rational::new(1.into(), 2.into()))
        );
        assert!(e.is_lie_word());
    }

    #[test]
    fn parse_errors() {
        let ring = Variety::Quadric.ring();
        for bad in [
            "(gen",
            "(foo (gen X))",
            "(brk (gen A))",
            "(scl x (gen A))",
            "(gen A) extra",
            "(mul x (gen A))",
        ] {
            assert!(BracketExpr::parse(bad, &ring).is_err(), "{bad}");
        }
        let env = catalog(Variety::Quadric);
        let e = BracketExpr::parse("(gen NOPE)", &ring).unwrap();
        assert!(matches!(
            e.evaluate(&env),
            Err(BracketError::UnknownGenerator(_))
        ));
    }
}
