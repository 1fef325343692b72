//! Reader for the textual form of [`MotiveClass`]. Accepts the canonical
//! output and, more generally, any arithmetic expression in `L`, `Pic`,
//! `C<i>` and integers built with `+ - * / ^` and parentheses.

use num_bigint::BigInt;

use super::MotiveClass;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    L,
    Pic,
    C(u32),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let st = *i;
        while *i < cs.len() && cs[*i].is_ascii_digit() {
            *i += 1;
        }
        cs[st..*i].iter().collect::<String>()
    };
    while i < cs.len() {
        let ch = cs[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push(Tok::Op(ch));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let d = digits(&mut i);
                out.push(Tok::Int(d.parse().unwrap()));
            }
            'L' => {
                out.push(Tok::L);
                i += 1;
            }
            'P' if cs[i..].starts_with(&['P', 'i', 'c']) => {
                out.push(Tok::Pic);
                i += 3;
            }
            'C' => {
                i += 1;
                let d = digits(&mut i);
                let n: u32 = d.parse().map_err(|_| Error::Parse(format!("bad atom C{d}")))?;
                if n == 0 {
                    return Err(Error::Parse("atom C0 is not allowed".into()));
                }
                out.push(Tok::C(n));
            }
            _ => return Err(Error::Parse(format!("unexpected character {ch:?} at {i}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<MotiveClass> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MotiveClass> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                acc = acc.div(&self.unary()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<MotiveClass> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<MotiveClass> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                let e: i64 = n.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                base.pow(if neg { -e } else { e })
            }
            t => Err(Error::Parse(format!("expected exponent, found {t:?}"))),
        }
    }

    fn atom(&mut self) -> Result<MotiveClass> {
        let t = self.peek().cloned();
        self.pos += 1;
        match t {
            Some(Tok::Int(n)) => Ok(MotiveClass::from_mono(super::Mono::one(), n)),
            Some(Tok::L) => Ok(MotiveClass::l()),
            Some(Tok::Pic) => Ok(MotiveClass::pic_atom()),
            Some(Tok::C(i)) => Ok(MotiveClass::c_atom(i)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

pub fn parse(s: &str) -> Result<MotiveClass> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(v)
}
