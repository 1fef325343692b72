//! Exact rationals and lexicographic infinitesimal extensions.
//!
//! A [`Lex`] value is `x0 + x1*e1 + x2*e2 + ...` where `e1 >> e2 >> ... > 0`
//! are formal infinitesimals. Stability parameters just off a wall are
//! represented this way, so no concrete epsilon is ever chosen.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("floor out of i64 range")
}

pub fn ceil_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("ceil out of i64 range")
}

/// Exact value with formal infinitesimal tail, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Lex(Vec<Q>);

impl Lex {
    pub fn zero() -> Self {
        Lex(Vec::new())
    }

    pub fn real(x: Q) -> Self {
        Lex(vec![x]).trimmed()
    }

    pub fn int(n: i64) -> Self {
        Lex::real(q(n))
    }

    /// The infinitesimal `e_level` (level 0 is the real unit).
    pub fn eps(level: usize) -> Self {
        let mut v = vec![Q::zero(); level + 1];
        v[level] = Q::one();
        Lex(v)
    }

    pub fn from_parts(parts: Vec<Q>) -> Self {
        Lex(parts).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|x| x.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn parts(&self) -> &[Q] {
        &self.0
    }

    /// Number of stored components; levels at or beyond this are zero.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn coeff(&self, level: usize) -> Q {
        self.0.get(level).cloned().unwrap_or_else(Q::zero)
    }

    pub fn re(&self) -> Q {
        self.coeff(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.0.len() <= 1
    }

    /// Integer value when the quantity is an exact integer.
    pub fn as_integer(&self) -> Option<i64> {
        if !self.is_real() {
            return None;
        }
        let r = self.re();
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> Lex {
        Lex(self.0.iter().map(|x| x * c).collect()).trimmed()
    }

    pub fn signum(&self) -> Ordering {
        match self.0.iter().find(|x| !x.is_zero()) {
            None => Ordering::Equal,
            Some(x) if x.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    /// Smallest integer strictly greater than `self`.
    pub fn int_above(&self) -> i64 {
        let r = self.re();
        let f = floor_i64(&r);
        if q(f) == r {
            let tail = Lex(self.0[1.min(self.0.len())..].to_vec());
            if tail.signum() == Ordering::Less {
                f
            } else {
                f + 1
            }
        } else {
            f + 1
        }
    }

    /// Drops the infinitesimal levels listed as unused, compacting the rest.
    pub fn compact(&self, keep: &[bool]) -> Lex {
        let v = self
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| keep.get(*i).copied().unwrap_or(false))
            .map(|(_, x)| x.clone())
            .collect();
        Lex(v).trimmed()
    }
}

impl Ord for Lex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for Lex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Lex> for &'a Lex {
    type Output = Lex;
    fn add(self, o: &Lex) -> Lex {
        let n = self.0.len().max(o.0.len());
        Lex((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect()).trimmed()
    }
}

impl<'a> Sub<&'a Lex> for &'a Lex {
    type Output = Lex;
    fn sub(self, o: &Lex) -> Lex {
        let n = self.0.len().max(o.0.len());
        Lex((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect()).trimmed()
    }
}

impl Neg for &Lex {
    type Output = Lex;
    fn neg(self) -> Lex {
        Lex(self.0.iter().map(|x| -x).collect())
    }
}

impl Add for Lex {
    type Output = Lex;
    fn add(self, o: Lex) -> Lex {
        &self + &o
    }
}

impl Sub for Lex {
    type Output = Lex;
    fn sub(self, o: Lex) -> Lex {
        &self - &o
    }
}

impl fmt::Display for Lex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            return write!(f, "{}", fmt_q(&self.re()));
        }
        let parts: Vec<String> = self.0.iter().map(fmt_q).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_order_is_lexicographic() {
        let a = Lex::int(1);
        let b = &Lex::int(1) + &Lex::eps(1);
        let c = &Lex::int(1) - &Lex::eps(1).scale(&q(1000));
        assert!(a < b);
        assert!(c < a);
        assert!(&b + &Lex::eps(2).scale(&q(-7)) > a);
    }

    #[test]
    fn int_above_respects_tail() {
        assert_eq!(Lex::int(3).int_above(), 4);
        assert_eq!((&Lex::int(3) - &Lex::eps(1)).int_above(), 3);
        assert_eq!((&Lex::int(3) + &Lex::eps(1)).int_above(), 4);
        assert_eq!(Lex::real(qr(-1, 2)).int_above(), 0);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_q("3/6").unwrap(), qr(1, 2));
        assert_eq!(fmt_q(&qr(-4, 2)), "-2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }
}
