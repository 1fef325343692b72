//! Exact arithmetic in the subring generated by `L`, `L^-1`, the
//! symmetric-power atoms `C1..C(2g-2)` and `Pic`, localized at the
//! cyclotomic polynomials in `L`.
//!
//! Every value is kept in one canonical shape: a Laurent numerator with
//! integer coefficients over a product of cyclotomic factors `Phi_m(L)`, with
//! no factor dividing the numerator. `(L^a - 1)` splits into the `Phi_m`
//! with `m | a`, so this covers every admissible denominator and makes
//! equality a structural comparison.

mod parse;
mod specialize;
mod zeta;

pub use specialize::{specialize_count, specialize_e, EPolynomial};
pub use zeta::{reduce_functional, reduce_high_sym, sym_cxp_coeff, zeta_coeff, zeta_eval, CurveData};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A monomial `L^l * C1^c[0] * C2^c[1] * ... * Pic^pic`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub l: i64,
    pub c: Vec<u32>,
    pub pic: u32,
}

impl Mono {
    pub fn one() -> Self {
        Mono { l: 0, c: Vec::new(), pic: 0 }
    }

    fn trim(mut self) -> Self {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
        self
    }

    fn times(&self, o: &Mono) -> Mono {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0))
            .collect();
        Mono { l: self.l + o.l, c, pic: self.pic + o.pic }.trim()
    }

    fn rest(&self) -> (Vec<u32>, u32) {
        (self.c.clone(), self.pic)
    }

    fn is_l_only(&self) -> bool {
        self.c.is_empty() && self.pic == 0
    }
}

type Num = BTreeMap<Mono, BigInt>;

/// Element of the localized motivic subring, always in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MotiveClass {
    num: Num,
    /// Exponent of `Phi_m(L)` in the denominator, keyed by `m`.
    den: BTreeMap<u32, u32>,
}

/// Coefficients of `Phi_m`, lowest degree first.
pub fn cyclotomic(m: u32) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    assert!(m >= 1);
    let mut p: Vec<BigInt> = vec![BigInt::zero(); m as usize + 1];
    p[0] = BigInt::from(-1);
    p[m as usize] = BigInt::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            let phi: Vec<BigInt> = cyclotomic(d).into_iter().map(BigInt::from).collect();
            p = div_dense(&p, &phi).expect("cyclotomic divisibility");
        }
    }
    let v: Vec<i64> = p.iter().map(|x| x.to_i64().expect("cyclotomic coefficient")).collect();
    cache.lock().unwrap().insert(m, v.clone());
    v
}

fn euler_phi(m: u32) -> u32 {
    (1..=m).filter(|k| num_integer::gcd(*k, m) == 1).count() as u32
}

/// Exact division of dense polynomials; `d` must be monic.
fn div_dense(p: &[BigInt], d: &[BigInt]) -> Option<Vec<BigInt>> {
    let k = d.len() - 1;
    debug_assert!(d[k].is_one());
    if p.iter().all(|x| x.is_zero()) {
        return Some(Vec::new());
    }
    if p.len() < d.len() {
        return None;
    }
    let mut r = p.to_vec();
    let mut out = vec![BigInt::zero(); p.len() - k];
    for i in (0..out.len()).rev() {
        let c = r[i + k].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in d.iter().enumerate() {
            if !dj.is_zero() {
                r[i + j] -= &c * dj;
            }
        }
        out[i] = c;
    }
    if r.iter().all(|x| x.is_zero()) {
        Some(out)
    } else {
        None
    }
}

fn mul_dense(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn cyclo_big(m: u32) -> Vec<BigInt> {
    cyclotomic(m).into_iter().map(BigInt::from).collect()
}

/// Product of `Phi_m^e` over the given factors, dense in `L`.
fn den_poly(f: &BTreeMap<u32, u32>) -> Vec<BigInt> {
    let mut p = vec![BigInt::one()];
    for (&m, &e) in f {
        let phi = cyclo_big(m);
        for _ in 0..e {
            p = mul_dense(&p, &phi);
        }
    }
    p
}

fn add_term(num: &mut Num, m: Mono, c: BigInt) {
    if c.is_zero() {
        return;
    }
    let slot = num.entry(m.clone()).or_insert_with(BigInt::zero);
    *slot += c;
    if slot.is_zero() {
        num.remove(&m);
    }
}

fn num_times_l_poly(num: &Num, p: &[BigInt]) -> Num {
    let mut out = Num::new();
    for (m, c) in num {
        for (j, pj) in p.iter().enumerate() {
            if pj.is_zero() {
                continue;
            }
            let mut mm = m.clone();
            mm.l += j as i64;
            add_term(&mut out, mm, c * pj);
        }
    }
    out
}

/// Divides every `L`-slice of the numerator by `Phi_m`, if exact.
fn num_div_cyclo(num: &Num, m: u32) -> Option<Num> {
    let phi = cyclo_big(m);
    let mut groups: BTreeMap<(Vec<u32>, u32), BTreeMap<i64, BigInt>> = BTreeMap::new();
    for (mono, c) in num {
        groups.entry(mono.rest()).or_default().insert(mono.l, c.clone());
    }
    let mut out = Num::new();
    for ((c, pic), slice) in groups {
        let lo = *slice.keys().next().unwrap();
        let hi = *slice.keys().last().unwrap();
        let mut dense = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (l, v) in slice {
            dense[(l - lo) as usize] = v;
        }
        let qt = div_dense(&dense, &phi)?;
        for (j, v) in qt.into_iter().enumerate() {
            if !v.is_zero() {
                out.insert(Mono { l: lo + j as i64, c: c.clone(), pic }, v);
            }
        }
    }
    Some(out)
}

impl MotiveClass {
    pub fn zero() -> Self {
        MotiveClass { num: Num::new(), den: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::from_mono(Mono::one(), BigInt::from(n))
    }

    pub fn from_mono(m: Mono, c: BigInt) -> Self {
        let mut num = Num::new();
        add_term(&mut num, m.trim(), c);
        MotiveClass { num, den: BTreeMap::new() }
    }

    /// `L^a` for any integer `a`.
    pub fn l_pow(a: i64) -> Self {
        Self::from_mono(Mono { l: a, c: Vec::new(), pic: 0 }, BigInt::one())
    }

    pub fn l() -> Self {
        Self::l_pow(1)
    }

    /// `L^a - 1`.
    pub fn l_pow_minus_one(a: i64) -> Self {
        &Self::l_pow(a) - &Self::one()
    }

    /// The bare atom `C^(i)`, `i >= 1`. Use [`zeta_coeff`] for reduced values.
    pub fn c_atom(i: u32) -> Self {
        assert!(i >= 1);
        let mut c = vec![0; i as usize];
        c[i as usize - 1] = 1;
        Self::from_mono(Mono { l: 0, c, pic: 0 }, BigInt::one())
    }

    /// The bare `Pic` atom.
    pub fn pic_atom() -> Self {
        Self::from_mono(Mono { l: 0, c: Vec::new(), pic: 1 }, BigInt::one())
    }

    /// Polynomial in `L` from ascending integer coefficients.
    pub fn l_poly(coeffs: &[i64]) -> Self {
        let mut num = Num::new();
        for (j, c) in coeffs.iter().enumerate() {
            add_term(&mut num, Mono { l: j as i64, c: Vec::new(), pic: 0 }, BigInt::from(*c));
        }
        MotiveClass { num, den: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.num.iter()
    }

    /// Cyclotomic denominator factors `(m, exponent)`.
    pub fn den_factors(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.den.iter().map(|(a, b)| (*a, *b))
    }

    pub fn min_l_exp(&self) -> i64 {
        self.num.keys().map(|m| m.l).min().unwrap_or(0)
    }

    pub fn max_l_exp(&self) -> i64 {
        self.num.keys().map(|m| m.l).max().unwrap_or(0)
    }

    /// True when there is no denominator at all, including no negative `L` power.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty() && self.min_l_exp() >= 0
    }

    /// Largest `i` with `C^(i)` present.
    pub fn max_c_index(&self) -> usize {
        self.num.keys().map(|m| m.c.len()).max().unwrap_or(0)
    }

    fn reduce(mut self) -> Self {
        if self.num.is_empty() {
            self.den.clear();
            return self;
        }
        let factors: Vec<(u32, u32)> = self.den.iter().map(|(a, b)| (*a, *b)).collect();
        for (m, mut e) in factors {
            while e > 0 {
                match num_div_cyclo(&self.num, m) {
                    Some(n) => {
                        self.num = n;
                        e -= 1;
                    }
                    None => break,
                }
            }
            if e == 0 {
                self.den.remove(&m);
            } else {
                self.den.insert(m, e);
            }
        }
        self
    }

    pub fn neg(&self) -> Self {
        MotiveClass {
            num: self.num.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let mut den = self.den.clone();
        for (&m, &e) in &o.den {
            let s = den.entry(m).or_insert(0);
            *s = (*s).max(e);
        }
        let lift = |x: &Self| -> Num {
            let extra: BTreeMap<u32, u32> = den
                .iter()
                .map(|(&m, &e)| (m, e - x.den.get(&m).copied().unwrap_or(0)))
                .filter(|(_, e)| *e > 0)
                .collect();
            if extra.is_empty() {
                x.num.clone()
            } else {
                num_times_l_poly(&x.num, &den_poly(&extra))
            }
        };
        let mut num = lift(self);
        for (m, c) in lift(o) {
            add_term(&mut num, m, c);
        }
        MotiveClass { num, den }.reduce()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut num = Num::new();
        for (ma, ca) in &self.num {
            for (mb, cb) in &o.num {
                add_term(&mut num, ma.times(mb), ca * cb);
            }
        }
        let mut den = self.den.clone();
        for (&m, &e) in &o.den {
            *den.entry(m).or_insert(0) += e;
        }
        let needs_reduce = !self.den.is_empty() || !o.den.is_empty();
        let r = MotiveClass { num, den };
        if needs_reduce {
            r.reduce()
        } else {
            r
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        if c == 0 {
            return Self::zero();
        }
        MotiveClass {
            num: self.num.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
            den: self.den.clone(),
        }
    }

    /// Multiplies by `L^a`.
    pub fn shift_l(&self, a: i64) -> Self {
        MotiveClass {
            num: self
                .num
                .iter()
                .map(|(m, c)| (Mono { l: m.l + a, ..m.clone() }, c.clone()))
                .collect(),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse, defined when the numerator is a unit times
    /// cyclotomic factors in `L` alone.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionOutsideRing("division by zero".into()));
        }
        if !self.num.keys().all(Mono::is_l_only) {
            return Err(Error::DivisionOutsideRing(format!("non-invertible numerator {self}")));
        }
        let lo = self.min_l_exp();
        let hi = self.max_l_exp();
        let mut dense = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (m, c) in &self.num {
            dense[(m.l - lo) as usize] = c.clone();
        }
        let deg = dense.len() as u32 - 1;
        let mut factors: BTreeMap<u32, u32> = BTreeMap::new();
        let bound = (2 * deg * deg).max(2);
        let mut m = 1;
        while dense.len() > 1 && m <= bound {
            if (euler_phi(m) as usize) < dense.len() {
                let phi = cyclo_big(m);
                while dense.len() > phi.len() - 1 {
                    match div_dense(&dense, &phi) {
                        Some(qt) => {
                            dense = qt;
                            *factors.entry(m).or_insert(0) += 1;
                        }
                        None => break,
                    }
                }
            }
            m += 1;
        }
        if dense.len() != 1 || !dense[0].abs().is_one() {
            return Err(Error::DivisionOutsideRing(format!("non-invertible numerator {self}")));
        }
        let unit = dense[0].clone();
        let mut num = Num::new();
        for (j, c) in den_poly(&self.den).into_iter().enumerate() {
            add_term(&mut num, Mono { l: j as i64 - lo, c: Vec::new(), pic: 0 }, c * &unit);
        }
        Ok(MotiveClass { num, den: factors }.reduce())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    pub fn sum<'a>(it: impl IntoIterator<Item = &'a MotiveClass>) -> Self {
        it.into_iter().fold(Self::zero(), |a, b| a.add(b))
    }

    pub fn product<'a>(it: impl IntoIterator<Item = &'a MotiveClass>) -> Self {
        it.into_iter().fold(Self::one(), |a, b| a.mul(b))
    }

    /// Canonical text, identical to `Display`.
    pub fn canonical(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse::parse(s)
    }
}

impl std::ops::Add for &MotiveClass {
    type Output = MotiveClass;
    fn add(self, o: &MotiveClass) -> MotiveClass {
        MotiveClass::add(self, o)
    }
}

impl std::ops::Sub for &MotiveClass {
    type Output = MotiveClass;
    fn sub(self, o: &MotiveClass) -> MotiveClass {
        MotiveClass::sub(self, o)
    }
}

impl std::ops::Mul for &MotiveClass {
    type Output = MotiveClass;
    fn mul(self, o: &MotiveClass) -> MotiveClass {
        MotiveClass::mul(self, o)
    }
}

fn fmt_mono(m: &Mono, shift: i64) -> Vec<String> {
    let mut v = Vec::new();
    let l = m.l + shift;
    match l {
        0 => {}
        1 => v.push("L".to_string()),
        _ => v.push(format!("L^{l}")),
    }
    for (i, &e) in m.c.iter().enumerate() {
        match e {
            0 => {}
            1 => v.push(format!("C{}", i + 1)),
            _ => v.push(format!("C{}^{e}", i + 1)),
        }
    }
    match m.pic {
        0 => {}
        1 => v.push("Pic".to_string()),
        p => v.push(format!("Pic^{p}")),
    }
    v
}

/// Writes a numerator, terms in descending monomial order.
fn fmt_num(num: &Num, shift: i64) -> String {
    if num.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (m, c)) in num.iter().rev().enumerate() {
        let vars = fmt_mono(m, shift);
        let a = c.abs();
        let body = if vars.is_empty() {
            a.to_string()
        } else if a.is_one() {
            vars.join(" * ")
        } else {
            format!("{a} * {}", vars.join(" * "))
        };
        match (i, c.is_negative()) {
            (0, false) => s.push_str(&body),
            (0, true) => {
                s.push('-');
                s.push_str(&body)
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(&body)
            }
            (_, true) => {
                s.push_str(" - ");
                s.push_str(&body)
            }
        }
    }
    s
}

impl fmt::Display for MotiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.min_l_exp();
        if self.den.is_empty() && lo >= 0 {
            return write!(f, "{}", fmt_num(&self.num, 0));
        }
        let shift = if lo < 0 { -lo } else { 0 };
        let mut factors = Vec::new();
        if shift > 0 {
            factors.push(if shift == 1 { "L".to_string() } else { format!("L^{shift}") });
        }
        for (&m, &e) in &self.den {
            let poly = fmt_num(&MotiveClass::l_poly(&cyclotomic(m)).num, 0);
            factors.push(if e == 1 { format!("({poly})") } else { format!("({poly})^{e}") });
        }
        let den = if factors.len() == 1 && factors[0].starts_with('(') && !factors[0].contains(")^") {
            factors[0].clone()
        } else {
            format!("({})", factors.join(" * "))
        };
        write!(f, "({}) / {}", fmt_num(&self.num, shift), den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MotiveClass {
        MotiveClass::parse(s).unwrap()
    }

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(2), vec![1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
    }

    #[test]
    fn unit_cancellation() {
        let x = p("C1 * Pic + L^3");
        let lm1 = MotiveClass::l_pow_minus_one(1);
        assert_eq!(x.mul(&lm1).div(&lm1).unwrap(), x);
    }

    #[test]
    fn polynomial_division() {
        let a = MotiveClass::l_pow_minus_one(2);
        let b = MotiveClass::l_pow_minus_one(1);
        assert_eq!(a.div(&b).unwrap(), p("L + 1"));
    }

    #[test]
    fn linearity() {
        let c = MotiveClass::c_atom(1);
        let x = c.mul(&p("L + 1")).add(&c.mul(&p("-L")));
        assert_eq!(x, c);
    }

    #[test]
    fn non_admissible_division_fails() {
        assert!(matches!(p("1").div(&p("L + 2")), Err(Error::DivisionOutsideRing(_))));
        assert!(matches!(p("1").div(&p("Pic")), Err(Error::DivisionOutsideRing(_))));
        assert!(matches!(p("1").div(&p("2")), Err(Error::DivisionOutsideRing(_))));
    }

    #[test]
    fn display_shapes() {
        let x = MotiveClass::pic_atom().div(&MotiveClass::l_pow_minus_one(1)).unwrap();
        assert_eq!(x.to_string(), "(Pic) / (L - 1)");
        let y = MotiveClass::l_pow(-3).div(&MotiveClass::l_pow_minus_one(2)).unwrap();
        assert_eq!(y.to_string(), "(1) / (L^3 * (L - 1) * (L + 1))");
        assert_eq!(p("2*L^2*C1 - L + 3").to_string(), "2 * L^2 * C1 - L + 3");
    }

    #[test]
    fn inverse_of_cyclotomic_products() {
        let d = p("(L^2 - 1) * (L^3 - 1) * L^2");
        let inv = d.inverse().unwrap();
        assert_eq!(inv.mul(&d), MotiveClass::one());
        assert_eq!(p("-L").inverse().unwrap(), p("-1 / L"));
    }
}
