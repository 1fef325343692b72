//! E-polynomial and point-count realizations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{cyclotomic, CurveData, MotiveClass};
use crate::error::{Error, Result};
use crate::num::{is_prime, Q};

type Bi = BTreeMap<(i64, i64), BigInt>;

fn bi_add_term(p: &mut Bi, k: (i64, i64), c: BigInt) {
    if c.is_zero() {
        return;
    }
    let e = p.entry(k).or_insert_with(BigInt::zero);
    *e += c;
    if e.is_zero() {
        p.remove(&k);
    }
}

fn bi_mul(a: &Bi, b: &Bi) -> Bi {
    let mut out = Bi::new();
    for (&(i, j), x) in a {
        for (&(k, l), y) in b {
            bi_add_term(&mut out, (i + k, j + l), x * y);
        }
    }
    out
}

fn bi_one() -> Bi {
    let mut p = Bi::new();
    p.insert((0, 0), BigInt::one());
    p
}

fn bi_pow(a: &Bi, e: u32) -> Bi {
    (0..e).fold(bi_one(), |acc, _| bi_mul(&acc, a))
}

/// `(1 - u)^g (1 - v)^g`.
fn pic_image(g: u32) -> Bi {
    let mut f = Bi::new();
    f.insert((0, 0), BigInt::one());
    f.insert((1, 0), BigInt::from(-1));
    let mut h = Bi::new();
    h.insert((0, 0), BigInt::one());
    h.insert((0, 1), BigInt::from(-1));
    bi_mul(&bi_pow(&f, g), &bi_pow(&h, g))
}

/// `t^i` coefficient of `(1 - ut)^g (1 - vt)^g / ((1 - t)(1 - uvt))`.
fn c_image(g: u32, i: i64) -> Bi {
    let g = g as i64;
    let mut out = Bi::new();
    for a in 0..=g.min(i) {
        for b in 0..=g.min(i - a) {
            let c = crate::num::binomial(g as u64, a as u64) * crate::num::binomial(g as u64, b as u64);
            let c = if (a + b) % 2 == 0 { c } else { -c };
            for j in 0..=(i - a - b) {
                bi_add_term(&mut out, (a + j, b + j), c.clone());
            }
        }
    }
    out
}

/// Image of a class under `L -> uv`, possibly still carrying cyclotomic factors in `uv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EPolynomial {
    pub terms: BTreeMap<(i64, i64), BigInt>,
    pub den: BTreeMap<u32, u32>,
}

impl EPolynomial {
    /// True when the image is an honest polynomial in `u, v`.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty() && self.terms.keys().all(|&(a, b)| a >= 0 && b >= 0)
    }

    pub fn coeff(&self, a: i64, b: i64) -> BigInt {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Largest `a + b` over the support.
    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    /// Evaluation at integer `u, v`; `None` on a pole.
    pub fn eval(&self, u: i64, v: i64) -> Option<Q> {
        let mut s = Q::zero();
        for (&(a, b), c) in &self.terms {
            let ua = Q::from_integer(BigInt::from(u)).pow(a as i32);
            let vb = Q::from_integer(BigInt::from(v)).pow(b as i32);
            s += Q::from_integer(c.clone()) * ua * vb;
        }
        let mut d = Q::one();
        for (&m, &e) in &self.den {
            let w = Q::from_integer(BigInt::from(u * v));
            let phi: Q = cyclotomic(m)
                .iter()
                .enumerate()
                .map(|(j, c)| Q::from_integer(BigInt::from(*c)) * w.pow(j as i32))
                .sum();
            d *= phi.pow(e as i32);
        }
        if d.is_zero() {
            None
        } else {
            Some(s / d)
        }
    }
}

fn fmt_bi(p: &Bi) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (&(a, b), c)) in p.iter().rev().enumerate() {
        let mut vars = Vec::new();
        match a {
            0 => {}
            1 => vars.push("u".to_string()),
            _ => vars.push(format!("u^{a}")),
        }
        match b {
            0 => {}
            1 => vars.push("v".to_string()),
            _ => vars.push(format!("v^{b}")),
        }
        let m = c.abs();
        let body = if vars.is_empty() {
            m.to_string()
        } else if m.is_one() {
            vars.join(" * ")
        } else {
            format!("{m} * {}", vars.join(" * "))
        };
        let sign = match (i, c.is_negative()) {
            (0, false) => "",
            (0, true) => "-",
            (_, false) => " + ",
            (_, true) => " - ",
        };
        s.push_str(sign);
        s.push_str(&body);
    }
    s
}

impl fmt::Display for EPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", fmt_bi(&self.terms));
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(&m, &e)| {
                let mut phi = Bi::new();
                for (j, c) in cyclotomic(m).iter().enumerate() {
                    bi_add_term(&mut phi, (j as i64, j as i64), BigInt::from(*c));
                }
                if e == 1 {
                    format!("({})", fmt_bi(&phi))
                } else {
                    format!("({})^{e}", fmt_bi(&phi))
                }
            })
            .collect();
        if den.len() == 1 && !den[0].contains(")^") {
            return write!(f, "({}) / {}", fmt_bi(&self.terms), den[0]);
        }
        write!(f, "({}) / ({})", fmt_bi(&self.terms), den.join(" * "))
    }
}

/// Exact division by `Phi_m(uv)`, slice by slice along `u^d` diagonals.
fn bi_div_cyclo(p: &Bi, m: u32) -> Option<Bi> {
    let phi: Vec<BigInt> = cyclotomic(m).into_iter().map(BigInt::from).collect();
    let k = phi.len() - 1;
    let mut diag: BTreeMap<i64, BTreeMap<i64, BigInt>> = BTreeMap::new();
    for (&(a, b), c) in p {
        diag.entry(a - b).or_default().insert(a.min(b), c.clone());
    }
    let mut out = Bi::new();
    for (d, slice) in diag {
        let lo = *slice.keys().next().unwrap();
        let hi = *slice.keys().last().unwrap();
        let mut r = vec![BigInt::zero(); (hi - lo + 1) as usize];
        for (w, c) in slice {
            r[(w - lo) as usize] = c;
        }
        if r.len() <= k {
            return None;
        }
        let mut qt = vec![BigInt::zero(); r.len() - k];
        for i in (0..qt.len()).rev() {
            let c = r[i + k].clone();
            if c.is_zero() {
                continue;
            }
            for (j, pj) in phi.iter().enumerate() {
                r[i + j] -= &c * pj;
            }
            qt[i] = c;
        }
        if !r.iter().all(|x| x.is_zero()) {
            return None;
        }
        for (i, c) in qt.into_iter().enumerate() {
            let w = lo + i as i64;
            let key = if d >= 0 { (w + d, w) } else { (w, w - d) };
            bi_add_term(&mut out, key, c);
        }
    }
    Some(out)
}

/// `L -> uv`, `Pic -> (1-u)^g (1-v)^g`, `C^(i) -> t^i` coefficient of the
/// E-polynomial zeta function.
pub fn specialize_e(x: &MotiveClass, g: u32) -> EPolynomial {
    let mut cache: BTreeMap<i64, Bi> = BTreeMap::new();
    let pic = pic_image(g);
    let mut terms = Bi::new();
    for (m, c) in x.terms() {
        let mut img = Bi::new();
        img.insert((m.l, m.l), c.clone());
        for (i, &e) in m.c.iter().enumerate() {
            if e > 0 {
                let ci = cache.entry(i as i64 + 1).or_insert_with(|| c_image(g, i as i64 + 1));
                img = bi_mul(&img, &bi_pow(ci, e));
            }
        }
        if m.pic > 0 {
            img = bi_mul(&img, &bi_pow(&pic, m.pic));
        }
        for (k, v) in img {
            bi_add_term(&mut terms, k, v);
        }
    }
    let mut den = BTreeMap::new();
    for (m, mut e) in x.den_factors() {
        while e > 0 {
            match bi_div_cyclo(&terms, m) {
                Some(t) => {
                    terms = t;
                    e -= 1;
                }
                None => break,
            }
        }
        if e > 0 && !terms.is_empty() {
            den.insert(m, e);
        }
    }
    EPolynomial { terms, den }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
    }
    r == 1 && is_prime(p)
}

/// Checks the stored numerator `P(t)` against `a_0 = 1`, degree `2g` and the
/// functional equation at `q`.
pub fn check_zeta(curve: &CurveData, q: u64) -> Result<Vec<BigInt>> {
    let p = curve.zeta_numerator.as_ref().ok_or(Error::MissingZetaData)?;
    let bad = |reason: String| Error::InconsistentZeta { q, reason };
    if !is_prime_power(q) {
        return Err(bad("q is not a prime power".into()));
    }
    let g = curve.genus as usize;
    if p.len() != 2 * g + 1 {
        return Err(bad(format!("expected {} coefficients, found {}", 2 * g + 1, p.len())));
    }
    if p[0] != 1 {
        return Err(bad("a_0 must be 1".into()));
    }
    let a: Vec<BigInt> = p.iter().map(|x| BigInt::from(*x)).collect();
    for i in 0..=g {
        let lhs = &a[2 * g - i];
        let rhs = BigInt::from(q).pow((g - i) as u32) * &a[i];
        if *lhs != rhs {
            return Err(bad(format!("a_{} != q^{} a_{}", 2 * g - i, g - i, i)));
        }
    }
    Ok(a)
}

/// Point count over `F_q`: `L -> q`, `Pic -> P(1)`, `C^(i) -> t^i` coefficient
/// of `P(t) / ((1 - t)(1 - qt))`.
pub fn specialize_count(x: &MotiveClass, curve: &CurveData, q: u64) -> Result<Q> {
    let a = check_zeta(curve, q)?;
    let qq = Q::from_integer(BigInt::from(q));
    let pic = Q::from_integer(a.iter().sum());
    let c_img = |i: i64| -> Q {
        let mut s = BigInt::zero();
        for (m, am) in a.iter().enumerate() {
            let k = i - m as i64;
            if k < 0 {
                break;
            }
            let h: BigInt = (0..=k).map(|j| BigInt::from(q).pow(j as u32)).sum();
            s += am * h;
        }
        Q::from_integer(s)
    };
    let mut total = Q::zero();
    for (m, c) in x.terms() {
        let mut t = Q::from_integer(c.clone()) * qq.pow(m.l as i32);
        for (i, &e) in m.c.iter().enumerate() {
            if e > 0 {
                t *= c_img(i as i64 + 1).pow(e as i32);
            }
        }
        if m.pic > 0 {
            t *= pic.pow(m.pic as i32);
        }
        total += t;
    }
    for (m, e) in x.den_factors() {
        let phi: Q = cyclotomic(m)
            .iter()
            .enumerate()
            .map(|(j, c)| Q::from_integer(BigInt::from(*c)) * qq.pow(j as i32))
            .sum();
        total /= phi.pow(e as i32);
    }
    Ok(total)
}
