//! Curve data and the motivic zeta function `Z(C, t) = sum [C^(i)] t^i`.

use serde::{Deserialize, Serialize};

use super::{cyclotomic, Mono, MotiveClass};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveData {
    pub genus: u32,
    pub num_marked: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_numerator: Option<Vec<i64>>,
}

impl CurveData {
    pub fn new(genus: u32, num_marked: u32) -> Self {
        CurveData { genus, num_marked, zeta_numerator: None }
    }

    pub fn with_zeta(mut self, p: Vec<i64>) -> Self {
        self.zeta_numerator = Some(p);
        self
    }

    pub fn g(&self) -> i64 {
        self.genus as i64
    }

    pub fn k(&self) -> i64 {
        self.num_marked as i64
    }

    /// `[Pic^0]`, which is `1` on a rational curve.
    pub fn pic(&self) -> MotiveClass {
        if self.genus == 0 {
            MotiveClass::one()
        } else {
            MotiveClass::pic_atom()
        }
    }

    /// Highest atom index kept symbolic.
    pub fn max_atom(&self) -> i64 {
        (2 * self.g() - 2).max(0)
    }
}

/// `[C^(i)] = Pic * (L^(i-g+1) - 1) / (L - 1)` for `i > 2g - 2`.
pub fn reduce_high_sym(i: i64, g: u32) -> MotiveClass {
    let g = g as i64;
    assert!(i > 2 * g - 2 && i >= 0, "C^({i}) is not in the stable range at genus {g}");
    let pic = if g == 0 { MotiveClass::one() } else { MotiveClass::pic_atom() };
    let geom = MotiveClass::l_poly(&vec![1; (i - g + 1) as usize]);
    pic.mul(&geom)
}

/// `[C^(i)]`, zero for negative `i`.
pub fn zeta_coeff(curve: &CurveData, i: i64) -> MotiveClass {
    if i < 0 {
        MotiveClass::zero()
    } else if i == 0 {
        MotiveClass::one()
    } else if i <= 2 * curve.g() - 2 {
        MotiveClass::c_atom(i as u32)
    } else {
        reduce_high_sym(i, curve.genus)
    }
}

/// Coefficient `a_j` of `P(t) = (1 - t)(1 - L t) Z(C, t)`.
fn p_coeff(curve: &CurveData, j: i64) -> MotiveClass {
    let c = |i| zeta_coeff(curve, i);
    let l = MotiveClass::l();
    c(j).sub(&c(j - 1).mul(&MotiveClass::l_poly(&[1, 1]))).add(&c(j - 2).mul(&l))
}

/// `Z(C, L^e)` in closed form. Only `e <= -2` lies in the convergent regime.
pub fn zeta_eval(curve: &CurveData, e: i64) -> Result<MotiveClass> {
    if e >= -1 {
        return Err(Error::NonConvergentEvaluation(e));
    }
    let mut p = MotiveClass::zero();
    for j in 0..=2 * curve.g() {
        p = p.add(&p_coeff(curve, j).shift_l(e * j));
    }
    let one = MotiveClass::one();
    let d = one.sub(&MotiveClass::l_pow(e)).mul(&one.sub(&MotiveClass::l_pow(e + 1)));
    p.div(&d)
}

/// Coefficient of `t^l` in `prod_{j<n} Z(C, L^j t)`, the class of `(C x P^(n-1))^(l)`.
pub fn sym_cxp_coeff(curve: &CurveData, n: u32, l: i64) -> MotiveClass {
    assert!(n >= 1);
    if l < 0 {
        return MotiveClass::zero();
    }
    let base: Vec<MotiveClass> = (0..=l).map(|i| zeta_coeff(curve, i)).collect();
    let mut acc: Vec<MotiveClass> = base.clone();
    for j in 1..n as i64 {
        let f: Vec<MotiveClass> = base.iter().enumerate().map(|(i, c)| c.shift_l(j * i as i64)).collect();
        let mut next = vec![MotiveClass::zero(); l as usize + 1];
        for (a, x) in acc.iter().enumerate() {
            for (b, y) in f.iter().enumerate().take(l as usize + 1 - a) {
                next[a + b] = next[a + b].add(&x.mul(y));
            }
        }
        acc = next;
    }
    acc.pop().unwrap()
}

/// Rewrites `C^(i)` for `g <= i <= 2g-2` through the functional equation
/// `[C^(i)] = L^(i-g+1) [C^(2g-2-i)] + Pic [P^(i-g)]`, so only atoms below `g` remain.
pub fn reduce_functional(x: &MotiveClass, g: u32) -> MotiveClass {
    let gi = g as i64;
    let curve = CurveData::new(g, 0);
    let sub = |i: i64| -> MotiveClass {
        if i >= gi && i <= 2 * gi - 2 {
            let dual = zeta_coeff(&curve, 2 * gi - 2 - i).shift_l(i - gi + 1);
            dual.add(&curve.pic().mul(&MotiveClass::l_poly(&vec![1; (i - gi + 1) as usize])))
        } else {
            MotiveClass::c_atom(i as u32)
        }
    };
    let mut num = MotiveClass::zero();
    for (m, c) in x.terms() {
        let mut t = MotiveClass::from_mono(Mono { l: m.l, c: Vec::new(), pic: m.pic }, c.clone());
        for (i, e) in m.c.iter().enumerate() {
            if *e > 0 {
                t = t.mul(&sub(i as i64 + 1).pow(*e as i64).expect("nonnegative power"));
            }
        }
        num = num.add(&t);
    }
    let mut den = MotiveClass::one();
    for (m, e) in x.den_factors() {
        den = den.mul(&MotiveClass::l_poly(&cyclotomic(m)).pow(e as i64).expect("nonnegative power"));
    }
    num.div(&den).expect("cyclotomic denominators are invertible")
}
