//! Classes of the building-block stacks: `GL_n`, flag varieties, `Bun_n`,
//! parabolic bundles and parabolic Hecke modifications.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::motive::{sym_cxp_coeff, zeta_eval, CurveData, MotiveClass};
use crate::parabolic::WeightDatum;

/// `prod_{i<n} (L^n - L^i)`.
pub fn gl_class(n: u32) -> MotiveClass {
    let n = n as i64;
    let f: Vec<MotiveClass> = (0..n).map(|i| MotiveClass::l_pow(n).sub(&MotiveClass::l_pow(i))).collect();
    MotiveClass::product(&f)
}

/// Partial flags in an `n`-dimensional space with successive quotient
/// dimensions `r_vec`.
pub fn flag_class(n: u32, r_vec: &[u32]) -> Result<MotiveClass> {
    if r_vec.contains(&0) || r_vec.iter().sum::<u32>() != n {
        return Err(Error::InvalidFlagType(format!("{r_vec:?} is not a composition of {n}")));
    }
    let mut cross = 0i64;
    let mut seen = 0i64;
    let mut den = MotiveClass::one();
    for &r in r_vec {
        cross += seen * r as i64;
        seen += r as i64;
        den = den.mul(&gl_class(r));
    }
    gl_class(n).div(&den.shift_l(cross))
}

/// Product of flag classes over the marked points of a datum of rank `n`.
pub fn datum_flag_class(n: u32, datum: &WeightDatum) -> Result<MotiveClass> {
    let mut acc = MotiveClass::one();
    for p in &datum.points {
        acc = acc.mul(&flag_class(n, &p.mults)?);
    }
    Ok(acc)
}

/// `[Bun_n^d] = L^((n^2-1)(g-1)) Pic / (L - 1) prod_{i=2}^n Z(C, L^-i)`; independent of `d`.
pub fn bundle_stack_class(n: u32, _d: i64, curve: &CurveData) -> MotiveClass {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), MotiveClass>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(n, curve.genus)) {
        return v.clone();
    }
    let g = curve.g();
    let nn = n as i64;
    let mut acc = curve.pic().shift_l((nn * nn - 1) * (g - 1)).div(&MotiveClass::l_pow_minus_one(1)).unwrap();
    for i in 2..=nn {
        acc = acc.mul(&zeta_eval(curve, -i).expect("convergent zeta argument"));
    }
    cache.lock().unwrap().insert((n, curve.genus), acc.clone());
    acc
}

/// `[Bun_n^d] * prod_p [Flag_p]`.
pub fn pbundle_stack_class(n: u32, d: i64, datum: &WeightDatum, curve: &CurveData) -> Result<MotiveClass> {
    datum.validate(n)?;
    Ok(bundle_stack_class(n, d, curve).mul(&datum_flag_class(n, datum)?))
}

/// Stack of length-`l` Hecke modifications of rank `n` over a base, with the
/// modified bundle carrying the flag type of `target_flag`.
pub fn phecke_class(base: &MotiveClass, l: i64, n: u32, target_flag: &WeightDatum, curve: &CurveData) -> Result<MotiveClass> {
    if l < 0 {
        return Ok(MotiveClass::zero());
    }
    Ok(base.mul(&sym_cxp_coeff(curve, n, l)).mul(&datum_flag_class(n, target_flag)?))
}
