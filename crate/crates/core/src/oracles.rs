//! Independent validators. Nothing here calls the chain, stack or zeta code;
//! each oracle rebuilds its answer from first principles.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::motive::{Mono, MotiveClass};
use crate::num::{q, Q};

/// Number of `F_q`-points of the flag variety of type `r_vec` in `F_q^n`,
/// as a product of Gaussian binomials. `m` is the number of steps.
pub fn gaussian_flag_count(n: u32, m: usize, r_vec: &[u32], q: u64) -> BigInt {
    assert_eq!(r_vec.len(), m, "flag type length");
    assert_eq!(r_vec.iter().sum::<u32>(), n, "flag type must sum to n");
    let qb = BigInt::from(q);
    let qint = |k: u32| -> BigInt { (0..k).fold(BigInt::zero(), |a, i| a + qb.pow(i)) };
    let fact = |k: u32| -> BigInt { (1..=k).fold(BigInt::one(), |a, i| a * qint(i)) };
    let mut den = BigInt::one();
    for r in r_vec {
        den *= fact(*r);
    }
    fact(n) / den
}

fn pic(g: u32) -> MotiveClass {
    if g == 0 {
        MotiveClass::one()
    } else {
        MotiveClass::from_mono(Mono { l: 0, c: Vec::new(), pic: 1 }, BigInt::one())
    }
}

fn lin(a: i64) -> MotiveClass {
    MotiveClass::from_mono(Mono { l: a, c: Vec::new(), pic: 0 }, BigInt::one())
}

/// A rank-1 strongly parabolic Higgs field is a holomorphic differential, so
/// the moduli space is `Pic x H^0(K)`.
pub fn rank1_higgs_oracle(g: u32, _k: u32, _d: i64) -> MotiveClass {
    pic(g).mul(&lin(g as i64))
}

/// `[C^(l)]` from the projective-bundle structure over the Jacobian above `2g-2`.
fn sym_power(g: u32, l: i64) -> MotiveClass {
    let g = g as i64;
    if l < 0 {
        return MotiveClass::zero();
    }
    if l == 0 {
        return MotiveClass::one();
    }
    if l <= 2 * g - 2 {
        let mut c = vec![0; l as usize];
        c[l as usize - 1] = 1;
        return MotiveClass::from_mono(Mono { l: 0, c, pic: 0 }, BigInt::one());
    }
    let mut proj = MotiveClass::zero();
    for j in 0..=l - g {
        proj = proj.add(&lin(j));
    }
    pic(g as u32).mul(&proj)
}

/// Semistable rank-(1,1) chains `E_1 -> E_0(D)` classified directly.
///
/// `w0[p]`, `w1[p]` are the weights of `E_0`, `E_1` at the marked points.
/// A nonzero strongly parabolic map vanishes at the points with
/// `w1 >= w0`, so it is an effective divisor of degree
/// `d0 - d1 + k - #{p : w1 >= w0}` and the stratum is `Pic x C^(l) / G_m`.
/// With `phi = 0` the chain splits and is semistable only when both pieces
/// have the total slope.
pub fn rank11_chain_oracle(g: u32, k: u32, d0: i64, d1: i64, w0: &[Q], w1: &[Q], alpha: (Q, Q)) -> MotiveClass {
    assert_eq!(w0.len(), k as usize);
    assert_eq!(w1.len(), k as usize);
    let pd0 = q(d0) + w0.iter().fold(Q::zero(), |a, b| a + b);
    let pd1 = q(d1) + w1.iter().fold(Q::zero(), |a, b| a + b);
    let s0 = &pd0 + &alpha.0;
    let s1 = &pd1 + &alpha.1;
    let mu = (&s0 + &s1) / q(2);
    let stack1 = pic(g).div(&lin(1).sub(&MotiveClass::one())).expect("L - 1 is invertible");
    let mut out = MotiveClass::zero();
    if s0 <= mu {
        let vanish = w0.iter().zip(w1).filter(|(a, b)| b >= a).count() as i64;
        let l = d0 - d1 + k as i64 - vanish;
        out = out.add(&stack1.mul(&sym_power(g, l)));
    }
    if s0 == mu {
        out = out.add(&stack1.mul(&stack1));
    }
    out
}

/// Stacky count of semistable rank-2 bundles of degree `d` over `F_q` from the
/// Harder-Narasimhan recursion. `zeta_numerator` is `P(t)` with `P(0) = 1`.
/// The first `truncation` unstable strata are summed term by term and the
/// rest as a geometric tail, so the value does not depend on `truncation`.
pub fn bun2_hn_recursion_oracle(g: u32, d: i64, q_: u64, zeta_numerator: &[i64], truncation: usize) -> Q {
    let qq = q(q_ as i64);
    let gi = g as i64;
    let pow = |e: i64| -> Q {
        if e >= 0 {
            Q::from_integer(BigInt::from(q_).pow(e as u32))
        } else {
            Q::one() / Q::from_integer(BigInt::from(q_).pow((-e) as u32))
        }
    };
    let p_at = |t: &Q| zeta_numerator.iter().enumerate().fold(Q::zero(), |a, (i, c)| a + q(*c) * t.pow(i as i32));
    let zeta = |t: Q| p_at(&t) / ((Q::one() - &t) * (Q::one() - &qq * &t));
    let jac = p_at(&Q::one());
    let pic_stack = &jac / (&qq - Q::one());
    let bun = pow(3 * (gi - 1)) * &pic_stack * zeta(pow(-2));
    let first = d.div_euclid(2) + 1;
    let stratum = |d1: i64| -> Q {
        let d2 = d - d1;
        pow(-(d1 - d2 + 1 - gi)) * &pic_stack * &pic_stack
    };
    let mut unstable = Q::zero();
    for j in 0..truncation as i64 {
        unstable += stratum(first + j);
    }
    let tail_start = stratum(first + truncation as i64);
    unstable += tail_start / (Q::one() - pow(-2));
    bun - unstable
}
