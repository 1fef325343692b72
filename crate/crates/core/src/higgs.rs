//! Moduli of stable parabolic Higgs bundles as a sum over torus-fixed chain
//! types, each evaluated at the chain parameter `(0, 2g-2, ..., r(2g-2))`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::chain::{alpha_from, enumerate_degree_vectors, int_compositions, Engine};
use crate::error::{Error, Result};
use crate::motive::{reduce_functional, CurveData, MotiveClass};
use crate::num::{q, Q};
use crate::parabolic::{enumerate_weight_splits, ChainType, WeightDatum};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiggsProblem {
    pub curve: CurveData,
    pub n: u32,
    pub d: i64,
    pub datum: WeightDatum,
}

/// `n^2 (g - 1) + 1 + (1/2) sum_p (n^2 - sum_i m_{p,i}^2)`.
pub fn half_dimension(n: u32, datum: &WeightDatum, g: u32) -> Result<i64> {
    let n = n as i64;
    let flags: i64 = datum
        .points
        .iter()
        .map(|p| n * n - p.mults.iter().map(|m| (*m as i64).pow(2)).sum::<i64>())
        .sum();
    if flags % 2 != 0 {
        return Err(Error::NonIntegerDimension);
    }
    Ok(n * n * (g as i64 - 1) + 1 + flags / 2)
}

/// `(0, 2g-2, ..., r(2g-2))`.
pub fn higgs_alpha(r: usize, g: u32) -> Vec<Q> {
    (0..=r as i64).map(|i| q(i * (2 * g as i64 - 2))).collect()
}

/// Splits of one datum into consecutive chain components.
fn chain_data(datum: &WeightDatum, ranks: &[u32]) -> Result<Vec<Vec<WeightDatum>>> {
    enumerate_weight_splits(datum, ranks)
}

/// Every chain type that can carry a stable fixed point, in chain degrees.
pub fn enumerate_fixed_types(p: &HiggsProblem) -> Result<Vec<ChainType>> {
    p.datum.validate(p.n)?;
    let g = p.curve.genus;
    let mut out = Vec::new();
    for ranks in int_compositions(p.n) {
        let r = ranks.len() - 1;
        let alpha = alpha_from(&higgs_alpha(r, g));
        let twist: i64 = ranks.iter().enumerate().map(|(i, n)| *n as i64 * (r - i) as i64 * (2 * g as i64 - 2)).sum();
        let mut seen = BTreeSet::new();
        for data in chain_data(&p.datum, &ranks)? {
            for d in enumerate_degree_vectors(&ranks, &data, p.d + twist, &alpha, p.curve.k(), true)? {
                let t = ChainType::new(ranks.clone(), d, data.clone());
                if seen.insert(t.key()) {
                    out.push(t);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HiggsSummand {
    pub chain_type: String,
    pub class: String,
}

#[derive(Clone, Debug)]
pub struct HiggsResult {
    pub class: MotiveClass,
    pub half_dimension: i64,
    pub summands: Vec<(ChainType, MotiveClass)>,
}

/// `[M] = L^N sum_tau (L - 1) [chains of type tau]`, with symmetric powers
/// of degree at least `g` rewritten through the functional equation.
pub fn higgs_moduli_class(p: &HiggsProblem, engine: &Engine) -> Result<HiggsResult> {
    let n_half = half_dimension(p.n, &p.datum, p.curve.genus)?;
    let weights: BTreeSet<Q> = p.datum.all_distinct_weights().into_iter().collect();
    if !engine.is_generic(weights.into_iter().collect(), p.n)? {
        return Err(Error::NonGenericWeights(p.n));
    }
    let gerbe = MotiveClass::l_pow_minus_one(1);
    let mut total = MotiveClass::zero();
    let mut summands = Vec::new();
    for t in enumerate_fixed_types(p)? {
        let alpha = higgs_alpha(t.r(), p.curve.genus);
        let c = engine.chain_class(&t, &alpha)?;
        if c.is_zero() {
            continue;
        }
        let s = reduce_functional(&c.mul(&gerbe), p.curve.genus);
        total = total.add(&s);
        summands.push((t, s));
    }
    let class = total.shift_l(n_half);
    if !class.is_polynomial() {
        return Err(Error::NonPolynomialResult(class.to_string()));
    }
    Ok(HiggsResult { class, half_dimension: n_half, summands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::EngineOptions;
    use crate::num::qr;
    use crate::parabolic::{generic_datum, PointWeights};

    #[test]
    fn half_dimension_examples() {
        let full = |k: usize| WeightDatum::new(vec![PointWeights::new(vec![qr(1, 5), qr(2, 5)], vec![1, 1]); k]);
        assert_eq!(half_dimension(2, &full(1), 2).unwrap(), 6);
        assert_eq!(half_dimension(2, &full(3), 0).unwrap(), 0);
        let one = WeightDatum::new(vec![PointWeights::trivial(qr(1, 3), 1); 2]);
        assert_eq!(half_dimension(1, &one, 3).unwrap(), 3);
    }

    #[test]
    fn fixed_type_shapes() {
        let p = HiggsProblem { curve: CurveData::new(2, 1), n: 3, d: 1, datum: generic_datum(3, 1, 3) };
        let shapes: BTreeSet<Vec<u32>> = enumerate_fixed_types(&p).unwrap().into_iter().map(|t| t.ranks).collect();
        assert!(shapes.contains(&vec![3]));
        assert!(shapes.iter().all(|s| s.iter().sum::<u32>() == 3));
    }

    #[test]
    fn rank_one() {
        for g in 0..=2 {
            let curve = CurveData::new(g, 1);
            let p = HiggsProblem { curve: curve.clone(), n: 1, d: 0, datum: generic_datum(1, 1, 1) };
            let e = Engine::new(curve.clone(), EngineOptions::default());
            let r = higgs_moduli_class(&p, &e).unwrap();
            assert_eq!(r.class, curve.pic().shift_l(g as i64));
        }
    }

    #[test]
    fn four_punctured_line() {
        let curve = CurveData::new(0, 4);
        for d in [0, 1] {
            let p = HiggsProblem { curve: curve.clone(), n: 2, d, datum: generic_datum(2, 4, 2) };
            let e = Engine::new(curve.clone(), EngineOptions::default());
            let r = higgs_moduli_class(&p, &e).unwrap();
            assert_eq!(r.class, MotiveClass::parse("L^2 + 5 * L").unwrap(), "d = {d}");
        }
    }
}
