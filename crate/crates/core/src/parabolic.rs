//! Weight data, parabolic degrees and slopes, genericity.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::num::{fmt_q, is_prime, q, Lex, Q};

/// Weighted flag at one marked point. Weights strictly increase in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PointWeights {
    pub weights: Vec<Q>,
    pub mults: Vec<u32>,
}

impl PointWeights {
    pub fn new(weights: Vec<Q>, mults: Vec<u32>) -> Self {
        PointWeights { weights, mults }
    }

    /// Single-step flag of rank `n` with weight `w`.
    pub fn trivial(w: Q, n: u32) -> Self {
        if n == 0 {
            return PointWeights::default();
        }
        PointWeights { weights: vec![w], mults: vec![n] }
    }

    pub fn rank(&self) -> u32 {
        self.mults.iter().sum()
    }

    pub fn weight_sum(&self) -> Q {
        self.weights.iter().zip(&self.mults).map(|(w, m)| w * q(*m as i64)).sum()
    }

    /// Weight sequence with each weight repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<Q> {
        self.weights
            .iter()
            .zip(&self.mults)
            .flat_map(|(w, m)| std::iter::repeat_n(w.clone(), *m as usize))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() != self.mults.len() {
            return Err(Error::InvalidWeights("weights and multiplicities differ in length".into()));
        }
        if self.mults.contains(&0) {
            return Err(Error::InvalidWeights("multiplicities must be positive".into()));
        }
        for w in &self.weights {
            if *w < Q::zero() || *w >= Q::one() {
                return Err(Error::InvalidWeights(format!("weight {} outside [0,1)", fmt_q(w))));
            }
        }
        if self.weights.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidWeights("weights must strictly increase".into()));
        }
        Ok(())
    }
}

/// Flag types and weights of one parabolic bundle, one entry per marked point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WeightDatum {
    pub points: Vec<PointWeights>,
}

impl WeightDatum {
    pub fn new(points: Vec<PointWeights>) -> Self {
        WeightDatum { points }
    }

    /// Datum of rank 0 over `k` points.
    pub fn empty(k: usize) -> Self {
        WeightDatum { points: vec![PointWeights::default(); k] }
    }

    pub fn weight_sum(&self) -> Q {
        self.points.iter().map(PointWeights::weight_sum).sum()
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// Checks every flag and that each has total multiplicity `n`.
    pub fn validate(&self, n: u32) -> Result<()> {
        for (p, pt) in self.points.iter().enumerate() {
            pt.validate()?;
            if pt.rank() != n {
                return Err(Error::InvalidWeights(format!(
                    "point {p} has multiplicities summing to {}, rank is {n}",
                    pt.rank()
                )));
            }
        }
        Ok(())
    }

    pub fn all_distinct_weights(&self) -> Vec<Q> {
        self.points.iter().flat_map(|p| p.weights.iter().cloned()).collect()
    }

    /// Number of pairs `(a, b)` at each point, `a` from `self`, `b` from `other`,
    /// with `w_a > w_b` (or `>=` when `weak`), counted with multiplicity.
    pub fn pair_count(&self, other: &WeightDatum, weak: bool) -> i64 {
        let mut total = 0i64;
        for (x, y) in self.points.iter().zip(&other.points) {
            for (wa, ma) in x.weights.iter().zip(&x.mults) {
                for (wb, mb) in y.weights.iter().zip(&y.mults) {
                    if wa > wb || (weak && wa == wb) {
                        total += (*ma as i64) * (*mb as i64);
                    }
                }
            }
        }
        total
    }
}

impl fmt::Display for WeightDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|p| {
                let ws: Vec<String> =
                    p.weights.iter().zip(&p.mults).map(|(w, m)| format!("{}:{m}", fmt_q(w))).collect();
                format!("[{}]", ws.join(","))
            })
            .collect();
        write!(f, "{}", pts.join(""))
    }
}

/// Discrete invariants of a chain `E_0 <- E_1 <- ... <- E_r` (maps twisted by `K(D)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainType {
    pub ranks: Vec<u32>,
    pub degrees: Vec<i64>,
    pub data: Vec<WeightDatum>,
}

impl ChainType {
    pub fn new(ranks: Vec<u32>, degrees: Vec<i64>, data: Vec<WeightDatum>) -> Self {
        ChainType { ranks, degrees, data }
    }

    /// Chain with no parabolic structure.
    pub fn plain(ranks: Vec<u32>, degrees: Vec<i64>) -> Self {
        let data = vec![WeightDatum::empty(0); ranks.len()];
        ChainType { ranks, degrees, data }
    }

    /// Chain length `r`; the type has `r + 1` components.
    pub fn r(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn total_rank(&self) -> u32 {
        self.ranks.iter().sum()
    }

    pub fn total_degree(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn pardeg(&self, i: usize) -> Q {
        pardeg(self.degrees[i], &self.data[i])
    }

    pub fn total_pardeg(&self) -> Q {
        (0..self.ranks.len()).map(|i| self.pardeg(i)).sum()
    }

    pub fn is_constant_rank(&self) -> bool {
        self.ranks.windows(2).all(|w| w[0] == w[1])
    }

    /// Checks lengths, rank consistency and the common marked-point count `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        let len = self.ranks.len();
        if len == 0 {
            return Err(Error::RankMismatch("chain has no components".into()));
        }
        if self.degrees.len() != len || self.data.len() != len {
            return Err(Error::RankMismatch(format!(
                "{} ranks, {} degrees, {} weight data",
                len,
                self.degrees.len(),
                self.data.len()
            )));
        }
        for (i, (n, w)) in self.ranks.iter().zip(&self.data).enumerate() {
            if *n == 0 {
                return Err(Error::RankMismatch(format!("component {i} has rank 0")));
            }
            if w.num_points() != k {
                return Err(Error::InvalidWeights(format!(
                    "component {i} has {} flags, curve has {k} marked points",
                    w.num_points()
                )));
            }
            w.validate(*n)?;
        }
        Ok(())
    }

    /// Deterministic textual key.
    pub fn key(&self) -> String {
        let parts: Vec<String> = (0..self.ranks.len())
            .map(|i| format!("{}/{}/{}", self.ranks[i], self.degrees[i], self.data[i]))
            .collect();
        parts.join(";")
    }
}

impl fmt::Display for ChainType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// `deg + sum_p sum_i m_{p,i} w_{p,i}`.
pub fn pardeg(d: i64, datum: &WeightDatum) -> Q {
    q(d) + datum.weight_sum()
}

/// `sum_i (pardeg E_i + n_i alpha_i) / |n|`, on infinitesimally extended parameters.
pub fn par_slope_alpha(t: &ChainType, alpha: &[Lex]) -> Lex {
    assert_eq!(alpha.len(), t.ranks.len(), "stability parameter length");
    let n = t.total_rank();
    let mut s = Lex::zero();
    for i in 0..t.ranks.len() {
        let term = &Lex::real(t.pardeg(i)) + &alpha[i].scale(&q(t.ranks[i] as i64));
        s = &s + &term;
    }
    s.scale(&Q::new(BigInt::one(), BigInt::from(n)))
}

/// Real-valued slope for a rational stability parameter.
pub fn par_slope(t: &ChainType, alpha: &[Q]) -> Q {
    let a: Vec<Lex> = alpha.iter().cloned().map(Lex::real).collect();
    par_slope_alpha(t, &a).re()
}

/// Weights `1 - w` in reverse order. Weight `0` stays `0`.
pub fn dual_weight_datum(datum: &WeightDatum) -> WeightDatum {
    let points = datum
        .points
        .iter()
        .map(|p| {
            let mut pairs: Vec<(Q, u32)> = p
                .weights
                .iter()
                .zip(&p.mults)
                .map(|(w, m)| (if w.is_zero() { Q::zero() } else { Q::one() - w }, *m))
                .collect();
            pairs.sort();
            PointWeights { weights: pairs.iter().map(|x| x.0.clone()).collect(), mults: pairs.iter().map(|x| x.1).collect() }
        })
        .collect();
    WeightDatum { points }
}

pub const DEFAULT_GENERICITY_BUDGET: u128 = 20_000_000;

/// True iff no nonzero integer vector with entries bounded by `n` gives an
/// integral combination of `weights`.
pub fn genericity_check(weights: &[Q], n: u32, budget: u128) -> Result<bool> {
    assert!(n >= 1);
    let side = 2 * n as u128 + 1;
    let size = side.checked_pow(weights.len() as u32).unwrap_or(u128::MAX);
    if size > budget {
        return Err(Error::BudgetExceeded(size));
    }
    if weights.is_empty() {
        return Ok(true);
    }
    let den = weights.iter().fold(BigInt::one(), |a, w| a.lcm(w.denom()));
    let Some(den) = den.to_i128() else {
        return Err(Error::BudgetExceeded(u128::MAX));
    };
    let nums: Vec<i128> = weights.iter().map(|w| (w.numer() * (BigInt::from(den) / w.denom())).to_i128().unwrap()).collect();
    let n = n as i64;
    let mut coef = vec![-n; weights.len()];
    loop {
        let s: i128 = coef.iter().zip(&nums).map(|(c, x)| *c as i128 * x).sum();
        if s.rem_euclid(den) == 0 && coef.iter().any(|c| *c != 0) {
            return Ok(false);
        }
        let mut i = 0;
        loop {
            if i == coef.len() {
                return Ok(true);
            }
            if coef[i] < n {
                coef[i] += 1;
                break;
            }
            coef[i] = -n;
            i += 1;
        }
    }
}

/// `B^j / Q` for `j = 1..=count`, `B = N + 1`, `Q` the least prime above `N * sum B^j`.
pub fn generate_generic_weights(count: usize, n: u32) -> Vec<Q> {
    assert!(count >= 1 && n >= 1);
    let b = BigInt::from(n + 1);
    let pows: Vec<BigInt> = (1..=count as u32).map(|j| num_traits::pow(b.clone(), j as usize)).collect();
    let s: BigInt = pows.iter().sum::<BigInt>() * BigInt::from(n);
    let mut p = s.to_u64().expect("generic weight denominator out of range") + 1;
    while !is_prime(p) {
        p += 1;
    }
    pows.into_iter().map(|x| Q::new(x, BigInt::from(p))).collect()
}

/// Generic weight datum of rank `n` on `k` points, all multiplicities one,
/// certified at bound `bound`.
pub fn generic_datum(n: u32, k: usize, bound: u32) -> WeightDatum {
    if k == 0 || n == 0 {
        return WeightDatum::empty(k);
    }
    let ws = generate_generic_weights(n as usize * k, bound);
    let points = ws
        .chunks(n as usize)
        .map(|c| PointWeights { weights: c.to_vec(), mults: vec![1; c.len()] })
        .collect();
    WeightDatum { points }
}

/// All ways to distribute a point's multiplicities into parts of the given ranks.
fn point_splits(p: &PointWeights, parts: &[u32]) -> Vec<Vec<PointWeights>> {
    fn rec(
        p: &PointWeights,
        i: usize,
        remaining: &mut Vec<u32>,
        acc: &mut Vec<Vec<u32>>,
        out: &mut Vec<Vec<Vec<u32>>>,
    ) {
        if i == p.mults.len() {
            if remaining.iter().all(|r| *r == 0) {
                out.push(acc.clone());
            }
            return;
        }
        let mut row = vec![0u32; remaining.len()];
        distribute(p.mults[i], 0, remaining, &mut row, &mut |row, rem| {
            acc.push(row.to_vec());
            rec(p, i + 1, rem, acc, out);
            acc.pop();
        });
    }
    fn distribute(
        left: u32,
        j: usize,
        remaining: &mut Vec<u32>,
        row: &mut Vec<u32>,
        f: &mut dyn FnMut(&[u32], &mut Vec<u32>),
    ) {
        if j == remaining.len() {
            if left == 0 {
                f(&row.clone(), remaining);
            }
            return;
        }
        for c in 0..=left.min(remaining[j]) {
            row[j] = c;
            remaining[j] -= c;
            distribute(left - c, j + 1, remaining, row, f);
            remaining[j] += c;
        }
        row[j] = 0;
    }
    let mut tables = Vec::new();
    rec(p, 0, &mut parts.to_vec(), &mut Vec::new(), &mut tables);
    tables
        .into_iter()
        .map(|t| {
            (0..parts.len())
                .map(|j| {
                    let mut pw = PointWeights::default();
                    for (i, row) in t.iter().enumerate() {
                        if row[j] > 0 {
                            pw.weights.push(p.weights[i].clone());
                            pw.mults.push(row[j]);
                        }
                    }
                    pw
                })
                .collect()
        })
        .collect()
}

/// Every distribution of the datum's weights, independently at each point,
/// into parts of the given ranks. Parts of rank 0 receive empty flags.
pub fn enumerate_weight_splits(datum: &WeightDatum, part_ranks: &[u32]) -> Result<Vec<Vec<WeightDatum>>> {
    let total: u32 = part_ranks.iter().sum();
    for (i, p) in datum.points.iter().enumerate() {
        if p.rank() != total {
            return Err(Error::RankMismatch(format!(
                "point {i} carries rank {}, parts sum to {total}",
                p.rank()
            )));
        }
    }
    let mut out: Vec<Vec<WeightDatum>> = vec![vec![WeightDatum::default(); part_ranks.len()]];
    for p in &datum.points {
        let splits = point_splits(p, part_ranks);
        let mut next = Vec::with_capacity(out.len() * splits.len());
        for base in &out {
            for s in &splits {
                let mut v = base.clone();
                for (j, pw) in s.iter().enumerate() {
                    v[j].points.push(pw.clone());
                }
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::qr;

    fn datum(ws: &[&[(i64, i64)]]) -> WeightDatum {
        WeightDatum::new(
            ws.iter()
                .map(|p| PointWeights::new(p.iter().map(|(a, b)| qr(*a, *b)).collect(), vec![1; p.len()]))
                .collect(),
        )
    }

    #[test]
    fn pardeg_examples() {
        assert_eq!(pardeg(3, &WeightDatum::empty(0)), q(3));
        assert_eq!(pardeg(0, &datum(&[&[(1, 4), (3, 4)]])), q(1));
        let two = WeightDatum::new(vec![PointWeights::trivial(qr(1, 5), 2); 2]);
        assert_eq!(pardeg(-2, &two), qr(-6, 5));
    }

    #[test]
    fn slope_examples() {
        let t = ChainType::plain(vec![1], vec![5]);
        assert_eq!(par_slope(&t, &[q(0)]), q(5));
        let t = ChainType::plain(vec![1, 1], vec![0, 0]);
        assert_eq!(par_slope(&t, &[q(0), q(2)]), q(1));
    }

    #[test]
    fn dual_examples() {
        let d = datum(&[&[(1, 4), (3, 4)]]);
        assert_eq!(dual_weight_datum(&d), d);
        let e = WeightDatum::new(vec![PointWeights::trivial(qr(1, 3), 2)]);
        assert_eq!(dual_weight_datum(&e), WeightDatum::new(vec![PointWeights::trivial(qr(2, 3), 2)]));
    }

    #[test]
    fn genericity_examples() {
        assert!(!genericity_check(&[qr(1, 2)], 2, DEFAULT_GENERICITY_BUDGET).unwrap());
        assert!(!genericity_check(&[qr(1, 7), qr(2, 7)], 2, DEFAULT_GENERICITY_BUDGET).unwrap());
        assert!(genericity_check(&[qr(1, 11), qr(3, 11)], 2, DEFAULT_GENERICITY_BUDGET).unwrap());
        assert!(matches!(genericity_check(&vec![qr(1, 7); 40], 2, 1000), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn generator_examples() {
        assert_eq!(generate_generic_weights(1, 2), vec![qr(3, 7)]);
        assert_eq!(generate_generic_weights(2, 2), vec![qr(3, 29), qr(9, 29)]);
        for count in 1..=4 {
            for n in 1..=3 {
                let w = generate_generic_weights(count, n);
                assert!(w.windows(2).all(|p| p[0] < p[1]) && w.last().unwrap() < &q(1));
                assert!(genericity_check(&w, n, DEFAULT_GENERICITY_BUDGET).unwrap());
            }
        }
    }

    #[test]
    fn split_counts() {
        let d = datum(&[&[(1, 5), (2, 5)]]);
        let s = enumerate_weight_splits(&d, &[1, 1]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(enumerate_weight_splits(&d, &[2]).unwrap(), vec![vec![d.clone()]]);
        let d3 = datum(&[&[(1, 5), (2, 5), (3, 5)]]);
        assert_eq!(enumerate_weight_splits(&d3, &[1, 2]).unwrap().len(), 3);
        assert!(matches!(enumerate_weight_splits(&d3, &[1, 1]), Err(Error::RankMismatch(_))));
    }

    #[test]
    fn splits_with_multiplicity() {
        let d = WeightDatum::new(vec![PointWeights::new(vec![qr(1, 3), qr(1, 2)], vec![2, 1])]);
        let s = enumerate_weight_splits(&d, &[1, 2]).unwrap();
        assert_eq!(s.len(), 2);
        for parts in &s {
            parts[0].validate(1).unwrap();
            parts[1].validate(2).unwrap();
        }
    }
}
