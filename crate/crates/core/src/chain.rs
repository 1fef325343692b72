//! Parabolic chains of fixed numerical type: Euler characteristics of the
//! deformation complex, existence conditions, degree enumeration,
//! Harder-Narasimhan strata, and the recursive class engine.
//!
//! Stability parameters are [`Lex`] vectors so that "just off a wall" is an
//! exact value. A chain `E_r -> ... -> E_0` has maps `E_i -> E_{i-1}(D)`.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::motive::{zeta_coeff, CurveData, MotiveClass};
use crate::num::{ceil_i64, floor_i64, q, Lex, Q};
use crate::parabolic::{enumerate_weight_splits, genericity_check, par_slope_alpha, ChainType, WeightDatum};
use crate::stacks::{pbundle_stack_class, phecke_class};

pub type Alpha = Vec<Lex>;

pub fn alpha_from(a: &[Q]) -> Alpha {
    a.iter().cloned().map(Lex::real).collect()
}

/// `chi(Hom(E, F)) = nE dF - nF dE + nE nF (1 - g)`.
pub fn chi_hom_rr(ne: i64, de: i64, nf: i64, df: i64, g: i64) -> i64 {
    ne * df - nf * de + ne * nf * (1 - g)
}

/// Length of the skyscraper quotient of `Hom(E, F)` by parabolic (`strict`)
/// or strongly parabolic homomorphisms.
pub fn chi_skyscrapers(e: &WeightDatum, f: &WeightDatum, strict: bool) -> i64 {
    e.pair_count(f, !strict)
}

/// Fiber dimension of the stack of extensions `0 -> sub -> E -> quot -> 0`
/// over the product of the two factors, i.e. `-chi(C(quot, sub))`.
pub fn chi_ext_fiber(quot: &ChainType, sub: &ChainType, g: i64, k: i64) -> i64 {
    let len = quot.ranks.len();
    assert_eq!(len, sub.ranks.len());
    let n = |t: &ChainType, i: usize| t.ranks[i] as i64;
    let mut c = 0;
    for i in 0..len {
        c += chi_hom_rr(n(quot, i), quot.degrees[i], n(sub, i), sub.degrees[i], g)
            - chi_skyscrapers(&quot.data[i], &sub.data[i], true);
    }
    for i in 1..len {
        let df = sub.degrees[i - 1] + n(sub, i - 1) * k;
        c -= chi_hom_rr(n(quot, i), quot.degrees[i], n(sub, i - 1), df, g)
            - chi_skyscrapers(&quot.data[i], &sub.data[i - 1], false);
    }
    -c
}

/// Values that must all be `<= 0` for semistable chains of this type to exist.
/// Ranks must be positive.
fn condition_values(t: &ChainType, alpha: &[Lex], k: i64, use_gap_condition: bool) -> Vec<Lex> {
    let r = t.r();
    let n: Vec<i64> = t.ranks.iter().map(|x| *x as i64).collect();
    let p: Vec<Lex> = (0..=r).map(|i| Lex::real(t.pardeg(i))).collect();
    let term = |i: usize| &p[i] + &alpha[i].scale(&q(n[i]));
    let div = |x: Lex, d: i64| x.scale(&Q::new(1.into(), d.into()));
    let mu = par_slope_alpha(t, alpha);
    let mut out = Vec::new();
    let mut acc = Lex::zero();
    let mut cnt = 0;
    for j in 0..r {
        acc = &acc + &term(j);
        cnt += n[j];
        out.push(&div(acc.clone(), cnt) - &mu);
    }
    if use_gap_condition {
        for j in 1..=r {
            if n[j] == n[j - 1] {
                out.push(&(&p[j] - &Lex::int(n[j] * k)) - &p[j - 1]);
            }
        }
    }
    for kk in 0..r {
        for j in kk + 1..=r {
            if n[j] < *n[kk..j].iter().min().unwrap() {
                let len = (j - kk + 1) as i64;
                let mut num = Lex::zero();
                let mut den = 0;
                for i in (0..=r).filter(|i| *i < kk || *i > j) {
                    num = &num + &term(i);
                    den += n[i];
                }
                num = &num + &p[j].scale(&q(len));
                let mut a = Lex::zero();
                for ai in &alpha[kk..=j] {
                    a = &a + ai;
                }
                a = &a - &Lex::int(len * (len - 1) / 2 * k);
                num = &num + &a.scale(&q(n[j]));
                den += len * n[j];
                out.push(&div(num, den) - &mu);
            }
        }
    }
    for kk in 0..r {
        for j in kk + 1..=r {
            if n[kk] < *n[kk + 1..=j].iter().min().unwrap() {
                let mut num = Lex::zero();
                let mut den = 0;
                for i in kk + 1..=j {
                    let shift = Lex::int(n[kk] * (i - kk) as i64 * k);
                    num = &num + &(&(&p[i] - &p[kk]) - &shift);
                    num = &num + &alpha[i].scale(&q(n[i] - n[kk]));
                    den += n[i] - n[kk];
                }
                out.push(&div(num, den) - &mu);
            }
        }
    }
    out
}

/// The four families of existence inequalities for semistable chains.
pub fn necessary_conditions(t: &ChainType, alpha: &[Lex], k: i64) -> bool {
    necessary_conditions_with(t, alpha, k, true)
}

pub fn necessary_conditions_with(t: &ChainType, alpha: &[Lex], k: i64, use_gap_condition: bool) -> bool {
    condition_values(t, alpha, k, use_gap_condition).iter().all(|v| v.signum() != std::cmp::Ordering::Greater)
}

/// Linear constraint `sum a_j x_j <= b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    a: Vec<Q>,
    b: Q,
}

impl Ineq {
    fn normalized(mut self) -> Self {
        if let Some(s) = self.a.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
            for x in &mut self.a {
                *x = &*x / &s;
            }
            self.b = &self.b / &s;
        }
        self
    }
}

fn eliminate(cons: Vec<Ineq>, v: usize) -> Vec<Ineq> {
    let mut out = BTreeSet::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for c in cons {
        if c.a[v].is_positive() {
            pos.push(c);
        } else if c.a[v].is_negative() {
            neg.push(c);
        } else {
            out.insert(c);
        }
    }
    for p in &pos {
        for m in &neg {
            let (sp, sm) = (-&m.a[v], p.a[v].clone());
            let a: Vec<Q> = p.a.iter().zip(&m.a).map(|(x, y)| x * &sp + y * &sm).collect();
            let b = &p.b * &sp + &m.b * &sm;
            out.insert(Ineq { a, b }.normalized());
        }
    }
    out.into_iter().collect()
}

/// Integer box `[lo, hi]` for each free degree `d_0..d_{r-1}` (with
/// `d_r = total - sum`) containing every vector passing the conditions.
/// `None` when the relaxation is infeasible.
pub fn degree_box(
    ranks: &[u32],
    data: &[WeightDatum],
    total: i64,
    alpha: &[Lex],
    k: i64,
    use_gap_condition: bool,
) -> Result<Option<Vec<(i64, i64)>>> {
    let r = ranks.len() - 1;
    let eval = |x: &[i64]| -> Vec<Q> {
        let mut d = x.to_vec();
        d.push(total - x.iter().sum::<i64>());
        let t = ChainType::new(ranks.to_vec(), d, data.to_vec());
        condition_values(&t, alpha, k, use_gap_condition).iter().map(|v| v.re()).collect()
    };
    let f0 = eval(&vec![0; r]);
    let cols: Vec<Vec<Q>> = (0..r)
        .map(|j| {
            let mut e = vec![0; r];
            e[j] = 1;
            eval(&e).iter().zip(&f0).map(|(a, b)| a - b).collect()
        })
        .collect();
    let cons: Vec<Ineq> = (0..f0.len())
        .map(|c| Ineq { a: (0..r).map(|j| cols[j][c].clone()).collect(), b: -&f0[c] }.normalized())
        .collect();
    let mut bounds = Vec::new();
    for v in 0..r {
        let mut cs = cons.clone();
        for u in (0..r).filter(|u| *u != v) {
            cs = eliminate(cs, u);
        }
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        for c in &cs {
            if c.a[v].is_positive() {
                let x = &c.b / &c.a[v];
                hi = Some(hi.map_or(x.clone(), |h| h.min(x)));
            } else if c.a[v].is_negative() {
                let x = &c.b / &c.a[v];
                lo = Some(lo.map_or(x.clone(), |l| l.max(x)));
            } else if c.b.is_negative() {
                return Ok(None);
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => {
                let (l, h) = (ceil_i64(&l), floor_i64(&h));
                if l > h {
                    return Ok(None);
                }
                bounds.push((l, h));
            }
            _ => {
                return Err(Error::UnboundedSearch(format!(
                    "degree d_{v} of ranks {ranks:?} is not bounded by the existence conditions"
                )))
            }
        }
    }
    Ok(Some(bounds))
}

/// Every degree vector with the given total passing the existence conditions.
/// Ranks must be positive.
pub fn enumerate_degree_vectors(
    ranks: &[u32],
    data: &[WeightDatum],
    total: i64,
    alpha: &[Lex],
    k: i64,
    use_gap_condition: bool,
) -> Result<Vec<Vec<i64>>> {
    if ranks.len() == 1 {
        return Ok(vec![vec![total]]);
    }
    let Some(bx) = degree_box(ranks, data, total, alpha, k, use_gap_condition)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    let mut x: Vec<i64> = bx.iter().map(|b| b.0).collect();
    loop {
        let mut d = x.clone();
        d.push(total - x.iter().sum::<i64>());
        let t = ChainType::new(ranks.to_vec(), d.clone(), data.to_vec());
        if necessary_conditions_with(&t, alpha, k, use_gap_condition) {
            out.push(d);
        }
        let mut i = 0;
        loop {
            if i == x.len() {
                return Ok(out);
            }
            if x[i] < bx[i].1 {
                x[i] += 1;
                break;
            }
            x[i] = bx[i].0;
            i += 1;
        }
    }
}

/// Maximal runs of positive rank, as index ranges.
fn blocks_of(ranks: &[u32]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < ranks.len() {
        if ranks[i] == 0 {
            i += 1;
            continue;
        }
        let s = i;
        while i < ranks.len() && ranks[i] > 0 {
            i += 1;
        }
        out.push((s, i));
    }
    out
}

fn slice_type(t: &ChainType, (s, e): (usize, usize)) -> ChainType {
    ChainType::new(t.ranks[s..e].to_vec(), t.degrees[s..e].to_vec(), t.data[s..e].to_vec())
}

/// Total degree forcing a sub-block to have slope `mu`, when integral.
fn degree_for_slope(ranks: &[u32], data: &[WeightDatum], alpha: &[Lex], mu: &Lex) -> Option<i64> {
    let n: i64 = ranks.iter().map(|x| *x as i64).sum();
    let mut e = mu.scale(&q(n));
    for i in 0..ranks.len() {
        e = &e - &Lex::real(data[i].weight_sum());
        e = &e - &alpha[i].scale(&q(ranks[i] as i64));
    }
    e.as_integer()
}

/// Degree vectors for a type whose ranks may vanish at some indices.
/// Degrees at rank-0 indices are 0 and separate blocks share one slope.
pub fn part_degree_vectors(
    ranks: &[u32],
    data: &[WeightDatum],
    total: i64,
    alpha: &[Lex],
    k: i64,
    use_gap_condition: bool,
) -> Result<Vec<Vec<i64>>> {
    let blocks = blocks_of(ranks);
    let len = ranks.len();
    let mut totals = Vec::new();
    if blocks.len() == 1 {
        totals.push(total);
    } else {
        let t = ChainType::new(ranks.to_vec(), {
            let mut d = vec![0; len];
            d[blocks[0].0] = total;
            d
        }, data.to_vec());
        let mu = par_slope_alpha(&t, alpha);
        for &(s, e) in &blocks {
            match degree_for_slope(&ranks[s..e], &data[s..e], &alpha[s..e], &mu) {
                Some(x) => totals.push(x),
                None => return Ok(Vec::new()),
            }
        }
    }
    let mut out: Vec<Vec<i64>> = vec![vec![0; len]];
    for (b, &(s, e)) in blocks.iter().enumerate() {
        let vs = enumerate_degree_vectors(&ranks[s..e], &data[s..e], totals[b], &alpha[s..e], k, use_gap_condition)?;
        let mut next = Vec::new();
        for base in &out {
            for v in &vs {
                let mut d = base.clone();
                d[s..e].copy_from_slice(v);
                next.push(d);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Ordered sub-quotients of a Harder-Narasimhan filtration, highest slope first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HNType {
    pub parts: Vec<ChainType>,
}

impl HNType {
    /// Sum of the pairwise extension fiber dimensions.
    pub fn chi(&self, g: i64, k: i64) -> i64 {
        let mut c = 0;
        for i in 0..self.parts.len() {
            for j in i + 1..self.parts.len() {
                c += chi_ext_fiber(&self.parts[j], &self.parts[i], g, k);
            }
        }
        c
    }

    /// Componentwise sums of ranks, degrees and weight multiplicities.
    pub fn ambient(&self) -> ChainType {
        let len = self.parts[0].ranks.len();
        let mut ranks = vec![0; len];
        let mut degrees = vec![0; len];
        let mut data: Vec<WeightDatum> = self.parts[0].data.clone();
        for p in &self.parts[1..] {
            for i in 0..len {
                for (x, y) in data[i].points.iter_mut().zip(&p.data[i].points) {
                    let mut pairs: Vec<(Q, u32)> = x.weights.iter().cloned().zip(x.mults.iter().cloned()).collect();
                    for (w, m) in y.weights.iter().zip(&y.mults) {
                        match pairs.iter_mut().find(|(v, _)| v == w) {
                            Some(e) => e.1 += m,
                            None => pairs.push((w.clone(), *m)),
                        }
                    }
                    pairs.sort();
                    x.weights = pairs.iter().map(|p| p.0.clone()).collect();
                    x.mults = pairs.iter().map(|p| p.1).collect();
                }
            }
        }
        for p in &self.parts {
            for i in 0..len {
                ranks[i] += p.ranks[i];
                degrees[i] += p.degrees[i];
            }
        }
        ChainType::new(ranks, degrees, data)
    }
}

/// Ordered lists of nonzero vectors `0 <= v <= n` summing to `n`.
pub fn vector_compositions(n: &[u32], min_parts: usize) -> Vec<Vec<Vec<u32>>> {
    fn subvectors(n: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &x in n {
            out = out.into_iter().flat_map(|v| (0..=x).map(move |c| { let mut w = v.clone(); w.push(c); w })).collect();
        }
        out.retain(|v| v.iter().any(|c| *c > 0));
        out
    }
    fn rec(rem: &[u32], acc: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if rem.iter().all(|x| *x == 0) {
            out.push(acc.clone());
            return;
        }
        for v in subvectors(rem) {
            let next: Vec<u32> = rem.iter().zip(&v).map(|(a, b)| a - b).collect();
            acc.push(v);
            rec(&next, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out.retain(|c| c.len() >= min_parts);
    out
}

/// For each index, every split of its weights into the parts' ranks; returns
/// per-part data vectors.
fn split_data(data: &[WeightDatum], parts: &[Vec<u32>]) -> Result<Vec<Vec<Vec<WeightDatum>>>> {
    let h = parts.len();
    let mut out: Vec<Vec<Vec<WeightDatum>>> = vec![vec![Vec::new(); h]];
    for (i, d) in data.iter().enumerate() {
        let pr: Vec<u32> = parts.iter().map(|p| p[i]).collect();
        let splits = enumerate_weight_splits(d, &pr)?;
        let mut next = Vec::with_capacity(out.len() * splits.len());
        for base in &out {
            for s in &splits {
                let mut v = base.clone();
                for j in 0..h {
                    v[j].push(s[j].clone());
                }
                next.push(v);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Distinct total weights of the first part over all two-part splits.
pub fn split_weight_sums(data: &[WeightDatum], parts: &[Vec<u32>]) -> Result<BTreeSet<Q>> {
    Ok(split_data(data, parts)?
        .iter()
        .map(|d| d[0].iter().map(WeightDatum::weight_sum).fold(Q::zero(), |a, b| a + b))
        .collect())
}

/// Harder-Narasimhan types of `t` at `alpha` with at least two parts.
///
/// With `equal_slope_at`, every part must have the ambient slope there and the
/// part totals are forced. Otherwise part totals range over `window`.
pub fn hn_types_at(
    t: &ChainType,
    alpha: &[Lex],
    equal_slope_at: Option<&[Lex]>,
    window: (i64, i64),
    k: i64,
    use_gap_condition: bool,
) -> Result<Vec<HNType>> {
    let mut out = Vec::new();
    let mu_c = equal_slope_at.map(|a| par_slope_alpha(t, a));
    for comp in vector_compositions(&t.ranks, 2) {
        let h = comp.len();
        for datas in split_data(&t.data, &comp)? {
            let totals: Vec<Option<i64>> = match (&mu_c, equal_slope_at) {
                (Some(mu), Some(ac)) => (0..h).map(|j| degree_for_slope(&comp[j], &datas[j], ac, mu)).collect(),
                _ => vec![None; h],
            };
            if equal_slope_at.is_some() && totals.iter().any(|x| x.is_none()) {
                continue;
            }
            let mut choices: Vec<Vec<Vec<i64>>> = Vec::with_capacity(h);
            let mut ok = true;
            for j in 0..h {
                let range: Vec<i64> = match totals[j] {
                    Some(e) => vec![e],
                    None => (window.0..=window.1).collect(),
                };
                let mut vs = Vec::new();
                for e in range {
                    vs.extend(part_degree_vectors(&comp[j], &datas[j], e, alpha, k, use_gap_condition)?);
                }
                if vs.is_empty() {
                    ok = false;
                    break;
                }
                choices.push(vs);
            }
            if !ok {
                continue;
            }
            let mut idx = vec![0usize; h - 1];
            loop {
                let mut last: Vec<i64> = t.degrees.clone();
                for j in 0..h - 1 {
                    for (i, x) in choices[j][idx[j]].iter().enumerate() {
                        last[i] -= x;
                    }
                }
                if choices[h - 1].contains(&last) {
                    let mut parts: Vec<ChainType> = (0..h - 1)
                        .map(|j| ChainType::new(comp[j].clone(), choices[j][idx[j]].clone(), datas[j].clone()))
                        .collect();
                    parts.push(ChainType::new(comp[h - 1].clone(), last, datas[h - 1].clone()));
                    let slopes: Vec<Lex> = parts.iter().map(|p| par_slope_alpha(p, alpha)).collect();
                    if slopes.windows(2).all(|w| w[0] > w[1]) {
                        out.push(HNType { parts });
                    }
                }
                let mut i = 0;
                loop {
                    if i == h - 1 {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < choices[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == h - 1 {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// How the length of a Hecke modification `E_i -> E_{i-1}(D)` is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HeckeModel {
    /// Length `d_{i-1} - d_i + n|D|` with no parabolic correction.
    Unrestricted,
    /// Rank-1 maps vanish at points where the weight does not drop, which
    /// shortens the length by the strongly parabolic skyscraper count.
    #[default]
    StronglyParabolic,
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub hecke: HeckeModel,
    pub use_gap_condition: bool,
    pub genericity_budget: u128,
    pub trace_walls: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            hecke: HeckeModel::default(),
            use_gap_condition: true,
            genericity_budget: crate::parabolic::DEFAULT_GENERICITY_BUDGET,
            trace_walls: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub evaluations: u64,
    pub memo_hits: u64,
    pub base_cases: u64,
    pub rays: u64,
    pub walls: u64,
    pub strata: u64,
}

/// Recursive evaluator for classes of semistable chain stacks, memoized by
/// type and normalized stability parameter.
pub struct Engine {
    pub curve: CurveData,
    pub opts: EngineOptions,
    memo: RefCell<HashMap<String, MotiveClass>>,
    pub(crate) stats: RefCell<EngineStats>,
    pub(crate) trace: RefCell<Vec<String>>,
    generic: RefCell<HashMap<(Vec<Q>, u32), bool>>,
}

/// Shift so that `alpha_0 = 0` and drop infinitesimal levels nobody uses.
pub fn normalize_alpha(alpha: &[Lex]) -> Alpha {
    let a0 = alpha[0].clone();
    let shifted: Vec<Lex> = alpha.iter().map(|a| a - &a0).collect();
    let depth = shifted.iter().map(Lex::depth).max().unwrap_or(0);
    let keep: Vec<bool> = (0..depth).map(|l| l == 0 || shifted.iter().any(|a| !a.coeff(l).is_zero())).collect();
    shifted.iter().map(|a| a.compact(&keep)).collect()
}

/// Canonical memo key for a positive-rank type at a parameter.
pub fn chamber_key(t: &ChainType, alpha: &[Lex]) -> String {
    let a: Vec<String> = normalize_alpha(alpha).iter().map(|x| x.to_string()).collect();
    format!("{}@{}", t.key(), a.join(","))
}

impl Engine {
    pub fn new(curve: CurveData, opts: EngineOptions) -> Self {
        Engine {
            curve,
            opts,
            memo: RefCell::new(HashMap::new()),
            stats: RefCell::new(EngineStats::default()),
            trace: RefCell::new(Vec::new()),
            generic: RefCell::new(HashMap::new()),
        }
    }

    pub fn g(&self) -> i64 {
        self.curve.g()
    }

    pub fn k(&self) -> i64 {
        self.curve.k()
    }

    pub fn stats(&self) -> EngineStats {
        self.stats.borrow().clone()
    }

    pub fn take_trace(&self) -> Vec<String> {
        std::mem::take(&mut self.trace.borrow_mut())
    }

    /// Memo contents sorted by key.
    pub fn memo_entries(&self) -> Vec<(String, MotiveClass)> {
        let mut v: Vec<_> = self.memo.borrow().iter().map(|(a, b)| (a.clone(), b.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn preload(&self, key: String, class: MotiveClass) {
        self.memo.borrow_mut().insert(key, class);
    }

    /// Class of the stack of `alpha`-semistable chains of type `t`.
    ///
    /// Rejects non-generic weights and parameters on a wall.
    pub fn chain_class(&self, t: &ChainType, alpha: &[Q]) -> Result<MotiveClass> {
        self.check_public(t, alpha)?;
        self.class_at(t, &alpha_from(alpha))
    }

    pub(crate) fn check_public(&self, t: &ChainType, alpha: &[Q]) -> Result<()> {
        t.validate(self.curve.num_marked as usize)?;
        if alpha.len() != t.ranks.len() {
            return Err(Error::RankMismatch(format!(
                "stability parameter has {} entries, chain has {}",
                alpha.len(),
                t.ranks.len()
            )));
        }
        let weights: Vec<Q> = {
            let mut s: BTreeSet<Q> = BTreeSet::new();
            for d in &t.data {
                s.extend(d.all_distinct_weights());
            }
            s.into_iter().collect()
        };
        let bound = t.total_rank();
        if !self.is_generic(weights, bound)? {
            return Err(Error::NonGenericWeights(bound));
        }
        let a = alpha_from(alpha);
        if let Some(w) = self.wall_witness(t, &a)? {
            return Err(Error::WallHit(w));
        }
        Ok(())
    }

    /// Cached [`genericity_check`].
    pub fn is_generic(&self, weights: Vec<Q>, bound: u32) -> Result<bool> {
        let key = (weights, bound);
        if let Some(v) = self.generic.borrow().get(&key) {
            return Ok(*v);
        }
        let v = genericity_check(&key.0, bound, self.opts.genericity_budget)?;
        self.generic.borrow_mut().insert(key, v);
        Ok(v)
    }

    /// A proper sub-type with integral total degree and equal slope at `alpha`.
    pub(crate) fn wall_witness(&self, t: &ChainType, alpha: &[Lex]) -> Result<Option<String>> {
        let mu = par_slope_alpha(t, alpha);
        for comp in vector_compositions(&t.ranks, 2).into_iter().filter(|c| c.len() == 2) {
            for datas in split_data(&t.data, &comp)? {
                if let Some(e) = degree_for_slope(&comp[0], &datas[0], alpha, &mu) {
                    return Ok(Some(format!("sub-type ranks {:?} total degree {e} has slope {mu}", comp[0])));
                }
            }
        }
        Ok(None)
    }

    /// Internal entry: any ranks (zeros allowed), any parameter.
    pub(crate) fn class_at(&self, t: &ChainType, alpha: &[Lex]) -> Result<MotiveClass> {
        let blocks = blocks_of(&t.ranks);
        if blocks.is_empty() {
            return Ok(MotiveClass::one());
        }
        for (i, r) in t.ranks.iter().enumerate() {
            if *r == 0 && t.degrees[i] != 0 {
                return Ok(MotiveClass::zero());
            }
        }
        if blocks.len() == 1 {
            let b = blocks[0];
            return self.block_class(&slice_type(t, b), &alpha[b.0..b.1]);
        }
        let slopes: Vec<Lex> =
            blocks.iter().map(|&b| par_slope_alpha(&slice_type(t, b), &alpha[b.0..b.1])).collect();
        if slopes.windows(2).any(|w| w[0] != w[1]) {
            return Ok(MotiveClass::zero());
        }
        let mut acc = MotiveClass::one();
        for &b in &blocks {
            acc = acc.mul(&self.block_class(&slice_type(t, b), &alpha[b.0..b.1])?);
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    fn block_class(&self, t: &ChainType, alpha: &[Lex]) -> Result<MotiveClass> {
        let alpha = normalize_alpha(alpha);
        let key = chamber_key(t, &alpha);
        if let Some(v) = self.memo.borrow().get(&key) {
            self.stats.borrow_mut().memo_hits += 1;
            return Ok(v.clone());
        }
        self.stats.borrow_mut().evaluations += 1;
        let v = if t.r() == 0 {
            self.base(t, &alpha)?
        } else if !necessary_conditions_with(t, &alpha, self.k(), self.opts.use_gap_condition) {
            MotiveClass::zero()
        } else if t.is_constant_rank() && self.base_hypothesis(t, &alpha) {
            self.base(t, &alpha)?
        } else {
            let ray = self.choose_ray(t, &alpha)?;
            self.cross_ray(t, &alpha, &ray)?
        };
        self.memo.borrow_mut().insert(key, v.clone());
        Ok(v)
    }

    /// `d_{i-1} - d_i + 2n|D| < alpha_i - alpha_{i-1}` for all `i`.
    pub fn base_hypothesis(&self, t: &ChainType, alpha: &[Lex]) -> bool {
        let n = t.ranks[0] as i64;
        (1..t.ranks.len()).all(|i| {
            let lhs = Lex::int(t.degrees[i - 1] - t.degrees[i] + 2 * n * self.k());
            lhs < &alpha[i] - &alpha[i - 1]
        })
    }

    /// Constant-rank closed formula, checking its hypothesis first.
    pub fn chain_class_base(&self, t: &ChainType, alpha: &[Q]) -> Result<MotiveClass> {
        t.validate(self.curve.num_marked as usize)?;
        let a = alpha_from(alpha);
        if !t.is_constant_rank() || !self.base_hypothesis(t, &a) {
            return Err(Error::BaseCaseHypothesisViolated(format!(
                "type {t} at alpha {:?}",
                a.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            )));
        }
        self.base(t, &a)
    }

    fn hecke_factor(&self, t: &ChainType, i: usize) -> Result<MotiveClass> {
        let n = t.ranks[i];
        let gap = t.degrees[i - 1] - t.degrees[i];
        if n == 1 && self.opts.hecke == HeckeModel::StronglyParabolic {
            let l = gap + self.k() - chi_skyscrapers(&t.data[i], &t.data[i - 1], false);
            return Ok(zeta_coeff(&self.curve, l));
        }
        phecke_class(&MotiveClass::one(), gap + n as i64 * self.k(), n, &t.data[i], &self.curve)
    }

    /// Injective chains of constant rank minus their Harder-Narasimhan strata.
    fn base(&self, t: &ChainType, alpha: &[Lex]) -> Result<MotiveClass> {
        self.stats.borrow_mut().base_cases += 1;
        let n = t.ranks[0];
        let mut main = pbundle_stack_class(n, t.degrees[0], &t.data[0], &self.curve)?;
        for i in 1..t.ranks.len() {
            main = main.mul(&self.hecke_factor(t, i)?);
            if main.is_zero() {
                break;
            }
        }
        Ok(main.sub(&self.base_hn_sum(t, alpha)?))
    }

    /// Sum over all proper Harder-Narasimhan strata of the injective locus.
    /// Each stratum family differs only by twisting parts with line bundles and
    /// is summed in closed form.
    fn base_hn_sum(&self, t: &ChainType, alpha: &[Lex]) -> Result<MotiveClass> {
        let n = t.ranks[0] as i64;
        let len = t.ranks.len();
        let (g, k) = (self.g(), self.k());
        let mut total = MotiveClass::zero();
        for m in int_compositions(n as u32).into_iter().filter(|c| c.len() >= 2) {
            let h = m.len();
            let comp: Vec<Vec<u32>> = m.iter().map(|x| vec![*x; len]).collect();
            let prefix: Vec<i64> = m.iter().scan(0i64, |s, x| { *s += *x as i64; Some(*s) }).collect();
            let gap_choices: Vec<Vec<Vec<i64>>> = (1..len)
                .map(|i| {
                    let gap = t.degrees[i - 1] - t.degrees[i];
                    bounded_compositions(gap, &m.iter().map(|x| -(*x as i64) * k).collect::<Vec<_>>())
                })
                .collect();
            if gap_choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            for datas in split_data(&t.data, &comp)? {
                for gaps in cartesian(&gap_choices) {
                    for rho in cartesian(&m.iter().map(|x| (0..*x as i64).collect::<Vec<_>>()).collect::<Vec<_>>()) {
                        let part_at = |j: usize, y: i64| -> ChainType {
                            let mut e = vec![rho[j] + m[j] as i64 * y];
                            for gi in &gaps {
                                let last = *e.last().unwrap();
                                e.push(last - gi[j]);
                            }
                            ChainType::new(comp[j].clone(), e, datas[j].clone())
                        };
                        let mut classes = Vec::with_capacity(h);
                        for j in 0..h {
                            let c = self.class_at(&part_at(j, 0), alpha)?;
                            if c.is_zero() {
                                break;
                            }
                            classes.push(c);
                        }
                        if classes.len() < h {
                            continue;
                        }
                        let slopes: Vec<Lex> = (0..h).map(|j| par_slope_alpha(&part_at(j, 0), alpha)).collect();
                        let b: Vec<i64> = (0..h - 1).map(|j| (&slopes[j + 1] - &slopes[j]).int_above()).collect();
                        let s_target = t.degrees[0] - rho.iter().sum::<i64>();
                        let chi_of = |z: &[i64]| -> Option<i64> {
                            let acc: i64 = z.iter().zip(&prefix).map(|(a, b)| a * b).sum();
                            let num = s_target - acc;
                            if num.rem_euclid(n) != 0 {
                                return None;
                            }
                            let mut y = vec![num / n; h];
                            for j in (0..h - 1).rev() {
                                y[j] = y[j + 1] + z[j];
                            }
                            let parts: Vec<ChainType> = (0..h).map(|j| part_at(j, y[j])).collect();
                            Some(HNType { parts }.chi(g, k))
                        };
                        let ranges: Vec<Vec<i64>> = (0..h - 1).map(|_| (0..n).collect()).collect();
                        let mut geom: Option<MotiveClass> = None;
                        let prod = MotiveClass::product(&classes);
                        for s in cartesian(&ranges) {
                            let z: Vec<i64> = b.iter().zip(&s).map(|(x, y)| x + y).collect();
                            let Some(chi) = chi_of(&z) else { continue };
                            if geom.is_none() {
                                let mut gf = MotiveClass::one();
                                for l in 0..h - 1 {
                                    let mut z2 = z.clone();
                                    z2[l] += n;
                                    let d = chi_of(&z2).expect("period preserves congruence") - chi;
                                    if d >= 0 {
                                        return Err(Error::Divergent(format!(
                                            "stratum family of {t} has nonnegative step {d}"
                                        )));
                                    }
                                    gf = gf.mul(&MotiveClass::l_pow(-d).div(&MotiveClass::l_pow_minus_one(-d))?);
                                }
                                geom = Some(gf);
                            }
                            self.stats.borrow_mut().strata += 1;
                            total = total.add(&prod.shift_l(chi).mul(geom.as_ref().unwrap()));
                        }
                    }
                }
            }
        }
        Ok(total)
    }

    /// `L^chi * prod [parts]` at `alpha`.
    pub fn hn_stratum_class(&self, t: &HNType, alpha: &[Lex]) -> Result<MotiveClass> {
        let mut acc = MotiveClass::l_pow(t.chi(self.g(), self.k()));
        for p in &t.parts {
            acc = acc.mul(&self.class_at(p, alpha)?);
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }
}

/// Ordered compositions of `n` into positive parts.
pub fn int_compositions(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in int_compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Integer vectors `x >= lower` with `sum x = total`.
fn bounded_compositions(total: i64, lower: &[i64]) -> Vec<Vec<i64>> {
    let slack = total - lower.iter().sum::<i64>();
    if slack < 0 {
        return Vec::new();
    }
    fn rec(i: usize, left: i64, lower: &[i64], acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i + 1 == lower.len() {
            acc.push(lower[i] + left);
            out.push(acc.clone());
            acc.pop();
            return;
        }
        for u in 0..=left {
            acc.push(lower[i] + u);
            rec(i + 1, left - u, lower, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, slack, lower, &mut Vec::new(), &mut out);
    out
}

fn cartesian<T: Clone>(sets: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for s in sets {
        let mut next = Vec::with_capacity(out.len() * s.len());
        for base in &out {
            for x in s {
                let mut v = base.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}
