//! Acceptance suite. One line per criterion, then a nonzero exit if any failed.
//!
//! Every comparison is exact; the only tolerances are wall-clock budgets.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use parhiggs::chain::{
    alpha_from, chi_hom_rr, chi_skyscrapers, enumerate_degree_vectors, necessary_conditions_with, Engine,
    EngineOptions,
};
use parhiggs::higgs::{higgs_alpha, higgs_moduli_class, HiggsProblem};
use parhiggs::motive::{specialize_count, specialize_e};
use parhiggs::num::{q, qr, Lex, Q};
use parhiggs::oracles::{gaussian_flag_count, rank11_chain_oracle};
use parhiggs::parabolic::{generic_datum, ChainType, PointWeights, WeightDatum};
use parhiggs::stacks::flag_class;
use parhiggs::wall::Ray;
use parhiggs::{CurveData, MotiveClass};

const RANK1_CASE_BUDGET: Duration = Duration::from_secs(1);
const FLAG_BUDGET: Duration = Duration::from_secs(1);
const DUALITY_BUDGET: Duration = Duration::from_secs(10);
const DUALITY_SAMPLES: usize = 500;
const DUALITY_SEED: u64 = 0x5eed_0003;
const BOX_BUDGET: Duration = Duration::from_secs(60);
const BOX_WINDOW: i64 = 8;
const RANK11_BUDGET: Duration = Duration::from_secs(300);
const RANK11_DEGREE: i64 = 3;
const DEGREE_INDEP_BUDGET: Duration = Duration::from_secs(30 * 60);
const RANK3_BUDGET: Duration = Duration::from_secs(4 * 3600);
const WALLS_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

/// Everything the suite computed, in a fixed order, for the determinism check.
#[derive(Default)]
struct Transcript(String);

impl Transcript {
    fn record(&mut self, label: impl std::fmt::Display, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{label} = {value}");
    }
}

struct HiggsRun {
    label: String,
    g: u32,
    class: MotiveClass,
    half_dimension: i64,
}

fn higgs(g: u32, k: u32, n: u32, d: i64) -> Result<HiggsRun, String> {
    let curve = CurveData::new(g, k);
    let p = HiggsProblem { curve: curve.clone(), n, d, datum: generic_datum(n, k as usize, n) };
    let e = Engine::new(curve, EngineOptions::default());
    let r = higgs_moduli_class(&p, &e).map_err(|e| format!("n={n} g={g} k={k} d={d}: {e}"))?;
    Ok(HiggsRun { label: format!("higgs n={n} g={g} k={k} d={d}"), g, class: r.class, half_dimension: r.half_dimension })
}

fn top_l_degree(run: &HiggsRun) -> Option<i64> {
    specialize_e(&run.class, run.g).total_degree().map(|t| t / 2)
}

fn rank1(tr: &mut Transcript, runs: &mut Vec<HiggsRun>) -> (bool, String) {
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    for g in 0..=3 {
        for k in 1..=2 {
            for d in -1..=1 {
                let t0 = Instant::now();
                match higgs(g, k, 1, d) {
                    Ok(r) => {
                        let want = CurveData::new(g, k).pic().shift_l(g as i64);
                        if r.class.canonical() != want.canonical() {
                            bad.push(format!("g={g} k={k} d={d}: {}", r.class));
                        }
                        tr.record(&r.label, &r.class);
                        runs.push(r);
                    }
                    Err(e) => bad.push(e),
                }
                let dt = t0.elapsed();
                slowest = slowest.max(dt);
                if dt > RANK1_CASE_BUDGET {
                    bad.push(format!("g={g} k={k} d={d} took {dt:?}"));
                }
            }
        }
    }
    (bad.is_empty(), if bad.is_empty() { format!("24 cases, slowest {slowest:?}") } else { bad.join("; ") })
}

fn compositions(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn flags(tr: &mut Transcript) -> (bool, String) {
    let t0 = Instant::now();
    let point = CurveData::new(0, 0).with_zeta(vec![1]);
    let mut bad = Vec::new();
    let mut cases = 0;
    for n in 1..=4 {
        for comp in compositions(n) {
            let c = flag_class(n, &comp).expect("valid flag type");
            tr.record(format!("flag {n} {comp:?}"), &c);
            for qq in [2u64, 3, 5] {
                cases += 1;
                let got = specialize_count(&c, &point, qq).expect("point count");
                let want = Q::from_integer(gaussian_flag_count(n, comp.len(), &comp, qq));
                if got != want {
                    bad.push(format!("n={n} {comp:?} q={qq}: {got} vs {want}"));
                }
            }
        }
    }
    let dt = t0.elapsed();
    if dt > FLAG_BUDGET {
        bad.push(format!("took {dt:?}"));
    }
    (bad.is_empty(), if bad.is_empty() { format!("{cases} counts") } else { bad.join("; ") })
}

fn random_datum(rng: &mut StdRng, n: u32, k: usize) -> WeightDatum {
    let pts = (0..k)
        .map(|_| {
            let den = rng.gen_range(2..=7i64);
            let mut ws: Vec<Q> = (0..n).map(|_| qr(rng.gen_range(0..den), den)).collect();
            ws.sort();
            let mut pw: Vec<(Q, u32)> = Vec::new();
            for w in ws {
                match pw.last_mut() {
                    Some(l) if l.0 == w => l.1 += 1,
                    _ => pw.push((w, 1)),
                }
            }
            PointWeights::new(pw.iter().map(|x| x.0.clone()).collect(), pw.iter().map(|x| x.1).collect())
        })
        .collect();
    WeightDatum::new(pts)
}

/// `chi_par(E', E) + chi_spar(E, E' (x) K(D)) = 0`.
fn duality(tr: &mut Transcript) -> (bool, String) {
    let t0 = Instant::now();
    let mut rng = StdRng::seed_from_u64(DUALITY_SEED);
    let mut bad = Vec::new();
    let mut acc = 0i64;
    for _ in 0..DUALITY_SAMPLES {
        let g = rng.gen_range(0..=3i64);
        let k = rng.gen_range(0..=2usize);
        let (n, n2) = (rng.gen_range(1..=3u32), rng.gen_range(1..=3u32));
        let (d, d2) = (rng.gen_range(-5..=5i64), rng.gen_range(-5..=5i64));
        let (e, e2) = (random_datum(&mut rng, n, k), random_datum(&mut rng, n2, k));
        let (ni, n2i) = (n as i64, n2 as i64);
        let par = chi_hom_rr(n2i, d2, ni, d, g) - chi_skyscrapers(&e2, &e, true);
        let twisted = d2 + n2i * (2 * g - 2 + k as i64);
        let spar = chi_hom_rr(ni, d, n2i, twisted, g) - chi_skyscrapers(&e, &e2, false);
        acc = acc.wrapping_mul(31).wrapping_add(par);
        if par != -spar {
            bad.push(format!("g={g} E'=({n2},{d2},{e2}) E=({n},{d},{e}): {par} vs {spar}"));
        }
    }
    tr.record("duality digest", acc);
    let dt = t0.elapsed();
    if dt > DUALITY_BUDGET {
        bad.push(format!("took {dt:?}"));
    }
    (bad.is_empty(), if bad.is_empty() { format!("{DUALITY_SAMPLES} samples") } else { bad.join("; ") })
}

fn window_scan(ranks: &[u32], data: &[WeightDatum], total: i64, alpha: &[Lex], k: i64) -> Vec<Vec<i64>> {
    let free = ranks.len() - 1;
    let mut out = Vec::new();
    let mut x = vec![-BOX_WINDOW; free];
    loop {
        let mut d = x.clone();
        d.push(total - x.iter().sum::<i64>());
        let t = ChainType::new(ranks.to_vec(), d.clone(), data.to_vec());
        if necessary_conditions_with(&t, alpha, k, true) {
            out.push(d);
        }
        let mut i = 0;
        loop {
            if i == free {
                out.sort();
                return out;
            }
            x[i] += 1;
            if x[i] <= BOX_WINDOW {
                break;
            }
            x[i] = -BOX_WINDOW;
            i += 1;
        }
    }
}

fn degree_box(tr: &mut Transcript) -> (bool, String) {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    let mut cases = 0;
    let mut vectors = 0;
    let shapes: Vec<Vec<u32>> = vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![1, 1, 1]];
    for ranks in &shapes {
        for k in 0..=2usize {
            let n: u32 = ranks.iter().sum();
            let datum = generic_datum(n, k, n);
            let data = consecutive(&datum, ranks);
            for gap in [0i64, 2, 4] {
                let alpha: Vec<Q> = (0..ranks.len() as i64).map(|i| q(i * gap)).collect();
                let a = alpha_from(&alpha);
                for total in -2..=2 {
                    cases += 1;
                    let mut got = match enumerate_degree_vectors(ranks, &data, total, &a, k as i64, true) {
                        Ok(v) => v,
                        Err(e) => {
                            bad.push(format!("{ranks:?} k={k} gap={gap} total={total}: {e}"));
                            continue;
                        }
                    };
                    got.sort();
                    vectors += got.len();
                    let want = window_scan(ranks, &data, total, &a, k as i64);
                    tr.record(format!("box {ranks:?} k={k} gap={gap} total={total}"), format!("{got:?}"));
                    if got != want {
                        bad.push(format!("{ranks:?} k={k} gap={gap} total={total}: {got:?} vs {want:?}"));
                    }
                }
            }
        }
    }
    let dt = t0.elapsed();
    if dt > BOX_BUDGET {
        bad.push(format!("took {dt:?}"));
    }
    (bad.is_empty(), if bad.is_empty() { format!("{cases} cases, {vectors} vectors") } else { bad.join("; ") })
}

/// Splits a datum into consecutive blocks of weights, one block per rank.
fn consecutive(d: &WeightDatum, ranks: &[u32]) -> Vec<WeightDatum> {
    let mut out = vec![Vec::new(); ranks.len()];
    for p in &d.points {
        let ws = p.expanded();
        let mut at = 0;
        for (i, r) in ranks.iter().enumerate() {
            let s = &ws[at..at + *r as usize];
            at += *r as usize;
            out[i].push(PointWeights::new(s.to_vec(), vec![1; s.len()]));
        }
    }
    out.into_iter().map(WeightDatum::new).collect()
}

struct Rank11Case {
    g: u32,
    w0: Q,
    w1: Q,
    d0: i64,
    d1: i64,
}

impl Rank11Case {
    fn chain(&self) -> ChainType {
        let one = |w: &Q| WeightDatum::new(vec![PointWeights::trivial(w.clone(), 1)]);
        ChainType::new(vec![1, 1], vec![self.d0, self.d1], vec![one(&self.w0), one(&self.w1)])
    }
}

fn rank11_grid() -> Vec<Rank11Case> {
    let mut out = Vec::new();
    for g in [0u32, 2] {
        for (w0, w1) in [(qr(1, 11), qr(3, 11)), (qr(3, 11), qr(1, 11))] {
            for d0 in -RANK11_DEGREE..=RANK11_DEGREE {
                for d1 in -RANK11_DEGREE..=RANK11_DEGREE {
                    out.push(Rank11Case { g, w0: w0.clone(), w1: w1.clone(), d0, d1 });
                }
            }
        }
    }
    out
}

fn rank11(tr: &mut Transcript) -> (bool, String) {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    let grid = rank11_grid();
    for c in &grid {
        let curve = CurveData::new(c.g, 1);
        let e = Engine::new(curve, EngineOptions::default());
        let alpha = higgs_alpha(1, c.g);
        let want = rank11_chain_oracle(c.g, 1, c.d0, c.d1, std::slice::from_ref(&c.w0), std::slice::from_ref(&c.w1), (alpha[0].clone(), alpha[1].clone()));
        match e.chain_class(&c.chain(), &alpha) {
            Ok(got) => {
                tr.record(format!("rank11 {}", c.chain()), &got);
                if got.canonical() != want.canonical() {
                    bad.push(format!("{}: {got} vs {want}", c.chain()));
                }
            }
            Err(err) => bad.push(format!("{}: {err}", c.chain())),
        }
    }
    let dt = t0.elapsed();
    if dt > RANK11_BUDGET {
        bad.push(format!("took {dt:?}"));
    }
    (bad.is_empty(), if bad.is_empty() { format!("{} chains", grid.len()) } else { bad.join("; ") })
}

fn degree_independence(tr: &mut Transcript, runs: &mut Vec<HiggsRun>) -> (bool, String) {
    let t0 = Instant::now();
    let (a, b) = match (higgs(2, 1, 2, 0), higgs(2, 1, 2, 1)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (false, e),
    };
    let (ea, eb) = (specialize_e(&a.class, 2), specialize_e(&b.class, 2));
    let same = ea == eb;
    tr.record(&a.label, &a.class);
    tr.record(&b.label, &b.class);
    let detail = if same { format!("E agrees, total degree {:?}", ea.total_degree()) } else { format!("d=0: {ea}; d=1: {eb}") };
    runs.push(a);
    runs.push(b);
    for (g, k, d) in [(0u32, 4u32, 0i64), (0, 4, 1)] {
        match higgs(g, k, 2, d) {
            Ok(r) => {
                tr.record(&r.label, &r.class);
                runs.push(r);
            }
            Err(e) => return (false, e),
        }
    }
    let dt = t0.elapsed();
    if dt > DEGREE_INDEP_BUDGET {
        return (false, format!("took {dt:?}"));
    }
    (same, detail)
}

fn dimension(tr: &mut Transcript, runs: &mut Vec<HiggsRun>) -> (bool, String) {
    let t0 = Instant::now();
    let mut notes = Vec::new();
    match higgs(2, 1, 3, 1) {
        Ok(r) => {
            tr.record(&r.label, &r.class);
            runs.push(r);
        }
        Err(e) => notes.push(format!("rank 3 failed: {e}")),
    }
    if t0.elapsed() > RANK3_BUDGET {
        notes.push("rank 3 out of desk scale".into());
    }
    let mut bad = Vec::new();
    for r in runs.iter() {
        let top = top_l_degree(r);
        if top != Some(2 * r.half_dimension) {
            bad.push(format!("{}: top {top:?}, 2N = {}", r.label, 2 * r.half_dimension));
        }
    }
    bad.extend(notes);
    (bad.is_empty(), if bad.is_empty() { format!("{} classes", runs.len()) } else { bad.join("; ") })
}

fn points_between(lo: &Q, hi: &Q) -> [Q; 2] {
    let w = hi - lo;
    [lo + &w / q(3), lo + &w * q(2) / q(3)]
}

/// Alternative rays reach the same answer, and the class is constant
/// strictly between consecutive walls.
fn walls(tr: &mut Transcript) -> (bool, String) {
    let t0 = Instant::now();
    let mut bad = Vec::new();
    let mut crossings = 0;
    for c in rank11_grid() {
        let t = c.chain();
        let e = Engine::new(CurveData::new(c.g, 1), EngineOptions::default());
        let alpha = higgs_alpha(1, c.g);
        let a = alpha_from(&alpha);
        let base = match e.chain_class(&t, &alpha) {
            Ok(x) => x,
            Err(err) => {
                bad.push(format!("{t}: {err}"));
                continue;
            }
        };
        let ray = e.choose_ray(&t, &a).expect("ray");
        for (scale, extra) in [(1i64, q(0)), (1, q(3)), (2, qr(5, 2)), (3, q(7))] {
            let alt = Ray { delta: ray.delta.iter().map(|d| d * scale).collect(), t_max: &ray.t_max + &extra };
            match e.cross_ray(&t, &a, &alt) {
                Ok(x) if x == base => {}
                Ok(x) => bad.push(format!("{t} ray {:?} to {}: {x} vs {base}", alt.delta, alt.t_max)),
                Err(err) => bad.push(format!("{t} ray {:?}: {err}", alt.delta)),
            }
        }
        let ws = e.find_walls(&t, &a, &ray).expect("walls");
        let mut cuts: Vec<Q> = ws.iter().map(Lex::re).collect();
        cuts.push(q(0));
        cuts.push(ray.t_max.clone());
        cuts.sort();
        cuts.dedup();
        crossings += ws.len();
        for pair in cuts.windows(2) {
            let [x, y] = points_between(&pair[0], &pair[1]);
            let at = |s: &Q| -> Vec<Q> { alpha.iter().zip(&ray.delta).map(|(a, d)| a + s * q(*d)).collect() };
            match (e.chain_class(&t, &at(&x)), e.chain_class(&t, &at(&y))) {
                (Ok(u), Ok(v)) if u == v => {}
                (Ok(u), Ok(v)) => bad.push(format!("{t} chamber ({}, {}): {u} vs {v}", pair[0], pair[1])),
                (Err(err), _) | (_, Err(err)) => bad.push(format!("{t} chamber ({}, {}): {err}", pair[0], pair[1])),
            }
        }
    }
    tr.record("wall crossings", crossings);
    let dt = t0.elapsed();
    if dt > WALLS_BUDGET {
        bad.push(format!("took {dt:?}"));
    }
    (bad.is_empty(), if bad.is_empty() { format!("{crossings} walls") } else { bad.join("; ") })
}

fn polynomiality(runs: &[HiggsRun]) -> (bool, String) {
    let bad: Vec<String> = runs.iter().filter(|r| !r.class.is_polynomial()).map(|r| r.label.clone()).collect();
    (bad.is_empty(), if bad.is_empty() { format!("{} classes", runs.len()) } else { bad.join("; ") })
}

fn suite() -> (Vec<Outcome>, String) {
    let mut tr = Transcript::default();
    let mut runs = Vec::new();
    let mut out = Vec::new();
    let mut step = |id, name, f: &mut dyn FnMut() -> (bool, String)| {
        let t0 = Instant::now();
        let (pass, detail) = f();
        out.push(Outcome { id, name, pass, detail, elapsed: t0.elapsed() });
    };
    step(1, "rank-1 closed form", &mut || rank1(&mut tr, &mut runs));
    step(2, "flag classes vs Gaussian counts", &mut || flags(&mut tr));
    step(3, "Euler characteristic duality", &mut || duality(&mut tr));
    step(4, "degree box vs window scan", &mut || degree_box(&mut tr));
    step(5, "rank-(1,1) chains vs oracle", &mut || rank11(&mut tr));
    step(6, "E-polynomial degree independence", &mut || degree_independence(&mut tr, &mut runs));
    step(7, "dimension from top L-degree", &mut || dimension(&mut tr, &mut runs));
    step(8, "ray independence and chamber constancy", &mut || walls(&mut tr));
    step(9, "polynomiality of Higgs classes", &mut || polynomiality(&runs));
    (out, tr.0)
}

fn main() -> ExitCode {
    let (mut outcomes, first) = suite();
    let t0 = Instant::now();
    let (_, second) = suite();
    let same = first == second;
    outcomes.push(Outcome {
        id: 10,
        name: "determinism across two runs",
        pass: same,
        detail: format!("{} bytes", first.len()),
        elapsed: t0.elapsed(),
    });
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {:<40} {:>10.3?}  {}", o.id, o.name, o.elapsed, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
