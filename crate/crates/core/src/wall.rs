//! Wall-crossing along a ray in the chain stability parameter, from a
//! terminal regime (empty moduli or the constant-rank closed form) back to
//! the requested parameter.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use num_traits::{One, Zero};

use crate::chain::{
    hn_types_at, necessary_conditions_with, split_weight_sums, vector_compositions, Alpha, Engine,
};
use crate::error::{Error, Result};
use crate::motive::MotiveClass;
use crate::num::{ceil_i64, floor_i64, q, Lex, Q};
use crate::parabolic::{par_slope_alpha, ChainType};

/// Direction `delta` and endpoint `t_max` of a path `alpha + t delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub delta: Vec<i64>,
    pub t_max: Q,
}

impl Ray {
    pub fn point(&self, alpha: &[Lex], t: &Lex) -> Alpha {
        alpha.iter().zip(&self.delta).map(|(a, d)| a + &t.scale(&q(*d))).collect()
    }
}

fn hash_class(c: &MotiveClass) -> u64 {
    let mut h = DefaultHasher::new();
    c.canonical().hash(&mut h);
    h.finish()
}

impl Engine {
    /// Ray from `alpha` into a regime where the class is known outright.
    pub fn choose_ray(&self, t: &ChainType, alpha: &[Lex]) -> Result<Ray> {
        let r = t.r();
        let kk = self.k();
        let n: Vec<i64> = t.ranks.iter().map(|x| *x as i64).collect();
        let total: i64 = n.iter().sum();
        let mu = par_slope_alpha(t, alpha);
        let p = |i: usize| Lex::real(t.pardeg(i));
        let (delta, t_star) = if t.is_constant_rank() {
            let delta: Vec<i64> = (0..=r as i64).collect();
            let t_star = (1..=r)
                .map(|i| &Lex::int(t.degrees[i - 1] - t.degrees[i] + 2 * n[0] * kk) - &(&alpha[i] - &alpha[i - 1]))
                .max()
                .unwrap_or_else(Lex::zero);
            (delta, t_star)
        } else {
            let k = (0..r).rev().find(|i| n[*i] != n[r]).expect("non-constant ranks");
            if n[k + 1] < n[k] {
                let delta: Vec<i64> = (0..=r).map(|i| if i > k { 1 } else { 0 }).collect();
                let beta = Q::new(n[k + 1..].iter().sum::<i64>().into(), total.into());
                let bound = &(&(&p(k) - &p(k + 1)) + &Lex::int(kk * n[k + 1]))
                    .scale(&Q::new(One::one(), (n[k] - n[k + 1]).into()))
                    + &alpha[k];
                (delta, (&bound - &mu).scale(&(Q::one() / beta)))
            } else {
                let delta: Vec<i64> = (0..=r).map(|i| if i > k { 0 } else { -1 }).collect();
                let beta = Q::new(n[..=k].iter().sum::<i64>().into(), total.into());
                let bound = &(&(&p(k + 1) - &p(k)) - &Lex::int(n[k] * kk))
                    .scale(&Q::new(One::one(), (n[k + 1] - n[k]).into()))
                    + &alpha[k + 1];
                (delta, (&mu - &bound).scale(&(Q::one() / beta)))
            }
        };
        let mut t_max = t_star.re().max(Q::zero()) + Q::one();
        loop {
            let ray = Ray { delta: delta.clone(), t_max: t_max.clone() };
            let walls = self.candidate_walls(t, alpha, &ray)?;
            if !walls.contains(&Lex::real(t_max.clone())) {
                return Ok(ray);
            }
            t_max += Q::new(1.into(), 2.into());
        }
    }

    fn candidate_walls(&self, t: &ChainType, alpha: &[Lex], ray: &Ray) -> Result<BTreeSet<Lex>> {
        let total = t.total_rank() as i64;
        let mu = par_slope_alpha(t, alpha);
        let bn = Q::new(t.ranks.iter().zip(&ray.delta).map(|(a, b)| *a as i64 * b).sum::<i64>().into(), total.into());
        let tmax = Lex::real(ray.t_max.clone());
        let mut out = BTreeSet::new();
        for comp in vector_compositions(&t.ranks, 2).into_iter().filter(|c| c.len() == 2) {
            let sub = &comp[0];
            let ns: i64 = sub.iter().map(|x| *x as i64).sum();
            let b = Q::new(sub.iter().zip(&ray.delta).map(|(a, d)| *a as i64 * d).sum::<i64>().into(), ns.into()) - &bn;
            if b.is_zero() {
                continue;
            }
            let mut a_sub = Lex::zero();
            for (i, x) in sub.iter().enumerate() {
                a_sub = &a_sub + &alpha[i].scale(&q(*x as i64));
            }
            for w in split_weight_sums(&t.data, &comp)? {
                let c = &(&a_sub + &Lex::real(w)).scale(&Q::new(One::one(), ns.into())) - &mu;
                let at = |tt: &Q| -(q(ns) * (&b * tt + c.re()));
                let (e1, e2) = (at(&Q::zero()), at(&ray.t_max));
                let (lo, hi) = (floor_i64(&e1.clone().min(e2.clone())) - 1, ceil_i64(&e1.max(e2)) + 1);
                for e in lo..=hi {
                    let tw = (&Lex::real(Q::new(e.into(), ns.into())) + &c).scale(&(-Q::one() / &b));
                    if tw >= Lex::zero() && tw <= tmax {
                        out.insert(tw);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Walls on the ray in `(0, t_max)`, descending. A wall at `t = 0` is an error.
    pub fn find_walls(&self, t: &ChainType, alpha: &[Lex], ray: &Ray) -> Result<Vec<Lex>> {
        let walls = self.candidate_walls(t, alpha, ray)?;
        if walls.contains(&Lex::zero()) {
            return Err(Error::BaseWallHit(format!("type {t} sits on a wall at the ray start")));
        }
        let tmax = Lex::real(ray.t_max.clone());
        Ok(walls.into_iter().rev().filter(|w| *w != tmax).collect())
    }

    /// Class at `alpha` from the terminal class at `t_max` and the strata
    /// gained and lost at each wall.
    pub fn cross_ray(&self, t: &ChainType, alpha: &[Lex], ray: &Ray) -> Result<MotiveClass> {
        self.stats.borrow_mut().rays += 1;
        let top = ray.point(alpha, &Lex::real(ray.t_max.clone()));
        if !t.is_constant_rank() && necessary_conditions_with(t, &top, self.k(), self.opts.use_gap_condition) {
            return Err(Error::UnboundedSearch(format!("ray for {t} does not reach an empty chamber")));
        }
        let mut class = self.class_at(t, &top)?;
        for tc in self.find_walls(t, alpha, ray)? {
            let ac = ray.point(alpha, &tc);
            let level = ac.iter().map(Lex::depth).max().unwrap_or(0).max(1);
            let eps = Lex::eps(level);
            let plus = ray.point(&ac, &eps);
            let minus = ray.point(&ac, &(-&eps));
            let (sp, np) = self.wall_strata(t, &plus, &ac)?;
            let (sm, nm) = self.wall_strata(t, &minus, &ac)?;
            class = class.add(&sp).sub(&sm);
            self.stats.borrow_mut().walls += 1;
            if self.opts.trace_walls {
                self.trace.borrow_mut().push(format!(
                    "{t} t={tc} strata=+{np}/-{nm} hash={:016x}",
                    hash_class(&class)
                ));
            }
        }
        Ok(class)
    }

    /// Sum of the strata that destabilize just off the wall `alpha_c`, on the
    /// side `alpha`, with their number.
    fn wall_strata(&self, t: &ChainType, alpha: &[Lex], alpha_c: &[Lex]) -> Result<(MotiveClass, usize)> {
        let types = hn_types_at(t, alpha, Some(alpha_c), (0, 0), self.k(), self.opts.use_gap_condition)?;
        let mut acc = MotiveClass::zero();
        let mut count = 0;
        for hn in &types {
            let c = self.hn_stratum_class(hn, alpha)?;
            if !c.is_zero() {
                count += 1;
                self.stats.borrow_mut().strata += 1;
                acc = acc.add(&c);
            }
        }
        Ok((acc, count))
    }

    /// Public form of [`Engine::choose_ray`] for rational parameters.
    pub fn ray_for(&self, t: &ChainType, alpha: &[Q]) -> Result<Ray> {
        let a: Alpha = alpha.iter().cloned().map(Lex::real).collect();
        self.choose_ray(t, &a)
    }
}
