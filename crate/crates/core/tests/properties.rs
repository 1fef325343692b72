use proptest::prelude::*;

use parhiggs::chain::{
    alpha_from, chi_hom_rr, chi_skyscrapers, enumerate_degree_vectors, hn_types_at, necessary_conditions_with,
    Engine, EngineOptions,
};
use parhiggs::motive::{reduce_functional, specialize_e};
use parhiggs::num::{q, qr, Q};
use parhiggs::parabolic::{generic_datum, par_slope_alpha, ChainType, PointWeights, WeightDatum};
use parhiggs::{CurveData, MotiveClass};

fn atom(g: u32) -> impl Strategy<Value = MotiveClass> {
    let top = (2 * g as i64 - 2).max(0) as u32;
    prop_oneof![
        (0i64..4).prop_map(MotiveClass::l_pow),
        (1..=top.max(1)).prop_map(move |i| if top == 0 { MotiveClass::l() } else { MotiveClass::c_atom(i) }),
        Just(if g == 0 { MotiveClass::one() } else { MotiveClass::pic_atom() }),
        (-3i64..=3).prop_map(MotiveClass::int),
    ]
}

fn poly(g: u32) -> impl Strategy<Value = MotiveClass> {
    prop::collection::vec((atom(g), atom(g), -3i64..=3), 0..5).prop_map(|ts| {
        ts.iter().fold(MotiveClass::zero(), |acc, (a, b, c)| acc.add(&a.mul(b).scale(*c)))
    })
}

fn class() -> impl Strategy<Value = MotiveClass> {
    (poly(2), 0usize..3, 1i64..4).prop_map(|(p, n, a)| {
        let den = MotiveClass::l_pow_minus_one(a).pow(n as i64).unwrap();
        p.div(&den).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in class(), b in class(), c in class()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&MotiveClass::one()), a.clone());
    }

    #[test]
    fn canonical_round_trip(a in class()) {
        let s = a.canonical();
        let back = MotiveClass::parse(&s).unwrap();
        prop_assert_eq!(back.canonical(), s);
        prop_assert_eq!(back, a);
    }

    #[test]
    fn division_by_cyclotomic_units(a in class(), e in 1i64..5) {
        let u = MotiveClass::l_pow_minus_one(e);
        prop_assert_eq!(a.mul(&u).div(&u).unwrap(), a.clone());
        prop_assert_eq!(a.div(&u).unwrap().mul(&u), a);
    }

    #[test]
    fn functional_equation_keeps_e_polynomial(g in 1u32..4, a in poly(3)) {
        prop_assume!(a.max_c_index() <= (2 * g as usize).saturating_sub(2));
        prop_assert_eq!(specialize_e(&reduce_functional(&a, g), g), specialize_e(&a, g));
    }

    #[test]
    fn euler_duality(
        g in 0i64..4,
        k in 0usize..3,
        n in 1u32..4,
        n2 in 1u32..4,
        d in -6i64..7,
        d2 in -6i64..7,
        seed in prop::collection::vec((0i64..6, 0i64..6), 6),
    ) {
        let datum = |rank: u32, off: usize| {
            let pts = (0..k).map(|p| {
                let mut ws: Vec<Q> = (0..rank as usize).map(|i| {
                    let (a, b) = seed[(p * 3 + i + off) % seed.len()];
                    qr(a, 6 + b)
                }).collect();
                ws.sort();
                ws.dedup();
                let mut m = vec![1; ws.len()];
                *m.last_mut().unwrap() += rank - ws.len() as u32;
                PointWeights::new(ws, m)
            }).collect();
            WeightDatum::new(pts)
        };
        let (e, e2) = (datum(n, 0), datum(n2, 1));
        let (ni, n2i) = (n as i64, n2 as i64);
        let par = chi_hom_rr(n2i, d2, ni, d, g) - chi_skyscrapers(&e2, &e, true);
        let spar = chi_hom_rr(ni, d, n2i, d2 + n2i * (2 * g - 2 + k as i64), g) - chi_skyscrapers(&e, &e2, false);
        prop_assert_eq!(par, -spar);
    }

    #[test]
    fn box_matches_brute_force(
        shape in prop::sample::select(vec![vec![1u32, 1], vec![2, 1], vec![1, 2], vec![1, 1, 1]]),
        k in 0usize..3,
        gaps in prop::collection::vec(0i64..6, 2),
        total in -3i64..4,
    ) {
        let n: u32 = shape.iter().sum();
        let datum = generic_datum(n, k, n);
        let data = split(&datum, &shape);
        let mut alpha = vec![q(0)];
        for i in 1..shape.len() {
            alpha.push(&alpha[i - 1] + q(gaps[i - 1]));
        }
        let a = alpha_from(&alpha);
        let mut got = enumerate_degree_vectors(&shape, &data, total, &a, k as i64, true).unwrap();
        got.sort();
        let free = shape.len() - 1;
        let mut want = Vec::new();
        let w = 12i64;
        let mut x = vec![-w; free];
        'scan: loop {
            let mut d = x.clone();
            d.push(total - x.iter().sum::<i64>());
            if necessary_conditions_with(&ChainType::new(shape.clone(), d.clone(), data.clone()), &a, k as i64, true) {
                want.push(d);
            }
            for i in 0..=free {
                if i == free { break 'scan; }
                x[i] += 1;
                if x[i] <= w { break; }
                x[i] = -w;
            }
        }
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn hn_slopes_decrease(g in 0u32..3, d0 in -2i64..3, d1 in -2i64..3, top in 0i64..6) {
        let curve = CurveData::new(g, 1);
        let datum = generic_datum(3, 1, 3);
        let t = ChainType::new(vec![2, 1], vec![d0, d1], split(&datum, &[2, 1]));
        let a = alpha_from(&[q(0), q(top)]);
        let types = hn_types_at(&t, &a, None, (-6, 6), curve.k(), true).unwrap();
        for hn in types {
            let slopes: Vec<_> = hn.parts.iter().map(|p| par_slope_alpha(p, &a)).collect();
            prop_assert!(slopes.windows(2).all(|w| w[0] > w[1]), "{:?}", slopes);
            let amb = hn.ambient();
            prop_assert_eq!(&amb.ranks, &t.ranks);
            prop_assert_eq!(amb.total_degree(), t.total_degree());
        }
    }

    #[test]
    fn memo_is_pure(g in 0u32..3, ds in prop::collection::vec((-2i64..3, -2i64..3), 1..5)) {
        let curve = CurveData::new(g, 1);
        let datum = generic_datum(3, 1, 3);
        let data = split(&datum, &[1, 2]);
        let alpha = [q(0), q(2 * g as i64 - 2).max(q(1))];
        let shared = Engine::new(curve.clone(), EngineOptions::default());
        let mut fwd = Vec::new();
        for (a, b) in &ds {
            fwd.push(shared.chain_class(&ChainType::new(vec![1, 2], vec![*a, *b], data.clone()), &alpha).ok());
        }
        for (i, (a, b)) in ds.iter().enumerate().rev() {
            let fresh = Engine::new(curve.clone(), EngineOptions::default());
            let t = ChainType::new(vec![1, 2], vec![*a, *b], data.clone());
            prop_assert_eq!(fresh.chain_class(&t, &alpha).ok(), fwd[i].clone());
            prop_assert_eq!(shared.chain_class(&t, &alpha).ok(), fwd[i].clone());
        }
    }
}

fn split(d: &WeightDatum, ranks: &[u32]) -> Vec<WeightDatum> {
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
