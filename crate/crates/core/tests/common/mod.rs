#![allow(dead_code)]

use ecs_core::series::{ratio, ExpKey, FormalSum, Rational};
use ecs_core::{Bar, Barcode};
use num_traits::{One, Zero};
use proptest::prelude::*;

pub fn q(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

pub fn bc(pairs: &[(i64, i64)]) -> Barcode {
    Barcode::from_pairs(pairs.iter().map(|&(a, l)| (q(a, 1), q(l, 1)))).unwrap()
}

pub fn xs(terms: &[(i64, i64)]) -> FormalSum {
    terms.iter().map(|&(c, a)| (ExpKey::x_pow(q(a, 1)), q(c, 1))).collect()
}

/// Rational in `[lo, hi]` with denominator 1..=4.
pub fn rational_in(lo: i64, hi: i64) -> impl Strategy<Value = Rational> {
    (1i64..=4).prop_flat_map(move |d| (lo * d..=hi * d).prop_map(move |n| q(n, d)))
}

/// Rational in `(0, hi]` with denominator 1..=4.
pub fn positive_rational(hi: i64) -> impl Strategy<Value = Rational> {
    (1i64..=4).prop_flat_map(move |d| (1..=hi * d).prop_map(move |n| q(n, d)))
}

/// Barcodes with up to `max_bars` bars, rational births in [-8, 8] and
/// lifespans in (0, 8], with duplicated bars and tied lifespans forced in
/// a good share of cases.
pub fn barcode_strategy(max_bars: usize) -> impl Strategy<Value = Barcode> {
    (
        prop::collection::vec((rational_in(-8, 8), positive_rational(8)), 0..=max_bars),
        any::<bool>(),
        any::<bool>(),
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
    )
        .prop_map(move |(mut pairs, dup, tie, i, j)| {
            if dup && !pairs.is_empty() && pairs.len() < max_bars {
                let b = pairs[i.index(pairs.len())].clone();
                pairs.push(b);
            }
            if tie && pairs.len() >= 2 {
                let (a, b) = (i.index(pairs.len()), j.index(pairs.len()));
                pairs[b].1 = pairs[a].1.clone();
            }
            Barcode::from_pairs(pairs).unwrap()
        })
}

/// All index subsets of the bars of the given size, by bitmask.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == p)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Brute-force exterior power: scan every subset, take the minimum lifespan
/// by direct comparison.
pub fn brute_exterior(f: &Barcode, p: usize) -> Vec<(Rational, Rational)> {
    let bars = f.bars();
    let mut out: Vec<(Rational, Rational)> = subsets(bars.len(), p)
        .into_iter()
        .map(|s| {
            let birth = s.iter().fold(Rational::zero(), |acc, &i| acc + bars[i].birth());
            let mut life = bars[s[0]].lifespan().clone();
            for &i in &s {
                if bars[i].lifespan() < &life {
                    life = bars[i].lifespan().clone();
                }
            }
            (birth, life)
        })
        .collect();
    out.sort_by(|a, b| (&a.1, &a.0).cmp(&(&b.1, &b.0)));
    out
}

pub fn pairs_of(f: &Barcode) -> Vec<(Rational, Rational)> {
    f.bars().iter().map(|b: &Bar| (b.birth().clone(), b.lifespan().clone())).collect()
}

/// Brute-force ECS from per-bar expansion of each power.
pub fn brute_ecs(f: &Barcode) -> FormalSum {
    let mut terms = Vec::new();
    for p in 1..=f.len() {
        for (birth, life) in brute_exterior(f, p) {
            let death = &birth + &life;
            terms.push((ExpKey::new(birth, Rational::zero(), p as u32), Rational::one()));
            terms.push((ExpKey::new(death, Rational::zero(), p as u32), -Rational::one()));
        }
    }
    terms.into_iter().collect()
}
