//! Barcodes as multisets of bars, the series attached to them, and their
//! tensor, symmetric and exterior powers.
//!
//! A bar is the monomial `x^α y^ℓ`: it is born at grade `α`, lives for `ℓ > 0`
//! and dies at `α + ℓ`. Bars are kept sorted by `(lifespan, birth)`, so the
//! first bar of any index combination has the smallest lifespan of the
//! combination.

use std::fmt;

use itertools::Itertools;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::series::{ExpKey, FormalSum, Indeterminate, Rational};

/// Default cap on the number of bars generated by a power or an ECS.
pub const DEFAULT_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BarcodeError {
    #[error("bar {index} (birth {birth}, lifespan {lifespan}) must have a positive lifespan")]
    NonPositiveLifespan {
        index: usize,
        birth: Box<Rational>,
        lifespan: Box<Rational>,
    },
    #[error("not a multiset: {0}")]
    NotMultiset(String),
    #[error("projected size {projected} exceeds the budget of {budget}")]
    BudgetExceeded { projected: u128, budget: usize },
}

/// One bar `x^birth y^lifespan`.
///
/// Field order makes the derived ordering `(lifespan, birth)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bar {
    lifespan: Rational,
    birth: Rational,
}

impl Bar {
    pub fn new(birth: Rational, lifespan: Rational) -> Result<Self, BarcodeError> {
        if !lifespan.is_positive() {
            return Err(BarcodeError::NonPositiveLifespan {
                index: 0,
                birth: Box::new(birth),
                lifespan: Box::new(lifespan),
            });
        }
        Ok(Bar { lifespan, birth })
    }

    pub fn birth(&self) -> &Rational {
        &self.birth
    }

    pub fn lifespan(&self) -> &Rational {
        &self.lifespan
    }

    pub fn death(&self) -> Rational {
        &self.birth + &self.lifespan
    }
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.birth, self.lifespan)
    }
}

/// Finite multiset of bars in canonical `(lifespan, birth)` order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Barcode {
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(mut bars: Vec<Bar>) -> Self {
        bars.sort();
        Barcode { bars }
    }

    pub fn empty() -> Self {
        Barcode::default()
    }

    /// Builds a barcode from `(birth, lifespan)` pairs, naming the first bad bar.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, BarcodeError>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let bars = pairs
            .into_iter()
            .enumerate()
            .map(|(index, (birth, lifespan))| {
                Bar::new(birth, lifespan).map_err(|e| match e {
                    BarcodeError::NonPositiveLifespan { birth, lifespan, .. } => {
                        BarcodeError::NonPositiveLifespan { index, birth, lifespan }
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Barcode::new(bars))
    }

    /// Bars of lifespan `lifespan` born at the grades of the multiset `births`.
    pub fn from_birth_series(births: &FormalSum, lifespan: &Rational) -> Result<Self, BarcodeError> {
        let grades = grade_multiset(births)?;
        let bars = grades
            .into_iter()
            .map(|birth| Bar::new(birth, lifespan.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Barcode::new(bars))
    }

    /// Reads `Σ x^α y^ℓ` with non-negative integer coefficients.
    pub fn from_series(f: &FormalSum) -> Result<Self, BarcodeError> {
        let mut bars = Vec::new();
        for (k, c) in f.iter() {
            let birth = k
                .x_scalar()
                .filter(|_| k.z() == 0)
                .ok_or_else(|| BarcodeError::NotMultiset(format!("term {k} is not a bar")))?;
            let mult = multiplicity(c, k)?;
            for _ in 0..mult {
                bars.push(Bar::new(birth.clone(), k.y().clone())?);
            }
        }
        Ok(Barcode::new(bars))
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Merges two barcodes as multisets.
    pub fn union(&self, other: &Barcode) -> Barcode {
        Barcode::new(self.bars.iter().chain(other.bars.iter()).cloned().collect())
    }

    /// `ε = Σ x^α y^ℓ`
    pub fn to_series(&self) -> FormalSum {
        self.bars
            .iter()
            .map(|b| (ExpKey::new(b.birth.clone(), b.lifespan.clone(), 0), Rational::one()))
            .collect()
    }

    /// `B(f) = Σ x^α`
    pub fn birth_series(&self) -> FormalSum {
        pure_x(self.bars.iter().map(|b| b.birth.clone()))
    }

    /// `D(f) = Σ x^(α+ℓ)`
    pub fn death_series(&self) -> FormalSum {
        pure_x(self.bars.iter().map(Bar::death))
    }

    /// `C(f) = B(f) - D(f)`
    pub fn critical_series(&self) -> FormalSum {
        &self.birth_series() - &self.death_series()
    }

    /// `L(f) = Σ x^ℓ`
    pub fn lifespan_series(&self) -> FormalSum {
        pure_x(self.bars.iter().map(|b| b.lifespan.clone()))
    }

    /// Sum of the birth grades.
    pub fn drift(&self) -> Rational {
        self.bars.iter().fold(Rational::zero(), |acc, b| acc + &b.birth)
    }

    pub fn exterior_power(&self, p: usize) -> Result<Barcode, BarcodeError> {
        self.exterior_power_within(p, DEFAULT_BUDGET)
    }

    /// One bar per strictly increasing index tuple: births add, lifespans take the minimum.
    pub fn exterior_power_within(&self, p: usize, budget: usize) -> Result<Barcode, BarcodeError> {
        assert!(p >= 1, "the zeroth power is the formal unit, not a barcode");
        check_budget(binomial(self.len() as u128, p as u128), budget)?;
        let mut bars = Vec::new();
        for_each_combination(&self.bars, p, &mut |birth, first| {
            bars.push(Bar { lifespan: first.lifespan.clone(), birth });
        });
        Ok(Barcode::new(bars))
    }

    pub fn symmetric_power(&self, p: usize) -> Result<Barcode, BarcodeError> {
        self.symmetric_power_within(p, DEFAULT_BUDGET)
    }

    /// One bar per weakly increasing index tuple.
    pub fn symmetric_power_within(&self, p: usize, budget: usize) -> Result<Barcode, BarcodeError> {
        assert!(p >= 1, "the zeroth power is the formal unit, not a barcode");
        let n = self.len() as u128;
        let projected = if n == 0 { 0 } else { binomial(n + p as u128 - 1, p as u128) };
        check_budget(projected, budget)?;
        let bars = self
            .bars
            .iter()
            .combinations_with_replacement(p)
            .map(|combo| combine(&combo))
            .collect();
        Ok(Barcode::new(bars))
    }

    pub fn tensor_power(&self, p: usize) -> Result<Barcode, BarcodeError> {
        self.tensor_power_within(p, DEFAULT_BUDGET)
    }

    /// One bar per index tuple.
    pub fn tensor_power_within(&self, p: usize, budget: usize) -> Result<Barcode, BarcodeError> {
        assert!(p >= 1, "the zeroth power is the formal unit, not a barcode");
        let projected = (self.len() as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
        check_budget(projected, budget)?;
        let bars = (0..p)
            .map(|_| self.bars.iter())
            .multi_cartesian_product()
            .map(|tuple| combine(&tuple))
            .collect();
        Ok(Barcode::new(bars))
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.bars.iter().join(","))
    }
}

fn combine(bars: &[&Bar]) -> Bar {
    let birth = bars.iter().fold(Rational::zero(), |acc, b| acc + &b.birth);
    let lifespan = bars.iter().map(|b| &b.lifespan).min().expect("p >= 1").clone();
    Bar { lifespan, birth }
}

fn pure_x<I: Iterator<Item = Rational>>(exps: I) -> FormalSum {
    exps.map(|a| (ExpKey::x_pow(a), Rational::one())).collect()
}

fn multiplicity(c: &Rational, k: &ExpKey) -> Result<usize, BarcodeError> {
    if !c.is_integer() || c.is_negative() {
        return Err(BarcodeError::NotMultiset(format!("coefficient {c} of {k}")));
    }
    c.to_integer()
        .to_usize()
        .ok_or_else(|| BarcodeError::NotMultiset(format!("coefficient {c} of {k} is too large")))
}

/// Expands a pure-`x` multiset `Σ c·x^a` into its grades, each repeated `c` times.
pub fn grade_multiset(b: &FormalSum) -> Result<Vec<Rational>, BarcodeError> {
    let mut out = Vec::new();
    for (k, c) in b.iter() {
        let a = k
            .x_scalar()
            .filter(|_| k.y().is_zero() && k.z() == 0)
            .ok_or_else(|| BarcodeError::NotMultiset(format!("term {k} is not pure in x")))?;
        let mult = multiplicity(c, k)?;
        out.extend(std::iter::repeat_n(a, mult));
    }
    Ok(out)
}

/// `(Σ x^αi)^∧p = Σ_{i1<…<ip} x^(αi1+…+αip)`, with `B^∧0 = 1`.
pub fn series_exterior_power(b: &FormalSum, p: usize) -> Result<FormalSum, BarcodeError> {
    series_exterior_power_within(b, p, DEFAULT_BUDGET)
}

pub fn series_exterior_power_within(
    b: &FormalSum,
    p: usize,
    budget: usize,
) -> Result<FormalSum, BarcodeError> {
    let grades = grade_multiset(b)?;
    if p == 0 {
        return Ok(FormalSum::one());
    }
    check_budget(binomial(grades.len() as u128, p as u128), budget)?;
    let mut out = FormalSum::zero();
    for_each_combination(&grades, p, &mut |sum, _| {
        out.add_term(ExpKey::x_pow(sum), Rational::one());
    });
    Ok(out)
}

/// Exterior critical series `Σ_{p≥1} C(f^∧p) z^p`, truncated at `p_max`.
pub fn ecs(f: &Barcode, p_max: Option<usize>) -> Result<FormalSum, BarcodeError> {
    ecs_within(f, p_max, DEFAULT_BUDGET)
}

pub fn ecs_within(f: &Barcode, p_max: Option<usize>, budget: usize) -> Result<FormalSum, BarcodeError> {
    let n = f.len();
    let top = p_max.map_or(n, |m| m.min(n));
    let projected = (1..=top).fold(0u128, |acc, p| {
        acc.saturating_add(binomial(n as u128, p as u128))
    });
    check_budget(projected, budget)?;

    let powers: Vec<FormalSum> = (1..=top)
        .into_par_iter()
        .map(|p| {
            let mut c = FormalSum::zero();
            let zk = ExpKey::new(Rational::zero(), Rational::zero(), p as u32);
            for_each_combination(&f.bars, p, &mut |birth, first| {
                let death = &birth + &first.lifespan;
                c.add_term(&ExpKey::x_pow(birth) + &zk, Rational::one());
                c.add_term(&ExpKey::x_pow(death) + &zk, -Rational::one());
            });
            c
        })
        .collect();

    let mut out = FormalSum::zero();
    for c in powers {
        for (k, v) in c.iter() {
            out.add_term(k.clone(), v.clone());
        }
    }
    Ok(out)
}

/// Number of bars, read off as `f|_{(x,y)=(1,1)}`.
pub fn bar_count(f: &Barcode) -> Rational {
    f.to_series()
        .substitute_one(Indeterminate::X)
        .substitute_one(Indeterminate::Y)
        .coeff(&ExpKey::unit())
}

trait Graded {
    fn grade(&self) -> &Rational;
}

impl Graded for Bar {
    fn grade(&self) -> &Rational {
        &self.birth
    }
}

impl Graded for Rational {
    fn grade(&self) -> &Rational {
        self
    }
}

/// Visits every size-`p` index combination `i1 < … < ip`, passing the summed
/// grade and the item at `i1`.
fn for_each_combination<T: Graded>(items: &[T], p: usize, visit: &mut dyn FnMut(Rational, &T)) {
    fn walk<T: Graded>(
        items: &[T],
        start: usize,
        left: usize,
        acc: &Rational,
        first: Option<&T>,
        visit: &mut dyn FnMut(Rational, &T),
    ) {
        if left == 0 {
            visit(acc.clone(), first.expect("p >= 1"));
            return;
        }
        for i in start..=items.len() - left {
            let next = acc + items[i].grade();
            walk(items, i + 1, left - 1, &next, first.or(Some(&items[i])), visit);
        }
    }
    if p == 0 || p > items.len() {
        return;
    }
    walk(items, 0, p, &Rational::zero(), None, visit);
}

fn check_budget(projected: u128, budget: usize) -> Result<(), BarcodeError> {
    if projected > budget as u128 {
        Err(BarcodeError::BudgetExceeded { projected, budget })
    } else {
        Ok(())
    }
}

/// `C(n, k)` saturating at `u128::MAX`.
pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn bc(pairs: &[(i64, i64)]) -> Barcode {
        Barcode::from_pairs(pairs.iter().map(|&(a, l)| (rat(a), rat(l)))).unwrap()
    }

    fn xs(terms: &[(i64, i64)]) -> FormalSum {
        terms
            .iter()
            .map(|&(c, a)| (ExpKey::x_pow(rat(a)), rat(c)))
            .collect()
    }

    #[test]
    fn canonical_order_is_lifespan_then_birth() {
        let f = bc(&[(1, 3), (2, 1), (0, 1)]);
        assert_eq!(f.to_string(), "{(0,1),(2,1),(1,3)}");
    }

    #[test]
    fn rejects_non_positive_lifespan() {
        let err = Barcode::from_pairs([(rat(0), rat(1)), (rat(2), rat(0))]).unwrap_err();
        assert!(matches!(err, BarcodeError::NonPositiveLifespan { index: 1, .. }));
        assert!(Bar::new(rat(0), rat(-1)).is_err());
    }

    #[test]
    fn empty_series_and_drift() {
        let f = Barcode::empty();
        assert!(f.birth_series().is_zero());
        assert!(f.death_series().is_zero());
        assert!(f.critical_series().is_zero());
        assert!(f.lifespan_series().is_zero());
        assert_eq!(f.drift(), rat(0));
        assert!(ecs(&f, None).unwrap().is_zero());
    }

    #[test]
    fn drift_examples() {
        assert_eq!(bc(&[(0, 1), (1, 2)]).drift(), rat(1));
        assert_eq!(bc(&[(0, 1), (2, 1), (1, 3)]).drift(), rat(3));
    }

    #[test]
    fn exterior_power_past_bar_count_is_empty() {
        let f = bc(&[(0, 1), (1, 2)]);
        assert!(f.exterior_power(3).unwrap().is_empty());
    }

    #[test]
    fn symmetric_power_of_single_bar() {
        assert_eq!(bc(&[(0, 1)]).symmetric_power(2).unwrap(), bc(&[(0, 1)]));
    }

    #[test]
    fn series_exterior_power_examples() {
        assert_eq!(series_exterior_power(&xs(&[(1, 0), (1, 1)]), 2).unwrap(), xs(&[(1, 1)]));
        assert_eq!(series_exterior_power(&xs(&[(1, 0), (1, 1)]), 0).unwrap(), FormalSum::one());
        assert_eq!(series_exterior_power(&FormalSum::zero(), 0).unwrap(), FormalSum::one());
        let doubled = xs(&[(2, 1)]);
        assert_eq!(series_exterior_power(&doubled, 2).unwrap(), xs(&[(1, 2)]));
    }

    #[test]
    fn series_exterior_power_rejects_non_multisets() {
        assert!(matches!(
            series_exterior_power(&xs(&[(-1, 0)]), 1),
            Err(BarcodeError::NotMultiset(_))
        ));
        let half = FormalSum::monomial(ExpKey::x_pow(rat(0)), crate::series::ratio(1, 2));
        assert!(series_exterior_power(&half, 1).is_err());
        assert!(series_exterior_power(&FormalSum::y_pow(rat(1)), 1).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let f = bc(&(0..24).map(|i| (i, 1)).collect::<Vec<_>>());
        assert!(matches!(ecs(&f, None), Err(BarcodeError::BudgetExceeded { .. })));
        assert!(ecs(&f, Some(2)).is_ok());
        assert!(f.tensor_power_within(3, 1000).is_err());
        assert!(f.exterior_power_within(12, 1000).is_err());
    }

    #[test]
    fn series_round_trip_through_epsilon() {
        let f = bc(&[(0, 1), (2, 1), (1, 3), (1, 3)]);
        assert_eq!(Barcode::from_series(&f.to_series()).unwrap(), f);
        assert_eq!(bar_count(&f), rat(4));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(0, 0), 1);
    }
}
