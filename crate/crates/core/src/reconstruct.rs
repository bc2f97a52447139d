//! Inverse of the exterior critical series: rebuilds a barcode exactly from
//! `Σ_p C(f^∧p) z^p`.
//!
//! The pipeline reads off the bar count, solves the moment system for the
//! sorted lifespans, recovers the drift from the top power, reconstructs the
//! birth series from `f^∧(n-1)`, and then peels off the bars of least lifespan
//! one lifespan class at a time. Every division and monomial extraction is
//! checked, and the final answer is re-expanded and compared against the
//! input, so anything outside the image of the map comes back as
//! [`ReconstructError::Malformed`] rather than a wrong barcode.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::barcode::{
    ecs_within, series_exterior_power_within, Barcode, BarcodeError, DEFAULT_BUDGET,
};
use crate::series::{rat, ExpKey, FormalSum, Rational, SeriesError};

/// Pipeline step at which an input was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    BarCount,
    Lifespans,
    Drift,
    BirthSeries,
    SingleLifespan,
    TwoLifespans,
    Split,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Input => "input",
            Stage::BarCount => "bar count",
            Stage::Lifespans => "lifespans",
            Stage::Drift => "drift",
            Stage::BirthSeries => "birth series",
            Stage::SingleLifespan => "single lifespan",
            Stage::TwoLifespans => "two lifespans",
            Stage::Split => "lifespan split",
            Stage::Verify => "verification",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("malformed exterior critical series at stage '{stage}': {detail}")]
    Malformed { stage: Stage, detail: String },
    #[error("{0}")]
    Budget(BarcodeError),
}

fn malformed(stage: Stage, detail: impl Into<String>) -> ReconstructError {
    ReconstructError::Malformed { stage, detail: detail.into() }
}

fn series_err(stage: Stage) -> impl Fn(SeriesError) -> ReconstructError {
    move |e| malformed(stage, e.to_string())
}

fn barcode_err(stage: Stage) -> impl Fn(BarcodeError) -> ReconstructError {
    move |e| match e {
        BarcodeError::BudgetExceeded { .. } => ReconstructError::Budget(e),
        other => malformed(stage, other.to_string()),
    }
}

/// Critical series of each exterior power, `C_p` for `p = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcsView {
    powers: Vec<FormalSum>,
}

impl EcsView {
    /// Splits an ECS by powers of `z`, checking it only uses `x` and `z^p` with
    /// `p ≥ 1` and has integer coefficients.
    pub fn from_series(e: &FormalSum) -> Result<Self, ReconstructError> {
        for (k, c) in e.iter() {
            if k.x_scalar().is_none() || !k.y().is_zero() {
                return Err(malformed(Stage::Input, format!("term {k} is not of the form x^a z^p")));
            }
            if k.z() == 0 {
                return Err(malformed(Stage::Input, format!("term {k} has no power of z")));
            }
            if !c.is_integer() {
                return Err(malformed(Stage::Input, format!("coefficient {c} of {k} is not an integer")));
            }
        }
        let top = e.max_z();
        Ok(EcsView {
            powers: (1..=top).map(|p| e.z_slice(p)).collect(),
        })
    }

    /// View over explicitly given per-power critical series.
    pub fn from_powers(powers: Vec<FormalSum>) -> Result<Self, ReconstructError> {
        for (i, c) in powers.iter().enumerate() {
            if !c.is_pure_x() || !c.has_integer_coefficients() {
                return Err(malformed(
                    Stage::Input,
                    format!("C_{} must be a pure x series with integer coefficients", i + 1),
                ));
            }
        }
        Ok(EcsView { powers })
    }

    /// `C_p`, zero beyond the stored powers. `p` starts at 1.
    pub fn power(&self, p: usize) -> &FormalSum {
        static ZERO: std::sync::OnceLock<FormalSum> = std::sync::OnceLock::new();
        assert!(p >= 1, "powers start at 1");
        self.powers.get(p - 1).unwrap_or_else(|| ZERO.get_or_init(FormalSum::zero))
    }

    pub fn stored_powers(&self) -> usize {
        self.powers.len()
    }
}

/// Largest `p` with `C_p ≠ 0`; every lower power must be nonzero too.
pub fn count_bars(view: &EcsView) -> Result<usize, ReconstructError> {
    let n = view.powers.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
    if let Some(gap) = (1..n).find(|&p| view.power(p).is_zero()) {
        return Err(malformed(
            Stage::BarCount,
            format!("C_{gap} vanishes below the nonzero C_{n}"),
        ));
    }
    Ok(n)
}

fn binom(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    Rational::from_integer(num_integer::binomial(BigInt::from(n), BigInt::from(k)))
}

/// Sorted lifespans from the moment system
/// `ℓ_i = -μ(C_{n-i+1}) - Σ_{j<i} C(n-j, n-i) ℓ_j`.
pub fn lifespans(view: &EcsView, n: usize) -> Result<Vec<Rational>, ReconstructError> {
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    for i in 1..=n {
        let mu = view.power(n - i + 1).moment().map_err(series_err(Stage::Lifespans))?;
        let mut l = -mu;
        for (j, lj) in out.iter().enumerate() {
            l -= binom(n - (j + 1), n - i) * lj;
        }
        if !l.is_positive() {
            return Err(malformed(Stage::Lifespans, format!("recovered lifespan l_{i} = {l} is not positive")));
        }
        if let Some(prev) = out.last() {
            if &l < prev {
                return Err(malformed(Stage::Lifespans, format!("recovered lifespans are not ascending at l_{i} = {l}")));
            }
        }
        out.push(l);
    }
    Ok(out)
}

/// Drift of `f` from its top power: `C_n / (1 - x^ℓ1)` must be `x^Δ`.
pub fn top_drift(top: &FormalSum, shortest: &Rational) -> Result<Rational, ReconstructError> {
    if top.is_zero() {
        return Err(malformed(Stage::Drift, "top power is zero"));
    }
    let q = top
        .divide_exact(&FormalSum::one_minus_x_pow(shortest.clone()))
        .map_err(series_err(Stage::Drift))?;
    let key = q.monomial_exponent().map_err(series_err(Stage::Drift))?;
    key.x_scalar()
        .filter(|_| key.y().is_zero() && key.z() == 0)
        .ok_or_else(|| malformed(Stage::Drift, format!("quotient {q} is not a power of x")))
}

/// `Δ(f^∧p) = C(n-1, p-1) Δ(f)`.
pub fn power_drift(drift: &Rational, n: usize, p: usize) -> Rational {
    assert!(1 <= p && p <= n, "power out of range");
    binom(n - 1, p - 1) * drift
}

/// Barcode whose bars all have lifespan `lifespan`: `B = C / (1 - x^ℓ)`.
pub fn solve_single(c: &FormalSum, lifespan: &Rational) -> Result<Barcode, ReconstructError> {
    let births = c
        .divide_exact(&FormalSum::one_minus_x_pow(lifespan.clone()))
        .map_err(series_err(Stage::SingleLifespan))?;
    Barcode::from_birth_series(&births, lifespan).map_err(barcode_err(Stage::SingleLifespan))
}

/// Barcode of `n` bars where one has lifespan `outlier` and the rest have
/// `lifespan`, given its critical series and drift.
///
/// The outlier's birth solves the second-moment identity
/// `μ(xC') = 2α(ℓ-ℓ̃) + (ℓ+ℓ̃)(ℓ-ℓ̃) - 2ℓΔ - nℓ²`.
pub fn solve_two(
    c: &FormalSum,
    lifespan: &Rational,
    outlier: &Rational,
    drift: &Rational,
    n: usize,
) -> Result<Barcode, ReconstructError> {
    if n < 2 {
        return Err(malformed(Stage::TwoLifespans, "an outlier split needs at least two bars"));
    }
    if lifespan == outlier {
        return Err(malformed(Stage::TwoLifespans, "outlier lifespan equals the common lifespan"));
    }
    let s2 = c.second_moment().map_err(series_err(Stage::TwoLifespans))?;
    let gap = lifespan - outlier;
    let count = rat(n as i64);
    let numer = s2 - (lifespan + outlier) * &gap
        + rat(2) * lifespan * drift
        + count * lifespan * lifespan;
    let birth = numer / (rat(2) * gap);

    let outlier_c = &FormalSum::x_pow(birth.clone()) - &FormalSum::x_pow(&birth + outlier);
    let rest = solve_single(&(c - &outlier_c), lifespan)?;
    if rest.len() != n - 1 {
        return Err(malformed(
            Stage::TwoLifespans,
            format!("expected {} bars of lifespan {lifespan}, found {}", n - 1, rest.len()),
        ));
    }
    let outlier_bar = Barcode::from_pairs([(birth, outlier.clone())])
        .map_err(barcode_err(Stage::TwoLifespans))?;
    let f = rest.union(&outlier_bar);
    if &f.critical_series() != c || &f.drift() != drift {
        return Err(malformed(Stage::TwoLifespans, "re-expansion does not match"));
    }
    Ok(f)
}

/// `B(f) = x^Δ · B(f^∧(n-1))|_{1/x}`, with `f^∧(n-1)` recovered as a
/// one-outlier barcode (or a single-lifespan one when `ℓ1 = ℓ2`).
pub fn birth_series_of(
    view: &EcsView,
    n: usize,
    lifespans: &[Rational],
    drift: &Rational,
) -> Result<FormalSum, ReconstructError> {
    assert!(n >= 1 && lifespans.len() == n, "need n >= 1 sorted lifespans");
    if n == 1 {
        return Ok(FormalSum::x_pow(drift.clone()));
    }
    let c = view.power(n - 1);
    let cofacets = if lifespans[0] == lifespans[1] {
        solve_single(c, &lifespans[0])?
    } else {
        solve_two(c, &lifespans[0], &lifespans[1], &power_drift(drift, n, n - 1), n)?
    };
    if cofacets.len() != n {
        return Err(malformed(Stage::BirthSeries, format!("f^(n-1) should have {n} bars, found {}", cofacets.len())));
    }
    Ok(&FormalSum::x_pow(drift.clone()) * &cofacets.birth_series().invert_x())
}

/// Rebuilds the barcode whose exterior critical series is `e`.
pub fn reconstruct(e: &FormalSum) -> Result<Barcode, ReconstructError> {
    reconstruct_within(e, DEFAULT_BUDGET)
}

/// As [`reconstruct`], capping every intermediate power at `budget` terms.
pub fn reconstruct_within(e: &FormalSum, budget: usize) -> Result<Barcode, ReconstructError> {
    let view = EcsView::from_series(e)?;
    let f = reconstruct_view(&view, budget)?;
    let again = ecs_within(&f, None, budget).map_err(barcode_err(Stage::Verify))?;
    if &again != e {
        return Err(malformed(Stage::Verify, format!("candidate {f} does not re-expand to the input")));
    }
    Ok(f)
}

/// Reconstruction without the final re-expansion check.
pub fn reconstruct_view(view: &EcsView, budget: usize) -> Result<Barcode, ReconstructError> {
    let n = count_bars(view)?;
    if n == 0 {
        return Ok(Barcode::empty());
    }
    let ls = lifespans(view, n)?;
    let drift = top_drift(view.power(n), &ls[0])?;
    let births = birth_series_of(view, n, &ls, &drift)?;

    let shortest = &ls[0];
    let m = ls.iter().take_while(|l| *l == shortest).count();
    if m == n {
        return solve_single(view.power(1), shortest);
    }

    // f^∧(n-m) has exactly one bar that avoids the m shortest: lifespan ℓ_{m+1}.
    let k = n - m;
    let next = &ls[m];
    let ext = |b: &FormalSum, p: usize| {
        series_exterior_power_within(b, p, budget).map_err(barcode_err(Stage::Split))
    };
    let top_tail = solve_two(
        view.power(k),
        shortest,
        next,
        &power_drift(&drift, n, k),
        binom(n, k)
            .to_integer()
            .to_usize()
            .ok_or_else(|| malformed(Stage::Split, "too many bars"))?,
    )?;
    let births_k = ext(&births, k)?;
    let outlier_part = &top_tail.to_series() - &(&FormalSum::y_pow(shortest.clone()) * &births_k);
    let y_gap = &FormalSum::y_pow(next.clone()) - &FormalSum::y_pow(shortest.clone());
    let tail_drift = outlier_part
        .divide_exact(&y_gap)
        .and_then(|q| q.monomial_exponent())
        .ok()
        .filter(|key| key.y().is_zero() && key.z() == 0)
        .and_then(|key| key.x_scalar())
        .ok_or_else(|| malformed(Stage::Split, "tail drift is not a clean monomial"))?;

    let (short_births, tail) = if m == n - 1 {
        let tail = Barcode::from_pairs([(tail_drift.clone(), ls[n - 1].clone())])
            .map_err(barcode_err(Stage::Split))?;
        (&births - &FormalSum::x_pow(tail_drift), tail)
    } else {
        // g: bars of f^∧(k-1) avoiding the shortest class, shortened by ℓ.
        let births_km1 = ext(&births, k - 1)?;
        let shifted = view.power(k - 1) - &(&births_km1 * &FormalSum::one_minus_x_pow(shortest.clone()));
        let g_critical = shifted.shift(&ExpKey::x_pow(-shortest), &rat(1));
        let common = next - shortest;
        let odd = &ls[m + 1] - shortest;
        let g = if common == odd {
            solve_single(&g_critical, &common)?
        } else {
            solve_two(&g_critical, &common, &odd, &(rat(k as i64 - 1) * &tail_drift), k)?
        };
        let short_births = &births - &(&FormalSum::x_pow(tail_drift) * &g.birth_series().invert_x());
        let tail_births = &births - &short_births;
        let mut sub = Vec::with_capacity(k);
        for p in 1..=k {
            let mut mixed = FormalSum::zero();
            for i in 1..=p {
                mixed = &mixed + &(&ext(&short_births, i)? * &ext(&tail_births, p - i)?);
            }
            let one_minus = FormalSum::one_minus_x_pow(shortest.clone());
            sub.push(view.power(p) - &(&one_minus * &mixed));
        }
        let tail = reconstruct_view(&EcsView::from_powers(sub)?, budget)?;
        (short_births, tail)
    };

    let short = Barcode::from_birth_series(&short_births, shortest).map_err(barcode_err(Stage::Split))?;
    if short.len() != m || tail.len() != k {
        return Err(malformed(
            Stage::Split,
            format!("split into {} + {} bars, expected {m} + {k}", short.len(), tail.len()),
        ));
    }
    Ok(short.union(&tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcode::ecs;

    fn bc(pairs: &[(i64, i64)]) -> Barcode {
        Barcode::from_pairs(pairs.iter().map(|&(a, l)| (rat(a), rat(l)))).unwrap()
    }

    fn xs(terms: &[(i64, i64)]) -> FormalSum {
        terms
            .iter()
            .map(|&(c, a)| (ExpKey::x_pow(rat(a)), rat(c)))
            .collect()
    }

    fn view_of(f: &Barcode) -> EcsView {
        EcsView::from_series(&ecs(f, None).unwrap()).unwrap()
    }

    #[test]
    fn count_bars_examples() {
        assert_eq!(count_bars(&view_of(&bc(&[(0, 1), (1, 2)]))).unwrap(), 2);
        assert_eq!(count_bars(&view_of(&bc(&[(0, 1), (2, 1), (1, 3)]))).unwrap(), 3);
        assert_eq!(count_bars(&EcsView::from_series(&FormalSum::zero()).unwrap()).unwrap(), 0);
    }

    #[test]
    fn count_bars_rejects_gaps() {
        let e = &xs(&[(1, 0), (-1, 1)]) * &FormalSum::z_pow(2);
        let err = count_bars(&EcsView::from_series(&e).unwrap()).unwrap_err();
        assert!(matches!(err, ReconstructError::Malformed { stage: Stage::BarCount, .. }));
    }

    #[test]
    fn lifespan_examples() {
        let f = bc(&[(0, 1), (1, 2)]);
        assert_eq!(lifespans(&view_of(&f), 2).unwrap(), vec![rat(1), rat(2)]);
        let f = bc(&[(0, 1), (2, 1), (1, 3)]);
        assert_eq!(lifespans(&view_of(&f), 3).unwrap(), vec![rat(1), rat(1), rat(3)]);
        let single = Barcode::from_pairs([(crate::series::ratio(-7, 3), crate::series::ratio(5, 2))]).unwrap();
        assert_eq!(lifespans(&view_of(&single), 1).unwrap(), vec![crate::series::ratio(5, 2)]);
    }

    #[test]
    fn lifespans_reject_non_positive() {
        // C_1 = x - 1 has moment +1, which would need a negative lifespan.
        let e = &xs(&[(1, 1), (-1, 0)]) * &FormalSum::z_pow(1);
        let err = lifespans(&EcsView::from_series(&e).unwrap(), 1).unwrap_err();
        assert!(matches!(err, ReconstructError::Malformed { stage: Stage::Lifespans, .. }));
    }

    #[test]
    fn top_drift_examples() {
        assert_eq!(top_drift(&xs(&[(1, 1), (-1, 2)]), &rat(1)).unwrap(), rat(1));
        assert_eq!(top_drift(&xs(&[(1, 3), (-1, 4)]), &rat(1)).unwrap(), rat(3));
        assert_eq!(top_drift(&xs(&[(1, -4), (-1, 1)]), &rat(5)).unwrap(), rat(-4));
        assert!(top_drift(&xs(&[(2, 3), (-2, 4)]), &rat(1)).is_err());
        assert!(top_drift(&FormalSum::zero(), &rat(1)).is_err());
    }

    #[test]
    fn power_drift_examples() {
        assert_eq!(power_drift(&rat(3), 3, 2), rat(6));
        assert_eq!(power_drift(&rat(3), 5, 5), rat(3));
        assert_eq!(power_drift(&rat(3), 5, 1), rat(3));
    }

    #[test]
    fn solve_single_examples() {
        let c = xs(&[(1, 0), (1, 2), (-1, 1), (-1, 3)]);
        assert_eq!(solve_single(&c, &rat(1)).unwrap(), bc(&[(0, 1), (2, 1)]));
        let c = xs(&[(1, 1), (-1, 4)]);
        assert_eq!(solve_single(&c, &rat(1)).unwrap(), bc(&[(1, 1), (2, 1), (3, 1)]));
        assert_eq!(solve_single(&FormalSum::zero(), &rat(7)).unwrap(), Barcode::empty());
    }

    #[test]
    fn solve_single_rejects_negative_multiplicity() {
        let c = xs(&[(-1, 0), (1, 1)]);
        assert!(solve_single(&c, &rat(1)).is_err());
        assert!(solve_single(&xs(&[(1, 0)]), &rat(1)).is_err());
    }

    #[test]
    fn solve_two_examples() {
        let f = bc(&[(0, 1), (2, 1), (1, 3)]);
        assert_eq!(solve_two(&f.critical_series(), &rat(1), &rat(3), &rat(3), 3).unwrap(), f);
        let f = bc(&[(0, 2), (5, 7)]);
        assert_eq!(solve_two(&f.critical_series(), &rat(2), &rat(7), &rat(5), 2).unwrap(), f);
    }

    #[test]
    fn solve_two_rejects_degenerate_input() {
        let f = bc(&[(0, 2)]);
        assert!(solve_two(&f.critical_series(), &rat(1), &rat(2), &rat(0), 1).is_err());
        assert!(solve_two(&f.critical_series(), &rat(2), &rat(2), &rat(0), 2).is_err());
    }

    #[test]
    fn birth_series_examples() {
        let f = bc(&[(0, 1), (2, 1), (1, 3)]);
        let v = view_of(&f);
        let b = birth_series_of(&v, 3, &[rat(1), rat(1), rat(3)], &rat(3)).unwrap();
        assert_eq!(b, xs(&[(1, 0), (1, 1), (1, 2)]));

        let f = bc(&[(0, 1), (1, 2)]);
        let b = birth_series_of(&view_of(&f), 2, &[rat(1), rat(2)], &rat(1)).unwrap();
        assert_eq!(b, xs(&[(1, 0), (1, 1)]));

        let f = bc(&[(4, 2)]);
        let b = birth_series_of(&view_of(&f), 1, &[rat(2)], &rat(4)).unwrap();
        assert_eq!(b, xs(&[(1, 4)]));
    }

    #[test]
    fn reconstruct_examples() {
        for f in [
            bc(&[(0, 1), (1, 2)]),
            bc(&[(0, 1), (2, 1), (1, 3)]),
            Barcode::empty(),
            bc(&[(0, 1), (0, 1), (3, 2), (-1, 5)]),
            bc(&[(2, 4), (2, 4), (2, 4)]),
        ] {
            assert_eq!(reconstruct(&ecs(&f, None).unwrap()).unwrap(), f, "{f}");
        }
    }

    #[test]
    fn reconstruct_rejects_unpaired_births() {
        let e = &xs(&[(1, 0), (1, 1)]) * &FormalSum::z_pow(1);
        assert!(matches!(reconstruct(&e), Err(ReconstructError::Malformed { .. })));
    }

    #[test]
    fn reconstruct_rejects_y_and_constant_terms() {
        assert!(reconstruct(&FormalSum::y_pow(rat(1))).is_err());
        assert!(reconstruct(&FormalSum::one()).is_err());
        let frac = FormalSum::monomial(ExpKey::new(rat(0), rat(0), 1), crate::series::ratio(1, 2));
        assert!(matches!(
            reconstruct(&frac),
            Err(ReconstructError::Malformed { stage: Stage::Input, .. })
        ));
    }
}
