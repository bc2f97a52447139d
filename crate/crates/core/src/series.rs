//! Sparse formal sums with rational exponents and rational coefficients.
//!
//! A [`FormalSum`] is a finite linear combination of monomials `x^a y^b z^k`.
//! The `x` exponent is a grade: a single rational for barcodes, or a vector of
//! coordinates for modules over a multi-axis grid. The `y` exponent is a
//! rational lifespan and `z` counts exterior powers.
//!
//! Invariants:
//! - no stored coefficient is zero
//! - iteration follows the total order of [`ExpKey`]
//! - the `x` coordinate vector of a key never ends in a zero, so `x^0`,
//!   `x^(0)` and `x^(0,0)` are the same key

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Integer as a [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` as a [`Rational`]. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series is not pure in x: offending term {0}")]
    NotPureX(String),
    #[error("division is not exact")]
    NonExact,
    #[error("division by the zero series")]
    DivideByZero,
    #[error("series is not a single monomial with coefficient 1")]
    NotMonomial,
}

/// The three indeterminates a [`FormalSum`] can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indeterminate {
    X,
    Y,
    Z,
}

impl fmt::Display for Indeterminate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Indeterminate::X => "x",
            Indeterminate::Y => "y",
            Indeterminate::Z => "z",
        })
    }
}

/// Exponent of a monomial `x^a y^b z^k`.
///
/// Ordered lexicographically on `(a, b, k)`, where multi-axis grades compare
/// coordinate by coordinate with missing trailing coordinates read as zero.
/// The order is compatible with addition of keys, which is what lets
/// [`FormalSum::divide_exact`] cancel least terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpKey {
    x: Vec<Rational>,
    y: Rational,
    z: u32,
}

impl ExpKey {
    pub fn new(a: Rational, b: Rational, k: u32) -> Self {
        Self::with_grade(vec![a], b, k)
    }

    /// Key with a multi-axis `x` exponent.
    pub fn with_grade(coords: Vec<Rational>, b: Rational, k: u32) -> Self {
        let mut x = coords;
        while x.last().is_some_and(Zero::is_zero) {
            x.pop();
        }
        ExpKey { x, y: b, z: k }
    }

    /// Key of a grid grade with integer coordinates and no `y`, `z` part.
    pub fn grid(coords: &[i64]) -> Self {
        Self::with_grade(coords.iter().map(|&c| rat(c)).collect(), Rational::zero(), 0)
    }

    /// Key of the constant monomial `1`.
    pub fn unit() -> Self {
        ExpKey { x: Vec::new(), y: Rational::zero(), z: 0 }
    }

    pub fn x_pow(a: Rational) -> Self {
        Self::new(a, Rational::zero(), 0)
    }

    /// The `x` exponent when it is a single rational (at most one axis).
    pub fn x_scalar(&self) -> Option<Rational> {
        match self.x.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.x[0].clone()),
            _ => None,
        }
    }

    /// Nonzero prefix of the `x` coordinates.
    pub fn x_coords(&self) -> &[Rational] {
        &self.x
    }

    /// `x` coordinates padded (or checked) to `axes` entries.
    pub fn x_padded(&self, axes: usize) -> Option<Vec<Rational>> {
        if self.x.len() > axes {
            return None;
        }
        let mut v = self.x.clone();
        v.resize(axes, Rational::zero());
        Some(v)
    }

    pub fn y(&self) -> &Rational {
        &self.y
    }

    pub fn z(&self) -> u32 {
        self.z
    }

    pub fn is_unit(&self) -> bool {
        self.x.is_empty() && self.y.is_zero() && self.z == 0
    }

    /// Componentwise difference, `None` if the `z` exponent would go negative.
    pub fn checked_sub(&self, other: &ExpKey) -> Option<ExpKey> {
        let z = self.z.checked_sub(other.z)?;
        let len = self.x.len().max(other.x.len());
        let x = (0..len)
            .map(|i| coord(&self.x, i) - coord(&other.x, i))
            .collect();
        Some(ExpKey::with_grade(x, &self.y - &other.y, z))
    }

    fn drop_var(&self, which: Indeterminate) -> ExpKey {
        let mut k = self.clone();
        match which {
            Indeterminate::X => k.x.clear(),
            Indeterminate::Y => k.y = Rational::zero(),
            Indeterminate::Z => k.z = 0,
        }
        k
    }
}

fn coord(v: &[Rational], i: usize) -> Rational {
    v.get(i).cloned().unwrap_or_else(Rational::zero)
}

impl Add for &ExpKey {
    type Output = ExpKey;

    fn add(self, other: &ExpKey) -> ExpKey {
        let len = self.x.len().max(other.x.len());
        let x = (0..len)
            .map(|i| coord(&self.x, i) + coord(&other.x, i))
            .collect();
        ExpKey::with_grade(x, &self.y + &other.y, self.z + other.z)
    }
}

impl Ord for ExpKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.x.len().max(other.x.len());
        let zero = Rational::zero();
        for i in 0..len {
            let a = self.x.get(i).unwrap_or(&zero);
            let b = other.x.get(i).unwrap_or(&zero);
            match a.cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.y.cmp(&other.y).then(self.z.cmp(&other.z))
    }
}

impl PartialOrd for ExpKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExpKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        match self.x.len() {
            0 => {}
            1 => parts.push(power("x", &self.x[0].to_string())),
            _ => {
                let c: Vec<String> = self.x.iter().map(ToString::to_string).collect();
                parts.push(format!("x^({})", c.join(",")));
            }
        }
        if !self.y.is_zero() {
            parts.push(power("y", &self.y.to_string()));
        }
        if self.z != 0 {
            parts.push(power("z", &self.z.to_string()));
        }
        f.write_str(&parts.join(" "))
    }
}

fn power(var: &str, exp: &str) -> String {
    if exp == "1" {
        var.to_string()
    } else if exp.contains('/') || exp.starts_with('-') {
        format!("{var}^({exp})")
    } else {
        format!("{var}^{exp}")
    }
}

/// Finite sum of monomials with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormalSum {
    terms: BTreeMap<ExpKey, Rational>,
}

impl FormalSum {
    pub fn zero() -> Self {
        FormalSum::default()
    }

    pub fn one() -> Self {
        Self::monomial(ExpKey::unit(), Rational::one())
    }

    pub fn monomial(key: ExpKey, coeff: Rational) -> Self {
        let mut s = FormalSum::zero();
        s.add_term(key, coeff);
        s
    }

    /// `x^a`
    pub fn x_pow(a: Rational) -> Self {
        Self::monomial(ExpKey::x_pow(a), Rational::one())
    }

    /// `y^b`
    pub fn y_pow(b: Rational) -> Self {
        Self::monomial(ExpKey::new(Rational::zero(), b, 0), Rational::one())
    }

    /// `z^k`
    pub fn z_pow(k: u32) -> Self {
        Self::monomial(ExpKey::new(Rational::zero(), Rational::zero(), k), Rational::one())
    }

    /// `1 - x^a`
    pub fn one_minus_x_pow(a: Rational) -> Self {
        &Self::one() - &Self::x_pow(a)
    }

    /// Collects terms, merging repeated keys and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (ExpKey, Rational)>>(terms: I) -> Self {
        let mut s = FormalSum::zero();
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    /// Adds `coeff * key` in place.
    pub fn add_term(&mut self, key: ExpKey, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ExpKey, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &ExpKey) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn first(&self) -> Option<(&ExpKey, &Rational)> {
        self.terms.iter().next()
    }

    pub fn last(&self) -> Option<(&ExpKey, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> FormalSum {
        if c.is_zero() {
            return FormalSum::zero();
        }
        FormalSum {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by the monomial `coeff * key`.
    pub fn shift(&self, key: &ExpKey, coeff: &Rational) -> FormalSum {
        if coeff.is_zero() {
            return FormalSum::zero();
        }
        FormalSum {
            terms: self.terms.iter().map(|(k, v)| (k + key, v * coeff)).collect(),
        }
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// True if no term carries a `y` or `z` exponent and grades are scalar.
    pub fn is_pure_x(&self) -> bool {
        self.terms.keys().all(|k| k.y.is_zero() && k.z == 0 && k.x.len() <= 1)
    }

    /// Largest `z` exponent present, 0 for the zero sum.
    pub fn max_z(&self) -> u32 {
        self.terms.keys().map(|k| k.z).max().unwrap_or(0)
    }

    /// Terms with `z` exponent exactly `k`, with the `z` part removed.
    pub fn z_slice(&self, k: u32) -> FormalSum {
        FormalSum {
            terms: self
                .terms
                .iter()
                .filter(|(key, _)| key.z == k)
                .map(|(key, c)| (key.drop_var(Indeterminate::Z), c.clone()))
                .collect(),
        }
    }

    /// Sets one indeterminate to 1; colliding keys merge.
    pub fn substitute_one(&self, which: Indeterminate) -> FormalSum {
        FormalSum::from_terms(
            self.terms
                .iter()
                .map(|(k, c)| (k.drop_var(which), c.clone())),
        )
    }

    /// Replaces `x` by `1/x`.
    pub fn invert_x(&self) -> FormalSum {
        FormalSum {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let x = k.x.iter().map(|a| -a).collect();
                    (ExpKey::with_grade(x, k.y.clone(), k.z), c.clone())
                })
                .collect(),
        }
    }

    fn pure_x_exponents(&self) -> Result<Vec<(Rational, &Rational)>, SeriesError> {
        self.terms
            .iter()
            .map(|(k, c)| match k.x_scalar() {
                Some(a) if k.y.is_zero() && k.z == 0 => Ok((a, c)),
                _ => Err(SeriesError::NotPureX(k.to_string())),
            })
            .collect()
    }

    /// `Σ c·a` over terms `c·x^a`: the derivative at `x = 1`.
    pub fn moment(&self) -> Result<Rational, SeriesError> {
        Ok(self
            .pure_x_exponents()?
            .into_iter()
            .fold(Rational::zero(), |acc, (a, c)| acc + a * c))
    }

    /// `Σ c·a²` over terms `c·x^a`, i.e. the moment of `x·s'`.
    pub fn second_moment(&self) -> Result<Rational, SeriesError> {
        Ok(self
            .pure_x_exponents()?
            .into_iter()
            .fold(Rational::zero(), |acc, (a, c)| acc + &a * &a * c))
    }

    /// Exact quotient `q` with `q * d == self`.
    ///
    /// Cancels the least remaining term of the dividend against the least term
    /// of `d`. Gives up with [`SeriesError::NonExact`] once a quotient term
    /// would exceed `max(self) - max(d)` or after
    /// `len(self) * 4 * len(d) + 64` steps.
    pub fn divide_exact(&self, d: &FormalSum) -> Result<FormalSum, SeriesError> {
        let (d_min, d_min_c) = d.first().ok_or(SeriesError::DivideByZero)?;
        let (d_max, _) = d.last().expect("nonempty");
        let Some((s_max, _)) = self.last() else {
            return Ok(FormalSum::zero());
        };
        let q_max = s_max.checked_sub(d_max).ok_or(SeriesError::NonExact)?;
        let bound = self.len() * 4 * d.len() + 64;

        let mut rem = self.clone();
        let mut quotient = FormalSum::zero();
        let mut steps = 0usize;
        while let Some((k, c)) = rem.first() {
            if steps >= bound {
                return Err(SeriesError::NonExact);
            }
            steps += 1;
            let qk = k.checked_sub(d_min).ok_or(SeriesError::NonExact)?;
            if qk > q_max {
                return Err(SeriesError::NonExact);
            }
            let qc = c / d_min_c;
            for (dk, dc) in d.iter() {
                rem.add_term(&qk + dk, -(&qc * dc));
            }
            quotient.add_term(qk, qc);
        }
        Ok(quotient)
    }

    /// The key of a single term with coefficient exactly 1.
    pub fn monomial_exponent(&self) -> Result<ExpKey, SeriesError> {
        match self.first() {
            Some((k, c)) if self.len() == 1 && c.is_one() => Ok(k.clone()),
            _ => Err(SeriesError::NotMonomial),
        }
    }
}

impl FromIterator<(ExpKey, Rational)> for FormalSum {
    fn from_iter<I: IntoIterator<Item = (ExpKey, Rational)>>(iter: I) -> Self {
        FormalSum::from_terms(iter)
    }
}

impl Add for &FormalSum {
    type Output = FormalSum;

    fn add(self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &FormalSum {
    type Output = FormalSum;

    fn sub(self, other: &FormalSum) -> FormalSum {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

impl Mul for &FormalSum {
    type Output = FormalSum;

    fn mul(self, other: &FormalSum) -> FormalSum {
        let mut out = FormalSum::zero();
        for (k1, c1) in self.iter() {
            for (k2, c2) in other.iter() {
                out.add_term(k1 + k2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &FormalSum {
    type Output = FormalSum;

    fn neg(self) -> FormalSum {
        FormalSum {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FormalSum {
            type Output = FormalSum;
            fn $m(self, other: FormalSum) -> FormalSum {
                (&self).$m(&other)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if k.is_unit() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "{mag}*{k}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(terms: &[(i64, i64)]) -> FormalSum {
        terms
            .iter()
            .map(|&(c, a)| (ExpKey::x_pow(rat(a)), rat(c)))
            .collect()
    }

    fn key(a: i64, b: i64, k: u32) -> ExpKey {
        ExpKey::new(rat(a), rat(b), k)
    }

    #[test]
    fn add_cancels_and_sums() {
        let s = xs(&[(1, 0), (-1, 3)]);
        assert_eq!(&s + &xs(&[(1, 3)]), FormalSum::one());
        assert_eq!(&s + &FormalSum::zero(), s);
        assert_eq!(
            &xs(&[(1, 0), (1, 1)]) + &xs(&[(1, 1), (1, 3)]),
            xs(&[(1, 0), (2, 1), (1, 3)])
        );
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&xs(&[(1, 0), (-1, 1)]) * &xs(&[(1, 0), (1, 1)]), xs(&[(1, 0), (-1, 2)]));
        let half = FormalSum::x_pow(ratio(1, 2));
        assert_eq!(&half * &half, FormalSum::x_pow(rat(1)));
        let y = FormalSum::y_pow(rat(1));
        let expect: FormalSum = [(key(0, 1, 0), rat(1)), (key(2, 1, 0), rat(1))].into_iter().collect();
        assert_eq!(&y * &xs(&[(1, 0), (1, 2)]), expect);
    }

    #[test]
    fn substitute_one_examples() {
        let s: FormalSum = [(key(0, 1, 0), rat(1)), (key(2, 1, 0), rat(1))].into_iter().collect();
        assert_eq!(s.substitute_one(Indeterminate::Y), xs(&[(1, 0), (1, 2)]));
        let f: FormalSum = [(key(0, 1, 0), rat(1)), (key(1, 2, 0), rat(1))].into_iter().collect();
        let count = f.substitute_one(Indeterminate::X).substitute_one(Indeterminate::Y);
        assert_eq!(count, FormalSum::monomial(ExpKey::unit(), rat(2)));
        assert!(FormalSum::zero().substitute_one(Indeterminate::Y).is_zero());
    }

    #[test]
    fn invert_x_examples() {
        let s = xs(&[(1, 1), (1, 2), (1, 3)]);
        assert_eq!(s.invert_x(), xs(&[(1, -1), (1, -2), (1, -3)]));
        assert_eq!(s.invert_x().invert_x(), s);
        assert_eq!(FormalSum::one().invert_x(), FormalSum::one());
    }

    #[test]
    fn moments() {
        assert_eq!(xs(&[(1, 0), (-1, 3)]).moment().unwrap(), rat(-3));
        assert_eq!(FormalSum::zero().moment().unwrap(), rat(0));
        assert_eq!(xs(&[(1, 1), (-1, 4)]).moment().unwrap(), rat(-3));
        assert_eq!(
            xs(&[(1, 0), (1, 2), (1, 1), (-1, 1), (-1, 3), (-1, 4)]).second_moment().unwrap(),
            rat(-21)
        );
        assert_eq!(FormalSum::zero().second_moment().unwrap(), rat(0));
        assert_eq!(FormalSum::x_pow(ratio(1, 2)).second_moment().unwrap(), ratio(1, 4));
    }

    #[test]
    fn moment_rejects_mixed_terms() {
        let s = FormalSum::y_pow(rat(1));
        assert!(matches!(s.moment(), Err(SeriesError::NotPureX(_))));
        assert!(matches!(FormalSum::z_pow(2).second_moment(), Err(SeriesError::NotPureX(_))));
        let grid = FormalSum::monomial(ExpKey::grid(&[1, 2]), rat(1));
        assert!(grid.moment().is_err());
    }

    #[test]
    fn divide_exact_examples() {
        let one_minus_x = xs(&[(1, 0), (-1, 1)]);
        assert_eq!(
            xs(&[(1, 1), (-1, 4)]).divide_exact(&one_minus_x).unwrap(),
            xs(&[(1, 1), (1, 2), (1, 3)])
        );
        assert_eq!(xs(&[(1, 3), (-1, 4)]).divide_exact(&one_minus_x).unwrap(), xs(&[(1, 3)]));

        let y3_minus_y: FormalSum =
            [(key(0, 3, 0), rat(1)), (key(0, 1, 0), rat(-1))].into_iter().collect();
        let dividend = &xs(&[(1, 1)]) * &y3_minus_y;
        assert_eq!(dividend.divide_exact(&y3_minus_y).unwrap(), xs(&[(1, 1)]));
    }

    #[test]
    fn divide_exact_errors() {
        let one_minus_x = xs(&[(1, 0), (-1, 1)]);
        assert_eq!(FormalSum::one().divide_exact(&one_minus_x), Err(SeriesError::NonExact));
        assert_eq!(xs(&[(1, 0), (1, 1)]).divide_exact(&one_minus_x), Err(SeriesError::NonExact));
        assert_eq!(FormalSum::one().divide_exact(&FormalSum::zero()), Err(SeriesError::DivideByZero));
        assert_eq!(FormalSum::zero().divide_exact(&one_minus_x), Ok(FormalSum::zero()));
    }

    #[test]
    fn monomial_exponent_examples() {
        assert_eq!(xs(&[(1, 3)]).monomial_exponent().unwrap(), key(3, 0, 0));
        assert_eq!(xs(&[(2, 3)]).monomial_exponent(), Err(SeriesError::NotMonomial));
        assert_eq!(xs(&[(1, 0), (1, 1)]).monomial_exponent(), Err(SeriesError::NotMonomial));
    }

    #[test]
    fn key_order_pads_missing_coordinates() {
        let a = ExpKey::grid(&[1]);
        let b = ExpKey::grid(&[1, 0]);
        assert_eq!(a, b);
        assert!(ExpKey::grid(&[1, -1]) < ExpKey::grid(&[1]));
        assert!(ExpKey::grid(&[0, 5]) < ExpKey::grid(&[1, 0]));
        assert!(key(0, 0, 1) < key(0, 1, 0));
    }

    #[test]
    fn display() {
        let s = xs(&[(1, 0), (-1, 3)]);
        assert_eq!(s.to_string(), "1 - x^3");
        let e = &FormalSum::x_pow(ratio(1, 2)) * &FormalSum::z_pow(2);
        assert_eq!(e.scale(&rat(-2)).to_string(), "-2*x^(1/2) z^2");
    }
}
