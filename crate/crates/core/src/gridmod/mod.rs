//! Finite persistence modules on integer grids `Z^n`.
//!
//! A [`GridModule`] stores a dimension for every grade of a bounding box and
//! one step matrix per grade and axis, mapping `M_g` to `M_{g+e_i}`. Grades
//! outside the box carry the zero space. Everything is exact over the
//! rationals.

pub mod linalg;
mod powers;

pub use linalg::{Matrix, Quotient};
pub use powers::{
    exterior_power, exterior_power_within, generator_grades, module_ecs, module_ecs_within,
    tensor_product, tensor_product_within,
};

use crate::barcode::{Bar, Barcode};
use crate::series::{ExpKey, FormalSum, Rational};
use num_traits::{One, ToPrimitive};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("module needs at least one axis")]
    NoAxes,
    #[error("axis count mismatch: {left} vs {right}")]
    AxisMismatch { left: usize, right: usize },
    #[error("empty interval [{a}, {b})")]
    EmptyInterval { a: i64, b: i64 },
    #[error("grade {grade} lies outside the box {lo}..={hi}")]
    OutsideBox { grade: Grade, lo: Grade, hi: Grade },
    #[error("step at {grade} along axis {axis} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch { grade: Grade, axis: usize, expected: (usize, usize), found: (usize, usize) },
    #[error("square at {grade} on axes {axes:?} does not commute")]
    NotCommuting { grade: Grade, axes: (usize, usize) },
    #[error("negative multiplicity {multiplicity} for bar [{birth}, {death})")]
    NegativeMultiplicity { birth: i64, death: i64, multiplicity: i64 },
    #[error("expected a one-axis module, found {0} axes")]
    NotOneDimensional(usize),
    #[error("bar {0} does not have integer endpoints")]
    NonIntegerBar(String),
    #[error("exterior power needs p >= 1")]
    ZeroPower,
    #[error("projected size {projected} exceeds the budget {budget}")]
    BudgetExceeded { projected: u128, budget: usize },
}

/// A point of `Z^n`. The derived order is lexicographic and only used for
/// iteration and map keys; the grading order is [`Grade::leq`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Grade(Vec<i64>);

impl Grade {
    pub fn new(coords: Vec<i64>) -> Self {
        Grade(coords)
    }

    pub fn zero(n: usize) -> Self {
        Grade(vec![0; n])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn axes(&self) -> usize {
        self.0.len()
    }

    /// Componentwise `self ≤ other`.
    pub fn leq(&self, other: &Grade) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `self + delta * e_axis`.
    pub fn step(&self, axis: usize, delta: i64) -> Grade {
        let mut c = self.0.clone();
        c[axis] += delta;
        Grade(c)
    }

    pub fn add(&self, other: &Grade) -> Grade {
        Grade(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Grade {
        Grade(self.0.iter().map(|a| a * k).collect())
    }

    pub fn key(&self) -> ExpKey {
        ExpKey::grid(&self.0)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<i64>> for Grade {
    fn from(v: Vec<i64>) -> Self {
        Grade(v)
    }
}

/// Grades of the box `[lo, hi]` in lexicographic order, last axis fastest.
/// Empty when some `hi_i < lo_i`.
pub fn box_grades(lo: &Grade, hi: &Grade) -> Vec<Grade> {
    let n = lo.axes();
    if lo.0.iter().zip(&hi.0).any(|(a, b)| b < a) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.0.clone();
    loop {
        out.push(Grade(cur.clone()));
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < hi.0[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo.0[i];
        }
    }
}

/// Ranks of the composite maps `M_g -> M_g'` for `g ≤ g'`. Only nonzero
/// ranks are stored; absent pairs have rank 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankInvariant {
    ranks: BTreeMap<(Grade, Grade), usize>,
}

impl RankInvariant {
    pub fn get(&self, g: &Grade, h: &Grade) -> usize {
        self.ranks.get(&(g.clone(), h.clone())).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Grade, Grade), &usize)> {
        self.ranks.iter()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// First pair, in key order, where the two invariants disagree.
    pub fn first_difference(&self, other: &RankInvariant) -> Option<(Grade, Grade)> {
        let keys: BTreeSet<&(Grade, Grade)> = self.ranks.keys().chain(other.ranks.keys()).collect();
        keys.into_iter()
            .find(|k| self.ranks.get(*k) != other.ranks.get(*k))
            .cloned()
    }
}

/// Finite persistence module on `Z^n`, dense over the box `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct GridModule {
    lo: Grade,
    hi: Grade,
    dims: Vec<usize>,
    /// Indexed by `offset * n + axis`; shape `dim(g + e_axis) x dim(g)`.
    steps: Vec<Matrix>,
}

impl GridModule {
    /// Builds a module from dimensions and steps over `[lo, hi]`. Omitted
    /// dims are 0 and omitted steps are zero matrices. Shapes are checked;
    /// commuting squares are left to [`GridModule::validate`].
    pub fn new(
        lo: Grade,
        hi: Grade,
        dims: &BTreeMap<Grade, usize>,
        steps: &BTreeMap<(Grade, usize), Matrix>,
    ) -> Result<Self, GridError> {
        let n = lo.axes();
        if n == 0 {
            return Err(GridError::NoAxes);
        }
        if hi.axes() != n {
            return Err(GridError::AxisMismatch { left: n, right: hi.axes() });
        }
        let grades = box_grades(&lo, &hi);
        let in_box = |g: &Grade| g.axes() == n && lo.leq(g) && g.leq(&hi);
        for (g, &d) in dims {
            if g.axes() != n {
                return Err(GridError::AxisMismatch { left: n, right: g.axes() });
            }
            if d > 0 && !in_box(g) {
                return Err(GridError::OutsideBox { grade: g.clone(), lo, hi });
            }
        }
        let dim_of = |g: &Grade| if in_box(g) { dims.get(g).copied().unwrap_or(0) } else { 0 };
        for ((g, axis), m) in steps {
            if g.axes() != n {
                return Err(GridError::AxisMismatch { left: n, right: g.axes() });
            }
            if *axis >= n {
                return Err(GridError::AxisMismatch { left: n, right: axis + 1 });
            }
            let expected = (dim_of(&g.step(*axis, 1)), dim_of(g));
            if m.shape() != expected {
                return Err(GridError::ShapeMismatch {
                    grade: g.clone(),
                    axis: *axis,
                    expected,
                    found: m.shape(),
                });
            }
            if !in_box(g) && !m.is_zero() {
                return Err(GridError::OutsideBox { grade: g.clone(), lo, hi });
            }
        }
        let dim_vec: Vec<usize> = grades.iter().map(&dim_of).collect();
        let mut step_vec = Vec::with_capacity(grades.len() * n);
        for g in &grades {
            for axis in 0..n {
                let m = steps.get(&(g.clone(), axis)).cloned().unwrap_or_else(|| {
                    Matrix::zeros(dim_of(&g.step(axis, 1)), dim_of(g))
                });
                step_vec.push(m);
            }
        }
        Ok(GridModule { lo, hi, dims: dim_vec, steps: step_vec })
    }

    /// Assembles a module from per-grade data in box order.
    pub(crate) fn from_parts(lo: Grade, hi: Grade, dims: Vec<usize>, steps: Vec<Matrix>) -> Self {
        debug_assert_eq!(steps.len(), dims.len() * lo.axes());
        GridModule { lo, hi, dims, steps }
    }

    /// The zero module on `Z^n`.
    pub fn zero(n: usize) -> Self {
        GridModule { lo: Grade::zero(n), hi: Grade(vec![-1; n]), dims: Vec::new(), steps: Vec::new() }
    }

    pub fn axes(&self) -> usize {
        self.lo.axes()
    }

    pub fn lo(&self) -> &Grade {
        &self.lo
    }

    pub fn hi(&self) -> &Grade {
        &self.hi
    }

    pub fn grades(&self) -> Vec<Grade> {
        box_grades(&self.lo, &self.hi)
    }

    pub fn in_box(&self, g: &Grade) -> bool {
        g.axes() == self.axes() && self.lo.leq(g) && g.leq(&self.hi)
    }

    pub(crate) fn offset(&self, g: &Grade) -> Option<usize> {
        if !self.in_box(g) {
            return None;
        }
        let mut off = 0usize;
        for i in 0..self.axes() {
            let width = (self.hi.0[i] - self.lo.0[i] + 1) as usize;
            off = off * width + (g.0[i] - self.lo.0[i]) as usize;
        }
        Some(off)
    }

    pub fn dim(&self, g: &Grade) -> usize {
        self.offset(g).map_or(0, |o| self.dims[o])
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// Step `M_g -> M_{g+e_axis}`; a zero matrix of the right shape outside
    /// the box.
    pub fn step(&self, g: &Grade, axis: usize) -> Matrix {
        match self.offset(g) {
            Some(o) => self.steps[o * self.axes() + axis].clone(),
            None => Matrix::zeros(self.dim(&g.step(axis, 1)), 0),
        }
    }

    /// Checks every commuting square inside the box.
    pub fn validate(&self) -> Result<(), GridError> {
        let n = self.axes();
        for g in self.grades() {
            for i in 0..n {
                for j in i + 1..n {
                    let a = self.step(&g.step(i, 1), j).mul(&self.step(&g, i));
                    let b = self.step(&g.step(j, 1), i).mul(&self.step(&g, j));
                    if a.is_none() || a != b {
                        return Err(GridError::NotCommuting { grade: g, axes: (i, j) });
                    }
                }
            }
        }
        Ok(())
    }

    /// `g ↦ dim M_g` on grades with nonzero dimension.
    pub fn hilbert(&self) -> BTreeMap<Grade, usize> {
        self.grades()
            .into_iter()
            .zip(&self.dims)
            .filter(|(_, &d)| d > 0)
            .map(|(g, &d)| (g, d))
            .collect()
    }

    /// Composite map `M_g -> M_h` for `g ≤ h`, along the path that raises
    /// the first unfinished axis first.
    pub fn path_map(&self, g: &Grade, h: &Grade) -> Matrix {
        let mut cur = g.clone();
        let mut acc = Matrix::identity(self.dim(g));
        for i in 0..self.axes() {
            while cur.0[i] < h.0[i] {
                acc = self.step(&cur, i).mul(&acc).expect("step shapes are checked");
                cur = cur.step(i, 1);
            }
        }
        acc
    }

    pub fn rank_invariant(&self) -> RankInvariant {
        let n = self.axes();
        let mut ranks = BTreeMap::new();
        for g in self.grades() {
            if self.dim(&g) == 0 {
                continue;
            }
            let targets = box_grades(&g, &self.hi);
            let mut maps: BTreeMap<Grade, Matrix> = BTreeMap::new();
            for h in targets {
                let m = if h == g {
                    Matrix::identity(self.dim(&g))
                } else {
                    let i = (0..n).find(|&i| h.0[i] > g.0[i]).expect("h above g");
                    let prev = h.step(i, -1);
                    let m = self.step(&prev, i).mul(&maps[&prev]).expect("step shapes are checked");
                    if cfg!(debug_assertions) {
                        for j in (i + 1..n).filter(|&j| h.0[j] > g.0[j]) {
                            let alt = h.step(j, -1);
                            let other = self.step(&alt, j).mul(&maps[&alt]).unwrap();
                            debug_assert_eq!(m, other, "path dependence at {h} from {g}");
                        }
                    }
                    m
                };
                let r = m.rank();
                if r > 0 {
                    ranks.insert((g.clone(), h.clone()), r);
                }
                maps.insert(h, m);
            }
        }
        RankInvariant { ranks }
    }

    /// Matrix of all incoming unit steps into `M_g`, side by side.
    pub(crate) fn incoming(&self, g: &Grade) -> Matrix {
        let parts: Vec<Matrix> = (0..self.axes()).map(|i| self.step(&g.step(i, -1), i)).collect();
        let refs: Vec<&Matrix> = parts.iter().collect();
        Matrix::hstack(&refs, self.dim(g))
    }

    /// Dimension of `M_g` modulo the images of all strictly lower grades.
    pub fn onset_dim(&self, g: &Grade) -> usize {
        let d = self.dim(g);
        if d == 0 {
            return 0;
        }
        d - self.incoming(g).rank()
    }

    pub fn onset_total(&self) -> usize {
        self.grades().iter().map(|g| self.onset_dim(g)).sum()
    }

    /// `Σ_g Σ_S (-1)^|S| dim(g - e_S) x^g`, summed over subsets `S` of the
    /// axes.
    pub fn critical_series(&self) -> FormalSum {
        let n = self.axes();
        let mut out = FormalSum::zero();
        if self.is_zero() {
            return out;
        }
        let top = Grade(self.hi.0.iter().map(|c| c + 1).collect());
        for g in box_grades(&self.lo, &top) {
            let mut c: i64 = 0;
            for mask in 0u32..(1 << n) {
                let mut h = g.clone();
                for i in 0..n {
                    if mask & (1 << i) != 0 {
                        h.0[i] -= 1;
                    }
                }
                let d = self.dim(&h) as i64;
                c += if mask.count_ones() % 2 == 0 { d } else { -d };
            }
            if c != 0 {
                out.add_term(g.key(), Rational::from_integer(c.into()));
            }
        }
        out
    }

    /// Module with the union box of both, dims added and steps stacked
    /// block-diagonally (`self` first).
    pub fn direct_sum(&self, other: &GridModule) -> Result<GridModule, GridError> {
        let n = self.axes();
        if other.axes() != n {
            return Err(GridError::AxisMismatch { left: n, right: other.axes() });
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let lo = Grade((0..n).map(|i| self.lo.0[i].min(other.lo.0[i])).collect());
        let hi = Grade((0..n).map(|i| self.hi.0[i].max(other.hi.0[i])).collect());
        let grades = box_grades(&lo, &hi);
        let dims = grades.iter().map(|g| self.dim(g) + other.dim(g)).collect();
        let mut steps = Vec::with_capacity(grades.len() * n);
        for g in &grades {
            for i in 0..n {
                let next = g.step(i, 1);
                let m = if lo.leq(&next) && next.leq(&hi) {
                    self.step(g, i).block_diag(&other.step(g, i))
                } else {
                    Matrix::zeros(0, self.dim(g) + other.dim(g))
                };
                steps.push(m);
            }
        }
        Ok(GridModule { lo, hi, dims, steps })
    }
}

/// Equal when dimensions and steps agree at every grade; the boxes may
/// differ by zero padding.
impl PartialEq for GridModule {
    fn eq(&self, other: &Self) -> bool {
        let n = self.axes();
        if other.axes() != n {
            return false;
        }
        let grades: BTreeSet<Grade> = self.grades().into_iter().chain(other.grades()).collect();
        grades.iter().all(|g| {
            self.dim(g) == other.dim(g) && (0..n).all(|i| self.step(g, i) == other.step(g, i))
        })
    }
}

impl Eq for GridModule {}

/// Interval module `[a, b)` on `Z`.
pub fn interval_module(a: i64, b: i64) -> Result<GridModule, GridError> {
    if a >= b {
        return Err(GridError::EmptyInterval { a, b });
    }
    Ok(region_module(1, &(a..b).map(|g| Grade(vec![g])).collect::<Vec<_>>()))
}

/// The field on every grade of `cells` and zero elsewhere; a unit step is
/// the identity when both ends lie in `cells`.
pub fn region_module(n: usize, cells: &[Grade]) -> GridModule {
    let set: BTreeSet<&Grade> = cells.iter().collect();
    if set.is_empty() {
        return GridModule::zero(n);
    }
    let lo = Grade((0..n).map(|i| set.iter().map(|g| g.0[i]).min().unwrap()).collect());
    let hi = Grade((0..n).map(|i| set.iter().map(|g| g.0[i]).max().unwrap()).collect());
    let grades = box_grades(&lo, &hi);
    let dims: Vec<usize> = grades.iter().map(|g| usize::from(set.contains(g))).collect();
    let mut steps = Vec::with_capacity(grades.len() * n);
    for g in &grades {
        for i in 0..n {
            let next = g.step(i, 1);
            let here = set.contains(g);
            let there = set.contains(&next);
            let m = if here && there {
                Matrix::identity(1)
            } else {
                Matrix::zeros(usize::from(there), usize::from(here))
            };
            steps.push(m);
        }
    }
    GridModule { lo, hi, dims, steps }
}

/// Whether `a, c ∈ cells` and `a ≤ b ≤ c` force `b ∈ cells`.
pub fn is_convex(cells: &[Grade]) -> bool {
    let set: BTreeSet<&Grade> = cells.iter().collect();
    set.iter().all(|a| {
        set.iter()
            .filter(|c| a.leq(c))
            .all(|c| box_grades(a, c).iter().all(|b| set.contains(b)))
    })
}

/// Direct sum of the interval modules of the bars, in canonical bar order.
/// Every birth and death must be an integer.
pub fn from_barcode(f: &Barcode) -> Result<GridModule, GridError> {
    let mut ends = Vec::with_capacity(f.len());
    for bar in f.bars() {
        let (a, d) = (bar.birth(), bar.death());
        if !a.is_integer() || !d.is_integer() {
            return Err(GridError::NonIntegerBar(bar.to_string()));
        }
        let to_i64 = |r: &Rational| r.to_integer().to_i64();
        match (to_i64(a), to_i64(&d)) {
            (Some(a), Some(d)) => ends.push((a, d)),
            _ => return Err(GridError::NonIntegerBar(bar.to_string())),
        }
    }
    if ends.is_empty() {
        return Ok(GridModule::zero(1));
    }
    let lo = ends.iter().map(|e| e.0).min().unwrap();
    let hi = ends.iter().map(|e| e.1).max().unwrap() - 1;
    let alive = |g: i64| -> Vec<usize> {
        (0..ends.len()).filter(|&k| ends[k].0 <= g && g < ends[k].1).collect()
    };
    let mut dims = Vec::new();
    let mut steps = Vec::new();
    for g in lo..=hi {
        let here = alive(g);
        let there = if g < hi { alive(g + 1) } else { Vec::new() };
        let mut m = Matrix::zeros(there.len(), here.len());
        for (c, k) in here.iter().enumerate() {
            if let Some(r) = there.iter().position(|x| x == k) {
                m.set(r, c, Rational::one());
            }
        }
        dims.push(here.len());
        steps.push(m);
    }
    Ok(GridModule { lo: Grade(vec![lo]), hi: Grade(vec![hi]), dims, steps })
}

/// Barcode of a one-axis module from its rank invariant: the multiplicity
/// of `[a, b)` is `r(a,b-1) - r(a,b) - r(a-1,b-1) + r(a-1,b)`.
pub fn barcode_of_1d(m: &GridModule) -> Result<Barcode, GridError> {
    if m.axes() != 1 {
        return Err(GridError::NotOneDimensional(m.axes()));
    }
    if m.is_zero() {
        return Ok(Barcode::empty());
    }
    let ri = m.rank_invariant();
    let r = |a: i64, b: i64| ri.get(&Grade(vec![a]), &Grade(vec![b])) as i64;
    let (lo, hi) = (m.lo.0[0], m.hi.0[0]);
    let mut bars = Vec::new();
    for a in lo..=hi {
        for b in a + 1..=hi + 1 {
            let mult = r(a, b - 1) - r(a, b) - r(a - 1, b - 1) + r(a - 1, b);
            if mult < 0 {
                return Err(GridError::NegativeMultiplicity { birth: a, death: b, multiplicity: mult });
            }
            for _ in 0..mult {
                let bar = Bar::new(Rational::from_integer(a.into()), Rational::from_integer((b - a).into()))
                    .expect("b > a");
                bars.push(bar);
            }
        }
    }
    Ok(Barcode::new(bars))
}

/// Hilbert function of a barcode with integer endpoints: the number of
/// bars alive at each grade.
pub fn barcode_hilbert(f: &Barcode) -> Result<BTreeMap<Grade, usize>, GridError> {
    Ok(from_barcode(f)?.hilbert())
}
