//! Tensor and exterior powers through a presentation.
//!
//! A module `M` is written as `F / K` with `F` free on a minimal generating
//! set. Then `M ⊗ N = (F ⊗ G) / (K ⊗ G + F ⊗ L)` and
//! `Λ^p M = Λ^p F / (K ∧ Λ^{p-1} F)`, both free modules modulo homogeneous
//! relations, so each grade reduces to a small quotient of the free part.

use super::{box_grades, Grade, GridError, GridModule, Matrix, Quotient};
use crate::barcode::{binomial, DEFAULT_BUDGET};
use crate::series::{FormalSum, Rational};
use itertools::Itertools;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

/// Homogeneous element of a free module: a grade and sparse coefficients
/// on basis labels.
type Relation = (Grade, Vec<(usize, Rational)>);

struct Presentation {
    /// Grades of the generators, in box order of their onset grade.
    gens: Vec<Grade>,
    /// Generators of the relation module `K`.
    rels: Vec<Relation>,
}

fn presentation(m: &GridModule) -> Presentation {
    let n = m.axes();
    let grades = m.grades();
    let mut gens: Vec<Grade> = Vec::new();
    // generator j sits at grades[...] as basis vector gen_vec[j]
    let mut gen_vec: Vec<usize> = Vec::new();
    for g in &grades {
        let d = m.dim(g);
        if d == 0 {
            continue;
        }
        let mut q = Quotient::new(d);
        let inc = m.incoming(g);
        for j in 0..inc.cols() {
            q.insert(inc.column(j));
        }
        for &f in q.free_columns() {
            gens.push(g.clone());
            gen_vec.push(f);
        }
    }
    let k = gens.len();

    // images[h][j]: image of generator j in M_h, for gens at or below h
    let mut images: HashMap<Grade, Vec<Option<Vec<Rational>>>> = HashMap::new();
    for h in &grades {
        let d = m.dim(h);
        let mut cols = vec![None; k];
        for j in 0..k {
            if !gens[j].leq(h) {
                continue;
            }
            let v = if &gens[j] == h {
                let mut e = vec![Rational::zero(); d];
                e[gen_vec[j]] = Rational::one();
                e
            } else {
                let i = (0..n).find(|&i| h.coords()[i] > gens[j].coords()[i]).unwrap();
                let prev = h.step(i, -1);
                let below = images[&prev][j].as_ref().expect("generator below prev");
                m.step(&prev, i).apply(below)
            };
            cols[j] = Some(v);
        }
        images.insert(h.clone(), cols);
    }

    // relation generators live in [lo, hi + 1]
    let top = Grade::new(m.hi().coords().iter().map(|c| c + 1).collect());
    let mut kernels: HashMap<Grade, Vec<Vec<Rational>>> = HashMap::new();
    let mut rels = Vec::new();
    for h in box_grades(m.lo(), &top) {
        let below: Vec<usize> = (0..k).filter(|&j| gens[j].leq(&h)).collect();
        if below.is_empty() {
            kernels.insert(h, Vec::new());
            continue;
        }
        let d = m.dim(&h);
        let kernel: Vec<Vec<Rational>> = if d == 0 {
            below
                .iter()
                .map(|&j| {
                    let mut e = vec![Rational::zero(); k];
                    e[j] = Rational::one();
                    e
                })
                .collect()
        } else {
            let cols: Vec<Vec<Rational>> =
                below.iter().map(|&j| images[&h][j].clone().unwrap()).collect();
            Matrix::from_columns(&cols, d)
                .kernel()
                .into_iter()
                .map(|v| {
                    let mut e = vec![Rational::zero(); k];
                    for (pos, &j) in below.iter().enumerate() {
                        e[j] = v[pos].clone();
                    }
                    e
                })
                .collect()
        };
        let mut q = Quotient::new(k);
        for i in 0..n {
            if let Some(prev) = kernels.get(&h.step(i, -1)) {
                for v in prev {
                    q.insert(v.clone());
                }
            }
        }
        for v in &kernel {
            if q.insert(v.clone()) {
                let sparse = v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j, c.clone()));
                rels.push((h.clone(), sparse.collect()));
            }
        }
        kernels.insert(h, kernel);
    }
    Presentation { gens, rels }
}

/// Quotient of the free module on `labels` by the submodule generated by
/// `rels`, restricted to the box `[lo, hi]`.
fn quotient_module(lo: Grade, hi: Grade, labels: &[Grade], rels: &[Relation]) -> Result<GridModule, GridError> {
    let n = lo.axes();
    let grades = box_grades(&lo, &hi);
    let per_grade: Vec<(Vec<usize>, Quotient)> = grades
        .par_iter()
        .map(|g| {
            let ambient: Vec<usize> = (0..labels.len()).filter(|&s| labels[s].leq(g)).collect();
            let index: HashMap<usize, usize> = ambient.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let mut q = Quotient::new(ambient.len());
            for (h, terms) in rels {
                if !h.leq(g) {
                    continue;
                }
                let mut v = vec![Rational::zero(); ambient.len()];
                for (s, c) in terms {
                    v[index[s]] += c;
                }
                q.insert(v);
            }
            (ambient, q)
        })
        .collect();
    let offset: HashMap<&Grade, usize> = grades.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let dims: Vec<usize> = per_grade.iter().map(|(_, q)| q.dim()).collect();
    let steps: Vec<Matrix> = grades
        .par_iter()
        .enumerate()
        .flat_map_iter(|(o, g)| {
            let (amb, q) = &per_grade[o];
            let per_grade = &per_grade;
            let offset = &offset;
            (0..n).map(move |i| {
                let next = g.step(i, 1);
                let Some(&o2) = offset.get(&next) else {
                    return Matrix::zeros(0, q.dim());
                };
                let (amb2, q2) = &per_grade[o2];
                let cols: Vec<Vec<Rational>> = q
                    .free_columns()
                    .iter()
                    .map(|&c| {
                        let label = amb[c];
                        let mut v = vec![Rational::zero(); amb2.len()];
                        let pos = amb2.binary_search(&label).expect("labels persist upward");
                        v[pos] = Rational::one();
                        q2.project(&v)
                    })
                    .collect();
                Matrix::from_columns(&cols, q2.dim())
            })
        })
        .collect();
    let out = GridModule::from_parts(lo, hi, dims, steps);
    out.validate()?;
    Ok(out)
}

fn check_budget(projected: u128, budget: usize) -> Result<(), GridError> {
    if projected > budget as u128 {
        Err(GridError::BudgetExceeded { projected, budget })
    } else {
        Ok(())
    }
}

fn box_size(lo: &Grade, hi: &Grade) -> u128 {
    lo.coords()
        .iter()
        .zip(hi.coords())
        .map(|(a, b)| (b - a + 1).max(0) as u128)
        .product()
}

/// Gradewise tensor product over the grid.
pub fn tensor_product(m: &GridModule, other: &GridModule) -> Result<GridModule, GridError> {
    tensor_product_within(m, other, DEFAULT_BUDGET)
}

/// [`tensor_product`] with a cap on the number of free basis elements
/// summed over grades.
pub fn tensor_product_within(m: &GridModule, other: &GridModule, budget: usize) -> Result<GridModule, GridError> {
    let n = m.axes();
    if other.axes() != n {
        return Err(GridError::AxisMismatch { left: n, right: other.axes() });
    }
    if m.is_zero() || other.is_zero() {
        return Ok(GridModule::zero(n));
    }
    let (a, b) = (presentation(m), presentation(other));
    let (lo, hi) = (m.lo().add(other.lo()), m.hi().add(other.hi()));
    check_budget((a.gens.len() * b.gens.len()) as u128 * box_size(&lo, &hi), budget)?;
    let kb = b.gens.len();
    let labels: Vec<Grade> = a.gens.iter().cartesian_product(&b.gens).map(|(x, y)| x.add(y)).collect();
    let mut rels = Vec::new();
    for (h, terms) in &a.rels {
        for (j2, g2) in b.gens.iter().enumerate() {
            rels.push((h.add(g2), terms.iter().map(|(j, c)| (j * kb + j2, c.clone())).collect()));
        }
    }
    for (h, terms) in &b.rels {
        for (j1, g1) in a.gens.iter().enumerate() {
            rels.push((g1.add(h), terms.iter().map(|(j, c)| (j1 * kb + j, c.clone())).collect()));
        }
    }
    quotient_module(lo, hi, &labels, &rels)
}

/// `p`-th exterior power over the grid.
pub fn exterior_power(m: &GridModule, p: usize) -> Result<GridModule, GridError> {
    exterior_power_within(m, p, DEFAULT_BUDGET)
}

/// [`exterior_power`] with a cap on the number of free basis elements
/// summed over grades.
pub fn exterior_power_within(m: &GridModule, p: usize, budget: usize) -> Result<GridModule, GridError> {
    if p == 0 {
        return Err(GridError::ZeroPower);
    }
    let pres = presentation(m);
    check_budget(projected_size(m, pres.gens.len(), p), budget)?;
    exterior_from(m, &pres, p)
}

fn projected_size(m: &GridModule, k: usize, p: usize) -> u128 {
    let (lo, hi) = (m.lo().scale(p as i64), m.hi().scale(p as i64));
    binomial(k as u128, p as u128).saturating_mul(box_size(&lo, &hi))
}

fn exterior_from(m: &GridModule, pres: &Presentation, p: usize) -> Result<GridModule, GridError> {
    let n = m.axes();
    let k = pres.gens.len();
    if p > k {
        return Ok(GridModule::zero(n));
    }
    let sum_grade = |s: &[usize]| {
        s.iter().fold(Grade::zero(n), |acc, &j| acc.add(&pres.gens[j]))
    };
    let subsets: Vec<Vec<usize>> = (0..k).combinations(p).collect();
    let id: HashMap<&[usize], usize> = subsets.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let labels: Vec<Grade> = subsets.iter().map(|s| sum_grade(s)).collect();
    let mut rels = Vec::new();
    for t in (0..k).combinations(p - 1) {
        let tg = sum_grade(&t);
        for (h, terms) in &pres.rels {
            let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
            for (j, c) in terms {
                if t.contains(j) {
                    continue;
                }
                // e_j ∧ e_T reordered into increasing indices
                let before = t.iter().filter(|&&x| x < *j).count();
                let mut s = t.clone();
                s.insert(before, *j);
                let c = if before % 2 == 0 { c.clone() } else { -c.clone() };
                *out.entry(id[s.as_slice()]).or_insert_with(Rational::zero) += c;
            }
            out.retain(|_, c| !c.is_zero());
            if !out.is_empty() {
                rels.push((h.add(&tg), out.into_iter().collect()));
            }
        }
    }
    quotient_module(m.lo().scale(p as i64), m.hi().scale(p as i64), &labels, &rels)
}

/// `Σ_{p=1}^{p_max} C(Λ^p M) z^p`; powers above the number of generators
/// vanish and are skipped.
pub fn module_ecs(m: &GridModule, p_max: Option<usize>) -> Result<FormalSum, GridError> {
    module_ecs_within(m, p_max, DEFAULT_BUDGET)
}

pub fn module_ecs_within(m: &GridModule, p_max: Option<usize>, budget: usize) -> Result<FormalSum, GridError> {
    if p_max == Some(0) {
        return Err(GridError::ZeroPower);
    }
    let pres = presentation(m);
    let k = pres.gens.len();
    let top = p_max.unwrap_or(k).min(k);
    let projected = (1..=top).fold(0u128, |acc, p| acc.saturating_add(projected_size(m, k, p)));
    check_budget(projected, budget)?;
    let mut out = FormalSum::zero();
    for p in 1..=top {
        let c = exterior_from(m, &pres, p)?.critical_series();
        out = &out + &(&c * &FormalSum::z_pow(p as u32));
    }
    Ok(out)
}

/// Grades of a minimal generating set, with multiplicity.
pub fn generator_grades(m: &GridModule) -> Vec<Grade> {
    presentation(m).gens
}
