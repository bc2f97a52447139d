#![allow(dead_code)]

use ecs_core::gridmod::{box_grades, Grade, GridModule, Matrix, Quotient};
use ecs_core::series::{rat, Rational};
use itertools::Itertools;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};

pub fn g(c: &[i64]) -> Grade {
    Grade::new(c.to_vec())
}

pub fn col(v: &[i64]) -> Matrix {
    Matrix::from_columns(&[v.iter().map(|&x| rat(x)).collect()], v.len())
}

/// The shipped twin modules, equal rank invariants but different series: grades a=(0,1), b=(1,0),
/// c=(0,2), {d,e}=(1,1), f=(2,0); `y·b` lands on d in the first and on e
/// in the second.
pub fn twins(prime: bool) -> GridModule {
    let dims: BTreeMap<Grade, usize> =
        [(g(&[0, 1]), 1), (g(&[1, 0]), 1), (g(&[0, 2]), 1), (g(&[1, 1]), 2), (g(&[2, 0]), 1)].into();
    let mut steps = BTreeMap::new();
    steps.insert((g(&[0, 1]), 1), col(&[1]));
    steps.insert((g(&[0, 1]), 0), col(&[1, 0]));
    steps.insert((g(&[1, 0]), 1), if prime { col(&[0, 1]) } else { col(&[1, 0]) });
    steps.insert((g(&[1, 0]), 0), col(&[1]));
    GridModule::new(g(&[0, 0]), g(&[2, 2]), &dims, &steps).unwrap()
}

type Elem = (Grade, usize);

fn basis(m: &GridModule) -> Vec<Elem> {
    m.grades().into_iter().flat_map(|h| (0..m.dim(&h)).map(move |i| (h.clone(), i))).collect()
}

/// `x_axis · u` as a combination of basis elements one step up.
fn act(m: &GridModule, u: &Elem, axis: usize) -> Vec<(Elem, Rational)> {
    let s = m.step(&u.0, axis);
    let up = u.0.step(axis, 1);
    (0..s.rows())
        .filter(|&r| !s.get(r, u.1).is_zero())
        .map(|r| ((up.clone(), r), s.get(r, u.1).clone()))
        .collect()
}

fn tuple_grade(n: usize, t: &[Elem]) -> Grade {
    t.iter().fold(Grade::zero(n), |acc, u| acc.add(&u.0))
}

/// Dimensions of `M^{⊗p}` modulo adjacent-slot moving relations, and, when
/// `antisymmetric`, modulo `t + swap_{s,s+1}(t)` as well. Built directly on
/// tuples of basis vectors, with no presentation.
pub fn brute_power_dims(m: &GridModule, p: usize, antisymmetric: bool) -> BTreeMap<Grade, usize> {
    let n = m.axes();
    let b = basis(m);
    let tuples: Vec<Vec<Elem>> =
        (0..p).map(|_| b.iter().cloned()).multi_cartesian_product().collect();
    let mut by_grade: BTreeMap<Grade, Vec<usize>> = BTreeMap::new();
    for (i, t) in tuples.iter().enumerate() {
        by_grade.entry(tuple_grade(n, t)).or_default().push(i);
    }
    let index: HashMap<&Vec<Elem>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut out = BTreeMap::new();
    for (gr, ids) in &by_grade {
        let local: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut q = Quotient::new(ids.len());
        let vec_of = |terms: Vec<(Vec<Elem>, Rational)>| {
            let mut v = vec![Rational::zero(); ids.len()];
            for (t, c) in terms {
                v[local[&index[&t]]] += c;
            }
            v
        };
        for axis in 0..n {
            let below = gr.step(axis, -1);
            let Some(lower) = by_grade.get(&below) else { continue };
            for &ti in lower {
                let t = &tuples[ti];
                for s in 0..p.saturating_sub(1) {
                    let mut terms = Vec::new();
                    for (u, c) in act(m, &t[s], axis) {
                        let mut t2 = t.clone();
                        t2[s] = u;
                        terms.push((t2, c));
                    }
                    for (u, c) in act(m, &t[s + 1], axis) {
                        let mut t2 = t.clone();
                        t2[s + 1] = u;
                        terms.push((t2, -c));
                    }
                    q.insert(vec_of(terms));
                }
            }
        }
        if antisymmetric {
            for &ti in ids {
                let t = &tuples[ti];
                for s in 0..p.saturating_sub(1) {
                    let mut sw = t.clone();
                    sw.swap(s, s + 1);
                    q.insert(vec_of(vec![(t.clone(), Rational::one()), (sw, Rational::one())]));
                }
            }
        }
        if q.dim() > 0 {
            out.insert(gr.clone(), q.dim());
        }
    }
    out
}

pub fn all_grades(lo: &Grade, hi: &Grade) -> Vec<Grade> {
    box_grades(lo, hi)
}
