//! Dense exact matrices and quotient spaces over the rationals.

use crate::series::Rational;
use num_traits::{One, Zero};
use std::fmt;

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must share a length. `cols` is
    /// needed for the zero-row case.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Option<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n = rows.len();
        Some(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(columns: &[Vec<Rational>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// `self * rhs`, or `None` on a shape mismatch.
    pub fn mul(&self, rhs: &Matrix) -> Option<Matrix> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Horizontal concatenation; all parts need `rows` rows.
    pub fn hstack(parts: &[&Matrix], rows: usize) -> Matrix {
        let cols: Vec<Vec<Rational>> =
            parts.iter().flat_map(|m| (0..m.cols).map(move |j| m.column(j))).collect();
        Matrix::from_columns(&cols, rows)
    }

    pub fn rank(&self) -> usize {
        let mut q = Quotient::new(self.cols);
        for i in 0..self.rows {
            q.insert(self.row(i).to_vec());
        }
        q.relation_rank()
    }

    /// Basis of the null space, one vector per free column of the reduced
    /// row echelon form.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut q = Quotient::new(self.cols);
        for i in 0..self.rows {
            q.insert(self.row(i).to_vec());
        }
        q.free
            .iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in q.rows.iter().zip(&q.pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Quotient of `Q^dim` by a subspace, kept as a fully reduced row echelon
/// basis of the subspace. Pivots are the leading columns in insertion
/// order, so the reduction is deterministic. The complement basis is given
/// by the non-pivot columns.
#[derive(Clone, Debug)]
pub struct Quotient {
    dim: usize,
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl Quotient {
    pub fn new(dim: usize) -> Self {
        Quotient { dim, rows: Vec::new(), pivots: Vec::new(), free: (0..dim).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn relation_rank(&self) -> usize {
        self.rows.len()
    }

    /// Dimension of the quotient.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Ambient columns that index the quotient basis.
    pub fn free_columns(&self) -> &[usize] {
        &self.free
    }

    fn reduce(&self, v: &mut [Rational]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let c = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &c * r;
                }
            }
        }
    }

    /// Adds a relation; returns whether it enlarged the subspace.
    pub fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        self.reduce(&mut v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let c = row[p].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *x -= &c * r;
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        self.free.retain(|&f| f != p);
        true
    }

    /// Coordinates of the class of `v` in the complement basis.
    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        self.free.iter().map(|&f| v[f].clone()).collect()
    }

    /// Whether `v` lies in the relation span.
    pub fn contains(&self, v: &[Rational]) -> bool {
        self.project(v).iter().all(Zero::is_zero)
    }
}
