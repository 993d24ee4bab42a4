//! Exact rational linear algebra over small dense matrices.
//!
//! Everything here works on `BigRational`, so span membership and null
//! spaces are decided without rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub(crate) fn rat(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
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

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Rational::zero(), |acc, j| acc + &self[(i, j)] * &v[j])
            })
            .collect()
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Gauss-Jordan elimination to reduced row echelon form.
    pub fn rref(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.cols {
                    let delta = &factor * &m[(r, j)];
                    m[(i, j)] -= delta;
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// A solution `x` of `self · x = b`, free variables set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let ech = aug.rref();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &c) in ech.pivots.iter().enumerate() {
            x[c] = ech.matrix[(row, self.cols)].clone();
        }
        Some(x)
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let ech = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &c) in ech.pivots.iter().enumerate() {
                    v[c] = -ech.matrix[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Inverse of a square nonsingular matrix.
    pub fn inverse(&self) -> Option<RationalMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rational::one();
        }
        let ech = aug.rref();
        if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = ech.matrix[(i, n + j)].clone();
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthogonal projector onto the span of `basis` (linearly independent
/// vectors of a common length), computed as `N (Nᵀ N)⁻¹ Nᵀ`.
pub fn projector(dim: usize, basis: &[Vec<Rational>]) -> RationalMatrix {
    if basis.is_empty() {
        return RationalMatrix::zeros(dim, dim);
    }
    let n = RationalMatrix::from_columns(dim, basis);
    let nt = n.transpose();
    let gram = nt.mul(&n);
    let inv = gram
        .inverse()
        .expect("projector basis must be linearly independent");
    n.mul(&inv).mul(&nt)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn solve_and_null_space() {
        // columns (1,1,0), (0,1,1)
        let a = RationalMatrix::from_columns(3, &[col(&[1, 1, 0]), col(&[0, 1, 1])]);
        assert!(a.solve(&col(&[1, 1, 1])).is_none());
        assert_eq!(a.solve(&col(&[1, 2, 1])).unwrap(), col(&[1, 1]));
        let left = a.transpose().null_space();
        assert_eq!(left, vec![col(&[1, -1, 1])]);
    }

    #[test]
    fn projector_of_single_vector() {
        let p = projector(3, &[col(&[1, -1, 1])]);
        let third = Rational::new(1.into(), 3.into());
        assert_eq!(p[(0, 0)], third);
        assert_eq!(p[(0, 1)], -third.clone());
        // idempotent
        assert_eq!(p.mul(&p), p);
    }

    #[test]
    fn inverse_roundtrip() {
        let mut m = RationalMatrix::zeros(2, 2);
        m[(0, 0)] = rat(2);
        m[(0, 1)] = rat(1);
        m[(1, 0)] = rat(1);
        m[(1, 1)] = rat(1);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert_eq!(id[(0, 0)], rat(1));
        assert_eq!(id[(0, 1)], rat(0));
        let mut singular = RationalMatrix::zeros(2, 2);
        singular[(0, 0)] = rat(1);
        assert!(singular.inverse().is_none());
    }
}
