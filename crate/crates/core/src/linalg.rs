//! Small dense matrices over exact rationals.

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use crate::scalar::{to_f64, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::from_integer(1.into()));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Scalar) {
        self.data[r * self.cols + c] += v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RMatrix) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.add_to(r, c, &(a * b));
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| to_f64(self.get(r, c)))
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (RMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).recip();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let v = m.get(r, c) - &factor * m.get(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Some solution of `self · x = b` with free variables set to zero, or
    /// `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = red.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Exact positive-definiteness test for a symmetric matrix by Gaussian
    /// elimination without pivoting: every pivot must be strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        for k in 0..n {
            let p = m.get(k, k).clone();
            if !p.is_positive() {
                return false;
            }
            for r in k + 1..n {
                if m.get(r, k).is_zero() {
                    continue;
                }
                let factor = m.get(r, k) / &p;
                for c in k..n {
                    let v = m.get(r, c) - &factor * m.get(k, c);
                    m.set(r, c, v);
                }
            }
        }
        true
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<RMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, Scalar::from_integer(1.into()));
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, red.get(r, n + c).clone());
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Scalar {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Scalar::from_integer(1.into());
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m.get(r, k).is_zero()) else {
                return Scalar::zero();
            };
            if p != k {
                m.swap_rows(p, k);
                det = -det;
            }
            let pivot = m.get(k, k).clone();
            det *= &pivot;
            for r in k + 1..n {
                if m.get(r, k).is_zero() {
                    continue;
                }
                let factor = m.get(r, k) / &pivot;
                for c in k..n {
                    let v = m.get(r, c) - &factor * m.get(k, c);
                    m.set(r, c, v);
                }
            }
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn m(rows: &[&[i64]]) -> RMatrix {
        RMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn rank_and_solve() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(a.rank(), 2);
        let x = a.solve(&[int(5), int(10), int(2)]).unwrap();
        let ax: Vec<Scalar> = (0..3)
            .map(|r| (0..3).map(|c| a.get(r, c) * &x[c]).sum())
            .collect();
        assert_eq!(ax, vec![int(5), int(10), int(2)]);
        assert!(a.solve(&[int(1), int(1), int(0)]).is_none());
    }

    #[test]
    fn definiteness() {
        assert!(m(&[&[2, 1], &[1, 2]]).is_positive_definite());
        assert!(!m(&[&[1, 1], &[1, 1]]).is_positive_definite());
        assert!(!m(&[&[1, 2], &[2, 1]]).is_positive_definite());
    }

    #[test]
    fn inverse_and_determinant() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.determinant(), int(1));
        assert_eq!(a.mul(&a.inverse().unwrap()), RMatrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        assert_eq!(m(&[&[0, 2], &[3, 0]]).determinant(), int(-6));
        assert_eq!(
            RMatrix::from_rows(vec![vec![ratio(1, 2)]]).inverse().unwrap().get(0, 0),
            &int(2)
        );
    }
}
