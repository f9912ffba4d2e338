//! Small dense matrices whose entries are Taylor jets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::TaylorJet;

#[derive(Debug, Clone)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<TaylorJet>,
}

impl JetMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> TaylorJet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JetMatrix { rows, cols, data }
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<TaylorJet>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j)?);
            }
        }
        Ok(JetMatrix { rows, cols, data })
    }

    pub fn scalar_identity(n: usize, s: &TaylorJet) -> Self {
        let zero = s.scale(0.0);
        JetMatrix::from_fn(n, n, |i, j| if i == j { s.clone() } else { zero.clone() })
    }

    pub fn identity(n: usize, dim: usize, order: usize) -> Self {
        let one = TaylorJet::constant(1.0, dim, order).expect("valid jet shape");
        JetMatrix::scalar_identity(n, &one)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &TaylorJet {
        &self.data[i * self.cols + j]
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(TaylorJet::order).min().unwrap_or(0)
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn map(&self, f: impl Fn(&TaylorJet) -> TaylorJet) -> Self {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn derivative(&self, k: usize) -> Result<Self> {
        Ok(JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| x.derivative(k))
                .collect::<Result<_>>()?,
        })
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|x| x.truncate(order))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn scale_jet(&self, s: &TaylorJet) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &JetMatrix) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &JetMatrix) -> Self {
        JetMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn mul(&self, other: &JetMatrix) -> Self {
        debug_assert_eq!(self.cols, other.rows);
        JetMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    pub fn trace(&self) -> TaylorJet {
        let mut acc = self.get(0, 0).clone();
        for i in 1..self.rows {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    /// Gauss–Jordan inverse. Pivots on the entry with the largest constant
    /// term, so it only fails when the value-level matrix is singular.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = JetMatrix::identity(n, self.get(0, 0).dim(), self.order());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a.get(r, col)
                        .value()
                        .abs()
                        .total_cmp(&a.get(s, col).value().abs())
                })
                .unwrap_or(col);
            if a.get(pivot, col).value() == 0.0 {
                return Err(Error::Singularity("singular jet matrix".into()));
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let r = a.get(col, col).recip()?;
            for j in 0..n {
                a.data[col * n + j] = a.get(col, j) * &r;
                inv.data[col * n + j] = inv.get(col, j) * &r;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a.get(row, col).clone();
                for j in 0..n {
                    a.data[row * n + j] = a.get(row, j) - &(&factor * a.get(col, j));
                    inv.data[row * n + j] = inv.get(row, j) - &(&factor * inv.get(col, j));
                }
            }
        }
        Ok(inv)
    }
}
