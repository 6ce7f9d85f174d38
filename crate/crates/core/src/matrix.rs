use std::fmt;
use std::ops::{Add, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::Real;

/// Agents × options. `m` rows (agents), `n` columns (options).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetworkShape {
    pub m: usize,
    pub n: usize,
}

impl NetworkShape {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::InvalidShape { m, n });
        }
        Ok(NetworkShape { m, n })
    }

    pub fn cells(&self) -> usize {
        self.m * self.n
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn transposed(&self) -> Self {
        NetworkShape { m: self.n, n: self.m }
    }
}

impl fmt::Display for NetworkShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

/// State of the influence network: `values[i * n + j]` is the value agent `i`
/// assigns to option `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueMatrix<T> {
    shape: NetworkShape,
    values: Vec<T>,
}

impl<T: Clone> ValueMatrix<T> {
    pub fn new(shape: NetworkShape, values: Vec<T>) -> Result<Self> {
        if values.len() != shape.cells() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", shape.cells()),
                got: format!("{} values", values.len()),
            });
        }
        Ok(ValueMatrix { shape, values })
    }

    pub fn from_fn(shape: NetworkShape, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(shape.cells());
        for i in 0..shape.m {
            for j in 0..shape.n {
                values.push(f(i, j));
            }
        }
        ValueMatrix { shape, values }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("ragged rows".into()));
        }
        let shape = NetworkShape::new(m, n)?;
        Ok(ValueMatrix { shape, values: rows.into_iter().flatten().collect() })
    }

    pub fn filled(shape: NetworkShape, v: T) -> Self {
        ValueMatrix { shape, values: vec![v; shape.cells()] }
    }

    pub fn shape(&self) -> NetworkShape {
        self.shape
    }

    pub fn m(&self) -> usize {
        self.shape.m
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.shape.index(i, j)].clone()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.values[self.shape.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.shape.index(i, j);
        self.values[k] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.shape.n..(i + 1) * self.shape.n]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.shape.m).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.shape.m).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> ValueMatrix<U> {
        ValueMatrix { shape: self.shape, values: self.values.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        ValueMatrix::from_fn(self.shape.transposed(), |i, j| self.get(j, i))
    }

    /// Group action `(σ, τ)·Z`: entry `(i, j)` moves to `(σ(i), τ(j))`.
    pub fn permuted(&self, rows: &Permutation, cols: &Permutation) -> Self {
        assert_eq!(rows.len(), self.shape.m);
        assert_eq!(cols.len(), self.shape.n);
        let (ri, ci) = (rows.inverse(), cols.inverse());
        ValueMatrix::from_fn(self.shape, |i, j| self.get(ri.apply(i), ci.apply(j)))
    }

    pub fn check_shape(&self, shape: NetworkShape) -> Result<()> {
        if self.shape != shape {
            return Err(Error::ShapeMismatch { expected: shape.to_string(), got: self.shape.to_string() });
        }
        Ok(())
    }
}

impl<T: Clone + Zero> ValueMatrix<T> {
    pub fn zeros(shape: NetworkShape) -> Self {
        Self::filled(shape, T::zero())
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.shape.m)
            .map(|i| self.row(i).iter().cloned().fold(T::zero(), |a, b| a + b))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.shape.n)
            .map(|j| (0..self.shape.m).fold(T::zero(), |a, i| a + self.get(i, j)))
            .collect()
    }
}

impl<T: Clone + Add<Output = T>> ValueMatrix<T> {
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + b.clone()).collect();
        ValueMatrix { shape: self.shape, values }
    }
}

impl<T: Clone + Sub<Output = T>> ValueMatrix<T> {
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.clone() - b.clone()).collect();
        ValueMatrix { shape: self.shape, values }
    }
}

impl<T: Real> ValueMatrix<T> {
    /// Constructor for dynamics states; rejects NaN and infinities.
    pub fn finite(shape: NetworkShape, values: Vec<T>) -> Result<Self> {
        let z = Self::new(shape, values)?;
        z.check_finite()?;
        Ok(z)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::NonFinite(format!(
                "entry ({}, {})",
                k / self.shape.n + 1,
                k % self.shape.n + 1
            ))),
            None => Ok(()),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|v| *v * k)
    }

    /// Entrywise inner product.
    pub fn dot(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |a, (x, y)| a + *x * *y)
    }

    pub fn to_f64(&self) -> ValueMatrix<f64> {
        self.map(|v| v.to_f64().unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_rejects_small() {
        assert!(NetworkShape::new(1, 3).is_err());
        assert!(NetworkShape::new(2, 2).is_ok());
    }

    #[test]
    fn permuted_moves_entries() {
        let z = ValueMatrix::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let s = Permutation::transposition(2, 0, 1);
        let t = Permutation::from_images(vec![1, 2, 0]).unwrap();
        let p = z.permuted(&s, &t);
        // (0,0) -> (1,1)
        assert_eq!(p.get(1, 1), 1);
        assert_eq!(p.get(0, 0), 6);
        assert_eq!(p.permuted(&s.inverse(), &t.inverse()), z);
    }

    #[test]
    fn sums() {
        let z = ValueMatrix::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        assert_eq!(z.row_sums(), vec![6, 15]);
        assert_eq!(z.col_sums(), vec![5, 7, 9]);
    }
}
