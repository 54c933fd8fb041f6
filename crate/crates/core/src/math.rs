//! Elementary functions and the small dense linear algebra the layers need.
//!
//! All arithmetic is `f64`. Sums run left to right in index order so results
//! are bit-reproducible across platforms.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// `log(1 + e^x)`, evaluated without overflow for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Logistic function `1 / (1 + e^-x)`, the derivative of [`softplus`].
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig("matrix dimensions must be positive".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix values",
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `M v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matvec",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `Mᵀ u`, accumulated row by row.
    pub fn matvec_transposed(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "transposed matvec",
                expected: self.rows,
                found: u.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (r, &ur) in u.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o += m * ur;
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`Matrix::matvec`].
pub fn matvec(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    m.matvec(v)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// Index of the first non-finite entry, if any.
pub fn first_non_finite(values: &[f64]) -> Option<usize> {
    values.iter().position(|v| !v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softplus_reference_points() {
        assert_eq!(softplus(0.0), core::f64::consts::LN_2);
        assert!((softplus(50.0) - 50.0).abs() < 1e-12);
        let small = softplus(-50.0);
        let expected = libm::exp(-50.0);
        assert!(((small - expected) / expected).abs() < 1e-10);
        assert!(softplus(800.0).is_finite());
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn sigmoid_reference_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(40.0) - (1.0 - libm::exp(-40.0))).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn matvec_examples() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(Matrix::identity(3).matvec(&v).unwrap(), v.to_vec());
        assert_eq!(Matrix::zeros(2, 3).matvec(&v).unwrap(), vec![0.0, 0.0]);
        let m = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(matvec(&m, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(m.matvec_transposed(&[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
    }

    #[test]
    fn matvec_rejects_mismatch() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(
            m.matvec(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1, .. })
        ));
        assert!(Matrix::from_row_major(2, 2, vec![1.0]).is_err());
    }

    proptest! {
        #[test]
        fn softplus_dominates_relu(x in -700.0f64..700.0) {
            let s = softplus(x);
            prop_assert!(s >= 0.0 && s >= x);
            if x > -30.0 && x < 30.0 {
                prop_assert!(s > x.max(0.0));
            }
        }

        #[test]
        fn sigmoid_matches_softplus_derivative(x in -30.0f64..30.0) {
            let h = 1e-6;
            let fd = (softplus(x + h) - softplus(x - h)) / (2.0 * h);
            prop_assert!((fd - sigmoid(x)).abs() < 1e-6);
            prop_assert!((fd - sigmoid(x)).abs() <= 1e-6 * sigmoid(x).max(1e-3));
        }

        #[test]
        fn sigmoid_is_symmetric(x in -700.0f64..700.0) {
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() <= 2.0 * f64::EPSILON);
        }

        #[test]
        fn sigmoid_is_increasing(a in -20.0f64..20.0, b in -20.0f64..20.0) {
            prop_assume!(a != b);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(sigmoid(lo) < sigmoid(hi));
        }

        #[test]
        fn matvec_is_linear(
            vals in proptest::collection::vec(-1.0f64..1.0, 12),
            u in proptest::collection::vec(-1.0f64..1.0, 4),
            v in proptest::collection::vec(-1.0f64..1.0, 4),
            a in -2.0f64..2.0,
            b in -2.0f64..2.0,
        ) {
            let m = Matrix::from_row_major(3, 4, vals).unwrap();
            let mixed: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let lhs = m.matvec(&mixed).unwrap();
            let mu = m.matvec(&u).unwrap();
            let mv = m.matvec(&v).unwrap();
            for k in 0..3 {
                prop_assert!((lhs[k] - (a * mu[k] + b * mv[k])).abs() < 1e-12);
            }
        }
    }
}
