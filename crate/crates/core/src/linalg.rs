//! Small dense complex matrices and a partial-pivoting LU solve.

use std::ops::{Index, IndexMut};

use crate::{Complex, Error, Result};

/// Pivots smaller than this times the largest entry of the matrix are
/// treated as zero.
const PIVOT_RTOL: f64 = 1e-14;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![Complex::new(0.0, 0.0); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self, rtol: f64) -> bool {
        let scale = self.max_abs();
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).norm() <= rtol * scale))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn mul_vec(&self, x: &[Complex]) -> Vec<Complex> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[Complex]) -> Result<Vec<Complex>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::LengthMismatch(format!("matrix is {n}x{n}, right-hand side has {}", rhs.len())));
        }
        let scale = self.max_abs();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::SingularMatrix { column: 0, pivot: 0.0 });
        }
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let (p, pivot) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= PIVOT_RTOL * scale {
                return Err(Error::SingularMatrix { column: col, pivot });
            }
            if p != col {
                for k in 0..n {
                    a.swap(col * n + k, p * n + k);
                }
                b.swap(col, p);
            }
            let inv = a[col * n + col].inv();
            for r in col + 1..n {
                let factor = a[r * n + col] * inv;
                if factor == Complex::new(0.0, 0.0) {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= factor * v;
                }
                let v = b[col];
                b[r] -= factor * v;
            }
        }
        let mut x = vec![Complex::new(0.0, 0.0); n];
        for r in (0..n).rev() {
            let tail: Complex = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
            x[r] = (b[r] - tail) / a[r * n + r];
        }
        Ok(x)
    }

    /// `||A x - b|| / ||b||` in the Euclidean norm.
    pub fn relative_residual(&self, x: &[Complex], b: &[Complex]) -> f64 {
        let ax = self.mul_vec(x);
        let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;

    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}
