use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix. Sizes stay small (at most 70 for exterior
/// powers of 8x8 matrices), so everything is straightforward O(n^3).
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let owned: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&owned)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        // scaled to avoid overflow of the squares
        let max = self.max_abs();
        if max == 0.0 || !max.is_finite() {
            return max;
        }
        let s: f64 = self.data.iter().map(|z| (z / max).norm_sqr()).sum();
        max * s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator 2-norm, from the largest eigenvalue of `M^H M`. Diagnostics only.
    pub fn operator_norm(&self) -> Result<f64> {
        let gram = self.adjoint().matmul(self);
        let top = super::eigen::eigenvalues(&gram)?
            .into_iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Ok(top.sqrt())
    }

    pub fn scale(&mut self, s: C64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.scale(s);
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn adjoint(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        mul_into(self, rhs, &mut out);
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn lu(&self) -> Option<(CMatrix, Vec<usize>, bool)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .unwrap();
            if a[(p, k)].norm() == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn det(&self) -> C64 {
        assert!(self.is_square());
        match self.rows {
            0 => ONE,
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            n => match self.lu() {
                None => ZERO,
                Some((lu, _, odd)) => {
                    let p: C64 = (0..n).map(|i| lu[(i, i)]).product();
                    if odd {
                        -p
                    } else {
                        p
                    }
                }
            },
        }
    }

    /// Solves `self * x = b` by partial-pivot LU.
    pub fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut x: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = lu[(i, j)] * x[j];
                x[i] -= t;
            }
            x[i] /= lu[(i, i)];
        }
        Some(x)
    }

    /// Numerical inverse; fails unless `max |M M^-1 - I| <= 1e-10`.
    pub fn inverse(&self) -> Result<CMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let inv = if n == 2 {
            let det = self.det();
            let m = &self.data;
            CMatrix::from_vec(2, 2, vec![m[3] / det, -m[1] / det, -m[2] / det, m[0] / det])
        } else {
            let (lu, perm, _) = self.lu().ok_or(Error::Singular {
                residual: f64::INFINITY,
            })?;
            let mut inv = CMatrix::zeros(n, n);
            for col in 0..n {
                let mut x: Vec<C64> = perm.iter().map(|&p| if p == col { ONE } else { ZERO }).collect();
                for i in 0..n {
                    for j in 0..i {
                        let t = lu[(i, j)] * x[j];
                        x[i] -= t;
                    }
                }
                for i in (0..n).rev() {
                    for j in i + 1..n {
                        let t = lu[(i, j)] * x[j];
                        x[i] -= t;
                    }
                    x[i] /= lu[(i, i)];
                }
                for i in 0..n {
                    inv[(i, col)] = x[i];
                }
            }
            inv
        };
        let residual = self.matmul(&inv).max_abs_diff(&CMatrix::identity(n));
        if !(residual <= 1e-10) {
            return Err(Error::Singular { residual });
        }
        Ok(inv)
    }

    /// Multiplies by `det^(-1/d)` (principal root) when `|det - 1|` exceeds `tol`.
    /// Returns the deviation that was observed.
    pub fn renormalize_det(&mut self, tol: f64) -> f64 {
        let det = self.det();
        let dev = (det - ONE).norm();
        if dev > tol && det.norm() > 0.0 {
            let root = det.powf(1.0 / self.rows as f64);
            self.scale(root.inv());
        }
        dev
    }
}

/// `out = a * b` without allocating.
pub fn mul_into(a: &CMatrix, b: &CMatrix, out: &mut CMatrix) {
    assert_eq!(a.cols, b.rows);
    assert_eq!((out.rows, out.cols), (a.rows, b.cols));
    let (n, m, p) = (a.rows, a.cols, b.cols);
    if n == 2 && m == 2 && p == 2 {
        let (x, y) = (&a.data, &b.data);
        out.data[0] = x[0] * y[0] + x[1] * y[2];
        out.data[1] = x[0] * y[1] + x[1] * y[3];
        out.data[2] = x[2] * y[0] + x[3] * y[2];
        out.data[3] = x[2] * y[1] + x[3] * y[3];
        return;
    }
    for i in 0..n {
        for j in 0..p {
            let mut s = ZERO;
            for k in 0..m {
                s += a.data[i * m + k] * b.data[k * p + j];
            }
            out.data[i * p + j] = s;
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Euclidean norm of a complex vector, overflow-safe.
pub fn vec_norm(v: &[C64]) -> f64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    max * v.iter().map(|z| (z / max).norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
