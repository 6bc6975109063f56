#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use super::matrix::{mul_into, CMatrix};
use crate::C64;

/// Composition order for evaluating a word `s_1 ... s_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// `rho(s_1) rho(s_2) ... rho(s_m)`, the homomorphic image of the word.
    Left,
    /// `rho(s_m) ... rho(s_1)`.
    Right,
}

/// A matrix product kept as `exp(log_scale) * matrix` so that long products
/// neither overflow nor underflow.
///
/// After every factor the matrix part is rescaled to unit Frobenius norm; the
/// only exception is a fresh identity, whose norm `sqrt(d)` already lies in
/// `[1/2, 2]` for `d <= 4`.
#[derive(Debug, Clone)]
pub struct ScaledProduct {
    matrix: CMatrix,
    log_scale: f64,
    scratch: CMatrix,
}

impl ScaledProduct {
    pub fn identity(d: usize) -> Self {
        let mut p = ScaledProduct {
            matrix: CMatrix::identity(d),
            log_scale: 0.0,
            scratch: CMatrix::zeros(d, d),
        };
        let f = (d as f64).sqrt();
        if !(0.5..=2.0).contains(&f) {
            p.matrix.scale(C64::new(1.0 / f, 0.0));
            p.log_scale = f.ln();
        }
        p
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut p = ScaledProduct {
            matrix: m.clone(),
            log_scale: 0.0,
            scratch: CMatrix::zeros(m.rows(), m.cols()),
        };
        p.normalize();
        p
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Matrix part, Frobenius norm in `[1/2, 2]`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `log ||P||_F` of the true product.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.matrix.frobenius_norm().ln()
    }

    /// The true product; overflows to infinity for very long words.
    pub fn to_matrix(&self) -> CMatrix {
        self.matrix.scaled(C64::new(self.log_scale.exp(), 0.0))
    }

    /// `self <- self * m`
    pub fn mul_right(&mut self, m: &CMatrix) {
        mul_into(&self.matrix, m, &mut self.scratch);
        core::mem::swap(&mut self.matrix, &mut self.scratch);
        self.normalize();
    }

    /// `self <- m * self`
    pub fn mul_left(&mut self, m: &CMatrix) {
        mul_into(m, &self.matrix, &mut self.scratch);
        core::mem::swap(&mut self.matrix, &mut self.scratch);
        self.normalize();
    }

    fn normalize(&mut self) {
        let f = self.matrix.frobenius_norm();
        if f > 0.0 && f.is_finite() {
            self.matrix.scale(C64::new(1.0 / f, 0.0));
            self.log_scale += f.ln();
        }
    }

    /// `log|v|`-style evaluation of `P v`: returns the direction (unit norm)
    /// and the log of the true norm `log ||P v||`.
    pub fn apply(&self, v: &[C64]) -> (alloc::vec::Vec<C64>, f64) {
        let mut w = self.matrix.apply(v);
        let n = super::matrix::vec_norm(&w);
        for z in &mut w {
            *z /= n;
        }
        (w, self.log_scale + n.ln())
    }

    /// `log|det P|` of the true product.
    pub fn log_abs_det(&self) -> f64 {
        self.dim() as f64 * self.log_scale + self.matrix.det().norm().ln()
    }
}
