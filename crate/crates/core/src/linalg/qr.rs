use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use super::matrix::{mul_into, CMatrix};
use crate::{Error, Result, C64};

/// Orthonormal `d x k` frame pushed through matrix factors.
///
/// Each step forms `M * frame`, re-orthonormalises it by modified Gram-Schmidt
/// (run twice, which keeps columns orthonormal to rounding) and returns
/// `log |R_ii|` for the diagonal of the triangular factor.
#[derive(Debug, Clone)]
pub struct QrFrame {
    frame: CMatrix,
    scratch: CMatrix,
}

impl QrFrame {
    /// First `k` standard basis vectors of `C^d`.
    pub fn standard(d: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= d);
        let mut frame = CMatrix::zeros(d, k);
        for i in 0..k {
            frame[(i, i)] = C64::new(1.0, 0.0);
        }
        QrFrame {
            frame,
            scratch: CMatrix::zeros(d, k),
        }
    }

    /// A fixed frame in general position: the orthonormalised first `k`
    /// columns of the Vandermonde matrix on `d` distinct points of the unit
    /// circle. Unlike [`QrFrame::standard`] it is not contained in any
    /// coordinate subspace, so it also finds the top exponents of reducible
    /// (for instance diagonal) products.
    pub fn generic(d: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= d);
        let mut frame = CMatrix::zeros(d, k);
        for i in 0..d {
            let z = C64::from_polar(1.0, 1.0 + 2.399_963_229_728_653 * i as f64);
            for j in 0..k {
                frame[(i, j)] = z.powi(j as i32);
            }
        }
        let mut scratch = alloc::vec![0.0; k];
        orthonormalize(&mut frame, &mut scratch).expect("Vandermonde columns on distinct nodes are independent");
        QrFrame::from_matrix(frame)
    }

    pub fn from_matrix(frame: CMatrix) -> Self {
        let scratch = CMatrix::zeros(frame.rows(), frame.cols());
        QrFrame { frame, scratch }
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    /// Advances by one factor, writing the `k` log-diagonal increments into
    /// `increments`.
    pub fn step(&mut self, m: &CMatrix, increments: &mut [f64]) -> Result<()> {
        mul_into(m, &self.frame, &mut self.scratch);
        core::mem::swap(&mut self.frame, &mut self.scratch);
        orthonormalize(&mut self.frame, increments)
    }
}

/// In-place thin QR of the columns; `log_diag[j] = log |R_jj|`.
fn orthonormalize(a: &mut CMatrix, log_diag: &mut [f64]) -> Result<()> {
    let (d, k) = (a.rows(), a.cols());
    assert_eq!(log_diag.len(), k);
    for j in 0..k {
        // pre-scale the column so squares cannot overflow
        let colmax = (0..d).map(|i| a[(i, j)].norm()).fold(0.0, f64::max);
        if !(colmax > 0.0) || !colmax.is_finite() {
            return Err(Error::RankCollapse { index: j });
        }
        for i in 0..d {
            a[(i, j)] /= colmax;
        }
        let mut log_r = colmax.ln();
        for _pass in 0..2 {
            for p in 0..j {
                let proj: C64 = (0..d).map(|i| a[(i, p)].conj() * a[(i, j)]).sum();
                for i in 0..d {
                    let t = a[(i, p)] * proj;
                    a[(i, j)] -= t;
                }
            }
            let nrm = (0..d).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            if !(nrm > 0.0 && nrm.is_finite()) {
                return Err(Error::RankCollapse { index: j });
            }
            for i in 0..d {
                a[(i, j)] /= nrm;
            }
            log_r += nrm.ln();
        }
        if log_r < (1e-300f64).ln() {
            return Err(Error::RankCollapse { index: j });
        }
        log_diag[j] = log_r;
    }
    Ok(())
}

/// One QR step on a standalone frame: `(Q, log|R_ii|)` for `M * frame`.
pub fn qr_step(frame: &CMatrix, m: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let mut f = QrFrame::from_matrix(frame.clone());
    let mut inc = alloc::vec![0.0; frame.cols()];
    f.step(m, &mut inc)?;
    Ok((f.frame, inc))
}

/// `max |Q^H Q - I|`.
pub fn orthonormality_defect(frame: &CMatrix) -> f64 {
    let g = frame.adjoint().matmul(frame);
    g.max_abs_diff(&CMatrix::identity(frame.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_step() {
        let f = QrFrame::standard(3, 2);
        let (q, inc) = qr_step(f.frame(), &CMatrix::identity(3)).unwrap();
        assert_eq!(&q, f.frame());
        assert!(inc.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn diagonal_step() {
        let m = CMatrix::diag(&[C64::new(4.0, 0.0), C64::new(0.25, 0.0)]);
        let f = QrFrame::standard(2, 2);
        let (_, inc) = qr_step(f.frame(), &m).unwrap();
        assert!((inc[0] - 4f64.ln()).abs() < 1e-14);
        assert!((inc[1] + 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn generic_frame_is_orthonormal_and_off_the_axes() {
        for (d, k) in [(2, 1), (2, 2), (3, 2), (8, 8)] {
            let f = QrFrame::generic(d, k);
            assert!(orthonormality_defect(f.frame()) < 1e-14);
            assert!(f.frame().as_slice().iter().all(|z| z.norm() > 1e-3));
        }
    }

    #[test]
    fn collapse_detected() {
        let m = CMatrix::zeros(2, 2);
        let f = QrFrame::standard(2, 1);
        assert!(matches!(qr_step(f.frame(), &m), Err(Error::RankCollapse { index: 0 })));
    }
}
