//! Eigenvalues by Hessenberg reduction and shifted complex QR.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use super::matrix::{vec_norm, CMatrix};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// All eigenvalues, sorted by non-increasing modulus.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    assert!(m.is_square());
    let n = m.rows();
    let mut vals = match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let (l1, l2) = quadratic_roots(a + d, a * d - b * c);
            vec![l1, l2]
        }
        _ => qr_eigenvalues(m)?,
    };
    vals.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    Ok(vals)
}

/// Eigenvalue moduli, sorted non-increasing.
pub fn eigen_moduli(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(eigenvalues(m)?.into_iter().map(|z| z.norm()).collect())
}

/// Roots of `x^2 - tr x + det` without cancellation: the larger root comes from
/// the sum with aligned signs, the other from `det / root`.
pub fn quadratic_roots(tr: C64, det: C64) -> (C64, C64) {
    let half = tr * 0.5;
    let disc = (half * half - det).sqrt();
    let big = if (half.conj() * disc).re >= 0.0 {
        half + disc
    } else {
        half - disc
    };
    if big.norm() == 0.0 {
        return (ZERO, ZERO);
    }
    (big, det / big)
}

fn hessenberg(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let s: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                h[(i, k + 1 + j)] -= s * v[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn qr_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.rows();
    let mut h = hessenberg(m);
    let mut vals = vec![ZERO; n];
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    let mut sweeps = 0usize;
    let cap = 60 * n;
    let mut rot: Vec<(C64, C64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            vals[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if s == 0.0 { 1.0 } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            vals[hi] = h[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        since_deflation += 1;
        if sweeps > cap {
            return Err(Error::Convergence { iterations: sweeps });
        }
        let shift = if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75, 0.4375) * h[(hi, hi - 1)].norm()
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let (r1, r2) = quadratic_roots(a + d, a * d - b * c);
            if (r1 - d).norm() <= (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        rot.clear();
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = x.norm().hypot(y.norm());
            let (c, s) = if r == 0.0 {
                (C64::new(1.0, 0.0), ZERO)
            } else {
                (x / r, y / r)
            };
            for j in k..=hi {
                let u = h[(k, j)];
                let w = h[(k + 1, j)];
                h[(k, j)] = c.conj() * u + s.conj() * w;
                h[(k + 1, j)] = -s * u + c * w;
            }
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 2).min(hi) {
                let u = h[(i, k)];
                let w = h[(i, k + 1)];
                h[(i, k)] = u * c + w * s;
                h[(i, k + 1)] = -u * s.conj() + w * c.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(vals)
}

/// Eigenvector for an (approximate) eigenvalue by shifted inverse iteration.
/// The result has unit Euclidean norm.
pub fn eigenvector(m: &CMatrix, eigenvalue: C64) -> Vec<C64> {
    let n = m.rows();
    let scale = m.max_abs().max(eigenvalue.norm()).max(f64::MIN_POSITIVE);
    let mut shifted = m.clone();
    let sigma = eigenvalue + C64::new(1e-11, 0.7e-11) * scale;
    for i in 0..n {
        shifted[(i, i)] -= sigma;
    }
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * i as f64, 0.05 * (i as f64 + 1.0)))
        .collect();
    for _ in 0..4 {
        let Some(mut w) = shifted.solve(&v) else {
            break;
        };
        let nrm = vec_norm(&w);
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        for z in &mut w {
            *z /= nrm;
        }
        v = w;
    }
    let nrm = vec_norm(&v);
    v.iter().map(|z| z / nrm).collect()
}
