use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use super::matrix::{inner, vec_norm};
use crate::{Error, Result, C64};

/// Point of `P(C^d)` in homogeneous coordinates, scaled so that the first
/// coordinate of maximal modulus equals exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    coords: Vec<C64>,
}

/// Hyperplane `{x : sum_i coeffs_i x_i = 0}`, normalised like [`ProjPoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjHyperplane {
    coeffs: Vec<C64>,
}

fn normalize(v: &[C64]) -> Result<Vec<C64>> {
    let (idx, max) = v
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, 0.0), |acc, (i, m)| if m > acc.1 { (i, m) } else { acc });
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::InvalidArgument("zero or non-finite projective vector".into()));
    }
    let pivot = v[idx];
    let mut out: Vec<C64> = v.iter().map(|z| z / pivot).collect();
    out[idx] = C64::new(1.0, 0.0);
    Ok(out)
}

impl ProjPoint {
    pub fn new(v: &[C64]) -> Result<Self> {
        Ok(ProjPoint { coords: normalize(v)? })
    }

    /// The `i`-th standard basis line.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut coords = alloc::vec![C64::new(0.0, 0.0); d];
        coords[i] = C64::new(1.0, 0.0);
        ProjPoint { coords }
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Unit-norm lift.
    pub fn unit_lift(&self) -> Vec<C64> {
        let n = vec_norm(&self.coords);
        self.coords.iter().map(|z| z / n).collect()
    }
}

impl ProjHyperplane {
    pub fn new(coeffs: &[C64]) -> Result<Self> {
        Ok(ProjHyperplane {
            coeffs: normalize(coeffs)?,
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn contains(&self, p: &ProjPoint, tol: f64) -> bool {
        self.sin_distance(p) <= tol
    }

    /// Sine of the Fubini-Study distance from `p` to the hyperplane:
    /// `|l(x)| / (|l| |x|)`.
    pub fn sin_distance(&self, p: &ProjPoint) -> f64 {
        let num: C64 = self.coeffs.iter().zip(p.coords()).map(|(a, b)| a * b).sum();
        num.norm() / (vec_norm(&self.coeffs) * vec_norm(p.coords()))
    }

    /// Fubini-Study distance from `p` to the hyperplane, in `[0, pi/2]`.
    pub fn distance(&self, p: &ProjPoint) -> f64 {
        self.sin_distance(p).min(1.0).asin()
    }
}

/// Fubini-Study distance `arccos(|<p, q>| / (|p| |q|))`, evaluated as
/// `atan2(|p ^ q|, |<p, q>|)` which stays accurate for nearby points.
pub fn fubini_study_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    vector_distance(p.coords(), q.coords())
}

/// Same as [`fubini_study_distance`] on raw nonzero vectors.
pub fn vector_distance(u: &[C64], v: &[C64]) -> f64 {
    assert_eq!(u.len(), v.len());
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    let a: Vec<C64> = u.iter().map(|z| z / nu).collect();
    let b: Vec<C64> = v.iter().map(|z| z / nv).collect();
    let cos = inner(&a, &b).norm();
    let mut wedge = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            wedge += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    wedge.sqrt().atan2(cos)
}
