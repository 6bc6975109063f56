//! Test families and small helpers shared by the integration tests.

#![allow(dead_code)]

use bifurclab_core::family::parse_family;
use bifurclab_core::{CMatrix, RepFamily, StepMeasure, C64};
use rand::Rng;

/// `a = diag(l, 1/l)`.
pub fn diagonal() -> RepFamily {
    parse_family(r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#).unwrap()
}

/// `{a: 0.75, A: 0.25}` on the diagonal family.
pub fn biased(f: &RepFamily) -> StepMeasure {
    let a = f.word("a").unwrap();
    StepMeasure::new(vec![(a.clone(), 0.75), (a.inverse(), 0.25)]).unwrap()
}

/// `a = diag(l, 1/l)` and its conjugate by the hyperbolic rotation with
/// `cosh = (l + 1/l)/2`; for `|l| >= 3` the pair plays ping-pong on the
/// discs `|z| < 1/3`, `|z| > 3`, `|z - 5/4| < 3/4`, `|z + 5/4| < 3/4`.
pub fn schottky() -> RepFamily {
    parse_family(
        r#"{"dimension":2,"generators":{
            "a":[["l","0"],["0","1/l"]],
            "b":[["(l+1/l)/2","(l-1/l)/2"],["(l-1/l)/2","(l+1/l)/2"]]},
            "poles":[[0,0]]}"#,
    )
    .unwrap()
}

pub const SCHOTTKY_LAMBDAS: [(f64, f64); 5] = [(3.0, 0.0), (4.0, 0.0), (3.0, 1.0), (2.5, -1.5), (-3.0, 0.0)];

/// `a` unipotent, `b(l)` lower unipotent with entry `l`.
pub fn riley() -> RepFamily {
    parse_family(r#"{"dimension":2,"generators":{"a":[["1","2"],["0","1"]],"b":[["1","0"],["l","1"]]}}"#).unwrap()
}

/// A fixed Schottky pair conjugated by an upper-triangular `C_l`; every
/// spectrum is independent of `l`.
pub fn conjugation() -> RepFamily {
    parse_family(
        r#"{"dimension":2,"generators":{
            "a":[["3","-8*l/3"],["0","1/3"]],
            "b":[["5/3+4*l/3","4/3-4*l^2/3"],["4/3","5/3-4*l/3"]]}}"#,
    )
    .unwrap()
}

/// Two constant elements of SU(2).
pub fn su2() -> RepFamily {
    parse_family(
        r#"{"dimension":2,"generators":{
            "a":[["0.6+0.8*i","0"],["0","0.6-0.8*i"]],
            "b":[["0.6","-0.8"],["0.8","0.6"]]}}"#,
    )
    .unwrap()
}

/// `diag(l, 1, 1/l)` together with a fixed rational rotation of R^3.
pub fn diagonal_rotation() -> RepFamily {
    parse_family(
        r#"{"dimension":3,"generators":{
            "a":[["l","0","0"],["0","1","0"],["0","0","1/l"]],
            "r":[["2/3","-1/3","2/3"],["2/3","2/3","-1/3"],["-1/3","2/3","2/3"]]},
            "poles":[[0,0]]}"#,
    )
    .unwrap()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_complex<R: Rng>(r: &mut R) -> C64 {
    C64::new(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
}

pub fn random_matrix<R: Rng>(r: &mut R, d: usize) -> CMatrix {
    CMatrix::from_vec(d, d, (0..d * d).map(|_| random_complex(r)).collect())
}

/// Random matrix rescaled to determinant 1.
pub fn random_sl<R: Rng>(r: &mut R, d: usize) -> CMatrix {
    loop {
        let m = random_matrix(r, d);
        let det = m.det();
        if det.norm() > 1e-3 {
            return m.scaled(det.powf(-1.0 / d as f64));
        }
    }
}

/// `E f(S_n)` for the `+-1` walk with `P(+1) = p`, from the binomial
/// distribution in log space.
pub fn binomial_expectation(p: f64, n: usize, f: impl Fn(i64) -> f64) -> f64 {
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            ln_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        let log_w = ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
        total += log_w.exp() * f(2 * k as i64 - n as i64);
    }
    total
}

/// Exact `E (1/n) log ||diag(l^S_n, l^-S_n)||_F` for real `l > 1`.
pub fn diagonal_chi_oracle(p: f64, n: usize, l: f64) -> f64 {
    binomial_expectation(p, n, |s| {
        let a = s.unsigned_abs() as f64 * l.ln();
        a + 0.5 * (-4.0 * a).exp().ln_1p()
    }) / n as f64
}
