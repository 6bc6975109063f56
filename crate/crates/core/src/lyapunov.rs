//! Monte-Carlo Lyapunov exponents at a fixed parameter.
//!
//! Every estimator averages over `trials` independent walks of `n` increments.
//! Trial `t` always draws from the stream `(seed, TRIAL, t)`, so estimators
//! called with the same seed see the same walks.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use serde::Serialize;

use crate::exec::Executor;
use crate::family::{walk_product, Dual, Exterior, Representation};
use crate::linalg::{binomial, CMatrix, QrFrame};
use crate::rng::{self, purpose};
use crate::stats::{batch_means_stderr, summarize};
use crate::walk::{StepMeasure, Walk};
use crate::{Error, Result, C64};

/// Inversions of the raw QR averages below this size are rounding, not
/// disorder: with identical trials the standard error is exactly 0.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Largest exterior power dimension accepted by [`chi_exterior`].
pub const MAX_EXTERIOR_DIM: usize = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Norm,
    Qr,
    Exterior,
}

/// Walk length, number of trials and seed shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WalkParams {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

impl WalkParams {
    pub fn new(n: usize, trials: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("walk length n must be at least 1".into()));
        }
        if trials < 2 {
            return Err(Error::InvalidArgument("at least 2 trials are needed for error bars".into()));
        }
        Ok(WalkParams { n, trials, seed })
    }
}

/// A Lyapunov exponent (or a partial sum of exponents) with its error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapEstimate {
    /// 1-based exponent index; for partial sums and exterior powers, the
    /// number of exponents summed.
    pub index: usize,
    /// Nats per step.
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl LyapEstimate {
    fn from_samples(index: usize, samples: &[f64], p: &WalkParams, estimator: Estimator) -> Self {
        let s = summarize(samples);
        LyapEstimate {
            index,
            value: s.mean,
            stderr: s.stderr,
            n: p.n,
            trials: p.trials,
            seed: p.seed,
            estimator,
        }
    }

    fn exact(index: usize, value: f64, p: &WalkParams, estimator: Estimator) -> Self {
        LyapEstimate {
            index,
            value,
            stderr: 0.0,
            n: p.n,
            trials: p.trials,
            seed: p.seed,
            estimator,
        }
    }
}

/// `sqrt(a^2 + b^2)`, the standard error of a difference of independent
/// estimates (conservative for positively correlated ones).
pub fn combined_stderr(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// The `t`-th walk of a run.
pub fn trial_walk(mu: &StepMeasure, n: usize, seed: u64, t: usize) -> Walk {
    let mut rng = rng::stream(seed, rng::stream_id(purpose::TRIAL, t as u64));
    mu.draw(n, &mut rng)
}

fn atom_images<R: Representation>(rep: &R, l: C64, mu: &StepMeasure) -> Result<Vec<CMatrix>> {
    check_span(rep, mu)?;
    Ok(rep.images(l)?.atoms(mu))
}

fn check_span<R: Representation>(rep: &R, mu: &StepMeasure) -> Result<()> {
    if mu.generator_span() > rep.generator_count() {
        return Err(Error::InvalidMeasure(alloc::format!(
            "measure uses {} generators, family declares {}",
            mu.generator_span(),
            rep.generator_count()
        )));
    }
    Ok(())
}

/// Per-trial values of `(1/n) log ||rho(gamma_n) ... rho(gamma_1)||_F`.
pub fn norm_samples<R, E>(rep: &R, l: C64, mu: &StepMeasure, p: &WalkParams, exec: &E) -> Result<Vec<f64>>
where
    R: Representation,
    E: Executor,
{
    let atoms = atom_images(rep, l, mu)?;
    let samples = exec.map(p.trials, |t| {
        let walk = trial_walk(mu, p.n, p.seed, t);
        walk_product(&atoms, &walk.increments).log_norm() / p.n as f64
    });
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            generator: alloc::format!("walk product (log-norm {bad})"),
            at: l,
        });
    }
    Ok(samples)
}

/// Top exponent by the norm estimator.
pub fn chi_top<R, E>(rep: &R, l: C64, mu: &StepMeasure, p: &WalkParams, exec: &E) -> Result<LyapEstimate>
where
    R: Representation,
    E: Executor,
{
    let samples = norm_samples(rep, l, mu, p, exec)?;
    Ok(LyapEstimate::from_samples(1, &samples, p, Estimator::Norm))
}

/// `chi_1 + ... + chi_k` as the top exponent of the `k`-th exterior power.
/// For `k = d` the exterior power of an `SL(d)` representation is trivial and
/// the answer is exactly 0.
pub fn chi_exterior<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &WalkParams,
    k: usize,
    exec: &E,
) -> Result<LyapEstimate>
where
    R: Representation,
    E: Executor,
{
    let d = rep.dim();
    if !(1..=d).contains(&k) {
        return Err(Error::InvalidArgument(alloc::format!("exterior index {k} outside 1..={d}")));
    }
    if binomial(d, k) > MAX_EXTERIOR_DIM {
        return Err(Error::InvalidArgument(alloc::format!(
            "exterior power of dimension {} exceeds {MAX_EXTERIOR_DIM}",
            binomial(d, k)
        )));
    }
    check_span(rep, mu)?;
    if k == d {
        return Ok(LyapEstimate::exact(k, 0.0, p, Estimator::Exterior));
    }
    let ext = Exterior { inner: rep, k };
    let samples = norm_samples(&ext, l, mu, p, exec)?;
    Ok(LyapEstimate::from_samples(k, &samples, p, Estimator::Exterior))
}

/// Top-`k` spectrum from the QR estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// `chi_1 >= ... >= chi_k`.
    pub exponents: Vec<LyapEstimate>,
    /// `chi_1 + ... + chi_i` for `i = 1..=k`, with error bars computed from
    /// the per-trial partial sums.
    pub partial_sums: Vec<LyapEstimate>,
}

impl Spectrum {
    /// Sum of all reported exponents (the last partial sum).
    pub fn sum(&self) -> LyapEstimate {
        *self.partial_sums.last().expect("spectrum is never empty")
    }
}

/// Per-trial, per-index QR increments averaged over the walk.
pub fn qr_samples<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &WalkParams,
    k: usize,
    exec: &E,
) -> Result<Vec<Vec<f64>>>
where
    R: Representation,
    E: Executor,
{
    let d = rep.dim();
    if !(1..=d).contains(&k) {
        return Err(Error::InvalidArgument(alloc::format!("spectrum size {k} outside 1..={d}")));
    }
    let atoms = atom_images(rep, l, mu)?;
    let per_trial = exec.map(p.trials, |t| -> Result<Vec<f64>> {
        let walk = trial_walk(mu, p.n, p.seed, t);
        let mut frame = QrFrame::generic(d, k);
        let mut acc = vec![0.0; k];
        let mut inc = vec![0.0; k];
        for &i in &walk.increments {
            frame.step(&atoms[i], &mut inc)?;
            for (a, x) in acc.iter_mut().zip(&inc) {
                *a += x;
            }
        }
        Ok(acc.into_iter().map(|a| a / p.n as f64).collect())
    });
    per_trial.into_iter().collect()
}

/// Top-`k` exponents by accumulated QR increments.
///
/// Raw averages that are out of order by more than three combined standard
/// errors are reported as [`Error::OrderViolation`]; smaller inversions are
/// sorted away.
pub fn chi_spectrum_qr<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &WalkParams,
    k: usize,
    exec: &E,
) -> Result<Spectrum>
where
    R: Representation,
    E: Executor,
{
    let samples = qr_samples(rep, l, mu, p, k, exec)?;
    let column = |i: usize| -> Vec<f64> { samples.iter().map(|s| s[i]).collect() };
    let mut exponents: Vec<LyapEstimate> = (0..k)
        .map(|i| LyapEstimate::from_samples(i + 1, &column(i), p, Estimator::Qr))
        .collect();
    for i in 0..k.saturating_sub(1) {
        let (a, b) = (exponents[i], exponents[i + 1]);
        if a.value < b.value - 3.0 * combined_stderr(a.stderr, b.stderr) - ROUNDING_FLOOR {
            return Err(Error::OrderViolation { index: i + 1 });
        }
    }
    exponents.sort_by(|a, b| b.value.total_cmp(&a.value));
    for (i, e) in exponents.iter_mut().enumerate() {
        e.index = i + 1;
    }
    let partial_sums = (0..k)
        .map(|i| {
            let sums: Vec<f64> = samples.iter().map(|s| s[..=i].iter().sum()).collect();
            LyapEstimate::from_samples(i + 1, &sums, p, Estimator::Qr)
        })
        .collect();
    Ok(Spectrum {
        exponents,
        partial_sums,
    })
}

/// Comparison of the spectrum of a walk with that of its dual walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualReport {
    pub spectrum: Spectrum,
    pub dual_spectrum: Spectrum,
    /// `max_i |chi*_i + chi_{d+1-i}|`.
    pub max_deviation: f64,
    /// Three combined standard errors at the index attaining the maximum
    /// deviation ratio.
    pub tolerance: f64,
    /// Whether every index satisfies `|chi*_i + chi_{d+1-i}| <= 3 * combined stderr`.
    pub within_tolerance: bool,
}

/// Runs the QR spectrum on `rep` and on its dual with the same measure and
/// seed and compares `chi*_i` with `-chi_{d+1-i}`.
pub fn dual_spectrum_check<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &WalkParams,
    exec: &E,
) -> Result<DualReport>
where
    R: Representation,
    E: Executor,
{
    let d = rep.dim();
    let spectrum = chi_spectrum_qr(rep, l, mu, p, d, exec)?;
    let dual_spectrum = chi_spectrum_qr(&Dual(rep), l, mu, p, d, exec)?;
    let mut max_deviation: f64 = 0.0;
    let mut tolerance = 0.0;
    let mut within_tolerance = true;
    let mut worst_ratio = -1.0;
    for i in 0..d {
        let a = dual_spectrum.exponents[i];
        let b = spectrum.exponents[d - 1 - i];
        let dev = (a.value + b.value).abs();
        let tol = 3.0 * combined_stderr(a.stderr, b.stderr);
        max_deviation = max_deviation.max(dev);
        if dev > tol {
            within_tolerance = false;
        }
        let ratio = if tol > 0.0 { dev / tol } else if dev > 0.0 { f64::INFINITY } else { 0.0 };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            tolerance = tol;
        }
    }
    Ok(DualReport {
        spectrum,
        dual_spectrum,
        max_deviation,
        tolerance,
        within_tolerance,
    })
}

/// Top exponent along one long trajectory, with a batch-means error bar
/// (diagnostic counterpart of [`chi_top`]).
pub fn chi_top_trajectory<R: Representation>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    n: usize,
    seed: u64,
    batches: usize,
) -> Result<(f64, f64)> {
    let atoms = atom_images(rep, l, mu)?;
    let walk = trial_walk(mu, n, seed, 0);
    let d = rep.dim();
    let mut frame = QrFrame::generic(d, 1);
    let mut inc = [0.0];
    let mut steps = Vec::with_capacity(n);
    for &i in &walk.increments {
        frame.step(&atoms[i], &mut inc)?;
        steps.push(inc[0]);
    }
    let mean = steps.iter().sum::<f64>() / n as f64;
    Ok((mean, batch_means_stderr(&steps, batches)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{parse_family, Constant};
    use crate::exec::Serial;

    fn biased() -> (crate::RepFamily, StepMeasure) {
        let f = parse_family(r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#).unwrap();
        let a = f.word("a").unwrap();
        let mu = StepMeasure::new(vec![(a.clone(), 0.75), (a.inverse(), 0.25)]).unwrap();
        (f, mu)
    }

    #[test]
    fn identity_family_is_exactly_zero() {
        let id = Constant::new(vec![CMatrix::identity(2)]).unwrap();
        let mu = StepMeasure::uniform_symmetric(1).unwrap();
        let p = WalkParams::new(50, 4, 1).unwrap();
        // Frobenius norm: ||I||_F = sqrt(2) at every n
        let e = chi_top(&id, C64::new(0.0, 0.0), &mu, &p, &Serial).unwrap();
        assert!((e.value - 0.5 * 2f64.ln() / 50.0).abs() < 1e-15);
        assert_eq!(e.stderr, 0.0);
        let s = chi_spectrum_qr(&id, C64::new(0.0, 0.0), &mu, &p, 2, &Serial).unwrap();
        assert!(s.exponents.iter().all(|x| x.value.abs() < 1e-14));
    }

    #[test]
    fn exterior_one_equals_norm_estimator() {
        let (f, mu) = biased();
        let p = WalkParams::new(100, 8, 3).unwrap();
        let l = C64::new(2.0, 0.0);
        let a = chi_top(&f, l, &mu, &p, &Serial).unwrap();
        let b = chi_exterior(&f, l, &mu, &p, 1, &Serial).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12);
        let top = chi_exterior(&f, l, &mu, &p, 2, &Serial).unwrap();
        assert_eq!(top.value, 0.0);
    }

    #[test]
    fn determinism() {
        let (f, mu) = biased();
        let p = WalkParams::new(64, 5, 9).unwrap();
        let l = C64::new(1.5, 0.5);
        let a = chi_spectrum_qr(&f, l, &mu, &p, 2, &Serial).unwrap();
        let b = chi_spectrum_qr(&f, l, &mu, &p, 2, &Serial).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn argument_validation() {
        assert!(WalkParams::new(0, 4, 0).is_err());
        assert!(WalkParams::new(4, 1, 0).is_err());
        let (f, _) = biased();
        let mu = StepMeasure::uniform_symmetric(2).unwrap();
        let p = WalkParams::new(4, 2, 0).unwrap();
        assert!(matches!(chi_top(&f, C64::new(2.0, 0.0), &mu, &p, &Serial), Err(Error::InvalidMeasure(_))));
    }
}
