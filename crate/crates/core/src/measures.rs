//! Stationary measures on projective space, limit-set histograms and the
//! Furstenberg formula.
//!
//! The stationary measure `nu` of `rho_lambda` is sampled by the forward
//! chain `x <- rho_lambda(gamma) x` with `gamma ~ mu`. The dual chain runs the
//! same recursion for `rho^*`, whose action on coefficient vectors is the
//! action of `rho` on hyperplanes.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use serde::Serialize;

use crate::exec::Executor;
use crate::family::{walk_product, Dual, Representation};
use crate::grid::ScanGrid;
use crate::linalg::matrix::vec_norm;
use crate::linalg::{CMatrix, ProjHyperplane, ProjPoint};
use crate::lyapunov::{combined_stderr, LyapEstimate, ROUNDING_FLOOR};
use crate::proximality::{product_gap, SCAN_GAP_THRESHOLD};
use crate::rng::{self, purpose};
use crate::stats::{batch_means_stderr, summarize};
use crate::walk::StepMeasure;
use crate::{Error, Result, C64};

/// Default number of discarded chain steps.
pub const DEFAULT_BURN_IN: usize = 1000;
/// Default number of chain steps between recorded points.
pub const DEFAULT_THINNING: usize = 8;
/// Batches used for the standard errors of cloud averages.
pub const CLOUD_BATCHES: usize = 32;
/// Length and number of the sampled words behind [`PointCloud::proximal_fraction`].
pub const GAP_PROBE_LENGTH: usize = 40;
pub const GAP_PROBE_WORDS: usize = 16;
/// A chart coordinate is treated as vanishing below this fraction of the norm.
pub const CHART_ZERO: f64 = 1e-8;

/// Chain length, thinning, number of independent chains and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainParams {
    pub burn_in: usize,
    /// Total number of recorded points over all chains.
    pub count: usize,
    pub thinning: usize,
    pub chains: usize,
    pub seed: u64,
}

impl ChainParams {
    pub fn new(burn_in: usize, count: usize, thinning: usize, chains: usize, seed: u64) -> Result<Self> {
        if burn_in < 1 {
            return Err(Error::InvalidArgument("burn-in must be at least 1".into()));
        }
        if count < 1 || thinning < 1 || chains < 1 {
            return Err(Error::InvalidArgument("count, thinning and chains must be positive".into()));
        }
        Ok(ChainParams {
            burn_in,
            count,
            thinning,
            chains,
            seed,
        })
    }

    /// Points recorded by chain `c`: the count split as evenly as possible.
    fn share(&self, c: usize) -> usize {
        self.count / self.chains + usize::from(c < self.count % self.chains)
    }
}

/// Samples of `nu_lambda` (or of the dual measure on hyperplanes).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    /// Points of the chain; for a dual cloud, the coefficient vectors of the
    /// sampled hyperplanes.
    pub points: Vec<ProjPoint>,
    pub params: ChainParams,
    pub lambda: C64,
    pub dual: bool,
    /// Fraction of [`GAP_PROBE_WORDS`] sampled words of length
    /// [`GAP_PROBE_LENGTH`] whose image has a spectral gap. Low values mean
    /// the representation is probably not proximal and the chain need not
    /// converge to a unique measure.
    pub proximal_fraction: f64,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, ProjPoint::dim)
    }

    /// The points of a dual cloud as hyperplanes.
    pub fn hyperplanes(&self) -> Vec<ProjHyperplane> {
        self.points
            .iter()
            .map(|p| ProjHyperplane::new(p.coords()).expect("cloud points are nonzero"))
            .collect()
    }
}

fn run_chain(atoms: &[CMatrix], mu: &StepMeasure, start: &[C64], p: &ChainParams, stream: u64) -> Vec<ProjPoint> {
    let mut rng = rng::stream(p.seed, stream);
    let d = start.len();
    let mut x = start.to_vec();
    let mut y = vec![C64::new(0.0, 0.0); d];
    let mut step = |x: &mut Vec<C64>, y: &mut Vec<C64>| {
        let a = &atoms[mu.sample(&mut rng)];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..d).map(|j| a[(i, j)] * x[j]).sum();
        }
        let n = vec_norm(y);
        for (xi, yi) in x.iter_mut().zip(y.iter()) {
            *xi = yi / n;
        }
    };
    for _ in 0..p.burn_in {
        step(&mut x, &mut y);
    }
    let mut out = Vec::with_capacity(p.count);
    for _ in 0..p.count {
        for _ in 0..p.thinning {
            step(&mut x, &mut y);
        }
        out.push(ProjPoint::new(&x).expect("unit vectors stay nonzero"));
    }
    out
}

fn probe_proximality(atoms: &[CMatrix], mu: &StepMeasure, seed: u64) -> f64 {
    let hits = (0..GAP_PROBE_WORDS)
        .filter(|&w| {
            let mut r = rng::stream(seed, rng::stream_id(purpose::VALIDATION, w as u64));
            let walk = mu.draw(GAP_PROBE_LENGTH, &mut r);
            product_gap(&walk_product(atoms, &walk.increments)).is_ok_and(|g| g > SCAN_GAP_THRESHOLD)
        })
        .count();
    hits as f64 / GAP_PROBE_WORDS as f64
}

#[allow(clippy::too_many_arguments)]
fn sample_with<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &ChainParams,
    start: &ProjPoint,
    stream_purpose: u64,
    dual: bool,
    exec: &E,
) -> Result<PointCloud>
where
    R: Representation,
    E: Executor,
{
    if start.dim() != rep.dim() {
        return Err(Error::Dimension("start point and family dimensions differ".into()));
    }
    if mu.generator_span() > rep.generator_count() {
        return Err(Error::InvalidMeasure("measure uses undeclared generators".into()));
    }
    let atoms = rep.images(l)?.atoms(mu);
    let lift = start.unit_lift();
    let chains = exec.map(p.chains, |c| {
        let share = ChainParams { count: p.share(c), ..*p };
        run_chain(&atoms, mu, &lift, &share, rng::stream_id(stream_purpose, c as u64))
    });
    Ok(PointCloud {
        points: chains.into_iter().flatten().collect(),
        params: *p,
        lambda: l,
        dual,
        proximal_fraction: probe_proximality(&atoms, mu, p.seed),
    })
}

/// Samples of the stationary measure of `rho_lambda` (or, with `dual`, of the
/// dual measure on hyperplanes), started at the first basis vector.
///
/// Chain `c` draws from the stream `(seed, CHAIN, c)` and records
/// `count / chains` points (the remainder goes to the first chains); the
/// clouds are concatenated in chain order.
pub fn stationary_sample<R, E>(rep: &R, l: C64, mu: &StepMeasure, p: &ChainParams, dual: bool, exec: &E) -> Result<PointCloud>
where
    R: Representation,
    E: Executor,
{
    let start = ProjPoint::basis(rep.dim(), 0);
    if dual {
        sample_with(&Dual(rep), l, mu, p, &start, purpose::CHAIN, true, exec)
    } else {
        sample_with(rep, l, mu, p, &start, purpose::CHAIN, false, exec)
    }
}

/// Like [`stationary_sample`] from an arbitrary start, on the independent
/// stream family `(seed, CHAIN_CHECK, c)`.
pub fn stationary_sample_from<R, E>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    p: &ChainParams,
    start: &ProjPoint,
    exec: &E,
) -> Result<PointCloud>
where
    R: Representation,
    E: Executor,
{
    sample_with(rep, l, mu, p, start, purpose::CHAIN_CHECK, false, exec)
}

fn cloud_atoms<R: Representation>(rep: &R, cloud: &PointCloud, mu: &StepMeasure) -> Result<Vec<CMatrix>> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    if cloud.dim() != rep.dim() {
        return Err(Error::Dimension("cloud and family dimensions differ".into()));
    }
    Ok(if cloud.dual {
        Dual(rep).images(cloud.lambda)?.atoms(mu)
    } else {
        rep.images(cloud.lambda)?.atoms(mu)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FurstenbergReport {
    /// `sum_gamma mu(gamma) log(||rho(gamma) v|| / ||v||)` averaged over the cloud.
    pub estimate: f64,
    /// Batch-means standard error over the cloud.
    pub stderr: f64,
    pub reference: f64,
    pub reference_stderr: f64,
    pub deviation: f64,
    /// Three combined standard errors plus the rounding floor.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// The Furstenberg integral over `mu x cloud`, compared with an independent
/// estimate of the top exponent (`chi_1` for a primal cloud, `chi_1^*` for a
/// dual one). The `mu` integral is the exact atom sum.
pub fn furstenberg_check<R: Representation>(
    rep: &R,
    mu: &StepMeasure,
    cloud: &PointCloud,
    reference: &LyapEstimate,
) -> Result<FurstenbergReport> {
    let atoms = cloud_atoms(rep, cloud, mu)?;
    let values: Vec<f64> = cloud
        .points
        .iter()
        .map(|p| {
            let v = p.unit_lift();
            mu.atoms()
                .iter()
                .zip(&atoms)
                .map(|((_, w), a)| w * vec_norm(&a.apply(&v)).ln())
                .sum()
        })
        .collect();
    let estimate = summarize(&values).mean;
    let stderr = batch_means_stderr(&values, CLOUD_BATCHES);
    let deviation = (estimate - reference.value).abs();
    let tolerance = 3.0 * combined_stderr(stderr, reference.stderr) + ROUNDING_FLOOR;
    Ok(FurstenbergReport {
        estimate,
        stderr,
        reference: reference.value,
        reference_stderr: reference.stderr,
        deviation,
        tolerance,
        within_tolerance: deviation <= tolerance,
    })
}

/// The eight fixed test directions of the stationarity and two-starts checks:
/// the basis vectors followed by deterministic pseudo-random directions.
pub fn test_directions(d: usize) -> Vec<Vec<C64>> {
    use rand::Rng;
    let mut r = rng::stream(0, rng::stream_id(purpose::VALIDATION, u64::MAX));
    (0..8)
        .map(|k| {
            if k < d.min(4) {
                let mut e = vec![C64::new(0.0, 0.0); d];
                e[k] = C64::new(1.0, 0.0);
                e
            } else {
                (0..d)
                    .map(|_| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
                    .collect()
            }
        })
        .collect()
}

/// Kernel `|<x, a>|^2 / (|x|^2 |a|^2)`, a smooth function on projective space.
fn kernel(x: &[C64], a: &[C64]) -> f64 {
    let s: C64 = x.iter().zip(a).map(|(u, v)| u * v.conj()).sum();
    s.norm_sqr() / (vec_norm(x).powi(2) * vec_norm(a).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelComparison {
    pub left: f64,
    pub right: f64,
    pub stderr: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub kernels: Vec<KernelComparison>,
    pub passed: bool,
}

/// Checks `mu * nu = nu` on the eight test kernels: the cloud mean of
/// `sum_gamma mu(gamma) f(rho(gamma) x)` against the cloud mean of `f(x)`.
/// The error bar is the batch-means standard error of the difference; a
/// kernel passes within three of them plus [`ROUNDING_FLOOR`].
pub fn stationarity_check<R: Representation>(rep: &R, mu: &StepMeasure, cloud: &PointCloud) -> Result<StationarityReport> {
    let atoms = cloud_atoms(rep, cloud, mu)?;
    let dirs = test_directions(rep.dim());
    let pushed: Vec<Vec<(f64, Vec<C64>)>> = cloud
        .points
        .iter()
        .map(|p| {
            mu.atoms()
                .iter()
                .zip(&atoms)
                .map(|((_, w), a)| (*w, a.apply(p.coords())))
                .collect()
        })
        .collect();
    let kernels: Vec<KernelComparison> = dirs
        .iter()
        .map(|a| {
            let rhs: Vec<f64> = cloud.points.iter().map(|p| kernel(p.coords(), a)).collect();
            let lhs: Vec<f64> = pushed
                .iter()
                .map(|images| images.iter().map(|(w, y)| w * kernel(y, a)).sum())
                .collect();
            let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l - r).collect();
            let left = summarize(&lhs).mean;
            let right = summarize(&rhs).mean;
            let stderr = batch_means_stderr(&diff, CLOUD_BATCHES);
            KernelComparison {
                left,
                right,
                stderr,
                passed: (left - right).abs() <= 3.0 * stderr + ROUNDING_FLOOR,
            }
        })
        .collect();
    let passed = kernels.iter().all(|k| k.passed);
    Ok(StationarityReport { kernels, passed })
}

/// Kernel means of two clouds from different starts, compared within three
/// combined standard errors plus [`ROUNDING_FLOOR`].
pub fn two_starts_check(a: &PointCloud, b: &PointCloud) -> Result<StationarityReport> {
    if a.is_empty() || b.is_empty() || a.dim() != b.dim() {
        return Err(Error::InvalidArgument("clouds must be nonempty and of equal dimension".into()));
    }
    let kernels: Vec<KernelComparison> = test_directions(a.dim())
        .iter()
        .map(|dir| {
            let fa: Vec<f64> = a.points.iter().map(|p| kernel(p.coords(), dir)).collect();
            let fb: Vec<f64> = b.points.iter().map(|p| kernel(p.coords(), dir)).collect();
            let (left, right) = (summarize(&fa).mean, summarize(&fb).mean);
            let stderr = combined_stderr(batch_means_stderr(&fa, CLOUD_BATCHES), batch_means_stderr(&fb, CLOUD_BATCHES));
            KernelComparison {
                left,
                right,
                stderr,
                passed: (left - right).abs() <= 3.0 * stderr + ROUNDING_FLOOR,
            }
        })
        .collect();
    let passed = kernels.iter().all(|k| k.passed);
    Ok(StationarityReport { kernels, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProperReport {
    pub deltas: Vec<f64>,
    /// Largest fraction, over the test hyperplanes, of cloud points within
    /// Fubini-Study distance `delta` of a hyperplane.
    pub fractions: Vec<f64>,
    /// Fractions are non-increasing and the last is below the first (or all
    /// are zero).
    pub decreasing: bool,
}

/// Mass the cloud puts near `hyperplanes` random hyperplanes for each
/// `delta` in `deltas` (expected in decreasing order).
pub fn properness_profile(cloud: &PointCloud, deltas: &[f64], hyperplanes: usize, seed: u64) -> Result<ProperReport> {
    use rand::Rng;
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    let d = cloud.dim();
    let mut r = rng::stream(seed, rng::stream_id(purpose::VALIDATION, u64::MAX - 1));
    let planes: Vec<ProjHyperplane> = (0..hyperplanes)
        .map(|_| {
            let c: Vec<C64> = (0..d)
                .map(|_| C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5))
                .collect();
            ProjHyperplane::new(&c).expect("random coefficients are nonzero")
        })
        .collect();
    let dist: Vec<Vec<f64>> = planes
        .iter()
        .map(|h| cloud.points.iter().map(|p| h.distance(p)).collect())
        .collect();
    let fractions: Vec<f64> = deltas
        .iter()
        .map(|&delta| {
            dist.iter()
                .map(|ds| ds.iter().filter(|x| **x < delta).count() as f64 / cloud.len() as f64)
                .fold(0.0, f64::max)
        })
        .collect();
    let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
    let first = fractions.first().copied().unwrap_or(0.0);
    let last = fractions.last().copied().unwrap_or(0.0);
    Ok(ProperReport {
        deltas: deltas.to_vec(),
        decreasing: monotone && (last < first || first == 0.0),
        fractions,
    })
}

/// Where a cloud is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Affine chart `x_i = 1`. In dimension 2 the image is the complex plane
    /// of the other coordinate; in higher dimension it shows the real parts of
    /// the first two other coordinates.
    Affine(usize),
    /// `d = 2` only: stereographic image on the Riemann sphere, drawn as two
    /// discs side by side (the hemisphere around `[1:0]` on the left, the one
    /// around `[0:1]` on the right).
    Sphere,
}

/// Point counts per pixel. `grid` follows the scan convention: row `j`
/// covers increasing imaginary parts, so image encoders flip it.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub grid: ScanGrid,
    pub counts: Vec<u64>,
    /// Points falling outside the window.
    pub outside: usize,
}

fn chart_coords(p: &ProjPoint, chart: Chart) -> Result<Option<(f64, f64)>> {
    let x = p.coords();
    let d = x.len();
    match chart {
        Chart::Affine(i) => {
            if i >= d {
                return Err(Error::InvalidArgument(alloc::format!("chart {i} out of range for dimension {d}")));
            }
            if x[i].norm() < CHART_ZERO * vec_norm(x) {
                return Ok(None);
            }
            let others: Vec<C64> = (0..d).filter(|&j| j != i).map(|j| x[j] / x[i]).collect();
            Ok(Some(if d == 2 {
                (others[0].re, others[0].im)
            } else {
                (others[0].re, others[1].re)
            }))
        }
        Chart::Sphere => {
            if d != 2 {
                return Err(Error::Dimension("sphere chart needs dimension 2".into()));
            }
            // unit vector on the sphere from z = x_0 / x_1
            let n2 = x[0].norm_sqr() + x[1].norm_sqr();
            let w = x[0] * x[1].conj();
            let (sx, sy, sz) = (2.0 * w.re / n2, 2.0 * w.im / n2, (x[0].norm_sqr() - x[1].norm_sqr()) / n2);
            // left disc: sz >= 0 centred at (-1, 0); right disc: sz < 0 centred at (1, 0)
            Ok(Some(if sz >= 0.0 { (sx - 1.0, sy) } else { (-sx + 1.0, sy) }))
        }
    }
}

/// Histogram of the cloud in `chart` on a `resolution`-wide image.
///
/// `extent` is `[re0, re1, im0, im1]`; by default a square around 0 holding
/// 99% of the points (or `[-2, 2] x [-1, 1]` for the sphere). Pixels are
/// square; the height follows from the aspect ratio of the window.
pub fn limit_set_render(cloud: &PointCloud, chart: Chart, resolution: usize, extent: Option<[f64; 4]>) -> Result<Histogram> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    if resolution < 1 {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let coords: Vec<Option<(f64, f64)>> = cloud
        .points
        .iter()
        .map(|p| chart_coords(p, chart))
        .collect::<Result<_>>()?;
    let vanishing = coords.iter().filter(|c| c.is_none()).count();
    if let Chart::Affine(i) = chart {
        if 2 * vanishing > cloud.len() {
            return Err(Error::ChartDegenerate { chart: i });
        }
    }
    let [re0, re1, im0, im1] = match (extent, chart) {
        (Some(e), _) => e,
        (None, Chart::Sphere) => [-2.0, 2.0, -1.0, 1.0],
        (None, Chart::Affine(_)) => {
            let mut radii: Vec<f64> = coords.iter().flatten().map(|(a, b)| a.abs().max(b.abs())).collect();
            radii.sort_by(f64::total_cmp);
            let r = radii[(radii.len() * 99 / 100).min(radii.len() - 1)];
            let r = if r > 0.0 { 1.05 * r } else { 1.0 };
            [-r, r, -r, r]
        }
    };
    if !(re1 > re0 && im1 > im0) {
        return Err(Error::InvalidArgument("empty render window".into()));
    }
    let ny = (((im1 - im0) / (re1 - re0)) * resolution as f64).round().max(1.0) as usize;
    let grid = ScanGrid::new(re0, re1, im0, im1, resolution, ny)?;
    let mut counts = vec![0u64; grid.len()];
    let mut outside = vanishing;
    for (a, b) in coords.into_iter().flatten() {
        match grid.locate(C64::new(a, b)) {
            Some((i, j)) => counts[grid.index(i, j)] += 1,
            None => outside += 1,
        }
    }
    Ok(Histogram { grid, counts, outside })
}
