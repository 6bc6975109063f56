//! Zeros of `lambda -> tr rho_lambda(w) - t` counted by the argument
//! principle.
//!
//! Traces of long words overflow, so the function is handled in scaled form:
//! with `P = e^s M`, the value `tr M - t e^-s` has the same argument as
//! `tr P - t`. Contours are sampled adaptively: a segment is bisected until the
//! argument changes by at most `pi/4` along it.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use serde::Serialize;

use crate::exec::Executor;
use crate::family::{LetterImages, Representation};
use crate::grid::{FieldMeta, ScanField, ScanGrid};
use crate::linalg::Order;
use crate::rng::{self, purpose};
use crate::walk::{StepMeasure, Word};
use crate::{Error, Result, C64};

/// Largest argument change accepted along one contour segment.
pub const MAX_ARG_STEP: f64 = core::f64::consts::FRAC_PI_4;
/// Bisection depth per segment.
pub const MAX_DEPTH: usize = 20;
/// Samples per contour loop used first by [`trace_zero_count`].
pub const INITIAL_SAMPLES: usize = 256;
/// Largest sample count [`trace_zero_count`] doubles up to.
pub const MAX_SAMPLES: usize = 2048;
/// Residual beyond which a winding number is not accepted as an integer.
pub const MAX_RESIDUAL: f64 = 0.1;

/// `tr rho_lambda(w) - t` in scaled form: the value has the argument of the
/// true function, and `near_zero` tells whether the true function is within
/// `1e-9 (1 + |t| + ||P||)` of zero.
#[derive(Debug, Clone, Copy)]
struct Sample {
    value: C64,
    near_zero: bool,
}

struct TraceFn<'a, R> {
    rep: &'a R,
    word: &'a Word,
    t: C64,
}

impl<R: Representation> TraceFn<'_, R> {
    fn eval(&self, l: C64) -> Result<Sample> {
        let images = self.rep.images(l)?;
        Ok(self.eval_with(&images))
    }

    fn eval_with(&self, images: &LetterImages) -> Sample {
        let p = images.product(self.word, Order::Left);
        let s = p.log_scale();
        // ||P||_F = e^s ||M||_F with ||M||_F = 1 after scaling
        let shrink = (-s).exp();
        let value = p.matrix().trace() - self.t * shrink;
        let bound = 1e-9 * ((1.0 + self.t.norm()) * shrink + p.matrix().frobenius_norm());
        Sample {
            value,
            near_zero: !(value.norm() > bound),
        }
    }

    /// Argument change from `a` to `b` along the straight segment.
    fn segment(&self, a: C64, sa: Sample, b: C64, sb: Sample, depth: usize) -> Result<f64> {
        if sa.near_zero {
            return Err(Error::BoundaryZero { at: a });
        }
        if sb.near_zero {
            return Err(Error::BoundaryZero { at: b });
        }
        let d = (sb.value / sa.value).arg();
        if d.abs() <= MAX_ARG_STEP {
            return Ok(d);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::BoundaryZero { at: (a + b) * 0.5 });
        }
        let m = (a + b) * 0.5;
        let sm = self.eval(m)?;
        Ok(self.segment(a, sa, m, sm, depth + 1)? + self.segment(m, sm, b, sb, depth + 1)?)
    }

    /// Argument change along a polyline through `points` (each sampled first).
    fn path(&self, points: &[C64]) -> Result<f64> {
        let samples: Vec<Sample> = points.iter().map(|&z| self.eval(z)).collect::<Result<_>>()?;
        let mut total = 0.0;
        for k in 0..points.len() - 1 {
            total += self.segment(points[k], samples[k], points[k + 1], samples[k + 1], 0)?;
        }
        Ok(total)
    }
}

/// `samples` points on the counter-clockwise boundary of the rectangle with
/// corners `lo`, `hi`, closed (the first point is repeated at the end).
fn rectangle_loop(lo: C64, hi: C64, samples: usize) -> Vec<C64> {
    let per_side = samples.div_ceil(4).max(1);
    let corners = [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im), lo];
    let mut pts = Vec::with_capacity(4 * per_side + 1);
    for side in 0..4 {
        let (a, b) = (corners[side], corners[side + 1]);
        for k in 0..per_side {
            pts.push(a + (b - a) * (k as f64 / per_side as f64));
        }
    }
    pts.push(lo);
    pts
}

fn round_winding(total: f64, samples: usize) -> Result<i64> {
    let w = total / core::f64::consts::TAU;
    let r = w.round();
    let residual = (w - r).abs();
    if residual > MAX_RESIDUAL {
        return Err(Error::NonIntegerWinding { residual, samples });
    }
    Ok(r as i64)
}

/// Number of zeros (minus poles) of `tr rho_lambda(word) - t` in the
/// rectangle `[lo, hi]`, by the winding number of its boundary image.
///
/// Starts from `boundary_samples` points around the loop and doubles them
/// when the winding is not within 0.1 of an integer, up to 2048.
pub fn trace_zero_count<R: Representation>(
    rep: &R,
    word: &Word,
    t: C64,
    lo: C64,
    hi: C64,
    boundary_samples: usize,
) -> Result<i64> {
    if !(hi.re > lo.re && hi.im > lo.im) {
        return Err(Error::InvalidArgument("cell corners must satisfy lo < hi".into()));
    }
    let f = TraceFn { rep, word, t };
    let mut samples = boundary_samples.max(4);
    loop {
        let total = f.path(&rectangle_loop(lo, hi, samples))?;
        match round_winding(total, samples) {
            Err(Error::NonIntegerWinding { .. }) if samples < MAX_SAMPLES => samples = (2 * samples).min(MAX_SAMPLES),
            other => return other,
        }
    }
}

/// Zeros of one word on a grid, by summing argument changes along the shared
/// cell edges. Returns per-cell counts; cells touching an edge that could not
/// be resolved are `None`.
pub fn cell_counts<R, E>(rep: &R, word: &Word, t: C64, grid: &ScanGrid, edge_samples: usize, exec: &E) -> Vec<Option<i64>>
where
    R: Representation,
    E: Executor,
{
    let (nx, ny) = (grid.nx, grid.ny);
    let f = TraceFn { rep, word, t };
    let vertex = |i: usize, j: usize| C64::new(grid.re0 + i as f64 * grid.hx(), grid.im0 + j as f64 * grid.hy());
    let sub = edge_samples.max(1);
    let edge = |a: C64, b: C64| -> Option<f64> {
        let pts: Vec<C64> = (0..=sub).map(|k| a + (b - a) * (k as f64 / sub as f64)).collect();
        f.path(&pts).ok()
    };
    // horizontal edge (i, j): vertex (i, j) -> (i + 1, j), j in 0..=ny
    let horizontal = exec.map(nx * (ny + 1), |e| {
        let (i, j) = (e % nx, e / nx);
        edge(vertex(i, j), vertex(i + 1, j))
    });
    // vertical edge (i, j): vertex (i, j) -> (i, j + 1), i in 0..=nx
    let vertical = exec.map((nx + 1) * ny, |e| {
        let (i, j) = (e % (nx + 1), e / (nx + 1));
        edge(vertex(i, j), vertex(i, j + 1))
    });
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            let bottom = horizontal[j * nx + i]?;
            let top = horizontal[(j + 1) * nx + i]?;
            let left = vertical[j * (nx + 1) + i]?;
            let right = vertical[j * (nx + 1) + i + 1]?;
            round_winding(bottom + right - top - left, 4 * sub).ok()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivisorPoint {
    /// Centre of the cell holding the zeros.
    pub at: [f64; 2],
    pub multiplicity: u32,
    pub word_id: usize,
}

#[derive(Debug, Clone)]
pub struct DivisorMeasure {
    pub n: usize,
    pub t: C64,
    pub cloud: Vec<DivisorPoint>,
    /// `(1/n)` times the mean zero count per cell over the words used,
    /// divided by the cell area.
    pub density: ScanField,
    pub words_used: usize,
    /// Words with `tr rho_lambda(w) = t` identically; they carry no divisor.
    pub degenerate_words: Vec<DegenerateWord>,
    /// Cells (summed over words) whose count could not be resolved.
    pub failed_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegenerateWord {
    pub word_id: usize,
    pub word: String,
}

/// The word with id `w` of length `n` used by [`trace_divisor_measure`].
pub fn divisor_word(mu: &StepMeasure, n: usize, seed: u64, w: usize) -> Word {
    let id = rng::stream_id(purpose::DIVISOR_WORDS, ((n as u64) << 32) | w as u64);
    let mut r = rng::stream(seed, id);
    mu.draw(n, &mut r).word(mu, Order::Right)
}

/// True when `tr rho_lambda(w) - t` vanishes (to the boundary tolerance) at
/// five spread-out nodes of the grid.
fn is_degenerate<R: Representation>(rep: &R, word: &Word, t: C64, grid: &ScanGrid) -> bool {
    let f = TraceFn { rep, word, t };
    let probes = [(0.13, 0.29), (0.71, 0.17), (0.43, 0.61), (0.89, 0.83), (0.27, 0.94)];
    probes.iter().all(|(u, v)| {
        let l = C64::new(grid.re0 + u * (grid.re1 - grid.re0), grid.im0 + v * (grid.im1 - grid.im0));
        f.eval(l).map(|s| s.near_zero).unwrap_or(false)
    })
}

/// Averaged divisor `(1/n) [Z(w, t)]` over `words` sampled walk words of
/// length `n`. The measure must be symmetric unless `allow_asymmetric`.
#[allow(clippy::too_many_arguments)]
pub fn trace_divisor_measure<R, E>(
    rep: &R,
    mu: &StepMeasure,
    t: C64,
    grid: &ScanGrid,
    n: usize,
    words: usize,
    seed: u64,
    allow_asymmetric: bool,
    exec: &E,
) -> Result<DivisorMeasure>
where
    R: Representation,
    E: Executor,
{
    grid.require_scan_size()?;
    if !mu.is_symmetric() && !allow_asymmetric {
        return Err(Error::InvalidMeasure(
            "trace divisors equidistribute only for symmetric measures (override to proceed)".into(),
        ));
    }
    if n == 0 || words == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and at least one word".into()));
    }
    let names = rep.generator_names();
    let mut sum = vec![0.0; grid.len()];
    let mut failed = vec![false; grid.len()];
    let mut failed_cells = 0;
    let mut cloud = Vec::new();
    let mut degenerate_words = Vec::new();
    let mut used = 0usize;
    for w in 0..words {
        let word = divisor_word(mu, n, seed, w);
        if is_degenerate(rep, &word, t, grid) {
            degenerate_words.push(DegenerateWord {
                word_id: w,
                word: alloc::format!("{}", word.display(&names)),
            });
            continue;
        }
        used += 1;
        let counts = cell_counts(rep, &word, t, grid, 4, exec);
        for (k, c) in counts.iter().enumerate() {
            match c {
                Some(c) => {
                    sum[k] += *c as f64;
                    if *c > 0 {
                        let at = grid.node_at(k);
                        cloud.push(DivisorPoint {
                            at: [at.re, at.im],
                            multiplicity: *c as u32,
                            word_id: w,
                        });
                    }
                }
                None => {
                    failed[k] = true;
                    failed_cells += 1;
                }
            }
        }
    }
    let scale = 1.0 / (n as f64 * used.max(1) as f64 * grid.cell_area());
    let values = sum.iter().map(|s| s * scale).collect();
    let density = ScanField::new(
        *grid,
        values,
        failed,
        FieldMeta {
            kind: "divisor-density".into(),
            n,
            trials: used,
            seed,
        },
    );
    Ok(DivisorMeasure {
        n,
        t,
        cloud,
        density,
        words_used: used,
        degenerate_words,
        failed_cells,
    })
}
