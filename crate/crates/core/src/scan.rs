//! Lyapunov fields over a parameter grid, the discrete `dd^c` operator and
//! the bifurcation current.
//!
//! All fields are computed with common random numbers: the same sampled walks
//! are evaluated at every node, so the estimated `chi_1` field is an average
//! of the subharmonic functions `(1/n) log ||rho_lambda(w)||` and can be
//! differentiated.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use serde::Serialize;

use crate::exec::Executor;
use crate::family::{walk_product, Dual, Representation};
use crate::grid::{FieldMeta, ScanField, ScanGrid};
use crate::lyapunov::{trial_walk, WalkParams};
use crate::stats::{mad, median, summarize};
use crate::walk::{StepMeasure, Walk};
use crate::{Error, Result, C64};

/// Default noise floor of the support mask, in MAD units.
pub const DEFAULT_THETA: f64 = 5.0;
/// Accepted window for the Lelong calibration mass.
pub const CALIBRATION_WINDOW: (f64, f64) = (0.98, 1.02);

/// Which exponents a field run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `chi_1`.
    Top,
    /// `chi_d = -chi_1^*`, through the dual representation.
    Bottom,
    Both,
}

/// A Monte-Carlo field together with its per-node standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiField {
    pub value: ScanField,
    pub stderr: ScanField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiFields {
    pub top: Option<ChiField>,
    pub bottom: Option<ChiField>,
}

fn field_from_samples(
    grid: &ScanGrid,
    per_node: &[Option<Vec<f64>>],
    kind: &str,
    sign: f64,
    p: &WalkParams,
) -> ChiField {
    let mut value = vec![f64::NAN; grid.len()];
    let mut stderr = vec![f64::NAN; grid.len()];
    let mut mask = vec![true; grid.len()];
    for (k, s) in per_node.iter().enumerate() {
        if let Some(s) = s {
            let sum = summarize(s);
            if sum.mean.is_finite() {
                value[k] = sign * sum.mean;
                stderr[k] = sum.stderr;
                mask[k] = false;
            }
        }
    }
    let meta = FieldMeta {
        kind: kind.into(),
        n: p.n,
        trials: p.trials,
        seed: p.seed,
    };
    ChiField {
        value: ScanField::new(*grid, value, mask.clone(), meta.clone()),
        stderr: ScanField::new(
            *grid,
            stderr,
            mask,
            FieldMeta {
                kind: alloc::format!("{kind}-stderr"),
                ..meta
            },
        ),
    }
}

fn log_norm_samples<R: Representation>(rep: &R, l: C64, mu: &StepMeasure, walks: &[Walk], n: usize) -> Option<Vec<f64>> {
    let atoms = rep.images(l).ok()?.atoms(mu);
    Some(
        walks
            .iter()
            .map(|w| walk_product(&atoms, &w.increments).log_norm() / n as f64)
            .collect(),
    )
}

/// The walks shared by every node of a scan. They are the trial walks of
/// [`crate::lyapunov::chi_top`], so each node of the `chi_1` field equals the
/// pointwise estimator with the same seed.
pub fn scan_walks(mu: &StepMeasure, p: &WalkParams) -> Vec<Walk> {
    (0..p.trials).map(|t| trial_walk(mu, p.n, p.seed, t)).collect()
}

/// `chi_1` and/or `chi_d` at every node, with common random numbers.
pub fn chi_field<R, E>(rep: &R, mu: &StepMeasure, grid: &ScanGrid, p: &WalkParams, which: Which, exec: &E) -> Result<ChiFields>
where
    R: Representation,
    E: Executor,
{
    grid.require_scan_size()?;
    if mu.generator_span() > rep.generator_count() {
        return Err(Error::InvalidMeasure("measure uses undeclared generators".into()));
    }
    let walks = scan_walks(mu, p);
    let top = matches!(which, Which::Top | Which::Both).then(|| {
        let s = exec.map(grid.len(), |k| log_norm_samples(rep, grid.node_at(k), mu, &walks, p.n));
        field_from_samples(grid, &s, "chi1", 1.0, p)
    });
    let bottom = matches!(which, Which::Bottom | Which::Both).then(|| {
        let dual = Dual(rep);
        let s = exec.map(grid.len(), |k| log_norm_samples(&dual, grid.node_at(k), mu, &walks, p.n));
        field_from_samples(grid, &s, "chid", -1.0, p)
    });
    Ok(ChiFields { top, bottom })
}

/// Discrete `dd^c`: `(1/2 pi)` times the five-point Laplacian times the cell
/// area, i.e. the mass the current puts on each cell. The boundary ring and
/// every node with a masked neighbour are masked. With this normalisation the
/// field `log|lambda - lambda_0|` has total mass 1 around `lambda_0`.
pub fn ddc_density(field: &ScanField) -> Result<ScanField> {
    let g = field.grid;
    if g.nx < 3 || g.ny < 3 {
        return Err(Error::InsufficientGrid(alloc::format!(
            "dd^c needs at least a 3x3 grid, got {}x{}",
            g.nx, g.ny
        )));
    }
    let (hx, hy) = (g.hx(), g.hy());
    let mut values = vec![f64::NAN; g.len()];
    let mut mask = vec![true; g.len()];
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let k = g.index(i, j);
            let nb = [k, k - 1, k + 1, k - g.nx, k + g.nx];
            if nb.iter().any(|&q| field.mask[q]) {
                continue;
            }
            let f = &field.values;
            let lap = (f[k + 1] + f[k - 1] - 2.0 * f[k]) / (hx * hx) + (f[k + g.nx] + f[k - g.nx] - 2.0 * f[k]) / (hy * hy);
            values[k] = lap * hx * hy / core::f64::consts::TAU;
            mask[k] = false;
        }
    }
    if mask.iter().all(|m| *m) {
        return Err(Error::InsufficientGrid("no interior node has an unmasked stencil".into()));
    }
    Ok(ScanField::new(
        g,
        values,
        mask,
        FieldMeta {
            kind: alloc::format!("ddc({})", field.meta.kind),
            ..field.meta.clone()
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    /// Total `dd^c` mass of `log|lambda - 0.3|` on `[-1, 1]^2` at 201x201.
    pub mass: f64,
    /// `|mass - 1|`; used as the discretisation tolerance `eps_disc`.
    pub eps_disc: f64,
    pub passed: bool,
}

/// Lelong calibration of [`ddc_density`].
pub fn calibrate() -> Calibration {
    let grid = ScanGrid::new(-1.0, 1.0, -1.0, 1.0, 201, 201).expect("fixed calibration grid");
    let f = ScanField::from_fn(grid, "log|l-0.3|", |l| (l - C64::new(0.3, 0.0)).norm().ln());
    let mass = ddc_density(&f).expect("calibration grid is large enough").total();
    Calibration {
        mass,
        eps_disc: (mass - 1.0).abs(),
        passed: (CALIBRATION_WINDOW.0..=CALIBRATION_WINDOW.1).contains(&mass),
    }
}

/// Runs [`calibrate`] and fails unless the mass is within the window.
pub fn require_calibration() -> Result<Calibration> {
    let c = calibrate();
    if c.passed {
        Ok(c)
    } else {
        Err(Error::Calibration { mass: c.mass })
    }
}

/// The bifurcation current on a grid.
#[derive(Debug, Clone)]
pub struct TBif {
    pub chi_top: ChiField,
    pub chi_bottom: ChiField,
    /// `dd^c chi_1`.
    pub t1: ScanField,
    /// `dd^c chi_1^* = -dd^c chi_d`.
    pub td: ScanField,
    /// `t1 + td`.
    pub tbif: ScanField,
    pub support: Vec<bool>,
    pub stats: TBifStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TBifStats {
    pub mass_t1: f64,
    pub mass_td: f64,
    pub mass_tbif: f64,
    pub theta: f64,
    pub median: f64,
    pub mad: f64,
    /// Density above which a node belongs to the support.
    pub noise_floor: f64,
    pub support_cells: usize,
    /// Fraction of unmasked nodes with negative density.
    pub clip_fraction: f64,
    /// Most negative density and where it occurs.
    pub most_negative: f64,
    pub most_negative_at: [f64; 2],
    pub eps_disc: f64,
}

/// Support of a density field: nodes above `median + theta * MAD`, and above
/// an absolute floor of `1e-10 * (1 + scale)` that keeps exactly constant
/// fields from producing a support out of rounding noise.
pub fn support_mask(density: &ScanField, theta: f64, scale: f64) -> (Vec<bool>, f64, f64, f64) {
    let vals = density.valid_values();
    let med = median(&vals);
    let spread = mad(&vals);
    let floor = (med + theta * spread).max(1e-10 * (1.0 + scale));
    let support = density
        .values
        .iter()
        .zip(&density.mask)
        .map(|(v, m)| !*m && *v > floor)
        .collect();
    (support, med, spread, floor)
}

/// `T_1 = dd^c chi_1`, `T_d = dd^c chi_1^*` and `T_bif = T_1 + T_d`, with
/// the support mask. The Lelong calibration runs first and must pass.
pub fn t_bif<R, E>(rep: &R, mu: &StepMeasure, grid: &ScanGrid, p: &WalkParams, theta: f64, exec: &E) -> Result<TBif>
where
    R: Representation,
    E: Executor,
{
    let cal = require_calibration()?;
    let fields = chi_field(rep, mu, grid, p, Which::Both, exec)?;
    let chi_top = fields.top.expect("requested");
    let chi_bottom = fields.bottom.expect("requested");
    let t1 = ddc_density(&chi_top.value)?.with_kind("T1");
    let dual_top = chi_bottom.value.map(|v| -v);
    let td = ddc_density(&dual_top)?.with_kind("Td");
    let tbif = t1.add(&td).with_kind("Tbif");
    let scale = chi_top
        .value
        .valid()
        .chain(dual_top.valid())
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    let (support, med, spread, floor) = support_mask(&tbif, theta, scale);
    let valid = tbif.valid_values();
    let negative = valid.iter().filter(|v| **v < 0.0).count();
    let (neg_k, neg_v) = tbif
        .valid()
        .fold((0usize, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let at = grid.node_at(neg_k);
    let stats = TBifStats {
        mass_t1: t1.total(),
        mass_td: td.total(),
        mass_tbif: tbif.total(),
        theta,
        median: med,
        mad: spread,
        noise_floor: floor,
        support_cells: support.iter().filter(|s| **s).count(),
        clip_fraction: negative as f64 / valid.len().max(1) as f64,
        most_negative: neg_v,
        most_negative_at: [at.re, at.im],
        eps_disc: cal.eps_disc,
    };
    Ok(TBif {
        chi_top,
        chi_bottom,
        t1,
        td,
        tbif,
        support,
        stats,
    })
}

/// Grows a node mask by `radius` cells in the 8-neighbour sense.
pub fn dilate(mask: &[bool], grid: &ScanGrid, radius: usize) -> Vec<bool> {
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let r = radius as isize;
    let mut out = vec![false; mask.len()];
    for (k, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let (i, j) = grid.coords(k);
        for dj in -r..=r {
            for di in -r..=r {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a >= 0 && b >= 0 && a < nx && b < ny {
                    out[grid.index(a as usize, b as usize)] = true;
                }
            }
        }
    }
    out
}

/// L1 distance between two densities after clipping negative values,
/// summing over `block x block` tiles (partial tiles at the far edges are
/// dropped) and normalising each to unit total. The result lies in `[0, 2]`.
pub fn normalized_l1_distance(a: &ScanField, b: &ScanField, block: usize) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::InvalidArgument("fields live on different grids".into()));
    }
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let g = a.grid;
    let (bx, by) = (g.nx / block, g.ny / block);
    if bx == 0 || by == 0 {
        return Err(Error::InsufficientGrid("block larger than the grid".into()));
    }
    let tiles = |f: &ScanField| -> Vec<f64> {
        let mut t = vec![0.0; bx * by];
        for j in 0..by * block {
            for i in 0..bx * block {
                if let Some(v) = f.get(i, j) {
                    t[(j / block) * bx + i / block] += v.max(0.0);
                }
            }
        }
        t
    };
    let (ta, tb) = (tiles(a), tiles(b));
    let (sa, sb): (f64, f64) = (ta.iter().sum(), tb.iter().sum());
    if !(sa > 0.0 && sb > 0.0) {
        return Err(Error::InvalidArgument("a density has no positive mass".into()));
    }
    Ok(ta.iter().zip(&tb).map(|(x, y)| (x / sa - y / sb).abs()).sum())
}
