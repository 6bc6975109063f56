//! Volumes of graphs `lambda -> [rho_lambda(w) v_0]` over a parameter
//! rectangle `U`.
//!
//! The volume of the graph of a holomorphic map into projective space is the
//! area of `U` plus the `dd^c` mass of `log ||F||` for any nonvanishing lift
//! `F`; both terms are measured on the grid.

use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::exec::Executor;
use crate::family::{Dual, Representation};
use crate::grid::{FieldMeta, ScanField, ScanGrid};
use crate::linalg::{Order, ProjPoint, ScaledProduct};
use crate::lyapunov::WalkParams;
use crate::rng::{self, purpose};
use crate::scan::{chi_field, ddc_density, Which};
use crate::stats::{linear_fit, summarize, t_quantile};
use crate::walk::{StepMeasure, Walk, Word};
use crate::{Error, Result};

/// Largest tolerated fraction of masked nodes.
pub const MAX_MASKED_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphVolumeRecord {
    pub word_id: usize,
    pub n: usize,
    /// Area of the interior of `U` (nodes where the density is defined).
    pub vol_u: f64,
    /// `||dd^c log ||F|| ||_U`.
    pub mass: f64,
    pub total: f64,
}

fn record_from_log_field(field: &ScanField, word_id: usize, n: usize) -> Result<GraphVolumeRecord> {
    let masked = field.masked_fraction();
    if masked > MAX_MASKED_FRACTION {
        return Err(Error::VolumeUnreliable { masked_fraction: masked });
    }
    let density = ddc_density(field)?;
    let interior = density.mask.iter().filter(|m| !**m).count();
    let vol_u = interior as f64 * field.grid.cell_area();
    let mass = density.total();
    Ok(GraphVolumeRecord {
        word_id,
        n,
        vol_u,
        mass,
        total: vol_u + mass,
    })
}

/// Graph volume of `lambda -> rho_lambda(word) v_0` (with `Order::Left` the
/// word `s_1 ... s_m` acts as `rho(s_1) ... rho(s_m) v_0`).
pub fn graph_volume<R, E>(
    rep: &R,
    word: &Word,
    v0: &ProjPoint,
    grid: &ScanGrid,
    order: Order,
    exec: &E,
) -> Result<GraphVolumeRecord>
where
    R: Representation,
    E: Executor,
{
    grid.require_scan_size()?;
    if v0.dim() != rep.dim() {
        return Err(Error::Dimension("start point and family dimensions differ".into()));
    }
    let lift = v0.unit_lift();
    let logs = exec.map(grid.len(), |k| -> Option<f64> {
        let images = rep.images(grid.node_at(k)).ok()?;
        let (_, log_norm) = images.product(word, order).apply(&lift);
        log_norm.is_finite().then_some(log_norm)
    });
    let field = log_field(grid, &logs, word.len());
    record_from_log_field(&field, 0, word.len())
}

fn log_field(grid: &ScanGrid, logs: &[Option<f64>], n: usize) -> ScanField {
    ScanField::new(
        *grid,
        logs.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
        logs.iter().map(Option::is_none).collect(),
        FieldMeta {
            kind: "log|F|".into(),
            n,
            ..FieldMeta::default()
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub mean_volume: f64,
    pub stderr: f64,
    pub mean_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Mean over trials of the least-squares slope of volume against `n`.
    pub slope: f64,
    /// Half-width of the 95% Student-t interval for the slope.
    pub ci_half_width: f64,
    /// `||T_1||_U` (or `||T_d||_U` in the dual case) from a `chi` field with
    /// `n = max(lengths)` and the same trials and seed.
    pub current_mass: f64,
    /// `|slope - current_mass| / |current_mass|`.
    pub relative_error: f64,
    pub vol_u: f64,
    pub trials: usize,
    pub seed: u64,
    pub dual: bool,
}

/// The walk of trial `t` of a growth experiment.
pub fn volume_walk(mu: &StepMeasure, n: usize, seed: u64, t: usize) -> Walk {
    let mut r = rng::stream(seed, rng::stream_id(purpose::VOLUME_WORDS, t as u64));
    mu.draw(n, &mut r)
}

/// Mean graph volume of `lambda -> rho_lambda(gamma_1 ... gamma_n) v_0` for
/// each `n` in `lengths` (prefixes of one walk per trial), the fitted growth
/// slope and the comparison with the mass of `T_1` (or of `T_d` for the dual
/// walk) on the same grid.
#[allow(clippy::too_many_arguments)]
pub fn mean_graph_volume<R, E>(
    rep: &R,
    mu: &StepMeasure,
    v0: &ProjPoint,
    grid: &ScanGrid,
    lengths: &[usize],
    trials: usize,
    seed: u64,
    dual: bool,
    exec: &E,
) -> Result<GrowthReport>
where
    R: Representation,
    E: Executor,
{
    if dual {
        growth(&Dual(rep), rep, mu, v0, grid, lengths, trials, seed, true, exec)
    } else {
        growth(rep, rep, mu, v0, grid, lengths, trials, seed, false, exec)
    }
}

#[allow(clippy::too_many_arguments)]
fn growth<R, S, E>(
    walk_rep: &R,
    base: &S,
    mu: &StepMeasure,
    v0: &ProjPoint,
    grid: &ScanGrid,
    lengths: &[usize],
    trials: usize,
    seed: u64,
    dual: bool,
    exec: &E,
) -> Result<GrowthReport>
where
    R: Representation,
    S: Representation,
    E: Executor,
{
    grid.require_scan_size()?;
    if lengths.len() < 2 || trials < 2 {
        return Err(Error::InvalidArgument("need at least two lengths and two trials".into()));
    }
    if v0.dim() != walk_rep.dim() {
        return Err(Error::Dimension("start point and family dimensions differ".into()));
    }
    let max_n = *lengths.iter().max().expect("nonempty");
    let walks: Vec<Walk> = (0..trials).map(|t| volume_walk(mu, max_n, seed, t)).collect();
    let lift = v0.unit_lift();
    // logs[node][trial * lengths.len() + length index]
    let logs: Vec<Option<Vec<f64>>> = exec.map(grid.len(), |k| {
        let atoms = walk_rep.images(grid.node_at(k)).ok()?.atoms(mu);
        let mut out = vec![0.0; trials * lengths.len()];
        for (t, walk) in walks.iter().enumerate() {
            let mut p = ScaledProduct::identity(walk_rep.dim());
            let record = |p: &ScaledProduct, step: usize, out: &mut [f64]| {
                for (li, &n) in lengths.iter().enumerate() {
                    if n == step {
                        out[t * lengths.len() + li] = p.apply(&lift).1;
                    }
                }
            };
            record(&p, 0, &mut out);
            for (step, &i) in walk.increments.iter().enumerate() {
                p.mul_right(&atoms[i]);
                record(&p, step + 1, &mut out);
            }
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    });
    let mut volumes = vec![vec![0.0; lengths.len()]; trials];
    let mut masses = vec![vec![0.0; lengths.len()]; trials];
    let mut vol_u = 0.0;
    for t in 0..trials {
        for (li, &n) in lengths.iter().enumerate() {
            let node_logs: Vec<Option<f64>> = logs
                .iter()
                .map(|l| l.as_ref().map(|v| v[t * lengths.len() + li]))
                .collect();
            let rec = record_from_log_field(&log_field(grid, &node_logs, n), t, n)?;
            volumes[t][li] = rec.total;
            masses[t][li] = rec.mass;
            vol_u = rec.vol_u;
        }
    }
    let xs: Vec<f64> = lengths.iter().map(|n| *n as f64).collect();
    let slopes: Vec<f64> = volumes.iter().map(|v| linear_fit(&xs, v).0).collect();
    let s = summarize(&slopes);
    let ci_half_width = t_quantile(0.975, trials - 1) * s.stderr;
    let rows = lengths
        .iter()
        .enumerate()
        .map(|(li, &n)| {
            let v: Vec<f64> = volumes.iter().map(|r| r[li]).collect();
            let m: Vec<f64> = masses.iter().map(|r| r[li]).collect();
            let sv = summarize(&v);
            GrowthRow {
                n,
                mean_volume: sv.mean,
                stderr: sv.stderr,
                mean_mass: summarize(&m).mean,
            }
        })
        .collect();
    let params = WalkParams::new(max_n.max(1), trials, seed)?;
    let which = if dual { Which::Bottom } else { Which::Top };
    let fields = chi_field(base, mu, grid, &params, which, exec)?;
    let current_mass = if dual {
        ddc_density(&fields.bottom.expect("requested").value.map(|v| -v))?.total()
    } else {
        ddc_density(&fields.top.expect("requested").value)?.total()
    };
    Ok(GrowthReport {
        rows,
        slope: s.mean,
        ci_half_width,
        current_mass,
        relative_error: (s.mean - current_mass).abs() / current_mass.abs(),
        vol_u,
        trials,
        seed,
        dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::family::parse_family;
    use crate::C64;

    #[test]
    fn empty_word_has_base_area_only() {
        let f = parse_family(r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#).unwrap();
        let grid = ScanGrid::square(C64::new(2.0, 0.0), 0.5, 32).unwrap();
        let rec = graph_volume(&f, &Word::identity(), &ProjPoint::basis(2, 0), &grid, Order::Left, &Serial).unwrap();
        assert!(rec.mass.abs() < 1e-12);
        let interior = 30.0 * 30.0 * grid.cell_area();
        assert!((rec.vol_u - interior).abs() < 1e-12);
        // F = l e_1 is harmonic in log-norm away from 0
        let a = f.word("a").unwrap();
        let rec = graph_volume(&f, &a, &ProjPoint::basis(2, 0), &grid, Order::Left, &Serial).unwrap();
        assert!(rec.mass.abs() < 1e-3);
    }

    /// Fails to evaluate on the left half-plane.
    struct HalfPlane;

    impl Representation for HalfPlane {
        fn dim(&self) -> usize {
            2
        }

        fn generator_count(&self) -> usize {
            1
        }

        fn letter(&self, _letter: crate::Letter, l: C64) -> Result<crate::CMatrix> {
            if l.re < 0.0 {
                return Err(Error::Pole(l));
            }
            Ok(crate::CMatrix::identity(2))
        }
    }

    #[test]
    fn masked_grids_are_rejected() {
        let grid = ScanGrid::square(C64::new(0.0, 0.0), 1.0, 8).unwrap();
        let w = Word::new(alloc::vec![crate::Letter::generator(0)]);
        let err = graph_volume(&HalfPlane, &w, &ProjPoint::basis(2, 0), &grid, Order::Left, &Serial).unwrap_err();
        assert!(matches!(err, Error::VolumeUnreliable { masked_fraction } if masked_fraction == 0.5));
    }
}
