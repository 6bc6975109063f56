//! The `bifurclab` command line.
//!
//! Every subcommand prints a JSON report on stdout. With `--out PREFIX` it
//! also writes its tables and images as `PREFIX.<name>` plus a manifest (see
//! [`crate::manifest`]); `scan`, `stability`, `tracezeros`, `graphvol` and
//! `limitset` require `--out`.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use bifurclab_core::divisor::trace_divisor_measure;
use bifurclab_core::linalg::ProjPoint;
use bifurclab_core::lyapunov::{chi_exterior, chi_spectrum_qr, chi_top, combined_stderr, dual_spectrum_check, WalkParams};
use bifurclab_core::measures::{
    furstenberg_check, limit_set_render, stationarity_check, stationary_sample, ChainParams, Chart,
    DEFAULT_BURN_IN, DEFAULT_THINNING,
};
use bifurclab_core::proximality::{sampled_word_proximality, stability_scan, WordSource, SCAN_GAP_THRESHOLD, TOL_GAP};
use bifurclab_core::scan::{calibrate, normalized_l1_distance, t_bif, DEFAULT_THETA};
use bifurclab_core::volume::mean_graph_volume;
use bifurclab_core::{Representation, ScanGrid, C64};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::csv::{encode_cloud_csv, encode_divisor_csv, encode_field_csv, encode_growth_csv};
use crate::error::{EXIT_OK, EXIT_VALIDATION};
use crate::exec::{Parallel, THREADS_ENV};
use crate::image::{overlay, render_field, render_histogram, Colormap, Image, Scale};
use crate::manifest::{to_json, OutputSet, RunManifest, Tolerances};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "bifurclab", version, about = "Lyapunov spectra, bifurcation currents and proximal stability of holomorphic SL(d, C) families")]
pub struct Cli {
    /// Worker threads (0 = one per CPU). Outputs do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lyapunov exponents at one parameter.
    Lyap(LyapArgs),
    /// chi fields, T_1, T_d and T_bif on a grid, with the support mask.
    Scan(ScanArgs),
    /// Cells where sampled words change proximality.
    Stability(StabilityArgs),
    /// Averaged trace divisors of walk words.
    Tracezeros(TraceArgs),
    /// Growth of graph volumes along walks.
    Graphvol(GraphvolArgs),
    /// Stationary-measure sample and limit-set image.
    Limitset(LimitsetArgs),
    /// Dual-spectrum relation and Furstenberg formula at one parameter.
    Dualcheck(DualcheckArgs),
    /// Lelong calibration of the discrete dd^c.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Top-level seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct LyapArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Walk length (steps).
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Independent walks averaged.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Full QR spectrum, exterior-power partial sums and word proximality.
    #[arg(long)]
    pub spectrum: bool,
    /// Length of the words sampled for proximality (with --spectrum).
    #[arg(long, default_value_t = 40)]
    pub word_length: usize,
    /// Number of words sampled for proximality (with --spectrum).
    #[arg(long, default_value_t = 64)]
    pub words: usize,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as RE0,RE1,IM0,IM1,NX,NY.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: ScanGrid,
    /// Walk length (steps).
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Independent walks averaged.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Support threshold in MAD units above the median.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    /// Also write PNG copies of the images.
    #[arg(long)]
    pub png: bool,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as RE0,RE1,IM0,IM1,NX,NY.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: ScanGrid,
    /// Walk lengths of the sampled words.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    pub lengths: Vec<usize>,
    /// Sampled words per length.
    #[arg(long, default_value_t = 64)]
    pub words: usize,
    /// Examine every reduced word up to this length instead of sampling.
    #[arg(long)]
    pub exhaustive: Option<usize>,
    /// Gap below which a word counts as non-proximal.
    #[arg(long, default_value_t = SCAN_GAP_THRESHOLD)]
    pub threshold: f64,
    /// Also write PNG copies of the images.
    #[arg(long)]
    pub png: bool,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as RE0,RE1,IM0,IM1,NX,NY.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: ScanGrid,
    /// Walk length of the words.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Number of sampled words.
    #[arg(long, default_value_t = 32)]
    pub words: usize,
    /// Trace value as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "2,0")]
    pub t: C64,
    /// Accept a non-symmetric measure.
    #[arg(long)]
    pub allow_asymmetric: bool,
    /// Compare with T_bif computed with this many trials (walk length --n).
    #[arg(long)]
    pub compare_trials: Option<usize>,
    /// Tile size of the comparison.
    #[arg(long, default_value_t = 5)]
    pub block: usize,
    /// Also write PNG copies of the images.
    #[arg(long)]
    pub png: bool,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GraphvolArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid as RE0,RE1,IM0,IM1,NX,NY.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: ScanGrid,
    /// Walk lengths, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
    pub lengths: Vec<usize>,
    /// Independent walks averaged.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Start vector: index of a standard basis vector.
    #[arg(long, default_value_t = 0)]
    pub v0: usize,
    /// Use the dual walk (compares with T_d instead of T_1).
    #[arg(long)]
    pub dual: bool,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LimitsetArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Number of recorded points (`2e5` is accepted).
    #[arg(long, value_parser = parse_count, default_value = "20000")]
    pub count: usize,
    /// Discarded steps at the start of each chain.
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burnin: usize,
    /// Steps between recorded points.
    #[arg(long, default_value_t = DEFAULT_THINNING)]
    pub thinning: usize,
    /// Independent chains.
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Affine chart index, or `sphere` (dimension 2).
    #[arg(long, value_parser = parse_chart, default_value = "0")]
    pub chart: Chart,
    /// Image width in pixels.
    #[arg(long, default_value_t = 512)]
    pub res: usize,
    /// Render window RE0,RE1,IM0,IM1 in chart coordinates (default: a
    /// square holding 99% of the points).
    #[arg(long, value_parser = parse_extent, allow_hyphen_values = true)]
    pub extent: Option<[f64; 4]>,
    /// Sample the dual chain on hyperplanes.
    #[arg(long)]
    pub dual: bool,
    /// Also check stationarity on the test kernels.
    #[arg(long)]
    pub check: bool,
    /// Also write PNG copies of the images.
    #[arg(long)]
    pub png: bool,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DualcheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter as RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Walk length (steps).
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Independent walks averaged.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Points of the stationary samples used by the Furstenberg check.
    #[arg(long, value_parser = parse_count, default_value = "8000")]
    pub count: usize,
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Output prefix: files are written as PREFIX.<name>.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_numbers(s: &str, count: usize, what: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {what}"));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect()
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let v = parse_numbers(s, 2, "RE,IM")?;
    Ok(C64::new(v[0], v[1]))
}

pub fn parse_grid(s: &str) -> Result<ScanGrid, String> {
    let v = parse_numbers(s, 6, "RE0,RE1,IM0,IM1,NX,NY")?;
    let count = |x: f64| -> Result<usize, String> {
        if x >= 1.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(format!("node count `{x}` must be a positive integer"))
        }
    };
    ScanGrid::new(v[0], v[1], v[2], v[3], count(v[4])?, count(v[5])?).map_err(|e| e.to_string())
}

pub fn parse_extent(s: &str) -> Result<[f64; 4], String> {
    let v = parse_numbers(s, 4, "RE0,RE1,IM0,IM1")?;
    Ok([v[0], v[1], v[2], v[3]])
}

/// Accepts integers and integral floats such as `2e5`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x >= 1.0 && x.fract() == 0.0 && x <= 1e15 {
        Ok(x as usize)
    } else {
        Err(format!("`{s}` is not a positive integer"))
    }
}

pub fn parse_chart(s: &str) -> Result<Chart, String> {
    if s == "sphere" {
        return Ok(Chart::Sphere);
    }
    s.parse().map(Chart::Affine).map_err(|_| format!("`{s}` is neither a chart index nor `sphere`"))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("bifurclab: {}: {e}", e.module());
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns its JSON report.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let exec = Parallel::new(cli.threads).map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let run = match &cli.command {
        Command::Lyap(a) => lyap(a, &exec)?,
        Command::Scan(a) => scan(a, &exec)?,
        Command::Stability(a) => stability(a, &exec)?,
        Command::Tracezeros(a) => tracezeros(a, &exec)?,
        Command::Graphvol(a) => graphvol(a, &exec)?,
        Command::Limitset(a) => limitset(a, &exec)?,
        Command::Dualcheck(a) => dualcheck(a, &exec)?,
        Command::Calibrate(a) => calibrate_cmd(a)?,
    };
    let report = to_json(&run.report);
    if let Some(mut out) = run.outputs {
        out.write("report.json", report.as_bytes())?;
        out.finish(run.manifest, started.elapsed())?;
    }
    if let Some(failure) = run.failure {
        print!("{report}");
        return Err(failure);
    }
    Ok(report)
}

/// What a subcommand hands back to [`execute`].
struct Run {
    report: serde_json::Value,
    outputs: Option<OutputSet>,
    manifest: RunManifest,
    /// Set when the run completed but its check failed numerically.
    failure: Option<CliError>,
}

fn manifest(command: &str, config: Option<&Config>, seed: Option<u64>, parameters: serde_json::Value) -> RunManifest {
    RunManifest {
        tool: "bifurclab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: config.map(|c| c.file.clone()),
        seed,
        parameters,
        tolerances: Tolerances {
            tol_gap: TOL_GAP,
            scan_gap_threshold: SCAN_GAP_THRESHOLD,
            eps_disc: None,
            noise_floor: None,
        },
        outputs: Vec::new(),
    }
}

fn optional_outputs(out: &Option<PathBuf>) -> Result<Option<OutputSet>, CliError> {
    out.as_deref().map(OutputSet::new).transpose()
}

fn write_image(out: &mut OutputSet, name: &str, img: &Image, png: bool) -> Result<(), CliError> {
    out.write(&format!("{name}.ppm"), &img.to_ppm())?;
    if png {
        out.write(&format!("{name}.png"), &img.to_png())?;
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn grid_value(g: &ScanGrid) -> serde_json::Value {
    to_value(g)
}

fn lyap(a: &LyapArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let p = WalkParams::new(a.n, a.trials, a.common.seed)?;
    let (f, mu, l) = (&cfg.family, &cfg.measure, a.lambda);
    let top = chi_top(f, l, mu, &p, exec)?;
    let mut report = json!({
        "command": "lyap",
        "lambda": [l.re, l.im],
        "chi_top": top,
    });
    if a.spectrum {
        let d = f.dim();
        let spectrum = chi_spectrum_qr(f, l, mu, &p, d, exec)?;
        let exterior = (1..=d)
            .map(|k| chi_exterior(f, l, mu, &p, k, exec))
            .collect::<Result<Vec<_>, _>>()?;
        let cross: Vec<_> = exterior
            .iter()
            .zip(&spectrum.partial_sums)
            .map(|(e, q)| {
                let dev = (e.value - q.value).abs();
                let tol = 3.0 * combined_stderr(e.stderr, q.stderr);
                json!({ "k": e.index, "deviation": dev, "tolerance": tol, "within_tolerance": dev <= tol + 1e-12 })
            })
            .collect();
        report["spectrum"] = to_value(&spectrum);
        report["exterior"] = to_value(&exterior);
        report["exterior_vs_qr"] = json!(cross);
        if d >= 2 {
            let (x, y) = (spectrum.exponents[0], spectrum.exponents[1]);
            let words = sampled_word_proximality(f, l, mu, a.word_length, a.words, a.common.seed, TOL_GAP)?;
            report["proximality"] = json!({
                "gap": x.value - y.value,
                "gap_stderr": combined_stderr(x.stderr, y.stderr),
                "words": words,
            });
        }
    }
    let params = json!({ "lambda": [l.re, l.im], "n": a.n, "trials": a.trials, "spectrum": a.spectrum,
        "word_length": a.word_length, "words": a.words });
    Ok(Run {
        report,
        outputs: optional_outputs(&a.out)?,
        manifest: manifest("lyap", Some(&cfg), Some(a.common.seed), params),
        failure: None,
    })
}

fn scan(a: &ScanArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let p = WalkParams::new(a.n, a.trials, a.common.seed)?;
    let t = t_bif(&cfg.family, &cfg.measure, &a.grid, &p, a.theta, exec)?;
    let mut out = OutputSet::new(&a.out)?;
    out.write("chi1.csv", encode_field_csv(&t.chi_top.value).as_bytes())?;
    out.write("chi1_stderr.csv", encode_field_csv(&t.chi_top.stderr).as_bytes())?;
    out.write("chid.csv", encode_field_csv(&t.chi_bottom.value).as_bytes())?;
    out.write("t1.csv", encode_field_csv(&t.t1).as_bytes())?;
    out.write("td.csv", encode_field_csv(&t.td).as_bytes())?;
    out.write("tbif.csv", encode_field_csv(&t.tbif).as_bytes())?;
    let support = bifurclab_core::ScanField::new(
        a.grid,
        t.support.iter().map(|s| f64::from(u8::from(*s))).collect(),
        t.tbif.mask.clone(),
        Default::default(),
    );
    out.write("support.csv", encode_field_csv(&support).as_bytes())?;
    write_image(&mut out, "chi1", &render_field(&t.chi_top.value, Colormap::Heat, Scale::Linear), a.png)?;
    write_image(&mut out, "tbif.linear", &render_field(&t.tbif, Colormap::Heat, Scale::Linear), a.png)?;
    write_image(&mut out, "tbif.log", &render_field(&t.tbif, Colormap::Heat, Scale::Log), a.png)?;
    let report = json!({
        "command": "scan",
        "grid": grid_value(&a.grid),
        "n": a.n,
        "trials": a.trials,
        "seed": a.common.seed,
        "stats": t.stats,
    });
    let mut m = manifest(
        "scan",
        Some(&cfg),
        Some(a.common.seed),
        json!({ "grid": grid_value(&a.grid), "n": a.n, "trials": a.trials, "theta": a.theta, "png": a.png }),
    );
    m.tolerances.eps_disc = Some(t.stats.eps_disc);
    m.tolerances.noise_floor = Some(t.stats.noise_floor);
    Ok(Run {
        report,
        outputs: Some(out),
        manifest: m,
        failure: None,
    })
}

fn stability(a: &StabilityArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let source = match a.exhaustive {
        Some(max_len) => WordSource::Exhaustive { max_len },
        None => WordSource::Sampled {
            lengths: a.lengths.clone(),
            words: a.words,
            seed: a.common.seed,
        },
    };
    let r = stability_scan(&cfg.family, &cfg.measure, &a.grid, &source, a.threshold, exec)?;
    let mut out = OutputSet::new(&a.out)?;
    out.write("flagged.csv", encode_field_csv(&r.flagged_field()).as_bytes())?;
    out.write("proximal_fraction.csv", encode_field_csv(&r.proximal_fraction).as_bytes())?;
    let mut img = render_field(&r.proximal_fraction, Colormap::Gray, Scale::Linear);
    overlay(&mut img, &a.grid, &r.flagged, [255, 0, 0]);
    write_image(&mut out, "overlay", &img, a.png)?;
    let report = json!({
        "command": "stability",
        "label": "empirical proximal stability",
        "grid": grid_value(&a.grid),
        "threshold": a.threshold,
        "flagged_cells": r.flagged_cells(),
        "flagged_words": r.flagged_words(),
        "stable": r.flagged_cells() == 0,
        "words": r.words,
    });
    let params = json!({ "grid": grid_value(&a.grid), "lengths": a.lengths, "words": a.words,
        "exhaustive": a.exhaustive, "threshold": a.threshold, "png": a.png });
    let mut m = manifest("stability", Some(&cfg), Some(a.common.seed), params);
    m.tolerances.scan_gap_threshold = a.threshold;
    Ok(Run {
        report,
        outputs: Some(out),
        manifest: m,
        failure: None,
    })
}

fn tracezeros(a: &TraceArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let d = trace_divisor_measure(
        &cfg.family,
        &cfg.measure,
        a.t,
        &a.grid,
        a.n,
        a.words,
        a.common.seed,
        a.allow_asymmetric,
        exec,
    )?;
    let mut out = OutputSet::new(&a.out)?;
    out.write("divisors.csv", encode_divisor_csv(&d.cloud).as_bytes())?;
    out.write("density.csv", encode_field_csv(&d.density).as_bytes())?;
    write_image(&mut out, "density", &render_field(&d.density, Colormap::Heat, Scale::Log), a.png)?;
    let mut report = json!({
        "command": "tracezeros",
        "grid": grid_value(&a.grid),
        "t": [a.t.re, a.t.im],
        "n": a.n,
        "words_used": d.words_used,
        "degenerate_words": d.degenerate_words,
        "failed_cells": d.failed_cells,
        "zeros": d.cloud.iter().map(|p| p.multiplicity as u64).sum::<u64>(),
        "mass": d.density.total() * a.grid.cell_area(),
    });
    let mut m = manifest(
        "tracezeros",
        Some(&cfg),
        Some(a.common.seed),
        json!({ "grid": grid_value(&a.grid), "n": a.n, "words": a.words, "t": [a.t.re, a.t.im],
            "allow_asymmetric": a.allow_asymmetric, "compare_trials": a.compare_trials, "block": a.block, "png": a.png }),
    );
    if let Some(trials) = a.compare_trials {
        if !d.density.valid_values().iter().any(|v| *v > 0.0) {
            return Err(CliError::Usage(
                "no trace zeros of the sampled words fall in the grid; there is nothing to compare with T_bif".into(),
            ));
        }
        let p = WalkParams::new(a.n, trials, a.common.seed)?;
        let t = t_bif(&cfg.family, &cfg.measure, &a.grid, &p, DEFAULT_THETA, exec)?;
        let distance = normalized_l1_distance(&d.density, &t.tbif, a.block)?;
        report["comparison"] = json!({ "trials": trials, "block": a.block, "normalized_l1": distance });
        m.tolerances.eps_disc = Some(t.stats.eps_disc);
        m.tolerances.noise_floor = Some(t.stats.noise_floor);
    }
    Ok(Run {
        report,
        outputs: Some(out),
        manifest: m,
        failure: None,
    })
}

fn graphvol(a: &GraphvolArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let d = cfg.family.dim();
    if a.v0 >= d {
        return Err(CliError::Usage(format!("--v0 {} is not a basis index for dimension {d}", a.v0)));
    }
    let v0 = ProjPoint::basis(d, a.v0);
    let r = mean_graph_volume(&cfg.family, &cfg.measure, &v0, &a.grid, &a.lengths, a.trials, a.common.seed, a.dual, exec)?;
    let mut out = OutputSet::new(&a.out)?;
    out.write("growth.csv", encode_growth_csv(&r.rows).as_bytes())?;
    let mut report = to_value(&r);
    report["command"] = json!("graphvol");
    report["grid"] = grid_value(&a.grid);
    let params = json!({ "grid": grid_value(&a.grid), "lengths": a.lengths, "trials": a.trials, "v0": a.v0, "dual": a.dual });
    Ok(Run {
        report,
        outputs: Some(out),
        manifest: manifest("graphvol", Some(&cfg), Some(a.common.seed), params),
        failure: None,
    })
}

fn limitset(a: &LimitsetArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let p = ChainParams::new(a.burnin, a.count, a.thinning, a.chains, a.common.seed)?;
    let cloud = stationary_sample(&cfg.family, a.lambda, &cfg.measure, &p, a.dual, exec)?;
    let hist = limit_set_render(&cloud, a.chart, a.res, a.extent)?;
    let mut out = OutputSet::new(&a.out)?;
    out.write("cloud.csv", encode_cloud_csv(&cloud.points, cloud.dim()).as_bytes())?;
    write_image(&mut out, "limitset", &render_histogram(&hist, Colormap::Heat, Scale::Log), a.png)?;
    let chart = match a.chart {
        Chart::Affine(i) => json!(i),
        Chart::Sphere => json!("sphere"),
    };
    let mut report = json!({
        "command": "limitset",
        "lambda": [a.lambda.re, a.lambda.im],
        "points": cloud.len(),
        "dual": a.dual,
        "proximal_fraction": cloud.proximal_fraction,
        "chart": chart,
        "extent": [hist.grid.re0, hist.grid.re1, hist.grid.im0, hist.grid.im1],
        "outside": hist.outside,
    });
    if cloud.proximal_fraction < 0.5 {
        eprintln!(
            "bifurclab: measures: warning: only {:.0}% of probe words are proximal at this parameter",
            100.0 * cloud.proximal_fraction
        );
    }
    if a.check && !a.dual {
        report["stationarity"] = to_value(&stationarity_check(&cfg.family, &cfg.measure, &cloud)?);
    }
    let params = json!({ "lambda": [a.lambda.re, a.lambda.im], "count": a.count, "burnin": a.burnin,
        "thinning": a.thinning, "chains": a.chains, "chart": chart, "res": a.res, "extent": a.extent, "dual": a.dual,
        "check": a.check, "png": a.png });
    Ok(Run {
        report,
        outputs: Some(out),
        manifest: manifest("limitset", Some(&cfg), Some(a.common.seed), params),
        failure: None,
    })
}

fn dualcheck(a: &DualcheckArgs, exec: &Parallel) -> Result<Run, CliError> {
    let cfg = Config::load(&a.common.config)?;
    let (f, mu, l) = (&cfg.family, &cfg.measure, a.lambda);
    let p = WalkParams::new(a.n, a.trials, a.common.seed)?;
    let dual = dual_spectrum_check(f, l, mu, &p, exec)?;
    let chain = ChainParams::new(DEFAULT_BURN_IN, a.count, DEFAULT_THINNING, 4, a.common.seed)?;
    let primal_cloud = stationary_sample(f, l, mu, &chain, false, exec)?;
    let dual_cloud = stationary_sample(f, l, mu, &chain, true, exec)?;
    let primal = furstenberg_check(f, mu, &primal_cloud, &dual.spectrum.exponents[0])?;
    let dual_f = furstenberg_check(f, mu, &dual_cloud, &dual.dual_spectrum.exponents[0])?;
    let report = json!({
        "command": "dualcheck",
        "lambda": [l.re, l.im],
        "dual_relation": dual,
        "furstenberg": primal,
        "furstenberg_dual": dual_f,
        "passed": dual.within_tolerance && primal.within_tolerance && dual_f.within_tolerance,
    });
    let params = json!({ "lambda": [l.re, l.im], "n": a.n, "trials": a.trials, "count": a.count });
    Ok(Run {
        report,
        outputs: optional_outputs(&a.out)?,
        manifest: manifest("dualcheck", Some(&cfg), Some(a.common.seed), params),
        failure: None,
    })
}

fn calibrate_cmd(a: &CalibrateArgs) -> Result<Run, CliError> {
    let c = calibrate();
    let mut m = manifest("calibrate", None, None, json!({}));
    m.tolerances.eps_disc = Some(c.eps_disc);
    let failure = (!c.passed).then_some(CliError::Core(bifurclab_core::Error::Calibration { mass: c.mass }));
    Ok(Run {
        report: json!({
            "command": "calibrate",
            "mass": c.mass,
            "normalization_error": c.eps_disc,
            "passed": c.passed,
        }),
        outputs: optional_outputs(&a.out)?,
        manifest: m,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!(parse_complex("-3,0.5").unwrap(), C64::new(-3.0, 0.5));
        assert!(parse_complex("1").is_err());
        let g = parse_grid("-3,3,-3,3,101,101").unwrap();
        assert_eq!((g.nx, g.ny, g.re0), (101, 101, -3.0));
        assert!(parse_grid("0,1,0,1,8.5,8").is_err());
        assert!(parse_grid("1,0,0,1,8,8").is_err());
        assert_eq!(parse_count("2e5").unwrap(), 200_000);
        assert!(parse_count("1.5").is_err());
        assert_eq!(parse_chart("sphere").unwrap(), Chart::Sphere);
        assert_eq!(parse_chart("1").unwrap(), Chart::Affine(1));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_parameters_are_not_flags() {
        let cli = Cli::try_parse_from(["bifurclab", "lyap", "--config", "f.json", "--lambda", "-3,-1"]).unwrap();
        match cli.command {
            Command::Lyap(a) => assert_eq!(a.lambda, C64::new(-3.0, -1.0)),
            _ => unreachable!(),
        }
    }
}
