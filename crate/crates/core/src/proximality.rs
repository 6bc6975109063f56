//! Proximality of matrices and words, and the scan for parameters where it
//! changes.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use serde::Serialize;

use crate::exec::Executor;
use crate::family::{walk_product, LetterImages, Representation};
use crate::grid::{FieldMeta, ScanField, ScanGrid};
use crate::linalg::eigen::quadratic_roots;
use crate::linalg::{eigenvalues, eigenvector, CMatrix, Order, ProjHyperplane, ProjPoint, ScaledProduct};
use crate::rng::{self, purpose};
use crate::walk::{enumerate_reduced_words, StepMeasure, Word};
use crate::{Error, Result, C64};

/// Gap tolerance for single-matrix queries.
pub const TOL_GAP: f64 = 1e-9;
/// Default gap threshold applied to scanned gap fields.
pub const SCAN_GAP_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalityVerdict {
    pub is_proximal: bool,
    /// `log(|mu_1| / |mu_2|)`, never negative.
    pub gap: f64,
    /// Attracting fixed point (eigenline of the top eigenvalue).
    pub fix_plus: Option<ProjPoint>,
    /// Repelling hyperplane: the sum of the other generalised eigenspaces,
    /// i.e. the kernel of the top left eigenvector.
    pub fix_minus: Option<ProjHyperplane>,
}

/// Verdict for a single matrix; the fixed objects are computed only when the
/// gap exceeds `tol_gap`. Moduli tied within solver accuracy give gap 0.
pub fn check_proximal(m: &CMatrix, tol_gap: f64) -> Result<ProximalityVerdict> {
    if !m.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let vals = eigenvalues(m)?;
    let gap = modulus_gap(&vals);
    verdict_from(m, &vals, gap, tol_gap)
}

fn modulus_gap(vals: &[C64]) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    let (a, b) = (vals[0].norm(), vals[1].norm());
    if a == 0.0 {
        return 0.0;
    }
    let g = (a / b).ln();
    if g.is_nan() {
        0.0
    } else {
        g.max(0.0)
    }
}

fn verdict_from(m: &CMatrix, vals: &[C64], gap: f64, tol_gap: f64) -> Result<ProximalityVerdict> {
    if !(gap > tol_gap) {
        return Ok(ProximalityVerdict {
            is_proximal: false,
            gap,
            fix_plus: None,
            fix_minus: None,
        });
    }
    let top = vals[0];
    let fix_plus = ProjPoint::new(&eigenvector(m, top))?;
    let left = eigenvector(&m.transpose(), top);
    let fix_minus = ProjHyperplane::new(&left)?;
    Ok(ProximalityVerdict {
        is_proximal: true,
        gap,
        fix_plus: Some(fix_plus),
        fix_minus: Some(fix_minus),
    })
}

/// Complex logarithms of the two eigenvalues of largest modulus of a product
/// of `SL(d)` matrices kept in scaled form.
///
/// For `d = 2` the characteristic polynomial is formed with the exact
/// determinant 1, which keeps the subdominant eigenvalue accurate even when
/// the scaled matrix part is numerically rank one.
pub fn top_two_logs(p: &ScaledProduct) -> Result<[C64; 2]> {
    let ls = p.log_scale();
    let m = p.matrix();
    if p.dim() == 2 {
        let s2 = (-2.0 * ls).exp();
        let (big, _) = quadratic_roots(m.trace(), C64::new(s2, 0.0));
        let l1 = big.ln() + ls;
        return Ok([l1, -l1]);
    }
    let vals = eigenvalues(m)?;
    Ok([vals[0].ln() + ls, vals[1].ln() + ls])
}

/// Gap of a product of `SL(d)` matrices; see [`top_two_logs`].
pub fn product_gap(p: &ScaledProduct) -> Result<f64> {
    let [a, b] = top_two_logs(p)?;
    let g = a.re - b.re;
    Ok(if g.is_nan() { 0.0 } else { g.max(0.0) })
}

/// Verdict for a product of `SL(d)` matrices in scaled form.
pub fn check_proximal_product(p: &ScaledProduct, tol_gap: f64) -> Result<ProximalityVerdict> {
    let gap = product_gap(p)?;
    let m = p.matrix();
    let vals = eigenvalues(m)?;
    verdict_from(m, &vals, gap, tol_gap)
}

fn node_images<R: Representation, E: Executor>(rep: &R, grid: &ScanGrid, exec: &E) -> Vec<Option<LetterImages>> {
    exec.map(grid.len(), |k| rep.images(grid.node_at(k)).ok())
}

/// Gap of `rho_lambda(word)` at every node. Nodes where the family cannot be
/// evaluated are masked.
pub fn word_gap_field<R, E>(rep: &R, word: &Word, grid: &ScanGrid, exec: &E) -> Result<ScanField>
where
    R: Representation,
    E: Executor,
{
    if word.is_empty() {
        return Err(Error::InvalidArgument("gap field of the empty word".into()));
    }
    let images = node_images(rep, grid, exec);
    let gaps = exec.map(grid.len(), |k| -> Option<f64> {
        let imgs = images[k].as_ref()?;
        product_gap(&imgs.product(word, Order::Left)).ok()
    });
    let mask = gaps.iter().map(Option::is_none).collect();
    let values = gaps.into_iter().map(|g| g.unwrap_or(f64::NAN)).collect();
    Ok(ScanField::new(
        *grid,
        values,
        mask,
        FieldMeta {
            kind: "gap".into(),
            n: word.len(),
            ..FieldMeta::default()
        },
    ))
}

/// Proximality of sampled walk words at one parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordProximality {
    pub length: usize,
    pub words: usize,
    pub proximal: usize,
    pub fraction: f64,
    pub gaps: Vec<f64>,
}

/// Runs [`check_proximal_product`] on `words` walk words of `length`
/// increments at `lambda`. Word `w` is the one a sampled [`stability_scan`]
/// with the same seed uses for that length.
pub fn sampled_word_proximality<R: Representation>(
    rep: &R,
    l: C64,
    mu: &StepMeasure,
    length: usize,
    words: usize,
    seed: u64,
    tol_gap: f64,
) -> Result<WordProximality> {
    if length == 0 || words == 0 {
        return Err(Error::InvalidArgument("need a positive word length and count".into()));
    }
    let atoms = rep.images(l)?.atoms(mu);
    let mut gaps = Vec::with_capacity(words);
    let mut proximal = 0;
    for w in 0..words {
        let id = rng::stream_id(purpose::STABILITY_WORDS, ((length as u64) << 32) | w as u64);
        let walk = mu.draw(length, &mut rng::stream(seed, id));
        let v = check_proximal_product(&walk_product(&atoms, &walk.increments), tol_gap)?;
        proximal += usize::from(v.is_proximal);
        gaps.push(v.gap);
    }
    Ok(WordProximality {
        length,
        words,
        proximal,
        fraction: proximal as f64 / words as f64,
        gaps,
    })
}

/// Which words a stability scan examines.
#[derive(Debug, Clone, PartialEq)]
pub enum WordSource {
    /// `words` walk words for each length `n` (in increments), drawn from the
    /// measure.
    Sampled { lengths: Vec<usize>, words: usize, seed: u64 },
    /// Every freely reduced word of length at most `max_len` in the generators.
    Exhaustive { max_len: usize },
}

impl WordSource {
    fn words(&self, mu: &StepMeasure, generators: usize) -> Vec<(usize, Word)> {
        match self {
            WordSource::Sampled { lengths, words, seed } => {
                let mut out = Vec::new();
                for &n in lengths {
                    for w in 0..*words {
                        let id = rng::stream_id(purpose::STABILITY_WORDS, ((n as u64) << 32) | w as u64);
                        let mut r = rng::stream(*seed, id);
                        out.push((n, mu.draw(n, &mut r).word(mu, Order::Right)));
                    }
                }
                out
            }
            WordSource::Exhaustive { max_len } => enumerate_reduced_words(generators, *max_len)
                .into_iter()
                .map(|w| (w.len(), w))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordDiagnostics {
    /// Length of the walk (or of the word in exhaustive mode).
    pub length: usize,
    pub letters: usize,
    pub word: String,
    pub flagged: bool,
    pub flagged_cells: usize,
    /// Fraction of unmasked nodes where the word is proximal.
    pub proximal_fraction: f64,
    pub min_gap: f64,
    pub max_gap: f64,
}

/// Result of a stability scan. "Stability" here is empirical: only grid
/// constancy of proximality can be observed.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub grid: ScanGrid,
    pub threshold: f64,
    /// Union over words of the flagged cells (one cell per node).
    pub flagged: Vec<bool>,
    /// Fraction of words that are proximal at each node.
    pub proximal_fraction: ScanField,
    /// Nodes where the family could not be evaluated.
    pub masked: Vec<bool>,
    pub words: Vec<WordDiagnostics>,
}

impl StabilityReport {
    pub fn flagged_words(&self) -> usize {
        self.words.iter().filter(|w| w.flagged).count()
    }

    pub fn flagged_cells(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }

    pub fn flagged_field(&self) -> ScanField {
        ScanField::new(
            self.grid,
            self.flagged.iter().map(|f| if *f { 1.0 } else { 0.0 }).collect(),
            self.masked.clone(),
            FieldMeta {
                kind: "flagged".into(),
                ..self.proximal_fraction.meta.clone()
            },
        )
    }
}

/// Per-node data for one word: gap and the complex logs of the top two
/// eigenvalues.
#[derive(Debug, Clone, Copy)]
struct NodeSpectrum {
    gap: f64,
    logs: [C64; 2],
}

fn wrapped_distance(a: C64, b: C64) -> f64 {
    let tau = core::f64::consts::TAU;
    let mut dth = (a.im - b.im) % tau;
    if dth > core::f64::consts::PI {
        dth -= tau;
    } else if dth < -core::f64::consts::PI {
        dth += tau;
    }
    (a.re - b.re).hypot(dth)
}

/// True when continuing the top eigenvalue from `a` to `b` lands on the
/// second eigenvalue at `b`: the moduli must have crossed in between.
fn swaps(a: &NodeSpectrum, b: &NodeSpectrum) -> bool {
    let stay = wrapped_distance(a.logs[0], b.logs[0]) + wrapped_distance(a.logs[1], b.logs[1]);
    let cross = wrapped_distance(a.logs[0], b.logs[1]) + wrapped_distance(a.logs[1], b.logs[0]);
    cross < stay
}

/// Scans a family for parameters where proximality of some word changes.
///
/// For every word the gap field is thresholded at `threshold`. An edge between
/// neighbouring nodes is flagged when exactly one end is proximal, or when both
/// are and the dominant eigenvalue continues into the subdominant one across
/// the edge. Both cells of a flagged edge are flagged; a word is flagged when
/// any of its cells is.
pub fn stability_scan<R, E>(
    rep: &R,
    mu: &StepMeasure,
    grid: &ScanGrid,
    source: &WordSource,
    threshold: f64,
    exec: &E,
) -> Result<StabilityReport>
where
    R: Representation,
    E: Executor,
{
    grid.require_scan_size()?;
    let names = rep.generator_names();
    let words = source.words(mu, rep.generator_count());
    let images = node_images(rep, grid, exec);
    let masked: Vec<bool> = images.iter().map(Option::is_none).collect();
    let (nx, ny) = (grid.nx, grid.ny);
    let mut flagged = vec![false; grid.len()];
    let mut proximal_count = vec![0usize; grid.len()];
    let mut diagnostics = Vec::with_capacity(words.len());
    for (length, word) in &words {
        let spectra: Vec<Option<NodeSpectrum>> = exec.map(grid.len(), |k| {
            let imgs = images[k].as_ref()?;
            let p = imgs.product(word, Order::Left);
            let logs = top_two_logs(&p).ok()?;
            let g = logs[0].re - logs[1].re;
            let gap = if g.is_nan() { 0.0 } else { g.max(0.0) };
            Some(NodeSpectrum { gap, logs })
        });
        let mut cells = vec![false; grid.len()];
        let mut edge = |a: usize, b: usize| {
            if let (Some(sa), Some(sb)) = (&spectra[a], &spectra[b]) {
                let (pa, pb) = (sa.gap > threshold, sb.gap > threshold);
                if pa != pb || (pa && pb && swaps(sa, sb)) {
                    cells[a] = true;
                    cells[b] = true;
                }
            }
        };
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.index(i, j);
                if i + 1 < nx {
                    edge(k, k + 1);
                }
                if j + 1 < ny {
                    edge(k, k + nx);
                }
            }
        }
        let mut valid = 0usize;
        let mut proximal = 0usize;
        let (mut min_gap, mut max_gap) = (f64::INFINITY, 0.0f64);
        for (k, s) in spectra.iter().enumerate() {
            if let Some(s) = s {
                valid += 1;
                min_gap = min_gap.min(s.gap);
                max_gap = max_gap.max(s.gap);
                if s.gap > threshold {
                    proximal += 1;
                    proximal_count[k] += 1;
                }
            }
        }
        let flagged_cells = cells.iter().filter(|c| **c).count();
        for (f, c) in flagged.iter_mut().zip(&cells) {
            *f |= *c;
        }
        diagnostics.push(WordDiagnostics {
            length: *length,
            letters: word.len(),
            word: alloc::format!("{}", word.display(&names)),
            flagged: flagged_cells > 0,
            flagged_cells,
            proximal_fraction: if valid > 0 { proximal as f64 / valid as f64 } else { 0.0 },
            min_gap: if valid > 0 { min_gap } else { f64::NAN },
            max_gap: if valid > 0 { max_gap } else { f64::NAN },
        });
    }
    let total = words.len().max(1) as f64;
    let proximal_fraction = ScanField::new(
        *grid,
        proximal_count.iter().map(|c| *c as f64 / total).collect(),
        masked.clone(),
        FieldMeta {
            kind: "proximal-fraction".into(),
            n: words.iter().map(|(n, _)| *n).max().unwrap_or(0),
            trials: words.len(),
            seed: match source {
                WordSource::Sampled { seed, .. } => *seed,
                WordSource::Exhaustive { .. } => 0,
            },
        },
    );
    Ok(StabilityReport {
        grid: *grid,
        threshold,
        flagged,
        proximal_fraction,
        masked,
        words: diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::family::parse_family;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_verdict() {
        let m = CMatrix::diag(&[c(2.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)]);
        let v = check_proximal(&m, TOL_GAP).unwrap();
        assert!(v.is_proximal);
        assert!((v.gap - 2f64.ln()).abs() < 1e-12);
        let fp = v.fix_plus.unwrap();
        assert!(fp.coords()[1].norm() < 1e-9 && fp.coords()[2].norm() < 1e-9);
        let fm = v.fix_minus.unwrap();
        assert!(fm.coeffs()[1].norm() < 1e-9 && fm.coeffs()[2].norm() < 1e-9);
        assert!(!fm.contains(&fp, 1e-6));
    }

    #[test]
    fn non_proximal_cases() {
        let t: f64 = 0.9;
        let rot = CMatrix::from_real_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let v = check_proximal(&rot, TOL_GAP).unwrap();
        assert!(!v.is_proximal && v.gap < 1e-12);
        let jordan = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(!check_proximal(&jordan, TOL_GAP).unwrap().is_proximal);
    }

    #[test]
    fn fixed_point_is_eigenvector() {
        let m = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let v = check_proximal(&m, TOL_GAP).unwrap();
        let x = v.fix_plus.unwrap().unit_lift();
        let mx = m.apply(&x);
        let vals = eigenvalues(&m).unwrap();
        let res: f64 = mx.iter().zip(&x).map(|(a, b)| (a - vals[0] * b).norm()).fold(0.0, f64::max);
        assert!(res <= 1e-6 * m.frobenius_norm());
    }

    #[test]
    fn long_products_keep_the_gap() {
        let a = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let mut p = ScaledProduct::identity(2);
        for _ in 0..500 {
            p.mul_left(&a);
        }
        // eigenvalues of a are phi^2 and phi^-2
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        let expected = 500.0 * 4.0 * phi.ln();
        assert!((product_gap(&p).unwrap() - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn gap_field_of_diagonal_word() {
        let f = parse_family(r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#).unwrap();
        let grid = ScanGrid::new(1.2, 2.0, -0.4, 0.4, 8, 8).unwrap();
        let field = word_gap_field(&f, &f.word("a").unwrap(), &grid, &Serial).unwrap();
        for (k, g) in field.valid() {
            let l = grid.node_at(k);
            assert!((g - 2.0 * l.norm().ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_detection() {
        let a = NodeSpectrum {
            gap: 0.2,
            logs: [c(0.1, 0.3), c(-0.1, -0.3)],
        };
        let b = NodeSpectrum {
            gap: 0.2,
            logs: [c(0.1, -0.3), c(-0.1, 0.3)],
        };
        assert!(swaps(&a, &b));
        assert!(!swaps(&a, &a));
    }
}
