//! Holomorphic families `lambda -> rho_lambda` declared by matrices of
//! expressions, and the evaluators built on them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::linalg::{exterior_power, CMatrix, Order, ScaledProduct};
use crate::rng::{self, purpose};
use crate::walk::{Letter, StepMeasure, Word};
use crate::{Error, Result, C64};

/// Tolerance on `|det - 1|` at the validation points.
pub const DET_TOLERANCE: f64 = 1e-8;
/// Number of validation points.
pub const DET_SAMPLES: usize = 32;
/// Radius of the disk the validation points are drawn from.
pub const DET_SAMPLE_RADIUS: f64 = 2.0;
/// Minimal distance between an evaluation point and a declared pole.
pub const POLE_GUARD: f64 = 1e-12;
/// Generator images whose determinant drifts further than this from 1 are
/// rescaled by `det^(-1/d)`.
pub const DET_RENORMALIZE: f64 = 1e-10;

/// The JSON family block, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub dimension: usize,
    pub generators: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub poles: Vec<[f64; 2]>,
}

/// A validated family: one `d x d` matrix of expressions per generator.
#[derive(Debug, Clone)]
pub struct RepFamily {
    dim: usize,
    names: Vec<String>,
    entries: Vec<Vec<Expr>>,
    poles: Vec<C64>,
}

/// Parses a family block (or a whole config object holding one under
/// `"family"`) and validates it.
pub fn parse_family(text: &str) -> Result<RepFamily> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let block = match value.get("family") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let spec: FamilySpec = serde_json::from_value(block).map_err(|e| Error::Config(e.to_string()))?;
    RepFamily::from_spec(&spec)
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl RepFamily {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let d = spec.dimension;
        if d < 1 {
            return Err(Error::Dimension("dimension must be at least 1".into()));
        }
        if spec.generators.is_empty() {
            return Err(Error::Dimension("no generators declared".into()));
        }
        let mut names = Vec::new();
        let mut entries = Vec::new();
        for (name, rows) in &spec.generators {
            if !valid_name(name) {
                return Err(Error::Config(format!(
                    "generator name `{name}` must be lower-case letters, digits or `_`, starting with a letter"
                )));
            }
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Dimension(format!(
                    "generator `{name}` is not a {d}x{d} matrix"
                )));
            }
            let mut exprs = Vec::with_capacity(d * d);
            for (k, src) in rows.iter().flatten().enumerate() {
                let e = Expr::parse(src).map_err(|e| match e {
                    Error::Syntax { column, message } => Error::Syntax {
                        column,
                        message: format!("{message} in `{src}` (generator `{name}`, entry [{}][{}])", k / d, k % d),
                    },
                    other => other,
                })?;
                exprs.push(e);
            }
            names.push(name.clone());
            entries.push(exprs);
        }
        let poles = spec.poles.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let family = RepFamily {
            dim: d,
            names,
            entries,
            poles,
        };
        family.validate_determinants()?;
        Ok(family)
    }

    /// Checks `|det - 1| <= 1e-8` at 32 fixed pseudo-random points of the disk
    /// `|lambda| <= 2` that keep a distance of at least 0.1 from the poles.
    fn validate_determinants(&self) -> Result<()> {
        let mut rng = rng::stream(0, rng::stream_id(purpose::VALIDATION, 0));
        let mut points = Vec::with_capacity(DET_SAMPLES);
        while points.len() < DET_SAMPLES {
            let r = DET_SAMPLE_RADIUS * rng.random::<f64>().sqrt();
            let theta = core::f64::consts::TAU * rng.random::<f64>();
            let l = C64::from_polar(r, theta);
            if self.poles.iter().all(|p| (l - p).norm() >= 0.1) {
                points.push(l);
            }
        }
        for (g, name) in self.names.iter().enumerate() {
            for &l in &points {
                let m = self.raw(g, l)?;
                let deviation = (m.det() - C64::new(1.0, 0.0)).norm();
                if !(deviation <= DET_TOLERANCE) {
                    return Err(Error::Determinant {
                        generator: name.clone(),
                        deviation,
                        at: l,
                    });
                }
            }
        }
        Ok(())
    }

    /// Matrix of generator `g` exactly as declared, without renormalisation.
    fn raw(&self, g: usize, l: C64) -> Result<CMatrix> {
        if let Some(p) = self.poles.iter().find(|p| (l - *p).norm() < POLE_GUARD) {
            return Err(Error::Pole(*p));
        }
        let data: Vec<C64> = self.entries[g].iter().map(|e| e.eval(l)).collect();
        let m = CMatrix::from_vec(self.dim, self.dim, data);
        if !m.is_finite() {
            return Err(Error::NonFinite {
                generator: self.names[g].clone(),
                at: l,
            });
        }
        Ok(m)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses a word over this family's generator names.
    pub fn word(&self, text: &str) -> Result<Word> {
        Word::parse(text, &self.names)
    }

    /// `rho_lambda(g)` or its inverse by generator name.
    pub fn evaluate(&self, name: &str, inverse: bool, l: C64) -> Result<CMatrix> {
        let g = self
            .generator_index(name)
            .ok_or_else(|| Error::UnknownSymbol {
                symbol: name.to_string(),
                column: 1,
            })?;
        let letter = if inverse {
            Letter::inverse_of(g)
        } else {
            Letter::generator(g)
        };
        self.letter(letter, l)
    }

    /// Back to the config representation, entries printed in canonical form.
    pub fn to_spec(&self) -> FamilySpec {
        let d = self.dim;
        let generators = self
            .names
            .iter()
            .zip(&self.entries)
            .map(|(name, exprs)| {
                let rows = exprs
                    .chunks(d)
                    .map(|row| row.iter().map(|e| e.to_string()).collect())
                    .collect();
                (name.clone(), rows)
            })
            .collect();
        FamilySpec {
            dimension: d,
            generators,
            poles: self.poles.iter().map(|p| [p.re, p.im]).collect(),
        }
    }
}

/// A representation evaluated letter by letter.
pub trait Representation: Sync {
    fn dim(&self) -> usize;

    fn generator_count(&self) -> usize;

    /// Generator names, used when printing words.
    fn generator_names(&self) -> Vec<String> {
        (0..self.generator_count()).map(|g| format!("g{}", g + 1)).collect()
    }

    /// Image of a single letter at `l`.
    fn letter(&self, letter: Letter, l: C64) -> Result<CMatrix>;

    /// Images of every generator and inverse at `l`.
    fn images(&self, l: C64) -> Result<LetterImages> {
        let k = self.generator_count();
        let mut mats = Vec::with_capacity(2 * k);
        for g in 0..k {
            mats.push(self.letter(Letter::generator(g), l)?);
            mats.push(self.letter(Letter::inverse_of(g), l)?);
        }
        Ok(LetterImages { mats })
    }

    /// Scaled product of the images of `word` at `l`.
    fn word_product(&self, word: &Word, l: C64, order: Order) -> Result<ScaledProduct> {
        Ok(self.images(l)?.product(word, order))
    }
}

impl Representation for RepFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn generator_count(&self) -> usize {
        self.names.len()
    }

    fn generator_names(&self) -> Vec<String> {
        self.names.clone()
    }

    /// Generator images are rescaled onto `SL(d)` when their determinant has
    /// drifted by more than `1e-10`; inverses are computed numerically and
    /// must satisfy `|M M^-1 - I| <= 1e-10`.
    fn letter(&self, letter: Letter, l: C64) -> Result<CMatrix> {
        let mut m = self.raw(letter.index(), l)?;
        m.renormalize_det(DET_RENORMALIZE);
        if letter.is_inverse() {
            m.inverse()
        } else {
            Ok(m)
        }
    }
}

impl<R: Representation + ?Sized> Representation for &R {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn generator_count(&self) -> usize {
        (**self).generator_count()
    }

    fn generator_names(&self) -> Vec<String> {
        (**self).generator_names()
    }

    fn letter(&self, letter: Letter, l: C64) -> Result<CMatrix> {
        (**self).letter(letter, l)
    }

    fn images(&self, l: C64) -> Result<LetterImages> {
        (**self).images(l)
    }
}

/// Images of all letters at one parameter, indexed by [`Letter::slot`].
#[derive(Debug, Clone)]
pub struct LetterImages {
    mats: Vec<CMatrix>,
}

impl LetterImages {
    pub fn from_matrices(mats: Vec<CMatrix>) -> Self {
        LetterImages { mats }
    }

    pub fn get(&self, letter: Letter) -> &CMatrix {
        &self.mats[letter.slot()]
    }

    pub fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    /// `Order::Left` is `rho(s_1) ... rho(s_m)`; `Order::Right` reverses it.
    pub fn product(&self, word: &Word, order: Order) -> ScaledProduct {
        let mut p = ScaledProduct::identity(self.dim());
        match order {
            Order::Left => {
                for &l in word.letters() {
                    p.mul_right(self.get(l));
                }
            }
            Order::Right => {
                for &l in word.letters() {
                    p.mul_left(self.get(l));
                }
            }
        }
        p
    }

    /// Unscaled product in `Order::Left`; only for short words.
    pub fn matrix(&self, word: &Word) -> CMatrix {
        let mut m = CMatrix::identity(self.dim());
        for &l in word.letters() {
            m = m.matmul(self.get(l));
        }
        m
    }

    /// `rho(w)` for every atom `w` of `mu`, in atom order.
    pub fn atoms(&self, mu: &StepMeasure) -> Vec<CMatrix> {
        mu.atoms().iter().map(|(w, _)| self.matrix(w)).collect()
    }
}

/// Walk product `rho(gamma_n) ... rho(gamma_1)` from per-atom matrices.
pub fn walk_product(atoms: &[CMatrix], increments: &[usize]) -> ScaledProduct {
    let mut p = ScaledProduct::identity(atoms[0].rows());
    for &i in increments {
        p.mul_left(&atoms[i]);
    }
    p
}

/// The dual representation `rho*(g) = rho(g^-1)^T`.
#[derive(Debug, Clone, Copy)]
pub struct Dual<R>(pub R);

impl<R: Representation> Representation for Dual<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn generator_count(&self) -> usize {
        self.0.generator_count()
    }

    fn generator_names(&self) -> Vec<String> {
        self.0.generator_names()
    }

    fn letter(&self, letter: Letter, l: C64) -> Result<CMatrix> {
        Ok(self.0.letter(letter.inverse(), l)?.transpose())
    }

    fn images(&self, l: C64) -> Result<LetterImages> {
        let inner = self.0.images(l)?;
        let k = self.generator_count();
        let mut mats = Vec::with_capacity(2 * k);
        for g in 0..k {
            mats.push(inner.get(Letter::inverse_of(g)).transpose());
            mats.push(inner.get(Letter::generator(g)).transpose());
        }
        Ok(LetterImages { mats })
    }
}

/// `k`-th exterior power of a representation.
#[derive(Debug, Clone, Copy)]
pub struct Exterior<R> {
    pub inner: R,
    pub k: usize,
}

impl<R: Representation> Representation for Exterior<R> {
    fn dim(&self) -> usize {
        crate::linalg::binomial(self.inner.dim(), self.k)
    }

    fn generator_count(&self) -> usize {
        self.inner.generator_count()
    }

    fn generator_names(&self) -> Vec<String> {
        self.inner.generator_names()
    }

    fn letter(&self, letter: Letter, l: C64) -> Result<CMatrix> {
        Ok(exterior_power(&self.inner.letter(letter, l)?, self.k))
    }

    fn images(&self, l: C64) -> Result<LetterImages> {
        let inner = self.inner.images(l)?;
        Ok(LetterImages {
            mats: inner.mats.iter().map(|m| exterior_power(m, self.k)).collect(),
        })
    }
}

/// A representation that does not depend on the parameter.
#[derive(Debug, Clone)]
pub struct Constant {
    mats: Vec<CMatrix>,
}

impl Constant {
    /// Builds the representation from generator matrices; inverses are
    /// computed once.
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        let mut mats = Vec::with_capacity(2 * generators.len());
        for m in generators {
            let inv = m.inverse()?;
            mats.push(m);
            mats.push(inv);
        }
        Ok(Constant { mats })
    }
}

impl Representation for Constant {
    fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    fn generator_count(&self) -> usize {
        self.mats.len() / 2
    }

    fn letter(&self, letter: Letter, _l: C64) -> Result<CMatrix> {
        Ok(self.mats[letter.slot()].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn family(json: &str) -> Result<RepFamily> {
        parse_family(json)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    const DIAG: &str = r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#;

    #[test]
    fn diagonal_family() {
        let f = family(DIAG).unwrap();
        let a = f.evaluate("a", false, c(2.0, 0.0)).unwrap();
        assert_eq!(a, CMatrix::diag(&[c(2.0, 0.0), c(0.5, 0.0)]));
        let ai = f.evaluate("a", true, c(2.0, 0.0)).unwrap();
        assert!(ai.max_abs_diff(&CMatrix::diag(&[c(0.5, 0.0), c(2.0, 0.0)])) < 1e-15);
        assert!(matches!(f.evaluate("a", false, c(0.0, 1e-13)), Err(Error::Pole(_))));
    }

    #[test]
    fn determinant_violation() {
        let err = family(r#"{"dimension":2,"generators":{"a":[["l","0"],["0","1"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Determinant { .. }), "{err:?}");
    }

    #[test]
    fn dimension_errors() {
        let err = family(r#"{"dimension":2,"generators":{"a":[["1","0","0"],["0","1"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        let err = family(r#"{"dimension":3,"generators":{"a":[["1","0"],["0","1"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn entry_errors_propagate() {
        let err = family(r#"{"dimension":2,"generators":{"a":[["1+","0"],["0","1"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
        let err = family(r#"{"dimension":2,"generators":{"a":[["x","0"],["0","1"]]}}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol { .. }));
    }

    #[test]
    fn riley_substitution() {
        let f = family(r#"{"dimension":2,"generators":{"a":[["1","2"],["0","1"]],"b":[["1","0"],["l","1"]]}}"#)
            .unwrap();
        let b = f.evaluate("b", false, c(0.0, 3.0)).unwrap();
        assert_eq!(b, CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 3.0), c(1.0, 0.0)]]));
    }

    #[test]
    fn dual_by_hand() {
        let f = family(r#"{"dimension":2,"generators":{"a":[["2","1"],["0","1/2"]]}}"#).unwrap();
        let dual = Dual(&f);
        let a = dual.letter(Letter::generator(0), c(0.0, 0.0)).unwrap();
        let expected = CMatrix::from_real_rows(&[&[0.5, 0.0], &[-1.0, 2.0]]);
        assert!(a.max_abs_diff(&expected) < 1e-15);
        let twice = Dual(Dual(&f));
        let orig = f.letter(Letter::generator(0), c(0.0, 0.0)).unwrap();
        assert!(twice.letter(Letter::generator(0), c(0.0, 0.0)).unwrap().max_abs_diff(&orig) <= 1e-12);
        let id = Constant::new(vec![CMatrix::identity(2)]).unwrap();
        assert_eq!(Dual(&id).letter(Letter::generator(0), c(0.0, 0.0)).unwrap(), CMatrix::identity(2));
    }

    #[test]
    fn images_agree_with_letters() {
        let f = family(r#"{"dimension":2,"generators":{"a":[["1","2"],["0","1"]],"b":[["1","0"],["l","1"]]}}"#)
            .unwrap();
        let l = c(0.3, -1.1);
        let dual = Dual(&f);
        let imgs = dual.images(l).unwrap();
        for letter in [Letter::generator(0), Letter::inverse_of(0), Letter::generator(1), Letter::inverse_of(1)] {
            assert!(imgs.get(letter).max_abs_diff(&dual.letter(letter, l).unwrap()) < 1e-14);
        }
        let ext = Exterior { inner: &f, k: 2 };
        assert_eq!(ext.dim(), 1);
        let e = ext.letter(Letter::generator(1), l).unwrap();
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn spec_round_trip() {
        let f = family(
            r#"{"dimension":2,"generators":{"a":[["(l+1/l)/2","(l-1/l)/2"],["(l-1/l)/2","(l+1/l)/2"]],"b":[["l","0"],["0","l^-1"]]},"poles":[[0,0]]}"#,
        )
        .unwrap();
        let g = RepFamily::from_spec(&f.to_spec()).unwrap();
        for l in [c(0.7, 0.2), c(-2.0, 1.5), c(3.0, 0.0)] {
            for name in ["a", "b"] {
                let x = f.evaluate(name, false, l).unwrap();
                let y = g.evaluate(name, false, l).unwrap();
                assert!(x.max_abs_diff(&y) <= 1e-12 * x.max_abs());
            }
        }
    }

    #[test]
    fn accepts_whole_config() {
        let f = parse_family(&format!(r#"{{"schema_version":1,"family":{DIAG}}}"#)).unwrap();
        assert_eq!(f.names(), ["a"]);
    }

    #[test]
    fn inverse_times_generator() {
        let f = family(
            r#"{"dimension":3,"generators":{"a":[["l","0","0"],["0","1","0"],["0","0","1/l"]],"b":[["2/3","-1/3","2/3"],["2/3","2/3","-1/3"],["-1/3","2/3","2/3"]]},"poles":[[0,0]]}"#,
        )
        .unwrap();
        let l = c(1.3, -0.4);
        for g in 0..2 {
            let m = f.letter(Letter::generator(g), l).unwrap();
            let mi = f.letter(Letter::inverse_of(g), l).unwrap();
            assert!(mi.matmul(&m).max_abs_diff(&CMatrix::identity(3)) <= 1e-10);
        }
    }
}
