//! Words in the generators, step measures and random-walk sampling.
//!
//! Words are never freely reduced: `a A` is a word of length 2. Relations of
//! the group are never consulted either; the group is only seen through the
//! support of the step measure and the representation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::linalg::Order;
use crate::rng::{self, purpose};
use crate::{Error, Result};

/// A generator or its inverse, stored as `+(index + 1)` or `-(index + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn generator(index: usize) -> Self {
        Letter(index as i32 + 1)
    }

    pub fn inverse_of(index: usize) -> Self {
        Letter(-(index as i32 + 1))
    }

    pub fn from_signed(raw: i32) -> Option<Self> {
        (raw != 0).then_some(Letter(raw))
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Slot in a table holding generators then inverses: `2 * index + inv`.
    pub fn slot(self) -> usize {
        2 * self.index() + usize::from(self.is_inverse())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    /// `w^-1`: letters reversed and inverted.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Parses whitespace-separated generator names; an upper-case name denotes
    /// the inverse of the corresponding lower-case generator.
    pub fn parse(text: &str, names: &[String]) -> Result<Word> {
        let mut letters = Vec::new();
        for token in text.split_whitespace() {
            let lower = token.to_lowercase();
            let Some(idx) = names.iter().position(|n| *n == lower) else {
                return Err(Error::InvalidMeasure(format!("unknown generator `{token}`")));
            };
            if token == lower {
                letters.push(Letter::generator(idx));
            } else if token == token.to_uppercase() {
                letters.push(Letter::inverse_of(idx));
            } else {
                return Err(Error::InvalidMeasure(format!(
                    "mixed-case token `{token}` (use lower case for a generator, upper case for its inverse)"
                )));
            }
        }
        Ok(Word(letters))
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.word.letters().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let name = &self.names[l.index()];
            if l.is_inverse() {
                f.write_str(&name.to_uppercase())?;
            } else {
                f.write_str(name)?;
            }
        }
        Ok(())
    }
}

/// Finitely supported probability measure on words.
#[derive(Debug, Clone)]
pub struct StepMeasure {
    atoms: Vec<(Word, f64)>,
    symmetric: bool,
    sampler: WeightedIndex<f64>,
}

impl PartialEq for StepMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl StepMeasure {
    /// Weights must be positive and sum to 1 within `1e-12`.
    pub fn new(atoms: Vec<(Word, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if let Some((_, p)) = atoms.iter().find(|(_, p)| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-positive weight {p}")));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let sampler = WeightedIndex::new(atoms.iter().map(|(_, p)| *p))
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        let symmetric = atoms.iter().all(|(w, p)| {
            let inv = w.inverse();
            atoms
                .iter()
                .filter(|(v, _)| *v == inv)
                .map(|(_, q)| q)
                .sum::<f64>()
                .sub_abs(*p)
                <= 1e-12
        });
        Ok(StepMeasure {
            atoms,
            symmetric,
            sampler,
        })
    }

    /// Weight `1/(2k)` on each generator and each inverse.
    pub fn uniform_symmetric(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidMeasure("need at least one generator".into()));
        }
        let p = 1.0 / (2 * k) as f64;
        let atoms = (0..k)
            .flat_map(|i| {
                [
                    (Word::new(alloc::vec![Letter::generator(i)]), p),
                    (Word::new(alloc::vec![Letter::inverse_of(i)]), p),
                ]
            })
            .collect();
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[(Word, f64)] {
        &self.atoms
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Largest generator index used, plus one.
    pub fn generator_span(&self) -> usize {
        self.atoms
            .iter()
            .flat_map(|(w, _)| w.letters())
            .map(|l| l.index() + 1)
            .max()
            .unwrap_or(0)
    }

    /// The reversed measure `mu(g^-1)`: every atom replaced by its inverse.
    pub fn reversed(&self) -> StepMeasure {
        let atoms = self.atoms.iter().map(|(w, p)| (w.inverse(), *p)).collect();
        Self::new(atoms).expect("inverting atoms keeps the measure valid")
    }

    /// Draws one atom index.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    /// Draws `n` i.i.d. atom indices.
    pub fn sample_increments<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        (0..n).map(|_| self.sampler.sample(rng)).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Walk {
        Walk {
            increments: self.sample_increments(n, rng),
        }
    }
}

trait SubAbs {
    fn sub_abs(self, other: f64) -> f64;
}

impl SubAbs for f64 {
    fn sub_abs(self, other: f64) -> f64 {
        (self - other).abs()
    }
}

/// `n` sampled increments `gamma_1, ..., gamma_n`, as atom indices of the
/// measure they were drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub increments: Vec<usize>,
}

impl Walk {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    /// Word of the walk product. `Order::Left` gives `gamma_1 gamma_2 ... gamma_n`,
    /// `Order::Right` gives `gamma_n ... gamma_1`.
    pub fn word(&self, mu: &StepMeasure, order: Order) -> Word {
        let mut letters = Vec::new();
        let mut push = |i: usize| letters.extend_from_slice(mu.atoms[i].0.letters());
        match order {
            Order::Left => self.increments.iter().for_each(|&i| push(i)),
            Order::Right => self.increments.iter().rev().for_each(|&i| push(i)),
        }
        Word(letters)
    }

    pub fn prefix(&self, n: usize) -> Walk {
        Walk {
            increments: self.increments[..n].to_vec(),
        }
    }
}

/// Word of `n` increments drawn from the stream `(seed, 0)` of the trial
/// purpose, in `gamma_1 ... gamma_n` order. Two calls with the same arguments
/// return the same word.
pub fn sample_word(mu: &StepMeasure, n: usize, seed: u64) -> Word {
    let mut rng = rng::stream(seed, rng::stream_id(purpose::TRIAL, 0));
    mu.draw(n, &mut rng).word(mu, Order::Left)
}

/// Every freely reduced word of length `1..=max_len` in `k` generators.
pub fn enumerate_reduced_words(k: usize, max_len: usize) -> Vec<Word> {
    let letters: Vec<Letter> = (0..k)
        .flat_map(|i| [Letter::generator(i), Letter::inverse_of(i)])
        .collect();
    let mut out = Vec::new();
    let mut frontier: Vec<Word> = alloc::vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.0.last().is_some_and(|last| *last == l.inverse()) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        alloc::vec!["a".to_string(), "b".to_string()]
    }

    #[test]
    fn uniform_symmetric_atoms() {
        let mu = StepMeasure::uniform_symmetric(2).unwrap();
        assert_eq!(mu.atoms().len(), 4);
        assert!(mu.atoms().iter().all(|(_, p)| *p == 0.25));
        assert!(mu.is_symmetric());
        let one = StepMeasure::uniform_symmetric(1).unwrap();
        assert_eq!(one.atoms().len(), 2);
        assert!(one.atoms().iter().all(|(_, p)| *p == 0.5));
        assert!(one.is_symmetric());
        assert_eq!(one.atoms().iter().map(|(_, p)| p).sum::<f64>(), 1.0);
        assert!(StepMeasure::uniform_symmetric(0).is_err());
    }

    #[test]
    fn reversal() {
        let n = names();
        let mu = StepMeasure::new(alloc::vec![
            (Word::parse("a", &n).unwrap(), 0.75),
            (Word::parse("A", &n).unwrap(), 0.25),
        ])
        .unwrap();
        assert!(!mu.is_symmetric());
        let r = mu.reversed();
        assert_eq!(r.atoms()[0], (Word::parse("A", &n).unwrap(), 0.75));
        assert_eq!(r.atoms()[1], (Word::parse("a", &n).unwrap(), 0.25));
        assert_eq!(r.reversed(), mu);
        let sym = StepMeasure::uniform_symmetric(2).unwrap();
        let rs = sym.reversed();
        for (w, p) in sym.atoms() {
            assert!(rs.atoms().iter().any(|(v, q)| v == w && q == p));
        }
    }

    #[test]
    fn invalid_measures() {
        let n = names();
        let a = Word::parse("a", &n).unwrap();
        assert!(StepMeasure::new(alloc::vec![(a.clone(), 0.5)]).is_err());
        assert!(StepMeasure::new(alloc::vec![(a.clone(), 1.5), (a, -0.5)]).is_err());
        assert!(Word::parse("c", &n).is_err());
        assert!(Word::parse("Ab", &n).is_err());
    }

    #[test]
    fn multi_letter_symmetry() {
        let n = names();
        let mu = StepMeasure::new(alloc::vec![
            (Word::parse("a b A", &n).unwrap(), 0.5),
            (Word::parse("a B A", &n).unwrap(), 0.5),
        ])
        .unwrap();
        assert!(mu.is_symmetric());
        assert_eq!(mu.atoms()[0].0.display(&n).to_string(), "a b A");
    }

    #[test]
    fn sampling_is_deterministic() {
        let mu = StepMeasure::uniform_symmetric(2).unwrap();
        assert!(sample_word(&mu, 0, 3).is_empty());
        let w1 = sample_word(&mu, 5, 3);
        let w2 = sample_word(&mu, 5, 3);
        assert_eq!(w1, w2);
        assert_eq!(w1.len(), 5);
    }

    #[test]
    fn walk_orders() {
        let n = names();
        let mu = StepMeasure::new(alloc::vec![
            (Word::parse("a b", &n).unwrap(), 0.5),
            (Word::parse("B A", &n).unwrap(), 0.5),
        ])
        .unwrap();
        let walk = Walk {
            increments: alloc::vec![0, 1, 1],
        };
        assert_eq!(walk.word(&mu, Order::Left).display(&n).to_string(), "a b B A B A");
        assert_eq!(walk.word(&mu, Order::Right).display(&n).to_string(), "B A B A a b");
    }

    #[test]
    fn reduced_word_count() {
        // 4 + 4*3 + 4*9
        assert_eq!(enumerate_reduced_words(2, 3).len(), 4 + 12 + 36);
    }
}
