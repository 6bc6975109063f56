//! Numerics for random walks on holomorphic families of `SL(d, C)`
//! representations.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation: parsing a family declaration, sampling words of a random walk,
//! estimating Lyapunov spectra, scanning a parameter rectangle for the
//! bifurcation current `dd^c(chi_1 + chi_1^*)`, detecting changes of
//! proximality, counting trace divisors and measuring graph volumes. File
//! formats, images and the command line live in the `bifurclab` crate.
//!
//! Indexing conventions used throughout:
//!
//! * matrices act on column vectors, a word `s_1 s_2 ... s_m` is evaluated as
//!   `rho(s_1) rho(s_2) ... rho(s_m)`;
//! * the walk `gamma_n ... gamma_1` multiplies new increments on the left;
//! * the exponents are indexed `chi_1 >= ... >= chi_d` with `d` the matrix
//!   size, and `chi_1^* = -chi_d` is the top exponent of the dual walk.

#![no_std]
// `!(x > y)` is used on purpose throughout: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod divisor;
pub mod error;
pub mod exec;
pub mod expr;
pub mod family;
pub mod grid;
pub mod linalg;
pub mod lyapunov;
pub mod measures;
pub mod proximality;
pub mod rng;
pub mod scan;
pub mod stats;
pub mod volume;
pub mod walk;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use family::{parse_family, Dual, RepFamily, Representation};
pub use grid::{ScanField, ScanGrid};
pub use linalg::CMatrix;
pub use walk::{Letter, StepMeasure, Word};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;
