//! Rectangular parameter grids and real fields on them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Smallest node count per axis accepted by the scanning operations.
pub const MIN_SCAN_NODES: usize = 8;

/// `nx x ny` cells tiling `[re0, re1] x [im0, im1]`, one node at the centre of
/// each cell. Node `(i, j)` has flat index `j * nx + i`; `j` runs along the
/// imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl ScanGrid {
    /// Any positive node counts are accepted here; the scans themselves
    /// require [`MIN_SCAN_NODES`] per axis (see [`ScanGrid::require_scan_size`]).
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64, nx: usize, ny: usize) -> Result<Self> {
        let finite = [re0, re1, im0, im1].iter().all(|v| v.is_finite());
        if !finite || !(re1 > re0) || !(im1 > im0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid rectangle [{re0}, {re1}] x [{im0}, {im1}] must have positive extents"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::InsufficientGrid("node counts must be positive".into()));
        }
        Ok(ScanGrid {
            re0,
            re1,
            im0,
            im1,
            nx,
            ny,
        })
    }

    /// Square grid centred at `c` with half-width `r`.
    pub fn square(c: C64, r: f64, n: usize) -> Result<Self> {
        Self::new(c.re - r, c.re + r, c.im - r, c.im + r, n, n)
    }

    pub fn require_scan_size(&self) -> Result<()> {
        if self.nx < MIN_SCAN_NODES || self.ny < MIN_SCAN_NODES {
            return Err(Error::InsufficientGrid(alloc::format!(
                "{}x{} grid; at least {MIN_SCAN_NODES}x{MIN_SCAN_NODES} nodes are needed",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        (self.re1 - self.re0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.im1 - self.im0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.re0 + (i as f64 + 0.5) * self.hx(),
            self.im0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    pub fn node_at(&self, k: usize) -> C64 {
        let (i, j) = self.coords(k);
        self.node(i, j)
    }

    /// Corners `(lower-left, upper-right)` of cell `(i, j)`.
    pub fn cell(&self, i: usize, j: usize) -> (C64, C64) {
        let lo = C64::new(self.re0 + i as f64 * self.hx(), self.im0 + j as f64 * self.hy());
        (lo, lo + C64::new(self.hx(), self.hy()))
    }

    /// Cell containing `z`, if `z` lies in the rectangle.
    pub fn locate(&self, z: C64) -> Option<(usize, usize)> {
        let fx = (z.re - self.re0) / self.hx();
        let fy = (z.im - self.im0) / self.hy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    /// The grid with twice as many nodes along each axis.
    pub fn refined(&self) -> ScanGrid {
        ScanGrid {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
            ..*self
        }
    }
}

/// Provenance attached to a field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub kind: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

/// One real value per grid node plus a mask; masked nodes are excluded from
/// every reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanField {
    pub grid: ScanGrid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub meta: FieldMeta,
}

impl ScanField {
    pub fn new(grid: ScanGrid, values: Vec<f64>, mask: Vec<bool>, meta: FieldMeta) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(mask.len(), grid.len());
        ScanField {
            grid,
            values,
            mask,
            meta,
        }
    }

    /// Field of `f(lambda)` at every node; non-finite values are masked.
    pub fn from_fn(grid: ScanGrid, kind: &str, f: impl Fn(C64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        let mask = values.iter().map(|v| !v.is_finite()).collect();
        ScanField::new(
            grid,
            values,
            mask,
            FieldMeta {
                kind: kind.into(),
                ..FieldMeta::default()
            },
        )
    }

    pub fn constant(grid: ScanGrid, value: f64) -> Self {
        ScanField::new(grid, vec![value; grid.len()], vec![false; grid.len()], FieldMeta::default())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.grid.index(i, j);
        (!self.mask[k]).then_some(self.values[k])
    }

    /// Unmasked `(index, value)` pairs.
    pub fn valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, m))| !**m)
            .map(|(k, (v, _))| (k, *v))
    }

    pub fn valid_values(&self) -> Vec<f64> {
        self.valid().map(|(_, v)| v).collect()
    }

    /// Sum over unmasked nodes.
    pub fn total(&self) -> f64 {
        self.valid().map(|(_, v)| v).sum()
    }

    /// Sum of absolute values over unmasked nodes.
    pub fn total_abs(&self) -> f64 {
        self.valid().map(|(_, v)| v.abs()).sum()
    }

    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len() as f64
    }

    /// Pointwise sum; a node is masked if it is masked in either field.
    pub fn add(&self, other: &ScanField) -> ScanField {
        assert_eq!(self.grid, other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        ScanField::new(self.grid, values, mask, self.meta.clone())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScanField {
        ScanField::new(
            self.grid,
            self.values.iter().map(|v| f(*v)).collect(),
            self.mask.clone(),
            self.meta.clone(),
        )
    }

    pub fn with_kind(mut self, kind: &str) -> Self {
        self.meta.kind = kind.into();
        self
    }
}
