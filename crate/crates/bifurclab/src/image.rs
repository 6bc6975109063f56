//! Heatmaps of grid fields and histograms.
//!
//! Pixel `(i, j)` of a grid is drawn at column `i` and row `ny - 1 - j`, so
//! the top row holds the largest imaginary part. The P6 encoding is the
//! reference output; PNG is a lossless re-encoding of the same pixels.

use bifurclab_core::measures::Histogram;
use bifurclab_core::{ScanField, ScanGrid};

/// How values are mapped to `[0, 1]` before colouring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// `(x - min) / (max - min)` over unmasked nodes.
    Linear,
    /// `log(1 + x / x90) / log(1 + max / x90)` with `x90` the 90th percentile
    /// of the unmasked values; negative values are drawn as 0.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Gray,
    /// Black, red, yellow, white.
    Heat,
}

/// Colour of masked nodes.
pub const MASK_COLOR: [u8; 3] = [0, 0, 96];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, top row first.
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let k = 3 * (y * self.width + x);
        [self.rgb[k], self.rgb[k + 1], self.rgb[k + 2]]
    }

    fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        let k = 3 * (y * self.width + x);
        self.rgb[k..k + 3].copy_from_slice(&c);
    }

    /// Binary PPM (P6) with maximum value 255.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    /// 8-bit RGB PNG without ancillary chunks, so the bytes depend only on
    /// the pixels.
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().expect("writing to memory");
            w.write_image_data(&self.rgb).expect("pixel buffer matches the header");
            w.finish().expect("writing to memory");
        }
        out
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Normalised intensities in `[0, 1]`, `None` for masked nodes.
fn normalize(values: &[f64], mask: &[bool], scale: Scale) -> Vec<Option<f64>> {
    let mut valid: Vec<f64> = values.iter().zip(mask).filter(|(_, m)| !**m).map(|(v, _)| *v).collect();
    valid.sort_by(f64::total_cmp);
    let map: Box<dyn Fn(f64) -> f64> = match (scale, valid.first(), valid.last()) {
        (_, None, _) | (_, _, None) => Box::new(|_| 0.0),
        (Scale::Linear, Some(&lo), Some(&hi)) => {
            if hi > lo {
                Box::new(move |x| (x - lo) / (hi - lo))
            } else {
                Box::new(|_| 0.0)
            }
        }
        (Scale::Log, _, Some(&hi)) => {
            let p90 = percentile(&valid, 0.9);
            let x90 = if p90 > 0.0 { p90 } else { hi };
            if hi > 0.0 {
                let top = (hi / x90).ln_1p();
                Box::new(move |x| (x.max(0.0) / x90).ln_1p() / top)
            } else {
                Box::new(|_| 0.0)
            }
        }
    };
    values
        .iter()
        .zip(mask)
        .map(|(v, m)| (!*m).then(|| map(*v).clamp(0.0, 1.0)))
        .collect()
}

fn colour(t: f64, cmap: Colormap) -> [u8; 3] {
    let q = |x: f64| (255.0 * x.clamp(0.0, 1.0)).round() as u8;
    match cmap {
        Colormap::Gray => [q(t); 3],
        Colormap::Heat => [q(3.0 * t), q(3.0 * t - 1.0), q(3.0 * t - 2.0)],
    }
}

fn render(grid: &ScanGrid, values: &[f64], mask: &[bool], cmap: Colormap, scale: Scale) -> Image {
    let mut img = Image {
        width: grid.nx,
        height: grid.ny,
        rgb: vec![0; 3 * grid.len()],
    };
    for (k, t) in normalize(values, mask, scale).into_iter().enumerate() {
        let (i, j) = grid.coords(k);
        img.set(i, grid.ny - 1 - j, t.map_or(MASK_COLOR, |t| colour(t, cmap)));
    }
    img
}

pub fn render_field(field: &ScanField, cmap: Colormap, scale: Scale) -> Image {
    render(&field.grid, &field.values, &field.mask, cmap, scale)
}

pub fn render_histogram(h: &Histogram, cmap: Colormap, scale: Scale) -> Image {
    let values: Vec<f64> = h.counts.iter().map(|c| *c as f64).collect();
    render(&h.grid, &values, &vec![false; values.len()], cmap, scale)
}

/// Paints the nodes of `marks` in `color`.
pub fn overlay(img: &mut Image, grid: &ScanGrid, marks: &[bool], color: [u8; 3]) {
    for (k, _) in marks.iter().enumerate().filter(|(_, m)| **m) {
        let (i, j) = grid.coords(k);
        img.set(i, grid.ny - 1 - j, color);
    }
}
