//! Plain-text tables.
//!
//! Every floating-point number is written as `{:.16e}`: 17 significant
//! digits, which round-trips any `f64` exactly.

use std::fmt::Write;

use bifurclab_core::divisor::DivisorPoint;
use bifurclab_core::grid::FieldMeta;
use bifurclab_core::linalg::ProjPoint;
use bifurclab_core::volume::GrowthRow;
use bifurclab_core::{Error, ScanField, ScanGrid};

pub const FIELD_HEADER: &str = "re,im,value,mask";
pub const DIVISOR_HEADER: &str = "re,im,mult,word_id";
pub const GROWTH_HEADER: &str = "n,mean_volume,stderr,mean_mass";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `re,im,value,mask`, then one row per node in index order (`re`
/// fastest). Masked nodes have an empty value and `mask = 1`.
pub fn encode_field_csv(field: &ScanField) -> String {
    let mut out = String::with_capacity(64 * (field.values.len() + 1));
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (k, (v, m)) in field.values.iter().zip(&field.mask).enumerate() {
        let z = field.grid.node_at(k);
        let value = if *m { String::new() } else { num(*v) };
        writeln!(out, "{},{},{},{}", num(z.re), num(z.im), value, u8::from(*m)).expect("writing to a String");
    }
    out
}

/// Reads a table written by [`encode_field_csv`] for `grid`, checking that
/// the node coordinates match.
pub fn decode_field_csv(text: &str, grid: &ScanGrid) -> Result<ScanField, Error> {
    let bad = |line: usize, what: &str| Error::Config(format!("field csv line {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(FIELD_HEADER) {
        return Err(bad(1, "expected header `re,im,value,mask`"));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let at = k + 2;
        if k >= grid.len() {
            return Err(bad(at, "more rows than grid nodes"));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(bad(at, "expected 4 columns"));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| bad(at, &format!("`{s}` is not a number")));
        let z = grid.node_at(k);
        if parse(cols[0])? != z.re || parse(cols[1])? != z.im {
            return Err(bad(at, "node coordinates do not match the grid"));
        }
        match cols[3] {
            "0" => {
                values.push(parse(cols[2])?);
                mask.push(false);
            }
            "1" if cols[2].is_empty() => {
                values.push(f64::NAN);
                mask.push(true);
            }
            _ => return Err(bad(at, "mask must be 0, or 1 with an empty value")),
        }
    }
    if values.len() != grid.len() {
        return Err(bad(values.len() + 2, "fewer rows than grid nodes"));
    }
    Ok(ScanField::new(*grid, values, mask, FieldMeta::default()))
}

/// Header `re,im,mult,word_id`; one row per cell holding zeros of one word.
pub fn encode_divisor_csv(points: &[DivisorPoint]) -> String {
    let mut out = String::from(DIVISOR_HEADER);
    out.push('\n');
    for p in points {
        writeln!(out, "{},{},{},{}", num(p.at[0]), num(p.at[1]), p.multiplicity, p.word_id).expect("writing to a String");
    }
    out
}

/// Unit representatives of projective points, header
/// `x0_re,x0_im,x1_re,x1_im,...`.
pub fn encode_cloud_csv(points: &[ProjPoint], dim: usize) -> String {
    let header: Vec<String> = (0..dim).flat_map(|i| [format!("x{i}_re"), format!("x{i}_im")]).collect();
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.unit_lift().iter().flat_map(|z| [num(z.re), num(z.im)]).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Header `n,mean_volume,stderr,mean_mass`.
pub fn encode_growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from(GROWTH_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, num(r.mean_volume), num(r.stderr), num(r.mean_mass)).expect("writing to a String");
    }
    out
}
