mod common;

use bifurclab_core::divisor::{cell_counts, trace_divisor_measure, trace_zero_count, INITIAL_SAMPLES};
use bifurclab_core::linalg::{Order, ProjPoint};
use bifurclab_core::volume::{graph_volume, mean_graph_volume};
use bifurclab_core::family::parse_family;
use bifurclab_core::{ScanGrid, Serial, StepMeasure, Word, C64};
use common::*;

/// Roots of `l^k + l^-k = t`: `l^k = u` with `u + 1/u = t`.
fn power_trace_roots(k: u32, t: C64) -> Vec<C64> {
    let s = (t * t - 4.0).sqrt();
    let mut out = Vec::new();
    for u in [(t + s) * 0.5, (t - s) * 0.5] {
        let (r, th) = u.to_polar();
        for j in 0..k {
            let arg = (th + std::f64::consts::TAU * j as f64) / k as f64;
            out.push(C64::from_polar(r.powf(1.0 / k as f64), arg));
        }
    }
    out
}

fn distance_to_edges(grid: &ScanGrid, z: C64) -> f64 {
    let fx = (z.re - grid.re0) / grid.hx();
    let fy = (z.im - grid.im0) / grid.hy();
    let dx = (fx - fx.round()).abs() * grid.hx();
    let dy = (fy - fy.round()).abs() * grid.hy();
    dx.min(dy)
}

#[test]
fn power_word_zeros_land_in_their_cells() {
    let f = diagonal();
    let grid = ScanGrid::square(c(0.0, 0.0), 1.5, 9).unwrap();
    for (k, t) in [(1, c(0.7, 0.4)), (2, c(-1.3, 0.9)), (3, c(2.9, -0.6))] {
        let word = f.word(&vec!["a"; k as usize].join(" ")).unwrap();
        let roots = power_trace_roots(k, t);
        assert!(roots.iter().all(|z| distance_to_edges(&grid, *z) > 1e-3));
        let mut expected = vec![0i64; grid.len()];
        for z in &roots {
            if let Some((i, j)) = grid.locate(*z) {
                expected[grid.index(i, j)] += 1;
            }
        }
        // l^-k contributes a pole of order k at the centre cell
        expected[grid.index(4, 4)] -= k as i64;
        let counts = cell_counts(&f, &word, t, &grid, 4, &Serial);
        let got: Vec<i64> = counts.iter().map(|c| c.unwrap()).collect();
        assert_eq!(got, expected, "k = {k}");
    }
}

type Poly = Vec<C64>;

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len().max(b.len())];
    for (k, v) in a.iter().enumerate() {
        out[k] += v;
    }
    for (k, v) in b.iter().enumerate() {
        out[k] += v;
    }
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

type PolyMatrix = [[Poly; 2]; 2];

fn riley_letter(ch: char) -> PolyMatrix {
    let k = |v: f64| vec![c(v, 0.0)];
    match ch {
        'a' => [[k(1.0), k(2.0)], [k(0.0), k(1.0)]],
        'A' => [[k(1.0), k(-2.0)], [k(0.0), k(1.0)]],
        'b' => [[k(1.0), k(0.0)], [vec![c(0.0, 0.0), c(1.0, 0.0)], k(1.0)]],
        'B' => [[k(1.0), k(0.0)], [vec![c(0.0, 0.0), c(-1.0, 0.0)], k(1.0)]],
        _ => unreachable!(),
    }
}

/// `tr rho_l(w)` of a Riley word as a polynomial in `l`, by multiplying
/// polynomial matrices.
fn riley_trace_polynomial(word: &str) -> Poly {
    let one = || vec![c(1.0, 0.0)];
    let zero = || vec![c(0.0, 0.0)];
    let mut m: PolyMatrix = [[one(), zero()], [zero(), one()]];
    for ch in word.split_whitespace().map(|s| s.chars().next().unwrap()) {
        let g = riley_letter(ch);
        let mut next: PolyMatrix = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = poly_add(&poly_mul(&m[i][0], &g[0][j]), &poly_mul(&m[i][1], &g[1][j]));
            }
        }
        m = next;
    }
    let mut p = poly_add(&m[0][0], &m[1][1]);
    while p.len() > 1 && p.last().unwrap().norm() < 1e-12 {
        p.pop();
    }
    p
}

/// All roots of a polynomial by Durand-Kerner iteration.
fn durand_kerner(p: &Poly) -> Vec<C64> {
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<C64> = p.iter().map(|v| v / lead).collect();
    let eval = |z: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, v| acc * z + v);
    let mut roots: Vec<C64> = (0..n).map(|k| C64::new(0.4, 0.9).powu(k as u32)).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(C64::new(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
            break;
        }
    }
    roots
}

#[test]
fn riley_word_counts_match_polynomial_roots() {
    let f = riley();
    let grid = ScanGrid::square(c(0.0, 0.0), 3.0, 12).unwrap();
    let t = c(0.3, 0.1);
    for text in ["a b", "a b a B", "a b b A b a B", "a a b A B B a b"] {
        let word = f.word(text).unwrap();
        let mut poly = riley_trace_polynomial(text);
        poly[0] -= t;
        let roots = durand_kerner(&poly);
        assert!(roots.iter().all(|z| distance_to_edges(&grid, *z) > 1e-4), "{text}: {roots:?}");
        let inside = roots.iter().filter(|z| z.re.abs() < 3.0 && z.im.abs() < 3.0).count() as i64;
        let counts = cell_counts(&f, &word, t, &grid, 4, &Serial);
        let total: i64 = counts.iter().map(|c| c.unwrap()).sum();
        assert_eq!(total, inside, "{text}");
        let whole = trace_zero_count(&f, &word, t, c(-3.0, -3.0), c(3.0, 3.0), INITIAL_SAMPLES).unwrap();
        assert_eq!(whole, inside, "{text}");
        // each root sits in the cell the oracle puts it in
        for z in roots.iter().filter(|z| z.re.abs() < 3.0 && z.im.abs() < 3.0) {
            let (i, j) = grid.locate(*z).unwrap();
            assert!(counts[grid.index(i, j)].unwrap() >= 1);
        }
    }
}

#[test]
fn counts_add_up_under_subdivision() {
    let f = riley();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let grid = ScanGrid::new(-2.1, 2.3, -1.9, 2.2, 10, 10).unwrap();
    let fine = grid.refined();
    for w in 0..4 {
        let word = bifurclab_core::divisor::divisor_word(&mu, 8, 41, w);
        let coarse = cell_counts(&f, &word, c(2.0, 0.0), &grid, 4, &Serial);
        let refined = cell_counts(&f, &word, c(2.0, 0.0), &fine, 4, &Serial);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let parent = coarse[grid.index(i, j)].unwrap();
                let children: i64 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|(di, dj)| refined[fine.index(2 * i + di, 2 * j + dj)].unwrap())
                    .sum();
                assert_eq!(parent, children, "word {w}, cell ({i}, {j})");
            }
        }
    }
}

#[test]
fn conjugated_family_has_no_trace_zeros() {
    let f = conjugation();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let grid = ScanGrid::square(c(0.0, 0.0), 1.0, 8).unwrap();
    let d = trace_divisor_measure(&f, &mu, c(2.0, 0.0), &grid, 6, 8, 42, false, &Serial).unwrap();
    assert!(d.cloud.is_empty());
    assert_eq!(d.failed_cells, 0);
    assert!(d.density.total_abs() == 0.0);
}

#[test]
fn asymmetric_measures_need_an_override() {
    let f = diagonal();
    let mu = biased(&f);
    let grid = ScanGrid::square(c(0.0, 0.0), 1.5, 9).unwrap();
    assert!(trace_divisor_measure(&f, &mu, c(2.5, 0.0), &grid, 3, 2, 1, false, &Serial).is_err());
    assert!(trace_divisor_measure(&f, &mu, c(2.5, 0.0), &grid, 3, 2, 1, true, &Serial).is_ok());
}

/// `a = [[1, l - 0.2], [0, 1]]`, so `a e_2 = (l - 0.2, 1)` traces out a line.
fn shear() -> bifurclab_core::RepFamily {
    parse_family(r#"{"dimension":2,"generators":{"a":[["1","l-0.2"],["0","1"]]}}"#).unwrap()
}

/// `int 1 / (pi (1 + |z|^2)^2)` over a rectangle, by a fine midpoint rule.
fn fubini_study_mass(re0: f64, re1: f64, im0: f64, im1: f64) -> f64 {
    let n = 800;
    let (hx, hy) = ((re1 - re0) / n as f64, (im1 - im0) / n as f64);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = re0 + (i as f64 + 0.5) * hx;
            let y = im0 + (j as f64 + 0.5) * hy;
            total += 1.0 / (std::f64::consts::PI * (1.0 + x * x + y * y).powi(2));
        }
    }
    total * hx * hy
}

#[test]
fn linear_graph_volume_matches_quadrature() {
    let f = shear();
    let a = f.word("a").unwrap();
    let v0 = ProjPoint::basis(2, 1);
    let mass = |n: usize| {
        let grid = ScanGrid::square(c(0.0, 0.0), 1.0, n).unwrap();
        let rec = graph_volume(&f, &a, &v0, &grid, Order::Left, &Serial).unwrap();
        // interior nodes own the cells strictly inside the outer ring
        let (h, s) = (grid.hx(), 0.2);
        let oracle = fubini_study_mass(-1.0 + h - s, 1.0 - h - s, -1.0 + h, 1.0 - h);
        assert!((rec.vol_u - (2.0 - 2.0 * h).powi(2)).abs() < 1e-12);
        assert!((rec.mass - oracle).abs() <= 0.02 * oracle, "{n}: {} vs {oracle}", rec.mass);
        rec.total
    };
    let (coarse, fine) = (mass(64), mass(128));
    assert!((coarse - fine).abs() <= 0.05 * fine);
}

#[test]
fn empty_prefix_has_the_base_volume() {
    let f = schottky();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let grid = ScanGrid::square(c(3.5, 0.0), 0.5, 16).unwrap();
    let r = mean_graph_volume(&f, &mu, &ProjPoint::basis(2, 0), &grid, &[0, 4, 8], 4, 43, false, &Serial).unwrap();
    assert_eq!(r.rows[0].n, 0);
    assert!((r.rows[0].mean_volume - r.vol_u).abs() < 1e-12);
    assert!(r.rows[0].mean_mass.abs() < 1e-12);
    assert!(r.rows.windows(2).all(|w| w[1].mean_volume >= w[0].mean_volume - 1e-9));
    let word = Word::identity();
    let rec = graph_volume(&f, &word, &ProjPoint::basis(2, 0), &grid, Order::Left, &Serial).unwrap();
    assert!((rec.total - r.vol_u).abs() < 1e-12);
}
