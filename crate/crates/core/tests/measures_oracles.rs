mod common;

use bifurclab_core::linalg::{fubini_study_distance, ProjPoint};
use bifurclab_core::lyapunov::{chi_spectrum_qr, WalkParams};
use bifurclab_core::measures::{
    furstenberg_check, limit_set_render, properness_profile, stationarity_check, stationary_sample,
    stationary_sample_from, two_starts_check, Chart, ChainParams, PointCloud,
};
use bifurclab_core::{CMatrix, Serial, StepMeasure, C64};
use common::*;

/// Ping-pong discs of the Schottky pair at `l = 3`, in the coordinate
/// `z = x_0 / x_1`: images of `a`, `A`, `b`, `B` in that order.
fn ping_pong_disc(x: &[C64]) -> Option<usize> {
    let slack = 1e-9;
    if x[1].norm() <= x[0].norm() / 3.0 * (1.0 + slack) {
        return Some(0);
    }
    let z = x[0] / x[1];
    [(c(0.0, 0.0), 1.0 / 3.0), (c(1.25, 0.0), 0.75), (c(-1.25, 0.0), 0.75)]
        .iter()
        .position(|(centre, r)| (z - centre).norm() <= r + slack)
        .map(|k| k + 1)
}

fn schottky_cloud(count: usize) -> PointCloud {
    let f = schottky();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let p = ChainParams::new(1000, count, 8, 4, 51).unwrap();
    stationary_sample(&f, c(3.0, 0.0), &mu, &p, false, &Serial).unwrap()
}

fn generators_at_three() -> [CMatrix; 4] {
    let f = schottky();
    let l = c(3.0, 0.0);
    [
        f.evaluate("a", false, l).unwrap(),
        f.evaluate("a", true, l).unwrap(),
        f.evaluate("b", false, l).unwrap(),
        f.evaluate("b", true, l).unwrap(),
    ]
}

#[test]
fn schottky_cloud_stays_in_the_ping_pong_discs() {
    let cloud = schottky_cloud(4000);
    assert_eq!(cloud.len(), 4000);
    let mut mass = [0usize; 4];
    for p in &cloud.points {
        let k = ping_pong_disc(p.coords()).unwrap_or_else(|| panic!("{:?} outside the discs", p.coords()));
        mass[k] += 1;
    }
    // the four pieces are exchanged by the symmetric walk and carry equal mass
    for m in mass {
        let share = m as f64 / cloud.len() as f64;
        assert!((share - 0.25).abs() < 0.05, "{mass:?}");
    }
}

#[test]
fn schottky_limit_set_is_minimally_invariant() {
    let cloud = schottky_cloud(2000);
    let gens = generators_at_three();
    let inverse = [1, 0, 3, 2];
    // g maps L outside the disc of g^-1 into the disc of g, so the pieces
    // g (L \ D_g^-1) are disjoint and, as every point is in some disc, cover L
    for (k, g) in gens.iter().enumerate() {
        for p in &cloud.points {
            if ping_pong_disc(p.coords()) != Some(inverse[k]) {
                assert_eq!(ping_pong_disc(&g.apply(p.coords())), Some(k));
            }
        }
    }
    // g^-1 of a point in the disc of g lands back near the cloud
    let nearest = |x: &ProjPoint| {
        cloud
            .points
            .iter()
            .map(|q| fubini_study_distance(x, q))
            .fold(f64::INFINITY, f64::min)
    };
    let mut pulled: Vec<f64> = cloud
        .points
        .iter()
        .map(|p| {
            let k = ping_pong_disc(p.coords()).unwrap();
            nearest(&ProjPoint::new(&gens[inverse[k]].apply(p.coords())).unwrap())
        })
        .collect();
    pulled.sort_by(f64::total_cmp);
    let median = pulled[pulled.len() / 2];
    assert!(median < 0.01, "median distance {median}");
}

#[test]
fn rendered_pixels_lie_over_the_discs() {
    let cloud = schottky_cloud(4000);
    let h = limit_set_render(&cloud, Chart::Affine(1), 64, Some([-4.0, 4.0, -4.0, 4.0])).unwrap();
    let reach = h.grid.hx().hypot(h.grid.hy());
    let discs = [(c(0.0, 0.0), 1.0 / 3.0), (c(1.25, 0.0), 0.75), (c(-1.25, 0.0), 0.75)];
    let mut lit = 0;
    for (k, count) in h.counts.iter().enumerate() {
        if *count == 0 {
            continue;
        }
        lit += 1;
        let z = h.grid.node_at(k);
        let near = z.norm() >= 3.0 - reach || discs.iter().any(|(centre, r)| (z - centre).norm() <= r + reach);
        assert!(near, "pixel at {z}");
    }
    assert!(lit > 10);
    let inside: u64 = h.counts.iter().sum();
    assert_eq!(inside as usize + h.outside, cloud.len());
}

#[test]
fn schottky_cloud_is_stationary_and_proper() {
    let f = schottky();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let cloud = schottky_cloud(8000);
    let r = stationarity_check(&f, &mu, &cloud).unwrap();
    assert!(r.passed, "{r:?}");
    let profile = properness_profile(&cloud, &[0.1, 0.03, 0.01, 0.003], 16, 52).unwrap();
    assert!(profile.decreasing, "{profile:?}");
    assert!(profile.fractions[3] < 0.05);
    let p = ChainParams::new(1000, 8000, 8, 4, 53).unwrap();
    let start = ProjPoint::new(&[c(0.3, 0.2), c(1.0, 0.0)]).unwrap();
    let other = stationary_sample_from(&f, c(3.0, 0.0), &mu, &p, &start, &Serial).unwrap();
    let r = two_starts_check(&cloud, &other).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn furstenberg_integral_on_the_biased_walk() {
    let f = diagonal();
    let mu = biased(&f);
    let l = c(2.0, 0.0);
    let p = ChainParams::new(1000, 2000, 8, 2, 54).unwrap();
    let cloud = stationary_sample(&f, l, &mu, &p, false, &Serial).unwrap();
    // a fixes e_1, so the chain never leaves it
    assert!(cloud.points.iter().all(|q| fubini_study_distance(q, &ProjPoint::basis(2, 0)) == 0.0));
    let spectrum = chi_spectrum_qr(&f, l, &mu, &WalkParams::new(500, 100, 55).unwrap(), 2, &Serial).unwrap();
    let r = furstenberg_check(&f, &mu, &cloud, &spectrum.exponents[0]).unwrap();
    assert!((r.estimate - 0.5 * 2f64.ln()).abs() < 1e-12, "{r:?}");
    assert!(r.within_tolerance, "{r:?}");
    assert!(stationarity_check(&f, &mu, &cloud).unwrap().passed);
}

#[test]
fn furstenberg_integral_on_the_schottky_walk() {
    let f = schottky();
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    for (re, im) in [(3.0, 0.0), (3.0, 1.0)] {
        let l = c(re, im);
        let p = ChainParams::new(1000, 8000, 8, 4, 56).unwrap();
        let cloud = stationary_sample(&f, l, &mu, &p, false, &Serial).unwrap();
        let spectrum = chi_spectrum_qr(&f, l, &mu, &WalkParams::new(400, 64, 57).unwrap(), 2, &Serial).unwrap();
        let r = furstenberg_check(&f, &mu, &cloud, &spectrum.exponents[0]).unwrap();
        assert!(r.within_tolerance, "{r:?}");
        // the dual cloud reproduces chi_1^* = chi_1 for SL(2)
        let dual = stationary_sample(&f, l, &mu, &p, true, &Serial).unwrap();
        let r = furstenberg_check(&f, &mu, &dual, &spectrum.exponents[0]).unwrap();
        assert!(r.within_tolerance, "dual: {r:?}");
    }
}
