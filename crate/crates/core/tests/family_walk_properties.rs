mod common;

use bifurclab_core::expr::Expr;
use bifurclab_core::family::{parse_family, Dual};
use bifurclab_core::linalg::Order;
use bifurclab_core::rng::{stream, stream_id};
use bifurclab_core::walk::sample_word;
use bifurclab_core::{CMatrix, Letter, Representation, StepMeasure, Word, C64};
use common::{c, diagonal_rotation, random_complex, riley, schottky};
use proptest::prelude::*;
use rand::Rng;

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (-4i32..=4, -4i32..=4).prop_map(|(a, b)| Expr::Const(C64::new(a as f64 / 2.0, b as f64 / 4.0))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0i32..=3).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            inner.prop_map(|a| Expr::Div(Box::new(a), Box::new(Expr::Const(C64::new(3.0, 1.0))))),
        ]
    })
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn expressions_survive_printing(e in expr_strategy(), seed in any::<u64>()) {
        let text = e.to_string();
        let back = Expr::parse(&text).unwrap();
        let mut r = stream(seed, stream_id(99, 1));
        for _ in 0..16 {
            let l = random_complex(&mut r) * 2.0;
            prop_assert!(close(e.eval(l), back.eval(l)), "{} at {}", text, l);
        }
    }

    #[test]
    fn double_dual_is_the_identity_on_words(seed in any::<u64>(), len in 0usize..8) {
        let f = schottky();
        let mut r = stream(seed, stream_id(99, 2));
        let w = Word::new((0..len).map(|_| Letter::from_signed(*[1, -1, 2, -2].get(r.random_range(0..4)).unwrap()).unwrap()).collect());
        let l = c(3.0, 0.0) + random_complex(&mut r);
        let once = f.word_product(&w, l, Order::Left).unwrap().to_matrix();
        let twice = Dual(Dual(&f)).word_product(&w, l, Order::Left).unwrap().to_matrix();
        prop_assert!(once.max_abs_diff(&twice) <= 1e-12 * (1.0 + once.max_abs()));
    }
}

#[test]
fn families_round_trip_through_their_spec() {
    let mut r = stream(3, stream_id(99, 3));
    for f in [schottky(), riley(), diagonal_rotation()] {
        let json = serde_json::to_string(&f.to_spec()).unwrap();
        let g = parse_family(&json).unwrap();
        assert_eq!(f.names(), g.names());
        for _ in 0..16 {
            let l = c(1.0, 0.5) + random_complex(&mut r);
            for name in f.names() {
                for inverse in [false, true] {
                    let a = f.evaluate(name, inverse, l).unwrap();
                    let b = g.evaluate(name, inverse, l).unwrap();
                    assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + a.max_abs()));
                }
            }
        }
    }
}

#[test]
fn inverses_are_inverses() {
    let mut r = stream(4, stream_id(99, 4));
    for f in [schottky(), riley(), diagonal_rotation()] {
        for _ in 0..16 {
            let l = c(1.5, -0.5) + random_complex(&mut r);
            for name in f.names() {
                let g = f.evaluate(name, false, l).unwrap();
                let gi = f.evaluate(name, true, l).unwrap();
                let id = CMatrix::identity(g.rows());
                assert!(gi.matmul(&g).max_abs_diff(&id) <= 1e-10);
            }
        }
    }
}

#[test]
fn biased_step_frequency() {
    let f = common::diagonal();
    let mu = common::biased(&f);
    let a = f.word("a").unwrap();
    let draws = 100_000;
    let hits = (0..draws).filter(|&s| sample_word(&mu, 1, s) == a).count();
    let freq = hits as f64 / draws as f64;
    assert!((freq - 0.75).abs() <= 0.005, "{freq}");
}

#[test]
fn uniform_atoms_pass_a_chi_square_test() {
    let mu = StepMeasure::uniform_symmetric(2).unwrap();
    let mut r = stream(5, stream_id(99, 5));
    let draws = 1_000_000;
    let mut counts = [0usize; 4];
    for i in mu.sample_increments(draws, &mut r) {
        counts[i] += 1;
    }
    let expected = draws as f64 / 4.0;
    let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 3 degrees of freedom
    assert!(chi2 < 11.345, "{chi2} from {counts:?}");
}
