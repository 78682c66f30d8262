mod common;

use common::*;
use padmm::nalgebra::DMatrix;
use padmm::prox::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scad_prox_matches_grid(v in -4.0..4.0f64, lambda in 0.1..2.0f64, theta in 2.05..6.0f64, rho in 0.2..5.0f64) {
        let t = scad_prox(v, ScadParams::new(lambda, theta).unwrap(), rho);
        let (tg, og) = grid_prox(|s| scad_ref(s, lambda, theta), v, rho, 1e-4);
        let o = scad_ref(t, lambda, theta) + 0.5 * rho * (t - v).powi(2);
        prop_assert!(o <= og + 1e-9, "prox value {o} above grid value {og}");
        prop_assert!((t - tg).abs() <= 1e-3);
    }

    #[test]
    fn mcp_prox_matches_grid(v in -4.0..4.0f64, lambda in 0.1..2.0f64, theta in 1.05..6.0f64, rho in 0.2..5.0f64) {
        let t = mcp_prox(v, McpParams::new(lambda, theta).unwrap(), rho);
        let (tg, og) = grid_prox(|s| mcp_ref(s, lambda, theta), v, rho, 1e-4);
        let o = mcp_ref(t, lambda, theta) + 0.5 * rho * (t - v).powi(2);
        prop_assert!(o <= og + 1e-9);
        prop_assert!((t - tg).abs() <= 1e-3);
    }

    #[test]
    fn soft_threshold_matches_grid(v in -4.0..4.0f64, lambda in 0.0..2.0f64) {
        let t = soft_threshold(v, lambda);
        let (tg, _) = grid_prox(|s| lambda * s.abs(), v, 1.0, 1e-4);
        prop_assert!((t - tg).abs() <= 1e-4);
    }

    #[test]
    fn prox_shrinks_toward_zero_and_is_odd(v in -6.0..6.0f64, lambda in 0.1..2.0f64, rho in 0.2..5.0f64) {
        let sp = ScadParams::new(lambda, 3.7).unwrap();
        let mp = McpParams::new(lambda, 2.5).unwrap();
        for t in [scad_prox(v, sp, rho), mcp_prox(v, mp, rho), soft_threshold(v, lambda / rho)] {
            prop_assert!(t.abs() <= v.abs());
            prop_assert!(t == 0.0 || t.signum() == v.signum());
        }
        prop_assert_eq!(scad_prox(-v, sp, rho), -scad_prox(v, sp, rho));
        prop_assert_eq!(mcp_prox(-v, mp, rho), -mcp_prox(v, mp, rho));
    }

    #[test]
    fn scad_prox_is_monotone(a in -5.0..5.0f64, b in -5.0..5.0f64, rho in 0.5..4.0f64) {
        // Unique minimisers when ρ(θ−1) > 1; the map is then nondecreasing.
        let p = ScadParams::new(0.7, 3.7).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(scad_prox(lo, p, rho) <= scad_prox(hi, p, rho));
    }

    #[test]
    fn cardinality_projection(entries in proptest::collection::vec(-3.0..3.0f64, 12), s in 0usize..13) {
        let x = DMatrix::from_row_slice(3, 4, &entries);
        let p = project_cardinality(&x, s);
        let kept: Vec<f64> = p.iter().filter(|v| **v != 0.0).map(|v| v.abs()).collect();
        prop_assert!(kept.len() <= s);
        // Every kept entry is at least as large as every dropped one.
        let min_kept = kept.iter().cloned().fold(f64::INFINITY, f64::min);
        for (a, b) in x.iter().zip(p.iter()) {
            if *b == 0.0 && *a != 0.0 && kept.len() == s {
                prop_assert!(a.abs() <= min_kept);
            }
            prop_assert!(*b == 0.0 || a == b);
        }
        prop_assert_eq!(project_cardinality(&p, s), p);
    }

    #[test]
    fn rank_projection_is_optimal(entries in proptest::collection::vec(-2.0..2.0f64, 20), r in 0usize..5) {
        let x = DMatrix::from_row_slice(4, 5, &entries);
        let p = project_rank(&x, r).unwrap();
        prop_assert!(padmm::linalg::numerical_rank(&p) <= r);
        // Eckart–Young: the error is the energy in the trailing eigenvalues of XXᵀ.
        let mut ev: Vec<f64> = (&x * x.transpose()).symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let tail: f64 = ev.iter().skip(r).map(|v| v.max(0.0)).sum();
        let err = (&x - &p).norm_squared();
        prop_assert!((err - tail).abs() <= 1e-9 * (1.0 + tail));
        let again = project_rank(&p, r).unwrap();
        prop_assert!((&again - &p).norm() <= 1e-10 * (1.0 + p.norm()));
    }
}

#[test]
fn rank_bound_above_min_dimension_is_an_error() {
    assert!(project_rank(&DMatrix::zeros(3, 2), 3).is_err());
}

#[test]
fn penalties_match_reference() {
    for i in -400..=400 {
        let t = i as f64 * 0.01;
        assert!((scad_value(t, ScadParams::new(0.5, 3.7).unwrap()) - scad_ref(t, 0.5, 3.7)).abs() < 1e-14);
        assert!((mcp_value(t, McpParams::new(0.5, 3.7).unwrap()) - mcp_ref(t, 0.5, 3.7)).abs() < 1e-14);
    }
}
