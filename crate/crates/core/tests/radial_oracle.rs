//! Radial solutions checked against values from an independent scipy
//! implementation (banded Newton, same discretization, scipy Simpson).

use hitchin_core::radial::{flux, scan_b, solve_radial};
use proptest::prelude::*;
use std::f64::consts::PI;

const REFERENCE_SCAN: [(f64, f64); 6] = [
    (0.0, 0.9999970010022866),
    (0.5, 0.7458041231648809),
    (1.0, 0.35087796260670984),
    (2.0, 0.0585248805962754),
    (5.0, 0.0018526910237199321),
    (10.0, 0.00011682590226079229),
];

#[test]
fn n1_flux_matches_reference() {
    let p = solve_radial(1, 0.0, 20.0, 2001).unwrap();
    let ratio = flux(&p).unwrap() / (PI / 2.0);
    assert!((ratio - 0.9999933846173541).abs() < 1e-9, "{ratio}");
}

#[test]
fn b_scan_matches_reference() {
    let b: Vec<f64> = (0..=20).map(|k| 0.5 * k as f64).collect();
    let scan = scan_b(&b, 20.0, 2001, true).unwrap();
    for (bref, fref) in REFERENCE_SCAN {
        let pt = scan.iter().find(|p| p.b == bref).unwrap();
        let rel = (pt.flux_over_pi - fref).abs() / fref;
        assert!(rel < 1e-6, "B = {bref}: {} vs {fref}", pt.flux_over_pi);
    }
    assert!(scan.windows(2).all(|w| w[1].flux_over_pi < w[0].flux_over_pi));
}

#[test]
fn parallel_scan_agrees_with_continuation() {
    let b = [0.0, 1.0, 3.0];
    let seq = scan_b(&b, 20.0, 1001, true).unwrap();
    let par = scan_b(&b, 20.0, 1001, false).unwrap();
    for (s, p) in seq.iter().zip(&par) {
        assert!((s.flux_over_pi - p.flux_over_pi).abs() < 1e-10);
    }
}

#[test]
fn grid_refinement_is_second_order() {
    // 1000, 2000 and 4000 intervals on [0, 20]
    let f: Vec<f64> = [1001, 2001, 4001]
        .iter()
        .map(|&n| flux(&solve_radial(1, 0.0, 20.0, n).unwrap()).unwrap())
        .collect();
    assert!((f[0] - f[1]).abs() / f[1] <= 2e-3);
    let order = ((f[0] - f[1]) / (f[1] - f[2])).log2();
    assert!((order - 2.0).abs() < 0.3, "observed order {order}");
}

#[test]
fn domain_truncation_is_negligible() {
    // same spacing h = 0.01
    for (n, b) in [(1, 0.0), (2, 0.0), (2, 1.0)] {
        let f15 = flux(&solve_radial(n, b, 15.0, 1501).unwrap()).unwrap();
        let f25 = flux(&solve_radial(n, b, 25.0, 2501).unwrap()).unwrap();
        assert!((f15 - f25).abs() / f25 <= 1e-3, "n = {n}, B = {b}: {f15} vs {f25}");
    }
}

// Once the true deviation (decaying like exp(-c r^{3/2}) or faster) drops
// below the O(h²) truncation error of the discrete log, only noise remains.
const TRUNCATION_FLOOR: f64 = 1e-8;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flux_decreases_in_b(b1 in 0.0f64..8.0, gap in 0.2f64..4.0) {
        let b2 = b1 + gap;
        let f1 = flux(&solve_radial(2, b1, 20.0, 1000).unwrap()).unwrap();
        let f2 = flux(&solve_radial(2, b2, 20.0, 1000).unwrap()).unwrap();
        prop_assert!(f2 < f1);
    }

    #[test]
    fn psi_approaches_boundary_behaviour_monotonically(b in 0.0f64..6.0) {
        let p = solve_radial(2, b, 20.0, 1000).unwrap();
        let dev: Vec<f64> = p
            .r
            .iter()
            .zip(&p.psi)
            .filter(|(r, _)| **r > 3.0)
            .map(|(r, psi)| (psi + 2.0 * r.ln()).abs())
            .collect();
        prop_assert!(dev.windows(2).all(|w| w[1] <= w[0] + TRUNCATION_FLOOR));
        prop_assert!(*dev.last().unwrap() < 1e-12);
    }

    #[test]
    fn n1_psi_approaches_boundary_behaviour(r_max in 10.0f64..25.0) {
        let p = solve_radial(1, 0.0, r_max, 1000).unwrap();
        let dev: Vec<f64> = p
            .r
            .iter()
            .zip(&p.psi)
            .filter(|(r, _)| **r > 3.0)
            .map(|(r, psi)| (psi + r.ln()).abs())
            .collect();
        prop_assert!(dev.windows(2).all(|w| w[1] <= w[0] + TRUNCATION_FLOOR));
    }
}
