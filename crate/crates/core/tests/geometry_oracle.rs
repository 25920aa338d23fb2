//! Consistency properties of the conformal factor Ω on the plus and minus
//! surfaces.

use hitchin_core::asymptotics::constant_c;
use hitchin_core::geometry::{omega_at, omega_minus_k_chart, scan_spec, Surface};
use hitchin_core::grid::GridSpec;
use hitchin_core::C64;

#[test]
fn omega_is_insensitive_to_the_displacement() {
    let spec = GridSpec::new(10.0, 257).unwrap();
    for k in [C64::new(3.0, 0.0), C64::new(0.5, 1.0)] {
        let full = omega_at(0.0, k, Surface::Plus, 0.02, Some(spec)).unwrap();
        let half = omega_at(0.0, k, Surface::Plus, 0.01, Some(spec)).unwrap();
        let rel = (full.omega - half.omega).abs() / half.omega;
        assert!(rel <= 1e-2, "K = {k}: {} vs {}", full.omega, half.omega);
    }
}

#[test]
fn omega_approaches_the_flat_cone_monotonically() {
    let spec = GridSpec::new(10.0, 513).unwrap();
    let c = constant_c();
    let gaps: Vec<f64> = [2.0, 2.5, 3.0, 3.5, 4.0]
        .iter()
        .map(|&r: &f64| {
            let s = omega_at(0.0, C64::new(r, 0.0), Surface::Plus, 0.02, Some(spec)).unwrap();
            (1.0 - s.omega * r.cbrt() / c).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 5e-3);
}

#[test]
fn minus_sheet_charts_are_covariant() {
    let a = 1.0;
    for w in [C64::new(0.8, 0.3), C64::new(-0.2, 1.1)] {
        let spec = scan_spec(a, Surface::Minus, &[w], 0.02, 257).unwrap();
        let in_w = omega_at(a, w, Surface::Minus, 0.02, Some(spec)).unwrap();
        let in_k = omega_minus_k_chart(a, w, 0.02, &spec).unwrap();
        let jac = Surface::Minus.dk_dcoord(a, w).norm_sqr();
        let rel = (in_w.omega - in_k.omega * jac).abs() / in_w.omega;
        assert!(rel <= 1e-2, "W = {w}: {} vs {}", in_w.omega, in_k.omega * jac);
    }
}

#[test]
fn holomorphy_residual_shrinks_under_refinement() {
    let k = C64::new(1.0, 0.5);
    let coarse = omega_at(3.0, k, Surface::Plus, 0.02, Some(scan_spec(3.0, Surface::Plus, &[k], 0.02, 129).unwrap()))
        .unwrap();
    let fine = omega_at(3.0, k, Surface::Plus, 0.02, Some(scan_spec(3.0, Surface::Plus, &[k], 0.02, 257).unwrap()))
        .unwrap();
    assert!(fine.resid_holo < coarse.resid_holo, "{} vs {}", fine.resid_holo, coarse.resid_holo);
    assert!(fine.resid_gauge <= 1e-6 && coarse.resid_gauge <= 1e-6);
}
