//! 2D solves checked against symmetry, flux and convergence-order oracles.

use hitchin_core::elliptic::{solve_psi, Field2D};
use hitchin_core::grid::GridSpec;
use hitchin_core::model::{factorize, Sheet};
use hitchin_core::poly::Cubic;
use hitchin_core::radial::solve_radial;
use hitchin_core::C64;
use std::f64::consts::PI;

fn field(a: f64, k: C64, sheet: Sheet, half_width: f64, points: usize) -> Field2D {
    let fac = factorize(&Cubic::new(a, k).unwrap(), sheet).unwrap();
    solve_psi(&fac, &GridSpec::new(half_width, points).unwrap(), None).unwrap()
}

/// Richardson extrapolation of ψ from grids N and 2N − 1 at the coarse nodes.
fn richardson(coarse: &Field2D, fine: &Field2D) -> Vec<f64> {
    let n = coarse.spec.points();
    (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (4.0 * fine.psi_at(2 * i, 2 * j) - coarse.psi_at(i, j)) / 3.0
        })
        .collect()
}

fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn bicubic(values: &[f64], spec: &GridSpec, z: C64) -> f64 {
    let (h, l, n) = (spec.spacing(), spec.half_width(), spec.points());
    let (x, y) = ((z.re + l) / h, (z.im + l) / h);
    let (i, j) = (x.floor() as usize, y.floor() as usize);
    let (wx, wy) = (lagrange4(x - i as f64), lagrange4(y - j as f64));
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            s += wx[a] * wy[b] * values[(i + a - 1) * n + j + b - 1];
        }
    }
    s
}

/// Max |ψ(z) − ψ(e^{2πi/3} z)| over nodes with |z| < 3, after removing the
/// O(h²) error by Richardson extrapolation.
fn z3_deviation(a: f64, sheet: Sheet) -> f64 {
    let coarse = field(a, C64::new(0.0, 0.0), sheet, 6.0, 513);
    let fine = field(a, C64::new(0.0, 0.0), sheet, 6.0, 1025);
    let psi = richardson(&coarse, &fine);
    let spec = coarse.spec;
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut dev: f64 = 0.0;
    for (k, z) in spec.points_iter().enumerate() {
        if z.norm() < 3.0 {
            dev = dev.max((psi[k] - bicubic(&psi, &spec, w * z)).abs());
        }
    }
    dev
}

#[test]
fn pure_cube_is_rotationally_symmetric() {
    let dev = z3_deviation(0.0, Sheet::Plus);
    assert!(dev <= 1e-6, "{dev}");
}

#[test]
fn minus_sheet_at_origin_is_rotationally_symmetric() {
    let dev = z3_deviation(0.0, Sheet::Minus(C64::new(0.0, 0.0)));
    assert!(dev <= 1e-6, "{dev}");
}

#[test]
fn square_symmetries_hold_exactly_for_pure_cube() {
    let f = field(0.0, C64::new(0.0, 0.0), Sheet::Plus, 6.0, 129);
    let n = f.spec.points();
    for i in 0..n {
        for j in 0..n {
            assert!((f.psi_at(i, j) - f.psi_at(n - 1 - j, i)).abs() < 1e-12);
            assert!((f.psi_at(i, j) - f.psi_at(i, n - 1 - j)).abs() < 1e-12);
        }
    }
}

#[test]
fn separated_lumps_carry_three_half_pi() {
    let fac = factorize(&Cubic::new(0.0, C64::new(8.0, 0.0)).unwrap(), Sheet::Plus).unwrap();
    let spec = GridSpec::for_roots(&fac.zeros(), 513).unwrap();
    let f = solve_psi(&fac, &spec, None).unwrap();
    assert!(f.residual_sup <= 1e-10);
    let ratio = f.flux() / (1.5 * PI);
    assert!((ratio - 1.0).abs() <= 0.02, "{ratio}");
    // a lump sits at each cube root 2ω^k: |F| there dominates the origin
    let af = f.abs_f();
    let n = spec.points();
    let at = |z: C64| {
        let h = spec.spacing();
        let i = ((z.re + spec.half_width()) / h).round() as usize;
        let j = ((z.im + spec.half_width()) / h).round() as usize;
        af[i * n + j]
    };
    for k in 0..3 {
        let root = C64::from_polar(2.0, 2.0 * PI * k as f64 / 3.0);
        assert!(at(root) > 10.0 * at(C64::new(0.0, 0.0)));
    }
}

#[test]
fn flux_identity_on_plus_sheet() {
    for (a, k) in [(1.0, C64::new(0.7, -0.4)), (3.0, C64::new(0.0, 0.0))] {
        let f = field(a, k, Sheet::Plus, 8.0, 257);
        let ratio = f.flux() / (1.5 * PI);
        assert!((ratio - 1.0).abs() <= 0.02, "{a} {k}: {ratio}");
        // F has one sign up to O(h²) wobble near the edge, where F ≈ 0
        let gap = (f.signed_flux() + f.flux()).abs() / f.flux();
        assert!(gap < 1e-3, "{gap}");
    }
}

#[test]
fn minus_sheet_signed_flux() {
    // one antiparallel lump: F changes sign, so only the signed total is fixed
    for w in [C64::new(0.0, 0.0), C64::new(0.0, 2.0), C64::new(1.5, 0.5)] {
        let f = field(3.0, w * w * w + 3.0 * w, Sheet::Minus(w), 9.0, 257);
        let ratio = -f.signed_flux() / (0.5 * PI);
        assert!((ratio - 1.0).abs() <= 0.02, "{w}: {ratio}");
        assert!(f.flux() >= -f.signed_flux() - 1e-12);
        assert!(f.flux() <= 1.5 * PI * 1.02);
    }
}

#[test]
fn second_order_grid_convergence() {
    let k = C64::new(1.0, 0.5);
    let f1 = field(1.0, k, Sheet::Plus, 6.0, 65);
    let f2 = field(1.0, k, Sheet::Plus, 6.0, 129);
    let f3 = field(1.0, k, Sheet::Plus, 6.0, 257);
    let diff = |c: &Field2D, f: &Field2D| {
        let n = c.spec.points();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                d = d.max((c.psi_at(i, j) - f.psi_at(2 * i, 2 * j)).abs());
            }
        }
        d
    };
    let ratio = diff(&f1, &f2) / diff(&f2, &f3);
    assert!((3.0..5.0).contains(&ratio), "{ratio}");
}

#[test]
fn continuation_converges_quickly() {
    let cubic = Cubic::new(0.0, C64::new(3.0, 0.0)).unwrap();
    let fac = factorize(&cubic, Sheet::Plus).unwrap();
    let spec = GridSpec::new(10.0, 257).unwrap();
    let base = solve_psi(&fac, &spec, None).unwrap();
    for delta in [C64::new(0.1, 0.0), C64::new(0.0, -0.1), C64::new(0.05, 0.05)] {
        let next = factorize(&Cubic::new(0.0, cubic.k + delta).unwrap(), Sheet::Plus).unwrap();
        let f = solve_psi(&next, &spec, Some(&base)).unwrap();
        assert!(f.newton_iters <= 6, "{}", f.newton_iters);
    }
}

#[test]
fn agrees_with_radial_n2_solution() {
    let z = C64::new(1.0, 0.0);
    let fac = hitchin_core::model::Factorization::from_split(
        hitchin_core::poly::ComplexPoly::from_roots(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0)]),
        hitchin_core::poly::ComplexPoly::new(vec![-z]).unwrap(),
    )
    .unwrap();
    let spec = GridSpec::new(8.0, 513).unwrap();
    let f = solve_psi(&fac, &spec, None).unwrap();
    let radial = solve_radial(2, 0.0, 20.0, 4001).unwrap();
    let dr = radial.spacing();
    let n = spec.points();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = spec.point(i, j).norm();
            if r < 5.0 {
                let x = r / dr;
                let k = x.floor() as usize;
                let t = x - k as f64;
                let psi_r = (1.0 - t) * radial.psi[k] + t * radial.psi[k + 1];
                err = err.max((f.psi_at(i, j) - psi_r).abs());
            }
        }
    }
    assert!(err <= 1e-3, "{err}");
}
