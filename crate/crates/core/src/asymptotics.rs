//! The limiting configuration Φ = √H iσ₁: the constant c of the flat
//! asymptotic metric, the metric itself with its SL(2, Z) monodromy, and the
//! norms ‖∂Φ/∂p_k‖² that decide which coefficients of H are moduli.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::moduli_dimension;
use crate::poly::ComplexPoly;
use crate::quad::adaptive;
use crate::C64;

/// ∫₀¹ (1 − u³)^{−1/2} du, with u = 1 − s² removing the endpoint singularity:
/// the integrand becomes 2/√(1 + u + u²).
pub fn beta_integral() -> f64 {
    adaptive(
        |s| {
            let u = 1.0 - s * s;
            2.0 / (1.0 + u + u * u).sqrt()
        },
        0.0,
        1.0,
        1e-15,
        1e-14,
    )
    .value
}

/// c = (3√3/4)(∫₀¹ (1 − u³)^{−1/2} du)² ≈ 2.554.
pub fn constant_c() -> f64 {
    0.75 * 3f64.sqrt() * beta_integral().powi(2)
}

/// c from the plane integral ¼∫ d²w / |w³ − 1|.
pub fn constant_c_2d() -> f64 {
    const R: f64 = 3.0;
    let one = C64::new(1.0, 0.0);
    let roots: Vec<C64> = (0..3).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect();
    let inner = plane_integral(|w| 1.0 / (w * w * w - one).norm(), &roots, R, 1e-11);
    // outside |w| = R: angular mean of |1 − x e^{iθ}|^{−1} is Σ ((½)_m / m!)² x^{2m}
    let mut tail = 0.0;
    let mut a = 1.0;
    for m in 0..30 {
        if m > 0 {
            let f = (m as f64 - 0.5) / m as f64;
            a *= f * f;
        }
        let p = (6 * m + 1) as f64;
        tail += 2.0 * PI * a / (p * R.powf(p));
    }
    0.25 * (inner + tail)
}

/// C^∞ step: 1 for t ≥ 1, 0 for t ≤ 0.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// ∫_{|z| ≤ R} f d²x for f smooth away from `singular` points, where it may
/// blow up like 1/|z − z₀|.
///
/// A smooth partition of unity splits off a disk around each singular point,
/// integrated in polar coordinates centred on it (the r of the area element
/// cancels the singularity); the smooth remainder is integrated in polar
/// coordinates about the origin. Both use nested adaptive Gauss–Kronrod.
pub fn plane_integral<F: Fn(C64) -> f64>(f: F, singular: &[C64], radius: f64, rel_tol: f64) -> f64 {
    let mut rho: f64 = 0.5;
    for (i, a) in singular.iter().enumerate() {
        for b in &singular[i + 1..] {
            rho = rho.min(0.45 * (a - b).norm());
        }
        rho = rho.min(0.45 * (radius - a.norm()));
    }
    let bump = |r: f64| smooth_step(2.0 * (rho - r) / rho);
    let weight = |z: C64| 1.0 - singular.iter().map(|c| bump((z - c).norm())).sum::<f64>();
    let abs_tol = 1e-14;
    let angular = |g: &dyn Fn(f64) -> f64| adaptive(g, 0.0, 2.0 * PI, abs_tol, rel_tol).value;

    let mut total = 0.0;
    for &c in singular {
        total += adaptive(
            |r| {
                if r == 0.0 {
                    return 0.0;
                }
                let b = bump(r);
                if b == 0.0 {
                    return 0.0;
                }
                r * b * angular(&|t| f(c + C64::from_polar(r, t)))
            },
            0.0,
            rho,
            abs_tol,
            rel_tol,
        )
        .value;
    }
    total += adaptive(
        |r| {
            r * angular(&|t| {
                let z = C64::from_polar(r, t);
                let w = weight(z);
                if w <= 0.0 {
                    0.0
                } else {
                    w * f(z)
                }
            })
        },
        0.0,
        radius,
        abs_tol,
        rel_tol,
    )
    .value;
    total
}

/// Flat model near infinity: the modulus K and two relative lump phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticChart {
    pub k: C64,
    pub eta1: f64,
    pub eta2: f64,
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl AsymptoticChart {
    pub fn new(k: C64, eta1: f64, eta2: f64) -> Self {
        AsymptoticChart {
            k,
            eta1: wrap_angle(eta1),
            eta2: wrap_angle(eta2),
        }
    }
}

/// Matrix of the phase monodromy acting on (η₁, η₂).
pub const UPSILON: [[i64; 2]; 2] = [[0, -1], [1, -1]];

pub fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// (η₁, η₂) ↦ (−η₂, η₁ − η₂), picked up when arg K winds once.
pub fn upsilon(chart: &AsymptoticChart) -> AsymptoticChart {
    AsymptoticChart::new(chart.k, -chart.eta2, chart.eta1 - chart.eta2)
}

/// dη₁² + dη₂² − dη₁dη₂.
pub fn eta_form(d1: f64, d2: f64) -> f64 {
    d1 * d1 + d2 * d2 - d1 * d2
}

/// Eigenvalues of the η block of the flat metric, (1/√3)·{½, 3/2}.
pub fn eta_block_eigenvalues() -> [f64; 2] {
    let s = 1.0 / 3f64.sqrt();
    [0.5 * s, 1.5 * s]
}

/// ds² = c|K|^{−1/3}|dK|² + (1/√3)(dη₁² + dη₂² − dη₁dη₂).
pub fn singular_metric(chart: &AsymptoticChart, dk: C64, deta1: f64, deta2: f64) -> Result<f64> {
    singular_metric_with(constant_c(), chart, dk, deta1, deta2)
}

/// As [`singular_metric`] with a precomputed c.
pub fn singular_metric_with(c: f64, chart: &AsymptoticChart, dk: C64, deta1: f64, deta2: f64) -> Result<f64> {
    let r = chart.k.norm();
    if r == 0.0 {
        return Err(Error::ConicalSingularity);
    }
    Ok(c * r.powf(-1.0 / 3.0) * dk.norm_sqr() + eta_form(deta1, deta2) / 3f64.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Converges,
    Diverges,
}

impl std::fmt::Display for Convergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convergence::Converges => "converges",
            Convergence::Diverges => "diverges",
        })
    }
}

/// ‖∂Φ/∂p_k‖² converges iff (n + 3)/2 ≤ k ≤ n.
pub fn classify_pk(n: usize, k: usize) -> Result<Convergence> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    Ok(if 2 * k >= n + 3 {
        Convergence::Converges
    } else {
        Convergence::Diverges
    })
}

/// Moduli of the degree-n problem: coefficients p_k with finite norm, the
/// relative phases with finite norm, and the resulting real dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliCount {
    pub complex_coefficients: Vec<usize>,
    pub real_phases: usize,
    pub real_dimension: usize,
}

pub fn moduli_count(n: usize) -> Result<ModuliCount> {
    let mut coeffs = Vec::new();
    for k in 1..=n {
        if classify_pk(n, k)? == Convergence::Converges {
            coeffs.push(k);
        }
    }
    // n − 1 relative phases; for even n one combination has infinite norm
    let real_phases = if n % 2 == 1 { n - 1 } else { n - 2 };
    let real_dimension = 2 * coeffs.len() + real_phases;
    debug_assert_eq!(real_dimension, moduli_dimension(n)?);
    Ok(ModuliCount {
        complex_coefficients: coeffs,
        real_phases,
        real_dimension,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormPk {
    /// ∫_{|z| ≤ R_cut} |z|^{2n−2k} / (4|H|) d²x.
    pub value: f64,
    pub classification: Convergence,
    /// Exponent p of the radial density ∝ R^p, fitted between R_cut/2 and
    /// R_cut; the integral converges iff p < −1. Expected n − 2k + 1.
    pub growth_exponent: f64,
}

pub const MIN_CUTOFF: f64 = 10.0;

/// ‖∂Φ/∂p_k‖² of the limiting configuration for H of degree n, cut off at |z| = R_cut.
pub fn norm_pk(n: usize, k: usize, h: &ComplexPoly, r_cut: f64) -> Result<NormPk> {
    let classification = classify_pk(n, k)?;
    if h.degree() != n {
        return Err(Error::InvalidArgument(format!(
            "H has degree {}, expected {n}",
            h.degree()
        )));
    }
    if !(r_cut >= MIN_CUTOFF) {
        return Err(Error::InvalidArgument(format!("R_cut must be >= {MIN_CUTOFF}")));
    }
    let roots = h.roots()?;
    let dh = h.derivative();
    let scale = h.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    for &r in &roots {
        if dh.eval(r).norm() <= 1e-8 * scale {
            return Err(Error::RepeatedRoot(r));
        }
        if r.norm() >= 0.5 * r_cut {
            return Err(Error::Domain(format!("zero {r} lies outside R_cut/2")));
        }
    }
    let power = 2 * (n - k) as i32;
    let f = |z: C64| z.norm().powi(power) / (4.0 * h.eval(z).norm());
    let value = plane_integral(f, &roots, r_cut, 1e-9);
    let density = |r: f64| r * adaptive(|t| f(C64::from_polar(r, t)), 0.0, 2.0 * PI, 0.0, 1e-12).value;
    let growth_exponent = (density(r_cut) / density(0.5 * r_cut)).log2();
    Ok(NormPk {
        value,
        classification,
        growth_exponent,
    })
}

/// Total |F| of the limiting configuration: π/2 for each of the n zeros.
pub fn singular_flux(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(n as f64 * PI / 2.0)
}
