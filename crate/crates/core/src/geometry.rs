//! Tangent vectors to the Γ-invariant surfaces S₊ and S₋, their gauge
//! projection, the L² metric ds² = Ω|dK|² and its Gaussian curvature.
//!
//! The discrete inner product is
//!
//! ⟨U, V⟩ = Σ ½ w Re tr(Φ̇_U Φ̇_V*) + Σ' 2h² Re tr(Ȧ_U Ȧ_V*)
//!
//! with trapezoidal weights w over all nodes and Σ' over interior nodes.
//! Infinitesimal gauge motions are L(ε) = ([ε, Φ], −D_z̄ε) with
//! D_z̄ε = ∂_z̄ε + [A_z̄, ε], ε = i(e₁σ₁ + e₂σ₂ + e₃σ₃), and ∂_z̄ by centered
//! differences. Projection solves L†L ε = L†V with the exact discrete adjoint.

use std::sync::Arc;

use rayon::prelude::*;

use crate::elliptic::{solve_psi, Field2D};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::{pcg, CgReport};
use crate::mat2::Mat2;
use crate::model::{factorize, GaugeFields, Sheet};
use crate::poly::Cubic;
use crate::quad::gauss_legendre;
use crate::C64;

pub const MIN_STEP: f64 = 1e-3;
pub const MAX_STEP: f64 = 0.1;

/// A deformation (Φ̇, Ȧ_z̄) of the fields of `base`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub phi_dot: Vec<Mat2>,
    pub a_zbar_dot: Vec<Mat2>,
    pub base: Arc<Field2D>,
    background: Arc<GaugeFields>,
}

impl TangentVector {
    /// Wraps explicit grids; both must have one entry per node of `base`.
    pub fn new(base: Arc<Field2D>, phi_dot: Vec<Mat2>, a_zbar_dot: Vec<Mat2>) -> Result<Self> {
        let background = Arc::new(base.gauge_fields());
        Self::with_background(base, background, phi_dot, a_zbar_dot)
    }

    fn with_background(
        base: Arc<Field2D>,
        background: Arc<GaugeFields>,
        phi_dot: Vec<Mat2>,
        a_zbar_dot: Vec<Mat2>,
    ) -> Result<Self> {
        let len = base.spec.len();
        if phi_dot.len() != len || a_zbar_dot.len() != len {
            return Err(Error::GridMismatch);
        }
        Ok(TangentVector {
            phi_dot,
            a_zbar_dot,
            base,
            background,
        })
    }

    pub fn background(&self) -> &GaugeFields {
        &self.background
    }

    pub fn scale(&self, c: C64) -> TangentVector {
        TangentVector {
            phi_dot: self.phi_dot.iter().map(|m| m.scale(c)).collect(),
            a_zbar_dot: self.a_zbar_dot.iter().map(|m| m.scale(c)).collect(),
            base: self.base.clone(),
            background: self.background.clone(),
        }
    }

    fn minus(&self, phi: &[Mat2], a: &[Mat2]) -> TangentVector {
        TangentVector {
            phi_dot: self.phi_dot.iter().zip(phi).map(|(x, y)| *x - *y).collect(),
            a_zbar_dot: self.a_zbar_dot.iter().zip(a).map(|(x, y)| *x - *y).collect(),
            base: self.base.clone(),
            background: self.background.clone(),
        }
    }

    pub fn sup_phi_dot(&self) -> f64 {
        self.phi_dot.iter().map(|m| m.norm_sq().sqrt()).fold(0.0, f64::max)
    }
}

/// Central difference (fields(upper) − fields(lower)) / |step| of two
/// solutions bracketing `base`, which provides the background for projection.
///
/// The quotient is by the real length of the step: V is the real tangent to
/// the curve, and a complex phase would rotate gauge motions out of the
/// (real) gauge orbit.
pub fn tangent_raw(
    base: Arc<Field2D>,
    lower: &Field2D,
    upper: &Field2D,
    step: C64,
) -> Result<TangentVector> {
    if lower.spec != base.spec || upper.spec != base.spec {
        return Err(Error::GridMismatch);
    }
    let s = step.norm();
    if !(MIN_STEP..=MAX_STEP).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "displacement {s} outside [{MIN_STEP}, {MAX_STEP}]"
        )));
    }
    let lo = lower.gauge_fields();
    let hi = upper.gauge_fields();
    let inv = 1.0 / s;
    let diff = |a: &[Mat2], b: &[Mat2]| -> Vec<Mat2> {
        a.iter().zip(b).map(|(x, y)| (*x - *y).scale_re(inv)).collect()
    };
    let phi_dot = diff(&hi.phi, &lo.phi);
    let a_dot = diff(&hi.a_zbar, &lo.a_zbar);
    TangentVector::new(base, phi_dot, a_dot)
}

/// Neighbour offsets and the centered-difference coefficients of ∂_z̄
/// (in units of 1/h).
const DZBAR: [(isize, isize, C64); 4] = [
    (1, 0, C64::new(0.25, 0.0)),
    (-1, 0, C64::new(-0.25, 0.0)),
    (0, 1, C64::new(0.0, 0.25)),
    (0, -1, C64::new(0.0, -0.25)),
];

fn eps_at(eps: &[f64], k: usize) -> Mat2 {
    Mat2::su2([eps[3 * k], eps[3 * k + 1], eps[3 * k + 2]])
}

/// L(ε) = ([ε, Φ], −D_z̄ε); the A part is set on interior nodes only.
pub fn gauge_motion(bg: &GaugeFields, eps: &[f64]) -> Result<(Vec<Mat2>, Vec<Mat2>)> {
    let spec = &bg.spec;
    let n = spec.points();
    if eps.len() != 3 * spec.len() {
        return Err(Error::GridMismatch);
    }
    let inv_h = 1.0 / spec.spacing();
    let mut phi = vec![Mat2::ZERO; spec.len()];
    let mut a = vec![Mat2::ZERO; spec.len()];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let e = eps_at(eps, k);
            phi[k] = e.commutator(&bg.phi[k]);
            if spec.is_boundary(i, j) {
                continue;
            }
            let mut d = bg.a_zbar[k].commutator(&e);
            for (di, dj, c) in DZBAR {
                let m = (i as isize + di) as usize * n + (j as isize + dj) as usize;
                d += eps_at(eps, m).scale(c * inv_h);
            }
            a[k] = -d;
        }
    }
    Ok((phi, a))
}

/// Adjoint of [`gauge_motion`] from the metric inner product to the Euclidean
/// product on ε coefficients. Corner entries are zero (ε is pinned there).
pub fn gauge_adjoint(bg: &GaugeFields, phi_v: &[Mat2], a_v: &[Mat2]) -> Vec<f64> {
    let spec = &bg.spec;
    let n = spec.points();
    let h = spec.spacing();
    let mut out = vec![0.0; 3 * spec.len()];
    let mut add = |k: usize, v: [f64; 3], s: f64| {
        for c in 0..3 {
            out[3 * k + c] += s * v[c];
        }
    };
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let w = spec.trapezoid_weight(i, j);
            add(k, bg.phi[k].commutator(&phi_v[k].adjoint()).su2_dual(), 0.5 * w);
            if spec.is_boundary(i, j) {
                continue;
            }
            let va = a_v[k].adjoint();
            add(k, va.commutator(&bg.a_zbar[k]).su2_dual(), -2.0 * h * h);
            for (di, dj, c) in DZBAR {
                let m = (i as isize + di) as usize * n + (j as isize + dj) as usize;
                add(m, va.scale(c / h).su2_dual(), -2.0 * h * h);
            }
        }
    }
    for (i, j) in [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)] {
        let k = i * n + j;
        out[3 * k..3 * k + 3].iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

/// Diagonal of L†L, used as a Jacobi preconditioner.
fn normal_diagonal(bg: &GaugeFields) -> Vec<f64> {
    let spec = &bg.spec;
    let n = spec.points();
    let h = spec.spacing();
    let basis = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut diag = vec![0.0; 3 * spec.len()];
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let w = spec.trapezoid_weight(i, j);
            let interior_neighbours = DZBAR
                .iter()
                .filter(|(di, dj, _)| {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    a > 0 && b > 0 && a < n as isize - 1 && b < n as isize - 1
                })
                .count();
            for (c, e) in basis.iter().enumerate() {
                let t = Mat2::su2(*e);
                let mut d = 0.5 * w * t.commutator(&bg.phi[k]).norm_sq();
                // each neighbour contributes 2h² |1/(4h)|² tr(tt*) = 1/4
                d += 0.25 * interior_neighbours as f64;
                if !spec.is_boundary(i, j) {
                    d += 2.0 * h * h * bg.a_zbar[k].commutator(&t).norm_sq();
                }
                diag[3 * k + c] = d;
            }
        }
    }
    diag
}

/// ⟨U, V⟩ in the discrete metric.
pub fn inner(spec: &GridSpec, u: (&[Mat2], &[Mat2]), v: (&[Mat2], &[Mat2])) -> f64 {
    let n = spec.points();
    let h2 = spec.spacing().powi(2);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            total += 0.5 * spec.trapezoid_weight(i, j) * u.0[k].inner(&v.0[k]);
            if !spec.is_boundary(i, j) {
                total += 2.0 * h2 * u.1[k].inner(&v.1[k]);
            }
        }
    }
    total
}

/// ½∫ tr(Φ̇Φ̇* + 4Ȧ_z̄Ȧ_z̄*) over the box.
pub fn l2_norm_sq(v: &TangentVector) -> f64 {
    let pair = (&v.phi_dot[..], &v.a_zbar_dot[..]);
    inner(&v.base.spec, pair, pair)
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            rel_tol: 1e-12,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub vector: TangentVector,
    /// The removed gauge parameter ε, three coefficients per node.
    pub epsilon: Vec<f64>,
    pub report: CgReport,
}

/// Γ-invariant data: Φ and Φ̇ off-diagonal, A_z̄ and Ȧ_z̄ diagonal. Then L†L
/// preserves the σ₃ line and L†V has no σ₁, σ₂ part, so ε = iθσ₃ suffices.
fn is_diagonal_sector(bg: &GaugeFields, v: &TangentVector) -> bool {
    let zero = C64::new(0.0, 0.0);
    let off = |m: &Mat2| m.0[0] == zero && m.0[3] == zero;
    let diag = |m: &Mat2| m.0[1] == zero && m.0[2] == zero;
    bg.phi.iter().all(off)
        && v.phi_dot.iter().all(off)
        && bg.a_zbar.iter().all(diag)
        && v.a_zbar_dot.iter().all(diag)
}

/// L restricted to ε = iθσ₃, written into preallocated buffers:
/// Φ̇ = 2iθ(Φ₀₁, −Φ₁₀) off the diagonal and Ȧ_z̄ = −i(∂_z̄θ)σ₃.
struct DiagonalGauge<'a> {
    bg: &'a GaugeFields,
}

impl DiagonalGauge<'_> {
    fn motion(&self, theta: &[f64], up: &mut [C64], dn: &mut [C64], a: &mut [C64]) {
        let spec = &self.bg.spec;
        let n = spec.points();
        let inv_h = 1.0 / spec.spacing();
        let i2 = C64::new(0.0, 2.0);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                up[k] = i2 * theta[k] * self.bg.phi[k].0[1];
                dn[k] = -i2 * theta[k] * self.bg.phi[k].0[2];
                a[k] = if spec.is_boundary(i, j) {
                    C64::new(0.0, 0.0)
                } else {
                    let mut d = C64::new(0.0, 0.0);
                    for (di, dj, c) in DZBAR {
                        let m = (i as isize + di) as usize * n + (j as isize + dj) as usize;
                        d += c * theta[m];
                    }
                    C64::new(0.0, -inv_h) * d
                };
            }
        }
    }

    /// σ₃ coefficient of the adjoint; `a` holds the (0,0) entry of Ȧ_z̄,
    /// whose (1,1) entry is −a.
    fn adjoint(&self, up: &[C64], dn: &[C64], a: &[C64], out: &mut [f64]) {
        let spec = &self.bg.spec;
        let n = spec.points();
        let h = spec.spacing();
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let w = spec.trapezoid_weight(i, j);
                let p = self.bg.phi[k].0[1];
                let q = self.bg.phi[k].0[2];
                out[k] += w * (C64::i() * (p * up[k].conj() - q * dn[k].conj())).re;
                if spec.is_boundary(i, j) {
                    continue;
                }
                // 2h² Re tr(−i c θ σ₃ Ȧ*) summed over the stencil
                let g = C64::new(0.0, -4.0 * h) * a[k].conj();
                for (di, dj, c) in DZBAR {
                    let m = (i as isize + di) as usize * n + (j as isize + dj) as usize;
                    out[m] += (c * g).re;
                }
            }
        }
        for (ci, cj) in [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)] {
            out[ci * n + cj] = 0.0;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let spec = &self.bg.spec;
        let n = spec.points();
        let mut diag = vec![0.0; spec.len()];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                let interior_neighbours = DZBAR
                    .iter()
                    .filter(|(di, dj, _)| {
                        let (a, b) = (i as isize + di, j as isize + dj);
                        a > 0 && b > 0 && a < n as isize - 1 && b < n as isize - 1
                    })
                    .count();
                let phi = &self.bg.phi[k];
                diag[k] = 2.0 * spec.trapezoid_weight(i, j) * (phi.0[1].norm_sqr() + phi.0[2].norm_sqr())
                    + 0.25 * interior_neighbours as f64;
            }
        }
        diag
    }
}

fn project_diagonal(
    v: &TangentVector,
    opts: &ProjectionOptions,
    warm: Option<&[f64]>,
) -> Result<Projection> {
    let bg = v.background();
    let len = bg.spec.len();
    let n = bg.spec.points();
    let op = DiagonalGauge { bg };
    let up: Vec<C64> = v.phi_dot.iter().map(|m| m.0[1]).collect();
    let dn: Vec<C64> = v.phi_dot.iter().map(|m| m.0[2]).collect();
    let va: Vec<C64> = v.a_zbar_dot.iter().map(|m| m.0[0]).collect();
    let mut rhs = vec![0.0; len];
    op.adjoint(&up, &dn, &va, &mut rhs);
    let diag = op.diagonal();
    let mut theta: Vec<f64> = match warm {
        Some(w) if w.len() == 3 * len => w.iter().skip(2).step_by(3).copied().collect(),
        Some(_) => return Err(Error::GridMismatch),
        None => vec![0.0; len],
    };
    let corners = [0, n - 1, n * (n - 1), n * n - 1];
    for k in corners {
        theta[k] = 0.0;
    }
    let zero = C64::new(0.0, 0.0);
    let (mut bu, mut bd, mut ba) = (vec![zero; len], vec![zero; len], vec![zero; len]);
    let apply = |x: &[f64], out: &mut [f64]| {
        op.motion(x, &mut bu, &mut bd, &mut ba);
        op.adjoint(&bu, &bd, &ba, out);
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&diag) {
            *z = r / d;
        }
        for k in corners {
            z[k] = 0.0;
        }
    };
    let report = pcg(apply, precond, &rhs, &mut theta, opts.rel_tol, opts.max_iter);
    if !report.converged {
        return Err(Error::Projection(report.relative_residual));
    }
    let mut eps = vec![0.0; 3 * len];
    for (k, t) in theta.iter().enumerate() {
        eps[3 * k + 2] = *t;
    }
    let (phi, a) = gauge_motion(bg, &eps)?;
    Ok(Projection {
        vector: v.minus(&phi, &a),
        epsilon: eps,
        report,
    })
}

pub fn gauge_project(v: &TangentVector) -> Result<TangentVector> {
    gauge_project_with(v, &ProjectionOptions::default(), None).map(|p| p.vector)
}

/// Removes the component of `v` along gauge orbits, optionally starting CG
/// from a previous ε.
pub fn gauge_project_with(
    v: &TangentVector,
    opts: &ProjectionOptions,
    warm: Option<&[f64]>,
) -> Result<Projection> {
    let bg = v.background();
    if is_diagonal_sector(bg, v) {
        return project_diagonal(v, opts, warm);
    }
    let len = 3 * bg.spec.len();
    let rhs = gauge_adjoint(bg, &v.phi_dot, &v.a_zbar_dot);
    let diag = normal_diagonal(bg);
    let mut eps = match warm {
        Some(w) if w.len() == len => w.to_vec(),
        Some(_) => return Err(Error::GridMismatch),
        None => vec![0.0; len],
    };
    let n = bg.spec.points();
    let corners: Vec<usize> = [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)]
        .iter()
        .map(|&(i, j)| i * n + j)
        .collect();
    for &k in &corners {
        eps[3 * k..3 * k + 3].iter_mut().for_each(|x| *x = 0.0);
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        let (phi, a) = gauge_motion(bg, x).expect("sizes checked");
        out.copy_from_slice(&gauge_adjoint(bg, &phi, &a));
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&diag) {
            *z = if *d > 0.0 { r / d } else { 0.0 };
        }
        for &k in &corners {
            z[3 * k..3 * k + 3].iter_mut().for_each(|x| *x = 0.0);
        }
    };
    let report = pcg(apply, precond, &rhs, &mut eps, opts.rel_tol, opts.max_iter);
    if !report.converged {
        return Err(Error::Projection(report.relative_residual));
    }
    let (phi, a) = gauge_motion(bg, &eps)?;
    Ok(Projection {
        vector: v.minus(&phi, &a),
        epsilon: eps,
        report,
    })
}

/// sup ‖D_z̄Φ̇ − [Φ, Ȧ_z̄]‖ over nodes at least two cells from the edge.
pub fn holomorphy_residual(v: &TangentVector) -> f64 {
    let bg = v.background();
    let spec = &bg.spec;
    let n = spec.points();
    let inv_h = 1.0 / spec.spacing();
    let mut worst: f64 = 0.0;
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            let k = i * n + j;
            let mut d = bg.a_zbar[k].commutator(&v.phi_dot[k]);
            for (di, dj, c) in DZBAR {
                let m = (i as isize + di) as usize * n + (j as isize + dj) as usize;
                d += v.phi_dot[m].scale(c * inv_h);
            }
            d -= bg.phi[k].commutator(&v.a_zbar_dot[k]);
            worst = worst.max(d.norm_sq().sqrt());
        }
    }
    worst
}

/// Pointwise density of L†V (the discrete gauge-orthogonality condition),
/// as a fraction of sup‖Φ̇‖.
pub fn gauge_residual(v: &TangentVector) -> f64 {
    let bg = v.background();
    let h2 = bg.spec.spacing().powi(2);
    let r = gauge_adjoint(bg, &v.phi_dot, &v.a_zbar_dot);
    let worst = r
        .chunks(3)
        .map(|c| (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt() / h2)
        .fold(0.0, f64::max);
    let scale = v.sup_phi_dot();
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Which Γ-invariant surface is sampled, and therefore the chart coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surface {
    /// Coordinate K.
    Plus,
    /// Coordinate W with K = W³ + aW.
    Minus,
}

impl Surface {
    pub fn cubic_and_sheet(self, a: f64, coord: C64) -> Result<(Cubic, Sheet)> {
        match self {
            Surface::Plus => Ok((Cubic::new(a, coord)?, Sheet::Plus)),
            Surface::Minus => Ok((Cubic::new(a, coord * coord * coord + a * coord)?, Sheet::Minus(coord))),
        }
    }

    pub fn dk_dcoord(self, a: f64, coord: C64) -> C64 {
        match self {
            Surface::Plus => C64::new(1.0, 0.0),
            Surface::Minus => 3.0 * coord * coord + a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Surface::Plus => "plus",
            Surface::Minus => "minus",
        }
    }
}

impl std::str::FromStr for Surface {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "s+" | "splus" => Ok(Surface::Plus),
            "minus" | "s-" | "sminus" => Ok(Surface::Minus),
            _ => Err(Error::InvalidArgument(format!("unknown surface {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSample {
    pub coordinate: C64,
    pub omega: f64,
    /// NaN until filled by [`curvature_grid`].
    pub curvature: f64,
    /// |n(δ) − n(iδ)| / mean of the two displacement norms.
    pub iso_spread: f64,
    /// Largest [`gauge_residual`] of the two projected vectors.
    pub resid_gauge: f64,
    /// Largest [`holomorphy_residual`] of the two projected vectors.
    pub resid_holo: f64,
    /// Far-field contribution included in `omega`.
    pub tail: f64,
}

impl MetricSample {
    fn failed(coordinate: C64) -> Self {
        MetricSample {
            coordinate,
            omega: f64::NAN,
            curvature: f64::NAN,
            iso_spread: f64::NAN,
            resid_gauge: f64::NAN,
            resid_holo: f64::NAN,
            tail: f64::NAN,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.omega.is_finite()
    }
}

/// ∫ d²x / (4|H|) outside the box [−L, L]², the norm of ∂_K√H iσ₁ there.
///
/// Each of the four wedges |y| ≤ x, x ≥ L (and rotations) is mapped to the
/// unit square by x = L/s, y = xτ and integrated by Gauss–Legendre.
pub fn exterior_tail(cubic: &Cubic, half_width: f64) -> f64 {
    const NODES: usize = 64;
    let s_nodes = gauss_legendre(NODES, 0.0, 1.0);
    let t_nodes = gauss_legendre(NODES, -1.0, 1.0);
    let l = half_width;
    let poly = cubic.poly();
    let mut total = 0.0;
    for rot in [C64::new(1.0, 0.0), C64::i(), C64::new(-1.0, 0.0), -C64::i()] {
        for &(s, ws) in &s_nodes {
            let x = l / s;
            let jac = l * l / (s * s * s);
            for &(t, wt) in &t_nodes {
                let z = rot * C64::new(x, x * t);
                total += ws * wt * jac / (4.0 * poly.eval(z).norm());
            }
        }
    }
    total
}

/// Box for all coordinates of a scan: zeros of every sampled H (and its
/// displaced neighbours) keep the core-size margin.
pub fn scan_spec(a: f64, surface: Surface, coords: &[C64], delta: f64, points: usize) -> Result<GridSpec> {
    GridSpec::for_roots(&scan_zeros(a, surface, coords, delta)?, points)
}

fn scan_zeros(a: f64, surface: Surface, coords: &[C64], delta: f64) -> Result<Vec<C64>> {
    let mut zeros = Vec::new();
    for &c in coords {
        for off in [C64::new(delta, 0.0), C64::new(-delta, 0.0), C64::new(0.0, delta), C64::new(0.0, -delta)] {
            let (cubic, _) = surface.cubic_and_sheet(a, c + off)?;
            zeros.extend(cubic.roots());
        }
    }
    Ok(zeros)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OmegaOptions {
    pub projection: ProjectionOptions,
}

/// Ω at one point of a surface, with the grid from [`scan_spec`].
pub fn omega_at(a: f64, coordinate: C64, surface: Surface, delta: f64, spec: Option<GridSpec>) -> Result<MetricSample> {
    let spec = match spec {
        Some(s) => s,
        None => scan_spec(a, surface, &[coordinate], delta, GridSpec::DEFAULT_POINTS)?,
    };
    omega_sample(a, coordinate, surface, delta, &spec, None, &OmegaOptions::default()).map(|s| s.0)
}

/// Ω in the S₋ sheet measured in the K chart: the W displacement is
/// δK/(3W² + a), so that Ω_W = Ω_K |3W² + a|².
pub fn omega_minus_k_chart(a: f64, w: C64, delta: f64, spec: &GridSpec) -> Result<MetricSample> {
    let dk = Surface::Minus.dk_dcoord(a, w);
    if dk.norm() < 1e-8 {
        return Err(Error::Domain(format!("K chart degenerates at the branch point W = {w}")));
    }
    omega_chart(a, w, Surface::Minus, delta, spec, None, &OmegaOptions::default(), 1.0 / dk).map(|s| s.0)
}

/// Ω at `coordinate`, warm-started from a nearby base solution; also returns
/// the base field for the next sample.
pub fn omega_sample(
    a: f64,
    coordinate: C64,
    surface: Surface,
    delta: f64,
    spec: &GridSpec,
    warm: Option<&Field2D>,
    opts: &OmegaOptions,
) -> Result<(MetricSample, Arc<Field2D>)> {
    omega_chart(a, coordinate, surface, delta, spec, warm, opts, C64::new(1.0, 0.0))
}

#[allow(clippy::too_many_arguments)]
fn omega_chart(
    a: f64,
    coordinate: C64,
    surface: Surface,
    delta: f64,
    spec: &GridSpec,
    warm: Option<&Field2D>,
    opts: &OmegaOptions,
    coord_per_chart: C64,
) -> Result<(MetricSample, Arc<Field2D>)> {
    let solve_at = |offset: C64, seed: Option<&Field2D>| -> Result<Field2D> {
        let (cubic, sheet) = surface.cubic_and_sheet(a, coordinate + offset)?;
        let fac = factorize(&cubic, sheet)?;
        match solve_psi(&fac, spec, seed) {
            Ok(f) => Ok(f),
            Err(e) if seed.is_some() && e.is_numerical() => solve_psi(&fac, spec, None),
            Err(e) => Err(e),
        }
    };
    let base = Arc::new(solve_at(C64::new(0.0, 0.0), warm)?);
    let background = Arc::new(base.gauge_fields());
    let mut norms = [0.0; 2];
    let mut resid_gauge: f64 = 0.0;
    let mut resid_holo: f64 = 0.0;
    for (slot, dir) in [C64::new(delta, 0.0), C64::new(0.0, delta)].into_iter().enumerate() {
        let step = dir * coord_per_chart;
        let lo = solve_at(-0.5 * step, Some(&base))?;
        let hi = solve_at(0.5 * step, Some(&base))?;
        let lf = lo.gauge_fields();
        let hf = hi.gauge_fields();
        let inv = 1.0 / delta;
        let diff = |x: &[Mat2], y: &[Mat2]| -> Vec<Mat2> {
            x.iter().zip(y).map(|(p, q)| (*p - *q).scale_re(inv)).collect()
        };
        let raw = TangentVector::with_background(
            base.clone(),
            background.clone(),
            diff(&hf.phi, &lf.phi),
            diff(&hf.a_zbar, &lf.a_zbar),
        )?;
        let projected = gauge_project_with(&raw, &opts.projection, None)?.vector;
        norms[slot] = l2_norm_sq(&projected);
        resid_gauge = resid_gauge.max(gauge_residual(&projected));
        resid_holo = resid_holo.max(holomorphy_residual(&projected));
    }
    let (cubic, _) = surface.cubic_and_sheet(a, coordinate)?;
    let dk = surface.dk_dcoord(a, coordinate) * coord_per_chart;
    let tail = dk.norm_sqr() * exterior_tail(&cubic, spec.half_width());
    let (n1, n2) = (norms[0] + tail, norms[1] + tail);
    let omega = 0.5 * (n1 + n2);
    Ok((
        MetricSample {
            coordinate,
            omega,
            curvature: f64::NAN,
            iso_spread: (n1 - n2).abs() / omega,
            resid_gauge,
            resid_holo,
            tail,
        },
        base,
    ))
}

/// Fills C = −(1/(2Ω)) Δ log Ω on interior points of a `steps × steps`
/// sample grid stored row-major in the real part of the coordinate.
///
/// Points with an invalid neighbour, and the outer ring, get NaN.
pub fn curvature_grid(samples: &mut [MetricSample], steps: usize) -> Result<()> {
    if steps < 3 || samples.len() != steps * steps {
        return Err(Error::NonUniformGrid);
    }
    let origin = samples[0].coordinate;
    let spacing = samples[steps].coordinate.re - origin.re;
    if !(spacing > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for (k, s) in samples.iter().enumerate() {
        let expect = origin + C64::new((k / steps) as f64, (k % steps) as f64) * spacing;
        if (s.coordinate - expect).norm() > 1e-9 * (1.0 + spacing) {
            return Err(Error::NonUniformGrid);
        }
    }
    let log_omega: Vec<f64> = samples.iter().map(|s| s.omega.ln()).collect();
    for i in 0..steps {
        for j in 0..steps {
            let k = i * steps + j;
            samples[k].curvature = if i == 0 || j == 0 || i == steps - 1 || j == steps - 1 {
                f64::NAN
            } else {
                let lap = (log_omega[k - steps] + log_omega[k + steps] + log_omega[k - 1] + log_omega[k + 1]
                    - 4.0 * log_omega[k])
                    / (spacing * spacing);
                // NaN propagates from failed neighbours
                -lap / (2.0 * samples[k].omega)
            };
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    pub a: f64,
    pub surface: Surface,
    /// Half-width of the square coordinate grid.
    pub radius: f64,
    pub steps: usize,
    pub delta: f64,
    pub points: usize,
    /// Fixed box half-width; chosen from the sampled zeros when `None`.
    pub half_width: Option<f64>,
    pub jobs: usize,
}

/// Peaks must reach this fraction of the largest |C| on the grid.
pub const PEAK_FRACTION: f64 = 0.25;

pub const MAX_FAILURE_FRACTION: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct SurfaceScan {
    pub config: ScanConfig,
    pub spec: GridSpec,
    /// Row-major: sample (i, j) has coordinate (−R + i s) + i(−R + j s).
    pub samples: Vec<MetricSample>,
    pub failures: Vec<(C64, String)>,
}

pub fn scan_coordinates(radius: f64, steps: usize) -> Vec<C64> {
    let s = 2.0 * radius / (steps - 1) as f64;
    (0..steps * steps)
        .map(|k| C64::new(-radius + (k / steps) as f64 * s, -radius + (k % steps) as f64 * s))
        .collect()
}

/// Samples Ω over the coordinate square, fills in C and returns the grid.
///
/// Columns are split into `jobs` strips; each strip is walked in serpentine
/// order so every solve is warm-started from its predecessor.
pub fn surface_scan(config: &ScanConfig) -> Result<SurfaceScan> {
    let ScanConfig { a, surface, radius, steps, delta, points, half_width, jobs } = *config;
    if steps < 9 {
        return Err(Error::InvalidArgument(format!("need at least 9 steps, got {steps}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("scan radius must be positive".into()));
    }
    let coords = scan_coordinates(radius, steps);
    let spec = match half_width {
        None => scan_spec(a, surface, &coords, delta, points)?,
        Some(l) => {
            let spec = GridSpec::new(l, points)?;
            spec.check_margin(&scan_zeros(a, surface, &coords, delta)?)?;
            spec
        }
    };
    let jobs = jobs.clamp(1, steps);
    let strips: Vec<(usize, usize)> = (0..jobs)
        .map(|s| (s * steps / jobs, (s + 1) * steps / jobs))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    let run_strip = |&(lo, hi): &(usize, usize)| -> Vec<(usize, std::result::Result<MetricSample, String>)> {
        let opts = OmegaOptions::default();
        let mut out = Vec::new();
        let mut warm: Option<Arc<Field2D>> = None;
        for i in lo..hi {
            let cols: Vec<usize> = if (i - lo) % 2 == 0 { (0..steps).collect() } else { (0..steps).rev().collect() };
            for j in cols {
                let k = i * steps + j;
                match omega_sample(a, coords[k], surface, delta, &spec, warm.as_deref(), &opts) {
                    Ok((sample, base)) => {
                        warm = Some(base);
                        out.push((k, Ok(sample)));
                    }
                    Err(e) => out.push((k, Err(e.to_string()))),
                }
            }
        }
        out
    };
    let results: Vec<_> = if strips.len() == 1 {
        strips.iter().flat_map(run_strip).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(strips.len())
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| strips.par_iter().flat_map_iter(run_strip).collect())
    };
    let mut samples: Vec<MetricSample> = coords.iter().map(|&c| MetricSample::failed(c)).collect();
    let mut failures = Vec::new();
    for (k, r) in results {
        match r {
            Ok(s) => samples[k] = s,
            Err(msg) => failures.push((coords[k], msg)),
        }
    }
    let total = samples.len();
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(Error::ScanFailed {
            failed: failures.len(),
            total,
        });
    }
    curvature_grid(&mut samples, steps)?;
    Ok(SurfaceScan {
        config: *config,
        spec,
        samples,
        failures,
    })
}

/// Local extremum of the curvature on the scan grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub coordinate: C64,
    pub curvature: f64,
}

impl SurfaceScan {
    pub fn steps(&self) -> usize {
        self.config.steps
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.config.radius / (self.config.steps - 1) as f64
    }

    fn curvature(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.curvature).collect()
    }

    /// Strict local maxima of C (8-neighbourhood) with C ≥ PEAK_FRACTION·max|C|.
    pub fn peaks(&self) -> Vec<Extremum> {
        local_extrema(&self.curvature(), self.steps(), 1.0)
            .into_iter()
            .map(|k| Extremum {
                coordinate: self.samples[k].coordinate,
                curvature: self.samples[k].curvature,
            })
            .collect()
    }

    /// Strict local minima of C with C ≤ −PEAK_FRACTION·max|C|.
    pub fn troughs(&self) -> Vec<Extremum> {
        local_extrema(&self.curvature(), self.steps(), -1.0)
            .into_iter()
            .map(|k| Extremum {
                coordinate: self.samples[k].coordinate,
                curvature: self.samples[k].curvature,
            })
            .collect()
    }

    /// Largest and smallest finite curvature values with their locations.
    pub fn extremal(&self) -> Option<(Extremum, Extremum)> {
        let finite = self.samples.iter().filter(|s| s.curvature.is_finite());
        let max = finite.clone().max_by(|a, b| a.curvature.total_cmp(&b.curvature))?;
        let min = finite.min_by(|a, b| a.curvature.total_cmp(&b.curvature))?;
        let ext = |s: &MetricSample| Extremum {
            coordinate: s.coordinate,
            curvature: s.curvature,
        };
        Some((ext(max), ext(min)))
    }

    /// Bilinear interpolation of C at a point of the coordinate square.
    pub fn curvature_at(&self, z: C64) -> Option<f64> {
        let n = self.steps();
        let s = self.spacing();
        let x = (z.re + self.config.radius) / s;
        let y = (z.im + self.config.radius) / s;
        if x < 0.0 || y < 0.0 || x > (n - 1) as f64 || y > (n - 1) as f64 {
            return None;
        }
        let i = (x.floor() as usize).min(n - 2);
        let j = (y.floor() as usize).min(n - 2);
        let (fx, fy) = (x - i as f64, y - j as f64);
        let c = |a: usize, b: usize| self.samples[a * n + b].curvature;
        let v = (1.0 - fx) * (1.0 - fy) * c(i, j)
            + fx * (1.0 - fy) * c(i + 1, j)
            + (1.0 - fx) * fy * c(i, j + 1)
            + fx * fy * c(i + 1, j + 1);
        v.is_finite().then_some(v)
    }

    pub fn max_resid_gauge(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.is_valid())
            .map(|s| s.resid_gauge)
            .fold(0.0, f64::max)
    }
}

/// Indices of strict 8-neighbourhood extrema of `sign`·values exceeding the threshold.
fn local_extrema(values: &[f64], steps: usize, sign: f64) -> Vec<usize> {
    let scale = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    for i in 1..steps - 1 {
        for j in 1..steps - 1 {
            let k = i * steps + j;
            let v = sign * values[k];
            if !v.is_finite() || v < PEAK_FRACTION * scale || v <= 0.0 {
                continue;
            }
            let mut strict = true;
            for di in -1isize..=1 {
                for dj in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let m = (i as isize + di) as usize * steps + (j as isize + dj) as usize;
                    let w = sign * values[m];
                    // an undefined neighbour does not block an interior peak
                    if w.is_finite() && w >= v {
                        strict = false;
                    }
                }
            }
            if strict {
                out.push(k);
            }
        }
    }
    out
}
