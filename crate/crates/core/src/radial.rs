//! Rotationally-symmetric solutions: the n = 1 lump (a Painlevé-III
//! transcendent in disguise) and the n = 2 family with α = iB/M₋.
//!
//! Both reduce to ψ″ + ψ′/r = S(r, ψ) on [0, R] with ψ′(0) = 0 and
//! ψ(R) = −n log R, where
//!
//! * n = 1: S = 2(r²e^ψ − e^{−ψ})
//! * n = 2: S = 2[1 + 4B²/M₋²](r⁴e^ψ − e^{−ψ}), M₋ = r²e^{ψ/2} + e^{−ψ/2}.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub n: u32,
    pub b: f64,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub converged: bool,
    /// Sup norm of the discrete residual multiplied by h².
    pub residual_sup: f64,
    pub newton_iters: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct RadialOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            tol: 1e-12,
            max_iter: 60,
            max_halvings: 30,
        }
    }
}

pub const MIN_RADIUS: f64 = 10.0;
pub const MIN_POINTS: usize = 400;

fn validate(n: u32, b: f64, r_max: f64, points: usize) -> Result<()> {
    if n != 1 && n != 2 {
        return Err(Error::InvalidArgument(format!("n must be 1 or 2, got {n}")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("B must be finite and >= 0, got {b}")));
    }
    if n == 1 && b != 0.0 {
        return Err(Error::InvalidArgument(
            "B must be 0 for n = 1: odd n forces Gamma-invariance".into(),
        ));
    }
    if !(r_max >= MIN_RADIUS) {
        return Err(Error::InvalidArgument(format!("R must be >= {MIN_RADIUS}, got {r_max}")));
    }
    if points < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_POINTS} grid points, got {points}"
        )));
    }
    Ok(())
}

/// Source term S(r, ψ) and ∂S/∂ψ.
fn source(n: u32, b: f64, r: f64, psi: f64) -> (f64, f64) {
    let ep = psi.exp();
    let em = (-psi).exp();
    let r2n = r.powi(2 * n as i32);
    let d = r2n * ep - em;
    let dd = r2n * ep + em;
    if n == 1 || b == 0.0 {
        return (2.0 * d, 2.0 * dd);
    }
    let eh = (0.5 * psi).exp();
    let m = r * r * eh + 1.0 / eh;
    let dm = 0.5 * (r * r * eh - 1.0 / eh);
    let g = 1.0 + 4.0 * b * b / (m * m);
    let dg = -8.0 * b * b / (m * m * m) * dm;
    (2.0 * g * d, 2.0 * (dg * d + g * dd))
}

struct Problem {
    n: u32,
    b: f64,
    r: Vec<f64>,
    h: f64,
}

impl Problem {
    /// Residual of the h²-scaled equations at the unknown nodes 0..N−2.
    fn residual(&self, psi: &[f64]) -> Vec<f64> {
        let m = psi.len() - 1;
        let h = self.h;
        let mut f = vec![0.0; m];
        f[0] = 4.0 * (psi[1] - psi[0]) - h * h * source(self.n, self.b, 0.0, psi[0]).0;
        for i in 1..m {
            let r = self.r[i];
            let lap = psi[i + 1] - 2.0 * psi[i] + psi[i - 1] + h * (psi[i + 1] - psi[i - 1]) / (2.0 * r);
            f[i] = lap - h * h * source(self.n, self.b, r, psi[i]).0;
        }
        f
    }

    fn newton_step(&self, psi: &[f64], f: &[f64]) -> Vec<f64> {
        let m = psi.len() - 1;
        let h = self.h;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        diag[0] = -4.0 - h * h * source(self.n, self.b, 0.0, psi[0]).1;
        upper[0] = 4.0;
        for i in 1..m {
            let r = self.r[i];
            lower[i] = 1.0 - h / (2.0 * r);
            upper[i] = if i + 1 < m { 1.0 + h / (2.0 * r) } else { 0.0 };
            diag[i] = -2.0 - h * h * source(self.n, self.b, r, psi[i]).1;
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        solve_tridiagonal(&lower, &diag, &upper, &rhs)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the radial boundary-value problem on a uniform grid of `points` nodes on [0, R].
pub fn solve_radial(n: u32, b: f64, r_max: f64, points: usize) -> Result<RadialProfile> {
    solve_radial_from(n, b, r_max, points, None, &RadialOptions::default())
}

/// As [`solve_radial`], optionally seeded with ψ values on the same grid.
pub fn solve_radial_from(
    n: u32,
    b: f64,
    r_max: f64,
    points: usize,
    initial: Option<&[f64]>,
    opts: &RadialOptions,
) -> Result<RadialProfile> {
    validate(n, b, r_max, points)?;
    let h = r_max / (points - 1) as f64;
    let r: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();
    let mut psi: Vec<f64> = match initial {
        Some(p) if p.len() == points => p.to_vec(),
        Some(_) => return Err(Error::GridMismatch),
        None => r.iter().map(|&x| -0.5 * n as f64 * (x * x + 1.0).ln()).collect(),
    };
    psi[points - 1] = -(n as f64) * r_max.ln();
    let problem = Problem { n, b, r, h };

    let mut f = problem.residual(&psi);
    let mut res = sup(&f);
    let mut history = vec![res];
    let mut iters = 0;
    while res > opts.tol {
        if iters == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: iters,
                residual: res,
                history,
            });
        }
        let step = problem.newton_step(&psi, &f);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = psi.clone();
            for (t, s) in trial.iter_mut().zip(&step) {
                *t += lambda * s;
            }
            let ft = problem.residual(&trial);
            let rt = sup(&ft);
            if rt < res {
                psi = trial;
                f = ft;
                res = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iters += 1;
        history.push(res);
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: iters,
                residual: res,
                history,
            });
        }
    }
    Ok(RadialProfile {
        n,
        b,
        r: problem.r,
        psi,
        converged: true,
        residual_sup: res,
        newton_iters: iters,
    })
}

impl RadialProfile {
    pub fn spacing(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    /// ψ′(r): centered differences, 0 at the origin, one-sided at R.
    pub fn dpsi_dr(&self) -> Vec<f64> {
        let n = self.psi.len();
        let h = self.spacing();
        let p = &self.psi;
        (0..n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else if i == n - 1 {
                    (3.0 * p[n - 1] - 4.0 * p[n - 2] + p[n - 3]) / (2.0 * h)
                } else {
                    (p[i + 1] - p[i - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// |F|(r) = ½|r^{2n}e^ψ − e^{−ψ}|.
    pub fn abs_f(&self) -> Vec<f64> {
        self.r
            .iter()
            .zip(&self.psi)
            .map(|(&r, &p)| 0.5 * (r.powi(2 * self.n as i32) * p.exp() - (-p).exp()).abs())
            .collect()
    }
}

/// Composite Simpson rule on uniformly spaced samples (3/8 rule on the last
/// three intervals when the interval count is odd).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    if m == 1 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let (even_end, tail) = if m.is_multiple_of(2) { (m, 0.0) } else {
        let k = m - 3;
        let v = &values[k..];
        (k, 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]))
    };
    let mut s = values[0] + values[even_end];
    for (i, v) in values.iter().enumerate().take(even_end).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0 + tail
}

/// Total ∫|F| d²x = 2π ∫₀^R |F| r dr.
pub fn flux(profile: &RadialProfile) -> Result<f64> {
    if !profile.converged {
        return Err(Error::InvalidArgument("profile has not converged".into()));
    }
    let integrand: Vec<f64> = profile
        .abs_f()
        .iter()
        .zip(&profile.r)
        .map(|(f, r)| f * r)
        .collect();
    Ok(2.0 * std::f64::consts::PI * simpson(&integrand, profile.spacing()))
}

/// Painlevé-III check of an n = 1 profile.
#[derive(Clone, Copy, Debug)]
pub struct PainleveCheck {
    /// sup |h″ − h′²/h + h′/t + 4/(9h) − 4h³/9| over the sampled t range.
    pub residual_sup: f64,
    /// |h(t_max) − 1| at the outermost sample.
    pub tail_error: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Smallest t = r^{3/2} at which the Painlevé residual is sampled.
pub const PAINLEVE_T_MIN: f64 = 0.5;

/// Transforms ψ(r) to h(t) = e^{−ψ/2} t^{−1/3} with t = r^{3/2} and evaluates
/// the Painlevé-III residual with centered differences on the r grid.
pub fn painleve_residual(profile: &RadialProfile) -> Result<PainleveCheck> {
    if profile.n != 1 {
        return Err(Error::InvalidArgument("Painleve check applies to n = 1".into()));
    }
    let dr = profile.spacing();
    let hval: Vec<f64> = profile
        .r
        .iter()
        .zip(&profile.psi)
        .map(|(&r, &p)| (-0.5 * p).exp() / r.sqrt())
        .collect();
    let n = hval.len();
    let mut sup_res: f64 = 0.0;
    let mut t_min = f64::INFINITY;
    let mut t_max: f64 = 0.0;
    let mut tail = 0.0;
    for i in 1..n - 1 {
        let r = profile.r[i];
        let t = r.powf(1.5);
        if t < PAINLEVE_T_MIN {
            continue;
        }
        let h = hval[i];
        let h_r = (hval[i + 1] - hval[i - 1]) / (2.0 * dr);
        let h_rr = (hval[i + 1] - 2.0 * h + hval[i - 1]) / (dr * dr);
        let t_r = 1.5 * r.sqrt();
        let t_rr = 0.75 / r.sqrt();
        let h_t = h_r / t_r;
        let h_tt = (h_rr - h_r * t_rr / t_r) / (t_r * t_r);
        let res = h_tt - h_t * h_t / h + h_t / t + 4.0 / (9.0 * h) - 4.0 * h.powi(3) / 9.0;
        sup_res = sup_res.max(res.abs());
        t_min = t_min.min(t);
        t_max = t;
        tail = (h - 1.0).abs();
    }
    Ok(PainleveCheck {
        residual_sup: sup_res,
        tail_error: tail,
        t_min,
        t_max,
    })
}

/// One point of the flux curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxPoint {
    pub b: f64,
    pub flux_over_pi: f64,
}

/// π⁻¹∫|F| for the n = 2 family over ascending B values starting at 0.
///
/// With `continuation` each solve is seeded with the previous ψ and the scan
/// runs sequentially; without it the solves are independent and run in parallel.
pub fn scan_b(
    b_values: &[f64],
    r_max: f64,
    points: usize,
    continuation: bool,
) -> Result<Vec<FluxPoint>> {
    if b_values.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("B values must start at 0".into()));
    }
    if b_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("B values must be strictly ascending".into()));
    }
    let opts = RadialOptions::default();
    let point = |b: f64, seed: Option<&[f64]>| -> Result<(FluxPoint, Vec<f64>)> {
        let wrap = |e: Error| Error::AtB { b, source: Box::new(e) };
        let prof = solve_radial_from(2, b, r_max, points, seed, &opts).map_err(wrap)?;
        let f = flux(&prof).map_err(wrap)?;
        Ok((
            FluxPoint {
                b,
                flux_over_pi: f / std::f64::consts::PI,
            },
            prof.psi,
        ))
    };
    if continuation {
        let mut out = Vec::with_capacity(b_values.len());
        let mut seed: Option<Vec<f64>> = None;
        for &b in b_values {
            let (fp, psi) = point(b, seed.as_deref())?;
            out.push(fp);
            seed = Some(psi);
        }
        Ok(out)
    } else {
        b_values
            .par_iter()
            .map(|&b| point(b, None).map(|(fp, _)| fp))
            .collect()
    }
}
