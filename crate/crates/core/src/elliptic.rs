//! The Γ-invariant field equation Δψ = 2(|μ₊|²e^ψ − |μ₋|²e^{−ψ}) on a
//! truncated square with Dirichlet data ψ = log|μ₋/μ₊|.
//!
//! Newton steps solve (−Δ_h + W) δ = f with W = 2(|μ₊|²e^ψ + |μ₋|²e^{−ψ}) > 0,
//! by conjugate gradients preconditioned with one multigrid V-cycle.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::linalg::{pcg, ScreenedPoisson};
use crate::model::{abs_f, boundary_psi, reconstruct_fields, Factorization, GaugeFields};
use crate::C64;

#[derive(Clone, Debug)]
pub struct Field2D {
    pub spec: GridSpec,
    pub fac: Factorization,
    /// ψ at every node, stored as in [`GridSpec::index`].
    pub psi: Vec<f64>,
    pub residual_sup: f64,
    pub newton_iters: usize,
    /// Interior sup residual before the first and after every Newton step.
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub cg_rel_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 30,
            cg_rel_tol: 1e-12,
            cg_max_iter: 500,
        }
    }
}

/// |μ₊|² and |μ₋|² at every node.
pub fn coefficients(fac: &Factorization, spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    spec.points_iter().map(|z| fac.mod_sq(z)).unzip()
}

/// ψ₀ = ½ log((|μ₋|² + h²)/(|μ₊|² + h²)) inside, exact boundary data on the edge.
pub fn initial_guess(fac: &Factorization, spec: &GridSpec) -> Result<Vec<f64>> {
    let h2 = spec.spacing().powi(2);
    let (p, m) = coefficients(fac, spec);
    let mut psi: Vec<f64> = p
        .iter()
        .zip(&m)
        .map(|(p, m)| 0.5 * ((m + h2) / (p + h2)).ln())
        .collect();
    set_boundary(fac, spec, &mut psi)?;
    Ok(psi)
}

fn set_boundary(fac: &Factorization, spec: &GridSpec, psi: &mut [f64]) -> Result<()> {
    let n = spec.points();
    for k in 0..n {
        for (i, j) in [(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
            psi[spec.index(i, j)] = boundary_psi(fac, spec.point(i, j))?;
        }
    }
    Ok(())
}

fn residual_into(spec: &GridSpec, p: &[f64], m: &[f64], psi: &[f64], out: &mut [f64]) {
    let n = spec.points();
    let inv_h2 = spec.spacing().powi(-2);
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let k = i * n + j;
            let lap = (psi[k - n] + psi[k + n] + psi[k - 1] + psi[k + 1] - 4.0 * psi[k]) * inv_h2;
            out[k] = lap - 2.0 * (p[k] * psi[k].exp() - m[k] * (-psi[k]).exp());
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Δ_h ψ − 2(|μ₊|²e^ψ − |μ₋|²e^{−ψ}) at interior nodes, 0 on the edge.
pub fn residual_grid(fac: &Factorization, spec: &GridSpec, psi: &[f64]) -> Result<Vec<f64>> {
    if psi.len() != spec.len() {
        return Err(Error::GridMismatch);
    }
    let (p, m) = coefficients(fac, spec);
    let mut out = vec![0.0; psi.len()];
    residual_into(spec, &p, &m, psi, &mut out);
    Ok(out)
}

/// Sup of the interior residual of the stored ψ.
pub fn residual(field: &Field2D) -> f64 {
    residual_grid(&field.fac, &field.spec, &field.psi)
        .map(|r| sup(&r))
        .unwrap_or(f64::INFINITY)
}

/// Jacobian action Δ_h δψ − 2(|μ₊|²e^ψ + |μ₋|²e^{−ψ}) δψ at interior nodes.
///
/// Symmetric with respect to the plain dot product on grids vanishing on the edge.
pub fn linearized_apply(field: &Field2D, delta_psi: &[f64]) -> Result<Vec<f64>> {
    let spec = &field.spec;
    if delta_psi.len() != spec.len() {
        return Err(Error::GridMismatch);
    }
    let n = spec.points();
    let inv_h2 = spec.spacing().powi(-2);
    let (p, m) = coefficients(&field.fac, spec);
    let psi = &field.psi;
    let u = delta_psi;
    let mut out = vec![0.0; u.len()];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let k = i * n + j;
            let lap = (u[k - n] + u[k + n] + u[k - 1] + u[k + 1] - 4.0 * u[k]) * inv_h2;
            let w = 2.0 * (p[k] * psi[k].exp() + m[k] * (-psi[k]).exp());
            out[k] = lap - w * u[k];
        }
    }
    Ok(out)
}

pub fn solve_psi(fac: &Factorization, spec: &GridSpec, initial: Option<&Field2D>) -> Result<Field2D> {
    solve_psi_with(fac, spec, initial, &SolveOptions::default())
}

/// Damped Newton for ψ, warm-started from `initial` when given.
pub fn solve_psi_with(
    fac: &Factorization,
    spec: &GridSpec,
    initial: Option<&Field2D>,
    opts: &SolveOptions,
) -> Result<Field2D> {
    spec.check_margin(&fac.zeros())?;
    let mut psi = match initial {
        Some(f) if f.spec != *spec => return Err(Error::GridMismatch),
        Some(f) => {
            let mut psi = f.psi.clone();
            set_boundary(fac, spec, &mut psi)?;
            psi
        }
        None => initial_guess(fac, spec)?,
    };
    let n = spec.points();
    let h = spec.spacing();
    let inv_h2 = 1.0 / (h * h);
    let (p, m) = coefficients(fac, spec);

    let mut f = vec![0.0; psi.len()];
    residual_into(spec, &p, &m, &psi, &mut f);
    let mut res = sup(&f);
    let mut history = vec![res];
    let mut iters = 0;
    let mut trial = psi.clone();
    let mut ft = f.clone();
    while res > opts.tol {
        if iters == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: iters,
                residual: res,
                history,
            });
        }
        let weight: Vec<f64> = p
            .iter()
            .zip(&m)
            .zip(&psi)
            .map(|((p, m), s)| 2.0 * (p * s.exp() + m * (-s).exp()))
            .collect();
        let mut mg = ScreenedPoisson::new(n, h, weight.clone());
        let apply = |u: &[f64], out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    let k = i * n + j;
                    let nb = u[k - n] + u[k + n] + u[k - 1] + u[k + 1];
                    out[k] = inv_h2 * (4.0 * u[k] - nb) + weight[k] * u[k];
                }
            }
        };
        let mut step = vec![0.0; psi.len()];
        pcg(
            apply,
            |r, z| mg.precondition(r, z),
            &f,
            &mut step,
            opts.cg_rel_tol,
            opts.cg_max_iter,
        );

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for ((t, s), d) in trial.iter_mut().zip(&psi).zip(&step) {
                *t = s + lambda * d;
            }
            residual_into(spec, &p, &m, &trial, &mut ft);
            let rt = sup(&ft);
            if rt < res {
                std::mem::swap(&mut psi, &mut trial);
                std::mem::swap(&mut f, &mut ft);
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
    Ok(Field2D {
        spec: *spec,
        fac: fac.clone(),
        psi,
        residual_sup: res,
        newton_iters: iters,
        history,
    })
}

impl Field2D {
    pub fn psi_at(&self, i: usize, j: usize) -> f64 {
        self.psi[self.spec.index(i, j)]
    }

    /// Φ and A_z̄ of the solution (α = 0).
    pub fn gauge_fields(&self) -> GaugeFields {
        let alpha = vec![C64::new(0.0, 0.0); self.psi.len()];
        reconstruct_fields(&self.fac, &self.spec, &self.psi, &alpha)
            .expect("field and grid sizes agree by construction")
    }

    /// |F| at every node.
    pub fn abs_f(&self) -> Vec<f64> {
        let (p, m) = coefficients(&self.fac, &self.spec);
        (0..self.psi.len()).map(|k| abs_f(p[k], m[k], self.psi[k])).collect()
    }

    fn integrate(&self, values: &[f64]) -> f64 {
        let n = self.spec.points();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.spec.trapezoid_weight(i, j) * values[self.spec.index(i, j)];
            }
        }
        total
    }

    /// ∫|F| d²x over the box by the trapezoidal rule.
    pub fn flux(&self) -> f64 {
        self.integrate(&self.abs_f())
    }

    /// ∫ ½(|μ₊|²e^ψ − |μ₋|²e^{−ψ}) d²x, which Green's theorem fixes at
    /// −(deg μ₊ − deg μ₋)π/2. Equals −∫|F| when F has a single sign.
    pub fn signed_flux(&self) -> f64 {
        let (p, m) = coefficients(&self.fac, &self.spec);
        let f: Vec<f64> = (0..self.psi.len())
            .map(|k| 0.5 * (p[k] * self.psi[k].exp() - m[k] * (-self.psi[k]).exp()))
            .collect();
        self.integrate(&f)
    }
}
