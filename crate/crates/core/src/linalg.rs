//! Preconditioned conjugate gradients and a geometric multigrid
//! preconditioner for the screened Poisson operator −Δ_h + W on a square grid.

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG for a symmetric positive-definite operator.
///
/// Stops when ‖b − A x‖₂ ≤ rel_tol ‖b‖₂. `x` holds the initial guess on entry.
pub fn pcg<A, M>(
    mut apply: A,
    mut precond: M,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgReport
where
    A: FnMut(&[f64], &mut [f64]),
    M: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgReport {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while rel > rel_tol && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        rel = dot(&r, &r).sqrt() / bnorm;
    }
    CgReport {
        iterations: it,
        relative_residual: rel,
        converged: rel <= rel_tol,
    }
}

struct Level {
    n: usize,
    inv_h2: f64,
    weight: Vec<f64>,
    u: Vec<f64>,
    f: Vec<f64>,
    r: Vec<f64>,
}

impl Level {
    fn new(n: usize, h: f64, weight: Vec<f64>) -> Self {
        Level {
            n,
            inv_h2: 1.0 / (h * h),
            weight,
            u: vec![0.0; n * n],
            f: vec![0.0; n * n],
            r: vec![0.0; n * n],
        }
    }

    fn sweep_color(&mut self, color: usize) {
        let n = self.n;
        let c = self.inv_h2;
        for i in 1..n - 1 {
            let start = 1 + (i + 1 + color) % 2;
            let mut j = start;
            while j < n - 1 {
                let k = i * n + j;
                let nb = self.u[k - n] + self.u[k + n] + self.u[k - 1] + self.u[k + 1];
                self.u[k] = (self.f[k] + c * nb) / (4.0 * c + self.weight[k]);
                j += 2;
            }
        }
    }

    fn residual(&mut self) {
        let n = self.n;
        let c = self.inv_h2;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                let nb = self.u[k - n] + self.u[k + n] + self.u[k - 1] + self.u[k + 1];
                let au = c * (4.0 * self.u[k] - nb) + self.weight[k] * self.u[k];
                self.r[k] = self.f[k] - au;
            }
        }
    }
}

fn full_weighting(fine: &[f64], nf: usize, coarse: &mut [f64], nc: usize) {
    for ci in 1..nc - 1 {
        for cj in 1..nc - 1 {
            let k = 2 * ci * nf + 2 * cj;
            let edge = fine[k - nf] + fine[k + nf] + fine[k - 1] + fine[k + 1];
            let corner = fine[k - nf - 1] + fine[k - nf + 1] + fine[k + nf - 1] + fine[k + nf + 1];
            coarse[ci * nc + cj] = (4.0 * fine[k] + 2.0 * edge + corner) / 16.0;
        }
    }
}

/// Multigrid V(2,2) cycle for (−Δ_h + W) u = f with u = 0 on the edge of the box.
///
/// Red-black Gauss–Seidel smoothing is applied in opposite color orders before
/// and after the coarse correction and restriction is ¼ of the transpose of
/// bilinear prolongation, so one cycle is a symmetric positive-definite
/// preconditioner for CG. Grids coarsen while (n − 1) is even; the coarsest
/// level is solved exactly when it has a single unknown and by symmetric
/// Gauss–Seidel sweeps otherwise.
pub struct ScreenedPoisson {
    levels: Vec<Level>,
}

const SMOOTH_STEPS: usize = 2;
const COARSE_SWEEPS: usize = 40;

impl ScreenedPoisson {
    /// `weight` holds W ≥ 0 at every node of the n×n grid with spacing h.
    pub fn new(n: usize, h: f64, weight: Vec<f64>) -> Self {
        assert_eq!(weight.len(), n * n);
        let mut levels = vec![Level::new(n, h, weight)];
        loop {
            let last = levels.last().unwrap();
            if last.n <= 3 || (last.n - 1) % 2 != 0 {
                break;
            }
            let nc = (last.n - 1) / 2 + 1;
            let mut wc = vec![0.0; nc * nc];
            full_weighting(&last.weight, last.n, &mut wc, nc);
            let hc = 1.0 / last.inv_h2.sqrt() * 2.0;
            levels.push(Level::new(nc, hc, wc));
        }
        ScreenedPoisson { levels }
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// out = (−Δ_h + W) u on interior nodes, 0 on the edge.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let lv = &self.levels[0];
        let n = lv.n;
        let c = lv.inv_h2;
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                let nb = u[k - n] + u[k + n] + u[k - 1] + u[k + 1];
                out[k] = c * (4.0 * u[k] - nb) + lv.weight[k] * u[k];
            }
        }
    }

    /// z ≈ (−Δ_h + W)⁻¹ r by one V-cycle from a zero initial guess.
    pub fn precondition(&mut self, r: &[f64], z: &mut [f64]) {
        let n = self.levels[0].n;
        {
            let top = &mut self.levels[0];
            top.f.copy_from_slice(r);
            for i in 0..n {
                for j in 0..n {
                    if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                        top.f[i * n + j] = 0.0;
                    }
                }
            }
        }
        self.cycle(0);
        z.copy_from_slice(&self.levels[0].u);
    }

    fn cycle(&mut self, l: usize) {
        let last = l + 1 == self.levels.len();
        let lv = &mut self.levels[l];
        lv.u.iter_mut().for_each(|v| *v = 0.0);
        if last {
            if lv.n == 3 {
                let k = 4;
                lv.u[k] = lv.f[k] / (4.0 * lv.inv_h2 + lv.weight[k]);
            } else {
                for _ in 0..COARSE_SWEEPS {
                    lv.sweep_color(0);
                    lv.sweep_color(1);
                }
                for _ in 0..COARSE_SWEEPS {
                    lv.sweep_color(1);
                    lv.sweep_color(0);
                }
            }
            return;
        }
        for _ in 0..SMOOTH_STEPS {
            lv.sweep_color(0);
            lv.sweep_color(1);
        }
        lv.residual();
        let nf = lv.n;
        let (fine, coarse) = self.levels.split_at_mut(l + 1);
        let (fine, coarse) = (&mut fine[l], &mut coarse[0]);
        let nc = coarse.n;
        coarse.f.iter_mut().for_each(|v| *v = 0.0);
        full_weighting(&fine.r, nf, &mut coarse.f, nc);
        self.cycle(l + 1);
        let (fine, coarse) = self.levels.split_at_mut(l + 1);
        let (fine, coarse) = (&mut fine[l], &coarse[0]);
        // bilinear prolongation of the coarse correction
        for i in 1..nf - 1 {
            for j in 1..nf - 1 {
                let (ci, cj) = (i / 2, j / 2);
                let v = |a: usize, b: usize| coarse.u[a * nc + b];
                let corr = match (i % 2, j % 2) {
                    (0, 0) => v(ci, cj),
                    (1, 0) => 0.5 * (v(ci, cj) + v(ci + 1, cj)),
                    (0, 1) => 0.5 * (v(ci, cj) + v(ci, cj + 1)),
                    _ => 0.25 * (v(ci, cj) + v(ci + 1, cj) + v(ci, cj + 1) + v(ci + 1, cj + 1)),
                };
                fine.u[i * nf + j] += corr;
            }
        }
        let lv = &mut self.levels[l];
        for _ in 0..SMOOTH_STEPS {
            lv.sweep_color(1);
            lv.sweep_color(0);
        }
    }
}

/// Solves the tridiagonal system lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
