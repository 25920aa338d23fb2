//! The ψ-gauge description of a Higgs pair: factorizations μ₊μ₋ = −H, the
//! boundary balance for ψ, and reconstruction of (Φ, A_z̄) from (μ±, ψ, α).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mat2::Mat2;
use crate::poly::{ComplexPoly, Cubic};

/// Which Γ-invariant component a factorization belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sheet {
    /// All lumps parallel: μ₊ = H, μ₋ = −1.
    Plus,
    /// One lump, at z = W, antiparallel to the rest: μ₋ = −(z − W).
    Minus(C64),
}

/// A split μ₊ μ₋ = −H.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    mu_plus: ComplexPoly,
    mu_minus: ComplexPoly,
    h: ComplexPoly,
    sheet: Sheet,
}

/// Relative tolerance for W being a zero of H.
const SHEET_TOL: f64 = 1e-10;

/// Splits H(z) = z³ + a z − K onto the requested sheet.
pub fn factorize(cubic: &Cubic, sheet: Sheet) -> Result<Factorization> {
    let h = cubic.poly();
    match sheet {
        Sheet::Plus => Ok(Factorization {
            mu_plus: h.clone(),
            mu_minus: ComplexPoly::constant(C64::new(-1.0, 0.0)),
            h,
            sheet,
        }),
        Sheet::Minus(w) => {
            let residual = cubic.eval(w).norm();
            if residual > SHEET_TOL * (1.0 + cubic.k.norm()) {
                return Err(Error::InvalidSheet { w, residual });
            }
            // the quotient is exact up to the (tolerated) remainder
            let (quotient, _) = h.div_linear(w);
            Ok(Factorization {
                mu_plus: quotient,
                mu_minus: minus_linear(w),
                h,
                sheet,
            })
        }
    }
}

fn minus_linear(w: C64) -> ComplexPoly {
    ComplexPoly::new(vec![C64::new(-1.0, 0.0), w]).expect("nonzero")
}

impl Factorization {
    /// A split of an arbitrary H of degree 1–3. μ₋ must be −1 or −(z − W);
    /// these are the forms reachable by the ψ-gauge with α = 0 on the sheets.
    pub fn from_split(mu_plus: ComplexPoly, mu_minus: ComplexPoly) -> Result<Self> {
        let h = mu_plus.mul(&mu_minus).scale(C64::new(-1.0, 0.0));
        let n = h.degree();
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDegree(n));
        }
        if (h.leading() - C64::new(1.0, 0.0)).norm() > 1e-14 {
            return Err(Error::InvalidArgument(format!(
                "-mu_+ mu_- must be monic, got leading coefficient {}",
                h.leading()
            )));
        }
        let c = mu_minus.coeffs();
        let sheet = match mu_minus.degree() {
            0 if c[0] == C64::new(-1.0, 0.0) => Sheet::Plus,
            1 if c[0] == C64::new(-1.0, 0.0) => Sheet::Minus(c[1]),
            _ => {
                return Err(Error::InvalidArgument(
                    "mu_- must be -1 or -(z - W)".into(),
                ))
            }
        };
        Ok(Factorization {
            mu_plus,
            mu_minus,
            h,
            sheet,
        })
    }

    pub fn mu_plus(&self) -> &ComplexPoly {
        &self.mu_plus
    }

    pub fn mu_minus(&self) -> &ComplexPoly {
        &self.mu_minus
    }

    /// H = −μ₊μ₋.
    pub fn h(&self) -> &ComplexPoly {
        &self.h
    }

    pub fn sheet(&self) -> Sheet {
        self.sheet
    }

    pub fn degree(&self) -> usize {
        self.h.degree()
    }

    /// Zeros of μ₊ and μ₋ together (the zeros of H).
    pub fn zeros(&self) -> Vec<C64> {
        let mut z = Vec::with_capacity(3);
        for p in [&self.mu_plus, &self.mu_minus] {
            if p.degree() > 0 {
                z.extend(p.roots().expect("degree <= 3"));
            }
        }
        z
    }

    /// (|μ₊(z)|², |μ₋(z)|²).
    pub fn mod_sq(&self, z: C64) -> (f64, f64) {
        (self.mu_plus.eval(z).norm_sqr(), self.mu_minus.eval(z).norm_sqr())
    }
}

/// The value of ψ balancing |μ₊|²e^ψ = |μ₋|²e^{−ψ} at z, i.e. log(|μ₋|/|μ₊|).
pub fn boundary_psi(fac: &Factorization, z: C64) -> Result<f64> {
    let p = fac.mu_plus.eval(z).norm();
    let m = fac.mu_minus.eval(z).norm();
    if p == 0.0 || m == 0.0 {
        return Err(Error::SingularBoundary(z));
    }
    Ok((m / p).ln())
}

/// Pointwise data of a ψ-gauge configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPointData {
    pub z: C64,
    pub psi: f64,
    pub alpha: C64,
}

/// |F| = ½ | |μ₊|²e^ψ − |μ₋|²e^{−ψ} |.
///
/// With this normalization the total ∫|F| of a Γ-invariant solution is nπ/2.
pub fn gauge_field_magnitude(data: &FieldPointData, fac: &Factorization) -> f64 {
    let (p, m) = fac.mod_sq(data.z);
    abs_f(p, m, data.psi)
}

pub(crate) fn abs_f(p: f64, m: f64, psi: f64) -> f64 {
    0.5 * (p * psi.exp() - m * (-psi).exp()).abs()
}

/// Φ and A_z̄ sampled on a grid.
#[derive(Clone, Debug)]
pub struct GaugeFields {
    pub spec: GridSpec,
    pub phi: Vec<Mat2>,
    pub a_zbar: Vec<Mat2>,
}

impl GaugeFields {
    /// A_z = −(A_z̄)*.
    pub fn a_z(&self) -> Vec<Mat2> {
        self.a_zbar.iter().map(|a| -a.adjoint()).collect()
    }
}

/// Φ = (0, μ₊e^{ψ/2}; μ₋e^{−ψ/2}, 0), A_z̄ = −¼(∂_z̄ψ)σ₃ + αΦ.
///
/// ∂_z̄ = ½(∂_x + i∂_y) uses centered differences in the interior and
/// second-order one-sided differences on the edge of the box.
pub fn reconstruct_fields(
    fac: &Factorization,
    spec: &GridSpec,
    psi: &[f64],
    alpha: &[C64],
) -> Result<GaugeFields> {
    let len = spec.len();
    if psi.len() != len || alpha.len() != len {
        return Err(Error::GridMismatch);
    }
    let n = spec.points();
    let mut phi = Vec::with_capacity(len);
    for (idx, z) in spec.points_iter().enumerate() {
        let half = 0.5 * psi[idx];
        phi.push(Mat2::off_diagonal(
            fac.mu_plus.eval(z) * half.exp(),
            fac.mu_minus.eval(z) * (-half).exp(),
        ));
    }
    let h = spec.spacing();
    let mut a_zbar = Vec::with_capacity(len);
    for i in 0..n {
        for j in 0..n {
            let dx = axis_derivative(|k| psi[spec.index(k, j)], i, n, h);
            let dy = axis_derivative(|k| psi[spec.index(i, k)], j, n, h);
            let dzbar = 0.5 * C64::new(dx, dy);
            let idx = spec.index(i, j);
            a_zbar.push(Mat2::SIGMA3.scale(-0.25 * dzbar) + phi[idx].scale(alpha[idx]));
        }
    }
    Ok(GaugeFields {
        spec: *spec,
        phi,
        a_zbar,
    })
}

fn axis_derivative(f: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if k == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

/// Real dimension of the moduli space for det Φ of degree n:
/// 2(n − 1) for odd n and 2(n − 2) for even n.
pub fn moduli_dimension(n: usize) -> Result<usize> {
    match n {
        0 => Err(Error::UnsupportedDegree(0)),
        n if n % 2 == 1 => Ok(2 * (n - 1)),
        n => Ok(2 * (n - 2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn product_identity_holds(fac: &Factorization, rng: &mut ChaCha8Rng) {
        for _ in 0..20 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let prod = fac.mu_plus.eval(z) * fac.mu_minus.eval(z);
            let hz = fac.h.eval(z);
            let scale = hz.norm().max(fac.mu_plus.eval(z).norm() * fac.mu_minus.eval(z).norm());
            assert!((prod + hz).norm() <= 1e-12 * scale.max(1e-300), "{prod} vs {hz}");
        }
    }

    #[test]
    fn minus_sheet_example() {
        // K = i³ + 3i = 2i with W = i
        let cubic = Cubic::new(3.0, c(0., 2.)).unwrap();
        let fac = factorize(&cubic, Sheet::Minus(c(0., 1.))).unwrap();
        assert_eq!(fac.mu_minus().coeffs(), &[c(-1., 0.), c(0., 1.)]);
        assert_eq!(fac.mu_plus().coeffs(), &[c(1., 0.), c(0., 1.), c(2., 0.)]);
        let roots = fac.mu_plus().roots().unwrap();
        assert!((roots[0] - c(0., -2.)).norm() < 1e-14);
        assert!((roots[1] - c(0., 1.)).norm() < 1e-14);
    }

    #[test]
    fn plus_sheet_example() {
        let cubic = Cubic::new(0.0, c(1., 0.)).unwrap();
        let fac = factorize(&cubic, Sheet::Plus).unwrap();
        assert_eq!(fac.mu_plus(), &cubic.poly());
        assert_eq!(fac.mu_minus().coeffs(), &[c(-1., 0.)]);
    }

    #[test]
    fn invalid_sheet() {
        let cubic = Cubic::new(3.0, c(0., 2.)).unwrap();
        assert!(matches!(
            factorize(&cubic, Sheet::Minus(c(0.5, 0.))),
            Err(Error::InvalidSheet { .. })
        ));
    }

    #[test]
    fn degree_two_split() {
        let z = ComplexPoly::new(vec![c(1., 0.), c(0., 0.)]).unwrap();
        let fac = Factorization::from_split(z.clone(), z.scale(c(-1., 0.))).unwrap();
        assert_eq!(fac.h().coeffs(), &[c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(fac.sheet(), Sheet::Minus(c(0., 0.)));
        let bad = Factorization::from_split(z.clone(), z.scale(c(-2., 0.)));
        assert!(bad.is_err());
    }

    #[test]
    fn boundary_psi_examples() {
        let plus = factorize(&Cubic::new(0.0, c(0., 0.)).unwrap(), Sheet::Plus).unwrap();
        let z = c(1.2, -2.1);
        let r = z.norm();
        assert!((boundary_psi(&plus, z).unwrap() + 3.0 * r.ln()).abs() < 1e-13);
        assert!(matches!(
            boundary_psi(&plus, c(0., 0.)),
            Err(Error::SingularBoundary(_))
        ));

        let one = ComplexPoly::new(vec![c(1., 0.), c(0., 0.)]).unwrap();
        let n1 = Factorization::from_split(one, ComplexPoly::constant(c(-1., 0.))).unwrap();
        assert!((boundary_psi(&n1, z).unwrap() + r.ln()).abs() < 1e-13);

        let z2 = ComplexPoly::new(vec![c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        let n2 = Factorization::from_split(z2, ComplexPoly::constant(c(-1., 0.))).unwrap();
        let far = c(0.0, 50.0);
        assert!((boundary_psi(&n2, far).unwrap() + 2.0 * 50f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn balanced_point_has_no_field() {
        let fac = factorize(&Cubic::new(1.5, c(0.3, -0.4)).unwrap(), Sheet::Plus).unwrap();
        for z in [c(0.7, 0.1), c(-2., 3.), c(4., -1.)] {
            let psi = boundary_psi(&fac, z).unwrap();
            let data = FieldPointData {
                z,
                psi,
                alpha: c(0., 0.),
            };
            assert!(gauge_field_magnitude(&data, &fac) <= 1e-13 * fac.h.eval(z).norm());
        }
    }

    #[test]
    fn moduli_dimensions() {
        assert!(moduli_dimension(0).is_err());
        let expected = [0, 0, 4, 4, 8, 8, 12, 12];
        for (n, e) in (1..=8).zip(expected) {
            assert_eq!(moduli_dimension(n).unwrap(), e, "n = {n}");
        }
    }

    #[test]
    fn degenerate_fields() {
        // ψ ≡ 0, α ≡ 0, μ± = ±z: Φ = (0, z; −z, 0) = z iσ₂ ~ z iσ₁, A_z̄ = 0
        let spec = GridSpec::new(2.0, 9).unwrap();
        let z = ComplexPoly::new(vec![c(1., 0.), c(0., 0.)]).unwrap();
        let fac = Factorization::from_split(z.clone(), z.scale(c(-1., 0.))).unwrap();
        let fields = reconstruct_fields(&fac, &spec, &vec![0.0; 81], &vec![c(0., 0.); 81]).unwrap();
        // the constant gauge transformation g = diag(e^{iπ/4}, e^{−iπ/4}) maps z iσ₂ to z iσ₁
        let g = Mat2::diagonal(c(0., 0.25 * std::f64::consts::PI).exp(), c(0., -0.25 * std::f64::consts::PI).exp());
        for (idx, zz) in spec.points_iter().enumerate() {
            assert_eq!(fields.a_zbar[idx], Mat2::ZERO);
            let rotated = g * fields.phi[idx] * g.adjoint();
            let target = Mat2::SIGMA1.scale(c(0., 1.) * zz);
            assert!((rotated - target).max_abs() < 1e-14);
        }
    }

    #[test]
    fn plus_sheet_off_diagonals() {
        let spec = GridSpec::new(1.0, 5).unwrap();
        let fac = factorize(&Cubic::new(0.0, c(0., 0.)).unwrap(), Sheet::Plus).unwrap();
        let psi: Vec<f64> = (0..25).map(|k| 0.1 * k as f64 - 1.0).collect();
        let fields = reconstruct_fields(&fac, &spec, &psi, &vec![c(0., 0.); 25]).unwrap();
        for (idx, z) in spec.points_iter().enumerate() {
            let m = fields.phi[idx].0;
            assert!((m[1] - z * z * z * (0.5 * psi[idx]).exp()).norm() < 1e-14);
            assert!((m[2] + (-0.5 * psi[idx]).exp()).norm() < 1e-14);
        }
        let a_z = fields.a_z();
        for (az, azb) in a_z.iter().zip(&fields.a_zbar) {
            assert!((*az + azb.adjoint()).max_abs() == 0.0);
        }
    }

    #[test]
    fn centered_derivative_of_linear_psi() {
        // ψ = 2x − y → ∂_z̄ψ = ½(2 − i), A_z̄ = −¼ ∂_z̄ψ σ₃ everywhere, including edges
        let spec = GridSpec::new(1.0, 7).unwrap();
        let psi: Vec<f64> = spec.points_iter().map(|z| 2.0 * z.re - z.im).collect();
        let fac = factorize(&Cubic::new(0.0, c(0., 0.)).unwrap(), Sheet::Plus).unwrap();
        let fields = reconstruct_fields(&fac, &spec, &psi, &vec![c(0., 0.); 49]).unwrap();
        let expect = Mat2::SIGMA3.scale(-0.25 * 0.5 * c(2., -1.));
        for a in &fields.a_zbar {
            assert!((*a - expect).max_abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn factorize_multiplies_back(a in 0.0..4.0f64, kr in -5.0..5.0f64, ki in -5.0..5.0f64,
                                     pick in 0usize..4, seed in 0u64..1000) {
            let cubic = Cubic::new(a, c(kr, ki)).unwrap();
            let roots = cubic.roots();
            let sheet = if pick == 3 { Sheet::Plus } else { Sheet::Minus(roots[pick]) };
            let fac = factorize(&cubic, sheet).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            product_identity_holds(&fac, &mut rng);

            // root multiset of μ₊ ∪ μ₋ equals that of H
            let mut zs = fac.zeros();
            let mut hs = roots.clone();
            zs.sort_by(crate::poly::lex_order);
            hs.sort_by(crate::poly::lex_order);
            // pair greedily; repeated roots are only determined to sqrt(eps)
            for z in &zs {
                let d = hs.iter().map(|h| (h - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-6 * (1.0 + z.norm()));
            }
        }

        #[test]
        fn det_phi_is_h(a in 0.0..3.0f64, kr in -3.0..3.0f64, ki in -3.0..3.0f64, seed in 0u64..100) {
            let cubic = Cubic::new(a, c(kr, ki)).unwrap();
            let spec = GridSpec::new(3.0, 9).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi: Vec<f64> = (0..81).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let w = cubic.roots()[0];
            for sheet in [Sheet::Plus, Sheet::Minus(w)] {
                let fac = factorize(&cubic, sheet).unwrap();
                let f = reconstruct_fields(&fac, &spec, &psi, &vec![c(0., 0.); 81]).unwrap();
                for (idx, z) in spec.points_iter().enumerate() {
                    let hz = cubic.eval(z);
                    prop_assert!((f.phi[idx].det() - hz).norm() <= 1e-12 * (1.0 + hz.norm()));
                }
            }
        }
    }
}
