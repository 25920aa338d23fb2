//! Complex polynomials of low degree and their roots.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A polynomial in z with complex coefficients, stored highest degree first.
///
/// Leading zeros are stripped on construction, so `degree() == coeffs().len() - 1`.
/// Polynomials built with [`ComplexPoly::monic`] have leading coefficient exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        let first = coeffs.iter().position(|c| *c != C64::new(0.0, 0.0));
        match first {
            Some(i) => Ok(ComplexPoly {
                coeffs: coeffs[i..].to_vec(),
            }),
            None => Err(Error::InvalidArgument("zero polynomial".into())),
        }
    }

    /// Builds the polynomial and divides through by the leading coefficient.
    pub fn monic(coeffs: Vec<C64>) -> Result<Self> {
        let mut p = Self::new(coeffs)?;
        let lead = p.coeffs[0];
        for c in p.coeffs.iter_mut() {
            *c /= lead;
        }
        p.coeffs[0] = C64::new(1.0, 0.0);
        Ok(p)
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c]).expect("nonzero constant")
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = coeffs.clone();
            next.push(C64::new(0.0, 0.0));
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] -= r * c;
            }
            coeffs = next;
        }
        ComplexPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> ComplexPoly {
        let n = self.degree();
        if n == 0 {
            return ComplexPoly {
                coeffs: vec![C64::new(0.0, 0.0)],
            };
        }
        let coeffs = self.coeffs[..n]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (n - i) as f64)
            .collect();
        ComplexPoly { coeffs }
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ComplexPoly { coeffs }
    }

    pub fn scale(&self, s: C64) -> ComplexPoly {
        ComplexPoly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Synthetic division by (z − w): returns (quotient, remainder).
    pub fn div_linear(&self, w: C64) -> (ComplexPoly, C64) {
        let n = self.degree();
        if n == 0 {
            return (self.clone(), C64::new(0.0, 0.0));
        }
        let mut q = Vec::with_capacity(n);
        let mut acc = C64::new(0.0, 0.0);
        for &c in &self.coeffs[..n] {
            acc = acc * w + c;
            q.push(acc);
        }
        let rem = acc * w + self.coeffs[n];
        (ComplexPoly { coeffs: q }, rem)
    }

    /// All roots with multiplicity, sorted by real part then imaginary part.
    ///
    /// Degrees 1–3 use closed forms, with the cubic deflated by its
    /// largest-magnitude root and the remaining quadratic solved in the
    /// cancellation-free form. Higher degrees use Aberth–Ehrlich iteration.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let lead = self.coeffs[0];
        let c: Vec<C64> = self.coeffs.iter().map(|x| x / lead).collect();
        let mut roots = match self.degree() {
            0 => return Err(Error::UnsupportedDegree(0)),
            1 => vec![-c[1]],
            2 => quadratic_roots(c[1], c[2]).to_vec(),
            3 => cubic_roots(c[1], c[2], c[3]).to_vec(),
            _ => aberth(&c)?,
        };
        roots.sort_by(lex_order);
        Ok(roots)
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| match n - i {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                p => format!("({c})z^{p}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Lexicographic order on (re, im), with real parts compared after rounding
/// to 1e−9 so that roots differing only by roundoff in Re sort by Im.
pub fn lex_order(a: &C64, b: &C64) -> Ordering {
    let key = |x: f64| (x * 1e9).round();
    key(a.re)
        .total_cmp(&key(b.re))
        .then(a.im.total_cmp(&b.im))
}

/// Simultaneous root iteration for a monic polynomial (highest degree first).
fn aberth(c: &[C64]) -> Result<Vec<C64>> {
    let n = c.len() - 1;
    let eval = |z: C64| {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &a in c {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    // Cauchy bound on the root moduli
    let radius = 1.0 + c[1..].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut biggest: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = eval(z[k]);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[k] -= step;
            biggest = biggest.max(step.norm() / (1.0 + z[k].norm()));
        }
        if biggest < 1e-15 {
            return Ok(z);
        }
    }
    let residual = z.iter().map(|&r| eval(r).0.norm()).fold(0.0, f64::max);
    if residual <= 1e-10 * radius.powi(n as i32) {
        Ok(z)
    } else {
        Err(Error::NonConvergence {
            iterations: 500,
            residual,
            history: Vec::new(),
        })
    }
}

/// Roots of z² + b z + c.
pub fn quadratic_roots(b: C64, c: C64) -> [C64; 2] {
    let disc = (b * b - 4.0 * c).sqrt();
    // choose the sign that avoids cancellation in b ± disc
    let s = if (b.conj() * disc).re >= 0.0 { disc } else { -disc };
    let q = -0.5 * (b + s);
    if q == C64::new(0.0, 0.0) {
        // b = 0 and c = 0
        return [q, q];
    }
    [q, c / q]
}

/// Roots of z³ + b z² + c z + d.
pub fn cubic_roots(b: C64, c: C64, d: C64) -> [C64; 3] {
    let shift = b / 3.0;
    let p = c - b * shift;
    let q = 2.0 * shift * shift * shift - shift * c + d;

    let zero = C64::new(0.0, 0.0);
    let candidates: [C64; 3] = if p == zero && q == zero {
        [-shift; 3]
    } else {
        let disc = (0.25 * q * q + p * p * p / 27.0).sqrt();
        let u3a = -0.5 * q + disc;
        let u3b = -0.5 * q - disc;
        let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
        let u = u3.cbrt();
        let omega = C64::new(-0.5, 0.75f64.sqrt());
        let mut out = [zero; 3];
        let mut uk = u;
        for slot in out.iter_mut() {
            let y = if uk == zero { zero } else { uk - p / (3.0 * uk) };
            *slot = y - shift;
            uk *= omega;
        }
        out
    };

    // deflate by the largest root after polishing it on the original cubic
    let f = |z: C64| ((z + b) * z + c) * z + d;
    let df = |z: C64| (3.0 * z + 2.0 * b) * z + c;
    let mut big = candidates
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap();
    for _ in 0..3 {
        let deriv = df(big);
        if deriv.norm() <= 1e-12 * (1.0 + big.norm() * big.norm()) {
            break;
        }
        let step = f(big) / deriv;
        big -= step;
        if step.norm() <= 1e-16 * (1.0 + big.norm()) {
            break;
        }
    }
    if big == zero {
        return [zero; 3];
    }
    // z³ + bz² + cz + d = (z − big)(z² + pq z + qq)
    let pq = b + big;
    let qq = -d / big;
    let [r1, r2] = quadratic_roots(pq, qq);
    [big, r1, r2]
}

/// H(z) = z³ + a z − K.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cubic {
    pub a: f64,
    pub k: C64,
}

impl Cubic {
    pub fn new(a: f64, k: C64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be >= 0, got {a}")));
        }
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(Error::InvalidArgument("K must be finite".into()));
        }
        Ok(Cubic { a, k })
    }

    pub fn poly(&self) -> ComplexPoly {
        ComplexPoly {
            coeffs: vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(self.a, 0.0),
                -self.k,
            ],
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        (z * z + self.a) * z - self.k
    }

    pub fn roots(&self) -> Vec<C64> {
        self.poly().roots().expect("cubic")
    }

    /// −4a³ − 27K²; zero exactly when H has a repeated root.
    pub fn discriminant(&self) -> C64 {
        -4.0 * self.a.powi(3) - 27.0 * self.k * self.k
    }

    /// The values of K for which H has a double root, ±2(−a/3)^{3/2}.
    pub fn double_root_moduli(a: f64) -> [C64; 2] {
        let base = C64::new(-a / 3.0, 0.0).powf(1.5);
        [2.0 * base, -2.0 * base]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_reproduces(p: &ComplexPoly, roots: &[C64]) {
        let rebuilt = ComplexPoly::from_roots(roots);
        let lead = p.leading();
        let scale: f64 = p.coeffs().iter().map(|x| (x / lead).norm()).fold(1.0, f64::max);
        for (a, b) in p.coeffs().iter().zip(rebuilt.coeffs()) {
            assert!((a / lead - b).norm() <= 1e-12 * scale, "{p} vs {rebuilt}");
        }
    }

    #[test]
    fn cube_roots_of_unity() {
        let p = ComplexPoly::monic(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap();
        let r = p.roots().unwrap();
        let w = c(-0.5, 0.75f64.sqrt());
        let expected = [w.conj(), w, c(1., 0.)];
        for (a, b) in r.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
        assert_reproduces(&p, &r);
    }

    #[test]
    fn double_root_at_a3() {
        // z³ + 3z + 2i = (z − 2i)(z + i)²
        let h = Cubic::new(3.0, c(0., -2.)).unwrap();
        let r = h.roots();
        let mut double = 0;
        let mut single = 0;
        for z in &r {
            if (z - c(0., -1.)).norm() < 1e-7 {
                double += 1;
            }
            if (z - c(0., 2.)).norm() < 1e-12 {
                single += 1;
            }
        }
        assert_eq!((double, single), (2, 1), "{r:?}");
        assert_reproduces(&h.poly(), &r);
        assert!(h.discriminant().norm() < 1e-12);
    }

    #[test]
    fn double_root_moduli_formula() {
        let [k1, k2] = Cubic::double_root_moduli(3.0);
        let mut ks = [k1, k2];
        ks.sort_by(lex_order);
        assert!((ks[0] - c(0., -2.)).norm() < 1e-14);
        assert!((ks[1] - c(0., 2.)).norm() < 1e-14);
        for k in ks {
            assert!(Cubic::new(3.0, k).unwrap().discriminant().norm() < 1e-12);
        }
    }

    #[test]
    fn triple_root() {
        let h = Cubic::new(0.0, c(0., 0.)).unwrap();
        assert_eq!(h.roots(), vec![c(0., 0.); 3]);
    }

    #[test]
    fn unsupported_degrees() {
        let p0 = ComplexPoly::constant(c(2., 0.));
        assert!(matches!(p0.roots(), Err(Error::UnsupportedDegree(0))));
        // quartic z⁴ − 1
        let p4 = ComplexPoly::from_roots(&[c(1., 0.), c(-1., 0.), c(0., 1.), c(0., -1.)]);
        let r = p4.roots().unwrap();
        let expect = [c(-1., 0.), c(0., -1.), c(0., 1.), c(1., 0.)];
        for (a, b) in r.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-13, "{r:?}");
        }
    }

    #[test]
    fn synthetic_division() {
        // z³ + 3z − 2i = (z − i)(z² + iz + 2)
        let h = Cubic::new(3.0, c(0., 2.)).unwrap().poly();
        let (q, rem) = h.div_linear(c(0., 1.));
        assert!(rem.norm() < 1e-15);
        assert_eq!(q.coeffs(), &[c(1., 0.), c(0., 1.), c(2., 0.)]);
    }

    #[test]
    fn monic_normalization_and_stripping() {
        let p = ComplexPoly::monic(vec![c(0., 0.), c(0., 2.), c(4., 0.)]).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(p.leading(), c(1., 0.));
        assert!((p.coeffs()[1] - c(0., -2.)).norm() < 1e-15);
        assert!(ComplexPoly::new(vec![c(0., 0.)]).is_err());
    }

    #[test]
    fn roots_are_sorted() {
        let p = ComplexPoly::from_roots(&[c(2., 0.), c(-1., 3.), c(-1., -3.)]);
        let r = p.roots().unwrap();
        assert!(r.windows(2).all(|w| lex_order(&w[0], &w[1]) != Ordering::Greater));
    }

    proptest! {
        #[test]
        fn cubic_roots_reproduce_polynomial(a in 0.0..5.0f64, kr in -10.0..10.0f64, ki in -10.0..10.0f64) {
            let h = Cubic::new(a, c(kr, ki)).unwrap();
            let r = h.roots();
            assert_reproduces(&h.poly(), &r);
        }

        #[test]
        fn general_roots_reproduce(r0 in -3.0..3.0f64, r1 in -3.0..3.0f64, r2 in -3.0..3.0f64,
                                   i0 in -3.0..3.0f64, i1 in -3.0..3.0f64, i2 in -3.0..3.0f64,
                                   r3 in -3.0..3.0f64, i3 in -3.0..3.0f64) {
            let roots = [c(r0, i0), c(r1, i1), c(r2, i2), c(r3, i3)];
            for deg in 1..=4 {
                let p = ComplexPoly::from_roots(&roots[..deg]);
                let found = p.roots().unwrap();
                assert_reproduces(&p, &found);
            }
        }
    }
}
