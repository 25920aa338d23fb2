//! Complex 2×2 matrices, the pointwise values of Φ and A.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Row-major complex 2×2 matrix `[m00, m01, m10, m11]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([ZERO; 4]);
    pub const IDENTITY: Mat2 = Mat2([ONE, ZERO, ZERO, ONE]);
    pub const SIGMA1: Mat2 = Mat2([ZERO, ONE, ONE, ZERO]);
    pub const SIGMA2: Mat2 = Mat2([ZERO, C64::new(0.0, -1.0), I, ZERO]);
    pub const SIGMA3: Mat2 = Mat2([ONE, ZERO, ZERO, C64::new(-1.0, 0.0)]);

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([m00, m01, m10, m11])
    }

    pub fn off_diagonal(upper: C64, lower: C64) -> Self {
        Mat2([ZERO, upper, lower, ZERO])
    }

    pub fn diagonal(d0: C64, d1: C64) -> Self {
        Mat2([d0, ZERO, ZERO, d1])
    }

    /// The su(2) element i(e₁σ₁ + e₂σ₂ + e₃σ₃).
    pub fn su2(e: [f64; 3]) -> Self {
        let [e1, e2, e3] = e;
        Mat2([
            C64::new(0.0, e3),
            C64::new(e2, e1),
            C64::new(-e2, e1),
            C64::new(0.0, -e3),
        ])
    }

    /// Real coordinates of `Re tr(i σ_k M)` for k = 1, 2, 3, so that
    /// `Re tr(Mat2::su2(e) M) = e · su2_dual(M)`.
    pub fn su2_dual(&self) -> [f64; 3] {
        let [m00, m01, m10, m11] = self.0;
        // tr(σ₁M) = m10 + m01, tr(σ₂M) = i(m01 − m10), tr(σ₃M) = m00 − m11
        let t1 = m10 + m01;
        let t2 = I * (m01 - m10);
        let t3 = m00 - m11;
        [-t1.im, -t2.im, -t3.im]
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> C64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    /// tr(M M*), the squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Re tr(M N*).
    pub fn inner(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2(self.0.map(|z| z * s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Mat2(self.0.map(|z| z * s))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl SubAssign for Mat2 {
    fn sub_assign(&mut self, o: Mat2) {
        *self = *self - o;
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2(self.0.map(|z| -z))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_dual_is_the_pairing() {
        let m = Mat2::new(
            C64::new(0.3, -1.2),
            C64::new(2.0, 0.5),
            C64::new(-0.7, 0.1),
            C64::new(1.1, 0.9),
        );
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let direct = (Mat2::su2(e) * m).trace().re;
            assert!((direct - m.su2_dual()[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn su2_is_anti_hermitian_traceless() {
        let x = Mat2::su2([0.4, -1.3, 2.2]);
        assert!((x + x.adjoint()).norm_sq() < 1e-28);
        assert!(x.trace().norm() < 1e-15);
        let s1 = Mat2::su2([1.0, 0.0, 0.0]);
        assert_eq!(s1, Mat2::SIGMA1.scale(I));
    }

    #[test]
    fn pauli_algebra() {
        let s12 = Mat2::SIGMA1 * Mat2::SIGMA2;
        assert_eq!(s12, Mat2::SIGMA3.scale(I));
        assert_eq!(Mat2::SIGMA3 * Mat2::SIGMA3, Mat2::IDENTITY);
    }
}
