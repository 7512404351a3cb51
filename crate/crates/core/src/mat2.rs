//! Minimal 2x2 complex matrix arithmetic.

use std::ops::{Mul, Sub};

use num_complex::Complex64;

use crate::lattice::Spinor;

/// A 2x2 complex matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(one, zero, zero, one)
    }

    pub fn diag(d0: Complex64, d1: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2::new(d0, zero, zero, d1)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[inline]
    pub fn apply(&self, s: Spinor) -> Spinor {
        let m = &self.0;
        Spinor::new(
            m[0][0] * s.up + m[0][1] * s.down,
            m[1][0] * s.up + m[1][1] * s.down,
        )
    }

    /// Largest singular value, from the closed-form top eigenvalue of the
    /// Hermitian matrix `A*A = ((p, q), (conj q, r))`:
    /// `(p + r)/2 + sqrt(((p - r)/2)^2 + |q|^2)`.
    pub fn op_norm(&self) -> f64 {
        let m = &self.0;
        let p = m[0][0].norm_sqr() + m[1][0].norm_sqr();
        let r = m[0][1].norm_sqr() + m[1][1].norm_sqr();
        let q = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
        let half_gap = 0.5 * (p - r);
        (0.5 * (p + r) + half_gap.hypot(q.norm())).sqrt()
    }

    /// `||A* A - I||` in operator norm.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).op_norm()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Brute-force sup over the unit sphere of C^2 as the operator-norm oracle.
    fn op_norm_brute(m: &Mat2) -> f64 {
        let mut best = 0.0f64;
        let n = 400;
        for i in 0..=n {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
            for j in 0..n {
                let phase = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let s = Spinor::new(c(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phase));
                best = best.max(m.apply(s).norm());
            }
        }
        best
    }

    #[test]
    fn op_norm_matches_sphere_search() {
        let m = Mat2::new(c(1.0, 0.5), c(-0.3, 2.0), c(0.0, 0.7), c(0.4, -1.1));
        let exact = m.op_norm();
        let brute = op_norm_brute(&m);
        assert!(exact >= brute - 1e-12);
        assert!((exact - brute).abs() < 1e-4, "{exact} vs {brute}");
    }

    #[test]
    fn op_norm_of_unitary_is_one() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = Mat2::new(c(h, 0.0), c(h, 0.0), c(-h, 0.0), c(h, 0.0));
        assert!((m.op_norm() - 1.0).abs() < 1e-15);
        assert!(m.unitarity_defect() < 1e-15);
    }

    #[test]
    fn phase_minus_identity_norm() {
        let theta = 1.0f64;
        let m = Mat2::identity().scale(Complex64::from_polar(1.0, theta)) - Mat2::identity();
        let expected = (Complex64::from_polar(1.0, theta) - 1.0).norm();
        assert!((m.op_norm() - expected).abs() < 1e-15);
    }
}
