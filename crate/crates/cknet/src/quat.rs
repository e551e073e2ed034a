//! Biquaternion algebra over the Pauli basis.
//!
//! A [`Biquat`] is a 2x2 complex matrix stored as four complex coefficients
//! over the basis `{1, -i s1, -i s2, -i s3}` of Pauli matrices. Real
//! coefficients recover the quaternions (with `i = -i s1`, `j = -i s2`,
//! `k = -i s3`), and R^3 embeds as the imaginary quaternions. Storing
//! coefficients instead of raw matrix entries makes "is this a quaternion"
//! a directly testable predicate.

use crate::error::{Error, Result};
use crate::tol::{DEFAULT_TOL, SINGULAR_EPS};
use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Neg, Sub};

/// A vector in R^3, identified with an imaginary quaternion where needed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction; `None` when shorter than `eps`.
    pub fn normalized(self, eps: f64) -> Option<Vec3> {
        let n = self.norm();
        (n > eps).then(|| self * (1.0 / n))
    }

    /// Largest coordinate difference to `other`.
    pub fn max_diff(self, other: Vec3) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Determinant of the 3x3 matrix with columns `a`, `b`, `c`.
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.dot(b.cross(c))
}

/// 2x2 complex matrix as coefficients over `{1, -i s1, -i s2, -i s3}`.
///
/// The matrix form is
/// `[[c0 - i c3, -i c1 - c2], [-i c1 + c2, c0 + i c3]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquat {
    pub c0: C64,
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
}

impl Biquat {
    pub const fn new(c0: C64, c1: C64, c2: C64, c3: C64) -> Self {
        Biquat { c0, c1, c2, c3 }
    }

    /// The identity matrix.
    pub fn one() -> Self {
        Biquat::new(C64::new(1.0, 0.0), C64::ZERO, C64::ZERO, C64::ZERO)
    }

    /// Quaternion unit i = -i s1.
    pub fn q_i() -> Self {
        Biquat::new(C64::ZERO, C64::new(1.0, 0.0), C64::ZERO, C64::ZERO)
    }

    /// Quaternion unit j = -i s2.
    pub fn q_j() -> Self {
        Biquat::new(C64::ZERO, C64::ZERO, C64::new(1.0, 0.0), C64::ZERO)
    }

    /// Quaternion unit k = -i s3.
    pub fn q_k() -> Self {
        Biquat::new(C64::ZERO, C64::ZERO, C64::ZERO, C64::new(1.0, 0.0))
    }

    /// Embed a real vector as an imaginary quaternion.
    pub fn from_vec3(v: Vec3) -> Self {
        Biquat::new(
            C64::ZERO,
            C64::new(v.x, 0.0),
            C64::new(v.y, 0.0),
            C64::new(v.z, 0.0),
        )
    }

    /// Matrix entries `[[a, b], [c, d]]` row major.
    pub fn to_matrix(self) -> [[C64; 2]; 2] {
        let i = C64::i();
        [
            [self.c0 - i * self.c3, -i * self.c1 - self.c2],
            [-i * self.c1 + self.c2, self.c0 + i * self.c3],
        ]
    }

    /// Inverse of [`Biquat::to_matrix`]; exact on the coefficient level.
    pub fn from_matrix(m: [[C64; 2]; 2]) -> Self {
        let i = C64::i();
        let half = C64::new(0.5, 0.0);
        Biquat::new(
            (m[0][0] + m[1][1]) * half,
            i * (m[0][1] + m[1][0]) * half,
            (m[1][0] - m[0][1]) * half,
            i * (m[0][0] - m[1][1]) * half,
        )
    }

    /// Matrix determinant; equals `c0^2 + c1^2 + c2^2 + c3^2`.
    pub fn det(self) -> C64 {
        self.c0 * self.c0 + self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3
    }

    /// Quaternionic conjugate (vector part negated).
    pub fn conj_q(self) -> Self {
        Biquat::new(self.c0, -self.c1, -self.c2, -self.c3)
    }

    /// Matrix inverse.
    pub fn inverse(self) -> Result<Self> {
        let d = self.det();
        if d.norm() < SINGULAR_EPS {
            return Err(Error::SingularMatrix(d.norm()));
        }
        Ok(self.conj_q().scale(d.inv()))
    }

    /// Scale every coefficient by a complex factor.
    pub fn scale(self, s: C64) -> Self {
        Biquat::new(self.c0 * s, self.c1 * s, self.c2 * s, self.c3 * s)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(self) -> f64 {
        self.c0
            .norm()
            .max(self.c1.norm())
            .max(self.c2.norm())
            .max(self.c3.norm())
    }

    /// Largest imaginary part over all four coefficients.
    pub fn max_imag(self) -> f64 {
        self.c0
            .im
            .abs()
            .max(self.c1.im.abs())
            .max(self.c2.im.abs())
            .max(self.c3.im.abs())
    }

    /// True when all coefficients are real within `tol`.
    pub fn is_quaternion(self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Vector part over `{-i s1, -i s2, -i s3}` as a real vector.
    ///
    /// The scalar (trace) coefficient is discarded. Fails when the vector
    /// coefficients carry imaginary residue beyond `tol`.
    pub fn trace_free_tol(self, tol: f64) -> Result<Vec3> {
        let residue = self.c1.im.abs().max(self.c2.im.abs()).max(self.c3.im.abs());
        if residue > tol {
            return Err(Error::NonRealImage(residue));
        }
        Ok(Vec3::new(self.c1.re, self.c2.re, self.c3.re))
    }

    /// [`Biquat::trace_free_tol`] at the default tolerance.
    pub fn trace_free(self) -> Result<Vec3> {
        self.trace_free_tol(DEFAULT_TOL)
    }
}

impl Mul for Biquat {
    type Output = Biquat;

    // Quaternion product with complex coefficients; agrees with the 2x2
    // matrix product by bilinearity and the Pauli relations.
    fn mul(self, o: Biquat) -> Biquat {
        Biquat::new(
            self.c0 * o.c0 - self.c1 * o.c1 - self.c2 * o.c2 - self.c3 * o.c3,
            self.c0 * o.c1 + self.c1 * o.c0 + self.c2 * o.c3 - self.c3 * o.c2,
            self.c0 * o.c2 - self.c1 * o.c3 + self.c2 * o.c0 + self.c3 * o.c1,
            self.c0 * o.c3 + self.c1 * o.c2 - self.c2 * o.c1 + self.c3 * o.c0,
        )
    }
}

impl Add for Biquat {
    type Output = Biquat;
    fn add(self, o: Biquat) -> Biquat {
        Biquat::new(
            self.c0 + o.c0,
            self.c1 + o.c1,
            self.c2 + o.c2,
            self.c3 + o.c3,
        )
    }
}

impl Sub for Biquat {
    type Output = Biquat;
    fn sub(self, o: Biquat) -> Biquat {
        Biquat::new(
            self.c0 - o.c0,
            self.c1 - o.c1,
            self.c2 - o.c2,
            self.c3 - o.c3,
        )
    }
}

impl Neg for Biquat {
    type Output = Biquat;
    fn neg(self) -> Biquat {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Normal vector read off a frame: the vector part of `phi^-1 (-i s3) phi`.
///
/// Invariant under rescaling of `phi`; unit length whenever `phi` is a
/// nonzero quaternion.
pub fn conjugate_normal(phi: Biquat) -> Result<Vec3> {
    let inv = phi.inverse()?;
    (inv * Biquat::q_k() * phi).trace_free()
}

/// Divide a frame-step matrix and its t-derivative by sqrt(det), keeping
/// the pair analytically consistent. The scalar this removes contributes a
/// multiple of the identity to `phi^-1 phi_dot`, which the trace-free
/// projection of the Sym formula discards.
pub fn unitize_step(m: Biquat, dm: Biquat) -> Result<(Biquat, Biquat)> {
    let d = m.det();
    if d.norm() < SINGULAR_EPS {
        return Err(Error::SingularMatrix(d.norm()));
    }
    // d/dt det = 2 sum c_i c_i'
    let dd = (m.c0 * dm.c0 + m.c1 * dm.c1 + m.c2 * dm.c2 + m.c3 * dm.c3) * 2.0;
    let r = d.sqrt();
    let mn = m.scale(r.inv());
    let dmn = dm.scale(r.inv()) - m.scale(dd / (d * r * 2.0));
    Ok((mn, dmn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn mat_mul(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
        let mut out = [[C64::ZERO; 2]; 2];
        for r in 0..2 {
            for cc in 0..2 {
                out[r][cc] = a[r][0] * b[0][cc] + a[r][1] * b[1][cc];
            }
        }
        out
    }

    fn mat_diff(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for cc in 0..2 {
                worst = worst.max((a[r][cc] - b[r][cc]).norm());
            }
        }
        worst
    }

    #[test]
    fn unit_products() {
        // i * j = k and cyclic
        let (i, j, k) = (Biquat::q_i(), Biquat::q_j(), Biquat::q_k());
        assert!(((i * j) - k).max_abs() < 1e-15);
        assert!(((j * k) - i).max_abs() < 1e-15);
        assert!(((k * i) - j).max_abs() < 1e-15);
        assert!(((i * i) + Biquat::one()).max_abs() < 1e-15);
    }

    #[test]
    fn identity_is_neutral() {
        let q = Biquat::new(c(0.3, 0.1), c(-1.2, 0.0), c(0.7, -0.4), c(0.0, 2.0));
        assert!(((Biquat::one() * q) - q).max_abs() < 1e-15);
        assert!(((q * Biquat::one()) - q).max_abs() < 1e-15);
    }

    #[test]
    fn trace_free_examples() {
        assert_eq!(Biquat::one().trace_free().unwrap(), Vec3::ZERO);
        assert_eq!(
            Biquat::q_k().trace_free().unwrap(),
            Vec3::new(0.0, 0.0, 1.0)
        );
        // scalar part discarded
        let q = Biquat::one().scale(c(5.0, 0.0)) + Biquat::q_i();
        assert_eq!(q.trace_free().unwrap(), Vec3::new(1.0, 0.0, 0.0));
        // imaginary residue rejected
        let bad = Biquat::new(C64::ZERO, c(0.0, 0.1), C64::ZERO, C64::ZERO);
        assert!(matches!(bad.trace_free(), Err(Error::NonRealImage(_))));
    }

    #[test]
    fn inverse_examples() {
        assert!((Biquat::one().inverse().unwrap() - Biquat::one()).max_abs() < 1e-15);
        // unit quaternion inverse is its conjugate
        let q = Biquat::new(c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0));
        assert!((q.inverse().unwrap() - q.conj_q()).max_abs() < 1e-15);
        let z = Biquat::new(C64::ZERO, C64::ZERO, C64::ZERO, C64::ZERO);
        assert!(matches!(z.inverse(), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn conjugate_normal_examples() {
        assert_eq!(
            conjugate_normal(Biquat::one()).unwrap(),
            Vec3::new(0.0, 0.0, 1.0)
        );
        // phi = -i s1 flips the normal: s1 s3 s1 = -s3
        let n = conjugate_normal(Biquat::q_i()).unwrap();
        assert!(n.max_diff(Vec3::new(0.0, 0.0, -1.0)) < 1e-15);
    }

    fn arb_c64() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
    }

    fn arb_biquat() -> impl Strategy<Value = Biquat> {
        (arb_c64(), arb_c64(), arb_c64(), arb_c64())
            .prop_map(|(c0, c1, c2, c3)| Biquat::new(c0, c1, c2, c3))
    }

    fn arb_unit_quat() -> impl Strategy<Value = Biquat> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_filter_map(
            "nonzero",
            |(a, b, d, e)| {
                let n = (a * a + b * b + d * d + e * e).sqrt();
                (n > 0.1).then(|| {
                    Biquat::new(c(a / n, 0.0), c(b / n, 0.0), c(d / n, 0.0), c(e / n, 0.0))
                })
            },
        )
    }

    proptest! {
        #[test]
        fn mul_matches_matrix_product(a in arb_biquat(), b in arb_biquat()) {
            let lhs = (a * b).to_matrix();
            let rhs = mat_mul(a.to_matrix(), b.to_matrix());
            prop_assert!(mat_diff(lhs, rhs) < 1e-12);
        }

        #[test]
        fn mul_is_associative(a in arb_biquat(), b in arb_biquat(), d in arb_biquat()) {
            prop_assert!((((a * b) * d) - (a * (b * d))).max_abs() < 1e-12);
        }

        #[test]
        fn det_is_multiplicative(a in arb_biquat(), b in arb_biquat()) {
            let lhs = (a * b).det();
            let rhs = a.det() * b.det();
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn matrix_round_trip(a in arb_biquat()) {
            let back = Biquat::from_matrix(a.to_matrix());
            prop_assert!((back - a).max_abs() < 1e-14);
        }

        #[test]
        fn inverse_residual(a in arb_biquat()) {
            if a.det().norm() > 1e-3 {
                let inv = a.inverse().unwrap();
                prop_assert!(((a * inv) - Biquat::one()).max_abs() < 1e-12);
            }
        }

        #[test]
        fn quaternion_det_nonnegative(q in arb_unit_quat()) {
            let d = q.det();
            prop_assert!(d.im.abs() < 1e-14 && d.re >= 0.0);
        }

        #[test]
        fn conjugate_normal_unit_and_scale_invariant(q in arb_unit_quat(), s in 0.1..3.0f64) {
            let n = conjugate_normal(q).unwrap();
            prop_assert!((n.norm() - 1.0).abs() < 1e-12);
            let n2 = conjugate_normal(q.scale(c(s, 0.0))).unwrap();
            prop_assert!(n.max_diff(n2) < 1e-12);
        }

        #[test]
        fn vec3_embedding_round_trip(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
            let v = Vec3::new(x, y, z);
            let q = Biquat::from_vec3(v);
            prop_assert!(q.c0.norm() == 0.0);
            prop_assert_eq!(q.trace_free().unwrap(), v);
        }
    }
}
