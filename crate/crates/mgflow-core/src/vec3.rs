//! Fixed-size ambient vector used for points and tangent vectors.
//!
//! Intrinsic 2-D surfaces (plane, flat torus) store (φ, z) in `x`, `y` with
//! `z = 0`; ambient surfaces (sphere, hyperboloid) use all three components.
//! Euclidean and Minkowski products are both provided; which one is the
//! *metric* is decided by the surface (see [`crate::surfaces::metric_dot`]).

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// A vector (or point) in ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline(always)]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Intrinsic 2-D point/vector: (φ, z) stored with a zero third component.
    #[inline(always)]
    pub const fn planar(phi: f64, z: f64) -> Self {
        Self { x: phi, y: z, z: 0.0 }
    }

    /// Euclidean dot product.
    #[inline(always)]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Minkowski product with signature (+, −, −) on (x, y, z).
    #[inline(always)]
    pub fn mdot(self, o: Vec3) -> f64 {
        self.x * o.x - self.y * o.y - self.z * o.z
    }

    /// Euclidean cross product.
    #[inline(always)]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    /// Minkowski-adapted cross product `X(v, w)`, the Euclidean cross product
    /// with the first component negated. It is characterized by
    /// `⟨X(v,w), u⟩_M = −det(v,w,u)`, hence totally antisymmetric: for a
    /// point p on the hyperboloid, `v ↦ X(p, v)` is tangent-valued and
    /// skew with respect to the induced metric.
    #[inline(always)]
    pub fn mcross(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.z * o.y - self.y * o.z,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    /// Euclidean norm.
    #[inline(always)]
    pub fn norm(self) -> f64 {
        crate::fp::sqrt(self.dot(self))
    }

    #[inline(always)]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline(always)]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline(always)]
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline(always)]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline(always)]
    fn sub_assign(&mut self, o: Vec3) {
        self.x -= o.x;
        self.y -= o.y;
        self.z -= o.z;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline(always)]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline(always)]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline(always)]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline(always)]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_products_match_determinant_conventions() {
        let v = Vec3::new(1.0, 2.0, 3.0);
        let w = Vec3::new(-2.0, 0.5, 4.0);
        let u = Vec3::new(0.3, -1.0, 2.0);
        // Euclidean: <v x w, u> = det(v, w, u).
        let det = v.x * (w.y * u.z - w.z * u.y) - v.y * (w.x * u.z - w.z * u.x)
            + v.z * (w.x * u.y - w.y * u.x);
        assert!((v.cross(w).dot(u) - det).abs() < 1e-12);
        // Minkowski-adapted: <X(v,w), u>_M = -det(v, w, u).
        assert!((v.mcross(w).mdot(u) + det).abs() < 1e-12);
        // Total antisymmetry of (v,w,u) -> <X(v,w),u>_M.
        assert!((v.mcross(w).mdot(u) + w.mcross(v).mdot(u)).abs() < 1e-12);
        assert!((v.mcross(w).mdot(u) + v.mcross(u).mdot(w)).abs() < 1e-12);
    }
}
