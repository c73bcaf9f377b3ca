//! Points of the complex projective line as normalized homogeneous pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A point of P^1(C), stored as a homogeneous representative `(z, w)` with
/// Euclidean norm 1. After normalization `max(|z|, |w|)` lies in
/// `[1/sqrt(2), 1]`, and equality is projective: `(z, w) ~ (lambda z, lambda w)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointP1 {
    z: Complex64,
    w: Complex64,
}

impl PointP1 {
    /// Builds a point from any nonzero homogeneous pair.
    pub fn new(z: Complex64, w: Complex64) -> Result<Self> {
        let norm = (z.norm_sqr() + w.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "homogeneous pair ({z}, {w}) is not a point of P^1"
            )));
        }
        Ok(Self {
            z: z / norm,
            w: w / norm,
        })
    }

    /// The affine point `[c : 1]`.
    pub fn from_affine(c: Complex64) -> Self {
        Self::new(c, Complex64::new(1.0, 0.0)).expect("affine pair is nonzero")
    }

    /// `[0 : 1]`.
    pub fn zero() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            w: Complex64::new(1.0, 0.0),
        }
    }

    /// `[1 : 0]`.
    pub fn infinity() -> Self {
        Self {
            z: Complex64::new(1.0, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    /// Affine coordinate `z/w`; infinite when `w = 0`.
    pub fn affine(&self) -> Complex64 {
        self.z / self.w
    }

    /// Coordinate in the chart that keeps the modulus at most 1:
    /// `(false, z/w)` when `|z| <= |w|`, else `(true, w/z)`.
    pub fn chart_coord(&self) -> (bool, Complex64) {
        if self.z.norm_sqr() <= self.w.norm_sqr() {
            (false, self.z / self.w)
        } else {
            (true, self.w / self.z)
        }
    }

    /// Chordal distance `|z_x w_y - z_y w_x| / (|x| |y|)`, in `[0, 1]`.
    /// Representatives are unit vectors, so the denominator is 1.
    pub fn dist(&self, other: &PointP1) -> f64 {
        (self.z * other.w - other.z * self.w).norm()
    }

    /// Projective equality up to `tol` in the chordal metric.
    pub fn close_to(&self, other: &PointP1, tol: f64) -> bool {
        self.dist(other) <= tol
    }
}

/// Chordal (spherical) distance between two points of P^1.
pub fn spherical_distance(x: &PointP1, y: &PointP1) -> f64 {
    x.dist(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalization_lands_in_band() {
        let p = PointP1::new(c(3.0, 4.0), c(-1.0, 2.0)).unwrap();
        let m = p.z().norm().max(p.w().norm());
        assert!((0.5..=1.0 + 1e-15).contains(&m), "max modulus {m}");
        let n = (p.z().norm_sqr() + p.w().norm_sqr()).sqrt();
        assert!((n - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_identity_and_antipodes() {
        let x = PointP1::from_affine(c(0.3, -0.7));
        assert_eq!(spherical_distance(&x, &x), 0.0);
        let d = spherical_distance(&PointP1::infinity(), &PointP1::zero());
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_one_one_to_zero() {
        // [1:1] vs [0:1] -> 1/sqrt(2)
        let x = PointP1::from_affine(c(1.0, 0.0));
        let y = PointP1::zero();
        assert!((spherical_distance(&x, &y) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn projective_scaling_is_identified() {
        let x = PointP1::new(c(1.0, 2.0), c(-0.5, 0.25)).unwrap();
        let lambda = c(-3.7, 1.9);
        let y = PointP1::new(lambda * c(1.0, 2.0), lambda * c(-0.5, 0.25)).unwrap();
        assert!(x.close_to(&y, 1e-14));
    }

    #[test]
    fn zero_pair_rejected() {
        assert!(PointP1::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }
}
