use nalgebra::DVector;
use rand::RngCore;

use super::sphere::gaussian_vector;
use super::{check_dim, check_same_base, Manifold, ManifoldPoint, TangentVector, CONSTRAINT_TOL};
use crate::error::{Error, Result};

/// Hyperbolic space in the hyperboloid model: the upper sheet
/// { x in R^n : <x, x>_M = -1, x_0 > 0 } of the Minkowski quadric, where
/// <a, b>_M = sum_{i>=1} a_i b_i - a_0 b_0. Coordinate 0 is the timelike one.
/// The Minkowski product restricted to tangent spaces is positive definite
/// and the sectional curvature is identically -1.
#[derive(Clone, Copy, Debug)]
pub struct Hyperboloid {
    ambient_dim: usize,
}

impl Hyperboloid {
    pub fn new(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidParameter {
                name: "ambient_dim",
                reason: format!("hyperboloid needs ambient dimension >= 2, got {ambient_dim}"),
            });
        }
        Ok(Self { ambient_dim })
    }

    /// Plane: H^2 embedded in R^3.
    pub fn plane() -> Self {
        Self { ambient_dim: 3 }
    }

    pub fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(b) - 2.0 * a[0] * b[0]
    }

    /// Basepoint (1, 0, ..., 0).
    pub fn origin(&self) -> ManifoldPoint {
        let mut c = DVector::zeros(self.ambient_dim);
        c[0] = 1.0;
        ManifoldPoint::new(c)
    }

    /// cosh of the distance, clamped into [1, inf).
    fn cosh_dist(x: &ManifoldPoint, y: &ManifoldPoint) -> f64 {
        (-Self::minkowski(x.coords(), y.coords())).max(1.0)
    }
}

impl Manifold for Hyperboloid {
    fn name(&self) -> &'static str {
        "hyperboloid"
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn k_min(&self) -> f64 {
        -1.0
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<()> {
        check_dim(self.ambient_dim, x.ambient_dim())?;
        let residual = (Self::minkowski(x.coords(), x.coords()) + 1.0).abs();
        // The form's summands are of size ||x||^2, so its rounding floor
        // grows with the point's coordinates; a fixed tolerance would
        // reject exact geometry far from the vertex.
        let scale = x.coords().norm_squared().max(1.0);
        if residual > CONSTRAINT_TOL * scale || x.coords()[0] <= 0.0 {
            return Err(Error::OffManifold {
                manifold: self.name(),
                residual,
            });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.check_point(v.base())?;
        let residual = Self::minkowski(v.base().coords(), v.components()).abs();
        let scale = (v.base().coords().norm() * v.components().norm()).max(1.0);
        if residual > CONSTRAINT_TOL * scale {
            return Err(Error::NotTangent { residual });
        }
        Ok(())
    }

    fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check_same_base(u, v)?;
        Ok(Self::minkowski(u.components(), v.components()))
    }

    /// exp_x(v) = cosh(s) x + sinh(s) v / s with s = ||v||_M.
    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_point(x)?;
        if !v.base().same_point(x, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        let s2 = Self::minkowski(v.components(), v.components()).max(0.0);
        let s = s2.sqrt();
        if s == 0.0 {
            return Ok(x.clone());
        }
        let y = x.coords() * s.cosh() + v.components() * (s.sinh() / s);
        self.project_to_manifold(&y)
    }

    /// log_x(y) = d (y - cosh(d) x) / sinh(d) with d = arccosh(-<x, y>_M).
    fn log_map(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        let u = Self::cosh_dist(x, y);
        let d = u.acosh();
        if d == 0.0 {
            return Ok(TangentVector::zero(x.clone()));
        }
        let w = y.coords() - x.coords() * u;
        // ||w||_M = sinh(d) = sqrt(u^2 - 1)
        let wn = (u * u - 1.0).sqrt();
        let v = self.project_to_tangent(x, &(w * (d / wn)));
        Ok(v)
    }

    /// Transport along the (always unique) geodesic:
    /// v + <y, v>_M / (1 - <x, y>_M) (x + y).
    fn parallel_transport(
        &self,
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        v: &TangentVector,
    ) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !v.base().same_point(x, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        let u = Self::cosh_dist(x, y);
        let yv = Self::minkowski(y.coords(), v.components());
        let moved = v.components() + (x.coords() + y.coords()) * (yv / (1.0 + u));
        Ok(self.project_to_tangent(y, &moved))
    }

    fn geodesic_distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(Self::cosh_dist(x, y).acosh())
    }

    fn project_to_tangent(&self, x: &ManifoldPoint, w: &DVector<f64>) -> TangentVector {
        let t = w + x.coords() * Self::minkowski(w, x.coords());
        TangentVector::new(x.clone(), t).expect("projection preserves dimension")
    }

    fn project_to_manifold(&self, w: &DVector<f64>) -> Result<ManifoldPoint> {
        check_dim(self.ambient_dim, w.len())?;
        let q = -Self::minkowski(w, w);
        if !(q > 0.0) || w[0] <= 0.0 || !q.is_finite() {
            return Err(Error::OffManifold {
                manifold: self.name(),
                residual: (q - 1.0).abs(),
            });
        }
        Ok(ManifoldPoint::new(w / q.sqrt()))
    }

    /// Ambient partials are raised with the inverse Minkowski metric (the time
    /// component flips sign) before the tangent projection.
    fn euclidean_to_riemannian(&self, x: &ManifoldPoint, egrad: &DVector<f64>) -> TangentVector {
        let mut g = egrad.clone();
        g[0] = -g[0];
        self.project_to_tangent(x, &g)
    }

    /// For a tangent field A along X: dA/dt = covariant part + <A, dX/dt>_M X.
    fn tangent_field_normal_term(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        a: &DVector<f64>,
    ) -> DVector<f64> {
        x * Self::minkowski(a, xdot)
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> ManifoldPoint {
        let o = self.origin();
        let v = self.random_tangent(&o, rng);
        self.exp_map(&o, &v)
            .expect("exp from the origin stays on the upper sheet")
    }

    /// Gaussian in the spacelike coordinates; every such vector is tangent at
    /// the origin, elsewhere it is projected.
    fn random_tangent(&self, x: &ManifoldPoint, rng: &mut dyn RngCore) -> TangentVector {
        let mut g = gaussian_vector(self.ambient_dim, rng);
        g[0] = 0.0;
        self.project_to_tangent(x, &g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h2() -> Hyperboloid {
        Hyperboloid::plane()
    }

    #[test]
    fn origin_satisfies_constraint() {
        let m = h2();
        assert!(m.check_point(&m.origin()).is_ok());
    }

    #[test]
    fn minkowski_matches_signature() {
        let a = DVector::from_column_slice(&[2.0, 1.0, 0.0]);
        let b = DVector::from_column_slice(&[1.0, 3.0, 5.0]);
        assert_eq!(Hyperboloid::minkowski(&a, &b), 1.0 * 3.0 - 2.0 * 1.0);
    }

    #[test]
    fn exp_along_first_spacelike_axis() {
        let m = h2();
        let x = m.origin();
        let s = 0.7;
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.0, s, 0.0]))
            .unwrap();
        let y = m.exp_map(&x, &v).unwrap();
        assert_relative_eq!(y.coords()[0], s.cosh(), epsilon = 1e-14);
        assert_relative_eq!(y.coords()[1], s.sinh(), epsilon = 1e-14);
        assert_relative_eq!(y.coords()[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn exp_of_zero_returns_base_exactly() {
        let m = h2();
        let x = m
            .project_to_manifold(&DVector::from_column_slice(&[1.5, 0.5, 1.0]))
            .unwrap();
        let y = m.exp_map(&x, &TangentVector::zero(x.clone())).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn distance_from_origin_is_tangent_norm() {
        let m = h2();
        let x = m.origin();
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.0, 0.3, -0.4]))
            .unwrap();
        let y = m.exp_map(&x, &v).unwrap();
        let d = m.geodesic_distance(&x, &y).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn tangency_constraint_is_minkowski_orthogonality() {
        let m = h2();
        let x = m
            .project_to_manifold(&DVector::from_column_slice(&[2.0, 1.0, 1.0]))
            .unwrap();
        let v = m.project_to_tangent(&x, &DVector::from_column_slice(&[0.4, -1.2, 2.0]));
        assert!(m.check_tangent(&v).is_ok());
    }

    #[test]
    fn projecting_timelike_axis_at_origin_gives_zero() {
        let m = h2();
        let x = m.origin();
        let v = m.project_to_tangent(&x, &DVector::from_column_slice(&[1.0, 0.0, 0.0]));
        assert_eq!(v.components().amax(), 0.0);
    }

    #[test]
    fn lower_sheet_points_are_rejected() {
        let m = h2();
        let x = ManifoldPoint::from_slice(&[-1.0, 0.0, 0.0]);
        assert!(m.check_point(&x).is_err());
    }
}
