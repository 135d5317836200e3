use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{check_dim, check_same_base, Manifold, ManifoldPoint, TangentVector, CONSTRAINT_TOL};
use crate::error::{Error, Result};

/// Unit sphere S^{n-1} = { x in R^n : ||x|| = 1 } with the induced metric.
/// Sectional curvature is identically +1.
#[derive(Clone, Copy, Debug)]
pub struct Sphere {
    ambient_dim: usize,
}

/// Inner products this close to -1 put `y` at the cut locus of `x`, where the
/// minimizing geodesic is not unique.
const ANTIPODAL_TOL: f64 = 1e-10;

impl Sphere {
    pub fn new(ambient_dim: usize) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidParameter {
                name: "ambient_dim",
                reason: format!("sphere needs ambient dimension >= 2, got {ambient_dim}"),
            });
        }
        Ok(Self { ambient_dim })
    }

    fn cos_angle(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> f64 {
        x.coords().dot(y.coords()).clamp(-1.0, 1.0)
    }
}

impl Manifold for Sphere {
    fn name(&self) -> &'static str {
        "sphere"
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn k_min(&self) -> f64 {
        1.0
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<()> {
        check_dim(self.ambient_dim, x.ambient_dim())?;
        let residual = (x.coords().norm() - 1.0).abs();
        if residual > CONSTRAINT_TOL {
            return Err(Error::OffManifold {
                manifold: self.name(),
                residual,
            });
        }
        Ok(())
    }

    fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.check_point(v.base())?;
        let residual = v.base().coords().dot(v.components()).abs();
        if residual > CONSTRAINT_TOL {
            return Err(Error::NotTangent { residual });
        }
        Ok(())
    }

    fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check_same_base(u, v)?;
        Ok(u.components().dot(v.components()))
    }

    /// exp_x(v) = cos(||v||) x + sin(||v||) v / ||v||.
    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_point(x)?;
        if !v.base().same_point(x, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        let theta = v.components().norm();
        if theta == 0.0 {
            return Ok(x.clone());
        }
        let y = x.coords() * theta.cos() + v.components() * (theta.sin() / theta);
        self.project_to_manifold(&y)
    }

    /// log_x(y) = theta (y - cos(theta) x) / ||y - cos(theta) x||,
    /// theta = arccos(<x, y>).
    fn log_map(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        let c = self.cos_angle(x, y);
        if c <= -1.0 + ANTIPODAL_TOL {
            return Err(Error::CutLocus {
                op: "log_map",
                detail: format!("<x, y> = {c} puts y at the antipode of x"),
            });
        }
        let theta = c.acos();
        let w = y.coords() - x.coords() * c;
        let wn = w.norm();
        if theta == 0.0 || wn == 0.0 {
            return Ok(TangentVector::zero(x.clone()));
        }
        let v = self.project_to_tangent(x, &(w * (theta / wn)));
        Ok(v)
    }

    /// Transport along the minimizing geodesic:
    /// v - <y, v> / (1 + <x, y>) (x + y).
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
        let c = self.cos_angle(x, y);
        if c <= -1.0 + ANTIPODAL_TOL {
            return Err(Error::CutLocus {
                op: "parallel_transport",
                detail: format!("<x, y> = {c} puts y at the antipode of x"),
            });
        }
        let yv = y.coords().dot(v.components());
        let moved = v.components() - (x.coords() + y.coords()) * (yv / (1.0 + c));
        Ok(self.project_to_tangent(y, &moved))
    }

    fn geodesic_distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.cos_angle(x, y).acos())
    }

    fn project_to_tangent(&self, x: &ManifoldPoint, w: &DVector<f64>) -> TangentVector {
        let t = w - x.coords() * x.coords().dot(w);
        TangentVector::new(x.clone(), t).expect("projection preserves dimension")
    }

    fn project_to_manifold(&self, w: &DVector<f64>) -> Result<ManifoldPoint> {
        check_dim(self.ambient_dim, w.len())?;
        let n = w.norm();
        if n < 1e-100 || !n.is_finite() {
            return Err(Error::InvalidParameter {
                name: "point",
                reason: format!("cannot renormalize a vector of norm {n}"),
            });
        }
        Ok(ManifoldPoint::new(w / n))
    }

    fn euclidean_to_riemannian(&self, x: &ManifoldPoint, egrad: &DVector<f64>) -> TangentVector {
        self.project_to_tangent(x, egrad)
    }

    /// For a tangent field A along X: dA/dt = covariant part - <A, dX/dt> X.
    fn tangent_field_normal_term(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        a: &DVector<f64>,
    ) -> DVector<f64> {
        x * (-a.dot(xdot))
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> ManifoldPoint {
        let g = gaussian_vector(self.ambient_dim, rng);
        self.project_to_manifold(&g)
            .expect("gaussian vector is nonzero with probability 1")
    }

    fn random_tangent(&self, x: &ManifoldPoint, rng: &mut dyn RngCore) -> TangentVector {
        let g = gaussian_vector(self.ambient_dim, rng);
        self.project_to_tangent(x, &g)
    }
}

pub(crate) fn gaussian_vector(n: usize, rng: &mut dyn RngCore) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s2() -> Sphere {
        Sphere::new(3).unwrap()
    }

    fn pt(c: &[f64]) -> ManifoldPoint {
        ManifoldPoint::from_slice(c)
    }

    #[test]
    fn exp_quarter_circle_lands_on_axis() {
        let m = s2();
        let x = pt(&[1.0, 0.0, 0.0]);
        let v = TangentVector::new(
            x.clone(),
            DVector::from_column_slice(&[0.0, std::f64::consts::FRAC_PI_2, 0.0]),
        )
        .unwrap();
        let y = m.exp_map(&x, &v).unwrap();
        assert_relative_eq!(y.coords()[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(y.coords()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exp_of_zero_returns_base_exactly() {
        let m = s2();
        let x = pt(&[0.6, 0.8, 0.0]);
        let y = m.exp_map(&x, &TangentVector::zero(x.clone())).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn log_recovers_axis_rotation() {
        let m = s2();
        let x = pt(&[1.0, 0.0, 0.0]);
        let y = pt(&[0.0, 0.0, 1.0]);
        let v = m.log_map(&x, &y).unwrap();
        assert_relative_eq!(v.components()[2], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(v.components()[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn log_rejects_antipodal_pair() {
        let m = s2();
        let x = pt(&[1.0, 0.0, 0.0]);
        let y = pt(&[-1.0, 0.0, 0.0]);
        assert!(matches!(m.log_map(&x, &y), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn transport_quarter_circle_rotates_velocity() {
        let m = s2();
        let x = pt(&[1.0, 0.0, 0.0]);
        let y = pt(&[0.0, 1.0, 0.0]);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.0, 2.0, 0.0]))
            .unwrap();
        let w = m.parallel_transport(&x, &y, &v).unwrap();
        assert_relative_eq!(w.components()[0], -2.0, epsilon = 1e-15);
        assert_relative_eq!(w.components()[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(w.components()[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_of_orthogonal_points_is_half_pi() {
        let m = s2();
        let d = m
            .geodesic_distance(&pt(&[1.0, 0.0, 0.0]), &pt(&[0.0, 1.0, 0.0]))
            .unwrap();
        assert_relative_eq!(d, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn off_sphere_point_is_rejected() {
        let m = s2();
        assert!(m.check_point(&pt(&[1.0, 1.0, 0.0])).is_err());
        assert!(m.check_point(&pt(&[1.0, 0.0])).is_err());
    }
}
