use nalgebra::DVector;
use rand::RngCore;

use super::sphere::gaussian_vector;
use super::{check_dim, check_same_base, Manifold, ManifoldPoint, TangentVector, CONSTRAINT_TOL};
use crate::error::{Error, Result};

/// Flat R^n. Exists so that manifold algorithms can be checked against their
/// classical counterparts on the same code path.
#[derive(Clone, Copy, Debug)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Self { dim })
    }
}

impl Manifold for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn k_min(&self) -> f64 {
        0.0
    }

    fn check_point(&self, x: &ManifoldPoint) -> Result<()> {
        check_dim(self.dim, x.ambient_dim())
    }

    fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.check_point(v.base())?;
        check_dim(self.dim, v.components().len())
    }

    fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        check_same_base(u, v)?;
        Ok(u.components().dot(v.components()))
    }

    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_point(x)?;
        if !v.base().same_point(x, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        Ok(ManifoldPoint::new(x.coords() + v.components()))
    }

    fn log_map(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_point(y)?;
        TangentVector::new(x.clone(), y.coords() - x.coords())
    }

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
        TangentVector::new(y.clone(), v.components().clone())
    }

    fn geodesic_distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok((y.coords() - x.coords()).norm())
    }

    fn project_to_tangent(&self, x: &ManifoldPoint, w: &DVector<f64>) -> TangentVector {
        TangentVector::new(x.clone(), w.clone()).expect("dimensions agree")
    }

    fn project_to_manifold(&self, w: &DVector<f64>) -> Result<ManifoldPoint> {
        check_dim(self.dim, w.len())?;
        Ok(ManifoldPoint::new(w.clone()))
    }

    fn euclidean_to_riemannian(&self, x: &ManifoldPoint, egrad: &DVector<f64>) -> TangentVector {
        self.project_to_tangent(x, egrad)
    }

    fn tangent_field_normal_term(
        &self,
        _x: &DVector<f64>,
        _xdot: &DVector<f64>,
        a: &DVector<f64>,
    ) -> DVector<f64> {
        DVector::zeros(a.len())
    }

    fn random_point(&self, rng: &mut dyn RngCore) -> ManifoldPoint {
        ManifoldPoint::new(gaussian_vector(self.dim, rng))
    }

    fn random_tangent(&self, x: &ManifoldPoint, rng: &mut dyn RngCore) -> TangentVector {
        self.project_to_tangent(x, &gaussian_vector(self.dim, rng))
    }
}
