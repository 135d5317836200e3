//! Embedded-manifold primitives: points, tangent vectors, exponential and
//! logarithm maps, parallel transport, and the curvature constant that
//! controls how far convergence guarantees degrade on negatively curved
//! spaces.

mod euclidean;
mod hyperboloid;
mod objective;
mod point;
mod sphere;

pub use euclidean::Euclidean;
pub use hyperboloid::Hyperboloid;
pub use objective::{riemannian_gradient, ConvexityClass, Objective};
pub use point::{ManifoldPoint, TangentVector, CONSTRAINT_TOL};
pub use sphere::Sphere;

pub(crate) use sphere::gaussian_vector;

use nalgebra::DVector;
use rand::RngCore;

use crate::error::{Error, Result};

/// Geodesically complete manifold embedded in ambient R^n, with sectional
/// curvature bounded below. All operations work on ambient coordinates.
pub trait Manifold: Send + Sync {
    fn name(&self) -> &'static str;

    fn ambient_dim(&self) -> usize;

    /// Lower bound on sectional curvature (exact for the bundled manifolds).
    fn k_min(&self) -> f64;

    /// Err unless the defining constraint holds within `CONSTRAINT_TOL`.
    fn check_point(&self, x: &ManifoldPoint) -> Result<()>;

    /// Err unless `v` is tangent at its base within `CONSTRAINT_TOL`.
    fn check_tangent(&self, v: &TangentVector) -> Result<()>;

    /// Riemannian inner product <u, v>_x. Requires a shared base point.
    fn metric(&self, u: &TangentVector, v: &TangentVector) -> Result<f64>;

    fn norm(&self, v: &TangentVector) -> f64 {
        self.metric(v, v)
            .map(|m| m.max(0.0).sqrt())
            .unwrap_or(f64::NAN)
    }

    /// Point reached after unit time along the geodesic leaving `x` with
    /// velocity `v`. The zero vector returns `x` unchanged.
    fn exp_map(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint>;

    /// Inverse of `exp_map`: the velocity at `x` of the minimizing geodesic
    /// reaching `y` at unit time.
    fn log_map(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector>;

    /// Parallel transport of `v` along the minimizing geodesic from `x` to `y`.
    fn parallel_transport(
        &self,
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        v: &TangentVector,
    ) -> Result<TangentVector>;

    fn geodesic_distance(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64>;

    /// Metric-orthogonal projection of an ambient vector onto T_x.
    fn project_to_tangent(&self, x: &ManifoldPoint, w: &DVector<f64>) -> TangentVector;

    /// Nearest-point style repair used after every step to cancel float drift.
    fn project_to_manifold(&self, w: &DVector<f64>) -> Result<ManifoldPoint>;

    /// Riemannian gradient from ambient partial derivatives: raise the index
    /// with the ambient metric, then project onto T_x.
    fn euclidean_to_riemannian(&self, x: &ManifoldPoint, egrad: &DVector<f64>) -> TangentVector;

    /// Normal completion of the ambient derivative of a tangent field: a field
    /// A(t) along X(t) with covariant derivative W has ambient derivative
    /// dA/dt = W + normal_term(X, dX/dt, A). Lets an ambient integrator follow
    /// covariant equations of motion at full order.
    fn tangent_field_normal_term(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        a: &DVector<f64>,
    ) -> DVector<f64>;

    fn random_point(&self, rng: &mut dyn RngCore) -> ManifoldPoint;

    fn random_tangent(&self, x: &ManifoldPoint, rng: &mut dyn RngCore) -> TangentVector;
}

/// Curvature lower bound `k_min` together with an upper bound `diameter` on
/// the geodesic diameter of the region a trajectory visits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureBounds {
    pub k_min: f64,
    pub diameter: f64,
}

impl CurvatureBounds {
    pub fn new(k_min: f64, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::NonPositive {
                name: "diameter",
                value: diameter,
            });
        }
        if !k_min.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k_min",
                reason: format!("must be finite, got {k_min}"),
            });
        }
        Ok(Self { k_min, diameter })
    }

    pub fn for_manifold(manifold: &dyn Manifold, diameter: f64) -> Result<Self> {
        Self::new(manifold.k_min(), diameter)
    }
}

/// Curvature penalty zeta >= 1, the factor by which negative curvature
/// inflates distance-based convergence estimates:
/// sqrt(-k)*D*coth(sqrt(-k)*D) for k_min < 0, and exactly 1 otherwise.
pub fn zeta(bounds: &CurvatureBounds) -> f64 {
    if bounds.k_min < 0.0 {
        let s = (-bounds.k_min).sqrt() * bounds.diameter;
        s / s.tanh()
    } else {
        1.0
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

pub(crate) fn check_same_base(u: &TangentVector, v: &TangentVector) -> Result<()> {
    if !u.base().same_point(v.base(), CONSTRAINT_TOL) {
        Err(Error::BaseMismatch)
    } else {
        Ok(())
    }
}
