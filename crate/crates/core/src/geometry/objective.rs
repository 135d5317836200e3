use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use super::{Manifold, ManifoldPoint, TangentVector};
use crate::error::{Error, Result};

/// Structural assumption an objective satisfies, which selects the dynamics
/// and the convergence guarantee.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvexityClass {
    /// Geodesically convex toward the minimizer.
    Convex,
    /// alpha (f(x) - f*) <= <grad f(x), -log_x(x*)> for all x, alpha in (0, 1].
    WeaklyQuasiConvex { alpha: f64 },
    /// Geodesically mu-strongly convex.
    StronglyConvex { mu: f64 },
}

impl ConvexityClass {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConvexityClass::Convex => Ok(()),
            ConvexityClass::WeaklyQuasiConvex { alpha } => {
                if alpha > 0.0 && alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "alpha",
                        reason: format!("weak quasi-convexity needs alpha in (0, 1], got {alpha}"),
                    })
                }
            }
            ConvexityClass::StronglyConvex { mu } => {
                if mu > 0.0 && mu.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonPositive {
                        name: "mu",
                        value: mu,
                    })
                }
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ConvexityClass::Convex => "convex",
            ConvexityClass::WeaklyQuasiConvex { .. } => "weakly-quasi-convex",
            ConvexityClass::StronglyConvex { .. } => "strongly-convex",
        }
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexityClass::Convex => write!(f, "convex"),
            ConvexityClass::WeaklyQuasiConvex { alpha } => write!(f, "wqc(alpha={alpha})"),
            ConvexityClass::StronglyConvex { mu } => write!(f, "sc(mu={mu})"),
        }
    }
}

type ValueFn = Arc<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&ManifoldPoint) -> DVector<f64> + Send + Sync>;

/// Objective on a manifold. The gradient is stored as ambient partial
/// derivatives; `riemannian_gradient` turns them into a tangent vector using
/// the manifold's metric.
#[derive(Clone)]
pub struct Objective {
    name: String,
    value_fn: ValueFn,
    egrad_fn: GradFn,
    class: ConvexityClass,
    minimizer: Option<ManifoldPoint>,
    optimal_value: Option<f64>,
    smoothness: Option<f64>,
}

impl Objective {
    pub fn new(
        name: impl Into<String>,
        value_fn: impl Fn(&ManifoldPoint) -> f64 + Send + Sync + 'static,
        egrad_fn: impl Fn(&ManifoldPoint) -> DVector<f64> + Send + Sync + 'static,
        class: ConvexityClass,
    ) -> Result<Self> {
        class.validate()?;
        Ok(Self {
            name: name.into(),
            value_fn: Arc::new(value_fn),
            egrad_fn: Arc::new(egrad_fn),
            class,
            minimizer: None,
            optimal_value: None,
            smoothness: None,
        })
    }

    pub fn with_minimizer(mut self, x_star: ManifoldPoint, f_star: f64) -> Self {
        self.minimizer = Some(x_star);
        self.optimal_value = Some(f_star);
        self
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &ManifoldPoint) -> f64 {
        (self.value_fn)(x)
    }

    pub fn euclidean_gradient(&self, x: &ManifoldPoint) -> DVector<f64> {
        (self.egrad_fn)(x)
    }

    pub fn class(&self) -> ConvexityClass {
        self.class
    }

    pub fn minimizer(&self) -> Option<&ManifoldPoint> {
        self.minimizer.as_ref()
    }

    pub fn optimal_value(&self) -> Option<f64> {
        self.optimal_value
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    /// f(x) - f*, when the optimum is known.
    pub fn f_gap(&self, x: &ManifoldPoint) -> Option<f64> {
        self.optimal_value.map(|f_star| self.value(x) - f_star)
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("optimal_value", &self.optimal_value)
            .finish()
    }
}

/// Riemannian gradient of `objective` at `x`: the ambient partials with the
/// index raised by the ambient metric, projected onto T_x.
pub fn riemannian_gradient(
    manifold: &dyn Manifold,
    objective: &Objective,
    x: &ManifoldPoint,
) -> Result<TangentVector> {
    manifold.check_point(x)?;
    Ok(manifold.euclidean_to_riemannian(x, &objective.euclidean_gradient(x)))
}
