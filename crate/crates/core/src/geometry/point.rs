use nalgebra::DVector;

use crate::error::{Error, Result};

/// Tolerance on manifold and tangency constraints maintained by every operation.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// A point stored in ambient coordinates. Which constraint it satisfies is the
/// business of the manifold that produced it; see `Manifold::check_point`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    coords: DVector<f64>,
}

impl ManifoldPoint {
    pub fn new(coords: DVector<f64>) -> Self {
        Self { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self {
            coords: DVector::from_column_slice(coords),
        }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    /// Max absolute coordinate difference.
    pub fn ambient_gap(&self, other: &ManifoldPoint) -> f64 {
        if self.coords.len() != other.coords.len() {
            return f64::INFINITY;
        }
        (&self.coords - &other.coords).amax()
    }

    pub fn same_point(&self, other: &ManifoldPoint, tol: f64) -> bool {
        self.ambient_gap(other) <= tol
    }
}

/// A tangent vector remembers its base point so that operations mixing vectors
/// from different tangent spaces can be rejected.
#[derive(Clone, Debug)]
pub struct TangentVector {
    base: ManifoldPoint,
    components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, components: DVector<f64>) -> Result<Self> {
        if base.ambient_dim() != components.len() {
            return Err(Error::DimensionMismatch {
                expected: base.ambient_dim(),
                got: components.len(),
            });
        }
        Ok(Self { base, components })
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        let n = base.ambient_dim();
        Self {
            base,
            components: DVector::zeros(n),
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn components(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn into_components(self) -> DVector<f64> {
        self.components
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            components: &self.components * s,
        }
    }

    /// Same-base linear combination `a*self + b*other`.
    pub fn lin_comb(&self, a: f64, other: &TangentVector, b: f64) -> Result<Self> {
        if !self.base.same_point(&other.base, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        Ok(Self {
            base: self.base.clone(),
            components: &self.components * a + &other.components * b,
        })
    }

    pub fn plus(&self, other: &TangentVector) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn minus(&self, other: &TangentVector) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }
}
