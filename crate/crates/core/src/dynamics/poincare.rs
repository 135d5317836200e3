//! Time rescaling between members of the flow family, and the Poincaré
//! transformation that realizes a rate-p flow as an autonomous Hamiltonian
//! system on extended phase space running on a rate-p_ring clock.

use super::{hamiltonian, BregmanParameters, Momentum};
use crate::error::{Error, Result};
use crate::geometry::{
    riemannian_gradient, ConvexityClass, Manifold, ManifoldPoint, Objective, TangentVector,
};

/// tau(t) = t^(p_ring / p): evaluating a rate-p trajectory at tau(t) turns it
/// into a rate-p_ring trajectory.
pub fn rescale_time(t: f64, p: f64, p_ring: f64) -> Result<f64> {
    check_exponents(p, p_ring)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("rescaling needs t >= 0, got {t}"),
        });
    }
    Ok(t.powf(p_ring / p))
}

/// Speed of the physical clock against the fictive one:
/// g(t) = (p / p_ring) t^(1 - p_ring / p), the derivative of the inverse of
/// `rescale_time`.
pub fn monitor_function(t: f64, p: f64, p_ring: f64) -> Result<f64> {
    check_exponents(p, p_ring)?;
    if !(t > 0.0) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    Ok(p / p_ring * t.powf(1.0 - p_ring / p))
}

fn check_exponents(p: f64, p_ring: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::NonPositive { name: "p", value: p });
    }
    if !(p_ring > 0.0) || !p_ring.is_finite() {
        return Err(Error::NonPositive {
            name: "p_ring",
            value: p_ring,
        });
    }
    Ok(())
}

fn require_polynomial(params: &BregmanParameters, op: &'static str) -> Result<()> {
    match params.class() {
        ConvexityClass::StronglyConvex { .. } => Err(Error::UnsupportedClass {
            op,
            class: "strongly-convex",
        }),
        _ => Ok(()),
    }
}

/// State of the extended system: position, the position-like clock coordinate
/// X^t, the momentum conjugate to X, and the momentum R^t conjugate to X^t.
#[derive(Clone, Debug)]
pub struct ExtendedState {
    pub x: ManifoldPoint,
    pub xt: f64,
    pub r: Momentum,
    pub rt: f64,
}

impl ExtendedState {
    pub fn new(x: ManifoldPoint, xt: f64, r: Momentum, rt: f64) -> Result<Self> {
        if !(xt > 0.0) {
            return Err(Error::NonPositive {
                name: "xt",
                value: xt,
            });
        }
        Ok(Self { x, xt, r, rt })
    }

    /// Extended state on the zero level set of the transformed Hamiltonian:
    /// X^t = t0, R conjugate to `v`, and R^t = -H_p(x, r, t0).
    pub fn on_zero_level(
        manifold: &dyn Manifold,
        x: ManifoldPoint,
        v: &TangentVector,
        t0: f64,
        params: &BregmanParameters,
        objective: &Objective,
    ) -> Result<Self> {
        let r = Momentum::conjugate_to(v, params, t0)?;
        let h0 = hamiltonian(manifold, &x, &r, t0, params, objective)?;
        Self::new(x, t0, r, -h0)
    }
}

/// Derivative of an `ExtendedState` along the transformed flow. `dx` is the
/// velocity dX/dtau; `dr` is the covariant derivative of the sharped momentum
/// along dx (the metric's own time dependence lives in the connection).
#[derive(Clone, Debug)]
pub struct ExtendedDerivative {
    pub dx: TangentVector,
    pub dxt: f64,
    pub dr: TangentVector,
    pub drt: f64,
}

/// Transformed Hamiltonian
///   (p^2 / 2 p_ring) (X^t)^(-lambda p - p_ring/p) <<R, R>>
///   + (C p^2 / p_ring) (X^t)^((lambda+1) p - p_ring/p) f(X)
///   + (p / p_ring) (X^t)^(1 - p_ring/p) R^t,
/// identically zero along integral curves started on the zero level set.
pub fn poincare_hamiltonian(
    manifold: &dyn Manifold,
    es: &ExtendedState,
    params: &BregmanParameters,
    p_ring: f64,
    objective: &Objective,
) -> Result<f64> {
    require_polynomial(params, "poincare_hamiltonian")?;
    check_exponents(params.p(), p_ring)?;
    if !(es.xt > 0.0) {
        return Err(Error::NonPositive {
            name: "xt",
            value: es.xt,
        });
    }
    let (p, c, lambda, t) = (params.p(), params.c(), params.lambda(), es.xt);
    let rr = es.r.cometric_sq(manifold)?;
    let kinetic = p * p / (2.0 * p_ring) * t.powf(-lambda * p - p_ring / p) * rr;
    let potential =
        c * p * p / p_ring * t.powf((lambda + 1.0) * p - p_ring / p) * objective.value(&es.x);
    let clock = p / p_ring * t.powf(1.0 - p_ring / p) * es.rt;
    Ok(kinetic + potential + clock)
}

/// Canonical equations of the transformed Hamiltonian:
///   dX/dtau   = g(X^t) a(X^t) sharp(R)
///   dX^t/dtau = g(X^t)
///   (nabla_{dX} R)sharp = -g(X^t) b(X^t) grad f(X)
///   dR^t/dtau = -( g'(X^t) (H_p + R^t) + g(X^t) dH_p/dt )
/// with a(t) = p t^(-lambda p - 1), b(t) = C p t^((lambda+1)p - 1) the
/// coefficients of the untransformed Hamiltonian H_p.
pub fn poincare_vector_field(
    manifold: &dyn Manifold,
    es: &ExtendedState,
    params: &BregmanParameters,
    p_ring: f64,
    objective: &Objective,
) -> Result<ExtendedDerivative> {
    require_polynomial(params, "poincare_vector_field")?;
    check_exponents(params.p(), p_ring)?;
    let (p, c, lambda, t) = (params.p(), params.c(), params.lambda(), es.xt);
    if !(t > 0.0) {
        return Err(Error::NonPositive { name: "xt", value: t });
    }
    let g = monitor_function(t, p, p_ring)?;
    // g'(t) = (p/p_ring)(1 - p_ring/p) t^(-p_ring/p)
    let g_prime = p / p_ring * (1.0 - p_ring / p) * t.powf(-p_ring / p);

    let a = p * t.powf(-lambda * p - 1.0);
    let b = c * p * t.powf((lambda + 1.0) * p - 1.0);

    let rr = es.r.cometric_sq(manifold)?;
    let f_val = objective.value(&es.x);
    let grad = riemannian_gradient(manifold, objective, &es.x)?;

    let h_p = 0.5 * a * rr + b * f_val;
    // dH_p/dt at fixed (X, R)
    let dhp_dt = 0.5 * p * (-lambda * p - 1.0) * t.powf(-lambda * p - 2.0) * rr
        + c * p * ((lambda + 1.0) * p - 1.0) * t.powf((lambda + 1.0) * p - 2.0) * f_val;

    let dx = es.r.sharp().scaled(g * a);
    let dr = grad.scaled(-g * b);
    let drt = -(g_prime * (h_p + es.rt) + g * dhp_dt);

    Ok(ExtendedDerivative {
        dx,
        dxt: g,
        dr,
        drt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Euclidean, Sphere};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn rescale_time_examples() {
        assert_eq!(rescale_time(4.0, 2.0, 4.0).unwrap(), 16.0);
        assert_eq!(rescale_time(1.0, 3.0, 7.0).unwrap(), 1.0);
        assert_eq!(rescale_time(5.0, 3.0, 3.0).unwrap(), 5.0);
        assert!(rescale_time(-1.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn monitor_function_examples() {
        assert_relative_eq!(monitor_function(4.0, 4.0, 2.0).unwrap(), 4.0, epsilon = 1e-14);
        assert_relative_eq!(monitor_function(1.0, 2.0, 1.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(monitor_function(9.0, 3.0, 3.0).unwrap(), 1.0, epsilon = 1e-14);
        assert!(monitor_function(0.0, 2.0, 4.0).is_err());
    }

    fn setup() -> (Euclidean, Objective, BregmanParameters) {
        let m = Euclidean::new(2).unwrap();
        let f = Objective::new(
            "quad",
            |x| 0.5 * x.coords().norm_squared(),
            |x| x.coords().clone(),
            ConvexityClass::Convex,
        )
        .unwrap();
        let params = BregmanParameters::new(4.0, 0.5, 1.0, ConvexityClass::Convex).unwrap();
        (m, f, params)
    }

    #[test]
    fn zero_level_initialization_vanishes() {
        let (m, f, params) = setup();
        let x = ManifoldPoint::from_slice(&[0.3, -1.2]);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.5, 0.25])).unwrap();
        let es = ExtendedState::on_zero_level(&m, x, &v, 0.7, &params, &f).unwrap();
        let h_bar = poincare_hamiltonian(&m, &es, &params, 2.0, &f).unwrap();
        assert_relative_eq!(h_bar, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn transformed_hamiltonian_factors_through_monitor() {
        let (m, f, params) = setup();
        let p_ring = 2.0;
        for (xc, rc, xt, rt) in [
            ([1.0, 2.0], [0.2, -0.4], 0.9, 0.3),
            ([-0.5, 0.1], [1.0, 1.0], 2.4, -1.7),
            ([0.0, 0.0], [0.0, 3.0], 0.05, 0.0),
        ] {
            let x = ManifoldPoint::from_slice(&xc);
            let r = Momentum::from_sharp(
                TangentVector::new(x.clone(), DVector::from_column_slice(&rc)).unwrap(),
            );
            let es = ExtendedState::new(x.clone(), xt, r.clone(), rt).unwrap();
            let lhs = poincare_hamiltonian(&m, &es, &params, p_ring, &f).unwrap();
            let h = hamiltonian(&m, &x, &r, xt, &params, &f).unwrap();
            let g = monitor_function(xt, params.p(), p_ring).unwrap();
            assert_relative_eq!(lhs, g * (h + rt), epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn equal_exponents_reduce_to_plain_hamiltonian_shift() {
        let (m, f, params) = setup();
        let x = ManifoldPoint::from_slice(&[0.4, 0.8]);
        let r = Momentum::from_sharp(
            TangentVector::new(x.clone(), DVector::from_column_slice(&[-0.3, 0.6])).unwrap(),
        );
        let es = ExtendedState::new(x.clone(), 1.7, r.clone(), 0.42).unwrap();
        let lhs = poincare_hamiltonian(&m, &es, &params, params.p(), &f).unwrap();
        let h = hamiltonian(&m, &x, &r, 1.7, &params, &f).unwrap();
        assert_relative_eq!(lhs, h + 0.42, epsilon = 1e-13);
    }

    #[test]
    fn clock_component_is_the_monitor() {
        let (m, f, params) = setup();
        let x = ManifoldPoint::from_slice(&[0.3, 0.1]);
        let r = Momentum::from_sharp(TangentVector::zero(x.clone()));
        let es = ExtendedState::new(x, 4.0, r, 0.0).unwrap();
        let d = poincare_vector_field(&m, &es, &params, 2.0, &f).unwrap();
        assert_relative_eq!(d.dxt, 4.0, epsilon = 1e-14);
    }

    #[test]
    fn strongly_convex_class_is_rejected() {
        let m = Sphere::new(3).unwrap();
        let f = Objective::new(
            "zero",
            |_| 0.0,
            |x| DVector::zeros(x.ambient_dim()),
            ConvexityClass::StronglyConvex { mu: 1.0 },
        )
        .unwrap();
        let params =
            BregmanParameters::new(2.0, 1.0, 1.0, ConvexityClass::StronglyConvex { mu: 1.0 })
                .unwrap();
        let x = ManifoldPoint::from_slice(&[1.0, 0.0, 0.0]);
        let r = Momentum::from_sharp(TangentVector::zero(x.clone()));
        let es = ExtendedState::new(x, 1.0, r, 0.0).unwrap();
        assert!(poincare_hamiltonian(&m, &es, &params, 2.0, &f).is_err());
        assert!(poincare_vector_field(&m, &es, &params, 2.0, &f).is_err());
    }
}
