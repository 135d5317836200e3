//! Continuous-time accelerated dynamics: a one-parameter family of damped
//! flows whose Lagrangian/Hamiltonian pair certifies an O(1/t^p) decrease of
//! the objective gap on convex and weakly-quasi-convex problems, and an
//! exponential decrease on strongly convex ones. The curvature constant zeta
//! from `geometry` enters both the damping and the certified rate.

mod poincare;

pub use poincare::{
    monitor_function, poincare_hamiltonian, poincare_vector_field, rescale_time,
    ExtendedDerivative, ExtendedState,
};

use crate::error::{Error, Result};
use crate::geometry::{
    riemannian_gradient, ConvexityClass, Manifold, ManifoldPoint, Objective, TangentVector,
    CONSTRAINT_TOL,
};

/// Parameters of the accelerated flow: rate exponent `p`, scale `C`,
/// curvature constant `zeta`, and the convexity class. `lambda` (polynomial
/// classes) and `eta` (strongly convex) are the derived damping constants.
#[derive(Clone, Copy, Debug)]
pub struct BregmanParameters {
    p: f64,
    c: f64,
    zeta: f64,
    class: ConvexityClass,
    lambda: f64,
    eta: f64,
}

impl BregmanParameters {
    pub fn new(p: f64, c: f64, zeta: f64, class: ConvexityClass) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositive { name: "p", value: p });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonPositive { name: "C", value: c });
        }
        if !(zeta >= 1.0) || !zeta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "zeta",
                reason: format!("curvature constant must be >= 1, got {zeta}"),
            });
        }
        class.validate()?;
        let lambda = match class {
            ConvexityClass::Convex => zeta,
            ConvexityClass::WeaklyQuasiConvex { alpha } => zeta / alpha,
            ConvexityClass::StronglyConvex { .. } => zeta,
        };
        let eta = match class {
            ConvexityClass::StronglyConvex { mu } => {
                (1.0 / zeta.sqrt() + zeta.sqrt()) * mu.sqrt()
            }
            _ => 0.0,
        };
        Ok(Self {
            p,
            c,
            zeta,
            class,
            lambda,
            eta,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn class(&self) -> ConvexityClass {
        self.class
    }

    /// Damping exponent zeta (convex) or zeta/alpha (weakly quasi-convex).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Constant damping (1/sqrt(zeta) + sqrt(zeta)) sqrt(mu) of the strongly
    /// convex flow. Zero for the polynomial classes.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self.class, ConvexityClass::StronglyConvex { .. })
    }

    /// Coefficient of f in the Lagrangian potential term at time t.
    fn potential_coeff(&self, t: f64) -> f64 {
        if self.is_polynomial() {
            self.c * self.p * t.powf((self.lambda + 1.0) * self.p - 1.0)
        } else {
            (self.eta * t).exp()
        }
    }

    /// Coefficient of <V, V> in the kinetic term: t^(lambda p + 1) / (2 p)
    /// polynomially, e^(eta t) / 2 for strong convexity.
    fn kinetic_coeff(&self, t: f64) -> f64 {
        if self.is_polynomial() {
            t.powf(self.lambda * self.p + 1.0) / (2.0 * self.p)
        } else {
            (self.eta * t).exp() / 2.0
        }
    }

    fn require_time(&self, t: f64) -> Result<()> {
        if self.is_polynomial() && !(t > 0.0) {
            return Err(Error::NonPositive { name: "t", value: t });
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("time must be finite, got {t}"),
            });
        }
        Ok(())
    }
}

/// Position, velocity and the flow's internal clock.
#[derive(Clone, Debug)]
pub struct DynamicsState {
    pub x: ManifoldPoint,
    pub v: TangentVector,
    pub t: f64,
}

impl DynamicsState {
    pub fn new(x: ManifoldPoint, v: TangentVector, t: f64) -> Result<Self> {
        if !v.base().same_point(&x, CONSTRAINT_TOL) {
            return Err(Error::BaseMismatch);
        }
        if !(t > 0.0) {
            return Err(Error::NonPositive { name: "t", value: t });
        }
        Ok(Self { x, v, t })
    }
}

/// Momentum covector, stored through the metric isomorphism as the tangent
/// vector it pairs to: <R, w> = <sharp(R), w>_x for every tangent w.
#[derive(Clone, Debug)]
pub struct Momentum {
    sharp: TangentVector,
}

impl Momentum {
    /// Covector g_x(v, .) obtained by lowering a tangent vector.
    pub fn flat(v: TangentVector) -> Self {
        Self { sharp: v }
    }

    pub fn from_sharp(v: TangentVector) -> Self {
        Self { sharp: v }
    }

    pub fn sharp(&self) -> &TangentVector {
        &self.sharp
    }

    /// Duality pairing <R, w>.
    pub fn pair(&self, manifold: &dyn Manifold, w: &TangentVector) -> Result<f64> {
        manifold.metric(&self.sharp, w)
    }

    /// Cometric square <<R, R>> = g^{-1}(R, R).
    pub fn cometric_sq(&self, manifold: &dyn Manifold) -> Result<f64> {
        manifold.metric(&self.sharp, &self.sharp)
    }

    /// Momentum conjugate to velocity `v` at time `t`: the kinetic term's
    /// fiber derivative, sharp(R) = t^(lambda p + 1)/p V (polynomial) or
    /// e^(eta t) V (strongly convex).
    pub fn conjugate_to(
        v: &TangentVector,
        params: &BregmanParameters,
        t: f64,
    ) -> Result<Self> {
        params.require_time(t)?;
        Ok(Self {
            sharp: v.scaled(2.0 * params.kinetic_coeff(t)),
        })
    }
}

/// L(X, V, t) = kinetic(t) <V, V> - potential(t) f(X).
pub fn lagrangian(
    manifold: &dyn Manifold,
    state: &DynamicsState,
    params: &BregmanParameters,
    objective: &Objective,
) -> Result<f64> {
    params.require_time(state.t)?;
    let vv = manifold.metric(&state.v, &state.v)?;
    Ok(params.kinetic_coeff(state.t) * vv - params.potential_coeff(state.t) * objective.value(&state.x))
}

/// H(X, R, t) = <<R, R>> / (4 kinetic(t)) + potential(t) f(X), the Legendre
/// dual of `lagrangian`.
pub fn hamiltonian(
    manifold: &dyn Manifold,
    x: &ManifoldPoint,
    r: &Momentum,
    t: f64,
    params: &BregmanParameters,
    objective: &Objective,
) -> Result<f64> {
    params.require_time(t)?;
    let rr = r.cometric_sq(manifold)?;
    Ok(rr / (4.0 * params.kinetic_coeff(t)) + params.potential_coeff(t) * objective.value(x))
}

/// Covariant acceleration of the flow, the Euler-Lagrange equation solved
/// for nabla_V V:
///   polynomial: -(lambda p + 1)/t V - C p^2 t^(p-2) grad f(X)
///   strongly convex: -eta V - grad f(X)
pub fn el_acceleration(
    manifold: &dyn Manifold,
    state: &DynamicsState,
    params: &BregmanParameters,
    objective: &Objective,
) -> Result<TangentVector> {
    params.require_time(state.t)?;
    let grad = riemannian_gradient(manifold, objective, &state.x)?;
    let (damping, grad_coeff) = el_coefficients(params, state.t);
    state.v.lin_comb(damping, &grad, grad_coeff)
}

/// (velocity coefficient, gradient coefficient) of the first-order form.
pub(crate) fn el_coefficients(params: &BregmanParameters, t: f64) -> (f64, f64) {
    if params.is_polynomial() {
        (
            -(params.lambda * params.p + 1.0) / t,
            -params.c * params.p * params.p * t.powf(params.p - 2.0),
        )
    } else {
        (-params.eta, -1.0)
    }
}

/// Certified decrease certificate for the polynomial flows:
///   E(t) = C a^2 t^p (f(X) - f*) + (zeta - 1)/2 ||log_X(x*)||^2
///          + 1/2 ||(a t / p) V - log_X(x*)||^2
/// with a = 1 for the convex class and a = alpha for the weakly
/// quasi-convex one. Non-increasing along exact trajectories; E(0) is
/// zeta/2 d(x0, x*)^2.
pub fn lyapunov_energy(
    manifold: &dyn Manifold,
    state: &DynamicsState,
    x_star: &ManifoldPoint,
    params: &BregmanParameters,
    objective: &Objective,
) -> Result<f64> {
    let alpha = match params.class {
        ConvexityClass::Convex => 1.0,
        ConvexityClass::WeaklyQuasiConvex { alpha } => alpha,
        ConvexityClass::StronglyConvex { .. } => {
            return Err(Error::UnsupportedClass {
                op: "lyapunov_energy",
                class: "strongly-convex",
            })
        }
    };
    let t = state.t;
    if !(t >= 0.0) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    let gap = objective.value(&state.x) - objective.value(x_star);
    let log_to_star = manifold.log_map(&state.x, x_star)?;
    let drift = state.v.lin_comb(alpha * t / params.p, &log_to_star, -1.0)?;
    let drift_sq = manifold.metric(&drift, &drift)?;
    let log_sq = manifold.metric(&log_to_star, &log_to_star)?;
    Ok(params.c * alpha * alpha * t.powf(params.p) * gap
        + 0.5 * (params.zeta - 1.0) * log_sq
        + 0.5 * drift_sq)
}

/// Certified upper bound on the objective gap at time t of the flow,
/// given the initial log-distance d0 = ||log_{x0}(x*)|| (and, for the
/// strongly convex class, the initial gap):
///   convex:  zeta d0^2 / (2 C t^p)
///   wqc:     zeta d0^2 / (2 C alpha^2 t^p)
///   sc:      (mu d0^2 + 2 (f(x0) - f*)) / (2 e^(sqrt(mu/zeta) t))
pub fn convergence_bound(
    params: &BregmanParameters,
    t: f64,
    log_dist0: f64,
    f_gap0: f64,
) -> Result<f64> {
    if log_dist0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "log_dist0",
            reason: format!("distance must be nonnegative, got {log_dist0}"),
        });
    }
    match params.class {
        ConvexityClass::Convex => {
            params.require_time(t)?;
            Ok(params.zeta * log_dist0 * log_dist0 / (2.0 * params.c * t.powf(params.p)))
        }
        ConvexityClass::WeaklyQuasiConvex { alpha } => {
            params.require_time(t)?;
            Ok(params.zeta * log_dist0 * log_dist0
                / (2.0 * params.c * alpha * alpha * t.powf(params.p)))
        }
        ConvexityClass::StronglyConvex { mu } => {
            if !(t >= 0.0) {
                return Err(Error::NonPositive { name: "t", value: t });
            }
            let rate = (mu / params.zeta).sqrt();
            Ok((mu * log_dist0 * log_dist0 + 2.0 * f_gap0) / (2.0 * (rate * t).exp()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Euclidean, Sphere};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn quadratic_1d() -> (Euclidean, Objective) {
        let m = Euclidean::new(1).unwrap();
        let f = Objective::new(
            "half-square",
            |x| 0.5 * x.coords()[0] * x.coords()[0],
            |x| DVector::from_column_slice(&[x.coords()[0]]),
            ConvexityClass::Convex,
        )
        .unwrap()
        .with_minimizer(ManifoldPoint::from_slice(&[0.0]), 0.0);
        (m, f)
    }

    fn params_convex() -> BregmanParameters {
        BregmanParameters::new(2.0, 0.25, 1.0, ConvexityClass::Convex).unwrap()
    }

    #[test]
    fn lambda_and_eta_are_derived_from_the_class() {
        let p = BregmanParameters::new(2.0, 1.0, 1.5, ConvexityClass::Convex).unwrap();
        assert_eq!(p.lambda(), 1.5);

        let p = BregmanParameters::new(
            2.0,
            1.0,
            1.5,
            ConvexityClass::WeaklyQuasiConvex { alpha: 0.5 },
        )
        .unwrap();
        assert_eq!(p.lambda(), 3.0);

        let zeta: f64 = 2.0;
        let mu: f64 = 4.0;
        let p =
            BregmanParameters::new(2.0, 1.0, zeta, ConvexityClass::StronglyConvex { mu }).unwrap();
        let expected = (1.0 / zeta.sqrt() + zeta.sqrt()) * mu.sqrt();
        assert_relative_eq!(p.eta(), expected, epsilon = 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(BregmanParameters::new(0.0, 1.0, 1.0, ConvexityClass::Convex).is_err());
        assert!(BregmanParameters::new(2.0, -1.0, 1.0, ConvexityClass::Convex).is_err());
        assert!(BregmanParameters::new(2.0, 1.0, 0.5, ConvexityClass::Convex).is_err());
    }

    #[test]
    fn lagrangian_on_the_line_matches_hand_value() {
        // p=2, C=1/4, zeta=1, t=1, X=1, V=1, f=x^2/2:
        // kinetic = 1/4 * 1, potential = 1/2 * 1/2 -> L = 1/4 - 1/4 ... with
        // C p t^{2p-1} = 1/2 the potential coefficient: L = 0.25 - 0.25 = 0.
        let (m, f) = quadratic_1d();
        let params = params_convex();
        let x = ManifoldPoint::from_slice(&[1.0]);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[1.0])).unwrap();
        let state = DynamicsState::new(x, v, 1.0).unwrap();
        let l = lagrangian(&m, &state, &params, &f).unwrap();
        assert_relative_eq!(l, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lagrangian_rejects_nonpositive_time_for_polynomial_classes() {
        let (m, f) = quadratic_1d();
        let params = params_convex();
        let x = ManifoldPoint::from_slice(&[1.0]);
        let v = TangentVector::zero(x.clone());
        let state = DynamicsState {
            x,
            v,
            t: 0.0,
        };
        assert!(lagrangian(&m, &state, &params, &f).is_err());
    }

    #[test]
    fn legendre_identity_links_lagrangian_and_hamiltonian() {
        // With R conjugate to V: H + L = <R, V>.
        let (m, f) = quadratic_1d();
        for (params, t) in [
            (params_convex(), 0.7),
            (
                BregmanParameters::new(
                    4.0,
                    0.5,
                    1.2,
                    ConvexityClass::WeaklyQuasiConvex { alpha: 0.8 },
                )
                .unwrap(),
                1.3,
            ),
            (
                BregmanParameters::new(2.0, 1.0, 1.1, ConvexityClass::StronglyConvex { mu: 2.0 })
                    .unwrap(),
                0.4,
            ),
        ] {
            let x = ManifoldPoint::from_slice(&[-0.3]);
            let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.9])).unwrap();
            let state = DynamicsState::new(x.clone(), v.clone(), t).unwrap();
            let r = Momentum::conjugate_to(&v, &params, t).unwrap();
            let h = hamiltonian(&m, &x, &r, t, &params, &f).unwrap();
            let l = lagrangian(&m, &state, &params, &f).unwrap();
            let pairing = r.pair(&m, &v).unwrap();
            assert_relative_eq!(h + l, pairing, epsilon = 1e-13, max_relative = 1e-12);
        }
    }

    #[test]
    fn el_acceleration_matches_hand_coefficients() {
        // Convex, p=2, zeta=1, C=1/4, t=1: nabla_V V = -3V - grad f.
        let (m, f) = quadratic_1d();
        let params = params_convex();
        let x = ManifoldPoint::from_slice(&[2.0]);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.5])).unwrap();
        let state = DynamicsState::new(x.clone(), v, 1.0).unwrap();
        let a = el_acceleration(&m, &state, &params, &f).unwrap();
        // -3 * 0.5 - 2.0 = -3.5
        assert_relative_eq!(a.components()[0], -3.5, epsilon = 1e-14);
    }

    #[test]
    fn strongly_convex_acceleration_uses_constant_damping() {
        let m = Euclidean::new(1).unwrap();
        let f = Objective::new(
            "half-square",
            |x| 0.5 * x.coords()[0] * x.coords()[0],
            |x| DVector::from_column_slice(&[x.coords()[0]]),
            ConvexityClass::StronglyConvex { mu: 1.0 },
        )
        .unwrap();
        let params =
            BregmanParameters::new(2.0, 1.0, 1.0, ConvexityClass::StronglyConvex { mu: 1.0 })
                .unwrap();
        assert_relative_eq!(params.eta(), 2.0, epsilon = 1e-15);
        let x = ManifoldPoint::from_slice(&[1.0]);
        let v = TangentVector::new(x.clone(), DVector::from_column_slice(&[1.0])).unwrap();
        let state = DynamicsState::new(x, v, 1.0).unwrap();
        let a = el_acceleration(&m, &state, &params, &f).unwrap();
        // -eta * 1 - grad = -2 - 1
        assert_relative_eq!(a.components()[0], -3.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_energy_on_the_line() {
        // Convex, p=2, C=1/4, zeta=1, X=1, V=0, t=2, x*=0, f=x^2/2:
        // E = 1/4 * 4 * 1/2 + 0 + 1/2 |0 - (0-1)|^2 = 1.
        let (m, f) = quadratic_1d();
        let params = params_convex();
        let x = ManifoldPoint::from_slice(&[1.0]);
        let v = TangentVector::zero(x.clone());
        let state = DynamicsState::new(x, v, 2.0).unwrap();
        let x_star = ManifoldPoint::from_slice(&[0.0]);
        let e = lyapunov_energy(&m, &state, &x_star, &params, &f).unwrap();
        assert_relative_eq!(e, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lyapunov_energy_at_time_zero_is_half_zeta_distance_squared() {
        let (m, f) = quadratic_1d();
        let zeta = 1.4;
        let params = BregmanParameters::new(2.0, 0.25, zeta, ConvexityClass::Convex).unwrap();
        let x = ManifoldPoint::from_slice(&[3.0]);
        let state = DynamicsState {
            x: x.clone(),
            v: TangentVector::zero(x),
            t: 0.0,
        };
        let x_star = ManifoldPoint::from_slice(&[0.0]);
        let e = lyapunov_energy(&m, &state, &x_star, &params, &f).unwrap();
        assert_relative_eq!(e, 0.5 * zeta * 9.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_energy_rejects_strongly_convex_class() {
        let m = Euclidean::new(1).unwrap();
        let f = Objective::new(
            "half-square",
            |x| 0.5 * x.coords()[0] * x.coords()[0],
            |x| DVector::from_column_slice(&[x.coords()[0]]),
            ConvexityClass::StronglyConvex { mu: 1.0 },
        )
        .unwrap();
        let params =
            BregmanParameters::new(2.0, 1.0, 1.0, ConvexityClass::StronglyConvex { mu: 1.0 })
                .unwrap();
        let x = ManifoldPoint::from_slice(&[1.0]);
        let state = DynamicsState::new(x.clone(), TangentVector::zero(x), 1.0).unwrap();
        let x_star = ManifoldPoint::from_slice(&[0.0]);
        assert!(matches!(
            lyapunov_energy(&m, &state, &x_star, &params, &f),
            Err(Error::UnsupportedClass { .. })
        ));
    }

    #[test]
    fn convergence_bound_values() {
        // Convex: zeta=1, C=1/4, p=2, d0=1, t=2 -> 1/(2 * 1/4 * 4) = 0.5.
        let params = params_convex();
        let b = convergence_bound(&params, 2.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(b, 0.5, epsilon = 1e-15);

        // SC: mu=1, zeta=1, d0=1, gap0=0.5, t=0 -> (1 + 1)/2 = 1.
        let params =
            BregmanParameters::new(2.0, 1.0, 1.0, ConvexityClass::StronglyConvex { mu: 1.0 })
                .unwrap();
        let b = convergence_bound(&params, 0.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(b, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn convergence_bound_rejects_bad_time() {
        let params = params_convex();
        assert!(convergence_bound(&params, 0.0, 1.0, 0.0).is_err());
        assert!(convergence_bound(&params, -1.0, 1.0, 0.0).is_err());
        let sc = BregmanParameters::new(2.0, 1.0, 1.0, ConvexityClass::StronglyConvex { mu: 1.0 })
            .unwrap();
        assert!(convergence_bound(&sc, -0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn momentum_pairing_is_metric_against_sharp() {
        let m = Sphere::new(3).unwrap();
        let x = ManifoldPoint::from_slice(&[1.0, 0.0, 0.0]);
        let u = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.0, 2.0, 1.0]))
            .unwrap();
        let w = TangentVector::new(x.clone(), DVector::from_column_slice(&[0.0, -1.0, 3.0]))
            .unwrap();
        let r = Momentum::flat(u.clone());
        assert_relative_eq!(
            r.pair(&m, &w).unwrap(),
            m.metric(&u, &w).unwrap(),
            epsilon = 1e-15
        );
    }
}
