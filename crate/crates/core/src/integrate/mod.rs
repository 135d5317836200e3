//! Discrete algorithms: semi-implicit Euler integration of the accelerated
//! flow (two gradient-evaluation variants), a Riemannian gradient-descent
//! baseline, a projected RK4 reference integrator for validating the
//! continuous-time claims, and log-log rate fitting.

mod rate;
mod reference;

pub use rate::{default_window, estimate_rate, estimate_rate_points, RateEstimate};
pub use reference::{
    reference_el_checkpoints, reference_geodesic, reference_integrate, reference_poincare,
    PoincareSample,
};

use crate::dynamics::{lyapunov_energy, BregmanParameters, DynamicsState};
use crate::error::{Error, Result};
use crate::geometry::{
    riemannian_gradient, Manifold, ManifoldPoint, Objective, TangentVector,
};

/// Gradient evaluation point of the semi-implicit step: `I` uses the current
/// iterate, `II` the look-ahead point reached by the damped velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepVersion {
    I,
    II,
}

impl StepVersion {
    pub fn label(&self) -> &'static str {
        match self {
            StepVersion::I => "I",
            StepVersion::II => "II",
        }
    }
}

/// Knobs of the discrete algorithm. Flow constants (p, C, zeta, class) live
/// in `BregmanParameters`; everything else here is discretization.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub params: BregmanParameters,
    pub h: f64,
    pub version: StepVersion,
    pub max_iters: usize,
    pub stop_tolerance: f64,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn new(params: BregmanParameters, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::NonPositive { name: "h", value: h });
        }
        Ok(Self {
            params,
            h,
            version: StepVersion::I,
            max_iters: 10_000,
            stop_tolerance: 0.0,
            record_every: 1,
        })
    }

    pub fn with_version(mut self, version: StepVersion) -> Self {
        self.version = version;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        self.max_iters = max_iters;
        Ok(self)
    }

    pub fn with_stop_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "stop_tolerance",
                reason: format!("must be nonnegative, got {tol}"),
            });
        }
        self.stop_tolerance = tol;
        Ok(self)
    }

    pub fn with_record_every(mut self, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                reason: "must be at least 1".into(),
            });
        }
        self.record_every = every;
        Ok(self)
    }
}

/// One recorded iterate. `f_gap` and `lyapunov` are present only when the
/// objective knows its optimum (and, for `lyapunov`, the class admits the
/// energy and the minimizer is within log-map range).
#[derive(Clone, Debug)]
pub struct Sample {
    pub k: usize,
    pub t: f64,
    pub x: ManifoldPoint,
    pub v: TangentVector,
    pub f_gap: Option<f64>,
    pub grad_norm: f64,
    pub lyapunov: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RecordMeta {
    pub algorithm: String,
    pub objective: String,
    pub manifold: String,
    pub seed: Option<u64>,
    pub config: Option<IntegratorConfig>,
}

/// Iterate index k corresponds to physical time t = k h; the initial point is
/// the k = 1 iterate, matching a flow started at t0 = h. Reference-integrator
/// records reuse the type with k a plain step counter and t the true time.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub meta: RecordMeta,
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("records hold at least the initial sample")
    }

    /// First iterate whose gap is at or below `gap`, if any.
    pub fn first_reaching_gap(&self, gap: f64) -> Option<usize> {
        self.samples
            .iter()
            .find(|s| s.f_gap.is_some_and(|g| g <= gap))
            .map(|s| s.k)
    }
}

/// Damping and gradient coefficients (b_k, c_k) of iteration k:
///   strongly convex: b_k = 1 - h (1/sqrt(zeta) + sqrt(zeta)) sqrt(mu), c_k = 1
///   polynomial:      b_k = 1 - (lambda p + 1)/k, c_k = C p^2 (k h)^(p-2)
/// Early iterations of the polynomial branch have b_k <= 0; they damp the
/// initial velocity and are kept exactly as stated.
pub fn step_coefficients(params: &BregmanParameters, h: f64, k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "iteration index starts at 1".into(),
        });
    }
    if params.is_polynomial() {
        let kf = k as f64;
        let b = 1.0 - (params.lambda() * params.p() + 1.0) / kf;
        let c = params.c() * params.p() * params.p() * (kf * h).powf(params.p() - 2.0);
        Ok((b, c))
    } else {
        Ok((1.0 - h * params.eta(), 1.0))
    }
}

/// One semi-implicit Euler step: damp the velocity, take a gradient
/// correction (at the iterate for Version I, at the look-ahead point
/// exp_x(h b_k v_k) for Version II), move along the result, and transport it
/// to the new point:
///   a_k     = b_k v_k - h c_k grad
///   x_{k+1} = exp_x(h a_k)
///   v_{k+1} = transport(x_k -> x_{k+1}, a_k)
pub fn semi_implicit_step(
    manifold: &dyn Manifold,
    x_k: &ManifoldPoint,
    v_k: &TangentVector,
    k: usize,
    config: &IntegratorConfig,
    objective: &Objective,
) -> Result<(ManifoldPoint, TangentVector)> {
    let grad = riemannian_gradient(manifold, objective, x_k)?;
    step_from_gradient(manifold, x_k, v_k, k, config, objective, &grad)
}

/// Step with the gradient at x_k already known. Version II ignores it and
/// evaluates at the look-ahead point, transporting the result back to x_k.
pub(crate) fn step_from_gradient(
    manifold: &dyn Manifold,
    x_k: &ManifoldPoint,
    v_k: &TangentVector,
    k: usize,
    config: &IntegratorConfig,
    objective: &Objective,
    grad_at_x: &TangentVector,
) -> Result<(ManifoldPoint, TangentVector)> {
    let (b, c) = step_coefficients(&config.params, config.h, k)?;
    let grad = match config.version {
        StepVersion::I => grad_at_x.clone(),
        StepVersion::II => {
            let look = manifold.exp_map(x_k, &v_k.scaled(config.h * b))?;
            let grad_look = riemannian_gradient(manifold, objective, &look)?;
            manifold.parallel_transport(&look, x_k, &grad_look)?
        }
    };
    let a = v_k.lin_comb(b, &grad, -config.h * c)?;
    if !a.components().iter().all(|c| c.is_finite()) {
        return Err(Error::Diverged {
            iteration: k,
            partial: None,
        });
    }
    let x_next = manifold.exp_map(x_k, &a.scaled(config.h))?;
    let v_next = manifold.parallel_transport(x_k, &x_next, &a)?;
    Ok((x_next, v_next))
}

/// Run the discrete algorithm from `x0` (velocity `v0`, zero when omitted)
/// until the gradient norm falls to `stop_tolerance` or the iterate index
/// reaches `max_iters`. Samples land every `record_every` iterations plus
/// always the first and last. Deterministic for fixed inputs.
pub fn run(
    config: &IntegratorConfig,
    objective: &Objective,
    manifold: &dyn Manifold,
    x0: &ManifoldPoint,
    v0: Option<TangentVector>,
) -> Result<TrajectoryRecord> {
    let v0 = v0.unwrap_or_else(|| TangentVector::zero(x0.clone()));
    manifold.check_point(x0)?;
    manifold.check_tangent(&v0)?;

    let meta = RecordMeta {
        algorithm: format!("bregman-{}", config.version.label()),
        objective: objective.name().to_string(),
        manifold: manifold.name().to_string(),
        seed: None,
        config: Some(*config),
    };
    let mut record = TrajectoryRecord {
        meta,
        samples: Vec::new(),
    };

    let mut x = x0.clone();
    let mut v = v0;
    let mut grad = riemannian_gradient(manifold, objective, &x)?;
    let initial_gap = objective.f_gap(&x);
    record
        .samples
        .push(observe(manifold, objective, config, 1, &x, &v, &grad));

    let mut k = 1usize;
    while k < config.max_iters {
        if manifold.norm(&grad) <= config.stop_tolerance {
            break;
        }
        let (x_next, v_next) =
            match step_from_gradient(manifold, &x, &v, k, config, objective, &grad) {
                Ok(next) => next,
                Err(Error::Diverged { iteration, .. }) => {
                    return Err(Error::Diverged {
                        iteration,
                        partial: Some(Box::new(record)),
                    })
                }
                Err(e) => return Err(e),
            };
        x = x_next;
        v = v_next;
        k += 1;
        grad = riemannian_gradient(manifold, objective, &x)?;

        let finite = x.coords().iter().all(|c| c.is_finite())
            && v.components().iter().all(|c| c.is_finite());
        let gap_now = objective.f_gap(&x);
        let blew_up = match (initial_gap, gap_now) {
            (Some(g0), Some(g)) => g > 1e6 * g0.abs().max(f64::MIN_POSITIVE),
            _ => false,
        };
        if !finite || blew_up {
            record
                .samples
                .push(observe(manifold, objective, config, k, &x, &v, &grad));
            return Err(Error::Diverged {
                iteration: k,
                partial: Some(Box::new(record)),
            });
        }

        if k % config.record_every == 0 || k == config.max_iters {
            record
                .samples
                .push(observe(manifold, objective, config, k, &x, &v, &grad));
        }
    }

    if record.final_sample().k != k {
        record
            .samples
            .push(observe(manifold, objective, config, k, &x, &v, &grad));
    }
    Ok(record)
}

fn observe(
    manifold: &dyn Manifold,
    objective: &Objective,
    config: &IntegratorConfig,
    k: usize,
    x: &ManifoldPoint,
    v: &TangentVector,
    grad: &TangentVector,
) -> Sample {
    let t = k as f64 * config.h;
    let f_gap = objective.f_gap(x);
    let lyapunov = lyapunov_for(manifold, objective, &config.params, x, v, t);
    Sample {
        k,
        t,
        x: x.clone(),
        v: v.clone(),
        f_gap,
        grad_norm: manifold.norm(grad),
        lyapunov,
    }
}

pub(crate) fn lyapunov_for(
    manifold: &dyn Manifold,
    objective: &Objective,
    params: &BregmanParameters,
    x: &ManifoldPoint,
    v: &TangentVector,
    t: f64,
) -> Option<f64> {
    if !params.is_polynomial() {
        return None;
    }
    let x_star = objective.minimizer()?;
    let state = DynamicsState {
        x: x.clone(),
        v: v.clone(),
        t,
    };
    lyapunov_energy(manifold, &state, x_star, params, objective).ok()
}

/// Riemannian gradient descent x_{k+1} = exp_x(-h grad f(x_k)), the baseline
/// the accelerated methods are measured against.
pub fn gradient_descent_step(
    manifold: &dyn Manifold,
    x_k: &ManifoldPoint,
    config: &IntegratorConfig,
    objective: &Objective,
) -> Result<ManifoldPoint> {
    let grad = riemannian_gradient(manifold, objective, x_k)?;
    manifold.exp_map(x_k, &grad.scaled(-config.h))
}

/// Gradient-descent driver with the same stopping rule and recording scheme
/// as `run`. The recorded velocity slot holds -grad f(x_k), the step
/// direction per unit time.
pub fn run_gradient_descent(
    config: &IntegratorConfig,
    objective: &Objective,
    manifold: &dyn Manifold,
    x0: &ManifoldPoint,
) -> Result<TrajectoryRecord> {
    manifold.check_point(x0)?;
    let meta = RecordMeta {
        algorithm: "rgd".to_string(),
        objective: objective.name().to_string(),
        manifold: manifold.name().to_string(),
        seed: None,
        config: Some(*config),
    };
    let mut record = TrajectoryRecord {
        meta,
        samples: Vec::new(),
    };

    let mut x = x0.clone();
    let mut grad = riemannian_gradient(manifold, objective, &x)?;
    let initial_gap = objective.f_gap(&x);
    record
        .samples
        .push(observe_rgd(manifold, objective, config, 1, &x, &grad));

    let mut k = 1usize;
    while k < config.max_iters {
        if manifold.norm(&grad) <= config.stop_tolerance {
            break;
        }
        x = manifold.exp_map(&x, &grad.scaled(-config.h))?;
        k += 1;
        grad = riemannian_gradient(manifold, objective, &x)?;

        let blew_up = match (initial_gap, objective.f_gap(&x)) {
            (Some(g0), Some(g)) => g > 1e6 * g0.abs().max(f64::MIN_POSITIVE),
            _ => false,
        };
        if !x.coords().iter().all(|c| c.is_finite()) || blew_up {
            record
                .samples
                .push(observe_rgd(manifold, objective, config, k, &x, &grad));
            return Err(Error::Diverged {
                iteration: k,
                partial: Some(Box::new(record)),
            });
        }
        if k % config.record_every == 0 || k == config.max_iters {
            record
                .samples
                .push(observe_rgd(manifold, objective, config, k, &x, &grad));
        }
    }

    if record.final_sample().k != k {
        record
            .samples
            .push(observe_rgd(manifold, objective, config, k, &x, &grad));
    }
    Ok(record)
}

fn observe_rgd(
    manifold: &dyn Manifold,
    objective: &Objective,
    config: &IntegratorConfig,
    k: usize,
    x: &ManifoldPoint,
    grad: &TangentVector,
) -> Sample {
    Sample {
        k,
        t: k as f64 * config.h,
        x: x.clone(),
        v: grad.scaled(-1.0),
        f_gap: objective.f_gap(x),
        grad_norm: manifold.norm(grad),
        lyapunov: None,
    }
}
