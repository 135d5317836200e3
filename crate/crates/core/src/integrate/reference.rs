//! RK4 reference integrator in ambient coordinates for the continuous flows.
//! Right-hand sides carry the embedding's normal completion (see
//! `Manifold::tangent_field_normal_term`), so the method keeps its full
//! fourth order; the per-step projection only repairs rounding-level
//! constraint drift.

use nalgebra::DVector;

use crate::dynamics::{
    el_coefficients, poincare_hamiltonian, poincare_vector_field, rescale_time,
    BregmanParameters, DynamicsState, ExtendedState, Momentum,
};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint, Objective, TangentVector};

/// Classical RK4 with n = ceil(span / h) equal steps, landing on `t_end`
/// exactly. `project` repairs the state after every accepted step; `observe`
/// sees step index 0 (the initial state) and every accepted step.
fn rk4_drive<R, P, O>(
    mut y: DVector<f64>,
    t0: f64,
    t_end: f64,
    h: f64,
    rhs: R,
    project: P,
    mut observe: O,
) -> Result<DVector<f64>>
where
    R: Fn(f64, &DVector<f64>) -> Result<DVector<f64>>,
    P: Fn(&mut DVector<f64>) -> Result<()>,
    O: FnMut(usize, f64, &DVector<f64>) -> Result<()>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositive { name: "h", value: h });
    }
    let span = t_end - t0;
    if !(span >= 0.0) || !span.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: format!("integration runs forward from {t0}, got t_end {t_end}"),
        });
    }
    observe(0, t0, &y)?;
    if span == 0.0 {
        return Ok(y);
    }
    let n = (span / h).ceil().max(1.0) as usize;
    let step = span / n as f64;
    for i in 1..=n {
        let t = t0 + (i - 1) as f64 * step;
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + step / 2.0, &(&y + &k1 * (step / 2.0)))?;
        let k3 = rhs(t + step / 2.0, &(&y + &k2 * (step / 2.0)))?;
        let k4 = rhs(t + step, &(&y + &k3 * step))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        project(&mut y)?;
        let t_next = if i == n { t_end } else { t0 + i as f64 * step };
        observe(i, t_next, &y)?;
    }
    Ok(y)
}

fn pack2(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.len();
    let mut y = DVector::zeros(2 * n);
    y.rows_mut(0, n).copy_from(a);
    y.rows_mut(n, n).copy_from(b);
    y
}

/// Endpoint of the damped flow started from `state0`, integrated to `t_end`
/// with nominal step `h`. Substep evaluation points sit O(step^2) off the
/// manifold; the field is extended by evaluating the gradient at the nearest
/// manifold point, which agrees with the true field on the manifold.
pub fn reference_integrate(
    manifold: &dyn Manifold,
    objective: &Objective,
    params: &BregmanParameters,
    state0: &DynamicsState,
    t_end: f64,
    h: f64,
) -> Result<DynamicsState> {
    manifold.check_point(&state0.x)?;
    manifold.check_tangent(&state0.v)?;
    if params.is_polynomial() && !(state0.t > 0.0) {
        return Err(Error::NonPositive {
            name: "t0",
            value: state0.t,
        });
    }
    let n = manifold.ambient_dim();

    let rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
        let v = y.rows(n, n).into_owned();
        let grad = manifold.euclidean_to_riemannian(&x, &objective.euclidean_gradient(&x));
        let (damping, grad_coeff) = el_coefficients(params, t);
        let mut dv = &v * damping + grad.components() * grad_coeff;
        dv += manifold.tangent_field_normal_term(x.coords(), &v, &v);
        Ok(pack2(&v, &dv))
    };
    let project = |y: &mut DVector<f64>| -> Result<()> {
        let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
        let v = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
        y.rows_mut(0, n).copy_from(x.coords());
        y.rows_mut(n, n).copy_from(v.components());
        Ok(())
    };

    let y0 = pack2(state0.x.coords(), state0.v.components());
    let y = rk4_drive(y0, state0.t, t_end, h, rhs, project, |_, _, _| Ok(()))?;
    let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
    let v = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
    Ok(DynamicsState { x, v, t: t_end })
}

/// Flow states at each of `times` (nondecreasing, first at or after
/// `state0.t`), each leg integrated with nominal step `h`.
pub fn reference_el_checkpoints(
    manifold: &dyn Manifold,
    objective: &Objective,
    params: &BregmanParameters,
    state0: &DynamicsState,
    times: &[f64],
    h: f64,
) -> Result<Vec<DynamicsState>> {
    let mut out = Vec::with_capacity(times.len());
    let mut cur = state0.clone();
    for &t in times {
        if t < cur.t {
            return Err(Error::InvalidParameter {
                name: "times",
                reason: format!("checkpoints must not go backward: {t} < {}", cur.t),
            });
        }
        cur = reference_integrate(manifold, objective, params, &cur, t, h)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Endpoint (position, velocity) at parameter `t_end` of the geodesic leaving
/// `x0` with velocity `v0`, solved numerically. Exists to cross-check the
/// closed-form exponential maps against an oracle that shares none of their
/// trigonometry.
pub fn reference_geodesic(
    manifold: &dyn Manifold,
    x0: &ManifoldPoint,
    v0: &TangentVector,
    t_end: f64,
    h: f64,
) -> Result<(ManifoldPoint, TangentVector)> {
    manifold.check_point(x0)?;
    manifold.check_tangent(v0)?;
    let n = manifold.ambient_dim();

    let rhs = |_t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let x = y.rows(0, n).into_owned();
        let v = y.rows(n, n).into_owned();
        let dv = manifold.tangent_field_normal_term(&x, &v, &v);
        Ok(pack2(&v, &dv))
    };
    let project = |y: &mut DVector<f64>| -> Result<()> {
        let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
        let v = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
        y.rows_mut(0, n).copy_from(x.coords());
        y.rows_mut(n, n).copy_from(v.components());
        Ok(())
    };

    let y0 = pack2(x0.coords(), v0.components());
    let y = rk4_drive(y0, 0.0, t_end, h, rhs, project, |_, _, _| Ok(()))?;
    let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
    let v = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
    Ok((x, v))
}

/// One recorded state of the transformed autonomous system, with the value of
/// the transformed Hamiltonian (zero along exact zero-level trajectories).
#[derive(Clone, Debug)]
pub struct PoincareSample {
    pub tau: f64,
    pub state: ExtendedState,
    pub hamiltonian: f64,
}

/// Integrate the transformed system in its own clock tau from the fictive
/// time of `es0` (tau0 = xt0^(p_ring/p)) up to `tau_end`, recording every
/// `record_every` steps plus the endpoints. Along the flow xt^(p_ring/p)
/// tracks tau, so samples of a rate-p trajectory land at rate-p_ring times.
pub fn reference_poincare(
    manifold: &dyn Manifold,
    objective: &Objective,
    params: &BregmanParameters,
    p_ring: f64,
    es0: &ExtendedState,
    tau_end: f64,
    h: f64,
    record_every: usize,
) -> Result<Vec<PoincareSample>> {
    if record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every",
            reason: "must be at least 1".into(),
        });
    }
    manifold.check_point(&es0.x)?;
    manifold.check_tangent(es0.r.sharp())?;
    let n = manifold.ambient_dim();
    let tau0 = rescale_time(es0.xt, params.p(), p_ring)?;

    let unpack = |y: &DVector<f64>| -> Result<ExtendedState> {
        let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
        let rs = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
        ExtendedState::new(x, y[2 * n], Momentum::from_sharp(rs), y[2 * n + 1])
    };

    let rhs = |_tau: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let es = unpack(y)?;
        let d = poincare_vector_field(manifold, &es, params, p_ring, objective)?;
        let drs = d.dr.components()
            + manifold.tangent_field_normal_term(
                es.x.coords(),
                d.dx.components(),
                es.r.sharp().components(),
            );
        let mut dy = DVector::zeros(2 * n + 2);
        dy.rows_mut(0, n).copy_from(d.dx.components());
        dy.rows_mut(n, n).copy_from(&drs);
        dy[2 * n] = d.dxt;
        dy[2 * n + 1] = d.drt;
        Ok(dy)
    };
    let project = |y: &mut DVector<f64>| -> Result<()> {
        let x = manifold.project_to_manifold(&y.rows(0, n).into_owned())?;
        let rs = manifold.project_to_tangent(&x, &y.rows(n, n).into_owned());
        y.rows_mut(0, n).copy_from(x.coords());
        y.rows_mut(n, n).copy_from(rs.components());
        Ok(())
    };

    let mut samples = Vec::new();
    let observe = |i: usize, tau: f64, y: &DVector<f64>| -> Result<()> {
        if i % record_every == 0 || tau == tau_end {
            let es = unpack(y)?;
            let hamiltonian = poincare_hamiltonian(manifold, &es, params, p_ring, objective)?;
            samples.push(PoincareSample {
                tau,
                state: es,
                hamiltonian,
            });
        }
        Ok(())
    };

    let mut y0 = DVector::zeros(2 * n + 2);
    y0.rows_mut(0, n).copy_from(es0.x.coords());
    y0.rows_mut(n, n).copy_from(es0.r.sharp().components());
    y0[2 * n] = es0.xt;
    y0[2 * n + 1] = es0.rt;

    rk4_drive(y0, tau0, tau_end, h, rhs, project, observe)?;
    Ok(samples)
}
