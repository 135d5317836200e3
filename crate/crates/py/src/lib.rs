//! Python bindings: one `riemann_accel` module exposing the manifolds, the
//! benchmark objectives, the flow parameters, and the discrete algorithm.
//! Points and tangent vectors cross the boundary as plain lists of floats in
//! ambient coordinates; every input is validated against the manifold
//! constraint before use.

use nalgebra::DVector;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riemann_accel_core::dynamics::{convergence_bound, BregmanParameters};
use riemann_accel_core::geometry::{
    self, riemannian_gradient, ConvexityClass, CurvatureBounds, Euclidean, Hyperboloid, Manifold,
    ManifoldPoint, Objective, Sphere, TangentVector,
};
use riemann_accel_core::integrate::{
    default_window, estimate_rate as record_rate, estimate_rate_points, run, run_gradient_descent,
    IntegratorConfig, StepVersion, TrajectoryRecord,
};
use riemann_accel_core::problems::{
    euclidean_quadratic, hyperbolic_distance_objective, rayleigh_objective_with_alpha,
    SymmetricMatrixSpec,
};
use riemann_accel_core::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Diverged { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn parse_class(convexity: &str, alpha: f64, mu: f64) -> PyResult<ConvexityClass> {
    match convexity {
        "convex" => Ok(ConvexityClass::Convex),
        "wqc" | "weakly-quasi-convex" => Ok(ConvexityClass::WeaklyQuasiConvex { alpha }),
        "sc" | "strongly-convex" => Ok(ConvexityClass::StronglyConvex { mu }),
        other => Err(PyValueError::new_err(format!(
            "unknown convexity class {other:?}; use \"convex\", \"wqc\" or \"sc\""
        ))),
    }
}

fn parse_version(version: u8) -> PyResult<StepVersion> {
    match version {
        1 => Ok(StepVersion::I),
        2 => Ok(StepVersion::II),
        other => Err(PyValueError::new_err(format!(
            "version must be 1 or 2, got {other}"
        ))),
    }
}

/// One of the bundled manifolds, operating on ambient coordinates.
#[pyclass(name = "Manifold")]
struct PyManifold {
    inner: Box<dyn Manifold>,
}

impl PyManifold {
    fn point(&self, coords: Vec<f64>) -> PyResult<ManifoldPoint> {
        let x = ManifoldPoint::new(DVector::from_vec(coords));
        self.inner.check_point(&x).map_err(to_py_err)?;
        Ok(x)
    }

    fn tangent(&self, x: &ManifoldPoint, components: Vec<f64>) -> PyResult<TangentVector> {
        let v = TangentVector::new(x.clone(), DVector::from_vec(components)).map_err(to_py_err)?;
        self.inner.check_tangent(&v).map_err(to_py_err)?;
        Ok(v)
    }
}

#[pymethods]
impl PyManifold {
    /// Unit sphere S^(n-1) embedded in R^n (curvature +1).
    #[staticmethod]
    fn sphere(ambient_dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Box::new(Sphere::new(ambient_dim).map_err(to_py_err)?),
        })
    }

    /// Hyperboloid sheet in Minkowski R^n (curvature -1).
    #[staticmethod]
    fn hyperboloid(ambient_dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Box::new(Hyperboloid::new(ambient_dim).map_err(to_py_err)?),
        })
    }

    /// The hyperbolic plane: hyperboloid sheet in Minkowski R^3.
    #[staticmethod]
    fn hyperbolic_plane() -> Self {
        Self {
            inner: Box::new(Hyperboloid::plane()),
        }
    }

    /// Flat R^n.
    #[staticmethod]
    fn euclidean(dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Box::new(Euclidean::new(dim).map_err(to_py_err)?),
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    /// Lower bound on sectional curvature (exact for the bundled manifolds).
    #[getter]
    fn k_min(&self) -> f64 {
        self.inner.k_min()
    }

    /// Curvature constant of the convergence guarantees over a ball of the
    /// given geodesic diameter. 1 for nonnegative curvature, otherwise
    /// s / tanh(s) with s = sqrt(-k_min) * diameter.
    #[pyo3(signature = (diameter=1.0))]
    fn zeta(&self, diameter: f64) -> PyResult<f64> {
        let bounds =
            CurvatureBounds::for_manifold(self.inner.as_ref(), diameter).map_err(to_py_err)?;
        Ok(geometry::zeta(&bounds))
    }

    /// Raise ValueError unless `x` satisfies the manifold constraint.
    fn check_point(&self, x: Vec<f64>) -> PyResult<()> {
        self.point(x)?;
        Ok(())
    }

    /// Raise ValueError unless `v` is tangent at `x`.
    fn check_tangent(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<()> {
        let x = self.point(x)?;
        self.tangent(&x, v)?;
        Ok(())
    }

    /// Point reached after unit time along the geodesic leaving `x` with
    /// velocity `v`.
    fn exp(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.point(x)?;
        let v = self.tangent(&x, v)?;
        let y = self.inner.exp_map(&x, &v).map_err(to_py_err)?;
        Ok(vec_of(y.coords()))
    }

    /// Velocity at `x` of the minimizing geodesic reaching `y` at unit time.
    fn log(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.point(x)?;
        let y = self.point(y)?;
        let v = self.inner.log_map(&x, &y).map_err(to_py_err)?;
        Ok(vec_of(v.components()))
    }

    /// Parallel transport of `v` along the minimizing geodesic from `x` to `y`.
    fn transport(&self, x: Vec<f64>, y: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.point(x)?;
        let y = self.point(y)?;
        let v = self.tangent(&x, v)?;
        let w = self
            .inner
            .parallel_transport(&x, &y, &v)
            .map_err(to_py_err)?;
        Ok(vec_of(w.components()))
    }

    fn distance(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let x = self.point(x)?;
        let y = self.point(y)?;
        self.inner.geodesic_distance(&x, &y).map_err(to_py_err)
    }

    /// Riemannian inner product of two tangent vectors at `x`.
    fn inner(&self, x: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        let x = self.point(x)?;
        let u = self.tangent(&x, u)?;
        let v = self.tangent(&x, v)?;
        self.inner.metric(&u, &v).map_err(to_py_err)
    }

    fn norm(&self, x: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        let x = self.point(x)?;
        let v = self.tangent(&x, v)?;
        Ok(self.inner.norm(&v))
    }

    /// Nearest-point repair of an ambient vector onto the manifold.
    fn project_point(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        let y = self
            .inner
            .project_to_manifold(&DVector::from_vec(w))
            .map_err(to_py_err)?;
        Ok(vec_of(y.coords()))
    }

    /// Metric-orthogonal projection of an ambient vector onto the tangent
    /// space at `x`.
    fn project_tangent(&self, x: Vec<f64>, w: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = self.point(x)?;
        let v = self.inner.project_to_tangent(&x, &DVector::from_vec(w));
        Ok(vec_of(v.components()))
    }

    /// Seeded random point, deterministic per seed.
    #[pyo3(signature = (seed=0))]
    fn random_point(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vec_of(self.inner.random_point(&mut rng).coords())
    }

    /// Seeded random tangent vector at `x`, deterministic per seed.
    #[pyo3(signature = (x, seed=0))]
    fn random_tangent(&self, x: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
        let x = self.point(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(vec_of(self.inner.random_tangent(&x, &mut rng).components()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Manifold({}, ambient_dim={})",
            self.inner.name(),
            self.inner.ambient_dim()
        )
    }
}

/// Objective function on a manifold, with its declared convexity class and,
/// for the bundled problems, the known minimizer.
#[pyclass(name = "Objective")]
struct PyObjective {
    inner: Objective,
}

#[pymethods]
impl PyObjective {
    /// Rayleigh quotient x^T A x / 2 on the sphere S^(n-1), scaled so the
    /// minimizer is the top eigenvector of A. A is dense symmetric with an
    /// eigenvalue spectrum log-spaced over [lo, hi] in a seeded random
    /// orthogonal basis. Weakly quasi-convex with the given alpha.
    #[staticmethod]
    #[pyo3(signature = (n, lo=1.0, hi=100.0, seed=42, alpha=1.0))]
    fn rayleigh(n: usize, lo: f64, hi: f64, seed: u64, alpha: f64) -> PyResult<Self> {
        let spec = SymmetricMatrixSpec::log_spaced(n, lo, hi, seed).map_err(to_py_err)?;
        Ok(Self {
            inner: rayleigh_objective_with_alpha(&spec, alpha).map_err(to_py_err)?,
        })
    }

    /// Half squared geodesic distance to `target` on the hyperboloid of the
    /// same ambient dimension. Geodesically 1-strongly convex.
    #[staticmethod]
    fn hyperbolic_distance(target: Vec<f64>) -> PyResult<Self> {
        let q = ManifoldPoint::new(DVector::from_vec(target));
        Ok(Self {
            inner: hyperbolic_distance_objective(q).map_err(to_py_err)?,
        })
    }

    /// Conditioned quadratic x^T Q x / 2 on flat R^n, minimized at the
    /// origin, 1-strongly convex, spectrum log-spaced over [1, condition].
    #[staticmethod]
    #[pyo3(signature = (n, condition=10.0, seed=42))]
    fn quadratic(n: usize, condition: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: euclidean_quadratic(n, condition, seed).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn convexity(&self) -> String {
        self.inner.class().to_string()
    }

    #[getter]
    fn minimizer(&self) -> Option<Vec<f64>> {
        self.inner.minimizer().map(|x| vec_of(x.coords()))
    }

    #[getter]
    fn optimal_value(&self) -> Option<f64> {
        self.inner.optimal_value()
    }

    /// Objective value at ambient coordinates `x` (taken as-is).
    fn value(&self, x: Vec<f64>) -> f64 {
        self.inner.value(&ManifoldPoint::new(DVector::from_vec(x)))
    }

    /// f(x) - f*, when the optimum is known.
    fn f_gap(&self, x: Vec<f64>) -> Option<f64> {
        self.inner.f_gap(&ManifoldPoint::new(DVector::from_vec(x)))
    }

    /// Riemannian gradient at `x` as components in ambient coordinates.
    fn gradient(&self, manifold: &PyManifold, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let x = manifold.point(x)?;
        let g = riemannian_gradient(manifold.inner.as_ref(), &self.inner, &x).map_err(to_py_err)?;
        Ok(vec_of(g.components()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Objective({}, convexity={})",
            self.inner.name(),
            self.inner.class()
        )
    }
}

/// Constants of the accelerated flow: rate exponent p, scale C, curvature
/// constant zeta, and the convexity class the guarantee assumes.
#[pyclass(name = "BregmanParameters")]
#[derive(Clone, Copy)]
struct PyBregmanParameters {
    inner: BregmanParameters,
}

#[pymethods]
impl PyBregmanParameters {
    /// Args:
    ///     p: polynomial rate exponent (> 0).
    ///     c: scale constant C of the guarantee (> 0).
    ///     zeta: curvature constant (>= 1); see Manifold.zeta.
    ///     convexity: "convex", "wqc" (uses alpha) or "sc" (uses mu).
    #[new]
    #[pyo3(signature = (p, c, zeta, convexity="convex", alpha=1.0, mu=1.0))]
    fn new(p: f64, c: f64, zeta: f64, convexity: &str, alpha: f64, mu: f64) -> PyResult<Self> {
        let class = parse_class(convexity, alpha, mu)?;
        Ok(Self {
            inner: BregmanParameters::new(p, c, zeta, class).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.inner.zeta()
    }

    /// Damping exponent: zeta when convex, zeta / alpha when weakly
    /// quasi-convex.
    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda()
    }

    /// Constant damping of the strongly convex flow; 0 for the polynomial
    /// classes.
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta()
    }

    #[getter]
    fn convexity(&self) -> String {
        self.inner.class().to_string()
    }

    #[getter]
    fn is_polynomial(&self) -> bool {
        self.inner.is_polynomial()
    }

    /// Certified f-gap bound at time t of the continuous flow started at
    /// geodesic distance `log_dist0` from the minimizer with initial gap
    /// `f_gap0`.
    #[pyo3(signature = (t, log_dist0, f_gap0=0.0))]
    fn convergence_bound(&self, t: f64, log_dist0: f64, f_gap0: f64) -> PyResult<f64> {
        convergence_bound(&self.inner, t, log_dist0, f_gap0).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "BregmanParameters(p={}, C={}, zeta={}, class={})",
            self.inner.p(),
            self.inner.c(),
            self.inner.zeta(),
            self.inner.class()
        )
    }
}

/// Recorded trajectory of one algorithm run. Per-sample columns come back as
/// parallel lists; `f_gap` and `lyapunov` hold None where undefined.
#[pyclass(name = "RunResult")]
struct PyRunResult {
    record: TrajectoryRecord,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn algorithm(&self) -> &str {
        &self.record.meta.algorithm
    }

    #[getter]
    fn objective(&self) -> &str {
        &self.record.meta.objective
    }

    #[getter]
    fn manifold(&self) -> &str {
        &self.record.meta.manifold
    }

    /// Iterate indices of the recorded samples.
    #[getter]
    fn k(&self) -> Vec<usize> {
        self.record.samples.iter().map(|s| s.k).collect()
    }

    /// Physical times t = k h of the recorded samples.
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.record.samples.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn f_gap(&self) -> Vec<Option<f64>> {
        self.record.samples.iter().map(|s| s.f_gap).collect()
    }

    #[getter]
    fn grad_norm(&self) -> Vec<f64> {
        self.record.samples.iter().map(|s| s.grad_norm).collect()
    }

    #[getter]
    fn lyapunov(&self) -> Vec<Option<f64>> {
        self.record.samples.iter().map(|s| s.lyapunov).collect()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.record.final_sample().k
    }

    #[getter]
    fn final_t(&self) -> f64 {
        self.record.final_sample().t
    }

    #[getter]
    fn final_x(&self) -> Vec<f64> {
        vec_of(self.record.final_sample().x.coords())
    }

    #[getter]
    fn final_v(&self) -> Vec<f64> {
        vec_of(self.record.final_sample().v.components())
    }

    #[getter]
    fn final_gap(&self) -> Option<f64> {
        self.record.final_sample().f_gap
    }

    #[getter]
    fn final_grad_norm(&self) -> f64 {
        self.record.final_sample().grad_norm
    }

    /// First iterate index whose f-gap is at or below `gap`, if any.
    fn first_reaching(&self, gap: f64) -> Option<usize> {
        self.record.first_reaching_gap(gap)
    }

    /// Log-log decay fit gap(t) ~ t^slope over `window` (defaults to the
    /// tail of the run). Returns (slope, r_squared).
    #[pyo3(signature = (window=None))]
    fn rate(&self, window: Option<(f64, f64)>) -> PyResult<(f64, f64)> {
        let window = window.unwrap_or_else(|| default_window(&self.record));
        let est = record_rate(&self.record, window).map_err(to_py_err)?;
        Ok((est.slope, est.r_squared))
    }

    fn __len__(&self) -> usize {
        self.record.samples.len()
    }

    fn __repr__(&self) -> String {
        let fin = self.record.final_sample();
        format!(
            "RunResult({} on {}, {} samples, k={}, t={:.6}, grad_norm={:.3e})",
            self.record.meta.algorithm,
            self.record.meta.manifold,
            self.record.samples.len(),
            fin.k,
            fin.t,
            fin.grad_norm
        )
    }
}

/// Curvature constant from a sectional-curvature lower bound and a geodesic
/// diameter: 1 when k_min >= 0, otherwise s / tanh(s) with
/// s = sqrt(-k_min) * diameter.
#[pyfunction(name = "zeta")]
fn zeta_fn(k_min: f64, diameter: f64) -> PyResult<f64> {
    let bounds = CurvatureBounds::new(k_min, diameter).map_err(to_py_err)?;
    Ok(geometry::zeta(&bounds))
}

/// Run the accelerated algorithm on `objective` from `x0`.
///
/// Flow constants come from `params` when given; otherwise they are built
/// from (p, c, diameter) with zeta derived from the manifold's curvature and
/// the convexity class taken from the objective. `version` selects where the
/// step evaluates the gradient: 1 at the current iterate, 2 at the
/// look-ahead point.
#[pyfunction]
#[pyo3(signature = (manifold, objective, x0, *, params=None, p=2.0, c=0.25, diameter=1.0,
                    h=1e-3, iters=10_000, version=1, record_every=10, stop_tolerance=0.0,
                    v0=None))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    manifold: &PyManifold,
    objective: &PyObjective,
    x0: Vec<f64>,
    params: Option<&PyBregmanParameters>,
    p: f64,
    c: f64,
    diameter: f64,
    h: f64,
    iters: usize,
    version: u8,
    record_every: usize,
    stop_tolerance: f64,
    v0: Option<Vec<f64>>,
) -> PyResult<PyRunResult> {
    let params = match params {
        Some(bp) => bp.inner,
        None => {
            let bounds = CurvatureBounds::for_manifold(manifold.inner.as_ref(), diameter)
                .map_err(to_py_err)?;
            BregmanParameters::new(p, c, geometry::zeta(&bounds), objective.inner.class())
                .map_err(to_py_err)?
        }
    };
    let config = IntegratorConfig::new(params, h)
        .map_err(to_py_err)?
        .with_version(parse_version(version)?)
        .with_max_iters(iters)
        .map_err(to_py_err)?
        .with_record_every(record_every)
        .map_err(to_py_err)?
        .with_stop_tolerance(stop_tolerance)
        .map_err(to_py_err)?;
    let x0 = manifold.point(x0)?;
    let v0 = match v0 {
        Some(components) => Some(manifold.tangent(&x0, components)?),
        None => None,
    };
    let record = run(&config, &objective.inner, manifold.inner.as_ref(), &x0, v0)
        .map_err(to_py_err)?;
    Ok(PyRunResult { record })
}

/// Riemannian gradient descent baseline with the same stopping rule and
/// recording scheme as `minimize`.
#[pyfunction]
#[pyo3(signature = (manifold, objective, x0, *, h=1e-3, iters=10_000, record_every=10,
                    stop_tolerance=0.0))]
fn gradient_descent(
    manifold: &PyManifold,
    objective: &PyObjective,
    x0: Vec<f64>,
    h: f64,
    iters: usize,
    record_every: usize,
    stop_tolerance: f64,
) -> PyResult<PyRunResult> {
    // Flow constants are unused by the baseline; any valid set works.
    let params =
        BregmanParameters::new(2.0, 0.25, 1.0, objective.inner.class()).map_err(to_py_err)?;
    let config = IntegratorConfig::new(params, h)
        .map_err(to_py_err)?
        .with_max_iters(iters)
        .map_err(to_py_err)?
        .with_record_every(record_every)
        .map_err(to_py_err)?
        .with_stop_tolerance(stop_tolerance)
        .map_err(to_py_err)?;
    let x0 = manifold.point(x0)?;
    let record = run_gradient_descent(&config, &objective.inner, manifold.inner.as_ref(), &x0)
        .map_err(to_py_err)?;
    Ok(PyRunResult { record })
}

/// Log-log decay fit gap(t) ~ t^slope from parallel lists. `window` defaults
/// to the span of the last 60% of the points. Returns (slope, r_squared).
#[pyfunction]
#[pyo3(signature = (t, gap, window=None))]
fn estimate_rate(t: Vec<f64>, gap: Vec<f64>, window: Option<(f64, f64)>) -> PyResult<(f64, f64)> {
    if t.len() != gap.len() {
        return Err(PyValueError::new_err(format!(
            "t and gap lengths differ: {} vs {}",
            t.len(),
            gap.len()
        )));
    }
    let points: Vec<(f64, f64)> = t.into_iter().zip(gap).collect();
    let window = window.unwrap_or_else(|| {
        if points.is_empty() {
            return (0.0, 1.0);
        }
        let keep = (3 * points.len()).div_ceil(5);
        (points[points.len() - keep].0, points[points.len() - 1].0)
    });
    let est = estimate_rate_points(&points, window).map_err(to_py_err)?;
    Ok((est.slope, est.r_squared))
}

#[pymodule]
fn riemann_accel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyManifold>()?;
    m.add_class::<PyObjective>()?;
    m.add_class::<PyBregmanParameters>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(zeta_fn, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(gradient_descent, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rate, m)?)?;
    Ok(())
}
