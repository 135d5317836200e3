//! Benchmark objectives with known minimizers: extreme eigenvectors of a
//! symmetric matrix on the sphere, distance minimization on the hyperbolic
//! plane, and a conditioned quadratic in flat space.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    gaussian_vector, ConvexityClass, Hyperboloid, Manifold, ManifoldPoint, Objective,
};

/// Recipe for a dense symmetric matrix with a prescribed spectrum in a
/// seeded random orthogonal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrixSpec {
    pub n: usize,
    /// Nonincreasing; entry 0 is the top eigenvalue.
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
}

impl SymmetricMatrixSpec {
    pub fn new(eigenvalues: Vec<f64>, seed: u64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter {
                name: "eigenvalues",
                reason: "need at least one eigenvalue".into(),
            });
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eigenvalues",
                reason: "eigenvalues must be finite".into(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter {
                name: "eigenvalues",
                reason: "eigenvalues must be nonincreasing".into(),
            });
        }
        Ok(Self {
            n: eigenvalues.len(),
            eigenvalues,
            seed,
        })
    }

    /// n eigenvalues log-spaced over [lo, hi], descending. Condition number
    /// hi / lo for lo > 0.
    pub fn log_spaced(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        Self::new(log_spaced_eigenvalues(n, lo, hi)?, seed)
    }
}

/// Descending log-spaced values covering [lo, hi]; a single value collapses
/// to hi.
pub fn log_spaced_eigenvalues(n: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one eigenvalue".into(),
        });
    }
    if !(lo > 0.0) || !lo.is_finite() {
        return Err(Error::NonPositive { name: "lo", value: lo });
    }
    if !(hi >= lo) || !hi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "hi",
            reason: format!("need lo <= hi < inf, got [{lo}, {hi}]"),
        });
    }
    if n == 1 {
        return Ok(vec![hi]);
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (lhi + (llo - lhi) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

/// Seeded Haar-ish orthogonal matrix: QR of a Gaussian matrix with the R
/// diagonal signs absorbed into Q, so the factorization is unique and the
/// result deterministic per seed.
fn seeded_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_iterator(n, n, gaussian_vector(n * n, &mut rng).iter().copied());
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// A = Q diag(eigenvalues) Q^T, explicitly symmetrized. Column j of the
/// internal Q is the eigenvector of eigenvalue j.
pub fn build_matrix(spec: &SymmetricMatrixSpec) -> DMatrix<f64> {
    let n = spec.eigenvalues.len();
    let q = seeded_orthogonal(n, spec.seed);
    let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&spec.eigenvalues));
    let a = &q * lambda * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// f(v) = -v^T A v on the unit sphere, minimized at the top eigenvector with
/// value -lambda_max. Feeding -A retrieves the bottom eigenpair. The weak
/// quasi-convexity constant alpha is a modeling choice; 1 matches the
/// distance-based rate read off near the minimizer.
pub fn rayleigh_objective(spec: &SymmetricMatrixSpec) -> Result<Objective> {
    rayleigh_objective_with_alpha(spec, 1.0)
}

pub fn rayleigh_objective_with_alpha(spec: &SymmetricMatrixSpec, alpha: f64) -> Result<Objective> {
    let n = spec.eigenvalues.len();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "the sphere needs ambient dimension >= 2".into(),
        });
    }
    let a = build_matrix(spec);
    let top = seeded_orthogonal(n, spec.seed).column(0).into_owned();
    let lambda_max = spec.eigenvalues[0];
    rayleigh_from_parts(a, ManifoldPoint::new(top), lambda_max, alpha)
}

/// Rayleigh objective for an explicit symmetric matrix; the top eigenpair is
/// computed numerically.
pub fn rayleigh_objective_from_matrix(a: &DMatrix<f64>, alpha: f64) -> Result<Objective> {
    let n = a.nrows();
    if n < 2 || a.ncols() != n {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("need a square matrix of size >= 2, got {}x{}", n, a.ncols()),
        });
    }
    let asym = (a + a.transpose()) * 0.5;
    if (a - &asym).amax() > 1e-10 {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: "matrix is not symmetric".into(),
        });
    }
    let eig = asym.clone().symmetric_eigen();
    let (top_idx, lambda_max) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, l)| (i, *l))
        .expect("n >= 2");
    let top = eig.eigenvectors.column(top_idx).into_owned();
    rayleigh_from_parts(asym, ManifoldPoint::new(top.normalize()), lambda_max, alpha)
}

fn rayleigh_from_parts(
    a: DMatrix<f64>,
    top: ManifoldPoint,
    lambda_max: f64,
    alpha: f64,
) -> Result<Objective> {
    let grad_a = a.clone();
    Ok(Objective::new(
        "rayleigh",
        move |x: &ManifoldPoint| -(x.coords().dot(&(&a * x.coords()))),
        move |x: &ManifoldPoint| &grad_a * x.coords() * -2.0,
        ConvexityClass::WeaklyQuasiConvex { alpha },
    )?
    .with_minimizer(top, -lambda_max))
}

/// f(x) = d(x, q)^2 / 2 on the hyperboloid, geodesically 1-strongly convex
/// on any diameter-limited region around q. The ambient partials are
/// s (q_0, -q_1, ..., -q_n) with s = d / sinh(d); raising the index and
/// projecting yields -log_x(q) exactly.
pub fn hyperbolic_distance_objective(q: ManifoldPoint) -> Result<Objective> {
    let manifold = Hyperboloid::new(q.ambient_dim())?;
    manifold.check_point(&q)?;
    let q_val = q.clone();
    let q_grad = q.clone();
    Ok(Objective::new(
        "hyperbolic-distance",
        move |x: &ManifoldPoint| {
            let d = hyperbolic_dist(x, &q_val);
            0.5 * d * d
        },
        move |x: &ManifoldPoint| {
            let d = hyperbolic_dist(x, &q_grad);
            let s = if d < 1e-8 { 1.0 } else { d / d.sinh() };
            let mut g = q_grad.coords() * (-s);
            g[0] = -g[0];
            g
        },
        ConvexityClass::StronglyConvex { mu: 1.0 },
    )?
    .with_minimizer(q, 0.0))
}

fn hyperbolic_dist(x: &ManifoldPoint, q: &ManifoldPoint) -> f64 {
    let u = x.coords().dot(q.coords()) - 2.0 * x.coords()[0] * q.coords()[0];
    (-u).max(1.0).acosh()
}

/// f(x) = x^T Q x / 2 on R^n with spectrum log-spaced over
/// [1, condition_number]; minimized at the origin, 1-strongly convex. The
/// flat-space sanity problem: zeta = 1, all transports trivial.
pub fn euclidean_quadratic(n: usize, condition_number: f64, seed: u64) -> Result<Objective> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need dimension >= 1".into(),
        });
    }
    if !(condition_number >= 1.0) || !condition_number.is_finite() {
        return Err(Error::InvalidParameter {
            name: "condition_number",
            reason: format!("need a finite value >= 1, got {condition_number}"),
        });
    }
    let spec = SymmetricMatrixSpec::log_spaced(n, 1.0, condition_number, seed)?;
    let q = build_matrix(&spec);
    let grad_q = q.clone();
    Ok(Objective::new(
        "quadratic",
        move |x: &ManifoldPoint| 0.5 * x.coords().dot(&(&q * x.coords())),
        move |x: &ManifoldPoint| &grad_q * x.coords(),
        ConvexityClass::StronglyConvex { mu: 1.0 },
    )?
    .with_minimizer(ManifoldPoint::new(DVector::zeros(n)), 0.0))
}
