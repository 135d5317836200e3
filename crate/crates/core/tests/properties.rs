//! Randomized invariant checks across the public API. Geometry identities
//! hold to near machine precision; discrete iterates never leave their
//! manifold; the two step versions collapse onto each other as h shrinks.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riemann_accel_core::dynamics::BregmanParameters;
use riemann_accel_core::geometry::{
    zeta, ConvexityClass, CurvatureBounds, Euclidean, Hyperboloid, Manifold, ManifoldPoint,
    Sphere, TangentVector,
};
use riemann_accel_core::integrate::{
    estimate_rate_points, run, semi_implicit_step, IntegratorConfig, StepVersion,
};
use riemann_accel_core::problems::{
    hyperbolic_distance_objective, rayleigh_objective, SymmetricMatrixSpec,
};

fn manifold_by_index(idx: usize) -> Box<dyn Manifold> {
    match idx {
        0 => Box::new(Sphere::new(4).unwrap()),
        1 => Box::new(Hyperboloid::new(3).unwrap()),
        _ => Box::new(Euclidean::new(4).unwrap()),
    }
}

/// Radius within which log_map is well defined for each manifold above.
fn safe_radius(idx: usize) -> f64 {
    match idx {
        0 => 0.9 * std::f64::consts::PI,
        1 => 3.0,
        _ => 5.0,
    }
}

fn random_state(
    m: &dyn Manifold,
    seed: u64,
    scale: f64,
) -> (ManifoldPoint, TangentVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = m.random_point(&mut rng);
    let v = m.random_tangent(&x, &mut rng);
    let n = m.norm(&v);
    (x.clone(), v.scaled(scale / n.max(1e-12)))
}

proptest! {
    /// log_map inverts exp_map inside the injectivity radius.
    #[test]
    fn exp_log_roundtrip(idx in 0usize..3, seed in 0u64..500, frac in 1e-3f64..0.99) {
        let m = manifold_by_index(idx);
        let (x, v) = random_state(m.as_ref(), seed, frac * safe_radius(idx));
        let y = m.exp_map(&x, &v).unwrap();
        let w = m.log_map(&x, &y).unwrap();
        prop_assert!(m.norm(&w.minus(&v).unwrap()) <= 1e-9);
        let back = m.exp_map(&x, &w).unwrap();
        prop_assert!((back.coords() - y.coords()).norm() <= 1e-9);
    }

    /// Parallel transport preserves the metric pairing.
    #[test]
    fn transport_is_isometric(idx in 0usize..3, seed in 0u64..500, frac in 1e-3f64..0.99) {
        let m = manifold_by_index(idx);
        let (x, v) = random_state(m.as_ref(), seed, frac * safe_radius(idx));
        let y = m.exp_map(&x, &v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(9000));
        let u1 = m.random_tangent(&x, &mut rng);
        let u2 = m.random_tangent(&x, &mut rng);
        let t1 = m.parallel_transport(&x, &y, &u1).unwrap();
        let t2 = m.parallel_transport(&x, &y, &u2).unwrap();
        prop_assert!((m.metric(&u1, &u2).unwrap() - m.metric(&t1, &t2).unwrap()).abs() <= 1e-10);
    }

    /// The curve t -> exp_map(x, t v) moves at constant speed.
    #[test]
    fn geodesics_have_constant_speed(idx in 0usize..3, seed in 0u64..200, speed in 0.1f64..1.5) {
        let m = manifold_by_index(idx);
        let (x, v) = random_state(m.as_ref(), seed, speed);
        let eps = 1e-5;
        for j in 0..10 {
            let t = 0.05 + 0.1 * j as f64;
            let yp = m.exp_map(&x, &v.scaled(t + eps)).unwrap();
            let ym = m.exp_map(&x, &v.scaled(t - eps)).unwrap();
            let mid = m.exp_map(&x, &v.scaled(t)).unwrap();
            let fd = (yp.coords() - ym.coords()) / (2.0 * eps);
            let vel = m.project_to_tangent(&mid, &fd);
            prop_assert!((m.norm(&vel) - speed).abs() <= 1e-8);
        }
    }

    /// The curvature correction factor never drops below 1.
    #[test]
    fn zeta_at_least_one(k_min in -50.0f64..50.0, diameter in 1e-6f64..20.0) {
        let bounds = CurvatureBounds::new(k_min, diameter).unwrap();
        prop_assert!(zeta(&bounds) >= 1.0);
    }

    /// Power-law data is fit exactly, whatever the exponent.
    #[test]
    fn rate_fit_recovers_exponent(q in 0.5f64..8.0) {
        let points: Vec<(f64, f64)> = (1..=120)
            .map(|k| {
                let t = 0.2 * k as f64;
                (t, 3.0 * t.powf(-q))
            })
            .collect();
        let est = estimate_rate_points(&points, (0.2, 24.0)).unwrap();
        prop_assert!((est.slope + q).abs() <= 1e-9);
        prop_assert!((est.r_squared - 1.0).abs() <= 1e-9);
    }

    /// Discrete iterates stay on the manifold and keep tangent velocities.
    #[test]
    fn iterates_satisfy_constraints(
        seed in 0u64..100,
        p in prop::sample::select(vec![2.0, 4.0, 6.0]),
        version in prop::sample::select(vec![StepVersion::I, StepVersion::II]),
    ) {
        let m = Sphere::new(6).unwrap();
        let spec = SymmetricMatrixSpec::log_spaced(6, 1.0, 50.0, seed).unwrap();
        let f = rayleigh_objective(&spec).unwrap();
        let params = BregmanParameters::new(p, 0.25, 1.0, ConvexityClass::Convex).unwrap();
        let h = if p > 4.0 { 1e-4 } else { 1e-3 };
        let config = IntegratorConfig::new(params, h)
            .unwrap()
            .with_version(version)
            .with_max_iters(300)
            .unwrap()
            .with_record_every(25)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(77));
        let x0 = m.random_point(&mut rng);
        let record = run(&config, &f, &m, &x0, None).unwrap();
        prop_assert!(record.samples.len() > 1);
        for s in &record.samples {
            let c = s.x.coords();
            prop_assert!((c.dot(c) - 1.0).abs() <= 1e-10);
            prop_assert!(s.x.coords().dot(s.v.components()).abs() <= 1e-10);
        }
        for w in record.samples.windows(2) {
            prop_assert!(w[1].t > w[0].t);
        }
    }

    /// Hyperboloid iterates respect the Minkowski constraint sheet.
    #[test]
    fn hyperbolic_iterates_stay_on_sheet(seed in 0u64..100) {
        let m = Hyperboloid::plane();
        let q = m.origin();
        let f = hyperbolic_distance_objective(q.clone()).unwrap();
        let zeta_d1 = 1.0 / 1.0f64.tanh();
        let params = BregmanParameters::new(
            2.0,
            1.0,
            zeta_d1,
            ConvexityClass::StronglyConvex { mu: 1.0 },
        )
        .unwrap();
        let config = IntegratorConfig::new(params, 1e-3)
            .unwrap()
            .with_max_iters(400)
            .unwrap()
            .with_record_every(40)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = m.random_tangent(&q, &mut rng);
        let x0 = m.exp_map(&q, &v.scaled(0.8 / m.norm(&v))).unwrap();
        let record = run(&config, &f, &m, &x0, None).unwrap();
        for s in &record.samples {
            let c = s.x.coords();
            let minkowski = c.dot(c) - 2.0 * c[0] * c[0];
            prop_assert!((minkowski + 1.0).abs() <= 1e-10);
            prop_assert!(c[0] > 0.0);
            let w = s.v.components();
            prop_assert!((c.dot(w) - 2.0 * c[0] * w[0]).abs() <= 1e-10);
        }
    }

    /// Identical configurations reproduce identical records.
    #[test]
    fn runs_are_deterministic(seed in 0u64..50) {
        let m = Sphere::new(5).unwrap();
        let spec = SymmetricMatrixSpec::log_spaced(5, 1.0, 30.0, seed).unwrap();
        let f = rayleigh_objective(&spec).unwrap();
        let params = BregmanParameters::new(2.0, 0.25, 1.0, ConvexityClass::Convex).unwrap();
        let config = IntegratorConfig::new(params, 1e-3)
            .unwrap()
            .with_max_iters(200)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = m.random_point(&mut rng);
        let a = run(&config, &f, &m, &x0, None).unwrap();
        let b = run(&config, &f, &m, &x0, None).unwrap();
        prop_assert_eq!(a.samples.len(), b.samples.len());
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            prop_assert_eq!(sa.x.coords(), sb.x.coords());
            prop_assert_eq!(sa.v.components(), sb.v.components());
            prop_assert_eq!(sa.f_gap, sb.f_gap);
        }
    }
}

/// The gap between Version I and Version II updates is the corrected-gradient
/// perturbation, one order higher in h than the step itself: halving h cuts
/// the recovered update difference by about four.
#[test]
fn step_versions_converge_quadratically() {
    let m = Sphere::new(6).unwrap();
    let spec = SymmetricMatrixSpec::log_spaced(6, 1.0, 50.0, 11).unwrap();
    let f = rayleigh_objective(&spec).unwrap();
    let params = BregmanParameters::new(
        2.0,
        1.0,
        1.0,
        ConvexityClass::StronglyConvex { mu: 1.0 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = m.random_point(&mut rng);
    let v = m.random_tangent(&x, &mut rng);

    let diff_at = |h: f64| -> f64 {
        let base = IntegratorConfig::new(params, h).unwrap();
        let cfg1 = base.with_version(StepVersion::I);
        let cfg2 = base.with_version(StepVersion::II);
        let (x1, _) = semi_implicit_step(&m, &x, &v, 1, &cfg1, &f).unwrap();
        let (x2, _) = semi_implicit_step(&m, &x, &v, 1, &cfg2, &f).unwrap();
        // a_k = log(x, x_{k+1}) / h recovers each version's update vector.
        let a1 = m.log_map(&x, &x1).unwrap().scaled(1.0 / h);
        let a2 = m.log_map(&x, &x2).unwrap().scaled(1.0 / h);
        m.norm(&a1.minus(&a2).unwrap())
    };

    let d1 = diff_at(1e-2);
    let d2 = diff_at(5e-3);
    let d3 = diff_at(2.5e-3);
    assert!(d1 > 0.0 && d1 < 1.0, "difference at h=1e-2 is small but nonzero: {d1:.3e}");
    assert!(d2 <= 0.3 * d1, "halving h should cut the gap ~4x: {d2:.3e} vs {d1:.3e}");
    assert!(d3 <= 0.3 * d2, "halving again keeps the quadratic decay: {d3:.3e} vs {d2:.3e}");
}

/// Rayleigh values on the sphere stay inside the spectrum's negated range.
#[test]
fn rayleigh_values_bounded_by_spectrum() {
    let m = Sphere::new(8).unwrap();
    let spec = SymmetricMatrixSpec::log_spaced(8, 2.0, 40.0, 21).unwrap();
    let f = rayleigh_objective(&spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let x = m.random_point(&mut rng);
        let val = f.value(&x);
        assert!(val >= -40.0 - 1e-9 && val <= -2.0 + 1e-9, "value {val} outside [-40, -2]");
    }
}

/// Squared hyperbolic distance is geodesically 1-strongly convex on a
/// diameter-1 patch: midpoint-style chord inequality with the mu t(1-t)
/// correction term.
#[test]
fn hyperbolic_distance_strongly_convex_spot_check() {
    let m = Hyperboloid::plane();
    let q = m.origin();
    let f = hyperbolic_distance_objective(q.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..200 {
        let va = m.random_tangent(&q, &mut rng);
        let vb = m.random_tangent(&q, &mut rng);
        let a = m.exp_map(&q, &va.scaled(0.5 / m.norm(&va).max(1e-12))).unwrap();
        let b = m.exp_map(&q, &vb.scaled(0.5 / m.norm(&vb).max(1e-12))).unwrap();
        let d_ab = m.geodesic_distance(&a, &b).unwrap();
        let chord = m.log_map(&a, &b).unwrap();
        let fa = f.value(&a);
        let fb = f.value(&b);
        for j in 1..10 {
            let t = j as f64 / 10.0;
            let gt = m.exp_map(&a, &chord.scaled(t)).unwrap();
            let lhs = f.value(&gt) - ((1.0 - t) * fa + t * fb);
            let rhs = -0.5 * t * (1.0 - t) * d_ab * d_ab + 1e-8;
            assert!(lhs <= rhs, "trial {trial}: chord gap {lhs:.3e} vs {rhs:.3e} at t={t}");
        }
    }
}

/// Version I with the strongly convex coefficients on flat space is the
/// classical momentum recursion; a direct scalar implementation must agree
/// to near machine precision.
#[test]
fn euclidean_heavy_ball_reduction() {
    let m = Euclidean::new(1).unwrap();
    let f = riemann_accel_core::problems::euclidean_quadratic(1, 2.0, 0).unwrap();
    let mu = 1.0;
    let params = BregmanParameters::new(
        2.0,
        1.0,
        1.0,
        ConvexityClass::StronglyConvex { mu },
    )
    .unwrap();
    let h = 0.05;
    let config = IntegratorConfig::new(params, h)
        .unwrap()
        .with_max_iters(60)
        .unwrap();
    let x0 = ManifoldPoint::new(DVector::from_column_slice(&[3.0]));
    let v0 = TangentVector::new(x0.clone(), DVector::from_column_slice(&[-1.0])).unwrap();
    let record = run(&config, &f, &m, &x0, Some(v0)).unwrap();

    // f(x) = x^2 with gradient 2x on this seed; eta from the SC parameters.
    let eta = params.eta();
    let (mut x, mut v) = (3.0f64, -1.0f64);
    let mut manual = vec![(1usize, x)];
    for k in 1..60 {
        let a = (1.0 - h * eta) * v - h * 2.0 * x;
        x += h * a;
        v = a;
        manual.push((k + 1, x));
    }
    for s in &record.samples {
        let (_, mx) = manual[s.k - 1];
        assert!(
            (s.x.coords()[0] - mx).abs() <= 1e-12,
            "k={} got {} want {}",
            s.k,
            s.x.coords()[0],
            mx
        );
    }
}
