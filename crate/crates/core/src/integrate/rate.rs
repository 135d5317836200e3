//! Empirical convergence-rate fitting: least-squares slope of log(f - f*)
//! against log(t) inside a time window.

use super::TrajectoryRecord;
use crate::error::{Error, Result};

/// Fitted decay exponent: gap(t) ~ t^slope over `window`, with the fit
/// quality r_squared in [0, 1].
#[derive(Clone, Copy, Debug)]
pub struct RateEstimate {
    pub slope: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
}

/// Fit (t, gap) pairs with t inside `window` (inclusive). Pairs without a
/// positive t and gap are skipped; fewer than 10 usable pairs is an error,
/// as is a window with no time spread.
pub fn estimate_rate_points(points: &[(f64, f64)], window: (f64, f64)) -> Result<RateEstimate> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
        return Err(Error::RateEstimation(format!(
            "window must be a finite interval, got [{lo}, {hi}]"
        )));
    }

    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, gap)| *t >= lo && *t <= hi && *t > 0.0 && *gap > 0.0)
        .map(|(t, gap)| (t.ln(), gap.ln()))
        .collect();
    if logs.len() < 10 {
        return Err(Error::RateEstimation(format!(
            "need at least 10 positive-gap samples in the window, found {}",
            logs.len()
        )));
    }

    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &logs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::RateEstimation(
            "all samples share one time point, the slope is undetermined".into(),
        ));
    }

    let slope = sxy / sxx;
    // Constant gap is fit exactly by the zero slope.
    let r_squared = if syy <= 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateEstimate {
        slope,
        window,
        r_squared,
    })
}

/// `estimate_rate_points` over a trajectory's recorded (t, f - f*) samples.
pub fn estimate_rate(record: &TrajectoryRecord, window: (f64, f64)) -> Result<RateEstimate> {
    let points: Vec<(f64, f64)> = record
        .samples
        .iter()
        .filter_map(|s| s.f_gap.map(|gap| (s.t, gap)))
        .collect();
    if points.is_empty() {
        return Err(Error::RateEstimation(
            "trajectory has no objective-gap samples, the objective's optimum is unknown".into(),
        ));
    }
    estimate_rate_points(&points, window)
}

/// Fitting window skipping the transient: the last 60% of recorded samples.
pub fn default_window(record: &TrajectoryRecord) -> (f64, f64) {
    let n = record.samples.len();
    let keep = (3 * n).div_ceil(5).max(1);
    let first = &record.samples[n - keep];
    let last = record.final_sample();
    (first.t, last.t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(gap: impl Fn(f64) -> f64, times: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        times.map(|t| (t, gap(t))).collect()
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let pts = synthetic(|t| t.powi(-2), (1..=200).map(|k| 0.1 * k as f64));
        let est = estimate_rate_points(&pts, (0.1, 20.0)).unwrap();
        assert_relative_eq!(est.slope, -2.0, epsilon = 1e-9);
        assert!((est.r_squared - 1.0).abs() <= 1e-12);

        let pts = synthetic(|t| 5.0 * t.powi(-6), (1..=200).map(|k| 0.1 * k as f64));
        let est = estimate_rate_points(&pts, (0.1, 20.0)).unwrap();
        assert_relative_eq!(est.slope, -6.0, epsilon = 1e-9);
        assert!((est.r_squared - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn exponential_decay_beats_any_power_law_eventually() {
        let pts = synthetic(|t| (-t).exp(), (0..=100).map(|k| 10.0 + 0.1 * k as f64));
        let est = estimate_rate_points(&pts, (10.0, 20.0)).unwrap();
        assert!(est.slope < -10.0, "slope = {}", est.slope);
    }

    #[test]
    fn window_restricts_the_fit() {
        // Gap switches regime at t = 1; the late window sees only t^-4.
        let pts = synthetic(
            |t| if t < 1.0 { 1.0 } else { t.powi(-4) },
            (1..=300).map(|k| 0.01 * k as f64),
        );
        let est = estimate_rate_points(&pts, (1.0, 3.0)).unwrap();
        assert_relative_eq!(est.slope, -4.0, epsilon = 1e-9);
    }

    #[test]
    fn sparse_or_degenerate_inputs_are_rejected()  {
        let pts = synthetic(|t| t.powi(-2), (1..=5).map(f64::from));
        assert!(estimate_rate_points(&pts, (1.0, 5.0)).is_err());

        let pts: Vec<(f64, f64)> = (0..20).map(|_| (1.0, 0.5)).collect();
        assert!(estimate_rate_points(&pts, (0.5, 2.0)).is_err());

        let pts = synthetic(|t| t.powi(-2), (1..=50).map(f64::from));
        assert!(estimate_rate_points(&pts, (2.0, 2.0)).is_err());
    }

    #[test]
    fn nonpositive_gaps_are_skipped() {
        let mut pts = synthetic(|t| t.powi(-2), (1..=100).map(f64::from));
        pts.push((101.0, 0.0));
        pts.push((102.0, -1e-18));
        let est = estimate_rate_points(&pts, (1.0, 102.0)).unwrap();
        assert_relative_eq!(est.slope, -2.0, epsilon = 1e-9);
    }
}
