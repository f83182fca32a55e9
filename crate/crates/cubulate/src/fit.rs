//! Small fitting helpers for measured scatter data.

use serde::{Deserialize, Serialize};

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares; `None` with fewer than two distinct `x`.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx })
}

/// A linear upper bound `y <= a·x + b`: least-squares slope (clamped at
/// zero) with the intercept raised until every point lies below the line.
pub fn upper_linear_bound(points: &[(f64, f64)]) -> Option<LineFit> {
    let a = least_squares(points)?.slope.max(0.0);
    let b = points.iter().map(|p| p.1 - a * p.0).fold(f64::NEG_INFINITY, f64::max);
    Some(LineFit { slope: a, intercept: b })
}

/// Lower-envelope fit `y >= κ·x − ε`: the least-squares slope of the
/// per-`x` minima, with `ε` the largest shortfall below `κ·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub kappa: f64,
    pub epsilon: f64,
}

pub fn lower_envelope(points: &[(u64, u64)]) -> Option<EnvelopeFit> {
    let mut minima: std::collections::BTreeMap<u64, u64> = Default::default();
    for &(x, y) in points {
        let e = minima.entry(x).or_insert(y);
        *e = (*e).min(y);
    }
    let pts: Vec<(f64, f64)> = minima.iter().map(|(&x, &y)| (x as f64, y as f64)).collect();
    let kappa = least_squares(&pts)?.slope;
    let epsilon = pts.iter().map(|&(x, y)| kappa * x - y).fold(0.0, f64::max);
    Some(EnvelopeFit { kappa, epsilon })
}
