//! Double-exponential (tanh-sinh) quadrature on `[0, L]` for vector-valued
//! integrands with integrable endpoint singularities.
//!
//! `x(t) = L/2 (1 + tanh(pi/2 sinh t))`. Node distances to both endpoints are
//! computed directly so abscissas can approach either end far below the
//! spacing of doubles near `L`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TanhSinhNode {
    pub x: f64,
    pub dist_left: f64,
    pub dist_right: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Stop once successive levels change every component by at most this
    /// relative amount.
    pub tolerance: f64,
    pub min_level: usize,
    pub max_level: usize,
    /// Nodes closer to an endpoint than `min_rel_distance * L` are not generated.
    pub min_rel_distance: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, min_level: 3, max_level: 10, min_rel_distance: 1e-200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub level: usize,
    /// Largest relative change between the last two levels.
    pub change: f64,
    pub nodes: usize,
}

fn node(length: f64, t: f64) -> TanhSinhNode {
    let u = FRAC_PI_2 * t.sinh();
    let dist_left = length / (1.0 + (-2.0 * u).exp());
    let dist_right = length / (1.0 + (2.0 * u).exp());
    let x = if u < 0.0 { dist_left } else { length - dist_right };
    let e = (-2.0 * u.abs()).exp();
    let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    TanhSinhNode { x, dist_left, dist_right, weight: 0.5 * length * FRAC_PI_2 * t.cosh() * sech2 }
}

/// Integrates `dim` functions at once. `f` receives a batch of nodes and
/// returns one row of `dim` values per node.
pub fn tanh_sinh<F>(length: f64, dim: usize, opts: QuadratureOptions, mut f: F) -> Result<QuadratureResult>
where
    F: FnMut(&[TanhSinhNode]) -> Result<Vec<Vec<f64>>>,
{
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParams(format!("interval length must be positive, got {length}")));
    }
    // dist = L / (1 + e^{2u}) reaches min_rel_distance * L at u = ln(1/d)/2.
    let u_max = 0.5 * (1.0 / opts.min_rel_distance).ln();
    let t_max = (u_max / FRAC_PI_2).asinh();

    let mut sums = vec![0.0; dim];
    let mut accumulate = |nodes: Vec<TanhSinhNode>, sums: &mut Vec<f64>| -> Result<usize> {
        let rows = f(&nodes)?;
        if rows.len() != nodes.len() {
            return Err(Error::InvalidParams("integrand returned wrong number of rows".into()));
        }
        for (n, row) in nodes.iter().zip(rows) {
            for (acc, v) in sums.iter_mut().zip(row) {
                *acc += n.weight * v;
            }
        }
        Ok(nodes.len())
    };

    let k_max = t_max.floor() as i64;
    let mut count = accumulate((-k_max..=k_max).map(|k| node(length, k as f64)).collect(), &mut sums)?;
    let mut h = 1.0;
    let mut previous: Vec<f64> = sums.clone();
    let mut change = f64::INFINITY;
    for level in 1..=opts.max_level {
        h *= 0.5;
        let steps = (t_max / h).floor() as i64;
        let fresh: Vec<TanhSinhNode> =
            (-steps..=steps).filter(|k| k.rem_euclid(2) == 1).map(|k| node(length, k as f64 * h)).collect();
        count += accumulate(fresh, &mut sums)?;
        let current: Vec<f64> = sums.iter().map(|s| s * h).collect();
        change = current
            .iter()
            .zip(&previous)
            .map(|(c, p)| (c - p).abs() / c.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        previous = current;
        if level >= opts.min_level && change <= opts.tolerance {
            return Ok(QuadratureResult { values: previous, level, change, nodes: count });
        }
    }
    Err(Error::QuadratureNoConvergence { level: opts.max_level, change })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(length: f64, g: impl Fn(&TanhSinhNode) -> f64) -> QuadratureResult {
        tanh_sinh(length, 1, QuadratureOptions::default(), |nodes| Ok(nodes.iter().map(|n| vec![g(n)]).collect()))
            .unwrap()
    }

    #[test]
    fn smooth_polynomial() {
        let res = scalar(2.0, |n| n.x * n.x);
        assert!((res.values[0] - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularities() {
        // int_0^1 x^{-4/5} dx = 5
        let res = scalar(1.0, |n| n.dist_left.powf(-0.8));
        assert!((res.values[0] - 5.0).abs() < 1e-10, "{res:?}");
        // int_0^4 sqrt((4-x)/x)/(2 pi) dx = 1 (Marchenko-Pastur mass)
        let res = scalar(4.0, |n| (n.dist_right / n.dist_left).sqrt() / std::f64::consts::TAU);
        assert!((res.values[0] - 1.0).abs() < 1e-12, "{res:?}");
        // arcsine density on (0,1): 1/(pi sqrt(x(1-x))), second moment 3/8
        let res = scalar(1.0, |n| n.x * n.x / (std::f64::consts::PI * (n.dist_left * n.dist_right).sqrt()));
        assert!((res.values[0] - 0.375).abs() < 1e-12, "{res:?}");
    }

    #[test]
    fn nodes_are_consistent() {
        for t in [-5.0, -1.3, 0.0, 0.7, 4.2] {
            let n = node(3.0, t);
            assert!((n.dist_left + n.dist_right - 3.0).abs() < 1e-15);
            assert!(n.weight >= 0.0);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadratureOptions { max_level: 2, tolerance: 1e-30, ..Default::default() };
        let r = tanh_sinh(1.0, 1, opts, |nodes| Ok(nodes.iter().map(|n| vec![(50.0 * n.x).sin()]).collect()));
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
        assert!(tanh_sinh(0.0, 1, QuadratureOptions::default(), |_| Ok(vec![])).is_err());
    }
}
