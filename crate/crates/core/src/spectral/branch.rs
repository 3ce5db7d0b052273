//! Analytic continuation of the branch `w_1(x)` of
//! `w^{r+1} - x (w - a)(w + 1)^s = 0` that tends to `a` at infinity.
//!
//! Tracking starts at the real anchor `x0 = 2 x*`, where `w_1(x0)` is the
//! unique root in `(a, w*)`, and follows a piecewise-linear path that avoids
//! the cut `[0, x*]`. Every step is an Euler predictor followed by Newton
//! correction; a step is rejected and halved when the corrected value is not
//! the root nearest the prediction, or sits too close to another root.

use num_complex::Complex64;
use serde::Serialize;

use super::roots::{poly_roots_report, RootOptions};
use super::{cdiv, endpoints, serialize_complex, AlgebraicCurve, SupportData};
use crate::error::{Error, Result};
use crate::moments::ModelParams;

/// Which side of the real axis a point on the cut is approached from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchValue {
    #[serde(serialize_with = "serialize_complex")]
    pub x: Complex64,
    #[serde(serialize_with = "serialize_complex")]
    pub w: Complex64,
    /// `|w^{r+1} - x (w - a)(w + 1)^s|`.
    pub residual: f64,
}

/// Relative residual accepted for a tracked value.
pub const BRANCH_TOLERANCE: f64 = 1e-12;

const MAX_NEWTON: usize = 12;
const MAX_STEPS: usize = 200_000;
/// Steps are capped at this fraction of the distance to the nearest branch point.
const STEP_FRACTION: f64 = 0.25;
/// Closest relative approach to `x*` that double precision can resolve.
const EDGE_GUARD: f64 = 1e-14;
/// Below this modulus the polynomial underflows.
const ORIGIN_GUARD: f64 = 1e-280;

#[derive(Clone, Debug)]
struct PathState {
    x: Complex64,
    w: Complex64,
    roots: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct BranchTracker {
    curve: AlgebraicCurve,
    support: SupportData,
    anchor: PathState,
}

impl BranchTracker {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let support = endpoints(params)?;
        let curve = AlgebraicCurve::new(params);
        let x0 = Complex64::new(2.0 * support.x_star, 0.0);
        let report = poly_roots_report(&curve.coefficients(x0), RootOptions::default(), None)?;
        let scale = support.w_star.abs().max(1.0);
        let mut candidates =
            report.roots.iter().filter(|w| w.im.abs() <= 1e-9 * scale && w.re > curve.a && w.re < support.w_star);
        let w0 = match (candidates.next(), candidates.next()) {
            (Some(w), None) => Complex64::new(w.re, 0.0),
            _ => return Err(Error::Tracking(format!("expected exactly one real root in (a, w*) at x0 = {}", x0.re))),
        };
        let mut tracker = Self { curve, support, anchor: PathState { x: x0, w: w0, roots: report.roots } };
        let w0 = tracker.newton(x0, w0).ok_or_else(|| Error::Tracking("anchor polish failed".into()))?;
        tracker.anchor.w = w0;
        Ok(tracker)
    }

    pub fn support(&self) -> &SupportData {
        &self.support
    }

    pub fn curve(&self) -> &AlgebraicCurve {
        &self.curve
    }

    /// `w_1(x)` for `x` off the cut. A real `x` on the cut is read as a
    /// boundary value from the side given by the sign bit of `x.im`
    /// (`+0.0` upper, `-0.0` lower).
    pub fn branch_at(&self, x: Complex64) -> Result<BranchValue> {
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::InvalidParams(format!("non-finite x = {x}")));
        }
        let x_star = self.support.x_star;
        if x.im == 0.0 {
            let side = if x.im.is_sign_negative() { Side::Lower } else { Side::Upper };
            if x.re > x_star {
                let mut st = self.anchor.clone();
                self.advance(&mut st, x)?;
                return self.finish(st);
            }
            return self.boundary_value(x.re, side);
        }
        let side = if x.im > 0.0 { Side::Upper } else { Side::Lower };
        self.track_via_half_plane(x, side)
    }

    /// Limit of `w_1(z)` as `z -> x` from the given side; `x` real, not a branch point.
    pub fn boundary_value(&self, x: f64, side: Side) -> Result<BranchValue> {
        self.track_via_half_plane(Complex64::new(x, 0.0), side)
    }

    fn track_via_half_plane(&self, target: Complex64, side: Side) -> Result<BranchValue> {
        let x0 = self.anchor.x;
        let height = side.sign() * self.support.x_star.max(target.im.abs());
        let mut st = self.anchor.clone();
        for waypoint in [x0 + Complex64::new(0.0, height), Complex64::new(target.re, height), target] {
            self.advance(&mut st, waypoint)?;
        }
        self.finish(st)
    }

    fn finish(&self, st: PathState) -> Result<BranchValue> {
        let (p, _, scale) = self.curve.eval(st.w, st.x);
        if p.norm() > BRANCH_TOLERANCE * scale {
            return Err(Error::Tracking(format!("residual {} too large at x = {}", p.norm(), st.x)));
        }
        Ok(BranchValue { x: st.x, w: st.w, residual: p.norm() })
    }

    /// Upper boundary values `w_+(x)` at arbitrary points of `(0, x*)`,
    /// obtained by continuing along the cut from `x*/2`.
    pub(crate) fn sweep_cut(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
        if xs.is_empty() {
            return Ok(out);
        }
        let x_ref = 0.5 * self.support.x_star;
        let start = {
            let bv = self.boundary_value(x_ref, Side::Upper)?;
            let roots = poly_roots_report(&self.curve.coefficients(bv.x), RootOptions::default(), None)?.roots;
            PathState { x: bv.x, w: bv.w, roots }
        };
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        let split = order.partition_point(|&i| xs[i] < x_ref);
        let mut st = start.clone();
        for &i in &order[split..] {
            self.advance(&mut st, Complex64::new(xs[i], 0.0))?;
            out[i] = st.w;
        }
        let mut st = start;
        for &i in order[..split].iter().rev() {
            self.advance(&mut st, Complex64::new(xs[i], 0.0))?;
            out[i] = st.w;
        }
        Ok(out)
    }

    fn branch_distance(&self, x: Complex64) -> Result<f64> {
        let x_star = self.support.x_star;
        let to_origin = x.norm();
        let to_edge = (x - x_star).norm();
        if to_edge < EDGE_GUARD * x_star {
            return Err(Error::NearBranchPoint(x_star));
        }
        if to_origin < ORIGIN_GUARD * x_star {
            return Err(Error::NearBranchPoint(0.0));
        }
        Ok(to_origin.min(to_edge))
    }

    fn advance(&self, st: &mut PathState, target: Complex64) -> Result<()> {
        self.branch_distance(target)?;
        let mut step = f64::INFINITY;
        for _ in 0..MAX_STEPS {
            let remaining = target - st.x;
            let dist = remaining.norm();
            if dist == 0.0 {
                return Ok(());
            }
            let cap = STEP_FRACTION * self.branch_distance(st.x)?;
            let len = step.min(cap).min(dist);
            let x_new = if len >= dist { target } else { st.x + remaining * (len / dist) };
            match self.try_step(st, x_new) {
                Some(next) => {
                    *st = next;
                    step = 2.0 * len;
                }
                None => {
                    step = 0.5 * len;
                    if step <= 1e-15 * st.x.norm().max(f64::MIN_POSITIVE) {
                        return Err(Error::Tracking(format!("step size underflow near x = {}", st.x)));
                    }
                }
            }
        }
        Err(Error::Tracking(format!("too many steps towards x = {target}")))
    }

    fn try_step(&self, st: &PathState, x_new: Complex64) -> Option<PathState> {
        let (_, dp, _) = self.curve.eval(st.w, st.x);
        let slope = cdiv(self.curve.q(st.w), dp);
        let predicted = st.w + slope * (x_new - st.x);
        if !predicted.is_finite() {
            return None;
        }
        let corrected = self.newton(x_new, predicted)?;
        let report =
            poly_roots_report(&self.curve.coefficients(x_new), RootOptions::default(), Some(&st.roots)).ok()?;
        let roots = report.roots;
        let nearest =
            |z: Complex64| (0..roots.len()).min_by(|&i, &j| (roots[i] - z).norm().total_cmp(&(roots[j] - z).norm()));
        let j = nearest(corrected)?;
        if nearest(predicted)? != j {
            return None;
        }
        let separation =
            (0..roots.len()).filter(|&k| k != j).map(|k| (roots[k] - roots[j]).norm()).fold(f64::INFINITY, f64::min);
        if (corrected - predicted).norm() >= 0.5 * separation || (corrected - roots[j]).norm() >= 0.25 * separation {
            return None;
        }
        let mut roots = roots;
        roots[j] = corrected;
        Some(PathState { x: x_new, w: corrected, roots })
    }

    fn newton(&self, x: Complex64, mut w: Complex64) -> Option<Complex64> {
        for _ in 0..MAX_NEWTON {
            let (p, dp, scale) = self.curve.eval(w, x);
            if p.norm() <= 8.0 * f64::EPSILON * scale {
                return Some(w);
            }
            let delta = cdiv(p, dp);
            if !delta.is_finite() {
                return None;
            }
            w -= delta;
            if delta.norm() <= 1e-15 * w.norm() {
                let (p, _, scale) = self.curve.eval(w, x);
                return (p.norm() <= BRANCH_TOLERANCE * scale).then_some(w);
            }
        }
        None
    }
}
