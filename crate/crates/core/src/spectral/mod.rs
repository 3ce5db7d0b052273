//! Support, physical branch and density of `J(r,s,a)`.
//!
//! The law is encoded by the algebraic equation
//! `w^{r+1} - x (w - a)(w + 1)^s = 0`. Its branch `w_1(x)` that tends to `a`
//! at infinity is analytic off the cut `[0, x*]`, and the density is the jump
//! of `w_1(x)/x` across the cut.

mod branch;
mod quadrature;
mod roots;

use num_complex::Complex64;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::ModelParams;

pub use branch::{BranchTracker, BranchValue, Side};
pub use quadrature::{tanh_sinh, QuadratureOptions, QuadratureResult, TanhSinhNode};
pub use roots::{poly_roots, poly_roots_report, relative_residual, RootOptions, RootReport};

/// `a / b` without forming `|b|^2`, which underflows for the tiny roots met
/// near `x = 0`.
pub(crate) fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let m = b.norm();
    (a / m) * (b.conj() / m)
}

/// Branch-structure endpoints of the algebraic function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportData {
    pub w_star: f64,
    pub x_star: f64,
    pub w_tilde: f64,
    pub x_tilde: Option<f64>,
}

/// The polynomial `P(w; x) = w^{r+1} - x (w - a)(w + 1)^s` for one parameter triple.
#[derive(Clone, Copy, Debug)]
pub struct AlgebraicCurve {
    pub r: u32,
    pub s: u32,
    pub a: f64,
}

impl AlgebraicCurve {
    pub fn new(params: &ModelParams) -> Self {
        Self { r: params.r(), s: params.s(), a: params.a_f64() }
    }

    /// `(w - a)(w + 1)^s`, i.e. `-dP/dx`.
    pub fn q(&self, w: Complex64) -> Complex64 {
        (w - self.a) * (w + 1.0).powu(self.s)
    }

    /// `P`, `dP/dw` and the rounding scale of `P` at `(w, x)`.
    pub fn eval(&self, w: Complex64, x: Complex64) -> (Complex64, Complex64, f64) {
        let s = self.s;
        let wp1 = w + 1.0;
        let wp1_s = wp1.powu(s);
        let wp1_s1 = if s == 0 { Complex64::new(0.0, 0.0) } else { wp1.powu(s - 1) };
        let lead = w.powu(self.r + 1);
        let q = (w - self.a) * wp1_s;
        let p = lead - x * q;
        let dq = wp1_s + (w - self.a) * wp1_s1 * s as f64;
        let dp = w.powu(self.r) * (self.r + 1) as f64 - x * dq;
        let scale = lead.norm() + x.norm() * (w.norm() + self.a) * (w.norm() + 1.0).powi(s as i32);
        (p, dp, scale)
    }

    /// Ascending coefficients of `P(.; x)` in `w`.
    pub fn coefficients(&self, x: Complex64) -> Vec<Complex64> {
        let deg = (self.r + 1) as usize;
        let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
        c[deg] = Complex64::new(1.0, 0.0);
        let mut binom = 1.0;
        for j in 0..=self.s as usize {
            // C(s, j) w^j (w - a) = C(s, j) (w^{j+1} - a w^j)
            c[j + 1] -= x * binom;
            c[j] += x * binom * self.a;
            binom = binom * (self.s as usize - j) as f64 / (j + 1) as f64;
        }
        c
    }

    /// `f(w) = w^{r+1} / ((w - a)(w + 1)^s)`, the inverse map `w -> x`.
    pub fn inverse_map(&self, w: f64) -> f64 {
        w.powi(self.r as i32 + 1) / ((w - self.a) * (w + 1.0).powi(self.s as i32))
    }
}

/// Solves the branch-point quadratic `(r-s) w^2 - (a(r+1-s) - r) w - a(r+1) = 0`
/// and maps both roots to `x`.
pub fn endpoints(params: &ModelParams) -> Result<SupportData> {
    params.require_strict()?;
    let (r, s, a) = (params.r() as f64, params.s() as f64, params.a_f64());
    let lin = a * (r + 1.0 - s) - r;
    let root_disc = (lin * lin + 4.0 * a * (r + 1.0) * (r - s)).sqrt();
    let product = -a * (r + 1.0) / (r - s);
    // Avoid cancellation: compute the larger-magnitude root first.
    let (w_star, w_tilde) = if lin >= 0.0 {
        let ws = (lin + root_disc) / (2.0 * (r - s));
        (ws, product / ws)
    } else {
        let wt = (lin - root_disc) / (2.0 * (r - s));
        (product / wt, wt)
    };
    let x_star = critical_x(params, w_star)
        .ok_or_else(|| Error::InvalidParams(format!("degenerate right endpoint for {params}")))?;
    // With s = 0 the factor (w+1)^{s-1} cancels against the second equation
    // and w~ = -1 is not a branch point. With a s = 1 the branch-point
    // analysis degenerates (x~ may coincide with x*); x~ is not reported.
    let degenerate = params.s() == 0 || (params.a() * crate::numkit::int(params.s() as i64)).is_one();
    let x_tilde = if degenerate { None } else { critical_x(params, w_tilde) };
    Ok(SupportData { w_star, x_star, w_tilde, x_tilde })
}

/// Critical value `x = (r+1) w^r / ((w+1)^{s-1} ((s+1) w - (as - 1)))` for a
/// root `w` of the branch-point quadratic, or `None` when the expression
/// degenerates.
pub fn critical_x(params: &ModelParams, w: f64) -> Option<f64> {
    let (r, s, a) = (params.r(), params.s(), params.a_f64());
    let num = (r + 1) as f64 * w.powi(r as i32);
    let x = if s == 0 {
        // (w+1)^{-1} ((s+1) w - (as - 1)) = 1
        num
    } else {
        let den = (w + 1.0).powi(s as i32 - 1) * ((s + 1) as f64 * w - (a * s as f64 - 1.0));
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        num / den
    };
    x.is_finite().then_some(x)
}

/// `rho(x)` with the boundary value it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensitySample {
    pub x: f64,
    pub rho: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub w_plus: Complex64,
}

pub(crate) fn serialize_complex<S: serde::Serializer>(z: &Complex64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = ser.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Tolerance below zero tolerated in a computed density before it is
/// treated as a branch error.
pub const NEGATIVE_DENSITY_TOLERANCE: f64 = 1e-10;

/// Density evaluator for one parameter triple.
///
/// The sign relating `Im w_+` to `rho` is fixed once, at `x*/2`, by requiring
/// a positive density there.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    params: ModelParams,
    tracker: BranchTracker,
    orientation: f64,
}

impl SpectralModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let tracker = BranchTracker::new(params)?;
        let x_ref = 0.5 * tracker.support().x_star;
        let w_ref = tracker.boundary_value(x_ref, Side::Upper)?;
        let raw = -w_ref.w.im;
        if raw == 0.0 {
            return Err(Error::Tracking(format!("no jump across the cut at x = {x_ref}")));
        }
        Ok(Self { params: params.clone(), tracker, orientation: raw.signum() })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn support(&self) -> &SupportData {
        self.tracker.support()
    }

    pub fn tracker(&self) -> &BranchTracker {
        &self.tracker
    }

    /// `+1` when `rho = -Im(w_+)/(pi x)`, `-1` for the opposite labeling.
    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    fn rho_from(&self, x: f64, w_plus: Complex64) -> Result<f64> {
        let rho = -self.orientation * w_plus.im / (std::f64::consts::PI * x);
        if rho < -NEGATIVE_DENSITY_TOLERANCE {
            return Err(Error::NegativeDensity { x, rho });
        }
        Ok(rho.max(0.0))
    }

    fn check_interior(&self, x: f64) -> Result<()> {
        if !(x > 0.0 && x < self.support().x_star) {
            return Err(Error::OutsideSupport(x));
        }
        Ok(())
    }

    pub fn density(&self, x: f64) -> Result<DensitySample> {
        self.check_interior(x)?;
        let bv = self.tracker.boundary_value(x, Side::Upper)?;
        Ok(DensitySample { x, rho: self.rho_from(x, bv.w)?, w_plus: bv.w })
    }

    /// Densities at many interior points, continuing the boundary value along
    /// the cut from one point to the next.
    pub fn density_many(&self, xs: &[f64]) -> Result<Vec<DensitySample>> {
        for &x in xs {
            self.check_interior(x)?;
        }
        let ws = self.tracker.sweep_cut(xs)?;
        xs.iter().zip(ws).map(|(&x, w)| Ok(DensitySample { x, rho: self.rho_from(x, w)?, w_plus: w })).collect()
    }

    /// `rho` on the grid `x_i = x* i/(points+1)`, `i = 1..=points`.
    pub fn density_grid(&self, points: usize) -> Result<Vec<DensitySample>> {
        let xs = interior_grid(self.support().x_star, points);
        self.density_many(&xs)
    }

    /// `int_0^{x*} x^n rho(x) dx` for `n = 0..=n_max` by tanh-sinh quadrature.
    pub fn quadrature_moments(&self, n_max: usize, opts: QuadratureOptions) -> Result<QuadratureResult> {
        let x_star = self.support().x_star;
        // Beyond this distance from x* the density is O(1e-6) and the weight
        // O(1e-12); the neglected mass is below double precision.
        let cutoff = 1e-12 * x_star;
        tanh_sinh(x_star, n_max + 1, opts, |nodes| {
            let kept: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].dist_right > cutoff).collect();
            let xs: Vec<f64> = kept.iter().map(|&i| nodes[i].x).collect();
            let samples = self.density_many(&xs)?;
            let mut rows = vec![vec![0.0; n_max + 1]; nodes.len()];
            for (&i, sample) in kept.iter().zip(samples) {
                let mut p = sample.rho;
                for slot in rows[i].iter_mut() {
                    *slot = p;
                    p *= sample.x;
                }
            }
            Ok(rows)
        })
    }
}

/// `x* i/(points+1)` for `i = 1..=points`; both endpoints excluded.
pub fn interior_grid(x_star: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| x_star * i as f64 / (points + 1) as f64).collect()
}

pub fn branch_at(params: &ModelParams, x: Complex64) -> Result<BranchValue> {
    BranchTracker::new(params)?.branch_at(x)
}

pub fn density(params: &ModelParams, x: f64) -> Result<DensitySample> {
    SpectralModel::new(params)?.density(x)
}

/// Relative accuracy requested from [`quadrature_moment`].
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

pub fn quadrature_moment(params: &ModelParams, n: usize) -> Result<f64> {
    let model = SpectralModel::new(params)?;
    let res = model.quadrature_moments(n, QuadratureOptions::default())?;
    Ok(res.values[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{int, ratio};

    fn params(r: u32, s: u32, a: crate::Rational) -> ModelParams {
        ModelParams::new(r, s, a).unwrap()
    }

    #[test]
    fn endpoint_examples() {
        let sd = endpoints(&params(1, 0, int(1))).unwrap();
        assert!((sd.w_star - 2.0).abs() < 1e-15);
        assert!((sd.x_star - 4.0).abs() < 1e-14);
        let sd = endpoints(&params(2, 0, int(1))).unwrap();
        assert!((sd.x_star - 27.0 / 4.0).abs() < 1e-12);
        let sd = endpoints(&params(2, 1, int(1))).unwrap();
        let r3 = 3f64.sqrt();
        assert!((sd.w_star - r3).abs() < 1e-15);
        assert!((sd.x_star - 1.5 * r3).abs() < 1e-14);
        assert!((sd.w_tilde + r3).abs() < 1e-15);
        // a s = 1: x~ is withheld from SupportData, the critical value is still finite
        assert_eq!(sd.x_tilde, None);
        let xt = critical_x(&params(2, 1, int(1)), sd.w_tilde).unwrap();
        assert!((xt + 1.5 * r3).abs() < 1e-14);
        let sd = endpoints(&params(2, 1, int(2))).unwrap();
        assert!(sd.x_tilde.unwrap() < 0.0);
        assert_eq!(endpoints(&params(3, 0, int(1))).unwrap().x_tilde, None);
        assert!(endpoints(&params(3, 3, int(1))).is_err());
    }

    #[test]
    fn fuss_catalan_edges() {
        for r in 1..=6u32 {
            let sd = endpoints(&params(r, 0, int(1))).unwrap();
            let rf = r as f64;
            let expect = (rf + 1.0).powf(rf + 1.0) / rf.powf(rf);
            assert!((sd.x_star - expect).abs() <= 1e-12 * expect, "r={r}");
        }
    }

    #[test]
    fn x_tilde_inside_support() {
        // discriminant of P(.; x) vanishes at 2.8234406471086 and x* = 20.148781575114
        let p = params(3, 1, int(2));
        let sd = endpoints(&p).unwrap();
        assert!((sd.x_star - 20.148781575114).abs() < 1e-9);
        assert!((sd.x_tilde.unwrap() - 2.8234406471086).abs() < 1e-9);
    }

    #[test]
    fn endpoint_invariants() {
        for r in 1..=6u32 {
            for s in 0..r {
                for a in [ratio(1, 2), int(1), int(2), ratio(1, 3), int(7)] {
                    let p = params(r, s, a.clone());
                    let sd = endpoints(&p).unwrap();
                    let curve = AlgebraicCurve::new(&p);
                    let af = curve.a;
                    assert!(sd.x_star > 0.0 && sd.w_star > af && sd.w_tilde < 0.0, "{p}: {sd:?}");
                    let fx = curve.inverse_map(sd.w_star);
                    assert!((fx - sd.x_star).abs() <= 1e-10 * sd.x_star, "{p}: f(w*)={fx}");
                    let (rf, sf) = (r as f64, s as f64);
                    for w in [sd.w_star, sd.w_tilde] {
                        let quad = w * ((sf + 1.0) * w - (af * sf - 1.0)) - (rf + 1.0) * (w - af) * (w + 1.0);
                        let scale = w * w * (rf + sf + 2.0) + (w.abs() + af) * (rf + 1.0) * (w.abs() + 1.0);
                        assert!(quad.abs() <= 1e-12 * scale, "{p}: quadratic residual {quad}");
                    }
                    // x~ can fall inside [0, x*] (e.g. J(3,1,2)); it is then a branch
                    // point of another sheet, and the first sheet stays away from w~.
                    if let Some(xt) = sd.x_tilde {
                        if (0.0..=sd.x_star).contains(&xt) {
                            let t = BranchTracker::new(&p).unwrap();
                            let w = t.boundary_value(xt, Side::Upper).unwrap().w;
                            assert!((w - sd.w_tilde).norm() > 1e-3 * sd.w_tilde.abs(), "{p}: x~ = {xt}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coefficients_match_eval() {
        let p = params(4, 2, ratio(3, 2));
        let curve = AlgebraicCurve::new(&p);
        let x = Complex64::new(1.3, -0.4);
        let w = Complex64::new(-0.2, 0.9);
        let (val, dval, _) = curve.eval(w, x);
        let coeffs = curve.coefficients(x);
        let (hv, hd, _) = roots::horner(&coeffs, w);
        assert!((val - hv).norm() < 1e-13);
        assert!((dval - hd).norm() < 1e-13);
    }

    #[test]
    fn marchenko_pastur_density() {
        let p = params(1, 0, int(1));
        let d = density(&p, 2.0).unwrap();
        assert!((d.rho - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12, "{d:?}");
        let model = SpectralModel::new(&p).unwrap();
        assert_eq!(model.orientation(), 1.0);
        for x in [0.01f64, 0.5, 1.0, 3.0, 3.99] {
            let exact = ((4.0 - x) / x).sqrt() / (2.0 * std::f64::consts::PI);
            let got = model.density(x).unwrap().rho;
            assert!((got - exact).abs() <= 1e-11 * exact.max(1.0), "x={x}: {got} vs {exact}");
        }
        let edge = model.density(4.0 - 1e-9).unwrap().rho;
        assert!(edge < 1e-4);
        assert!(matches!(model.density(4.0), Err(Error::OutsideSupport(_))));
        assert!(matches!(model.density(0.0), Err(Error::OutsideSupport(_))));
        assert!(matches!(density(&params(2, 2, int(1)), 1.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn sweep_matches_pointwise() {
        let p = params(3, 1, ratio(1, 2));
        let model = SpectralModel::new(&p).unwrap();
        let xs = interior_grid(model.support().x_star, 9);
        let swept = model.density_many(&xs).unwrap();
        for s in swept {
            let single = model.density(s.x).unwrap();
            assert!((s.w_plus - single.w_plus).norm() < 1e-12, "{s:?} vs {single:?}");
        }
    }

    #[test]
    fn positivity_on_grid() {
        for r in 1..=4u32 {
            for s in 0..r {
                for a in [ratio(1, 2), int(1), int(2)] {
                    let model = SpectralModel::new(&params(r, s, a)).unwrap();
                    let grid = model.density_grid(100).unwrap();
                    assert!(grid.iter().all(|d| d.rho > 0.0), "{}", model.params());
                }
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let p = params(2, 1, int(1));
        assert!((quadrature_moment(&p, 0).unwrap() - 1.0).abs() < 1e-8);
        assert!((quadrature_moment(&p, 2).unwrap() - 0.625).abs() < 1e-8);
        let mp = params(1, 0, int(1));
        assert!((quadrature_moment(&mp, 1).unwrap() - 1.0).abs() < 1e-8);
    }
}
