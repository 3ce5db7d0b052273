//! All roots of a complex polynomial by Aberth-Ehrlich simultaneous iteration.

use num_complex::Complex64;
use num_traits::Zero;

use super::cdiv;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Relative residual every returned root must meet.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub max_iterations: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

/// Roots plus, for each, the radius of a disk around it that is certified to
/// contain a root of the polynomial (`d |p(z)| / |p'(z)|`).
#[derive(Clone, Debug)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub enclosure_radii: Vec<f64>,
    pub iterations: usize,
}

/// Value, derivative and the rounding scale `sum |c_k| |z|^k` by Horner.
/// `coeffs` are in ascending order.
pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let az = z.norm();
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut scale = 0.0;
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.norm();
    }
    (p, dp, scale)
}

/// Relative residual `|p(z)| / sum |c_k| |z|^k`.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, _, scale) = horner(coeffs, z);
    if scale == 0.0 {
        return 0.0;
    }
    p.norm() / scale
}

/// All roots, with multiplicity, of `c_0 + c_1 w + ... + c_d w^d`.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    poly_roots_report(coeffs, RootOptions::default(), None).map(|r| r.roots)
}

/// Like [`poly_roots`], optionally warm-started from `initial` (one guess per
/// root of the full polynomial).
pub fn poly_roots_report(coeffs: &[Complex64], opts: RootOptions, initial: Option<&[Complex64]>) -> Result<RootReport> {
    let degree = coeffs.len().saturating_sub(1);
    if degree < 1 {
        return Err(Error::InvalidParams("polynomial must have degree >= 1".into()));
    }
    if coeffs[degree].is_zero() {
        return Err(Error::InvalidParams("leading coefficient must be nonzero".into()));
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidParams("non-finite polynomial coefficient".into()));
    }

    // Exact roots at the origin.
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    let d = coeffs.len() - 1 - zeros;
    // Rescale w = rho v so the roots have unit geometric mean; this keeps
    // every intermediate product far from under- and overflow.
    let rho = if d == 0 { 1.0 } else { scale_radius(&coeffs[zeros..]) };
    let lead = coeffs[degree];
    let reduced: Vec<Complex64> =
        coeffs[zeros..].iter().enumerate().map(|(k, c)| cdiv(*c, lead) / rho.powi((d - k) as i32)).collect();
    let reduced = &reduced[..];

    let mut roots = vec![Complex64::zero(); zeros];
    let mut radii = vec![0.0; zeros];
    if d == 0 {
        return Ok(RootReport { roots, enclosure_radii: radii, iterations: 0 });
    }

    let mut z = match initial {
        Some(guess) if guess.len() == degree => {
            // Drop the guesses nearest the origin for the deflated roots.
            let mut g = guess.to_vec();
            g.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            let mut g: Vec<Complex64> = g.into_iter().skip(zeros).map(|v| v / rho).collect();
            separate(&mut g);
            g
        }
        _ => initial_guesses(reduced),
    };

    let mut done = vec![false; d];
    let mut iterations = 0;
    while iterations < opts.max_iterations && done.iter().any(|f| !f) {
        iterations += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (p, dp, scale) = horner(reduced, z[i]);
            if p.norm() <= 4.0 * f64::EPSILON * scale {
                done[i] = true;
                continue;
            }
            let newton = if dp.is_zero() { p / (scale * f64::EPSILON) } else { cdiv(p, dp) };
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.is_zero() || !denom.is_finite() { newton } else { cdiv(newton, denom) };
            if !step.is_finite() {
                return Err(Error::RootsNoConvergence(iterations));
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
    }

    for &zi in &z {
        if relative_residual(reduced, zi) > RESIDUAL_TOLERANCE {
            return Err(Error::RootsNoConvergence(iterations));
        }
    }
    for &zi in &z {
        // |p| is padded by its rounding bound so the disk stays valid in floats
        let (p, dp, scale) = horner(reduced, zi);
        radii.push(d as f64 * (p.norm() + 4.0 * f64::EPSILON * scale) / dp.norm());
    }
    roots.extend(z.iter().map(|v| v * rho));
    for r in radii.iter_mut() {
        *r *= rho;
    }
    Ok(RootReport { roots, enclosure_radii: radii, iterations })
}

/// Geometric mean of the root moduli, `|c_0 / c_d|^{1/d}`.
fn scale_radius(coeffs: &[Complex64]) -> f64 {
    let d = coeffs.len() - 1;
    let ratio = coeffs[0].norm() / coeffs[d].norm();
    let rho = if ratio.is_finite() && ratio > 0.0 {
        ratio.powf(1.0 / d as f64)
    } else {
        // c_0 / c_d out of range: go through logarithms
        ((coeffs[0].norm().ln() - coeffs[d].norm().ln()) / d as f64).exp()
    };
    if rho.is_finite() && rho > 0.0 {
        rho
    } else {
        1.0
    }
}

/// Points on a circle whose radius is the geometric mean of the root moduli,
/// centered at the roots' centroid and rotated off the real axis.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let center = -coeffs[d - 1] / (lead * d as f64);
    let radius = {
        let shifted = shifted_constant(coeffs, center);
        let r = (shifted / lead).norm().powf(1.0 / d as f64);
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    };
    (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Constant coefficient of `p(w + center)`, i.e. `p(center)`.
fn shifted_constant(coeffs: &[Complex64], center: Complex64) -> Complex64 {
    horner(coeffs, center).0
}

/// Nudges coincident warm-start guesses apart; Aberth needs distinct points.
fn separate(z: &mut [Complex64]) {
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    for i in 0..z.len() {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= 1e-10 * scale {
                z[i] += Complex64::from_polar(1e-7 * scale, 0.7 + i as f64);
            }
        }
    }
}
