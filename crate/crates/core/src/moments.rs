//! Moment sequences of the `J(r,s,a)` family, Fuss-Catalan and Raney numbers.
//!
//! `J(r,s,a)(n)` is computed by three independent exact routes:
//!
//! * [`moment_jacobi`]: a Jacobi polynomial with `n`-dependent parameters,
//!   evaluated through its hypergeometric sum;
//! * [`moment_derivative`]: the `(n-1)`-th derivative of
//!   `z^{n(r+1)} / (1+z)^{ns}` at `z = a`, expanded with the Leibniz rule;
//! * [`moment_series`]: coefficients of the power series solution of
//!   `w = a + u w^{r+1} / (1+w)^s` in `u = 1/x`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{self, binomial_general, factorial, int, pochhammer, pow_i, FormalSeries, Rational};

/// The triple `(r, s, a)` selecting a distribution `J(r,s,a)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModelParams {
    r: u32,
    s: u32,
    a: Rational,
}

impl ModelParams {
    /// Accepts `1 <= r`, `0 <= s <= r`, `a > 0`.
    pub fn new(r: u32, s: u32, a: Rational) -> Result<Self> {
        if r < 1 {
            return Err(Error::InvalidParams(format!("r must be >= 1, got {r}")));
        }
        if s > r {
            return Err(Error::InvalidParams(format!("s must satisfy s <= r, got r={r}, s={s}")));
        }
        if !a.is_positive() {
            return Err(Error::InvalidParams(format!("a must be positive, got {}", numkit::format_rational(&a))));
        }
        Ok(Self { r, s, a })
    }

    /// Same as [`ModelParams::new`] but additionally demands `s < r`, which
    /// the density and support computations require.
    pub fn new_strict(r: u32, s: u32, a: Rational) -> Result<Self> {
        let p = Self::new(r, s, a)?;
        p.require_strict()?;
        Ok(p)
    }

    pub fn require_strict(&self) -> Result<()> {
        if self.s >= self.r {
            return Err(Error::InvalidParams(format!(
                "s < r required for the density and support, got r={}, s={}",
                self.r, self.s
            )));
        }
        Ok(())
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn a_f64(&self) -> f64 {
        numkit::to_f64(&self.a)
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J({},{},{})", self.r, self.s, numkit::format_rational(&self.a))
    }
}

/// Jacobi parameters `alpha = r n + r + 1`, `beta = -(r+1-s) n - (r+2-s)`
/// used for the `(n+1)`-th moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VaryingJacobiIndex {
    pub n: u32,
    pub alpha: i64,
    pub beta: i64,
}

impl VaryingJacobiIndex {
    pub fn new(r: u32, s: u32, n: u32) -> Self {
        let (r, s, n) = (r as i64, s as i64, n as i64);
        Self { n: n as u32, alpha: r * n + r + 1, beta: -(r + 1 - s) * n - (r + 2 - s) }
    }
}

/// Which law a moment sequence belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Jacobi {
        r: u32,
        s: u32,
        a: String,
    },
    FussCatalan {
        r: u32,
    },
    Raney {
        alpha: String,
        beta: String,
    },
    /// Free multiplicative convolution of the listed factors.
    Product {
        factors: Vec<Distribution>,
    },
    PointMass,
    Custom,
}

impl Distribution {
    pub fn of_params(p: &ModelParams) -> Self {
        Distribution::Jacobi { r: p.r, s: p.s, a: numkit::format_rational(&p.a) }
    }
}

/// Exact moments `m_0, m_1, ...` together with the law they describe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSequence {
    pub label: Distribution,
    pub values: Vec<Rational>,
}

impl MomentSequence {
    pub fn new(label: Distribution, values: Vec<Rational>) -> Self {
        Self { label, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> Option<&Rational> {
        self.values.first()
    }

    /// Moments of the unit point mass at 1.
    pub fn point_mass(len: usize) -> Self {
        Self::new(Distribution::PointMass, vec![Rational::one(); len])
    }

    pub fn fuss_catalan(r: u32, len: usize) -> Self {
        Self::new(Distribution::FussCatalan { r }, (0..len).map(|n| fuss_catalan(r, n as u32)).collect())
    }

    pub fn raney(alpha: &Rational, beta: &Rational, len: usize) -> Result<Self> {
        let values = (0..len).map(|n| raney(alpha, beta, n as u32)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(
            Distribution::Raney { alpha: numkit::format_rational(alpha), beta: numkit::format_rational(beta) },
            values,
        ))
    }

    /// `J(r,s,a)(n)` for `n < len` via the Jacobi formula.
    pub fn jacobi(params: &ModelParams, len: usize) -> Self {
        Self::new(Distribution::of_params(params), (0..len).map(|n| moment_jacobi(params, n as u32)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(numkit::to_f64).collect()
    }
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` through
/// `(1/n!) sum_k C(n,k) (n+alpha+beta+1)_k (alpha+k+1)_{n-k} ((x-1)/2)^k`.
///
/// Valid for arbitrary (including negative integer) parameters.
pub fn jacobi_eval(n: u32, alpha: &Rational, beta: &Rational, x: &Rational) -> Rational {
    let n_us = n as usize;
    let lead = int(n as i64) + alpha + beta + int(1);
    let half_shift = (x - int(1)) / int(2);
    let mut sum = Rational::zero();
    let mut xpow = Rational::one();
    for k in 0..=n_us {
        let term = binomial_general(&int(n as i64), k)
            * pochhammer(&lead, k)
            * pochhammer(&(alpha + int(k as i64 + 1)), n_us - k)
            * &xpow;
        sum += term;
        xpow *= &half_shift;
    }
    sum / Rational::from_integer(factorial(n_us))
}

/// `J(r,s,a)(n)` from the Jacobi polynomial representation.
pub fn moment_jacobi(params: &ModelParams, n: u32) -> Rational {
    let a = &params.a;
    if n == 0 {
        return a.clone();
    }
    let idx = VaryingJacobiIndex::new(params.r, params.s, n - 1);
    let one = int(1);
    let x = (&one - a) / (&one + a);
    let base = pow_i(a, params.r as i64).expect("a > 0") / pow_i(&(&one + a), params.s as i64).expect("a > 0");
    let p = jacobi_eval(n - 1, &int(idx.alpha), &int(idx.beta), &x);
    a / int(n as i64) * pow_i(&base, n as i64).expect("base > 0") * p
}

/// `J(r,s,a)(n) = (1/n!) d^{n-1}/dz^{n-1} [z^{n(r+1)} / (1+z)^{ns}]` at `z = a`,
/// expanded with the Leibniz rule. Defined for `n >= 1`.
pub fn moment_derivative(params: &ModelParams, n: u32) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidParams("derivative formula is defined for n >= 1".into()));
    }
    let (r, s) = (params.r as i64, params.s as i64);
    let a = &params.a;
    let n_i = n as i64;
    let m = (n - 1) as usize;
    let one_plus_a = int(1) + a;
    let mut sum = Rational::zero();
    for k in 0..=m {
        let k_i = k as i64;
        let term = binomial_general(&int(m as i64), k)
            * pochhammer(&int(n_i * r + k_i + 2), m - k)
            * pow_i(a, n_i * r + k_i + 1)?
            * pochhammer(&int(-n_i * s - k_i + 1), k)
            * pow_i(&one_plus_a, -n_i * s - k_i)?;
        sum += term;
    }
    Ok(sum / Rational::from_integer(factorial(n as usize)))
}

/// Coefficients `J(r,s,a)(0..=n_max)` of the series solution of
/// `w = a + u w^{r+1} / (1+w)^s`, by fixed-point iteration in `u`.
pub fn moment_series(params: &ModelParams, n_max: u32) -> Result<MomentSequence> {
    if n_max < 1 {
        return Err(Error::InvalidParams("n_max must be >= 1".into()));
    }
    let order = n_max as usize + 1;
    let mut w = FormalSeries::constant(params.a.clone(), order)?;
    // After iteration k the coefficients of u^0..u^k are final, so each pass
    // only needs to work at that truncation.
    for k in 1..=order {
        let work = (k + 1).min(order);
        let wk = w.with_order(work)?;
        let one_plus_w = FormalSeries::one(work)?.add(&wk)?;
        let quotient = wk.pow(params.r + 1).mul(&one_plus_w.recip()?.pow(params.s))?;
        let next = FormalSeries::constant(params.a.clone(), work)?.add(&quotient.shift_up())?;
        w = next.with_order(order)?;
    }
    Ok(MomentSequence::new(Distribution::of_params(params), w.into_coeffs()))
}

/// Fuss-Catalan number `FC_r(n) = C(rn+n, n) / (rn+1)`.
pub fn fuss_catalan(r: u32, n: u32) -> Rational {
    let (r, n) = (r as i64, n as i64);
    binomial_general(&int(r * n + n), n as usize) / int(r * n + 1)
}

/// Raney number `R_{alpha,beta}(n) = beta / (n alpha + beta) * C(n alpha + beta, n)`,
/// extended to rational parameters.
pub fn raney(alpha: &Rational, beta: &Rational, n: u32) -> Result<Rational> {
    let top = int(n as i64) * alpha + beta;
    if top.is_zero() {
        return Err(Error::DivisionByZero(format!(
            "n*alpha + beta = 0 for Raney({}, {}) at n = {n}",
            numkit::format_rational(alpha),
            numkit::format_rational(beta)
        )));
    }
    Ok(beta / &top * binomial_general(&top, n as usize))
}
