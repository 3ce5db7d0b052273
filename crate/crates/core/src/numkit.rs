//! Exact arithmetic foundation: rationals, generalized binomials, Pochhammer
//! symbols and truncated formal power series.
//!
//! Every value here is exact. `BigRational` normalizes after each operation,
//! so equality is structural and intermediate sizes stay bounded.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational with positive, coprime denominator.
pub type Rational = BigRational;

/// Default truncation order for formal series.
pub const DEFAULT_ORDER: usize = 16;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q` as a normalized rational. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `top (top-1) ... (top-k+1) / k!`, exact for any rational `top`.
pub fn binomial_general(top: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    for j in 0..k {
        acc *= top - int(j as i64);
        acc /= int(j as i64 + 1);
    }
    acc
}

/// Rising factorial `x (x+1) ... (x+k-1)`.
pub fn pochhammer(x: &Rational, k: usize) -> Rational {
    let mut acc = Rational::one();
    for j in 0..k {
        acc *= x + int(j as i64);
    }
    acc
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, j| acc * j)
}

/// Integer power, negative exponents allowed for nonzero bases.
pub fn pow_i(base: &Rational, exp: i64) -> Result<Rational> {
    if exp < 0 && base.is_zero() {
        return Err(Error::DivisionByZero("zero raised to a negative power".into()));
    }
    let mag = exp.unsigned_abs();
    let mut acc = Rational::one();
    let mut b = base.clone();
    let mut e = mag;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    Ok(if exp < 0 { acc.recip() } else { acc })
}

/// Nearest `f64` to a rational, robust to numerator/denominator overflow.
pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    // Scale so the quotient has ~64 significant bits before converting.
    let (num, den) = if shift > 0 { (n.clone(), d << (shift as u64)) } else { (n << ((-shift) as u64), d.clone()) };
    let scaled = Rational::new(num << 64u32, den);
    let mant = scaled.to_integer().to_f64().unwrap_or(f64::NAN);
    mant * 2f64.powi((shift - 64) as i32)
}

/// Formats as `p/q`, or `p` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p`, `p/q`, or a terminating decimal such as `0.25` or `-1.5e-2`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::InvalidParams(format!("cannot parse rational literal '{text}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::DivisionByZero(format!("'{text}'")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exponent - frac.len() as i64;
    let mut value = Rational::from_integer(n) * pow_i(&int(10), scale)?;
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Truncated power series `c0 + c1 z + ... + c_{N-1} z^{N-1}` with exact
/// coefficients. The order `N` is the number of stored coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FormalSeries {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        write!(f, "FormalSeries[{}]", parts.join(", "))
    }
}

impl FormalSeries {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { coeffs })
    }

    /// Builds a series from `f(k)` for `k < order`.
    pub fn from_fn(order: usize, f: impl FnMut(usize) -> Rational) -> Result<Self> {
        Self::new((0..order).map(f).collect())
    }

    pub fn from_ints(order: usize, values: &[i64]) -> Result<Self> {
        Self::from_fn(order, |k| values.get(k).map_or_else(Rational::zero, |&v| int(v)))
    }

    pub fn zero(order: usize) -> Result<Self> {
        Self::from_fn(order, |_| Rational::zero())
    }

    pub fn one(order: usize) -> Result<Self> {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Result<Self> {
        let mut s = Self::zero(order)?;
        s.coeffs[0] = c;
        Ok(s)
    }

    /// The series `z`.
    pub fn identity(order: usize) -> Result<Self> {
        let mut s = Self::zero(order)?;
        if order > 1 {
            s.coeffs[1] = Rational::one();
        }
        Ok(s)
    }

    /// `1/(1 - c z)` truncated.
    pub fn geometric(c: &Rational, order: usize) -> Result<Self> {
        let mut acc = Rational::one();
        Self::from_fn(order, |_| {
            let v = acc.clone();
            acc *= c;
            v
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Same coefficients cut or zero-padded to `order`.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::from_fn(order, |k| self.coeff(k))
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Cauchy product truncated to the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order();
        let mut out = vec![Rational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n - i).enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self { coeffs: out }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.order()).expect("order >= 1");
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = c0.recip();
        let n = self.order();
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out[k - j];
                }
            }
            out.push(-acc * &inv0);
        }
        Self::new(out)
    }

    /// Multiplies by `z`, dropping the top coefficient.
    pub fn shift_up(&self) -> Self {
        let n = self.order();
        let mut out = Vec::with_capacity(n);
        out.push(Rational::zero());
        out.extend(self.coeffs.iter().take(n - 1).cloned());
        Self { coeffs: out }
    }

    /// Divides by `z`; requires zero constant term. The order drops by one.
    pub fn shift_down(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        Self::new(self.coeffs[1..].to_vec())
    }

    /// `outer ∘ inner`, truncated to the common order.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_order(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        // Horner: ((c_{N-1} inner + c_{N-2}) inner + ...) + c_0
        let n = self.order();
        let mut acc = Self::zero(n)?;
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_unchecked(inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `f(g(z)) = g(f(z)) = z` up to the order.
    ///
    /// Lagrange inversion: `[z^k] g = (1/k) [z^{k-1}] (z / f(z))^k`.
    pub fn reverse(&self) -> Result<Self> {
        let n = self.order();
        if n < 2 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(Error::VanishingLinearTerm);
        }
        // z / f(z) = 1 / (f(z)/z); extend f by one slot so the quotient keeps order n.
        let f_over_z = Self::new(self.coeffs[1..].iter().cloned().chain([Rational::zero()]).collect())?;
        let h = f_over_z.recip()?;
        let mut out = vec![Rational::zero(); n];
        let mut power = Self::one(n)?;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            power = power.mul_unchecked(&h);
            *slot = power.coeff(k - 1) / int(k as i64);
        }
        Self::new(out)
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: Self) -> FormalSeries {
        FormalSeries::add(self, rhs).expect("order mismatch in series addition")
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: Self) -> FormalSeries {
        FormalSeries::sub(self, rhs).expect("order mismatch in series subtraction")
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        self.scale(&int(-1))
    }
}

pub fn series_mul(a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries> {
    a.mul(b)
}

pub fn series_compose(outer: &FormalSeries, inner: &FormalSeries) -> Result<FormalSeries> {
    outer.compose(inner)
}

pub fn series_reverse(f: &FormalSeries) -> Result<FormalSeries> {
    f.reverse()
}

/// True when `q > 0`.
pub fn is_positive(q: &Rational) -> bool {
    q.is_positive()
}
