//! S-transform pipeline on truncated exact series and free multiplicative
//! convolution of moment sequences.
//!
//! With moments `m_n` of a probability measure,
//! `psi(z) = sum_{n>=1} m_n z^n`, `chi` is the compositional inverse of `psi`
//! and `S(z) = (1+z)/z * chi(z)`. Free multiplicative convolution multiplies
//! S-transforms.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{moment_jacobi, Distribution, ModelParams, MomentSequence};
use crate::numkit::{self, int, ratio, FormalSeries, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Psi,
    Chi,
    STransform,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformSeries {
    pub kind: TransformKind,
    pub series: FormalSeries,
}

impl TransformSeries {
    pub fn new(kind: TransformKind, series: FormalSeries) -> Result<Self> {
        let c0 = series.coeff(0);
        let ok = match kind {
            TransformKind::Psi => c0.is_zero(),
            TransformKind::Chi => c0.is_zero() && !series.coeff(1).is_zero(),
            TransformKind::STransform => !c0.is_zero(),
        };
        if !ok {
            return Err(match kind {
                TransformKind::Psi => Error::NonzeroConstantTerm,
                TransformKind::Chi => Error::VanishingLinearTerm,
                TransformKind::STransform => Error::ZeroConstantTerm,
            });
        }
        Ok(Self { kind, series })
    }

    /// S-transform from explicit coefficients.
    pub fn s_transform(series: FormalSeries) -> Result<Self> {
        Self::new(TransformKind::STransform, series)
    }
}

fn check_normalized(m: &MomentSequence) -> Result<()> {
    match m.mass() {
        Some(m0) if m0.is_one() => Ok(()),
        Some(m0) => Err(Error::NotNormalized(numkit::format_rational(m0))),
        None => Err(Error::NotEnoughMoments { needed: 1, available: 0 }),
    }
}

fn check_len(m: &MomentSequence, needed: usize) -> Result<()> {
    if m.len() < needed {
        return Err(Error::NotEnoughMoments { needed, available: m.len() });
    }
    Ok(())
}

/// `psi = m_1 z + m_2 z^2 + ...` truncated to `order` coefficients.
pub fn psi_from_moments(m: &MomentSequence, order: usize) -> Result<TransformSeries> {
    check_normalized(m)?;
    check_len(m, order)?;
    let series = FormalSeries::from_fn(order, |k| if k == 0 { Rational::zero() } else { m.values[k].clone() })?;
    TransformSeries::new(TransformKind::Psi, series)
}

/// S-transform with `order` coefficients; consumes moments `m_0..=m_order`.
pub fn s_from_moments(m: &MomentSequence, order: usize) -> Result<TransformSeries> {
    if order == 0 {
        return Err(Error::EmptySeries);
    }
    check_normalized(m)?;
    check_len(m, order + 1)?;
    if m.values[1].is_zero() {
        return Err(Error::ZeroFirstMoment);
    }
    let psi = psi_from_moments(m, order + 1)?;
    let chi = psi.series.reverse()?;
    let one_plus_z = FormalSeries::from_ints(order, &[1, 1])?;
    let s = chi.shift_down()?.mul(&one_plus_z)?;
    TransformSeries::new(TransformKind::STransform, s)
}

/// Moments `m_0..m_{order-1}` of the law with S-transform `s`.
///
/// Needs `order - 1` coefficients of `s`.
pub fn moments_from_s(s: &TransformSeries, order: usize) -> Result<MomentSequence> {
    if order == 0 {
        return Err(Error::EmptySeries);
    }
    let s0 = s.series.coeff(0);
    if s0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    if order == 1 {
        return Ok(MomentSequence::new(Distribution::Custom, vec![Rational::one()]));
    }
    if s.series.order() < order - 1 {
        return Err(Error::NotEnoughMoments { needed: order - 1, available: s.series.order() });
    }
    let one_plus_z = FormalSeries::from_ints(order, &[1, 1])?;
    let chi = s.series.with_order(order)?.mul(&one_plus_z.recip()?)?.shift_up();
    let psi = chi.reverse()?;
    let mut values = psi.into_coeffs();
    values[0] = Rational::one();
    Ok(MomentSequence::new(Distribution::Custom, values))
}

/// Moments `m_0..m_{order-1}` of `a ⊠ b`.
pub fn free_multiply(a: &MomentSequence, b: &MomentSequence, order: usize) -> Result<MomentSequence> {
    if order < 2 {
        return Err(Error::InvalidParams("free_multiply needs order >= 2".into()));
    }
    let sa = s_from_moments(a, order - 1)?;
    let sb = s_from_moments(b, order - 1)?;
    let product = TransformSeries::s_transform(sa.series.mul(&sb.series)?)?;
    let mut out = moments_from_s(&product, order)?;
    out.label = Distribution::Product { factors: flatten(&a.label).chain(flatten(&b.label)).collect() };
    Ok(out)
}

fn flatten(d: &Distribution) -> Box<dyn Iterator<Item = Distribution> + '_> {
    match d {
        Distribution::Product { factors } => Box::new(factors.iter().cloned()),
        other => Box::new(std::iter::once(other.clone())),
    }
}

/// Folds [`free_multiply`] over a non-empty list of factors.
pub fn free_multiply_all(factors: &[MomentSequence], order: usize) -> Result<MomentSequence> {
    let (first, rest) =
        factors.split_first().ok_or_else(|| Error::InvalidParams("at least one factor required".into()))?;
    check_normalized(first)?;
    if rest.is_empty() {
        check_len(first, order)?;
        return Ok(MomentSequence::new(first.label.clone(), first.values[..order].to_vec()));
    }
    rest.iter().try_fold(first.clone(), |acc, f| free_multiply(&acc, f, order))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationEntry {
    pub n: usize,
    pub convolved: String,
    pub expected: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub r: u32,
    pub s: u32,
    pub order: usize,
    pub entries: Vec<FactorizationEntry>,
}

impl FactorizationReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Builds `FC_{r-s} ⊠ R_{1,1/2}^{⊠s}` by repeated convolution and compares
/// each moment `n < order` exactly with `J(r,s,1)(n)`.
pub fn verify_factorization(r: u32, s: u32, order: usize) -> Result<FactorizationReport> {
    let params = ModelParams::new_strict(r, s, int(1))?;
    if order < 2 {
        return Err(Error::InvalidParams("order must be >= 2".into()));
    }
    let mut factors = vec![MomentSequence::fuss_catalan(r - s, order)];
    let arcsine = MomentSequence::raney(&int(1), &ratio(1, 2), order)?;
    factors.extend(std::iter::repeat_n(arcsine, s as usize));
    let kappa = free_multiply_all(&factors, order)?;
    let entries = kappa
        .values
        .iter()
        .enumerate()
        .map(|(n, got)| {
            let expected = moment_jacobi(&params, n as u32);
            FactorizationEntry {
                n,
                convolved: numkit::format_rational(got),
                expected: numkit::format_rational(&expected),
                pass: *got == expected,
            }
        })
        .collect();
    Ok(FactorizationReport { r, s, order, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternating(order: usize, lead: i64) -> FormalSeries {
        // lead, -1, 1, -1, ...
        FormalSeries::from_fn(order, |k| match k {
            0 => int(lead),
            k if k % 2 == 1 => int(-1),
            _ => int(1),
        })
        .unwrap()
    }

    #[test]
    fn psi_examples() {
        let point = MomentSequence::point_mass(6);
        let psi = psi_from_moments(&point, 6).unwrap();
        assert_eq!(psi.series, FormalSeries::from_ints(6, &[0, 1, 1, 1, 1, 1]).unwrap());
        let mp = MomentSequence::fuss_catalan(1, 5);
        let psi = psi_from_moments(&mp, 5).unwrap();
        assert_eq!(psi.series, FormalSeries::from_ints(5, &[0, 1, 2, 5, 14]).unwrap());
        let unnormalized = MomentSequence::new(Distribution::Custom, vec![int(2), int(1)]);
        assert!(matches!(psi_from_moments(&unnormalized, 2), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn zero_mean_fails_at_reversion() {
        let m = MomentSequence::new(Distribution::Custom, [1, 0, 1, 0, 2].map(int).to_vec());
        let psi = psi_from_moments(&m, 5).unwrap();
        assert_eq!(psi.series.reverse(), Err(Error::VanishingLinearTerm));
        assert_eq!(s_from_moments(&m, 4), Err(Error::ZeroFirstMoment));
    }

    #[test]
    fn s_transform_examples() {
        let s = s_from_moments(&MomentSequence::point_mass(9), 8).unwrap();
        assert_eq!(s.series, FormalSeries::one(8).unwrap());
        let s = s_from_moments(&MomentSequence::fuss_catalan(1, 9), 8).unwrap();
        assert_eq!(s.series, alternating(8, 1));
        let arcsine = MomentSequence::raney(&int(1), &ratio(1, 2), 9).unwrap();
        let s = s_from_moments(&arcsine, 8).unwrap();
        assert_eq!(s.series, alternating(8, 2));
    }

    #[test]
    fn inverse_pipeline_examples() {
        let m = moments_from_s(&TransformSeries::s_transform(FormalSeries::one(6).unwrap()).unwrap(), 7).unwrap();
        assert_eq!(m.values, vec![int(1); 7]);
        let m = moments_from_s(&TransformSeries::s_transform(alternating(4, 1)).unwrap(), 5).unwrap();
        assert_eq!(m.values, [1, 1, 2, 5, 14].map(int).to_vec());
        // (z+2)/(z+1)^2
        let order = 8;
        let zp2 = FormalSeries::from_ints(order, &[2, 1]).unwrap();
        let zp1 = FormalSeries::from_ints(order, &[1, 1]).unwrap();
        let s = zp2.mul(&zp1.recip().unwrap().pow(2)).unwrap();
        let m = moments_from_s(&TransformSeries::s_transform(s).unwrap(), 6).unwrap();
        assert_eq!(m.values, vec![int(1), ratio(1, 2), ratio(5, 8), int(1), ratio(231, 128), ratio(7, 2)]);
        assert!(TransformSeries::s_transform(FormalSeries::identity(4).unwrap()).is_err());
    }

    #[test]
    fn free_multiply_examples() {
        let fc1 = MomentSequence::fuss_catalan(1, 6);
        let prod = free_multiply(&fc1, &fc1, 5).unwrap();
        assert_eq!(prod.values, [1, 1, 3, 12, 55].map(int).to_vec());
        let arcsine = MomentSequence::raney(&int(1), &ratio(1, 2), 8).unwrap();
        let prod = free_multiply(&fc1, &arcsine, 4).unwrap();
        assert_eq!(prod.values, vec![int(1), ratio(1, 2), ratio(5, 8), int(1)]);
        let delta = MomentSequence::point_mass(8);
        assert_eq!(free_multiply(&arcsine, &delta, 8).unwrap().values, arcsine.values);
        assert!(matches!(
            free_multiply(&fc1, &MomentSequence::fuss_catalan(1, 2), 5),
            Err(Error::NotEnoughMoments { .. })
        ));
    }

    #[test]
    fn labels_flatten() {
        let fc1 = MomentSequence::fuss_catalan(1, 5);
        let p = free_multiply_all(&[fc1.clone(), fc1.clone(), fc1], 4).unwrap();
        match p.label {
            Distribution::Product { factors } => assert_eq!(factors.len(), 3),
            other => panic!("unexpected label {other:?}"),
        }
    }

    #[test]
    fn factorization_examples() {
        assert!(verify_factorization(2, 1, 10).unwrap().all_pass());
        assert!(verify_factorization(3, 0, 10).unwrap().all_pass());
        let rep = verify_factorization(4, 2, 12).unwrap();
        assert_eq!(rep.entries.len(), 12);
        assert!(rep.all_pass());
        assert!(verify_factorization(3, 3, 10).is_err());
    }
}
