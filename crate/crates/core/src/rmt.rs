//! Monte Carlo sampling of the product ensemble
//! `Y = G_r ... G_{s+1} T_s ... T_1` and comparison of its squared singular
//! values with the limiting law `J(r,s,1)`.
//!
//! `T_j` is the `(n+nu_j) x (n+nu_{j-1})` upper-left block of a Haar unitary of
//! size `l_j = 2n + kappa_j`; `G_j` is an `(n+nu_j) x (n+nu_{j-1})` complex
//! Ginibre matrix with `E|g|^2 = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{moment_jacobi, ModelParams};
use crate::numkit::{format_rational, int, to_f64};
use crate::spectral::endpoints;

pub type CMatrix = DMatrix<Complex64>;

/// Moments compared by default, `k = 1..=DEFAULT_K_MAX`.
pub const DEFAULT_K_MAX: usize = 4;

/// Verdict tolerance in standard errors.
pub const SE_TOLERANCE: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub r: u32,
    pub s: u32,
    /// `nu_0..nu_r`, with `nu_0 = 0`.
    pub nu: Vec<usize>,
    /// `kappa_1..kappa_s`; `l_j = 2n + kappa_j`.
    pub l_offsets: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub k_max: usize,
}

impl EnsembleConfig {
    /// All `nu_j = 0` and the smallest admissible `kappa_j = nu_j + nu_{j-1}`.
    pub fn new(n: usize, r: u32, s: u32, trials: usize, seed: u64) -> Self {
        let nu = vec![0; r as usize + 1];
        let l_offsets = default_offsets(&nu, s);
        Self { n, r, s, nu, l_offsets, trials, seed, k_max: DEFAULT_K_MAX }
    }

    /// Replaces `nu` and resets `kappa` to its minimal admissible values.
    pub fn with_nu(mut self, nu: Vec<usize>) -> Self {
        self.l_offsets = if nu.len() == self.r as usize + 1 { default_offsets(&nu, self.s) } else { Vec::new() };
        self.nu = nu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n < 1 {
            return bad("n must be >= 1".into());
        }
        if self.r < 1 || self.s >= self.r {
            return bad(format!("need 0 <= s < r, got r={}, s={}", self.r, self.s));
        }
        if self.nu.len() != self.r as usize + 1 {
            return bad(format!("nu must list nu_0..nu_r ({} values), got {}", self.r + 1, self.nu.len()));
        }
        if self.nu[0] != 0 {
            return bad("nu_0 must be 0".into());
        }
        if self.l_offsets.len() != self.s as usize {
            return bad(format!("need {} truncation offsets, got {}", self.s, self.l_offsets.len()));
        }
        for j in 1..=self.s as usize {
            let (l, m, c) = (self.truncation_size(j), self.rows(j), self.cols(j));
            if l < m + c {
                return bad(format!("truncation {j}: l = {l} < m + n = {}", m + c));
            }
        }
        if self.k_max < 1 {
            return bad("k_max must be >= 1".into());
        }
        Ok(())
    }

    fn rows(&self, j: usize) -> usize {
        self.n + self.nu[j]
    }

    fn cols(&self, j: usize) -> usize {
        self.n + self.nu[j - 1]
    }

    /// `l_j = 2n + kappa_j` for `1 <= j <= s`.
    pub fn truncation_size(&self, j: usize) -> usize {
        2 * self.n + self.l_offsets[j - 1]
    }
}

fn default_offsets(nu: &[usize], s: u32) -> Vec<usize> {
    (1..=s as usize).map(|j| nu[j] + nu[j - 1]).collect()
}

/// Squared singular values of one rescaled product sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    pub eigenvalues: Vec<f64>,
    pub n: usize,
    pub replicate_seed: u64,
}

impl EmpiricalSpectrum {
    /// `(1/n) sum lambda^k`.
    pub fn moment(&self, k: usize) -> f64 {
        self.eigenvalues.iter().map(|l| l.powi(k as i32)).sum::<f64>() / self.n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub mean: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub empirical_moments: Vec<MomentEstimate>,
    pub theoretical_moments: Vec<f64>,
    /// Same values as exact `p/q` strings.
    pub theoretical_exact: Vec<String>,
    pub z_scores: Vec<f64>,
    pub verdicts: Vec<bool>,
    pub max_eigenvalue: f64,
    pub x_star: f64,
    pub se_tolerance: f64,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| *v)
    }

    /// `max_eigenvalue / x* - 1`.
    pub fn edge_margin(&self) -> f64 {
        self.max_eigenvalue / self.x_star - 1.0
    }
}

/// i.i.d. complex Gaussians with independent `N(0, 1/2)` real and imaginary parts.
pub fn sample_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    // column-major fill keeps the draw order fixed
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(sd * re, sd * im)
    })
}

/// First `cols` columns of a Haar unitary of size `rows`: the QR factor of a
/// Ginibre matrix with each column multiplied by the phase of `R_jj`, making
/// the triangular factor's diagonal positive.
fn haar_columns<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMatrix> {
    let g = sample_ginibre(rows, cols, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let m = d.norm();
        if m < f64::MIN_POSITIVE || !m.is_finite() {
            return Err(Error::SingularSample);
        }
        let phase = d / m;
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

pub fn sample_haar_unitary<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Result<CMatrix> {
    if l < 1 {
        return Err(Error::InvalidParams("unitary size must be >= 1".into()));
    }
    haar_columns(l, l, rng)
}

/// Upper-left `m x n` block of a Haar unitary of size `l`. Only the first `n`
/// columns of the unitary are generated; their law is that of the full matrix.
pub fn sample_truncation<R: Rng + ?Sized>(l: usize, m: usize, n: usize, rng: &mut R) -> Result<CMatrix> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidParams("truncation dimensions must be >= 1".into()));
    }
    if l < m + n {
        return Err(Error::InvalidParams(format!("truncation needs l >= m + n, got l={l}, m={m}, n={n}")));
    }
    Ok(haar_columns(l, n, rng)?.rows(0, m).into_owned())
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index`: `splitmix64(splitmix64(master) ^ index)`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// One draw of `Y`, factors drawn in the order `T_1..T_s, G_{s+1}..G_r`.
pub fn sample_product<R: Rng + ?Sized>(config: &EnsembleConfig, rng: &mut R) -> Result<CMatrix> {
    config.validate()?;
    let mut y: Option<CMatrix> = None;
    for j in 1..=config.r as usize {
        let (m, c) = (config.rows(j), config.cols(j));
        let factor = if j <= config.s as usize {
            sample_truncation(config.truncation_size(j), m, c, rng)?
        } else {
            sample_ginibre(m, c, rng)
        };
        y = Some(match y {
            None => factor,
            Some(prev) => factor * prev,
        });
    }
    Ok(y.expect("r >= 1"))
}

/// Squared singular values of `Y / n^{(r-s)/2}`, sorted ascending.
pub fn sample_spectrum(config: &EnsembleConfig, replicate_index: u64) -> Result<EmpiricalSpectrum> {
    let seed = replicate_seed(config.seed, replicate_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = sample_product(config, &mut rng)?;
    let scale = (config.n as f64).powi((config.r - config.s) as i32);
    let sv = y.singular_values();
    if sv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSample);
    }
    let mut eigenvalues: Vec<f64> = sv.iter().map(|v| v * v / scale).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(EmpiricalSpectrum { eigenvalues, n: config.n, replicate_seed: seed })
}

/// All `trials` replicates, computed in parallel and returned in index order.
pub fn simulate(config: &EnsembleConfig) -> Result<Vec<EmpiricalSpectrum>> {
    config.validate()?;
    if config.trials < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 trials, got {}", config.trials)));
    }
    (0..config.trials as u64).into_par_iter().map(|i| sample_spectrum(config, i)).collect()
}

/// Mean and standard error of `(1/n) sum lambda^k` across replicates.
pub fn empirical_moments(spectra: &[EmpiricalSpectrum], k_max: usize) -> Result<Vec<MomentEstimate>> {
    if spectra.len() < 2 {
        return Err(Error::InvalidParams("standard error needs at least 2 replicates".into()));
    }
    let t = spectra.len() as f64;
    Ok((1..=k_max)
        .map(|k| {
            let vals: Vec<f64> = spectra.iter().map(|s| s.moment(k)).collect();
            let mean = vals.iter().sum::<f64>() / t;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
            MomentEstimate { k, mean, standard_error: (var / t).sqrt() }
        })
        .collect())
}

/// `|mean - exact| <= SE_TOLERANCE * se`.
pub fn verdict(estimate: &MomentEstimate, exact: f64) -> bool {
    (estimate.mean - exact).abs() <= SE_TOLERANCE * estimate.standard_error
}

/// Compares replicate spectra with the exact moments of `J(r,s,1)`.
pub fn compare(config: &EnsembleConfig, spectra: &[EmpiricalSpectrum]) -> Result<ComparisonReport> {
    config.validate()?;
    let params = ModelParams::new_strict(config.r, config.s, int(1))?;
    let empirical = empirical_moments(spectra, config.k_max)?;
    let exact: Vec<_> = (1..=config.k_max).map(|k| moment_jacobi(&params, k as u32)).collect();
    let theoretical: Vec<f64> = exact.iter().map(to_f64).collect();
    let z_scores = empirical
        .iter()
        .zip(&theoretical)
        .map(|(e, t)| if e.standard_error > 0.0 { (e.mean - t) / e.standard_error } else { 0.0 })
        .collect();
    let verdicts = empirical.iter().zip(&theoretical).map(|(e, t)| verdict(e, *t)).collect();
    let max_eigenvalue = spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).fold(0.0, f64::max);
    Ok(ComparisonReport {
        empirical_moments: empirical,
        theoretical_moments: theoretical,
        theoretical_exact: exact.iter().map(format_rational).collect(),
        z_scores,
        verdicts,
        max_eigenvalue,
        x_star: endpoints(&params)?.x_star,
        se_tolerance: SE_TOLERANCE,
    })
}

pub fn run_experiment(config: &EnsembleConfig) -> Result<ComparisonReport> {
    let spectra = simulate(config)?;
    compare(config, &spectra)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn unitarity_defect(u: &CMatrix) -> f64 {
        let p = u.adjoint() * u;
        let id = CMatrix::identity(p.nrows(), p.ncols());
        (p - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn ginibre_shape_and_law() {
        let mut g = rng(1);
        assert_eq!(sample_ginibre(3, 2, &mut g).shape(), (3, 2));
        let m = sample_ginibre(1, 10_000, &mut g);
        let mean: Complex64 = m.iter().sum::<Complex64>() / 1e4;
        let second = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e4;
        assert!(mean.norm() <= 0.05 && (second - 1.0).abs() <= 0.05, "{mean} {second}");
        assert_eq!(sample_ginibre(4, 4, &mut rng(9)), sample_ginibre(4, 4, &mut rng(9)));
    }

    #[test]
    fn haar_unitary() {
        let mut g = rng(2);
        for l in [1, 5, 32] {
            assert!(unitarity_defect(&sample_haar_unitary(l, &mut g).unwrap()) <= 1e-12);
        }
        let mean: Complex64 =
            (0..10_000).map(|_| sample_haar_unitary(1, &mut g).unwrap()[(0, 0)]).sum::<Complex64>() / 1e4;
        assert!(mean.norm() <= 0.05);
        assert!(sample_haar_unitary(0, &mut g).is_err());
    }

    #[test]
    fn haar_eigenvalue_arcs() {
        // 10^3 samples at l = 16, eigenvalue arguments binned into 8 arcs
        let mut g = rng(3);
        let mut counts = [0usize; 8];
        for _ in 0..1000 {
            let u = sample_haar_unitary(16, &mut g).unwrap();
            let ev = u.schur().eigenvalues().expect("complex Schur form is triangular");
            for z in ev.iter() {
                let t = z.arg().rem_euclid(std::f64::consts::TAU);
                counts[((t / std::f64::consts::TAU * 8.0) as usize).min(7)] += 1;
            }
        }
        let expect = 16_000.0 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 99th percentile of chi-square with 7 degrees of freedom
        assert!(chi2 < 18.475, "{chi2} {counts:?}");
    }

    #[test]
    fn truncation_bounds() {
        let mut g = rng(4);
        let t = sample_truncation(10, 4, 3, &mut g).unwrap();
        assert_eq!(t.shape(), (4, 3));
        assert!(t.singular_values().iter().all(|v| *v <= 1.0 + 1e-12));
        assert!(sample_truncation(6, 4, 3, &mut g).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::new(10, 3, 1, 5, 0).validate().is_ok());
        assert!(EnsembleConfig::new(10, 2, 2, 5, 0).validate().is_err());
        let c = EnsembleConfig::new(10, 3, 2, 5, 0).with_nu(vec![0, 1, 2, 0]);
        assert_eq!(c.l_offsets, vec![1, 3]);
        assert!(c.validate().is_ok());
        let mut bad = c.clone();
        bad.l_offsets[1] = 2;
        assert!(bad.validate().is_err());
        let mut bad = c;
        bad.nu[0] = 1;
        assert!(bad.validate().is_err());
        let mut one = EnsembleConfig::new(5, 1, 0, 1, 0);
        assert!(run_experiment(&one).is_err());
        one.trials = 0;
        assert!(simulate(&one).is_err());
    }

    #[test]
    fn gram_matrices_share_spectrum() {
        for (n, r, s, nu) in [(3, 2, 1, vec![0, 1, 2]), (8, 3, 1, vec![0, 0, 3, 1]), (5, 1, 0, vec![0, 4])] {
            let c = EnsembleConfig::new(n, r, s, 2, 7).with_nu(nu);
            let y = sample_product(&c, &mut rng(n as u64)).unwrap();
            let small = (y.adjoint() * &y).symmetric_eigen().eigenvalues;
            let big = (&y * y.adjoint()).symmetric_eigen().eigenvalues;
            let mut a: Vec<f64> = small.iter().copied().collect();
            let mut b: Vec<f64> = big.iter().copied().collect();
            a.sort_by(|x, y| y.total_cmp(x));
            b.sort_by(|x, y| y.total_cmp(x));
            let top = a[0];
            assert_eq!(a.len(), n);
            for (i, v) in a.iter().enumerate() {
                assert!((v - b[i]).abs() <= 1e-8 * top, "{v} vs {}", b[i]);
            }
            assert!(b[n..].iter().all(|v| v.abs() <= 1e-8 * top));
        }
    }

    #[test]
    fn spectra_are_deterministic() {
        let c = EnsembleConfig::new(12, 2, 1, 6, 42);
        let a = simulate(&c).unwrap();
        let b: Vec<_> = (0..6).map(|i| sample_spectrum(&c, i).unwrap()).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.eigenvalues.len() == 12 && s.eigenvalues.iter().all(|v| *v >= 0.0)));
        assert_ne!(a[0].eigenvalues, a[1].eigenvalues);
    }

    #[test]
    fn marchenko_pastur_mean() {
        let c = EnsembleConfig::new(50, 1, 0, 100, 11);
        let rep = run_experiment(&c).unwrap();
        assert!(rep.verdicts[0], "{rep:?}");
        assert!((rep.x_star - 4.0).abs() < 1e-12);
    }
}
