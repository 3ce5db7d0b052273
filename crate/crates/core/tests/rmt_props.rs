//! Statistical and structural properties of the product-ensemble sampler.

use jrsa_core::rmt::{run_experiment, sample_spectrum, simulate, EnsembleConfig};

#[test]
fn ginibre_products_follow_fuss_catalan() {
    // s = 0: the limit is FC_r
    for r in [1, 2] {
        let rep = run_experiment(&EnsembleConfig::new(60, r, 0, 40, 5)).unwrap();
        assert!(rep.all_pass(), "r = {r}: {rep:?}");
    }
}

#[test]
fn offsets_shift_the_finite_n_mean() {
    // nu = (0,2,1), kappa_1 = 5: E tr T*T = (n+2) n / (2n+5) and the Ginibre
    // factor contributes (n+1), so E m_1 = (n+1)(n+2) / (n (2n+5)) -> 1/2
    let n = 80;
    let mut c = EnsembleConfig::new(n, 2, 1, 40, 9).with_nu(vec![0, 2, 1]);
    c.l_offsets = vec![5];
    let rep = run_experiment(&c).unwrap();
    let nf = n as f64;
    let exact = (nf + 1.0) * (nf + 2.0) / (nf * (2.0 * nf + 5.0));
    let m1 = &rep.empirical_moments[0];
    assert!((m1.mean - exact).abs() <= 3.0 * m1.standard_error, "{m1:?} vs {exact}");
    assert!((exact - 0.5).abs() < 0.01);
}

#[test]
fn replicate_independent_of_batch() {
    let c = EnsembleConfig::new(16, 3, 2, 8, 1234);
    let all = simulate(&c).unwrap();
    assert_eq!(all[5], sample_spectrum(&c, 5).unwrap());
    let mut other = c.clone();
    other.trials = 3;
    assert_eq!(simulate(&other).unwrap()[..], all[..3]);
    other.seed = 1235;
    assert_ne!(simulate(&other).unwrap()[0], all[0]);
}
