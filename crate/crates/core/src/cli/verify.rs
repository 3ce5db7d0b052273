//! Invariant suites behind `jrsa verify`.

use clap::ValueEnum;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::freeconv::verify_factorization;
use crate::moments::{fuss_catalan, moment_derivative, moment_jacobi, moment_series, raney, ModelParams};
use crate::numkit::{format_rational, int, ratio, to_f64, Rational};
use crate::spectral::{endpoints, QuadratureOptions, SpectralModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Oracles,
    Positivity,
    Quadrature,
    Factorization,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Oracles, Suite::Positivity, Suite::Quadrature, Suite::Factorization],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracles => "oracles",
            Suite::Positivity => "positivity",
            Suite::Quadrature => "quadrature",
            Suite::Factorization => "factorization",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Deliberately corrupts one oracle value; used as a negative control.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaultInjection {
    pub enabled: bool,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// Records an error from a computation as a failure instead of aborting.
    fn guard<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks += 1;
                self.failures.push(format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite: suite.name().into(),
            checks: self.checks,
            pass: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

/// `a` values of the oracle and quadrature lattices.
pub fn lattice_a() -> [Rational; 3] {
    [ratio(1, 2), int(1), int(2)]
}

pub fn run_suite(suite: Suite, fault: FaultInjection) -> Vec<SuiteReport> {
    suite
        .expand()
        .into_iter()
        .map(|s| match s {
            Suite::Oracles => oracles(fault),
            Suite::Positivity => positivity(),
            Suite::Quadrature => quadrature(),
            Suite::Factorization => factorization(),
            Suite::All => unreachable!("expanded"),
        })
        .collect()
}

/// Jacobi, Leibniz and series routes agree exactly for `r <= 6`, `s <= r`,
/// `a` in the lattice, `1 <= n <= 20`; plus the Fuss-Catalan and Raney
/// special cases.
pub fn oracles(fault: FaultInjection) -> SuiteReport {
    let mut t = Tally::default();
    for r in 1..=6u32 {
        for s in 0..=r {
            for a in lattice_a() {
                let p = ModelParams::new(r, s, a).expect("lattice parameters are valid");
                let Some(series) = t.guard(moment_series(&p, 20), || format!("{p} series")) else { continue };
                for n in 1..=20u32 {
                    let mut jac = moment_jacobi(&p, n);
                    if fault.enabled && r == 3 && s == 1 && n == 7 && p.a().is_one() {
                        jac += ratio(1, 1_000_000_007);
                    }
                    let Some(der) = t.guard(moment_derivative(&p, n), || format!("{p}({n}) derivative")) else {
                        continue;
                    };
                    let ser = &series.values[n as usize];
                    t.check(jac == der && der == *ser, || {
                        format!(
                            "{p}({n}): jacobi {} derivative {} series {}",
                            format_rational(&jac),
                            format_rational(&der),
                            format_rational(ser)
                        )
                    });
                }
            }
        }
    }
    for r in 1..=6u32 {
        let p0 = ModelParams::new(r, 0, int(1)).unwrap();
        let p1 = ModelParams::new(r, 1, int(1)).unwrap();
        let alpha = ratio(r as i64 + 1, 2);
        for n in 0..=20u32 {
            t.check(moment_jacobi(&p0, n) == fuss_catalan(r, n), || format!("J({r},0,1)({n}) != FC_{r}({n})"));
            let Some(rn) = t.guard(raney(&alpha, &ratio(1, 2), n), || format!("Raney({r}) at {n}")) else { continue };
            t.check(moment_jacobi(&p1, n) == rn, || format!("J({r},1,1)({n}) != R_(({r}+1)/2,1/2)({n})"));
        }
    }
    t.finish(Suite::Oracles)
}

/// Exact moments are positive on the oracle lattice and the density is
/// positive on a 64-point interior grid for every `s < r`.
pub fn positivity() -> SuiteReport {
    let mut t = Tally::default();
    for r in 1..=6u32 {
        for s in 0..=r {
            for a in lattice_a() {
                let p = ModelParams::new(r, s, a).unwrap();
                for n in 0..=20u32 {
                    let m = moment_jacobi(&p, n);
                    t.check(m > Rational::zero(), || format!("{p}({n}) = {} is not positive", format_rational(&m)));
                }
                if s == r {
                    continue;
                }
                let Some(model) = t.guard(SpectralModel::new(&p), || format!("{p} model")) else { continue };
                let Some(grid) = t.guard(model.density_grid(64), || format!("{p} density grid")) else { continue };
                for d in grid {
                    t.check(d.rho > 0.0, || format!("{p}: rho({}) = {}", d.x, d.rho));
                }
            }
        }
    }
    t.finish(Suite::Positivity)
}

/// Quadrature moments of the density match `J(n)` to `1e-7` relative for
/// `r <= 4`, `s < r`, `n <= 10`, and the mass matches `a` to `1e-8`;
/// closed-form endpoint checks.
pub fn quadrature() -> SuiteReport {
    let mut t = Tally::default();
    for r in 1..=4u32 {
        for s in 0..r {
            for a in lattice_a() {
                let p = ModelParams::new(r, s, a).unwrap();
                let Some(model) = t.guard(SpectralModel::new(&p), || format!("{p} model")) else { continue };
                let res = model.quadrature_moments(10, QuadratureOptions::default());
                let Some(res) = t.guard(res, || format!("{p} quadrature")) else { continue };
                let mass = p.a_f64();
                t.check((res.values[0] - mass).abs() <= 1e-8, || format!("{p}: mass {} vs {mass}", res.values[0]));
                for n in 0..=10u32 {
                    let exact = to_f64(&moment_jacobi(&p, n));
                    let got = res.values[n as usize];
                    let rel = (got - exact).abs() / exact;
                    t.check(rel <= 1e-7, || format!("{p}({n}): quadrature {got} vs {exact} (rel {rel:e})"));
                }
            }
        }
    }
    let mp = ModelParams::new(1, 0, int(1)).unwrap();
    if let Some(sd) = t.guard(endpoints(&mp), || "J(1,0,1) endpoints".into()) {
        t.check((sd.x_star - 4.0).abs() <= 1e-12, || format!("J(1,0,1): x* = {}", sd.x_star));
    }
    if let Some(d) = t.guard(SpectralModel::new(&mp).and_then(|m| m.density(2.0)), || "J(1,0,1) density".into()) {
        let want = 1.0 / std::f64::consts::TAU;
        t.check((d.rho - want).abs() <= 1e-9, || format!("J(1,0,1): rho(2) = {} vs {want}", d.rho));
    }
    let fc2 = ModelParams::new(2, 0, int(1)).unwrap();
    if let Some(sd) = t.guard(endpoints(&fc2), || "J(2,0,1) endpoints".into()) {
        t.check((sd.x_star - 6.75).abs() <= 1e-12, || format!("J(2,0,1): x* = {}", sd.x_star));
    }
    t.finish(Suite::Quadrature)
}

/// `FC_{r-s} ⊠ R_{1,1/2}^{⊠s}` equals `J(r,s,1)` exactly for `r <= 6`, `s < r`, `n <= 15`.
pub fn factorization() -> SuiteReport {
    let mut t = Tally::default();
    for r in 1..=6u32 {
        for s in 0..r {
            let Some(rep) = t.guard(verify_factorization(r, s, 16), || format!("factorization ({r},{s})")) else {
                continue;
            };
            for e in rep.entries {
                t.check(e.pass, || format!("({r},{s}) n={}: {} vs {}", e.n, e.convolved, e.expected));
            }
        }
    }
    t.finish(Suite::Factorization)
}
