//! The `jrsa` command line.
//!
//! Every command builds a [`ReportEnvelope`] and a CSV table from the same
//! data; `--format` picks which one is written. Exit codes: 0 success,
//! 1 validation error, 2 numerical failure (including failed `verify` suites).

pub mod svg;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::freeconv::free_multiply_all;
use crate::moments::{ModelParams, MomentSequence};
use crate::numkit::{format_rational, int, parse_rational, to_f64, Rational};
use crate::rmt::{compare, simulate, EnsembleConfig};
use crate::spectral::{endpoints, SpectralModel};
use verify::{FaultInjection, Suite};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "jrsa", version, about = "Moments, densities and Monte Carlo checks for the J(r,s,a) laws")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed for simulations.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Number of moments for `convolve`; default for `moments --n-max`.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact moments J(0..=n_max).
    Moments {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        /// Rational literal "p/q" or terminating decimal.
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Branch-point endpoints w*, x*, w~, x~.
    Endpoints {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value = "1")]
        a: String,
    },
    /// Density on the interior grid x* i/(points+1).
    Density {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value = "1")]
        a: String,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    /// Moments of a free multiplicative product, e.g. "fc:1,raney:1:1/2".
    Convolve {
        /// Comma list of fc:<r> | raney:<alpha>:<beta> | jacobi:<r>:<s>.
        #[arg(long)]
        factors: String,
    },
    /// Monte Carlo comparison of the product ensemble with J(r,s,1).
    Simulate {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        /// nu_0..nu_r, comma separated; defaults to zeros.
        #[arg(long)]
        nu: Option<String>,
        /// kappa_1..kappa_s, comma separated; defaults to nu_j + nu_{j-1}.
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = crate::rmt::DEFAULT_K_MAX)]
        k_max: usize,
        /// Also write the histogram/density SVG here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run invariant suites; exit 0 iff all pass.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Common JSON wrapper of every command's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    pub params: Value,
    pub results: Value,
    pub version: String,
}

/// Rendered output of a command.
#[derive(Clone, Debug)]
pub struct Output {
    pub envelope: ReportEnvelope,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Non-zero when the command ran but its checks failed.
    pub status: i32,
}

impl Output {
    fn new(command: &str, params: Value, results: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Self {
            envelope: ReportEnvelope { command: command.into(), params, results, version: VERSION.into() },
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
            status: EXIT_OK,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.envelope).expect("envelope serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = csv_line(&self.header);
                for row in &self.rows {
                    s.push_str(&csv_line(row));
                }
                s
            }
        }
    }
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| if f.contains([',', '"', '\n']) { format!("\"{}\"", f.replace('"', "\"\"")) } else { f.clone() })
        .collect();
    quoted.join(",") + "\n"
}

/// Shortest decimal that parses back to the same double (at most 17
/// significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn exact_entry(n: usize, q: &Rational) -> Value {
    json!({ "n": n, "exact": format_rational(q), "value": to_f64(q) })
}

fn moment_rows(values: &[Rational]) -> (Value, Vec<Vec<String>>) {
    let json = values.iter().enumerate().map(|(n, q)| exact_entry(n, q)).collect();
    let rows =
        values.iter().enumerate().map(|(n, q)| vec![n.to_string(), format_rational(q), fmt_f64(to_f64(q))]).collect();
    (Value::Array(json), rows)
}

fn params_json(p: &ModelParams) -> Value {
    json!({ "r": p.r(), "s": p.s(), "a": format_rational(p.a()) })
}

fn model(r: u32, s: u32, a: &str) -> Result<ModelParams> {
    ModelParams::new(r, s, parse_rational(a)?)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidParams(format!("bad {what} entry '{t}'"))))
        .collect()
}

/// One factor of `convolve`, `order` moments long.
pub fn parse_factor(token: &str, order: usize) -> Result<MomentSequence> {
    let bad = || {
        Error::InvalidParams(format!("malformed factor '{token}'; use fc:<r>, raney:<alpha>:<beta> or jacobi:<r>:<s>"))
    };
    let parts: Vec<&str> = token.trim().split(':').collect();
    let uint = |t: &str| t.parse::<u32>().map_err(|_| bad());
    match parts.as_slice() {
        ["fc", r] => Ok(MomentSequence::fuss_catalan(uint(r)?, order)),
        ["raney", alpha, beta] => MomentSequence::raney(&parse_rational(alpha)?, &parse_rational(beta)?, order),
        ["jacobi", r, s] => Ok(MomentSequence::jacobi(&ModelParams::new(uint(r)?, uint(s)?, int(1))?, order)),
        _ => Err(bad()),
    }
}

pub fn cmd_moments(r: u32, s: u32, a: &str, n_max: u32) -> Result<Output> {
    let p = model(r, s, a)?;
    let seq = MomentSequence::jacobi(&p, n_max as usize + 1);
    let (results, rows) = moment_rows(&seq.values);
    let mut params = params_json(&p);
    params["n_max"] = json!(n_max);
    Ok(Output::new("moments", params, results, &["n", "exact", "value"], rows))
}

pub fn cmd_endpoints(r: u32, s: u32, a: &str) -> Result<Output> {
    let p = model(r, s, a)?;
    p.require_strict()?;
    let sd = endpoints(&p)?;
    let results = serde_json::to_value(sd).expect("support data serializes");
    let xt = sd.x_tilde.map(fmt_f64).unwrap_or_else(|| "none".into());
    let rows = vec![vec![fmt_f64(sd.w_star), fmt_f64(sd.x_star), fmt_f64(sd.w_tilde), xt]];
    Ok(Output::new("endpoints", params_json(&p), results, &["w_star", "x_star", "w_tilde", "x_tilde"], rows))
}

pub fn cmd_density(r: u32, s: u32, a: &str, points: usize) -> Result<Output> {
    let p = model(r, s, a)?;
    p.require_strict()?;
    if points < 2 {
        return Err(Error::InvalidParams("points must be >= 2".into()));
    }
    let m = SpectralModel::new(&p)?;
    let grid = m.density_grid(points)?;
    let results = json!({
        "x_star": m.support().x_star,
        "points": grid.iter().map(|d| json!({ "x": d.x, "rho": d.rho })).collect::<Vec<_>>(),
    });
    let rows = grid.iter().map(|d| vec![fmt_f64(d.x), fmt_f64(d.rho)]).collect();
    let mut params = params_json(&p);
    params["points"] = json!(points);
    Ok(Output::new("density", params, results, &["x", "rho"], rows))
}

pub fn cmd_convolve(factors: &str, order: usize) -> Result<Output> {
    if order < 1 {
        return Err(Error::InvalidParams("order must be >= 1".into()));
    }
    let seqs = factors.split(',').map(|t| parse_factor(t, order)).collect::<Result<Vec<_>>>()?;
    let product = match seqs.as_slice() {
        [] => return Err(Error::InvalidParams("at least one factor required".into())),
        [single] => single.clone(),
        _ => free_multiply_all(&seqs, order)?,
    };
    let (moments, rows) = moment_rows(&product.values);
    let results = json!({ "label": product.label, "moments": moments });
    let params = json!({ "factors": factors, "order": order });
    Ok(Output::new("convolve", params, results, &["n", "exact", "value"], rows))
}

pub struct SimulateArgs {
    pub n: usize,
    pub r: u32,
    pub s: u32,
    pub nu: Option<String>,
    pub kappa: Option<String>,
    pub trials: usize,
    pub bins: usize,
    pub k_max: usize,
    pub seed: u64,
    pub svg: Option<PathBuf>,
}

pub fn simulate_config(args: &SimulateArgs) -> Result<EnsembleConfig> {
    let mut c = EnsembleConfig::new(args.n, args.r, args.s, args.trials, args.seed);
    if let Some(nu) = &args.nu {
        c = c.with_nu(parse_list(nu, "nu")?);
    }
    if let Some(k) = &args.kappa {
        c.l_offsets = parse_list(k, "kappa")?;
    }
    c.k_max = args.k_max;
    c.validate()?;
    if c.trials < 2 {
        return Err(Error::InvalidParams(format!("trials must be >= 2, got {}", c.trials)));
    }
    Ok(c)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Output> {
    let config = simulate_config(args)?;
    if args.bins < 1 {
        return Err(Error::InvalidParams("bins must be >= 1".into()));
    }
    let spectra = simulate(&config)?;
    let report = compare(&config, &spectra)?;
    if let Some(path) = &args.svg {
        let params = ModelParams::new_strict(config.r, config.s, int(1))?;
        let model = SpectralModel::new(&params)?;
        let curve: Vec<(f64, f64)> = model.density_grid(200)?.iter().map(|d| (d.x, d.rho)).collect();
        let all: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        let title = format!(
            "J({},{},1): n = {}, trials = {}, seed = {}",
            config.r, config.s, config.n, config.trials, config.seed
        );
        write_file(path, &svg::render(&all, report.x_star, args.bins, &curve, &title))?;
    }
    let rows = report
        .empirical_moments
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                e.k.to_string(),
                fmt_f64(e.mean),
                fmt_f64(e.standard_error),
                report.theoretical_exact[i].clone(),
                fmt_f64(report.theoretical_moments[i]),
                fmt_f64(report.z_scores[i]),
                report.verdicts[i].to_string(),
            ]
        })
        .collect();
    let params = json!({
        "n": config.n, "r": config.r, "s": config.s, "nu": config.nu, "kappa": config.l_offsets,
        "trials": config.trials, "seed": config.seed, "bins": args.bins, "k_max": config.k_max,
    });
    let results = serde_json::to_value(&report).expect("report serializes");
    Ok(Output::new(
        "simulate",
        params,
        results,
        &["k", "mean", "standard_error", "exact", "theory", "z_score", "pass"],
        rows,
    ))
}

pub fn cmd_verify(suite: Suite, fault: FaultInjection) -> Output {
    let reports = verify::run_suite(suite, fault);
    let pass = reports.iter().all(|r| r.pass);
    let rows = reports
        .iter()
        .map(|r| vec![r.suite.clone(), r.checks.to_string(), r.failures.len().to_string(), r.pass.to_string()])
        .collect();
    let results = json!({ "pass": pass, "suites": reports });
    let mut out =
        Output::new("verify", json!({ "suite": suite }), results, &["suite", "checks", "failures", "pass"], rows);
    out.status = if pass { EXIT_OK } else { EXIT_NUMERICAL };
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Executes a parsed command line and returns its output.
pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Moments { r, s, a, n_max } => {
            let n_max = match (n_max, cli.order) {
                (Some(n), _) => *n,
                (None, Some(o)) => o as u32,
                (None, None) => 10,
            };
            cmd_moments(*r, *s, a, n_max)
        }
        Command::Endpoints { r, s, a } => cmd_endpoints(*r, *s, a),
        Command::Density { r, s, a, points } => cmd_density(*r, *s, a, *points),
        Command::Convolve { factors } => cmd_convolve(factors, cli.order.unwrap_or(8)),
        Command::Simulate { n, r, s, nu, kappa, trials, bins, k_max, svg } => cmd_simulate(&SimulateArgs {
            n: *n,
            r: *r,
            s: *s,
            nu: nu.clone(),
            kappa: kappa.clone(),
            trials: *trials,
            bins: *bins,
            k_max: *k_max,
            seed: cli.seed,
            svg: svg.clone(),
        }),
        Command::Verify { suite, inject_fault } => Ok(cmd_verify(*suite, FaultInjection { enabled: *inject_fault })),
    }
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let out = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = out.render(cli.format);
    let written = match &cli.out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit_code(&e);
    }
    out.status
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_csv() {
        let out = cmd_moments(2, 1, "1", 3).unwrap();
        assert_eq!(out.render(Format::Csv), "n,exact,value\n0,1,1.0\n1,1/2,0.5\n2,5/8,0.625\n3,1,1.0\n");
        let out = cmd_moments(1, 0, "1", 4).unwrap();
        let exact: Vec<&str> = out.rows.iter().map(|r| r[1].as_str()).collect();
        assert_eq!(exact, ["1", "1", "2", "5", "14"]);
        assert!(cmd_moments(2, 3, "1", 3).is_err());
    }

    #[test]
    fn convolve_tokens() {
        let out = cmd_convolve("fc:1,raney:1:1/2", 4).unwrap();
        let exact: Vec<&str> = out.rows.iter().map(|r| r[1].as_str()).collect();
        assert_eq!(exact, ["1", "1/2", "5/8", "1"]);
        let out = cmd_convolve("fc:1,fc:1", 5).unwrap();
        let exact: Vec<&str> = out.rows.iter().map(|r| r[1].as_str()).collect();
        assert_eq!(exact, ["1", "1", "3", "12", "55"]);
        let out = cmd_convolve("fc:2", 5).unwrap();
        assert_eq!(out.rows[4][1], "55");
        assert!(cmd_convolve("fc:x", 4).is_err());
        assert!(cmd_convolve("gauss:1", 4).is_err());
        // beta = 0 leaves m_0 undefined
        assert!(cmd_convolve("fc:1,raney:1:0", 4).is_err());
    }

    #[test]
    fn endpoints_and_density() {
        let out = cmd_endpoints(1, 0, "1").unwrap();
        assert_eq!(out.rows[0][1], "4.0");
        assert_eq!(out.rows[0][3], "none");
        assert!(cmd_endpoints(3, 3, "1").is_err());
        let out = cmd_density(1, 0, "1", 3).unwrap();
        let rho2: f64 = out.rows[1][1].parse().unwrap();
        assert!((rho2 - 0.15915494309189535).abs() < 1e-9);
        assert!(cmd_density(1, 0, "1", 1).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["jrsa", "moments", "--r", "2", "--s", "3", "--a", "1"]), EXIT_VALIDATION);
        assert_eq!(run(["jrsa", "bogus"]), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::Tracking("x".into())), EXIT_NUMERICAL);
    }
}
