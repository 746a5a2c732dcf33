//! `smallball` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 valid request outside
//! the method's regime. Data goes to `--out` (default stdout) only when the
//! whole command succeeds; diagnostics go to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::comparison::compare;
use crate::error::{usage, Error, Result};
use crate::exactdist::{cdf_inversion, cdf_monte_carlo};
use crate::saddle::{log_small_ball_row, small_ball_estimate};
use crate::slowvary::{rc_alpha_log_asymp, RcAlphaParams};
use crate::spectra::{Spectrum, SpectrumSpec};
use crate::table::{fmt_f64, write_csv, write_json, CsvRow};

#[derive(Debug, Parser)]
#[command(name = "smallball", version, about = "L2 small-ball probabilities from covariance spectra")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Inversion,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Thresholds {
    /// Threshold r on the squared norm.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Comma-separated thresholds.
    #[arg(long = "r-grid", value_delimiter = ',', allow_negative_numbers = true)]
    pub r_grid: Vec<f64>,
    /// Radius ε; sets r = ε².
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eps: Vec<f64>,
}

impl Thresholds {
    fn values(&self) -> Result<Vec<f64>> {
        let mut rs: Vec<f64> = self.r.into_iter().chain(self.r_grid.iter().copied()).collect();
        for e in &self.eps {
            if !(*e > 0.0) {
                return Err(Error::Domain(format!("ε must be positive, got {e}")));
            }
            rs.push(e * e);
        }
        if rs.is_empty() {
            return Err(usage("give a threshold with --r, --r-grid or --eps"));
        }
        Ok(rs)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact P{Q ≤ r} by Laplace inversion or Monte Carlo.
    Eval {
        /// Spectrum JSON file, or inline JSON starting with `{`.
        #[arg(long)]
        spectrum: String,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long, value_enum, default_value = "inversion")]
        method: Method,
        /// Absolute tolerance of the inversion.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Saddle-point estimate of P{Q ≤ r}.
    Asymp {
        #[arg(long)]
        spectrum: String,
        #[command(flatten)]
        thresholds: Thresholds,
        #[command(flatten)]
        output: Output,
    },
    /// Saddle-point estimate of ln P{Q ≤ r}.
    Logasymp {
        #[arg(long)]
        spectrum: String,
        #[command(flatten)]
        thresholds: Thresholds,
        #[command(flatten)]
        output: Output,
    },
    /// Eigenvalues of a spectrum or kernel spec.
    Spectrum {
        #[arg(long)]
        spectrum: String,
        /// Eigenvalues listed for spectra with a tail model.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Exact and log-level comparison of two spectra.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long = "r-grid", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        r_grid: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form ln P for the exp(−C|ξ|^α) family over an ε grid.
    Rcalpha {
        #[arg(long = "C", allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        eps: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
}

/// One `rcalpha` table row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RcAlphaRow {
    pub alpha: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub epsilon: f64,
    pub log_asymp: f64,
    pub case: &'static str,
}

impl CsvRow for RcAlphaRow {
    fn header() -> &'static [&'static str] {
        &["alpha", "C", "epsilon", "log_asymp", "case"]
    }
    fn record(&self) -> Vec<String> {
        vec![
            fmt_f64(self.alpha),
            fmt_f64(self.c),
            fmt_f64(self.epsilon),
            fmt_f64(self.log_asymp),
            self.case.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EigenRow {
    n: usize,
    lambda: f64,
}

impl CsvRow for EigenRow {
    fn header() -> &'static [&'static str] {
        &["n", "lambda"]
    }
    fn record(&self) -> Vec<String> {
        vec![self.n.to_string(), fmt_f64(self.lambda)]
    }
}

fn load_spec(arg: &str) -> Result<SpectrumSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| usage(format!("cannot read spectrum file `{arg}`: {e}")))?
    };
    SpectrumSpec::from_json(&text)
}

fn load(arg: &str) -> Result<Spectrum> {
    load_spec(arg)?.to_spectrum()
}

fn render<R: CsvRow + Serialize>(format: Format, comments: &[String], rows: &[R]) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, comments, rows),
        Format::Json => write_json(&mut buf, &rows),
    }
    .expect("writing to memory cannot fail");
    buf
}

fn execute(command: &Command) -> Result<(Vec<u8>, Option<&PathBuf>)> {
    match command {
        Command::Eval { spectrum, thresholds, method, tol, samples, seed, output } => {
            let s = load(spectrum)?;
            let rows = thresholds
                .values()?
                .into_iter()
                .map(|r| match method {
                    Method::Inversion => cdf_inversion(&s, r, *tol),
                    Method::MonteCarlo => cdf_monte_carlo(&s, r, *samples, *seed),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((render(output.format, &[], &rows), output.out.as_ref()))
        }
        Command::Asymp { spectrum, thresholds, output } => {
            let s = load(spectrum)?;
            let rows = thresholds.values()?.into_iter().map(|r| small_ball_estimate(&s, r)).collect::<Result<Vec<_>>>()?;
            Ok((render(output.format, &[], &rows), output.out.as_ref()))
        }
        Command::Logasymp { spectrum, thresholds, output } => {
            let s = load(spectrum)?;
            let rows = thresholds.values()?.into_iter().map(|r| log_small_ball_row(&s, r)).collect::<Result<Vec<_>>>()?;
            Ok((render(output.format, &[], &rows), output.out.as_ref()))
        }
        Command::Spectrum { spectrum, count, output } => {
            let s = load(spectrum)?;
            let bytes = match output.format {
                Format::Json => {
                    let mut text = SpectrumSpec::from_spectrum(&s).to_json();
                    text.push('\n');
                    text.into_bytes()
                }
                Format::Csv => {
                    let n = s.len().unwrap_or(*count);
                    let rows: Vec<EigenRow> =
                        (1..=n).map(|k| EigenRow { n: k, lambda: s.eigenvalue(k as u64) }).collect();
                    render(Format::Csv, &[], &rows)
                }
            };
            Ok((bytes, output.out.as_ref()))
        }
        Command::Compare { a, b, r_grid, output } => {
            let (sa, sb) = (load(a)?, load(b)?);
            let report = compare(&sa, &sb, r_grid)?;
            let bytes = match output.format {
                Format::Csv => {
                    let mut comments = vec![report.product.header_line()];
                    if report.growth_warning {
                        comments.push("warning: growth check on a's counting function failed".into());
                    }
                    render(Format::Csv, &comments, &report.rows)
                }
                Format::Json => {
                    let mut buf = Vec::new();
                    write_json(&mut buf, &report).expect("writing to memory cannot fail");
                    buf
                }
            };
            Ok((bytes, output.out.as_ref()))
        }
        Command::Rcalpha { c, alpha, eps, output } => {
            let params = RcAlphaParams::new(*c, *alpha)?;
            let rows = eps
                .iter()
                .map(|&e| {
                    Ok(RcAlphaRow {
                        alpha: *alpha,
                        c: *c,
                        epsilon: e,
                        log_asymp: rc_alpha_log_asymp(params, e)?,
                        case: params.case().label(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((render(output.format, &[], &rows), output.out.as_ref()))
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_regime() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((bytes, Some(path))) => match fs::write(path, &bytes) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write `{}`: {e}", path.display());
                1
            }
        },
        Ok((bytes, None)) => match stdout.write_all(&bytes) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
