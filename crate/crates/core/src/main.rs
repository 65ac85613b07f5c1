//! Command-line front end. Exit codes: 0 success, 1 computation/numeric
//! failure, 2 usage error (bad flags, missing files).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corrthresh::error::Error;
use corrthresh::faithfulness::{
    self, cap_autocorrelation, delsarte_code_bound, interval_limit_bound, one_point_construction,
    solve_set, two_point_faithfulness, IntervalLimitBound, ThresholdSet,
};
use corrthresh::gegenbauer::{GegenbauerSeries, SphereContext};
use corrthresh::io::{read_matrix_csv, write_matrix_csv, write_report, CoefficientFile};
use corrthresh::linalg::{certify_correlation, random_gram};
use corrthresh::thresholding::{
    apply_entrywise, apply_entrywise_unchecked, hard_threshold, shrinkage_repair,
};

#[derive(Parser)]
#[command(name = "corrthresh", version, about = "Positive definite thresholding of correlation matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the normalized Gegenbauer polynomial G_k(t) on S^{n-1}
    Gegenbauer {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
    },
    /// Maximize the linear coefficient over functions vanishing on K
    Faithfulness {
        #[arg(long)]
        n: u32,
        /// Comma-separated threshold points, e.g. "0.1,-0.1"
        #[arg(long, conflicts_with = "interval")]
        points: Option<String>,
        /// Symmetric or general interval LO:HI, e.g. "-0.05:0.05"
        #[arg(long)]
        interval: Option<String>,
        #[arg(long)]
        degree: Option<u32>,
        /// Write the optimizer as a coefficient JSON file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form bounds from the one-point, two-point and interval theorems
    #[command(subcommand)]
    ClosedForm(ClosedForm),
    /// Cap autocorrelation kernel supported on [cos 2r, 1]
    CapKernel {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 400)]
        degree: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Delsarte upper bound f(1)/a_0 on spherical codes of minimum angle theta
    DelsarteBound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        degree: u32,
    },
    /// Apply a positive definite thresholding series entrywise to a matrix
    Threshold {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, conflicts_with = "points")]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classical hard thresholding; generally breaks PSD
    HardThreshold {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        output: PathBuf,
        /// Shrink toward the identity until PSD
        #[arg(long)]
        repair: bool,
    },
    /// Margins of the second-order difference inequality for a series
    CheckStructural {
        #[arg(long)]
        coeffs: PathBuf,
    },
    /// Sample a function curve as CSV rows (t, f(t))
    PlotData {
        #[arg(long)]
        coeffs: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t_max: f64,
    },
    /// Deterministic random rank-<=n correlation matrix (Gram of unit vectors)
    RandomGram {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ClosedForm {
    OnePoint(EpsArgs),
    TwoPoint {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        kcap: Option<u32>,
    },
    IntervalBound {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Args)]
struct EpsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    eps: f64,
}

/// Usage-level failures (exit 2) as opposed to numeric ones (exit 1).
struct UsageError(String);

enum CliError {
    Usage(String),
    Computation(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Computation(e)
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

fn require_file(path: &Path) -> Result<(), UsageError> {
    if !path.is_file() {
        return Err(UsageError(format!("input file not found: {}", path.display())));
    }
    Ok(())
}

fn parse_points(spec: &str) -> Result<Vec<f64>, UsageError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| UsageError(format!("bad point '{s}': {e}")))
        })
        .collect()
}

fn parse_interval(spec: &str) -> Result<(f64, f64), UsageError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(UsageError(format!("interval must be LO:HI, got '{spec}'")));
    }
    let lo = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|e| UsageError(format!("bad interval bound '{}': {e}", parts[0])))?;
    let hi = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|e| UsageError(format!("bad interval bound '{}': {e}", parts[1])))?;
    Ok((lo, hi))
}

fn json_line(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
}

fn load_series(path: &Path) -> Result<(GegenbauerSeries, CoefficientFile), CliError> {
    require_file(path)?;
    let file = CoefficientFile::read(path)?;
    let series = file.to_series()?;
    Ok((series, file))
}

fn faithfulness_json(r: &faithfulness::FaithfulnessResult) -> serde_json::Value {
    serde_json::json!({
        "n": r.optimizer.context().n(),
        "tau": r.tau,
        "degree_used": r.degree_used,
        "residual_sup": r.residual_sup,
        "recovery_norm": r.recovery_norm,
        "solver_status": r.solver_status,
        "iterations": r.iterations,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gegenbauer { n, k, t } => {
            let v = SphereContext::new(n)?.eval_gegenbauer(k, t)?;
            println!("{v:.17e}");
        }
        Command::Faithfulness { n, points, interval, degree, out } => {
            let ctx = SphereContext::new(n)?;
            let set = match (points, interval) {
                (Some(p), None) => ThresholdSet::finite(parse_points(&p)?)?,
                (None, Some(iv)) => {
                    let (lo, hi) = parse_interval(&iv)?;
                    ThresholdSet::interval(lo, hi)?
                }
                _ => {
                    return Err(UsageError(
                        "exactly one of --points or --interval is required".into(),
                    )
                    .into())
                }
            };
            let result = solve_set(ctx, &set, degree)?;
            json_line(faithfulness_json(&result));
            if let Some(path) = out {
                CoefficientFile::from_series(&result.optimizer, Some(set), Some(result.tau))
                    .write(&path)?;
            }
        }
        Command::ClosedForm(cf) => match cf {
            ClosedForm::OnePoint(a) => {
                let r = one_point_construction(SphereContext::new(a.n)?, a.eps)?;
                json_line(serde_json::json!({
                    "n": a.n, "eps": a.eps, "tau": r.tau,
                    "coeffs": r.optimizer.coeffs(),
                    "recovery_norm": r.recovery_norm,
                }));
            }
            ClosedForm::TwoPoint { n, eps, kcap } => {
                let r = two_point_faithfulness(SphereContext::new(n)?, eps, kcap)?;
                json_line(serde_json::json!({
                    "n": n, "eps": eps, "tau": r.tau,
                    "degree_used": r.degree_used,
                    "solver_status": r.solver_status,
                }));
            }
            ClosedForm::IntervalBound { n } => {
                match interval_limit_bound(SphereContext::new(n)?)? {
                    IntervalLimitBound::Trivial => {
                        json_line(serde_json::json!({
                            "n": n, "trivial": true, "bound": 1.0,
                            "note": "the derivative supremum is infinite for n <= 3",
                        }));
                    }
                    IntervalLimitBound::Bound { value, sigma, attained_at } => {
                        json_line(serde_json::json!({
                            "n": n, "trivial": false, "bound": value,
                            "sigma": sigma, "attained_at": attained_at,
                        }));
                    }
                }
            }
        },
        Command::CapKernel { n, radius, degree, out } => {
            let ctx = SphereContext::new(n)?;
            let kernel = cap_autocorrelation(ctx, radius, degree, 2 * degree as usize)?;
            json_line(serde_json::json!({
                "n": n, "radius": radius,
                "support_edge": kernel.support_edge,
                "degree": degree,
                "min_coeff": kernel.series.min_coeff(),
                "value_at_one": kernel.series.eval(1.0)?,
            }));
            if let Some(path) = out {
                CoefficientFile::from_series(&kernel.series, None, None).write(&path)?;
            }
        }
        Command::DelsarteBound { n, theta, degree } => {
            let bound = delsarte_code_bound(SphereContext::new(n)?, theta, degree)?;
            println!("{bound:.17e}");
        }
        Command::Threshold { n, input, coeffs, points, output, report } => {
            require_file(&input)?;
            let matrix = read_matrix_csv(&input)?;
            // slightly indefinite inputs (estimation noise) pass with a warning
            let cert = match certify_correlation(&matrix, 1e-6) {
                Ok(c) => {
                    if c.min_eig() < -1e-12 {
                        eprintln!(
                            "warning: input minimum eigenvalue {:.3e} treated as noise",
                            c.min_eig()
                        );
                    }
                    c
                }
                Err(e) => return Err(e.into()),
            };
            let series = match (coeffs, points) {
                (Some(path), None) => {
                    let (series, _) = load_series(&path)?;
                    if let Some(n) = n {
                        if n != series.context().n() {
                            return Err(UsageError(format!(
                                "--n {n} conflicts with coefficient file (n = {})",
                                series.context().n()
                            ))
                            .into());
                        }
                    }
                    series
                }
                (None, Some(p)) => {
                    let n = n.ok_or_else(|| UsageError("--n is required with --points".into()))?;
                    let set = ThresholdSet::finite(parse_points(&p)?)?;
                    solve_set(SphereContext::new(n)?, &set, None)?.optimizer
                }
                _ => {
                    return Err(UsageError(
                        "exactly one of --coeffs or --points is required".into(),
                    )
                    .into())
                }
            };
            let rank_ok = cert.numeric_rank() <= series.context().n() as usize;
            let (out_matrix, rep) = if rank_ok {
                let (c, r) = apply_entrywise(&series, &cert)?;
                (c.base().clone(), r)
            } else {
                eprintln!(
                    "warning: input rank {} exceeds n = {}; PSD guarantee lapses",
                    cert.numeric_rank(),
                    series.context().n()
                );
                apply_entrywise_unchecked(&series, &cert)?
            };
            write_matrix_csv(&out_matrix, &output)?;
            if let Some(path) = report {
                write_report(&rep, &path)?;
            }
        }
        Command::HardThreshold { input, eps, output, repair } => {
            require_file(&input)?;
            let matrix = read_matrix_csv(&input)?;
            let cert = certify_correlation(&matrix, 1e-6)?;
            let (thresholded, rep) = hard_threshold(&cert, eps)?;
            if repair {
                let (lambda, repaired) = shrinkage_repair(&thresholded)?;
                write_matrix_csv(repaired.base(), &output)?;
                json_line(serde_json::json!({
                    "min_eig_before_repair": rep.min_eig_after,
                    "lambda": lambda,
                    "min_eig_after_repair": repaired.min_eig(),
                    "entries_zeroed": rep.entries_zeroed,
                }));
            } else {
                write_matrix_csv(&thresholded, &output)?;
                json_line(serde_json::to_value(&rep).unwrap());
            }
        }
        Command::CheckStructural { coeffs } => {
            let (series, _) = load_series(&coeffs)?;
            let report = faithfulness::structural_check(&series)?;
            json_line(serde_json::json!({
                "min_margin": report.min_margin(),
                "violations": report.violations(1e-8),
                "margins_checked": report.margins.len(),
            }));
        }
        Command::PlotData { coeffs, n, points, samples, out, t_min, t_max } => {
            if samples < 2 {
                return Err(UsageError("need --samples >= 2".into()).into());
            }
            let series = match (coeffs, points) {
                (Some(path), None) => load_series(&path)?.0,
                (None, Some(p)) => {
                    let n = n.ok_or_else(|| UsageError("--n is required with --points".into()))?;
                    let set = ThresholdSet::finite(parse_points(&p)?)?;
                    solve_set(SphereContext::new(n)?, &set, None)?.optimizer
                }
                _ => {
                    return Err(UsageError(
                        "exactly one of --coeffs or --n/--points is required".into(),
                    )
                    .into())
                }
            };
            let mut rows = String::new();
            for i in 0..samples {
                let t = t_min + (t_max - t_min) * i as f64 / (samples - 1) as f64;
                rows.push_str(&format!("{t:.16e},{:.16e}\n", series.eval(t)?));
            }
            std::fs::write(&out, rows).map_err(Error::from)?;
        }
        Command::RandomGram { n, points, seed, out } => {
            let gram = random_gram(SphereContext::new(n)?, points, seed)?;
            write_matrix_csv(gram.base(), &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Computation(e)) => {
            let code = match e {
                Error::InvalidArgument(_) => 2,
                _ => 1,
            };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
