//! Command-line front end. Exit codes: 0 pass, 1 mathematical failure,
//! 2 input error.

pub mod config_file;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::json;

use crate::bochner::{sample_points, verify_bochner, Scheme, DEFAULT_KERNEL_TOL, DEFAULT_POINT_COUNT, DEFAULT_RADIUS};
use crate::channel::{admissibility, compose};
use crate::char_fn::QuantumCF;
use crate::error::Error;
use crate::fock_oracle::{run_suite, OracleReport};
use crate::linalg::to_row_major;
use crate::phase_space::{symmetric_psd_check, PhaseVector, SymplecticForm, DEFAULT_PSD_TOL};
use crate::semigroup::{check_generator, evolve_qcf, propagate_a, propagate_m};
use config_file::{read_json, BochnerTarget, ChannelConfig, GeneratorConfig, OracleSuiteConfig, StateConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_CUTOFFS: [usize; 3] = [20, 30, 40];

#[derive(Debug, Parser)]
#[command(
    name = "twisted-conv",
    version,
    about = "Twisted convolution channels on bosonic phase space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissibility of a channel config: spectrum of M + i(J - AᵀJA).
    CheckChannel(CheckArgs),
    /// Admissibility of a generator config: spectrum of N + i(AᵀJ + JA).
    CheckGenerator(CheckArgs),
    /// Compose channel configs; the first --config is applied first.
    Compose(ComposeArgs),
    /// Gaussian-state trajectory under a generator, as CSV.
    Evolve(EvolveArgs),
    /// Sampled twisted-kernel positivity of a state or channel output.
    Bochner(BochnerArgs),
    /// Truncated Fock-space identity suite.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long, required = true)]
    pub config: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Generator config.
    #[arg(long)]
    pub config: PathBuf,
    /// Initial Gaussian state config (vacuum when omitted).
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub times: Vec<f64>,
    /// Phase-space point `x1,y1,...` at which to sample the evolved qcf; repeatable.
    #[arg(long = "xi", allow_negative_numbers = true)]
    pub samples: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    RandomGaussian,
    Lattice,
}

#[derive(Debug, Args)]
pub struct BochnerArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = DEFAULT_POINT_COUNT)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::RandomGaussian)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = DEFAULT_KERNEL_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Suite config `{"cutoffs": [...], "identities": [...]}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub cutoff: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A command outcome that did not reach a verdict.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotPsd { .. } | Error::QuadratureFailed { .. } | Error::StepTooSmall { .. } => EXIT_FAIL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn emit(stdout: &mut dyn Write, out: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    writeln!(stdout, "{text}")?;
    if let Some(path) = out {
        write_file(path, &format!("{text}\n"))?;
    }
    Ok(())
}

/// Runs one command and returns its exit code; diagnostics go to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match &cli.command {
        Command::CheckChannel(args) => check_channel(args, stdout),
        Command::CheckGenerator(args) => check_generator_cmd(args, stdout),
        Command::Compose(args) => compose_cmd(args, stdout),
        Command::Evolve(args) => evolve_cmd(args, stdout),
        Command::Bochner(args) => bochner_cmd(args, stdout),
        Command::Oracle(args) => oracle_cmd(args, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn check_channel(args: &CheckArgs, stdout: &mut dyn Write) -> Outcome {
    let config: ChannelConfig = read_json(&args.config)?;
    let parts = config.parts()?;
    let form = SymplecticForm::new(parts.dim / 2)?;
    let noise = symmetric_psd_check(&parts.m, args.tol)?;
    let report = admissibility(&parts.m, &parts.a, &form, args.tol)?;
    let pass = noise.is_psd && report.is_psd;
    let text = serde_json::to_string_pretty(&json!({
        "admissible": pass,
        "noise_psd": noise.is_psd,
        "noise_min_eigenvalue": noise.min_eigenvalue,
        "min_eigenvalue": report.min_eigenvalue,
        "eigenvalues": report.eigenvalues,
        "tolerance": report.tolerance,
    }))
    .map_err(Error::from)?;
    emit(stdout, args.out.as_deref(), &text)?;
    Ok(verdict(pass))
}

fn check_generator_cmd(args: &CheckArgs, stdout: &mut dyn Write) -> Outcome {
    let config: GeneratorConfig = read_json(&args.config)?;
    let (dim, a, noise) = config.matrices()?;
    config.gamma.build(dim)?;
    let form = SymplecticForm::new(dim / 2)?;
    let noise_report = symmetric_psd_check(&noise, args.tol)?;
    let report = check_generator(&a, &noise, &form, args.tol)?;
    let pass = noise_report.is_psd && report.is_psd;
    let text = serde_json::to_string_pretty(&json!({
        "admissible": pass,
        "noise_psd": noise_report.is_psd,
        "noise_min_eigenvalue": noise_report.min_eigenvalue,
        "min_eigenvalue": report.min_eigenvalue,
        "eigenvalues": report.eigenvalues,
        "tolerance": report.tolerance,
    }))
    .map_err(Error::from)?;
    emit(stdout, args.out.as_deref(), &text)?;
    Ok(verdict(pass))
}

fn compose_cmd(args: &ComposeArgs, stdout: &mut dyn Write) -> Outcome {
    let mut channels = Vec::with_capacity(args.config.len());
    for path in &args.config {
        let config: ChannelConfig = read_json(path)?;
        channels.push(config.build(args.tol)?);
    }
    let mut iter = channels.into_iter();
    let mut total = iter
        .next()
        .ok_or_else(|| input_error("compose needs at least one --config"))?;
    for next in iter {
        total = compose(&next, &total)?;
    }
    let form = total.form().clone();
    let report = admissibility(total.m(), total.a(), &form, args.tol)?;
    let config = ChannelConfig::from_channel(&total)?;
    let text = serde_json::to_string_pretty(&config).map_err(Error::from)?;
    emit(stdout, args.out.as_deref(), &text)?;
    Ok(verdict(report.is_psd))
}

fn parse_point(text: &str, dim: usize) -> std::result::Result<PhaseVector, Failure> {
    let coords = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| input_error(format!("bad --xi {text:?}: {e}")))?;
    if coords.len() != dim {
        return Err(input_error(format!("--xi {text:?} needs {dim} coordinates")));
    }
    Ok(PhaseVector::new(coords)?)
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn evolve_cmd(args: &EvolveArgs, stdout: &mut dyn Write) -> Outcome {
    if args.times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(input_error("times must be finite and non-negative"));
    }
    if args.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(input_error("times must be strictly increasing"));
    }
    let config: GeneratorConfig = read_json(&args.config)?;
    let gen = config.build(args.tol)?;
    let dim = gen.dim();
    let f0 = match &args.state {
        Some(path) => read_json::<StateConfig>(path)?.build()?,
        None => QuantumCF::vacuum(gen.modes())?,
    };
    if f0.dim() != dim {
        return Err(input_error(format!(
            "state has dimension {}, generator {dim}",
            f0.dim()
        )));
    }
    let QuantumCF::GaussianState { mean, covariance } = &f0 else {
        unreachable!("state configs are Gaussian")
    };
    let samples = args
        .samples
        .iter()
        .map(|s| parse_point(s, dim))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("lambda_{i}")));
    for i in 1..=dim {
        header.extend((1..=dim).map(|j| format!("K_{i}{j}")));
    }
    for k in 1..=samples.len() {
        header.push(format!("re_f_{k}"));
        header.push(format!("im_f_{k}"));
    }
    let mut csv = header.join(",");
    csv.push('\n');
    for &t in &args.times {
        let a_t = propagate_a(&gen, t)?;
        let m_t = propagate_m(&gen, t)?;
        let lambda: DVector<f64> = a_t.transpose() * mean;
        let k = a_t.transpose() * covariance * &a_t + &m_t * 0.5;
        let k = (&k + k.transpose()) * 0.5;
        let mut row = vec![num(t)];
        row.extend(lambda.iter().map(|&x| num(x)));
        row.extend(to_row_major(&k).into_iter().map(num));
        for xi in &samples {
            let f = evolve_qcf(&gen, &f0, t, xi)?;
            row.push(num(f.re));
            row.push(num(f.im));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => write!(stdout, "{csv}")?,
    }
    Ok(EXIT_PASS)
}

fn bochner_cmd(args: &BochnerArgs, stdout: &mut dyn Write) -> Outcome {
    let target: BochnerTarget = read_json(&args.config)?;
    let f = match target {
        BochnerTarget::State(state) => state.build()?,
        BochnerTarget::ChannelOutput { state, channel } => channel.build(DEFAULT_PSD_TOL)?.apply(&state.build()?)?,
    };
    let scheme = match args.scheme {
        SchemeArg::RandomGaussian => Scheme::RandomGaussian,
        SchemeArg::Lattice => Scheme::Lattice,
    };
    let points = sample_points(f.modes(), args.points, args.radius, args.seed, scheme)?;
    let form = SymplecticForm::new(f.modes())?;
    let report = verify_bochner(&f, &points, &form, args.tol)?;
    let text = serde_json::to_string_pretty(&json!({
        "report": report,
        "seed": args.seed,
        "scheme": scheme,
        "radius": args.radius,
    }))
    .map_err(Error::from)?;
    emit(stdout, args.out.as_deref(), &text)?;
    Ok(verdict(report.is_positive))
}

fn oracle_table(rows: &[OracleReport]) -> String {
    let mut text = format!(
        "{:<20} {:>6} {:>12} {:>10} {:>5}\n",
        "identity", "cutoff", "residual", "threshold", "pass"
    );
    for r in rows {
        text.push_str(&format!(
            "{:<20} {:>6} {:>12.3e} {:>10.1e} {:>5}\n",
            r.identity,
            r.cutoff,
            r.max_residual,
            r.threshold,
            if r.pass { "yes" } else { "no" }
        ));
    }
    text
}

fn oracle_cmd(args: &OracleArgs, stdout: &mut dyn Write) -> Outcome {
    let suite = match &args.config {
        Some(path) => read_json::<OracleSuiteConfig>(path)?,
        None => OracleSuiteConfig {
            cutoffs: if args.cutoff.is_empty() {
                DEFAULT_CUTOFFS.to_vec()
            } else {
                args.cutoff.clone()
            },
            identities: None,
        },
    };
    let rows = run_suite(&suite.cutoffs, suite.identities.as_deref())?;
    write!(stdout, "{}", oracle_table(&rows))?;
    if let Some(path) = &args.out {
        write_file(path, &serde_json::to_string_pretty(&rows).map_err(Error::from)?)?;
    }
    Ok(verdict(rows.iter().all(|r| r.pass)))
}
