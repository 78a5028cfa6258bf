//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input, 2 certification or golden check failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    reproduce_d_matrix, run_invariant_checks, run_scenario, OutputFormat, ScenarioConfig, Strategy,
    GOLDEN_TOL,
};
use crate::qcore::InitialStateSpec;
use crate::sequences::{
    find_theta, pandit_sequence, theta_sequence, FindThetaOptions, ProfileEntry, SequenceParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;

/// Thread count for the parallel Bob chains.
pub const THREADS_ENV: &str = "SEQWIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "seqwit",
    version,
    about = "Sequential entanglement witnessing with unsharp observers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute the 5 x 5 gap matrix of the reference scenario and compare.
    ReproduceDMatrix,
    /// Print a sharpness sequence.
    Sequence(SequenceArgs),
    /// Search and certify a theta for an m x n scenario.
    FindTheta(FindThetaArgs),
    /// Run a full scenario and emit its report.
    Simulate(SimulateArgs),
    /// Run the randomized invariant suite.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Pandit,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Bell,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatKind {
    Csv,
    Json,
}

impl From<FormatKind> for OutputFormat {
    fn from(f: FormatKind) -> Self {
        match f {
            FormatKind::Csv => OutputFormat::Csv,
            FormatKind::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyKind,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of terms.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    pub n: u64,
    /// Coupling used by the theta family.
    #[arg(long, default_value_t = 2.0)]
    pub big_l: f64,
}

#[derive(Debug, Args)]
pub struct FindThetaArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub m: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub n: u64,
    #[arg(long)]
    pub epsilon: f64,
    /// Use the mixed family; requires --alpha.
    #[arg(long, requires = "alpha")]
    pub p1: Option<f64>,
    #[arg(long, requires = "p1")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; replaces all other scenario flags.
    #[arg(long, conflicts_with_all = ["state", "m", "n", "strategy"])]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bell")]
    pub state: StateKind,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Defaults to (1 - p1) / 2; p3 takes the remainder.
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub m: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyKind>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<FormatKind>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Product states per grid point in the separability check.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..=100_000_000))]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// What a command produced: text for stdout and an exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }

    fn certified(stdout: String, certified: bool) -> Self {
        let code = if certified { EXIT_OK } else { EXIT_UNCERTIFIED };
        Self { stdout, code }
    }
}

fn missing(flag: &str, why: &str) -> Error {
    Error::InvalidConfig(format!("{flag} is required {why}"))
}

fn to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

fn mixed_spec(p1: f64, alpha: f64, p2: Option<f64>) -> InitialStateSpec {
    let p2 = p2.unwrap_or((1.0 - p1) / 2.0);
    InitialStateSpec::MixedAlpha {
        alpha,
        p1,
        p2,
        p3: 1.0 - p1 - p2,
    }
}

fn sequence(args: &SequenceArgs) -> Result<Outcome> {
    let n = to_usize(args.n);
    let profile = match args.strategy {
        StrategyKind::Pandit => {
            let lambda1 = args
                .lambda1
                .ok_or_else(|| missing("--lambda1", "for --strategy pandit"))?;
            pandit_sequence(lambda1, args.epsilon, n)?
        }
        StrategyKind::Theta => {
            let theta = args
                .theta
                .ok_or_else(|| missing("--theta", "for --strategy theta"))?;
            theta_sequence(&SequenceParams::new(args.epsilon, args.big_l, theta)?, n)?
        }
    };
    let mut out = String::from("k,value\n");
    for k in 1..=n {
        match profile.entry(k) {
            Some(ProfileEntry::Value(v)) => writeln!(out, "{k},{v:.17e}"),
            _ => writeln!(out, "{k},SATURATED"),
        }
        .expect("string write");
    }
    Ok(Outcome::ok(out))
}

fn find_theta_cmd(args: &FindThetaArgs) -> Result<Outcome> {
    let initial = match (args.p1, args.alpha) {
        (Some(p1), Some(alpha)) => mixed_spec(p1, alpha, None),
        _ => InitialStateSpec::Bell,
    };
    initial.validate()?;
    let (m, n) = (to_usize(args.m), to_usize(args.n));
    let cert = find_theta(
        m,
        n,
        args.epsilon,
        initial.coupling(),
        FindThetaOptions::default(),
    )?;
    let report = run_scenario(&ScenarioConfig {
        initial,
        m,
        n,
        strategy: Strategy::Theta {
            epsilon: args.epsilon,
            theta: Some(cert.theta),
        },
        output_format: OutputFormat::Csv,
    })?;
    let mut out = String::new();
    writeln!(out, "theta = {:e}", cert.theta).unwrap();
    writeln!(out, "halvings = {}", cert.halvings).unwrap();
    writeln!(
        out,
        "min_gap = {:e} at {:?}",
        cert.min_gap, cert.min_gap_pair
    )
    .unwrap();
    writeln!(
        out,
        "max |closed form - matrix| = {:e}",
        report.certification.max_expectation_deviation
    )
    .unwrap();
    let failing = report.failing_pairs();
    writeln!(out, "witnessed pairs = {}/{}", m * n - failing.len(), m * n).unwrap();
    writeln!(
        out,
        "certified = {}",
        report.certified() && failing.is_empty()
    )
    .unwrap();
    Ok(Outcome::certified(
        out,
        report.certified() && failing.is_empty(),
    ))
}

fn simulate_config(args: &SimulateArgs) -> Result<ScenarioConfig> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        let mut config = ScenarioConfig::from_json(&text)?;
        if let Some(f) = args.format {
            config.output_format = f.into();
        }
        return Ok(config);
    }
    let initial = match args.state {
        StateKind::Bell => InitialStateSpec::Bell,
        StateKind::Mixed => {
            let p1 = args
                .p1
                .ok_or_else(|| missing("--p1", "for --state mixed"))?;
            let alpha = args
                .alpha
                .ok_or_else(|| missing("--alpha", "for --state mixed"))?;
            mixed_spec(p1, alpha, args.p2)
        }
    };
    let m = args
        .m
        .ok_or_else(|| missing("--m", "unless --config is given"))?;
    let n = args
        .n
        .ok_or_else(|| missing("--n", "unless --config is given"))?;
    let epsilon = args
        .epsilon
        .ok_or_else(|| missing("--epsilon", "unless --config is given"))?;
    let strategy = match args.strategy.unwrap_or(StrategyKind::Pandit) {
        StrategyKind::Pandit => Strategy::Pandit {
            lambda1: args
                .lambda1
                .ok_or_else(|| missing("--lambda1", "for --strategy pandit"))?,
            epsilon,
        },
        StrategyKind::Theta => Strategy::Theta {
            epsilon,
            theta: args.theta,
        },
    };
    let config = ScenarioConfig {
        initial,
        m: to_usize(m),
        n: to_usize(n),
        strategy,
        output_format: args.format.map(Into::into).unwrap_or_default(),
    };
    config.validate()?;
    Ok(config)
}

fn simulate(args: &SimulateArgs) -> Result<Outcome> {
    let config = simulate_config(args)?;
    let report = run_scenario(&config)?;
    let text = report.render(config.output_format);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| {
                Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
            })?;
            Ok(Outcome::certified(String::new(), report.certified()))
        }
        None => Ok(Outcome::certified(text, report.certified())),
    }
}

fn reproduce() -> Outcome {
    let g = reproduce_d_matrix();
    let mut out = String::from("100 D:\n");
    for row in &g.scaled_gaps {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>9.4}")).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    let mut failing = g.report.failing_pairs();
    failing.sort_unstable();
    writeln!(out, "failing pairs: {failing:?}").unwrap();
    writeln!(
        out,
        "max deviation {:.3e} (tolerance {GOLDEN_TOL:e}): {}",
        g.max_deviation,
        if g.passed { "PASS" } else { "FAIL" }
    )
    .unwrap();
    Outcome::certified(out, g.passed)
}

fn check(args: &CheckArgs) -> Result<Outcome> {
    let outcomes = run_invariant_checks(to_usize(args.samples), args.seed)?;
    let mut out = String::new();
    let mut all = true;
    for o in &outcomes {
        all &= o.passed;
        let mark = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{mark} {}: {}", o.name, o.detail).unwrap();
    }
    Ok(Outcome::certified(out, all))
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::ReproduceDMatrix => Ok(reproduce()),
        Command::Sequence(a) => sequence(a),
        Command::FindTheta(a) => find_theta_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        Error::InvalidConfig(format!(
            "{THREADS_ENV} must be a positive integer, got {value:?}"
        ))
    })?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parses `argv`, runs the command and writes to the given streams.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                return EXIT_INVALID;
            }
            let _ = write!(stdout, "{rendered}");
            return EXIT_OK;
        }
    };
    let result = configure_threads().and_then(|()| execute(&cli));
    match result {
        Ok(outcome) => {
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
