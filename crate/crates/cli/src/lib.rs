//! Command-line front end.
//!
//! Exit codes: 0 success, 1 algorithmic failure, 2 invalid configuration,
//! 3 resource budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pqc_core::grover::{rpa_marked, AVOGADRO};
use pqc_core::shor::{argument_qubits_for, n1_validity_check, ShorReadout};
use pqc_core::{
    measure_expected, measure_sampled, rpa_majority_vote, rpa_marked_frequency,
    rpa_one_iteration_distribution, rpa_success_rate, run_pqc_grover_with, run_pqc_shor,
    sweep_tradeoff, CoupledRegister, CouplingConfig64, Ensemble64, ExecPolicy, GroverOptions,
    PqcError, RegisterLayout, ResourceBudget, ShorParams, Spectrum64,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Grover runs count as successful above this probability.
pub const SUCCESS_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Budget(_) => EXIT_BUDGET,
            Self::Invalid(_) | Self::Io { .. } => EXIT_INVALID,
        }
    }
}

impl From<PqcError> for CliError {
    fn from(e: PqcError) -> Self {
        match e {
            PqcError::Budget { .. } => Self::Budget(e.to_string()),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Invalid(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "pqc",
    version,
    about = "Parallel quantum computing on a simulated ensemble"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for one marked item.
    Grover(GroverArgs),
    /// Order finding and factoring.
    Shor(ShorArgs),
    /// Query count against constituent count for every split of n qubits.
    Sweep(SweepArgs),
    /// Repetition baseline: k single-iteration computers and a majority vote.
    Rpa(RpaArgs),
    /// Render a saved ensemble through the spectrometer.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Expected,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Register {
    Argument,
    N2,
    FunctionAndArgument,
}

impl From<Register> for CoupledRegister {
    fn from(r: Register) -> Self {
        match r {
            Register::Argument => CoupledRegister::Argument,
            Register::N2 => CoupledRegister::N2Only,
            Register::FunctionAndArgument => CoupledRegister::FunctionAndArgument,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, env = "PQC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Report file (JSON, or CSV for `sweep`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SaveArgs {
    /// Final ensemble as JSON, readable by `spectrum --input`.
    #[arg(long)]
    pub ensemble_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Physical molecules in the ensemble.
    #[arg(long, default_value_t = AVOGADRO)]
    pub budget_molecules: f64,
    /// Molecules per logical molecule.
    #[arg(long, default_value_t = 1.0)]
    pub molecules_per_logical: f64,
}

impl BudgetArgs {
    fn budget(&self) -> CliResult<ResourceBudget> {
        Ok(ResourceBudget::new(
            self.budget_molecules,
            self.molecules_per_logical,
        )?)
    }
}

#[derive(Debug, Args)]
pub struct GroverArgs {
    #[arg(long)]
    pub n1: u32,
    #[arg(long)]
    pub n2: u32,
    #[arg(long)]
    pub marked: u64,
    #[arg(long, value_enum, default_value_t = Mode::Expected)]
    pub mode: Mode,
    /// Molecules per constituent in sampled mode.
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Coupling table, JSON `{"omega0": .., "J": [..]}`.
    #[arg(long)]
    pub couplings: Option<PathBuf>,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub save: SaveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ShorArgs {
    #[arg(long)]
    pub nb: u64,
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub n1: Option<u32>,
    #[arg(long)]
    pub n2: Option<u32>,
    #[arg(long, value_enum, default_value_t = Mode::Expected)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub save: SaveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u32,
    /// Product column from the realized query count `J + 1`.
    #[arg(long)]
    pub realized: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RpaArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1000)]
    pub k: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Ensemble JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Register::Argument)]
    pub register: Register,
    #[arg(long, value_enum, default_value_t = Mode::Expected)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    #[arg(long)]
    pub couplings: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Coupling file contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingFile {
    pub omega0: f64,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
}

/// Largest `n` accepted by `rpa`; the vote tallies one counter per state.
const MAX_RPA_QUBITS: u32 = 20;

/// Parses `args` (program name first) and runs the command. Never panics on
/// bad input; returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Grover(a) => cmd_grover(a, out),
        Command::Shor(a) => cmd_shor(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Rpa(a) => cmd_rpa(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn policy(common: &CommonArgs) -> CliResult<ExecPolicy> {
    if common.workers == 0 {
        return Err(CliError::Invalid("--workers must be >= 1".into()));
    }
    Ok(ExecPolicy {
        workers: common.workers,
        seed: common.seed,
        ..ExecPolicy::default()
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_json_report(path: Option<&Path>, json: &str) -> CliResult<()> {
    match path {
        Some(p) => write_text(p, &format!("{json}\n")),
        None => Ok(()),
    }
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

fn load_couplings(
    path: Option<&Path>,
    register: CoupledRegister,
    layout: &RegisterLayout,
) -> CliResult<CouplingConfig64> {
    let config = match path {
        None => CouplingConfig64::default_for(register.width(layout), register),
        Some(p) => {
            let file: CouplingFile = serde_json::from_str(&read_text(p)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
            CouplingConfig64::new(file.omega0, file.j, register)?
        }
    };
    config.check_layout(layout)?;
    Ok(config)
}

fn render(
    ensemble: &Ensemble64,
    config: &CouplingConfig64,
    mode: Mode,
    samples: u64,
    seed: u64,
) -> CliResult<Spectrum64> {
    Ok(match mode {
        Mode::Expected => measure_expected(ensemble, config)?,
        Mode::Sampled => measure_sampled(ensemble, config, samples, seed)?,
    })
}

pub fn cmd_grover(args: &GroverArgs, out: &mut dyn Write) -> CliResult<i32> {
    let budget = args.budget.budget()?;
    budget.check(args.n1)?;
    let layout = RegisterLayout::new(args.n1, args.n2, 0)?;
    let policy = policy(&args.common)?;
    let config = load_couplings(
        args.couplings.as_deref(),
        CoupledRegister::Argument,
        &layout,
    )?;
    let options = GroverOptions {
        budget: Some(budget),
        iterations: None,
        couplings: Some(config.clone()),
        policy,
    };
    let (ensemble, mut report) = run_pqc_grover_with(&layout, args.marked, &options)?;
    if args.mode == Mode::Sampled {
        report.spectrum = render(
            &ensemble,
            &config,
            Mode::Sampled,
            args.samples,
            args.common.seed,
        )?;
    }
    let (j1, j2) = layout.split_marked(args.marked)?;
    emit(
        out,
        format!("marked {} (j1 = {j1}, j2 = {j2})", args.marked),
    );
    emit(
        out,
        format!(
            "n1 = {}, n2 = {}, J = {}",
            args.n1, args.n2, report.params.iterations
        ),
    );
    emit(out, format!("queries {}", report.queries_used));
    emit(out, format!("p_success {:.12}", report.success_probability));
    for line in report.spectrum.summary_lines() {
        emit(out, line);
    }
    write_json_report(args.common.out.as_deref(), &report.to_json()?)?;
    write_json_report(args.save.ensemble_out.as_deref(), &ensemble.to_json()?)?;
    Ok(if report.success_probability >= SUCCESS_THRESHOLD {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn shor_params(args: &ShorArgs) -> CliResult<ShorParams> {
    let n = argument_qubits_for(args.nb)?;
    let params = match (args.n1, args.n2) {
        (Some(n1), Some(n2)) => ShorParams::new(args.nb, args.a, n1, n2)?,
        (None, Some(n2)) => ShorParams::with_n2(args.nb, args.a, n2)?,
        (Some(n1), None) => {
            if n1 > n {
                return Err(CliError::Invalid(format!("n1 = {n1} exceeds n = {n}")));
            }
            ShorParams::new(args.nb, args.a, n1, n - n1)?
        }
        (None, None) => ShorParams::new(args.nb, args.a, 2.min(n), n - 2.min(n))?,
    };
    Ok(params)
}

pub fn cmd_shor(args: &ShorArgs, out: &mut dyn Write) -> CliResult<i32> {
    let budget = args.budget.budget()?;
    if let Some(n1) = args.n1 {
        budget.check(n1)?;
    }
    let params = shor_params(args)?;
    budget.check(params.n1)?;
    let policy = policy(&args.common)?;
    let readout = match args.mode {
        Mode::Expected => ShorReadout::Expected,
        Mode::Sampled => ShorReadout::Sampled {
            molecules_per_constituent: args.samples,
        },
    };
    let (advisory, note) = n1_validity_check(&params);
    let (ensemble, spectrum, report) =
        run_pqc_shor::<f64>(&params, readout, args.common.seed, &policy)?;
    emit(
        out,
        format!(
            "Nb = {}, a = {}, n1 = {}, n2 = {}, m = {}",
            params.nb, params.a, params.n1, params.n2, params.m
        ),
    );
    emit(out, format!("split {advisory:?}: {note}"));
    for line in spectrum.summary_lines() {
        emit(out, line);
    }
    emit(out, format!("transitions {}", report.transitions_observed));
    emit(out, format!("peaks {:?}", report.peak_positions));
    match report.r {
        Some(r) => emit(out, format!("r = {r} ({:?})", report.method)),
        None => emit(out, "r not found"),
    }
    match (report.factors, report.failure) {
        (Some((p, q)), _) => emit(out, format!("factors {p} x {q}")),
        (None, Some(f)) => emit(out, format!("failure {f:?}")),
        (None, None) => emit(out, "failure"),
    }
    write_json_report(args.common.out.as_deref(), &report.to_json()?)?;
    write_json_report(args.save.ensemble_out.as_deref(), &ensemble.to_json()?)?;
    Ok(if report.succeeded() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult<i32> {
    if args.n == 0 || args.n > 62 {
        return Err(CliError::Invalid(format!("--n {} outside [1, 62]", args.n)));
    }
    let n1s: Vec<u32> = (0..=args.n).collect();
    let rows = sweep_tradeoff(args.n, &n1s)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["n1", "N1", "Nq_asym", "Nq_real", "product"])?;
    for row in &rows {
        let product = if args.realized {
            row.product_realized()
        } else {
            row.product_asymptotic()
        };
        writer.write_record([
            row.n1.to_string(),
            row.big_n1.to_string(),
            row.nq_asymptotic.to_string(),
            row.nq_realized.to_string(),
            product.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    match &args.out {
        Some(p) => write_text(p, &text)?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct RpaReport {
    #[serde(rename = "N")]
    big_n: u64,
    k: u64,
    trials: u64,
    seed: u64,
    marked: u64,
    p_marked: f64,
    p_other: f64,
    marked_frequency: f64,
    winner: u64,
    success_rate: f64,
}

pub fn cmd_rpa(args: &RpaArgs, out: &mut dyn Write) -> CliResult<i32> {
    if !(2..=MAX_RPA_QUBITS).contains(&args.n) {
        return Err(CliError::Invalid(format!(
            "--n {} outside [2, {MAX_RPA_QUBITS}]",
            args.n
        )));
    }
    if args.k == 0 || args.trials == 0 {
        return Err(CliError::Invalid("--k and --trials must be >= 1".into()));
    }
    let big_n = 1u64 << args.n;
    let seed = args.common.seed;
    let (p_marked, p_other) = rpa_one_iteration_distribution(big_n)?;
    let (winner, _) = rpa_majority_vote(big_n, args.k, seed)?;
    let report = RpaReport {
        big_n,
        k: args.k,
        trials: args.trials,
        seed,
        marked: rpa_marked(big_n),
        p_marked,
        p_other,
        marked_frequency: rpa_marked_frequency(big_n, args.k, seed)?,
        winner,
        success_rate: rpa_success_rate(big_n, args.k, args.trials, seed)?,
    };
    emit(
        out,
        format!("N = {big_n}, k = {}, marked = {}", args.k, report.marked),
    );
    emit(out, format!("p_marked {:.12}", report.p_marked));
    emit(out, format!("p_other {:.12}", report.p_other));
    emit(
        out,
        format!("marked_frequency {:.6}", report.marked_frequency),
    );
    emit(out, format!("majority winner {}", report.winner));
    emit(
        out,
        format!(
            "success_rate {:.6} over {} trials",
            report.success_rate, args.trials
        ),
    );
    let json = serde_json::to_string(&report).map_err(|e| CliError::Invalid(e.to_string()))?;
    write_json_report(args.common.out.as_deref(), &json)?;
    Ok(EXIT_OK)
}

pub fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> CliResult<i32> {
    let ensemble = Ensemble64::from_json(&read_text(&args.input)?)?;
    let layout = *ensemble.layout();
    let config = load_couplings(args.couplings.as_deref(), args.register.into(), &layout)?;
    let spectrum = render(
        &ensemble,
        &config,
        args.mode,
        args.samples,
        args.common.seed,
    )?;
    for line in spectrum.summary_lines() {
        emit(out, line);
    }
    write_json_report(args.common.out.as_deref(), &spectrum.to_json()?)?;
    Ok(EXIT_OK)
}
