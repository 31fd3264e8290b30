//! `circkde` — circular kernel density estimation from the command line.
//!
//! Four subcommands: `fit` estimates a density from a CSV column of angles,
//! `mise` prints the exact error decomposition of a kernel/scenario pair,
//! `simulate` runs replicated sampling experiments on catalog scenarios, and
//! `scenarios` lists the catalog. Exit codes: 0 success, 1 usage errors,
//! 2 data errors, 3 numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use circkde::distributions::{scenario, scenario_catalog};
use circkde::io::{export_density_grid, load_csv, AngleUnit, ColumnSpec, Direction};
use circkde::kernels::FlatTopKernel;
use circkde::mise::exact_mise;
use circkde::simulation::{
    emit_report, run_scenario, EstimatorConfig, IseMethod, KernelFamily, ParamRule, ReportFormat,
    SimulationConfig,
};
use circkde::{Error, Result};

#[derive(Parser)]
#[command(
    name = "circkde",
    version,
    about = "Kernel density estimation for circular data",
    arg_required_else_help = true
)]
struct Cli {
    /// Base seed for simulations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for replicated runs (default: RAYON_NUM_THREADS, or
    /// all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the subcommand's output here — fit: density grid CSV; mise:
    /// JSON report; simulate: per-replication rows (JSON when the path ends
    /// in .json, CSV otherwise); scenarios: the catalog table.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a density to a CSV column of angles
    Fit(FitArgs),
    /// Print the exact ISB/IV/MISE decomposition for a kernel and scenario
    Mise(MiseArgs),
    /// Run replicated sampling experiments on catalog scenarios
    Simulate(SimulateArgs),
    /// List the benchmark scenario catalog
    Scenarios,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,

    /// Column holding the angles: a header name, or a 0-based index.
    #[arg(long, default_value = "0")]
    column: String,

    /// Angular unit of the column.
    #[arg(long, value_enum, default_value_t = UnitArg::Radians)]
    unit: UnitArg,

    /// Orientation convention of the column.
    #[arg(long, value_enum, default_value_t = DirectionArg::Ccw)]
    direction: DirectionArg,

    /// Kernel family.
    #[arg(long, value_enum, default_value_t = KernelArg::Wsinc)]
    kernel: KernelArg,

    /// Fixed smoothing parameter ν (flat-top kernels).
    #[arg(long, conflicts_with_all = ["kappa", "select"])]
    nu: Option<f64>,

    /// Fixed concentration κ (von Mises kernel).
    #[arg(long, conflicts_with = "select")]
    kappa: Option<f64>,

    /// Choose the smoothing parameter from the data instead.
    #[arg(long, value_enum)]
    select: Option<SelectArg>,

    /// Flatness factor of the trapezoid taper (wtrap only; default 2).
    #[arg(long)]
    c: Option<u32>,

    /// Non-negativity correction applied to the exported grid.
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    correction: CorrectionArg,

    /// Resolution of the exported grid.
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

#[derive(Args)]
struct MiseArgs {
    /// Catalog scenario id, e.g. M4.
    #[arg(long)]
    scenario: String,

    /// Kernel family (the decomposition needs finite spectral support).
    #[arg(long, value_enum, default_value_t = MiseKernelArg::Wsinc)]
    kernel: MiseKernelArg,

    /// Smoothing parameter ν.
    #[arg(long)]
    nu: f64,

    /// Flatness factor of the trapezoid taper (wtrap only; default 2).
    #[arg(long)]
    c: Option<u32>,

    /// Sample size the variance term is evaluated at.
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Catalog scenario id, e.g. M4.
    #[arg(long, conflicts_with = "all")]
    scenario: Option<String>,

    /// Run every catalog scenario instead.
    #[arg(long)]
    all: bool,

    /// Sample size per replication.
    #[arg(long, default_value_t = 1000)]
    n: usize,

    /// Number of replications.
    #[arg(long, default_value_t = 200)]
    reps: usize,

    /// Semicolon-separated estimator specs, `kernel:selector-or-value[:c]`,
    /// e.g. `wsinc:er;wtrap:lscv:2;vonmises:kappa=8`.
    #[arg(long, default_value = "wsinc:er;wtrap:er")]
    estimators: String,

    /// Score fits by the exact spectral sum instead of quadrature
    /// (flat-top kernels only).
    #[arg(long)]
    parseval: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Radians,
    Degrees,
}

impl From<UnitArg> for AngleUnit {
    fn from(arg: UnitArg) -> Self {
        match arg {
            UnitArg::Radians => AngleUnit::Radians,
            UnitArg::Degrees => AngleUnit::Degrees,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    /// Counterclockwise from east (mathematical convention).
    Ccw,
    /// Clockwise from north (compass convention).
    CwFromNorth,
}

impl From<DirectionArg> for Direction {
    fn from(arg: DirectionArg) -> Self {
        match arg {
            DirectionArg::Ccw => Direction::Counterclockwise,
            DirectionArg::CwFromNorth => Direction::ClockwiseFromNorth,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Wsinc,
    Wtrap,
    Vonmises,
}

#[derive(Clone, Copy, ValueEnum)]
enum MiseKernelArg {
    Wsinc,
    Wtrap,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectArg {
    /// Least-squares cross-validation.
    Lscv,
    /// Empirical coefficient-noise rule.
    Er,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrectionArg {
    None,
    Clip,
    ClipRenormalize,
}

impl From<CorrectionArg> for circkde::estimator::Correction {
    fn from(arg: CorrectionArg) -> Self {
        match arg {
            CorrectionArg::None => Self::None,
            CorrectionArg::Clip => Self::Clip,
            CorrectionArg::ClipRenormalize => Self::ClipRenormalize,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                0
            } else {
                1
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        // A pool may already exist (e.g. under a test harness): the request
        // is then moot, not an error.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args, cli.output),
        Command::Mise(args) => cmd_mise(args, cli.output),
        Command::Simulate(args) => cmd_simulate(args, cli.seed, cli.output),
        Command::Scenarios => cmd_scenarios(cli.output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

/// Prints a line to stdout; a closed pipe (e.g. `circkde scenarios | head`)
/// ends the process quietly instead of panicking.
fn print_line(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(err) = writeln!(out, "{text}") {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: stdout: {err}");
        std::process::exit(2);
    }
}

/// Writes `text` to `path`, or to stdout when no path was given.
fn emit_text(text: &str, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print_line(text);
            Ok(())
        }
    }
}

fn cmd_fit(args: FitArgs, output: Option<PathBuf>) -> Result<()> {
    let column = match args.column.parse::<usize>() {
        Ok(index) => ColumnSpec::Index(index),
        Err(_) => ColumnSpec::Name(args.column.clone()),
    };
    let dataset = load_csv(
        &args.input,
        &column,
        args.unit.into(),
        args.direction.into(),
    )?;

    if args.c.is_some() && args.kernel != KernelArg::Wtrap {
        return Err(Error::InvalidParameter(
            "--c sets the trapezoid's flatness factor and applies only to --kernel wtrap".into(),
        ));
    }
    let family = match args.kernel {
        KernelArg::Wsinc => KernelFamily::Wsinc,
        KernelArg::Wtrap => KernelFamily::Wtrap {
            c: args.c.unwrap_or(2),
        },
        KernelArg::Vonmises => KernelFamily::VonMises,
    };
    let rule = match (args.nu, args.kappa, args.select) {
        (Some(nu), None, None) => {
            if family == KernelFamily::VonMises {
                return Err(Error::InvalidParameter(
                    "the von Mises kernel is smoothed by --kappa, not --nu".into(),
                ));
            }
            ParamRule::Fixed(nu)
        }
        (None, Some(kappa), None) => {
            if family != KernelFamily::VonMises {
                return Err(Error::InvalidParameter(
                    "flat-top kernels are smoothed by --nu, not --kappa".into(),
                ));
            }
            ParamRule::Fixed(kappa)
        }
        (None, None, Some(SelectArg::Lscv)) => ParamRule::Lscv,
        (None, None, Some(SelectArg::Er)) => ParamRule::Er,
        (None, None, None) => {
            return Err(Error::InvalidParameter(
                "choose a smoothing parameter: --nu or --kappa for a fixed value, \
                 --select for a data-driven one"
                    .into(),
            ));
        }
        _ => unreachable!("clap conflict rules exclude combined smoothing flags"),
    };
    let config = EstimatorConfig::new(family, rule)?;

    let (estimate, param, at_boundary) = config.fit(&dataset.angles)?;
    if at_boundary {
        eprintln!(
            "warning: the selector stopped at its search cap; the chosen value may be truncated"
        );
    }
    let name = if family == KernelFamily::VonMises {
        "kappa"
    } else {
        "nu"
    };
    print_line(&format!("{name}={param}"));

    if let Some(path) = &output {
        export_density_grid(&estimate, args.grid, args.correction.into(), path)?;
    }
    Ok(())
}

fn cmd_mise(args: MiseArgs, output: Option<PathBuf>) -> Result<()> {
    let spec = scenario(&args.scenario)?;
    let c = match (args.kernel, args.c) {
        (MiseKernelArg::Wsinc, Some(_)) => {
            return Err(Error::InvalidParameter(
                "--c sets the trapezoid's flatness factor and applies only to --kernel wtrap"
                    .into(),
            ));
        }
        (MiseKernelArg::Wsinc, None) => 1,
        (MiseKernelArg::Wtrap, c) => c.unwrap_or(2),
    };
    let kernel = FlatTopKernel::new(args.nu, c)?;
    let f_char = spec.char_seq(spec.suggested_max_index())?;
    let report = exact_mise(&f_char, &kernel, args.n)?;
    let rendered =
        serde_json::to_string_pretty(&report).expect("a report of plain numbers serializes");
    emit_text(&rendered, output.as_ref())
}

fn cmd_simulate(args: SimulateArgs, seed: u64, output: Option<PathBuf>) -> Result<()> {
    let estimators: Vec<EstimatorConfig> = args
        .estimators
        .split(';')
        .map(str::trim)
        .filter(|spec| !spec.is_empty())
        .map(EstimatorConfig::parse)
        .collect::<Result<_>>()?;
    if estimators.is_empty() {
        return Err(Error::InvalidParameter(
            "--estimators needs at least one spec".into(),
        ));
    }
    if args.all && output.is_some() {
        return Err(Error::InvalidParameter(
            "--output holds a single scenario's replication rows; drop it with --all".into(),
        ));
    }
    let ids: Vec<String> = if args.all {
        scenario_catalog()
            .iter()
            .map(|spec| spec.id().to_owned())
            .collect()
    } else if let Some(id) = &args.scenario {
        vec![id.clone()]
    } else {
        return Err(Error::InvalidParameter(
            "pick a scenario with --scenario <id>, or run --all".into(),
        ));
    };

    for id in ids {
        let mut config = SimulationConfig::new(id, args.n, args.reps, estimators.clone(), seed);
        if args.parseval {
            config.ise_method = IseMethod::Parseval;
        }
        let report = run_scenario(&config)?;
        for summary in &report.estimators {
            print_line(&format!(
                "scenario={} n={} estimator={} selector={} mean_ise_e4={:.4} se_e4={:.4} \
                 boundary_hits={} failures={}",
                report.scenario,
                report.n,
                summary.estimator,
                summary.selector,
                summary.mean_ise_e4,
                summary.se_ise_e4,
                summary.boundary_hits,
                summary.failures
            ));
        }
        for failure in &report.failures {
            eprintln!("warning: {failure}");
        }
        if let Some(path) = &output {
            let format = match path.extension() {
                Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
                _ => ReportFormat::Csv,
            };
            emit_report(&report, format, path)?;
        }
    }
    Ok(())
}

fn cmd_scenarios(output: Option<PathBuf>) -> Result<()> {
    let table: Vec<String> = scenario_catalog()
        .iter()
        .map(|spec| format!("{:<4} {}", spec.id(), spec.description()))
        .collect();
    emit_text(&table.join("\n"), output.as_ref())
}
