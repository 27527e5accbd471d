//! `calgame`: command-line front end for the calibration game laboratory.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 resource limit.

mod specs;

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use calgame::bounds::bound_report;
use calgame::certify::{default_mode, solve_value, ValueMode, EXACT_HORIZON_LIMIT_N2};
use calgame::harness::{run_experiment, solver_sweep, sweep, write_solver_csv, Arithmetic, ExperimentConfig, SweepSpec};
use calgame::scalar::{format_sig, round_json, Scalar};
use calgame::states::{estimate, estimated_bytes, DEFAULT_STATE_BUDGET};
use calgame::{score_report, Error, Exact, Grid, MoveOrder, Result, Transcript};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "calgame", version, about = "Finite calibration game laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a transcript CSV (columns t,a,c[,p]) and print the report as JSON.
    Score(ScoreArgs),
    /// Run seeded Monte Carlo replications and print the summary as JSON.
    Simulate(SimulateArgs),
    /// Compute the minimax value of the T-period game and compare it with the main bound.
    Solve(SolveArgs),
    /// Print the closed-form bounds and their horizon thresholds.
    Bounds(BoundsArgs),
    /// Run an experiment or the solver over several horizons and grid sizes.
    Sweep(SweepArgs),
}

fn parse_order(s: &str) -> std::result::Result<MoveOrder, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_arithmetic(s: &str) -> std::result::Result<Arithmetic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Transcript CSV with header t,a,c or t,a,c,p.
    #[arg(long, value_name = "FILE")]
    transcript: PathBuf,
    /// Grid size N.
    #[arg(long, value_name = "N")]
    grid: u32,
    /// Score in 64-bit floats instead of exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment config as JSON; replaces the strategy and size flags.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["grid", "horizon", "rainmaker", "forecaster"])]
    config: Option<PathBuf>,
    /// Grid size N.
    #[arg(long, value_name = "N", required_unless_present = "config")]
    grid: Option<u32>,
    /// Horizon T.
    #[arg(long, value_name = "T", required_unless_present = "config")]
    horizon: Option<usize>,
    /// Rainmaker: iid:P, revealed-uniform, playback:P1,P2,..., gap-chaser, counter-forecast, JSON or @file.
    #[arg(long, value_name = "SPEC", required_unless_present = "config")]
    rainmaker: Option<String>,
    /// Forecaster: best-response, constant:D, JSON or @file (a solver table's forecaster is used).
    #[arg(long, value_name = "SPEC", required_unless_present = "config")]
    forecaster: Option<String>,
    /// Number of replications R.
    #[arg(long, value_name = "R")]
    reps: Option<u64>,
    /// Master seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Move order: simultaneous or forecast-first.
    #[arg(long, value_name = "O", value_parser = parse_order)]
    order: Option<MoveOrder>,
    /// float, exact or exhaustive.
    #[arg(long, value_name = "MODE", value_parser = parse_arithmetic)]
    arithmetic: Option<Arithmetic>,
    /// Also write the JSON summary to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write per-replication scores as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Grid size N.
    #[arg(long, value_name = "N")]
    grid: u32,
    /// Horizon T.
    #[arg(long, value_name = "T")]
    horizon: u32,
    /// Move order: simultaneous or forecast-first.
    #[arg(long, value_name = "O", value_parser = parse_order, default_value = "simultaneous")]
    order: MoveOrder,
    /// Exact rational backward induction (default for small sizes).
    #[arg(long, conflicts_with_all = ["float", "certified"])]
    exact: bool,
    /// 64-bit float backward induction.
    #[arg(long, conflicts_with = "certified")]
    float: bool,
    /// Float solve plus an exact best-response bracket on the value.
    #[arg(long)]
    certified: bool,
    /// Write the solved strategies as JSON.
    #[arg(long, value_name = "FILE")]
    strategy_out: Option<PathBuf>,
    /// Maximum number of states.
    #[arg(long, value_name = "STATES", default_value_t = DEFAULT_STATE_BUDGET)]
    budget: u128,
    /// Output format.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Grid size N.
    #[arg(long, value_name = "N")]
    grid: u32,
    /// Horizon T.
    #[arg(long, value_name = "T")]
    horizon: u64,
    /// Output format.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep spec as JSON ({"base": config, "horizons": [...], "grids": [...]}).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["rainmaker", "forecaster", "solver"])]
    config: Option<PathBuf>,
    /// Sweep the game solver instead of simulating.
    #[arg(long)]
    solver: bool,
    /// Grid sizes, comma separated.
    #[arg(long, value_name = "N,...", value_delimiter = ',')]
    grids: Vec<u32>,
    /// Horizons, comma separated.
    #[arg(long, value_name = "T,...", value_delimiter = ',')]
    horizons: Vec<usize>,
    /// Rainmaker spec, as for simulate.
    #[arg(long, value_name = "SPEC")]
    rainmaker: Option<String>,
    /// Forecaster spec, as for simulate.
    #[arg(long, value_name = "SPEC")]
    forecaster: Option<String>,
    /// Replications per point.
    #[arg(long, value_name = "R", default_value_t = 1)]
    reps: u64,
    /// Master seed.
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Move order: simultaneous or forecast-first.
    #[arg(long, value_name = "O", value_parser = parse_order, default_value = "simultaneous")]
    order: MoveOrder,
    /// float, exact or exhaustive.
    #[arg(long, value_name = "MODE", value_parser = parse_arithmetic, default_value = "float")]
    arithmetic: Arithmetic,
    /// Write the CSV rows here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the full JSON result (rows and slope fits) here.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Maximum number of states per solve (solver sweeps).
    #[arg(long, value_name = "STATES", default_value_t = DEFAULT_STATE_BUDGET)]
    budget: u128,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { 2 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("CALIB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::arg(format!("CALIB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Score(a) => score(a),
        Command::Simulate(a) => simulate(a),
        Command::Solve(a) => solve(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn print_json(v: &Value) -> Result<()> {
    let mut v = v.clone();
    round_json(&mut v, 12);
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &v)?;
    writeln!(out)?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut v = v.clone();
    round_json(&mut v, 12);
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &v)?;
    writeln!(f)?;
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::arg(format!("cannot open {}: {e}", path.display())))
}

fn score(a: ScoreArgs) -> Result<()> {
    let grid = Grid::new(a.grid)?;
    let file = open(&a.transcript)?;
    let report = if a.float {
        score_report(&Transcript::<f64>::read_csv(file, &grid)?, &grid)?.to_json()
    } else {
        score_report(&Transcript::<Exact>::read_csv(file, &grid)?, &grid)?.to_json()
    };
    print_json(&report)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::from_json_str(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::new(
            Grid::new(a.grid.expect("required by clap"))?,
            a.horizon.expect("required by clap"),
            specs::rainmaker(a.rainmaker.as_deref().expect("required by clap"))?,
            specs::forecaster(a.forecaster.as_deref().expect("required by clap"))?,
        ),
    };
    if let Some(r) = a.reps {
        cfg.replications = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(o) = a.order {
        cfg.order = o;
    }
    if let Some(m) = a.arithmetic {
        cfg.arithmetic = m;
    }
    if a.out.is_some() {
        cfg.summary_out = a.out;
    }
    if a.csv.is_some() {
        cfg.replications_out = a.csv;
    }
    cfg.validate()?;
    let result = run_experiment(&cfg)?;
    if let Some(path) = &cfg.replications_out {
        result.write_replications_csv(File::create(path)?)?;
    }
    let summary = result.summary.to_json();
    if let Some(path) = &cfg.summary_out {
        write_json(path, &summary)?;
    }
    print_json(&summary)
}

fn solve(a: SolveArgs) -> Result<()> {
    let grid = Grid::new(a.grid)?;
    if a.horizon == 0 {
        return Err(Error::arg("horizon must be at least 1"));
    }
    let mode = if a.exact {
        ValueMode::Exact
    } else if a.float {
        ValueMode::Float
    } else if a.certified {
        ValueMode::Certified
    } else {
        default_mode(a.grid, a.horizon, a.order)
    };
    let sizes = estimate(&grid, a.horizon);
    let total = sizes.iter().fold(0u128, |acc, &s| acc.saturating_add(s));
    let bytes = estimated_bytes(&grid, total, mode == ValueMode::Exact);
    eprintln!(
        "state space: {total} states in {} layers, largest layer {}, about {} MiB with tables",
        sizes.len(),
        sizes.iter().max().copied().unwrap_or(0),
        bytes / (1 << 20)
    );
    if mode == ValueMode::Exact
        && a.grid >= 2
        && a.order == MoveOrder::Simultaneous
        && a.horizon > EXACT_HORIZON_LIMIT_N2 + 2
    {
        eprintln!("warning: exact values grow very long at this size; --certified is much faster");
    }
    let solved = solve_value(&grid, a.horizon, a.order, mode, a.budget, a.strategy_out.is_some())?;
    if let Some(path) = &a.strategy_out {
        let json = solved.strategy_json().expect("tables were kept");
        write_json(path, &json)?;
    }
    match a.format {
        Format::Json => print_json(&solved.to_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(calgame::SolvedValue::CSV_HEADER)?;
            w.write_record(solved.csv_record())?;
            w.flush()?;
            Ok(())
        }
        Format::Table => {
            let mut out = io::stdout().lock();
            writeln!(
                out,
                "N = {}, T = {}, order = {}, mode = {}",
                a.grid, a.horizon, a.order, solved.mode
            )?;
            match (&solved.exact, solved.mode) {
                (Some(v), _) => writeln!(out, "value = {} ({})", v.to_plain_string(), format_sig(v.to_f64(), 12))?,
                (None, ValueMode::Certified) => {
                    let (lo, hi) = (solved.lower.as_ref().expect("bracket"), solved.upper.as_ref().expect("bracket"));
                    writeln!(out, "value = {}", format_sig(solved.value, 12))?;
                    writeln!(
                        out,
                        "exact bracket = [{}, {}]",
                        format_sig(lo.to_f64(), 12),
                        format_sig(hi.to_f64(), 12)
                    )?;
                }
                (None, _) => writeln!(out, "value = {}", format_sig(solved.value, 12))?,
            }
            writeln!(out, "bound 1/(2N) + (1/2)sqrt(N/T) = {}", format_sig(solved.bound, 12))?;
            let how = match solved.mode {
                ValueMode::Exact => "exact comparison",
                ValueMode::Certified => "exact comparison of the bracket's upper end",
                ValueMode::Float => "float comparison, tolerance 1e-9",
            };
            writeln!(out, "value <= bound: {} ({how})", if solved.within_bound { "yes" } else { "no" })?;
            Ok(())
        }
    }
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let report = bound_report(a.grid, a.horizon)?;
    match a.format {
        Format::Table => {
            print!("{}", report.table());
            Ok(())
        }
        Format::Json => print_json(&report.to_json()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(calgame::BoundReport::CSV_HEADER)?;
            for r in report.csv_records() {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn csv_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    if a.solver {
        let horizons: Vec<u32> = a
            .horizons
            .iter()
            .map(|&t| u32::try_from(t).map_err(|_| Error::arg(format!("horizon {t} is too large"))))
            .collect::<Result<_>>()?;
        let rows = solver_sweep(&a.grids, &horizons, a.order, None, a.budget)?;
        write_solver_csv(&rows, csv_sink(&a.out)?)?;
        if let Some(path) = &a.json {
            let json: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut v = r.solved.to_json();
                    v["value_sqrt_t"] = r.scaled.to_json();
                    v
                })
                .collect();
            write_json(path, &Value::Array(json))?;
        }
        return Ok(());
    }
    let spec = match &a.config {
        Some(path) => {
            let spec: SweepSpec = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::config(format!("sweep config: {e}")))?;
            spec
        }
        None => {
            let (Some(rain), Some(fore)) = (&a.rainmaker, &a.forecaster) else {
                return Err(Error::arg("sweep needs --config, --solver, or both --rainmaker and --forecaster"));
            };
            let first_grid = *a
                .grids
                .first()
                .ok_or_else(|| Error::arg("sweep needs at least one grid size"))?;
            let base = ExperimentConfig::new(Grid::new(first_grid)?, 1, specs::rainmaker(rain)?, specs::forecaster(fore)?)
                .with_replications(a.reps)
                .with_seed(a.seed)
                .with_order(a.order)
                .with_arithmetic(a.arithmetic);
            SweepSpec {
                base,
                horizons: a.horizons.clone(),
                grids: a.grids.clone(),
            }
        }
    };
    let result = sweep(&spec)?;
    result.write_csv(csv_sink(&a.out)?)?;
    for s in &result.slopes {
        eprintln!(
            "N = {}: slope of log mean {} on log T = {} (SE {}, {} points)",
            s.grid,
            s.metric,
            format_sig(s.slope, 12),
            format_sig(s.se, 12),
            s.points
        );
    }
    if let Some(path) = &a.json {
        write_json(path, &result.to_json())?;
    }
    Ok(())
}
