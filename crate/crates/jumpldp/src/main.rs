//! Command-line front end: every library operation as a subcommand with
//! deterministic seeding and file-based input and output.
//!
//! Conventions shared by all subcommands:
//!
//! * `--model` takes a builtin id (see `list-models`) or the path of a
//!   model JSON file.
//! * Vector flags are comma-separated lists (`--x0 0.5,0`).
//! * Initial states are given as concentrations. Commands that run the
//!   microscopic process at volume v round them to counts as
//!   `round(v * x0)`; builtin models supply their own volume-indexed start
//!   rule when `--x0` is omitted.
//! * Floats print with full round-trip precision, and the same argv plus
//!   the same input files produce byte-identical output regardless of
//!   `--jobs`.
//! * Tables serialize as CSV with `#`-prefixed metadata lines; `--format
//!   json` emits the same content as one JSON object. Trajectory and path
//!   outputs keep their plain CSV payload (no metadata lines) so they can
//!   be fed back into `action`, `shift-path`, and friends.
//! * Exit codes: 0 success, 2 invalid input, 3 numeric failure.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use jumpldp::error::Error;
use jumpldp::exactdist::{count_threshold, TruncatedChain};
use jumpldp::experiments::{
    builtin, divergence_probe, escape_event_study, ldp_marginal_study, minimize_endpoint_action,
    threshold_event, BuiltinModel, MarginalMode, MinimizeOpts, StudyResult, BUILTIN_IDS,
};
use jumpldp::network::audit::{audit_aleph, audit_rate_convergence};
use jumpldp::network::fluid::fluid_limit;
use jumpldp::network::model::parse_model;
use jumpldp::network::ReactionNetwork;
use jumpldp::numeric::rng::RngStream;
use jumpldp::numeric::{fmt_float, parse_float};
use jumpldp::path::MacroPath;
use jumpldp::pathlab::{
    build_shifted_path, cone_obstruction, decay_exponent, escape_sequence_audit, fast_set,
    verify_breakup, Cover,
};
use jumpldp::ratefn::{flux_action, lagrangian, path_action, NewtonOpts, QuadOpts};
use jumpldp::simulator::{ssa_simulate, JumpPath};
use jumpldp::Result;

const DEFAULT_RHO_LADDER: &str = "0.1,0.05,0.025,0.0125,0.00625";

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "jumpldp",
    version,
    about = "Sample-path large deviations for density-scaled Markov jump processes",
    after_help = "Exit codes: 0 success, 2 invalid input, 3 numeric failure."
)]
struct Cli {
    /// Cap on worker threads (default: all logical CPUs)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Write output to this file instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory of the microscopic process
    Simulate(SimulateArgs),
    /// Simulate one trajectory with cumulative per-reaction fluxes
    FluxSimulate(SimulateArgs),
    /// Exact transient distribution of the truncated chain
    Exact(ExactArgs),
    /// Velocity cost l(x, y) at one state
    Rate(RateArgs),
    /// Action integral of a piecewise-linear path file
    Action(ActionArgs),
    /// Entropy cost of a flux path run against a state path
    FluxAction(FluxActionArgs),
    /// Integrate the fluid limit ODE
    Fluid(FluidArgs),
    /// Build the boundary-clearing shifted path for a path file
    ShiftPath(ShiftArgs),
    /// Build the shifted path and certify its geometric guarantees
    VerifyBreakup(ShiftArgs),
    /// Rate-scaling and boundary auditors
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Reproducible studies over volume or resolution ladders
    #[command(subcommand)]
    Study(StudyCmd),
    /// List the builtin models
    ListModels,
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Sup gap between microscopic and macroscopic rates over a box
    Convergence(ConvergenceArgs),
    /// Smallest micro-to-macro rate ratio over a box
    Aleph(AlephArgs),
    /// Rate decay exponent of one reaction near a region's boundary
    Decay(DecayArgs),
    /// Classify reactions that freeze exponentially fast at the boundary
    Fast(FastArgs),
    /// Whether slow jumps can move a boundary point inward
    Cone(ConeArgs),
    /// Rate conditions behind a region's escape sequence
    EscapeSeq(EscapeSeqArgs),
}

#[derive(Subcommand)]
enum StudyCmd {
    /// Scaled log-probability ladder of a coordinate-threshold event
    Marginal(MarginalArgs),
    /// Minimize the path action between pinned endpoints
    Minimize(MinimizeArgs),
    /// Truncated action of a boundary-starting path as the start is excised
    Diverge(DivergeArgs),
    /// Monte Carlo check of the escape-event probability bound
    EscapeEvent(EscapeEventArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Volume (lattice spacing 1/v)
    #[arg(long)]
    v: u64,
    /// Start concentrations, rounded to counts; builtin start rule if omitted
    #[arg(long)]
    x0: Option<String>,
    /// Simulation horizon
    #[arg(long)]
    t_max: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExactArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Volume (lattice spacing 1/v)
    #[arg(long)]
    v: u64,
    /// Start concentrations, rounded to counts; builtin start rule if omitted
    #[arg(long)]
    x0: Option<String>,
    /// Time at which the distribution is evaluated
    #[arg(long)]
    t: f64,
    /// State-space truncation cap (breadth-first from the start)
    #[arg(long, default_value_t = 20_000)]
    max_states: usize,
    /// Truncation tolerance of the transient solve
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Coordinate of the optional threshold event
    #[arg(long, default_value_t = 0)]
    coord: usize,
    /// Report the probability bracket of {x_coord >= delta} when given
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct RateArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// State (comma-separated concentrations)
    #[arg(long)]
    x: String,
    /// Velocity (comma-separated)
    #[arg(long)]
    y: String,
}

#[derive(Args)]
struct ActionArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Path file (CSV with header t,x_1,..,x_d)
    #[arg(long)]
    path: PathBuf,
    /// Gauss points per quadrature panel (4, 8 or 16)
    #[arg(long, default_value_t = 16)]
    quad_points: usize,
}

#[derive(Args)]
struct FluxActionArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// State path file (CSV with header t,x_1,..,x_d)
    #[arg(long)]
    state_path: PathBuf,
    /// Cumulative flux path file (CSV, one column per reaction)
    #[arg(long)]
    flux_path: PathBuf,
    /// Gauss points per quadrature panel (4, 8 or 16)
    #[arg(long, default_value_t = 16)]
    quad_points: usize,
}

#[derive(Args)]
struct FluidArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Start concentrations; builtin limit concentrations if omitted
    #[arg(long)]
    x0: Option<String>,
    /// Integration horizon
    #[arg(long)]
    t: f64,
    /// Runge-Kutta steps
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Abort when the trajectory sup norm exceeds this
    #[arg(long, default_value_t = 1e6)]
    blow_up: f64,
}

#[derive(Args)]
struct ShiftArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Path file (CSV with header t,x_1,..,x_d)
    #[arg(long)]
    path: PathBuf,
    /// Target uniform distance between the original and the shifted path
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Box lower corner; builtin cover bounding box if omitted
    #[arg(long)]
    lo: Option<String>,
    /// Box upper corner; builtin cover bounding box if omitted
    #[arg(long)]
    hi: Option<String>,
    /// Grid points per axis
    #[arg(long, default_value_t = 9)]
    per_axis: usize,
    /// Volume ladder
    #[arg(long, default_value = "10,100,1000")]
    v: String,
}

#[derive(Args)]
struct AlephArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Box lower corner; builtin cover bounding box if omitted
    #[arg(long)]
    lo: Option<String>,
    /// Box upper corner; builtin cover bounding box if omitted
    #[arg(long)]
    hi: Option<String>,
    /// Grid points per axis
    #[arg(long, default_value_t = 9)]
    per_axis: usize,
    /// Volume
    #[arg(long, default_value_t = 100)]
    v: u64,
}

#[derive(Args)]
struct DecayArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Cover region index
    #[arg(long, default_value_t = 0)]
    region: usize,
    /// Reaction index
    #[arg(long)]
    reaction: usize,
    /// Boundary-distance ladder (strictly decreasing)
    #[arg(long, default_value = DEFAULT_RHO_LADDER)]
    rho: String,
    /// Candidate decay exponents
    #[arg(long, default_value = "0.25,0.5,0.9")]
    alphas: String,
}

#[derive(Args)]
struct FastArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Cover region index
    #[arg(long, default_value_t = 0)]
    region: usize,
    /// Boundary-distance ladder (strictly decreasing)
    #[arg(long, default_value = DEFAULT_RHO_LADDER)]
    rho: String,
}

#[derive(Args)]
struct ConeArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Cover region index
    #[arg(long, default_value_t = 0)]
    region: usize,
    /// Boundary point to test (must sit on a facet of the region)
    #[arg(long)]
    x: String,
    /// Fast reaction indices; classified from the rho ladder if omitted
    #[arg(long)]
    fast: Option<String>,
    /// Boundary-distance ladder for the fallback classification
    #[arg(long, default_value = DEFAULT_RHO_LADDER)]
    rho: String,
}

#[derive(Args)]
struct EscapeSeqArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Cover region index
    #[arg(long, default_value_t = 0)]
    region: usize,
    /// Volume ladder
    #[arg(long, default_value = "16,32,64,128")]
    v: String,
    /// Start concentrations per rung; builtin start rule if omitted
    #[arg(long)]
    x0: Option<String>,
}

#[derive(Args)]
struct MarginalArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Event time
    #[arg(long)]
    t: f64,
    /// Event threshold: {x_coord >= delta}
    #[arg(long)]
    delta: f64,
    /// Event coordinate
    #[arg(long, default_value_t = 0)]
    coord: usize,
    /// Volume ladder
    #[arg(long)]
    v: String,
    /// Probability backend per rung
    #[arg(long, value_enum)]
    mode: MarginalModeArg,
    /// State-space truncation cap (exact mode)
    #[arg(long, default_value_t = 20_000)]
    max_states: usize,
    /// Truncation tolerance of the transient solve (exact mode)
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Trajectories per rung (mc mode)
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// RNG seed (mc mode)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start concentrations, rounded to counts; builtin start rule if omitted
    #[arg(long)]
    x0: Option<String>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MarginalModeArg {
    Exact,
    Mc,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Start concentrations; builtin limit concentrations if omitted
    #[arg(long)]
    x0: Option<String>,
    /// Endpoint concentrations
    #[arg(long)]
    target: String,
    /// Time horizon
    #[arg(long)]
    t: f64,
    /// Breakpoints of the finest grid
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Gradient iterations allowed per grid level
    #[arg(long, default_value_t = 4000)]
    max_iters: usize,
    /// Per-level stop once the gradient sup norm falls below this
    #[arg(long, default_value_t = 1e-7)]
    grad_tol: f64,
    /// Also write the minimizing path to this CSV file
    #[arg(long)]
    path_out: Option<PathBuf>,
}

#[derive(Args)]
struct DivergeArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Path file starting on the degenerate boundary
    #[arg(long)]
    path: PathBuf,
    /// Excision radii (strictly decreasing)
    #[arg(long, default_value = "0.1,0.05,0.025,0.0125,0.00625,0.003125")]
    eps: String,
    /// Freeze constant of the model; the divergence threshold is half of it
    #[arg(long, default_value_t = 1.0)]
    k_scale: f64,
    /// Gauss points per quadrature panel (4, 8 or 16)
    #[arg(long, default_value_t = 16)]
    quad_points: usize,
}

#[derive(Args)]
struct EscapeEventArgs {
    /// Builtin model id or model JSON file
    #[arg(long)]
    model: String,
    /// Cover JSON file; builtin models carry their own
    #[arg(long)]
    cover: Option<PathBuf>,
    /// Cover region index
    #[arg(long, default_value_t = 0)]
    region: usize,
    /// Volume ladder
    #[arg(long, default_value = "20,50,100")]
    v: String,
    /// Target distance scale (escape window t_delta = delta / 6)
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    /// Trajectories per rung
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start concentrations, rounded to counts; builtin start rule if omitted
    #[arg(long)]
    x0: Option<String>,
    /// Gauss points per quadrature panel (4, 8 or 16)
    #[arg(long, default_value_t = 16)]
    quad_points: usize,
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        // Only fails when a pool already exists; the default pool is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let text = match dispatch(&cli) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_usage() { 2 } else { 3 };
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, text.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    0
}

fn dispatch(cli: &Cli) -> Result<String> {
    let f = cli.format;
    match &cli.command {
        Command::Simulate(a) => run_simulate(a, false, f),
        Command::FluxSimulate(a) => run_simulate(a, true, f),
        Command::Exact(a) => run_exact(a, f),
        Command::Rate(a) => run_rate(a, f),
        Command::Action(a) => run_action(a, f),
        Command::FluxAction(a) => run_flux_action(a, f),
        Command::Fluid(a) => run_fluid(a, f),
        Command::ShiftPath(a) => run_shift_path(a, f),
        Command::VerifyBreakup(a) => run_verify_breakup(a, f),
        Command::Audit(AuditCmd::Convergence(a)) => run_audit_convergence(a, f),
        Command::Audit(AuditCmd::Aleph(a)) => run_audit_aleph(a, f),
        Command::Audit(AuditCmd::Decay(a)) => run_audit_decay(a, f),
        Command::Audit(AuditCmd::Fast(a)) => run_audit_fast(a, f),
        Command::Audit(AuditCmd::Cone(a)) => run_audit_cone(a, f),
        Command::Audit(AuditCmd::EscapeSeq(a)) => run_audit_escape_seq(a, f),
        Command::Study(StudyCmd::Marginal(a)) => run_study_marginal(a, f),
        Command::Study(StudyCmd::Minimize(a)) => run_study_minimize(a, f),
        Command::Study(StudyCmd::Diverge(a)) => run_study_diverge(a, f),
        Command::Study(StudyCmd::EscapeEvent(a)) => run_study_escape_event(a, f),
        Command::ListModels => run_list_models(f),
    }
}

// ---------------------------------------------------------------------
// Input resolution
// ---------------------------------------------------------------------

struct LoadedModel {
    given: String,
    net: ReactionNetwork,
    builtin: Option<BuiltinModel>,
}

fn load_model(spec: &str) -> Result<LoadedModel> {
    if BUILTIN_IDS.contains(&spec) {
        let b = builtin(spec)?;
        return Ok(LoadedModel {
            given: spec.to_string(),
            net: b.net.clone(),
            builtin: Some(b),
        });
    }
    let text = fs::read_to_string(spec).map_err(|e| {
        Error::Invalid(format!(
            "model {spec:?} is neither a builtin id (see list-models) nor a readable file: {e}"
        ))
    })?;
    Ok(LoadedModel {
        given: spec.to_string(),
        net: parse_model(&text)?,
        builtin: None,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn resolve_cover(m: &LoadedModel, file: &Option<PathBuf>) -> Result<Cover> {
    match file {
        Some(path) => Cover::parse(&read_file(path)?, &m.net),
        None => match &m.builtin {
            Some(b) => Ok(b.cover.clone()),
            None => Err(Error::Invalid(
                "file models need --cover (builtin models carry their own)".into(),
            )),
        },
    }
}

fn load_path(path: &Path) -> Result<MacroPath> {
    MacroPath::from_csv(&read_file(path)?)
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|f| {
            parse_float(f.trim())
                .ok_or_else(|| Error::Invalid(format!("{what}: bad number {f:?}")))
        })
        .collect()
}

fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|f| {
            f.trim()
                .parse::<u64>()
                .map_err(|e| Error::Invalid(format!("{what}: bad integer {f:?}: {e}")))
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|f| {
            f.trim()
                .parse::<usize>()
                .map_err(|e| Error::Invalid(format!("{what}: bad index {f:?}: {e}")))
        })
        .collect()
}

fn parse_concentrations(s: &str, what: &str) -> Result<Vec<f64>> {
    let x = parse_f64_list(s, what)?;
    for &xi in &x {
        if !xi.is_finite() || xi < 0.0 {
            return Err(Error::Invalid(format!(
                "{what}: concentrations must be finite and nonnegative, got {xi}"
            )));
        }
    }
    Ok(x)
}

fn conc_to_counts(v: u64, x: &[f64]) -> Vec<i64> {
    x.iter().map(|&xi| (v as f64 * xi).round() as i64).collect()
}

/// Start counts at one volume: explicit concentrations rounded, or the
/// builtin start rule.
fn resolve_counts(m: &LoadedModel, v: u64, x0: &Option<String>) -> Result<Vec<i64>> {
    match x0 {
        Some(s) => Ok(conc_to_counts(v, &parse_concentrations(s, "--x0")?)),
        None => match &m.builtin {
            Some(b) => Ok(b.x0_counts(v)),
            None => Err(Error::Invalid("file models need --x0".into())),
        },
    }
}

/// Start concentrations at the fluid scale: explicit, or the builtin limit.
fn resolve_conc(m: &LoadedModel, x0: &Option<String>) -> Result<Vec<f64>> {
    match x0 {
        Some(s) => parse_concentrations(s, "--x0"),
        None => match &m.builtin {
            Some(b) => Ok(b.x0_limit.clone()),
            None => Err(Error::Invalid("file models need --x0".into())),
        },
    }
}

/// Volume-indexed start rule for ladder studies.
fn count_rule(
    m: &LoadedModel,
    x0: &Option<String>,
) -> Result<Box<dyn Fn(u64) -> Vec<i64> + Sync>> {
    match x0 {
        Some(s) => {
            let conc = parse_concentrations(s, "--x0")?;
            Ok(Box::new(move |v| conc_to_counts(v, &conc)))
        }
        None => match &m.builtin {
            Some(b) => {
                let b = b.clone();
                Ok(Box::new(move |v| b.x0_counts(v)))
            }
            None => Err(Error::Invalid("file models need --x0".into())),
        },
    }
}

/// Componentwise bounding box of the whole cover.
fn cover_bbox(cover: &Cover) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = vec![f64::INFINITY; cover.dim()];
    let mut hi = vec![f64::NEG_INFINITY; cover.dim()];
    for region in cover.regions() {
        let (rlo, rhi) = region.bbox()?;
        for i in 0..lo.len() {
            lo[i] = lo[i].min(rlo[i]);
            hi[i] = hi[i].max(rhi[i]);
        }
    }
    Ok((lo, hi))
}

fn resolve_box(
    m: &LoadedModel,
    lo: &Option<String>,
    hi: &Option<String>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match (lo, hi) {
        (Some(a), Some(b)) => Ok((parse_f64_list(a, "--lo")?, parse_f64_list(b, "--hi")?)),
        (None, None) => match &m.builtin {
            Some(b) => cover_bbox(&b.cover),
            None => Err(Error::Invalid("file models need --lo and --hi".into())),
        },
        _ => Err(Error::Invalid("give both --lo and --hi or neither".into())),
    }
}

fn quad_opts(points: usize) -> QuadOpts {
    QuadOpts {
        points,
        ..QuadOpts::default()
    }
}

fn check_region(cover: &Cover, region: usize) -> Result<()> {
    if region >= cover.regions().len() {
        return Err(Error::Invalid(format!(
            "region {region} out of range (cover has {})",
            cover.regions().len()
        )));
    }
    Ok(())
}

fn join_display<T: Display>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

// ---------------------------------------------------------------------
// Output rendering
// ---------------------------------------------------------------------

enum Cell {
    Num(f64),
    Int(i64),
    Null,
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_cell(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) if x.is_finite() => fmt_float(*x),
        Cell::Num(_) => "null".to_string(),
        Cell::Int(n) => n.to_string(),
        Cell::Null => "null".to_string(),
    }
}

/// The JSON shape shared by trajectory and path payloads: the CSV content
/// as {meta, columns, rows}.
fn json_table(meta: &[(String, String)], columns: &[String], rows: &[Vec<Cell>]) -> String {
    let mut out = String::from("{\"meta\":{");
    for (i, (k, v)) in meta.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&json_escape(k));
        out.push(':');
        out.push_str(&json_escape(v));
    }
    out.push_str("},\"columns\":[");
    for (i, c) in columns.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&json_escape(c));
    }
    out.push_str("],\"rows\":[");
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&json_cell(cell));
        }
        out.push(']');
    }
    out.push_str("]}");
    out
}

fn meta_pair(key: &str, value: impl Display) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn render_study(out: &StudyResult, format: Format) -> String {
    match format {
        Format::Csv => out.to_csv(),
        Format::Json => out.to_json(),
    }
}

fn render_path(z: &MacroPath, meta: Vec<(String, String)>, format: Format) -> String {
    match format {
        Format::Csv => z.to_csv(),
        Format::Json => {
            let mut columns = vec!["t".to_string()];
            for k in 1..=z.dim() {
                columns.push(format!("x_{k}"));
            }
            let rows: Vec<Vec<Cell>> = z
                .times()
                .iter()
                .zip(z.points())
                .map(|(t, p)| {
                    let mut row = vec![Cell::Num(*t)];
                    row.extend(p.iter().map(|&x| Cell::Num(x)));
                    row
                })
                .collect();
            json_table(&meta, &columns, &rows)
        }
    }
}

fn render_trajectory(
    net: &ReactionNetwork,
    jp: &JumpPath,
    with_flux: bool,
    meta: Vec<(String, String)>,
    format: Format,
) -> String {
    if format == Format::Csv {
        return jp.to_csv(net, with_flux);
    }
    let d = net.dim();
    let nr = net.n_reactions();
    let vf = jp.v as f64;
    let mut columns = vec!["t".to_string(), "reaction".to_string()];
    for k in 1..=d {
        columns.push(format!("x_{k}"));
    }
    if with_flux {
        for k in 1..=nr {
            columns.push(format!("w_{k}"));
        }
    }
    let mut counts = jp.x0.clone();
    let mut fired = vec![0u64; nr];
    let make_row = |t: f64, reaction: Option<usize>, counts: &[i64], fired: &[u64]| {
        let mut row = vec![
            Cell::Num(t),
            reaction.map_or(Cell::Null, |r| Cell::Int(r as i64)),
        ];
        row.extend(counts.iter().map(|&c| Cell::Num(c as f64 / vf)));
        if with_flux {
            row.extend(fired.iter().map(|&n| Cell::Num(n as f64 / vf)));
        }
        row
    };
    let mut rows = vec![make_row(0.0, None, &counts, &fired)];
    for (k, &t) in jp.times.iter().enumerate() {
        let r = jp.reactions[k];
        for (c, &j) in counts.iter_mut().zip(net.jump(r)) {
            *c += j;
        }
        fired[r] += 1;
        rows.push(make_row(t, Some(r), &counts, &fired));
    }
    rows.push(make_row(jp.t_end, None, &counts, &fired));
    json_table(&meta, &columns, &rows)
}

fn bool_flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------
// Subcommand runners
// ---------------------------------------------------------------------

fn run_simulate(a: &SimulateArgs, with_flux: bool, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let x0 = resolve_counts(&m, a.v, &a.x0)?;
    let mut stream = RngStream::new(a.seed);
    let jp = ssa_simulate(&m.net, a.v, &x0, a.t_max, &mut stream)?;
    let meta = vec![
        meta_pair("command", if with_flux { "flux-simulate" } else { "simulate" }),
        meta_pair("model", &m.given),
        meta_pair("v", a.v),
        meta_pair("t_max", fmt_float(a.t_max)),
        meta_pair("seed", a.seed),
        meta_pair("x0_counts", join_display(&x0, " ")),
        meta_pair("jumps", jp.n_jumps()),
    ];
    Ok(render_trajectory(&m.net, &jp, with_flux, meta, format))
}

fn run_exact(a: &ExactArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let x0 = resolve_counts(&m, a.v, &a.x0)?;
    let chain = TruncatedChain::build(&m.net, a.v, &x0, a.max_states)?;
    let dist = chain.transient_distribution(a.t, a.tol)?;
    let d = m.net.dim();
    let mut columns: Vec<String> = (1..=d).map(|k| format!("c_{k}")).collect();
    columns.push("prob".to_string());
    let column_refs: Vec<&str> = columns.iter().map(|c| c.as_str()).collect();
    let mut out = StudyResult::new("exact", &column_refs);
    out.param("model", &m.given);
    out.param("v", a.v);
    out.param("t", fmt_float(a.t));
    out.param("x0_counts", join_display(&x0, " "));
    out.param("max_states", a.max_states);
    out.param("tol", fmt_float(a.tol));
    out.param("n_states", chain.n_states());
    out.param("truncated", chain.is_truncated());
    for (state, &p) in dist.states.iter().zip(&dist.probs) {
        let mut row: Vec<f64> = state.iter().map(|&c| c as f64).collect();
        row.push(p);
        out.push_row(row);
    }
    out.set_summary("sink", dist.sink);
    out.set_summary("total_mass", dist.total_mass());
    if let Some(delta) = a.delta {
        if a.coord >= d {
            return Err(Error::Invalid(format!(
                "--coord {} out of range for dimension {d}",
                a.coord
            )));
        }
        let threshold = count_threshold(a.v, delta);
        let (p_low, p_high) = dist.event_probability(|c| c[a.coord] >= threshold);
        out.param("event", format!("c_{} >= {threshold}", a.coord + 1));
        out.set_summary("p_low", p_low);
        out.set_summary("p_high", p_high);
    }
    Ok(render_study(&out, format))
}

fn run_rate(a: &RateArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let x = parse_f64_list(&a.x, "--x")?;
    let y = parse_f64_list(&a.y, "--y")?;
    let r = lagrangian(&m.net, &x, &y, &NewtonOpts::default())?;
    let mut out = StudyResult::new("rate", &["value", "feasible", "newton_iters"]);
    out.param("model", &m.given);
    out.param("x", &a.x);
    out.param("y", &a.y);
    out.push_row(vec![
        r.value,
        bool_flag(r.feasible),
        r.newton_iters as f64,
    ]);
    if let Some(theta) = &r.theta_star {
        for (i, &th) in theta.iter().enumerate() {
            out.set_summary(&format!("theta_{}", i + 1), th);
        }
    }
    if let Some(mu) = &r.mu_star {
        for (i, &mi) in mu.iter().enumerate() {
            out.set_summary(&format!("mu_{}", i + 1), mi);
        }
    }
    Ok(render_study(&out, format))
}

fn run_action(a: &ActionArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let z = load_path(&a.path)?;
    let res = path_action(&m.net, &z, &quad_opts(a.quad_points))?;
    let mut out = StudyResult::new("action", &["segment", "action"]);
    out.param("model", &m.given);
    out.param("path", a.path.display());
    out.param("quad_points", a.quad_points);
    for (i, &s) in res.per_segment.iter().enumerate() {
        out.push_row(vec![i as f64, s]);
    }
    out.set_summary("value", res.value);
    out.set_summary("growing", bool_flag(res.growing));
    if let Some(t) = res.infeasible_at {
        out.set_summary("infeasible_at", t);
    }
    Ok(render_study(&out, format))
}

fn run_flux_action(a: &FluxActionArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let z = load_path(&a.state_path)?;
    let w = load_path(&a.flux_path)?;
    let res = flux_action(&m.net, &z, &w, &quad_opts(a.quad_points))?;
    let mut out = StudyResult::new("flux_action", &["segment", "cost"]);
    out.param("model", &m.given);
    out.param("state_path", a.state_path.display());
    out.param("flux_path", a.flux_path.display());
    out.param("quad_points", a.quad_points);
    for (i, &s) in res.per_segment.iter().enumerate() {
        out.push_row(vec![i as f64, s]);
    }
    out.set_summary("value", res.value);
    out.set_summary("growing", bool_flag(res.growing));
    if let Some(t) = res.infeasible_at {
        out.set_summary("infeasible_at", t);
    }
    Ok(render_study(&out, format))
}

fn run_fluid(a: &FluidArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let x0 = resolve_conc(&m, &a.x0)?;
    let z = fluid_limit(&m.net, &x0, a.t, a.steps, a.blow_up)?;
    let meta = vec![
        meta_pair("command", "fluid"),
        meta_pair("model", &m.given),
        meta_pair("x0", join_display(x0.iter().map(|&x| fmt_float(x)), " ")),
        meta_pair("t", fmt_float(a.t)),
        meta_pair("steps", a.steps),
    ];
    Ok(render_path(&z, meta, format))
}

fn run_shift_path(a: &ShiftArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    let z = load_path(&a.path)?;
    let (plan, shifted) = build_shifted_path(&z, &cover, a.delta)?;
    let meta = vec![
        meta_pair("command", "shift-path"),
        meta_pair("model", &m.given),
        meta_pair("delta", fmt_float(plan.delta)),
        meta_pair("xi", fmt_float(plan.xi)),
        meta_pair("beta", fmt_float(plan.beta)),
        meta_pair("t_delta", fmt_float(plan.t_delta)),
        meta_pair("delta_prime", fmt_float(plan.delta_prime)),
        meta_pair("delta_dblprime", fmt_float(plan.delta_dblprime)),
        meta_pair("total_inserted", fmt_float(plan.total_inserted)),
        meta_pair("truncated", plan.truncated),
        meta_pair("regions", join_display(plan.region_ids(), " ")),
    ];
    Ok(render_path(&shifted, meta, format))
}

fn run_verify_breakup(a: &ShiftArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    let z = load_path(&a.path)?;
    let (plan, shifted) = build_shifted_path(&z, &cover, a.delta)?;
    let report = verify_breakup(&z, &shifted, &plan, &cover)?;
    let mut out = StudyResult::new(
        "verify_breakup",
        &["region", "t_in", "t_out", "shift_len", "shifted_start"],
    );
    out.param("model", &m.given);
    out.param("path", a.path.display());
    out.param("delta", fmt_float(a.delta));
    for span in &plan.spans {
        out.push_row(vec![
            span.region as f64,
            span.t_in,
            span.t_out,
            span.shift_len,
            span.shifted_start,
        ]);
    }
    out.set_summary("t_delta", plan.t_delta);
    out.set_summary("total_inserted", plan.total_inserted);
    out.set_summary("sup_distance", report.sup_distance);
    out.set_summary("sup_bound", report.sup_bound);
    out.set_summary("min_clearance", report.min_clearance);
    out.set_summary("clearance_threshold", report.clearance_threshold);
    out.set_summary("cone_max_deviation", report.cone_max_deviation);
    out.set_summary("cone_bound", report.cone_bound);
    out.set_summary("truncated", bool_flag(report.truncated));
    if let Some(t) = report.first_violation {
        out.set_summary("first_violation", t);
    }
    out.set_verdict("sup_ok", report.sup_ok);
    out.set_verdict("clearance_ok", report.clearance_ok);
    out.set_verdict("cone_ok", report.cone_ok);
    Ok(render_study(&out, format))
}

fn run_audit_convergence(a: &ConvergenceArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let (lo, hi) = resolve_box(&m, &a.lo, &a.hi)?;
    let vs = parse_u64_list(&a.v, "--v")?;
    let report = audit_rate_convergence(&m.net, &lo, &hi, a.per_axis, &vs)?;
    let mut columns = vec!["v".to_string(), "sup_gap".to_string()];
    for k in 1..=m.net.dim() {
        columns.push(format!("witness_{k}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(|c| c.as_str()).collect();
    let mut out = StudyResult::new("audit_convergence", &column_refs);
    out.param("model", &m.given);
    out.param("lo", join_display(lo.iter().map(|&x| fmt_float(x)), " "));
    out.param("hi", join_display(hi.iter().map(|&x| fmt_float(x)), " "));
    out.param("per_axis", a.per_axis);
    for row in &report.rows {
        let mut cells = vec![row.v as f64, row.sup_gap];
        cells.extend(row.witness.iter().copied());
        out.push_row(cells);
    }
    out.set_verdict("gaps_decrease", report.passed);
    Ok(render_study(&out, format))
}

fn run_audit_aleph(a: &AlephArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let (lo, hi) = resolve_box(&m, &a.lo, &a.hi)?;
    let report = audit_aleph(&m.net, &lo, &hi, a.per_axis, a.v)?;
    let mut out = StudyResult::new("audit_aleph", &["v", "min_ratio"]);
    out.param("model", &m.given);
    out.param("lo", join_display(lo.iter().map(|&x| fmt_float(x)), " "));
    out.param("hi", join_display(hi.iter().map(|&x| fmt_float(x)), " "));
    out.param("per_axis", a.per_axis);
    if let Some(w) = &report.witness {
        out.param("witness_reaction", w.reaction);
        out.param("witness_counts", join_display(&w.counts, " "));
    }
    out.push_row(vec![report.v as f64, report.min_ratio]);
    Ok(render_study(&out, format))
}

fn run_audit_decay(a: &DecayArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    check_region(&cover, a.region)?;
    let rho = parse_f64_list(&a.rho, "--rho")?;
    let alphas = parse_f64_list(&a.alphas, "--alphas")?;
    let report = decay_exponent(&m.net, a.reaction, cover.region(a.region), &rho, &alphas)?;
    let mut columns = vec![
        "rho".to_string(),
        "inf_log_rate".to_string(),
        "samples".to_string(),
    ];
    for &alpha in &alphas {
        columns.push(format!("scaled_alpha_{alpha}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(|c| c.as_str()).collect();
    let mut out = StudyResult::new("audit_decay", &column_refs);
    out.param("model", &m.given);
    out.param("region", a.region);
    out.param("reaction", a.reaction);
    out.param("hit_zero_rate", report.hit_minus_infinity);
    for (i, rung) in report.rungs.iter().enumerate() {
        let mut row = vec![rung.rho, rung.inf_log_rate, rung.samples as f64];
        for exp in &report.exponents {
            row.push(exp.values[i]);
        }
        out.push_row(row);
    }
    for exp in &report.exponents {
        out.set_summary(&format!("holds_alpha_{}", exp.alpha), bool_flag(exp.holds));
    }
    if report.fitted_alpha.is_finite() {
        out.set_summary("fitted_alpha", report.fitted_alpha);
    }
    Ok(render_study(&out, format))
}

fn run_audit_fast(a: &FastArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    check_region(&cover, a.region)?;
    let rho = parse_f64_list(&a.rho, "--rho")?;
    let report = fast_set(&m.net, cover.region(a.region), &rho)?;
    let mut out = StudyResult::new("audit_fast", &["reaction", "rho", "scaled_sup_log"]);
    out.param("model", &m.given);
    out.param("region", a.region);
    out.param("fast_set", join_display(report.fast_indices(), " "));
    for (r, rungs) in report.rungs.iter().enumerate() {
        for &(rho, scaled) in rungs {
            out.push_row(vec![r as f64, rho, scaled]);
        }
    }
    for (r, &is_fast) in report.fast.iter().enumerate() {
        out.set_summary(&format!("fast_{r}"), bool_flag(is_fast));
        out.set_summary(&format!("limit_{r}"), report.limits[r]);
    }
    Ok(render_study(&out, format))
}

fn run_audit_cone(a: &ConeArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    check_region(&cover, a.region)?;
    let x = parse_f64_list(&a.x, "--x")?;
    let fast = match &a.fast {
        Some(s) => parse_usize_list(s, "--fast")?,
        None => {
            let rho = parse_f64_list(&a.rho, "--rho")?;
            fast_set(&m.net, cover.region(a.region), &rho)?.fast_indices()
        }
    };
    let report = cone_obstruction(&m.net, cover.region(a.region), &x, &fast)?;
    let mut out = StudyResult::new(
        "audit_cone",
        &["facet", "best_inward", "best_reaction", "obstructed"],
    );
    out.param("model", &m.given);
    out.param("region", a.region);
    out.param("x", &a.x);
    out.param("fast", join_display(&fast, " "));
    out.param("slow", join_display(&report.slow, " "));
    for facet in &report.facets {
        out.push_row(vec![
            facet.facet as f64,
            facet.best_inward,
            facet.best_reaction.map_or(-1.0, |r| r as f64),
            bool_flag(facet.obstructed),
        ]);
    }
    out.set_summary("obstructed", bool_flag(report.obstructed));
    Ok(render_study(&out, format))
}

fn run_audit_escape_seq(a: &EscapeSeqArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    check_region(&cover, a.region)?;
    let vs = parse_u64_list(&a.v, "--v")?;
    let rule = count_rule(&m, &a.x0)?;
    let x0_ladder: Vec<Vec<i64>> = vs.iter().map(|&v| rule(v)).collect();
    let report = escape_sequence_audit(&m.net, &cover, a.region, &vs, &x0_ladder)?;
    let mut out = StudyResult::new("audit_escape_seq", &["v", "prefix_max"]);
    out.param("model", &m.given);
    out.param("region", a.region);
    out.param(
        "sequence",
        join_display(&cover.region(a.region).escape, " "),
    );
    for rung in &report.prefix_rungs {
        out.push_row(vec![rung.v as f64, rung.max]);
    }
    for ladder in &report.integral_ladders {
        let (_, sup) = *ladder
            .rungs
            .last()
            .expect("integral ladders carry at least one rung");
        out.set_summary(&format!("integral_sup_r{}", ladder.reaction), sup);
        out.set_summary(
            &format!("integral_divergent_r{}", ladder.reaction),
            bool_flag(ladder.divergent),
        );
    }
    out.set_verdict("prefix_vanishing", report.prefix_vanishing);
    out.set_verdict("integrals_vanishing", report.integrals_vanishing);
    out.set_verdict("monotonicity", report.monotonicity.passed);
    Ok(render_study(&out, format))
}

fn run_study_marginal(a: &MarginalArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    if a.coord >= m.net.dim() {
        return Err(Error::Invalid(format!(
            "--coord {} out of range for dimension {}",
            a.coord,
            m.net.dim()
        )));
    }
    if !(a.delta > 0.0 && a.delta.is_finite()) {
        return Err(Error::Invalid(format!(
            "--delta must be positive, got {}",
            a.delta
        )));
    }
    let vs = parse_u64_list(&a.v, "--v")?;
    let rule = count_rule(&m, &a.x0)?;
    let event = threshold_event(a.coord, a.delta);
    let mode = match a.mode {
        MarginalModeArg::Exact => MarginalMode::Exact {
            max_states: a.max_states,
            tol: a.tol,
        },
        MarginalModeArg::Mc => MarginalMode::Mc {
            trials: a.trials,
            seed: a.seed,
        },
    };
    let mut out = ldp_marginal_study(&m.net, rule.as_ref(), &event, a.t, &vs, &mode)?;
    out.param("model", &m.given);
    out.param("coord", a.coord);
    out.param("delta", fmt_float(a.delta));
    Ok(render_study(&out, format))
}

fn run_study_minimize(a: &MinimizeArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let x0 = resolve_conc(&m, &a.x0)?;
    let target = parse_f64_list(&a.target, "--target")?;
    let opts = MinimizeOpts {
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        newton: NewtonOpts::default(),
    };
    let report = minimize_endpoint_action(&m.net, &x0, &target, a.t, a.grid, &opts)?;
    let mut out = StudyResult::new("minimize", &["grid", "value"]);
    out.param("model", &m.given);
    out.param("x0", join_display(x0.iter().map(|&x| fmt_float(x)), " "));
    out.param(
        "target",
        join_display(target.iter().map(|&x| fmt_float(x)), " "),
    );
    out.param("t", fmt_float(a.t));
    out.param("grid", a.grid);
    out.param("max_iters", a.max_iters);
    out.param("grad_tol", fmt_float(a.grad_tol));
    for (&g, &val) in report.level_grids.iter().zip(&report.level_values) {
        out.push_row(vec![g as f64, val]);
    }
    out.set_summary("value", report.value);
    out.set_summary("iterations", report.iterations as f64);
    out.set_summary("divergent", bool_flag(report.divergent));
    out.set_verdict("converged", report.converged);
    if let Some(path) = &a.path_out {
        fs::write(path, report.path.to_csv())
            .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(render_study(&out, format))
}

fn run_study_diverge(a: &DivergeArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let z = load_path(&a.path)?;
    let eps = parse_f64_list(&a.eps, "--eps")?;
    let mut out = divergence_probe(&m.net, &z, &eps, a.k_scale, &quad_opts(a.quad_points))?;
    out.param("model", &m.given);
    out.param("path", a.path.display());
    Ok(render_study(&out, format))
}

fn run_study_escape_event(a: &EscapeEventArgs, format: Format) -> Result<String> {
    let m = load_model(&a.model)?;
    let cover = resolve_cover(&m, &a.cover)?;
    check_region(&cover, a.region)?;
    let vs = parse_u64_list(&a.v, "--v")?;
    let rule = count_rule(&m, &a.x0)?;
    let mut out = escape_event_study(
        &m.net,
        &cover,
        a.region,
        rule.as_ref(),
        &vs,
        a.delta,
        a.trials,
        a.seed,
        &quad_opts(a.quad_points),
    )?;
    out.param("model", &m.given);
    Ok(render_study(&out, format))
}

fn run_list_models(format: Format) -> Result<String> {
    let mut rows = Vec::with_capacity(BUILTIN_IDS.len());
    for id in BUILTIN_IDS {
        let b = builtin(id)?;
        rows.push((
            id,
            b.net.species().to_vec(),
            b.net.n_reactions(),
            b.cover.regions().len(),
        ));
    }
    match format {
        Format::Csv => {
            let mut out = String::from("id,species,reactions,regions\n");
            for (id, species, reactions, regions) in rows {
                out.push_str(&format!(
                    "{id},{},{reactions},{regions}\n",
                    species.join(" ")
                ));
            }
            Ok(out)
        }
        Format::Json => {
            let mut out = String::from("{\"models\":[");
            for (i, (id, species, reactions, regions)) in rows.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"id\":{},\"species\":[{}],\"reactions\":{reactions},\"regions\":{regions}}}",
                    json_escape(id),
                    species
                        .iter()
                        .map(|s| json_escape(s))
                        .collect::<Vec<_>>()
                        .join(",")
                ));
            }
            out.push_str("]}");
            Ok(out)
        }
    }
}
