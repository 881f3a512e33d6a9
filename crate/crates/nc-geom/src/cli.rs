//! Command-line front end: thin adapters from flags to the library calls,
//! JSON in and out for machine use, six significant digits for humans.
//!
//! Exit codes: 0 success, 2 for usage problems (bad flags, malformed or
//! invalid config), 1 for runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::bounds;
use crate::coding::{max_coding_number, max_coding_number_budgeted, CodingResult};
use crate::error::{Error, Result};
use crate::experiments::{run_experiment, ExperimentConfig};
use crate::geometry::Radius;
use crate::rates::RateSpec;
use crate::scheduler::{self, CombineCap};
use crate::topology::{
    gen_cyclic_grid, gen_poisson, gen_square_grid, gen_uniform, square_pitch_for_count, Cell,
    GridSpec, RandomSpec,
};

#[derive(Parser)]
#[command(
    name = "nc-geom",
    version,
    about = "Geometry of relay-coded exchanges in a circular cell",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a cell layout (grid or random) and print or dump it
    Gen(GenArgs),
    /// Compute the maximum coding number of a cell and its witness
    Analyze(AnalyzeArgs),
    /// Evaluate the closed-form bounds at given parameters
    Bounds(BoundsArgs),
    /// Evaluate relaying rates and coding gains for a rate vector
    Rates(RatesArgs),
    /// Partition random exchange traffic into coded groups
    Schedule(ScheduleArgs),
    /// Run a reproducible batch experiment to CSV
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Layout family: square, cyclic, uniform or poisson
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Grid pitch (square and cyclic layouts)
    #[arg(long)]
    d: Option<f64>,
    /// Node-count target: lattice points for square grids, drawn nodes for
    /// uniform layouts
    #[arg(long)]
    n: Option<u64>,
    /// Mean node density per unit area (poisson layouts)
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the layout as topology JSON instead of a summary
    #[arg(long)]
    dump_topology: bool,
    /// Write the topology JSON to a file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Read the cell from a topology JSON file
    #[arg(long, conflicts_with_all = ["grid", "n", "d"])]
    topology: Option<PathBuf>,
    /// Build a grid cell in place: square or cyclic
    #[arg(long)]
    grid: Option<String>,
    /// Lattice-point target for a square grid (picks the pitch)
    #[arg(long)]
    n: Option<u64>,
    /// Explicit grid pitch
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Cap the search at this many explored nodes; result may be a lower
    /// bound and is flagged when truncated
    #[arg(long)]
    budget: Option<u64>,
    /// Write the witness JSON to a file
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Print the result as JSON instead of a summary
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Node separation; enables the separation-based bounds
    #[arg(long)]
    d: Option<f64>,
    /// Node count; enables the grid bound and the density curve
    #[arg(long)]
    n: Option<u64>,
    /// Ring index; prints the supported count of that grid ring
    #[arg(long)]
    ring: Option<u64>,
    /// Exponent offset for the density scaling curve
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RatesArgs {
    /// Per-flow rates, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    packet_size: f64,
    /// Combination cap for the capped rate and gain
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Number of source/destination pairs to draw
    #[arg(long)]
    pairs: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Combination cap: a positive integer or "inf"
    #[arg(long, default_value = "inf", value_parser = parse_cap)]
    cap: CombineCap,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config JSON; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<u64>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Combination caps, comma separated; integers or "inf"
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<String>>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Allow budgeted searches beyond the exact-search node cap
    #[arg(long)]
    best_effort: bool,
    #[arg(long)]
    search_node_budget: Option<u64>,
    /// Pitches for the bounds table, comma separated
    #[arg(long, value_delimiter = ',')]
    d_values: Option<Vec<f64>>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write CSV here (and a .meta.json sidecar); default is stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_cap(s: &str) -> std::result::Result<CombineCap, String> {
    if s == "inf" {
        return Ok(CombineCap::Unbounded);
    }
    let m: usize = s.parse().map_err(|_| format!("expected a positive integer or \"inf\", got {s:?}"))?;
    CombineCap::bounded(m).map_err(|e| e.to_string())
}

/// Six significant digits for human-facing numbers; data outputs keep full
/// precision.
fn sig6(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::BadRadius(_)
            | Error::BadSeparation(_)
            | Error::UnattainableGridCount { .. }
            | Error::GridKindMismatch { .. }
            | Error::RandomKindMismatch { .. }
            | Error::EmptyRates
            | Error::BadRate(_)
            | Error::BadPacketSize(_)
            | Error::BadCap
            | Error::Config(_)
            | Error::Json(_)
            | Error::ExactSearchCap { .. }
    )
}

pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, u8::MAX as i32) as u8);
        }
    };

    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }

    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Rates(args) => cmd_rates(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Experiment(args) => cmd_experiment(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failed(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}

/// NC_GEOM_THREADS caps the worker pool; unset means one thread per core.
fn init_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("NC_GEOM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| format!("NC_GEOM_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

enum CmdError {
    Usage(String),
    Failed(Error),
}
use CmdError::{Failed, Usage};

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        Failed(e)
    }
}

type CmdResult = std::result::Result<(), CmdError>;

fn emit(text: String, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let radius = Radius::new(args.radius)?;
    let (cell, desc) = match args.kind.as_str() {
        "square" => {
            let d = match (args.d, args.n) {
                (Some(d), None) => d,
                (None, Some(n)) => square_pitch_for_count(n as usize, radius)?.canonical,
                _ => return Err(Usage("square grids take exactly one of --d, --n".into())),
            };
            let cell = gen_square_grid(&GridSpec::square(d)?, radius)?;
            (cell, format!("square grid, pitch {}", sig6(d)))
        }
        "cyclic" => {
            let d = args.d.ok_or_else(|| Usage("cyclic grids need --d".into()))?;
            let cell = gen_cyclic_grid(&GridSpec::cyclic(d)?, radius)?;
            (cell, format!("cyclic grid, pitch {}", sig6(d)))
        }
        "uniform" => {
            let n = args.n.ok_or_else(|| Usage("uniform layouts need --n".into()))?;
            let spec = RandomSpec::UniformCount { count: n as usize, seed: args.seed };
            (gen_uniform(&spec, radius)?, format!("uniform layout, seed {}", args.seed))
        }
        "poisson" => {
            let density =
                args.density.ok_or_else(|| Usage("poisson layouts need --density".into()))?;
            let spec = RandomSpec::Poisson { density, seed: args.seed };
            (gen_poisson(&spec, radius)?, format!("poisson layout, seed {}", args.seed))
        }
        other => {
            return Err(Usage(format!(
                "unknown kind {other:?}; expected square, cyclic, uniform or poisson"
            )))
        }
    };

    if args.dump_topology || args.out.is_some() {
        let json = serde_json::to_string_pretty(&cell).map_err(Error::from)?;
        emit(format!("{json}\n"), &args.out)?;
        if let (Some(path), false) = (&args.out, args.dump_topology) {
            eprintln!("wrote {} nodes to {}", cell.len(), path.display());
        }
    } else {
        println!("{desc}: {} nodes, radius {}", cell.len(), sig6(radius.get()));
    }
    Ok(())
}

fn load_cell(path: &Path) -> Result<Cell> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn print_witness(result: &CodingResult, truncated: bool) {
    if truncated {
        println!("search truncated by budget; value is a lower bound");
    }
    println!("c_max = {}", result.max_number);
    if result.max_number > 0 {
        let nodes: Vec<String> = result.nodes.iter().map(|n| n.to_string()).collect();
        let flows: Vec<String> = result.flows.iter().map(|f| f.to_string()).collect();
        println!("witness nodes: {}", nodes.join(", "));
        println!("witness flows: {}", flows.join(", "));
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let radius = Radius::new(args.radius)?;
    let cell = match (&args.topology, args.grid.as_deref()) {
        (Some(path), None) => load_cell(path)?,
        (None, Some("square")) => {
            let d = match (args.d, args.n) {
                (Some(d), None) => d,
                (None, Some(n)) => square_pitch_for_count(n as usize, radius)?.canonical,
                _ => return Err(Usage("square grids take exactly one of --d, --n".into())),
            };
            gen_square_grid(&GridSpec::square(d)?, radius)?
        }
        (None, Some("cyclic")) => {
            let d = args.d.ok_or_else(|| Usage("cyclic grids need --d".into()))?;
            gen_cyclic_grid(&GridSpec::cyclic(d)?, radius)?
        }
        (None, Some(other)) => {
            return Err(Usage(format!("unknown grid {other:?}; expected square or cyclic")))
        }
        _ => return Err(Usage("pass exactly one of --topology, --grid".into())),
    };

    let (result, truncated) = match args.budget {
        Some(budget) => {
            let out = max_coding_number_budgeted(&cell, budget);
            (out.result, out.truncated)
        }
        None => (max_coding_number(&cell), false),
    };

    if let Some(path) = &args.witness {
        let json = serde_json::to_string_pretty(&result).map_err(Error::from)?;
        std::fs::write(path, format!("{json}\n")).map_err(Error::from)?;
    }
    if args.json {
        let json = serde_json::to_string(&result).map_err(Error::from)?;
        println!("{json}");
    } else {
        print_witness(&result, truncated);
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> CmdResult {
    if args.d.is_none() && args.n.is_none() && args.ring.is_none() {
        return Err(Usage("nothing to evaluate; pass --d, --n or --ring".into()));
    }
    let radius = Radius::new(args.radius)?;
    if let Some(d) = args.d {
        if !(d.is_finite() && d > 0.0) {
            return Err(Failed(Error::BadSeparation(d)));
        }
    }

    let mut table: Vec<(String, serde_json::Value)> = Vec::new();
    let num = |table: &mut Vec<(String, serde_json::Value)>, k: &str, v: f64| {
        table.push((k.to_string(), serde_json::json!(v)));
    };

    if let Some(d) = args.d {
        num(&mut table, "ub_fixed_separation", bounds::ub_fixed_separation(radius, d));
        match bounds::lb_cyclic_case1(radius, d) {
            Ok(c) => num(&mut table, "lb_cyclic_case1", c as f64),
            Err(e) => table.push(("lb_cyclic_case1".into(), serde_json::json!(e.to_string()))),
        }
        match bounds::lb_cyclic_case2(radius, d) {
            Ok(c) => num(&mut table, "lb_cyclic_case2", c as f64),
            Err(e) => table.push(("lb_cyclic_case2".into(), serde_json::json!(e.to_string()))),
        }
        match bounds::lb_square_grid(radius, d) {
            Ok(g) => {
                num(&mut table, "lb_square_delta", g.delta);
                num(&mut table, "lb_square_phi", g.phi);
                num(&mut table, "lb_square_omega", g.omega);
                num(&mut table, "lb_square_count", g.count as f64);
            }
            Err(e) => table.push(("lb_square_grid".into(), serde_json::json!(e.to_string()))),
        }
    }
    if let Some(n) = args.n {
        num(&mut table, "ub_square_grid", bounds::ub_square_grid(n as usize));
        let lambda = n as f64 / (std::f64::consts::PI * radius.get() * radius.get());
        num(&mut table, "stochastic_curve", bounds::stochastic_ub_curve(lambda, args.epsilon));
    }
    if let Some(i) = args.ring {
        if i == 0 {
            return Err(Usage("--ring must be at least 1".into()));
        }
        num(&mut table, "cyclic_ring_count", bounds::cyclic_ring_count(i) as f64);
    }

    if args.json {
        let obj: serde_json::Map<String, serde_json::Value> = table.into_iter().collect();
        println!("{}", serde_json::Value::Object(obj));
    } else {
        for (k, v) in table {
            match v.as_f64() {
                Some(x) => println!("{k} = {}", sig6(x)),
                None => println!("{k}: {}", v.as_str().unwrap_or("unavailable")),
            }
        }
    }
    Ok(())
}

fn cmd_rates(args: RatesArgs) -> CmdResult {
    let spec = RateSpec::new(args.rates, args.packet_size)?;
    if let Some(m) = args.m {
        if m == 0 {
            return Err(Usage("--m must be at least 1".into()));
        }
    }

    let mut table = vec![
        ("rate_without".to_string(), spec.rate_without()),
        ("rate_nc".to_string(), spec.rate_nc()),
        ("gain".to_string(), spec.gain()),
    ];
    if let Some(m) = args.m {
        table.push((format!("rate_m_{m}"), spec.rate_m(m)));
        table.push((format!("gain_m_{m}"), spec.gain_m(m)));
    }

    if args.json {
        let obj: serde_json::Map<String, serde_json::Value> =
            table.into_iter().map(|(k, v)| (k, serde_json::json!(v))).collect();
        println!("{}", serde_json::Value::Object(obj));
    } else {
        println!("flows: {}, packet size {}", spec.flow_count(), sig6(spec.packet_size()));
        for (k, v) in table {
            println!("{k} = {}", sig6(v));
        }
    }
    Ok(())
}

fn cmd_schedule(args: ScheduleArgs) -> CmdResult {
    if args.pairs == 0 {
        return Err(Usage("--pairs must be at least 1".into()));
    }
    let radius = Radius::new(args.radius)?;
    let schedule = scheduler::run_realistic(args.pairs, radius, args.cap, args.seed)?;

    if args.json {
        println!("{}", serde_json::to_string(&schedule).map_err(Error::from)?);
    } else {
        println!(
            "{} pairs, cap {}: {} coded groups",
            args.pairs,
            args.cap,
            schedule.groups.len()
        );
        for (i, group) in schedule.groups.iter().enumerate() {
            let ids: Vec<String> = group.iter().map(|id| id.to_string()).collect();
            println!("  group {i}: packets {}", ids.join(", "));
        }
        println!("slots without coding = {}", schedule.slots_without_nc);
        println!("slots with coding    = {}", schedule.slots_with_nc);
        println!("gain = {}", sig6(schedule.gain));
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> CmdResult {
    let mut merged = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
            match value {
                serde_json::Value::Object(map) => map,
                _ => return Err(Usage("config file must hold a JSON object".into())),
            }
        }
        None => serde_json::Map::new(),
    };

    // flags win over config fields
    let mut set = |key: &str, value: serde_json::Value| {
        merged.insert(key.to_string(), value);
    };
    if let Some(v) = &args.experiment {
        set("experiment", serde_json::json!(v));
    }
    if let Some(v) = &args.n_values {
        set("n_values", serde_json::json!(v));
    }
    if let Some(v) = args.trials {
        set("trials", serde_json::json!(v));
    }
    if let Some(v) = args.radius {
        set("radius", serde_json::json!(v));
    }
    if let Some(v) = &args.m_values {
        let caps: Vec<serde_json::Value> = v
            .iter()
            .map(|s| match s.parse::<u64>() {
                Ok(m) => serde_json::json!(m),
                Err(_) => serde_json::json!(s),
            })
            .collect();
        set("m_values", serde_json::Value::Array(caps));
    }
    if let Some(v) = args.base_seed {
        set("base_seed", serde_json::json!(v));
    }
    if args.best_effort {
        set("best_effort", serde_json::json!(true));
    }
    if let Some(v) = args.search_node_budget {
        set("search_node_budget", serde_json::json!(v));
    }
    if let Some(v) = &args.d_values {
        set("d_values", serde_json::json!(v));
    }
    if let Some(v) = args.epsilon {
        set("epsilon", serde_json::json!(v));
    }

    let text = serde_json::Value::Object(merged).to_string();
    let cfg = ExperimentConfig::from_json(&text)?;
    let result = run_experiment(&cfg)?;

    match &args.out {
        Some(path) => {
            result.write_csv(path)?;
            result.write_metadata(path)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
        }
        None => print!("{}", result.to_csv()),
    }
    Ok(())
}
