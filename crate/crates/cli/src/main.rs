use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use codesign::codesign::{energy_frontier, frontier_csv, select_optimum, sweep, sweep_csv, Criterion, SweepOptions};
use codesign::discretize::discretize;
use codesign::exec::ExecMode;
use codesign::lqg::riccati_finite;
use codesign::model::{load_design, load_plant, load_topology, NetworkTopology};
use codesign::netdp::{solve_constrained, PolicyFile};
use codesign::simulate::{simulate_closed_loop, LossModel, SimulationOptions};
use log::info;
use serde_json::json;

/// Version of the JSON and CSV layouts written by this tool.
const SCHEMA_VERSION: u32 = 1;

const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)");

#[derive(Parser)]
#[command(name = "codesign", version = LONG_VERSION, about = "Network scheduling and LQG co-design for wireless control loops")]
struct Cli {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the maximum-reliability forwarding policy.
    Schedule(ScheduleArgs),
    /// Evaluate every point of the design grid.
    Sweep(SweepArgs),
    /// Monte Carlo simulation of one design point.
    Simulate(SimulateArgs),
    /// Optimal loss bound for a range of energy rates.
    Frontier(FrontierArgs),
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    deadline_slots: usize,
    /// Expected transmissions allowed per packet.
    #[arg(long, conflicts_with = "unconstrained", required_unless_present = "unconstrained")]
    c_req: Option<f64>,
    #[arg(long)]
    unconstrained: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    design: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Add Monte Carlo estimates for each converged point.
    #[arg(long)]
    simulate: bool,
    /// Overrides the seed from the design file.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the replicate count from the design file.
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Slot,
    Bernoulli,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    h_ms: f64,
    /// Defaults to the sampling interval.
    #[arg(long)]
    tau_ms: Option<f64>,
    #[arg(long, default_value_t = 500.0)]
    horizon_s: f64,
    /// Energy rate in transmissions per ms; omitted means unconstrained.
    #[arg(long)]
    epsilon_per_ms: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "slot")]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    /// Also write a CSV report.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include one row per replicate in the reports.
    #[arg(long)]
    per_replicate: bool,
}

#[derive(Args)]
struct FrontierArgs {
    #[arg(long)]
    plant: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    design: PathBuf,
    /// Comma-separated energy rates in transmissions per ms; `inf` allowed.
    #[arg(long)]
    epsilon_grid: String,
    #[arg(long)]
    out: PathBuf,
}

fn write_output(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn exec_mode(threads: Option<usize>) -> ExecMode {
    if threads == Some(1) {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn schedule(args: ScheduleArgs) -> anyhow::Result<()> {
    let topology = load_topology(&args.topology)?;
    let c_req = if args.unconstrained { f64::INFINITY } else { args.c_req.unwrap_or(f64::INFINITY) };
    let policy = solve_constrained(&topology, topology.source(), args.deadline_slots, c_req)?;
    let file = PolicyFile::from_policy(&policy, topology.source());
    write_output(&args.out, &(file.to_json_string() + "\n"))?;
    let summary = json!({
        "rho_star": policy.reliability,
        "C1": policy.pi1.energy,
        "C2": policy.pi2.energy,
        "theta1": policy.theta1,
        "theta2": policy.theta2,
        "delta_star": policy.delta_star,
    });
    println!("{summary}");
    Ok(())
}

fn run_sweep(args: SweepArgs, exec: ExecMode) -> anyhow::Result<()> {
    let plant = load_plant(&args.plant)?;
    let topology = load_topology(&args.topology)?;
    let mut config = load_design(&args.design)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(r) = args.replicates {
        config.mc_replicates = r;
    }
    config.validate()?;
    let points = sweep(
        &plant,
        &topology,
        &config,
        SweepOptions {
            simulate: args.simulate,
            exec,
        },
    )?;
    write_output(&args.out, &sweep_csv(&points))?;
    match select_optimum(&points, Criterion::JMax) {
        Ok(p) => info!("optimum h = {} ms, tau = {} ms, J_max = {}", p.h_ms, p.tau_ms, p.j_max),
        Err(e) => info!("{e}"),
    }
    Ok(())
}

fn simulate(args: SimulateArgs, exec: ExecMode) -> anyhow::Result<()> {
    let plant = load_plant(&args.plant)?;
    plant.validate()?;
    let topology: NetworkTopology = load_topology(&args.topology)?;
    let tau_ms = args.tau_ms.unwrap_or(args.h_ms);
    if !(args.h_ms > 0.0 && tau_ms > 0.0 && tau_ms <= args.h_ms) {
        bail!(codesign::Error::InvalidArgument(format!(
            "need 0 < tau <= h, got h = {} ms, tau = {tau_ms} ms",
            args.h_ms
        )));
    }
    let d = codesign::codesign::deadline_slots(tau_ms, topology.slot_ms());
    let c_req = args.epsilon_per_ms.map_or(f64::INFINITY, |e| e * args.h_ms);
    let policy = solve_constrained(&topology, topology.source(), d, c_req)?;
    let dp = discretize(&plant, args.h_ms * 1e-3, tau_ms * 1e-3, args.horizon_s)?;
    let gains = riccati_finite(&dp, dp.n_steps)?;
    let loss = match args.mode {
        Mode::Slot => LossModel::SlotLevel {
            policy: &policy,
            topology: &topology,
        },
        Mode::Bernoulli => LossModel::Bernoulli { rho: policy.reliability },
    };
    let options = SimulationOptions {
        replicates: args.replicates,
        seed: args.seed,
        exec,
        keep_replicates: args.per_replicate,
    };
    let report = simulate_closed_loop(&plant, &dp, &gains, loss, options)?;
    write_output(&args.out, &(report.to_json_string() + "\n"))?;
    if let Some(csv) = &args.csv {
        write_output(csv, &report.to_csv_string())?;
    }
    info!(
        "J = {} +- {} per step, rho = {}",
        report.j_empirical_mean, report.j_empirical_stderr, report.rho_empirical
    );
    Ok(())
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| codesign::Error::InvalidArgument(format!("bad energy rate {t:?}")).into())
        })
        .collect()
}

fn frontier(args: FrontierArgs, exec: ExecMode) -> anyhow::Result<()> {
    let plant = load_plant(&args.plant)?;
    let topology = load_topology(&args.topology)?;
    let config = load_design(&args.design)?;
    let grid = parse_grid(&args.epsilon_grid)?;
    if grid.is_empty() {
        bail!(codesign::Error::InvalidArgument("energy grid is empty".into()));
    }
    let rows = energy_frontier(&plant, &topology, &config, &grid, exec)?;
    let rows: Vec<_> = rows.into_iter().map(|(r, _)| r).collect();
    write_output(&args.out, &frontier_csv(&rows))?;
    Ok(())
}

/// Exit status 2 for unusable input, 1 for any other failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    use codesign::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Io { .. } | E::Parse { .. } | E::Validation { .. } | E::Dimension(_) | E::InvalidArgument(_)) => 2,
        Some(E::InstanceTooLarge(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let exec = exec_mode(cli.threads);
    info!("schema version {SCHEMA_VERSION}");
    let result = match cli.command {
        Command::Schedule(a) => schedule(a),
        Command::Sweep(a) => run_sweep(a, exec),
        Command::Simulate(a) => simulate(a, exec),
        Command::Frontier(a) => frontier(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Core errors already carry their cause in the message.
            if e.downcast_ref::<codesign::Error>().is_some() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
