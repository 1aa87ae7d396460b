//! Two-stage design over a grid of sampling intervals and lags.
//!
//! At each grid point the network is scheduled for maximum on-time
//! reliability under the per-packet transmission budget, and the control
//! loss bounds are evaluated at that reliability. All costs reported here
//! are per second of plant time.

use serde::Serialize;

use crate::discretize::{discretize, DiscretePlant};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, map_slice, ExecMode};
use crate::lqg::{cost_bounds, covariance_bounds, riccati_control, riccati_finite, ControllerGains};
use crate::model::{ContinuousPlant, DesignConfig, NetworkTopology};
use crate::netdp::{solve_constrained, RandomizedPolicy};
use crate::simulate::{simulate_closed_loop, LossModel, SimulationOptions};

/// Simulation length used when the loss horizon is infinite.
pub const DEFAULT_SIMULATION_HORIZON_S: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    Diverged,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub h_ms: f64,
    pub tau_ms: f64,
    pub d_slots: usize,
    /// `epsilon * h`, or infinity when unconstrained.
    pub c_req: f64,
    pub rho_star: f64,
    pub policy: RandomizedPolicy,
    pub j_min: f64,
    pub j_max: f64,
    pub j_mc: Option<McEstimate>,
    pub status: Status,
}

/// Loss bounds per second at one reliability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopBounds {
    pub j_min: f64,
    pub j_max: f64,
    pub converged: bool,
}

/// Steady-state loss bounds for `dp` when packets arrive with probability
/// `rho`, scaled to cost per second.
pub fn loop_bounds(plant: &ContinuousPlant, dp: &DiscretePlant, gains: &ControllerGains, rho: f64) -> LoopBounds {
    let b = match covariance_bounds(dp, &plant.sigma0, rho) {
        Ok(b) => b,
        Err(_) => {
            return LoopBounds {
                j_min: f64::INFINITY,
                j_max: f64::INFINITY,
                converged: false,
            }
        }
    };
    let c = cost_bounds(dp, gains, &b, rho);
    LoopBounds {
        j_min: c.j_min / dp.h_s,
        j_max: c.j_max / dp.h_s,
        converged: b.converged && c.j_max.is_finite(),
    }
}

/// Deadline in slots that fits inside a lag of `tau_ms`.
pub fn deadline_slots(tau_ms: f64, slot_ms: f64) -> usize {
    (tau_ms / slot_ms + 1e-9).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub simulate: bool,
    pub exec: ExecMode,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            simulate: false,
            exec: ExecMode::Parallel,
        }
    }
}

fn diverged(point: &mut DesignPoint) {
    point.status = Status::Diverged;
    point.j_min = f64::INFINITY;
    point.j_max = f64::INFINITY;
}

fn evaluate_point(
    plant: &ContinuousPlant,
    topology: &NetworkTopology,
    config: &DesignConfig,
    h_ms: f64,
    tau_ms: f64,
    options: SweepOptions,
) -> Result<DesignPoint> {
    let d = deadline_slots(tau_ms, topology.slot_ms());
    let c_req = config.epsilon_per_ms.map_or(f64::INFINITY, |eps| eps * h_ms);
    let policy = solve_constrained(topology, topology.source(), d, c_req)?;
    let mut point = DesignPoint {
        h_ms,
        tau_ms,
        d_slots: d,
        c_req,
        rho_star: policy.reliability,
        policy,
        j_min: f64::INFINITY,
        j_max: f64::INFINITY,
        j_mc: None,
        status: Status::Converged,
    };
    let horizon = config.horizon.simulation_seconds(DEFAULT_SIMULATION_HORIZON_S).max(h_ms * 1e-3);
    let dp = discretize(plant, h_ms * 1e-3, tau_ms * 1e-3, horizon)?;
    let Ok(gains) = riccati_control(&dp) else {
        diverged(&mut point);
        return Ok(point);
    };
    let b = loop_bounds(plant, &dp, &gains, point.rho_star);
    point.j_min = b.j_min;
    point.j_max = b.j_max;
    if !b.converged {
        diverged(&mut point);
        return Ok(point);
    }
    if options.simulate {
        let finite = riccati_finite(&dp, dp.n_steps)?;
        let sim = SimulationOptions {
            replicates: config.mc_replicates,
            seed: config.seed,
            exec: options.exec,
            keep_replicates: false,
        };
        let loss = LossModel::SlotLevel {
            policy: &point.policy,
            topology,
        };
        let report = simulate_closed_loop(plant, &dp, &finite, loss, sim)?;
        point.j_mc = Some(McEstimate {
            mean: report.j_empirical_mean / dp.h_s,
            stderr: report.j_empirical_stderr / dp.h_s,
        });
    }
    Ok(point)
}

/// Evaluates every `(h, tau)` point of `config`, ordered by `h` then `tau`.
///
/// A point whose bounds do not exist is reported as diverged rather than
/// failing the sweep; invalid inputs fail it.
pub fn sweep(
    plant: &ContinuousPlant,
    topology: &NetworkTopology,
    config: &DesignConfig,
    options: SweepOptions,
) -> Result<Vec<DesignPoint>> {
    plant.validate()?;
    config.validate_for(topology)?;
    let grid = config.grid_points(topology);
    map_slice(options.exec, &grid, |&(h, tau)| evaluate_point(plant, topology, config, h, tau, options))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    JMax,
    JMc,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "j_max" => Ok(Criterion::JMax),
            "j_mc" => Ok(Criterion::JMc),
            other => Err(Error::InvalidArgument(format!("unknown criterion {other:?}"))),
        }
    }
}

fn criterion_value(p: &DesignPoint, criterion: Criterion) -> Result<f64> {
    match criterion {
        Criterion::JMax => Ok(p.j_max),
        Criterion::JMc => p
            .j_mc
            .map(|m| m.mean)
            .ok_or_else(|| Error::InvalidArgument("point has no Monte Carlo estimate".into())),
    }
}

/// Converged point with the smallest criterion; ties go to the smaller `h`,
/// then the smaller `tau`.
pub fn select_optimum(points: &[DesignPoint], criterion: Criterion) -> Result<&DesignPoint> {
    let mut best: Option<(&DesignPoint, f64)> = None;
    for p in points.iter().filter(|p| p.status == Status::Converged) {
        let v = criterion_value(p, criterion)?;
        let better = match best {
            None => true,
            Some((b, bv)) => v
                .total_cmp(&bv)
                .then(p.h_ms.total_cmp(&b.h_ms))
                .then(p.tau_ms.total_cmp(&b.tau_ms))
                .is_lt(),
        };
        if better {
            best = Some((p, v));
        }
    }
    best.map(|(p, _)| p).ok_or(Error::AllDiverged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontierRow {
    pub epsilon_per_ms: f64,
    /// Infinite when every grid point diverged.
    pub j_opt: f64,
    pub h_opt_ms: Option<f64>,
    pub tau_opt_ms: Option<f64>,
    pub rho_opt: Option<f64>,
}

/// Optimal loss bound for each energy rate in `epsilon_grid`, together with
/// the full sweep behind each row.
pub fn energy_frontier(
    plant: &ContinuousPlant,
    topology: &NetworkTopology,
    config: &DesignConfig,
    epsilon_grid: &[f64],
    exec: ExecMode,
) -> Result<Vec<(FrontierRow, Vec<DesignPoint>)>> {
    if let Some(e) = epsilon_grid.iter().find(|e| e.is_nan() || **e < 0.0) {
        return Err(Error::InvalidArgument(format!("energy rate must be nonnegative, got {e}")));
    }
    let options = SweepOptions { simulate: false, exec };
    let sweeps = map_indexed(exec, epsilon_grid.len(), |i| {
        let mut cfg = config.clone();
        cfg.epsilon_per_ms = epsilon_grid[i].is_finite().then_some(epsilon_grid[i]);
        sweep(plant, topology, &cfg, options)
    });
    epsilon_grid
        .iter()
        .zip(sweeps)
        .map(|(&eps, points)| {
            let points = points?;
            let row = match select_optimum(&points, Criterion::JMax) {
                Ok(p) => FrontierRow {
                    epsilon_per_ms: eps,
                    j_opt: p.j_max,
                    h_opt_ms: Some(p.h_ms),
                    tau_opt_ms: Some(p.tau_ms),
                    rho_opt: Some(p.rho_star),
                },
                Err(Error::AllDiverged) => FrontierRow {
                    epsilon_per_ms: eps,
                    j_opt: f64::INFINITY,
                    h_opt_ms: None,
                    tau_opt_ms: None,
                    rho_opt: None,
                },
                Err(e) => return Err(e),
            };
            Ok((row, points))
        })
        .collect()
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), num)
}

pub const SWEEP_HEADER: &str = "h_ms,tau_ms,D,C_req,rho_star,theta1,C1,C2,J_min,J_max,J_mc_mean,J_mc_stderr,status";
pub const FRONTIER_HEADER: &str = "epsilon_per_ms,J_opt,h_opt_ms,rho_opt";

pub fn sweep_csv(points: &[DesignPoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        out += &[
            num(p.h_ms),
            num(p.tau_ms),
            p.d_slots.to_string(),
            num(p.c_req),
            num(p.rho_star),
            num(p.policy.theta1),
            num(p.policy.pi1.energy),
            num(p.policy.pi2.energy),
            num(p.j_min),
            num(p.j_max),
            opt(p.j_mc.map(|m| m.mean)),
            opt(p.j_mc.map(|m| m.stderr)),
            p.status.as_str().to_string(),
        ]
        .join(",");
        out.push('\n');
    }
    out
}

pub fn frontier_csv(rows: &[FrontierRow]) -> String {
    let mut out = format!("{FRONTIER_HEADER}\n");
    for r in rows {
        out += &format!("{},{},{},{}\n", num(r.epsilon_per_ms), num(r.j_opt), opt(r.h_opt_ms), opt(r.rho_opt));
    }
    out
}
