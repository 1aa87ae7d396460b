//! Monte Carlo closed-loop simulation.
//!
//! Each replicate draws the initial state, process and measurement noise
//! and the packet deliveries from its own streams, runs the Kalman filter
//! and the time-varying LQ controller for `N` steps and records the
//! realized discrete loss. Deliveries come either from forwarding each
//! packet through the network slot by slot under a randomized policy, or
//! from a single Bernoulli draw per packet.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::discretize::DiscretePlant;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::linalg::{loewner_leq, psd_sqrt, LOEWNER_TOL};
use crate::lqg::{filtered_covariances, finite_horizon_cost, ControllerGains};
use crate::model::{ContinuousPlant, NetworkTopology};
use crate::netdp::{Action, DeterministicPolicy, RandomizedPolicy};
use crate::rng::{stream, StreamRole};

/// Where packet deliveries come from.
#[derive(Debug, Clone, Copy)]
pub enum LossModel<'a> {
    /// Forward every packet through `topology` under `policy`.
    SlotLevel {
        policy: &'a RandomizedPolicy,
        topology: &'a NetworkTopology,
    },
    /// Deliver each packet independently with probability `rho`.
    Bernoulli { rho: f64 },
}

impl LossModel<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            LossModel::SlotLevel { .. } => "slot-level",
            LossModel::Bernoulli { .. } => "bernoulli",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    /// Realized loss divided by the number of steps.
    pub cost_per_step: f64,
    pub delivered: usize,
    pub transmissions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub mode: &'static str,
    pub replicates: usize,
    pub seed: u64,
    pub n_steps: usize,
    pub h_ms: f64,
    pub tau_ms: f64,
    pub j_empirical_mean: f64,
    pub j_empirical_stderr: f64,
    pub rho_empirical: f64,
    /// Mean transmissions per packet; absent in Bernoulli mode.
    pub cost_empirical: Option<f64>,
    pub cost_empirical_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_replicate: Option<Vec<ReplicateOutcome>>,
}

impl SimulationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Summary row, optionally followed by one row per replicate.
    pub fn to_csv_string(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let mut out = String::from(
            "mode,replicates,seed,n_steps,h_ms,tau_ms,j_empirical_mean,j_empirical_stderr,rho_empirical,cost_empirical,cost_empirical_stderr\n",
        );
        out += &format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            self.mode,
            self.replicates,
            self.seed,
            self.n_steps,
            self.h_ms,
            self.tau_ms,
            self.j_empirical_mean,
            self.j_empirical_stderr,
            self.rho_empirical,
            opt(self.cost_empirical),
            opt(self.cost_empirical_stderr),
        );
        if let Some(rows) = &self.per_replicate {
            out += "\nreplicate,cost_per_step,delivered,transmissions\n";
            for r in rows {
                out += &format!("{},{},{},{}\n", r.replicate, r.cost_per_step, r.delivered, r.transmissions);
            }
        }
        out
    }
}

/// Replicate count, seed and execution options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub replicates: usize,
    pub seed: u64,
    pub exec: ExecMode,
    pub keep_replicates: bool,
}

impl SimulationOptions {
    pub fn new(replicates: usize, seed: u64) -> Self {
        SimulationOptions {
            replicates,
            seed,
            exec: ExecMode::Parallel,
            keep_replicates: false,
        }
    }
}

/// Row-major dense buffers for the closed loop, with `k = n + m` the
/// extended dimension.
struct ClosedLoop {
    n: usize,
    m: usize,
    q: usize,
    k: usize,
    phi: Vec<f64>,
    gamma: Vec<f64>,
    c: Vec<f64>,
    rv_ext: Vec<f64>,
    rw: Vec<f64>,
    rv_sqrt: Vec<f64>,
    rw_sqrt: Vec<f64>,
    sigma0_sqrt: Vec<f64>,
    /// Composite stage weight on `[xi; u]`, size `(k + m)^2`.
    xi: Vec<f64>,
    xi0: Vec<f64>,
    /// Gains `L_0 .. L_{N-1}`, each `m x k`.
    gains: Vec<f64>,
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// `out = a (r x c) * x (c)`.
#[inline(always)]
fn mat_vec(a: &[f64], r: usize, c: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..r {
        let row = &a[i * c..(i + 1) * c];
        out[i] = row.iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

/// In-place Cholesky of a small SPD matrix; returns false when not PD.
#[inline(always)]
fn cholesky(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

/// Solves `L L^T x = b` in place for a factor from [`cholesky`].
#[inline(always)]
fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

struct Scratch {
    xi: Vec<f64>,
    xi_next: Vec<f64>,
    xi_hat: Vec<f64>,
    tmp_k: Vec<f64>,
    p: Vec<f64>,
    tmp_kk: Vec<f64>,
    pct: Vec<f64>,
    s: Vec<f64>,
    col: Vec<f64>,
    y: Vec<f64>,
    resid: Vec<f64>,
    u: Vec<f64>,
    z: Vec<f64>,
    noise: Vec<f64>,
}

impl ClosedLoop {
    fn new(plant: &ContinuousPlant, dp: &DiscretePlant, gains: &ControllerGains) -> Result<Self> {
        let (n, m, q, k) = (dp.n_plant(), dp.n_inputs(), dp.n_outputs(), dp.n_ext());
        if plant.n_states() != n || plant.n_inputs() != m || plant.n_outputs() != q || k != n + m {
            return Err(Error::Dimension("plant does not match its discretization".into()));
        }
        if gains.l_inf.shape() != (m, k) {
            return Err(Error::Dimension(format!(
                "controller gain is {:?}, expected {:?}",
                gains.l_inf.shape(),
                (m, k)
            )));
        }
        let n_steps = dp.n_steps;
        let mut gain_buf = Vec::with_capacity(n_steps * m * k);
        for step in 0..n_steps {
            gain_buf.extend(flat(gains.gain_at(step)));
        }
        Ok(ClosedLoop {
            n,
            m,
            q,
            k,
            phi: flat(&dp.phi),
            gamma: flat(&dp.gamma),
            c: flat(&dp.c_ext),
            rv_ext: flat(&dp.rv_ext()),
            rw: flat(&dp.rw),
            rv_sqrt: flat(&psd_sqrt(&dp.rv)),
            rw_sqrt: flat(&psd_sqrt(&dp.rw)),
            sigma0_sqrt: flat(&psd_sqrt(&plant.sigma0)),
            xi: flat(&dp.xi_composite()),
            xi0: flat(&dp.xi0),
            gains: gain_buf,
        })
    }

    fn scratch(&self) -> Scratch {
        let (k, q, m) = (self.k, self.q, self.m);
        Scratch {
            xi: vec![0.0; k],
            xi_next: vec![0.0; k],
            xi_hat: vec![0.0; k],
            tmp_k: vec![0.0; k],
            p: vec![0.0; k * k],
            tmp_kk: vec![0.0; k * k],
            pct: vec![0.0; k * q],
            s: vec![0.0; q * q],
            col: vec![0.0; q],
            y: vec![0.0; q],
            resid: vec![0.0; q],
            u: vec![0.0; m],
            z: vec![0.0; k + m],
            noise: vec![0.0; self.n.max(q)],
        }
    }

    /// Runs one replicate and returns the total realized loss.
    fn run(&self, seed: u64, replicate: usize, delivered: &[bool], w: &mut Scratch) -> Result<f64> {
        // Constant sizes let the small loops below unroll.
        match (self.n, self.m, self.q) {
            (2, 1, 1) => self.run_sized(2, 1, 1, seed, replicate, delivered, w),
            (3, 1, 1) => self.run_sized(3, 1, 1, seed, replicate, delivered, w),
            (n, m, q) => self.run_sized(n, m, q, seed, replicate, delivered, w),
        }
    }

    #[inline(always)]
    #[allow(clippy::too_many_arguments)]
    fn run_sized(&self, n: usize, m: usize, q: usize, seed: u64, replicate: usize, delivered: &[bool], w: &mut Scratch) -> Result<f64> {
        let k = n + m;
        let r = replicate as u64;
        let mut init_rng = stream(seed, r, StreamRole::InitialState);
        let mut proc_rng = stream(seed, r, StreamRole::ProcessNoise);
        let mut meas_rng = stream(seed, r, StreamRole::MeasurementNoise);

        for v in w.noise[..n].iter_mut() {
            *v = init_rng.sample(StandardNormal);
        }
        w.xi.fill(0.0);
        mat_vec(&self.sigma0_sqrt, n, n, &w.noise[..n], &mut w.xi[..n]);
        w.xi_hat.fill(0.0);
        w.p.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|l| self.sigma0_sqrt[i * n + l] * self.sigma0_sqrt[j * n + l]).sum();
                w.p[i * k + j] = s;
            }
        }

        let mut cost = 0.0;
        for (step, &got) in delivered.iter().enumerate() {
            // Measurement noise is drawn every step to keep streams aligned.
            for v in w.noise[..q].iter_mut() {
                *v = meas_rng.sample(StandardNormal);
            }
            if got {
                mat_vec(&self.c, q, k, &w.xi, &mut w.y);
                mat_vec(&self.rw_sqrt, q, q, &w.noise[..q], &mut w.col);
                for i in 0..q {
                    w.y[i] += w.col[i];
                }
                // pct = P C^T, s = C P C^T + R_w
                for i in 0..k {
                    for j in 0..q {
                        w.pct[i * q + j] = (0..k).map(|l| w.p[i * k + l] * self.c[j * k + l]).sum();
                    }
                }
                for i in 0..q {
                    for j in 0..q {
                        w.s[i * q + j] = self.rw[i * q + j] + (0..k).map(|l| self.c[i * k + l] * w.pct[l * q + j]).sum::<f64>();
                    }
                }
                if !cholesky(&mut w.s, q) {
                    return Err(Error::Singular("innovation covariance"));
                }
                mat_vec(&self.c, q, k, &w.xi_hat, &mut w.resid);
                for i in 0..q {
                    w.resid[i] = w.y[i] - w.resid[i];
                }
                cholesky_solve(&w.s, q, &mut w.resid);
                for i in 0..k {
                    w.xi_hat[i] += (0..q).map(|j| w.pct[i * q + j] * w.resid[j]).sum::<f64>();
                }
                // P -= pct S^{-1} pct^T, one column of pct^T at a time.
                for col in 0..k {
                    for j in 0..q {
                        w.col[j] = w.pct[col * q + j];
                    }
                    cholesky_solve(&w.s, q, &mut w.col);
                    for row in 0..k {
                        let d: f64 = (0..q).map(|j| w.pct[row * q + j] * w.col[j]).sum();
                        w.tmp_kk[row * k + col] = d;
                    }
                }
                for i in 0..k {
                    for j in 0..k {
                        w.p[i * k + j] -= 0.5 * (w.tmp_kk[i * k + j] + w.tmp_kk[j * k + i]);
                    }
                }
            }

            let gain = &self.gains[step * m * k..(step + 1) * m * k];
            mat_vec(gain, m, k, &w.xi_hat, &mut w.u);

            w.z[..k].copy_from_slice(&w.xi);
            w.z[k..].copy_from_slice(&w.u);
            let km = k + m;
            let mut stage = 0.0;
            for i in 0..km {
                let row: f64 = (0..km).map(|j| self.xi[i * km + j] * w.z[j]).sum();
                stage += w.z[i] * row;
            }
            cost += stage;

            // True state.
            mat_vec(&self.phi, k, k, &w.xi, &mut w.xi_next);
            for i in 0..k {
                w.xi_next[i] += (0..m).map(|j| self.gamma[i * m + j] * w.u[j]).sum::<f64>();
            }
            for v in w.noise[..n].iter_mut() {
                *v = proc_rng.sample(StandardNormal);
            }
            for i in 0..n {
                w.xi_next[i] += (0..n).map(|j| self.rv_sqrt[i * n + j] * w.noise[j]).sum::<f64>();
            }
            std::mem::swap(&mut w.xi, &mut w.xi_next);

            // Prediction.
            mat_vec(&self.phi, k, k, &w.xi_hat, &mut w.tmp_k);
            for i in 0..k {
                w.xi_hat[i] = w.tmp_k[i] + (0..m).map(|j| self.gamma[i * m + j] * w.u[j]).sum::<f64>();
            }
            for i in 0..k {
                for j in 0..k {
                    w.tmp_kk[i * k + j] = (0..k).map(|l| self.phi[i * k + l] * w.p[l * k + j]).sum();
                }
            }
            for i in 0..k {
                for j in i..k {
                    let v: f64 = (0..k).map(|l| w.tmp_kk[i * k + l] * self.phi[j * k + l]).sum::<f64>() + self.rv_ext[i * k + j];
                    w.p[i * k + j] = v;
                    w.p[j * k + i] = v;
                }
            }
        }

        let mut terminal = 0.0;
        for i in 0..k {
            terminal += w.xi[i] * (0..k).map(|j| self.xi0[i * k + j] * w.xi[j]).sum::<f64>();
        }
        Ok(cost + terminal)
    }
}

/// Dense `(node, slot) -> (next hop, loss)` table of one deterministic
/// policy.
struct CompiledPolicy {
    deadline: usize,
    hops: Vec<Option<(usize, f64)>>,
}

impl CompiledPolicy {
    fn new(pi: &DeterministicPolicy, topology: &NetworkTopology) -> Self {
        let deadline = pi.deadline();
        let mut hops = vec![None; topology.node_count() * deadline];
        for (node, row) in pi.actions.iter().enumerate() {
            for (t, a) in row.iter().enumerate() {
                if let Action::Forward(j) = *a {
                    let p = topology.loss(node, j).expect("policy uses existing links");
                    hops[node * deadline + t] = Some((j, p));
                }
            }
        }
        CompiledPolicy { deadline, hops }
    }

    /// Forwards one packet; returns `(delivered, transmissions)`.
    fn forward(&self, source: usize, destination: usize, rng: &mut ChaCha8Rng) -> (bool, u64) {
        let mut node = source;
        let mut sent = 0;
        for t in 0..self.deadline {
            if node == destination {
                break;
            }
            if let Some((j, p)) = self.hops[node * self.deadline + t] {
                sent += 1;
                if rng.random::<f64>() >= p {
                    node = j;
                }
            }
        }
        (node == destination, sent)
    }
}

enum Deliveries {
    Bernoulli(f64),
    SlotLevel {
        pi1: CompiledPolicy,
        pi2: CompiledPolicy,
        theta2: f64,
        source: usize,
        destination: usize,
    },
}

impl Deliveries {
    fn new(loss: &LossModel) -> Self {
        match *loss {
            LossModel::Bernoulli { rho } => Deliveries::Bernoulli(rho),
            LossModel::SlotLevel { policy, topology } => Deliveries::SlotLevel {
                pi1: CompiledPolicy::new(&policy.pi1, topology),
                pi2: CompiledPolicy::new(&policy.pi2, topology),
                theta2: policy.theta2,
                source: topology.source(),
                destination: topology.destination(),
            },
        }
    }

    /// Delivery indicators and transmission count for one replicate.
    fn draw(&self, n_steps: usize, seed: u64, replicate: usize) -> (Vec<bool>, u64) {
        let r = replicate as u64;
        let mut link_rng = stream(seed, r, StreamRole::LinkDraws);
        match self {
            Deliveries::Bernoulli(rho) => ((0..n_steps).map(|_| link_rng.random::<f64>() < *rho).collect(), 0),
            Deliveries::SlotLevel {
                pi1,
                pi2,
                theta2,
                source,
                destination,
            } => {
                let mut mix_rng = stream(seed, r, StreamRole::PolicyMix);
                let mut sent = 0;
                let out = (0..n_steps)
                    .map(|_| {
                        let pi = if mix_rng.random::<f64>() < *theta2 { pi2 } else { pi1 };
                        let (ok, s) = pi.forward(*source, *destination, &mut link_rng);
                        sent += s;
                        ok
                    })
                    .collect();
                (out, sent)
            }
        }
    }
}

fn check_loss_model(loss: &LossModel, dp: &DiscretePlant) -> Result<()> {
    match *loss {
        LossModel::Bernoulli { rho } if !(0.0..=1.0).contains(&rho) => Err(Error::InvalidArgument(format!(
            "delivery probability must lie in [0, 1], got {rho}"
        ))),
        LossModel::SlotLevel { policy, topology } => {
            let d = (dp.tau_s * 1e3 / topology.slot_ms() + 1e-9).floor() as usize;
            if policy.deadline() != d || policy.pi2.deadline() != d {
                return Err(Error::Dimension(format!(
                    "policy has deadline {} slots but tau = {} ms allows {d}",
                    policy.deadline(),
                    dp.tau_s * 1e3
                )));
            }
            for pi in [&policy.pi1, &policy.pi2] {
                if pi.actions.len() != topology.node_count() {
                    return Err(Error::Dimension("policy table does not match the topology".into()));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn mean_stderr(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let nf = count as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Monte Carlo estimate of the per-step closed-loop loss.
///
/// Replicate `r` uses streams keyed by `(seed, r)`, and the per-replicate
/// results are reduced in replicate order, so the report is bit-identical
/// for any number of worker threads.
pub fn simulate_closed_loop(
    plant: &ContinuousPlant,
    dp: &DiscretePlant,
    gains: &ControllerGains,
    loss: LossModel,
    options: SimulationOptions,
) -> Result<SimulationReport> {
    if options.replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    if dp.n_steps == 0 {
        return Err(Error::InvalidArgument("horizon has no sampling steps".into()));
    }
    check_loss_model(&loss, dp)?;
    let cl = ClosedLoop::new(plant, dp, gains)?;
    let deliveries = Deliveries::new(&loss);
    let n_steps = dp.n_steps;
    let seed = options.seed;

    let outcomes = map_indexed(options.exec, options.replicates, |r| -> Result<ReplicateOutcome> {
        let (delivered, transmissions) = deliveries.draw(n_steps, seed, r);
        let mut w = cl.scratch();
        let total = cl.run(seed, r, &delivered, &mut w)?;
        Ok(ReplicateOutcome {
            replicate: r,
            cost_per_step: total / n_steps as f64,
            delivered: delivered.iter().filter(|d| **d).count(),
            transmissions,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let reps = outcomes.len();
    let (j_mean, j_se) = mean_stderr(outcomes.iter().map(|o| o.cost_per_step), reps);
    let packets = (reps * n_steps) as f64;
    let rho_empirical = outcomes.iter().map(|o| o.delivered as f64).sum::<f64>() / packets;
    let (cost_empirical, cost_empirical_stderr) = match loss {
        LossModel::SlotLevel { .. } => {
            let (c, se) = mean_stderr(outcomes.iter().map(|o| o.transmissions as f64 / n_steps as f64), reps);
            (Some(c), Some(se))
        }
        LossModel::Bernoulli { .. } => (None, None),
    };
    Ok(SimulationReport {
        mode: loss.name(),
        replicates: reps,
        seed,
        n_steps,
        h_ms: dp.h_s * 1e3,
        tau_ms: dp.tau_s * 1e3,
        j_empirical_mean: j_mean,
        j_empirical_stderr: j_se,
        rho_empirical,
        cost_empirical,
        cost_empirical_stderr,
        per_replicate: options.keep_replicates.then_some(outcomes),
    })
}

/// Outcome of running two closed loops on coupled delivery sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub replicates: usize,
    pub rho_low: f64,
    pub rho_high: f64,
    /// Replicates where the optimal expected cost given the realized
    /// sequence was larger under the more reliable sequence.
    pub cost_violations: usize,
    /// `(replicate, step)` pairs where the filtered covariances were not
    /// ordered.
    pub loewner_violations: usize,
    pub mean_expected_cost_low: f64,
    pub mean_expected_cost_high: f64,
    pub mean_realized_cost_low: f64,
    pub mean_realized_cost_high: f64,
}

/// Couples two Bernoulli delivery processes through shared uniforms
/// `omega_k`, `rho_k = 1{omega_k < rho}`, and checks that the more
/// reliable one is never worse on any realization.
#[allow(clippy::too_many_arguments)]
pub fn coupling_experiment(
    plant: &ContinuousPlant,
    dp: &DiscretePlant,
    gains: &ControllerGains,
    rho_low: f64,
    rho_high: f64,
    replicates: usize,
    seed: u64,
    exec: ExecMode,
) -> Result<CouplingReport> {
    if !(0.0 <= rho_low && rho_low <= rho_high && rho_high <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= rho_low <= rho_high <= 1, got {rho_low}, {rho_high}"
        )));
    }
    if gains.s_seq.is_none() {
        return Err(Error::InvalidArgument("coupling needs finite-horizon gains".into()));
    }
    let cl = ClosedLoop::new(plant, dp, gains)?;
    let n_steps = dp.n_steps;
    let x0 = DVector::zeros(dp.n_plant());

    struct Pair {
        expected: (f64, f64),
        realized: (f64, f64),
        loewner_violations: usize,
    }
    let pairs = map_indexed(exec, replicates, |r| -> Result<Pair> {
        let mut omega_rng = stream(seed, r as u64, StreamRole::CouplingOmega);
        let omega: Vec<f64> = (0..n_steps).map(|_| omega_rng.random::<f64>()).collect();
        let low: Vec<bool> = omega.iter().map(|&w| w < rho_low).collect();
        let high: Vec<bool> = omega.iter().map(|&w| w < rho_high).collect();
        let mut w = cl.scratch();
        let realized = (cl.run(seed, r, &low, &mut w)?, cl.run(seed, r, &high, &mut w)?);
        let expected = (
            finite_horizon_cost(dp, gains, &low, &x0, &plant.sigma0)?,
            finite_horizon_cost(dp, gains, &high, &x0, &plant.sigma0)?,
        );
        let p_low = filtered_covariances(dp, &plant.sigma0, &low)?;
        let p_high = filtered_covariances(dp, &plant.sigma0, &high)?;
        let loewner_violations = p_low
            .iter()
            .zip(&p_high)
            .filter(|(lo, hi)| !loewner_leq(hi, lo, LOEWNER_TOL))
            .count();
        Ok(Pair {
            expected,
            realized,
            loewner_violations,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let nf = replicates.max(1) as f64;
    let per_step = n_steps.max(1) as f64;
    Ok(CouplingReport {
        replicates,
        rho_low,
        rho_high,
        cost_violations: pairs.iter().filter(|p| p.expected.1 > p.expected.0).count(),
        loewner_violations: pairs.iter().map(|p| p.loewner_violations).sum(),
        mean_expected_cost_low: pairs.iter().map(|p| p.expected.0).sum::<f64>() / nf / per_step,
        mean_expected_cost_high: pairs.iter().map(|p| p.expected.1).sum::<f64>() / nf / per_step,
        mean_realized_cost_low: pairs.iter().map(|p| p.realized.0).sum::<f64>() / nf / per_step,
        mean_realized_cost_high: pairs.iter().map(|p| p.realized.1).sum::<f64>() / nf / per_step,
    })
}
