//! Deadline-constrained maximum-reliability packet forwarding.
//!
//! A single packet starts at the source at slot 0 and must sit at the
//! destination at slot `D`. Each slot a node holding the packet either
//! holds it or attempts one transmission on an outgoing link, which costs
//! one unit of energy and succeeds with probability `1 - p_ij`.
//! [`solve_weighted_sum`] maximizes `reliability - delta * energy` by
//! backward induction; [`solve_constrained`] maximizes reliability under an
//! expected-energy budget by mixing two weighted-sum policies.

mod brute;
mod constrained;
mod distributed;
mod dp;
mod io;

pub use brute::{brute_force_points, brute_force_policies, envelope_at, FrontierPoint, MAX_BRUTE_DEADLINE, MAX_BRUTE_NODES};
pub use constrained::{solve_constrained, COST_REL_TOL};
pub use distributed::{distributed_dp, DistributedRun};
pub use dp::{evaluate_policy, solve_weighted_sum};
pub use io::PolicyFile;

/// What a node does with the packet in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Hold,
    /// Attempt a transmission to this (0-based) neighbor.
    Forward(usize),
}

impl Action {
    pub fn is_transmit(self) -> bool {
        matches!(self, Action::Forward(_))
    }
}

/// Optimal values of the weighted-sum problem for every `(node, slot)`,
/// indexed `[node][t]` with `t = 0..=D`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    pub u_star: Vec<Vec<f64>>,
    pub rho_star: Vec<Vec<f64>>,
    pub c_star: Vec<Vec<f64>>,
    pub delta: f64,
}

impl UtilityTable {
    pub fn deadline(&self) -> usize {
        self.u_star.first().map_or(0, |r| r.len() - 1)
    }
}

/// Time-indexed forwarding table, `actions[node][t]` for `t < D`, together
/// with its reliability and expected transmissions from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicPolicy {
    pub actions: Vec<Vec<Action>>,
    pub reliability: f64,
    pub energy: f64,
}

impl DeterministicPolicy {
    pub fn deadline(&self) -> usize {
        self.actions.first().map_or(0, Vec::len)
    }

    /// Policy that never transmits.
    pub fn all_hold(node_count: usize, deadline: usize, source_is_destination: bool) -> Self {
        DeterministicPolicy {
            actions: vec![vec![Action::Hold; deadline]; node_count],
            reliability: if source_is_destination { 1.0 } else { 0.0 },
            energy: 0.0,
        }
    }
}

/// Per-packet random choice between two deterministic policies.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedPolicy {
    pub pi1: DeterministicPolicy,
    pub pi2: DeterministicPolicy,
    /// Probability of using `pi1`.
    pub theta1: f64,
    pub theta2: f64,
    /// Optimal reliability of the mixture.
    pub reliability: f64,
    /// Expected transmissions per packet of the mixture.
    pub energy: f64,
    /// Lagrange multiplier at the breakpoint, `None` when the budget is slack.
    pub delta_star: Option<f64>,
    /// Budget the policy was solved for (`inf` when unconstrained).
    pub c_req: f64,
}

impl RandomizedPolicy {
    /// Degenerate mixture that always uses `pi`.
    pub fn pure(pi: DeterministicPolicy, c_req: f64) -> Self {
        RandomizedPolicy {
            reliability: pi.reliability,
            energy: pi.energy,
            pi2: pi.clone(),
            pi1: pi,
            theta1: 1.0,
            theta2: 0.0,
            delta_star: None,
            c_req,
        }
    }

    pub fn deadline(&self) -> usize {
        self.pi1.deadline()
    }

    /// Mixture cost `theta1 * C1 + theta2 * C2`.
    pub fn expected_cost(&self) -> f64 {
        self.theta1 * self.pi1.energy + self.theta2 * self.pi2.energy
    }
}
