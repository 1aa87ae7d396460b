use super::dp::solve_weighted_sum;
use super::{DeterministicPolicy, RandomizedPolicy};
use crate::error::{Error, Result};
use crate::model::NetworkTopology;

/// Relative tolerance when comparing an expected cost with the budget.
pub const COST_REL_TOL: f64 = 1e-9;

/// Bisection stops once the multiplier bracket is narrower than this.
const BRACKET_WIDTH: f64 = 1e-12;

fn within_budget(cost: f64, c_req: f64) -> bool {
    cost <= c_req + COST_REL_TOL * c_req.max(1.0)
}

/// Maximum-reliability forwarding with expected transmissions per packet
/// at most `c_req`.
///
/// When the unconstrained optimum already meets the budget it is returned
/// as a pure policy. Otherwise the optimal weighted-sum cost `C*(delta)`,
/// which is piecewise constant and non-increasing with `C*(1) = 0`, is
/// bracketed by bisection on `delta in [0, 1]` until the bracket collapses
/// onto the breakpoint where it jumps across `c_req`. The policies at the
/// two ends of the bracket are mixed so that the expected cost equals the
/// budget.
pub fn solve_constrained(
    topology: &NetworkTopology,
    source: usize,
    deadline_slots: usize,
    c_req: f64,
) -> Result<RandomizedPolicy> {
    if c_req.is_nan() || c_req < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "transmission budget must be nonnegative, got {c_req}"
        )));
    }
    let (_, unconstrained) = solve_weighted_sum(topology, source, deadline_slots, 0.0)?;
    if within_budget(unconstrained.energy, c_req) {
        return Ok(RandomizedPolicy::pure(unconstrained, c_req));
    }
    if c_req == 0.0 {
        let hold = DeterministicPolicy::all_hold(
            topology.node_count(),
            deadline_slots,
            source == topology.destination(),
        );
        return Ok(RandomizedPolicy::pure(hold, c_req));
    }

    // Invariant: C*(lo) > c_req >= C*(hi).
    let (mut lo, mut pi_lo) = (0.0_f64, unconstrained);
    let (mut hi, mut pi_hi) = (1.0_f64, solve_weighted_sum(topology, source, deadline_slots, 1.0)?.1);
    debug_assert!(within_budget(pi_hi.energy, c_req));
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (_, pi) = solve_weighted_sum(topology, source, deadline_slots, mid)?;
        if within_budget(pi.energy, c_req) {
            hi = mid;
            pi_hi = pi;
        } else {
            lo = mid;
            pi_lo = pi;
        }
    }

    let (c1, c2) = (pi_hi.energy, pi_lo.energy);
    let theta2 = ((c_req - c1) / (c2 - c1)).clamp(0.0, 1.0);
    let theta1 = 1.0 - theta2;
    let reliability = pi_hi.reliability + theta2 * (pi_lo.reliability - pi_hi.reliability);
    Ok(RandomizedPolicy {
        reliability,
        energy: theta1 * c1 + theta2 * c2,
        pi1: pi_hi,
        pi2: pi_lo,
        theta1,
        theta2,
        delta_star: Some(0.5 * (lo + hi)),
        c_req,
    })
}
