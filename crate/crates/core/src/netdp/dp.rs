use super::{Action, DeterministicPolicy, UtilityTable};
use crate::error::{Error, Result};
use crate::model::NetworkTopology;

/// Utility, reliability and expected energy of one node at one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NodeValue {
    pub u: f64,
    pub rho: f64,
    pub cost: f64,
}

pub(crate) const AT_DESTINATION: NodeValue = NodeValue {
    u: 1.0,
    rho: 1.0,
    cost: 0.0,
};

pub(crate) const MISSED_DEADLINE: NodeValue = NodeValue {
    u: 0.0,
    rho: 0.0,
    cost: 0.0,
};

/// One Bellman step at a non-destination node.
///
/// `own_next` is the node's value at `t + 1`; `neighbors` yields
/// `(j, p_ij, value of j at t + 1)` in ascending `j`. Holding wins ties
/// against every neighbor and the lowest neighbor id wins ties among
/// neighbors.
pub(crate) fn bellman_update(
    own_next: NodeValue,
    neighbors: impl Iterator<Item = (usize, f64, NodeValue)>,
    delta: f64,
) -> (Action, NodeValue) {
    let mut best: Option<(usize, f64, f64, NodeValue)> = None;
    for (j, p, next) in neighbors {
        let u = (1.0 - p) * next.u + p * own_next.u - delta;
        if best.is_none_or(|(_, best_u, _, _)| u > best_u) {
            best = Some((j, u, p, next));
        }
    }
    match best {
        Some((j, u, p, next)) if u > own_next.u => (
            Action::Forward(j),
            NodeValue {
                u,
                rho: (1.0 - p) * next.rho + p * own_next.rho,
                cost: (1.0 - p) * next.cost + p * own_next.cost + 1.0,
            },
        ),
        _ => (Action::Hold, own_next),
    }
}

pub(crate) fn check_instance(topology: &NetworkTopology, source: usize, delta: f64) -> Result<()> {
    if source >= topology.node_count() {
        return Err(Error::InvalidArgument(format!(
            "source node {} does not exist",
            source + 1
        )));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Lagrange multiplier must be nonnegative, got {delta}"
        )));
    }
    Ok(())
}

/// Backward induction over all nodes for deadline `deadline` and weight `delta`.
pub(crate) fn backward_induction(
    topology: &NetworkTopology,
    deadline: usize,
    delta: f64,
) -> (UtilityTable, Vec<Vec<Action>>) {
    let z = topology.destination();
    let nodes = topology.node_count();
    let mut value = vec![vec![MISSED_DEADLINE; deadline + 1]; nodes];
    let mut actions = vec![vec![Action::Hold; deadline]; nodes];
    value[z].fill(AT_DESTINATION);
    for t in (0..deadline).rev() {
        for i in (0..nodes).filter(|&i| i != z) {
            let (action, v) = bellman_update(
                value[i][t + 1],
                topology
                    .out_links(i)
                    .iter()
                    .map(|&(j, p)| (j, p, value[j][t + 1])),
                delta,
            );
            value[i][t] = v;
            actions[i][t] = action;
        }
    }
    let table = UtilityTable {
        u_star: value.iter().map(|r| r.iter().map(|v| v.u).collect()).collect(),
        rho_star: value.iter().map(|r| r.iter().map(|v| v.rho).collect()).collect(),
        c_star: value.iter().map(|r| r.iter().map(|v| v.cost).collect()).collect(),
        delta,
    };
    (table, actions)
}

/// Solves `max_pi rho - delta * C` for a packet starting at `source`.
///
/// Runs in `O(D * |links|)`, which is `O(D |N|^2)` on dense graphs.
pub fn solve_weighted_sum(
    topology: &NetworkTopology,
    source: usize,
    deadline_slots: usize,
    delta: f64,
) -> Result<(UtilityTable, DeterministicPolicy)> {
    check_instance(topology, source, delta)?;
    let (table, actions) = backward_induction(topology, deadline_slots, delta);
    let policy = DeterministicPolicy {
        reliability: table.rho_star[source][0],
        energy: table.c_star[source][0],
        actions,
    };
    Ok((table, policy))
}

/// Exact reliability and expected transmissions of a forwarding table,
/// obtained by propagating the packet-location distribution forward.
pub fn evaluate_policy(
    topology: &NetworkTopology,
    policy: &DeterministicPolicy,
    source: usize,
    deadline_slots: usize,
) -> Result<(f64, f64)> {
    check_instance(topology, source, 0.0)?;
    let nodes = topology.node_count();
    let z = topology.destination();
    if policy.actions.len() != nodes || policy.actions.iter().any(|r| r.len() != deadline_slots) {
        return Err(Error::Dimension(format!(
            "policy table must be {nodes} x {deadline_slots}"
        )));
    }
    for (i, row) in policy.actions.iter().enumerate() {
        for (t, a) in row.iter().enumerate() {
            if let Action::Forward(j) = *a {
                if i == z || topology.loss(i, j).is_none() {
                    return Err(Error::InvalidArgument(format!(
                        "action at node {} slot {t} uses missing link to {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }

    let mut mass = vec![0.0; nodes];
    let mut next = vec![0.0; nodes];
    mass[source] = 1.0;
    let mut cost = 0.0;
    for t in 0..deadline_slots {
        next.iter_mut().for_each(|m| *m = 0.0);
        for i in 0..nodes {
            let m = mass[i];
            if m == 0.0 {
                continue;
            }
            match policy.actions[i][t] {
                Action::Forward(j) if i != z => {
                    let p = topology.loss(i, j).expect("checked above");
                    cost += m;
                    next[j] += (1.0 - p) * m;
                    next[i] += p * m;
                }
                _ => next[i] += m,
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
    Ok((mass[z], cost))
}
