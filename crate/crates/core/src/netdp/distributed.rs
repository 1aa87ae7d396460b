//! Message-passing emulation of the per-node dynamic program.
//!
//! Every node keeps only its outgoing links' loss probabilities and the
//! latest values advertised by its out-neighbors. Rounds run from the
//! deadline backwards; in each round every non-destination node (ascending
//! id) updates its own value and then advertises it to each in-neighbor.
//! The destination's value is fixed and known to all nodes in advance.

use std::collections::BTreeMap;

use super::dp::{bellman_update, check_instance, NodeValue, AT_DESTINATION, MISSED_DEADLINE};
use super::{Action, UtilityTable};
use crate::error::Result;
use crate::model::NetworkTopology;

/// Output of [`distributed_dp`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedRun {
    pub table: UtilityTable,
    /// `actions[node][t]` as chosen locally by each node.
    pub actions: Vec<Vec<Action>>,
    /// Utility advertisements sent, one per (slot, sender, in-neighbor).
    pub messages: usize,
}

struct Message {
    from: usize,
    to: usize,
    value: NodeValue,
}

struct NodeAgent {
    id: usize,
    out_links: Vec<(usize, f64)>,
    /// Nodes that forward to this one and therefore need its value.
    subscribers: Vec<usize>,
    /// Last advertised value of each out-neighbor.
    inbox: BTreeMap<usize, NodeValue>,
    value: NodeValue,
}

impl NodeAgent {
    fn step(&mut self, delta: f64) -> Action {
        let inbox = &self.inbox;
        let (action, value) = bellman_update(
            self.value,
            self.out_links.iter().map(|&(j, p)| (j, p, inbox[&j])),
            delta,
        );
        self.value = value;
        action
    }
}

pub fn distributed_dp(topology: &NetworkTopology, deadline_slots: usize, delta: f64) -> Result<DistributedRun> {
    check_instance(topology, topology.source(), delta)?;
    let z = topology.destination();
    let nodes = topology.node_count();

    let mut agents: Vec<NodeAgent> = (0..nodes)
        .filter(|&i| i != z)
        .map(|i| {
            let out_links = topology.out_links(i).to_vec();
            let inbox = out_links
                .iter()
                .map(|&(j, _)| (j, if j == z { AT_DESTINATION } else { MISSED_DEADLINE }))
                .collect();
            NodeAgent {
                id: i,
                out_links,
                subscribers: topology.in_neighbors(i),
                inbox,
                value: MISSED_DEADLINE,
            }
        })
        .collect();
    let slot_of: BTreeMap<usize, usize> = agents.iter().enumerate().map(|(k, a)| (a.id, k)).collect();

    let mut values = vec![vec![MISSED_DEADLINE; deadline_slots + 1]; nodes];
    values[z].iter_mut().for_each(|v| *v = AT_DESTINATION);
    let mut actions = vec![vec![Action::Hold; deadline_slots]; nodes];
    let mut messages = 0;

    for t in (0..deadline_slots).rev() {
        let mut outbox = Vec::new();
        for agent in agents.iter_mut() {
            actions[agent.id][t] = agent.step(delta);
            values[agent.id][t] = agent.value;
            outbox.extend(agent.subscribers.iter().map(|&to| Message {
                from: agent.id,
                to,
                value: agent.value,
            }));
        }
        messages += outbox.len();
        for msg in outbox {
            if let Some(&k) = slot_of.get(&msg.to) {
                agents[k].inbox.insert(msg.from, msg.value);
            }
        }
    }

    let table = UtilityTable {
        u_star: values.iter().map(|r| r.iter().map(|v| v.u).collect()).collect(),
        rho_star: values.iter().map(|r| r.iter().map(|v| v.rho).collect()).collect(),
        c_star: values.iter().map(|r| r.iter().map(|v| v.cost).collect()).collect(),
        delta,
    };
    Ok(DistributedRun {
        table,
        actions,
        messages,
    })
}
