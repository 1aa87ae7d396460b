//! `policy.json` export of a randomized forwarding policy.

use serde::{Deserialize, Serialize};

use super::{Action, DeterministicPolicy, RandomizedPolicy};
use crate::error::{Error, Result};
use crate::model::NetworkTopology;

/// One table entry: a 1-based next-hop id or the string `"HOLD"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Hop(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub reliability: f64,
    pub energy: f64,
    /// Rows are nodes `1..=Z`, columns are slots `0..D`.
    pub actions: Vec<Vec<Entry>>,
}

/// Serialized form of a [`RandomizedPolicy`]; keys are written in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub source: usize,
    pub deadline_slots: usize,
    pub c_req: Option<f64>,
    pub rho_star: f64,
    pub expected_cost: f64,
    pub theta1: f64,
    pub theta2: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub delta_star: Option<f64>,
    pub pi1: TableFile,
    pub pi2: TableFile,
}

fn table_to_file(pi: &DeterministicPolicy) -> TableFile {
    TableFile {
        reliability: pi.reliability,
        energy: pi.energy,
        actions: pi
            .actions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|a| match *a {
                        Action::Hold => Entry::Keyword("HOLD".into()),
                        Action::Forward(j) => Entry::Hop(j + 1),
                    })
                    .collect()
            })
            .collect(),
    }
}

fn table_from_file(f: &TableFile, nodes: usize) -> Result<DeterministicPolicy> {
    let bad = |msg: String| Error::Parse {
        what: "policy file",
        message: msg,
    };
    let actions = f
        .actions
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match e {
                    Entry::Keyword(k) if k == "HOLD" => Ok(Action::Hold),
                    Entry::Keyword(k) => Err(bad(format!("unknown action {k:?}"))),
                    Entry::Hop(j) if *j >= 1 && *j <= nodes => Ok(Action::Forward(j - 1)),
                    Entry::Hop(j) => Err(bad(format!("next hop {j} outside 1..={nodes}"))),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeterministicPolicy {
        actions,
        reliability: f.reliability,
        energy: f.energy,
    })
}

impl PolicyFile {
    pub fn from_policy(policy: &RandomizedPolicy, source: usize) -> Self {
        PolicyFile {
            source: source + 1,
            deadline_slots: policy.deadline(),
            c_req: policy.c_req.is_finite().then_some(policy.c_req),
            rho_star: policy.reliability,
            expected_cost: policy.energy,
            theta1: policy.theta1,
            theta2: policy.theta2,
            c1: policy.pi1.energy,
            c2: policy.pi2.energy,
            delta_star: policy.delta_star,
            pi1: table_to_file(&policy.pi1),
            pi2: table_to_file(&policy.pi2),
        }
    }

    pub fn to_policy(&self, topology: &NetworkTopology) -> Result<RandomizedPolicy> {
        let n = topology.node_count();
        Ok(RandomizedPolicy {
            pi1: table_from_file(&self.pi1, n)?,
            pi2: table_from_file(&self.pi2, n)?,
            theta1: self.theta1,
            theta2: self.theta2,
            reliability: self.rho_star,
            energy: self.expected_cost,
            delta_star: self.delta_star,
            c_req: self.c_req.unwrap_or(f64::INFINITY),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            what: "policy file",
            message: e.to_string(),
        })
    }
}
