//! Exhaustive enumeration of deterministic time-indexed forwarding tables.
//!
//! Only actions at `(node, slot)` pairs the packet can actually occupy
//! change the outcome, so the search branches over the support of the
//! packet-location distribution instead of over whole tables.

use super::Action;
use crate::error::{Error, Result};
use crate::model::NetworkTopology;

pub const MAX_BRUTE_NODES: usize = 4;
pub const MAX_BRUTE_DEADLINE: usize = 4;

/// A `(reliability, expected transmissions)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub rho: f64,
    pub cost: f64,
}

fn guard(topology: &NetworkTopology, source: usize, deadline: usize) -> Result<()> {
    if topology.node_count() > MAX_BRUTE_NODES || deadline > MAX_BRUTE_DEADLINE {
        return Err(Error::InstanceTooLarge(format!(
            "{} nodes, deadline {deadline} (limit {MAX_BRUTE_NODES} nodes, deadline {MAX_BRUTE_DEADLINE})",
            topology.node_count()
        )));
    }
    if source >= topology.node_count() {
        return Err(Error::InvalidArgument(format!("source node {} does not exist", source + 1)));
    }
    Ok(())
}

/// `(rho, C)` of every distinct way of acting on the reachable states.
pub fn brute_force_points(
    topology: &NetworkTopology,
    source: usize,
    deadline_slots: usize,
) -> Result<Vec<FrontierPoint>> {
    guard(topology, source, deadline_slots)?;
    let mut mass = vec![0.0; topology.node_count()];
    mass[source] = 1.0;
    let mut out = Vec::new();
    explore(topology, deadline_slots, 0, &mass, 0.0, &mut out);
    Ok(out)
}

fn explore(
    topology: &NetworkTopology,
    deadline: usize,
    t: usize,
    mass: &[f64],
    cost: f64,
    out: &mut Vec<FrontierPoint>,
) {
    let z = topology.destination();
    if t == deadline {
        out.push(FrontierPoint { rho: mass[z], cost });
        return;
    }
    let occupied: Vec<usize> = (0..mass.len()).filter(|&i| i != z && mass[i] > 0.0).collect();
    let choices: Vec<Vec<Action>> = occupied
        .iter()
        .map(|&i| {
            std::iter::once(Action::Hold)
                .chain(topology.out_links(i).iter().map(|&(j, _)| Action::Forward(j)))
                .collect()
        })
        .collect();

    // Odometer over the joint choice for all occupied nodes.
    let mut pick = vec![0usize; occupied.len()];
    let mut next = vec![0.0; mass.len()];
    loop {
        next.iter_mut().for_each(|m| *m = 0.0);
        next[z] = mass[z];
        let mut step_cost = 0.0;
        for (k, &i) in occupied.iter().enumerate() {
            let m = mass[i];
            match choices[k][pick[k]] {
                Action::Hold => next[i] += m,
                Action::Forward(j) => {
                    let p = topology.loss(i, j).expect("enumerated from out_links");
                    step_cost += m;
                    next[j] += (1.0 - p) * m;
                    next[i] += p * m;
                }
            }
        }
        explore(topology, deadline, t + 1, &next, cost + step_cost, out);

        let mut k = 0;
        while k < pick.len() {
            pick[k] += 1;
            if pick[k] < choices[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
        if k == pick.len() {
            break;
        }
    }
}

/// Pareto-nondominated `(rho, C)` pairs (higher reliability, lower cost)
/// over all deterministic time-indexed policies, sorted by cost.
///
/// Limited to `|N| <= 4` and `D <= 4`.
pub fn brute_force_policies(
    topology: &NetworkTopology,
    source: usize,
    deadline_slots: usize,
) -> Result<Vec<FrontierPoint>> {
    let mut points = brute_force_points(topology, source, deadline_slots)?;
    points.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(b.rho.total_cmp(&a.rho)));
    let mut frontier: Vec<FrontierPoint> = Vec::new();
    for p in points {
        let dominated = frontier.last().is_some_and(|last| p.rho <= last.rho + 1e-12);
        if !dominated {
            frontier.push(p);
        }
    }
    Ok(frontier)
}

/// Upper concave envelope of `frontier` (sorted by cost) evaluated at
/// `budget`; beyond the costliest point it stays at the best reliability.
pub fn envelope_at(frontier: &[FrontierPoint], budget: f64) -> f64 {
    let mut hull: Vec<FrontierPoint> = Vec::new();
    for &p in frontier {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b if it lies on or below the chord a -> p.
            let cross = (b.cost - a.cost) * (p.rho - a.rho) - (b.rho - a.rho) * (p.cost - a.cost);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    match hull.iter().position(|p| p.cost > budget) {
        None => hull.last().map_or(0.0, |p| p.rho),
        Some(0) => 0.0,
        Some(k) => {
            let (a, b) = (hull[k - 1], hull[k]);
            a.rho + (budget - a.cost) / (b.cost - a.cost) * (b.rho - a.rho)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_two_slots_frontier() {
        let topo = NetworkTopology::line(2, 0.2, 10.0).unwrap();
        let f = brute_force_policies(&topo, 0, 2).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!((f[0].rho, f[0].cost), (0.0, 0.0));
        assert!((f[1].rho - 0.8).abs() < 1e-15 && f[1].cost == 1.0);
        assert!((f[2].rho - 0.96).abs() < 1e-15 && (f[2].cost - 1.2).abs() < 1e-15);
        // Four time-indexed tables at the source: hold/send in each slot.
        assert_eq!(brute_force_points(&topo, 0, 2).unwrap().len(), 4);
    }

    #[test]
    fn destination_start_and_disconnected_source() {
        let topo = NetworkTopology::line(2, 0.2, 10.0).unwrap();
        let f = brute_force_policies(&topo, 1, 3).unwrap();
        assert_eq!(f, vec![FrontierPoint { rho: 1.0, cost: 0.0 }]);
        let cut = NetworkTopology::new(3, 10.0, 0, vec![crate::model::Link { from: 1, to: 2, p_loss: 0.1 }]).unwrap();
        assert_eq!(brute_force_policies(&cut, 0, 3).unwrap(), vec![FrontierPoint { rho: 0.0, cost: 0.0 }]);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let topo = NetworkTopology::line(5, 0.2, 10.0).unwrap();
        assert!(matches!(brute_force_policies(&topo, 0, 2), Err(Error::InstanceTooLarge(_))));
        let topo = NetworkTopology::line(2, 0.2, 10.0).unwrap();
        assert!(matches!(brute_force_policies(&topo, 0, 5), Err(Error::InstanceTooLarge(_))));
    }

    #[test]
    fn envelope_interpolates_between_vertices() {
        let f = [
            FrontierPoint { rho: 0.0, cost: 0.0 },
            FrontierPoint { rho: 0.8, cost: 1.0 },
            FrontierPoint { rho: 0.96, cost: 1.2 },
        ];
        assert!((envelope_at(&f, 1.1) - 0.88).abs() < 1e-15);
        assert!((envelope_at(&f, 0.5) - 0.4).abs() < 1e-15);
        assert_eq!(envelope_at(&f, 5.0), 0.96);
    }
}
