//! Random problem instances for tests, benchmarks and property checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{ContinuousPlant, Link, NetworkTopology};

fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `M M^T + eps I` for a Gaussian `M`.
pub fn random_psd(rng: &mut impl Rng, n: usize, eps: f64) -> DMatrix<f64> {
    let m = gaussian(rng, n, n);
    &m * m.transpose() + DMatrix::identity(n, n) * eps
}

/// Graph on `nodes` nodes where each ordered pair is linked with
/// probability `density`, loss probabilities uniform in `(0.05, 0.95)`.
/// The last node is the destination and node 0 the source.
pub fn random_topology(rng: &mut impl Rng, nodes: usize, density: f64) -> NetworkTopology {
    let mut links = Vec::new();
    for from in 0..nodes {
        for to in 0..nodes {
            if from != to && rng.random::<f64>() < density {
                links.push(Link {
                    from,
                    to,
                    p_loss: rng.random_range(0.05..0.95),
                });
            }
        }
    }
    NetworkTopology::new(nodes, 10.0, 0, links).expect("generated links are valid")
}

/// Every ordered pair linked with loss `p_loss`.
pub fn complete_graph(nodes: usize, p_loss: f64) -> NetworkTopology {
    let links = (0..nodes)
        .flat_map(|from| (0..nodes).filter(move |&to| to != from).map(move |to| Link { from, to, p_loss }))
        .collect();
    NetworkTopology::new(nodes, 10.0, 0, links).expect("complete graph is valid")
}

/// Plant with `n` states, one input and one output, Gaussian dynamics
/// scaled by `a_scale`, and a random positive definite cost with cross
/// term.
pub fn random_plant(rng: &mut impl Rng, n: usize, a_scale: f64) -> ContinuousPlant {
    let a = gaussian(rng, n, n) * a_scale;
    let b = gaussian(rng, n, 1);
    let c = gaussian(rng, 1, n);
    let qc = random_psd(rng, n + 1, 0.1);
    ContinuousPlant {
        a,
        b,
        c,
        rv_c: random_psd(rng, n, 0.1),
        rw: DMatrix::from_element(1, 1, rng.random_range(0.01..1.0)),
        sigma0: DMatrix::identity(n, n),
        q_xx: qc.view((0, 0), (n, n)).into_owned(),
        q_xu: qc.view((0, n), (n, 1)).into_owned(),
        q_uu: qc.view((n, n), (1, 1)).into_owned(),
        q0: DMatrix::zeros(n, n),
    }
}
