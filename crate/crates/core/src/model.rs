//! Plant, network and design-grid descriptions, with validation and JSON I/O.
//!
//! Node ids are 1-based in files (the destination is node `Z`, the largest
//! id) and 0-based in memory, so the destination is `node_count - 1`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, from_rows, to_rows};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(what: &'static str) -> impl FnOnce(serde_json::Error) -> Error {
    move |e| Error::Parse {
        what,
        message: e.to_string(),
    }
}

/// Continuous-time plant `dx = Ax dt + Bu dt + dv`, sampled output
/// `y = C x + w`, and the quadratic loss weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPlant {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// Incremental covariance of the Wiener process disturbance.
    pub rv_c: DMatrix<f64>,
    pub rw: DMatrix<f64>,
    pub sigma0: DMatrix<f64>,
    pub q_xx: DMatrix<f64>,
    pub q_xu: DMatrix<f64>,
    pub q_uu: DMatrix<f64>,
    pub q0: DMatrix<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "Rv_c")]
    rv_c: Vec<Vec<f64>>,
    #[serde(rename = "Rw")]
    rw: Vec<Vec<f64>>,
    #[serde(rename = "Sigma0")]
    sigma0: Vec<Vec<f64>>,
    #[serde(rename = "Qxx")]
    q_xx: Vec<Vec<f64>>,
    #[serde(rename = "Qxu")]
    q_xu: Vec<Vec<f64>>,
    #[serde(rename = "Quu")]
    q_uu: Vec<Vec<f64>>,
    #[serde(rename = "Q0")]
    q0: Vec<Vec<f64>>,
}

fn check_shape(field: &str, m: &DMatrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::validation(
            field,
            format!("expected {rows}x{cols}, found {}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

fn check_psd(field: &str, m: &DMatrix<f64>) -> Result<()> {
    if !linalg::is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::validation(field, "matrix is not symmetric"));
    }
    let min = linalg::min_eigenvalue(m);
    if min < -PSD_TOL {
        return Err(Error::validation(
            field,
            format!("matrix is not positive semidefinite (min eigenvalue {min:e})"),
        ));
    }
    Ok(())
}

impl ContinuousPlant {
    /// The example second-order system with natural frequency `omega0`,
    /// damping `zeta` and sign parameter `alpha` (negative gives an unstable
    /// plant), measured through its first state.
    pub fn second_order(alpha: f64, zeta: f64, omega0: f64) -> Self {
        let w2 = omega0 * omega0;
        ContinuousPlant {
            a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -w2, -2.0 * alpha * zeta * omega0]),
            b: DMatrix::from_row_slice(2, 1, &[0.0, w2]),
            c: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            rv_c: DMatrix::from_diagonal_element(2, 2, 0.5),
            rw: DMatrix::from_element(1, 1, 1e-4),
            sigma0: DMatrix::from_diagonal_element(2, 2, 0.1),
            q_xx: DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            q_xu: DMatrix::zeros(2, 1),
            q_uu: DMatrix::from_element(1, 1, 1.0),
            q0: DMatrix::zeros(2, 2),
        }
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        check_shape("A", &self.a, n, n)?;
        if n == 0 {
            return Err(Error::validation("A", "state dimension must be at least 1"));
        }
        let m = self.b.ncols();
        if m == 0 {
            return Err(Error::validation("B", "input dimension must be at least 1"));
        }
        check_shape("B", &self.b, n, m)?;
        let q = self.c.nrows();
        if q == 0 {
            return Err(Error::validation("C", "output dimension must be at least 1"));
        }
        check_shape("C", &self.c, q, n)?;
        check_shape("Rv_c", &self.rv_c, n, n)?;
        check_shape("Rw", &self.rw, q, q)?;
        check_shape("Sigma0", &self.sigma0, n, n)?;
        check_shape("Qxx", &self.q_xx, n, n)?;
        check_shape("Qxu", &self.q_xu, n, m)?;
        check_shape("Quu", &self.q_uu, m, m)?;
        check_shape("Q0", &self.q0, n, n)?;

        for (field, mat) in [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("Qxu", &self.q_xu),
        ] {
            if mat.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(field, "entries must be finite"));
            }
        }
        check_psd("Rv_c", &self.rv_c)?;
        check_psd("Rw", &self.rw)?;
        check_psd("Sigma0", &self.sigma0)?;
        check_psd("Qxx", &self.q_xx)?;
        check_psd("Q0", &self.q0)?;
        if !linalg::is_symmetric(&self.q_uu, SYMMETRY_TOL) {
            return Err(Error::validation("Quu", "matrix is not symmetric"));
        }
        let min = linalg::min_eigenvalue(&self.q_uu);
        if min <= 0.0 {
            return Err(Error::validation(
                "Quu",
                format!("matrix must be positive definite (min eigenvalue {min:e})"),
            ));
        }
        let composite = linalg::block2x2(&self.q_xx, &self.q_xu, &self.q_xu.transpose(), &self.q_uu);
        let min = linalg::min_eigenvalue(&composite);
        if min < -PSD_TOL {
            return Err(Error::validation(
                "Qxx/Qxu/Quu",
                format!("composite loss weight is not positive semidefinite (min eigenvalue {min:e})"),
            ));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: PlantFile = serde_json::from_str(s).map_err(parse_err("plant file"))?;
        let plant = ContinuousPlant {
            a: from_rows(&f.a).map_err(|_| Error::validation("A", "ragged rows"))?,
            b: from_rows(&f.b).map_err(|_| Error::validation("B", "ragged rows"))?,
            c: from_rows(&f.c).map_err(|_| Error::validation("C", "ragged rows"))?,
            rv_c: from_rows(&f.rv_c).map_err(|_| Error::validation("Rv_c", "ragged rows"))?,
            rw: from_rows(&f.rw).map_err(|_| Error::validation("Rw", "ragged rows"))?,
            sigma0: from_rows(&f.sigma0).map_err(|_| Error::validation("Sigma0", "ragged rows"))?,
            q_xx: from_rows(&f.q_xx).map_err(|_| Error::validation("Qxx", "ragged rows"))?,
            q_xu: from_rows(&f.q_xu).map_err(|_| Error::validation("Qxu", "ragged rows"))?,
            q_uu: from_rows(&f.q_uu).map_err(|_| Error::validation("Quu", "ragged rows"))?,
            q0: from_rows(&f.q0).map_err(|_| Error::validation("Q0", "ragged rows"))?,
        };
        plant.validate()?;
        Ok(plant)
    }

    pub fn to_json_string(&self) -> String {
        let f = PlantFile {
            a: to_rows(&self.a),
            b: to_rows(&self.b),
            c: to_rows(&self.c),
            rv_c: to_rows(&self.rv_c),
            rw: to_rows(&self.rw),
            sigma0: to_rows(&self.sigma0),
            q_xx: to_rows(&self.q_xx),
            q_xu: to_rows(&self.q_xu),
            q_uu: to_rows(&self.q_uu),
            q0: to_rows(&self.q0),
        };
        serde_json::to_string_pretty(&f).expect("plant serialization")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json_string())
    }
}

pub fn load_plant(path: &Path) -> Result<ContinuousPlant> {
    ContinuousPlant::from_json_str(&read_file(path)?)
}

/// A directed link with its Bernoulli erasure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub p_loss: f64,
}

/// Directed multi-hop network. The destination is the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    node_count: usize,
    slot_ms: f64,
    source: usize,
    links: Vec<Link>,
    /// Outgoing `(neighbor, p_loss)` per node, ascending neighbor id.
    out: Vec<Vec<(usize, f64)>>,
}

/// Conditions that are legal but usually unintended.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TopologyFlags {
    pub source_is_destination: bool,
    /// The source has no directed path to the destination.
    pub source_cannot_reach_destination: bool,
    /// No node other than the destination has a path to it.
    pub destination_unreachable: bool,
}

impl TopologyFlags {
    pub fn is_degenerate(&self) -> bool {
        self.source_is_destination || self.source_cannot_reach_destination || self.destination_unreachable
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    from: usize,
    to: usize,
    p_loss: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    nodes: usize,
    slot_ms: f64,
    source: usize,
    links: Vec<LinkFile>,
}

impl NetworkTopology {
    /// Builds and validates a topology from 0-based links.
    pub fn new(node_count: usize, slot_ms: f64, source: usize, links: Vec<Link>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::validation("nodes", "at least one node is required"));
        }
        if !(slot_ms.is_finite() && slot_ms > 0.0) {
            return Err(Error::validation("slot_ms", format!("must be positive, got {slot_ms}")));
        }
        if source >= node_count {
            return Err(Error::validation(
                "source",
                format!("node {} does not exist", source + 1),
            ));
        }
        let mut out = vec![Vec::new(); node_count];
        for (k, l) in links.iter().enumerate() {
            let field = format!("links[{k}]");
            if l.from >= node_count || l.to >= node_count {
                return Err(Error::validation(field, "endpoint outside 1..=nodes"));
            }
            if l.from == l.to {
                return Err(Error::validation(field, "self-loops are not allowed"));
            }
            if !(0.0..1.0).contains(&l.p_loss) {
                return Err(Error::validation(
                    field,
                    format!(
                        "p_loss must lie in [0, 1), got {} (omit links that never deliver)",
                        l.p_loss
                    ),
                ));
            }
            if out[l.from].iter().any(|&(j, _)| j == l.to) {
                return Err(Error::validation(
                    field,
                    format!("duplicate link {} -> {}", l.from + 1, l.to + 1),
                ));
            }
            out[l.from].push((l.to, l.p_loss));
        }
        for adj in &mut out {
            adj.sort_by_key(|&(j, _)| j);
        }
        Ok(NetworkTopology {
            node_count,
            slot_ms,
            source,
            links,
            out,
        })
    }

    /// Chain `1 -> 2 -> ... -> Z` with a uniform loss probability.
    pub fn line(node_count: usize, p_loss: f64, slot_ms: f64) -> Result<Self> {
        let links = (0..node_count.saturating_sub(1))
            .map(|i| Link {
                from: i,
                to: i + 1,
                p_loss,
            })
            .collect();
        NetworkTopology::new(node_count, slot_ms, 0, links)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn destination(&self) -> usize {
        self.node_count - 1
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn slot_ms(&self) -> f64 {
        self.slot_ms
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Outgoing neighbors of `node` with their loss probabilities.
    pub fn out_links(&self, node: usize) -> &[(usize, f64)] {
        &self.out[node]
    }

    pub fn loss(&self, from: usize, to: usize) -> Option<f64> {
        self.out[from].iter().find(|&&(j, _)| j == to).map(|&(_, p)| p)
    }

    /// Nodes `j` with a link `j -> node`, ascending.
    pub fn in_neighbors(&self, node: usize) -> Vec<usize> {
        (0..self.node_count)
            .filter(|&j| self.out[j].iter().any(|&(k, _)| k == node))
            .collect()
    }

    /// Same network with a different source node.
    pub fn with_source(&self, source: usize) -> Result<Self> {
        NetworkTopology::new(self.node_count, self.slot_ms, source, self.links.clone())
    }

    /// Same graph with every link's loss probability replaced by `p_loss`.
    pub fn with_uniform_loss(&self, p_loss: f64) -> Result<Self> {
        let links = self.links.iter().map(|l| Link { p_loss, ..*l }).collect();
        NetworkTopology::new(self.node_count, self.slot_ms, self.source, links)
    }

    fn reaches_destination(&self) -> Vec<bool> {
        let z = self.destination();
        let mut reach = vec![false; self.node_count];
        reach[z] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..self.node_count {
                if !reach[i] && self.out[i].iter().any(|&(j, _)| reach[j]) {
                    reach[i] = true;
                    changed = true;
                }
            }
        }
        reach
    }

    pub fn flags(&self) -> TopologyFlags {
        let z = self.destination();
        let reach = self.reaches_destination();
        TopologyFlags {
            source_is_destination: self.source == z,
            source_cannot_reach_destination: !reach[self.source],
            destination_unreachable: self.node_count > 1 && (0..z).all(|i| !reach[i]),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: TopologyFile = serde_json::from_str(s).map_err(parse_err("topology file"))?;
        if f.nodes == 0 {
            return Err(Error::validation("nodes", "at least one node is required"));
        }
        let to_index = |field: String, id: usize| -> Result<usize> {
            if id == 0 || id > f.nodes {
                Err(Error::validation(field, format!("node id {id} outside 1..={}", f.nodes)))
            } else {
                Ok(id - 1)
            }
        };
        let source = to_index("source".into(), f.source)?;
        let mut links = Vec::with_capacity(f.links.len());
        for (k, l) in f.links.iter().enumerate() {
            links.push(Link {
                from: to_index(format!("links[{k}].from"), l.from)?,
                to: to_index(format!("links[{k}].to"), l.to)?,
                p_loss: l.p_loss,
            });
        }
        NetworkTopology::new(f.nodes, f.slot_ms, source, links)
    }

    pub fn to_json_string(&self) -> String {
        let f = TopologyFile {
            nodes: self.node_count,
            slot_ms: self.slot_ms,
            source: self.source + 1,
            links: self
                .links
                .iter()
                .map(|l| LinkFile {
                    from: l.from + 1,
                    to: l.to + 1,
                    p_loss: l.p_loss,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("topology serialization")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json_string())
    }
}

pub fn load_topology(path: &Path) -> Result<NetworkTopology> {
    NetworkTopology::from_json_str(&read_file(path)?)
}

/// Loss-function horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

impl Horizon {
    /// Horizon used for finite-length simulation; infinite horizons fall
    /// back to `default_s`.
    pub fn simulation_seconds(&self, default_s: f64) -> f64 {
        match *self {
            Horizon::Finite(t) => t,
            Horizon::Infinite => default_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TauMode {
    /// `tau = h` at every grid point.
    EqualH,
    /// Every `tau` from the list with `tau <= h`, for each `h`.
    Grid(Vec<f64>),
}

/// Design grid and Monte Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub horizon: Horizon,
    /// Transmission attempts per millisecond; `None` means unconstrained.
    pub epsilon_per_ms: Option<f64>,
    /// Candidate sampling intervals in ms; `None` selects the default grid.
    pub h_grid_ms: Option<Vec<f64>>,
    pub tau_mode: TauMode,
    pub mc_replicates: usize,
    pub seed: u64,
}

pub const DEFAULT_REPLICATES: usize = 10_000;
/// Upper end of the default grid, in slots.
pub const DEFAULT_GRID_SLOTS: usize = 50;

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            horizon: Horizon::Finite(500.0),
            epsilon_per_ms: None,
            h_grid_ms: None,
            tau_mode: TauMode::EqualH,
            mc_replicates: DEFAULT_REPLICATES,
            seed: 0,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum HorizonFile {
    Seconds(f64),
    Keyword(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TauModeFile {
    Keyword(String),
    Grid { tau_grid_ms: Vec<f64> },
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignFile {
    horizon_s: HorizonFile,
    #[serde(default)]
    epsilon_per_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h_grid_ms: Option<Vec<f64>>,
    #[serde(default = "default_tau_mode")]
    tau_mode: TauModeFile,
    #[serde(default = "default_replicates")]
    mc_replicates: usize,
    #[serde(default)]
    seed: u64,
}

fn default_tau_mode() -> TauModeFile {
    TauModeFile::Keyword("equal-h".into())
}

impl DesignConfig {
    /// Checks the settings that do not depend on the network.
    pub fn validate(&self) -> Result<()> {
        if let Horizon::Finite(t) = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::validation("horizon_s", format!("must be positive, got {t}")));
            }
        }
        if let Some(eps) = self.epsilon_per_ms {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(Error::validation(
                    "epsilon_per_ms",
                    format!("must be nonnegative, got {eps}"),
                ));
            }
        }
        if let Some(grid) = &self.h_grid_ms {
            if grid.is_empty() {
                return Err(Error::validation("h_grid_ms", "grid is empty"));
            }
            if let Some(h) = grid.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
                return Err(Error::validation("h_grid_ms", format!("nonpositive interval {h}")));
            }
        }
        if let TauMode::Grid(taus) = &self.tau_mode {
            if taus.is_empty() {
                return Err(Error::validation("tau_mode.tau_grid_ms", "grid is empty"));
            }
            if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                return Err(Error::validation("tau_mode.tau_grid_ms", format!("nonpositive lag {t}")));
            }
        }
        if self.mc_replicates == 0 {
            return Err(Error::validation("mc_replicates", "must be at least 1"));
        }
        Ok(())
    }

    /// Checks grid entries against the network slot length.
    pub fn validate_for(&self, topology: &NetworkTopology) -> Result<()> {
        self.validate()?;
        let ts = topology.slot_ms();
        if let Some(h) = self.h_grid(topology).into_iter().find(|&h| h < ts) {
            return Err(Error::validation(
                "h_grid_ms",
                format!("sampling interval {h} ms is shorter than the {ts} ms slot"),
            ));
        }
        Ok(())
    }

    /// The sampling-interval grid in ms, defaulting to `t_s, 2 t_s, ..., 50 t_s`.
    pub fn h_grid(&self, topology: &NetworkTopology) -> Vec<f64> {
        match &self.h_grid_ms {
            Some(g) => g.clone(),
            None => default_h_grid(topology.slot_ms()),
        }
    }

    /// All `(h, tau)` pairs in ms, ordered by `h` then `tau`.
    pub fn grid_points(&self, topology: &NetworkTopology) -> Vec<(f64, f64)> {
        let mut hs = self.h_grid(topology);
        hs.sort_by(|a, b| a.total_cmp(b));
        let mut points = Vec::new();
        for h in hs {
            match &self.tau_mode {
                TauMode::EqualH => points.push((h, h)),
                TauMode::Grid(taus) => {
                    let mut taus = taus.clone();
                    taus.sort_by(|a, b| a.total_cmp(b));
                    points.extend(taus.into_iter().filter(|&t| t <= h).map(|t| (h, t)));
                }
            }
        }
        points
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: DesignFile = serde_json::from_str(s).map_err(parse_err("design file"))?;
        let horizon = match f.horizon_s {
            HorizonFile::Seconds(t) => Horizon::Finite(t),
            HorizonFile::Keyword(k) if k == "inf" => Horizon::Infinite,
            HorizonFile::Keyword(k) => {
                return Err(Error::validation("horizon_s", format!("expected a number or \"inf\", got {k:?}")))
            }
        };
        let tau_mode = match f.tau_mode {
            TauModeFile::Keyword(k) if k == "equal-h" => TauMode::EqualH,
            TauModeFile::Keyword(k) => {
                return Err(Error::validation(
                    "tau_mode",
                    format!("expected \"equal-h\" or {{\"tau_grid_ms\": [...]}}, got {k:?}"),
                ))
            }
            TauModeFile::Grid { tau_grid_ms } => TauMode::Grid(tau_grid_ms),
        };
        let cfg = DesignConfig {
            horizon,
            epsilon_per_ms: f.epsilon_per_ms,
            h_grid_ms: f.h_grid_ms,
            tau_mode,
            mc_replicates: f.mc_replicates,
            seed: f.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        let f = DesignFile {
            horizon_s: match self.horizon {
                Horizon::Finite(t) => HorizonFile::Seconds(t),
                Horizon::Infinite => HorizonFile::Keyword("inf".into()),
            },
            epsilon_per_ms: self.epsilon_per_ms,
            h_grid_ms: self.h_grid_ms.clone(),
            tau_mode: match &self.tau_mode {
                TauMode::EqualH => TauModeFile::Keyword("equal-h".into()),
                TauMode::Grid(t) => TauModeFile::Grid { tau_grid_ms: t.clone() },
            },
            mc_replicates: self.mc_replicates,
            seed: self.seed,
        };
        serde_json::to_string_pretty(&f).expect("design serialization")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json_string())
    }
}

pub fn default_h_grid(slot_ms: f64) -> Vec<f64> {
    (1..=DEFAULT_GRID_SLOTS).map(|k| k as f64 * slot_ms).collect()
}

pub fn load_design(path: &Path) -> Result<DesignConfig> {
    DesignConfig::from_json_str(&read_file(path)?)
}
