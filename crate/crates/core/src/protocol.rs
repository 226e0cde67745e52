//! Per-cluster sensor activation and active/sleep rotation.
//!
//! Each round the eligible (idle, alive) sensors are clustered with OPTICS.
//! Every cluster is covered independently: the member nearest the cluster
//! centroid is activated first, then activated sensors are expanded in
//! breadth-first order, each repeatedly taking the idle cluster neighbor
//! with the highest acceptance level
//!
//! ```text
//! L_j = (w_b * B_j + w_n * N_j) / (w_d * D_ij)
//! ```
//!
//! and skipping candidates whose boundary is almost entirely covered by
//! already active discs. The union of all cluster trees is the active set;
//! it sleeps for the following round(s) while the rest take over.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{overlap_angle, Disc, Point2D};
use crate::metrics::{self, RoundReport, DEFAULT_GRID_RESOLUTION};
use crate::network::{build_neighbor_table, send_req, Deployment, NeighborTable, NodeId, NodeState};
use crate::optics::{extract_clusters, optics_order, Cluster, ClusterAssignment, OpticsParams, OrderedPoint};

/// Coefficients of the acceptance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceWeights {
    pub battery: f64,
    pub neighbors: f64,
    pub distance: f64,
}

impl Default for AcceptanceWeights {
    fn default() -> Self {
        Self {
            battery: 0.4,
            neighbors: 0.3,
            distance: 0.2,
        }
    }
}

impl AcceptanceWeights {
    pub fn level(&self, battery: f64, neighbors: usize, distance: f64) -> Result<AcceptanceLevel> {
        if distance == 0.0 {
            return Err(Error::CoLocated);
        }
        let value = (self.battery * battery + self.neighbors * neighbors as f64) / (self.distance * distance);
        Ok(AcceptanceLevel {
            value,
            battery,
            neighbors,
            distance,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.battery, self.neighbors, self.distance]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
            && self.distance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "acceptance weights must be finite and non-negative, with a positive distance weight".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceLevel {
    pub value: f64,
    pub battery: f64,
    pub neighbors: usize,
    pub distance: f64,
}

/// `(0.4 * B + 0.3 * N) / (0.2 * D)`.
pub fn acceptance_level(battery: f64, neighbors: usize, distance: f64) -> Result<f64> {
    Ok(AcceptanceWeights::default().level(battery, neighbors, distance)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub weights: AcceptanceWeights,
    /// A candidate is skipped when its uncovered perimeter is below
    /// `theta * 2 * pi * r`.
    pub theta: f64,
    /// Battery removed from every active node per round.
    pub battery_drain: f64,
    /// Rounds an active node sleeps before becoming idle again.
    pub sleep_rounds: usize,
    /// Reachability cut for cluster extraction; `None` means `eps / 2`.
    pub eps_prime: Option<f64>,
    pub grid_resolution: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            weights: AcceptanceWeights::default(),
            theta: 0.1,
            battery_drain: 0.1,
            sleep_rounds: 1,
            eps_prime: None,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
        }
    }
}

impl ProtocolConfig {
    pub fn eps_prime(&self, params: &OpticsParams) -> f64 {
        self.eps_prime.unwrap_or(params.eps / 2.0)
    }

    pub fn validate(&self, params: &OpticsParams) -> Result<()> {
        self.weights.validate()?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!("theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.battery_drain >= 0.0 && self.battery_drain.is_finite()) {
            return Err(Error::InvalidConfig("battery drain must be non-negative".into()));
        }
        let cut = self.eps_prime(params);
        if !(cut > 0.0 && cut <= params.eps) {
            return Err(Error::InvalidConfig(format!(
                "eps_prime must lie in (0, eps = {}], got {cut}",
                params.eps
            )));
        }
        if self.grid_resolution < metrics::MIN_GRID_RESOLUTION {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least {}",
                metrics::MIN_GRID_RESOLUTION
            )));
        }
        Ok(())
    }
}

/// Activation tree of one cluster, rooted at its initial sensor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionTree {
    pub cluster_id: usize,
    pub root: NodeId,
    /// `(parent, child)` pairs in activation order.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl SelectionTree {
    /// Activated nodes in activation order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(self.root).chain(self.edges.iter().map(|&(_, c)| c))
    }

    pub fn len(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The cluster member closest to the members' centroid, lower id on ties.
pub fn choose_initial_sensor(cluster: &Cluster, deployment: &Deployment) -> Result<NodeId> {
    if cluster.members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let mut sx = 0.0;
    let mut sy = 0.0;
    for &id in &cluster.members {
        let p = deployment.node(id)?.position;
        sx += p.x;
        sy += p.y;
    }
    let k = cluster.members.len() as f64;
    let centroid = Point2D::new(sx / k, sy / k);
    let mut best: Option<(f64, NodeId)> = None;
    for &id in &cluster.members {
        let d = deployment.nodes[id].position.distance(&centroid);
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && id < bid),
        };
        if better {
            best = Some((d, id));
        }
    }
    Ok(best.expect("non-empty cluster").1)
}

/// Highest acceptance level among the neighbors of `current` that pass
/// `eligible`, lower id on ties.
fn best_candidate(
    current: NodeId,
    table: &NeighborTable,
    deployment: &Deployment,
    weights: &AcceptanceWeights,
    mut eligible: impl FnMut(NodeId) -> bool,
) -> Result<Option<NodeId>> {
    let mut best: Option<(f64, NodeId)> = None;
    for &(j, d) in table.neighbors(current)? {
        if !eligible(j) {
            continue;
        }
        let node = &deployment.nodes[j];
        let level = weights.level(node.battery, table.direct_neighbor_count(j)?, d)?.value;
        // neighbor lists are sorted by id, so a strict comparison keeps the lower id
        if best.is_none_or(|(bl, _)| level > bl) {
            best = Some((level, j));
        }
    }
    Ok(best.map(|(_, j)| j))
}

/// The idle neighbor of `current` that would answer its REQ with an ACK.
pub fn select_next(
    current: NodeId,
    table: &NeighborTable,
    deployment: &Deployment,
    weights: &AcceptanceWeights,
) -> Result<Option<NodeId>> {
    let idle: BTreeSet<NodeId> = send_req(current, table, deployment)?.into_iter().collect();
    best_candidate(current, table, deployment, weights, |j| idle.contains(&j))
}

/// Boundary of `candidate` left uncovered by the discs of `active`, with
/// the per-neighbor overlap arcs summed and capped at the full circle.
pub fn uncovered_perimeter(
    candidate: NodeId,
    active: &BTreeSet<NodeId>,
    table: &NeighborTable,
    radius: f64,
) -> Result<f64> {
    let mut overlapped = 0.0;
    for &(j, d) in table.neighbors(candidate)? {
        if active.contains(&j) {
            overlapped += 2.0 * overlap_angle(d, radius)?;
        }
    }
    Ok(radius * (2.0 * PI - overlapped.min(2.0 * PI)))
}

/// Grows the selection tree of one cluster.
///
/// Only idle members of `cluster` are considered. The result covers every
/// member reachable from the root through the `2r` adjacency graph: each
/// such member is either activated or was rejected as redundant while
/// within `2r` of an active node.
pub fn cover_cluster(
    cluster: &Cluster,
    deployment: &Deployment,
    table: &NeighborTable,
    config: &ProtocolConfig,
) -> Result<SelectionTree> {
    let root = choose_initial_sensor(cluster, deployment)?;
    let members: BTreeSet<NodeId> = cluster.members.iter().copied().collect();
    let min_uncovered = config.theta * 2.0 * PI * deployment.radius;

    let mut active = BTreeSet::from([root]);
    let mut rejected = BTreeSet::new();
    let mut edges = Vec::new();
    let mut frontier = VecDeque::from([root]);

    while let Some(current) = frontier.pop_front() {
        loop {
            let next = best_candidate(current, table, deployment, &config.weights, |j| {
                members.contains(&j)
                    && deployment.nodes[j].state == NodeState::Idle
                    && !active.contains(&j)
                    && !rejected.contains(&j)
            })?;
            let Some(next) = next else { break };
            if uncovered_perimeter(next, &active, table, deployment.radius)? < min_uncovered {
                rejected.insert(next);
                continue;
            }
            active.insert(next);
            edges.push((current, next));
            frontier.push_back(next);
        }
    }

    Ok(SelectionTree {
        cluster_id: cluster.id,
        root,
        edges,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    /// Number of completed rounds.
    pub round: usize,
    pub active: BTreeSet<NodeId>,
    /// Sleeping nodes and the rounds of sleep they have left.
    pub sleeping: BTreeMap<NodeId, usize>,
    pub trees: Vec<SelectionTree>,
}

/// Everything a round produced besides the next state.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutput {
    pub report: RoundReport,
    /// OPTICS ordering of the eligible nodes, labelled with node ids.
    pub ordering: Vec<OrderedPoint>,
    pub clusters: ClusterAssignment,
    pub trees: Vec<SelectionTree>,
    pub active: Vec<NodeId>,
}

/// Puts last round's actives to sleep and wakes nodes whose sleep is over.
fn rotate(state: &RoundState, deployment: &mut Deployment, sleep_rounds: usize) -> BTreeMap<NodeId, usize> {
    let mut sleeping = BTreeMap::new();
    for (&id, &left) in &state.sleeping {
        if left > 1 && deployment.nodes[id].is_alive() {
            sleeping.insert(id, left - 1);
        }
    }
    for &id in &state.active {
        if deployment.nodes[id].is_alive() && sleep_rounds > 0 {
            sleeping.insert(id, sleep_rounds);
        }
    }
    for node in &mut deployment.nodes {
        if !node.is_alive() {
            continue;
        }
        node.state = if sleeping.contains_key(&node.id) {
            NodeState::Sleeping
        } else {
            NodeState::Idle
        };
    }
    sleeping
}

/// Runs one clustering + activation round and drains the new actives.
pub fn run_round(
    state: &RoundState,
    deployment: &mut Deployment,
    params: &OpticsParams,
    config: &ProtocolConfig,
) -> Result<(RoundState, RoundOutput)> {
    let round = state.round + 1;
    if deployment.all_dead() {
        return Err(Error::AllNodesDead { round });
    }
    config.validate(params)?;
    let sleeping = rotate(state, deployment, config.sleep_rounds);

    let eligible: Vec<NodeId> = deployment
        .nodes
        .iter()
        .filter(|n| n.state == NodeState::Idle)
        .map(|n| n.id)
        .collect();

    let (ordering, clusters) = if eligible.is_empty() {
        (Vec::new(), ClusterAssignment::default())
    } else {
        let positions: Vec<Point2D> = eligible.iter().map(|&id| deployment.nodes[id].position).collect();
        let mut ordering = optics_order(&positions, params)?;
        for p in &mut ordering {
            p.point_id = eligible[p.point_id];
        }
        let clusters = extract_clusters(&ordering, config.eps_prime(params));
        (ordering, clusters)
    };

    let table = build_neighbor_table(deployment);
    let trees = clusters
        .clusters
        .iter()
        .map(|c| cover_cluster(c, deployment, &table, config))
        .collect::<Result<Vec<_>>>()?;

    let active: BTreeSet<NodeId> = trees.iter().flat_map(|t| t.nodes()).collect();
    for &id in &active {
        let node = &mut deployment.nodes[id];
        node.state = NodeState::Active;
        node.drain(config.battery_drain);
    }

    let discs: Vec<Disc> = active
        .iter()
        .map(|&id| Disc {
            center: deployment.nodes[id].position,
            radius: deployment.radius,
        })
        .collect();
    let report = RoundReport {
        round,
        deployed_count: deployment.len(),
        active_count: active.len(),
        cluster_count: clusters.len(),
        outlier_count: clusters.outliers.len(),
        ratio_r: metrics::active_ratio(active.len(), deployment.len()),
        analytic_cr: metrics::analytic_cr(active.len(), deployment.radius, deployment.area()),
        grid_cr: metrics::grid_cr(&discs, deployment.width, deployment.height, config.grid_resolution)?,
    };

    let next = RoundState {
        round,
        active: active.clone(),
        sleeping,
        trees: trees.clone(),
    };
    let output = RoundOutput {
        report,
        ordering,
        clusters,
        trees,
        active: active.into_iter().collect(),
    };
    Ok((next, output))
}

/// A deployment plus the rotation state that evolves over rounds.
#[derive(Debug, Clone)]
pub struct Simulation {
    deployment: Deployment,
    params: OpticsParams,
    config: ProtocolConfig,
    state: RoundState,
}

impl Simulation {
    pub fn new(deployment: Deployment, params: OpticsParams, config: ProtocolConfig) -> Result<Self> {
        params.validate()?;
        config.validate(&params)?;
        Ok(Self {
            deployment,
            params,
            config,
            state: RoundState::default(),
        })
    }

    pub fn step(&mut self) -> Result<RoundOutput> {
        let (state, output) = run_round(&self.state, &mut self.deployment, &self.params, &self.config)?;
        self.state = state;
        Ok(output)
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn state(&self) -> &RoundState {
        &self.state
    }

    pub fn params(&self) -> &OpticsParams {
        &self.params
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }
}

/// Runs `rounds` consecutive rounds, stopping with
/// [`Error::AllNodesDead`] if the field is exhausted first.
pub fn run_simulation(
    deployment: &Deployment,
    params: &OpticsParams,
    config: &ProtocolConfig,
    rounds: usize,
) -> Result<Vec<RoundReport>> {
    if rounds == 0 {
        return Err(Error::InvalidInput("rounds must be at least 1".into()));
    }
    let mut sim = Simulation::new(deployment.clone(), *params, config.clone())?;
    (0..rounds).map(|_| sim.step().map(|o| o.report)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::SensorNode;

    fn field(points: &[(f64, f64)], batteries: &[f64]) -> Deployment {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| SensorNode {
                id: i,
                position: Point2D::new(x, y),
                battery: batteries.get(i).copied().unwrap_or(1.0),
                radius: 5.0,
                state: NodeState::Idle,
            })
            .collect();
        Deployment::new(nodes, 100.0, 100.0, 5.0, 0).unwrap()
    }

    fn cluster(ids: &[NodeId]) -> Cluster {
        Cluster {
            id: 0,
            members: ids.to_vec(),
        }
    }

    #[test]
    fn acceptance_examples() {
        assert!((acceptance_level(1.0, 2, 5.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((acceptance_level(0.5, 3, 2.0).unwrap() - 2.75).abs() < 1e-12);
        assert_eq!(acceptance_level(0.0, 0, 3.0).unwrap(), 0.0);
        assert!(matches!(acceptance_level(1.0, 1, 0.0), Err(Error::CoLocated)));
    }

    #[test]
    fn initial_sensor_examples() {
        let d = field(&[(10.0, 10.0)], &[]);
        assert_eq!(choose_initial_sensor(&cluster(&[0]), &d).unwrap(), 0);

        let d = field(&[(0.0, 0.0), (1.0, 0.0), (10.0, 0.0)], &[]);
        assert_eq!(choose_initial_sensor(&cluster(&[0, 1, 2]), &d).unwrap(), 1);

        let d = field(&[(11.0, 11.0), (9.0, 11.0), (9.0, 9.0), (11.0, 9.0)], &[]);
        assert_eq!(choose_initial_sensor(&cluster(&[3, 2, 1, 0]), &d).unwrap(), 0);

        assert!(matches!(choose_initial_sensor(&cluster(&[]), &d), Err(Error::EmptyCluster)));
    }

    #[test]
    fn select_next_prefers_higher_level() {
        // candidate 1: B=1.0, N=2, D=4 -> 1.25; candidate 2: B=0.6, N=3, D=4 -> 1.425
        let d = field(&[(20.0, 20.0), (16.0, 20.0), (24.0, 20.0), (33.0, 20.0)], &[1.0, 1.0, 0.6, 1.0]);
        let t = build_neighbor_table(&d);
        assert_eq!(t.direct_neighbor_count(1).unwrap(), 2);
        assert_eq!(t.direct_neighbor_count(2).unwrap(), 3);
        let w = AcceptanceWeights::default();
        assert!((w.level(1.0, 1, 4.0).unwrap().value - 0.875).abs() < 1e-12);
        assert!((w.level(0.6, 2, 4.0).unwrap().value - 1.05).abs() < 1e-12);
        assert_eq!(select_next(0, &t, &d, &w).unwrap(), Some(2));
    }

    #[test]
    fn select_next_without_idle_neighbors() {
        let mut d = field(&[(20.0, 20.0), (22.0, 20.0), (60.0, 60.0)], &[]);
        let t = build_neighbor_table(&d);
        let w = AcceptanceWeights::default();
        assert_eq!(select_next(2, &t, &d, &w).unwrap(), None);
        d.nodes[1].state = NodeState::Sleeping;
        assert_eq!(select_next(0, &t, &d, &w).unwrap(), None);
    }

    #[test]
    fn select_next_ties_go_to_lower_id() {
        let d = field(&[(20.0, 20.0), (17.0, 20.0), (23.0, 20.0)], &[]);
        let t = build_neighbor_table(&d);
        assert_eq!(select_next(0, &t, &d, &AcceptanceWeights::default()).unwrap(), Some(1));
    }

    #[test]
    fn cover_singleton() {
        let d = field(&[(10.0, 10.0)], &[]);
        let t = build_neighbor_table(&d);
        let tree = cover_cluster(&cluster(&[0]), &d, &t, &ProtocolConfig::default()).unwrap();
        assert_eq!(tree.root, 0);
        assert!(tree.edges.is_empty());
    }

    #[test]
    fn cover_three_in_a_row() {
        let d = field(&[(10.0, 10.0), (17.5, 10.0), (25.0, 10.0)], &[]);
        let t = build_neighbor_table(&d);
        let tree = cover_cluster(&cluster(&[0, 1, 2]), &d, &t, &ProtocolConfig::default()).unwrap();
        let active: Vec<_> = tree.nodes().collect();
        assert!(active.len() <= 3);
        for id in 0..3 {
            let p = d.nodes[id].position;
            assert!(active.iter().any(|&a| d.nodes[a].position.distance(&p) <= 10.0));
        }
    }

    #[test]
    fn cover_colocated_is_an_error() {
        let d = field(&[(10.0, 10.0), (10.0, 10.0)], &[]);
        let t = build_neighbor_table(&d);
        let res = cover_cluster(&cluster(&[0, 1]), &d, &t, &ProtocolConfig::default());
        assert!(matches!(res, Err(Error::CoLocated)));
    }

    #[test]
    fn redundant_candidate_is_skipped() {
        // 1 and 2 sit on either side of 3; once they are active, 3's
        // boundary is fully covered and it must not be activated.
        let d = field(&[(20.0, 20.0), (17.0, 20.0), (23.0, 20.0), (20.0, 23.0)], &[1.0, 1.0, 1.0, 0.1]);
        let t = build_neighbor_table(&d);
        let active = BTreeSet::from([0, 1, 2]);
        assert!(uncovered_perimeter(3, &active, &t, 5.0).unwrap() < 0.1 * 2.0 * PI * 5.0);
        let tree = cover_cluster(&cluster(&[0, 1, 2, 3]), &d, &t, &ProtocolConfig::default()).unwrap();
        assert!(!tree.nodes().any(|n| n == 3));
    }

    #[test]
    fn isolated_nodes_activate_each_cluster_seed() {
        let d = field(&[(5.0, 5.0), (30.0, 5.0), (5.0, 30.0), (60.0, 60.0)], &[]);
        let t = build_neighbor_table(&d);
        assert!((0..4).all(|i| t.direct_neighbor_count(i).unwrap() == 0));
        let mut sim = Simulation::new(d, OpticsParams::new(10.0, 1).unwrap(), ProtocolConfig::default()).unwrap();
        let out = sim.step().unwrap();
        assert_eq!(out.report.cluster_count, 4);
        assert_eq!(out.active, vec![0, 1, 2, 3]);
        assert!(out.trees.iter().all(|t| t.edges.is_empty()));
    }

    #[test]
    fn outliers_stay_idle() {
        let d = field(&[(5.0, 5.0), (30.0, 5.0), (5.0, 30.0)], &[]);
        let mut sim = Simulation::new(d, OpticsParams::new(10.0, 2).unwrap(), ProtocolConfig::default()).unwrap();
        let out = sim.step().unwrap();
        assert_eq!(out.report.cluster_count, 0);
        assert_eq!(out.report.active_count, 0);
        assert_eq!(out.clusters.outliers, vec![0, 1, 2]);
    }

    #[test]
    fn sleep_rotation_and_exhaustion() {
        // Two isolated singleton clusters with min_pts = 1: active, sleep, active...
        let d = field(&[(10.0, 10.0), (60.0, 60.0)], &[]);
        let config = ProtocolConfig {
            battery_drain: 0.5,
            ..ProtocolConfig::default()
        };
        let params = OpticsParams::new(10.0, 1).unwrap();
        let mut sim = Simulation::new(d.clone(), params, config.clone()).unwrap();
        let counts: Vec<_> = (0..3).map(|_| sim.step().unwrap().report.active_count).collect();
        assert_eq!(counts, vec![2, 0, 2]);
        assert!(sim.deployment().all_dead());
        assert!(matches!(sim.step(), Err(Error::AllNodesDead { round: 4 })));
        assert!(matches!(
            run_simulation(&d, &params, &config, 10),
            Err(Error::AllNodesDead { round: 4 })
        ));
        assert_eq!(run_simulation(&d, &params, &config, 1).unwrap().len(), 1);
    }

    #[test]
    fn invalid_config_rejected() {
        let params = OpticsParams::new(10.0, 2).unwrap();
        let bad_theta = ProtocolConfig {
            theta: 1.5,
            ..ProtocolConfig::default()
        };
        assert!(bad_theta.validate(&params).is_err());
        let bad_cut = ProtocolConfig {
            eps_prime: Some(11.0),
            ..ProtocolConfig::default()
        };
        assert!(bad_cut.validate(&params).is_err());
    }
}
