//! Sensor field model: nodes, deployments, neighbor relations and the
//! REQ side of the activation handshake.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::spatial::NeighborIndex;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeState {
    Active,
    Sleeping,
    Idle,
    Dead,
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeState::Active => "active",
            NodeState::Sleeping => "sleeping",
            NodeState::Idle => "idle",
            NodeState::Dead => "dead",
        })
    }
}

impl FromStr for NodeState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "active" => Ok(NodeState::Active),
            "sleeping" => Ok(NodeState::Sleeping),
            "idle" => Ok(NodeState::Idle),
            "dead" => Ok(NodeState::Dead),
            other => Err(Error::InvalidInput(format!("unknown node state {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Point2D,
    /// Normalized remaining battery in `[0, 1]`.
    pub battery: f64,
    pub radius: f64,
    pub state: NodeState,
}

impl SensorNode {
    pub fn is_alive(&self) -> bool {
        self.state != NodeState::Dead
    }

    /// Removes `amount` of battery, clamping at zero; an empty node is dead.
    pub fn drain(&mut self, amount: f64) {
        let amount = amount.max(0.0);
        self.battery = (self.battery - amount).clamp(0.0, 1.0);
        if self.battery == 0.0 {
            self.state = NodeState::Dead;
        }
    }
}

/// Returns `node` with `amount` of battery drained.
pub fn drain_battery(mut node: SensorNode, amount: f64) -> SensorNode {
    node.drain(amount);
    node
}

/// Initial battery draw, uniform over `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryRange {
    pub low: f64,
    pub high: f64,
}

impl Default for BatteryRange {
    fn default() -> Self {
        Self { low: 0.5, high: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub nodes: Vec<SensorNode>,
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    pub seed: u64,
}

impl Deployment {
    /// Builds a deployment, checking that node `i` has id `i`, lies inside
    /// the region and carries a consistent battery/state pair.
    pub fn new(nodes: Vec<SensorNode>, width: f64, height: f64, radius: f64, seed: u64) -> Result<Self> {
        check_region(width, height, radius)?;
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidInput(format!(
                    "node ids must be 0..{} in order; found {} at position {i}",
                    nodes.len(),
                    n.id
                )));
            }
            let p = n.position;
            if !p.is_finite() || p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height {
                return Err(Error::InvalidInput(format!("node {i} lies outside the region")));
            }
            if !(0.0..=1.0).contains(&n.battery) {
                return Err(Error::InvalidInput(format!("node {i} battery {} outside [0,1]", n.battery)));
            }
            if (n.battery == 0.0) != (n.state == NodeState::Dead) {
                return Err(Error::InvalidInput(format!(
                    "node {i}: state must be dead exactly when battery is 0"
                )));
            }
        }
        let nodes = nodes
            .into_iter()
            .map(|n| SensorNode { radius, ..n })
            .collect();
        Ok(Self {
            nodes,
            width,
            height,
            radius,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn node(&self, id: NodeId) -> Result<&SensorNode> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut SensorNode> {
        self.nodes.get_mut(id).ok_or(Error::UnknownNode(id))
    }

    pub fn positions(&self) -> Vec<Point2D> {
        self.nodes.iter().map(|n| n.position).collect()
    }

    pub fn total_battery(&self) -> f64 {
        self.nodes.iter().map(|n| n.battery).sum()
    }

    pub fn all_dead(&self) -> bool {
        self.nodes.iter().all(|n| !n.is_alive())
    }

    /// Writes `id,x,y,battery,state` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for n in &self.nodes {
            w.serialize(NodeRow {
                id: n.id,
                x: n.position.x,
                y: n.position.y,
                battery: n.battery,
                state: n.state,
            })?;
        }
        w.flush().map_err(|e| Error::io("<deployment csv>", e))?;
        Ok(())
    }

    /// Reads `id,x,y,battery,state` rows; rows may come in any order.
    pub fn read_csv<R: Read>(reader: R, width: f64, height: f64, radius: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut nodes = Vec::new();
        for row in r.deserialize::<NodeRow>() {
            let row = row?;
            nodes.push(SensorNode {
                id: row.id,
                position: Point2D::new(row.x, row.y),
                battery: row.battery,
                radius,
                state: row.state,
            });
        }
        nodes.sort_by_key(|n| n.id);
        Self::new(nodes, width, height, radius, 0)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    id: NodeId,
    x: f64,
    y: f64,
    battery: f64,
    state: NodeState,
}

fn check_region(width: f64, height: f64, radius: f64) -> Result<()> {
    for (name, v) in [("width", width), ("height", height), ("radius", radius)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Places `count` idle sensors uniformly at random with the default battery range.
pub fn generate_deployment(count: usize, width: f64, height: f64, radius: f64, seed: u64) -> Result<Deployment> {
    generate_deployment_with(count, width, height, radius, seed, BatteryRange::default())
}

pub fn generate_deployment_with(
    count: usize,
    width: f64,
    height: f64,
    radius: f64,
    seed: u64,
    battery: BatteryRange,
) -> Result<Deployment> {
    check_region(width, height, radius)?;
    if count == 0 {
        return Err(Error::InvalidConfig("deployment needs at least one node".into()));
    }
    if !(0.0 < battery.low && battery.low <= battery.high && battery.high <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "battery range must satisfy 0 < low <= high <= 1, got [{}, {}]",
            battery.low, battery.high
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..count)
        .map(|id| {
            let position = Point2D::new(rng.random_range(0.0..width), rng.random_range(0.0..height));
            let battery = rng.random_range(battery.low..=battery.high);
            SensorNode {
                id,
                position,
                battery,
                radius,
                state: NodeState::Idle,
            }
        })
        .collect();
    Ok(Deployment {
        nodes,
        width,
        height,
        radius,
        seed,
    })
}

/// Communication neighbors: nodes within `2r` of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    lists: Vec<Vec<(NodeId, f64)>>,
}

impl NeighborTable {
    pub fn neighbors(&self, id: NodeId) -> Result<&[(NodeId, f64)]> {
        self.lists.get(id).map(Vec::as_slice).ok_or(Error::UnknownNode(id))
    }

    /// `N_j`, the number of direct neighbors of `id`.
    pub fn direct_neighbor_count(&self, id: NodeId) -> Result<usize> {
        Ok(self.neighbors(id)?.len())
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let list = self.lists.get(a)?;
        list.binary_search_by_key(&b, |&(j, _)| j).ok().map(|k| list[k].1)
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

pub fn build_neighbor_table(deployment: &Deployment) -> NeighborTable {
    let positions = deployment.positions();
    let range = 2.0 * deployment.radius;
    let index = NeighborIndex::new(&positions, range);
    let lists = (0..positions.len())
        .map(|i| index.within(i, range).into_iter().filter(|&(j, _)| j != i).collect())
        .collect();
    NeighborTable { lists }
}

/// Broadcast a REQ from `from`: the idle neighbors that can answer.
pub fn send_req(from: NodeId, table: &NeighborTable, deployment: &Deployment) -> Result<Vec<NodeId>> {
    deployment.node(from)?;
    Ok(table
        .neighbors(from)?
        .iter()
        .filter(|&&(j, _)| deployment.nodes[j].state == NodeState::Idle)
        .map(|&(j, _)| j)
        .collect())
}
