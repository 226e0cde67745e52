//! OPTICS ordering and horizontal-cut cluster extraction.
//!
//! Points are identified by their index in the input slice. The
//! neighborhood of a point always contains the point itself, so
//! `min_pts = 1` makes every point a core point with core distance 0.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, Point2D};
use crate::spatial::NeighborIndex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsParams {
    /// Maximum neighborhood radius.
    pub eps: f64,
    /// Neighborhood size (self included) needed for a core point.
    pub min_pts: usize,
}

impl OpticsParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        let params = Self { eps, min_pts };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {}", self.eps)));
        }
        if self.min_pts < 1 {
            return Err(Error::InvalidConfig("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One entry of the OPTICS output ordering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderedPoint {
    pub point_id: usize,
    pub order_index: usize,
    /// `None` marks the first point of a density-connected group.
    pub reachability: Option<f64>,
    /// `None` unless the point is a core point.
    pub core_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Member point ids in ascending order.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Cluster>,
    /// Outlier point ids in ascending order.
    pub outliers: Vec<usize>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.outliers.len() + self.clusters.iter().map(|c| c.members.len()).sum::<usize>()
    }
}

/// Core distance from an already computed neighborhood (distances only).
fn core_from_neighborhood(neighbors: &[(usize, f64)], min_pts: usize) -> Option<f64> {
    if neighbors.len() < min_pts {
        return None;
    }
    let mut dists: Vec<f64> = neighbors.iter().map(|&(_, d)| d).collect();
    let (_, kth, _) = dists.select_nth_unstable_by(min_pts - 1, f64::total_cmp);
    Some(*kth)
}

/// Distance from `p` to its `min_pts`-th closest point (itself included)
/// within `eps`, or `None` when the neighborhood is too sparse.
pub fn core_distance(p: usize, points: &[Point2D], params: &OpticsParams) -> Option<f64> {
    let index = NeighborIndex::naive(points);
    core_from_neighborhood(&index.within(p, params.eps), params.min_pts)
}

/// `max(core_distance(p), dist(p, q))`, undefined when `p` is not a core point.
pub fn reachability_distance(
    p: usize,
    q: usize,
    points: &[Point2D],
    params: &OpticsParams,
) -> Option<f64> {
    let core = core_distance(p, points, params)?;
    Some(core.max(euclidean_distance(points[p], points[q])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Seed {
    reach: f64,
    id: usize,
}

impl Eq for Seed {}

impl Ord for Seed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.reach
            .total_cmp(&other.reach)
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for Seed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes the OPTICS cluster ordering.
///
/// Each outer iteration starts from the lowest unprocessed id; the order
/// seed is drained by ascending reachability, ties going to the lower id.
/// Reachability of a seed only ever decreases.
pub fn optics_order(points: &[Point2D], params: &OpticsParams) -> Result<Vec<OrderedPoint>> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidInput("OPTICS needs at least one point".into()));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
    }

    let n = points.len();
    let index = NeighborIndex::new(points, params.eps);
    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut seeds: BinaryHeap<Reverse<Seed>> = BinaryHeap::new();
    let mut out = Vec::with_capacity(n);

    let emit = |p: usize, processed: &mut [bool], reach: &[Option<f64>], out: &mut Vec<OrderedPoint>| {
        processed[p] = true;
        let neighbors = index.within(p, params.eps);
        let core = core_from_neighborhood(&neighbors, params.min_pts);
        out.push(OrderedPoint {
            point_id: p,
            order_index: out.len(),
            reachability: reach[p],
            core_distance: core,
        });
        core.map(|c| (neighbors, c))
    };

    for start in 0..n {
        if processed[start] {
            continue;
        }
        let mut frontier = emit(start, &mut processed, &reach, &mut out);
        loop {
            if let Some((neighbors, core)) = frontier.take() {
                for (q, d) in neighbors {
                    if processed[q] {
                        continue;
                    }
                    let candidate = core.max(d);
                    if reach[q].is_none_or(|old| candidate < old) {
                        reach[q] = Some(candidate);
                        seeds.push(Reverse(Seed { reach: candidate, id: q }));
                    }
                }
            }
            let Some(Reverse(next)) = seeds.pop() else { break };
            // stale heap entries
            if processed[next.id] || reach[next.id] != Some(next.reach) {
                continue;
            }
            frontier = emit(next.id, &mut processed, &reach, &mut out);
        }
    }
    Ok(out)
}

/// Horizontal cut of the reachability plot at `eps_prime`.
///
/// A point with reachability above the cut (or undefined) opens a new
/// cluster when its core distance is within the cut and is an outlier
/// otherwise; points below the cut join the current cluster.
pub fn extract_clusters(ordering: &[OrderedPoint], eps_prime: f64) -> ClusterAssignment {
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut outliers = Vec::new();
    let mut open = false;
    for entry in ordering {
        let reached = entry.reachability.is_some_and(|r| r <= eps_prime);
        if reached && open {
            clusters.last_mut().expect("open cluster").members.push(entry.point_id);
        } else if reached || entry.core_distance.is_some_and(|c| c <= eps_prime) {
            clusters.push(Cluster {
                id: clusters.len(),
                members: vec![entry.point_id],
            });
            open = true;
        } else {
            outliers.push(entry.point_id);
            open = false;
        }
    }
    for c in &mut clusters {
        c.members.sort_unstable();
    }
    outliers.sort_unstable();
    ClusterAssignment { clusters, outliers }
}

/// Writes the reachability plot as `order_index,point_id,reachability,core_distance`,
/// leaving undefined values empty.
pub fn write_reachability_csv<W: Write>(ordering: &[OrderedPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["order_index", "point_id", "reachability", "core_distance"])?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in ordering {
        w.write_record([
            p.order_index.to_string(),
            p.point_id.to_string(),
            fmt(p.reachability),
            fmt(p.core_distance),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<reachability csv>", e))?;
    Ok(())
}
