//! Fixed-radius neighbor queries over a point set.

use std::collections::HashMap;

use crate::geometry::{euclidean_distance, Point2D};

/// Below this size a linear scan beats building buckets.
const GRID_MIN_POINTS: usize = 32;

/// Fixed-radius neighbor search, bucketed on a uniform grid when the set is
/// large enough and a plain O(n^2) scan otherwise.
#[derive(Debug, Clone)]
pub enum NeighborIndex<'a> {
    Naive { points: &'a [Point2D] },
    Grid(GridIndex<'a>),
}

impl<'a> NeighborIndex<'a> {
    /// Picks a grid with cells of side `cell` for large inputs.
    pub fn new(points: &'a [Point2D], cell: f64) -> Self {
        if points.len() < GRID_MIN_POINTS || !(cell > 0.0 && cell.is_finite()) {
            NeighborIndex::Naive { points }
        } else {
            NeighborIndex::Grid(GridIndex::new(points, cell))
        }
    }

    pub fn naive(points: &'a [Point2D]) -> Self {
        NeighborIndex::Naive { points }
    }

    pub fn points(&self) -> &'a [Point2D] {
        match self {
            NeighborIndex::Naive { points } => points,
            NeighborIndex::Grid(g) => g.points,
        }
    }

    /// Indices of all points within `radius` (inclusive) of point `i`,
    /// including `i` itself, paired with their distance, sorted by index.
    pub fn within(&self, i: usize, radius: f64) -> Vec<(usize, f64)> {
        match self {
            NeighborIndex::Naive { points } => {
                let p = points[i];
                points
                    .iter()
                    .enumerate()
                    .filter_map(|(j, q)| {
                        let d = euclidean_distance(p, *q);
                        (d <= radius).then_some((j, d))
                    })
                    .collect()
            }
            NeighborIndex::Grid(g) => g.within(i, radius),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridIndex<'a> {
    points: &'a [Point2D],
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    pub fn new(points: &'a [Point2D], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(cell_of(*p, cell)).or_default().push(i);
        }
        Self {
            points,
            cell,
            buckets,
        }
    }

    pub fn within(&self, i: usize, radius: f64) -> Vec<(usize, f64)> {
        let p = self.points[i];
        let (cx, cy) = cell_of(p, self.cell);
        let reach = (radius / self.cell).ceil() as i64;
        let mut out = Vec::new();
        for gx in cx - reach..=cx + reach {
            for gy in cy - reach..=cy + reach {
                if let Some(bucket) = self.buckets.get(&(gx, gy)) {
                    for &j in bucket {
                        let d = euclidean_distance(p, self.points[j]);
                        if d <= radius {
                            out.push((j, d));
                        }
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(j, _)| j);
        out
    }
}

fn cell_of(p: Point2D, cell: f64) -> (i64, i64) {
    ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point2D> = (0..300)
            .map(|_| Point2D::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0)))
            .collect();
        let grid = NeighborIndex::new(&pts, 10.0);
        assert!(matches!(grid, NeighborIndex::Grid(_)));
        let naive = NeighborIndex::naive(&pts);
        for radius in [0.5, 3.0, 10.0, 17.0] {
            for i in (0..pts.len()).step_by(7) {
                assert_eq!(grid.within(i, radius), naive.within(i, radius));
            }
        }
    }

    #[test]
    fn boundary_is_inclusive() {
        let pts = [Point2D::new(0.0, 0.0), Point2D::new(3.0, 4.0)];
        let idx = NeighborIndex::new(&pts, 5.0);
        assert_eq!(idx.within(0, 5.0).len(), 2);
        assert_eq!(idx.within(0, 4.999).len(), 1);
    }
}
