#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsn_coverage::Point2D;

/// One row of the reference ordering: `(point_id, reachability, core_distance)`.
pub type OracleRow = (usize, Option<f64>, Option<f64>);

fn dist(a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    (dx * dx + dy * dy).sqrt()
}

/// Quadratic OPTICS written from the definitions, with no heap and no index.
///
/// The next point is the unprocessed one with the smallest defined
/// reachability (lower id on ties); when no unprocessed point has one, the
/// lowest unprocessed id starts a new group with undefined reachability.
pub fn brute_force_optics(points: &[Point2D], eps: f64, min_pts: usize) -> Vec<OracleRow> {
    let n = points.len();
    let core: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let mut ds: Vec<f64> = (0..n)
                .map(|j| dist(points[i], points[j]))
                .filter(|&d| d <= eps)
                .collect();
            ds.sort_by(f64::total_cmp);
            ds.get(min_pts - 1).copied()
        })
        .collect();

    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next: Option<usize> = None;
        for q in 0..n {
            if processed[q] {
                continue;
            }
            let Some(rq) = reach[q] else { continue };
            match next {
                Some(b) if reach[b].unwrap() <= rq => {}
                _ => next = Some(q),
            }
        }
        let p = next.unwrap_or_else(|| (0..n).find(|&q| !processed[q]).unwrap());
        processed[p] = true;
        out.push((p, reach[p], core[p]));
        if let Some(c) = core[p] {
            for q in 0..n {
                let d = dist(points[p], points[q]);
                if processed[q] || d > eps {
                    continue;
                }
                let candidate = c.max(d);
                if reach[q].is_none_or(|r| candidate < r) {
                    reach[q] = Some(candidate);
                }
            }
        }
    }
    out
}

/// A random point set; odd seeds snap to a coarse lattice so that equal
/// distances and coincident points show up.
pub fn random_dataset(seed: u64, n: usize) -> Vec<Point2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if seed % 2 == 1 {
                Point2D::new(rng.random_range(0..10) as f64, rng.random_range(0..10) as f64)
            } else {
                Point2D::new(rng.random_range(0.0..30.0), rng.random_range(0.0..30.0))
            }
        })
        .collect()
}

/// `per_blob` points spread uniformly over a disc of radius `spread`
/// around each center; returns the points and their blob labels.
pub fn blobs(seed: u64, centers: &[(f64, f64)], per_blob: usize, spread: f64) -> (Vec<Point2D>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (label, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            let r = spread * rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            points.push(Point2D::new(cx + r * t.cos(), cy + r * t.sin()));
            labels.push(label);
        }
    }
    (points, labels)
}

/// Fraction of `samples` uniformly random points on the boundary of a disc of
/// radius `r` that fall outside a second disc of radius `r` at distance `d`.
pub fn boundary_outside_fraction(d: f64, r: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outside = (0..samples)
        .filter(|_| {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let (x, y) = (r * t.cos(), r * t.sin());
            (x - d).powi(2) + y * y > r * r
        })
        .count();
    outside as f64 / samples as f64
}
