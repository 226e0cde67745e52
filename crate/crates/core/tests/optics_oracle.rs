mod common;

use common::{blobs, brute_force_optics, random_dataset};
use proptest::prelude::*;
use wsn_coverage::optics::{extract_clusters, optics_order};
use wsn_coverage::{OpticsParams, Point2D};

fn as_rows(points: &[Point2D], eps: f64, min_pts: usize) -> Vec<(usize, Option<f64>, Option<f64>)> {
    let params = OpticsParams::new(eps, min_pts).unwrap();
    optics_order(points, &params)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            assert_eq!(p.order_index, i);
            (p.point_id, p.reachability, p.core_distance)
        })
        .collect()
}

#[test]
fn matches_oracle_on_lattice_and_continuous_data() {
    for seed in 0..60 {
        let n = 1 + (seed as usize * 7) % 60;
        let points = random_dataset(seed, n);
        for (eps, min_pts) in [(1.0, 2), (2.5, 3), (6.0, 5), (40.0, 1)] {
            assert_eq!(
                as_rows(&points, eps, min_pts),
                brute_force_optics(&points, eps, min_pts),
                "seed {seed} n {n} eps {eps} min_pts {min_pts}"
            );
        }
    }
}

#[test]
fn grid_index_path_matches_oracle_on_large_input() {
    let points = random_dataset(4, 400);
    assert_eq!(as_rows(&points, 3.0, 4), brute_force_optics(&points, 3.0, 4));
}

#[test]
fn well_separated_blobs_are_recovered() {
    let centers = [(10.0, 10.0), (40.0, 10.0), (25.0, 40.0)];
    for seed in 0..20 {
        let (points, labels) = blobs(seed, &centers, 25, 1.5);
        let params = OpticsParams::new(5.0, 4).unwrap();
        let clusters = extract_clusters(&optics_order(&points, &params).unwrap(), 2.5);
        assert_eq!(clusters.len(), 3);
        assert!(clusters.outliers.is_empty());
        for c in &clusters.clusters {
            let label = labels[c.members[0]];
            assert!(c.members.iter().all(|&m| labels[m] == label));
        }
    }
}

#[test]
fn single_point_is_its_own_group() {
    let rows = as_rows(&[Point2D::new(1.0, 1.0)], 5.0, 1);
    assert_eq!(rows, vec![(0, None, Some(0.0))]);
}

proptest! {
    #[test]
    fn ordering_is_a_permutation_and_matches_oracle(
        coords in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..45),
        eps in 0.5f64..10.0,
        min_pts in 1usize..6,
    ) {
        let points: Vec<Point2D> = coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect();
        let rows = as_rows(&points, eps, min_pts);
        let mut ids: Vec<usize> = rows.iter().map(|r| r.0).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..points.len()).collect::<Vec<_>>());
        prop_assert_eq!(rows, brute_force_optics(&points, eps, min_pts));
    }

    #[test]
    fn reachability_and_core_distance_are_bounded_by_eps(
        coords in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 2..40),
        eps in 1.0f64..8.0,
    ) {
        let points: Vec<Point2D> = coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect();
        for (_, reach, core) in as_rows(&points, eps, 3) {
            if let Some(r) = reach {
                prop_assert!(r <= eps);
            }
            if let Some(c) = core {
                prop_assert!(c <= eps);
            }
        }
    }

    #[test]
    fn lower_cut_never_merges_clusters(
        coords in prop::collection::vec((0.0f64..30.0, 0.0f64..30.0), 1..60),
        cut in 0.5f64..5.0,
    ) {
        let points: Vec<Point2D> = coords.iter().map(|&(x, y)| Point2D::new(x, y)).collect();
        let ordering = optics_order(&points, &OpticsParams::new(5.0, 3).unwrap()).unwrap();
        let coarse = extract_clusters(&ordering, cut);
        let fine = extract_clusters(&ordering, cut / 2.0);
        prop_assert_eq!(coarse.point_count(), points.len());
        prop_assert_eq!(fine.point_count(), points.len());
        for c in &fine.clusters {
            let home = coarse.clusters.iter().find(|k| k.members.contains(&c.members[0]));
            let home = home.expect("fine cluster members are clustered at the coarser cut");
            prop_assert!(c.members.iter().all(|m| home.members.contains(m)));
        }
    }
}
