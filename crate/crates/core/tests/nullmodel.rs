mod common;

use certmap::experiments::median;
use certmap::invariants::InvariantKind;
use certmap::mapper::{build_mapper, FilterSpec, MapperOptions};
use certmap::nullmodel::{build_null_batches, sample_null, InvariantSpec, NullSims};
use certmap::rng::RngSpec;
use certmap::{BoundingBox, PointCloud};
use common::{mean_and_se, random_points};

#[test]
fn unit_box_moments() {
    let bbox = BoundingBox::from_widths(&[1.0, 1.0]).unwrap();
    let c = sample_null(&bbox, 1000, &mut RngSpec::new(3).stream(0)).unwrap();
    for k in 0..2 {
        let (mean, _) = mean_and_se(&c.coordinate(k).unwrap());
        let bound = 3.0 * (1.0f64 / 12.0).sqrt() / 1000f64.sqrt();
        assert!((mean - 0.5).abs() < bound, "axis {k}: mean {mean}");
    }
}

#[test]
fn zero_width_axis() {
    let bbox = BoundingBox::new(vec![0.0, 2.5], vec![1.0, 2.5]).unwrap();
    let c = sample_null(&bbox, 50, &mut RngSpec::new(3).stream(1)).unwrap();
    assert!(c.points().iter().all(|p| p[1] == 2.5));
}

#[test]
fn same_stream_same_cloud() {
    let bbox = BoundingBox::from_widths(&[1.0, 3.0, 0.5]).unwrap();
    let rng = RngSpec::new(9);
    let a = sample_null(&bbox, 40, &mut rng.stream(4)).unwrap();
    let b = sample_null(&bbox, 40, &mut rng.stream(4)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn batches_count_contain_and_reproduce() {
    let cloud = PointCloud::new(random_points(21, 60, 2)).unwrap();
    let m = build_mapper(
        &cloud,
        &FilterSpec::coordinate(0, 4, 0.5).unwrap(),
        &MapperOptions::default(),
    )
    .unwrap();
    let rng = RngSpec::new(77);
    let nb = build_null_batches(&cloud, &m, 100, &rng).unwrap();
    assert_eq!(nb.batches.len() + nb.skipped.len(), m.simplices.len());
    for b in &nb.batches {
        assert_eq!(b.n_points, m.simplices[b.simplex].member_points.len());
        let NullSims::Clouds(clouds) = &b.sims else {
            panic!("expected clouds")
        };
        assert_eq!(clouds.len(), 99);
        for c in clouds {
            assert_eq!(c.len(), b.n_points);
            assert!(c.points().iter().all(|p| b.bbox.contains(p)));
        }
    }
    for s in &nb.skipped {
        assert!(m.simplices[s.simplex].member_points.len() < 2);
    }
    assert_eq!(nb, build_null_batches(&cloud, &m, 100, &rng).unwrap());
}

#[test]
fn singleton_simplex_is_skipped() {
    let cloud = PointCloud::new(vec![vec![0.0], vec![0.05], vec![9.0]]).unwrap();
    let m = build_mapper(
        &cloud,
        &FilterSpec::coordinate(0, 2, 0.2).unwrap(),
        &MapperOptions::default(),
    )
    .unwrap();
    let nb = build_null_batches(&cloud, &m, 10, &RngSpec::new(1)).unwrap();
    assert_eq!(nb.skipped.len(), 1);
    assert_eq!(nb.batches.len(), 1);
}

/// Reference run: 200 uniform 100-point clouds in the unit square, seed 100.
#[test]
fn unit_box_h1_median_regression() {
    let spec = InvariantSpec::new(InvariantKind::MaxDiff, 1);
    let bbox = BoundingBox::from_widths(&[1.0, 1.0]).unwrap();
    let rng = RngSpec::new(100);
    let values: Vec<f64> = (0..200)
        .filter_map(|i| {
            spec.evaluate(&sample_null(&bbox, 100, &mut rng.stream(i)).unwrap())
                .unwrap()[1]
        })
        .collect();
    assert_eq!(values.len(), 200);
    let golden = 0.5 * (0.04903543119605493 + 0.049176561517313436);
    assert!((median(&values) - golden).abs() < 1e-12, "median {}", median(&values));
    assert!(golden < 0.1);
}
