mod common;

use certmap::invariants::{InvariantKind, InvariantRow, InvariantTable};
use certmap::testing::{
    cauchy_sf, fwer_adjust, global_test, normal_sf, normal_test, quantile_t_test, rank_upper, FittedStandardization,
    Fwer, Standardization,
};
use common::normal_cdf_quadrature;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every way of ordering `x` among its ties, as upper-tail p-values.
fn tie_placement_pvalues(x: f64, sims: &[f64]) -> Vec<f64> {
    let n = sims.len() + 1;
    let less = sims.iter().filter(|&&s| s < x).count();
    let eq = sims.iter().filter(|&&s| s == x).count();
    (0..=eq)
        .map(|above| (n - (1 + less + above) + 1) as f64 / n as f64)
        .collect()
}

#[test]
fn ties_are_resolved_conservatively() {
    let sims = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let r = rank_upper(5.0, &sims).unwrap();
    let placements = tie_placement_pvalues(5.0, &sims);
    assert_eq!(placements.len(), 2);
    let worst = placements.iter().copied().fold(0.0, f64::max);
    assert_eq!(r.p, worst);
    assert_eq!((r.r, r.p), (5, 0.6));
    let mean = placements.iter().sum::<f64>() / placements.len() as f64;
    assert!(r.p >= mean);
}

#[test]
fn ties_oracle_on_random_integers() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let sims: Vec<f64> = (0..rng.random_range(1..30))
            .map(|_| rng.random_range(0..6) as f64)
            .collect();
        let x = rng.random_range(0..6) as f64;
        let worst = tie_placement_pvalues(x, &sims).into_iter().fold(0.0, f64::max);
        assert_eq!(rank_upper(x, &sims).unwrap().p, worst);
    }
}

#[test]
fn rank_pvalues_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let sims: Vec<f64> = (0..99).map(|_| rng.random::<f64>()).collect();
        let p = rank_upper(rng.random::<f64>() * 1.2, &sims).unwrap().p;
        assert!((0.01..=1.0).contains(&p));
    }
}

#[test]
fn normal_tail_matches_quadrature() {
    for z in [-2.0, -0.3, 0.0, 1.0, 1.6449, 2.5, 4.0] {
        let want = 1.0 - normal_cdf_quadrature(z);
        assert!((normal_sf(z) - want).abs() < 1e-7, "z={z}");
    }
    assert!((normal_sf(1.6449) - 0.05).abs() < 1e-5);
}

#[test]
fn normal_test_at_the_mean() {
    let sims: Vec<Option<f64>> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&v| Some(v)).collect();
    let t = normal_test(3.0, &sims, false).unwrap();
    assert_eq!(t.z, 0.0);
    assert_eq!(t.p, 0.5);
    let with_none: Vec<Option<f64>> = sims.iter().copied().chain([None]).collect();
    assert_eq!(normal_test(3.0, &with_none, false).unwrap().dropped, 1);
}

#[test]
fn normal_test_z_value() {
    let sims: Vec<Option<f64>> = [-1.0, 0.0, 1.0].iter().map(|&v| Some(v)).collect();
    let t = normal_test(1.6449, &sims, false).unwrap();
    assert_eq!(t.s, 1.0);
    assert!((t.p - (1.0 - normal_cdf_quadrature(1.6449))).abs() < 1e-7);
    assert!(normal_test(1.0, &sims[..2], false).is_err());
}

#[test]
fn quantile_ratio_examples() {
    let b = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
    let sims = b(&[1.0, 2.0, 3.0]);
    let (b2, b3) = (b(&[1.0, 2.0, 3.0, 4.0]), b(&[0.0, 1.0, 2.0, 3.0]));
    // x ranks 3rd of 4, landing on y = 3 and z = 2.
    let t = quantile_t_test(3.0, &sims, &b2, &b3, false).unwrap();
    assert_eq!((t.y, t.z, t.t), (3.0, 2.0, 1.0));
    assert!((t.p - 0.25).abs() < 1e-15);
    assert!(cauchy_sf(1e12) < 1e-12);
}

#[test]
fn fwer_fixed_cases() {
    for m in [Fwer::Bonferroni, Fwer::Holm, Fwer::Hochberg] {
        assert_eq!(fwer_adjust(&[0.05], m, 0.05), vec![true]);
        assert_eq!(fwer_adjust(&[0.0501], m, 0.05), vec![false]);
    }
    assert_eq!(fwer_adjust(&[0.01, 0.04], Fwer::Hochberg, 0.05), vec![true, true]);
    assert_eq!(fwer_adjust(&[0.01, 0.04], Fwer::Holm, 0.05), vec![true, true]);
    assert_eq!(fwer_adjust(&[0.03, 0.04], Fwer::Holm, 0.05), vec![false, false]);
    assert_eq!(fwer_adjust(&[0.03, 0.04], Fwer::Hochberg, 0.05), vec![true, true]);
}

#[test]
fn affine_standardization_keeps_row_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let sims: Vec<Option<f64>> = (0..20).map(|_| Some(rng.random::<f64>() + 0.01)).collect();
        let x = rng.random::<f64>() + 0.01;
        for kind in [
            Standardization::ZScore,
            Standardization::LogZScore,
            Standardization::HistEq,
        ] {
            let f = FittedStandardization::fit(kind, &sims).unwrap();
            let fx = f.apply(Some(x)).unwrap();
            for s in sims.iter().flatten() {
                let fs = f.apply(Some(*s)).unwrap();
                if kind == Standardization::HistEq {
                    assert!((x > *s) <= (fx >= fs));
                } else {
                    assert_eq!(x > *s, fx > fs);
                }
            }
        }
    }
}

#[test]
fn global_max_over_rows() {
    let row = |simplex, data: f64, sims: &[f64]| InvariantRow {
        simplex,
        hom_dim: 1,
        data: Some(data),
        sims: sims.iter().map(|&v| Some(v)).collect(),
    };
    let sims = [1.0, 2.0, 3.0, 4.0, 5.0];
    let table = InvariantTable::new(
        InvariantKind::MaxDiff,
        vec![
            row(0, 3.0, &sims),
            row(1, 100.0, &sims),
            InvariantRow {
                simplex: 2,
                hom_dim: 1,
                data: None,
                sims: vec![None; 5],
            },
        ],
    )
    .unwrap();
    let g = global_test(&table, Standardization::ZScore, 0.2).unwrap();
    assert_eq!(g.rows.len(), 2);
    assert_eq!(g.result.metadata.dropped_rows, 1);
    assert_eq!(g.rows[g.argmax].simplex, 1);
    assert_eq!(g.result.r, Some(6));
    assert!((g.result.p_value - 1.0 / 6.0).abs() < 1e-15);
    assert!(g.result.rejected);
    let hits = g.localize();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].simplex, 1);
}
