use certmap::certify::{certify, CertifyConfig, Route, RouteRequest, Verdict};
use certmap::experiments::sample_tubes;
use certmap::mapper::FilterSpec;
use certmap::rng::RngSpec;
use certmap::testing::Method;
use certmap::PointCloud;

fn two_lines() -> PointCloud {
    let mut pts = Vec::new();
    for y in [0.0, 10.0] {
        for i in 0..=30 {
            pts.push(vec![i as f64 / 10.0, y]);
        }
    }
    PointCloud::new(pts).unwrap()
}

#[test]
fn corollary_certificates_survive_the_statistical_route() {
    let cloud = two_lines();
    let filter = FilterSpec::coordinate(0, 2, 0.5).unwrap();
    let auto = certify(&cloud, &filter, &CertifyConfig::default()).unwrap().certificate;
    assert_eq!(auto.route, Route::Corollary);
    let mut clear = 0;
    for seed in 0..40 {
        let config = CertifyConfig { route: RouteRequest::Statistical, seed, ..CertifyConfig::default() };
        let c = certify(&cloud, &filter, &config).unwrap().certificate;
        assert_eq!(c.route, Route::Statistical);
        assert!(c.corollary_applies);
        if c.test.unwrap().p_value > config.alpha {
            clear += 1;
        }
    }
    assert!(clear >= 38, "{clear}/40 seeds clear");
}

#[test]
fn localized_simplices_exist_in_the_nerve() {
    let filter = FilterSpec::coordinate(0, 10, 0.5).unwrap();
    // Rank tests cannot reach p <= alpha / K with 40 simulations, so only scored methods here.
    for method in [Method::GlobalLogz, Method::GlobalZ, Method::LogNormal] {
        let cloud = sample_tubes(250, &mut RngSpec::new(8).stream(0)).unwrap();
        let config = CertifyConfig { method, n_total: 40, ..CertifyConfig::default() };
        let c = certify(&cloud, &filter, &config).unwrap();
        match &c.certificate.verdict {
            Verdict::Obstructed { simplices, p_value } => {
                assert!(!simplices.is_empty());
                assert!(*p_value <= config.alpha);
                for s in simplices {
                    assert_eq!(c.mapper.simplex_index(&s.vertices), Some(s.simplex));
                    assert_eq!(s.labels.len(), s.vertices.len());
                }
            }
            other => panic!("{method:?}: expected an obstruction, got {other:?}"),
        }
    }
}

#[test]
fn certificate_records_config_and_seed() {
    let cloud = two_lines();
    let filter = FilterSpec::coordinate(0, 2, 0.5).unwrap();
    let config = CertifyConfig { route: RouteRequest::Statistical, seed: 99, ..CertifyConfig::default() };
    let c = certify(&cloud, &filter, &config).unwrap().certificate;
    let v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
    assert_eq!(v["master_seed"], 99);
    assert_eq!(v["config"]["seed"], 99);
    assert_eq!(v["test"]["metadata"]["seed"], 99);
    assert_eq!(v["route"], "statistical");
    assert_eq!(v["mapper"]["filter"], "coord:0");
    assert!(v["mapper"]["clustering"].as_str().unwrap().contains("histogram-gap"));
}
