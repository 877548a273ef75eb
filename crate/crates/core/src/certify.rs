//! Certification: try the separation criterion first, fall back to the
//! statistical test, and record everything needed to re-verify the outcome.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::invariants::InvariantKind;
use crate::mapper::{build_mapper, CutoffRule, FilterKind, FilterSpec, MapperOptions, MapperStructure};
use crate::nullmodel::{
    build_null_invariant_batches, invariant_table, InvariantSpec, NullBatches, NullSims, SkippedSimplex,
};
use crate::persistence::{compute_full_persistence, PersistenceDiagram, DEFAULT_SIMPLEX_BUDGET};
use crate::rng::{stream_id, RngSpec};
use crate::separation::{corollary_check, SeparationReport};
use crate::testing::{
    fwer_adjust, global_test, normal_family, quantile_t_family, rank_family, ExtraBatches, Fwer, GlobalTest, Method,
    TestResult,
};

/// Which route the caller asks for.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteRequest {
    /// Separation criterion when it applies, statistical test otherwise.
    #[default]
    Auto,
    /// Always run the statistical test; the separation report is still included.
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub alpha: f64,
    /// Data value plus simulations per simplex.
    pub n_total: usize,
    pub method: Method,
    /// Homology is computed in dimensions `0..=max_dim`.
    pub max_dim: usize,
    pub seed: u64,
    pub invariant: InvariantKind,
    pub route: RouteRequest,
    pub fwer: Fwer,
    pub doubled_t: bool,
    pub simplex_budget: usize,
    pub mapper: MapperOptions,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            n_total: 100,
            method: Method::GlobalLogz,
            max_dim: 1,
            seed: 42,
            invariant: InvariantKind::MaxDiff,
            route: RouteRequest::Auto,
            fwer: Fwer::Hochberg,
            doubled_t: false,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
            mapper: MapperOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Corollary,
    Statistical,
}

/// A simplex implicated in an obstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedSimplex {
    /// Position in the canonical simplex order.
    pub simplex: usize,
    pub vertices: Vec<usize>,
    pub labels: Vec<String>,
    pub hom_dim: usize,
    /// Standardized score (global methods) or raw p-value (per-row methods).
    pub score: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified {
        interleaving_bound: Option<f64>,
        p_value: Option<f64>,
    },
    Obstructed {
        simplices: Vec<LocalizedSimplex>,
        p_value: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Certified { .. } => 0,
            Verdict::Obstructed { .. } => 2,
            Verdict::Inconclusive { .. } => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Certified { .. } => "certified",
            Verdict::Obstructed { .. } => "obstructed",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperParams {
    pub filter: String,
    /// Hash of custom filter values, when used.
    pub filter_values_sha256: Option<String>,
    pub num_intervals: usize,
    pub overlap: f64,
    pub cutoff: CutoffRule,
    pub nerve_dim_cap: usize,
    pub clustering: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerveSummary {
    pub vertex_labels: Vec<String>,
    pub vertex_sizes: Vec<usize>,
    pub simplices: Vec<Vec<usize>>,
    pub simplex_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub tool_version: String,
    pub dataset_sha256: String,
    pub n_points: usize,
    pub ambient_dim: usize,
    pub master_seed: u64,
    pub config: CertifyConfig,
    pub mapper: MapperParams,
    pub nerve: NerveSummary,
    pub route: Route,
    pub separation: SeparationReport,
    pub skipped_simplices: Vec<SkippedSimplex>,
    pub test: Option<TestResult>,
    /// Also reported when the statistical route was forced.
    pub corollary_applies: bool,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Everything produced along the way, for plots and further inspection.
#[derive(Debug, Clone)]
pub struct Certification {
    pub certificate: Certificate,
    pub mapper: MapperStructure,
    pub diagrams: Vec<PersistenceDiagram>,
    pub global: Option<GlobalTest>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the cloud written one point per line with shortest round-trip
/// decimal coordinates, so equal data hash equally whatever the input format.
pub fn fingerprint(cloud: &PointCloud) -> String {
    let mut h = Sha256::new();
    for p in cloud.points() {
        let line: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        h.update(line.join(",").as_bytes());
        h.update(b"\n");
    }
    hex(&h.finalize())
}

fn values_fingerprint(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_string().as_bytes());
        h.update(b"\n");
    }
    hex(&h.finalize())
}

fn mapper_params(filter: &FilterSpec, mapper: &MapperStructure, cutoff: CutoffRule) -> MapperParams {
    let (name, values) = match &filter.kind {
        FilterKind::Coordinate(k) => (format!("coord:{k}"), None),
        FilterKind::Custom(v) => ("custom".to_string(), Some(values_fingerprint(v))),
    };
    MapperParams {
        filter: name,
        filter_values_sha256: values,
        num_intervals: filter.num_intervals,
        overlap: filter.overlap,
        cutoff,
        nerve_dim_cap: mapper.nerve_dim_cap,
        clustering: "single linkage per preimage; the histogram-gap cut is a reconstruction of the \
                     common Mapper default, not a documented choice of the reference analyses"
            .to_string(),
    }
}

fn nerve_summary(mapper: &MapperStructure) -> NerveSummary {
    NerveSummary {
        vertex_labels: (0..mapper.num_vertices()).map(|i| mapper.label(i)).collect(),
        vertex_sizes: mapper.cover_elements.iter().map(|e| e.members.len()).collect(),
        simplices: mapper.simplices.iter().map(|s| s.vertices.clone()).collect(),
        simplex_sizes: mapper.simplices.iter().map(|s| s.member_points.len()).collect(),
    }
}

fn localized(mapper: &MapperStructure, simplex: usize, hom_dim: usize, score: f64) -> LocalizedSimplex {
    let s = &mapper.simplices[simplex];
    LocalizedSimplex {
        simplex,
        vertices: s.vertices.clone(),
        labels: s.vertices.iter().map(|&v| mapper.label(v)).collect(),
        hom_dim,
        score,
        n_points: s.member_points.len(),
    }
}

/// Two further batches of `N` simulations per simplex for the quantile ratio test.
fn extra_batches(
    cloud: &PointCloud,
    mapper: &MapperStructure,
    config: &CertifyConfig,
    spec: &InvariantSpec,
) -> Result<Vec<ExtraBatches>> {
    let draw = |b: u64| {
        let rng = RngSpec::new(stream_id(&[config.seed, b]));
        build_null_invariant_batches(cloud, mapper, config.n_total + 1, &rng, spec)
    };
    let (b2, b3) = (draw(2)?, draw(3)?);
    let mut out = Vec::new();
    for (x, y) in b2.batches.iter().zip(&b3.batches) {
        let (NullSims::Invariants(xs), NullSims::Invariants(ys)) = (&x.sims, &y.sims) else {
            return Err(Error::input("expected invariant batches"));
        };
        for k in 0..=spec.max_dim {
            out.push((xs.iter().map(|v| v[k]).collect(), ys.iter().map(|v| v[k]).collect()));
        }
    }
    Ok(out)
}

/// Builds the Mapper of `cloud` and certifies it.
pub fn certify(cloud: &PointCloud, filter: &FilterSpec, config: &CertifyConfig) -> Result<Certification> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::input("alpha must lie in (0, 1)"));
    }
    if config.n_total < 2 {
        return Err(Error::input("N must be at least 2"));
    }
    let mapper = build_mapper(cloud, filter, &config.mapper)?;
    let diagrams = mapper
        .simplices
        .iter()
        .map(|s| compute_full_persistence(&cloud.subset(&s.member_points)?, config.max_dim, config.simplex_budget))
        .collect::<Result<Vec<_>>>()?;
    let separation = corollary_check(cloud, &mapper, &diagrams, mapper.dim())?;

    let mut certificate = Certificate {
        tool_version: crate::TOOL_VERSION.to_string(),
        dataset_sha256: fingerprint(cloud),
        n_points: cloud.len(),
        ambient_dim: cloud.dim(),
        master_seed: config.seed,
        config: config.clone(),
        mapper: mapper_params(filter, &mapper, config.mapper.cutoff),
        nerve: nerve_summary(&mapper),
        route: Route::Corollary,
        corollary_applies: separation.applies,
        separation,
        skipped_simplices: Vec::new(),
        test: None,
        verdict: Verdict::Inconclusive { reason: String::new() },
    };

    if certificate.separation.applies && config.route == RouteRequest::Auto {
        certificate.verdict = Verdict::Certified {
            interleaving_bound: certificate.separation.interleaving_bound,
            p_value: None,
        };
        return Ok(Certification {
            certificate,
            mapper,
            diagrams,
            global: None,
        });
    }

    certificate.route = Route::Statistical;
    let spec = InvariantSpec {
        kind: config.invariant,
        max_dim: config.max_dim,
        simplex_budget: config.simplex_budget,
    };
    let rng = RngSpec::new(config.seed);
    let batches: NullBatches = build_null_invariant_batches(cloud, &mapper, config.n_total, &rng, &spec)?;
    certificate.skipped_simplices = batches.skipped.clone();
    if batches.batches.is_empty() {
        certificate.verdict = Verdict::Inconclusive {
            reason: "insufficient points per simplex".into(),
        };
        return Ok(Certification {
            certificate,
            mapper,
            diagrams,
            global: None,
        });
    }
    let table = invariant_table(cloud, &mapper, &batches, &spec)?;

    let mut global = None;
    let outcome = match config.method.standardization() {
        Some(kind) => global_test(&table, kind, config.alpha).map(|g| {
            let result = g.result.clone();
            global = Some(g);
            result
        }),
        None => match config.method {
            Method::Generic => rank_family(&table, config.fwer, config.alpha),
            Method::Normal => normal_family(&table, false, config.fwer, config.alpha),
            Method::LogNormal => normal_family(&table, true, config.fwer, config.alpha),
            Method::QuantileT => {
                let extra = extra_batches(cloud, &mapper, config, &spec)?;
                quantile_t_family(&table, &extra, config.doubled_t, config.fwer, config.alpha)
            }
            _ => unreachable!("global methods handled above"),
        },
    };
    let mut result = match outcome {
        Ok(r) => r,
        Err(Error::Input(reason)) => {
            certificate.verdict = Verdict::Inconclusive { reason };
            return Ok(Certification {
                certificate,
                mapper,
                diagrams,
                global,
            });
        }
        Err(e) => return Err(e),
    };
    result.metadata.seed = Some(config.seed);

    certificate.verdict = if !result.rejected {
        Verdict::Certified {
            interleaving_bound: None,
            p_value: Some(result.p_value),
        }
    } else {
        let simplices = match &global {
            Some(g) => g
                .localize()
                .into_iter()
                .map(|r| localized(&mapper, r.simplex, r.hom_dim, r.data))
                .collect(),
            None => {
                let pvals: Vec<f64> = result.per_simplex.iter().map(|s| s.score_or_p).collect();
                let mut hits: Vec<LocalizedSimplex> = fwer_adjust(&pvals, config.fwer, config.alpha)
                    .into_iter()
                    .zip(&result.per_simplex)
                    .filter(|(r, _)| *r)
                    .map(|(_, s)| localized(&mapper, s.simplex, s.hom_dim, s.score_or_p))
                    .collect();
                if hits.is_empty() {
                    let best = result
                        .per_simplex
                        .iter()
                        .min_by(|a, b| a.score_or_p.total_cmp(&b.score_or_p))
                        .expect("a rejected family has rows");
                    hits.push(localized(&mapper, best.simplex, best.hom_dim, best.score_or_p));
                }
                hits
            }
        };
        Verdict::Obstructed {
            simplices,
            p_value: result.p_value,
        }
    };
    certificate.test = Some(result);
    Ok(Certification {
        certificate,
        mapper,
        diagrams,
        global,
    })
}
