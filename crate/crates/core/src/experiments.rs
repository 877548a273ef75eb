//! Synthetic data and the level/power simulation study.
//!
//! Experiments draw from a precomputed [`InvariantStore`]: uniform clouds in
//! boxes of every side-length pair, and noisy circles in the unit square. A trial
//! picks a family of rows, matches each row with simulations from the same
//! population, and runs all six test variants on the resulting table.

use std::f64::consts::TAU;
use std::io::Write;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, PointCloud};
use crate::invariants::{InvariantKind, InvariantRow, InvariantTable};
use crate::nullmodel::{sample_null, InvariantSpec, InvariantStore, StoreKey, StoredCloud};
use crate::rng::RngSpec;
use crate::testing::{
    cauchy_cdf, cauchy_quantile, fwer_adjust, global_test, normal_family, quantile_t_family, quantile_t_test, Fwer,
    Method, Standardization,
};

/// Points on the circle of radius 0.5 centred at (0.5, 0.5) with isotropic
/// Gaussian noise of standard deviation `sigma`.
pub fn sample_noisy_circle<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::input("circle sample needs at least one point"));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::input(format!("noise level {sigma}: {e}")))?;
    let points = (0..n)
        .map(|_| {
            let theta = rng.random::<f64>() * TAU;
            vec![
                0.5 + 0.5 * theta.cos() + noise.sample(rng),
                0.5 + 0.5 * theta.sin() + noise.sample(rng),
            ]
        })
        .collect();
    PointCloud::new(points)
}

/// Tubes around the two diagonals in R^4: `(t, ±t, cos θ, sin θ)` with `t`
/// uniform on [0, 1], so the diagonals meet at one end.
pub fn sample_tubes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointCloud> {
    sample_tubes_on(n, 0.0, 1.0, rng)
}

/// As [`sample_tubes`] with `t` uniform on `[t_min, t_max]`; `[-1, 1]` gives
/// two tubes crossing in the middle.
pub fn sample_tubes_on<R: Rng + ?Sized>(n: usize, t_min: f64, t_max: f64, rng: &mut R) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::input("tubes sample needs at least one point"));
    }
    if !(t_min < t_max) {
        return Err(Error::input("tubes parameter range must be nonempty"));
    }
    let points = (0..n)
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let t = t_min + (t_max - t_min) * rng.random::<f64>();
            let theta = rng.random::<f64>() * TAU;
            vec![t, sign * t, theta.cos(), theta.sin()]
        })
        .collect();
    PointCloud::new(points)
}

/// Which clouds go into the invariant store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreConfig {
    pub side_lengths: Vec<f64>,
    pub point_counts: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub null_per_combo: usize,
    pub circle_per_combo: usize,
    pub kind: InvariantKind,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            side_lengths: vec![0.1, 1.0, 10.0],
            point_counts: vec![10, 50, 100],
            sigmas: vec![0.1, 0.25],
            null_per_combo: 500,
            circle_per_combo: 200,
            kind: InvariantKind::MaxDiff,
            max_dim: 1,
            seed: 20_160_000,
        }
    }
}

impl StoreConfig {
    /// Unordered pairs of side lengths, with repetition.
    pub fn box_shapes(&self) -> Vec<(f64, f64)> {
        let s = &self.side_lengths;
        let mut out = Vec::new();
        for i in 0..s.len() {
            for j in i..s.len() {
                out.push((s[i], s[j]));
            }
        }
        out
    }

    pub fn keys(&self) -> Vec<(StoreKey, usize)> {
        let mut keys = Vec::new();
        for (w, h) in self.box_shapes() {
            for &n in &self.point_counts {
                keys.push((StoreKey::null(w, h, n), self.null_per_combo));
            }
        }
        for &sigma in &self.sigmas {
            for &n in &self.point_counts {
                keys.push((StoreKey::circle(sigma, n), self.circle_per_combo));
            }
        }
        keys
    }
}

fn key_stream(rng: &RngSpec, key: &StoreKey, id: u64) -> rand_chacha::ChaCha8Rng {
    rng.stream_for(&[
        key.sigma.map_or(0, |s| s.to_bits()),
        key.width.to_bits(),
        key.height.to_bits(),
        key.n_points as u64,
        id,
    ])
}

/// The cloud stored under `(key, id)`.
pub fn store_cloud(config: &StoreConfig, key: &StoreKey, id: u64) -> Result<PointCloud> {
    let mut r = key_stream(&RngSpec::new(config.seed), key, id);
    match key.sigma {
        Some(sigma) => sample_noisy_circle(key.n_points, sigma, &mut r),
        None => sample_null(
            &BoundingBox::from_widths(&[key.width, key.height])?,
            key.n_points,
            &mut r,
        ),
    }
}

/// Computes every store entry. Each cloud depends only on its key and id.
pub fn build_store(config: &StoreConfig) -> Result<InvariantStore> {
    let spec = InvariantSpec::new(config.kind, config.max_dim);
    let tasks: Vec<(StoreKey, u64)> = config
        .keys()
        .into_iter()
        .flat_map(|(k, count)| (0..count as u64).map(move |id| (k, id)))
        .collect();
    let values = tasks
        .par_iter()
        .map(|(key, id)| spec.evaluate(&store_cloud(config, key, *id)?))
        .collect::<Result<Vec<_>>>()?;
    let mut store = InvariantStore::new(config.kind);
    for ((key, id), values) in tasks.into_iter().zip(values) {
        store.insert(key, StoredCloud { cloud_id: id, values });
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_trials: usize,
    /// Data value plus simulations per row.
    pub sims_per_test: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub alphas: Vec<f64>,
    pub fwer: Fwer,
    pub doubled_t: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_trials: 200,
            sims_per_test: 100,
            k_min: 2,
            k_max: 50,
            alphas: vec![0.1, 0.05, 0.01],
            fwer: Fwer::Hochberg,
            doubled_t: false,
            seed: 7,
        }
    }
}

/// The variants reported in the level/power tables.
pub const TABLE_METHODS: [Method; 6] = [
    Method::Normal,
    Method::LogNormal,
    Method::QuantileT,
    Method::GlobalZ,
    Method::GlobalLogz,
    Method::GlobalHisteq,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub scenario: String,
    pub method: Method,
    pub alpha: f64,
    pub rejections: usize,
    pub trials: usize,
    /// Trials in which the method could not be evaluated (counted as acceptances).
    pub failures: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn rate(&self, scenario: &str, method: Method, alpha: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.method == method && r.alpha == alpha)
            .map(|r| r.rate)
    }

    /// True when every method's rate is nondecreasing in α within each scenario.
    pub fn monotone_in_alpha(&self) -> bool {
        self.rows.iter().all(|a| {
            self.rows
                .iter()
                .filter(|b| b.scenario == a.scenario && b.method == a.method && b.alpha > a.alpha)
                .all(|b| b.rejections >= a.rejections)
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn extend(&mut self, other: RateTable) {
        self.rows.extend(other.rows);
    }
}

/// Outcome of one method in one trial: rejection per α, or `None` on failure.
type TrialOutcome = Vec<Option<Vec<bool>>>;

/// `count` distinct stored clouds of population `key`.
fn take<'s, R: Rng>(
    store: &'s InvariantStore,
    rng: &mut R,
    key: &StoreKey,
    count: usize,
) -> Result<Vec<&'s StoredCloud>> {
    let pool = store.get(key);
    if pool.len() < count {
        return Err(Error::StoreTooSmall(format!(
            "population {key:?} holds {} clouds, {count} needed per row",
            pool.len()
        )));
    }
    Ok(sample_indices(rng, pool.len(), count)
        .into_iter()
        .map(|i| &pool[i])
        .collect())
}

/// One row family entry: data cloud plus three simulation batches.
struct FamilyMember<'a> {
    data: &'a StoredCloud,
    sims: Vec<&'a StoredCloud>,
    batch2: Vec<&'a StoredCloud>,
    batch3: Vec<&'a StoredCloud>,
}

fn run_trial(members: &[FamilyMember], kind: InvariantKind, config: &ExperimentConfig) -> Result<TrialOutcome> {
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for (s, m) in members.iter().enumerate() {
        for k in 0..m.data.values.len() {
            rows.push(InvariantRow {
                simplex: s,
                hom_dim: k,
                data: m.data.values[k],
                sims: m.sims.iter().map(|c| c.values[k]).collect(),
            });
            extra.push((
                m.batch2.iter().map(|c| c.values[k]).collect(),
                m.batch3.iter().map(|c| c.values[k]).collect(),
            ));
        }
    }
    let table = InvariantTable::new(kind, rows)?;
    let decide_family = |pvals: Option<Vec<f64>>| {
        pvals.map(|p| {
            config
                .alphas
                .iter()
                .map(|&a| fwer_adjust(&p, config.fwer, a).into_iter().any(|r| r))
                .collect::<Vec<bool>>()
        })
    };
    let family_p = |res: Result<crate::testing::TestResult>| {
        res.ok()
            .map(|r| r.per_simplex.iter().map(|s| s.score_or_p).collect::<Vec<f64>>())
    };
    let global = |kind: Standardization| {
        global_test(&table, kind, 0.05).ok().map(|g| {
            config
                .alphas
                .iter()
                .map(|&a| g.result.p_value <= a)
                .collect::<Vec<bool>>()
        })
    };
    Ok(TABLE_METHODS
        .iter()
        .map(|m| match m {
            Method::Normal => decide_family(family_p(normal_family(&table, false, config.fwer, 0.05))),
            Method::LogNormal => decide_family(family_p(normal_family(&table, true, config.fwer, 0.05))),
            Method::QuantileT => decide_family(family_p(quantile_t_family(
                &table,
                &extra,
                config.doubled_t,
                config.fwer,
                0.05,
            ))),
            Method::GlobalZ => global(Standardization::ZScore),
            Method::GlobalLogz => global(Standardization::LogZScore),
            Method::GlobalHisteq => global(Standardization::HistEq),
            Method::Generic => None,
        })
        .collect())
}

fn tabulate(scenario: &str, outcomes: &[TrialOutcome], config: &ExperimentConfig) -> RateTable {
    let mut rows = Vec::new();
    for (mi, &method) in TABLE_METHODS.iter().enumerate() {
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            let rejections = outcomes
                .iter()
                .filter(|o| o[mi].as_ref().is_some_and(|r| r[ai]))
                .count();
            let failures = outcomes.iter().filter(|o| o[mi].is_none()).count();
            rows.push(RateRow {
                scenario: scenario.to_string(),
                method,
                alpha,
                rejections,
                trials: outcomes.len(),
                failures,
                rate: rejections as f64 / outcomes.len().max(1) as f64,
            });
        }
    }
    RateTable { rows }
}

fn null_keys(store: &InvariantStore) -> Vec<StoreKey> {
    store.keys().filter(|k| k.sigma.is_none()).copied().collect()
}

/// Data cloud from `data_key` with simulations from the matching null population.
fn member<'s, R: Rng>(
    store: &'s InvariantStore,
    rng: &mut R,
    data_key: &StoreKey,
    n_sims: usize,
) -> Result<FamilyMember<'s>> {
    let null_key = data_key.matching_null();
    let data = if data_key.sigma.is_some() {
        Some(take(store, rng, data_key, 1)?[0])
    } else {
        None
    };
    let need = n_sims + 2 * (n_sims + 1) + usize::from(data.is_none());
    let mut pool = take(store, rng, &null_key, need)?.into_iter();
    let data = data.unwrap_or_else(|| pool.next().unwrap());
    let sims = pool.by_ref().take(n_sims).collect();
    let batch2 = pool.by_ref().take(n_sims + 1).collect();
    let batch3 = pool.collect();
    Ok(FamilyMember {
        data,
        sims,
        batch2,
        batch3,
    })
}

fn check_config(config: &ExperimentConfig) -> Result<()> {
    if config.sims_per_test < 2 || config.k_min == 0 || config.k_min > config.k_max || config.alphas.is_empty() {
        return Err(Error::input("invalid experiment configuration"));
    }
    Ok(())
}

/// Rejection rates on pure null families of `K ~ U{k_min..k_max}` rows.
pub fn level_experiment(store: &InvariantStore, config: &ExperimentConfig) -> Result<RateTable> {
    check_config(config)?;
    let keys = null_keys(store);
    if keys.is_empty() {
        return Err(Error::StoreTooSmall("no null populations in the store".into()));
    }
    let kind = store.kind.unwrap_or(InvariantKind::MaxDiff);
    let rng = RngSpec::new(config.seed);
    let outcomes = (0..config.n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.stream_for(&[1, t as u64]);
            let k = r.random_range(config.k_min..=config.k_max);
            let mut members = Vec::with_capacity(k);
            for _ in 0..k {
                let key = keys[r.random_range(0..keys.len())];
                members.push(member(store, &mut r, &key, config.sims_per_test - 1)?);
            }
            run_trial(&members, kind, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tabulate("null", &outcomes, config))
}

/// Rejection rates with one planted noisy circle of noise `sigma` among
/// `K - 1 ~ U{k_min-1..k_max-1}` null rows.
pub fn power_experiment(store: &InvariantStore, config: &ExperimentConfig, sigma: f64) -> Result<RateTable> {
    check_config(config)?;
    let keys = null_keys(store);
    let circles: Vec<StoreKey> = store.keys().filter(|k| k.sigma == Some(sigma)).copied().collect();
    if keys.is_empty() || circles.is_empty() {
        return Err(Error::StoreTooSmall(format!(
            "store lacks null or sigma={sigma} circle populations"
        )));
    }
    let kind = store.kind.unwrap_or(InvariantKind::MaxDiff);
    let rng = RngSpec::new(config.seed);
    let outcomes = (0..config.n_trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng.stream_for(&[2, sigma.to_bits(), t as u64]);
            let k = r.random_range(config.k_min..=config.k_max);
            let circle = circles[r.random_range(0..circles.len())];
            let mut members = vec![member(store, &mut r, &circle, config.sims_per_test - 1)?];
            for _ in 1..k {
                let key = keys[r.random_range(0..keys.len())];
                members.push(member(store, &mut r, &key, config.sims_per_test - 1)?);
            }
            run_trial(&members, kind, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tabulate(&format!("sigma={sigma}"), &outcomes, config))
}

/// Quantile ratio statistics on null rows, separately per homological dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TValidation {
    pub hom_dim: usize,
    /// Undoubled statistics, in draw order.
    pub t: Vec<f64>,
    /// The same draws with batches 2 and 3 exchanged.
    pub t_swapped: Vec<f64>,
    /// Draws lost to undefined statistics.
    pub undefined: usize,
}

/// (empirical quantile, Cauchy quantile) pairs over the central 80%.
pub fn central_qq(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    (0..n)
        .filter_map(|i| {
            let q = (i as f64 + 0.5) / n as f64;
            (0.1..=0.9).contains(&q).then(|| (v[i], cauchy_quantile(q)))
        })
        .collect()
}

/// Pearson correlation of QQ pairs.
pub fn qq_correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Kolmogorov distance between the sample and the standard Cauchy.
pub fn cauchy_ks_distance(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cauchy_cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov distance.
pub fn ecdf_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `n_samples` draws of the quantile ratio statistic per dimension, each from a
/// random null population.
pub fn t1_validation(
    store: &InvariantStore,
    n_samples: usize,
    sims_per_test: usize,
    seed: u64,
) -> Result<Vec<TValidation>> {
    if n_samples < 100 {
        return Err(Error::input("validation needs at least 100 samples"));
    }
    let keys = null_keys(store);
    if keys.is_empty() {
        return Err(Error::StoreTooSmall("no null populations in the store".into()));
    }
    let dims = store.get(&keys[0]).first().map_or(0, |c| c.values.len());
    let rng = RngSpec::new(seed);
    let mut out = Vec::new();
    for k in 0..dims {
        let mut v = TValidation {
            hom_dim: k,
            t: Vec::new(),
            t_swapped: Vec::new(),
            undefined: 0,
        };
        let mut attempt = 0u64;
        while v.t.len() < n_samples {
            if attempt > 20 * n_samples as u64 {
                return Err(Error::Degenerate(format!(
                    "too many undefined statistics in dimension {k}"
                )));
            }
            let mut r = rng.stream_for(&[3, k as u64, attempt]);
            attempt += 1;
            let key = keys[r.random_range(0..keys.len())];
            let m = member(store, &mut r, &key, sims_per_test - 1)?;
            let vals = |cs: &[&StoredCloud]| cs.iter().map(|c| c.values[k]).collect::<Vec<_>>();
            let Some(x) = m.data.values[k] else {
                v.undefined += 1;
                continue;
            };
            let (s1, b2, b3) = (vals(&m.sims), vals(&m.batch2), vals(&m.batch3));
            match (
                quantile_t_test(x, &s1, &b2, &b3, false),
                quantile_t_test(x, &s1, &b3, &b2, false),
            ) {
                (Ok(a), Ok(b)) => {
                    v.t.push(a.t);
                    v.t_swapped.push(b.t);
                }
                _ => v.undefined += 1,
            }
        }
        out.push(v);
    }
    Ok(out)
}
