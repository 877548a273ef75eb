//! Simulation-based tests of acyclicity and family-wise error control.
//!
//! * rank test: the data value is ranked among its simulations;
//! * normal test: the data value is studentized against its simulations, with an
//!   optional log transform;
//! * quantile ratio test: two further batches give a ratio statistic compared
//!   against the standard Cauchy distribution;
//! * global test: every (simplex, dimension) row is standardized from its own
//!   simulations, and the largest standardized data value is ranked among the
//!   per-simulation maxima across rows.
//!
//! The per-row methods are combined over a family with Bonferroni, Holm or
//! Hochberg control. All rank p-values use `p = (N - r + 1) / N`, where `N` counts
//! the data value together with its simulations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::InvariantTable;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(z)`, accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z * FRAC_1_SQRT_2)
}

/// CDF of the standard Cauchy (Student t with one degree of freedom).
pub fn cauchy_cdf(t: f64) -> f64 {
    0.5 + t.atan() / PI
}

/// Upper tail of the standard Cauchy, without cancellation for large `t`.
pub fn cauchy_sf(t: f64) -> f64 {
    if t > 0.0 {
        (1.0 / t).atan() / PI
    } else {
        0.5 - t.atan() / PI
    }
}

/// Quantile function of the standard Cauchy.
pub fn cauchy_quantile(q: f64) -> f64 {
    (PI * (q - 0.5)).tan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank {
    /// Rank of the data value among itself and the simulations, 1-based.
    pub r: usize,
    /// Data value plus simulations.
    pub n: usize,
    pub p: f64,
}

/// Upper-tail rank of `x` among `sims`. Simulations tied with `x` rank above it,
/// so ties never make the test more likely to reject.
pub fn rank_upper(x: f64, sims: &[f64]) -> Result<Rank> {
    if sims.is_empty() {
        return Err(Error::input("rank test needs at least one simulation"));
    }
    let n = sims.len() + 1;
    let r = 1 + sims.iter().filter(|&&s| s < x).count();
    Ok(Rank {
        r,
        n,
        p: (n - r + 1) as f64 / n as f64,
    })
}

fn defined(values: &[Option<f64>]) -> (Vec<f64>, usize) {
    let v: Vec<f64> = values.iter().flatten().copied().collect();
    let dropped = values.len() - v.len();
    (v, dropped)
}

fn log_all(values: &[Option<f64>]) -> Vec<Option<f64>> {
    values.iter().map(|&v| crate::invariants::log_transform(v)).collect()
}

/// Mean and standard deviation with divisor `len - 1`.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mu = values.iter().sum::<f64>() / m;
    let ss = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>();
    (mu, (ss / (m - 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalTest {
    pub mu: f64,
    pub s: f64,
    pub z: f64,
    pub p: f64,
    /// Simulations without a value.
    pub dropped: usize,
}

/// Studentizes `x` against the defined simulations and returns `1 - Φ(Z)`.
/// With `log` set, `x` and the simulations are log-transformed first.
pub fn normal_test(x: f64, sims: &[Option<f64>], log: bool) -> Result<NormalTest> {
    let (x, sims) = if log {
        let lx = crate::invariants::log_transform(Some(x))
            .ok_or_else(|| Error::Degenerate(format!("log of nonpositive data value {x}")))?;
        (lx, log_all(sims))
    } else {
        (x, sims.to_vec())
    };
    let (v, dropped) = defined(&sims);
    if v.len() < 3 {
        return Err(Error::Degenerate(format!(
            "{} defined simulations, need at least 3",
            v.len()
        )));
    }
    let (mu, s) = mean_sd(&v);
    if !(s > 0.0) {
        return Err(Error::Degenerate("simulations have zero spread".into()));
    }
    let z = (x - mu) / s;
    Ok(NormalTest {
        mu,
        s,
        z,
        p: normal_sf(z),
        dropped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileT {
    pub r: usize,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    pub p: f64,
}

/// Quantile ratio statistic. `x` is ranked within `sims`; `y` and `z` are the
/// values at the same quantile of `batch2` and `batch3`. With equal batch sizes
/// `N - 1`, `N`, `N` this is the `r`-th order statistic. `doubled` reports `2T`.
pub fn quantile_t_test(
    x: f64,
    sims: &[Option<f64>],
    batch2: &[Option<f64>],
    batch3: &[Option<f64>],
    doubled: bool,
) -> Result<QuantileT> {
    let (s1, _) = defined(sims);
    let (mut s2, _) = defined(batch2);
    let (mut s3, _) = defined(batch3);
    if s1.is_empty() || s2.is_empty() || s3.is_empty() {
        return Err(Error::Degenerate(
            "quantile ratio test needs defined values in all batches".into(),
        ));
    }
    let rank = rank_upper(x, &s1)?;
    s2.sort_by(f64::total_cmp);
    s3.sort_by(f64::total_cmp);
    let pick = |b: &[f64]| {
        let idx = (rank.r * b.len()).div_ceil(rank.n).clamp(1, b.len());
        b[idx - 1]
    };
    let (y, z) = (pick(&s2), pick(&s3));
    if y == z {
        return Err(Error::Degenerate("quantile ratio undefined: y equals z".into()));
    }
    let mut t = (x - z) / (y - z);
    if doubled {
        t *= 2.0;
    }
    Ok(QuantileT {
        r: rank.r,
        y,
        z,
        t,
        p: cauchy_sf(t),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fwer {
    Bonferroni,
    Holm,
    Hochberg,
}

fn sorted_order(pvals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvals.len()).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]).then(a.cmp(&b)));
    order
}

/// Per-test rejection decisions at family-wise level `alpha`.
pub fn fwer_adjust(pvals: &[f64], method: Fwer, alpha: f64) -> Vec<bool> {
    let k = pvals.len();
    let mut reject = vec![false; k];
    if k == 0 {
        return reject;
    }
    let order = sorted_order(pvals);
    let threshold = |i: usize| alpha / (k - i) as f64; // i is 0-based
    match method {
        Fwer::Bonferroni => {
            for (r, &p) in reject.iter_mut().zip(pvals) {
                *r = p <= alpha / k as f64;
            }
        }
        Fwer::Holm => {
            for (i, &idx) in order.iter().enumerate() {
                if pvals[idx] > threshold(i) {
                    break;
                }
                reject[idx] = true;
            }
        }
        Fwer::Hochberg => {
            if let Some(last) = (0..k).rev().find(|&i| pvals[order[i]] <= threshold(i)) {
                for &idx in &order[..=last] {
                    reject[idx] = true;
                }
            }
        }
    }
    reject
}

/// Adjusted p-values: the smallest family level at which each test is rejected.
pub fn fwer_adjusted(pvals: &[f64], method: Fwer) -> Vec<f64> {
    let k = pvals.len();
    let mut adj = vec![0.0; k];
    let order = sorted_order(pvals);
    let scaled = |i: usize| ((k - i) as f64 * pvals[order[i]]).min(1.0);
    match method {
        Fwer::Bonferroni => {
            for (a, &p) in adj.iter_mut().zip(pvals) {
                *a = (k as f64 * p).min(1.0);
            }
        }
        Fwer::Holm => {
            let mut run: f64 = 0.0;
            for i in 0..k {
                run = run.max(scaled(i));
                adj[order[i]] = run;
            }
        }
        Fwer::Hochberg => {
            let mut run: f64 = 1.0;
            for i in (0..k).rev() {
                run = run.min(scaled(i));
                adj[order[i]] = run;
            }
        }
    }
    adj
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Generic,
    Normal,
    LogNormal,
    QuantileT,
    GlobalZ,
    GlobalLogz,
    GlobalHisteq,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Generic,
        Method::Normal,
        Method::LogNormal,
        Method::QuantileT,
        Method::GlobalZ,
        Method::GlobalLogz,
        Method::GlobalHisteq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Generic => "generic",
            Method::Normal => "normal",
            Method::LogNormal => "log_normal",
            Method::QuantileT => "quantile_t",
            Method::GlobalZ => "global_z",
            Method::GlobalLogz => "global_logz",
            Method::GlobalHisteq => "global_histeq",
        }
    }

    /// Accepts both `global_logz` and `global-logz` spellings.
    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::input(format!("unknown method {s:?}")))
    }

    pub fn standardization(self) -> Option<Standardization> {
        match self {
            Method::GlobalZ => Some(Standardization::ZScore),
            Method::GlobalLogz => Some(Standardization::LogZScore),
            Method::GlobalHisteq => Some(Standardization::HistEq),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standardization {
    ZScore,
    LogZScore,
    HistEq,
}

impl Standardization {
    pub fn name(self) -> &'static str {
        match self {
            Standardization::ZScore => "z_score",
            Standardization::LogZScore => "log_z_score",
            Standardization::HistEq => "hist_eq",
        }
    }
}

/// Parameters fitted from one row's simulations.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedStandardization {
    Affine {
        log: bool,
        mu: f64,
        s: f64,
    },
    /// Sorted defined simulation values.
    Ecdf(Vec<f64>),
}

impl FittedStandardization {
    /// Fits from simulations only. Fails when fewer than two values are defined or
    /// the spread is zero.
    pub fn fit(kind: Standardization, sims: &[Option<f64>]) -> Result<Self> {
        match kind {
            Standardization::ZScore | Standardization::LogZScore => {
                let log = kind == Standardization::LogZScore;
                let vals = if log { log_all(sims) } else { sims.to_vec() };
                let (v, _) = defined(&vals);
                if v.len() < 2 {
                    return Err(Error::Degenerate(format!("{} defined simulations", v.len())));
                }
                let (mu, s) = mean_sd(&v);
                if !(s > 0.0) {
                    return Err(Error::Degenerate("simulations have zero spread".into()));
                }
                Ok(FittedStandardization::Affine { log, mu, s })
            }
            Standardization::HistEq => {
                let (mut v, _) = defined(sims);
                if v.is_empty() {
                    return Err(Error::Degenerate("no defined simulations".into()));
                }
                v.sort_by(f64::total_cmp);
                Ok(FittedStandardization::Ecdf(v))
            }
        }
    }

    /// Standardized value; `None` propagates, as do logs of nonpositive values.
    pub fn apply(&self, v: Option<f64>) -> Option<f64> {
        let v = v?;
        match self {
            FittedStandardization::Affine { log, mu, s } => {
                let v = if *log {
                    crate::invariants::log_transform(Some(v))?
                } else {
                    v
                };
                Some((v - mu) / s)
            }
            FittedStandardization::Ecdf(sorted) => {
                // Rank among the simulations, ties sharing their average rank.
                let less = sorted.partition_point(|&s| s < v);
                let leq = sorted.partition_point(|&s| s <= v);
                let eq = leq - less;
                let rank = if eq == 0 {
                    less as f64
                } else {
                    less as f64 + (eq as f64 + 1.0) / 2.0
                };
                Some(rank / sorted.len() as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexScore {
    pub simplex: usize,
    pub hom_dim: usize,
    /// Standardized score for the global methods, raw p-value for per-row methods.
    pub score_or_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRow {
    pub simplex: usize,
    pub hom_dim: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestMetadata {
    pub standardization: Option<String>,
    pub invariant: String,
    pub seed: Option<u64>,
    pub dropped_rows: usize,
    pub dropped: Vec<DroppedRow>,
    /// Family-wise control used by per-row methods.
    pub fwer: Option<Fwer>,
    /// Divisor convention for the studentizing variance.
    pub variance_divisor: Option<String>,
    /// Whether the quantile ratio statistic was doubled.
    pub doubled_t: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub p_value: f64,
    pub alpha: f64,
    pub rejected: bool,
    /// Rank of the data among data and simulations for rank-based methods.
    pub r: Option<usize>,
    #[serde(rename = "N")]
    pub n: usize,
    pub per_simplex: Vec<SimplexScore>,
    pub metadata: TestMetadata,
}

impl TestResult {
    fn metadata(table: &InvariantTable, dropped: Vec<DroppedRow>) -> TestMetadata {
        TestMetadata {
            standardization: None,
            invariant: table.kind.name().to_string(),
            seed: None,
            dropped_rows: dropped.len(),
            dropped,
            fwer: None,
            variance_divisor: None,
            doubled_t: None,
        }
    }
}

fn drop_row(dropped: &mut Vec<DroppedRow>, simplex: usize, hom_dim: usize, reason: impl Into<String>) {
    dropped.push(DroppedRow {
        simplex,
        hom_dim,
        reason: reason.into(),
    });
}

fn family_result(
    method: Method,
    table: &InvariantTable,
    scores: Vec<SimplexScore>,
    dropped: Vec<DroppedRow>,
    fwer: Fwer,
    alpha: f64,
) -> Result<TestResult> {
    if scores.is_empty() {
        return Err(Error::input("every row was dropped; nothing to test"));
    }
    let pvals: Vec<f64> = scores.iter().map(|s| s.score_or_p).collect();
    let rejected = fwer_adjust(&pvals, fwer, alpha).into_iter().any(|r| r);
    let p_value = fwer_adjusted(&pvals, fwer).into_iter().fold(1.0, f64::min);
    let mut metadata = TestResult::metadata(table, dropped);
    metadata.fwer = Some(fwer);
    Ok(TestResult {
        method,
        p_value,
        alpha,
        rejected,
        r: None,
        n: table.n_sims() + 1,
        per_simplex: scores,
        metadata,
    })
}

/// Rank test per row, combined with family-wise control.
pub fn rank_family(table: &InvariantTable, fwer: Fwer, alpha: f64) -> Result<TestResult> {
    let mut scores = Vec::new();
    let mut dropped = Vec::new();
    for row in table.rows() {
        let Some(x) = row.data else {
            drop_row(&mut dropped, row.simplex, row.hom_dim, "data value undefined");
            continue;
        };
        let (sims, _) = defined(&row.sims);
        match rank_upper(x, &sims) {
            Ok(rank) => scores.push(SimplexScore {
                simplex: row.simplex,
                hom_dim: row.hom_dim,
                score_or_p: rank.p,
            }),
            Err(e) => drop_row(&mut dropped, row.simplex, row.hom_dim, e.to_string()),
        }
    }
    family_result(Method::Generic, table, scores, dropped, fwer, alpha)
}

/// Normal (or log-normal) test per row, combined with family-wise control.
pub fn normal_family(table: &InvariantTable, log: bool, fwer: Fwer, alpha: f64) -> Result<TestResult> {
    let mut scores = Vec::new();
    let mut dropped = Vec::new();
    for row in table.rows() {
        let Some(x) = row.data else {
            drop_row(&mut dropped, row.simplex, row.hom_dim, "data value undefined");
            continue;
        };
        match normal_test(x, &row.sims, log) {
            Ok(t) => scores.push(SimplexScore {
                simplex: row.simplex,
                hom_dim: row.hom_dim,
                score_or_p: t.p,
            }),
            Err(e) => drop_row(&mut dropped, row.simplex, row.hom_dim, e.to_string()),
        }
    }
    let method = if log { Method::LogNormal } else { Method::Normal };
    let mut res = family_result(method, table, scores, dropped, fwer, alpha)?;
    res.metadata.variance_divisor = Some("simulations minus one".into());
    Ok(res)
}

/// Second and third simulation batches of one row.
pub type ExtraBatches = (Vec<Option<f64>>, Vec<Option<f64>>);

/// Quantile ratio test per row. `extra[i]` holds the two further batches for row `i`.
pub fn quantile_t_family(
    table: &InvariantTable,
    extra: &[ExtraBatches],
    doubled: bool,
    fwer: Fwer,
    alpha: f64,
) -> Result<TestResult> {
    if extra.len() != table.rows().len() {
        return Err(Error::input("one pair of extra batches is needed per row"));
    }
    let mut scores = Vec::new();
    let mut dropped = Vec::new();
    for (row, (b2, b3)) in table.rows().iter().zip(extra) {
        let Some(x) = row.data else {
            drop_row(&mut dropped, row.simplex, row.hom_dim, "data value undefined");
            continue;
        };
        match quantile_t_test(x, &row.sims, b2, b3, doubled) {
            Ok(t) => scores.push(SimplexScore {
                simplex: row.simplex,
                hom_dim: row.hom_dim,
                score_or_p: t.p,
            }),
            Err(e) => drop_row(&mut dropped, row.simplex, row.hom_dim, e.to_string()),
        }
    }
    let mut res = family_result(Method::QuantileT, table, scores, dropped, fwer, alpha)?;
    res.metadata.doubled_t = Some(doubled);
    Ok(res)
}

/// Standardized scores of one retained row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowScores {
    pub simplex: usize,
    pub hom_dim: usize,
    pub data: f64,
    /// `None` where the simulation has no value.
    pub sims: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTest {
    pub result: TestResult,
    pub rows: Vec<RowScores>,
    /// Per-simulation maximum over rows.
    pub sim_maxima: Vec<f64>,
    /// Largest standardized data score.
    pub data_max: f64,
    /// Index into `rows` attaining `data_max`.
    pub argmax: usize,
}

impl GlobalTest {
    /// Rows whose data score strictly exceeds every simulated maximum, or the
    /// argmax row when there is none.
    pub fn localize(&self) -> Vec<&RowScores> {
        let top = self.sim_maxima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let over: Vec<&RowScores> = self.rows.iter().filter(|r| r.data > top).collect();
        if over.is_empty() {
            vec![&self.rows[self.argmax]]
        } else {
            over
        }
    }
}

/// Standardized global test over all rows of `table`.
pub fn global_test(table: &InvariantTable, kind: Standardization, alpha: f64) -> Result<GlobalTest> {
    let m = table.n_sims();
    if m == 0 {
        return Err(Error::input("global test needs simulations"));
    }
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for row in table.rows() {
        let fitted = match FittedStandardization::fit(kind, &row.sims) {
            Ok(f) => f,
            Err(e) => {
                drop_row(&mut dropped, row.simplex, row.hom_dim, e.to_string());
                continue;
            }
        };
        let Some(data) = fitted.apply(row.data) else {
            drop_row(&mut dropped, row.simplex, row.hom_dim, "data value undefined");
            continue;
        };
        let sims = row.sims.iter().map(|&v| fitted.apply(v)).collect();
        rows.push(RowScores {
            simplex: row.simplex,
            hom_dim: row.hom_dim,
            data,
            sims,
        });
    }
    if rows.is_empty() {
        return Err(Error::input("every row was dropped; nothing to test"));
    }
    let sim_maxima: Vec<f64> = (0..m)
        .map(|j| rows.iter().filter_map(|r| r.sims[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut argmax = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.data > rows[argmax].data {
            argmax = i;
        }
    }
    let data_max = rows[argmax].data;
    let rank = rank_upper(data_max, &sim_maxima)?;
    let method = match kind {
        Standardization::ZScore => Method::GlobalZ,
        Standardization::LogZScore => Method::GlobalLogz,
        Standardization::HistEq => Method::GlobalHisteq,
    };
    let mut metadata = TestResult::metadata(table, dropped);
    metadata.standardization = Some(kind.name().to_string());
    if kind != Standardization::HistEq {
        metadata.variance_divisor = Some("simulations minus one".into());
    }
    let result = TestResult {
        method,
        p_value: rank.p,
        alpha,
        rejected: rank.p <= alpha,
        r: Some(rank.r),
        n: rank.n,
        per_simplex: rows
            .iter()
            .map(|r| SimplexScore {
                simplex: r.simplex,
                hom_dim: r.hom_dim,
                score_or_p: r.data,
            })
            .collect(),
        metadata,
    };
    Ok(GlobalTest {
        result,
        rows,
        sim_maxima,
        data_max,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{InvariantKind, InvariantRow};

    #[test]
    fn rank_extremes() {
        let sims: Vec<f64> = (0..99).map(f64::from).collect();
        let top = rank_upper(1000.0, &sims).unwrap();
        assert_eq!((top.r, top.n), (100, 100));
        assert!((top.p - 0.01).abs() < 1e-15);
        let bottom = rank_upper(-1.0, &sims).unwrap();
        assert_eq!((bottom.r, bottom.p), (1, 1.0));
        assert!(rank_upper(0.0, &[]).is_err());
    }

    #[test]
    fn normal_at_mean_is_half() {
        let sims: Vec<Option<f64>> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| Some(v)).collect();
        let t = normal_test(2.5, &sims, false).unwrap();
        assert!((t.p - 0.5).abs() < 1e-15);
        assert!(normal_test(2.5, &[Some(1.0), Some(1.0), Some(1.0)], false).is_err());
        assert!(normal_test(2.5, &[Some(1.0), None, Some(2.0)], false).is_err());
    }

    #[test]
    fn normal_drops_missing() {
        let sims = vec![Some(1.0), None, Some(2.0), Some(3.0)];
        let t = normal_test(2.0, &sims, false).unwrap();
        assert_eq!(t.dropped, 1);
        assert!((t.s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cauchy_values() {
        assert!((cauchy_cdf(1.0) - 0.75).abs() < 1e-15);
        assert!((cauchy_sf(1.0) - 0.25).abs() < 1e-15);
        assert!((cauchy_sf(-1.0) - 0.75).abs() < 1e-15);
        assert!(cauchy_sf(1e12) < 1e-12);
        assert!((cauchy_quantile(0.75) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_t_at_matching_quantile() {
        let b1: Vec<Option<f64>> = (0..9).map(|i| Some(i as f64)).collect();
        let b2: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64 + 0.5)).collect();
        let b3: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64)).collect();
        // x = 4.5 has rank 6; the 6th values are y = 5.5 and z = 5.
        let t = quantile_t_test(4.5, &b1, &b2, &b3, false).unwrap();
        assert_eq!(t.r, 6);
        assert_eq!((t.y, t.z), (5.5, 5.0));
        assert!((t.t - -1.0).abs() < 1e-15);
        // x = 5.25 has rank 7 and equals the 7th value of the shifted batch.
        let b2s: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64 - 0.75)).collect();
        let b3s: Vec<Option<f64>> = (0..10).map(|i| Some(i as f64 - 1.0)).collect();
        let t = quantile_t_test(5.25, &b1, &b2s, &b3s, false).unwrap();
        assert!((t.t - 1.0).abs() < 1e-15 && (t.p - 0.25).abs() < 1e-15);
        let d = quantile_t_test(5.25, &b1, &b2s, &b3s, true).unwrap();
        assert!((d.t - 2.0).abs() < 1e-15);
        assert!(quantile_t_test(1.0, &b1, &b3, &b3, false).is_err());
    }

    #[test]
    fn fwer_examples() {
        for m in [Fwer::Bonferroni, Fwer::Holm, Fwer::Hochberg] {
            assert_eq!(fwer_adjust(&[0.04], m, 0.05), vec![true]);
            assert_eq!(fwer_adjust(&[0.06], m, 0.05), vec![false]);
            assert!(fwer_adjust(&[], m, 0.05).is_empty());
        }
        assert_eq!(fwer_adjust(&[0.01, 0.04], Fwer::Hochberg, 0.05), vec![true, true]);
        assert_eq!(fwer_adjust(&[0.01, 0.04], Fwer::Holm, 0.05), vec![true, true]);
        assert_eq!(fwer_adjust(&[0.03, 0.04], Fwer::Holm, 0.05), vec![false, false]);
        assert_eq!(fwer_adjust(&[0.03, 0.04], Fwer::Hochberg, 0.05), vec![true, true]);
        assert_eq!(fwer_adjust(&[0.02, 0.04], Fwer::Bonferroni, 0.05), vec![true, false]);
    }

    #[test]
    fn adjusted_values_agree_with_decisions() {
        let p = [0.012, 0.3, 0.024, 0.5, 0.001];
        for m in [Fwer::Bonferroni, Fwer::Holm, Fwer::Hochberg] {
            let adj = fwer_adjusted(&p, m);
            for alpha in [0.01, 0.05, 0.1] {
                let by_adj: Vec<bool> = adj.iter().map(|&a| a <= alpha).collect();
                assert_eq!(by_adj, fwer_adjust(&p, m, alpha), "{m:?} {alpha}");
            }
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()).unwrap(), m);
        }
        assert_eq!(Method::parse("global-logz").unwrap(), Method::GlobalLogz);
        assert!(Method::parse("nope").is_err());
    }

    #[test]
    fn ecdf_ranks_average_ties() {
        let f =
            FittedStandardization::fit(Standardization::HistEq, &[Some(1.0), Some(2.0), Some(2.0), Some(4.0)]).unwrap();
        assert_eq!(f.apply(Some(1.0)), Some(0.25));
        assert_eq!(f.apply(Some(2.0)), Some(0.625));
        assert_eq!(f.apply(Some(3.0)), Some(0.75));
        assert_eq!(f.apply(Some(5.0)), Some(1.0));
        assert_eq!(f.apply(Some(4.0)), Some(1.0));
        assert_eq!(f.apply(None), None);
    }

    fn table(rows: Vec<(Option<f64>, Vec<f64>)>) -> InvariantTable {
        InvariantTable::new(
            InvariantKind::MaxDiff,
            rows.into_iter()
                .enumerate()
                .map(|(i, (data, sims))| InvariantRow {
                    simplex: i,
                    hom_dim: 1,
                    data,
                    sims: sims.into_iter().map(Some).collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn global_test_detects_outlier_row() {
        let sims: Vec<f64> = (1..=99).map(|i| 1.0 + (i as f64 * 0.37).sin() * 0.1).collect();
        let t = table(vec![(Some(1.0), sims.clone()), (Some(5.0), sims.clone()), (None, sims)]);
        let g = global_test(&t, Standardization::ZScore, 0.05).unwrap();
        assert_eq!(g.result.r, Some(100));
        assert!((g.result.p_value - 0.01).abs() < 1e-15);
        assert!(g.result.rejected);
        assert_eq!(g.result.metadata.dropped_rows, 1);
        let loc = g.localize();
        assert_eq!(loc.len(), 1);
        assert_eq!(loc[0].simplex, 1);
    }

    #[test]
    fn global_test_all_dropped() {
        let t = table(vec![(Some(1.0), vec![2.0; 5])]);
        assert!(global_test(&t, Standardization::ZScore, 0.05).is_err());
    }

    #[test]
    fn result_json_shape() {
        let sims: Vec<f64> = (1..=9).map(f64::from).collect();
        let t = table(vec![(Some(3.0), sims)]);
        let g = global_test(&t, Standardization::LogZScore, 0.05).unwrap();
        let v = serde_json::to_value(&g.result).unwrap();
        for key in [
            "method",
            "p_value",
            "alpha",
            "rejected",
            "r",
            "N",
            "per_simplex",
            "metadata",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["method"], "global_logz");
        assert_eq!(v["metadata"]["standardization"], "log_z_score");
        assert!(v["per_simplex"][0].get("score_or_p").is_some());
    }
}
