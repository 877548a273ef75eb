//! Null model: uniform samples from the unbiased bounding box of a point set.
//!
//! Each nerve simplex gets its own box, estimated from its member points, and
//! `N - 1` simulated clouds of the same size. Simulation `j` of simplex `s` draws
//! from the stream keyed by `(s, j)`, so batches are reproducible and independent
//! of evaluation order.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unbiased_bounding_box, BoundingBox, PointCloud};
use crate::invariants::{InvariantKind, InvariantRow, InvariantTable};
use crate::mapper::MapperStructure;
use crate::persistence::{compute_full_persistence, DEFAULT_SIMPLEX_BUDGET};
use crate::rng::{stream_id, RngSpec};

/// `n_points` independent uniform points in `bbox`.
pub fn sample_null<R: Rng + ?Sized>(bbox: &BoundingBox, n_points: usize, rng: &mut R) -> Result<PointCloud> {
    if n_points == 0 {
        return Err(Error::input("null sample needs at least one point"));
    }
    let (lo, hi) = (bbox.lower(), bbox.upper());
    let points = (0..n_points)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(&a, &b)| {
                    if a == b {
                        a
                    } else {
                        (a + rng.random::<f64>() * (b - a)).min(b)
                    }
                })
                .collect()
        })
        .collect();
    PointCloud::new(points)
}

/// Which invariant to compute for simulated clouds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSpec {
    pub kind: InvariantKind,
    /// Invariants are computed in dimensions `0..=max_dim`.
    pub max_dim: usize,
    pub simplex_budget: usize,
}

impl InvariantSpec {
    pub fn new(kind: InvariantKind, max_dim: usize) -> Self {
        Self {
            kind,
            max_dim,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }

    /// One value per homological dimension.
    pub fn evaluate(&self, cloud: &PointCloud) -> Result<Vec<Option<f64>>> {
        let dgm = compute_full_persistence(cloud, self.max_dim, self.simplex_budget)?;
        Ok((0..=self.max_dim).map(|k| self.kind.evaluate(&dgm, k).value).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NullSims {
    Clouds(Vec<PointCloud>),
    /// `values[j][k]`: invariant of simulation `j` in dimension `k`.
    Invariants(Vec<Vec<Option<f64>>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullBatch {
    pub simplex: usize,
    pub n_points: usize,
    pub bbox: BoundingBox,
    pub seed_stream: u64,
    pub sims: NullSims,
}

impl NullBatch {
    pub fn len(&self) -> usize {
        match &self.sims {
            NullSims::Clouds(c) => c.len(),
            NullSims::Invariants(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSimplex {
    pub simplex: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullBatches {
    pub batches: Vec<NullBatch>,
    pub skipped: Vec<SkippedSimplex>,
}

fn simulation_count(n_total: usize) -> Result<usize> {
    if n_total < 2 {
        return Err(Error::input("N must be at least 2 (one data value plus simulations)"));
    }
    Ok(n_total - 1)
}

type Sources = Vec<(usize, PointCloud, BoundingBox)>;

/// Boxes for every simplex with at least two member points.
fn simplex_boxes(cloud: &PointCloud, mapper: &MapperStructure) -> Result<(Sources, Vec<SkippedSimplex>)> {
    let mut sources = Vec::new();
    let mut skipped = Vec::new();
    for (s, simplex) in mapper.simplices.iter().enumerate() {
        if simplex.member_points.len() < 2 {
            skipped.push(SkippedSimplex {
                simplex: s,
                reason: format!(
                    "{} member point(s); bounding box estimator undefined",
                    simplex.member_points.len()
                ),
            });
            continue;
        }
        let sub = cloud.subset(&simplex.member_points)?;
        let bbox = unbiased_bounding_box(&sub)?;
        sources.push((s, sub, bbox));
    }
    Ok((sources, skipped))
}

fn draw(rng: &RngSpec, simplex: usize, j: usize, bbox: &BoundingBox, n: usize) -> Result<PointCloud> {
    let mut r = rng.stream_for(&[simplex as u64, j as u64]);
    sample_null(bbox, n, &mut r)
}

/// `N - 1` simulated clouds per nerve simplex.
pub fn build_null_batches(
    cloud: &PointCloud,
    mapper: &MapperStructure,
    n_total: usize,
    rng: &RngSpec,
) -> Result<NullBatches> {
    let m = simulation_count(n_total)?;
    let (sources, skipped) = simplex_boxes(cloud, mapper)?;
    let batches = sources
        .into_iter()
        .map(|(s, sub, bbox)| {
            let clouds = (0..m)
                .map(|j| draw(rng, s, j, &bbox, sub.len()))
                .collect::<Result<Vec<_>>>()?;
            Ok(NullBatch {
                simplex: s,
                n_points: sub.len(),
                bbox,
                seed_stream: stream_id(&[s as u64]),
                sims: NullSims::Clouds(clouds),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullBatches { batches, skipped })
}

/// As [`build_null_batches`], keeping only the invariants of each simulated cloud.
pub fn build_null_invariant_batches(
    cloud: &PointCloud,
    mapper: &MapperStructure,
    n_total: usize,
    rng: &RngSpec,
    spec: &InvariantSpec,
) -> Result<NullBatches> {
    let m = simulation_count(n_total)?;
    let (sources, skipped) = simplex_boxes(cloud, mapper)?;
    let tasks: Vec<(usize, usize)> = (0..sources.len()).flat_map(|b| (0..m).map(move |j| (b, j))).collect();
    let values: Vec<Vec<Option<f64>>> = tasks
        .par_iter()
        .map(|&(b, j)| {
            let (s, sub, bbox) = &sources[b];
            spec.evaluate(&draw(rng, *s, j, bbox, sub.len())?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = values.into_iter();
    let batches = sources
        .into_iter()
        .map(|(s, sub, bbox)| NullBatch {
            simplex: s,
            n_points: sub.len(),
            bbox,
            seed_stream: stream_id(&[s as u64]),
            sims: NullSims::Invariants(values.by_ref().take(m).collect()),
        })
        .collect();
    Ok(NullBatches { batches, skipped })
}

/// Invariant table of the data against invariant-mode batches: one row per
/// (simplex, dimension).
pub fn invariant_table(
    cloud: &PointCloud,
    mapper: &MapperStructure,
    batches: &NullBatches,
    spec: &InvariantSpec,
) -> Result<InvariantTable> {
    let mut rows = Vec::new();
    for batch in &batches.batches {
        let NullSims::Invariants(sims) = &batch.sims else {
            return Err(Error::input("invariant table needs invariant-mode batches"));
        };
        let sub = cloud.subset(&mapper.simplices[batch.simplex].member_points)?;
        let data = spec.evaluate(&sub)?;
        for (k, &value) in data.iter().enumerate() {
            rows.push(InvariantRow {
                simplex: batch.simplex,
                hom_dim: k,
                data: value,
                sims: sims.iter().map(|v| v[k]).collect(),
            });
        }
    }
    InvariantTable::new(spec.kind, rows)
}

/// Identifies the population a stored invariant was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct StoreKey {
    /// `None` for uniform null boxes, `Some(σ)` for noisy circles.
    pub sigma: Option<f64>,
    pub width: f64,
    pub height: f64,
    pub n_points: usize,
}

impl StoreKey {
    pub fn null(width: f64, height: f64, n_points: usize) -> Self {
        Self {
            sigma: None,
            width,
            height,
            n_points,
        }
    }

    pub fn circle(sigma: f64, n_points: usize) -> Self {
        Self {
            sigma: Some(sigma),
            width: 1.0,
            height: 1.0,
            n_points,
        }
    }

    /// Null population matching this key's box and point count.
    pub fn matching_null(&self) -> Self {
        Self::null(self.width, self.height, self.n_points)
    }

    fn sort_key(&self) -> (u64, u64, u64, usize) {
        let s = self.sigma.map_or(0, |s| s.to_bits() | 1);
        (s, self.width.to_bits(), self.height.to_bits(), self.n_points)
    }

    fn family(&self) -> &'static str {
        if self.sigma.is_some() {
            "circle"
        } else {
            "null"
        }
    }
}

/// Invariants of one stored cloud, indexed by homological dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredCloud {
    pub cloud_id: u64,
    pub values: Vec<Option<f64>>,
}

/// Population key with floats as bit patterns, so it orders and hashes.
type GroupKey = (u64, u64, u64, usize);

/// Precomputed invariants grouped by population.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvariantStore {
    pub kind: Option<InvariantKind>,
    groups: BTreeMap<GroupKey, (StoreKey, Vec<StoredCloud>)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreRecord {
    family: String,
    sigma: Option<f64>,
    width: f64,
    height: f64,
    n_points: usize,
    cloud_id: u64,
    hom_dim: usize,
    kind: String,
    value: Option<f64>,
}

impl InvariantStore {
    pub fn new(kind: InvariantKind) -> Self {
        Self {
            kind: Some(kind),
            groups: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: StoreKey, cloud: StoredCloud) {
        self.groups
            .entry(key.sort_key())
            .or_insert_with(|| (key, Vec::new()))
            .1
            .push(cloud);
    }

    pub fn get(&self, key: &StoreKey) -> &[StoredCloud] {
        self.groups.get(&key.sort_key()).map_or(&[], |g| g.1.as_slice())
    }

    pub fn keys(&self) -> impl Iterator<Item = &StoreKey> {
        self.groups.values().map(|g| &g.0)
    }

    /// Number of stored invariant values (clouds times dimensions).
    pub fn len(&self) -> usize {
        self.groups
            .values()
            .flat_map(|g| g.1.iter())
            .map(|c| c.values.len())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends this store's records as CSV. A header is written when `header` is set.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let kind = self.kind.unwrap_or(InvariantKind::MaxDiff).name();
        let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
        for (key, clouds) in self.groups.values() {
            for c in clouds {
                for (k, v) in c.values.iter().enumerate() {
                    w.serialize(StoreRecord {
                        family: key.family().to_string(),
                        sigma: key.sigma,
                        width: key.width,
                        height: key.height,
                        n_points: key.n_points,
                        cloud_id: c.cloud_id,
                        hom_dim: k,
                        kind: kind.to_string(),
                        value: *v,
                    })?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut store = InvariantStore::default();
        type Partial = BTreeMap<(GroupKey, u64), (StoreKey, Vec<Option<f64>>)>;
        let mut partial = Partial::new();
        for rec in rdr.deserialize() {
            let rec: StoreRecord = rec?;
            let kind = InvariantKind::parse(&rec.kind)?;
            match store.kind {
                None => store.kind = Some(kind),
                Some(k) if k != kind => return Err(Error::input("store mixes invariant kinds")),
                _ => {}
            }
            let key = match rec.family.as_str() {
                "null" => StoreKey::null(rec.width, rec.height, rec.n_points),
                "circle" => StoreKey {
                    sigma: Some(rec.sigma.ok_or_else(|| Error::input("circle record without sigma"))?),
                    width: rec.width,
                    height: rec.height,
                    n_points: rec.n_points,
                },
                other => return Err(Error::input(format!("unknown store family {other:?}"))),
            };
            let entry = partial
                .entry((key.sort_key(), rec.cloud_id))
                .or_insert_with(|| (key, Vec::new()));
            if entry.1.len() <= rec.hom_dim {
                entry.1.resize(rec.hom_dim + 1, None);
            }
            entry.1[rec.hom_dim] = rec.value;
        }
        for ((_, cloud_id), (key, values)) in partial {
            store.insert(key, StoredCloud { cloud_id, values });
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{build_mapper, FilterSpec, MapperOptions};

    #[test]
    fn samples_stay_in_box_and_are_reproducible() {
        let bbox = BoundingBox::new(vec![-1.0, 2.0], vec![1.0, 2.5]).unwrap();
        let rng = RngSpec::new(9);
        let a = sample_null(&bbox, 200, &mut rng.stream(3)).unwrap();
        let b = sample_null(&bbox, 200, &mut rng.stream(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| bbox.contains(p)));
    }

    #[test]
    fn zero_width_axis_is_constant() {
        let bbox = BoundingBox::new(vec![0.0, 4.0], vec![1.0, 4.0]).unwrap();
        let c = sample_null(&bbox, 50, &mut RngSpec::new(1).stream(0)).unwrap();
        assert!(c.points().iter().all(|p| p[1] == 4.0));
    }

    #[test]
    fn sample_mean_near_centre() {
        let bbox = BoundingBox::from_widths(&[1.0, 1.0]).unwrap();
        let n = 1000;
        let c = sample_null(&bbox, n, &mut RngSpec::new(5).stream(0)).unwrap();
        let sd = (1.0f64 / 12.0).sqrt();
        for k in 0..2 {
            let mean = c.coordinate(k).unwrap().iter().sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < 3.0 * sd / (n as f64).sqrt(), "axis {k}: {mean}");
        }
    }

    fn small_mapper() -> (PointCloud, MapperStructure) {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![i as f64 / 11.0, ((i * 7) % 5) as f64 / 10.0])
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let m = build_mapper(
            &cloud,
            &FilterSpec::coordinate(0, 3, 0.5).unwrap(),
            &MapperOptions::default(),
        )
        .unwrap();
        (cloud, m)
    }

    #[test]
    fn batch_counts_and_sizes() {
        let (cloud, m) = small_mapper();
        let b = build_null_batches(&cloud, &m, 10, &RngSpec::new(2)).unwrap();
        assert_eq!(b.batches.len() + b.skipped.len(), m.simplices.len());
        for batch in &b.batches {
            assert_eq!(batch.len(), 9);
            let NullSims::Clouds(clouds) = &batch.sims else {
                panic!()
            };
            for c in clouds {
                assert_eq!(c.len(), m.simplices[batch.simplex].member_points.len());
                assert!(c.points().iter().all(|p| batch.bbox.contains(p)));
            }
        }
        assert_eq!(b, build_null_batches(&cloud, &m, 10, &RngSpec::new(2)).unwrap());
        assert!(build_null_batches(&cloud, &m, 1, &RngSpec::new(2)).is_err());
    }

    #[test]
    fn singleton_simplex_is_skipped() {
        let cloud = PointCloud::new(vec![vec![0.0], vec![0.1], vec![5.0]]).unwrap();
        let cover = vec![
            crate::mapper::CoverElement {
                interval: 0,
                cluster: 0,
                members: vec![0, 1],
            },
            crate::mapper::CoverElement {
                interval: 1,
                cluster: 0,
                members: vec![2],
            },
        ];
        let m = MapperStructure::from_cover(Vec::new(), cover, 1).unwrap();
        let b = build_null_batches(&cloud, &m, 5, &RngSpec::new(0)).unwrap();
        assert_eq!(b.batches.len(), 1);
        assert_eq!(b.skipped.len(), 1);
        assert_eq!(b.skipped[0].simplex, m.simplex_index(&[1]).unwrap());
    }

    #[test]
    fn invariant_mode_matches_cloud_mode() {
        let (cloud, m) = small_mapper();
        let spec = InvariantSpec::new(InvariantKind::MaxDiff, 1);
        let rng = RngSpec::new(4);
        let clouds = build_null_batches(&cloud, &m, 6, &rng).unwrap();
        let inv = build_null_invariant_batches(&cloud, &m, 6, &rng, &spec).unwrap();
        for (a, b) in clouds.batches.iter().zip(&inv.batches) {
            let (NullSims::Clouds(cs), NullSims::Invariants(vs)) = (&a.sims, &b.sims) else {
                panic!()
            };
            for (c, v) in cs.iter().zip(vs) {
                assert_eq!(&spec.evaluate(c).unwrap(), v);
            }
        }
        let table = invariant_table(&cloud, &m, &inv, &spec).unwrap();
        assert_eq!(table.rows().len(), 2 * inv.batches.len());
        assert_eq!(table.n_sims(), 5);
    }

    #[test]
    fn store_round_trip() {
        let mut store = InvariantStore::new(InvariantKind::MaxDiff);
        store.insert(
            StoreKey::null(0.1, 10.0, 50),
            StoredCloud {
                cloud_id: 0,
                values: vec![Some(0.5), None],
            },
        );
        store.insert(
            StoreKey::circle(0.25, 10),
            StoredCloud {
                cloud_id: 7,
                values: vec![Some(0.125), Some(0.3)],
            },
        );
        let mut buf = Vec::new();
        store.write_csv(&mut buf, true).unwrap();
        let back = InvariantStore::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.len(), 4);
        assert_eq!(back.get(&StoreKey::circle(0.25, 10))[0].cloud_id, 7);
    }
}
