//! Mapper construction for a one-dimensional filter: interval cover, single-linkage
//! clustering of each preimage, and the nerve of the resulting cover.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{l2, PointCloud};

/// Source of the filter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Projection onto coordinate `k` (zero-based).
    Coordinate(usize),
    /// One value per point, supplied by the caller.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub num_intervals: usize,
    pub overlap: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, num_intervals: usize, overlap: f64) -> Result<Self> {
        if num_intervals == 0 {
            return Err(Error::input("number of intervals must be positive"));
        }
        if !(overlap > 0.0 && overlap < 1.0) {
            return Err(Error::input(format!("overlap must lie in (0, 1), got {overlap}")));
        }
        Ok(Self {
            kind,
            num_intervals,
            overlap,
        })
    }

    pub fn coordinate(k: usize, num_intervals: usize, overlap: f64) -> Result<Self> {
        Self::new(FilterKind::Coordinate(k), num_intervals, overlap)
    }

    /// Filter values for every point of `cloud`.
    pub fn values(&self, cloud: &PointCloud) -> Result<Vec<f64>> {
        match &self.kind {
            FilterKind::Coordinate(k) => cloud.coordinate(*k),
            FilterKind::Custom(v) => {
                if v.len() != cloud.len() {
                    return Err(Error::input(format!(
                        "custom filter has {} values for {} points",
                        v.len(),
                        cloud.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::input("custom filter values must be finite"));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Equal-length intervals covering the range of `values`, consecutive ones
/// overlapping by the fraction `overlap` of their length.
pub fn interval_cover(values: &[f64], num_intervals: usize, overlap: f64) -> Result<Vec<Interval>> {
    if values.is_empty() {
        return Err(Error::input("cannot cover an empty value set"));
    }
    if num_intervals == 0 {
        return Err(Error::input("number of intervals must be positive"));
    }
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(Error::input(format!("overlap must lie in (0, 1), got {overlap}")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        log::warn!("all filter values equal {min}; using a single degenerate interval");
        return Ok(vec![Interval { lower: min, upper: max }]);
    }
    let n = num_intervals as f64;
    let length = (max - min) / (n - (n - 1.0) * overlap);
    let step = length * (1.0 - overlap);
    let mut cover: Vec<Interval> = (0..num_intervals)
        .map(|i| {
            let lower = min + i as f64 * step;
            Interval {
                lower,
                upper: lower + length,
            }
        })
        .collect();
    // Rounding must not leave the maximum uncovered.
    if let Some(last) = cover.last_mut() {
        last.upper = last.upper.max(max);
    }
    Ok(cover)
}

/// How the single-linkage dendrogram of a preimage is cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffRule {
    /// Merge points whose linkage distance is at most the given value.
    Fixed(f64),
    /// Histogram the merge heights together with the preimage diameter and cut at
    /// the centre of the first empty bin; no empty bin means a single cluster.
    HistogramGap { bins: usize },
}

impl Default for CutoffRule {
    fn default() -> Self {
        CutoffRule::HistogramGap { bins: 10 }
    }
}

/// Single-linkage clusters of `members`, each sorted, ordered by smallest member.
pub fn cluster_preimage(cloud: &PointCloud, members: &[usize], rule: CutoffRule) -> Vec<Vec<usize>> {
    let mut members = members.to_vec();
    members.sort_unstable();
    members.dedup();
    let m = members.len();
    if m <= 1 {
        return if m == 0 { Vec::new() } else { vec![members] };
    }

    // Prim's algorithm: the MST edge weights are exactly the merge heights.
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    let mut parent = vec![0usize; m];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(m - 1);
    let mut diameter: f64 = 0.0;
    best[0] = 0.0;
    for _ in 0..m {
        let mut u = usize::MAX;
        for v in 0..m {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if u != 0 {
            edges.push((best[u], parent[u], u));
        }
        let pu = cloud.point(members[u]);
        for v in 0..m {
            if v == u {
                continue;
            }
            let d = l2(pu, cloud.point(members[v]));
            diameter = diameter.max(d);
            if !in_tree[v] && d < best[v] {
                best[v] = d;
                parent[v] = u;
            }
        }
    }

    let cutoff = match rule {
        CutoffRule::Fixed(eps) => eps,
        CutoffRule::HistogramGap { bins } => {
            let heights: Vec<f64> = edges.iter().map(|e| e.0).collect();
            histogram_gap_cutoff(&heights, diameter, bins.max(1))
        }
    };

    let mut uf = crate::persistence::UnionFind::new(m);
    for &(h, a, b) in &edges {
        if h <= cutoff {
            uf.union(a, b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &p) in members.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(p);
    }
    let mut clusters: Vec<Vec<usize>> = groups.into_values().collect();
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Cut height for the histogram-gap rule.
fn histogram_gap_cutoff(heights: &[f64], diameter: f64, bins: usize) -> f64 {
    let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diameter;
    if heights.len() == 1 || hi <= lo {
        return f64::INFINITY;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    // Bins are right-closed, the first one also closed on the left.
    for &h in heights.iter().chain(std::iter::once(&diameter)) {
        let pos = ((h - lo) / width).ceil() as isize - 1;
        let idx = pos.clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    match counts.iter().position(|&c| c == 0) {
        Some(k) => lo + (k as f64 + 0.5) * width,
        None => f64::INFINITY,
    }
}

/// One cluster of one interval preimage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverElement {
    pub interval: usize,
    /// Position among the clusters of the same interval.
    pub cluster: usize,
    pub members: Vec<usize>,
}

/// A nerve simplex together with the points in the joint intersection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerveSimplex {
    pub vertices: Vec<usize>,
    pub member_points: Vec<usize>,
}

impl NerveSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapperOptions {
    pub cutoff: CutoffRule,
    /// Overrides the default nerve dimension cap.
    pub max_nerve_dim: Option<usize>,
}

/// Largest number of intervals that generically share a point, minus one.
pub fn default_nerve_dim_cap(ambient_dim: usize, num_intervals: usize, overlap: f64) -> usize {
    let overlapping = (1.0 / (1.0 - overlap) - 1e-9).ceil() as usize;
    ambient_dim
        .min(overlapping.saturating_sub(1))
        .min(num_intervals.saturating_sub(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapperStructure {
    pub intervals: Vec<Interval>,
    pub cover_elements: Vec<CoverElement>,
    pub simplices: Vec<NerveSimplex>,
    pub nerve_dim_cap: usize,
}

/// Clusters every interval preimage and forms the nerve of the resulting cover.
pub fn build_mapper(cloud: &PointCloud, filter: &FilterSpec, opts: &MapperOptions) -> Result<MapperStructure> {
    let values = filter.values(cloud)?;
    let intervals = interval_cover(&values, filter.num_intervals, filter.overlap)?;
    let cap = opts
        .max_nerve_dim
        .unwrap_or_else(|| default_nerve_dim_cap(cloud.dim(), intervals.len(), filter.overlap));

    let mut cover_elements = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        let pre: Vec<usize> = (0..cloud.len()).filter(|&p| iv.contains(values[p])).collect();
        for (c, members) in cluster_preimage(cloud, &pre, opts.cutoff).into_iter().enumerate() {
            cover_elements.push(CoverElement {
                interval: i,
                cluster: c,
                members,
            });
        }
    }
    MapperStructure::from_cover(intervals, cover_elements, cap)
}

impl MapperStructure {
    /// Nerve of an explicit cover. Elements are put into canonical order by
    /// (interval, smallest member).
    pub fn from_cover(intervals: Vec<Interval>, mut cover_elements: Vec<CoverElement>, cap: usize) -> Result<Self> {
        if cover_elements.iter().any(|e| e.members.is_empty()) {
            return Err(Error::input("cover elements must be nonempty"));
        }
        for e in &mut cover_elements {
            e.members.sort_unstable();
            e.members.dedup();
        }
        cover_elements.sort_by(|a, b| (a.interval, a.members[0]).cmp(&(b.interval, b.members[0])));

        let n_points = cover_elements
            .iter()
            .flat_map(|e| e.members.iter())
            .max()
            .map_or(0, |m| m + 1);
        let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n_points];
        for (e, el) in cover_elements.iter().enumerate() {
            for &p in &el.members {
                containing[p].push(e);
            }
        }

        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (p, elems) in containing.iter().enumerate() {
            for subset in subsets_up_to(elems, cap + 1) {
                faces.entry(subset).or_default().push(p);
            }
        }
        let mut simplices: Vec<NerveSimplex> = faces
            .into_iter()
            .map(|(vertices, member_points)| NerveSimplex {
                vertices,
                member_points,
            })
            .collect();
        simplices.sort_by(|a, b| {
            (a.vertices.last(), a.vertices.len(), &a.vertices).cmp(&(b.vertices.last(), b.vertices.len(), &b.vertices))
        });
        Ok(Self {
            intervals,
            cover_elements,
            simplices,
            nerve_dim_cap: cap,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.cover_elements.len()
    }

    pub fn interval_of(&self, element: usize) -> usize {
        self.cover_elements[element].interval
    }

    /// Position of the simplex with the given sorted vertex list.
    pub fn simplex_index(&self, vertices: &[usize]) -> Option<usize> {
        self.simplices.iter().position(|s| s.vertices == vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = &NerveSimplex> {
        self.simplices.iter().filter(|s| s.vertices.len() == 2)
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.edges().filter(|s| s.vertices.contains(&vertex)).count()
    }

    /// Highest dimension of a simplex actually present.
    pub fn dim(&self) -> usize {
        self.simplices.iter().map(NerveSimplex::dim).max().unwrap_or(0)
    }

    /// Label `interval:cluster` of a cover element.
    pub fn label(&self, element: usize) -> String {
        let e = &self.cover_elements[element];
        format!("{}:{}", e.interval, e.cluster)
    }

    /// Graphviz rendering of the 1-skeleton; node size follows member count.
    pub fn to_dot(&self) -> String {
        let largest = self.cover_elements.iter().map(|e| e.members.len()).max().unwrap_or(1) as f64;
        let mut out = String::from("graph mapper {\n  node [shape=circle];\n");
        for (i, e) in self.cover_elements.iter().enumerate() {
            let size = 0.3 + 0.7 * (e.members.len() as f64 / largest).sqrt();
            let _ = writeln!(
                out,
                "  {i} [label=\"{}\", width={size:.3}, members={}];",
                self.label(i),
                e.members.len()
            );
        }
        for s in self.edges() {
            let _ = writeln!(
                out,
                "  {} -- {} [weight={}];",
                s.vertices[0],
                s.vertices[1],
                s.member_points.len()
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "cover_elements": self.cover_elements.iter().map(|e| serde_json::json!({
                "label": format!("{}:{}", e.interval, e.cluster),
                "interval": e.interval,
                "members": e.members,
            })).collect::<Vec<_>>(),
            "simplices": self.simplices.iter().map(|s| &s.vertices).collect::<Vec<_>>(),
            "member_points": self.simplices.iter().map(|s| &s.member_points).collect::<Vec<_>>(),
            "nerve_dim_cap": self.nerve_dim_cap,
        })
    }
}

/// Nonempty subsets of the sorted slice `items` with at most `max_len` elements,
/// each in ascending order.
fn subsets_up_to(items: &[usize], max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(items: &[usize], start: usize, max_len: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in start..items.len() {
            current.push(items[i]);
            out.push(current.clone());
            if current.len() < max_len {
                rec(items, i + 1, max_len, current, out);
            }
            current.pop();
        }
    }
    rec(items, 0, max_len, &mut current, &mut out);
    out
}
