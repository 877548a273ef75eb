//! Vietoris-Rips persistence over Z/2.
//!
//! Filtration values use the radius convention: a simplex enters at half its
//! diameter. The complex is truncated at dimension `max_dim + 1` and at a radius
//! cap; only homology in dimensions `0..=max_dim` is reported.
//!
//! Dimension 0 is paired by union-find over the sorted edges. Higher dimensions
//! are paired by reducing coboundary columns with clearing, see
//! [`Filtration::reduce`].

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{l2, PointCloud};

/// Default cap on the number of simplices in one filtration.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceBar {
    pub hom_dim: usize,
    pub birth: f64,
    /// `None` marks an infinite bar.
    pub death: Option<f64>,
}

impl PersistenceBar {
    pub fn is_finite(&self) -> bool {
        self.death.is_some()
    }

    pub fn lifespan(&self) -> Option<f64> {
        self.death.map(|d| d - self.birth)
    }

    /// Alive at radius `r`: `birth <= r < death`.
    pub fn alive_at(&self, r: f64) -> bool {
        self.birth <= r && self.death.is_none_or(|d| r < d)
    }
}

fn bar_order(a: &PersistenceBar, b: &PersistenceBar) -> Ordering {
    a.hom_dim
        .cmp(&b.hom_dim)
        .then(a.birth.total_cmp(&b.birth))
        .then(match (a.death, b.death) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    /// Sorted by `(hom_dim, birth, death)`, infinite deaths last.
    pub bars: Vec<PersistenceBar>,
    pub max_dim: usize,
    pub max_radius: f64,
}

impl PersistenceDiagram {
    pub fn bars_in(&self, hom_dim: usize) -> impl Iterator<Item = &PersistenceBar> {
        self.bars.iter().filter(move |b| b.hom_dim == hom_dim)
    }

    pub fn finite_bars(&self, hom_dim: usize) -> impl Iterator<Item = &PersistenceBar> {
        self.bars_in(hom_dim).filter(|b| b.is_finite())
    }

    pub fn infinite_count(&self, hom_dim: usize) -> usize {
        self.bars_in(hom_dim).filter(|b| !b.is_finite()).count()
    }

    /// Betti numbers at radius `r` for dimensions `0..=max_dim`.
    pub fn betti_at(&self, r: f64) -> Vec<usize> {
        let mut out = vec![0; self.max_dim + 1];
        for b in &self.bars {
            if b.alive_at(r) {
                out[b.hom_dim] += 1;
            }
        }
        out
    }

    /// Largest finite death over all dimensions.
    pub fn oldest_death(&self) -> Option<f64> {
        self.bars.iter().filter_map(|b| b.death).max_by(|a, b| a.total_cmp(b))
    }

    /// JSON export: a list of `{dim, birth, death}` with `null` for infinite deaths.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.bars
                .iter()
                .map(|b| serde_json::json!({"dim": b.hom_dim, "birth": b.birth, "death": b.death}))
                .collect(),
        )
    }
}

/// A simplex with its filtration value (half its diameter).
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl FilteredSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistenceOptions {
    pub max_dim: usize,
    pub max_radius: f64,
    pub simplex_budget: usize,
}

impl PersistenceOptions {
    pub fn new(max_dim: usize, max_radius: f64) -> Self {
        Self {
            max_dim,
            max_radius,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.simplex_budget = budget;
        self
    }
}

/// Smallest radius at which some vertex is joined to every other vertex.
///
/// Beyond it the Rips complex is a cone, so every finite bar has died and capping
/// the filtration here loses nothing.
pub fn enclosing_radius(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let mut far: f64 = 0.0;
        for j in 0..n {
            if i != j {
                far = far.max(l2(cloud.point(i), cloud.point(j)));
            }
        }
        best = best.min(far);
    }
    if n == 1 {
        0.0
    } else {
        best / 2.0
    }
}

/// Simplices of the Rips complex up to dimension `max_dim + 1` with value at most
/// `max_radius`, ordered by value, then dimension, then lexicographically.
pub fn rips_filtration(cloud: &PointCloud, max_dim: usize, max_radius: f64) -> Result<Vec<FilteredSimplex>> {
    check_radius(max_radius)?;
    let filt = Filtration::build(cloud, max_dim + 1, max_radius, DEFAULT_SIMPLEX_BUDGET)?;
    let mut all: Vec<FilteredSimplex> = Vec::with_capacity(filt.total());
    for v in 0..filt.n {
        all.push(FilteredSimplex {
            vertices: vec![v],
            value: 0.0,
        });
    }
    for e in &filt.edges {
        all.push(FilteredSimplex {
            vertices: vec![e.a as usize, e.b as usize],
            value: e.value,
        });
    }
    for level in &filt.higher {
        for i in 0..level.len() {
            all.push(FilteredSimplex {
                vertices: level.vertices(i).iter().map(|&v| v as usize).collect(),
                value: level.values[i],
            });
        }
    }
    all.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(all)
}

fn check_radius(max_radius: f64) -> Result<()> {
    if !(max_radius > 0.0) {
        return Err(Error::input("max_radius must be positive"));
    }
    Ok(())
}

/// Persistence diagram of the capped Rips filtration, dimensions `0..=max_dim`.
pub fn compute_persistence(cloud: &PointCloud, max_dim: usize, max_radius: f64) -> Result<PersistenceDiagram> {
    check_radius(max_radius)?;
    persistence_with(cloud, PersistenceOptions::new(max_dim, max_radius))
}

/// As [`compute_persistence`] with the cap set to [`enclosing_radius`], which gives
/// the diagram of the untruncated filtration.
pub fn compute_full_persistence(
    cloud: &PointCloud,
    max_dim: usize,
    simplex_budget: usize,
) -> Result<PersistenceDiagram> {
    let r = enclosing_radius(cloud);
    let opts = PersistenceOptions::new(max_dim, r).with_budget(simplex_budget);
    persistence_with(cloud, opts)
}

/// Core entry point. A zero radius is accepted here (clouds of coincident points).
pub fn persistence_with(cloud: &PointCloud, opts: PersistenceOptions) -> Result<PersistenceDiagram> {
    if opts.max_radius.is_nan() || opts.max_radius < 0.0 {
        return Err(Error::input("max_radius must be nonnegative"));
    }
    let filt = Filtration::build(cloud, opts.max_dim + 1, opts.max_radius, opts.simplex_budget)?;
    let mut bars = filt.reduce(opts.max_dim);
    bars.sort_by(bar_order);
    Ok(PersistenceDiagram {
        bars,
        max_dim: opts.max_dim,
        max_radius: opts.max_radius,
    })
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    value: f64,
    a: u32,
    b: u32,
}

/// Simplices of one dimension `>= 2`, vertices stored flat with a fixed stride.
#[derive(Debug, Clone)]
struct Level {
    width: usize,
    values: Vec<f64>,
    vertices: Vec<u32>,
}

impl Level {
    fn new(width: usize) -> Self {
        Self {
            width,
            values: Vec::new(),
            vertices: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn vertices(&self, i: usize) -> &[u32] {
        &self.vertices[i * self.width..(i + 1) * self.width]
    }

    fn push(&mut self, value: f64, vertices: &[u32]) {
        self.values.push(value);
        self.vertices.extend_from_slice(vertices);
    }

    /// Sorts by value, ties broken by the reverse-lexicographic vertex order
    /// (any fixed tie-break yields the same diagram).
    fn sort(&mut self, binom: &Binomial) {
        // Values are nonnegative, so their bit patterns sort like the values.
        let mut order: Vec<(u64, u64, u32)> = (0..self.len())
            .map(|i| (self.values[i].to_bits(), simplex_key(self.vertices(i), binom), i as u32))
            .collect();
        order.sort_unstable();
        let order: Vec<u32> = order.into_iter().map(|(_, _, i)| i).collect();
        let values = order.iter().map(|&i| self.values[i as usize]).collect();
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for &i in &order {
            vertices.extend_from_slice(self.vertices(i as usize));
        }
        self.values = values;
        self.vertices = vertices;
    }
}

/// Combinatorial-number-system key of a sorted vertex list.
fn simplex_key(vertices: &[u32], binom: &Binomial) -> u64 {
    vertices
        .iter()
        .enumerate()
        .map(|(k, &v)| binom.get(v as usize, k + 1))
        .sum()
}

struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    fn new(n: usize, k: usize) -> Self {
        let mut table = vec![vec![0u64; k + 1]; n + 1];
        for i in 0..=n {
            table[i][0] = 1;
            for j in 1..=k.min(i) {
                table[i][j] = table[i - 1][j - 1].saturating_add(table[i - 1][j]);
            }
        }
        Self { table }
    }

    fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.table[n][k]
        }
    }
}

struct Filtration {
    n: usize,
    edges: Vec<Edge>,
    /// `higher[k]` holds the simplices of dimension `k + 2`, sorted.
    higher: Vec<Level>,
}

impl Filtration {
    fn total(&self) -> usize {
        self.n + self.edges.len() + self.higher.iter().map(Level::len).sum::<usize>()
    }

    fn build(cloud: &PointCloud, top_dim: usize, max_radius: f64, budget: usize) -> Result<Self> {
        let n = cloud.len();
        if n > u32::MAX as usize / 2 {
            return Err(Error::input("point cloud too large"));
        }
        let mut count = n;
        if count > budget {
            return Err(Error::Budget { budget });
        }
        let mut dist = vec![0.0; n * n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = l2(cloud.point(i), cloud.point(j)) / 2.0;
                dist[i * n + j] = v;
                dist[j * n + i] = v;
                if top_dim >= 1 && v <= max_radius {
                    edges.push(Edge {
                        value: v,
                        a: i as u32,
                        b: j as u32,
                    });
                    count += 1;
                    if count > budget {
                        return Err(Error::Budget { budget });
                    }
                }
            }
        }
        edges.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));

        let mut higher: Vec<Level> = (2..=top_dim).map(|d| Level::new(d + 1)).collect();
        if top_dim >= 2 {
            let mut adj = vec![false; n * n];
            let mut up: Vec<Vec<u32>> = vec![Vec::new(); n];
            for e in &edges {
                adj[e.a as usize * n + e.b as usize] = true;
                adj[e.b as usize * n + e.a as usize] = true;
                up[e.a as usize].push(e.b);
            }
            for list in &mut up {
                list.sort_unstable();
            }
            let mut ctx = CliqueCtx {
                n,
                adj: &adj,
                dist: &dist,
                top_dim,
                budget,
                count,
                out: &mut higher,
            };
            for (v, nbrs) in up.iter().enumerate() {
                let mut stack = vec![v as u32];
                ctx.extend(&mut stack, 0.0, nbrs)?;
            }
            let binom = Binomial::new(n, top_dim + 1);
            for level in &mut higher {
                level.sort(&binom);
            }
        }
        Ok(Self { n, edges, higher })
    }

    fn count(&self, dim: usize) -> usize {
        match dim {
            0 => self.n,
            1 => self.edges.len(),
            d => self.higher.get(d - 2).map_or(0, Level::len),
        }
    }

    fn value(&self, dim: usize, i: usize) -> f64 {
        match dim {
            0 => 0.0,
            1 => self.edges[i].value,
            d => self.higher[d - 2].values[i],
        }
    }

    /// For every simplex of dimension `dim`, the positions of its cofacets in the
    /// reversed dimension-`dim + 1` order, ascending.
    fn cofacets(&self, dim: usize, binom: &Binomial) -> Vec<Vec<u32>> {
        let n = self.n;
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); self.count(dim)];
        let Some(level) = self.higher.get(dim - 1) else {
            return out;
        };
        let total = level.len();
        if dim == 1 {
            let mut edge_index = vec![u32::MAX; n * n];
            for (k, e) in self.edges.iter().enumerate() {
                edge_index[e.a as usize * n + e.b as usize] = k as u32;
            }
            for t in 0..total {
                let rev = (total - 1 - t) as u32;
                let vs = level.vertices(t);
                let (a, b, c) = (vs[0] as usize, vs[1] as usize, vs[2] as usize);
                for e in [a * n + b, a * n + c, b * n + c] {
                    out[edge_index[e] as usize].push(rev);
                }
            }
        } else {
            let lower = &self.higher[dim - 2];
            let faces: HashMap<u64, u32> = (0..lower.len())
                .map(|i| (simplex_key(lower.vertices(i), binom), i as u32))
                .collect();
            let mut facet = Vec::with_capacity(dim + 1);
            for t in 0..total {
                let rev = (total - 1 - t) as u32;
                let vs = level.vertices(t);
                for skip in 0..vs.len() {
                    facet.clear();
                    facet.extend(vs.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v));
                    out[faces[&simplex_key(&facet, binom)] as usize].push(rev);
                }
            }
        }
        for list in &mut out {
            list.reverse();
        }
        out
    }

    /// Pairs the filtration and returns bars in dimensions `0..=max_dim` with zero
    /// lengths removed.
    ///
    /// Dimension 0 uses union-find. Each higher dimension `k` reduces the
    /// anti-transposed boundary matrix (coboundary columns of the `k`-simplices,
    /// youngest first) and skips every `k`-simplex already paired as a death in
    /// dimension `k - 1`. Both give the same pairing as the boundary-matrix reduction;
    /// the oldest cofacet of most simplices is unclaimed, so most columns pair
    /// without a single addition.
    fn reduce(&self, max_dim: usize) -> Vec<PersistenceBar> {
        let n = self.n;
        let mut bars = Vec::new();

        let mut uf = UnionFind::new(n);
        let mut cleared = vec![false; self.edges.len()];
        for (k, e) in self.edges.iter().enumerate() {
            if uf.union(e.a as usize, e.b as usize) {
                cleared[k] = true;
                if e.value > 0.0 {
                    bars.push(PersistenceBar {
                        hom_dim: 0,
                        birth: 0.0,
                        death: Some(e.value),
                    });
                }
            }
        }
        for _ in 0..uf.components {
            bars.push(PersistenceBar {
                hom_dim: 0,
                birth: 0.0,
                death: None,
            });
        }

        let top = self.higher.len() + 1;
        let binom = Binomial::new(n, top + 1);
        for dim in 1..=max_dim.min(top) {
            let count = self.count(dim);
            let cofaces = self.cofacets(dim, &binom);
            let upper = self.count(dim + 1);
            // Column c is the simplex count - 1 - c: youngest first.
            let skip: Vec<bool> = (0..count).map(|c| cleared[count - 1 - c]).collect();
            let pivots = reduce_columns(count, upper, |c| cofaces[count - 1 - c].clone(), &skip);
            let mut next_cleared = vec![false; upper];
            for (c, piv) in pivots.into_iter().enumerate() {
                if skip[c] {
                    continue;
                }
                let i = count - 1 - c;
                let birth = self.value(dim, i);
                match piv {
                    Some(rev) => {
                        let t = upper - 1 - rev as usize;
                        next_cleared[t] = true;
                        let death = self.value(dim + 1, t);
                        if death > birth {
                            bars.push(PersistenceBar {
                                hom_dim: dim,
                                birth,
                                death: Some(death),
                            });
                        }
                    }
                    None => bars.push(PersistenceBar {
                        hom_dim: dim,
                        birth,
                        death: None,
                    }),
                }
            }
            cleared = next_cleared;
        }
        bars
    }
}

struct CliqueCtx<'a> {
    n: usize,
    adj: &'a [bool],
    dist: &'a [f64],
    top_dim: usize,
    budget: usize,
    count: usize,
    out: &'a mut Vec<Level>,
}

impl CliqueCtx<'_> {
    /// Extends the clique in `stack` by each candidate, emitting simplices of
    /// dimension 2..=top_dim.
    fn extend(&mut self, stack: &mut Vec<u32>, value: f64, candidates: &[u32]) -> Result<()> {
        for (ci, &u) in candidates.iter().enumerate() {
            let mut v = value;
            for &w in stack.iter() {
                v = v.max(self.dist[w as usize * self.n + u as usize]);
            }
            stack.push(u);
            let dim = stack.len() - 1;
            if dim >= 2 {
                self.count += 1;
                if self.count > self.budget {
                    return Err(Error::Budget { budget: self.budget });
                }
                self.out[dim - 2].push(v, stack);
            }
            if dim < self.top_dim {
                let next: Vec<u32> = candidates[ci + 1..]
                    .iter()
                    .copied()
                    .filter(|&w| self.adj[u as usize * self.n + w as usize])
                    .collect();
                if !next.is_empty() {
                    self.extend(stack, v, &next)?;
                }
            }
            stack.pop();
        }
        Ok(())
    }
}

/// Left-to-right Z/2 column reduction where each column is a sorted list of row
/// positions and the pivot is the largest entry. Columns flagged in `skip` are
/// treated as zero.
fn reduce_columns<F>(ncols: usize, nrows: usize, column: F, skip: &[bool]) -> Vec<Option<u32>>
where
    F: Fn(usize) -> Vec<u32>,
{
    let mut pivots: Vec<Option<u32>> = vec![None; ncols];
    let mut owner: Vec<u32> = vec![u32::MAX; nrows];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); ncols];
    let mut scratch = Vec::new();
    for j in 0..ncols {
        if skip[j] {
            continue;
        }
        let mut col = column(j);
        while let Some(&low) = col.last() {
            let other = owner[low as usize];
            if other == u32::MAX {
                break;
            }
            sym_diff_into(&col, &reduced[other as usize], &mut scratch);
            std::mem::swap(&mut col, &mut scratch);
        }
        if let Some(&low) = col.last() {
            owner[low as usize] = j as u32;
            pivots[j] = Some(low);
            reduced[j] = col;
        }
    }
    pivots
}

fn sym_diff_into(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    pub(crate) components: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            components: n,
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when `a` and `b` were in different components.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }
}
