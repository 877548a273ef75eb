//! Separation criterion for the persistent nerve lemma.
//!
//! If every pair of cover elements is ε-separated, every intersection of cover
//! elements is ε-acyclic and no bar of an intersection dies after ε, the Mapper
//! nerve is `2(n+1)ε`-interleaved with the Vietoris-Rips complex of the data in
//! homological dimension `n`. Here ε is taken as the largest finite lifespan or
//! death time over all intersection diagrams, and the criterion applies when the
//! cover separation exceeds it.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::mapper::MapperStructure;
use crate::persistence::PersistenceDiagram;

/// Serializes non-finite values as `null`.
pub(crate) fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSeparation {
    pub i: usize,
    pub j: usize,
    /// Minimum distance between `U_i \ U_j` and `U_j \ U_i`; infinite when one
    /// element contains the other.
    #[serde(serialize_with = "finite_or_null")]
    pub distance: f64,
}

/// Minimum cross distances between the set differences of every pair of cover
/// elements, in lexicographic pair order.
pub fn pairwise_separation(cloud: &PointCloud, cover: &MapperStructure) -> Result<Vec<PairSeparation>> {
    let k = cover.cover_elements.len();
    if k < 2 {
        return Err(Error::input("separation needs at least two cover elements"));
    }
    let n = cloud.len();
    let mut member = vec![vec![false; n]; k];
    for (e, el) in cover.cover_elements.iter().enumerate() {
        for &p in &el.members {
            if p >= n {
                return Err(Error::input(format!("cover element {e} refers to point {p} of {n}")));
            }
            member[e][p] = true;
        }
    }
    let dist = cloud.distance_matrix();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let a: Vec<usize> = cover.cover_elements[i]
                .members
                .iter()
                .copied()
                .filter(|&p| !member[j][p])
                .collect();
            let b: Vec<usize> = cover.cover_elements[j]
                .members
                .iter()
                .copied()
                .filter(|&p| !member[i][p])
                .collect();
            let mut d = f64::INFINITY;
            for &x in &a {
                for &y in &b {
                    d = d.min(dist[x * n + y]);
                }
            }
            out.push(PairSeparation { i, j, distance: d });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBound {
    pub hom_dim: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub pairwise_sep: Vec<PairSeparation>,
    /// Smallest pairwise separation; infinite when there is no constrained pair.
    #[serde(serialize_with = "finite_or_null")]
    pub epsilon_sep: f64,
    /// Oldest finite death over all intersection diagrams.
    pub epsilon_death: f64,
    /// Longest finite lifespan over all intersection diagrams.
    pub epsilon_lifespan: f64,
    pub epsilon_required: f64,
    /// Every intersection has exactly one unbounded bar, in dimension 0.
    pub components_ok: bool,
    pub applies: bool,
    /// Why the criterion does not apply; empty when it does.
    pub reasons: Vec<String>,
    pub nerve_dim: usize,
    pub ambient_dim: usize,
    /// `2(nerve_dim + 1)`.
    pub multiplier: f64,
    pub interleaving_bound: Option<f64>,
    /// `2(n+1)ε` for `n = 0..=nerve_dim`.
    pub per_dimension_bounds: Option<Vec<DimensionBound>>,
    /// `2(d+1)ε` across all dimensions.
    pub global_bound: Option<f64>,
}

/// Evaluates the separation criterion. `diagrams[s]` must be the diagram of the
/// member points of `cover.simplices[s]`, computed far enough for every finite
/// bar to have died.
pub fn corollary_check(
    cloud: &PointCloud,
    cover: &MapperStructure,
    diagrams: &[PersistenceDiagram],
    nerve_dim: usize,
) -> Result<SeparationReport> {
    if diagrams.len() != cover.simplices.len() {
        return Err(Error::input(format!(
            "{} diagrams supplied for {} simplices",
            diagrams.len(),
            cover.simplices.len()
        )));
    }
    let pairwise_sep = if cover.cover_elements.len() >= 2 {
        pairwise_separation(cloud, cover)?
    } else {
        Vec::new()
    };
    let epsilon_sep = pairwise_sep.iter().map(|p| p.distance).fold(f64::INFINITY, f64::min);

    let mut epsilon_death: f64 = 0.0;
    let mut epsilon_lifespan: f64 = 0.0;
    let mut bad_components = Vec::new();
    let mut unbounded_higher = Vec::new();
    for (s, dgm) in diagrams.iter().enumerate() {
        for bar in &dgm.bars {
            match bar.death {
                Some(d) => {
                    epsilon_death = epsilon_death.max(d);
                    epsilon_lifespan = epsilon_lifespan.max(d - bar.birth);
                }
                None if bar.hom_dim > 0 => unbounded_higher.push(s),
                None => {}
            }
        }
        if dgm.infinite_count(0) != 1 {
            bad_components.push(s);
        }
    }
    let epsilon_required = epsilon_death.max(epsilon_lifespan);
    let components_ok = bad_components.is_empty() && unbounded_higher.is_empty();

    let mut reasons = Vec::new();
    if !bad_components.is_empty() {
        reasons.push(format!(
            "component count: simplices {bad_components:?} are not connected"
        ));
    }
    if !unbounded_higher.is_empty() {
        reasons.push(format!("unbounded higher homology in simplices {unbounded_higher:?}"));
    }
    if !(epsilon_sep > epsilon_required) {
        reasons.push(format!(
            "separation {epsilon_sep} does not exceed required epsilon {epsilon_required}"
        ));
    }
    let applies = reasons.is_empty();

    let ambient_dim = cloud.dim();
    let multiplier = 2.0 * (nerve_dim as f64 + 1.0);
    let (interleaving_bound, per_dimension_bounds, global_bound) = if applies {
        (
            Some(multiplier * epsilon_required),
            Some(
                (0..=nerve_dim)
                    .map(|n| DimensionBound {
                        hom_dim: n,
                        bound: 2.0 * (n as f64 + 1.0) * epsilon_required,
                    })
                    .collect(),
            ),
            Some(2.0 * (ambient_dim as f64 + 1.0) * epsilon_required),
        )
    } else {
        (None, None, None)
    };

    Ok(SeparationReport {
        pairwise_sep,
        epsilon_sep,
        epsilon_death,
        epsilon_lifespan,
        epsilon_required,
        components_ok,
        applies,
        reasons,
        nerve_dim,
        ambient_dim,
        multiplier,
        interleaving_bound,
        per_dimension_bounds,
        global_bound,
    })
}
