//! Point clouds, the Euclidean metric and the unbiased bounding-box estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite point set in `R^d`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PointCloud {
    /// Builds a cloud, checking that it is nonempty, that every point has the same
    /// dimension `d >= 1` and that all coordinates are finite.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::input("point cloud must contain at least one point"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::input("points must have dimension at least 1"));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::input("point coordinates must be finite"));
            }
        }
        Ok(Self { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Sub-cloud of the given point indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::input("cannot take an empty subset of a point cloud"));
        }
        let points = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::input(format!("point index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points, dim: self.dim })
    }

    /// Column `k` of the cloud.
    pub fn coordinate(&self, k: usize) -> Result<Vec<f64>> {
        if k >= self.dim {
            return Err(Error::input(format!(
                "coordinate {k} out of range for {}-dimensional cloud",
                self.dim
            )));
        }
        Ok(self.points.iter().map(|p| p[k]).collect())
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.points
                .iter()
                .map(|p| p.iter().map(|c| c * factor).collect())
                .collect(),
        )
    }

    /// Full pairwise distance matrix, row-major `n x n`.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = l2(&self.points[i], &self.points[j]);
                out[i * n + j] = d;
                out[j * n + i] = d;
            }
        }
        out
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(l2(&self.points[i], &self.points[j]));
            }
        }
        best
    }
}

#[inline]
pub(crate) fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(l2(a, b))
}

/// Axis-aligned box with per-axis bounds `lower[k] <= upper[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::input("box must have at least one axis"));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a <= b)) {
            return Err(Error::input("box lower bound exceeds upper bound"));
        }
        Ok(Self { lower, upper })
    }

    /// The box `[0, w_0] x ... x [0, w_{d-1}]`.
    pub fn from_widths(widths: &[f64]) -> Result<Self> {
        Self::new(vec![0.0; widths.len()], widths.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (a, b))| a <= x && x <= b)
    }
}

/// Per-axis unbiased estimate of the support `[a, b]` of a uniform sample:
/// `a = (N min - max) / (N - 1)` and `b = (N max - min) / (N - 1)`.
///
/// Requires at least two points. An axis on which all points agree yields a
/// zero-width axis at that value.
pub fn unbiased_bounding_box(cloud: &PointCloud) -> Result<BoundingBox> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::input("unbiased bounding box needs at least two points"));
    }
    let nf = n as f64;
    let mut lower = Vec::with_capacity(cloud.dim());
    let mut upper = Vec::with_capacity(cloud.dim());
    for k in 0..cloud.dim() {
        let (lo, hi) = cloud
            .points()
            .iter()
            .map(|p| p[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if lo == hi {
            lower.push(lo);
            upper.push(hi);
        } else {
            // Clamp guards the containment guarantee against rounding.
            lower.push(((nf * lo - hi) / (nf - 1.0)).min(lo));
            upper.push(((nf * hi - lo) / (nf - 1.0)).max(hi));
        }
    }
    BoundingBox::new(lower, upper)
}
