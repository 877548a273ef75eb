//! Scalar diagram invariants and the per-simplex invariant table.
//!
//! Invariants use reduced homology: infinite bars never contribute. A dimension
//! without finite bars yields `None`, which downstream statistics drop instead of
//! treating as zero.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    /// Longest finite bar, `max(d - b)`.
    MaxDiff,
    /// Largest finite `d / b`; undefined in dimension 0.
    MaxRatio,
}

impl InvariantKind {
    pub fn name(self) -> &'static str {
        match self {
            InvariantKind::MaxDiff => "max_diff",
            InvariantKind::MaxRatio => "max_ratio",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "max_diff" => Ok(InvariantKind::MaxDiff),
            "max_ratio" => Ok(InvariantKind::MaxRatio),
            other => Err(Error::input(format!("unknown invariant kind {other:?}"))),
        }
    }

    pub fn evaluate(self, diagram: &PersistenceDiagram, hom_dim: usize) -> InvariantValue {
        match self {
            InvariantKind::MaxDiff => max_difference(diagram, hom_dim),
            InvariantKind::MaxRatio => max_ratio(diagram, hom_dim),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantValue {
    pub hom_dim: usize,
    pub kind: InvariantKind,
    pub value: Option<f64>,
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

pub fn max_difference(diagram: &PersistenceDiagram, hom_dim: usize) -> InvariantValue {
    let value = max_of(diagram.finite_bars(hom_dim).filter_map(|b| b.lifespan()));
    InvariantValue {
        hom_dim,
        kind: InvariantKind::MaxDiff,
        value,
    }
}

pub fn max_ratio(diagram: &PersistenceDiagram, hom_dim: usize) -> InvariantValue {
    let value = if hom_dim == 0 {
        log::debug!("ratio invariant undefined in dimension 0");
        None
    } else {
        max_of(
            diagram
                .finite_bars(hom_dim)
                .filter(|b| b.birth > 0.0)
                .filter_map(|b| b.death.map(|d| d / b.birth)),
        )
    };
    InvariantValue {
        hom_dim,
        kind: InvariantKind::MaxRatio,
        value,
    }
}

/// Natural logarithm; nonpositive input gives `None`.
pub fn log_transform(value: Option<f64>) -> Option<f64> {
    match value {
        Some(v) if v > 0.0 => Some(v.ln()),
        Some(v) => {
            log::warn!("cannot take the logarithm of {v}; value dropped");
            None
        }
        None => None,
    }
}

/// Invariant value of one (simplex, dimension) pair for the data and its simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantRow {
    pub simplex: usize,
    pub hom_dim: usize,
    pub data: Option<f64>,
    pub sims: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantTable {
    pub kind: InvariantKind,
    rows: Vec<InvariantRow>,
    n_sims: usize,
}

impl InvariantTable {
    pub fn new(kind: InvariantKind, rows: Vec<InvariantRow>) -> Result<Self> {
        let n_sims = rows.first().map_or(0, |r| r.sims.len());
        if let Some(r) = rows.iter().find(|r| r.sims.len() != n_sims) {
            return Err(Error::input(format!(
                "row (simplex {}, dim {}) has {} simulations, expected {n_sims}",
                r.simplex,
                r.hom_dim,
                r.sims.len()
            )));
        }
        Ok(Self { kind, rows, n_sims })
    }

    pub fn rows(&self) -> &[InvariantRow] {
        &self.rows
    }

    pub fn n_sims(&self) -> usize {
        self.n_sims
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Long-format CSV: `simplex,hom_dim,source,value` with an empty value for `None`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["simplex", "hom_dim", "source", "value"])?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let (s, d) = (r.simplex.to_string(), r.hom_dim.to_string());
            w.write_record([s.as_str(), d.as_str(), "data", fmt(r.data).as_str()])?;
            for (j, v) in r.sims.iter().enumerate() {
                w.write_record([
                    s.as_str(),
                    d.as_str(),
                    format!("sim_{}", j + 1).as_str(),
                    fmt(*v).as_str(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
