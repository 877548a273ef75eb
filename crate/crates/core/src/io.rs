//! Point-cloud ingestion (CSV, JSON) and small export helpers.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Parses CSV with one point per row. A header row is detected when the first
/// row does not parse as numbers.
pub fn parse_csv(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(p) => points.push(p),
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Error::input(format!("row {}: non-numeric field ({e})", row + 1))),
        }
    }
    PointCloud::new(points)
}

/// Parses a JSON array of coordinate arrays.
pub fn parse_json(text: &str) -> Result<PointCloud> {
    let points: Vec<Vec<f64>> = serde_json::from_str(text)?;
    PointCloud::new(points)
}

/// Loads a point cloud, picking the format from the extension (`.json` is JSON,
/// everything else CSV).
pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<(PointCloud, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let is_json = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("json"))
        .unwrap_or(false);
    let cloud = if is_json { parse_json(&text)? } else { parse_csv(&text)? };
    Ok((cloud, bytes))
}

/// Reads one real value per line (for custom filters).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<f64>()
                .map_err(|e| Error::input(format!("bad filter value {l:?}: {e}")))
        })
        .collect()
}
