//! Bundled reference data.

use crate::geometry::PointCloud;
use crate::io::parse_csv;

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Column index of petal length in [`iris`].
pub const IRIS_PETAL_LENGTH: usize = 2;

/// Fisher's Iris measurements: 150 points in R^4, columns
/// sepal length, sepal width, petal length, petal width (cm).
pub fn iris() -> PointCloud {
    parse_csv(IRIS_CSV).expect("bundled iris data parses")
}

pub fn iris_csv() -> &'static str {
    IRIS_CSV
}
