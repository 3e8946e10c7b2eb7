use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type. Each variant corresponds to a distinct failure
/// class surfaced by the public API.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {path}")]
    MissingFile { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row at line {line}: {msg}")]
    MalformedRow { line: usize, msg: String },

    #[error("unknown brand {brand:?} at line {line}")]
    UnknownBrand { line: usize, brand: String },

    #[error("coordinate out of range: lon={lon}, lat={lat}")]
    CoordinateOutOfRange { lon: f64, lat: f64 },

    #[error("dataset needs at least 2 points per class (north={north}, south={south})")]
    FewerThanTwoPerClass { north: usize, south: usize },

    #[error("non-positive income {value} at line {line}")]
    NonPositiveIncome { line: usize, value: f64 },

    #[error("duplicate region name {name:?}")]
    DuplicateRegion { name: String },

    #[error("contour threshold {mean} outside income range [{min}, {max}]")]
    ThresholdOutsideRange { mean: f64, min: f64, max: f64 },

    #[error("GeoJSON geometry is not a Polygon or MultiPolygon")]
    NotAPolygon,

    #[error("degenerate ring with {vertices} vertices after closure")]
    DegenerateRing { vertices: usize },

    #[error("malformed GeoJSON: {msg}")]
    Geojson { msg: String },

    #[error("degenerate grid: {msg}")]
    DegenerateBbox { msg: String },

    #[error("class {label} has only {count} points, need at least 2 for a stratified split")]
    ClassTooSmall { label: i8, count: usize },

    #[error("dataset has an empty class, cannot balance")]
    EmptyClass,

    #[error("zero variance on axis {axis}, cannot standardize")]
    ZeroVariance { axis: usize },

    #[error("cannot average an empty hyperplane ensemble")]
    EmptyEnsemble,

    #[error("hyperplane normals cancel (|mean w| = {norm:.3e}), averaging is degenerate")]
    CancellationDegenerate { norm: f64 },

    #[error("dividing line does not intersect the bounding box")]
    NoIntersection,

    #[error("training diverged at epoch {epoch} (loss became non-finite)")]
    DivergenceDetected { epoch: usize },

    #[error("all values are equal, min-max scaling is undefined")]
    AllEqual,

    #[error("test set is empty after the train/test split")]
    TestSetEmpty,

    #[error("no grid cell straddles the contour level")]
    NoCrossing,

    #[error("scene has no layers to render")]
    EmptyScene,

    #[error("invalid configuration: {msg}")]
    Config { msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
