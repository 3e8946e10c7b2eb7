//! Ingestion, validation, and synthesis of all geospatial inputs:
//! labeled store points, regional income records, landmass boundary
//! polygons, reference lines, and evaluation grids.

mod csv_io;
mod geojson;
mod grid;
mod mask;
mod synth;

pub use csv_io::{load_income_csv, load_landmarks_csv, load_store_csv, write_store_csv};
pub use geojson::{
    load_boundary, load_lines, load_reference_line, polylines_to_geojson, write_polylines_geojson, PolylineFeature,
};
pub use grid::{make_grid, Grid};
pub use mask::{point_in_mask, LandmassMask};
pub use synth::{synth_two_brand, SYNTH_CENTER_LAT, SYNTH_CENTER_LON};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{GeoPoint, Polyline};

/// Binary class label: +1 is the North brand, -1 the South brand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    North,
    South,
}

impl ClassLabel {
    /// Signed value used by the SVM (+1 / -1).
    pub fn sign(self) -> f64 {
        match self {
            ClassLabel::North => 1.0,
            ClassLabel::South => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            ClassLabel::North => 1,
            ClassLabel::South => -1,
        }
    }

    /// Regression target: 0 for the North brand, 1 for the South brand.
    pub fn target01(self) -> f64 {
        match self {
            ClassLabel::North => 0.0,
            ClassLabel::South => 1.0,
        }
    }
}

/// A coordinate carrying a class label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub point: GeoPoint,
    pub label: ClassLabel,
}

/// The two brand names mapped to the +1 / -1 classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrandNames {
    pub north: String,
    pub south: String,
}

/// Labeled store locations for the two brands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoreDataset {
    points: Vec<LabeledPoint>,
    brand_names: BrandNames,
}

impl StoreDataset {
    /// Build a dataset, requiring at least 2 points per class. Exact
    /// duplicate removal is an ingestion-time rule, see [`Self::deduped`].
    pub fn new(points: Vec<LabeledPoint>, brand_names: BrandNames) -> Result<Self> {
        let north = points.iter().filter(|p| p.label == ClassLabel::North).count();
        let south = points.len() - north;
        if north < 2 || south < 2 {
            return Err(Error::FewerThanTwoPerClass { north, south });
        }
        Ok(Self { points, brand_names })
    }

    /// Remove exact `(lon, lat, label)` duplicates, keeping first
    /// occurrences in order. Near-duplicates are kept: two stores can
    /// legitimately share a postcode-level coordinate.
    pub fn deduped(self) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let points: Vec<LabeledPoint> = self
            .points
            .into_iter()
            .filter(|p| seen.insert((p.point.bits(), p.label)))
            .collect();
        Self::new(points, self.brand_names)
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn brand_names(&self) -> &BrandNames {
        &self.brand_names
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.points.iter().filter(|p| p.label == label).count()
    }

    /// Indices of the points carrying `label`, in dataset order.
    pub fn class_indices(&self, label: ClassLabel) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.label == label)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn coords(&self) -> Vec<GeoPoint> {
        self.points.iter().map(|p| p.point).collect()
    }

    /// Sub-dataset at the given indices (dataset order preserved by the
    /// caller passing sorted indices). Skips the two-per-class check so
    /// that splits of small datasets remain representable.
    pub(crate) fn subset(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            brand_names: self.brand_names.clone(),
        }
    }
}

/// One income record: a region reduced to its centroid coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncomeRecord {
    pub region: String,
    pub centroid: GeoPoint,
    /// GBP per head per year, strictly positive.
    pub gdhi: f64,
}

/// Regional income records plus the national mean used as the contour
/// threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncomeDataset {
    records: Vec<IncomeRecord>,
    national_mean: f64,
}

impl IncomeDataset {
    /// Build a dataset; `national_mean` defaults to the unweighted mean of
    /// the gdhi column.
    pub fn new(records: Vec<IncomeRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Config { msg: "income dataset is empty".into() });
        }
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if !r.gdhi.is_finite() || r.gdhi <= 0.0 {
                return Err(Error::NonPositiveIncome { line: 0, value: r.gdhi });
            }
            if !seen.insert(r.region.clone()) {
                return Err(Error::DuplicateRegion { name: r.region.clone() });
            }
        }
        let national_mean = records.iter().map(|r| r.gdhi).sum::<f64>() / records.len() as f64;
        Ok(Self { records, national_mean })
    }

    /// Override the national mean (config key). It must stay inside the
    /// observed gdhi range so the scaled contour threshold is attainable.
    pub fn with_national_mean(mut self, mean: f64) -> Result<Self> {
        let min = self.records.iter().map(|r| r.gdhi).fold(f64::INFINITY, f64::min);
        let max = self.records.iter().map(|r| r.gdhi).fold(f64::NEG_INFINITY, f64::max);
        if !mean.is_finite() || mean < min || mean > max {
            return Err(Error::ThresholdOutsideRange { mean, min, max });
        }
        self.national_mean = mean;
        Ok(self)
    }

    pub fn records(&self) -> &[IncomeRecord] {
        &self.records
    }

    pub fn national_mean(&self) -> f64 {
        self.national_mean
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// A named reference line (e.g. an externally published divide) for
/// discrepancy comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub name: String,
    pub polyline: Polyline,
}
