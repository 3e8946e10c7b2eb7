//! CSV ingestion and export. All files are UTF-8, comma-separated, with a
//! header row and `.` decimal separator. Columns are (lat, lon) to match
//! the common human convention; ingestion swaps into the internal
//! (lon, lat) order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluate::Landmark;
use crate::geom::GeoPoint;

use super::{BrandNames, ClassLabel, IncomeDataset, IncomeRecord, LabeledPoint, StoreDataset};

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    if !path.exists() {
        return Err(Error::MissingFile { path: path.to_path_buf() });
    }
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRow { line: 1, msg: e.to_string() })?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::MalformedRow {
            line: 1,
            msg: format!("expected header {:?}, got {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::MalformedRow { line, msg: format!("cannot parse {name} from {field:?}") })
}

/// Load labeled store locations. Header `brand,lat,lon`; every row's brand
/// must equal one of the two given names. Exact duplicate rows collapse to
/// one; row order is otherwise preserved.
pub fn load_store_csv(path: &Path, north_brand: &str, south_brand: &str) -> Result<StoreDataset> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, &["brand", "lat", "lon"])?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| Error::MalformedRow { line, msg: e.to_string() })?;
        if record.len() != 3 {
            return Err(Error::MalformedRow { line, msg: format!("expected 3 fields, got {}", record.len()) });
        }
        let brand = record[0].trim();
        let label = if brand == north_brand {
            ClassLabel::North
        } else if brand == south_brand {
            ClassLabel::South
        } else {
            return Err(Error::UnknownBrand { line, brand: brand.to_string() });
        };
        let lat = parse_f64(&record[1], line, "lat")?;
        let lon = parse_f64(&record[2], line, "lon")?;
        points.push(LabeledPoint { point: GeoPoint::new(lon, lat)?, label });
    }
    let names = BrandNames { north: north_brand.to_string(), south: south_brand.to_string() };
    StoreDataset::new(points, names)?.deduped()
}

/// Write a dataset back out in the `brand,lat,lon` ingestion format.
pub fn write_store_csv(dataset: &StoreDataset, path: &Path) -> Result<()> {
    let mut out = String::from("brand,lat,lon\n");
    for p in dataset.points() {
        let brand = match p.label {
            ClassLabel::North => &dataset.brand_names().north,
            ClassLabel::South => &dataset.brand_names().south,
        };
        out.push_str(&format!("{brand},{},{}\n", p.point.lat, p.point.lon));
    }
    std::fs::write(path, out).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Load regional income records. Header `region,lat,lon,gdhi`; records in
/// file order; the national mean defaults to the unweighted column mean.
pub fn load_income_csv(path: &Path) -> Result<IncomeDataset> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, &["region", "lat", "lon", "gdhi"])?;
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::MalformedRow { line, msg: e.to_string() })?;
        if record.len() != 4 {
            return Err(Error::MalformedRow { line, msg: format!("expected 4 fields, got {}", record.len()) });
        }
        let region = record[0].trim().to_string();
        let lat = parse_f64(&record[1], line, "lat")?;
        let lon = parse_f64(&record[2], line, "lon")?;
        let gdhi = parse_f64(&record[3], line, "gdhi")?;
        if !gdhi.is_finite() || gdhi <= 0.0 {
            return Err(Error::NonPositiveIncome { line, value: gdhi });
        }
        records.push(IncomeRecord { region, centroid: GeoPoint::new(lon, lat)?, gdhi });
    }
    IncomeDataset::new(records)
}

/// Load named landmarks. Header `name,lat,lon`.
pub fn load_landmarks_csv(path: &Path) -> Result<Vec<Landmark>> {
    let mut reader = open_reader(path)?;
    check_header(&mut reader, &["name", "lat", "lon"])?;
    let mut landmarks = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::MalformedRow { line, msg: e.to_string() })?;
        if record.len() != 3 {
            return Err(Error::MalformedRow { line, msg: format!("expected 3 fields, got {}", record.len()) });
        }
        let lat = parse_f64(&record[1], line, "lat")?;
        let lon = parse_f64(&record[2], line, "lon")?;
        landmarks.push(Landmark { name: record[0].trim().to_string(), point: GeoPoint::new(lon, lat)? });
    }
    Ok(landmarks)
}
