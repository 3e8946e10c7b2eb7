//! Synthetic two-brand fixture generator: two isotropic Gaussian clusters
//! displaced along latitude.

use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::geom::GeoPoint;
use crate::rng::{domain, stream};

use super::{BrandNames, ClassLabel, LabeledPoint, StoreDataset};

/// Cluster-pair midpoint used by the generator.
pub const SYNTH_CENTER_LON: f64 = -1.5;
pub const SYNTH_CENTER_LAT: f64 = 52.5;

/// Generate `n_north` +1 points around (center, lat + separation/2) and
/// `n_south` -1 points around (center, lat - separation/2), with isotropic
/// Gaussian noise of standard deviation `noise_sd` degrees. Deterministic
/// per seed; north points first, then south, in draw order.
pub fn synth_two_brand(
    n_north: usize,
    n_south: usize,
    separation: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<StoreDataset> {
    assert!(n_north >= 2 && n_south >= 2, "need at least 2 points per class");
    assert!(noise_sd >= 0.0 && noise_sd.is_finite(), "noise_sd must be >= 0");
    // Normal::new only fails on non-finite or negative sd
    let noise = Normal::new(0.0, noise_sd.max(f64::MIN_POSITIVE)).expect("valid normal");
    let mut rng = stream(seed, domain::SYNTH, 0);

    let mut points = Vec::with_capacity(n_north + n_south);
    let push_cluster = |n: usize, lat_center: f64, label: ClassLabel, rng: &mut rand_chacha::ChaCha8Rng, points: &mut Vec<LabeledPoint>| {
        for _ in 0..n {
            let dlon = if noise_sd == 0.0 { 0.0 } else { noise.sample(rng) };
            let dlat = if noise_sd == 0.0 { 0.0 } else { noise.sample(rng) };
            let lon = (SYNTH_CENTER_LON + dlon).clamp(-180.0, 180.0);
            let lat = (lat_center + dlat).clamp(-90.0, 90.0);
            points.push(LabeledPoint { point: GeoPoint { lon, lat }, label });
        }
    };
    push_cluster(n_north, SYNTH_CENTER_LAT + separation / 2.0, ClassLabel::North, &mut rng, &mut points);
    push_cluster(n_south, SYNTH_CENTER_LAT - separation / 2.0, ClassLabel::South, &mut rng, &mut points);

    StoreDataset::new(points, BrandNames { north: "Greggs".into(), south: "Pret".into() })
}
