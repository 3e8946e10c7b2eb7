//! Per-axis z-score standardization of coordinates. Longitude and latitude
//! spans differ, and both the hinge-loss solver and gradient descent are
//! scale-sensitive, so features are conditioned before training and the
//! transform is stored with every model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::GeoPoint;

/// Feature standardization record: per-axis mean and population standard
/// deviation, (lon, lat) order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

impl Standardizer {
    /// Identity transform, for tests and hand-built models.
    pub fn identity() -> Self {
        Self { mean: [0.0, 0.0], sd: [1.0, 1.0] }
    }

    pub fn standardize(&self, p: GeoPoint) -> [f64; 2] {
        [(p.lon - self.mean[0]) / self.sd[0], (p.lat - self.mean[1]) / self.sd[1]]
    }
}

/// Fit per-axis mean and population standard deviation with the two-pass
/// formula.
pub fn fit_standardizer(points: &[GeoPoint]) -> Result<Standardizer> {
    if points.len() < 2 {
        return Err(Error::ZeroVariance { axis: 0 });
    }
    let n = points.len() as f64;
    let mut mean = [0.0; 2];
    for p in points {
        mean[0] += p.lon;
        mean[1] += p.lat;
    }
    mean[0] /= n;
    mean[1] /= n;
    let mut var = [0.0; 2];
    for p in points {
        var[0] += (p.lon - mean[0]).powi(2);
        var[1] += (p.lat - mean[1]).powi(2);
    }
    var[0] /= n;
    var[1] /= n;
    let sd = [var[0].sqrt(), var[1].sqrt()];
    for (axis, s) in sd.iter().enumerate() {
        if !(*s > 0.0 && s.is_finite()) {
            return Err(Error::ZeroVariance { axis });
        }
    }
    Ok(Standardizer { mean, sd })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_case() {
        let pts = vec![GeoPoint { lon: 0.0, lat: 0.0 }, GeoPoint { lon: 2.0, lat: 2.0 }];
        let s = fit_standardizer(&pts).unwrap();
        assert_eq!(s.mean, [1.0, 1.0]);
        assert_eq!(s.sd, [1.0, 1.0]);
    }

    #[test]
    fn identical_points_rejected() {
        let pts = vec![GeoPoint { lon: 1.0, lat: 2.0 }; 5];
        assert!(matches!(fit_standardizer(&pts), Err(Error::ZeroVariance { .. })));
    }

    #[test]
    fn zero_variance_on_one_axis_rejected() {
        let pts = vec![
            GeoPoint { lon: 1.0, lat: 0.0 },
            GeoPoint { lon: 1.0, lat: 1.0 },
            GeoPoint { lon: 1.0, lat: 2.0 },
        ];
        assert!(matches!(fit_standardizer(&pts), Err(Error::ZeroVariance { axis: 0 })));
    }

    #[test]
    fn matches_independent_two_pass_oracle() {
        use rand::Rng;
        let mut rng = crate::rng::stream(11, 99, 0);
        let pts: Vec<GeoPoint> = (0..1000)
            .map(|_| GeoPoint { lon: rng.random_range(-6.0..2.0), lat: rng.random_range(49.0..56.0) })
            .collect();
        let s = fit_standardizer(&pts).unwrap();

        // oracle: sort values first so the summation order differs from the
        // implementation, then two-pass mean/variance
        let oracle = |values: Vec<f64>| {
            let mut v = values;
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        let (mlon, sdlon) = oracle(pts.iter().map(|p| p.lon).collect());
        let (mlat, sdlat) = oracle(pts.iter().map(|p| p.lat).collect());
        assert!((s.mean[0] - mlon).abs() < 1e-12);
        assert!((s.mean[1] - mlat).abs() < 1e-12);
        assert!((s.sd[0] - sdlon).abs() < 1e-12);
        assert!((s.sd[1] - sdlat).abs() < 1e-12);
    }
}
