//! Soft-margin linear SVM on standardized coordinates, ensemble averaging
//! of resample-trained hyperplanes, and conversion of the averaged
//! hyperplane into a geographic dividing line.

mod smo;

pub use smo::train_svm;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::svm_accuracy;
use crate::geodata::{Grid, StoreDataset};
use crate::geom::{GeoPoint, Polyline};
use crate::resample::{balanced_sample, split, ResamplePlan, SplitSpec};
use crate::standardize::{fit_standardizer, Standardizer};

/// Solver parameters. The paper's toolbox defaults are unstated, so the
/// box penalty, KKT tolerance, and pass budget are explicit knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Box penalty (soft-margin constant), > 0.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Outer-loop pass budget before giving up.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-4, max_passes: 1000 }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.tol > 0.0) || self.max_passes == 0 {
            return Err(Error::Config { msg: format!("invalid SVM config: {self:?}") });
        }
        Ok(())
    }
}

/// A normalized linear decision boundary in standardized feature space,
/// together with the standardization it lives in. The decision value is
/// `f(x) = w . standardize(x) + b`, and `f > 0` means class +1 (North).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: [f64; 2],
    pub b: f64,
    pub standardizer: Standardizer,
}

impl Hyperplane {
    /// Construct, enforcing the unit-norm invariant on `w`.
    pub fn new(w: [f64; 2], b: f64, standardizer: Standardizer) -> Result<Self> {
        let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
        if (norm - 1.0).abs() > 1e-9 || !b.is_finite() {
            return Err(Error::Config { msg: format!("hyperplane normal must be unit length, |w| = {norm}") });
        }
        Ok(Self { w, b, standardizer })
    }

    pub fn decision(&self, p: GeoPoint) -> f64 {
        let x = self.standardizer.standardize(p);
        self.w[0] * x[0] + self.w[1] * x[1] + self.b
    }
}

/// A solved SVM: the hyperplane plus solver diagnostics. `converged:
/// false` means the pass budget ran out and the best iterate is returned.
#[derive(Clone, Debug)]
pub struct SvmSolution {
    pub hyperplane: Hyperplane,
    pub converged: bool,
    pub passes: usize,
}

/// Average an ensemble of hyperplanes sharing one standardizer: each unit
/// normal is sign-aligned to the first, the normals are averaged and
/// renormalized, and the intercept is the mean of the aligned intercepts.
pub fn average_hyperplane(planes: &[Hyperplane]) -> Result<Hyperplane> {
    let first = planes.first().ok_or(Error::EmptyEnsemble)?;
    debug_assert!(
        planes.iter().all(|p| p.standardizer == first.standardizer),
        "ensemble members must share a standardizer"
    );
    let mut w_sum = [0.0f64; 2];
    let mut b_sum = 0.0f64;
    for p in planes {
        let aligned = p.w[0] * first.w[0] + p.w[1] * first.w[1] >= 0.0;
        let sign = if aligned { 1.0 } else { -1.0 };
        w_sum[0] += sign * p.w[0];
        w_sum[1] += sign * p.w[1];
        b_sum += sign * p.b;
    }
    let n = planes.len() as f64;
    let mean_w = [w_sum[0] / n, w_sum[1] / n];
    let norm = (mean_w[0] * mean_w[0] + mean_w[1] * mean_w[1]).sqrt();
    if norm < 1e-6 {
        return Err(Error::CancellationDegenerate { norm });
    }
    Hyperplane::new([mean_w[0] / norm, mean_w[1] / norm], b_sum / n, first.standardizer)
}

/// Result of the full resample-train-average pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct SvmPipelineOutcome {
    /// The averaged hyperplane defining the dividing line.
    pub hyperplane: Hyperplane,
    /// Mean over resamples of each member's own test accuracy. This is
    /// the headline "average accuracy" figure.
    pub mean_resample_accuracy: f64,
    /// Test accuracy of the averaged hyperplane itself, reported
    /// alongside because the two readings can differ.
    pub averaged_model_accuracy: f64,
    pub per_resample_accuracy: Vec<f64>,
    /// How many members hit the pass budget without converging.
    pub nonconverged: usize,
}

/// Split once, train one SVM per balanced resample of the training set,
/// average the hyperplanes, and score on the fixed held-out test set.
/// Resamples run in parallel; the outcome is independent of thread count
/// because per-index randomness and the averaging order are fixed.
pub fn svm_pipeline(
    dataset: &StoreDataset,
    plan: &ResamplePlan,
    split_spec: &SplitSpec,
    cfg: &SvmConfig,
) -> Result<SvmPipelineOutcome> {
    let (train, test) = split(dataset, split_spec)?;
    if test.is_empty() {
        return Err(Error::TestSetEmpty);
    }
    let std = fit_standardizer(&train.coords())?;

    let members: Vec<Result<(Hyperplane, bool, f64)>> = (0..plan.n_resamples as u64)
        .into_par_iter()
        .map(|index| {
            let sample = balanced_sample(&train, index, plan)?;
            let sol = train_svm(&sample, &std, cfg)?;
            let acc = svm_accuracy(&sol.hyperplane, &test);
            Ok((sol.hyperplane, sol.converged, acc))
        })
        .collect();

    let mut planes = Vec::with_capacity(members.len());
    let mut per_resample_accuracy = Vec::with_capacity(members.len());
    let mut nonconverged = 0usize;
    for member in members {
        let (plane, converged, acc) = member?;
        planes.push(plane);
        per_resample_accuracy.push(acc);
        nonconverged += usize::from(!converged);
    }

    let hyperplane = average_hyperplane(&planes)?;
    let mean_resample_accuracy = per_resample_accuracy.iter().sum::<f64>() / per_resample_accuracy.len() as f64;
    let averaged_model_accuracy = svm_accuracy(&hyperplane, &test);

    Ok(SvmPipelineOutcome {
        hyperplane,
        mean_resample_accuracy,
        averaged_model_accuracy,
        per_resample_accuracy,
        nonconverged,
    })
}

/// Map the zero level set of a hyperplane back to (lon, lat) and clip it
/// to the grid's bounding box, yielding a straight segment whose two
/// endpoints lie on the box border.
pub fn hyperplane_to_polyline(h: &Hyperplane, grid: &Grid) -> Result<Polyline> {
    let bbox = grid.bbox;
    let std = &h.standardizer;
    // f(lon, lat) = a*lon + b*lat + d in geographic coordinates
    let a = h.w[0] / std.sd[0];
    let b = h.w[1] / std.sd[1];
    let d = h.b - h.w[0] * std.mean[0] / std.sd[0] - h.w[1] * std.mean[1] / std.sd[1];

    // point on the line nearest the bbox center, direction along the line
    let cx = 0.5 * (bbox.lon_min + bbox.lon_max);
    let cy = 0.5 * (bbox.lat_min + bbox.lat_max);
    let n2 = a * a + b * b;
    let fc = (a * cx + b * cy + d) / n2;
    let p0 = (cx - a * fc, cy - b * fc);
    let dir = (-b, a);

    // Liang-Barsky slab clipping of the infinite line against the bbox
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (p, v, lo, hi) in [
        (p0.0, dir.0, bbox.lon_min, bbox.lon_max),
        (p0.1, dir.1, bbox.lat_min, bbox.lat_max),
    ] {
        if v.abs() < 1e-300 {
            if p < lo || p > hi {
                return Err(Error::NoIntersection);
            }
        } else {
            let (t1, t2) = ((lo - p) / v, (hi - p) / v);
            t_lo = t_lo.max(t1.min(t2));
            t_hi = t_hi.min(t1.max(t2));
        }
    }
    if !(t_lo < t_hi) {
        return Err(Error::NoIntersection);
    }

    let snap = |v: f64, lo: f64, hi: f64| {
        let eps = 1e-9 * (hi - lo);
        if (v - lo).abs() < eps {
            lo
        } else if (v - hi).abs() < eps {
            hi
        } else {
            v
        }
    };
    let endpoint = |t: f64| GeoPoint {
        lon: snap(p0.0 + t * dir.0, bbox.lon_min, bbox.lon_max),
        lat: snap(p0.1 + t * dir.1, bbox.lat_min, bbox.lat_max),
    };
    Polyline::new(vec![endpoint(t_lo), endpoint(t_hi)]).map_err(|_| Error::NoIntersection)
}
