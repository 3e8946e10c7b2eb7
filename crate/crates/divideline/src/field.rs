//! Averaged prediction maps over the evaluation grid: the brand-membership
//! ensemble field and the income regression field, plus min-max scaling.
//!
//! Ensemble members run in parallel, but accumulation into the mean always
//! happens in index order with compensated summation, so field values are
//! bit-identical across thread counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{Grid, IncomeDataset, StoreDataset};
use crate::geom::GeoPoint;
use crate::mlp::{classify_accuracy, init_network, train, NetworkArch, TrainConfig};
use crate::resample::{balanced_sample, split, split_indices, ResamplePlan, SplitSpec};
use crate::rng;
use crate::standardize::fit_standardizer;

/// Members evaluated in flight per accumulation round; bounds ensemble
/// memory while keeping all workers busy.
const CHUNK: usize = 16;

/// Grid of predicted values. Out-of-mask nodes hold NaN; every in-mask
/// value is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Config {
                msg: format!("field has {} values for {} nodes", values.len(), grid.node_count()),
            });
        }
        for (idx, (&v, &m)) in values.iter().zip(grid.mask()).enumerate() {
            if m != v.is_finite() {
                return Err(Error::Config { msg: format!("node {idx}: value/mask mismatch") });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Min and max over present values.
    pub fn min_max(&self) -> Option<(f64, f64)> {
        let mut it = self.values.iter().copied().filter(|v| v.is_finite());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Rebuild a field from `(lon, lat, value)` samples of a uniform grid
    /// (as written by the field CSV dump). Missing nodes become
    /// out-of-mask. Spacing is inferred from the smallest positive gap, so
    /// fully masked rows or columns in the interior are handled.
    pub fn from_samples(samples: &[(f64, f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::Config { msg: "need at least 4 field samples".into() });
        }
        let axis = |vals: Vec<f64>| -> Result<(f64, f64, usize)> {
            let mut v = vals;
            v.sort_by(f64::total_cmp);
            v.dedup();
            let lo = v[0];
            let hi = *v.last().unwrap();
            if !(hi > lo) {
                return Err(Error::Config { msg: "degenerate field axis".into() });
            }
            let step = v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            let n = ((hi - lo) / step).round() as usize + 1;
            Ok((lo, hi, n))
        };
        let (lon_min, lon_max, n_lon) = axis(samples.iter().map(|s| s.0).collect())?;
        let (lat_min, lat_max, n_lat) = axis(samples.iter().map(|s| s.1).collect())?;
        if n_lon < 2 || n_lat < 2 {
            return Err(Error::Config { msg: "field grid needs at least 2x2 nodes".into() });
        }
        let bbox = crate::geom::BoundingBox::new(lon_min, lon_max, lat_min, lat_max)?;
        let lon_step = (lon_max - lon_min) / (n_lon - 1) as f64;
        let lat_step = (lat_max - lat_min) / (n_lat - 1) as f64;
        let mut values = vec![f64::NAN; n_lon * n_lat];
        let mut mask = vec![false; n_lon * n_lat];
        for &(lon, lat, v) in samples {
            let i = ((lon - lon_min) / lon_step).round() as usize;
            let j = ((lat - lat_min) / lat_step).round() as usize;
            if i >= n_lon || j >= n_lat {
                return Err(Error::Config { msg: "field sample off the inferred grid".into() });
            }
            if !v.is_finite() {
                return Err(Error::Config { msg: "field sample value must be finite".into() });
            }
            values[j * n_lon + i] = v;
            mask[j * n_lon + i] = true;
        }
        let grid = Grid::with_mask(bbox, n_lon, n_lat, mask)?;
        Self::new(grid, values)
    }
}

/// Linearly scale values so min maps to 0 and max to 1; returns the scaled
/// values plus the (lo, hi) transform parameters for threshold conversion.
pub fn scale_minmax(values: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.len() < 2 || !(hi > lo) {
        return Err(Error::AllEqual);
    }
    let scaled = values.iter().map(|v| (v - lo) / (hi - lo)).collect();
    Ok((scaled, lo, hi))
}

/// Kahan-compensated per-node accumulator, applied in a fixed order.
struct Accumulator {
    sum: Vec<f64>,
    c: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self { sum: vec![0.0; len], c: vec![0.0; len] }
    }

    fn add(&mut self, values: &[f64]) {
        for (k, &v) in values.iter().enumerate() {
            let y = v - self.c[k];
            let t = self.sum[k] + y;
            self.c[k] = (t - self.sum[k]) - y;
            self.sum[k] = t;
        }
    }

    fn mean(&self, n: usize) -> Vec<f64> {
        self.sum.iter().map(|s| s / n as f64).collect()
    }
}

struct MemberOutput {
    node_values: Vec<f64>,
    test_predictions: Vec<f64>,
    accuracy: f64,
}

/// Outcome of the brand-membership ensemble field.
#[derive(Clone, Debug, Serialize)]
pub struct BrandFieldOutcome {
    #[serde(skip)]
    pub field: ScalarField,
    /// Mean over resamples of each member's test classification accuracy.
    pub mean_resample_accuracy: f64,
    /// Accuracy of the ensemble-mean prediction on the test set.
    pub ensemble_mean_accuracy: f64,
    pub per_resample_accuracy: Vec<f64>,
}

/// Train one regressor per balanced resample of the training set (targets
/// 0 north / 1 south), evaluate each on every in-mask grid node, and
/// average the maps. Accuracy is scored per member on the fixed test set.
pub fn brand_field(
    dataset: &StoreDataset,
    grid: &Grid,
    plan: &ResamplePlan,
    split_spec: &SplitSpec,
    arch: &NetworkArch,
    cfg: &TrainConfig,
) -> Result<BrandFieldOutcome> {
    arch.validate()?;
    cfg.validate()?;
    let (train_set, test_set) = split(dataset, split_spec)?;
    if test_set.is_empty() {
        return Err(Error::TestSetEmpty);
    }
    let std = fit_standardizer(&train_set.coords())?;
    let test01: Vec<(GeoPoint, u8)> =
        test_set.points().iter().map(|p| (p.point, p.label.target01() as u8)).collect();

    let nodes: Vec<(usize, GeoPoint)> = (0..grid.n_lat)
        .flat_map(|j| (0..grid.n_lon).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.mask_at(i, j))
        .map(|(i, j)| (grid.index(i, j), grid.node(i, j)))
        .collect();

    let run_member = |index: u64| -> Result<MemberOutput> {
        let sample = balanced_sample(&train_set, index, plan)?;
        let data: Vec<(GeoPoint, f64)> =
            sample.points().iter().map(|p| (p.point, p.label.target01())).collect();
        let net = init_network(arch, std, (0.0, 1.0), rng::derive(cfg.seed, index))?;
        let net = train(net, &data, cfg)?;
        Ok(MemberOutput {
            node_values: nodes.iter().map(|(_, p)| net.forward(*p)).collect(),
            test_predictions: test01.iter().map(|(p, _)| net.forward(*p)).collect(),
            accuracy: classify_accuracy(&net, &test01),
        })
    };

    let n = plan.n_resamples;
    let mut node_acc = Accumulator::new(nodes.len());
    let mut pred_acc = Accumulator::new(test01.len());
    let mut per_resample_accuracy = Vec::with_capacity(n);
    for base in (0..n).step_by(CHUNK) {
        let hi = (base + CHUNK).min(n);
        let outputs: Vec<Result<MemberOutput>> =
            (base as u64..hi as u64).into_par_iter().map(run_member).collect();
        for output in outputs {
            let output = output?;
            node_acc.add(&output.node_values);
            pred_acc.add(&output.test_predictions);
            per_resample_accuracy.push(output.accuracy);
        }
    }

    let mean_nodes = node_acc.mean(n);
    let mut values = vec![f64::NAN; grid.node_count()];
    for ((idx, _), v) in nodes.iter().zip(&mean_nodes) {
        values[*idx] = *v;
    }
    let field = ScalarField::new(grid.clone(), values)?;

    let mean_resample_accuracy = per_resample_accuracy.iter().sum::<f64>() / n as f64;
    let mean_preds = pred_acc.mean(n);
    let correct = mean_preds
        .iter()
        .zip(&test01)
        .filter(|(pred, (_, label))| u8::from(**pred >= 0.5) == *label)
        .count();
    let ensemble_mean_accuracy = correct as f64 / test01.len() as f64;

    Ok(BrandFieldOutcome { field, mean_resample_accuracy, ensemble_mean_accuracy, per_resample_accuracy })
}

/// Outcome of the income regression field.
#[derive(Clone, Debug, Serialize)]
pub struct GdhiOutcome {
    #[serde(skip)]
    pub field: ScalarField,
    /// The national mean mapped through the min-max transform: the
    /// contour level in scaled units.
    pub level: f64,
    /// Mean over seeds of 1 - mean |prediction - target| on scaled test
    /// targets. This is the score used for headline comparisons.
    pub mean_abs_score: f64,
    /// Mean over seeds of the coefficient of determination on the test
    /// records, reported alongside.
    pub mean_r_squared: f64,
    pub per_seed_abs_score: Vec<f64>,
    /// Min-max transform parameters (GBP).
    pub lo: f64,
    pub hi: f64,
}

/// Fit the income field: scale gdhi to [0, 1], hold out a test fraction,
/// train one regressor per seed on the training records (no balancing;
/// this is plain regression), and average the prediction maps. The
/// returned level is the scaled national mean.
pub fn gdhi_field(
    income: &IncomeDataset,
    grid: &Grid,
    arch: &NetworkArch,
    cfg: &TrainConfig,
    split_spec: &SplitSpec,
    n_seeds: usize,
) -> Result<GdhiOutcome> {
    arch.validate()?;
    cfg.validate()?;
    if n_seeds == 0 {
        return Err(Error::Config { msg: "seed ensemble must be >= 1".into() });
    }
    if income.len() < 2 {
        return Err(Error::TestSetEmpty);
    }
    let gdhi: Vec<f64> = income.records().iter().map(|r| r.gdhi).collect();
    let (scaled, lo, hi) = scale_minmax(&gdhi)?;
    let level = (income.national_mean() - lo) / (hi - lo);

    let (train_idx, test_idx) = split_indices(income.len(), split_spec.train_fraction, split_spec.seed, 0);
    if test_idx.is_empty() {
        return Err(Error::TestSetEmpty);
    }
    let train_data: Vec<(GeoPoint, f64)> =
        train_idx.iter().map(|&k| (income.records()[k].centroid, scaled[k])).collect();
    let test_data: Vec<(GeoPoint, f64)> =
        test_idx.iter().map(|&k| (income.records()[k].centroid, scaled[k])).collect();
    let std = fit_standardizer(&train_data.iter().map(|(p, _)| *p).collect::<Vec<_>>())?;

    let nodes: Vec<(usize, GeoPoint)> = (0..grid.n_lat)
        .flat_map(|j| (0..grid.n_lon).map(move |i| (i, j)))
        .filter(|&(i, j)| grid.mask_at(i, j))
        .map(|(i, j)| (grid.index(i, j), grid.node(i, j)))
        .collect();

    let run_member = |seed_index: u64| -> Result<(Vec<f64>, f64, f64)> {
        let net = init_network(arch, std, (0.0, 1.0), rng::derive(cfg.seed, seed_index))?;
        let net = train(net, &train_data, cfg)?;
        let preds: Vec<f64> = test_data.iter().map(|(p, _)| net.forward(*p)).collect();
        let abs_score =
            1.0 - preds.iter().zip(&test_data).map(|(y, (_, t))| (y - t).abs()).sum::<f64>() / preds.len() as f64;
        let mean_t = test_data.iter().map(|(_, t)| t).sum::<f64>() / test_data.len() as f64;
        let ss_tot: f64 = test_data.iter().map(|(_, t)| (t - mean_t).powi(2)).sum();
        let ss_res: f64 = preds.iter().zip(&test_data).map(|(y, (_, t))| (y - t).powi(2)).sum();
        let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN };
        Ok((nodes.iter().map(|(_, p)| net.forward(*p)).collect(), abs_score, r2))
    };

    let mut node_acc = Accumulator::new(nodes.len());
    let mut per_seed_abs_score = Vec::with_capacity(n_seeds);
    let mut r2_sum = 0.0;
    for base in (0..n_seeds).step_by(CHUNK) {
        let top = (base + CHUNK).min(n_seeds);
        let outputs: Vec<Result<(Vec<f64>, f64, f64)>> =
            (base as u64..top as u64).into_par_iter().map(run_member).collect();
        for output in outputs {
            let (vals, abs_score, r2) = output?;
            node_acc.add(&vals);
            per_seed_abs_score.push(abs_score);
            r2_sum += r2;
        }
    }

    let mean_nodes = node_acc.mean(n_seeds);
    let mut values = vec![f64::NAN; grid.node_count()];
    for ((idx, _), v) in nodes.iter().zip(&mean_nodes) {
        values[*idx] = *v;
    }
    let field = ScalarField::new(grid.clone(), values)?;
    let mean_abs_score = per_seed_abs_score.iter().sum::<f64>() / n_seeds as f64;

    Ok(GdhiOutcome {
        field,
        level,
        mean_abs_score,
        mean_r_squared: r2_sum / n_seeds as f64,
        per_seed_abs_score,
        lo,
        hi,
    })
}
