//! Class-balanced subsampling and train/test splitting with a seeded,
//! reproducible randomness contract shared by both models.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::{ClassLabel, LabeledPoint, StoreDataset};
use crate::rng::{domain, stream};

/// Train/test split parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of each class (when stratified) that goes to training.
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, stratified: bool, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config { msg: format!("train_fraction must be in (0,1), got {train_fraction}") });
        }
        Ok(Self { train_fraction, stratified, seed })
    }
}

/// How many balanced resamples to draw and from which seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub n_resamples: usize,
    pub seed: u64,
}

impl ResamplePlan {
    pub fn new(n_resamples: usize, seed: u64) -> Result<Self> {
        if n_resamples == 0 {
            return Err(Error::Config { msg: "n_resamples must be >= 1".into() });
        }
        Ok(Self { n_resamples, seed })
    }
}

/// A subsample with exactly equal class counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BalancedSample {
    points: Vec<LabeledPoint>,
}

impl BalancedSample {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        let north = points.iter().filter(|p| p.label == ClassLabel::North).count();
        if north * 2 != points.len() || north == 0 {
            return Err(Error::EmptyClass);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Split `n` indices into (train, test), both nonempty, both in ascending
/// order. The train count is `n * fraction` rounded to nearest with ties
/// going to train, then clamped so neither side is empty.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64, stream_index: u64) -> (Vec<usize>, Vec<usize>) {
    assert!(n >= 2, "cannot split fewer than 2 items");
    let raw = (n as f64 * train_fraction + 0.5).floor() as usize;
    let n_train = raw.clamp(1, n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = stream(seed, domain::SPLIT, stream_index);
    indices.shuffle(&mut rng);
    let mut train: Vec<usize> = indices[..n_train].to_vec();
    let mut test: Vec<usize> = indices[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Partition a dataset into train and test. Stratified splitting applies
/// the fraction per class; the partition is deterministic per seed and
/// preserves dataset order within each side.
pub fn split(dataset: &StoreDataset, spec: &SplitSpec) -> Result<(StoreDataset, StoreDataset)> {
    let (train_idx, test_idx) = if spec.stratified {
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for (k, label) in [ClassLabel::North, ClassLabel::South].into_iter().enumerate() {
            let class_idx = dataset.class_indices(label);
            if class_idx.len() < 2 {
                return Err(Error::ClassTooSmall { label: label.as_i8(), count: class_idx.len() });
            }
            let (tr, te) = split_indices(class_idx.len(), spec.train_fraction, spec.seed, k as u64);
            train_idx.extend(tr.into_iter().map(|i| class_idx[i]));
            test_idx.extend(te.into_iter().map(|i| class_idx[i]));
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        (train_idx, test_idx)
    } else {
        split_indices(dataset.len(), spec.train_fraction, spec.seed, 0)
    };
    Ok((dataset.subset(&train_idx), dataset.subset(&test_idx)))
}

/// Draw the `index`-th balanced sample: all minority-class points plus a
/// without-replacement subsample of the majority class of the same size.
/// Randomness depends only on `(plan.seed, index)`, so any call order and
/// any thread count produce the same sample for the same index.
pub fn balanced_sample(dataset: &StoreDataset, index: u64, plan: &ResamplePlan) -> Result<BalancedSample> {
    let north_idx = dataset.class_indices(ClassLabel::North);
    let south_idx = dataset.class_indices(ClassLabel::South);
    if north_idx.is_empty() || south_idx.is_empty() {
        return Err(Error::EmptyClass);
    }
    let (minority, majority) = if north_idx.len() <= south_idx.len() {
        (north_idx, south_idx)
    } else {
        (south_idx, north_idx)
    };
    let mut rng = stream(plan.seed, domain::RESAMPLE, index);
    let chosen = rand::seq::index::sample(&mut rng, majority.len(), minority.len());
    let mut picked: Vec<usize> = minority;
    picked.extend(chosen.into_iter().map(|i| majority[i]));
    picked.sort_unstable();
    let points = picked.into_iter().map(|i| dataset.points()[i]).collect();
    BalancedSample::new(points)
}
