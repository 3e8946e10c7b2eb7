//! # divideline
//!
//! Computes a geographic dividing line between two labeled point
//! populations, plus a threshold contour of a regression-predicted scalar
//! field (regional income), over an England-shaped grid.
//!
//! Two models produce dividing lines:
//!
//! - a class-balanced ensemble of soft-margin linear SVMs, averaged into a
//!   single hyperplane and clipped to the map ([`svm`]);
//! - an ensemble of small feedforward regressors evaluated over a grid,
//!   with the 0.5 level set of the mean map extracted by marching squares
//!   ([`mlp`], [`field`], [`contour`]).
//!
//! Everything is seeded and deterministic: identical inputs and
//! configuration produce byte-identical outputs, independent of thread
//! count. The `divideline` binary wires the pipelines behind subcommands
//! (`synth`, `svm`, `ann`, `gdhi`, `compare`, `render`).

pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod evaluate;
pub mod field;
pub mod geodata;
pub mod geom;
pub mod mlp;
pub mod render;
pub mod resample;
pub mod rng;
pub mod standardize;
pub mod svm;

pub use error::{Error, Result};
pub use geom::{BoundingBox, GeoPoint, Polyline, ENGLAND_BBOX};
