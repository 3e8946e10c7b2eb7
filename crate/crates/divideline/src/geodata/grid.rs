//! Uniform evaluation grid over a bounding box, with a landmass mask bit
//! per node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BoundingBox, GeoPoint};

use super::{point_in_mask, LandmassMask};

/// A uniform grid of `n_lon x n_lat` nodes spanning `bbox`. Node (0, 0) is
/// the (lon_min, lat_min) corner, node (n_lon-1, n_lat-1) the
/// (lon_max, lat_max) corner, both exactly. Values indexed `j * n_lon + i`
/// (i along longitude, j along latitude).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub bbox: BoundingBox,
    pub n_lon: usize,
    pub n_lat: usize,
    mask: Vec<bool>,
}

impl Grid {
    pub fn node_count(&self) -> usize {
        self.n_lon * self.n_lat
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_lon && j < self.n_lat);
        j * self.n_lon + i
    }

    /// Node coordinate by linear interpolation of the bbox corners. The
    /// `a*(1-t) + b*t` form reproduces the corners exactly.
    pub fn node(&self, i: usize, j: usize) -> GeoPoint {
        let ti = i as f64 / (self.n_lon - 1) as f64;
        let tj = j as f64 / (self.n_lat - 1) as f64;
        GeoPoint {
            lon: self.bbox.lon_min * (1.0 - ti) + self.bbox.lon_max * ti,
            lat: self.bbox.lat_min * (1.0 - tj) + self.bbox.lat_max * tj,
        }
    }

    pub fn mask_at(&self, i: usize, j: usize) -> bool {
        self.mask[self.index(i, j)]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn in_mask_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Assemble a grid from an explicit mask (field reconstruction, FFI).
    pub fn with_mask(bbox: BoundingBox, n_lon: usize, n_lat: usize, mask: Vec<bool>) -> Result<Self> {
        bbox.validate()?;
        if n_lon < 2 || n_lat < 2 || mask.len() != n_lon * n_lat {
            return Err(Error::DegenerateBbox { msg: format!("{n_lon}x{n_lat} grid with {} mask bits", mask.len()) });
        }
        Ok(Self { bbox, n_lon, n_lat, mask })
    }

    pub fn lon_spacing(&self) -> f64 {
        self.bbox.lon_span() / (self.n_lon - 1) as f64
    }

    pub fn lat_spacing(&self) -> f64 {
        self.bbox.lat_span() / (self.n_lat - 1) as f64
    }
}

/// Build a grid; nodes outside `mask` keep their slot in the array but are
/// flagged out, so later training and contouring skip them. `None` means
/// no landmass clipping (all nodes in).
pub fn make_grid(bbox: BoundingBox, n_lon: usize, n_lat: usize, mask: Option<&LandmassMask>) -> Result<Grid> {
    bbox.validate()?;
    if n_lon < 2 || n_lat < 2 {
        return Err(Error::DegenerateBbox { msg: format!("need at least 2x2 nodes, got {n_lon}x{n_lat}") });
    }
    let mut grid = Grid { bbox, n_lon, n_lat, mask: vec![true; n_lon * n_lat] };
    if let Some(m) = mask {
        for j in 0..n_lat {
            for i in 0..n_lon {
                let bit = point_in_mask(grid.node(i, j), m);
                let idx = grid.index(i, j);
                grid.mask[idx] = bit;
            }
        }
    }
    Ok(grid)
}
