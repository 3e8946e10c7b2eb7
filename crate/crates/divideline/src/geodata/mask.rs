//! Landmass mask: closed polygon rings with optional holes, point-in-mask
//! via even-odd ray casting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::GeoPoint;

/// Polygonal landmass boundary. `outer` holds the exterior rings, `holes`
/// the inner rings; every ring is closed (first vertex repeated last).
/// Membership uses the even-odd rule over all rings, so holes subtract.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmassMask {
    outer: Vec<Vec<GeoPoint>>,
    holes: Vec<Vec<GeoPoint>>,
}

impl LandmassMask {
    pub fn new(outer: Vec<Vec<GeoPoint>>, holes: Vec<Vec<GeoPoint>>) -> Result<Self> {
        for ring in outer.iter().chain(holes.iter()) {
            if ring.len() < 4 {
                return Err(Error::DegenerateRing { vertices: ring.len() });
            }
            if ring.first() != ring.last() {
                return Err(Error::DegenerateRing { vertices: ring.len() });
            }
        }
        if outer.is_empty() {
            return Err(Error::NotAPolygon);
        }
        Ok(Self { outer, holes })
    }

    pub fn outer(&self) -> &[Vec<GeoPoint>] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<GeoPoint>] {
        &self.holes
    }

    fn rings(&self) -> impl Iterator<Item = &Vec<GeoPoint>> {
        self.outer.iter().chain(self.holes.iter())
    }
}

/// True if `p` lies on any ring edge, within a small absolute slack for
/// points computed rather than copied.
fn on_boundary(p: GeoPoint, mask: &LandmassMask) -> bool {
    const EPS: f64 = 1e-12;
    for ring in mask.rings() {
        for seg in ring.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
            if cross.abs() > EPS {
                continue;
            }
            let within_lon = p.lon >= a.lon.min(b.lon) - EPS && p.lon <= a.lon.max(b.lon) + EPS;
            let within_lat = p.lat >= a.lat.min(b.lat) - EPS && p.lat <= a.lat.max(b.lat) + EPS;
            if within_lon && within_lat {
                return true;
            }
        }
    }
    false
}

/// Even-odd ray-casting membership. Boundary points count as inside, so
/// that coastline clipping never drops nodes sitting exactly on the
/// boundary. Holes subtract (a crossing of a hole ring toggles parity).
pub fn point_in_mask(p: GeoPoint, mask: &LandmassMask) -> bool {
    if on_boundary(p, mask) {
        return true;
    }
    let mut inside = false;
    for ring in mask.rings() {
        for seg in ring.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            // half-open rule on latitude avoids double-counting vertices
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if x > p.lon {
                    inside = !inside;
                }
            }
        }
    }
    inside
}
