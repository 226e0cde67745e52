//! Planar geometry for equal-radius sensing discs.
//!
//! All lengths are meters and all angles are radians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        euclidean_distance(*self, *other)
    }
}

/// A sensing disc of radius `radius` around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Point2D,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point2D, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "disc radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Point2D) -> bool {
        disc_contains(self, p)
    }
}

/// Boundary split of one disc against an equal-radius neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    /// Half-angle of the boundary arc lying inside the neighbor.
    pub alpha: f64,
    pub overlapped_perimeter: f64,
    pub non_overlapped_perimeter: f64,
}

impl OverlapResult {
    pub fn between(d: f64, r: f64) -> Result<Self> {
        let alpha = overlap_angle(d, r)?;
        Ok(Self {
            alpha,
            overlapped_perimeter: 2.0 * r * alpha,
            non_overlapped_perimeter: 2.0 * r * (PI - alpha),
        })
    }
}

pub fn euclidean_distance(a: Point2D, b: Point2D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Half-angle of the arc of one disc's boundary that lies inside another
/// disc of the same radius `r` whose center is `d` away.
///
/// A boundary point at angle `phi` from the center line is inside the
/// neighbor iff `cos(phi) >= d / 2r`, so the half-angle is `acos(d / 2r)`
/// for `0 < d < 2r` and zero once the discs are tangent or apart.
/// Coincident centers are rejected with [`Error::CoLocated`].
pub fn overlap_angle(d: f64, r: f64) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    if d.is_nan() || d < 0.0 {
        return Err(Error::InvalidInput(format!("distance must be non-negative, got {d}")));
    }
    if d == 0.0 {
        return Err(Error::CoLocated);
    }
    let ratio = d / (2.0 * r);
    if ratio >= 1.0 {
        return Ok(0.0);
    }
    Ok(ratio.acos().clamp(0.0, PI / 2.0))
}

/// Length of a disc's boundary not covered by one equal-radius neighbor: `2r(pi - alpha)`.
pub fn non_overlapped_perimeter(d: f64, r: f64) -> Result<f64> {
    Ok(2.0 * r * (PI - overlap_angle(d, r)?))
}

/// Closed-disc membership (the boundary counts as inside).
pub fn disc_contains(disc: &Disc, p: Point2D) -> bool {
    euclidean_distance(disc.center, p) <= disc.radius
}
