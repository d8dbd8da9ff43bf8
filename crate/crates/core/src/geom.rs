//! Planar geometry and compass-angle helpers.
//!
//! Positions are meters in a field-local frame: x grows east, y grows north.
//! Headings are compass degrees in `[0, 360)`: 0 = north (+y), 90 = east (+x),
//! increasing clockwise.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dist(self, other: Vec2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn len(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    /// Midpoint of the segment from `self` to `other`.
    pub fn midpoint(self, other: Vec2) -> Vec2 {
        Vec2::new((self.x + other.x) * 0.5, (self.y + other.y) * 0.5)
    }

    /// Perpendicular distance from `self` to the infinite line through `a` and `b`.
    /// Falls back to point distance when `a == b`.
    pub fn dist_to_line(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b.sub(a);
        let l = ab.len();
        if l < 1e-12 {
            return self.dist(a);
        }
        ((ab.x * (self.y - a.y)) - (ab.y * (self.x - a.x))).abs() / l
    }

    /// Distance from `self` to the closed segment `a`..`b`.
    pub fn dist_to_segment(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b.sub(a);
        let l2 = ab.x * ab.x + ab.y * ab.y;
        if l2 < 1e-12 {
            return self.dist(a);
        }
        let t = (((self.x - a.x) * ab.x + (self.y - a.y) * ab.y) / l2).clamp(0.0, 1.0);
        self.dist(a.add(ab.scale(t)))
    }
}

/// Unit vector for a compass heading in degrees.
pub fn heading_unit(heading_deg: f64) -> Vec2 {
    let r = heading_deg.to_radians();
    Vec2::new(r.sin(), r.cos())
}

/// Compass bearing in `[0, 360)` from `from` to `to`. Returns 0 when coincident.
pub fn bearing(from: Vec2, to: Vec2) -> f64 {
    let d = to.sub(from);
    if d.len() < 1e-12 {
        return 0.0;
    }
    normalize_deg(d.x.atan2(d.y).to_degrees())
}

/// Normalize an angle into `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let mut a = deg % 360.0;
    if a < 0.0 {
        a += 360.0;
    }
    // -1e-18 % 360 is -0.0 + 360 = 360.0; fold back
    if a >= 360.0 {
        a -= 360.0;
    }
    a
}

/// Signed shortest-arc difference `to - from`, in `[-180, 180)`.
pub fn angle_diff(from_deg: f64, to_deg: f64) -> f64 {
    let mut d = (to_deg - from_deg) % 360.0;
    if d < -180.0 {
        d += 360.0;
    } else if d >= 180.0 {
        d -= 360.0;
    }
    d
}

/// Absolute shortest-arc separation, in `[0, 180]`.
pub fn angle_sep(a_deg: f64, b_deg: f64) -> f64 {
    angle_diff(a_deg, b_deg).abs()
}

/// Point at `radius` meters from `center` along compass bearing `bearing_deg`.
pub fn point_at(center: Vec2, bearing_deg: f64, radius: f64) -> Vec2 {
    center.add(heading_unit(bearing_deg).scale(radius))
}
