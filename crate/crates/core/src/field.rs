//! Field layout: boundary, team zones, bases, and flag homes.

use crate::geom::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Blue,
    Red,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Blue => Team::Red,
            Team::Red => Team::Blue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Team::Blue => "blue",
            Team::Red => "red",
        }
    }
}

impl std::fmt::Display for Team {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Axis-aligned rectangle, used for zones and operating regions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when `p` is inside and at least `margin` meters from every edge.
    pub fn contains_with_margin(&self, p: Vec2, margin: f64) -> bool {
        p.x >= self.min.x + margin
            && p.x <= self.max.x - margin
            && p.y >= self.min.y + margin
            && p.y <= self.max.y - margin
    }

    pub fn center(&self) -> Vec2 {
        self.min.midpoint(self.max)
    }
}

/// Circular region (bases, untag regions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Vec2) -> bool {
        p.dist(self.center) <= self.radius
    }
}

/// Playing-field geometry. Blue owns the west half (`x < width/2`), red the
/// east half; the boundary rectangle is `[0, width] x [0, depth]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub width: f64,
    pub depth: f64,
    pub blue_base: Circle,
    pub red_base: Circle,
    pub blue_flag_home: Vec2,
    pub red_flag_home: Vec2,
    pub tag_radius: f64,
    pub grab_radius: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::standard(160.0, 80.0, 10.0, 10.0, 10.0, 10.0)
    }
}

impl FieldSpec {
    /// Standard symmetric layout: bases centered `base_offset` meters in from
    /// each back line on the centerline, flags at the base centers.
    pub fn standard(
        width: f64,
        depth: f64,
        base_radius: f64,
        base_offset: f64,
        tag_radius: f64,
        grab_radius: f64,
    ) -> Self {
        let mid_y = depth / 2.0;
        FieldSpec {
            width,
            depth,
            blue_base: Circle {
                center: Vec2::new(base_offset, mid_y),
                radius: base_radius,
            },
            red_base: Circle {
                center: Vec2::new(width - base_offset, mid_y),
                radius: base_radius,
            },
            blue_flag_home: Vec2::new(base_offset, mid_y),
            red_flag_home: Vec2::new(width - base_offset, mid_y),
            tag_radius,
            grab_radius,
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(self.width, self.depth))
    }

    pub fn in_bounds(&self, p: Vec2) -> bool {
        self.bounds().contains(p)
    }

    pub fn midfield_x(&self) -> f64 {
        self.width / 2.0
    }

    /// Zone rectangle for a team. The two zones partition the field at the
    /// midfield line; a point exactly on the line counts as red's.
    pub fn zone(&self, team: Team) -> Rect {
        let mid = self.midfield_x();
        match team {
            Team::Blue => Rect::new(Vec2::ZERO, Vec2::new(mid, self.depth)),
            Team::Red => Rect::new(Vec2::new(mid, 0.0), Vec2::new(self.width, self.depth)),
        }
    }

    /// True when `p` lies in `team`'s half. Exact midfield points belong to red.
    pub fn in_zone(&self, team: Team, p: Vec2) -> bool {
        match team {
            Team::Blue => p.x < self.midfield_x(),
            Team::Red => p.x >= self.midfield_x(),
        }
    }

    pub fn base(&self, team: Team) -> Circle {
        match team {
            Team::Blue => self.blue_base,
            Team::Red => self.red_base,
        }
    }

    pub fn flag_home(&self, team: Team) -> Vec2 {
        match team {
            Team::Blue => self.blue_flag_home,
            Team::Red => self.red_flag_home,
        }
    }

    /// Untag region: circle of the base radius around the team's flag home.
    pub fn untag_region(&self, team: Team) -> Circle {
        Circle {
            center: self.flag_home(team),
            radius: self.base(team).radius,
        }
    }

    /// Validate geometric invariants, collecting every violation.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.width > 0.0) {
            errs.push(format!("field.width must be > 0, got {}", self.width));
        }
        if !(self.depth > 0.0) {
            errs.push(format!("field.depth must be > 0, got {}", self.depth));
        }
        if !(self.tag_radius > 0.0) {
            errs.push(format!("field.tag_radius must be > 0, got {}", self.tag_radius));
        }
        if !(self.grab_radius > 0.0) {
            errs.push(format!("field.grab_radius must be > 0, got {}", self.grab_radius));
        }
        if self.depth > 0.0 {
            if self.tag_radius >= self.depth / 2.0 {
                errs.push(format!(
                    "field.tag_radius must be < depth/2 ({}), got {}",
                    self.depth / 2.0,
                    self.tag_radius
                ));
            }
            if self.grab_radius >= self.depth / 2.0 {
                errs.push(format!(
                    "field.grab_radius must be < depth/2 ({}), got {}",
                    self.depth / 2.0,
                    self.grab_radius
                ));
            }
        }
        for team in [Team::Blue, Team::Red] {
            let base = self.base(team);
            let zone = self.zone(team);
            if !(base.radius > 0.0) {
                errs.push(format!("{team} base radius must be > 0, got {}", base.radius));
                continue;
            }
            let inside = base.center.x - base.radius >= zone.min.x
                && base.center.x + base.radius <= zone.max.x
                && base.center.y - base.radius >= zone.min.y
                && base.center.y + base.radius <= zone.max.y;
            if !inside {
                errs.push(format!("{team} base must lie entirely inside the {team} zone"));
            }
            if !base.contains(self.flag_home(team)) {
                errs.push(format!("{team} flag home must lie inside the {team} base"));
            }
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_field_is_valid() {
        assert!(FieldSpec::default().validate().is_empty());
    }

    #[test]
    fn zones_partition_at_midfield() {
        let f = FieldSpec::default();
        let just_west = Vec2::new(f.midfield_x() - 1e-9, 10.0);
        let on_line = Vec2::new(f.midfield_x(), 10.0);
        assert!(f.in_zone(Team::Blue, just_west));
        assert!(!f.in_zone(Team::Red, just_west));
        assert!(f.in_zone(Team::Red, on_line));
        assert!(!f.in_zone(Team::Blue, on_line));
    }

    #[test]
    fn boundary_is_inclusive() {
        let f = FieldSpec::default();
        assert!(f.in_bounds(Vec2::new(0.0, 0.0)));
        assert!(f.in_bounds(Vec2::new(160.0, 80.0)));
        assert!(!f.in_bounds(Vec2::new(160.0001, 40.0)));
        assert!(!f.in_bounds(Vec2::new(-0.0001, 40.0)));
    }

    #[test]
    fn bad_field_reports_all_violations() {
        let mut f = FieldSpec::default();
        f.tag_radius = 50.0; // >= depth/2
        f.grab_radius = -1.0;
        let errs = f.validate();
        assert!(errs.iter().any(|e| e.contains("tag_radius")));
        assert!(errs.iter().any(|e| e.contains("grab_radius")));
    }
}
