//! Arcs on the unit circle, the index sets for spectral projections of
//! unitaries and the labels of projection-family blocks.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;

/// Normalize an angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(TAU);
    if x >= TAU {
        x -= TAU;
    }
    x
}

/// Distance between two angles along the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (normalize_angle(a) - normalize_angle(b)).abs();
    d.min(TAU - d)
}

/// A counterclockwise arc of the unit circle from `start` over `width`
/// radians, with independently closed or open endpoints.
///
/// Width 0 with both endpoints closed is the degenerate single-angle arc;
/// width `2π` is the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    start: f64,
    width: f64,
    closed_start: bool,
    closed_end: bool,
}

impl ArcInterval {
    /// Arc running counterclockwise from `start` to `end` (angles are
    /// normalized to `[0, 2π)`). Equal endpoints require both to be closed
    /// and give the degenerate arc; use [`ArcInterval::full`] for the whole
    /// circle.
    pub fn new(start: f64, end: f64, closed_start: bool, closed_end: bool) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidParameter("arc endpoints must be finite".into()));
        }
        let s = normalize_angle(start);
        let e = normalize_angle(end);
        let width = normalize_angle(e - s);
        if width == 0.0 && s != e {
            // normalization noise: distinct inputs that wrapped onto each other
            return Err(Error::InvalidParameter("arc endpoints coincide after normalization".into()));
        }
        if width == 0.0 && !(closed_start && closed_end) {
            return Err(Error::InvalidParameter(
                "zero-width arc must have both endpoints closed (degenerate arc) or use ArcInterval::full".into(),
            ));
        }
        Ok(ArcInterval { start: s, width, closed_start, closed_end })
    }

    /// The degenerate arc containing exactly one angle.
    pub fn degenerate(angle: f64) -> Self {
        ArcInterval { start: normalize_angle(angle), width: 0.0, closed_start: true, closed_end: true }
    }

    /// The full circle.
    pub fn full() -> Self {
        ArcInterval { start: 0.0, width: TAU, closed_start: true, closed_end: true }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    /// End angle, normalized to `[0, 2π)`.
    pub fn end(&self) -> f64 {
        normalize_angle(self.start + self.width)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn closed_start(&self) -> bool {
        self.closed_start
    }

    pub fn closed_end(&self) -> bool {
        self.closed_end
    }

    pub fn is_full(&self) -> bool {
        self.width >= TAU
    }

    pub fn is_degenerate(&self) -> bool {
        self.width == 0.0
    }

    /// Midpoint angle of the arc.
    pub fn midpoint(&self) -> f64 {
        normalize_angle(self.start + 0.5 * self.width)
    }

    /// Membership of an angle, honoring endpoint closure flags.
    pub fn contains(&self, angle: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let off = normalize_angle(angle - self.start);
        if off == 0.0 {
            return self.closed_start || (self.width == 0.0 && self.closed_end);
        }
        if off < self.width {
            return true;
        }
        if off == self.width {
            return self.closed_end;
        }
        false
    }

    /// Distance from an angle to the closer endpoint, along the circle.
    pub fn endpoint_distance(&self, angle: f64) -> f64 {
        circular_distance(angle, self.start).min(circular_distance(angle, self.end()))
    }

    /// Distance from an angle to the arc (0 when contained up to closure).
    pub fn distance_to_angle(&self, angle: f64) -> f64 {
        if self.is_full() {
            return 0.0;
        }
        let off = normalize_angle(angle - self.start);
        if off <= self.width {
            return 0.0;
        }
        self.endpoint_distance(angle)
    }

    /// Angular gap between two arcs: 0 when they touch or overlap (closure
    /// flags ignored; touching endpoints count as distance 0), otherwise the
    /// smaller of the two gaps separating them on the circle.
    pub fn angular_gap(&self, other: &ArcInterval) -> f64 {
        if self.is_full() || other.is_full() {
            return 0.0;
        }
        let overlap = self.distance_to_angle(other.start()) == 0.0
            || self.distance_to_angle(other.end()) == 0.0
            || other.distance_to_angle(self.start()) == 0.0
            || other.distance_to_angle(self.end()) == 0.0;
        if overlap {
            return 0.0;
        }
        let g1 = normalize_angle(other.start() - self.end());
        let g2 = normalize_angle(self.start() - other.end());
        g1.min(g2)
    }

    /// Euclidean diameter of the arc as a subset of the unit circle: the
    /// chord for widths up to π, the full diameter 2 beyond.
    pub fn chord_diameter(&self) -> f64 {
        if self.width >= std::f64::consts::PI {
            2.0
        } else {
            2.0 * (self.width / 2.0).sin()
        }
    }
}
