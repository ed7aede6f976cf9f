//! Planar geometry shared by every part of the simulator.
//!
//! All positions are in meters, velocities in m/s and forces in newtons; the
//! same [`Vec2`] type carries all three.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// A 2D vector. Components are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Builds a vector, rejecting NaN and infinite components.
    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite { x, y })
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(self / n)
        } else {
            None
        }
    }

    /// Rescales the vector so its norm does not exceed `max`, keeping its direction.
    pub fn clamp_norm(self, max: f64) -> Vec2 {
        let n = self.norm();
        if n > max && n > 0.0 {
            self * (max / n)
        } else {
            self
        }
    }

    pub fn distance(self, other: Vec2) -> f64 {
        distance(self, other)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (a - b).norm()
}

/// Orthogonal projection of `p` onto the infinite line through `s` and `d`.
pub fn project_onto_segment_line(p: Vec2, s: Vec2, d: Vec2) -> Result<Vec2, GeometryError> {
    let dir = d - s;
    let len_sq = dir.norm_sq();
    if len_sq == 0.0 {
        return Err(GeometryError::DegenerateLine);
    }
    let t = (p - s).dot(dir) / len_sq;
    Ok(s + dir * t)
}

/// Axis-aligned rectangular area with its origin at the southwest corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub width: f64,
    pub height: f64,
}

impl Default for Zone {
    fn default() -> Self {
        Self {
            width: 1000.0,
            height: 1000.0,
        }
    }
}

impl Zone {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width / 2.0, self.height / 2.0)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    /// Clamps `pos` into the zone. Velocity components pointing out of the
    /// zone at a clamped edge are zeroed.
    pub fn confine(&self, pos: Vec2, vel: Vec2) -> (Vec2, Vec2) {
        let mut p = pos;
        let mut v = vel;
        if p.x <= 0.0 {
            p.x = 0.0;
            v.x = v.x.max(0.0);
        } else if p.x >= self.width {
            p.x = self.width;
            v.x = v.x.min(0.0);
        }
        if p.y <= 0.0 {
            p.y = 0.0;
            v.y = v.y.max(0.0);
        } else if p.y >= self.height {
            p.y = self.height;
            v.y = v.y.min(0.0);
        }
        (p, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Vec2::new(7.0, 2.0), Vec2::new(7.0, 2.0)), 0.0);
        assert_eq!(distance(Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)), 100.0);
    }

    #[test]
    fn projection_examples() {
        let o = Vec2::ZERO;
        assert_eq!(
            project_onto_segment_line(Vec2::new(50.0, 10.0), o, Vec2::new(100.0, 0.0)).unwrap(),
            Vec2::new(50.0, 0.0)
        );
        assert_eq!(
            project_onto_segment_line(Vec2::new(20.0, -30.0), o, Vec2::new(0.0, 100.0)).unwrap(),
            Vec2::new(0.0, -30.0)
        );
        assert_eq!(
            project_onto_segment_line(Vec2::new(1.0, 1.0), o, Vec2::new(2.0, 2.0)).unwrap(),
            Vec2::new(1.0, 1.0)
        );
    }

    #[test]
    fn projection_rejects_degenerate_line() {
        let p = Vec2::new(1.0, 2.0);
        assert_eq!(
            project_onto_segment_line(p, p, p),
            Err(GeometryError::DegenerateLine)
        );
    }

    #[test]
    fn try_new_rejects_nan() {
        assert!(Vec2::try_new(f64::NAN, 0.0).is_err());
        assert!(Vec2::try_new(0.0, f64::INFINITY).is_err());
        assert!(Vec2::try_new(1.0, 2.0).is_ok());
    }

    #[test]
    fn confine_zeroes_outward_velocity() {
        let zone = Zone::default();
        let (p, v) = zone.confine(Vec2::new(-3.0, 1200.0), Vec2::new(-2.0, 5.0));
        assert_eq!(p, Vec2::new(0.0, 1000.0));
        assert_eq!(v, Vec2::new(0.0, 0.0));
        let (p, v) = zone.confine(Vec2::new(1000.0, 10.0), Vec2::new(-2.0, 5.0));
        assert_eq!(p, Vec2::new(1000.0, 10.0));
        assert_eq!(v, Vec2::new(-2.0, 5.0));
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1000.0..1000.0f64
    }

    fn point() -> impl Strategy<Value = Vec2> {
        (coord(), coord()).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in point(), b in point(), c in point()) {
            prop_assert!(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
            prop_assert_eq!(distance(a, b), distance(b, a));
        }

        #[test]
        fn projection_minimizes_distance(p in point(), s in point(), d in point()) {
            prop_assume!(distance(s, d) > 1e-3);
            let q = project_onto_segment_line(p, s, d).unwrap();
            let best = distance(p, q);
            // dense sampling of the line, well beyond the segment on both sides
            for i in -200..=300 {
                let t = i as f64 / 100.0;
                let x = s + (d - s) * t;
                prop_assert!(best <= distance(p, x) + 1e-7);
            }
        }
    }
}
