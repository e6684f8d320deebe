//! Planar points and the angle conventions used by every measurement.
//!
//! Coordinates are image coordinates: `x` grows to the right, `y` grows
//! downwards. A direction is `atan2(dy, dx)` in degrees, wrapped to `[0, 360)`.
//! A turn is the signed change of direction between two consecutive edges in
//! `(-180, 180]`; positive turns are clockwise on screen.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> From<[T; 2]> for Point<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Point { x, y }
    }
}

impl<T> From<Point<T>> for [T; 2] {
    fn from(p: Point<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn from_pixel(x: i64, y: i64) -> Self {
        Point::new(T::lit(x as f64), T::lit(y as f64))
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2-D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn distance(self, o: Self) -> T {
        (o - self).norm()
    }

    /// Direction of this vector in degrees, `[0, 360)`.
    pub fn direction(self) -> T {
        wrap_360(self.y.atan2(self.x).to_degrees())
    }

    pub fn scale(self, s: T) -> Self {
        Point::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Wraps an angle in degrees to `[0, 360)`.
pub fn wrap_360<T: Real>(deg: T) -> T {
    let full = T::full_turn();
    let mut r = deg % full;
    if r < T::zero() {
        r = r + full;
    }
    // `-0.0 % 360 + 360` can round up to exactly 360.
    if r >= full {
        r = r - full;
    }
    r
}

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_180<T: Real>(deg: T) -> T {
    let r = wrap_360(deg);
    if r > T::half_turn() {
        r - T::full_turn()
    } else {
        r
    }
}

/// Signed turn from edge direction `a` to edge direction `b`, in degrees.
/// Positive is clockwise on screen (y down).
pub fn turn_angle<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a.cross(b).atan2(a.dot(b)).to_degrees()
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
/// Falls back to the distance to `a` when the chord is degenerate.
pub fn distance_to_line<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let d = b - a;
    let len = d.norm();
    if len <= T::zero() {
        return p.distance(a);
    }
    (d.cross(p - a)).abs() / len
}

/// Unweighted mean of a point set.
pub fn centroid<T: Real>(points: &[Point<T>]) -> Point<T> {
    let n = T::from_usize_lossy(points.len().max(1));
    let sum = points
        .iter()
        .fold(Point::new(T::zero(), T::zero()), |acc, &p| acc + p);
    Point::new(sum.x / n, sum.y / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_conventions() {
        let east = Point::new(1.0f64, 0.0);
        let south = Point::new(0.0f64, 1.0);
        assert_eq!(east.direction(), 0.0);
        assert_eq!(south.direction(), 90.0);
        assert!((Point::new(-1.0f64, -1e-300).direction() - 180.0).abs() < 1e-9);
        // east then south on screen is a right-hand (clockwise) turn
        assert!((turn_angle(east, south) - 90.0).abs() < 1e-12);
        assert!((turn_angle(south, east) + 90.0).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_360(-90.0f64), 270.0);
        assert_eq!(wrap_360(720.0f64), 0.0);
        assert_eq!(wrap_360(-0.0f64), 0.0);
        assert_eq!(wrap_180(270.0f64), -90.0);
        assert_eq!(wrap_180(180.0f64), 180.0);
        assert_eq!(wrap_180(-180.0f64), 180.0);
    }

    #[test]
    fn line_distance() {
        let a = Point::new(0.0f32, 0.0);
        let b = Point::new(10.0f32, 0.0);
        assert_eq!(distance_to_line(Point::new(3.0, 2.0), a, b), 2.0);
    }
}
