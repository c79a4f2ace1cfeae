//! Walled environment made of straight segments, plus ray and clearance queries.

use thiserror::Error;

use crate::Scalar;

/// Parallel-ray rejection threshold on the ray/segment cross product.
const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("wall has zero length at ({x}, {y})")]
    ZeroLengthWall { x: f64, y: f64 },
    #[error("wall coordinates must be finite")]
    NonFinite,
    #[error("environment needs at least one wall")]
    NoWalls,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSegment<T> {
    a: Point<T>,
    b: Point<T>,
}

impl<T: Scalar> WallSegment<T> {
    pub fn new(a: Point<T>, b: Point<T>) -> Result<Self, WorldError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(WorldError::NonFinite);
        }
        if a == b {
            return Err(WorldError::ZeroLengthWall { x: a.x.to_f64_lossy(), y: a.y.to_f64_lossy() });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Point<T> {
        self.a
    }

    pub fn b(&self) -> Point<T> {
        self.b
    }

    /// Shortest distance from `p` to any point of the segment.
    pub fn distance_to(&self, p: Point<T>) -> T {
        let ab = self.b.sub(self.a);
        let ap = p.sub(self.a);
        let t = (ap.dot(ab) / ab.dot(ab)).max(T::zero()).min(T::one());
        let closest = Point::new(self.a.x + ab.x * t, self.a.y + ab.y * t);
        p.distance(closest)
    }

    /// Distance along the unit ray `origin + t·dir` to this segment, if hit at `t > 0`.
    fn ray_hit(&self, origin: Point<T>, dir: Point<T>) -> Option<T> {
        let edge = self.b.sub(self.a);
        let denom = dir.cross(edge);
        if denom.abs() < T::lit(PARALLEL_EPS) {
            return None;
        }
        let w = self.a.sub(origin);
        let t = w.cross(edge) / denom;
        let u = w.cross(dir) / denom;
        (t > T::zero() && u >= T::zero() && u <= T::one()).then_some(t)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn contains(&self, p: Point<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment<T> {
    walls: Vec<WallSegment<T>>,
    bounds: Bounds<T>,
}

impl<T: Scalar> Environment<T> {
    /// Builds an environment whose bounds are the tight box around all wall endpoints.
    pub fn new(walls: Vec<WallSegment<T>>) -> Result<Self, WorldError> {
        let first = walls.first().ok_or(WorldError::NoWalls)?;
        let mut bounds = Bounds { min: first.a, max: first.a };
        for p in walls.iter().flat_map(|w| [w.a, w.b]) {
            bounds.min.x = bounds.min.x.min(p.x);
            bounds.min.y = bounds.min.y.min(p.y);
            bounds.max.x = bounds.max.x.max(p.x);
            bounds.max.y = bounds.max.y.max(p.y);
        }
        Ok(Self { walls, bounds })
    }

    pub fn walls(&self) -> &[WallSegment<T>] {
        &self.walls
    }

    pub fn bounds(&self) -> Bounds<T> {
        self.bounds
    }
}

/// Position in inches and heading in radians, heading kept in `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    x: T,
    y: T,
    heading: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, heading: T) -> Self {
        Self { x, y, heading: normalize_angle(heading) }
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn heading(&self) -> T {
        self.heading
    }

    pub fn position(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }
}

/// Wraps an angle into `[-π, π)`. Angles already in range are returned unchanged.
pub fn normalize_angle<T: Scalar>(angle: T) -> T {
    let pi = T::PI();
    if angle >= -pi && angle < pi {
        return angle;
    }
    let two_pi = pi + pi;
    let mut wrapped = angle - two_pi * ((angle + pi) / two_pi).floor();
    if wrapped >= pi {
        wrapped = wrapped - two_pi;
    }
    if wrapped < -pi {
        wrapped = -pi;
    }
    wrapped
}

/// Distance from `origin` along `direction` to the nearest wall, or `max_range` on a miss.
///
/// Only strictly positive hits count, so an origin lying on a wall does not
/// report zero. The result is always in `(0, max_range]`.
pub fn cast_ray<T: Scalar>(origin: Point<T>, direction: T, env: &Environment<T>, max_range: T) -> T {
    debug_assert!(max_range > T::zero());
    let dir = Point::new(direction.cos(), direction.sin());
    env.walls.iter().filter_map(|w| w.ray_hit(origin, dir)).fold(max_range, T::min)
}

/// True when some wall lies within `body_radius` of `p`; touching counts.
pub fn point_in_collision<T: Scalar>(p: Point<T>, body_radius: T, env: &Environment<T>) -> bool {
    env.walls.iter().any(|w| w.distance_to(p) <= body_radius)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use proptest::prelude::*;

    use super::*;

    fn wall(x1: f64, y1: f64, x2: f64, y2: f64) -> WallSegment<f64> {
        WallSegment::new(Point::new(x1, y1), Point::new(x2, y2)).unwrap()
    }

    fn env(walls: &[WallSegment<f64>]) -> Environment<f64> {
        Environment::new(walls.to_vec()).unwrap()
    }

    /// Marches along the ray in tiny increments until it comes within `tol` of a wall.
    fn brute_force_ray(origin: Point<f64>, dir: f64, env: &Environment<f64>, max: f64) -> f64 {
        let step = 1e-5;
        let mut t = step;
        while t < max {
            let p = Point::new(origin.x + t * dir.cos(), origin.y + t * dir.sin());
            if env.walls().iter().any(|w| w.distance_to(p) < step) {
                return t;
            }
            t += step;
        }
        max
    }

    #[test]
    fn perpendicular_hit() {
        let e = env(&[wall(10.0, -5.0, 10.0, 5.0)]);
        assert_eq!(cast_ray(Point::new(0.0, 0.0), 0.0, &e, 100.0), 10.0);
    }

    #[test]
    fn miss_returns_max_range() {
        let e = env(&[wall(-10.0, -5.0, -10.0, 5.0)]);
        assert_eq!(cast_ray(Point::new(0.0, 0.0), 0.0, &e, 100.0), 100.0);
    }

    #[test]
    fn diagonal_hit_matches_brute_force() {
        let e = env(&[wall(10.0, 0.0, 10.0, 20.0)]);
        let origin = Point::new(0.0, 0.0);
        let brute = brute_force_ray(origin, FRAC_PI_4, &e, 100.0);
        assert!((brute - 14.142_135_623_730_951).abs() < 1e-4, "{brute}");
        let d = cast_ray(origin, FRAC_PI_4, &e, 100.0);
        assert!((d - 10.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((d - brute).abs() < 1e-4);
    }

    #[test]
    fn origin_on_wall_skips_zero_hit() {
        let e = env(&[wall(0.0, -5.0, 0.0, 5.0), wall(7.0, -5.0, 7.0, 5.0)]);
        assert_eq!(cast_ray(Point::new(0.0, 0.0), 0.0, &e, 100.0), 7.0);
        let lone = env(&[wall(0.0, -5.0, 0.0, 5.0)]);
        assert_eq!(cast_ray(Point::new(0.0, 0.0), 0.0, &lone, 50.0), 50.0);
    }

    #[test]
    fn parallel_ray_ignored() {
        let e = env(&[wall(1.0, 0.0, 9.0, 0.0)]);
        assert_eq!(cast_ray(Point::new(0.0, 0.0), 0.0, &e, 30.0), 30.0);
    }

    #[test]
    fn collision_cases() {
        let p = Point::new(0.0, 0.0);
        assert!(point_in_collision(p, 1.0, &env(&[wall(0.5, -5.0, 0.5, 5.0)])));
        assert!(!point_in_collision(p, 1.0, &env(&[wall(5.0, -5.0, 5.0, 5.0)])));
        assert!(point_in_collision(p, 1.0, &env(&[wall(1.0, -5.0, 1.0, 5.0)])));
        // Segment endpoint, not its supporting line, is what counts.
        assert!(!point_in_collision(p, 1.0, &env(&[wall(0.5, 2.0, 0.5, 5.0)])));
    }

    #[test]
    fn rejects_bad_walls() {
        let p = Point::new(1.0, 1.0);
        assert!(matches!(WallSegment::new(p, p), Err(WorldError::ZeroLengthWall { .. })));
        assert_eq!(WallSegment::new(Point::new(f64::NAN, 0.0), p), Err(WorldError::NonFinite));
        assert_eq!(Environment::<f64>::new(vec![]), Err(WorldError::NoWalls));
    }

    #[test]
    fn bounds_enclose_all_endpoints() {
        let e = env(&[wall(-3.0, 2.0, 4.0, 2.0), wall(0.0, -7.0, 0.0, 9.0)]);
        let b = e.bounds();
        assert_eq!(b.min, Point::new(-3.0, -7.0));
        assert_eq!(b.max, Point::new(4.0, 9.0));
        for w in e.walls() {
            assert!(b.contains(w.a()) && b.contains(w.b()));
        }
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(PI), -PI);
        assert_eq!(normalize_angle(-PI), -PI);
        assert_eq!(normalize_angle(0.5), 0.5);
        assert!((normalize_angle(3.0 * PI + 0.25) - (-PI + 0.25)).abs() < 1e-12);
        assert!((normalize_angle(-2.0 * PI - 0.25) - (-0.25)).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let w = WallSegment::new(Point::new(10.0f32, -5.0), Point::new(10.0, 5.0)).unwrap();
        let e = Environment::new(vec![w]).unwrap();
        assert_eq!(cast_ray(Point::new(0.0f32, 0.0), 0.0, &e, 100.0), 10.0);
    }

    fn arb_wall() -> impl Strategy<Value = WallSegment<f64>> {
        (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64)
            .prop_filter("non-degenerate", |(a, b, c, d)| (a - c).hypot(b - d) > 1e-3)
            .prop_map(|(a, b, c, d)| wall(a, b, c, d))
    }

    proptest! {
        #[test]
        fn normalized_heading_in_range(a in -1e3..1e3f64) {
            let h = normalize_angle(a);
            prop_assert!((-PI..PI).contains(&h));
            prop_assert!(((h - a) / (2.0 * PI)).round() * 2.0 * PI - (h - a) < 1e-9);
        }

        #[test]
        fn ray_in_range_and_order_independent(
            walls in prop::collection::vec(arb_wall(), 1..8),
            ox in -20.0..20.0f64, oy in -20.0..20.0f64, dir in -4.0..4.0f64,
            max in 1.0..200.0f64,
        ) {
            let origin = Point::new(ox, oy);
            let d = cast_ray(origin, dir, &env(&walls), max);
            prop_assert!(d > 0.0 && d <= max);
            let mut reversed = walls.clone();
            reversed.reverse();
            prop_assert_eq!(d, cast_ray(origin, dir, &env(&reversed), max));
            let mut rotated = walls.clone();
            rotated.rotate_left(walls.len() / 2);
            prop_assert_eq!(d, cast_ray(origin, dir, &env(&rotated), max));
        }

        #[test]
        fn hit_is_independent_of_larger_range(
            walls in prop::collection::vec(arb_wall(), 1..8),
            ox in -20.0..20.0f64, oy in -20.0..20.0f64, dir in -4.0..4.0f64,
            extra in 0.1..500.0f64,
        ) {
            let e = env(&walls);
            let origin = Point::new(ox, oy);
            let d = cast_ray(origin, dir, &e, 200.0);
            if d < 200.0 {
                prop_assert_eq!(d, cast_ray(origin, dir, &e, d + extra));
            }
        }

        #[test]
        fn translation_invariant(
            walls in prop::collection::vec(arb_wall(), 1..8),
            ox in -20.0..20.0f64, oy in -20.0..20.0f64, dir in -4.0..4.0f64,
            tx in -100.0..100.0f64, ty in -100.0..100.0f64,
        ) {
            let shifted: Vec<_> = walls
                .iter()
                .map(|w| wall(w.a().x + tx, w.a().y + ty, w.b().x + tx, w.b().y + ty))
                .collect();
            let d0 = cast_ray(Point::new(ox, oy), dir, &env(&walls), 150.0);
            let d1 = cast_ray(Point::new(ox + tx, oy + ty), dir, &env(&shifted), 150.0);
            prop_assert!((d0 - d1).abs() < 1e-9, "{} vs {}", d0, d1);
        }
    }
}
