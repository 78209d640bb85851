//! Adaptive-precision orientation and in-circle tests.

use super::Point;
use robust::Coord;

#[inline]
fn c(p: Point) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

/// Positive when `a, b, p` turn counter-clockwise, zero when collinear.
/// The sign is exact.
#[inline]
pub fn orient(a: Point, b: Point, p: Point) -> f64 {
    robust::orient2d(c(a), c(b), c(p))
}

/// Positive when `p` lies strictly inside the circle through the
/// counter-clockwise triangle `a, b, c`. The sign is exact.
#[inline]
pub fn incircle(a: Point, b: Point, cc: Point, p: Point) -> f64 {
    robust::incircle(c(a), c(b), c(cc), c(p))
}

/// Signed area of the triangle, positive for counter-clockwise input.
#[inline]
pub fn signed_area(a: Point, b: Point, p: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]))
}

/// Circumcenter and circumradius of a non-degenerate triangle.
pub fn circumcircle(a: Point, b: Point, p: Point) -> (Point, f64) {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = p[0] - a[0];
    let cy = p[1] - a[1];
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], libm::hypot(ux, uy))
}
