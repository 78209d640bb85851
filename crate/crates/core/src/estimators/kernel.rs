use super::EstimatorError;
use crate::geometry::{dist, Dim, Point, PointPattern, Window};

/// Kernel bandwidth `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self, EstimatorError> {
        if h > 0.0 && h.is_finite() {
            Ok(Bandwidth(h))
        } else {
            Err(EstimatorError::InvalidBandwidth(h))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `|b(x, h) ∩ A|`: length of the interval overlap on the line, exact area
/// of the disk–rectangle intersection in the plane.
pub fn ball_window_volume(x: Point, h: Bandwidth, window: &Window) -> f64 {
    let h = h.get();
    let lo = window.lo();
    let hi = window.hi();
    match window.dim() {
        Dim::One => ((x[0] + h).min(hi[0]) - (x[0] - h).max(lo[0])).max(0.0),
        Dim::Two => {
            let (x0, x1) = (lo[0] - x[0], hi[0] - x[0]);
            let (y0, y1) = (lo[1] - x[1], hi[1] - x[1]);
            let a = disk_corner_area(x1, y1, h)
                - disk_corner_area(x0, y1, h)
                - disk_corner_area(x1, y0, h)
                + disk_corner_area(x0, y0, h);
            a.max(0.0)
        }
    }
}

/// `∫_{-h}^{x} sqrt(h² - s²) ds` up to a constant: the area primitive of a
/// half chord.
fn half_chord_primitive(x: f64, h: f64) -> f64 {
    let t = (x / h).clamp(-1.0, 1.0);
    0.5 * (x * libm::sqrt((h * h - x * x).max(0.0)) + h * h * libm::asin(t))
}

/// Area of `{X² + Y² < h², X < x, Y < y}`.
fn disk_corner_area(x: f64, y: f64, h: f64) -> f64 {
    if x <= -h || y <= -h {
        return 0.0;
    }
    let xc = x.min(h);
    let p = |s: f64| half_chord_primitive(s, h);
    if y >= h {
        return 2.0 * (p(xc) - p(-h));
    }
    // |X| < q: the chord at X crosses Y = y
    let q = libm::sqrt(h * h - y * y);
    let outer = |a: f64, b: f64| if y >= 0.0 { 2.0 * (p(b) - p(a)) } else { 0.0 };
    let middle = |a: f64, b: f64| y * (b - a) + p(b) - p(a);
    let mut area = 0.0;
    let b1 = (-q).min(xc);
    if b1 > -h {
        area += outer(-h, b1);
    }
    let b2 = q.min(xc);
    if b2 > -q {
        area += middle(-q, b2);
    }
    if xc > q {
        area += outer(q, xc);
    }
    area
}

fn check_eval_point(x0: Point, window: &Window) -> Result<(), EstimatorError> {
    if window.contains(x0) {
        Ok(())
    } else {
        Err(EstimatorError::OutsideWindow)
    }
}

/// Berman–Diggle estimator: real points in the open ball `b(x0, h)`
/// divided by `|b(x0, h) ∩ A|`.
pub fn berman_diggle(
    pattern: &PointPattern,
    window: &Window,
    x0: Point,
    h: Bandwidth,
) -> Result<f64, EstimatorError> {
    check_eval_point(x0, window)?;
    let count = pattern
        .real_points()
        .filter(|p| window.contains(*p) && dist(*p, x0) < h.get())
        .count();
    Ok(count as f64 / ball_window_volume(x0, h, window))
}

/// Mass-preserving kernel estimator: each real point within `h` of `x0`
/// contributes `1 / |b(x, h) ∩ A|`, the edge correction being taken at the
/// data point rather than at `x0`.
pub fn kernel_k(
    pattern: &PointPattern,
    window: &Window,
    x0: Point,
    h: Bandwidth,
) -> Result<f64, EstimatorError> {
    check_eval_point(x0, window)?;
    Ok(pattern
        .real_points()
        .filter(|p| window.contains(*p) && dist(*p, x0) < h.get())
        .map(|p| 1.0 / ball_window_volume(p, h, window))
        .sum())
}
