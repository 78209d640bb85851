use alloc::vec::Vec;

use super::predicates::{incircle, orient};
use super::{Dim, Point, PointPattern};

/// A subset of points violating general quadratic position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Two points of a linear pattern closer than the tolerance.
    Coincident([usize; 2]),
    /// Three (near-)collinear points of a planar pattern.
    Collinear([usize; 3]),
    /// Four (near-)cocircular points of a planar pattern.
    Cocircular([usize; 4]),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Sorted, deduplicated indices of all points involved in a violation.
    pub fn flagged_points(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .violations
            .iter()
            .flat_map(|v| match v {
                Violation::Coincident(i) => i.to_vec(),
                Violation::Collinear(i) => i.to_vec(),
                Violation::Cocircular(i) => i.to_vec(),
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Exhaustive check for degenerate subsets.
///
/// On the line, reports pairs whose separation is at most `tol` times the
/// pattern diameter. In the plane, reports every collinear triple and every
/// cocircular quadruple, where the relevant determinant is compared against
/// `tol` times the sum of the magnitudes of its terms. With `tol == 0` the
/// tests are exact. Cost is `O(n^{d+2})`, so this is meant for small or
/// user-supplied patterns.
pub fn validate_general_position(pattern: &PointPattern, tol: f64) -> ValidationReport {
    let pts = pattern.points();
    let n = pts.len();
    let mut violations = Vec::new();
    if n < pattern.dim().simplex_size() {
        return ValidationReport { violations };
    }
    match pattern.dim() {
        Dim::One => {
            let scale = pattern.bbox_diameter();
            for i in 0..n {
                for j in i + 1..n {
                    if (pts[i][0] - pts[j][0]).abs() <= tol * scale {
                        violations.push(Violation::Coincident([i, j]));
                    }
                }
            }
        }
        Dim::Two => {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        if collinear(pts[i], pts[j], pts[k], tol) {
                            violations.push(Violation::Collinear([i, j, k]));
                        }
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        for l in k + 1..n {
                            if cocircular(pts[i], pts[j], pts[k], pts[l], tol) {
                                violations.push(Violation::Cocircular([i, j, k, l]));
                            }
                        }
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

fn collinear(a: Point, b: Point, c: Point, tol: f64) -> bool {
    if tol == 0.0 {
        return orient(a, b, c) == 0.0;
    }
    let t1 = (b[0] - a[0]) * (c[1] - a[1]);
    let t2 = (b[1] - a[1]) * (c[0] - a[0]);
    (t1 - t2).abs() <= tol * (t1.abs() + t2.abs())
}

fn cocircular(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    if tol == 0.0 {
        return incircle(a, b, c, d) == 0.0;
    }
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let alift = adx * adx + ady * ady;
    let blift = bdx * bdx + bdy * bdy;
    let clift = cdx * cdx + cdy * cdy;
    let det = alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady);
    let scale = alift * ((bdx * cdy).abs() + (cdx * bdy).abs())
        + blift * ((cdx * ady).abs() + (adx * cdy).abs())
        + clift * ((adx * bdy).abs() + (bdx * ady).abs());
    det.abs() <= tol * scale
}
