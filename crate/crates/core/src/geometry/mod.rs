//! Point patterns, observation windows and Delaunay tessellations in one and
//! two dimensions.
//!
//! One-dimensional points are stored as `[x, 0.0]` so that every routine can
//! share the [`Point`] type.

mod delaunay;
pub(crate) mod predicates;
mod tessellation;
mod validate;

use alloc::vec::Vec;
use thiserror::Error;

pub use delaunay::build_delaunay;
pub use tessellation::{Ball, Jitter, Tessellation};
pub use validate::{validate_general_position, ValidationReport, Violation};

/// A location in the plane; the second coordinate is zero for linear patterns.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("point {index} lies outside the window")]
    OutsideWindow { index: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ghost flags ({flags}) do not match point count ({points})")]
    GhostLength { flags: usize, points: usize },
}

/// Ambient dimension of a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn from_usize(d: usize) -> Option<Dim> {
        match d {
            1 => Some(Dim::One),
            2 => Some(Dim::Two),
            _ => None,
        }
    }

    /// Number of vertices of a Delaunay cell, `d + 1`.
    pub fn simplex_size(self) -> usize {
        self.get() + 1
    }

    /// Volume of the unit ball: 2 on the line, pi in the plane.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Dim::One => 2.0,
            Dim::Two => core::f64::consts::PI,
        }
    }
}

/// Observation region: a closed interval or an axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    dim: Dim,
    lo: Point,
    hi: Point,
}

impl Window {
    pub fn interval(a: f64, b: f64) -> Result<Self, GeometryError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(GeometryError::InvalidWindow("non-finite bound"));
        }
        if b <= a {
            return Err(GeometryError::InvalidWindow("empty interval"));
        }
        Ok(Window {
            dim: Dim::One,
            lo: [a, 0.0],
            hi: [b, 0.0],
        })
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Result<Self, GeometryError> {
        if !(x.0.is_finite() && x.1.is_finite() && y.0.is_finite() && y.1.is_finite()) {
            return Err(GeometryError::InvalidWindow("non-finite bound"));
        }
        if x.1 <= x.0 || y.1 <= y.0 {
            return Err(GeometryError::InvalidWindow("rectangle has zero area"));
        }
        Ok(Window {
            dim: Dim::Two,
            lo: [x.0, y.0],
            hi: [x.1, y.1],
        })
    }

    /// `[-w, w]^d`.
    pub fn centered(dim: Dim, half_width: f64) -> Result<Self, GeometryError> {
        match dim {
            Dim::One => Window::interval(-half_width, half_width),
            Dim::Two => Window::rectangle((-half_width, half_width), (-half_width, half_width)),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn volume(&self) -> f64 {
        match self.dim {
            Dim::One => self.hi[0] - self.lo[0],
            Dim::Two => (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1]),
        }
    }

    pub fn diameter(&self) -> f64 {
        let dx = self.hi[0] - self.lo[0];
        let dy = self.hi[1] - self.lo[1];
        libm::hypot(dx, dy)
    }

    /// Closed containment.
    pub fn contains(&self, p: Point) -> bool {
        match self.dim {
            Dim::One => p[0] >= self.lo[0] && p[0] <= self.hi[0],
            Dim::Two => {
                p[0] >= self.lo[0] && p[0] <= self.hi[0] && p[1] >= self.lo[1] && p[1] <= self.hi[1]
            }
        }
    }

    /// Distance from `p` to the window boundary (zero on or outside it).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let mut d = f64::INFINITY;
        for k in 0..self.dim.get() {
            d = d.min(p[k] - self.lo[k]).min(self.hi[k] - p[k]);
        }
        d.max(0.0)
    }

    /// Vertices of the window: the two endpoints, or the four corners in
    /// counter-clockwise order starting at the lower-left one.
    pub fn corners(&self) -> Vec<Point> {
        match self.dim {
            Dim::One => alloc::vec![self.lo, self.hi],
            Dim::Two => alloc::vec![
                self.lo,
                [self.hi[0], self.lo[1]],
                self.hi,
                [self.lo[0], self.hi[1]],
            ],
        }
    }
}

/// A finite point pattern, with each point flagged as real or ghost.
///
/// Ghost points take part in tessellations but are not observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    dim: Dim,
    points: Vec<Point>,
    ghost: Vec<bool>,
}

impl PointPattern {
    pub fn new(dim: Dim, points: Vec<Point>, ghost: Vec<bool>) -> Result<Self, GeometryError> {
        if ghost.len() != points.len() {
            return Err(GeometryError::GhostLength {
                flags: ghost.len(),
                points: points.len(),
            });
        }
        let mut points = points;
        for (index, p) in points.iter_mut().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(GeometryError::NonFinite { index });
            }
            if dim == Dim::One {
                p[1] = 0.0;
            }
        }
        check_distinct(&points)?;
        Ok(PointPattern { dim, points, ghost })
    }

    /// All-real pattern.
    pub fn real(dim: Dim, points: Vec<Point>) -> Result<Self, GeometryError> {
        let ghost = alloc::vec![false; points.len()];
        PointPattern::new(dim, points, ghost)
    }

    pub fn from_1d(xs: &[f64]) -> Result<Self, GeometryError> {
        PointPattern::real(Dim::One, xs.iter().map(|&x| [x, 0.0]).collect())
    }

    pub fn empty(dim: Dim) -> Self {
        PointPattern {
            dim,
            points: Vec::new(),
            ghost: Vec::new(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn ghost_flags(&self) -> &[bool] {
        &self.ghost
    }

    pub fn is_ghost(&self, i: usize) -> bool {
        self.ghost[i]
    }

    /// `n(phi ∩ A)`: number of non-ghost points.
    pub fn real_count(&self) -> usize {
        self.ghost.iter().filter(|g| !**g).count()
    }

    pub fn real_points(&self) -> impl Iterator<Item = Point> + '_ {
        self.points
            .iter()
            .zip(&self.ghost)
            .filter(|(_, g)| !**g)
            .map(|(p, _)| *p)
    }

    pub fn check_within(&self, window: &Window) -> Result<(), GeometryError> {
        if window.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: window.dim().get(),
                got: self.dim.get(),
            });
        }
        match self.points.iter().position(|p| !window.contains(*p)) {
            Some(index) => Err(GeometryError::OutsideWindow { index }),
            None => Ok(()),
        }
    }

    /// Appends a point, rejecting exact duplicates of existing points.
    pub fn push(&mut self, p: Point, ghost: bool) -> Result<usize, GeometryError> {
        let p = if self.dim == Dim::One { [p[0], 0.0] } else { p };
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(GeometryError::NonFinite {
                index: self.points.len(),
            });
        }
        if let Some(first) = self.points.iter().position(|q| *q == p) {
            return Err(GeometryError::DuplicatePoint {
                first,
                second: self.points.len(),
            });
        }
        self.points.push(p);
        self.ghost.push(ghost);
        Ok(self.points.len() - 1)
    }

    /// Pattern with every window vertex added as a ghost point, skipping
    /// vertices already present in the pattern.
    pub fn with_window_ghosts(&self, window: &Window) -> PointPattern {
        let mut out = self.clone();
        for c in window.corners() {
            if !out.points.contains(&c) {
                out.points.push(c);
                out.ghost.push(true);
            }
        }
        out
    }

    pub(crate) fn with_points(&self, points: Vec<Point>) -> PointPattern {
        PointPattern {
            dim: self.dim,
            points,
            ghost: self.ghost.clone(),
        }
    }

    /// Bounding-box diagonal; zero for fewer than two points.
    pub fn bbox_diameter(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        libm::hypot(hi[0] - lo[0], hi[1] - lo[1])
    }
}

fn check_distinct(points: &[Point]) -> Result<(), GeometryError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (first, second) = if w[0] < w[1] {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            };
            return Err(GeometryError::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}
