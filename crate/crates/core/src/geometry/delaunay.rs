//! Delaunay construction: sort-and-pair on the line, incremental
//! Bowyer–Watson in the plane.
//!
//! The planar builder keeps the convex hull closed with a single symbolic
//! vertex at infinity instead of a finite super-triangle, so every hull
//! triangle survives and no point is ever outside the current triangulation.

use alloc::vec::Vec;

use super::predicates::{incircle, orient};
use super::tessellation::{Jitter, Tessellation};
use super::{Dim, GeometryError, Point, PointPattern};

pub(crate) const NONE: usize = usize::MAX;

const JITTER_RELATIVE: f64 = 1e-12;
const JITTER_ATTEMPTS: u64 = 4;

/// Delaunay tessellation of `pattern` (ghost points included).
///
/// Exactly cocircular configurations that would make the tessellation
/// ambiguous are broken by a deterministic perturbation of the points
/// involved, of size `1e-12` times the bounding-box diameter. The applied
/// offsets are kept in [`Tessellation::jitter`].
pub fn build_delaunay(pattern: &PointPattern) -> Result<Tessellation, GeometryError> {
    let need = pattern.dim().simplex_size();
    if pattern.len() < need {
        return Err(GeometryError::TooFewPoints {
            needed: need,
            got: pattern.len(),
        });
    }
    match pattern.dim() {
        Dim::One => Ok(build_1d(pattern)),
        Dim::Two => build_2d(pattern),
    }
}

fn build_1d(pattern: &PointPattern) -> Tessellation {
    let pts = pattern.points();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_unstable_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]));
    let m = order.len() - 1;
    let cells: Vec<[usize; 3]> = order.windows(2).map(|w| [w[0], w[1], NONE]).collect();
    let adjacency: Vec<[usize; 3]> = (0..m)
        .map(|j| {
            // slot 0: neighbour across vertex 0 (to the left), slot 1: to the right
            let left = if j == 0 { NONE } else { j - 1 };
            let right = if j + 1 == m { NONE } else { j + 1 };
            [right, left, NONE]
        })
        .collect();
    Tessellation::from_cells(pattern.clone(), cells, adjacency, Vec::new())
}

fn build_2d(pattern: &PointPattern) -> Result<Tessellation, GeometryError> {
    let mut pts = pattern.points().to_vec();
    let scale = JITTER_RELATIVE * pattern.bbox_diameter();
    let mut jitter: Vec<Jitter> = Vec::new();
    for attempt in 0..JITTER_ATTEMPTS {
        let (cells, adjacency) = triangulate(&pts)?;
        let flagged = cocircular_vertices(&pts, &cells, &adjacency);
        if flagged.is_empty() {
            return Ok(Tessellation::from_cells(
                pattern.with_points(pts),
                cells,
                adjacency,
                jitter,
            ));
        }
        for i in flagged {
            let offset = jitter_offset(i as u64, attempt, scale);
            pts[i][0] += offset[0];
            pts[i][1] += offset[1];
            match jitter.iter_mut().find(|j| j.index == i) {
                Some(j) => {
                    j.offset[0] += offset[0];
                    j.offset[1] += offset[1];
                }
                None => jitter.push(Jitter { index: i, offset }),
            }
        }
    }
    Err(GeometryError::DegenerateInput(
        "cocircular points survive perturbation",
    ))
}

/// Vertices of every quadruple that is exactly cocircular across an
/// interior edge.
fn cocircular_vertices(pts: &[Point], cells: &[[usize; 3]], adj: &[[usize; 3]]) -> Vec<usize> {
    let mut out = Vec::new();
    for (t, cell) in cells.iter().enumerate() {
        for k in 0..3 {
            let u = adj[t][k];
            if u == NONE || u < t {
                continue;
            }
            let back = adj[u].iter().position(|&x| x == t).unwrap();
            let q = cells[u][back];
            let [a, b, c] = *cell;
            if incircle(pts[a], pts[b], pts[c], pts[q]) == 0.0 {
                out.extend_from_slice(&[a, b, c, q]);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn jitter_offset(index: u64, attempt: u64, scale: f64) -> Point {
    let h1 = splitmix64(index.wrapping_mul(0x1000_0000_01B3) ^ attempt);
    let h2 = splitmix64(h1);
    let unit = |h: u64| (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
    [scale * unit(h1), scale * unit(h2)]
}

/// Hilbert-curve rank of each point on a 2^16 grid over the bounding box.
fn hilbert_order(pts: &[Point]) -> Vec<usize> {
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let side = 65535.0;
    let span = [
        (hi[0] - lo[0]).max(f64::MIN_POSITIVE),
        (hi[1] - lo[1]).max(f64::MIN_POSITIVE),
    ];
    let keys: Vec<u64> = pts
        .iter()
        .map(|p| {
            let x = ((p[0] - lo[0]) / span[0] * side) as u32;
            let y = ((p[1] - lo[1]) / span[1] * side) as u32;
            hilbert_index(x, y)
        })
        .collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by_key(|&i| (keys[i], i));
    order
}

fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n: u32 = 1 << 16;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            core::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

#[derive(Clone, Copy)]
struct Tri {
    v: [usize; 3],
    n: [usize; 3],
}

struct Builder<'a> {
    pts: &'a [Point],
    inf: usize,
    tris: Vec<Tri>,
    alive: Vec<bool>,
    free: Vec<usize>,
    in_cavity: Vec<u32>,
    stamp: u32,
    last: usize,
    stack: Vec<usize>,
    cavity: Vec<usize>,
    boundary: Vec<(usize, usize, usize, usize)>,
}

impl<'a> Builder<'a> {
    fn is_infinite(&self, t: usize) -> bool {
        self.tris[t].v.contains(&self.inf)
    }

    fn conflict(&self, t: usize, p: Point) -> bool {
        let v = self.tris[t].v;
        if let Some(k) = v.iter().position(|&x| x == self.inf) {
            // rotate so the infinite vertex is last: [a, b, inf]; outside is left of a -> b
            let a = self.pts[v[(k + 1) % 3]];
            let b = self.pts[v[(k + 2) % 3]];
            let o = orient(a, b, p);
            if o > 0.0 {
                return true;
            }
            if o < 0.0 {
                return false;
            }
            strictly_between(a, b, p)
        } else {
            incircle(self.pts[v[0]], self.pts[v[1]], self.pts[v[2]], p) > 0.0
        }
    }

    /// Visibility walk to a triangle in conflict with `p`.
    fn locate(&self, p: Point) -> usize {
        let mut t = self.last;
        if self.is_infinite(t) {
            let k = self.tris[t].v.iter().position(|&x| x == self.inf).unwrap();
            t = self.tris[t].n[k];
        }
        let mut prev = NONE;
        loop {
            let tri = self.tris[t];
            let mut next = NONE;
            for k in 0..3 {
                let nb = tri.n[k];
                if nb == prev {
                    continue;
                }
                let a = self.pts[tri.v[(k + 1) % 3]];
                let b = self.pts[tri.v[(k + 2) % 3]];
                if orient(a, b, p) < 0.0 {
                    next = nb;
                    break;
                }
            }
            if next == NONE {
                // p is not beyond any edge other than possibly the one we came from
                let k = tri.n.iter().position(|&x| x == prev);
                if let Some(k) = k {
                    let a = self.pts[tri.v[(k + 1) % 3]];
                    let b = self.pts[tri.v[(k + 2) % 3]];
                    if orient(a, b, p) < 0.0 {
                        next = prev;
                    }
                }
            }
            if next == NONE {
                return t;
            }
            if self.is_infinite(next) {
                return next;
            }
            prev = t;
            t = next;
        }
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(slot) = self.free.pop() {
            self.tris[slot] = tri;
            self.alive[slot] = true;
            self.in_cavity[slot] = 0;
            slot
        } else {
            self.tris.push(tri);
            self.alive.push(true);
            self.in_cavity.push(0);
            self.tris.len() - 1
        }
    }

    fn insert(&mut self, pi: usize) {
        let p = self.pts[pi];
        let start = self.locate(p);
        debug_assert!(self.conflict(start, p));
        self.stamp += 1;
        let stamp = self.stamp;
        self.cavity.clear();
        self.boundary.clear();
        self.stack.clear();
        self.stack.push(start);
        self.in_cavity[start] = stamp;
        while let Some(t) = self.stack.pop() {
            self.cavity.push(t);
            let tri = self.tris[t];
            for k in 0..3 {
                let nb = tri.n[k];
                if self.in_cavity[nb] == stamp {
                    continue;
                }
                if self.conflict(nb, p) {
                    self.in_cavity[nb] = stamp;
                    self.stack.push(nb);
                } else {
                    self.boundary
                        .push((tri.v[(k + 1) % 3], tri.v[(k + 2) % 3], nb, t));
                }
            }
        }
        for &t in &self.cavity {
            self.alive[t] = false;
        }
        let cavity = core::mem::take(&mut self.cavity);
        let boundary = core::mem::take(&mut self.boundary);
        let mut created: Vec<(usize, usize, usize)> = Vec::with_capacity(boundary.len());
        for &(e0, e1, outer, old) in &boundary {
            let t = self.alloc(Tri {
                v: [e0, e1, pi],
                n: [NONE, NONE, outer],
            });
            let back = self.tris[outer].n.iter().position(|&x| x == old).unwrap();
            self.tris[outer].n[back] = t;
            created.push((e0, e1, t));
        }
        // new triangle [e0, e1, p]: across e0 lies the one starting at e1,
        // across e1 lies the one ending at e0
        created.sort_unstable_by_key(|c| c.0);
        for i in 0..created.len() {
            let (e0, e1, t) = created[i];
            let after = created[created.binary_search_by_key(&e1, |c| c.0).unwrap()].2;
            self.tris[t].n[0] = after;
            self.tris[after].n[1] = t;
            let _ = e0;
        }
        for &t in &cavity {
            self.free.push(t);
        }
        self.last = created
            .iter()
            .map(|c| c.2)
            .find(|&t| !self.is_infinite(t))
            .unwrap_or(created[0].2);
        self.cavity = cavity;
        self.boundary = boundary;
    }
}

fn strictly_between(a: Point, b: Point, p: Point) -> bool {
    let dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
    let len2 = (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
    dot > 0.0 && dot < len2
}

/// Triangulates distinct planar points. Returns counter-clockwise cells in
/// canonical order (smallest vertex first, lexicographically sorted) and,
/// for each cell, the neighbouring cell across the edge opposite each
/// vertex (`NONE` on the hull).
pub(crate) fn triangulate(
    pts: &[Point],
) -> Result<(Vec<[usize; 3]>, Vec<[usize; 3]>), GeometryError> {
    let n = pts.len();
    if n < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, got: n });
    }
    let order = hilbert_order(pts);
    let a = order[0];
    let b = order[1];
    let Some(ci) = order[2..]
        .iter()
        .position(|&c| orient(pts[a], pts[b], pts[c]) != 0.0)
    else {
        return Err(GeometryError::DegenerateInput("all points are collinear"));
    };
    let c = order[2 + ci];
    let (b, c) = if orient(pts[a], pts[b], pts[c]) > 0.0 {
        (b, c)
    } else {
        (c, b)
    };
    let inf = n;
    let mut init = alloc::vec![
        Tri {
            v: [a, b, c],
            n: [NONE; 3]
        },
        Tri {
            v: [b, a, inf],
            n: [NONE; 3]
        },
        Tri {
            v: [c, b, inf],
            n: [NONE; 3]
        },
        Tri {
            v: [a, c, inf],
            n: [NONE; 3]
        },
    ];
    for t in 0..4 {
        for k in 0..3 {
            let e0 = init[t].v[(k + 1) % 3];
            let e1 = init[t].v[(k + 2) % 3];
            for u in 0..4 {
                if u == t {
                    continue;
                }
                for m in 0..3 {
                    if init[u].v[(m + 1) % 3] == e1 && init[u].v[(m + 2) % 3] == e0 {
                        init[t].n[k] = u;
                    }
                }
            }
        }
    }
    let mut builder = Builder {
        pts,
        inf,
        tris: init,
        alive: alloc::vec![true; 4],
        free: Vec::new(),
        in_cavity: alloc::vec![0; 4],
        stamp: 0,
        last: 0,
        stack: Vec::new(),
        cavity: Vec::new(),
        boundary: Vec::new(),
    };
    for &p in &order {
        if p == a || p == b || p == c {
            continue;
        }
        builder.insert(p);
    }

    // collect finite triangles in canonical form
    let mut finite: Vec<([usize; 3], usize)> = Vec::new();
    for (t, tri) in builder.tris.iter().enumerate() {
        if !builder.alive[t] || tri.v.contains(&inf) {
            continue;
        }
        let k = (0..3).min_by_key(|&k| tri.v[k]).unwrap();
        let v = [tri.v[k], tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]];
        finite.push((v, t));
    }
    finite.sort_unstable();
    let mut id_of = alloc::vec![NONE; builder.tris.len()];
    for (id, &(_, t)) in finite.iter().enumerate() {
        id_of[t] = id;
    }
    let mut cells = Vec::with_capacity(finite.len());
    let mut adjacency = Vec::with_capacity(finite.len());
    for &(v, t) in &finite {
        let tri = builder.tris[t];
        let mut adj = [NONE; 3];
        for (k, &vk) in v.iter().enumerate() {
            let m = tri.v.iter().position(|&x| x == vk).unwrap();
            adj[k] = id_of[tri.n[m]];
        }
        cells.push(v);
        adjacency.push(adj);
    }
    Ok((cells, adjacency))
}
