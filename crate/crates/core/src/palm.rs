//! Per-pattern statistics for the Palm expectations behind the DTFE's
//! asymptotic variance, computed at a point inserted into a Poisson sample.

use alloc::vec::Vec;

use crate::geometry::{build_delaunay, GeometryError, Point, PointPattern, Tessellation, Window};

/// Statistics of the contiguous cell of the inserted point `o`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PalmSample {
    /// `1 / |W(o)|`.
    pub inv_w0: f64,
    /// `(1 / |W(o)|) Σ_{y ∈ N(o)} |W(o) ∩ W(y)| / |W(y)|`.
    pub neighbor_term: f64,
    /// Number of Delaunay neighbours of `o`.
    pub neighbors: usize,
}

/// Whether `o` and all its neighbours have complete contiguous cells: none
/// on the hull, and every incident cell's circumball inside the window, so
/// that the cells agree with those of the unobserved process on the whole
/// space.
pub fn guard_ok(tess: &Tessellation, o: usize, window: &Window) -> bool {
    let mut vertices: Vec<usize> = Vec::with_capacity(tess.neighbors(o).len() + 1);
    vertices.push(o);
    vertices.extend_from_slice(tess.neighbors(o));
    vertices.iter().all(|&v| {
        !tess.on_hull(v)
            && tess.incidence(v).iter().all(|&j| {
                let b = tess.circumball(j);
                window.boundary_distance(b.center) >= b.radius && window.contains(b.center)
            })
    })
}

/// Inserts `origin` into `pattern`, tessellates, and returns the Palm
/// statistics of the inserted point, or `None` when the guard fails.
pub fn palm_statistics(
    pattern: &PointPattern,
    window: &Window,
    origin: Point,
) -> Result<Option<PalmSample>, GeometryError> {
    let mut augmented = pattern.clone();
    let o = augmented.push(origin, false)?;
    let tess = build_delaunay(&augmented)?;
    if !guard_ok(&tess, o, window) {
        return Ok(None);
    }
    let w0 = tess.contiguous_cell_volume(o);
    let sum: f64 = tess
        .neighbors(o)
        .iter()
        .map(|&y| tess.shared_contiguous_volume(o, y) / tess.contiguous_cell_volume(y))
        .sum();
    Ok(Some(PalmSample {
        inv_w0: 1.0 / w0,
        neighbor_term: sum / w0,
        neighbors: tess.neighbors(o).len(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dim;

    #[test]
    fn line_has_two_neighbours() {
        let w = Window::interval(-10.0, 10.0).unwrap();
        let p = PointPattern::from_1d(&[-3.0, -1.0, 2.0, 4.0]).unwrap();
        let s = palm_statistics(&p, &w, [0.0, 0.0]).unwrap().unwrap();
        assert_eq!(s.neighbors, 2);
        // W(o) = [-1, 2], W(-1) = [-3, 0], W(2) = [0, 4]
        assert!((s.inv_w0 - 1.0 / 3.0).abs() < 1e-15);
        let expected = (1.0 / 3.0 + 2.0 / 4.0) / 3.0;
        assert!((s.neighbor_term - expected).abs() < 1e-15);
    }

    #[test]
    fn hull_neighbour_fails_guard() {
        let w = Window::interval(-10.0, 10.0).unwrap();
        let p = PointPattern::from_1d(&[-3.0, 2.0, 4.0]).unwrap();
        assert_eq!(palm_statistics(&p, &w, [0.0, 0.0]).unwrap(), None);
    }

    #[test]
    fn square_ring() {
        let w = Window::rectangle((-10.0, 10.0), (-10.0, 10.0)).unwrap();
        let mut pts = alloc::vec![];
        for k in 0..12 {
            let a = k as f64 * core::f64::consts::PI / 6.0 + 0.1;
            pts.push([libm::cos(a), libm::sin(a) * 1.1]);
            pts.push([3.0 * libm::cos(a + 0.2), 3.0 * libm::sin(a + 0.2)]);
        }
        for &(x, y) in &[(-8.0, -8.0), (8.0, -8.0), (8.0, 8.0), (-8.0, 8.0)] {
            pts.push([x, y]);
        }
        let p = PointPattern::real(Dim::Two, pts).unwrap();
        let r = palm_statistics(&p, &w, [0.0, 0.0]).unwrap();
        // the outer corner cells have circumdisks poking out of the window
        if let Some(s) = r {
            assert!(s.inv_w0 > 0.0 && s.neighbors >= 3);
        }
    }
}
