use alloc::vec::Vec;

use super::delaunay::NONE;
use super::predicates::{circumcircle, orient, signed_area};
use super::{Dim, Point, PointPattern};

/// Circumball of a Delaunay cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// Perturbation applied to one point to break an exact cocircularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    pub index: usize,
    pub offset: Point,
}

/// Delaunay tessellation of a point pattern together with the quantities
/// the intensity estimators need: cell volumes, circumballs, vertex
/// incidence, Delaunay neighbours and contiguous Voronoi cell volumes
/// `|W(x)|`.
///
/// Cells are stored as `d + 1` point indices. Planar cells are
/// counter-clockwise with the smallest index first, sorted
/// lexicographically; linear cells are ordered left to right.
#[derive(Debug, Clone)]
pub struct Tessellation {
    base: PointPattern,
    cells: Vec<[usize; 3]>,
    adjacency: Vec<[usize; 3]>,
    cell_volume: Vec<f64>,
    circumball: Vec<Ball>,
    incidence: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    contiguous_volume: Vec<f64>,
    on_hull: Vec<bool>,
    jitter: Vec<Jitter>,
}

impl Tessellation {
    pub(crate) fn from_cells(
        base: PointPattern,
        cells: Vec<[usize; 3]>,
        adjacency: Vec<[usize; 3]>,
        jitter: Vec<Jitter>,
    ) -> Self {
        let n = base.len();
        let k = base.dim().simplex_size();
        let pts = base.points();
        let mut cell_volume = Vec::with_capacity(cells.len());
        let mut circumball = Vec::with_capacity(cells.len());
        for c in &cells {
            match base.dim() {
                Dim::One => {
                    let (a, b) = (pts[c[0]][0], pts[c[1]][0]);
                    cell_volume.push(b - a);
                    circumball.push(Ball {
                        center: [0.5 * (a + b), 0.0],
                        radius: 0.5 * (b - a),
                    });
                }
                Dim::Two => {
                    cell_volume.push(signed_area(pts[c[0]], pts[c[1]], pts[c[2]]));
                    let (center, radius) = circumcircle(pts[c[0]], pts[c[1]], pts[c[2]]);
                    circumball.push(Ball { center, radius });
                }
            }
        }
        let mut incidence = alloc::vec![Vec::new(); n];
        for (j, c) in cells.iter().enumerate() {
            for &v in &c[..k] {
                incidence[v].push(j);
            }
        }
        let mut neighbors = alloc::vec![Vec::new(); n];
        for c in &cells {
            for a in 0..k {
                for b in 0..k {
                    if a != b {
                        neighbors[c[a]].push(c[b]);
                    }
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let contiguous_volume = incidence
            .iter()
            .map(|inc| inc.iter().map(|&j| cell_volume[j]).sum())
            .collect();
        let mut on_hull = alloc::vec![false; n];
        for (j, adj) in adjacency.iter().enumerate() {
            for slot in 0..k {
                if adj[slot] == NONE {
                    for m in 0..k {
                        if m != slot {
                            on_hull[cells[j][m]] = true;
                        }
                    }
                }
            }
        }
        Tessellation {
            base,
            cells,
            adjacency,
            cell_volume,
            circumball,
            incidence,
            neighbors,
            contiguous_volume,
            on_hull,
            jitter,
        }
    }

    pub fn dim(&self) -> Dim {
        self.base.dim()
    }

    /// The tessellated pattern, including any jitter that was applied.
    pub fn base(&self) -> &PointPattern {
        &self.base
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Vertex indices of cell `j` (`d + 1` of them).
    pub fn cell(&self, j: usize) -> &[usize] {
        &self.cells[j][..self.dim().simplex_size()]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let k = self.dim().simplex_size();
        self.cells.iter().map(move |c| &c[..k])
    }

    pub fn cell_volume(&self, j: usize) -> f64 {
        self.cell_volume[j]
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volume
    }

    pub fn circumball(&self, j: usize) -> Ball {
        self.circumball[j]
    }

    /// Cells having point `i` as a vertex.
    pub fn incidence(&self, i: usize) -> &[usize] {
        &self.incidence[i]
    }

    /// Delaunay neighbours `N(x_i)`, sorted.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Cell sharing the facet opposite vertex slot `k` of cell `j`.
    pub fn adjacent_cell(&self, j: usize, k: usize) -> Option<usize> {
        let a = self.adjacency[j][k];
        (a != NONE).then_some(a)
    }

    pub fn on_hull(&self, i: usize) -> bool {
        self.on_hull[i]
    }

    pub fn jitter(&self) -> &[Jitter] {
        &self.jitter
    }

    /// `|W(x_i)|`: total volume of the cells incident to point `i`.
    pub fn contiguous_cell_volume(&self, i: usize) -> f64 {
        self.contiguous_volume[i]
    }

    pub fn contiguous_volumes(&self) -> &[f64] {
        &self.contiguous_volume
    }

    /// `|W(x_i) ∩ W(x_j)|`: volume of the cells containing both points.
    /// Zero for points that are not Delaunay neighbours.
    pub fn shared_contiguous_volume(&self, i: usize, j: usize) -> f64 {
        debug_assert_ne!(i, j);
        self.incidence[i]
            .iter()
            .filter(|&&c| self.cell(c).contains(&j))
            .map(|&c| self.cell_volume[c])
            .sum()
    }

    /// Total volume of all cells, the d-volume of the convex hull.
    pub fn total_volume(&self) -> f64 {
        self.cell_volume.iter().sum()
    }

    /// Closed containment of `x0` in cell `j`.
    pub fn cell_contains(&self, j: usize, x0: Point) -> bool {
        let pts = self.base.points();
        let c = self.cells[j];
        match self.dim() {
            Dim::One => x0[0] >= pts[c[0]][0] && x0[0] <= pts[c[1]][0],
            Dim::Two => (0..3).all(|k| orient(pts[c[(k + 1) % 3]], pts[c[(k + 2) % 3]], x0) >= 0.0),
        }
    }

    /// Cell whose closed simplex contains `x0`, or `None` outside the hull.
    /// A point on a shared facet or vertex goes to the incident cell with
    /// the smallest id.
    pub fn locate_cell(&self, x0: Point) -> Option<usize> {
        self.locate_cell_from(x0, 0)
    }

    /// As [`locate_cell`](Self::locate_cell), starting the walk at `hint`.
    pub fn locate_cell_from(&self, x0: Point, hint: usize) -> Option<usize> {
        if self.cells.is_empty() {
            return None;
        }
        match self.dim() {
            Dim::One => self.locate_1d(x0[0]),
            Dim::Two => self.locate_2d(x0, hint.min(self.cells.len() - 1)),
        }
    }

    fn locate_1d(&self, x: f64) -> Option<usize> {
        let pts = self.base.points();
        let first = pts[self.cells[0][0]][0];
        let last = pts[self.cells[self.cells.len() - 1][1]][0];
        if !(x >= first && x <= last) {
            return None;
        }
        // first cell whose right end is >= x
        let j = self.cells.partition_point(|c| pts[c[1]][0] < x);
        Some(j)
    }

    fn locate_2d(&self, x0: Point, start: usize) -> Option<usize> {
        let pts = self.base.points();
        let mut t = start;
        let mut prev = NONE;
        loop {
            let c = self.cells[t];
            let mut next = None;
            let mut on_edge = false;
            for k in 0..3 {
                let o = orient(pts[c[(k + 1) % 3]], pts[c[(k + 2) % 3]], x0);
                if o < 0.0 {
                    let nb = self.adjacency[t][k];
                    if nb == NONE {
                        return None;
                    }
                    if nb != prev || next.is_none() {
                        next = Some(nb);
                        if nb != prev {
                            break;
                        }
                    }
                } else if o == 0.0 {
                    on_edge = true;
                }
            }
            match next {
                Some(nb) => {
                    prev = t;
                    t = nb;
                }
                None if !on_edge => return Some(t),
                None => {
                    let c = self.cells[t];
                    let best = c
                        .iter()
                        .flat_map(|&v| self.incidence[v].iter().copied())
                        .filter(|&j| self.cell_contains(j, x0))
                        .min();
                    return best.or(Some(t));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_delaunay;
    use super::*;

    fn tri() -> Tessellation {
        let p =
            PointPattern::real(Dim::Two, alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        build_delaunay(&p).unwrap()
    }

    #[test]
    fn line_cells_and_volumes() {
        let p = PointPattern::from_1d(&[2.0, -1.0, 0.0]).unwrap();
        let t = build_delaunay(&p).unwrap();
        assert_eq!(t.num_cells(), 2);
        assert_eq!(t.cell(0), &[1, 2]);
        assert_eq!(t.cell(1), &[2, 0]);
        assert_eq!(t.cell_volumes(), &[1.0, 2.0]);
        assert_eq!(t.contiguous_cell_volume(2), 3.0);
        assert_eq!(t.contiguous_cell_volume(1), 1.0);
        assert_eq!(t.shared_contiguous_volume(2, 0), 2.0);
        assert_eq!(t.shared_contiguous_volume(1, 0), 0.0);
        assert!(t.on_hull(1) && t.on_hull(0) && !t.on_hull(2));
    }

    #[test]
    fn line_location_with_tie_break() {
        let p = PointPattern::from_1d(&[-1.0, 0.0, 2.0]).unwrap();
        let t = build_delaunay(&p).unwrap();
        assert_eq!(t.locate_cell([1.0, 0.0]), Some(1));
        assert_eq!(t.locate_cell([-5.0, 0.0]), None);
        assert_eq!(t.locate_cell([0.0, 0.0]), Some(0));
        assert_eq!(t.locate_cell([2.0, 0.0]), Some(1));
        assert_eq!(t.locate_cell([-1.0, 0.0]), Some(0));
    }

    #[test]
    fn single_triangle() {
        let t = tri();
        assert_eq!(t.num_cells(), 1);
        assert!((t.cell_volume(0) - 0.5).abs() < 1e-15);
        assert_eq!(t.locate_cell([0.2, 0.2]), Some(0));
        assert_eq!(t.locate_cell([0.6, 0.6]), None);
        assert_eq!(t.shared_contiguous_volume(0, 2), 0.5);
        assert_eq!(t.neighbors(1), &[0, 2]);
    }

    #[test]
    fn square_with_center_has_full_star() {
        let p = PointPattern::real(
            Dim::Two,
            alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        )
        .unwrap();
        let t = build_delaunay(&p).unwrap();
        assert_eq!(t.num_cells(), 4);
        assert!((t.contiguous_cell_volume(4) - 1.0).abs() < 1e-12);
        let direct: f64 = t.incidence(4).iter().map(|&j| t.cell_volume(j)).sum();
        assert_eq!(direct, t.contiguous_cell_volume(4));
    }

    #[test]
    fn facet_points_take_smallest_cell() {
        let p = PointPattern::real(
            Dim::Two,
            alloc::vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        )
        .unwrap();
        let t = build_delaunay(&p).unwrap();
        // the centre is a vertex of every cell
        assert_eq!(t.locate_cell([0.5, 0.5]), Some(0));
        for j in 0..t.num_cells() {
            assert_eq!(t.locate_cell_from([0.5, 0.5], j), Some(0));
        }
    }
}
