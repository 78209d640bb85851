use alloc::vec::Vec;

use super::EstimatorError;
use crate::geometry::{build_delaunay, Point, PointPattern, Tessellation, Window};

/// Edge correction for the DTFE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Correction {
    /// Add the window's endpoints (line) or corners (plane) as ghost points.
    GhostBoundary,
    /// Tessellate the observed points only; the field is zero off their hull.
    None,
}

#[derive(Debug, Clone)]
enum Field {
    /// Fewer than `d + 1` real points: `n / |A|` everywhere in the window.
    Constant(f64),
    Tessellated {
        tess: Tessellation,
        cell_value: Vec<f64>,
    },
}

/// A DTFE field: constant on each Delaunay cell.
#[derive(Debug, Clone)]
pub struct IntensityEstimate {
    window: Window,
    correction: Correction,
    real_count: usize,
    field: Field,
}

impl IntensityEstimate {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn correction(&self) -> Correction {
        self.correction
    }

    /// `n(φ ∩ A)`.
    pub fn real_count(&self) -> usize {
        self.real_count
    }

    /// `None` when the field fell back to the constant `n / |A|`.
    pub fn tessellation(&self) -> Option<&Tessellation> {
        match &self.field {
            Field::Tessellated { tess, .. } => Some(tess),
            Field::Constant(_) => None,
        }
    }

    pub fn cell_values(&self) -> &[f64] {
        match &self.field {
            Field::Tessellated { cell_value, .. } => cell_value,
            Field::Constant(_) => &[],
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.field {
            Field::Constant(c) => Some(c),
            Field::Tessellated { .. } => None,
        }
    }

    /// `(d + 1) / |W(x_i)|`, the estimate at data point `i`.
    pub fn vertex_value(&self, i: usize) -> f64 {
        match &self.field {
            Field::Tessellated { tess, .. } => {
                tess.dim().simplex_size() as f64 / tess.contiguous_cell_volume(i)
            }
            Field::Constant(c) => *c,
        }
    }
}

/// Builds the DTFE of the real points of `pattern` observed in `window`.
///
/// Each cell carries `Σ 1/|W(x)|` over its real vertices, i.e. the average
/// of `(d + 1)/|W(x)|` over the `d + 1` vertices with ghost vertices
/// contributing zero. Ghosts still shape the cells and the volumes `|W|`.
pub fn dtfe_field(
    pattern: &PointPattern,
    window: &Window,
    correction: Correction,
) -> Result<IntensityEstimate, EstimatorError> {
    pattern.check_within(window)?;
    let n = pattern.real_count();
    let d1 = pattern.dim().simplex_size();
    if n < d1 {
        return Ok(IntensityEstimate {
            window: *window,
            correction,
            real_count: n,
            field: Field::Constant(n as f64 / window.volume()),
        });
    }
    let augmented = match correction {
        Correction::GhostBoundary => pattern.with_window_ghosts(window),
        Correction::None => pattern.clone(),
    };
    let tess = build_delaunay(&augmented)?;
    let ghost = tess.base().ghost_flags();
    let inv_w: Vec<f64> = tess
        .contiguous_volumes()
        .iter()
        .zip(ghost)
        .map(|(w, g)| if *g { 0.0 } else { 1.0 / w })
        .collect();
    let cell_value = tess
        .cells()
        .map(|c| c.iter().map(|&v| inv_w[v]).sum())
        .collect();
    Ok(IntensityEstimate {
        window: *window,
        correction,
        real_count: n,
        field: Field::Tessellated { tess, cell_value },
    })
}

/// Field value at `x0`; zero outside the tessellated hull (or outside the
/// window for the constant fallback). Points on cell boundaries take the
/// value of the incident cell with the smallest id.
pub fn dtfe_evaluate(est: &IntensityEstimate, x0: Point) -> f64 {
    match &est.field {
        Field::Constant(c) => {
            if est.window.contains(x0) {
                *c
            } else {
                0.0
            }
        }
        Field::Tessellated { tess, cell_value } => match tess.locate_cell(x0) {
            Some(j) => cell_value[j],
            None => 0.0,
        },
    }
}

/// Contribution of real point `i` to the field at `x0`: `1/|W(x_i)|` when
/// `x0` lies in a cell having `x_i` as a vertex, and `(d + 1)/|W(x_i)|` at
/// `x0 = x_i`. Summed over all real points this reproduces
/// [`dtfe_evaluate`] away from vertices.
pub fn adaptive_kernel_g(
    est: &IntensityEstimate,
    x0: Point,
    i: usize,
) -> Result<f64, EstimatorError> {
    match &est.field {
        Field::Constant(_) => Ok(if est.window.contains(x0) {
            1.0 / est.window.volume()
        } else {
            0.0
        }),
        Field::Tessellated { tess, .. } => {
            if tess.base().is_ghost(i) {
                return Err(EstimatorError::GhostPoint(i));
            }
            let w = tess.contiguous_cell_volume(i);
            if tess.base().point(i) == x0 {
                return Ok(tess.dim().simplex_size() as f64 / w);
            }
            Ok(match tess.locate_cell(x0) {
                Some(j) if tess.cell(j).contains(&i) => 1.0 / w,
                _ => 0.0,
            })
        }
    }
}

/// `∫ g(x0 | x_i) dx0`, evaluated cell by cell.
pub fn kernel_g_integral(est: &IntensityEstimate, i: usize) -> f64 {
    match &est.field {
        Field::Constant(_) => 1.0,
        Field::Tessellated { tess, .. } => {
            let w = tess.contiguous_cell_volume(i);
            tess.incidence(i)
                .iter()
                .map(|&j| tess.cell_volume(j) / w)
                .sum()
        }
    }
}

/// `∫_A λ̂ = Σ_j |D_j| λ̂_j`; equals the number of real points.
pub fn total_mass(est: &IntensityEstimate) -> f64 {
    match &est.field {
        Field::Constant(c) => c * est.window.volume(),
        Field::Tessellated { tess, cell_value } => tess
            .cell_volumes()
            .iter()
            .zip(cell_value)
            .map(|(v, l)| v * l)
            .sum(),
    }
}
