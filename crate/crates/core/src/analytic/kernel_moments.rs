use super::nested::Nested;
use super::AnalyticError;
use crate::estimators::{ball_window_volume, Bandwidth};
use crate::geometry::{Dim, Point, Window};
use crate::pointprocess::Intensity;
use crate::quadrature::QuadratureSpec;

/// `∫_{b(x0, h) ∩ A} f(x) dx`: one adaptive integral on the line, an
/// integral over chords in the plane. `extra_breaks` are abscissae where
/// `f` has kinks.
fn integrate_ball_window<F: Fn(Point) -> f64>(
    nest: &Nested,
    f: F,
    x0: Point,
    h: f64,
    window: &Window,
    extra_breaks: &[f64],
) -> Result<f64, AnalyticError> {
    let lo = window.lo();
    let hi = window.hi();
    let a = (x0[0] - h).max(lo[0]);
    let b = (x0[0] + h).min(hi[0]);
    let mut cuts = alloc::vec![a, b];
    cuts.extend(extra_breaks.iter().copied().filter(|&c| c > a && c < b));
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += match window.dim() {
            Dim::One => nest.outer(|x| f([x, 0.0]), pair[0], pair[1])?,
            Dim::Two => nest.outer(
                |x| {
                    let dx = x - x0[0];
                    let c = libm::sqrt((h * h - dx * dx).max(0.0));
                    let ylo = (x0[1] - c).max(lo[1]);
                    let yhi = (x0[1] + c).min(hi[1]);
                    nest.inner(|y| f([x, y]), ylo, yhi)
                },
                pair[0],
                pair[1],
            )?,
        };
    }
    Ok(total)
}

/// `∫_{b(x0, h) ∩ A} f(x) dx` by adaptive quadrature.
pub fn integrate_over_ball_window<F: Fn(Point) -> f64>(
    f: F,
    x0: Point,
    h: Bandwidth,
    window: &Window,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    integrate_ball_window(&Nested::new(spec), f, x0, h.get(), window, &[])
}

fn check_x0(x0: Point, window: &Window) -> Result<(), AnalyticError> {
    if window.contains(x0) {
        Ok(())
    } else {
        Err(AnalyticError::Domain("x0 must lie in the window"))
    }
}

/// Mean and variance of the Berman–Diggle estimator at `x0` under a
/// Poisson process: `Λ(b ∩ A)/|b ∩ A|` and `Λ(b ∩ A)/|b ∩ A|²`.
pub fn bd_moments_poisson<I: Intensity + ?Sized>(
    intensity: &I,
    window: &Window,
    x0: Point,
    h: Bandwidth,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), AnalyticError> {
    check_x0(x0, window)?;
    let area = ball_window_volume(x0, h, window);
    let mass = integrate_over_ball_window(|x| intensity.evaluate(x), x0, h, window, spec)?;
    Ok((mass / area, mass / (area * area)))
}

/// Variance of the mass-preserving kernel estimator at `x0` under a
/// Poisson process: `∫_{b(x0, h) ∩ A} λ(x) / |b(x, h) ∩ A|² dx`.
pub fn kernelk_variance_poisson<I: Intensity + ?Sized>(
    intensity: &I,
    window: &Window,
    x0: Point,
    h: Bandwidth,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    check_x0(x0, window)?;
    // |b(x, h) ∩ A| has kinks where the ball starts touching the boundary
    let breaks = [window.lo()[0] + h.get(), window.hi()[0] - h.get()];
    integrate_ball_window(
        &Nested::new(spec),
        |x| {
            let v = ball_window_volume(x, h, window);
            intensity.evaluate(x) / (v * v)
        },
        x0,
        h.get(),
        window,
        &breaks,
    )
}
