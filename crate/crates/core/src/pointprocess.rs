//! Intensity functions and reproducible Poisson sampling.
//!
//! Replicate `r` of base seed `s` draws from the ChaCha8 stream `r` of the
//! key derived from `s`, so replicates can be generated in any order or in
//! parallel and still come out bit-identical.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::geometry::{Dim, GeometryError, Point, PointPattern, Window};
use crate::quadrature::{Quadrature, QuadratureError, QuadratureSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("intensity {value} exceeds declared upper bound {bound} at ({x}, {y})")]
    InvalidBound {
        value: f64,
        bound: f64,
        x: f64,
        y: f64,
    },
    #[error("intensity is negative on the window")]
    NegativeIntensity,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Base seed plus replicate index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub base: u64,
    pub replicate: u64,
}

impl Seed {
    pub fn new(base: u64, replicate: u64) -> Self {
        Seed { base, replicate }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.replicate);
        rng
    }
}

/// A nonnegative intensity function.
pub trait Intensity {
    fn evaluate(&self, x: Point) -> f64;

    /// A finite bound on `evaluate` over `window`.
    fn upper_bound(&self, window: &Window) -> f64;

    /// `Λ(a, b) = ∫_a^b λ(x) dx` along the first axis; adaptive quadrature
    /// unless overridden.
    fn cumulative(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let q = Quadrature::new(QuadratureSpec::new(1e-12, 1e-15, 10_000).unwrap());
        match q.integrate(|x| self.evaluate([x, 0.0]), a, b) {
            Ok(e) => e.value,
            Err(QuadratureError::NotConverged { value, .. }) => value,
            Err(_) => f64::NAN,
        }
    }

    /// Whether [`cumulative`](Self::cumulative) is a closed form.
    fn has_closed_form(&self) -> bool {
        false
    }

    /// `Some(rate)` for a constant intensity.
    fn as_constant(&self) -> Option<f64> {
        None
    }

    /// `Some((a, b))` when `λ(x) = a + b x` on the line.
    fn as_affine(&self) -> Option<(f64, f64)> {
        self.as_constant().map(|c| (c, 0.0))
    }
}

/// The intensity models that can be named in configuration files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityModel {
    Constant {
        rate: f64,
    },
    /// `λ(x) = a + b x`, on the line.
    Affine1d {
        a: f64,
        b: f64,
    },
}

impl IntensityModel {
    /// Checks nonnegativity on `window`.
    pub fn validate(&self, window: &Window) -> Result<(), ProcessError> {
        match *self {
            IntensityModel::Constant { rate } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(ProcessError::InvalidRate(rate));
                }
            }
            IntensityModel::Affine1d { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(ProcessError::InvalidRate(f64::NAN));
                }
                let lo = a + b * window.lo()[0];
                let hi = a + b * window.hi()[0];
                if lo < 0.0 || hi < 0.0 {
                    return Err(ProcessError::NegativeIntensity);
                }
            }
        }
        Ok(())
    }
}

impl Intensity for IntensityModel {
    fn evaluate(&self, x: Point) -> f64 {
        match *self {
            IntensityModel::Constant { rate } => rate,
            IntensityModel::Affine1d { a, b } => a + b * x[0],
        }
    }

    fn upper_bound(&self, window: &Window) -> f64 {
        match *self {
            IntensityModel::Constant { rate } => rate,
            IntensityModel::Affine1d { a, b } => {
                (a + b * window.lo()[0]).max(a + b * window.hi()[0])
            }
        }
    }

    fn cumulative(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match *self {
            IntensityModel::Constant { rate } => rate * (hi - lo),
            IntensityModel::Affine1d { a, b } => (hi - lo) * (a + 0.5 * b * (hi + lo)),
        }
    }

    fn has_closed_form(&self) -> bool {
        true
    }

    fn as_constant(&self) -> Option<f64> {
        match *self {
            IntensityModel::Constant { rate } => Some(rate),
            IntensityModel::Affine1d { a, b: 0.0 } => Some(a),
            IntensityModel::Affine1d { .. } => None,
        }
    }

    fn as_affine(&self) -> Option<(f64, f64)> {
        match *self {
            IntensityModel::Constant { rate } => Some((rate, 0.0)),
            IntensityModel::Affine1d { a, b } => Some((a, b)),
        }
    }
}

/// An intensity given by a closure and a declared upper bound.
pub struct FnIntensity<F> {
    f: F,
    bound: f64,
}

impl<F: Fn(Point) -> f64> FnIntensity<F> {
    pub fn new(f: F, bound: f64) -> Self {
        FnIntensity { f, bound }
    }
}

impl<F: Fn(Point) -> f64> Intensity for FnIntensity<F> {
    fn evaluate(&self, x: Point) -> f64 {
        (self.f)(x)
    }

    fn upper_bound(&self, _window: &Window) -> f64 {
        self.bound
    }
}

fn uniform_in<R: Rng>(window: &Window, rng: &mut R) -> Point {
    let lo = window.lo();
    let hi = window.hi();
    let x = lo[0] + (hi[0] - lo[0]) * rng.random::<f64>();
    match window.dim() {
        Dim::One => [x, 0.0],
        Dim::Two => [x, lo[1] + (hi[1] - lo[1]) * rng.random::<f64>()],
    }
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive mean");
    dist.sample(rng) as usize
}

/// Stationary Poisson process with the given rate on `window`.
pub fn sample_homogeneous_poisson(
    window: &Window,
    rate: f64,
    seed: Seed,
) -> Result<PointPattern, ProcessError> {
    sample_homogeneous_poisson_with(window, rate, &mut seed.rng())
}

pub fn sample_homogeneous_poisson_with<R: Rng>(
    window: &Window,
    rate: f64,
    rng: &mut R,
) -> Result<PointPattern, ProcessError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ProcessError::InvalidRate(rate));
    }
    let n = poisson_count(rate * window.volume(), rng);
    let points: Vec<Point> = (0..n).map(|_| uniform_in(window, rng)).collect();
    Ok(PointPattern::real(window.dim(), points)?)
}

/// Poisson process with intensity `λ(x)` on `window`, by independent
/// thinning of a stationary process at rate `intensity.upper_bound`.
pub fn sample_inhomogeneous_poisson<I: Intensity + ?Sized>(
    window: &Window,
    intensity: &I,
    seed: Seed,
) -> Result<PointPattern, ProcessError> {
    sample_inhomogeneous_poisson_with(window, intensity, &mut seed.rng())
}

pub fn sample_inhomogeneous_poisson_with<I: Intensity + ?Sized, R: Rng>(
    window: &Window,
    intensity: &I,
    rng: &mut R,
) -> Result<PointPattern, ProcessError> {
    let bound = intensity.upper_bound(window);
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(ProcessError::InvalidRate(bound));
    }
    let n = poisson_count(bound * window.volume(), rng);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = uniform_in(window, rng);
        let u: f64 = rng.random();
        let value = intensity.evaluate(x);
        if value > bound {
            return Err(ProcessError::InvalidBound {
                value,
                bound,
                x: x[0],
                y: x[1],
            });
        }
        if value < 0.0 {
            return Err(ProcessError::NegativeIntensity);
        }
        if u * bound < value {
            points.push(x);
        }
    }
    Ok(PointPattern::real(window.dim(), points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_is_reproducible() {
        let w = Window::rectangle((0.0, 2.0), (0.0, 3.0)).unwrap();
        let a = sample_homogeneous_poisson(&w, 5.0, Seed::new(42, 7)).unwrap();
        let b = sample_homogeneous_poisson(&w, 5.0, Seed::new(42, 7)).unwrap();
        assert_eq!(a, b);
        let c = sample_homogeneous_poisson(&w, 5.0, Seed::new(42, 8)).unwrap();
        assert_ne!(a, c);
        assert!(a.check_within(&w).is_ok());
    }

    #[test]
    fn invalid_rate() {
        let w = Window::interval(0.0, 1.0).unwrap();
        assert_eq!(
            sample_homogeneous_poisson(&w, 0.0, Seed::new(1, 0)),
            Err(ProcessError::InvalidRate(0.0))
        );
    }

    #[test]
    fn bound_violation_detected() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let bad = FnIntensity::new(|p: Point| 10.0 * p[0], 1.0);
        let r = sample_inhomogeneous_poisson(&w, &bad, Seed::new(3, 0));
        assert!(matches!(r, Err(ProcessError::InvalidBound { .. })));
    }

    #[test]
    fn affine_cumulative_is_additive() {
        let m = IntensityModel::Affine1d { a: 10.0, b: 5.0 };
        assert!((m.cumulative(-1.0, 1.0) - 20.0).abs() < 1e-14);
        let s = m.cumulative(-1.0, 0.3) + m.cumulative(0.3, 1.0);
        assert!((s - 20.0).abs() < 1e-13);
        // generic quadrature path agrees with the closed form
        let f = FnIntensity::new(|p: Point| 10.0 + 5.0 * p[0], 15.0);
        assert!((f.cumulative(-1.0, 1.0) - 20.0).abs() < 1e-11);
    }

    #[test]
    fn affine_validation() {
        let w = Window::interval(-1.0, 1.0).unwrap();
        assert!(IntensityModel::Affine1d { a: 1.0, b: 0.5 }
            .validate(&w)
            .is_ok());
        assert_eq!(
            IntensityModel::Affine1d { a: 1.0, b: 2.0 }.validate(&w),
            Err(ProcessError::NegativeIntensity)
        );
    }
}
