//! Mean and second moment of the ghost-corrected DTFE at a fixed point of
//! `A = [-w, w]` under a Poisson process with intensity `λ(x)`.

use super::nested::{Cumulative, Nested};
use super::special::{exp_integral_e1_scaled, E1_SQUARE_MOMENT};
use super::AnalyticError;
use crate::pointprocess::Intensity;
use crate::quadrature::QuadratureSpec;

/// The four terms of the mean formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mean1d {
    /// Both neighbours of the vertex real: the double integral.
    pub interior: f64,
    /// A single point in the window.
    pub atom: f64,
    /// Left neighbour is the ghost at `-w`.
    pub right_border: f64,
    /// Right neighbour is the ghost at `w`.
    pub left_border: f64,
}

impl Mean1d {
    pub fn total(&self) -> f64 {
        self.interior + self.atom + self.right_border + self.left_border
    }
}

/// `E[λ̂(x0)²]` split as `E Σ g²` (same four-term layout as [`Mean1d`])
/// plus the cross terms `E Σ_{x≠y} g(x0|x) g(x0|y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoment1d {
    pub squared: [f64; 4],
    /// Both vertices of the cell at `x0` are real. In order: both outer
    /// neighbours are ghosts; only the left one is; only the right one is;
    /// neither is.
    pub cross: [f64; 4],
}

impl SecondMoment1d {
    pub fn squared_part(&self) -> f64 {
        self.squared.iter().sum()
    }

    pub fn cross_part(&self) -> f64 {
        self.cross.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.squared_part() + self.cross_part()
    }
}

/// How the inner integrals of the cross terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossTermRoute {
    /// Exponential integrals for constant `λ`, logarithms for affine `λ`,
    /// nested quadrature otherwise.
    #[default]
    Auto,
    /// Constant `λ` only: the four-fold term reduced to `E_1`.
    ExponentialIntegral,
    /// Affine `λ` only: inner integrals in closed form.
    Logarithmic,
    /// Nested quadrature throughout.
    Quadrature,
}

struct Model<'a, I: ?Sized> {
    intensity: &'a I,
    w: f64,
    x0: f64,
    cum: Cumulative<'a, I>,
    affine: Option<(f64, f64)>,
    nest: Nested,
}

fn check_point(w: f64, x0: f64) -> Result<(), AnalyticError> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(AnalyticError::Domain("half-width must be positive"));
    }
    if !(x0 >= -w && x0 <= w) {
        return Err(AnalyticError::Domain("x0 must lie in [-w, w]"));
    }
    Ok(())
}

impl<'a, I: Intensity + ?Sized> Model<'a, I> {
    fn new(
        intensity: &'a I,
        w: f64,
        x0: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self, AnalyticError> {
        check_point(w, x0)?;
        Ok(Model {
            intensity,
            w,
            x0,
            cum: Cumulative::new(intensity, -w, w),
            affine: intensity.as_affine(),
            nest: Nested::new(spec),
        })
    }

    fn lam(&self, x: f64) -> f64 {
        self.intensity.evaluate([x, 0.0])
    }

    /// `Λ(x0 - p, x0 + q)`, with the width `p + q` kept exact.
    fn big(&self, p: f64, q: f64) -> f64 {
        match self.affine {
            Some((a, b)) => (p + q) * (a + b * (self.x0 + 0.5 * (q - p))),
            None => self.cum.span(self.x0, p, q),
        }
    }

    /// `∫_{x0-p}^{x0} λ(x) / (x0 + q - x) dx`.
    fn left_inner(&self, p: f64, q: f64, closed: bool) -> f64 {
        match self.affine {
            Some((a, b)) if closed => (a + b * (self.x0 + q)) * libm::log((p + q) / q) - b * p,
            _ => self
                .nest
                .inner_graded(|r| self.lam(self.x0 - r) / (q + r), 0.0, p, q, false),
        }
    }

    /// `∫_{x0}^{x0+q} λ(y) / (y - x0 + p) dy`.
    fn right_inner(&self, p: f64, q: f64, closed: bool) -> f64 {
        match self.affine {
            Some((a, b)) if closed => (a + b * (self.x0 - p)) * libm::log((p + q) / p) + b * q,
            _ => self
                .nest
                .inner_graded(|r| self.lam(self.x0 + r) / (p + r), 0.0, q, p, false),
        }
    }

    /// Room left of and right of `x0`.
    fn extents(&self) -> (f64, f64) {
        (self.x0 + self.w, self.w - self.x0)
    }

    /// The four mean-type terms with the window lengths raised to `power`.
    /// A border term whose integral is known to diverge is reported as `+∞`
    /// without being integrated. Integration variables are the distances
    /// `p`, `q` from `x0` to the left and right neighbour.
    fn vertex_terms(&self, power: i32) -> Result<[f64; 4], AnalyticError> {
        let (big_p, big_q) = self.extents();
        let x0 = self.x0;
        let pow = |v: f64| libm::pow(v, power.into());
        let diverges = |at: f64| power >= 2 && self.lam(at) > 0.0;
        let interior = self.nest.outer(
            |p| {
                let lt = self.lam(x0 - p);
                self.nest.inner_graded(
                    |q| {
                        let l = self.big(p, q);
                        l * self.lam(x0 + q) * lt * libm::exp(-l) / pow(p + q)
                    },
                    0.0,
                    big_q,
                    p,
                    false,
                )
            },
            0.0,
            big_p,
        )?;
        let total = self.big(big_p, big_q);
        let atom = total * libm::exp(-total) / pow(big_p + big_q);
        let right = if big_p <= 0.0 && diverges(-self.w) {
            f64::INFINITY
        } else {
            self.nest.outer(
                |q| {
                    let l = self.big(big_p, q);
                    l * self.lam(x0 + q) * libm::exp(-l) / pow(big_p + q)
                },
                0.0,
                big_q,
            )?
        };
        let left = if big_q <= 0.0 && diverges(self.w) {
            f64::INFINITY
        } else {
            self.nest.outer(
                |p| {
                    let l = self.big(p, big_q);
                    l * self.lam(x0 - p) * libm::exp(-l) / pow(p + big_q)
                },
                0.0,
                big_p,
            )?
        };
        Ok([interior, atom, right, left])
    }

    fn cross_terms(&self, route: CrossTermRoute) -> Result<[f64; 4], AnalyticError> {
        let (big_p, big_q) = self.extents();
        let x0 = self.x0;
        if big_p <= 0.0 || big_q <= 0.0 {
            // x0 cannot lie strictly between two real points
            return Ok([0.0; 4]);
        }
        let constant = self.intensity.as_constant();
        let (closed, e1_route) = match route {
            CrossTermRoute::Auto => (self.affine.is_some(), constant.is_some()),
            CrossTermRoute::ExponentialIntegral => {
                if constant.is_none() {
                    return Err(AnalyticError::Domain(
                        "exponential-integral route needs constant intensity",
                    ));
                }
                (true, true)
            }
            CrossTermRoute::Logarithmic => {
                if self.affine.is_none() {
                    return Err(AnalyticError::Domain(
                        "logarithmic route needs affine intensity",
                    ));
                }
                (true, false)
            }
            CrossTermRoute::Quadrature => (false, false),
        };

        let both_ghost = 2.0
            * libm::exp(-self.big(big_p, big_q))
            * self.left_inner(big_p, big_q, closed)
            * self.right_inner(big_p, big_q, closed);
        let left_ghost = 2.0
            * self.nest.outer(
                |q| {
                    self.lam(x0 + q)
                        * libm::exp(-self.big(big_p, q))
                        * self.left_inner(big_p, q, closed)
                        * self.right_inner(big_p, q, closed)
                },
                0.0,
                big_q,
            )?;
        let right_ghost = 2.0
            * self.nest.outer(
                |p| {
                    self.lam(x0 - p)
                        * libm::exp(-self.big(p, big_q))
                        * self.left_inner(p, big_q, closed)
                        * self.right_inner(p, big_q, closed)
                },
                0.0,
                big_p,
            )?;

        let neither = match constant {
            Some(lambda) if e1_route => self.cross_e1(lambda)?,
            _ => {
                2.0 * self.nest.outer(
                    |p| {
                        let lt = self.lam(x0 - p);
                        self.nest.inner_graded(
                            |q| {
                                lt * self.lam(x0 + q)
                                    * libm::exp(-self.big(p, q))
                                    * self.left_inner(p, q, closed)
                                    * self.right_inner(p, q, closed)
                            },
                            0.0,
                            big_q,
                            p,
                            false,
                        )
                    },
                    0.0,
                    big_p,
                )?
            }
        };
        self.nest.check()?;
        Ok([both_ghost, left_ghost, right_ghost, neither])
    }

    /// `2λ⁴ ∫∫ e^u [E1(u) - E1(λ(y+w))] [E1(u) - E1(λ(w-x))] dy dx` over
    /// `x < x0 < y`, with `u = λ(y - x)`: the outer neighbours integrated
    /// out.
    fn cross_e1(&self, lambda: f64) -> Result<f64, AnalyticError> {
        let (big_p, big_q) = self.extents();
        let s = |v: f64| exp_integral_e1_scaled(v).unwrap_or(f64::NAN);
        let v = self.nest.outer(
            |p| {
                self.nest.inner_graded(
                    |q| {
                        let u = lambda * (p + q);
                        let a = lambda * (big_p + q);
                        let b = lambda * (big_q + p);
                        let su = s(u);
                        let left = su - libm::exp(u - a) * s(a);
                        let right = su - libm::exp(u - b) * s(b);
                        libm::exp(-u) * left * right
                    },
                    0.0,
                    big_q,
                    p,
                    false,
                )
            },
            0.0,
            big_p,
        )?;
        Ok(2.0 * libm::pow(lambda, 4.0) * v)
    }
}

/// `E[λ̂(x0)]` for the ghost-corrected DTFE on `[-w, w]` under a Poisson
/// process.
pub fn dtfe_mean_1d_poisson<I: Intensity + ?Sized>(
    intensity: &I,
    w: f64,
    x0: f64,
    spec: &QuadratureSpec,
) -> Result<Mean1d, AnalyticError> {
    let m = Model::new(intensity, w, x0, spec)?;
    let [interior, atom, right_border, left_border] = m.vertex_terms(1)?;
    Ok(Mean1d {
        interior,
        atom,
        right_border,
        left_border,
    })
}

/// `E[λ̂(x0)²]`, with [`CrossTermRoute::Auto`].
///
/// At `x0 = ±w` with positive intensity there, the estimate is the inverse
/// of a Gamma(2)-like length and the squared term is `+∞`.
pub fn dtfe_second_moment_1d_poisson<I: Intensity + ?Sized>(
    intensity: &I,
    w: f64,
    x0: f64,
    spec: &QuadratureSpec,
) -> Result<SecondMoment1d, AnalyticError> {
    dtfe_second_moment_1d_poisson_with(intensity, w, x0, spec, CrossTermRoute::Auto)
}

pub fn dtfe_second_moment_1d_poisson_with<I: Intensity + ?Sized>(
    intensity: &I,
    w: f64,
    x0: f64,
    spec: &QuadratureSpec,
    route: CrossTermRoute,
) -> Result<SecondMoment1d, AnalyticError> {
    let m = Model::new(intensity, w, x0, spec)?;
    let squared = m.vertex_terms(2)?;
    let cross = m.cross_terms(route)?;
    Ok(SecondMoment1d { squared, cross })
}

/// `Var λ̂(x0) = E[λ̂(x0)²] - E[λ̂(x0)]²`.
pub fn dtfe_variance_1d<I: Intensity + ?Sized>(
    intensity: &I,
    w: f64,
    x0: f64,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    let mean = dtfe_mean_1d_poisson(intensity, w, x0, spec)?.total();
    let second = dtfe_second_moment_1d_poisson(intensity, w, x0, spec)?.total();
    Ok(second - mean * mean)
}

/// `2λ²(2 - π²/6)`, the variance on the whole line.
pub fn dtfe_asymptotic_variance_1d(rate: f64) -> Result<f64, AnalyticError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(AnalyticError::Domain("rate must be positive"));
    }
    Ok(2.0 * rate * rate * E1_SQUARE_MOMENT)
}

/// Laws of the nearest points `Φ⁻(x) < x < Φ⁺(x)` of a Poisson process on
/// `[-w, w]` with the ghosts `±w` added. The two are independent.
pub struct PhiCdfs<'a, I: ?Sized> {
    intensity: &'a I,
    w: f64,
    x: f64,
}

impl<I: Intensity + ?Sized> PhiCdfs<'_, I> {
    /// `P(Φ⁻ ≤ t) = exp[-Λ(t, x)]` on `[-w, x)`.
    pub fn left_cdf(&self, t: f64) -> f64 {
        if t < -self.w {
            0.0
        } else if t >= self.x {
            1.0
        } else {
            libm::exp(-self.intensity.cumulative(t, self.x))
        }
    }

    /// `P(Φ⁻ = -w)`.
    pub fn left_atom(&self) -> f64 {
        libm::exp(-self.intensity.cumulative(-self.w, self.x))
    }

    /// `P(Φ⁺ ≤ s) = 1 - exp[-Λ(x, s)]` on `(x, w)`, and 1 from `w` on.
    pub fn right_cdf(&self, s: f64) -> f64 {
        if s <= self.x {
            0.0
        } else if s >= self.w {
            1.0
        } else {
            -libm::expm1(-self.intensity.cumulative(self.x, s))
        }
    }

    /// `P(Φ⁺ = w)`.
    pub fn right_atom(&self) -> f64 {
        libm::exp(-self.intensity.cumulative(self.x, self.w))
    }
}

pub fn phi_plus_minus_cdfs<I: Intensity + ?Sized>(
    intensity: &I,
    w: f64,
    x: f64,
) -> Result<PhiCdfs<'_, I>, AnalyticError> {
    check_point(w, x)?;
    if x <= -w || x >= w {
        return Err(AnalyticError::Domain("x must lie in (-w, w)"));
    }
    Ok(PhiCdfs { intensity, w, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::{FnIntensity, IntensityModel};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::new(1e-10, 1e-14, 4000).unwrap()
    }

    #[test]
    fn constant_terms_match_closed_forms() {
        let lambda = 1.7;
        let w = 2.0;
        let m = IntensityModel::Constant { rate: lambda };
        for &x0 in &[-2.0, -1.2, 0.0, 0.5, 2.0] {
            let t = dtfe_mean_1d_poisson(&m, w, x0, &spec()).unwrap();
            let e = |v: f64| libm::exp(v);
            let expected = [
                lambda * (e(lambda * x0) - e(-lambda * w)) * (e(-lambda * x0) - e(-lambda * w)),
                lambda * e(-2.0 * lambda * w),
                lambda * e(-lambda * w) * (e(-lambda * x0) - e(-lambda * w)),
                lambda * e(-lambda * w) * (e(lambda * x0) - e(-lambda * w)),
            ];
            let got = [t.interior, t.atom, t.right_border, t.left_border];
            for k in 0..4 {
                assert!(
                    (got[k] - expected[k]).abs() <= 1e-8 * expected[k].abs().max(1e-300),
                    "x0={x0} k={k}"
                );
            }
            assert!((t.total() - lambda).abs() < 1e-6 * lambda);
        }
    }

    #[test]
    fn cross_term_one_reduces_to_log2() {
        let lambda = 0.8;
        let w = 1.5;
        let m = IntensityModel::Constant { rate: lambda };
        let sm = dtfe_second_moment_1d_poisson(&m, w, 0.0, &spec()).unwrap();
        let l2 = lambda * core::f64::consts::LN_2;
        let expected = 2.0 * libm::exp(-2.0 * lambda * w) * l2 * l2;
        assert!((sm.cross[0] - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn e1_and_log_routes_agree() {
        let m = IntensityModel::Constant { rate: 1.3 };
        for &x0 in &[0.0, -0.7] {
            let a = dtfe_second_moment_1d_poisson_with(
                &m,
                2.0,
                x0,
                &spec(),
                CrossTermRoute::ExponentialIntegral,
            )
            .unwrap();
            let b = dtfe_second_moment_1d_poisson_with(
                &m,
                2.0,
                x0,
                &spec(),
                CrossTermRoute::Logarithmic,
            )
            .unwrap();
            assert!(
                (a.cross[3] - b.cross[3]).abs() < 1e-8 * b.cross[3],
                "{:?} {:?}",
                a,
                b
            );
        }
    }

    #[test]
    fn generic_route_matches_affine() {
        let spec = QuadratureSpec::new(1e-7, 1e-12, 4000).unwrap();
        let m = IntensityModel::Affine1d { a: 1.0, b: 0.5 };
        let f = FnIntensity::new(|p: crate::geometry::Point| 1.0 + 0.5 * p[0], 1.5);
        let mean_closed = dtfe_mean_1d_poisson(&m, 1.0, 0.3, &spec).unwrap().total();
        let mean_generic = dtfe_mean_1d_poisson(&f, 1.0, 0.3, &spec).unwrap().total();
        assert!((mean_closed - mean_generic).abs() < 1e-8);
        let a = dtfe_second_moment_1d_poisson(&m, 1.0, 0.3, &spec).unwrap();
        let b = dtfe_second_moment_1d_poisson_with(&f, 1.0, 0.3, &spec, CrossTermRoute::Quadrature)
            .unwrap();
        assert!((a.total() - b.total()).abs() < 1e-5 * a.total());
    }

    #[test]
    fn boundary_second_moment() {
        let m = IntensityModel::Constant { rate: 1.0 };
        let sm = dtfe_second_moment_1d_poisson(&m, 3.0, 3.0, &spec()).unwrap();
        assert_eq!(sm.cross, [0.0; 4]);
        assert!(sm.total().is_infinite());
    }

    #[test]
    fn domain_errors() {
        let m = IntensityModel::Constant { rate: 1.0 };
        assert!(dtfe_mean_1d_poisson(&m, 1.0, 1.5, &spec()).is_err());
        assert!(dtfe_mean_1d_poisson(&m, 0.0, 0.0, &spec()).is_err());
        assert!(dtfe_asymptotic_variance_1d(0.0).is_err());
        assert!((dtfe_asymptotic_variance_1d(10.0).unwrap() - 71.013_18).abs() < 1e-4);
    }

    #[test]
    fn phi_cdfs_normalised() {
        let m = IntensityModel::Affine1d { a: 1.0, b: 0.5 };
        let p = phi_plus_minus_cdfs(&m, 1.0, 0.2).unwrap();
        assert!((p.right_cdf(1.0 - 1e-12) + p.right_atom() - 1.0).abs() < 1e-9);
        assert!((p.left_cdf(-1.0) - p.left_atom()).abs() < 1e-15);
        assert_eq!(p.right_cdf(0.2), 0.0);
        assert!(phi_plus_minus_cdfs(&m, 1.0, 1.0).is_err());
    }
}
