use super::special::{exp_integral_e1, exp_integral_e1_scaled, EULER_GAMMA};
use super::AnalyticError;
use crate::quadrature::{Quadrature, QuadratureSpec};

fn positive(x: f64, what: &'static str) -> Result<(), AnalyticError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::Domain(what))
    }
}

/// Both sides of `∫_0^c e^{ax} E_1(ax) dx = [γ + log(ac) + e^{ac} E_1(ac)] / a`,
/// the left side by adaptive quadrature.
pub fn e1_exponential_integral_identity(a: f64, c: f64) -> Result<(f64, f64), AnalyticError> {
    positive(a, "identity requires a > 0")?;
    positive(c, "identity requires c > 0")?;
    let q = Quadrature::new(QuadratureSpec::new(1e-12, 1e-300, 5000).unwrap());
    let lhs = q
        .integrate(
            |x| exp_integral_e1_scaled(a * x).unwrap_or(f64::NAN),
            0.0,
            c,
        )?
        .value;
    let rhs = (EULER_GAMMA + libm::log(a * c) + exp_integral_e1_scaled(a * c)?) / a;
    Ok((lhs, rhs))
}

/// `∫_0^∞ u e^u E_1(u)^2 du` by quadrature; the closed form is `2 - π²/6`.
pub fn e1_square_moment_quadrature() -> Result<f64, AnalyticError> {
    let q = Quadrature::new(QuadratureSpec::new(1e-12, 1e-300, 5000).unwrap());
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        match (exp_integral_e1_scaled(u), exp_integral_e1(u)) {
            (Ok(s), Ok(e)) => u * s * e,
            _ => f64::NAN,
        }
    };
    let head = q.integrate(f, 0.0, 1.0)?.value;
    let tail = q.integrate_to_infinity(f, 1.0)?.value;
    Ok(head + tail)
}

/// The finite-window remainder `h(λ, w)` in the 1D variance: the terms of
/// the exact variance that vanish as `λw → ∞`.
pub fn var1d_remainder_h(lambda: f64, w: f64) -> Result<f64, AnalyticError> {
    positive(lambda, "h requires lambda > 0")?;
    positive(w, "h requires w > 0")?;
    let lw = lambda * w;
    let e1 = libm::exp(-lw);
    let e2 = libm::exp(-2.0 * lw);
    Ok(
        e1 * EULER_GAMMA + (e1 + e2) * libm::log(lw) - e2 * libm::log(2.0 * lw)
            + exp_integral_e1(lw)? * (1.0 + e1)
            - exp_integral_e1(2.0 * lw)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_unit_case() {
        let (lhs, rhs) = e1_exponential_integral_identity(1.0, 1.0).unwrap();
        let expected = EULER_GAMMA + core::f64::consts::E * exp_integral_e1(1.0).unwrap();
        assert!((rhs - expected).abs() < 1e-14);
        assert!((lhs - rhs).abs() < 1e-8 * rhs.abs());
    }

    #[test]
    fn square_moment() {
        let v = e1_square_moment_quadrature().unwrap();
        assert!((v - super::super::E1_SQUARE_MOMENT).abs() < 1e-6);
    }

    #[test]
    fn remainder_decreases() {
        let h: alloc::vec::Vec<f64> = [5.0, 10.0, 20.0]
            .iter()
            .map(|&lw| var1d_remainder_h(1.0, lw).unwrap())
            .collect();
        assert!(h[0] > h[1] && h[1] > h[2] && h[2] > 0.0);
        assert!(h[2] < 1e-7);
    }
}
