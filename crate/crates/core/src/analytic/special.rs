//! Exponential integrals `E_n(x) = ∫_1^∞ e^{-xt} t^{-n} dt`.
//!
//! Power series for `x <= 1`, modified Lentz continued fraction above.

use super::AnalyticError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `2 - π²/6 = ∫_0^∞ u e^u E_1(u)^2 du`.
pub const E1_SQUARE_MOMENT: f64 = 2.0 - core::f64::consts::PI * core::f64::consts::PI / 6.0;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Unit-ball volume `ω_d` for `d = 1, 2`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => core::f64::consts::PI,
        _ => f64::NAN,
    }
}

/// `E_1(x) = ∫_x^∞ e^{-u}/u du` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64, AnalyticError> {
    if !(x > 0.0) {
        return Err(AnalyticError::Domain("E1 requires x > 0"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(expint_scaled(1, x) * libm::exp(-x))
}

/// `e^x E_1(x)`, free of overflow for large `x`.
pub fn exp_integral_e1_scaled(x: f64) -> Result<f64, AnalyticError> {
    if !(x > 0.0) {
        return Err(AnalyticError::Domain("E1 requires x > 0"));
    }
    Ok(expint_scaled(1, x))
}

/// `E_2(x) = ∫_x^∞ E_1(s) ds`, with `E_2(0) = 1`.
///
/// Evaluated from its own series and continued fraction; it agrees with
/// `e^{-x} - x E_1(x)` to rounding.
pub fn exp_integral_e2(x: f64) -> Result<f64, AnalyticError> {
    if !(x >= 0.0) {
        return Err(AnalyticError::Domain("E2 requires x >= 0"));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(expint_scaled(2, x) * libm::exp(-x))
}

/// `e^x E_n(x)` for `n >= 1`, `x > 0`.
fn expint_scaled(n: u32, x: f64) -> f64 {
    let nm1 = f64::from(n - 1);
    if x > 1.0 {
        let mut b = x + f64::from(n);
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            let a = -fi * (nm1 + fi);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    } else {
        let mut ans = if n > 1 {
            1.0 / nm1
        } else {
            -libm::log(x) - EULER_GAMMA
        };
        let mut fact = 1.0;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            fact *= -x / fi;
            let del = if i as u32 != n - 1 {
                -fact / (fi - nm1)
            } else {
                let psi = -EULER_GAMMA + (1..n).map(|k| 1.0 / f64::from(k)).sum::<f64>();
                fact * (-libm::log(x) + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                break;
            }
        }
        ans * libm::exp(x)
    }
}
