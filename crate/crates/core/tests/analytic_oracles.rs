use dtfe_core::analytic::*;
use dtfe_core::estimators::Bandwidth;
use dtfe_core::geometry::Window;
use dtfe_core::pointprocess::IntensityModel;
use dtfe_core::quadrature::{Quadrature, QuadratureSpec};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn oracle_quad() -> Quadrature {
    Quadrature::new(QuadratureSpec::new(1e-13, 1e-300, 10_000).unwrap())
}

#[test]
fn e1_matches_defining_integral() {
    for x in [1e-6, 1e-3, 0.3, 1.0, 2.5, 7.0, 30.0] {
        let q = oracle_quad()
            .integrate_to_infinity(|u| (-u).exp() / u, x)
            .unwrap()
            .value;
        let v = exp_integral_e1(x).unwrap();
        assert!((v - q).abs() < 1e-11 * q, "x={x}: {v} vs {q}");
    }
    assert!((exp_integral_e1(1.0).unwrap() - 0.219_383_934_395_52).abs() < 1e-13);
}

#[test]
fn e2_identity_on_log_grid() {
    for x in log_grid(1e-6, 50.0, 200) {
        let lhs = (-x).exp() - x * exp_integral_e1(x).unwrap();
        let e2 = exp_integral_e2(x).unwrap();
        assert!((lhs - e2).abs() < 1e-10 * e2, "x={x}");
        assert!(e2 <= (-x).exp());
    }
    assert_eq!(exp_integral_e2(0.0).unwrap(), 1.0);
}

#[test]
fn e2_is_tail_integral_of_e1() {
    let tail = oracle_quad()
        .integrate_to_infinity(|s| exp_integral_e1(s).unwrap(), 0.5)
        .unwrap()
        .value;
    assert!((tail - exp_integral_e2(0.5).unwrap()).abs() < 1e-8);
}

#[test]
fn square_moment_constant() {
    assert!((e1_square_moment_quadrature().unwrap() - E1_SQUARE_MOMENT).abs() < 1e-6);
    assert!((E1_SQUARE_MOMENT - (2.0 - std::f64::consts::PI.powi(2) / 6.0)).abs() < 1e-15);
}

#[test]
fn gamma_identity() {
    for (a, c) in [(1.0, 1.0), (2.0, 0.5), (1.0, 10.0)] {
        let (lhs, rhs) = e1_exponential_integral_identity(a, c).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs(), "a={a} c={c}");
    }
    let (_, unit) = e1_exponential_integral_identity(1.0, 1.0).unwrap();
    let (_, half) = e1_exponential_integral_identity(2.0, 0.5).unwrap();
    assert!((half - unit / 2.0).abs() < 1e-14);
    assert!(e1_exponential_integral_identity(0.0, 1.0).is_err());
}

#[test]
fn constant_mean_is_unbiased_everywhere() {
    let spec = QuadratureSpec::new(1e-9, 1e-14, 4000).unwrap();
    for (lambda, w) in [(1.0, 3.0), (20.0, 5.0), (0.3, 2.0)] {
        let m = IntensityModel::Constant { rate: lambda };
        for k in 0..=10 {
            let x0 = -w + 2.0 * w * k as f64 / 10.0;
            let t = dtfe_mean_1d_poisson(&m, w, x0, &spec).unwrap();
            assert!(
                (t.total() - lambda).abs() < 1e-6 * lambda,
                "λ={lambda} x0={x0}"
            );
            if x0 == w || x0 == -w {
                assert!(t.interior.abs() < 1e-12 * lambda);
            }
        }
    }
}

#[test]
fn asymptotic_variance_by_quadrature() {
    let m = IntensityModel::Constant { rate: 1.0 };
    let spec = QuadratureSpec::new(1e-9, 1e-14, 4000).unwrap();
    let v = dtfe_variance_1d(&m, 50.0, 0.0, &spec).unwrap();
    let target = dtfe_asymptotic_variance_1d(1.0).unwrap();
    assert!((target - 0.710_132).abs() < 1e-6);
    assert!((v - target).abs() < 0.01 * target, "{v}");
}

#[test]
fn variance_scales_with_rate_squared() {
    // λ and w enter only through λw, up to the overall factor λ²
    let spec = QuadratureSpec::new(1e-9, 1e-14, 4000).unwrap();
    let a = dtfe_variance_1d(&IntensityModel::Constant { rate: 1.0 }, 4.0, 1.0, &spec).unwrap();
    let b = dtfe_variance_1d(&IntensityModel::Constant { rate: 2.0 }, 2.0, 0.5, &spec).unwrap();
    assert!((b - 4.0 * a).abs() < 1e-7 * b);
}

#[test]
fn remainder_h_vanishes() {
    let h: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&lw| var1d_remainder_h(1.0, lw).unwrap())
        .collect();
    assert!(h[0] > h[1] && h[1] > h[2] && h[2] > 0.0);
}

#[test]
fn kernel_variances_interior() {
    let spec = QuadratureSpec::new(1e-9, 1e-14, 4000).unwrap();
    let m = IntensityModel::Constant { rate: 5.0 };
    let win = Window::interval(-3.0, 3.0).unwrap();
    let h = Bandwidth::new(0.5).unwrap();
    let (mean, var) = bd_moments_poisson(&m, &win, [0.2, 0.0], h, &spec).unwrap();
    assert!((mean - 5.0).abs() < 1e-12);
    assert!((var - 5.0).abs() < 1e-12);
    let vk = kernelk_variance_poisson(&m, &win, [0.2, 0.0], h, &spec).unwrap();
    assert!((vk - var).abs() < 1e-9);
    // at the end of the interval: ∫_{w-h}^{w} λ/(w+h-x)² dx = λ/(2h) as well
    let vb = kernelk_variance_poisson(&m, &win, [3.0, 0.0], h, &spec).unwrap();
    assert!((vb - 5.0).abs() < 1e-9);
    // halfway in, the denominators are mixed
    let vm = kernelk_variance_poisson(&m, &win, [2.8, 0.0], h, &spec).unwrap();
    let exact = 5.0 * (0.2 + (1.0 / 0.5 - 1.0 / 1.0));
    assert!((vm - exact).abs() < 1e-9, "{vm} {exact}");
}
