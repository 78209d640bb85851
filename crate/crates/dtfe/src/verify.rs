//! Named verification suites: each runs a batch of numerical checks and
//! reports target, estimate, tolerance and standard error.

use std::collections::BTreeSet;

use dtfe_core::analytic::{
    bd_moments_poisson, dtfe_asymptotic_variance_1d, dtfe_mean_1d_poisson,
    dtfe_second_moment_1d_poisson, e1_exponential_integral_identity, e1_square_moment_quadrature,
    exp_integral_e1, exp_integral_e2, kernelk_variance_poisson, E1_SQUARE_MOMENT,
};
use dtfe_core::estimators::{
    berman_diggle, dtfe_field, kernel_k, total_mass, Bandwidth, Correction,
};
use dtfe_core::geometry::{build_delaunay, Dim, Point, PointPattern, Window};
use dtfe_core::pointprocess::{sample_homogeneous_poisson, IntensityModel, Seed};
use dtfe_core::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    CorrectionSpec, EstimatorSpec, ExperimentSpec, IntensitySpec, ProcessSpec, WindowSpec,
};
use crate::montecarlo::{run_experiment, run_palm, PalmSpec};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mass,
    Unbiased1d,
    Variance1d,
    Mean1d,
    Constants1d,
    Constants2d,
    Kernels,
    Specialfn,
    Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub estimate: f64,
    /// Largest accepted `|estimate − target|`.
    pub tolerance: f64,
    /// Monte Carlo standard error of `estimate − target`, when random.
    pub se: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn new(
        name: impl Into<String>,
        target: f64,
        estimate: f64,
        tolerance: f64,
        se: Option<f64>,
    ) -> Self {
        Check {
            name: name.into(),
            target,
            estimate,
            tolerance,
            se,
            pass: (estimate - target).abs() <= tolerance,
        }
    }

    fn relative(
        name: impl Into<String>,
        target: f64,
        estimate: f64,
        rel: f64,
        se: Option<f64>,
    ) -> Self {
        Self::new(name, target, estimate, rel * target.abs(), se)
    }

    fn within_se(name: impl Into<String>, target: f64, estimate: f64, k: f64, se: f64) -> Self {
        Self::new(name, target, estimate, k * se, Some(se))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the Monte Carlo replicate counts of the suite.
    pub replicates: Option<u64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20_240_601,
            replicates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub options: VerifyOptions,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn run_suite(suite: Suite, options: VerifyOptions) -> Result<VerifyReport, Error> {
    let reps = |default: u64| options.replicates.unwrap_or(default);
    let seed = options.seed;
    let checks = match suite {
        Suite::Mass => mass(seed, reps(1000))?,
        Suite::Unbiased1d => unbiased1d(seed, reps(100_000))?,
        Suite::Variance1d => variance1d(seed, reps(100_000))?,
        Suite::Mean1d => mean1d(seed, reps(100_000))?,
        Suite::Constants1d => constants1d(seed, reps(20_000))?,
        Suite::Constants2d => constants2d(seed, reps(10_000))?,
        Suite::Kernels => kernels(seed, reps(100_000))?,
        Suite::Specialfn => specialfn()?,
        Suite::Geometry => geometry(seed, reps(1000))?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        suite,
        options,
        checks,
        pass,
    })
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-9, 1e-14, 4000).expect("valid quadrature spec")
}

fn line_experiment(
    rate: IntensitySpec,
    w: f64,
    estimator: EstimatorSpec,
    points: &[f64],
    replicates: u64,
    seed: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        process: ProcessSpec {
            window: WindowSpec::centered(Dim::One, w),
            intensity: rate,
        },
        estimator,
        points: points.iter().map(|&x| vec![x]).collect(),
        replicates,
        seed,
    }
}

const GHOST: EstimatorSpec = EstimatorSpec::Dtfe {
    correction: CorrectionSpec::Ghost,
};

fn mass(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let cases = [
        ("d=1", Window::interval(-1.5, 1.5)?, 10.0),
        ("d=2", Window::rectangle((0.0, 10.0), (0.0, 5.0))?, 1.0),
    ];
    let mut checks = Vec::new();
    for (label, window, rate) in cases {
        for (cname, correction) in [
            ("ghost", Correction::GhostBoundary),
            ("none", Correction::None),
        ] {
            let worst = (0..replicates)
                .into_par_iter()
                .map(|r| -> Result<f64, Error> {
                    let p = sample_homogeneous_poisson(&window, rate, Seed::new(seed, r))?;
                    let est = dtfe_field(&p, &window, correction)?;
                    let n = p.real_count() as f64;
                    let m = total_mass(&est);
                    Ok(if n == 0.0 { m.abs() } else { (m - n).abs() / n })
                })
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::new(
                format!("{label} {cname}: max relative mass error"),
                0.0,
                worst,
                1e-9,
                None,
            ));
        }
    }
    Ok(checks)
}

fn unbiased1d(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let spec = line_experiment(
        IntensitySpec::Constant { rate: 20.0 },
        5.0,
        GHOST,
        &[0.0, 4.5, 5.0],
        replicates,
        seed,
    );
    let report = run_experiment(&spec, false)?;
    Ok(report
        .points
        .iter()
        .map(|p| {
            let m = p.moments;
            Check::within_se(
                format!("mean at x0={}", p.x0[0]),
                20.0,
                m.mean,
                3.0,
                m.se_mean,
            )
        })
        .collect())
}

fn variance1d(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let target = dtfe_asymptotic_variance_1d(1.0)?;
    let spec = line_experiment(
        IntensitySpec::Constant { rate: 1.0 },
        50.0,
        GHOST,
        &[0.0],
        replicates,
        seed,
    );
    let m = run_experiment(&spec, false)?.points[0].moments;
    let model = IntensityModel::Constant { rate: 1.0 };
    let second = dtfe_second_moment_1d_poisson(&model, 50.0, 0.0, &quad_spec())?.total();
    Ok(vec![
        Check::relative(
            "Monte Carlo variance at w=50",
            target,
            m.variance,
            0.05,
            Some(m.se_variance),
        ),
        Check::relative(
            "quadrature variance at w=50",
            target,
            second - 1.0,
            0.01,
            None,
        ),
    ])
}

fn mean1d(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let (a, b) = (1.0, 0.5);
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let spec = line_experiment(
        IntensitySpec::Affine1d { a, b },
        1.0,
        GHOST,
        &xs,
        replicates,
        seed,
    );
    let report = run_experiment(&spec, false)?;
    let model = IntensityModel::Affine1d { a, b };
    let mut checks = Vec::new();
    for p in &report.points {
        let q = dtfe_mean_1d_poisson(&model, 1.0, p.x0[0], &quad_spec())?.total();
        checks.push(Check::within_se(
            format!("affine mean at x0={}", p.x0[0]),
            q,
            p.moments.mean,
            3.0,
            p.moments.se_mean,
        ));
    }
    for (lambda, w) in [(1.0, 3.0), (20.0, 5.0)] {
        let model = IntensityModel::Constant { rate: lambda };
        for x0 in [-w, 0.3 * w, w] {
            let q = dtfe_mean_1d_poisson(&model, w, x0, &quad_spec())?.total();
            checks.push(Check::new(
                format!("constant λ={lambda} w={w} mean at x0={x0}"),
                lambda,
                q,
                1e-6,
                None,
            ));
        }
    }
    Ok(checks)
}

fn palm_checks(
    dim: usize,
    half_width: f64,
    replicates: u64,
    seed: u64,
) -> Result<crate::montecarlo::PalmReport, Error> {
    run_palm(&PalmSpec {
        dim,
        rate: 1.0,
        half_width,
        replicates,
        seed,
    })
}

fn constants1d(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let r = palm_checks(1, 30.0, replicates, seed)?;
    let c1 = 2.0 * E1_SQUARE_MOMENT;
    Ok(vec![
        Check::within_se(
            "C′(1,1) = E[1/Gamma(2,1)]",
            1.0,
            r.c_prime.value,
            3.0,
            r.c_prime.se,
        ),
        Check::relative("C(1,1)", c1, r.c.value, 0.05, Some(r.c.se)),
        Check::relative("c_1", c1, r.c_d.value, 0.05, Some(r.c_d.se)),
        Check::new(
            "guard violations",
            0.0,
            r.guard_violations as f64,
            0.0,
            None,
        ),
    ])
}

fn constants2d(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let r = palm_checks(2, 20.0, replicates, seed)?;
    let total = r.replicates as f64;
    Ok(vec![
        Check::relative("C(1,2)", 0.8, r.c.value, 0.10, Some(r.c.se)),
        Check::relative("C′(1,2)", 0.6, r.c_prime.value, 0.10, Some(r.c_prime.se)),
        Check::relative("c_2", 0.4, r.c_d.value, 0.15, Some(r.c_d.se)),
        Check::within_se("c_2 − (C + C′ − 1)", 0.0, r.consistency_gap, 3.0, r.c_d.se),
        Check::new(
            "guard violation rate",
            0.0,
            r.guard_violations as f64 / total,
            1e-3,
            None,
        ),
    ])
}

fn kernels(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let (rate, w, hv) = (20.0, 5.0, 0.5);
    let h = Bandwidth::new(hv)?;
    let window = Window::interval(-w, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for r in 0..200 {
        let p = sample_homogeneous_poisson(&window, rate, Seed::new(seed ^ 0x5eed, r))?;
        for _ in 0..20 {
            let x0 = [rng.random_range(-w + 2.0 * hv..w - 2.0 * hv), 0.0];
            let bd = berman_diggle(&p, &window, x0, h)?;
            let k = kernel_k(&p, &window, x0, h)?;
            worst = worst.max((bd - k).abs() / bd.max(1.0));
        }
    }
    let model = IntensityModel::Constant { rate };
    let bd = run_experiment(
        &line_experiment(
            IntensitySpec::Constant { rate },
            w,
            EstimatorSpec::Bd { bandwidth: hv },
            &[0.0],
            replicates,
            seed,
        ),
        false,
    )?
    .points[0]
        .moments;
    let kk = run_experiment(
        &line_experiment(
            IntensitySpec::Constant { rate },
            w,
            EstimatorSpec::Kernelk { bandwidth: hv },
            &[w],
            replicates,
            seed.wrapping_add(1),
        ),
        false,
    )?
    .points[0]
        .moments;
    let (_, bd_var) = bd_moments_poisson(&model, &window, [0.0, 0.0], h, &quad_spec())?;
    let k_var = kernelk_variance_poisson(&model, &window, [w, 0.0], h, &quad_spec())?;
    Ok(vec![
        Check::new("max |BD − K| deeper than 2h", 0.0, worst, 1e-12, None),
        Check::within_se(
            "BD variance at x0=0 vs λ/(2h)",
            rate / (2.0 * hv),
            bd.variance,
            3.0,
            bd.se_variance,
        ),
        Check::new(
            "BD variance formula vs λ/(2h)",
            rate / (2.0 * hv),
            bd_var,
            1e-9,
            None,
        ),
        Check::within_se(
            "kernelK variance at x0=w",
            k_var,
            kk.variance,
            3.0,
            kk.se_variance,
        ),
    ])
}

fn specialfn() -> Result<Vec<Check>, Error> {
    let mut worst: f64 = 0.0;
    let (lo, hi, n) = (1e-6f64.ln(), 50f64.ln(), 200);
    for k in 0..n {
        let x = (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp();
        let e2 = exp_integral_e2(x)?;
        let lhs = (-x).exp() - x * exp_integral_e1(x)?;
        worst = worst.max((lhs - e2).abs() / e2);
    }
    let mut checks = vec![
        Check::new("E2 identity, max relative error", 0.0, worst, 1e-10, None),
        Check::new(
            "∫ u e^u E1(u)² du",
            2.0 - std::f64::consts::PI.powi(2) / 6.0,
            e1_square_moment_quadrature()?,
            1e-6,
            None,
        ),
    ];
    for (a, c) in [(1.0, 1.0), (2.0, 0.5), (1.0, 10.0)] {
        let (lhs, rhs) = e1_exponential_integral_identity(a, c)?;
        checks.push(Check::new(
            format!("γ-identity a={a} c={c}"),
            rhs,
            lhs,
            1e-8 * rhs.abs(),
            None,
        ));
    }
    Ok(checks)
}

/// Triangles whose open circumdisk contains no other point.
fn brute_force_triangles(pts: &[Point]) -> BTreeSet<[usize; 3]> {
    let orient = |a: Point, b: Point, c: Point| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let incircle = |a: Point, b: Point, c: Point, d: Point| {
        let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
        let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
        let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
            + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
            + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    };
    let n = pts.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let o = orient(pts[i], pts[j], pts[k]);
                if o == 0.0 {
                    continue;
                }
                let (b, c) = if o > 0.0 { (j, k) } else { (k, j) };
                if (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| incircle(pts[i], pts[b], pts[c], pts[m]) <= 0.0)
                {
                    out.insert([i, j, k]);
                }
            }
        }
    }
    out
}

fn empty_circumballs(t: &dtfe_core::geometry::Tessellation) -> bool {
    let pts = t.base().points();
    (0..t.num_cells()).all(|j| {
        let b = t.circumball(j);
        pts.iter().enumerate().all(|(i, p)| {
            t.cell(j).contains(&i)
                || ((p[0] - b.center[0]).powi(2) + (p[1] - b.center[1]).powi(2)).sqrt()
                    >= b.radius * (1.0 - 1e-10)
        })
    })
}

fn geometry(seed: u64, replicates: u64) -> Result<Vec<Check>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut line_mismatch, mut plane_mismatch, mut nonempty) = (0u64, 0u64, 0u64);
    for _ in 0..replicates {
        let n = rng.random_range(2..60);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let t = build_delaunay(&PointPattern::from_1d(&xs)?)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let expected: BTreeSet<[usize; 2]> = order
            .windows(2)
            .map(|w| [w[0].min(w[1]), w[0].max(w[1])])
            .collect();
        let got: BTreeSet<[usize; 2]> = t
            .cells()
            .map(|c| [c[0].min(c[1]), c[0].max(c[1])])
            .collect();
        line_mismatch += u64::from(got != expected);
        nonempty += u64::from(!empty_circumballs(&t));
    }
    let planar = replicates.div_ceil(5);
    let mut tested = 0;
    while tested < planar {
        let n = rng.random_range(3..=8);
        let pts: Vec<Point> = (0..n)
            .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
            .collect();
        let Ok(pattern) = PointPattern::real(Dim::Two, pts.clone()) else {
            continue;
        };
        let Ok(t) = build_delaunay(&pattern) else {
            continue;
        };
        tested += 1;
        let got: BTreeSet<[usize; 3]> = t
            .cells()
            .map(|c| {
                let mut v = [c[0], c[1], c[2]];
                v.sort_unstable();
                v
            })
            .collect();
        plane_mismatch += u64::from(got != brute_force_triangles(&pts));
        nonempty += u64::from(!empty_circumballs(&t));
    }
    Ok(vec![
        Check::new(
            "d=1 patterns differing from sort-and-pair",
            0.0,
            line_mismatch as f64,
            0.0,
            None,
        ),
        Check::new(
            "d=2 patterns differing from brute force",
            0.0,
            plane_mismatch as f64,
            0.0,
            None,
        ),
        Check::new(
            "tessellations with a non-empty circumball",
            0.0,
            nonempty as f64,
            0.0,
            None,
        ),
    ])
}
