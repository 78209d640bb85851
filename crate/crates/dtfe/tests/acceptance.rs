//! End-to-end acceptance run: one line per criterion, nonzero exit if any
//! criterion fails. Targets come from closed forms or brute force here,
//! not from the library's own analytic module.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use dtfe::config::{
    CorrectionSpec, EstimatorSpec, ExperimentSpec, IntensitySpec, ProcessSpec, WindowSpec,
};
use dtfe::montecarlo::{run_experiment, run_palm, MomentReport, PalmSpec};
use dtfe_core::analytic::{
    dtfe_mean_1d_poisson, dtfe_second_moment_1d_poisson, e1_exponential_integral_identity,
    e1_square_moment_quadrature, exp_integral_e1, exp_integral_e2,
};
use dtfe_core::estimators::{
    berman_diggle, dtfe_field, kernel_k, total_mass, Bandwidth, Correction,
};
use dtfe_core::geometry::{build_delaunay, Dim, Point, PointPattern, Tessellation, Window};
use dtfe_core::pointprocess::{sample_homogeneous_poisson, IntensityModel, Seed};
use dtfe_core::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1: f64 = 2.0 * (2.0 - PI * PI / 6.0);

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines
            .push(format!("    [{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn within_se(&mut self, label: &str, estimate: f64, target: f64, se: f64) {
        let z = (estimate - target) / se;
        self.check(
            z.abs() <= 3.0,
            format!("{label}: {estimate:.6} vs {target:.6}, SE {se:.2e}, z = {z:+.2}"),
        );
    }

    fn within_rel(&mut self, label: &str, estimate: f64, target: f64, rel: f64, se: Option<f64>) {
        let err = (estimate - target).abs() / target.abs();
        let se = se.map(|s| format!(", SE {s:.2e}")).unwrap_or_default();
        self.check(
            err <= rel,
            format!("{label}: {estimate:.6} vs {target:.6}, rel err {err:.2e} (tol {rel}){se}"),
        );
    }

    fn within_abs(&mut self, label: &str, estimate: f64, target: f64, tol: f64) {
        let err = (estimate - target).abs();
        self.check(
            err <= tol,
            format!("{label}: {estimate:.12} vs {target:.12}, err {err:.2e} (tol {tol:.0e})"),
        );
    }
}

fn line_spec(
    intensity: IntensitySpec,
    w: f64,
    estimator: EstimatorSpec,
    xs: &[f64],
    r: u64,
    seed: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        process: ProcessSpec {
            window: WindowSpec::centered(Dim::One, w),
            intensity,
        },
        estimator,
        points: xs.iter().map(|&x| vec![x]).collect(),
        replicates: r,
        seed,
    }
}

const GHOST: EstimatorSpec = EstimatorSpec::Dtfe {
    correction: CorrectionSpec::Ghost,
};

fn quad() -> QuadratureSpec {
    QuadratureSpec::new(1e-9, 1e-14, 4000).unwrap()
}

fn no_failures(o: &mut Outcome, r: &MomentReport) {
    o.check(
        r.failures == 0,
        format!("{} of {} replicates failed", r.failures, r.replicates),
    );
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let cases = [
        (
            "d=1, λ|A|=30",
            Window::interval(-1.5, 1.5).unwrap(),
            10.0,
            101,
        ),
        (
            "d=2, λ|A|=50",
            Window::rectangle((0.0, 10.0), (0.0, 5.0)).unwrap(),
            1.0,
            102,
        ),
    ];
    for (label, window, rate, seed) in cases {
        for correction in [Correction::GhostBoundary, Correction::None] {
            let mut worst: f64 = 0.0;
            for r in 0..1000 {
                let p = sample_homogeneous_poisson(&window, rate, Seed::new(seed, r)).unwrap();
                let est = dtfe_field(&p, &window, correction).unwrap();
                let n = p.real_count() as f64;
                let m = total_mass(&est);
                worst = worst.max(if n == 0.0 { m.abs() } else { (m - n).abs() / n });
            }
            o.check(
                worst < 1e-9,
                format!("{label} {correction:?}: max relative error {worst:.2e}"),
            );
        }
    }
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let spec = line_spec(
        IntensitySpec::Constant { rate: 20.0 },
        5.0,
        GHOST,
        &[0.0, 4.5, 5.0],
        100_000,
        202,
    );
    let r = run_experiment(&spec, false).unwrap();
    no_failures(&mut o, &r);
    for p in &r.points {
        o.within_se(
            &format!("mean at x0={}", p.x0[0]),
            p.moments.mean,
            20.0,
            p.moments.se_mean,
        );
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let spec = line_spec(
        IntensitySpec::Constant { rate: 1.0 },
        50.0,
        GHOST,
        &[0.0],
        100_000,
        303,
    );
    let r = run_experiment(&spec, false).unwrap();
    no_failures(&mut o, &r);
    let m = r.points[0].moments;
    o.within_rel(
        "Monte Carlo variance",
        m.variance,
        C1,
        0.05,
        Some(m.se_variance),
    );
    let model = IntensityModel::Constant { rate: 1.0 };
    let second = dtfe_second_moment_1d_poisson(&model, 50.0, 0.0, &quad())
        .unwrap()
        .total();
    o.within_rel("quadrature E[λ̂²] − λ²", second - 1.0, C1, 0.01, None);
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let spec = line_spec(
        IntensitySpec::Affine1d { a: 1.0, b: 0.5 },
        1.0,
        GHOST,
        &xs,
        100_000,
        404,
    );
    let r = run_experiment(&spec, false).unwrap();
    no_failures(&mut o, &r);
    let model = IntensityModel::Affine1d { a: 1.0, b: 0.5 };
    for p in &r.points {
        let q = dtfe_mean_1d_poisson(&model, 1.0, p.x0[0], &quad())
            .unwrap()
            .total();
        o.within_se(
            &format!("λ=1+x/2, x0={}: MC vs quadrature", p.x0[0]),
            p.moments.mean,
            q,
            p.moments.se_mean,
        );
    }
    // constant λ: the four terms of the mean, written out by hand
    for (lambda, w) in [(1.0, 1.0), (20.0, 5.0), (1.7, 2.0)] {
        let model = IntensityModel::Constant { rate: lambda };
        let mut worst_term: f64 = 0.0;
        let mut worst_total: f64 = 0.0;
        for k in 0..=8 {
            let x0 = -w + 2.0 * w * k as f64 / 8.0;
            let t = dtfe_mean_1d_poisson(&model, w, x0, &quad()).unwrap();
            let e = f64::exp;
            let expected = [
                lambda * (e(lambda * x0) - e(-lambda * w)) * (e(-lambda * x0) - e(-lambda * w)),
                lambda * e(-2.0 * lambda * w),
                lambda * e(-lambda * w) * (e(-lambda * x0) - e(-lambda * w)),
                lambda * e(-lambda * w) * (e(lambda * x0) - e(-lambda * w)),
            ];
            let got = [t.interior, t.atom, t.right_border, t.left_border];
            for (g, x) in got.iter().zip(expected) {
                worst_term = worst_term.max((g - x).abs() / x.abs().max(1.0));
            }
            worst_total = worst_total.max((t.total() - lambda).abs());
        }
        o.within_abs(
            &format!("λ={lambda}, w={w}: max |mean − λ|"),
            worst_total,
            0.0,
            1e-6,
        );
        o.within_abs(
            &format!("λ={lambda}, w={w}: max term error"),
            worst_term,
            0.0,
            1e-8,
        );
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let r = run_palm(&PalmSpec {
        dim: 2,
        rate: 1.0,
        half_width: 20.0,
        replicates: 10_000,
        seed: 505,
    })
    .unwrap();
    o.check(
        r.failures == 0 && (r.guard_violations as f64) < 1e-3 * r.replicates as f64,
        format!(
            "{} guard violations, {} failures in {} replicates",
            r.guard_violations, r.failures, r.replicates
        ),
    );
    o.within_rel("C(1,2)", r.c.value, 0.8, 0.10, Some(r.c.se));
    o.within_rel("C′(1,2)", r.c_prime.value, 0.6, 0.10, Some(r.c_prime.se));
    let combined = r.c.value + r.c_prime.value - 1.0;
    o.within_se("c_2 vs C + C′ − 1", r.c_d.value, combined, r.c_d.se);
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let (rate, w, hv) = (20.0, 5.0, 0.5);
    let h = Bandwidth::new(hv).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for (window, margin) in [
        (Window::interval(-w, w).unwrap(), 2.0 * hv),
        (Window::rectangle((0.0, 6.0), (0.0, 4.0)).unwrap(), 2.0 * hv),
    ] {
        for r in 0..200 {
            let p = sample_homogeneous_poisson(&window, 8.0, Seed::new(606, r)).unwrap();
            for _ in 0..20 {
                let (lo, hi) = (window.lo(), window.hi());
                let mut x0 = [0.0; 2];
                for k in 0..window.dim().get() {
                    x0[k] = rng.random_range(lo[k] + margin..hi[k] - margin);
                }
                let bd = berman_diggle(&p, &window, x0, h).unwrap();
                let k = kernel_k(&p, &window, x0, h).unwrap();
                worst = worst.max((bd - k).abs() / bd.max(1.0));
            }
        }
    }
    o.within_abs("(a) max |BD − K| deeper than 2h", worst, 0.0, 1e-12);

    let bd = run_experiment(
        &line_spec(
            IntensitySpec::Constant { rate },
            w,
            EstimatorSpec::Bd { bandwidth: hv },
            &[0.0],
            100_000,
            607,
        ),
        false,
    )
    .unwrap();
    no_failures(&mut o, &bd);
    let m = bd.points[0].moments;
    o.within_se(
        "(b) BD variance at x0=0 vs λ/(2h)",
        m.variance,
        rate / (2.0 * hv),
        m.se_variance,
    );

    // at x0 = w only points in [w − h, w] count, each with |b(x,h) ∩ A| = w − x + h:
    // ∫_{w−h}^{w} λ / (w − x + h)² dx = λ (1/h − 1/(2h))
    let target = rate * (1.0 / hv - 1.0 / (2.0 * hv));
    let k = run_experiment(
        &line_spec(
            IntensitySpec::Constant { rate },
            w,
            EstimatorSpec::Kernelk { bandwidth: hv },
            &[w],
            100_000,
            608,
        ),
        false,
    )
    .unwrap();
    no_failures(&mut o, &k);
    let m = k.points[0].moments;
    o.within_se(
        "(c) kernel_K variance at x0=w",
        m.variance,
        target,
        m.se_variance,
    );
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for k in 0..300 {
        let x = (1e-6f64.ln() + (50f64.ln() - 1e-6f64.ln()) * k as f64 / 299.0).exp();
        let rhs = (-x).exp() - x * exp_integral_e1(x).unwrap();
        let e2 = exp_integral_e2(x).unwrap();
        worst = worst.max((e2 - rhs).abs() / e2);
    }
    o.check(
        worst < 1e-10,
        format!("E2 = e^(-x) − x E1 on [1e-6, 50]: max rel err {worst:.2e}"),
    );
    o.within_abs(
        "∫ u e^u E1(u)² du vs 2 − π²/6",
        e1_square_moment_quadrature().unwrap(),
        2.0 - PI * PI / 6.0,
        1e-6,
    );
    for (a, c) in [(1.0, 1.0), (2.0, 0.5), (1.0, 10.0)] {
        let (lhs, rhs) = e1_exponential_integral_identity(a, c).unwrap();
        o.within_abs(
            &format!("γ-identity a={a} c={c}"),
            lhs,
            rhs,
            1e-8 * rhs.abs(),
        );
    }
    o
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
}

fn brute_force(pts: &[Point]) -> BTreeSet<[usize; 3]> {
    let n = pts.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let s = orient(pts[i], pts[j], pts[k]);
                if s == 0.0 {
                    continue;
                }
                let (b, c) = if s > 0.0 { (j, k) } else { (k, j) };
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

fn circumballs_empty(t: &Tessellation) -> bool {
    let pts = t.base().points();
    (0..t.num_cells()).all(|j| {
        let b = t.circumball(j);
        pts.iter().enumerate().all(|(i, p)| {
            t.cell(j).contains(&i)
                || (p[0] - b.center[0]).hypot(p[1] - b.center[1]) >= b.radius * (1.0 - 1e-10)
        })
    })
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut line_bad, mut ball_bad) = (0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(2..80);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let t = build_delaunay(&PointPattern::from_1d(&xs).unwrap()).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let want: BTreeSet<(usize, usize)> = order
            .windows(2)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .collect();
        let got: BTreeSet<(usize, usize)> = t
            .cells()
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        line_bad += usize::from(got != want || t.num_cells() != n - 1);
        ball_bad += usize::from(!circumballs_empty(&t));
    }
    o.check(
        line_bad == 0,
        format!("d=1: {line_bad} of 1000 patterns differ from sort-and-pair"),
    );
    let (mut plane_bad, mut tested) = (0, 0);
    while tested < 200 {
        let n = rng.random_range(3..=8);
        let pts: Vec<Point> = (0..n)
            .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
            .collect();
        if (2..n).all(|k| orient(pts[0], pts[1], pts[k]) == 0.0) {
            continue;
        }
        let t = build_delaunay(&PointPattern::real(Dim::Two, pts.clone()).unwrap()).unwrap();
        tested += 1;
        let got: BTreeSet<[usize; 3]> = t
            .cells()
            .map(|c| {
                let mut v = [c[0], c[1], c[2]];
                v.sort_unstable();
                v
            })
            .collect();
        plane_bad += usize::from(got != brute_force(&pts));
        ball_bad += usize::from(!circumballs_empty(&t));
    }
    o.check(
        plane_bad == 0,
        format!("d=2: {plane_bad} of 200 patterns differ from empty-circumdisk enumeration"),
    );
    // larger planar patterns for the empty-circumball property
    for r in 0..100 {
        let w = Window::rectangle((0.0, 10.0), (0.0, 10.0)).unwrap();
        let p = sample_homogeneous_poisson(&w, 3.0, Seed::new(809, r)).unwrap();
        if p.real_count() >= 3 {
            ball_bad += usize::from(!circumballs_empty(&build_delaunay(&p).unwrap()));
        }
    }
    o.check(
        ball_bad == 0,
        format!("{ball_bad} tessellations with a non-empty circumball"),
    );
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 mass preservation", criterion_1),
        ("2 1D unbiasedness", criterion_2),
        ("3 1D asymptotic variance", criterion_3),
        ("4 1D closed-form mean", criterion_4),
        ("5 2D constants", criterion_5),
        ("6 kernel estimators", criterion_6),
        ("7 special functions", criterion_7),
        ("8 geometry oracles", criterion_8),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {name}: {} ({secs:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" }
        );
        for l in &outcome.lines {
            println!("{l}");
        }
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
