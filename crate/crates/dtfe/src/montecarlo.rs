//! Replicated experiments: empirical moments of the estimators, and direct
//! estimates of the Palm constants behind the DTFE's asymptotic variance.

use dtfe_core::estimators::{berman_diggle, dtfe_evaluate, dtfe_field, kernel_k, Bandwidth};
use dtfe_core::geometry::{Dim, Point, PointPattern, Window};
use dtfe_core::palm::palm_statistics;
use dtfe_core::pointprocess::{
    sample_homogeneous_poisson, sample_inhomogeneous_poisson, IntensityModel, Seed,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EstimatorSpec, ExperimentSpec};
use crate::Error;

/// Sample mean and variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_mean: f64,
    /// From the fourth central moment: `Var(s²) ≈ (m4 − (R−3)/(R−1) s⁴) / R`.
    pub se_variance: f64,
}

impl Moments {
    /// Summation runs in slice order, so equal inputs give identical bits.
    pub fn from_values(values: &[f64]) -> Option<Moments> {
        let r = values.len();
        if r < 2 {
            return None;
        }
        let n = r as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (n - 1.0);
        let m4 = m4 / n;
        let var_s2 = ((m4 - (n - 3.0) / (n - 1.0) * variance * variance) / n).max(0.0);
        Some(Moments {
            mean,
            variance,
            se_mean: (variance / n).sqrt(),
            se_variance: var_s2.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMoments {
    pub x0: Vec<f64>,
    #[serde(flatten)]
    pub moments: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub config: ExperimentSpec,
    pub seed: u64,
    pub replicates: u64,
    /// Replicates that errored and were left out of the moments.
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    pub points: Vec<PointMoments>,
    /// Row `r` holds the estimates of replicate `r` at every point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicate_values: Option<Vec<Vec<f64>>>,
}

pub fn sample(
    window: &Window,
    intensity: &IntensityModel,
    seed: Seed,
) -> Result<PointPattern, Error> {
    Ok(match *intensity {
        IntensityModel::Constant { rate } => sample_homogeneous_poisson(window, rate, seed)?,
        _ => sample_inhomogeneous_poisson(window, intensity, seed)?,
    })
}

/// Estimates at `points` for one pattern.
pub fn evaluate(
    pattern: &PointPattern,
    window: &Window,
    estimator: &EstimatorSpec,
    points: &[Point],
) -> Result<Vec<f64>, Error> {
    match *estimator {
        EstimatorSpec::Dtfe { correction } => {
            let est = dtfe_field(pattern, window, correction.into())?;
            Ok(points.iter().map(|&x| dtfe_evaluate(&est, x)).collect())
        }
        EstimatorSpec::Bd { bandwidth } => {
            let h = Bandwidth::new(bandwidth)?;
            points
                .iter()
                .map(|&x| Ok(berman_diggle(pattern, window, x, h)?))
                .collect()
        }
        EstimatorSpec::Kernelk { bandwidth } => {
            let h = Bandwidth::new(bandwidth)?;
            points
                .iter()
                .map(|&x| Ok(kernel_k(pattern, window, x, h)?))
                .collect()
        }
    }
}

/// Runs `spec.replicates` independent replicates, replicate `r` drawing
/// from `Seed::new(spec.seed, r)`. Parallel over replicates on the current
/// rayon pool; the reduction runs in replicate order.
pub fn run_experiment(spec: &ExperimentSpec, keep_values: bool) -> Result<MomentReport, Error> {
    let resolved = spec.validate()?;
    let rows: Vec<Result<Vec<f64>, Error>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let p = sample(
                &resolved.window,
                &resolved.intensity,
                Seed::new(spec.seed, r),
            )?;
            evaluate(&p, &resolved.window, &spec.estimator, &resolved.points)
        })
        .collect();
    let mut failures = 0;
    let mut first_failure = None;
    let mut ok = Vec::with_capacity(rows.len());
    for row in rows {
        match row {
            Ok(v) => ok.push(v),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let mut points = Vec::with_capacity(resolved.points.len());
    for (k, x0) in spec.points.iter().enumerate() {
        let column: Vec<f64> = ok.iter().map(|row| row[k]).collect();
        let moments = Moments::from_values(&column).ok_or_else(|| {
            Error::Runtime(format!(
                "fewer than 2 successful replicates ({failures} failed)"
            ))
        })?;
        points.push(PointMoments {
            x0: x0.clone(),
            moments,
        });
    }
    Ok(MomentReport {
        config: spec.clone(),
        seed: spec.seed,
        replicates: spec.replicates,
        failures,
        first_failure,
        points,
        replicate_values: keep_values.then_some(ok),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PalmSpec {
    /// 1 or 2.
    pub dim: usize,
    pub rate: f64,
    /// The window is `[-half_width, half_width]^d`, with the origin inserted.
    pub half_width: f64,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmReport {
    pub config: PalmSpec,
    pub seed: u64,
    pub replicates: u64,
    /// Replicates whose cell or neighbour cells were not certified complete.
    pub guard_violations: u64,
    pub failures: u64,
    /// `C(λ, d) = λ² E₁[(1/|W(0)|) Σ_y |W(0) ∩ W(y)| / |W(y)|]`.
    pub c: Estimate,
    /// `C′(λ, d) = λ² E₁[1/|W(0)|]`.
    pub c_prime: Estimate,
    /// `c_d = E₁[(1/|W(0)|)(1 + Σ_y …)] − 1`.
    pub c_d: Estimate,
    /// `c_d − (C + C′)/λ² + 1`, from the same samples.
    pub consistency_gap: f64,
}

/// Per-replicate Palm statistics at rate `λ`, rescaled to unit rate:
/// `1/|W(0)|` and the neighbour term each scale as `λ`.
pub fn run_palm(spec: &PalmSpec) -> Result<PalmReport, Error> {
    if !(spec.rate > 0.0 && spec.rate.is_finite()) {
        return Err(Error::Config {
            field: "rate".into(),
            message: "must be positive".into(),
        });
    }
    if spec.replicates < 2 {
        return Err(Error::Config {
            field: "replicates".into(),
            message: "need at least 2 replicates".into(),
        });
    }
    let dim = Dim::from_usize(spec.dim).ok_or_else(|| Error::Config {
        field: "dim".into(),
        message: "must be 1 or 2".into(),
    })?;
    let window = Window::centered(dim, spec.half_width)?;
    let origin = [0.0, 0.0];
    let samples: Vec<Result<Option<(f64, f64)>, Error>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let mut p = sample_homogeneous_poisson(&window, spec.rate, Seed::new(spec.seed, r))?;
            // a sampled point at the origin has probability zero; drop it if it happens
            if p.points().contains(&origin) {
                let kept: Vec<Point> = p.real_points().filter(|x| *x != origin).collect();
                p = PointPattern::real(dim, kept)?;
            }
            Ok(palm_statistics(&p, &window, origin)?
                .map(|s| (s.inv_w0 / spec.rate, s.neighbor_term / spec.rate)))
        })
        .collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut guard_violations, mut failures) = (0, 0);
    for s in samples {
        match s {
            Ok(Some((x, y))) => {
                a.push(x);
                b.push(y);
            }
            Ok(None) => guard_violations += 1,
            Err(_) => failures += 1,
        }
    }
    let total: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let too_few = || Error::Runtime("fewer than 2 replicates passed the guard".into());
    let ma = Moments::from_values(&a).ok_or_else(too_few)?;
    let mb = Moments::from_values(&b).ok_or_else(too_few)?;
    let mt = Moments::from_values(&total).ok_or_else(too_few)?;
    let l2 = spec.rate * spec.rate;
    Ok(PalmReport {
        config: *spec,
        seed: spec.seed,
        replicates: spec.replicates,
        guard_violations,
        failures,
        c: Estimate {
            value: l2 * mb.mean,
            se: l2 * mb.se_mean,
        },
        c_prime: Estimate {
            value: l2 * ma.mean,
            se: l2 * ma.se_mean,
        },
        c_d: Estimate {
            value: mt.mean - 1.0,
            se: mt.se_mean,
        },
        consistency_gap: (mt.mean - 1.0) - (mb.mean + ma.mean - 1.0),
    })
}

pub fn estimate_c(spec: &PalmSpec) -> Result<Estimate, Error> {
    Ok(run_palm(spec)?.c)
}

pub fn estimate_c_prime(spec: &PalmSpec) -> Result<Estimate, Error> {
    Ok(run_palm(spec)?.c_prime)
}

pub fn estimate_cd(spec: &PalmSpec) -> Result<Estimate, Error> {
    Ok(run_palm(spec)?.c_d)
}

/// `c₁ = 2(2 − π²/6)`.
pub fn c1() -> f64 {
    2.0 * (2.0 - std::f64::consts::PI.powi(2) / 6.0)
}

/// `0.8 + 0.6 − 1`, from the published approximations of `C` and `C′`.
pub const C2_APPROX: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    BermanDiggle,
    Dtfe,
    Indifferent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    /// `λ ω_d h^d`, the expected number of points per test ball.
    pub points_per_ball: f64,
    /// `1 / c_d`.
    pub threshold: f64,
    pub winner: Winner,
}

/// Relative band around the threshold reported as a tie.
pub const TIE_BAND: f64 = 0.01;

/// Interior variances are `λ/(ω_d h^d)` for Berman–Diggle and `c_d λ²` for
/// the DTFE, so the kernel wins once a ball holds more than `1/c_d` points.
pub fn efficiency_crossover(dim: Dim, rate: f64, h: f64, c_d: Option<f64>) -> Crossover {
    let c_d = c_d.unwrap_or(match dim {
        Dim::One => c1(),
        Dim::Two => C2_APPROX,
    });
    let points_per_ball = rate * dim.unit_ball_volume() * h.powi(dim.get() as i32);
    let threshold = 1.0 / c_d;
    let winner = if (points_per_ball - threshold).abs() <= TIE_BAND * threshold {
        Winner::Indifferent
    } else if points_per_ball > threshold {
        Winner::BermanDiggle
    } else {
        Winner::Dtfe
    };
    Crossover {
        points_per_ball,
        threshold,
        winner,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CorrectionSpec, IntensitySpec, ProcessSpec, WindowSpec};

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.se_mean - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
        assert!(m.se_variance > 0.0);
        assert!(Moments::from_values(&[1.0]).is_none());
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(
            efficiency_crossover(Dim::One, 1.0, 0.7, None).winner,
            Winner::Indifferent
        );
        assert_eq!(
            efficiency_crossover(Dim::One, 1.0, 5.0, None).winner,
            Winner::BermanDiggle
        );
        assert_eq!(
            efficiency_crossover(Dim::One, 1.0, 0.05, None).winner,
            Winner::Dtfe
        );
        let c = efficiency_crossover(Dim::One, 2.0, 0.35, None);
        assert!((c.points_per_ball - 1.4).abs() < 1e-12);
        assert!((c.threshold - 1.408_188).abs() < 1e-5);
    }

    #[test]
    fn smoke_two_replicates() {
        let spec = ExperimentSpec {
            process: ProcessSpec {
                window: WindowSpec::centered(Dim::One, 5.0),
                intensity: IntensitySpec::Constant { rate: 20.0 },
            },
            estimator: EstimatorSpec::Dtfe {
                correction: CorrectionSpec::Ghost,
            },
            points: vec![vec![0.0]],
            replicates: 2,
            seed: 9,
        };
        let r = run_experiment(&spec, true).unwrap();
        assert_eq!(r.replicate_values.as_ref().unwrap().len(), 2);
        assert!(r.points[0].moments.mean.is_finite() && r.points[0].moments.variance.is_finite());
        let again = run_experiment(&spec, true).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn palm_in_one_dimension_has_two_neighbours() {
        let spec = PalmSpec {
            dim: 1,
            rate: 1.0,
            half_width: 30.0,
            replicates: 200,
            seed: 3,
        };
        let r = run_palm(&spec).unwrap();
        assert_eq!(r.guard_violations, 0);
        assert!(r.consistency_gap.abs() < 1e-12);
        assert!((r.c_prime.value - 1.0).abs() < 5.0 * r.c_prime.se);
    }
}
