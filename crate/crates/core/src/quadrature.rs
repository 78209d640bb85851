//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! summed estimate meets `max(abs_tol, rel_tol * |I|)`. A [`Quadrature`]
//! carries an evaluation budget shared by every integral computed through
//! it, so nested integrals are capped as a whole.

use alloc::collections::BinaryHeap;
use core::cell::Cell;
use core::cmp::Ordering;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default cap on integrand evaluations for one (possibly nested) computation.
pub const DEFAULT_EVALUATION_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum QuadratureError {
    #[error("tolerance not met: estimate {value} with error {error}")]
    NotConverged { value: f64, error: f64 },
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("integrand returned a non-finite value")]
    NonFinite,
    #[error("invalid quadrature tolerances")]
    InvalidSpec,
}

/// Tolerances and subdivision limit for one integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
    ) -> Result<Self, QuadratureError> {
        if !(rel_tol > 0.0 && abs_tol > 0.0 && max_subdivisions > 0) {
            return Err(QuadratureError::InvalidSpec);
        }
        Ok(QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    /// The same spec with both tolerances divided by `factor`.
    pub fn tighter(&self, factor: f64) -> Self {
        QuadratureSpec {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrator with a shared evaluation budget.
#[derive(Debug)]
pub struct Quadrature {
    spec: QuadratureSpec,
    evaluations: Cell<u64>,
    budget: u64,
}

impl Quadrature {
    pub fn new(spec: QuadratureSpec) -> Self {
        Quadrature::with_budget(spec, DEFAULT_EVALUATION_BUDGET)
    }

    pub fn with_budget(spec: QuadratureSpec, budget: u64) -> Self {
        Quadrature {
            spec,
            evaluations: Cell::new(0),
            budget,
        }
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }

    /// `∫_a^b f` with this integrator's spec. Empty or reversed intervals
    /// integrate to zero.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, QuadratureError> {
        self.integrate_with(&self.spec, f, a, b)
    }

    pub fn integrate_with<F: Fn(f64) -> f64>(
        &self,
        spec: &QuadratureSpec,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, QuadratureError> {
        if !(b > a) {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
            });
        }
        let first = self.kronrod(&f, a, b)?;
        let mut total = first.value;
        let mut total_err = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let mut pieces = 1;
        while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
            if pieces >= spec.max_subdivisions {
                return Err(QuadratureError::NotConverged {
                    value: total,
                    error: total_err,
                });
            }
            let worst = heap.pop().unwrap();
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // interval cannot be split further
                heap.push(worst);
                return Err(QuadratureError::NotConverged {
                    value: total,
                    error: total_err,
                });
            }
            let left = self.kronrod(&f, worst.a, mid)?;
            let right = self.kronrod(&f, mid, worst.b)?;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            pieces += 1;
            // resynchronise to avoid drift in the running sums
            if pieces % 64 == 0 {
                total = heap.iter().map(|s| s.value).sum();
                total_err = heap.iter().map(|s| s.error).sum();
            }
        }
        let value = heap.iter().map(|s| s.value).sum();
        let error = heap.iter().map(|s| s.error).sum();
        Ok(Estimate { value, error })
    }

    /// `∫_a^∞ f` through the map `x = a + t / (1 - t)`.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
    ) -> Result<Estimate, QuadratureError> {
        self.integrate(
            |t| {
                let u = 1.0 - t;
                let x = a + t / u;
                let y = f(x) / (u * u);
                if y.is_finite() {
                    y
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    fn kronrod<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
    ) -> Result<Segment, QuadratureError> {
        let used = self.evaluations.get() + 15;
        if used > self.budget {
            return Err(QuadratureError::BudgetExhausted(self.budget));
        }
        self.evaluations.set(used);
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        let mut res_k = fc * WGK[7];
        let mut res_g = fc * WG[3];
        let mut res_abs = (fc * WGK[7]).abs();
        let mut fv1 = [0.0; 7];
        let mut fv2 = [0.0; 7];
        for j in 0..7 {
            let dx = half * XGK[j];
            let f1 = f(center - dx);
            let f2 = f(center + dx);
            fv1[j] = f1;
            fv2[j] = f2;
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        if !res_k.is_finite() {
            return Err(QuadratureError::NonFinite);
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }
        let value = res_k * half;
        res_abs *= half.abs();
        res_asc *= half.abs();
        let mut error = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && error != 0.0 {
            error = res_asc * libm::pow(200.0 * error / res_asc, 1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            error = error.max(50.0 * f64::EPSILON * res_abs);
        }
        Ok(Segment { a, b, value, error })
    }
}

/// Fixed 15-point Kronrod rule on `[a, b]`, with no error control.
pub fn kronrod15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = WGK[7] * f(center);
    for j in 0..7 {
        let dx = half * XGK[j];
        sum += WGK[j] * (f(center - dx) + f(center + dx));
    }
    sum * half
}
