//! Plumbing for nested quadrature: inner integrals run inside closures that
//! must return `f64`, so their failures are parked and reported by the
//! outermost call.

use alloc::vec::Vec;
use core::cell::Cell;

use super::AnalyticError;
use crate::pointprocess::Intensity;
use crate::quadrature::{kronrod15, Quadrature, QuadratureError, QuadratureSpec};

pub(crate) struct Nested {
    q: Quadrature,
    outer: QuadratureSpec,
    inner: QuadratureSpec,
    failed: Cell<Option<QuadratureError>>,
}

impl Nested {
    /// Inner integrals use tolerances ten times tighter than `spec`.
    pub(crate) fn new(spec: &QuadratureSpec) -> Self {
        Nested {
            q: Quadrature::new(*spec),
            outer: *spec,
            inner: spec.tighter(10.0),
            failed: Cell::new(None),
        }
    }

    /// An integral nested inside another; returns NaN on failure, which
    /// makes the enclosing integral fail too.
    pub(crate) fn inner<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        match self.q.integrate_with(&self.inner, f, a, b) {
            Ok(e) => e.value,
            // the tighter target is headroom; the outer tolerance is the contract
            Err(QuadratureError::NotConverged { value, error })
                if error <= self.outer.abs_tol.max(self.outer.rel_tol * value.abs()) =>
            {
                value
            }
            Err(e) => {
                if self.failed.get().is_none() {
                    self.failed.set(Some(e));
                }
                f64::NAN
            }
        }
    }

    /// [`inner`](Self::inner) for an integrand with a near-singularity at
    /// distance `scale` outside the `a` end (or the `b` end when `at_b`):
    /// the interval is cut at geometrically growing distances from it.
    pub(crate) fn inner_graded<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        scale: f64,
        at_b: bool,
    ) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        if !(scale > 0.0) || scale >= b - a {
            return self.inner(f, a, b);
        }
        let mut total = 0.0;
        let mut near = 0.0;
        let mut step = scale;
        loop {
            let far = (near + step).min(b - a);
            total += if at_b {
                self.inner(&f, b - far, b - near)
            } else {
                self.inner(&f, a + near, a + far)
            };
            if far >= b - a {
                return total;
            }
            near = far;
            step *= 4.0;
        }
    }

    /// Reports a failure parked by an inner integral.
    pub(crate) fn check(&self) -> Result<(), AnalyticError> {
        match self.failed.get() {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }

    pub(crate) fn outer<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<f64, AnalyticError> {
        let r = self.q.integrate_with(&self.outer, f, a, b);
        if let Some(e) = self.failed.get() {
            return Err(e.into());
        }
        Ok(r?.value)
    }
}

/// `L(x) = Λ(lo, x)` on `[lo, hi]`: closed form when the intensity has one,
/// otherwise a table of panel integrals plus one fixed Kronrod panel.
pub(crate) struct Cumulative<'a, I: ?Sized> {
    intensity: &'a I,
    lo: f64,
    step: f64,
    table: Vec<f64>,
}

const PANELS: usize = 1024;

impl<'a, I: Intensity + ?Sized> Cumulative<'a, I> {
    pub(crate) fn new(intensity: &'a I, lo: f64, hi: f64) -> Self {
        let step = (hi - lo) / PANELS as f64;
        let mut table = Vec::new();
        if !intensity.has_closed_form() {
            table.reserve(PANELS + 1);
            let mut acc = 0.0;
            table.push(0.0);
            for k in 0..PANELS {
                let a = lo + k as f64 * step;
                acc += kronrod15(|x| intensity.evaluate([x, 0.0]), a, a + step);
                table.push(acc);
            }
        }
        Cumulative {
            intensity,
            lo,
            step,
            table,
        }
    }

    fn at(&self, x: f64) -> f64 {
        let k = (((x - self.lo) / self.step) as usize).min(PANELS - 1);
        let node = self.lo + k as f64 * self.step;
        self.table[k] + kronrod15(|u| self.intensity.evaluate([u, 0.0]), node, x)
    }

    /// `Λ(c - p, c + q)`; short spans are integrated directly so that
    /// their width is not lost to cancellation.
    pub(crate) fn span(&self, c: f64, p: f64, q: f64) -> f64 {
        let width = p + q;
        if self.table.is_empty() || width >= self.step {
            return self.between(c - p, c + q);
        }
        let start = c - p;
        kronrod15(|r| self.intensity.evaluate([start + r, 0.0]), 0.0, width)
    }

    /// `Λ(a, b)`, zero for `b <= a`.
    pub(crate) fn between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if self.table.is_empty() {
            self.intensity.cumulative(a, b)
        } else {
            self.at(b) - self.at(a)
        }
    }
}
