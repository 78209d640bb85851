#![no_std]
// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Delaunay tessellation field estimation (DTFE) and kernel estimators of
//! the intensity of a point process on an interval or a rectangle, with the
//! Poisson moment formulas needed to check them.

extern crate alloc;

pub mod analytic;
pub mod estimators;
pub mod geometry;
pub mod palm;
pub mod pointprocess;
pub mod quadrature;
