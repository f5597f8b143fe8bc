//! Conservative cascade semi-Lagrangian (CCSL) transport.
//!
//! This crate holds the numerical core and has no dependency on `std`; only
//! `alloc` is required. IO, spectral field solvers and the command line tool
//! live in the companion `ccsl` crate.
//!
//! # Layout
//!
//! - [`grid`]: uniform tensor grids, cell-average storage, quadrature initialisation
//! - [`recon1d`]: one-dimensional conservative remap through a cumulative-mass
//!   interpolant, with the maximum-principle blending limiter
//! - [`cascade2d`]: intermediate cells, column/row sweeps, freestream correction
//! - [`characteristics`]: backward trajectory solvers producing corner maps
//! - [`fields`]: finite-difference Poisson, `E⊥`, modified source, 1D Maxwell
//! - [`bsl`] and [`split`]: baseline schemes
//! - [`diagnostics`]: conserved quantities, error norms, convergence orders

#![no_std]
// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bsl;
pub mod cascade2d;
pub mod characteristics;
pub mod diagnostics;
mod error;
pub mod fields;
pub mod grid;
pub mod lagrange;
pub(crate) mod math;
pub mod quadrature;
pub mod recon1d;
pub mod split;

pub use error::{Error, Result};
pub use grid::{Axis, BoundaryKind, CellField, Grid2D};
