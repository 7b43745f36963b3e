//! Caputo-type fractional integro-differential equations of order
//! `1 < alpha < 2` driven by sectorial generators: Mittag-Leffler resolvent
//! symbols, whole-line mild solutions by Picard iteration, and numerical
//! diagnostics for asymptotic almost automorphy.
//!
//! Operators are diagonal in a known basis, so the resolvent family acts
//! modewise as `E_a(mu_k t^a)`. Everything is sampled on uniform time grids
//! ([`grid::TimeGrid`], [`grid::Path`]).

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aaadiag;
pub mod error;
pub mod forcing;
pub mod fraccalc;
pub mod grid;
pub mod memory;
pub mod mlf;
pub mod operator;
pub mod quad;
pub mod scenario;
pub mod solver;
