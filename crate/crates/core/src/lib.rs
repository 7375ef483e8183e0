// SPDX-License-Identifier: MIT OR Apache-2.0

//! Coboundary solvers for the diagonal action in irreducible unitary
//! representations of products of SL(2,R), at truncated-window scale.
//!
//! Axes are 0-based throughout the library. The CLI and the JSON form keys use
//! 1-based axes.

pub mod distributions;
pub mod error;
pub mod forms;
pub mod lemma_lab;
pub mod random;
pub mod rep_core;
pub mod solver1d;
pub mod solver_nd;
pub mod tensor_ops;

pub use error::{CohomError, Result};
pub use rep_core::{
    classify, sobolev_weight, CoeffTensor, IndexSet, IrrepParams, LogComplex, Series, SeriesHint, TensorParams, Window,
};
