// SPDX-License-Identifier: MIT OR Apache-2.0

//! Representation parameters, basis norms, Sobolev weights, and the action of `X`.

mod json;
mod logc;
mod params;
mod tensor;

pub use json::{FactorJson, TensorJson, TENSOR_SCHEMA};
pub use logc::LogComplex;
pub use params::{classify, sobolev_weight, IndexSet, IrrepParams, Series, SeriesHint, TensorParams};
pub use tensor::{CoeffTensor, Window};
