// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomError {
    #[error("inconsistent parameters: {0}")]
    InconsistentParameters(String),
    #[error("ambiguous series for mu = {mu}, epsilon = {epsilon}: a series hint is required")]
    AmbiguousSeries { mu: f64, epsilon: u8 },
    #[error("index {k} lies below the starting index {start}")]
    IndexBelowStart { k: i64, start: i64 },
    #[error("index {k} is outside the admissible range on axis {axis}")]
    IndexOutOfRange { axis: usize, k: i64 },
    #[error("division by zero in beta at k = {k}")]
    DivisionByZero { k: i64 },
    #[error("D1 is not invariant in a discrete series representation")]
    NotInvariant,
    #[error("degenerate Wronskian at l = {l}")]
    DegenerateWronskian { l: i64 },
    #[error("operation requires a non-discrete series")]
    DiscreteSeries,
    #[error("kernel defect {defect:e} exceeds the bound {bound:e}")]
    PreconditionDefect { defect: f64, bound: f64 },
    #[error("residual {residual:e} exceeds {bound:e} at window radius {radius}")]
    NonConvergent { radius: i64, residual: f64, bound: f64 },
    #[error("{context}: {source}")]
    Slice {
        context: String,
        #[source]
        source: Box<CohomError>,
    },
    #[error("exterior derivative of a top-degree form")]
    TopDegreeInput,
    #[error("cannot restrict along axis {axis}: every component contains it")]
    AxisInIndex { axis: usize },
    #[error("form is not closed: residual {residual:e} exceeds {bound:e}")]
    NotClosed { residual: f64, bound: f64 },
    #[error("unsupported lemma id '{0}'")]
    UnsupportedLemma(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl CohomError {
    /// Wraps an error with the slice or sub-problem where it happened.
    pub fn in_slice(self, context: impl Into<String>) -> Self {
        CohomError::Slice {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True when the root cause is a numerical tolerance failure rather than bad input.
    pub fn is_tolerance_failure(&self) -> bool {
        match self {
            CohomError::PreconditionDefect { .. } | CohomError::NonConvergent { .. } | CohomError::NotClosed { .. } => {
                true
            }
            CohomError::Slice { source, .. } => source.is_tolerance_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, CohomError>;
