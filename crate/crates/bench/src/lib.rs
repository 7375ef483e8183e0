//! Fixed, seeded inputs shared by the criterion benches.

use cohom_core::random::{coboundary, interior_tensor};
use cohom_core::{CoeffTensor, IrrepParams, TensorParams, Window};

pub const SEED: u64 = 20240611;

/// Principal times complementary: the two factor kinds with index set all of Z.
pub fn pair() -> TensorParams {
    TensorParams::new(vec![
        IrrepParams::principal(0, 1.5),
        IrrepParams::complementary(0.4).expect("0 < nu < 1"),
    ])
    .expect("two factors")
}

pub fn triple() -> TensorParams {
    TensorParams::new(vec![
        IrrepParams::principal(1, 0.75),
        IrrepParams::complementary(0.4).expect("0 < nu < 1"),
        IrrepParams::first_discrete(2),
    ])
    .expect("three factors")
}

/// Generic tensor supported strictly inside a window of the given radius.
pub fn generic(params: &TensorParams, radius: i64) -> CoeffTensor {
    interior_tensor(params, &Window::symmetric(params, radius), SEED, 0)
}

/// Coboundary input for the top-degree solver.
pub fn solvable(params: &TensorParams, radius: i64) -> CoeffTensor {
    coboundary(params, &Window::symmetric(params, radius), SEED, 1)
}
