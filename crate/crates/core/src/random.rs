// SPDX-License-Identifier: MIT OR Apache-2.0

//! Reproducible random test instances.
//!
//! Every coefficient is drawn from its own generator keyed by
//! `(seed, stream, multi-index)`, so the value at an index does not depend on
//! the window. Growing a window therefore only adds coefficients.

use crate::rep_core::{CoeffTensor, IrrepParams, TensorParams, Window};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Width of the Gaussian envelope, in index units.
pub const DEFAULT_SIGMA: f64 = 2.0;

fn mix(mut h: u64, x: u64) -> u64 {
    // splitmix64 finalizer over the running hash
    h ^= x
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(h << 6)
        .wrapping_add(h >> 2);
    h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^ (h >> 31)
}

/// A generator for one `(seed, stream)` pair.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(0x0063_6f68_6f6d, seed), stream))
}

fn unit_complex(seed: u64, stream: u64, k: &[i64]) -> Complex64 {
    let mut h = mix(mix(0x0063_6f68_6f6d, seed), stream);
    for &x in k {
        h = mix(h, x as u64);
    }
    let mut r = ChaCha8Rng::seed_from_u64(h);
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn centre(p: &IrrepParams) -> f64 {
    if p.is_discrete() {
        p.i_nu as f64 + 2.0
    } else {
        0.0
    }
}

/// Random coefficients under a Gaussian envelope, zero outside `support`.
///
/// The envelope is `exp(-|k - c|^2 / (2 sigma^2))` with `c = 0` on non-discrete
/// axes and `c = n + 2` on discrete ones.
pub fn decaying_tensor(
    params: &TensorParams,
    window: &Window,
    support: &Window,
    seed: u64,
    stream: u64,
    sigma: f64,
) -> CoeffTensor {
    let centres: Vec<f64> = params.factors().iter().map(centre).collect();
    CoeffTensor::from_fn(params.clone(), window.clone(), |k| {
        if !support.contains(k) {
            return Complex64::new(0.0, 0.0);
        }
        let r2: f64 = k.iter().zip(&centres).map(|(&x, c)| (x as f64 - c).powi(2)).sum();
        unit_complex(seed, stream, k) * (-r2 / (2.0 * sigma * sigma)).exp()
    })
    .expect("window was built for these params")
}

/// Window shrunk by `by` on every truncation edge (discrete bottoms stay put).
pub fn shrink(params: &TensorParams, window: &Window, by: usize) -> Window {
    let mut w = window.clone();
    for _ in 0..by {
        w = w.interior(params).expect("window too small to shrink");
    }
    w
}

/// Random `h` on `window` whose support keeps two indices clear of each
/// truncation edge, so that `X h` stays inside the interior.
pub fn interior_tensor(params: &TensorParams, window: &Window, seed: u64, stream: u64) -> CoeffTensor {
    let support = shrink(params, window, 2);
    decaying_tensor(params, window, &support, seed, stream, DEFAULT_SIGMA)
}

/// `f = sum_i X_i h_i` with independent random `h_i`, restricted to `window`.
pub fn coboundary(params: &TensorParams, window: &Window, seed: u64, stream: u64) -> CoeffTensor {
    coboundary_on(params, window, &shrink(params, window, 2), seed, stream)
}

/// As [`coboundary`] with the `h_i` supported on `support`, so the same `f`
/// can be placed in windows of different size.
pub fn coboundary_on(params: &TensorParams, window: &Window, support: &Window, seed: u64, stream: u64) -> CoeffTensor {
    let mut f = CoeffTensor::zeros(params.clone(), window.clone()).expect("valid window");
    for axis in 0..params.dim() {
        let s = stream.wrapping_mul(64).wrapping_add(axis as u64);
        let h = decaying_tensor(params, window, support, seed, s, DEFAULT_SIGMA);
        let xh = h.apply_x(axis).expect("axis in range");
        f.add_scaled_embedded(Complex64::new(1.0, 0.0), &xh)
            .expect("same params");
    }
    f
}

/// Parameter draw of the given series family, varied by `index`.
pub fn draw_factor(family: usize, index: u64, seed: u64) -> IrrepParams {
    let mut r = rng(seed, 0xfac7_0000 + family as u64 * 1000 + index);
    match family {
        0 => IrrepParams::principal(0, r.random_range(0.0..6.0)),
        1 => IrrepParams::principal(1, r.random_range(0.05..6.0)),
        2 => {
            let nu: f64 = r.random_range(0.05..0.95);
            IrrepParams::complementary(if r.random::<bool>() { nu } else { -nu }).expect("|nu| < 1")
        }
        3 => IrrepParams::first_discrete(r.random_range(1..=6)),
        4 => IrrepParams::second_discrete(r.random_range(1..=6)),
        _ => panic!("series family index {family} is out of range"),
    }
}

/// Human-readable family names matching [`draw_factor`].
pub const FAMILY_NAMES: [&str; 5] = [
    "first_principal",
    "second_principal",
    "complementary",
    "first_discrete",
    "second_discrete",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_do_not_depend_on_window() {
        let p = IrrepParams::principal(0, 1.0);
        let params = TensorParams::new(vec![p, p]).unwrap();
        let small = Window::symmetric(&params, 4);
        let big = Window::symmetric(&params, 9);
        let a = decaying_tensor(&params, &small, &small, 7, 1, 2.0);
        let b = decaying_tensor(&params, &big, &big, 7, 1, 2.0);
        small.for_each(|_, k| assert_eq!(a.get(k), b.get(k)));
    }

    #[test]
    fn coboundary_support_is_interior() {
        let p = IrrepParams::first_discrete(2);
        let q = IrrepParams::complementary(0.4).unwrap();
        let params = TensorParams::new(vec![p, q]).unwrap();
        let w = Window::symmetric(&params, 6);
        let f = coboundary(&params, &w, 3, 0);
        let inner = w.interior(&params).unwrap();
        w.for_each(|_, k| {
            if !inner.contains(k) {
                assert_eq!(f.get(k), Complex64::new(0.0, 0.0));
            }
        });
        assert!(f.norm0() > 0.0);
    }
}
