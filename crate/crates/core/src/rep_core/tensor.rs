// SPDX-License-Identifier: MIT OR Apache-2.0

//! Truncated coefficient tensors over the product basis and the operators acting on them.

use super::params::{IrrepParams, TensorParams};
use crate::error::{CohomError, Result};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-axis inclusive index ranges `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    bounds: Vec<(i64, i64)>,
}

impl Window {
    pub fn new(bounds: Vec<(i64, i64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(CohomError::Shape("window needs at least one axis".into()));
        }
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            if lo > hi {
                return Err(CohomError::Shape(format!("axis {a}: empty range [{lo}, {hi}]")));
            }
        }
        Ok(Window { bounds })
    }

    /// `2 radius + 1` indices per axis: centred on 0, or starting at `n` for discrete factors.
    pub fn symmetric(params: &TensorParams, radius: i64) -> Self {
        let bounds = params
            .factors()
            .iter()
            .map(|p| {
                if p.is_discrete() {
                    (p.i_nu, p.i_nu + 2 * radius)
                } else {
                    (-radius, radius)
                }
            })
            .collect();
        Window { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    pub fn axis(&self, a: usize) -> (i64, i64) {
        self.bounds[a]
    }

    pub fn axis_len(&self, a: usize) -> usize {
        let (lo, hi) = self.bounds[a];
        (hi - lo + 1) as usize
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.axis_len(a)).collect()
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.axis_len(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.dim() && k.iter().zip(&self.bounds).all(|(&x, &(lo, hi))| lo <= x && x <= hi)
    }

    /// Row-major flat offset of `k`, if inside.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut idx = 0usize;
        for (a, &x) in k.iter().enumerate() {
            idx = idx * self.axis_len(a) + (x - self.bounds[a].0) as usize;
        }
        Some(idx)
    }

    /// Multi-index of a flat offset.
    pub fn multi_index(&self, mut flat: usize, out: &mut [i64]) {
        for a in (0..self.dim()).rev() {
            let n = self.axis_len(a);
            out[a] = self.bounds[a].0 + (flat % n) as i64;
            flat /= n;
        }
    }

    /// Calls `f(flat, k)` for every multi-index in row-major order.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[i64])) {
        let d = self.dim();
        let mut k: Vec<i64> = self.bounds.iter().map(|b| b.0).collect();
        let total = self.len();
        for flat in 0..total {
            f(flat, &k);
            for a in (0..d).rev() {
                if k[a] < self.bounds[a].1 {
                    k[a] += 1;
                    break;
                }
                k[a] = self.bounds[a].0;
            }
        }
    }

    /// Grows the listed axes by one in each direction the index set allows.
    pub fn expanded(&self, params: &TensorParams, axes: &[usize]) -> Window {
        let mut bounds = self.bounds.clone();
        for &a in axes {
            let p = params.factor(a);
            let (lo, hi) = bounds[a];
            bounds[a] = (if p.contains(lo - 1) { lo - 1 } else { lo }, hi + 1);
        }
        Window { bounds }
    }

    /// Shrinks every truncation edge by one; edges at the bottom of a discrete
    /// index set are true boundaries and stay.
    pub fn interior(&self, params: &TensorParams) -> Option<Window> {
        let mut bounds = Vec::with_capacity(self.dim());
        for (a, &(lo, hi)) in self.bounds.iter().enumerate() {
            let lo2 = if params.factor(a).contains(lo - 1) { lo + 1 } else { lo };
            let hi2 = hi - 1;
            if lo2 > hi2 {
                return None;
            }
            bounds.push((lo2, hi2));
        }
        Some(Window { bounds })
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let mut bounds = Vec::with_capacity(self.dim());
        for (&(a0, a1), &(b0, b1)) in self.bounds.iter().zip(&other.bounds) {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if lo > hi {
                return None;
            }
            bounds.push((lo, hi));
        }
        Some(Window { bounds })
    }

    pub fn without(&self, axes: &[usize]) -> Option<Window> {
        let bounds: Vec<_> = self
            .bounds
            .iter()
            .enumerate()
            .filter(|(a, _)| !axes.contains(a))
            .map(|(_, b)| *b)
            .collect();
        if bounds.is_empty() {
            None
        } else {
            Some(Window { bounds })
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Window {
        Window {
            bounds: order.iter().map(|&a| self.bounds[a]).collect(),
        }
    }

    /// Largest half-width over the axes, reported as the truncation radius.
    pub fn radius(&self) -> i64 {
        self.bounds.iter().map(|&(lo, hi)| (hi - lo) / 2).max().unwrap_or(0)
    }

    fn check_against(&self, params: &TensorParams) -> Result<()> {
        if self.dim() != params.dim() {
            return Err(CohomError::Shape(format!(
                "window has {} axes but there are {} factors",
                self.dim(),
                params.dim()
            )));
        }
        for (a, (&(lo, _), p)) in self.bounds.iter().zip(params.factors()).enumerate() {
            if !p.contains(lo) {
                return Err(CohomError::IndexOutOfRange { axis: a, k: lo });
            }
        }
        Ok(())
    }
}

/// Dense complex coefficients `f(k)` of `f = sum f(k) u_k` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    params: TensorParams,
    window: Window,
    coeffs: Vec<Complex64>,
}

impl CoeffTensor {
    pub fn new(params: TensorParams, window: Window, coeffs: Vec<Complex64>) -> Result<Self> {
        window.check_against(&params)?;
        if coeffs.len() != window.len() {
            return Err(CohomError::Shape(format!(
                "{} coefficients for a window of size {}",
                coeffs.len(),
                window.len()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CohomError::Shape("coefficients must be finite".into()));
        }
        Ok(CoeffTensor { params, window, coeffs })
    }

    pub fn zeros(params: TensorParams, window: Window) -> Result<Self> {
        let n = window.len();
        Self::new(params, window, vec![ZERO; n])
    }

    pub fn from_fn(params: TensorParams, window: Window, mut f: impl FnMut(&[i64]) -> Complex64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(window.len());
        window.for_each(|_, k| coeffs.push(f(k)));
        Self::new(params, window, coeffs)
    }

    /// One-factor delta `u_k`.
    pub fn delta(p: IrrepParams, window: (i64, i64), k: i64) -> Result<Self> {
        let w = Window::new(vec![window])?;
        Self::from_fn(TensorParams::single(p), w, |idx| {
            if idx[0] == k {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    pub(crate) fn from_parts_unchecked(params: TensorParams, window: Window, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), window.len());
        CoeffTensor { params, window, coeffs }
    }

    pub fn params(&self) -> &TensorParams {
        &self.params
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Coefficient at `k`; zero outside the window.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        self.window.flat_index(k).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let i = self
            .window
            .flat_index(k)
            .ok_or(CohomError::IndexOutOfRange { axis: 0, k: k[0] })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `||u_k||^2` along each axis of the window.
    pub fn axis_norm_sq(&self) -> Vec<Vec<f64>> {
        self.params
            .factors()
            .iter()
            .zip(self.window.bounds())
            .map(|(p, &(lo, hi))| p.norm_sq_range(lo, hi))
            .collect()
    }

    fn axis_weight_terms(&self) -> Vec<Vec<f64>> {
        self.params
            .factors()
            .iter()
            .zip(self.window.bounds())
            .map(|(p, &(lo, hi))| (lo..=hi).map(|k| p.weight_term(k)).collect())
            .collect()
    }

    /// Weighted sum of `w(k)^tau |f(k)|^2 ||u_k||^2`, then square-rooted.
    pub fn sobolev_norm(&self, tau: f64) -> f64 {
        let norms = self.axis_norm_sq();
        let terms = self.axis_weight_terms();
        let shape = self.window.shape();
        let d = shape.len();
        let mut pos = vec![0usize; d];
        let mut acc = 0.0;
        for z in &self.coeffs {
            let mut base = 1.0;
            let mut nrm = 1.0;
            for a in 0..d {
                base += terms[a][pos[a]];
                nrm *= norms[a][pos[a]];
            }
            let w = if tau == 0.0 { 1.0 } else { base.powf(tau) };
            acc += w * z.norm_sqr() * nrm;
            for a in (0..d).rev() {
                pos[a] += 1;
                if pos[a] < shape[a] {
                    break;
                }
                pos[a] = 0;
            }
        }
        acc.sqrt()
    }

    pub fn norm0(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `<f, g>_0 = sum f(k) conj(g(k)) ||u_k||^2` over the common window.
    pub fn inner0(&self, other: &CoeffTensor) -> Complex64 {
        let Some(common) = self.window.intersect(&other.window) else {
            return ZERO;
        };
        let mut acc = ZERO;
        common.for_each(|_, k| {
            let nrm: f64 = self
                .params
                .factors()
                .iter()
                .zip(k)
                .map(|(p, &x)| p.basis_norm_sq(x).unwrap_or(0.0))
                .product();
            acc += self.get(k) * other.get(k).conj() * nrm;
        });
        acc
    }

    /// Same coefficients on another window: zero-padded where new, dropped where cut.
    pub fn embed(&self, window: &Window) -> Result<CoeffTensor> {
        if window == &self.window {
            return Ok(self.clone());
        }
        CoeffTensor::from_fn(self.params.clone(), window.clone(), |k| self.get(k))
    }

    fn same_shape(&self, other: &CoeffTensor) -> Result<()> {
        if self.window != other.window || self.params != other.params {
            return Err(CohomError::Shape("operands differ in params or window".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &CoeffTensor) -> Result<CoeffTensor> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self::from_parts_unchecked(
            self.params.clone(),
            self.window.clone(),
            coeffs,
        ))
    }

    pub fn add(&self, other: &CoeffTensor) -> Result<CoeffTensor> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts_unchecked(
            self.params.clone(),
            self.window.clone(),
            coeffs,
        ))
    }

    pub fn scale(&self, c: Complex64) -> CoeffTensor {
        let coeffs = self.coeffs.iter().map(|z| z * c).collect();
        Self::from_parts_unchecked(self.params.clone(), self.window.clone(), coeffs)
    }

    /// Adds `c * other` on the part of `other` inside this window.
    pub fn add_scaled_embedded(&mut self, c: Complex64, other: &CoeffTensor) -> Result<()> {
        if self.params != other.params {
            return Err(CohomError::Shape("operands differ in params".into()));
        }
        if self.window == other.window {
            for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *a += c * b;
            }
            return Ok(());
        }
        let Some(common) = self.window.intersect(&other.window) else {
            return Ok(());
        };
        common.for_each(|_, k| {
            let i = self.window.flat_index(k).expect("inside common window");
            self.coeffs[i] += c * other.get(k);
        });
        Ok(())
    }

    /// Action of `X` on one axis. The window grows by one on that axis.
    pub fn apply_x(&self, axis: usize) -> Result<CoeffTensor> {
        if axis >= self.dim() {
            return Err(CohomError::Shape(format!("axis {axis} out of range")));
        }
        let p = *self.params.factor(axis);
        let out_window = self.window.expanded(&self.params, &[axis]);
        let shape = self.window.shape();
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let (lo, _) = self.window.axis(axis);
        let len = shape[axis] as i64;
        let (lo2, hi2) = out_window.axis(axis);
        let len2 = (hi2 - lo2 + 1) as usize;
        let bp: Vec<Complex64> = (lo2 - 1..=hi2 - 1).map(|k| p.b_plus(k)).collect();
        let bm: Vec<Complex64> = (lo2 + 1..=hi2 + 1).map(|k| p.b_minus(k)).collect();
        let mut out = vec![ZERO; outer * len2 * inner];
        for o in 0..outer {
            for i2 in 0..len2 {
                let k = lo2 + i2 as i64;
                let dst = (o * len2 + i2) * inner;
                let below = k - 1 - lo;
                if (0..len).contains(&below) {
                    let src = (o * shape[axis] + below as usize) * inner;
                    for j in 0..inner {
                        out[dst + j] += bp[i2] * self.coeffs[src + j];
                    }
                }
                let above = k + 1 - lo;
                if (0..len).contains(&above) {
                    let src = (o * shape[axis] + above as usize) * inner;
                    for j in 0..inner {
                        out[dst + j] -= bm[i2] * self.coeffs[src + j];
                    }
                }
            }
        }
        Ok(Self::from_parts_unchecked(self.params.clone(), out_window, out))
    }

    /// Fixes the listed axes and scales by `prod ||u_k||` over them.
    pub fn project(&self, fixed: &[(usize, i64)]) -> Result<CoeffTensor> {
        let d = self.dim();
        let mut scales = Vec::with_capacity(fixed.len());
        let mut axes = Vec::with_capacity(fixed.len());
        for &(a, k) in fixed {
            if a >= d || axes.contains(&a) {
                return Err(CohomError::Shape(format!("invalid or repeated axis {a}")));
            }
            let (lo, hi) = self.window.axis(a);
            if k < lo || k > hi {
                return Err(CohomError::IndexOutOfRange { axis: a, k });
            }
            axes.push(a);
            scales.push(self.params.factor(a).basis_norm_sq(k)?.sqrt());
        }
        let params = self
            .params
            .without(&axes)
            .ok_or_else(|| CohomError::Shape("cannot fix every axis".into()))?;
        let window = self.window.without(&axes).expect("same axes as params");
        let rest: Vec<usize> = (0..d).filter(|a| !axes.contains(a)).collect();
        let mut full = vec![0i64; d];
        for &(a, k) in fixed {
            full[a] = k;
        }
        let mut coeffs = Vec::with_capacity(window.len());
        window.for_each(|_, k| {
            for (i, &a) in rest.iter().enumerate() {
                full[a] = k[i];
            }
            // one multiply per fixed axis, in list order, so that projecting in
            // stages gives bitwise the same result
            coeffs.push(scales.iter().fold(self.get(&full), |z, &s| z * s));
        });
        Ok(Self::from_parts_unchecked(params, window, coeffs))
    }

    /// Reorders axes: axis `i` of the result is axis `order[i]` of `self`.
    pub fn permute_axes(&self, order: &[usize]) -> Result<CoeffTensor> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if order.len() != d || order.iter().any(|&a| a >= d || std::mem::replace(&mut seen[a], true)) {
            return Err(CohomError::Shape(format!("{order:?} is not a permutation of 0..{d}")));
        }
        let params = self.params.permuted(order);
        let window = self.window.permuted(order);
        let mut src = vec![0i64; d];
        CoeffTensor::from_fn(params, window, |k| {
            for (i, &a) in order.iter().enumerate() {
                src[a] = k[i];
            }
            self.get(&src)
        })
    }
}
