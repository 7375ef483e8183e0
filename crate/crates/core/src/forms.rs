// SPDX-License-Identifier: MIT OR Apache-2.0

//! Differential forms over the commuting vector fields `X_1, ..., X_d`, with
//! coefficients in a tensor product representation.

use crate::distributions::max_kernel_defect;
use crate::error::{CohomError, Result};
use crate::rep_core::{CoeffTensor, TensorJson, TensorParams, Window};
use crate::solver1d::Backend;
use crate::solver_nd::{solve_top_abs, TopOptions};
use crate::tensor_ops::SplitWeight;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Human-readable description of the accepted form format.
pub const FORM_SCHEMA: &str = r#"{"degree":n,"components":{"1,3":<tensor>,...}}  (keys: comma-joined ascending 1-based axes, "" for a 0-form; absent components are zero; every tensor shares factors and window)"#;

/// Ascending `n`-subsets of `0..d` in lexicographic order.
pub fn index_sets(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(i + 1, d, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n <= d {
        go(0, d, n, &mut Vec::new(), &mut out);
    }
    out
}

/// A degree-`n` form: one coefficient tensor per ascending multi-index, all
/// on one window. Axes are 0-based here and 1-based in JSON keys.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialForm {
    params: TensorParams,
    degree: usize,
    window: Window,
    components: BTreeMap<Vec<usize>, CoeffTensor>,
}

impl DifferentialForm {
    pub fn zeros(params: TensorParams, degree: usize, window: Window) -> Result<Self> {
        if degree > params.dim() {
            return Err(CohomError::Shape(format!(
                "degree {degree} exceeds {} factors",
                params.dim()
            )));
        }
        let zero = CoeffTensor::zeros(params.clone(), window.clone())?;
        let components = index_sets(params.dim(), degree)
            .into_iter()
            .map(|i| (i, zero.clone()))
            .collect();
        Ok(DifferentialForm {
            params,
            degree,
            window,
            components,
        })
    }

    /// Builds a form from the given components; the rest are zero.
    pub fn from_components(
        params: TensorParams,
        degree: usize,
        window: Window,
        comps: impl IntoIterator<Item = (Vec<usize>, CoeffTensor)>,
    ) -> Result<Self> {
        let mut w = Self::zeros(params, degree, window)?;
        for (idx, t) in comps {
            w.set_component(&idx, t)?;
        }
        Ok(w)
    }

    pub fn set_component(&mut self, idx: &[usize], t: CoeffTensor) -> Result<()> {
        if t.params() != &self.params || t.window() != &self.window {
            return Err(CohomError::Shape(
                "component params or window differ from the form".into(),
            ));
        }
        let slot = self
            .components
            .get_mut(idx)
            .ok_or_else(|| CohomError::Shape(format!("{idx:?} is not an ascending {}-subset", self.degree)))?;
        *slot = t;
        Ok(())
    }

    pub fn params(&self) -> &TensorParams {
        &self.params
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn component(&self, idx: &[usize]) -> Option<&CoeffTensor> {
        self.components.get(idx)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &CoeffTensor)> {
        self.components.iter()
    }

    pub fn norm0(&self) -> f64 {
        self.components.values().map(|t| t.norm0().powi(2)).sum::<f64>().sqrt()
    }

    pub fn embed(&self, window: &Window) -> Result<DifferentialForm> {
        let components = self
            .components
            .iter()
            .map(|(i, t)| Ok((i.clone(), t.embed(window)?)))
            .collect::<Result<_>>()?;
        Ok(DifferentialForm {
            params: self.params.clone(),
            degree: self.degree,
            window: window.clone(),
            components,
        })
    }

    fn zip_with(
        &self,
        other: &DifferentialForm,
        f: impl Fn(&CoeffTensor, &CoeffTensor) -> Result<CoeffTensor>,
    ) -> Result<Self> {
        if self.degree != other.degree || self.window != other.window || self.params != other.params {
            return Err(CohomError::Shape("forms differ in degree, params or window".into()));
        }
        let components = self
            .components
            .iter()
            .map(|(i, t)| Ok((i.clone(), f(t, &other.components[i])?)))
            .collect::<Result<_>>()?;
        Ok(DifferentialForm {
            params: self.params.clone(),
            degree: self.degree,
            window: self.window.clone(),
            components,
        })
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DifferentialForm {
            params: self.params.clone(),
            degree: self.degree,
            window: self.window.clone(),
            components: self.components.iter().map(|(i, t)| (i.clone(), t.scale(c))).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let comps: BTreeMap<String, TensorJson> = self
            .components
            .iter()
            .map(|(i, t)| (json_key(i), TensorJson::from_tensor(t)))
            .collect();
        serde_json::to_string(&FormJson {
            degree: self.degree,
            components: comps,
        })
        .expect("finite values serialize")
    }

    pub fn from_json(s: &str) -> Result<DifferentialForm> {
        let raw: FormJson = serde_json::from_str(s).map_err(|e| CohomError::Json(e.to_string()))?;
        let mut parsed = Vec::with_capacity(raw.components.len());
        for (key, t) in &raw.components {
            parsed.push((parse_key(key)?, t.to_tensor()?));
        }
        let Some((_, first)) = parsed.first() else {
            return Err(CohomError::Json("a form needs at least one component".into()));
        };
        let params = first.params().clone();
        let window = first.window().clone();
        for (idx, _) in &parsed {
            if idx.len() != raw.degree || idx.iter().any(|&a| a >= params.dim()) {
                return Err(CohomError::Json(format!(
                    "component key {idx:?} does not fit degree {} over {} factors",
                    raw.degree,
                    params.dim()
                )));
            }
        }
        DifferentialForm::from_components(params, raw.degree, window, parsed)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormJson {
    degree: usize,
    components: BTreeMap<String, TensorJson>,
}

fn json_key(idx: &[usize]) -> String {
    idx.iter().map(|a| (a + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    if key.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in key.split(',') {
        let a: usize = part
            .trim()
            .parse()
            .map_err(|_| CohomError::Json(format!("bad component key '{key}'")))?;
        if a == 0 || out.last().is_some_and(|&prev| prev >= a - 1) {
            return Err(CohomError::Json(format!(
                "component key '{key}' must be ascending and 1-based"
            )));
        }
        out.push(a - 1);
    }
    Ok(out)
}

/// `d w(X_I) = sum_j (-1)^j X_{i_j} w(X_{I minus i_j})` with 0-based `j`; every
/// axis of the window grows by one.
pub fn exterior_derivative(w: &DifferentialForm) -> Result<DifferentialForm> {
    if w.degree >= w.dim() {
        return Err(CohomError::TopDegreeInput);
    }
    let all: Vec<usize> = (0..w.dim()).collect();
    let out_window = w.window.expanded(&w.params, &all);
    let mut out = DifferentialForm::zeros(w.params.clone(), w.degree + 1, out_window.clone())?;
    for idx in index_sets(w.dim(), w.degree + 1) {
        let mut acc = CoeffTensor::zeros(w.params.clone(), out_window.clone())?;
        for (j, &axis) in idx.iter().enumerate() {
            let mut rest = idx.clone();
            rest.remove(j);
            let term = w.components[&rest].apply_x(axis)?;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc.add_scaled_embedded(Complex64::new(sign, 0.0), &term)?;
        }
        out.components.insert(idx, acc);
    }
    Ok(out)
}

/// The components without `axis`, projected at `axis = k`, as a form over the other factors.
pub fn restrict_form(w: &DifferentialForm, axis: usize, k: i64) -> Result<DifferentialForm> {
    let d = w.dim();
    if axis >= d {
        return Err(CohomError::Shape(format!("axis {axis} out of range")));
    }
    if w.degree > d - 1 {
        return Err(CohomError::AxisInIndex { axis });
    }
    let params = w
        .params
        .without(&[axis])
        .ok_or_else(|| CohomError::Shape("cannot restrict a one-factor form".into()))?;
    let window = w.window.without(&[axis]).expect("same axes as params");
    let mut comps = Vec::new();
    for (idx, t) in &w.components {
        if idx.contains(&axis) {
            continue;
        }
        let reindexed: Vec<usize> = idx.iter().map(|&a| if a > axis { a - 1 } else { a }).collect();
        comps.push((reindexed, t.project(&[(axis, k)])?));
    }
    DifferentialForm::from_components(params, w.degree, window, comps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedCheck {
    pub closed: bool,
    /// `||d w||_0`; zero for top-degree forms.
    pub residual: f64,
}

/// Closed when `||d w||_0 <= tol * ||w||_0`. Top-degree forms are closed.
pub fn check_closed(w: &DifferentialForm, tol: f64) -> Result<ClosedCheck> {
    if w.degree == w.dim() {
        return Ok(ClosedCheck {
            closed: true,
            residual: 0.0,
        });
    }
    let r = exterior_derivative(w)?.norm0();
    Ok(ClosedCheck {
        closed: r <= tol * w.norm0(),
        residual: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimitiveStrategy {
    /// Average of the one-sided primitives over every axis, scaled by `1/(d-n+1)`.
    Averaged,
    /// One-sided primitive along the first axis, then a correction for the
    /// components that contain it.
    Sequential,
}

impl PrimitiveStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            PrimitiveStrategy::Averaged => "averaged",
            PrimitiveStrategy::Sequential => "sequential",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveOptions {
    pub tol: f64,
    pub strategy: PrimitiveStrategy,
    pub backend: Backend,
    pub split: SplitWeight,
}

impl Default for PrimitiveOptions {
    fn default() -> Self {
        PrimitiveOptions {
            tol: crate::distributions::DEFAULT_DEFECT_TOL,
            strategy: PrimitiveStrategy::Sequential,
            backend: Backend::Formula,
            split: SplitWeight::default(),
        }
    }
}

impl PrimitiveOptions {
    fn top(&self) -> TopOptions {
        TopOptions {
            backend: self.backend,
            tol: self.tol,
            split: self.split,
            axis_order: None,
        }
    }
}

/// `||d eta - w||_0` over the interior of `w`'s window.
pub fn primitive_residual(w: &DifferentialForm, eta: &DifferentialForm) -> Result<f64> {
    let d_eta = exterior_derivative(eta)?.embed(&w.window)?;
    let diff = d_eta.sub(w)?;
    match w.window.interior(&w.params) {
        Some(inner) => Ok(diff.embed(&inner)?.norm0()),
        None => Ok(0.0),
    }
}

/// Solves `d eta = w` for a closed form of degree `1..=d`.
pub fn solve_primitive(w: &DifferentialForm, opts: &PrimitiveOptions) -> Result<DifferentialForm> {
    if w.degree == 0 {
        return Err(CohomError::Shape("a 0-form has no primitive".into()));
    }
    let bound = opts.tol * w.norm0();
    let closed = check_closed(w, opts.tol)?;
    if !closed.closed {
        return Err(CohomError::NotClosed {
            residual: closed.residual,
            bound,
        });
    }
    let eta = primitive_abs(w, opts, bound)?;
    let r = primitive_residual(w, &eta)?;
    if r > bound {
        return Err(CohomError::NonConvergent {
            radius: w.window.radius(),
            residual: r,
            bound,
        });
    }
    Ok(eta)
}

fn primitive_abs(w: &DifferentialForm, opts: &PrimitiveOptions, bound: f64) -> Result<DifferentialForm> {
    let d = w.dim();
    let n = w.degree;
    if n == d {
        return top_primitive(w, opts, bound, "");
    }
    match opts.strategy {
        PrimitiveStrategy::Averaged => {
            let mut acc = DifferentialForm::zeros(w.params.clone(), n - 1, w.window.clone())?;
            for m in 0..d {
                acc = acc.add(&one_sided_primitive_abs(w, m, opts, bound)?)?;
            }
            Ok(acc.scale(Complex64::new(1.0 / (d - n + 1) as f64, 0.0)))
        }
        PrimitiveStrategy::Sequential => sequential(w, opts, bound),
    }
}

/// Top-degree datum: solve and pack `eta(X_{I_j}) = (-1)^j g_j` (0-based `j`).
fn top_primitive(w: &DifferentialForm, opts: &PrimitiveOptions, bound: f64, ctx: &str) -> Result<DifferentialForm> {
    let d = w.dim();
    let all: Vec<usize> = (0..d).collect();
    let f = &w.components[&all];
    let defect = max_kernel_defect(f);
    if defect > bound {
        let e = CohomError::PreconditionDefect { defect, bound };
        return Err(if ctx.is_empty() { e } else { e.in_slice(ctx.to_string()) });
    }
    let gs =
        solve_top_abs(f, &opts.top(), bound)
            .map_err(|e| if ctx.is_empty() { e } else { e.in_slice(ctx.to_string()) })?;
    let comps = gs.into_iter().enumerate().map(|(j, g)| {
        let mut idx = all.clone();
        idx.remove(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        (idx, g.scale(Complex64::new(sign, 0.0)))
    });
    DifferentialForm::from_components(w.params.clone(), d - 1, w.window.clone(), comps)
}

/// Primitive of the components of `w` that avoid `axis`, solved slice by slice
/// at each index along `axis`. Components containing `axis` are zero.
pub fn one_sided_primitive(w: &DifferentialForm, axis: usize, opts: &PrimitiveOptions) -> Result<DifferentialForm> {
    one_sided_primitive_abs(w, axis, opts, opts.tol * w.norm0())
}

fn one_sided_primitive_abs(
    w: &DifferentialForm,
    axis: usize,
    opts: &PrimitiveOptions,
    bound: f64,
) -> Result<DifferentialForm> {
    let d = w.dim();
    let n = w.degree;
    let (lo, hi) = w.window.axis(axis);
    let ks: Vec<i64> = (lo..=hi).collect();
    let slices: Vec<Result<Option<DifferentialForm>>> = ks
        .par_iter()
        .map(|&k| {
            let r = restrict_form(w, axis, k)?;
            if r.components.values().all(|t| t.max_abs() == 0.0) {
                return Ok(None);
            }
            let ctx = format!("axis {} slice k={k}", axis + 1);
            if n == d - 1 {
                top_primitive(&r, opts, bound, &ctx).map(Some)
            } else {
                primitive_abs(&r, opts, bound).map(Some).map_err(|e| e.in_slice(ctx))
            }
        })
        .collect();
    let slices: Vec<Option<DifferentialForm>> = slices.into_iter().collect::<Result<_>>()?;
    embed_slices(w, axis, n - 1, &ks, &slices)
}

/// Inverse of restriction: place per-`k` forms over the other axes back along
/// `axis`, dividing by `||u_k||`.
fn embed_slices(
    w: &DifferentialForm,
    axis: usize,
    degree: usize,
    ks: &[i64],
    slices: &[Option<DifferentialForm>],
) -> Result<DifferentialForm> {
    let mut out = DifferentialForm::zeros(w.params.clone(), degree, w.window.clone())?;
    let p = w.params.factor(axis);
    let norms = p.norm_sq_range(ks[0], *ks.last().expect("non-empty"));
    let shape = w.window.shape();
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let len = shape[axis];
    for (idx, t) in out.components.iter_mut() {
        if idx.contains(&axis) {
            continue;
        }
        let reindexed: Vec<usize> = idx.iter().map(|&a| if a > axis { a - 1 } else { a }).collect();
        let dst = t.coeffs_mut();
        for (i, slice) in slices.iter().enumerate() {
            let Some(slice) = slice else { continue };
            let src = slice.components[&reindexed].coeffs();
            let u = norms[i].sqrt();
            // slice layout is the full layout with `axis` removed
            for o in 0..outer {
                for j in 0..inner {
                    dst[(o * len + i) * inner + j] = src[o * inner + j] / u;
                }
            }
        }
    }
    Ok(out)
}

fn sequential(w: &DifferentialForm, opts: &PrimitiveOptions, bound: f64) -> Result<DifferentialForm> {
    let d = w.dim();
    let n = w.degree;
    let gamma = one_sided_primitive_abs(w, 0, opts, bound)?;
    if n == 1 {
        return Ok(gamma);
    }
    // What is left lives on components containing axis 0: beta(J) = w'(0, J).
    let rest = w.sub(&exterior_derivative(&gamma)?.embed(&w.window)?)?;
    let mut beta = DifferentialForm::zeros(w.params.clone(), n - 1, w.window.clone())?;
    for j in index_sets(d, n - 1) {
        if j.contains(&0) {
            continue;
        }
        let mut full = vec![0];
        full.extend(&j);
        beta.components.insert(j, rest.components[&full].clone());
    }
    let zeta = one_sided_primitive_abs(&beta, 0, opts, bound)?;
    // eta = gamma + theta with theta(0, J') = -zeta(J').
    let mut eta = gamma;
    for (jp, z) in &zeta.components {
        if jp.contains(&0) {
            continue;
        }
        let mut full = vec![0];
        full.extend(jp);
        eta.components.insert(full, z.scale(Complex64::new(-1.0, 0.0)));
    }
    Ok(eta)
}

/// Residual split of a one-sided primitive `eta_m`: `||d eta_m - w||_0` over
/// components avoiding `m` (solved directly) and over those containing `m`
/// (what averaging relies on), on the interior of `w`'s window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedResidual {
    pub axis: usize,
    pub avoiding: f64,
    pub containing: f64,
}

pub fn one_sided_residuals(w: &DifferentialForm, opts: &PrimitiveOptions) -> Result<Vec<OneSidedResidual>> {
    let inner = w
        .window
        .interior(&w.params)
        .ok_or_else(|| CohomError::Shape("window has no interior".into()))?;
    (0..w.dim())
        .map(|m| {
            let eta = one_sided_primitive(w, m, opts)?;
            let diff = exterior_derivative(&eta)?.embed(&inner)?.sub(&w.embed(&inner)?)?;
            let (mut avoiding, mut containing) = (0.0, 0.0);
            for (idx, t) in diff.components() {
                if idx.contains(&m) {
                    containing += t.norm0().powi(2);
                } else {
                    avoiding += t.norm0().powi(2);
                }
            }
            Ok(OneSidedResidual {
                axis: m,
                avoiding: f64::sqrt(avoiding),
                containing: f64::sqrt(containing),
            })
        })
        .collect()
}

/// Largest kernel defect of the restricted top components `(w|_k)(X_{others})`
/// over every axis and index, for a closed `(d-1)`-form.
pub fn restricted_top_defect(w: &DifferentialForm) -> Result<f64> {
    let d = w.dim();
    if w.degree + 1 != d {
        return Err(CohomError::Shape("expected a (d-1)-form".into()));
    }
    let mut worst: f64 = 0.0;
    for axis in 0..d {
        let (lo, hi) = w.window.axis(axis);
        for k in lo..=hi {
            let r = restrict_form(w, axis, k)?;
            let all: Vec<usize> = (0..d - 1).collect();
            worst = worst.max(max_kernel_defect(&r.components[&all]));
        }
    }
    Ok(worst)
}
