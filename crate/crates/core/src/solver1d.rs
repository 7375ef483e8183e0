// SPDX-License-Identifier: MIT OR Apache-2.0

//! `X g = f` in one irreducible factor, by the explicit difference-equation
//! formula or by a least-squares oracle.

use crate::distributions::{d_log_table, kernel_defect};
use crate::error::{CohomError, Result};
use crate::rep_core::{CoeffTensor, IrrepParams, LogComplex, TensorParams, Window};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Variation-of-constants tail sums.
    Formula,
    /// Minimum-norm least squares on the banded system.
    Lsq,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Formula => "formula",
            Backend::Lsq => "lsq",
        }
    }
}

/// The solutions `g0`, `g1` of the homogeneous recurrence
/// `b+(k-1) g(k-1) = b-(k+1) g(k+1)` seeded at `i_nu` and `i_nu + 1`.
///
/// On discrete factors `g1` is generated by the same recurrence but is not a
/// homogeneous solution: the bottom equation gives `(X g1)(n) = -b-(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPair {
    params: IrrepParams,
}

impl HomogeneousPair {
    pub fn new(params: IrrepParams) -> Self {
        HomogeneousPair { params }
    }

    pub fn params(&self) -> &IrrepParams {
        &self.params
    }

    /// `g0(k)` when `which == 0`, `g1(k)` when `which == 1`.
    pub fn value(&self, which: u8, k: i64) -> Result<LogComplex> {
        if !self.params.contains(k) {
            return Err(CohomError::IndexOutOfRange { axis: 0, k });
        }
        Ok(self.table(which, k, k)[0])
    }

    pub fn g0(&self, k: i64) -> Result<LogComplex> {
        self.value(0, k)
    }

    pub fn g1(&self, k: i64) -> Result<LogComplex> {
        self.value(1, k)
    }

    /// Values over `lo..=hi` (which must lie in `J_nu`), one recurrence pass each way.
    pub fn table(&self, which: u8, lo: i64, hi: i64) -> Vec<LogComplex> {
        let p = &self.params;
        let mut out = vec![LogComplex::ZERO; (hi - lo + 1) as usize];
        let mut put = |k: i64, v: LogComplex| {
            if lo <= k && k <= hi {
                out[(k - lo) as usize] = v;
            }
        };
        let start = p.i_nu + which as i64;
        let mut acc = LogComplex::ONE;
        let mut j = start;
        put(j, acc);
        while j + 2 <= hi {
            acc = acc * LogComplex::from(p.b_plus(j) / p.b_minus(j + 2));
            j += 2;
            put(j, acc);
        }
        if !p.is_discrete() {
            let mut acc = LogComplex::ONE;
            let mut j = start;
            while j - 2 >= lo {
                acc = acc * LogComplex::from(p.b_minus(j) / p.b_plus(j - 2));
                j -= 2;
                put(j, acc);
            }
        }
        out
    }
}

/// Green's function `G(k, l)`: the homogeneous solution with `G(l, l) = 0`,
/// `G(l+1, l) = 1`, written as a ratio of 2x2 determinants in `g0`, `g1`.
pub fn green(p: &IrrepParams, k: i64, l: i64) -> Result<Complex64> {
    if p.is_discrete() {
        return Err(CohomError::DiscreteSeries);
    }
    let h = HomogeneousPair::new(*p);
    let lo = k.min(l);
    let hi = k.max(l + 1);
    let g0 = h.table(0, lo, hi);
    let g1 = h.table(1, lo, hi);
    let at = |t: &[LogComplex], x: i64| t[(x - lo) as usize].to_complex();
    let num = at(&g0, l) * at(&g1, k) - at(&g1, l) * at(&g0, k);
    let den = at(&g0, l) * at(&g1, l + 1) - at(&g1, l) * at(&g0, l + 1);
    if den.norm() < 1e-300 {
        return Err(CohomError::DegenerateWronskian { l });
    }
    Ok(num / den)
}

fn check_one_factor(f: &CoeffTensor) -> Result<IrrepParams> {
    if f.dim() != 1 {
        return Err(CohomError::Shape(format!("expected one factor, got {}", f.dim())));
    }
    Ok(*f.params().factor(0))
}

/// Largest `|b+(k-1) g(k-1) - b-(k+1) g(k+1) - f(k)|` over the interior of `g`'s window.
pub fn difference_rhs_check(p: &IrrepParams, g: &CoeffTensor, f: &CoeffTensor) -> f64 {
    let params = TensorParams::single(*p);
    let Some(inner) = g.window().interior(&params) else {
        return 0.0;
    };
    let (lo, hi) = inner.axis(0);
    (lo..=hi)
        .map(|k| (p.b_plus(k - 1) * g.get(&[k - 1]) - p.b_minus(k + 1) * g.get(&[k + 1]) - f.get(&[k])).norm())
        .fold(0.0, f64::max)
}

/// Solves `X g = f` with `g` on the window of `f`.
///
/// `tol` is relative to `||f||_0`: it gates the kernel defect of `f` and the
/// interior residual of the result.
pub fn solve_1d(f: &CoeffTensor, backend: Backend, tol: f64) -> Result<CoeffTensor> {
    solve_1d_abs(f, backend, tol * f.norm0(), tol * f.norm0())
}

/// As [`solve_1d`] with absolute bounds, for slices of a larger problem whose
/// tolerances are measured against the parent's norm.
pub fn solve_1d_abs(f: &CoeffTensor, backend: Backend, defect_bound: f64, residual_bound: f64) -> Result<CoeffTensor> {
    check_one_factor(f)?;
    let defect = kernel_defect(f).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > defect_bound {
        return Err(CohomError::PreconditionDefect {
            defect,
            bound: defect_bound,
        });
    }
    let g = match backend {
        Backend::Formula => formula(f),
        Backend::Lsq => lsq(f),
    };
    let r = crate::solver_nd::residual(f, std::slice::from_ref(&g))?;
    if r > residual_bound {
        return Err(CohomError::NonConvergent {
            radius: f.window().radius(),
            residual: r,
            bound: residual_bound,
        });
    }
    Ok(g)
}

fn formula(f: &CoeffTensor) -> CoeffTensor {
    let p = *f.params().factor(0);
    let (a, b) = f.window().axis(0);
    let fv: Vec<Complex64> = f.coeffs().to_vec();
    let at = |k: i64| if a <= k && k <= b { fv[(k - a) as usize] } else { ZERO };

    let hom = HomogeneousPair::new(p);
    let g0 = hom.table(0, a, b);
    let g1 = hom.table(1, a, b);
    // D1 is only used through the variation-of-constants identity here, so its
    // failure to be invariant on discrete factors does not matter.
    let d0 = d_log_table(&p, 0, a, b);
    let d1 = d_log_table(&p, 1, a, b);

    // Summation switches from head to tail at the largest |f|, keeping both
    // sums away from the bulk of the data.
    let pivot = a + fv
        .iter()
        .enumerate()
        .fold(
            (0usize, -1.0f64),
            |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best },
        )
        .0 as i64;

    let mut g = vec![ZERO; fv.len()];
    let i0 = p.i_nu;
    // Chain 0: g(j) = g0(j) c(j), j = i_nu (mod 2), driven by f on the other parity with D1.
    // Chain 1: g(j) = g1(j) e(j), j = i_nu + 1 (mod 2), driven by f with D0.
    let chains = [
        (0i64, &g0, &d1, p.b_plus(i0), !p.is_discrete()),
        (1i64, &g1, &d0, p.b_minus(i0 + 1), true),
    ];
    for (offset, hom_t, dist_t, scale, head_ok) in chains {
        let weight = |k: i64| at(k) * dist_t[(k - a) as usize].to_complex();
        let first = a + (i0 + offset - a).rem_euclid(2);
        let js: Vec<i64> = (first..=b).step_by(2).collect();
        // tail(j) = sum over k' = j+1, j+3, ... ; head(j) = sum over k' = j-1, j-3, ...
        let mut tail = vec![ZERO; js.len()];
        let mut acc = ZERO;
        for (i, &j) in js.iter().enumerate().rev() {
            if j < b {
                acc += weight(j + 1);
            }
            tail[i] = acc;
        }
        let mut head = vec![ZERO; js.len()];
        let mut acc = ZERO;
        for (i, &j) in js.iter().enumerate() {
            if j > a {
                acc += weight(j - 1);
            }
            head[i] = acc;
        }
        for (i, &j) in js.iter().enumerate() {
            let s = if head_ok && j < pivot { -head[i] } else { tail[i] };
            g[(j - a) as usize] = hom_t[(j - a) as usize].to_complex() * s / scale;
        }
    }
    CoeffTensor::new(f.params().clone(), f.window().clone(), g).expect("same window as f")
}

/// Rows of the banded system: every index where `X g` can be nonzero for `g`
/// supported in the window. Keeping the boundary rows forces `g` to vanish
/// past the window, which removes the truncated homogeneous directions.
fn equation_rows(p: &IrrepParams, window: &Window) -> Vec<i64> {
    let (lo, hi) = window.expanded(&TensorParams::single(*p), &[0]).axis(0);
    (lo..=hi).collect()
}

fn lsq(f: &CoeffTensor) -> CoeffTensor {
    let p = *f.params().factor(0);
    let (a, b) = f.window().axis(0);
    let n = (b - a + 1) as usize;
    let rows = equation_rows(&p, f.window());
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), n);
    let mut rhs = DVector::<Complex64>::zeros(rows.len());
    for (r, &k) in rows.iter().enumerate() {
        if k > a {
            m[(r, (k - 1 - a) as usize)] = p.b_plus(k - 1);
        }
        if k < b {
            m[(r, (k + 1 - a) as usize)] = -p.b_minus(k + 1);
        }
        rhs[r] = f.get(&[k]);
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let sol = svd
        .solve(&rhs, 1e-13 * smax.max(f64::MIN_POSITIVE))
        .expect("both factors were computed");
    CoeffTensor::new(f.params().clone(), f.window().clone(), sol.iter().cloned().collect()).expect("same window as f")
}

/// Relative difference of two solutions after removing the truncated
/// homogeneous directions (`g0` and, off the discrete series, `g1`).
pub fn backend_disagreement(g_a: &CoeffTensor, g_b: &CoeffTensor) -> Result<f64> {
    let p = check_one_factor(g_a)?;
    let diff = g_a.sub(g_b)?;
    let (lo, hi) = g_a.window().axis(0);
    let hom = HomogeneousPair::new(p);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let count = if p.is_discrete() { 1 } else { 2 };
    for which in 0..count {
        let mut v: Vec<Complex64> = hom.table(which, lo, hi).iter().map(|z| z.to_complex()).collect();
        for e in &basis {
            let c: Complex64 = e.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(e).for_each(|(y, x)| *y -= c * x);
        }
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            v.iter_mut().for_each(|y| *y /= nrm);
            basis.push(v);
        }
    }
    let project = |x: &[Complex64]| -> Vec<Complex64> {
        let mut v = x.to_vec();
        for e in &basis {
            let c: Complex64 = e.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(e).for_each(|(y, x)| *y -= c * x);
        }
        v
    };
    let l2 = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let num = l2(&project(diff.coeffs()));
    let den = l2(&project(g_a.coeffs()));
    Ok(if den > 0.0 { num / den } else { num })
}
