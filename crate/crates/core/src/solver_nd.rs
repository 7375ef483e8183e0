// SPDX-License-Identifier: MIT OR Apache-2.0

//! The recursive top-degree solver: `X_1 g_1 + ... + X_d g_d = f`.

use crate::distributions::max_kernel_defect;
use crate::error::{CohomError, Result};
use crate::rep_core::CoeffTensor;
use crate::solver1d::{solve_1d_abs, Backend};
use crate::tensor_ops::{split, SplitWeight};
use num_complex::Complex64;
use rayon::prelude::*;

/// Sobolev loss of the recursion: `s_1 = s`, `s_{d+1} = 2 (s_d + s) + d`.
pub fn sobolev_index(s: f64, d: usize) -> f64 {
    assert!(d >= 1, "d must be at least 1");
    let d_f = d as f64;
    let mut total = 2f64.powi(d as i32 - 1) * s;
    for i in 1..d {
        total += 2f64.powi(i as i32 - 1) * (2.0 * s + d_f - i as f64);
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopOptions {
    pub backend: Backend,
    /// Relative to `||f||_0`; gates kernel defects and residuals.
    pub tol: f64,
    pub split: SplitWeight,
    /// Factor processing order; `None` splits off axis 0 first.
    pub axis_order: Option<Vec<usize>>,
}

impl Default for TopOptions {
    fn default() -> Self {
        TopOptions {
            backend: Backend::Formula,
            tol: crate::distributions::DEFAULT_DEFECT_TOL,
            split: SplitWeight::default(),
            axis_order: None,
        }
    }
}

/// `|| sum_i X_i g_i - f ||_0` over the interior of `f`'s window.
pub fn residual(f: &CoeffTensor, gs: &[CoeffTensor]) -> Result<f64> {
    if gs.len() != f.dim() {
        return Err(CohomError::Shape(format!(
            "{} solutions for {} factors",
            gs.len(),
            f.dim()
        )));
    }
    let mut acc = f.scale(Complex64::new(-1.0, 0.0));
    for (axis, g) in gs.iter().enumerate() {
        if g.params() != f.params() {
            return Err(CohomError::Shape("solution params differ from f".into()));
        }
        acc.add_scaled_embedded(Complex64::new(1.0, 0.0), &g.apply_x(axis)?)?;
    }
    Ok(match f.window().interior(f.params()) {
        Some(inner) => acc.embed(&inner)?.norm0(),
        None => 0.0,
    })
}

/// Solves the top-degree equation for `f` annihilated by every invariant distribution.
pub fn solve_top(f: &CoeffTensor, opts: &TopOptions) -> Result<Vec<CoeffTensor>> {
    let bound = opts.tol * f.norm0();
    let gs = solve_top_abs(f, opts, bound)?;
    let r = residual(f, &gs)?;
    if r > bound {
        return Err(CohomError::NonConvergent {
            radius: f.window().radius(),
            residual: r,
            bound,
        });
    }
    Ok(gs)
}

/// As [`solve_top`] with an absolute defect/residual bound and no final residual gate.
pub fn solve_top_abs(f: &CoeffTensor, opts: &TopOptions, bound: f64) -> Result<Vec<CoeffTensor>> {
    let defect = max_kernel_defect(f);
    if defect > bound {
        return Err(CohomError::PreconditionDefect { defect, bound });
    }
    match &opts.axis_order {
        None => recurse(f, opts, bound, ""),
        Some(order) => {
            let pf = f.permute_axes(order)?;
            let pg = recurse(&pf, opts, bound, "")?;
            let mut inverse = vec![0usize; order.len()];
            for (i, &a) in order.iter().enumerate() {
                inverse[a] = i;
            }
            let mut out = vec![None; order.len()];
            for (i, g) in pg.into_iter().enumerate() {
                out[order[i]] = Some(g.permute_axes(&inverse)?);
            }
            Ok(out.into_iter().map(|g| g.expect("every axis filled")).collect())
        }
    }
}

/// Keeps the first error in index order so failures are reported deterministically.
fn first_error<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn recurse(f: &CoeffTensor, opts: &TopOptions, bound: f64, path: &str) -> Result<Vec<CoeffTensor>> {
    let d = f.dim();
    if d == 1 {
        return solve_1d_abs(f, opts.backend, bound, bound)
            .map(|g| vec![g])
            .map_err(|e| {
                if path.is_empty() {
                    e
                } else {
                    e.in_slice(path.to_string())
                }
            });
    }
    let (f1, fmu) = split(f, &opts.split)?;
    let window = f.window().clone();
    let params = f.params().clone();
    let bold_window = window.without(&[0]).expect("d >= 2");
    let (lo0, hi0) = window.axis(0);

    // First factor: one 1-D problem per bold index.
    let mut ls = Vec::with_capacity(bold_window.len());
    bold_window.for_each(|_, l| ls.push(l.to_vec()));
    let g_ls = first_error(
        ls.par_iter()
            .map(|l| -> Result<Option<CoeffTensor>> {
                let fixed: Vec<(usize, i64)> = l.iter().enumerate().map(|(i, &x)| (i + 1, x)).collect();
                let slice = f1.project(&fixed)?;
                if slice.max_abs() == 0.0 {
                    return Ok(None);
                }
                solve_1d_abs(&slice, opts.backend, bound, bound)
                    .map(Some)
                    .map_err(|e| e.in_slice(format!("{path}f1 slice l={l:?}")))
            })
            .collect(),
    )?;

    // Bold factors: one (d-1)-factor problem per first index.
    let ks: Vec<i64> = (lo0..=hi0).collect();
    let h_ks = first_error(
        ks.par_iter()
            .map(|&k| -> Result<Option<Vec<CoeffTensor>>> {
                let slice = fmu.project(&[(0, k)])?;
                if slice.max_abs() == 0.0 {
                    return Ok(None);
                }
                recurse(&slice, opts, bound, &format!("{path}fmu slice k={k} / ")).map(Some)
            })
            .collect(),
    )?;

    let mut gs: Vec<CoeffTensor> = (0..d)
        .map(|_| CoeffTensor::zeros(params.clone(), window.clone()))
        .collect::<Result<_>>()?;
    let inner = bold_window.len();
    let norms = f.axis_norm_sq();
    let bold_norm: Vec<f64> = {
        let mut v = Vec::with_capacity(inner);
        bold_window.for_each(|_, l| {
            let n: f64 = l
                .iter()
                .enumerate()
                .map(|(i, &x)| norms[i + 1][(x - window.axis(i + 1).0) as usize])
                .product();
            v.push(n.sqrt());
        });
        v
    };
    {
        let out = gs[0].coeffs_mut();
        for (j, g) in g_ls.iter().enumerate() {
            if let Some(g) = g {
                for (row, z) in g.coeffs().iter().enumerate() {
                    out[row * inner + j] = z / bold_norm[j];
                }
            }
        }
    }
    for (row, hs) in h_ks.iter().enumerate() {
        let Some(hs) = hs else { continue };
        let u = norms[0][row].sqrt();
        for (i, h) in hs.iter().enumerate() {
            let out = gs[i + 1].coeffs_mut();
            for (j, z) in h.coeffs().iter().enumerate() {
                out[row * inner + j] = z / u;
            }
        }
    }
    Ok(gs)
}

/// One row of the `solve-top` report.
#[derive(Debug, Clone, PartialEq)]
pub struct TopReportRow {
    pub slice: String,
    pub residual: f64,
    /// `||g_i||_t / ||f||_{s_d}` per solution component; empty on per-slice rows.
    pub ratios: Vec<f64>,
}

/// Per-slice (fixed first index) residuals plus a global row with the
/// Sobolev ratios `||g_i||_t / ||f||_{s_d}`.
pub fn top_report(f: &CoeffTensor, gs: &[CoeffTensor], s: f64, t: f64) -> Result<Vec<TopReportRow>> {
    let mut acc = f.scale(Complex64::new(-1.0, 0.0));
    for (axis, g) in gs.iter().enumerate() {
        acc.add_scaled_embedded(Complex64::new(1.0, 0.0), &g.apply_x(axis)?)?;
    }
    let mut rows = Vec::new();
    if let Some(inner) = f.window().interior(f.params()) {
        let r = acc.embed(&inner)?;
        let (lo, hi) = inner.axis(0);
        for k in lo..=hi {
            let res = if r.dim() > 1 {
                r.project(&[(0, k)])?.norm0()
            } else {
                (r.get(&[k]).norm_sqr() * f.params().factor(0).basis_norm_sq(k)?).sqrt()
            };
            rows.push(TopReportRow {
                slice: format!("k={k}"),
                residual: res,
                ratios: Vec::new(),
            });
        }
    }
    let fs = f.sobolev_norm(sobolev_index(s, f.dim()));
    rows.push(TopReportRow {
        slice: "all".into(),
        residual: residual(f, gs)?,
        ratios: gs
            .iter()
            .map(|g| if fs > 0.0 { g.sobolev_norm(t) / fs } else { 0.0 })
            .collect(),
    });
    Ok(rows)
}

/// CSV with columns `slice,residual,ratio_1,...,ratio_d`.
pub fn top_report_csv(rows: &[TopReportRow], d: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["slice".to_string(), "residual".to_string()];
    header.extend((1..=d).map(|i| format!("ratio_{i}")));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.slice.clone(), format!("{:e}", r.residual)];
        for i in 0..d {
            rec.push(r.ratios.get(i).map(|x| format!("{x:e}")).unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
