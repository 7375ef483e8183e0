// SPDX-License-Identifier: MIT OR Apache-2.0

//! The splitting `f = f1 + f_mu` that drives the dimension recursion.
//!
//! Axis 0 is the distinguished first factor; the remaining ("bold") axes are
//! the ones whose invariant distributions `f1` absorbs.

use crate::distributions::{d_table, kernel_defect, sigma_vectors};
use crate::error::{CohomError, Result};
use crate::rep_core::{CoeffTensor, TensorParams, Window};
use num_complex::Complex64;

pub const DEFAULT_SPLIT_RATIO: f64 = 0.5;

/// Geometric weight `m(l) = prod_a c_a r^{|l_a|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitWeight {
    ratio: f64,
}

impl Default for SplitWeight {
    fn default() -> Self {
        SplitWeight {
            ratio: DEFAULT_SPLIT_RATIO,
        }
    }
}

impl SplitWeight {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(CohomError::Shape(format!("split ratio must lie in (0,1), got {ratio}")));
        }
        Ok(SplitWeight { ratio })
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Normalizer giving unit mass over all of `Z` (`(1-r)/(1+r)`) or `Z>=0` (`1-r`).
    pub fn analytic_normalizer(&self, half_line: bool) -> f64 {
        if half_line {
            1.0 - self.ratio
        } else {
            (1.0 - self.ratio) / (1.0 + self.ratio)
        }
    }

    /// One-axis weight with the analytic normalizer.
    pub fn analytic_mass(&self, half_line: bool, l: i64) -> f64 {
        self.analytic_normalizer(half_line) * self.ratio.powi(l.unsigned_abs() as i32)
    }
}

/// Diagnostics of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    /// Largest `1 - (analytic mass inside the window)` over bold axes and parities.
    /// The split itself renormalizes per window, so this is what truncation would
    /// have cost with the analytic weights.
    pub mass_deficit: f64,
    /// Largest `|sum_l m(l) - 1|` of the renormalized weights actually used.
    pub mass_error: f64,
}

/// Per-axis, per-parity weights over the window, renormalized to unit mass.
struct AxisWeights {
    lo: i64,
    // weight[parity][k - lo], zero on the other parity
    weight: [Vec<f64>; 2],
    deficit: f64,
    mass_error: f64,
}

fn axis_weights(p: &crate::rep_core::IrrepParams, lo: i64, hi: i64, w: &SplitWeight) -> AxisWeights {
    let mut weight = [vec![0.0; (hi - lo + 1) as usize], vec![0.0; (hi - lo + 1) as usize]];
    let mut deficit: f64 = 0.0;
    let mut mass_error: f64 = 0.0;
    let half_line = p.is_discrete();
    for (parity, slot) in weight.iter_mut().enumerate() {
        let ls: Vec<(i64, i64)> = (lo..=hi)
            .filter(|k| (k - p.i_nu - parity as i64).rem_euclid(2) == 0)
            .map(|k| (k, (k - p.i_nu - parity as i64).div_euclid(2)))
            .collect();
        if ls.is_empty() {
            continue;
        }
        let raw: Vec<f64> = ls.iter().map(|&(_, l)| w.ratio.powi(l.unsigned_abs() as i32)).collect();
        let z: f64 = raw.iter().sum();
        let analytic: f64 = ls.iter().map(|&(_, l)| w.analytic_mass(half_line, l)).sum();
        deficit = deficit.max(1.0 - analytic);
        let mut total = 0.0;
        for (&(k, _), r) in ls.iter().zip(&raw) {
            slot[(k - lo) as usize] = r / z;
            total += r / z;
        }
        mass_error = mass_error.max((total - 1.0).abs());
    }
    AxisWeights {
        lo,
        weight,
        deficit,
        mass_error,
    }
}

/// `f1(k, p) = m(p) / D_n(v_p) * sum_j f(k, j) D_n(v_j)` with `n` the parity class of `p`.
pub fn split(f: &CoeffTensor, w: &SplitWeight) -> Result<(CoeffTensor, CoeffTensor)> {
    split_with_report(f, w).map(|(a, b, _)| (a, b))
}

pub fn split_with_report(f: &CoeffTensor, w: &SplitWeight) -> Result<(CoeffTensor, CoeffTensor, SplitReport)> {
    let d = f.dim();
    if d < 2 {
        return Err(CohomError::Shape("split needs at least two factors".into()));
    }
    let params = f.params();
    let window = f.window();
    let bold: Vec<usize> = (1..d).collect();
    let bold_params = params.without(&[0]).expect("d >= 2");

    let mut weights = Vec::with_capacity(d - 1);
    let mut d_tabs = Vec::with_capacity(d - 1);
    for &a in &bold {
        let p = params.factor(a);
        let (lo, hi) = window.axis(a);
        weights.push(axis_weights(p, lo, hi, w));
        // D_1 rows on discrete axes are never read: those classes are outside S(mu).
        d_tabs.push([d_table(p, 0, lo, hi), d_table(p, 1, lo, hi)]);
    }
    let classes = sigma_vectors(&bold_params);

    let shape = window.shape();
    let len0 = shape[0];
    let inner: usize = shape[1..].iter().product();
    let bold_window = window.without(&[0]).expect("d >= 2");
    let mut dval = vec![Complex64::new(0.0, 0.0); inner];
    let mut mval = vec![0.0; inner];
    let mut class_of = vec![usize::MAX; inner];
    bold_window.for_each(|flat, k| {
        let mut bits = vec![0u8; d - 1];
        let mut dv = Complex64::new(1.0, 0.0);
        let mut mv = 1.0;
        for (i, &a) in bold.iter().enumerate() {
            let p = params.factor(a);
            let par = (k[i] - p.i_nu).rem_euclid(2) as usize;
            bits[i] = par as u8;
            let idx = (k[i] - weights[i].lo) as usize;
            dv *= d_tabs[i][par][idx];
            mv *= weights[i].weight[par][idx];
        }
        if let Some(c) = classes.iter().position(|s| *s == bits) {
            class_of[flat] = c;
        }
        dval[flat] = dv;
        mval[flat] = mv;
    });

    let coeffs = f.coeffs();
    let mut f1 = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    for row in 0..len0 {
        let base = row * inner;
        let mut sums = vec![Complex64::new(0.0, 0.0); classes.len()];
        for j in 0..inner {
            if class_of[j] != usize::MAX {
                sums[class_of[j]] += coeffs[base + j] * dval[j];
            }
        }
        for j in 0..inner {
            if class_of[j] != usize::MAX {
                f1[base + j] = sums[class_of[j]] * mval[j] / dval[j];
            }
        }
    }
    let fmu: Vec<Complex64> = coeffs.iter().zip(&f1).map(|(a, b)| a - b).collect();
    let report = SplitReport {
        mass_deficit: weights.iter().map(|x| x.deficit).fold(0.0, f64::max),
        mass_error: weights.iter().map(|x| x.mass_error).fold(0.0, f64::max),
    };
    Ok((
        CoeffTensor::new(params.clone(), window.clone(), f1)?,
        CoeffTensor::new(params.clone(), window.clone(), fmu)?,
        report,
    ))
}

/// One line of the kernel check: which slice, and its largest defect.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDefect {
    /// `"f1"` for slices at fixed bold index, `"fmu"` for slices at fixed first index.
    pub part: &'static str,
    pub index: Vec<i64>,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitKernelReport {
    pub slices: Vec<SliceDefect>,
    pub max_f1_defect: f64,
    pub max_fmu_defect: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks that every `f1` slice at fixed bold index is annihilated by the
/// first factor's distributions and every `f_mu` slice at fixed first index by
/// the bold factors' distributions, to `tol * ||f||_0`.
pub fn verify_split_kernels(f1: &CoeffTensor, fmu: &CoeffTensor, tol: f64) -> Result<SplitKernelReport> {
    let f = f1.add(fmu)?;
    let bound = tol * f.norm0();
    let d = f.dim();
    if d < 2 {
        return Err(CohomError::Shape("split needs at least two factors".into()));
    }
    let mut slices = Vec::new();
    let bold_window: Window = f.window().without(&[0]).expect("d >= 2");
    let mut max_f1: f64 = 0.0;
    let mut fixed = Vec::with_capacity(d - 1);
    let mut err = None;
    bold_window.for_each(|_, l| {
        fixed.clear();
        fixed.extend(l.iter().enumerate().map(|(i, &x)| (i + 1, x)));
        match f1.project(&fixed) {
            Ok(s) => {
                let v = kernel_defect(&s).iter().map(|z| z.norm()).fold(0.0, f64::max);
                max_f1 = max_f1.max(v);
                slices.push(SliceDefect {
                    part: "f1",
                    index: l.to_vec(),
                    defect: v,
                });
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut max_fmu: f64 = 0.0;
    let (lo, hi) = f.window().axis(0);
    for k in lo..=hi {
        let s = fmu.project(&[(0, k)])?;
        let v = kernel_defect(&s).iter().map(|z| z.norm()).fold(0.0, f64::max);
        max_fmu = max_fmu.max(v);
        slices.push(SliceDefect {
            part: "fmu",
            index: vec![k],
            defect: v,
        });
    }
    Ok(SplitKernelReport {
        slices,
        max_f1_defect: max_f1,
        max_fmu_defect: max_fmu,
        bound,
        pass: max_f1 <= bound && max_fmu <= bound,
    })
}

impl SplitKernelReport {
    /// CSV with columns `part,index,defect,bound,pass`; multi-indices joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["part", "index", "defect", "bound", "pass"])
            .expect("in-memory write");
        for s in &self.slices {
            let idx: Vec<String> = s.index.iter().map(i64::to_string).collect();
            w.write_record([
                s.part.to_string(),
                idx.join(";"),
                format!("{:e}", s.defect),
                format!("{:e}", self.bound),
                (s.defect <= self.bound).to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Parameters of the bold block, used by callers that recurse on `f_mu` slices.
pub fn bold_params(params: &TensorParams) -> Option<TensorParams> {
    params.without(&[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::coboundary;
    use crate::rep_core::IrrepParams;

    fn pair() -> TensorParams {
        TensorParams::new(vec![
            IrrepParams::principal(0, 1.0),
            IrrepParams::complementary(0.4).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn weight_validation_and_mass() {
        assert!(SplitWeight::new(0.0).is_err());
        assert!(SplitWeight::new(1.0).is_err());
        let w = SplitWeight::new(0.5).unwrap();
        let full: f64 = (-40..=40).map(|l| w.analytic_mass(false, l)).sum();
        assert!((full - 1.0).abs() < 1e-10);
        let half: f64 = (0..=40).map(|l| w.analytic_mass(true, l)).sum();
        assert!((half - 1.0).abs() < 1e-10);
    }

    #[test]
    fn additivity_is_exact() {
        let params = pair();
        let win = Window::symmetric(&params, 8);
        let f = coboundary(&params, &win, 1, 0);
        let (f1, fmu) = split(&f, &SplitWeight::default()).unwrap();
        // f_mu is defined as f - f1, so that identity is bitwise; re-adding rounds
        assert_eq!(f.sub(&f1).unwrap(), fmu);
        assert!(f1.add(&fmu).unwrap().sub(&f).unwrap().max_abs() <= 4.0 * f64::EPSILON * f.max_abs());
    }

    #[test]
    fn bold_coboundary_gives_zero_f1() {
        // f = X_2 h has every D-weighted bold slice sum equal to zero
        let params = pair();
        let win = Window::symmetric(&params, 8);
        let h = crate::random::interior_tensor(&params, &win, 4, 0);
        let f = h.apply_x(1).unwrap().embed(&win).unwrap();
        let (f1, fmu) = split(&f, &SplitWeight::default()).unwrap();
        assert!(f1.max_abs() < 1e-14 * f.max_abs());
        assert!(fmu.sub(&f).unwrap().max_abs() < 1e-14 * f.max_abs());
    }

    #[test]
    fn delta_concentrates_on_class_zero() {
        let params = pair();
        let win = Window::symmetric(&params, 6);
        let k0 = 2;
        let f = CoeffTensor::from_fn(params.clone(), win.clone(), |k| {
            Complex64::new(if k == [k0, 0] { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let (f1, _) = split(&f, &SplitWeight::default()).unwrap();
        let q = params.factor(1);
        let d0 = d_table(q, 0, -6, 6);
        // even offsets l = -3..=3 carry weights 0.5^|l| normalized over the window
        let z: f64 = (-3i32..=3).map(|l| 0.5f64.powi(l.abs())).sum();
        win.for_each(|_, k| {
            let v = f1.get(k);
            if k[0] != k0 || k[1].rem_euclid(2) == 1 {
                assert_eq!(v.norm(), 0.0);
            } else {
                let l = k[1] / 2;
                let want = 0.5f64.powi(l.abs() as i32) / z / d0[(k[1] + 6) as usize];
                assert!((v - want).norm() < 1e-14 * want.norm());
            }
        });
    }

    #[test]
    fn kernel_checks_pass_on_coboundaries() {
        for fac in [
            vec![IrrepParams::principal(1, 0.3), IrrepParams::first_discrete(2)],
            vec![
                IrrepParams::first_discrete(1),
                IrrepParams::complementary(-0.5).unwrap(),
                IrrepParams::second_discrete(2),
            ],
        ] {
            let params = TensorParams::new(fac).unwrap();
            let win = Window::symmetric(&params, 8);
            let f = coboundary(&params, &win, 2, 1);
            let (f1, fmu, rep) = split_with_report(&f, &SplitWeight::default()).unwrap();
            assert!(rep.mass_error < 1e-14);
            let r = verify_split_kernels(&f1, &fmu, 1e-8).unwrap();
            assert!(r.pass, "{} {}", r.max_f1_defect, r.max_fmu_defect);
        }
    }

    #[test]
    fn zero_report() {
        let params = pair();
        let win = Window::symmetric(&params, 3);
        let z = CoeffTensor::zeros(params, win).unwrap();
        let (f1, fmu) = split(&z, &SplitWeight::default()).unwrap();
        let r = verify_split_kernels(&f1, &fmu, 1e-8).unwrap();
        assert_eq!(r.max_f1_defect, 0.0);
        assert_eq!(r.max_fmu_defect, 0.0);
        assert!(r.pass);
        assert!(r.to_csv().starts_with("part,index,defect,bound,pass\n"));
    }
}
