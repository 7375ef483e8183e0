// SPDX-License-Identifier: MIT OR Apache-2.0

//! Grid verification of the quantitative estimates the solvers rely on.
//!
//! Every check is a family of samples `lo <= val <= hi` evaluated in log space.
//! Families with an existential constant get a fitted constant
//! `C = max(1, lo/val, val/hi)` that must be finite and move by at most 10%
//! when the index range doubles. Families with explicit constants (or none)
//! must hold outright up to a relative tolerance.

use crate::distributions::{d_log_table, sigma_vectors};
use crate::error::{CohomError, Result};
use crate::rep_core::{IrrepParams, TensorParams};
use crate::solver1d::HomogeneousPair;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

pub const SUITES: [&str; 9] = [
    "lemma2.6",
    "lemma3.1",
    "lemmaA.3",
    "lemmaA.4",
    "lemmaA.5",
    "lemmaA.6",
    "lemmaA.8",
    "order-bound",
    "proof-chain",
];

pub const DEFAULT_MAX_K: i64 = 4096;

/// Allowed relative growth of a fitted constant when the index range doubles.
pub const STABILITY_TOL: f64 = 0.10;

/// Strict families allow this much relative slack for rounding.
const STRICT_TOL: f64 = 1e-12;
const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    Fitted,
    Strict(f64),
}

#[derive(Debug, Clone)]
struct Sample {
    point: String,
    /// Index scale used for the half-range refit and the CSV subset.
    scale: i64,
    ln_val: f64,
    ln_lo: f64,
    ln_hi: f64,
}

impl Sample {
    fn new(point: String, scale: i64, ln_val: f64, ln_lo: f64, ln_hi: f64) -> Self {
        Sample {
            point,
            scale,
            ln_val,
            ln_lo,
            ln_hi,
        }
    }

    /// `ln max(lo/val, val/hi)`; positive when the bound fails with `C = 1`.
    fn ln_ratio(&self) -> f64 {
        let a = if self.ln_lo == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.ln_lo - self.ln_val
        };
        let b = if self.ln_hi == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            self.ln_val - self.ln_hi
        };
        let r = a.max(b);
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }

    /// The side of the bound that binds.
    fn ln_rhs(&self) -> f64 {
        let a = self.ln_lo - self.ln_val;
        let b = self.ln_val - self.ln_hi;
        if self.ln_hi == f64::INFINITY || (self.ln_lo != f64::NEG_INFINITY && a >= b) {
            self.ln_lo
        } else {
            self.ln_hi
        }
    }
}

#[derive(Debug, Clone)]
struct Family {
    name: String,
    rule: Rule,
    samples: Vec<Sample>,
    excluded: Vec<String>,
}

impl Family {
    fn new(name: impl Into<String>, rule: Rule) -> Self {
        Family {
            name: name.into(),
            rule,
            samples: Vec::new(),
            excluded: Vec::new(),
        }
    }

    fn push(&mut self, point: String, scale: i64, ln_val: f64, ln_lo: f64, ln_hi: f64) {
        self.samples.push(Sample::new(point, scale, ln_val, ln_lo, ln_hi));
    }

    fn exclude(&mut self, point: String) {
        self.excluded.push(format!("{}: {point}", self.name));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub lemma: String,
    pub point: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub lemma: String,
    pub grid: String,
    /// Largest fitted constant over the full grid (1 when only strict checks ran).
    pub fitted_constant: f64,
    /// The same fit restricted to indices up to half the range.
    pub fitted_constant_half: f64,
    pub worst_ratio: f64,
    pub worst_location: String,
    pub points: usize,
    /// Points where a printed bound is undefined, skipped and listed here.
    pub excluded: Vec<String>,
    /// Strict families that failed, with their worst ratio.
    pub strict_failures: Vec<String>,
    pub pass: bool,
    pub runtime: Duration,
    pub rows: Vec<GridRow>,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {}: C = {:.6} (half range {:.6}), worst ratio {:.6e} at {}, {} points, {} excluded",
            if self.pass { "PASS" } else { "FAIL" },
            self.lemma,
            self.fitted_constant,
            self.fitted_constant_half,
            self.worst_ratio,
            self.worst_location,
            self.points,
            self.excluded.len()
        );
        for f in self.strict_failures.iter().take(4) {
            let _ = write!(s, "; strict failure {f}");
        }
        if self.strict_failures.len() > 4 {
            let _ = write!(s, "; {} strict failures in total", self.strict_failures.len());
        }
        s
    }
}

/// CSV of the report rows: `lemma,point,lhs,rhs,ratio,pass`.
pub fn report_csv(reports: &[VerificationReport]) -> String {
    let mut out = String::from("lemma,point,lhs,rhs,ratio,pass\n");
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                out,
                "{},\"{}\",{:.15e},{:.15e},{:.15e},{}",
                row.lemma, row.point, row.lhs, row.rhs, row.ratio, row.pass
            );
        }
    }
    out
}

/// Runs one suite, or every suite for `"all"`.
pub fn verify_suites(suite: &str, max_k: i64) -> Result<Vec<VerificationReport>> {
    if suite == "all" {
        SUITES.iter().map(|s| verify(s, max_k)).collect()
    } else {
        Ok(vec![verify(suite, max_k)?])
    }
}

pub fn verify(suite: &str, max_k: i64) -> Result<VerificationReport> {
    if max_k < 4 {
        return Err(CohomError::Shape(format!("grid max k must be at least 4, got {max_k}")));
    }
    let start = Instant::now();
    let (grid, families) = match suite {
        "lemma2.6" => lemma_2_6(max_k),
        "lemma3.1" => lemma_3_1(max_k),
        "lemmaA.3" => lemma_a3(max_k),
        "lemmaA.4" => lemma_a4(max_k),
        "lemmaA.5" => lemma_a5(max_k),
        "lemmaA.6" => lemma_a6(max_k),
        "lemmaA.8" => lemma_a8(max_k),
        "order-bound" => order_bound(max_k),
        "proof-chain" => proof_chain(max_k),
        other => return Err(CohomError::UnsupportedLemma(other.to_string())),
    };
    Ok(assemble(suite, grid, families, max_k, start.elapsed()))
}

fn assemble(lemma: &str, grid: String, families: Vec<Family>, max_k: i64, runtime: Duration) -> VerificationReport {
    let half = max_k / 2;
    let mut c_full: f64 = 1.0;
    let mut c_half: f64 = 1.0;
    let mut worst = (f64::NEG_INFINITY, String::from("none"));
    let mut strict_failures = Vec::new();
    let mut excluded = Vec::new();
    let mut points = 0;
    let mut fitted_stable = true;
    for fam in &families {
        excluded.extend(fam.excluded.iter().cloned());
        points += fam.samples.len();
        let mut f_full = f64::NEG_INFINITY;
        let mut f_half = f64::NEG_INFINITY;
        for s in &fam.samples {
            let r = s.ln_ratio();
            if r > worst.0 {
                worst = (r, format!("{} {}", fam.name, s.point));
            }
            f_full = f_full.max(r);
            if s.scale <= half {
                f_half = f_half.max(r);
            }
        }
        match fam.rule {
            Rule::Fitted => {
                let full = f_full.max(0.0).exp();
                let hf = f_half.max(0.0).exp();
                if !(full.is_finite() && full <= (1.0 + STABILITY_TOL) * hf) {
                    fitted_stable = false;
                }
                c_full = c_full.max(full);
                c_half = c_half.max(hf);
            }
            Rule::Strict(tol) => {
                if f_full.is_nan() || f_full > tol.ln_1p() {
                    strict_failures.push(format!("{} (ratio {:.6e})", fam.name, f_full.exp()));
                }
            }
        }
    }
    let pass = c_full.is_finite() && fitted_stable && strict_failures.is_empty();
    let rows = csv_rows(lemma, &families, max_k);
    VerificationReport {
        lemma: lemma.to_string(),
        grid,
        fitted_constant: c_full,
        fitted_constant_half: c_half,
        worst_ratio: worst.0.exp(),
        worst_location: worst.1,
        points,
        excluded,
        strict_failures,
        pass,
        runtime,
        rows,
    }
}

/// Rows at log-spaced scales (0 and powers of two) plus each family's worst point.
fn csv_rows(lemma: &str, families: &[Family], max_k: i64) -> Vec<GridRow> {
    let half = max_k / 2;
    let mut rows = Vec::new();
    for fam in families {
        let mut c_half: f64 = 0.0;
        for s in &fam.samples {
            if s.scale <= half {
                c_half = c_half.max(s.ln_ratio());
            }
        }
        let allowed = match fam.rule {
            Rule::Fitted => c_half + STABILITY_TOL.ln_1p(),
            Rule::Strict(tol) => tol.ln_1p(),
        };
        let worst_idx = fam
            .samples
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, usize::MAX), |acc, (i, s)| {
                let r = s.ln_ratio();
                if r > acc.0 {
                    (r, i)
                } else {
                    acc
                }
            })
            .1;
        for (i, s) in fam.samples.iter().enumerate() {
            let a = s.scale.unsigned_abs();
            let log_spaced = a == 0 || a.is_power_of_two();
            if !(log_spaced || i == worst_idx) {
                continue;
            }
            let r = s.ln_ratio();
            rows.push(GridRow {
                lemma: lemma.to_string(),
                point: format!(
                    "{} {}{}",
                    fam.name,
                    s.point,
                    if i == worst_idx { " (worst)" } else { "" }
                ),
                lhs: s.ln_val.exp(),
                rhs: s.ln_rhs().exp(),
                ratio: r.exp(),
                pass: r <= allowed,
            });
        }
    }
    rows
}

// ---- parameter grids ----

fn principal_grid() -> Vec<IrrepParams> {
    let mut out = Vec::new();
    for eps in [0u8, 1] {
        for i in 0..=100 {
            let t = 0.5 * i as f64;
            if eps == 1 && t == 0.0 {
                continue;
            }
            out.push(IrrepParams::principal(eps, t));
        }
    }
    out
}

fn complementary_grid() -> Vec<IrrepParams> {
    (1..=9)
        .flat_map(|i| [0.1 * i as f64, -0.1 * i as f64])
        .map(|nu| IrrepParams::complementary(nu).expect("grid lies in (-1, 1)"))
        .collect()
}

fn discrete_grid() -> Vec<IrrepParams> {
    (1..=10)
        .flat_map(|n| [IrrepParams::first_discrete(n), IrrepParams::second_discrete(n)])
        .collect()
}

fn label(p: &IrrepParams) -> String {
    match p.series {
        s if s.is_discrete() => format!("{} eps={} nu={}", s.name(), p.epsilon, p.nu.re),
        s => format!("{} eps={} nu={}", s.name(), p.epsilon, fmt_c(p.nu)),
    }
}

fn fmt_c(z: num_complex::Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}i", z.im)
    }
}

const PRINCIPAL_DESC: &str = "principal t in {0, 0.5, ..., 50} x eps in {0, 1}";
const COMPLEMENTARY_DESC: &str = "complementary nu in {+-0.1, ..., +-0.9}";
const DISCRETE_DESC: &str = "discrete n in 1..=10 x eps in {0, 1}";

/// `ln |Pi_j|` for `j` in `i_nu..=max`, indexed by `j - i_nu`.
fn ln_pi_table(p: &IrrepParams, max: i64) -> Vec<f64> {
    p.pi_abs_table(max).iter().map(|x| x.ln()).collect()
}

fn ln_norm_sq(p: &IrrepParams, table: &[f64], k: i64) -> f64 {
    table[(k.abs() - p.i_nu) as usize]
}

fn par_families<T: Sync>(items: &[T], f: impl Fn(&T) -> Vec<Family> + Sync + Send) -> Vec<Family> {
    items
        .par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn pow2_steps(max: i64) -> Vec<i64> {
    let mut v = vec![0];
    let mut x = 1;
    while x <= max {
        v.push(x);
        x *= 2;
    }
    v
}

// ---- suites ----

fn lemma_2_6(max_k: i64) -> (String, Vec<Family>) {
    let mut params = principal_grid();
    params.extend(complementary_grid());
    params.extend(discrete_grid());
    let fams = par_families(&params, |p| {
        let p = *p;
        let (lo, hi) = if p.is_discrete() {
            (p.i_nu, p.i_nu + max_k)
        } else {
            (-max_k, max_k)
        };
        let pi = ln_pi_table(&p, lo.abs().max(hi.abs()));
        let (pow, num) = match p.series {
            s if s.is_discrete() => (0.25, 1.0 + p.mu.abs()),
            crate::rep_core::Series::Complementary => (0.5, p.mu),
            _ => (1.0, p.mu),
        };
        let sigmas: &[u8] = if p.is_discrete() { &[0] } else { &[0, 1] };
        sigmas
            .iter()
            .map(|&sigma| {
                let mut fam = Family::new(format!("{} sigma={sigma}", label(&p)), Rule::Fitted);
                let d = d_log_table(&p, sigma, lo, hi);
                for (i, k) in (lo..=hi).enumerate() {
                    if d[i].is_zero() {
                        continue;
                    }
                    let val = 2.0 * d[i].log_mag - ln_norm_sq(&p, &pi, k);
                    let bound = pow * num.ln() - 0.5 * (1.0 + p.weight_term(k)).ln();
                    fam.push(format!("k={k}"), (k - p.i_nu.max(0)).abs(), val, bound, bound);
                }
                fam
            })
            .collect()
    });
    (
        format!("{PRINCIPAL_DESC}; {COMPLEMENTARY_DESC}; {DISCRETE_DESC}; |k - i_nu| <= {max_k}; discrete numerator (1+|mu|)^(1/4)"),
        fams,
    )
}

fn lemma_3_1(max_k: i64) -> (String, Vec<Family>) {
    let mut fams = par_families(&principal_grid(), |p| {
        let pi = ln_pi_table(p, max_k);
        let mut fam = Family::new(format!("{} |Pi_k| = 1", label(p)), Rule::Strict(STRICT_TOL));
        for (k, v) in pi.iter().enumerate() {
            fam.push(format!("k={k}"), k as i64, *v, 0.0, 0.0);
        }
        vec![fam]
    });
    fams.extend(par_families(&complementary_grid(), |p| {
        let nu = p.nu.re;
        let pi = ln_pi_table(p, max_k);
        let mut fam = Family::new(label(p), Rule::Fitted);
        for k in 1..=max_k {
            let bound = ((1.0 - nu) / (1.0 + nu)).ln() - nu * (1.0 + k as f64).ln();
            fam.push(format!("k={k}"), k, pi[k as usize], bound, bound);
        }
        vec![fam]
    }));
    fams.extend(par_families(&discrete_grid(), |p| {
        let n = p.i_nu;
        let nu = p.nu.re;
        let e = p.epsilon as f64;
        let pi = ln_pi_table(p, n + max_k);
        let mut fam = Family::new(label(p), Rule::Fitted);
        let steps = pow2_steps(max_k);
        for &dl in &steps {
            let l = n + dl;
            let lo_base = (l - n) as f64 - e + 1.0;
            for &dk in &steps {
                let k = l + dk;
                if k - n > max_k {
                    break;
                }
                let point = format!("l={l} k={k}");
                if lo_base <= 0.0 {
                    fam.exclude(point);
                    continue;
                }
                let val = pi[(k - n) as usize] - pi[(l - n) as usize];
                let lo = -nu * (((k - n) as f64 - e + 1.0) / lo_base).ln();
                let hi = -nu * (((k - n) as f64 + nu) / ((l - n) as f64 + nu)).ln();
                fam.push(point, k - n, val, lo, hi);
            }
        }
        vec![fam]
    }));
    (
        format!("{PRINCIPAL_DESC}, k <= {max_k}; {COMPLEMENTARY_DESC}, 1 <= k <= {max_k}; {DISCRETE_DESC}, l - n and k - l in {{0, 1, 2, 4, ...}}"),
        fams,
    )
}

fn lemma_a3(max_k: i64) -> (String, Vec<Family>) {
    let ts: Vec<f64> = (1..=100).map(|i| 0.5 * i as f64).collect();
    let m = max_k / 2;
    let fams = par_families(&ts, |&t| {
        let t0 = HomogeneousPair::new(IrrepParams::principal(0, t));
        let t1 = HomogeneousPair::new(IrrepParams::principal(1, t));
        let g00 = t0.table(0, 0, 2 * m + 2);
        let g10 = t1.table(0, 0, 2 * m + 2);
        let g01 = t0.table(1, 0, 2 * m + 2);
        let g11 = t1.table(1, 0, 2 * m + 2);
        let names = [
            "|g0_e0(2k)| <= |g0_e1(2k)|",
            "|g0_e1(2k)| <= |g1_e0(2k+1)|",
            "|g1_e0(2k+1)| <= |g1_e1(2k+1)|",
            "|g1_e1(2k+1)| <= |g0_e0(2k+2)|",
        ];
        let mut fams: Vec<Family> = names
            .iter()
            .map(|n| Family::new(format!("t={t} {n}"), Rule::Strict(STRICT_TOL)))
            .collect();
        for k in 1..=m {
            let i = (2 * k) as usize;
            let chain = [
                g00[i].log_mag,
                g10[i].log_mag,
                g01[i + 1].log_mag,
                g11[i + 1].log_mag,
                g00[i + 2].log_mag,
            ];
            for (j, fam) in fams.iter_mut().enumerate() {
                fam.push(format!("k={k}"), 2 * k, chain[j], f64::NEG_INFINITY, chain[j + 1]);
            }
        }
        fams
    });
    (format!("principal t in {{0.5, ..., 50}}, 1 <= k <= {m}"), fams)
}

fn lemma_a4(max_k: i64) -> (String, Vec<Family>) {
    let m = max_k / 2;
    let fams = par_families(&principal_grid(), |p| {
        let h = HomogeneousPair::new(*p);
        let lo_idx = -2 * m - 1;
        let g0 = h.table(0, lo_idx, 2 * m + 1);
        let g1 = h.table(1, lo_idx, 2 * m + 1);
        let nu2 = p.nu.norm_sqr();
        let b = |x: f64| -0.5 * (x * x + nu2).ln();
        let mut f0 = Family::new(format!("{} |g0(2k)|^2", label(p)), Rule::Fitted);
        let mut f1 = Family::new(format!("{} |g1(2k+1)|^2", label(p)), Rule::Fitted);
        for k in -m..=m {
            let a = 4.0 * k.abs() as f64;
            let v0 = 2.0 * g0[(2 * k - lo_idx) as usize].log_mag;
            f0.push(format!("k={k}"), 2 * k.abs(), v0, b(a + 1.0), b(a + 3.0));
            let v1 = 2.0 * g1[(2 * k + 1 - lo_idx) as usize].log_mag;
            f1.push(format!("k={k}"), 2 * k.abs(), v1, b(a - 1.0), b(a + 5.0));
        }
        vec![f0, f1]
    });
    (format!("{PRINCIPAL_DESC}, |k| <= {m}"), fams)
}

fn lemma_a5(max_k: i64) -> (String, Vec<Family>) {
    let m = max_k / 2;
    let fams = par_families(&complementary_grid(), |p| {
        let nu = p.nu.re;
        let h = HomogeneousPair::new(*p);
        let lo_idx = -2 * m - 1;
        let g0 = h.table(0, lo_idx, 2 * m + 1);
        let g1 = h.table(1, lo_idx, 2 * m + 1);
        let ex = (nu - 1.0) / 2.0;
        let mut f0 = Family::new(format!("{} |g0(2k)|", label(p)), Rule::Fitted);
        let mut f1 = Family::new(format!("{} |g1(2k+1)|", label(p)), Rule::Fitted);
        for k in -m..=m {
            let a = 4.0 * k.abs() as f64;
            let v0 = g0[(2 * k - lo_idx) as usize].log_mag;
            let lo0 = if a - 3.0 + nu > 0.0 {
                ((1.0 + nu) / (3.0 - nu)).ln() + ex * ((a - 3.0 + nu) / (1.0 + nu)).ln()
            } else {
                f0.exclude(format!("k={k} lower (4|k|-3+nu <= 0)"));
                f64::NEG_INFINITY
            };
            let hi0 = ex * ((a + 3.0 - nu) / (3.0 - nu)).ln();
            f0.push(format!("k={k}"), 2 * k.abs(), v0, lo0, hi0);
            let v1 = g1[(2 * k + 1 - lo_idx) as usize].log_mag;
            let lo1 = if a - 1.0 + nu > 0.0 {
                ((3.0 + nu) / (5.0 - nu)).ln() + ex * ((a - 1.0 + nu) / (3.0 + nu)).ln()
            } else {
                f1.exclude(format!("k={k} lower (4|k|-1+nu <= 0)"));
                f64::NEG_INFINITY
            };
            let hi1 = ex * ((a + 5.0 - nu) / (5.0 - nu)).ln();
            f1.push(format!("k={k}"), 2 * k.abs(), v1, lo1, hi1);
        }
        vec![f0, f1]
    });
    (format!("{COMPLEMENTARY_DESC}, |k| <= {m}"), fams)
}

fn lemma_a6(max_k: i64) -> (String, Vec<Family>) {
    let m = max_k / 2;
    let fams = par_families(&discrete_grid(), |p| {
        let n = p.i_nu;
        let nu = p.nu.re;
        let ex = (nu - 1.0) / 2.0;
        let h = HomogeneousPair::new(*p);
        let g0 = h.table(0, n, n + 2 * m + 1);
        let g1 = h.table(1, n, n + 2 * m + 1);
        let mut f0 = Family::new(format!("{} |g0(n+2k)|", label(p)), Rule::Fitted);
        let mut f1 = Family::new(format!("{} |g1(n+2k+1)|", label(p)), Rule::Fitted);
        for k in 0..=m {
            let kf = k as f64;
            let lo0 = ex * ((2.0 * kf + nu + 1.0) / (nu + 1.0)).ln();
            let hi0 = if k > 0 {
                ((nu + 1.0) / 2.0).ln() + ex * kf.ln()
            } else {
                f0.exclude("k=0 upper (k^((nu-1)/2) at k = 0)".into());
                f64::INFINITY
            };
            f0.push(format!("k={k}"), 2 * k, g0[(2 * k) as usize].log_mag, lo0, hi0);
            let lo1 = if nu > 1.0 {
                ex * ((2.0 * kf + nu - 1.0) / (nu - 1.0)).ln()
            } else {
                f1.exclude(format!("k={k} lower (nu - 1 = 0)"));
                f64::NEG_INFINITY
            };
            let hi1 = if k > 0 {
                ((nu + 1.0) / 3.0).ln() + ex * (2.0 * kf - 1.0).ln()
            } else {
                f1.exclude("k=0 upper (2k - 1 < 0)".into());
                f64::INFINITY
            };
            f1.push(format!("k={k}"), 2 * k, g1[(2 * k + 1) as usize].log_mag, lo1, hi1);
        }
        vec![f0, f1]
    });
    (format!("{DISCRETE_DESC}, 0 <= k <= {m}"), fams)
}

fn lemma_a8(max_k: i64) -> (String, Vec<Family>) {
    let mut fams = par_families(&complementary_grid(), |p| {
        let nu = p.nu.re;
        let mut a = Family::new(format!("{} C1,C2: 4k+1+nu", label(p)), Rule::Fitted);
        let mut b = Family::new(format!("{} C3,C4: 4k+1-nu", label(p)), Rule::Fitted);
        for k in 0..=max_k {
            let kf = k as f64;
            let r0 = 0.5 * (1.0 + p.mu + 2.0 * (2.0 * kf).powi(2)).ln();
            a.push(format!("k={k}"), k, (4.0 * kf + 1.0 + nu).ln(), r0, r0);
            let r1 = 0.5 * (1.0 + p.mu + 2.0 * (2.0 * kf + 1.0).powi(2)).ln();
            b.push(format!("k={k}"), k, (4.0 * kf + 1.0 - nu).ln(), r1, r1);
        }
        vec![a, b]
    });
    fams.extend(par_families(&discrete_grid(), |p| {
        let nu = p.nu.re;
        let mut a = Family::new(format!("{} C5,C6: 2k+1+nu", label(p)), Rule::Fitted);
        for k in 0..=max_k {
            let r = 0.5 * (1.0 + p.weight_term(p.i_nu + 2 * k)).ln();
            a.push(format!("k={k}"), k, (2.0 * k as f64 + 1.0 + nu).ln(), r, r);
        }
        vec![a]
    }));
    (
        format!("{COMPLEMENTARY_DESC}; {DISCRETE_DESC}; 0 <= k <= {max_k}"),
        fams,
    )
}

/// Partial sums over growing boxes of `sum w^-tau |D_n(u_k)|^2 / ||u_k||^2`
/// against `sum w^(-tau - d/2)` on two-factor products.
fn order_bound(max_k: i64) -> (String, Vec<Family>) {
    const TAU: f64 = 0.5;
    let pairs = vec![
        (IrrepParams::principal(0, 1.0), IrrepParams::principal(1, 3.0)),
        (
            IrrepParams::principal(0, 1.0),
            IrrepParams::complementary(0.5).expect("valid"),
        ),
        (
            IrrepParams::complementary(-0.7).expect("valid"),
            IrrepParams::first_discrete(2),
        ),
        (IrrepParams::second_discrete(1), IrrepParams::first_discrete(3)),
    ];
    let mut jobs = Vec::new();
    for (a, b) in &pairs {
        let params = TensorParams::new(vec![*a, *b]).expect("two factors");
        for sigma in sigma_vectors(&params) {
            jobs.push((*a, *b, sigma));
        }
    }
    let fams = jobs
        .iter()
        .map(|(a, b, sigma)| {
            let axis = |p: &IrrepParams, s: u8| {
                let (lo, hi) = if p.is_discrete() {
                    (p.i_nu, p.i_nu + max_k)
                } else {
                    (-max_k, max_k)
                };
                let pi = ln_pi_table(p, lo.abs().max(hi.abs()));
                let d = d_log_table(p, s, lo, hi);
                let vals: Vec<f64> = (lo..=hi)
                    .enumerate()
                    .map(|(i, k)| {
                        if d[i].is_zero() {
                            0.0
                        } else {
                            (2.0 * d[i].log_mag - ln_norm_sq(p, &pi, k)).exp()
                        }
                    })
                    .collect();
                let terms: Vec<f64> = (lo..=hi).map(|k| p.weight_term(k)).collect();
                let scale: Vec<usize> = (lo..=hi).map(|k| (k - p.i_nu.max(0)).unsigned_abs() as usize).collect();
                (vals, terms, scale)
            };
            let (va, ta, sa) = axis(a, sigma[0]);
            let (vb, tb, sb) = axis(b, sigma[1]);
            let shells = (max_k + 1) as usize;
            // fixed chunking keeps the floating-point sum order independent of the thread count
            let chunk = 64;
            let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..va.len())
                .collect::<Vec<_>>()
                .par_chunks(chunk)
                .map(|rows| {
                    let mut s = vec![0.0; shells];
                    let mut r = vec![0.0; shells];
                    for &i in rows {
                        for j in 0..vb.len() {
                            let w = 1.0 + ta[i] + tb[j];
                            let sw = w.sqrt();
                            let shell = sa[i].max(sb[j]);
                            s[shell] += va[i] * vb[j] / sw;
                            r[shell] += 1.0 / (w * w * sw);
                        }
                    }
                    (s, r)
                })
                .collect();
            let mut s = vec![0.0; shells];
            let mut r = vec![0.0; shells];
            for (ps, pr) in &partial {
                for x in 0..shells {
                    s[x] += ps[x];
                    r[x] += pr[x];
                }
            }
            let mut fam = Family::new(
                format!("{} x {} sigma={}{}", label(a), label(b), sigma[0], sigma[1]),
                Rule::Fitted,
            );
            let (mut cs, mut cr) = (0.0, 0.0);
            for x in 0..shells {
                cs += s[x];
                cr += r[x];
                let k = x as i64;
                if k == 0 || (k as u64).is_power_of_two() || k == max_k {
                    fam.push(format!("box={k}"), k, cs.ln(), f64::NEG_INFINITY, cr.ln());
                }
            }
            fam
        })
        .collect();
    (
        format!("tau = {TAU}, d = 2, four factor pairs, every sigma, boxes up to {max_k}"),
        fams,
    )
}

fn proof_chain(max_k: i64) -> (String, Vec<Family>) {
    let m = max_k / 2;
    let mut fams = Vec::new();

    let mut log_ineq = Family::new("x/(1+x) <= log(1+x) <= x", Rule::Strict(STRICT_TOL));
    for i in 1..=10_000 {
        let x = 1000.0 * i as f64 / 10_000.0;
        log_ineq.push(format!("x={x}"), 0, x.ln_1p().ln(), (x / (1.0 + x)).ln(), x.ln());
    }
    fams.push(log_ineq);

    fams.extend(par_families(&complementary_grid(), |p| {
        let nu = p.nu.re;
        let pi = ln_pi_table(p, 2 * m + 1);
        let d0 = d_log_table(p, 0, -2 * m - 1, 2 * m + 1);
        let d1 = d_log_table(p, 1, -2 * m - 1, 2 * m + 1);
        let at = |t: &[crate::rep_core::LogComplex], k: i64| t[(k + 2 * m + 1) as usize].log_mag;
        let mut even = Family::new(
            format!("{} ||u_(+-2k)||^2/|D0|^2 identity", label(p)),
            Rule::Strict(IDENTITY_TOL),
        );
        let mut odd = Family::new(
            format!("{} ||u_(+-(2k+1))||^2/|D1|^2 identity", label(p)),
            Rule::Strict(IDENTITY_TOL),
        );
        let mut prod = Family::new(format!("{} product bounded", label(p)), Rule::Fitted);
        let mut ln_p = 0.0;
        for k in 0..=m {
            if k > 0 {
                let j = k as f64;
                ln_p += ((4.0 + 4.0 * nu) / ((4.0 * j + 1.0 + nu) * (4.0 * j - 3.0 - nu))).ln_1p();
            }
            let kf = k as f64;
            let rhs_e = ((4.0 * kf + 1.0 + nu) / (1.0 + nu)).ln() + ln_p;
            let rhs_o = ((4.0 * kf + 1.0 - nu) / (1.0 + nu)).ln() - ln_p;
            for sign in [1, -1] {
                let ke = sign * 2 * k;
                let ko = sign * (2 * k + 1);
                let ve = ln_norm_sq(p, &pi, ke) - 2.0 * at(&d0, ke);
                even.push(format!("k={ke}"), 2 * k, ve, rhs_e, rhs_e);
                let vo = ln_norm_sq(p, &pi, ko) - 2.0 * at(&d1, ko);
                odd.push(format!("k={ko}"), 2 * k, vo, rhs_o, rhs_o);
            }
            prod.push(format!("k={k}"), 2 * k, ln_p, 0.0, 0.0);
        }
        vec![even, odd, prod]
    }));

    fams.extend(par_families(&discrete_grid(), |p| {
        let n = p.i_nu;
        let nu = p.nu.re;
        let pi = ln_pi_table(p, n + 2 * m);
        let d0 = d_log_table(p, 0, n, n + 2 * m);
        let mut ident = Family::new(
            format!("{} ||u_(n+2k)||^2/|D0|^2 identity", label(p)),
            Rule::Strict(IDENTITY_TOL),
        );
        let mut prod = Family::new(format!("{} product ~ (nu+1)^(1/2)", label(p)), Rule::Fitted);
        let mut ln_q = 0.0;
        let half_ln = 0.5 * (nu + 1.0).ln();
        for k in 0..=m {
            let kf = k as f64;
            if k > 0 {
                ln_q += ((1.0 + nu) / ((2.0 * kf - 1.0) * (2.0 * kf + 1.0 + nu))).ln_1p();
            }
            let idx = n + 2 * k;
            let v = pi[(idx - n) as usize] - 2.0 * d0[(2 * k) as usize].log_mag;
            let rhs = ((2.0 * kf + 1.0 + nu) / (1.0 + nu)).ln() + ln_q;
            ident.push(format!("k={k}"), 2 * k, v, rhs, rhs);
            prod.push(format!("k={k}"), 2 * k, ln_q, half_ln, half_ln);
        }
        vec![ident, prod]
    }));

    (
        format!("log inequality on 10^4 points of (0, 1000]; {COMPLEMENTARY_DESC} and {DISCRETE_DESC}, 0 <= k <= {m}"),
        fams,
    )
}
