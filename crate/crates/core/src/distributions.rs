// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `X`-invariant distributions `D_0`, `D_1` and their tensor products.

use crate::error::{CohomError, Result};
use crate::rep_core::{CoeffTensor, IrrepParams, LogComplex, TensorParams};
use num_complex::Complex64;

/// Relative kernel-defect tolerance used as the solvers' default gate.
pub const DEFAULT_DEFECT_TOL: f64 = 1e-8;

/// One product distribution `D_sigma = D_{sigma_1} x ... x D_{sigma_d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantDistribution {
    params: TensorParams,
    sigma: Vec<u8>,
}

fn check_sigma(p: &IrrepParams, sigma: u8) -> Result<()> {
    match sigma {
        0 => Ok(()),
        1 if p.is_discrete() => Err(CohomError::NotInvariant),
        1 => Ok(()),
        _ => Err(CohomError::Shape(format!("sigma must be 0 or 1, got {sigma}"))),
    }
}

/// `D_sigma(u_k)` on one factor, following `D(u_{k+1}) = beta(k) D(u_{k-1})` from
/// the seed values at `i_nu` and `i_nu + 1`.
pub fn d_value(p: &IrrepParams, sigma: u8, k: i64) -> Result<LogComplex> {
    check_sigma(p, sigma)?;
    if !p.contains(k) {
        return Err(CohomError::IndexOutOfRange { axis: 0, k });
    }
    Ok(d_value_unchecked(p, sigma, k))
}

/// As [`d_value`] but also defines `D_1` on discrete factors, which the
/// discrete-series solver uses even though it is not invariant there.
pub(crate) fn d_value_unchecked(p: &IrrepParams, sigma: u8, k: i64) -> LogComplex {
    let start = p.i_nu + sigma as i64;
    if (k - start).rem_euclid(2) != 0 {
        return LogComplex::ZERO;
    }
    let mut acc = LogComplex::ONE;
    let mut j = start;
    while j < k {
        acc = acc * LogComplex::from(p.beta(j + 1).expect("b+ never vanishes on J_nu"));
        j += 2;
    }
    while j > k {
        acc = acc / LogComplex::from(p.beta(j - 1).expect("b+ never vanishes on J_nu"));
        j -= 2;
    }
    acc
}

/// `D_sigma(u_k)` for every `k` in `lo..=hi`, computed with one pass of prefix products.
pub fn d_table(p: &IrrepParams, sigma: u8, lo: i64, hi: i64) -> Vec<Complex64> {
    d_log_table(p, sigma, lo, hi)
        .iter()
        .map(LogComplex::to_complex)
        .collect()
}

pub(crate) fn d_log_table(p: &IrrepParams, sigma: u8, lo: i64, hi: i64) -> Vec<LogComplex> {
    let mut out = vec![LogComplex::ZERO; (hi - lo + 1) as usize];
    let start = p.i_nu + sigma as i64;
    let beta = |j: i64| LogComplex::from(p.beta(j).expect("b+ never vanishes on J_nu"));
    let mut put = |k: i64, v: LogComplex| {
        if lo <= k && k <= hi {
            out[(k - lo) as usize] = v;
        }
    };
    let mut acc = LogComplex::ONE;
    let mut j = start;
    put(j, acc);
    while j + 2 <= hi {
        acc = acc * beta(j + 1);
        j += 2;
        put(j, acc);
    }
    if !p.is_discrete() {
        let mut acc = LogComplex::ONE;
        let mut j = start;
        while j - 2 >= lo {
            acc = acc / beta(j - 1);
            j -= 2;
            put(j, acc);
        }
    }
    out
}

/// The set `S(mu)` in enumeration order: binary counting with the first axis
/// most significant, `sigma_i` held at 0 on discrete factors.
pub fn sigma_vectors(params: &TensorParams) -> Vec<Vec<u8>> {
    let free: Vec<usize> = (0..params.dim()).filter(|&a| !params.factor(a).is_discrete()).collect();
    (0..1usize << free.len())
        .map(|bits| {
            let mut s = vec![0u8; params.dim()];
            for (i, &a) in free.iter().enumerate() {
                s[a] = ((bits >> (free.len() - 1 - i)) & 1) as u8;
            }
            s
        })
        .collect()
}

pub fn basis_of_distributions(params: &TensorParams) -> Vec<InvariantDistribution> {
    sigma_vectors(params)
        .into_iter()
        .map(|sigma| InvariantDistribution {
            params: params.clone(),
            sigma,
        })
        .collect()
}

impl InvariantDistribution {
    pub fn new(params: TensorParams, sigma: Vec<u8>) -> Result<Self> {
        if sigma.len() != params.dim() {
            return Err(CohomError::Shape("sigma length must match the factor count".into()));
        }
        for (p, &s) in params.factors().iter().zip(&sigma) {
            check_sigma(p, s)?;
        }
        Ok(InvariantDistribution { params, sigma })
    }

    pub fn sigma(&self) -> &[u8] {
        &self.sigma
    }

    pub fn params(&self) -> &TensorParams {
        &self.params
    }

    /// `sum_k f(k) D_sigma(u_k)` over the window of `f`.
    pub fn eval(&self, f: &CoeffTensor) -> Complex64 {
        eval_sigma(f, &self.sigma)
    }
}

pub(crate) fn eval_sigma(f: &CoeffTensor, sigma: &[u8]) -> Complex64 {
    let tables: Vec<Vec<Complex64>> = f
        .params()
        .factors()
        .iter()
        .zip(f.window().bounds())
        .zip(sigma)
        .map(|((p, &(lo, hi)), &s)| d_table(p, s, lo, hi))
        .collect();
    let shape = f.window().shape();
    let d = shape.len();
    let mut pos = vec![0usize; d];
    let mut acc = Complex64::new(0.0, 0.0);
    for z in f.coeffs() {
        let mut w = Complex64::new(1.0, 0.0);
        for a in 0..d {
            w *= tables[a][pos[a]];
        }
        acc += z * w;
        for a in (0..d).rev() {
            pos[a] += 1;
            if pos[a] < shape[a] {
                break;
            }
            pos[a] = 0;
        }
    }
    acc
}

/// `D(f)` for every basis distribution, in [`sigma_vectors`] order.
pub fn kernel_defect(f: &CoeffTensor) -> Vec<Complex64> {
    sigma_vectors(f.params()).iter().map(|s| eval_sigma(f, s)).collect()
}

pub fn max_kernel_defect(f: &CoeffTensor) -> f64 {
    kernel_defect(f).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// CSV with columns `sigma,real,imag,magnitude`; sigma is written as a bit string.
pub fn kernel_defect_csv(f: &CoeffTensor) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sigma", "real", "imag", "magnitude"])
        .expect("in-memory write");
    for (s, z) in sigma_vectors(f.params()).iter().zip(kernel_defect(f)) {
        let bits: String = s.iter().map(|b| char::from(b'0' + b)).collect();
        w.write_record([bits, z.re.to_string(), z.im.to_string(), z.norm().to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep_core::{classify, Window};

    fn near(a: Complex64, b: f64, tol: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() <= tol
    }

    #[test]
    fn d_value_examples() {
        let p = classify(0.25, 0, None).unwrap();
        assert!(near(d_value(&p, 0, 2).unwrap().to_complex(), 1.0 / 3.0, 1e-15));
        assert!(near(d_value(&p, 0, 4).unwrap().to_complex(), 5.0 / 21.0, 1e-15));
        let c = IrrepParams::complementary(0.5).unwrap();
        assert!(near(d_value(&c, 0, 2).unwrap().to_complex(), 1.0 / 7.0, 1e-15));
        for q in [p, c, IrrepParams::first_discrete(3)] {
            assert_eq!(d_value(&q, 0, q.i_nu).unwrap(), LogComplex::ONE);
            assert!(d_value(&q, 0, q.i_nu + 1).unwrap().is_zero());
        }
        assert_eq!(
            d_value(&IrrepParams::first_discrete(2), 1, 3),
            Err(CohomError::NotInvariant)
        );
    }

    #[test]
    fn table_matches_pointwise() {
        for p in [
            IrrepParams::principal(1, 2.0),
            IrrepParams::complementary(-0.6).unwrap(),
            IrrepParams::second_discrete(2),
        ] {
            for s in 0..=1u8 {
                let lo = if p.is_discrete() { p.i_nu } else { -9 };
                let t = d_table(&p, s, lo, 11);
                for (i, k) in (lo..=11).enumerate() {
                    let v = d_value_unchecked(&p, s, k).to_complex();
                    assert!((t[i] - v).norm() <= 1e-13 * (1.0 + v.norm()));
                }
            }
        }
    }

    #[test]
    fn eval_example() {
        let p = classify(0.25, 0, None).unwrap();
        let f = CoeffTensor::from_fn(TensorParams::single(p), Window::new(vec![(-1, 3)]).unwrap(), |k| {
            Complex64::new(
                match k[0] {
                    2 => 1.0,
                    0 => -3.0,
                    _ => 0.0,
                },
                0.0,
            )
        })
        .unwrap();
        let d = InvariantDistribution::new(TensorParams::single(p), vec![0]).unwrap();
        assert!(near(d.eval(&f), -8.0 / 3.0, 1e-14));
    }

    #[test]
    fn basis_sizes() {
        let p = classify(0.25, 0, None).unwrap();
        let q = IrrepParams::first_discrete(2);
        assert_eq!(basis_of_distributions(&TensorParams::new(vec![p, p]).unwrap()).len(), 4);
        assert_eq!(basis_of_distributions(&TensorParams::new(vec![p, q]).unwrap()).len(), 2);
        let one = basis_of_distributions(&TensorParams::single(q));
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].sigma(), &[0]);
        assert_eq!(
            sigma_vectors(&TensorParams::new(vec![p, q, p]).unwrap()),
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![1, 0, 0], vec![1, 0, 1]]
        );
    }

    #[test]
    fn kernel_defect_of_delta_and_zero() {
        let q = IrrepParams::first_discrete(2);
        let params = TensorParams::new(vec![q, q]).unwrap();
        let w = Window::new(vec![(2, 5), (2, 5)]).unwrap();
        let f = CoeffTensor::from_fn(params.clone(), w.clone(), |k| {
            Complex64::new(if k == [2, 2] { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(near(kernel_defect(&f)[0], 1.0, 0.0));
        let z = CoeffTensor::zeros(params, w).unwrap();
        assert!(kernel_defect(&z).iter().all(|v| v.norm() == 0.0));
        assert!(kernel_defect_csv(&z).starts_with("sigma,real,imag,magnitude\n00,"));
    }

    #[test]
    fn invariance_of_x_images() {
        for p in [
            IrrepParams::principal(0, 1.3),
            IrrepParams::principal(1, 0.2),
            IrrepParams::complementary(0.8).unwrap(),
            IrrepParams::first_discrete(4),
            IrrepParams::second_discrete(1),
        ] {
            let lo = if p.is_discrete() { p.i_nu } else { -6 };
            let h = CoeffTensor::from_fn(
                TensorParams::single(p),
                Window::new(vec![(lo, lo + 12)]).unwrap(),
                |k| Complex64::new((k[0] as f64).sin(), (k[0] as f64 * 0.3).cos()),
            )
            .unwrap();
            let f = h.apply_x(0).unwrap();
            for v in kernel_defect(&f) {
                assert!(v.norm() <= 1e-12 * h.norm0(), "{:?}: {v}", p.series);
            }
        }
    }
}
