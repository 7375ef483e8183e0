// SPDX-License-Identifier: MIT OR Apache-2.0

//! Parameters of one irreducible factor and of a tensor product of factors.

use super::logc::LogComplex;
use crate::error::{CohomError, Result};
use num_complex::Complex64;

/// The five families of non-trivial irreducible unitary representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    FirstPrincipal,
    SecondPrincipal,
    Complementary,
    FirstDiscrete(u32),
    SecondDiscrete(u32),
}

/// Series family without the discrete index, used to disambiguate `classify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesHint {
    FirstPrincipal,
    SecondPrincipal,
    Complementary,
    FirstDiscrete,
    SecondDiscrete,
}

impl Series {
    pub fn hint(&self) -> SeriesHint {
        match self {
            Series::FirstPrincipal => SeriesHint::FirstPrincipal,
            Series::SecondPrincipal => SeriesHint::SecondPrincipal,
            Series::Complementary => SeriesHint::Complementary,
            Series::FirstDiscrete(_) => SeriesHint::FirstDiscrete,
            Series::SecondDiscrete(_) => SeriesHint::SecondDiscrete,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Series::FirstDiscrete(_) | Series::SecondDiscrete(_))
    }

    /// Snake-case name used in JSON and reports.
    pub fn name(&self) -> &'static str {
        self.hint().name()
    }
}

impl SeriesHint {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesHint::FirstPrincipal => "first_principal",
            SeriesHint::SecondPrincipal => "second_principal",
            SeriesHint::Complementary => "complementary",
            SeriesHint::FirstDiscrete => "first_discrete",
            SeriesHint::SecondDiscrete => "second_discrete",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "first_principal" => SeriesHint::FirstPrincipal,
            "second_principal" => SeriesHint::SecondPrincipal,
            "complementary" => SeriesHint::Complementary,
            "first_discrete" => SeriesHint::FirstDiscrete,
            "second_discrete" => SeriesHint::SecondDiscrete,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    AllIntegers,
    FromN(i64),
}

/// Representation data of one SL(2,R) factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrrepParams {
    pub mu: f64,
    pub epsilon: u8,
    pub series: Series,
    pub nu: Complex64,
    pub i_nu: i64,
    pub index_set: IndexSet,
}

const CLASSIFY_TOL: f64 = 1e-9;

fn discrete_index(x: f64) -> Option<u32> {
    let n = x.round();
    if n >= 1.0 && (x - n).abs() <= CLASSIFY_TOL * n.max(1.0) {
        Some(n as u32)
    } else {
        None
    }
}

/// Determines the series of `(mu, epsilon)`.
///
/// `mu = 0` with `epsilon = 0` is shared with the (excluded) trivial
/// representation, so it needs a hint. A hint that disagrees with the
/// parameters is an error.
pub fn classify(mu: f64, epsilon: u8, hint: Option<SeriesHint>) -> Result<IrrepParams> {
    if !mu.is_finite() {
        return Err(CohomError::InconsistentParameters(format!("mu = {mu} is not finite")));
    }
    let found = match epsilon {
        0 => {
            if mu >= 0.25 {
                Some(Series::FirstPrincipal)
            } else if mu > 0.0 {
                Some(Series::Complementary)
            } else if mu == 0.0 && hint.is_none() {
                return Err(CohomError::AmbiguousSeries { mu, epsilon });
            } else {
                // mu = -n^2 + n  <=>  n = (1 + sqrt(1 - 4 mu)) / 2
                discrete_index((1.0 + (1.0 - 4.0 * mu).sqrt()) / 2.0).map(Series::FirstDiscrete)
            }
        }
        1 => {
            if mu > 0.25 {
                Some(Series::SecondPrincipal)
            } else if mu < 0.25 {
                // mu = -n^2 + 1/4  <=>  n = sqrt(1/4 - mu)
                discrete_index((0.25 - mu).sqrt()).map(Series::SecondDiscrete)
            } else {
                None
            }
        }
        _ => {
            return Err(CohomError::InconsistentParameters(format!(
                "epsilon must be 0 or 1, got {epsilon}"
            )))
        }
    };
    let series = found.ok_or_else(|| {
        CohomError::InconsistentParameters(format!("no series has mu = {mu} and epsilon = {epsilon}"))
    })?;
    if let Some(h) = hint {
        if h != series.hint() {
            return Err(CohomError::InconsistentParameters(format!(
                "mu = {mu}, epsilon = {epsilon} belongs to {}, not {}",
                series.name(),
                h.name()
            )));
        }
    }
    Ok(IrrepParams::from_series(series, mu))
}

impl IrrepParams {
    fn from_series(series: Series, mu: f64) -> Self {
        match series {
            Series::FirstPrincipal => Self::principal(0, (4.0 * mu - 1.0).max(0.0).sqrt()),
            Series::SecondPrincipal => Self::principal(1, (4.0 * mu - 1.0).sqrt()),
            Series::Complementary => {
                IrrepParams::complementary((1.0 - 4.0 * mu).sqrt()).expect("classify only routes 0 < mu < 1/4 here")
            }
            Series::FirstDiscrete(n) => Self::first_discrete(n),
            Series::SecondDiscrete(n) => Self::second_discrete(n),
        }
    }

    /// Principal series with `nu = i t`.
    pub fn principal(epsilon: u8, t: f64) -> Self {
        assert!(epsilon <= 1, "epsilon must be 0 or 1");
        let t = t.abs();
        let series = if epsilon == 0 {
            Series::FirstPrincipal
        } else {
            assert!(t > 0.0, "the second principal series needs nu != 0");
            Series::SecondPrincipal
        };
        IrrepParams {
            mu: (1.0 + t * t) / 4.0,
            epsilon,
            series,
            nu: Complex64::new(0.0, t),
            i_nu: 0,
            index_set: IndexSet::AllIntegers,
        }
    }

    /// Complementary series with an explicit real `nu` of either sign.
    pub fn complementary(nu: f64) -> Result<Self> {
        if !(nu.abs() < 1.0 && nu != 0.0) {
            return Err(CohomError::InconsistentParameters(format!(
                "complementary series needs 0 < |nu| < 1, got {nu}"
            )));
        }
        Ok(IrrepParams {
            mu: (1.0 - nu * nu) / 4.0,
            epsilon: 0,
            series: Series::Complementary,
            nu: Complex64::new(nu, 0.0),
            i_nu: 0,
            index_set: IndexSet::AllIntegers,
        })
    }

    pub fn first_discrete(n: u32) -> Self {
        assert!(n >= 1, "discrete series index starts at 1");
        let n64 = n as i64;
        IrrepParams {
            mu: (-n64 * n64 + n64) as f64,
            epsilon: 0,
            series: Series::FirstDiscrete(n),
            nu: Complex64::new((2 * n64 - 1) as f64, 0.0),
            i_nu: n64,
            index_set: IndexSet::FromN(n64),
        }
    }

    pub fn second_discrete(n: u32) -> Self {
        assert!(n >= 1, "discrete series index starts at 1");
        let n64 = n as i64;
        IrrepParams {
            mu: -((n64 * n64) as f64) + 0.25,
            epsilon: 1,
            series: Series::SecondDiscrete(n),
            nu: Complex64::new((2 * n64) as f64, 0.0),
            i_nu: n64,
            index_set: IndexSet::FromN(n64),
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.series.is_discrete()
    }

    /// Whether `k` lies in the index set J_nu.
    pub fn contains(&self, k: i64) -> bool {
        match self.index_set {
            IndexSet::AllIntegers => true,
            IndexSet::FromN(n) => k >= n,
        }
    }

    fn eps(&self) -> f64 {
        self.epsilon as f64
    }

    /// Raising coefficient `(2k + eps + 1 + nu) / 4`.
    pub fn b_plus(&self, k: i64) -> Complex64 {
        (Complex64::new(2.0 * k as f64 + self.eps() + 1.0, 0.0) + self.nu) / 4.0
    }

    /// Lowering coefficient `(2k + eps - 1 - nu) / 4`.
    pub fn b_minus(&self, k: i64) -> Complex64 {
        (Complex64::new(2.0 * k as f64 + self.eps() - 1.0, 0.0) - self.nu) / 4.0
    }

    pub fn beta(&self, k: i64) -> Result<Complex64> {
        let bp = self.b_plus(k);
        if bp.norm() == 0.0 {
            return Err(CohomError::DivisionByZero { k });
        }
        Ok(self.b_minus(k) / bp)
    }

    /// Factor `(2i + eps - 1 - nu) / (2i + eps - 1 + conj(nu))` of the Pi product.
    fn pi_term(&self, i: i64) -> Complex64 {
        let a = 2.0 * i as f64 + self.eps() - 1.0;
        (Complex64::new(a, 0.0) - self.nu) / (Complex64::new(a, 0.0) + self.nu.conj())
    }

    /// `Pi_k`, the product of [`Self::pi_term`] over `i_nu < i <= k`.
    pub fn pi_product(&self, k: i64) -> Result<LogComplex> {
        if k < self.i_nu {
            return Err(CohomError::IndexBelowStart { k, start: self.i_nu });
        }
        let mut acc = LogComplex::ONE;
        for i in self.i_nu + 1..=k {
            acc = acc * LogComplex::from(self.pi_term(i));
        }
        Ok(acc)
    }

    /// `|Pi_j|` for every `j` in `i_nu..=max_abs`, indexed by `j - i_nu`.
    pub fn pi_abs_table(&self, max_abs: i64) -> Vec<f64> {
        let mut out = Vec::with_capacity((max_abs - self.i_nu + 1).max(0) as usize);
        let mut log_mag = 0.0;
        if max_abs >= self.i_nu {
            out.push(1.0);
        }
        for i in self.i_nu + 1..=max_abs {
            log_mag += self.pi_term(i).norm().ln();
            out.push(log_mag.exp());
        }
        out
    }

    /// `||u_k||^2 = |Pi_{|k|}|`.
    pub fn basis_norm_sq(&self, k: i64) -> Result<f64> {
        if !self.contains(k) {
            return Err(CohomError::IndexOutOfRange { axis: 0, k });
        }
        Ok(self.pi_product(k.abs())?.abs())
    }

    /// `||u_k||^2` for every `k` in `lo..=hi`.
    pub fn norm_sq_range(&self, lo: i64, hi: i64) -> Vec<f64> {
        debug_assert!(self.contains(lo) && lo <= hi);
        let max_abs = lo.abs().max(hi.abs());
        let table = self.pi_abs_table(max_abs);
        (lo..=hi).map(|k| table[(k.abs() - self.i_nu) as usize]).collect()
    }

    /// Per-factor summand `mu + 2 (k + eps/2)^2` of the Sobolev weight base.
    pub fn weight_term(&self, k: i64) -> f64 {
        let x = k as f64 + self.eps() / 2.0;
        self.mu + 2.0 * x * x
    }
}

/// The factors of a tensor product representation, in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorParams {
    factors: Vec<IrrepParams>,
}

impl TensorParams {
    pub fn new(factors: Vec<IrrepParams>) -> Result<Self> {
        if factors.is_empty() {
            return Err(CohomError::Shape("a tensor needs at least one factor".into()));
        }
        Ok(TensorParams { factors })
    }

    pub fn single(p: IrrepParams) -> Self {
        TensorParams { factors: vec![p] }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[IrrepParams] {
        &self.factors
    }

    pub fn factor(&self, axis: usize) -> &IrrepParams {
        &self.factors[axis]
    }

    /// Parameters with the listed axes removed; `None` if nothing remains.
    pub fn without(&self, axes: &[usize]) -> Option<TensorParams> {
        let rest: Vec<_> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(a, _)| !axes.contains(a))
            .map(|(_, p)| *p)
            .collect();
        if rest.is_empty() {
            None
        } else {
            Some(TensorParams { factors: rest })
        }
    }

    pub fn permuted(&self, order: &[usize]) -> TensorParams {
        TensorParams {
            factors: order.iter().map(|&a| self.factors[a]).collect(),
        }
    }
}

/// `(1 + sum mu_i + 2 sum (k_i + eps_i/2)^2)^tau`.
pub fn sobolev_weight(params: &TensorParams, k: &[i64], tau: f64) -> f64 {
    assert_eq!(k.len(), params.dim(), "multi-index length must match the factor count");
    let base: f64 = 1.0
        + params
            .factors()
            .iter()
            .zip(k)
            .map(|(p, &ki)| p.weight_term(ki))
            .sum::<f64>();
    base.powf(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn classify_examples() {
        let p = classify(0.25, 0, None).unwrap();
        assert_eq!(p.series, Series::FirstPrincipal);
        assert_eq!(p.nu, Complex64::new(0.0, 0.0));
        assert_eq!(p.i_nu, 0);

        let p = classify(0.1875, 0, None).unwrap();
        assert_eq!(p.series, Series::Complementary);
        assert!(close(p.nu.re, 0.5, 1e-15));

        let p = classify(-2.0, 0, None).unwrap();
        assert_eq!(p.series, Series::FirstDiscrete(2));
        assert_eq!(p.nu.re, 3.0);
        assert_eq!(p.i_nu, 2);
        assert_eq!(p.index_set, IndexSet::FromN(2));

        assert!(matches!(
            classify(0.1875, 1, None),
            Err(CohomError::InconsistentParameters(_))
        ));
    }

    #[test]
    fn classify_zero_needs_hint() {
        assert!(matches!(
            classify(0.0, 0, None),
            Err(CohomError::AmbiguousSeries { .. })
        ));
        let p = classify(0.0, 0, Some(SeriesHint::FirstDiscrete)).unwrap();
        assert_eq!(p.series, Series::FirstDiscrete(1));
        assert!(classify(0.0, 0, Some(SeriesHint::Complementary)).is_err());
    }

    #[test]
    fn classify_second_series() {
        assert_eq!(classify(1.0, 1, None).unwrap().series, Series::SecondPrincipal);
        assert_eq!(classify(-3.75, 1, None).unwrap().series, Series::SecondDiscrete(2));
        assert!(classify(0.25, 1, None).is_err());
        assert!(classify(-1.0, 0, None).is_err());
        assert!(classify(1.0, 2, None).is_err());
        assert!(classify(1.0, 0, Some(SeriesHint::SecondPrincipal)).is_err());
    }

    #[test]
    fn nu_squared_matches_mu() {
        let all = [
            IrrepParams::principal(0, 0.0),
            IrrepParams::principal(0, 3.5),
            IrrepParams::principal(1, 0.5),
            IrrepParams::complementary(0.7).unwrap(),
            IrrepParams::complementary(-0.3).unwrap(),
            IrrepParams::first_discrete(3),
            IrrepParams::second_discrete(4),
        ];
        for p in all {
            let lhs = p.nu * p.nu;
            assert!((lhs - Complex64::new(1.0 - 4.0 * p.mu, 0.0)).norm() < 1e-12);
            assert_eq!(p.i_nu, ((1.0 + p.nu.re) / 2.0).floor() as i64);
        }
    }

    #[test]
    fn pi_product_examples() {
        let p = classify(0.25, 0, None).unwrap();
        assert!(close(p.pi_product(7).unwrap().abs(), 1.0, 1e-15));
        let c = IrrepParams::complementary(0.5).unwrap();
        assert!(close(c.pi_product(1).unwrap().to_complex().re, 1.0 / 3.0, 1e-14));
        let d = IrrepParams::first_discrete(2);
        assert_eq!(d.pi_product(2).unwrap(), LogComplex::ONE);
        assert!(matches!(
            d.pi_product(1),
            Err(CohomError::IndexBelowStart { k: 1, start: 2 })
        ));
    }

    #[test]
    fn basis_norm_examples() {
        let p = classify(0.25, 0, None).unwrap();
        assert!(close(p.basis_norm_sq(-5).unwrap(), 1.0, 1e-15));
        let c = IrrepParams::complementary(0.5).unwrap();
        assert!(close(c.basis_norm_sq(1).unwrap(), 1.0 / 3.0, 1e-14));
        assert!(close(c.basis_norm_sq(-1).unwrap(), 1.0 / 3.0, 1e-14));
        let d = IrrepParams::second_discrete(2);
        assert_eq!(d.basis_norm_sq(2).unwrap(), 1.0);
        assert!(d.basis_norm_sq(1).is_err());
        let table = c.norm_sq_range(-3, 3);
        for (i, k) in (-3..=3).enumerate() {
            assert!(close(table[i], c.basis_norm_sq(k).unwrap(), 1e-13));
        }
    }

    #[test]
    fn b_coefficient_examples() {
        let d = IrrepParams::first_discrete(2);
        assert_eq!(d.b_minus(2), Complex64::new(0.0, 0.0));
        let p = classify(0.25, 0, None).unwrap();
        assert!((p.beta(1).unwrap() - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let s = IrrepParams::second_discrete(1);
        assert_eq!(s.b_plus(1), Complex64::new(1.5, 0.0));
    }

    #[test]
    fn sobolev_weight_examples() {
        let p = classify(0.25, 0, None).unwrap();
        let t1 = TensorParams::single(p);
        assert!(close(sobolev_weight(&t1, &[0], 1.0), 1.25, 1e-15));
        assert_eq!(sobolev_weight(&t1, &[17], 0.0), 1.0);
        let t2 = TensorParams::new(vec![p, p]).unwrap();
        assert!(close(sobolev_weight(&t2, &[1, -1], 2.0), 30.25, 1e-14));
    }

    #[test]
    fn weight_base_at_least_one() {
        for p in [
            IrrepParams::first_discrete(1),
            IrrepParams::first_discrete(7),
            IrrepParams::second_discrete(1),
            IrrepParams::second_discrete(9),
        ] {
            for k in p.i_nu..p.i_nu + 50 {
                assert!(1.0 + p.weight_term(k) >= 1.0);
            }
        }
    }
}
