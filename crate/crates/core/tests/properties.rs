// Property tests over randomly drawn representations and tensors.

use cohom_core::distributions::{basis_of_distributions, d_value};
use cohom_core::forms::{exterior_derivative, index_sets, DifferentialForm};
use cohom_core::random::{decaying_tensor, draw_factor, interior_tensor};
use cohom_core::{CoeffTensor, IrrepParams, TensorParams, Window};
use proptest::prelude::*;

fn params_from(families: &[usize], seed: u64) -> TensorParams {
    let factors: Vec<IrrepParams> = families
        .iter()
        .enumerate()
        .map(|(i, &f)| draw_factor(f, i as u64, seed))
        .collect();
    TensorParams::new(factors).unwrap()
}

fn families(max_d: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..5, 1..=max_d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn x_is_skew_adjoint(fams in families(3), seed in any::<u64>(), axis_pick in 0usize..3) {
        let params = params_from(&fams, seed);
        let axis = axis_pick % params.dim();
        let w = Window::symmetric(&params, 6);
        let f = interior_tensor(&params, &w, seed, 1);
        let g = interior_tensor(&params, &w, seed, 2);
        let xf = f.apply_x(axis).unwrap();
        let xg = g.apply_x(axis).unwrap();
        let lhs = xf.inner0(&g);
        let rhs = -f.inner0(&xg);
        let scale = xf.norm0() * g.norm0() + f.norm0() * xg.norm0();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn sobolev_norm_is_monotone_in_tau(fams in families(3), seed in any::<u64>(), a in -2.0f64..3.0, b in -2.0f64..3.0) {
        let params = params_from(&fams, seed);
        let w = Window::symmetric(&params, 5);
        let f = decaying_tensor(&params, &w, &w, seed, 0, 3.0);
        let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(f.sobolev_norm(t1) <= f.sobolev_norm(t2) * (1.0 + 1e-14));
    }

    #[test]
    fn staged_projection_is_exact(fams in prop::collection::vec(0usize..5, 3..=3), seed in any::<u64>(), i in 0i64..7, j in 0i64..7) {
        let params = params_from(&fams, seed);
        let w = Window::symmetric(&params, 3);
        let f = decaying_tensor(&params, &w, &w, seed, 0, 3.0);
        let k2 = w.axis(1).0 + i;
        let k3 = w.axis(2).0 + j;
        let staged = f.project(&[(1, k2)]).unwrap().project(&[(1, k3)]).unwrap();
        let direct = f.project(&[(1, k2), (2, k3)]).unwrap();
        prop_assert_eq!(staged, direct);
    }

    #[test]
    fn mixed_norm_inequality(fams in prop::collection::vec(0usize..5, 2..=3), seed in any::<u64>(), tau in 0.0f64..2.0, sigma in 0.0f64..2.0) {
        let params = params_from(&fams, seed);
        let w = Window::symmetric(&params, 4);
        let f = decaying_tensor(&params, &w, &w, seed, 0, 3.0);
        let p = params.factor(0);
        let (lo, hi) = w.axis(0);
        let lhs: f64 = (lo..=hi)
            .map(|k| (1.0 + p.weight_term(k)).powf(tau) * f.project(&[(0, k)]).unwrap().sobolev_norm(sigma).powi(2))
            .sum();
        let rhs = f.sobolev_norm(tau + sigma).powi(2);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} > {rhs}");
    }

    #[test]
    fn tensor_json_round_trip(fams in families(3), seed in any::<u64>()) {
        let params = params_from(&fams, seed);
        let w = Window::symmetric(&params, 3);
        let f = decaying_tensor(&params, &w, &w, seed, 0, 3.0);
        let s = f.to_json();
        let back = CoeffTensor::from_json(&s).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_json(), s);
    }

    #[test]
    fn form_json_round_trip(fams in prop::collection::vec(0usize..5, 1..=3), seed in any::<u64>(), deg in 0usize..4) {
        let params = params_from(&fams, seed);
        let n = deg % (params.dim() + 1);
        let w = Window::symmetric(&params, 2);
        let comps = index_sets(params.dim(), n)
            .into_iter()
            .enumerate()
            .map(|(i, idx)| (idx, interior_tensor(&params, &w, seed, i as u64)));
        let om = DifferentialForm::from_components(params.clone(), n, w.clone(), comps).unwrap();
        let s = om.to_json();
        let back = DifferentialForm::from_json(&s).unwrap();
        prop_assert_eq!(&back, &om);
        prop_assert_eq!(back.to_json(), s);
    }

    #[test]
    fn d_squared_is_zero(fams in prop::collection::vec(0usize..5, 2..=4), seed in any::<u64>(), deg in 0usize..3) {
        let params = params_from(&fams, seed);
        let n = deg % (params.dim() - 1);
        let w = Window::symmetric(&params, 3);
        let comps = index_sets(params.dim(), n)
            .into_iter()
            .enumerate()
            .map(|(i, idx)| (idx, interior_tensor(&params, &w, seed, i as u64)));
        let om = DifferentialForm::from_components(params.clone(), n, w.clone(), comps).unwrap();
        let dd = exterior_derivative(&exterior_derivative(&om).unwrap()).unwrap();
        prop_assert!(dd.norm0() <= 1e-12 * om.norm0());
    }

    #[test]
    fn invariant_distributions_kill_coboundaries(fams in families(3), seed in any::<u64>(), axis_pick in 0usize..3) {
        let params = params_from(&fams, seed);
        let axis = axis_pick % params.dim();
        let w = Window::symmetric(&params, 12);
        let h = interior_tensor(&params, &w, seed, 5);
        let xh = h.apply_x(axis).unwrap();
        for dist in basis_of_distributions(&params) {
            prop_assert!(dist.eval(&xh).norm() <= 1e-10 * h.norm0());
        }
    }

    #[test]
    fn d_recurrence(family in 0usize..5, seed in any::<u64>(), sigma in 0u8..2) {
        let p = draw_factor(family, 0, seed);
        let sigma = if p.is_discrete() { 0 } else { sigma };
        let lo = if p.is_discrete() { p.i_nu + 1 } else { -64 };
        for k in lo..64 {
            let prev = d_value(&p, sigma, k - 1).unwrap().to_complex();
            let next = d_value(&p, sigma, k + 1).unwrap().to_complex();
            if prev.norm() > 0.0 {
                let beta = p.beta(k).unwrap();
                prop_assert!((next / prev - beta).norm() <= 1e-12 * (1.0 + beta.norm()), "k={k}");
            }
        }
    }
}
