use proptest::prelude::*;
use ramond_core::jacobi::*;
use ramond_core::modular::*;
use ramond_core::series::{int, rat, Rational};
use ramond_core::sympoly::{gs_from_scalar, GradedPolynomial, GradedSeries};

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn form(weight: u32) -> impl Strategy<Value = ModularForm> {
    let monos = modular_monomials(weight);
    prop::collection::vec(rational(), monos.len()).prop_map(move |cs| ModularForm::from_terms(weight, monos.clone().into_iter().zip(cs)))
}

/// `xi_0 .. xi_z` for an even form of weight `k`; odd slots vanish.
fn xis(k: u32, z_order: usize) -> impl Strategy<Value = Vec<QuasiModularForm>> {
    let parts: Vec<_> = (0..=z_order)
        .map(|n| if n % 2 == 0 { form(k + n as u32).boxed() } else { Just(ModularForm::zero(k + n as u32)).boxed() })
        .collect();
    parts.prop_map(|fs| fs.into_iter().map(|f| f.to_quasi()).collect())
}

fn lambda() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(int(0)), Just(int(1)), Just(rat(-1, 2)), rational()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn roundtrip(
        (k, xs) in (2u32..=4).prop_flat_map(|h| (Just(2 * h), xis(2 * h, 12))),
        lam in lambda(),
    ) {
        let f = jlf_assemble(&xs, k as i32, &lam, 12).unwrap();
        let back = jlf_decompose(&f).unwrap();
        prop_assert_eq!(&back, &xs);
        let again = jlf_assemble(&back, k as i32, &lam, 12).unwrap();
        prop_assert_eq!(again, f.clone());
        if lam == int(0) {
            prop_assert!(f.coeffs().iter().all(|c| c.is_modular()));
        }
    }

    #[test]
    fn ck_lift_keeps_its_seed(f in (2u32..=7).prop_flat_map(|h| form(2 * h)), lam in lambda()) {
        let lift = ck_lift_form(&f, &lam, 10).unwrap();
        prop_assert_eq!(lift.coeff(0), &f.to_quasi());
        prop_assert!(lift.coeffs().iter().skip(1).step_by(2).all(|c| c.is_zero()));
    }
}

#[test]
fn polynomial_index_roundtrip() {
    let q_order = 30;
    let lambda = GradedPolynomial::base().scale(&rat(-1, 2));
    let xs: Vec<GradedSeries> = (0..=8usize)
        .map(|n| {
            let w = 4 + n as u32;
            if n % 2 == 1 {
                return GradedSeries::zero_with(q_order, &GradedPolynomial::zero());
            }
            let f = eisenstein_modular(w, 0);
            gs_from_scalar(&f.expand(q_order), &GradedPolynomial::p(1 + n / 2).scale(&rat(n as i64 + 1, 3)))
        })
        .collect();
    let f = jlf_assemble(&xs, 4, &lambda, 8).unwrap();
    let checked = JacobiLikeForm::new(4, lambda, Parity::Even, f.coeffs().to_vec()).unwrap();
    assert_eq!(jlf_decompose(&checked).unwrap(), xs);
}

#[test]
fn natural_lift_valuations() {
    for phi in [ModularForm::e4(), ModularForm::e6(), ModularForm::delta()] {
        let lift = natural_lift(&phi, 16).unwrap();
        let k = phi.weight();
        for (l, v) in even_valuations(&lift.form, 12).into_iter().enumerate().skip(1) {
            let s = dim_modular(k + 2 * l as u32);
            assert!(v.is_none_or(|v| v >= s), "weight {k}, z^{}", 2 * l);
        }
        assert!(natural_lift_violation(&lift.form).is_none());
    }
}

#[test]
fn natural_lift_of_e4_at_z8() {
    let lift = natural_lift(&ModularForm::e4(), 8).unwrap();
    let expected = ModularForm::delta().scale(&rat(-240, 24 * 840));
    assert_eq!(lift.corrections[4], expected);
    assert!(lift.corrections[1..4].iter().all(|f| f.is_zero()));
}

#[test]
fn perturbed_corrections_break_vanishing() {
    for phi in [ModularForm::e4(), ModularForm::e6(), ModularForm::delta()] {
        let lift = natural_lift(&phi, 16).unwrap();
        for l in 1..lift.corrections.len() {
            for (b, name) in delta_basis(phi.weight() + 2 * l as u32) {
                let mut cs = lift.corrections.clone();
                cs[l] = cs[l].add(&b);
                let f = lift_from_corrections(&cs, 16).unwrap();
                assert!(natural_lift_violation(&f).is_some(), "adding {name} to f_{}", 2 * l);
            }
        }
    }
}

#[test]
fn natural_lift_of_zero_is_zero() {
    let lift = natural_lift(&ModularForm::zero(4), 8).unwrap();
    assert!(lift.form.is_zero());
}
