use proptest::prelude::*;
use ramond_core::charclass::KernelSeries;
use ramond_core::series::{int, rat, QSeries, Rational, ZSeries};
use ramond_core::sympoly::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Even kernel with constant term 1 known through `z^z_order`.
fn kernel(z_order: usize, q_order: usize) -> impl Strategy<Value = KernelSeries> {
    prop::collection::vec(prop::collection::vec(rational(), q_order + 1), z_order / 2).prop_map(move |evens| {
        let mut c = vec![QSeries::zero(q_order); z_order + 1];
        c[0] = QSeries::one(q_order);
        for (i, e) in evens.into_iter().enumerate() {
            c[2 * i + 2] = QSeries::from_coeffs(e);
        }
        ZSeries::from_coeffs(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multiplicative(f in kernel(6, 2), g in kernel(6, 2)) {
        let ctx = SymmetricContext::new(2, 12);
        let ex = |k: &KernelSeries| collapse_z(&expand_symmetric_product(k, &ctx).unwrap());
        prop_assert_eq!(ex(&f.mul(&g)), gs_mul_capped(&ex(&f), &ex(&g), 12));
    }

    #[test]
    fn specialization_at_rational_roots(f in kernel(8, 0), ys in prop::collection::vec(rational(), 3)) {
        let expanded = expand_symmetric_product(&f, &SymmetricContext::new(3, 16)).unwrap();
        let scalar: Vec<Rational> = f.coeffs().iter().map(|c| c.coeff(0).clone()).collect();
        let mut one = vec![int(0); 9];
        one[0] = int(1);
        let mut direct = ZSeries::from_coeffs(one);
        for y in &ys {
            let scaled: Vec<Rational> =
                scalar.iter().enumerate().map(|(k, c)| c * num_traits::pow(y.clone(), k)).collect();
            direct = direct.mul(&ZSeries::from_coeffs(scaled));
        }
        let sq: Vec<Rational> = ys.iter().map(|y| y * y).collect();
        let values = vec![
            int(0),
            &sq[0] + &sq[1] + &sq[2],
            &sq[0] * &sq[1] + &sq[0] * &sq[2] + &sq[1] * &sq[2],
            &sq[0] * &sq[1] * &sq[2],
        ];
        for k in 0..=8 {
            prop_assert_eq!(&expanded.coeff(k).coeff(0).evaluate(&values), direct.coeff(k));
        }
    }

    #[test]
    fn z_power_matches_degree(f in kernel(8, 1)) {
        let expanded = expand_symmetric_product(&f, &SymmetricContext::new(4, 16)).unwrap();
        for k in 0..=8 {
            for c in expanded.coeff(k).coeffs() {
                prop_assert!(c.is_zero() || c.is_homogeneous_of(2 * k as u32));
            }
        }
    }
}

#[test]
fn newton_roundtrip() {
    for r in 1..=5 {
        let mut e: Vec<GradedPolynomial> = (1..=r).map(GradedPolynomial::p).collect();
        e.resize(6, GradedPolynomial::zero());
        let s = power_sums_from_elementary(&e, 6);
        assert!(s.iter().enumerate().all(|(n, p)| p.is_homogeneous_of(4 * (n as u32 + 1))));
        assert_eq!(elementary_from_power_sums(&s, 6), e, "{r} symbols");
    }
}

#[test]
fn power_sums_of_two_roots() {
    // y1^4 + y2^4 = p1^2 - 2 p2
    let e = vec![GradedPolynomial::p(1), GradedPolynomial::p(2)];
    let s = power_sums_from_elementary(&e, 2);
    let p1 = GradedPolynomial::p(1);
    assert_eq!(s[1], p1.mul(&p1).sub(&GradedPolynomial::p(2).scale(&int(2))));
}

#[test]
fn kernel_must_start_at_one() {
    let f = ZSeries::from_coeffs(vec![QSeries::from_ints(&[2]), QSeries::zero(0), QSeries::zero(0)]);
    assert!(expand_symmetric_product(&f, &SymmetricContext::new(1, 4)).is_err());
}
