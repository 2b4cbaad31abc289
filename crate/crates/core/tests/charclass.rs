use proptest::prelude::*;
use ramond_core::charclass::*;
use ramond_core::modular::eisenstein_series;
use ramond_core::series::{int, rat, QSeries, Rational, ZSeries};
use ramond_core::sympoly::GradedPolynomial;

fn q_to_u(s: &QSeries<Rational>, u_order: usize) -> QSeries<Rational> {
    let mut out = QSeries::zero(u_order);
    for (n, c) in s.coeffs().iter().enumerate().take_while(|(n, _)| 8 * n <= u_order) {
        out.set(8 * n, c.clone());
    }
    out
}

#[test]
fn theta_prime_is_eta_cubed() {
    let u_order = 8 * 20 + 7;
    let t = theta_kernel_u(ThetaKind::Theta1, 1, u_order);
    let mut jacobi = QSeries::zero(u_order);
    for n in 0i64.. {
        let e = ((2 * n + 1) * (2 * n + 1)) as usize;
        if e > u_order {
            break;
        }
        jacobi.set(e, int(if n % 2 == 0 { 2 * n + 1 } else { -(2 * n + 1) }));
    }
    assert_eq!(t.coeff(1), &jacobi);
    assert_eq!(eta_cubed_u(u_order), jacobi);
}

#[test]
fn theta_quotient_is_sigma() {
    let (z_order, q_order) = (12, 10);
    let u_order = 8 * q_order + 8;
    let theta = theta_kernel_u(ThetaKind::Theta1, z_order + 1, u_order);
    let inv = theta.coeff(1).shift_down(1).unwrap().invert().unwrap();
    let ratio = theta.map(|c| c.shift_down(1).unwrap().mul(&inv));
    let mut log = vec![QSeries::zero(u_order - 1); z_order + 2];
    log[2] = q_to_u(&eisenstein_series(2, q_order).scale(&rat(-1, 24)), u_order - 1);
    let lhs = ratio.mul(&ZSeries::from_coeffs(log).exp().unwrap());
    let sigma = sigma_inverse_kernel(z_order, q_order).invert().unwrap();
    assert!(lhs.coeff(0).is_zero());
    for k in 1..=z_order + 1 {
        assert_eq!(u_to_q(lhs.coeff(k)).unwrap().truncate(q_order), sigma.coeff(k - 1).truncate(q_order), "z^{k}");
    }
}

#[test]
fn a_hat_closed_form() {
    let p = GradedPolynomial::p;
    let m = |c: Rational, f: &[usize]| f.iter().fold(GradedPolynomial::constant(c), |a, &i| a.mul(&p(i)));
    let closed = GradedPolynomial::one()
        .add(&m(rat(-1, 24), &[1]))
        .add(&m(int(7), &[1, 1]).add(&m(int(-4), &[2])).scale(&rat(1, 5760)))
        .add(&m(int(-31), &[1, 1, 1]).add(&m(int(44), &[1, 2])).add(&m(int(-16), &[3])).scale(&rat(1, 967680)))
        .add(
            &m(int(381), &[1, 1, 1, 1])
                .add(&m(int(-904), &[1, 1, 2]))
                .add(&m(int(208), &[2, 2]))
                .add(&m(int(512), &[1, 3]))
                .add(&m(int(-192), &[4]))
                .scale(&rat(1, 464486400)),
        );
    for dim in [6, 8, 10] {
        let r = dim / 2;
        let expected = closed.filter(|mono| mono.exponents().iter().skip(r + 1).all(|&e| e == 0));
        assert_eq!(a_hat_class(dim, 16), expected, "m={dim}");
    }
}

#[test]
fn dual_route_agrees() {
    for m in [6, 8] {
        let a = twisted_ch_direct(m, 4, 16, 4);
        let b = twisted_ch_tower(m, 4, 16, 4);
        assert_eq!(a.chern, b.chern, "m={m}");
        assert_eq!(a.a_hat, b.a_hat);
        assert_eq!(a.rank(1), int(m as i64));
    }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn even_kernel() -> impl Strategy<Value = KernelSeries> {
    prop::collection::vec(prop::collection::vec(rational(), 3), 5).prop_map(|evens| {
        let mut c = vec![QSeries::zero(2); 11];
        c[0] = QSeries::one(2);
        for (i, e) in evens.into_iter().enumerate() {
            c[2 * i + 2] = QSeries::from_coeffs(e);
        }
        ZSeries::from_coeffs(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn even_kernels_stay_even(f in even_kernel(), g in even_kernel()) {
        prop_assert!(odd_part_vanishes(&f.mul(&g)));
        prop_assert!(odd_part_vanishes(&f.invert().unwrap()));
    }
}

#[test]
fn built_in_kernels_are_even() {
    assert!(odd_part_vanishes(&sigma_inverse_kernel(12, 4)));
    assert!(odd_part_vanishes(&a_hat_kernel(12)));
    for kind in [ThetaKind::Theta2, ThetaKind::Theta3, ThetaKind::Theta4] {
        assert!(odd_part_vanishes(&theta_kernel_u(kind, 12, 40)), "{kind:?}");
    }
}
