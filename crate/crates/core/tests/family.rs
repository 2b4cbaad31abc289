use ramond_core::family::*;
use ramond_core::modular::{eta_inverse_power, ModularForm};
use ramond_core::series::{int, rat, Rational};

const GROUPED_8_12: &str = "sch_{<=6}(F;q) =
    nu_0 * ( E4 + 1/(4)_1 * E4' * (p1(X)/2) + 1/(2!*(4)_2) * E4'' * (p1(X)/2)^2 + 1/(3!*(4)_3) * E4''' * (p1(X)/2)^3 )
  + ch_2(ind D) * ( E6 + 1/(6)_1 * E6' * (p1(X)/2) + 1/(2!*(6)_2) * E6'' * (p1(X)/2)^2 )
  + ch_4(ind D) * ( E8 + 1/(8)_1 * E8' * (p1(X)/2) )
  + ch_6(ind D) * E10";

const TOP_8_16: &str = "sch_8(F;q) =
    ch_8(ind D) * (E4^3 - 728*Delta)
  + ch_8(ind D^{V_1}) * Delta
  + nu_0/(4!*(4)_4) * (E4^(4) - 240*Delta) * (p1(X)/2)^4
  + ch_2(ind D)/(3!*(6)_3) * (E6''' + 504*Delta) * (p1(X)/2)^3
  + ch_4(ind D)/(2!*(8)_2) * (E8'' - 480*Delta) * (p1(X)/2)^2
  + ch_6(ind D)/(10)_1 * (E10' + 264*Delta) * (p1(X)/2)";

const GROUPED_6_14: &str = "sch_{<=7}(F;q) =
    ch_1(ind D) * ( E4 + 1/(4)_1 * E4' * (p1(X)/2) + 1/(2!*(4)_2) * E4'' * (p1(X)/2)^2 + 1/(3!*(4)_3) * E4''' * (p1(X)/2)^3 )
  + ch_3(ind D) * ( E6 + 1/(6)_1 * E6' * (p1(X)/2) + 1/(2!*(6)_2) * E6'' * (p1(X)/2)^2 )
  + ch_5(ind D) * ( E8 + 1/(8)_1 * E8' * (p1(X)/2) )
  + ch_7(ind D) * E10";

#[test]
fn main_theorem_dim8_degree12() {
    let r = verify_main_theorem(8, 12, 8).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert_eq!(r.display[0], GROUPED_8_12);
}

#[test]
fn main_theorem_dim8_degree16() {
    let r = verify_main_theorem(8, 16, 8).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert_eq!(r.display[1], TOP_8_16);
}

#[test]
fn main_theorem_dim6_degree14() {
    let r = verify_main_theorem(6, 14, 8).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert_eq!(r.display[0], GROUPED_6_14);
    assert!(r.display[1].starts_with("sch_7(F;q) =\n    ch_7(ind D) * E10\n"));
}

#[test]
fn main_theorem_report_json() {
    let r = verify_main_theorem(4, 8, 4).unwrap();
    assert!(r.passed());
    let j = r.to_json();
    assert_eq!(j["status"], "pass");
    assert!(j["first_mismatch"].is_null());
    assert_eq!(j["checks"].as_array().unwrap().len(), r.checks.len());
}

#[test]
fn odd_weight_classes_vanish() {
    // m = 8: degrees 2 mod 4 carry no classes; m = 6: degrees 0 mod 4.
    let s = sch_series(8, 12, 3);
    for d in [2, 6, 10] {
        assert!(s.homogeneous(d).is_zero(), "degree {d}");
    }
    let s = sch_series(6, 12, 3);
    for d in [0, 4, 8, 12] {
        assert!(s.homogeneous(d).is_zero(), "degree {d}");
    }
}

#[test]
fn p1_relation_matches_series_shortcut() {
    // Degree 4 of Sch for m = 8: nu_0 (P/2) D(E4)/4 + ch_2(V_0) E6, times prod^{-8}.
    let n_max = 3;
    let eta = eta_inverse_power(8, n_max);
    let de4 = ModularForm::e4().derive().expand(n_max).mul(&eta);
    let e6 = ModularForm::e6().expand(n_max).mul(&eta);
    let tower = IndexTower::new(8, 4, n_max);
    for n in 1..=n_max {
        let rel = class_relation(&tower, n, 2).unwrap();
        let coeff = |l: u32, j: u32| {
            rel.iter().find(|(g, _)| g.base_power == l && g.j == j).map(|(_, c)| c.clone()).unwrap()
        };
        assert_eq!(coeff(0, 2), e6.coeff(n).clone());
        assert_eq!(coeff(1, 0), de4.coeff(n) * rat(1, 8));
    }
    assert_eq!(de4.coeff(1) * rat(1, 8), int(30));
    assert_eq!(de4.coeff(2) * rat(1, 8), int(780));
}

#[test]
fn weight_twelve_relation_at_base_zero() {
    let tower = IndexTower::new(8, 16, 2);
    let rel = class_relation(&tower, 2, 8).unwrap();
    let at = |i: usize| rel.iter().find(|(g, _)| g.base_power == 0 && g.i == i).map(|(_, c)| c.clone()).unwrap();
    assert_eq!(at(0), int(196732));
    assert_eq!(at(1), int(-16));
}

#[test]
fn anomaly_dim20_lives_in_degree_four() {
    let a = anomaly_relations(20, 2).unwrap();
    assert_eq!(a.j, 2);
    assert_eq!(a.weight, 12);
    assert!(a.verified);
    assert_eq!(a.relations[0], (2, vec![int(196870), int(-4)]));
}

#[test]
fn c_table_agrees_with_classes() {
    let tower = IndexTower::new(8, 4, 3);
    for j in [0, 2] {
        assert!(verify_c_table(8, j, 3, &tower).unwrap().passed);
    }
    let c: Vec<Rational> = c_table(8, 0, 1).unwrap();
    assert_eq!(c[1], int(248));
}

#[test]
fn degree_eight_relations_match_series_shortcut() {
    // Degree 8: nu_0 (P/2)^2 D^2E4/(2!(4)_2) + ch_2 (P/2) DE6/6 + ch_4 E8, times prod^{-8}.
    let n_max = 3;
    let eta = eta_inverse_power(8, n_max);
    let d2e4 = ModularForm::e4().to_quasi().derive_n(2).expand(n_max).mul(&eta);
    let de6 = ModularForm::e6().derive().expand(n_max).mul(&eta);
    let e8 = ramond_core::modular::eisenstein_series(8, n_max).mul(&eta);
    let tower = IndexTower::new(8, 8, n_max);
    for n in 1..=n_max {
        let rel = class_relation(&tower, n, 4).unwrap();
        let coeff = |l: u32, j: u32| {
            rel.iter().find(|(g, _)| g.base_power == l && g.j == j).map(|(_, c)| c.clone()).unwrap()
        };
        assert_eq!(coeff(0, 4), e8.coeff(n).clone());
        assert_eq!(coeff(1, 2), de6.coeff(n) * rat(1, 12));
        assert_eq!(coeff(2, 0), d2e4.coeff(n) * rat(1, 160));
    }
    let rel = class_relation(&tower, 1, 4).unwrap();
    assert_eq!(
        render_relation(1, 4, &rel),
        "ch_4(ind D^{V_1}) = 488*ch_4(ind D) - 42*ch_2(ind D)*p1(X) + 3/2*nu_0*p1(X)^2"
    );
}

mod properties {
    use proptest::prelude::*;
    use ramond_core::family::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn wrong_parity_components_vanish(half in 1usize..=6, cap in 1u32..=6) {
            prop_assert!(sch_series(2 * half, 2 * cap, 3).parity_holds());
        }

        #[test]
        fn theorem_holds_at_small_truncations(m in prop::sample::select(vec![2usize, 4, 6, 8]), half_cap in 0u32..=5) {
            let r = verify_main_theorem(m, 2 * half_cap, 3).unwrap();
            prop_assert!(r.passed(), "{:?} {:?}", r.first_mismatch, r.checks);
        }
    }
}

#[test]
fn untwisted_index_at_q0() {
    let r = verify_main_theorem(8, 8, 4).unwrap();
    let c = r.checks.iter().find(|c| c.name == "untwisted_index").unwrap();
    assert!(c.passed, "{}", c.detail);
}
