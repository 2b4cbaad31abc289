//! The verification suite: every acceptance claim as a named, self-checking
//! computation. Claims run in parallel; reports are ordered by claim id.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charclass::{
    a_hat_class, a_hat_kernel, eta_cubed_u, odd_part_vanishes, sigma_inverse_kernel, theta_kernel_u,
    twisted_ch_direct, twisted_ch_tower, u_to_q, KernelSeries, ThetaKind,
};
use crate::e8;
use crate::family::{self, IndexTower};
use crate::jacobi::{
    ck_lift, ck_lift_form, jlf_assemble, jlf_decompose, lift_from_corrections, natural_lift, natural_lift_violation,
    JacobiLikeForm, Parity,
};
use crate::modular::{
    delta, dim_formula, dim_modular, eisenstein_series, eta_inverse_power, modular_monomials, modular_reduce,
    phi_basis, qm_reduce, ModularForm, QuasiModularForm,
};
use crate::series::{int, rat, QSeries, Rational, ZSeries};
use crate::sympoly::{
    collapse_z, elementary_from_power_sums, expand_symmetric_product, gs_from_scalar, gs_mul_capped,
    power_sums_from_elementary, GradedPolynomial, GradedSeries, SymmetricContext,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteName {
    All,
    Modforms,
    Jlf,
    Family,
    E8,
}

impl FromStr for SuiteName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(SuiteName::All),
            "modforms" => Ok(SuiteName::Modforms),
            "jlf" => Ok(SuiteName::Jlf),
            "family" => Ok(SuiteName::Family),
            "e8" => Ok(SuiteName::E8),
            _ => Err(format!("unknown suite {s}; expected all, modforms, jlf, family or e8")),
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SuiteName::All => "all",
            SuiteName::Modforms => "modforms",
            SuiteName::Jlf => "jlf",
            SuiteName::Family => "family",
            SuiteName::E8 => "e8",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Seed for the randomized property claims.
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0x5eed }
    }
}

type Outcome = Result<String, String>;

pub struct Claim {
    pub id: &'static str,
    pub suite: SuiteName,
    /// Acceptance criterion number (1-10).
    pub criterion: u8,
    run: fn(&SuiteConfig) -> Outcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimResult {
    pub id: String,
    pub suite: SuiteName,
    pub criterion: u8,
    pub passed: bool,
    /// The claim panicked instead of returning a verdict.
    pub internal_error: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: SuiteName,
    pub seed: u64,
    pub results: Vec<ClaimResult>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn internal_error(&self) -> bool {
        self.results.iter().any(|r| r.internal_error)
    }

    pub fn render(&self) -> String {
        let mut lines: Vec<String> = self
            .results
            .iter()
            .map(|r| {
                format!(
                    "[{}] {:<40} ({:.2}s) {}",
                    if r.passed { "pass" } else { "FAIL" },
                    r.id,
                    r.seconds,
                    r.detail
                )
            })
            .collect();
        let failed = self.results.iter().filter(|r| !r.passed).count();
        lines.push(format!(
            "{} claims, {} failed, {:.2}s",
            self.results.len(),
            failed,
            self.seconds
        ));
        lines.join("\n")
    }

    /// JSON with all timings collected under `timing`, the only
    /// nondeterministic field.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "suite": self.suite.to_string(),
            "seed": self.seed,
            "status": if self.passed() { "pass" } else { "fail" },
            "claims": self.results.iter().map(|r| serde_json::json!({
                "id": r.id,
                "suite": r.suite.to_string(),
                "criterion": r.criterion,
                "status": if r.passed { "pass" } else { "fail" },
                "detail": r.detail,
            })).collect::<Vec<_>>(),
            "timing": {
                "total_seconds": self.seconds,
                "claims": self.results.iter().map(|r| serde_json::json!({"id": r.id, "seconds": r.seconds})).collect::<Vec<_>>(),
            },
        })
    }
}

macro_rules! claim {
    ($id:literal, $suite:ident, $crit:literal, $f:ident) => {
        Claim { id: $id, suite: SuiteName::$suite, criterion: $crit, run: $f }
    };
}

pub fn claims() -> Vec<Claim> {
    let mut v = vec![
        claim!("modforms.eisenstein_expansions", Modforms, 1, eisenstein_expansions),
        claim!("modforms.eta_normalized_forms", Modforms, 2, eta_normalized_forms),
        claim!("modforms.c_table_dim6", Modforms, 3, c_table_dim6),
        claim!("family.c_table_dim8", Family, 3, c_table_dim8),
        claim!("family.p1_relations", Family, 3, p1_relations),
        claim!("family.anomaly_constants", Family, 4, anomaly_constants),
        claim!("jlf.ck_lift_e4", Jlf, 5, ck_lift_e4),
        claim!("jlf.natural_lift_e4", Jlf, 5, natural_lift_e4),
        claim!("family.main_theorem_dim8", Family, 6, main_theorem_dim8),
        claim!("family.main_theorem_dim6", Family, 6, main_theorem_dim6),
        claim!("family.main_theorem_displays", Family, 6, main_theorem_displays),
        claim!("family.main_theorem_dim8_top", Family, 6, main_theorem_dim8_top),
        claim!("modforms.eta_cubed_theta_prime", Modforms, 7, eta_cubed_theta_prime),
        claim!("modforms.sigma_theta_identity", Modforms, 7, sigma_theta_identity),
        claim!("family.a_hat_closed_form", Family, 8, a_hat_closed_form),
        claim!("family.ch_v1_appendix", Family, 8, ch_v1_appendix),
        claim!("family.dual_route", Family, 8, dual_route),
        claim!("e8.theta_nullwert", E8, 9, e8_theta_nullwert),
        claim!("e8.character_dims", E8, 9, e8_character_dims),
        claim!("e8.h_coefficients", E8, 9, e8_h_coefficients),
        claim!("e8.theorem", E8, 9, e8_theorem),
        claim!("e8.negative_control", E8, 9, e8_negative_control),
        claim!("modforms.prop_series_ring", Modforms, 10, prop_series_ring),
        claim!("modforms.prop_dimension_formula", Modforms, 10, prop_dimension_formula),
        claim!("modforms.prop_phi_basis_triangular", Modforms, 10, prop_phi_basis_triangular),
        claim!("modforms.prop_derivative_closure", Modforms, 10, prop_derivative_closure),
        claim!("modforms.prop_weight_additivity", Modforms, 10, prop_weight_additivity),
        claim!("modforms.prop_integrality", Modforms, 10, prop_integrality),
        claim!("modforms.prop_newton_roundtrip", Modforms, 10, prop_newton_roundtrip),
        claim!("modforms.prop_symmetric_product", Modforms, 10, prop_symmetric_product),
        claim!("jlf.prop_roundtrip", Jlf, 10, prop_jlf_roundtrip),
        claim!("jlf.prop_natural_uniqueness", Jlf, 10, prop_natural_uniqueness),
        claim!("family.prop_parity_vanishing", Family, 10, prop_parity_vanishing),
        claim!("family.prop_weight_twelve", Family, 10, prop_weight_twelve),
    ];
    v.sort_by_key(|c| c.id);
    v
}

fn run_selected(suite: SuiteName, selected: Vec<Claim>, config: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    let mut results: Vec<ClaimResult> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|c| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = catch_unwind(AssertUnwindSafe(|| (c.run)(config)));
                    let seconds = t.elapsed().as_secs_f64();
                    let (passed, internal_error, detail) = match out {
                        Ok(Ok(d)) => (true, false, d),
                        Ok(Err(d)) => (false, false, d),
                        Err(p) => {
                            let msg = p
                                .downcast_ref::<String>()
                                .cloned()
                                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                                .unwrap_or_else(|| "panic".to_string());
                            (false, true, format!("internal error: {msg}"))
                        }
                    };
                    ClaimResult { id: c.id.to_string(), suite: c.suite, criterion: c.criterion, passed, internal_error, detail, seconds }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("claim thread")).collect()
    });
    results.sort_by(|a, b| a.id.cmp(&b.id));
    SuiteReport { suite, seed: config.seed, results, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_suite(suite: SuiteName, config: &SuiteConfig) -> SuiteReport {
    let selected = claims().into_iter().filter(|c| suite == SuiteName::All || c.suite == suite).collect();
    run_selected(suite, selected, config)
}

/// All claims belonging to one acceptance criterion.
pub fn run_criterion(criterion: u8, config: &SuiteConfig) -> SuiteReport {
    let selected = claims().into_iter().filter(|c| c.criterion == criterion).collect();
    run_selected(SuiteName::All, selected, config)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ints(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| int(v)).collect()
}

fn head(s: &QSeries<Rational>, from: usize, to: usize) -> Vec<Rational> {
    (from..=to).map(|n| s.coeff(n).clone()).collect()
}

fn show(v: &[Rational]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

fn seeded(config: &SuiteConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

fn random_series(rng: &mut ChaCha8Rng, order: usize) -> QSeries<Rational> {
    QSeries::from_coeffs((0..=order).map(|_| random_rational(rng)).collect())
}

fn random_modular(rng: &mut ChaCha8Rng, weight: u32) -> ModularForm {
    let monos = modular_monomials(weight);
    ModularForm::from_terms(weight, monos.into_iter().map(|m| (m, random_rational(rng))))
}

// criterion 1

fn eisenstein_expansions(_: &SuiteConfig) -> Outcome {
    let cases = [
        ("E2", eisenstein_series(2, 3), [-24, -72, -96]),
        ("E4", eisenstein_series(4, 3), [240, 2160, 6720]),
        ("E6", eisenstein_series(6, 3), [-504, -16632, -122976]),
    ];
    for (name, s, expected) in cases {
        ensure(*s.coeff(0) == int(1) && head(&s, 1, 3) == ints(&expected), || {
            format!("{name}: got {}", show(&head(&s, 0, 3)))
        })?;
    }
    let d = delta(3).expand(3);
    ensure(head(&d, 0, 3) == ints(&[0, 1, -24, 252]), || format!("Delta: got {}", show(&head(&d, 0, 3))))?;
    Ok("E2, E4, E6 and Delta match through q^3".into())
}

// criterion 2

fn eta_normalized_forms(_: &SuiteConfig) -> Outcome {
    let eta = eta_inverse_power(8, 2);
    let e4 = ModularForm::e4();
    let cases = [
        ("E4", e4.clone(), [1, 248, 4124]),
        ("E6", ModularForm::e6(), [1, -496, -20620]),
        ("E4^3 - 728*Delta", e4.pow(3).sub(&ModularForm::delta().scale(&int(728))), [1, 0, 196732]),
        ("Delta", ModularForm::delta(), [0, 1, -16]),
    ];
    for (name, f, expected) in cases {
        let s = f.expand(2).mul(&eta);
        ensure(head(&s, 0, 2) == ints(&expected), || format!("{name}: got {}", show(&head(&s, 0, 2))))?;
    }
    Ok("four normalized expansions match through q^2".into())
}

// criterion 3

fn c_table_dim6(_: &SuiteConfig) -> Outcome {
    let c = family::c_table(6, 1, 1).map_err(|e| e.to_string())?;
    ensure(c == ints(&[1, 246]), || format!("c_table(6,1,1) = {}", show(&c)))?;
    let tower = IndexTower::new(6, 2, 1);
    let check = family::verify_c_table(6, 1, 1, &tower).map_err(|e| e.to_string())?;
    ensure(check.passed, || check.detail.clone())?;
    Ok("ch_1(V_1) = 246 ch_1(V_0) for 6-dimensional fibers".into())
}

fn c_table_dim8(_: &SuiteConfig) -> Outcome {
    let tower = IndexTower::new(8, 8, 4);
    for (j, expected) in [(0, vec![1, 248, 4124]), (2, vec![1, -496, -20620])] {
        let c = family::c_table(8, j, 2).map_err(|e| e.to_string())?;
        ensure(c == ints(&expected), || format!("c_table(8,{j},2) = {}", show(&c)))?;
        let check = family::verify_c_table(8, j, 4, &tower).map_err(|e| e.to_string())?;
        ensure(check.passed, || check.detail.clone())?;
    }
    Ok("proportionality at P = 0 for j = 0, 2 and n <= 4 from the index symbols".into())
}

fn p1_relations(_: &SuiteConfig) -> Outcome {
    let tower = IndexTower::new(8, 8, 4);
    // (n, j, [(l, j', coefficient)])
    let expected = [
        (1, 2, vec![(0, 2, int(-496)), (1, 0, int(30))]),
        (2, 2, vec![(0, 2, int(-20620)), (1, 0, int(780))]),
        (1, 4, vec![(0, 4, int(488)), (1, 2, int(-42)), (2, 0, rat(3, 2))]),
        (2, 4, vec![(0, 4, int(65804)), (1, 2, int(-3108)), (2, 0, int(66))]),
    ];
    let mut shown = Vec::new();
    for (n, j, coeffs) in expected {
        let rel = family::class_relation(&tower, n, j).ok_or_else(|| format!("no relation for ch_{j}(V_{n})"))?;
        for (l, jj, c) in coeffs {
            let got = rel
                .iter()
                .find(|(g, _)| g.base_power == l && g.j == jj && g.i == 0)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Rational::zero);
            ensure(got == c, || format!("ch_{j}(V_{n}): coefficient of p1^{l} ch_{jj} is {got}, expected {c}"))?;
        }
        shown.push(family::render_relation(n, j, &rel));
    }
    Ok(shown.join("; "))
}

// criterion 4

fn anomaly_constants(_: &SuiteConfig) -> Outcome {
    let a6 = family::anomaly_relations(6, 2).map_err(|e| e.to_string())?;
    ensure(a6.verified && a6.relations[0] == (1, ints(&[246])), || format!("m=6: {:?}", a6.render()))?;
    let a10 = family::anomaly_relations(10, 1).map_err(|e| e.to_string())?;
    ensure(a10.verified && a10.relations[0] == (1, ints(&[-494])), || format!("m=10: {:?}", a10.render()))?;
    let a20 = family::anomaly_relations(20, 2).map_err(|e| e.to_string())?;
    ensure(a20.verified && a20.relations[0] == (2, ints(&[196870, -4])), || format!("m=20: {:?}", a20.render()))?;
    Ok(format!("{}; {}", a6.render()[0], a20.render()[0]))
}

// criterion 5

fn ck_lift_e4(_: &SuiteConfig) -> Outcome {
    let f = ck_lift_form(&ModularForm::e4(), &Rational::one(), 6).map_err(|e| e.to_string())?;
    let e2 = QuasiModularForm::e2();
    let e4 = ModularForm::e4().to_quasi();
    let e6 = ModularForm::e6().to_quasi();
    let z2 = e4.mul(&e2).sub(&e6).scale(&rat(1, 12));
    let z4 = e4.mul(&e4).sub(&e6.mul(&e2).scale(&int(2))).add(&e4.mul(&e2).mul(&e2)).scale(&rat(1, 288));
    ensure(*f.coeff(0) == e4, || "z^0 is not E4".into())?;
    ensure(*f.coeff(2) == z2, || format!("z^2: {}", f.coeff(2)))?;
    ensure(*f.coeff(4) == z4, || format!("z^4: {}", f.coeff(4)))?;
    ensure(*f.coeff(6) == e4.derive_n(3).scale(&rat(1, 6 * 120)), || format!("z^6: {}", f.coeff(6)))?;
    Ok(format!("z^2: {}; z^4: {}", z2, z4))
}

fn natural_lift_e4(_: &SuiteConfig) -> Outcome {
    let lift = natural_lift(&ModularForm::e4(), 16).map_err(|e| e.to_string())?;
    let expected = ModularForm::delta().scale(&rat(-240, 24 * 4 * 5 * 6 * 7));
    ensure(lift.corrections[4] == expected, || format!("f_8 = {}", lift.corrections[4]))?;
    for phi in [ModularForm::e4(), ModularForm::e6(), ModularForm::delta()] {
        let lift = natural_lift(&phi, 16).map_err(|e| e.to_string())?;
        let k = phi.weight();
        for l in 1..=8u32 {
            let s = dim_modular(k + 2 * l);
            let v = lift.form.coeff(2 * l as usize).expand(s + 2).valuation();
            ensure(v.is_none_or(|v| v >= s), || format!("weight {k}: z^{} valuation {v:?} < {s}", 2 * l))?;
        }
    }
    Ok("f_8 = -240/(4!*(4)_4)*Delta; valuations hold for E4, E6, Delta through z^16".into())
}

// criterion 6

pub const DISPLAY_DIM8_DEGREE12: &str = "sch_{<=6}(F;q) =
    nu_0 * ( E4 + 1/(4)_1 * E4' * (p1(X)/2) + 1/(2!*(4)_2) * E4'' * (p1(X)/2)^2 + 1/(3!*(4)_3) * E4''' * (p1(X)/2)^3 )
  + ch_2(ind D) * ( E6 + 1/(6)_1 * E6' * (p1(X)/2) + 1/(2!*(6)_2) * E6'' * (p1(X)/2)^2 )
  + ch_4(ind D) * ( E8 + 1/(8)_1 * E8' * (p1(X)/2) )
  + ch_6(ind D) * E10";

pub const DISPLAY_DIM8_DEGREE16: &str = "sch_8(F;q) =
    ch_8(ind D) * (E4^3 - 728*Delta)
  + ch_8(ind D^{V_1}) * Delta
  + nu_0/(4!*(4)_4) * (E4^(4) - 240*Delta) * (p1(X)/2)^4
  + ch_2(ind D)/(3!*(6)_3) * (E6''' + 504*Delta) * (p1(X)/2)^3
  + ch_4(ind D)/(2!*(8)_2) * (E8'' - 480*Delta) * (p1(X)/2)^2
  + ch_6(ind D)/(10)_1 * (E10' + 264*Delta) * (p1(X)/2)";

pub const DISPLAY_DIM6_DEGREE14: &str = "sch_{<=7}(F;q) =
    ch_1(ind D) * ( E4 + 1/(4)_1 * E4' * (p1(X)/2) + 1/(2!*(4)_2) * E4'' * (p1(X)/2)^2 + 1/(3!*(4)_3) * E4''' * (p1(X)/2)^3 )
  + ch_3(ind D) * ( E6 + 1/(6)_1 * E6' * (p1(X)/2) + 1/(2!*(6)_2) * E6'' * (p1(X)/2)^2 )
  + ch_5(ind D) * ( E8 + 1/(8)_1 * E8' * (p1(X)/2) )
  + ch_7(ind D) * E10";

fn theorem_outcome(m: usize, cap: u32, q_order: usize) -> Outcome {
    let r = family::verify_main_theorem(m, cap, q_order).map_err(|e| e.to_string())?;
    if let Some(mm) = &r.first_mismatch {
        return Err(format!("{}: first mismatch {mm}", r.claim));
    }
    if let Some(c) = r.checks.iter().find(|c| !c.passed) {
        return Err(format!("{}: {} failed: {}", r.claim, c.name, c.detail));
    }
    Ok(format!("{} exact; {} sub-checks pass", r.claim, r.checks.len()))
}

fn main_theorem_dim8(_: &SuiteConfig) -> Outcome {
    theorem_outcome(8, 20, 8)
}

fn main_theorem_dim6(_: &SuiteConfig) -> Outcome {
    theorem_outcome(6, 14, 8)
}

fn main_theorem_dim8_top(_: &SuiteConfig) -> Outcome {
    theorem_outcome(8, 16, 6)
}

fn main_theorem_displays(_: &SuiteConfig) -> Outcome {
    let cases = [(8, 12, 0, DISPLAY_DIM8_DEGREE12), (8, 16, 1, DISPLAY_DIM8_DEGREE16), (6, 14, 0, DISPLAY_DIM6_DEGREE14)];
    for (m, cap, idx, expected) in cases {
        let r = family::verify_main_theorem(m, cap, 8).map_err(|e| e.to_string())?;
        let got = r.display.get(idx).cloned().unwrap_or_default();
        ensure(got == expected, || format!("display for m={m}, degree<={cap} differs:\n{got}"))?;
    }
    Ok("three displays reproduced byte for byte".into())
}

// criterion 7

fn eta_cubed_theta_prime(_: &SuiteConfig) -> Outcome {
    let u_order = 8 * 20 + 7;
    let t = theta_kernel_u(ThetaKind::Theta1, 1, u_order);
    let eta3 = eta_cubed_u(u_order);
    ensure(*t.coeff(1) == eta3, || "theta'(0) differs from eta^3".into())?;
    let mut jacobi = QSeries::zero(u_order);
    let mut n = 0i64;
    while ((2 * n + 1) * (2 * n + 1)) as usize <= u_order {
        let c = if n % 2 == 0 { 2 * n + 1 } else { -(2 * n + 1) };
        jacobi.set(((2 * n + 1) * (2 * n + 1)) as usize, int(c));
        n += 1;
    }
    ensure(eta3 == jacobi, || "eta^3 differs from the Jacobi triple-product sum".into())?;
    Ok("theta'(0) = eta^3 = sum (-1)^n (2n+1) q^{(2n+1)^2/8} through q^20".into())
}

fn q_to_u(s: &QSeries<Rational>, u_order: usize) -> QSeries<Rational> {
    let mut out = QSeries::zero(u_order);
    for (n, c) in s.coeffs().iter().enumerate() {
        if 8 * n <= u_order {
            out.set(8 * n, c.clone());
        }
    }
    out
}

fn sigma_theta_identity(_: &SuiteConfig) -> Outcome {
    let (z_order, q_order) = (12, 10);
    let u_order = 8 * q_order + 8;
    let theta = theta_kernel_u(ThetaKind::Theta1, z_order + 1, u_order);
    let prime = theta.coeff(1).shift_down(1).map_err(|e| e.to_string())?;
    let inv = prime.invert().map_err(|e| e.to_string())?;
    let ratio: KernelSeries =
        theta.map(|c| c.shift_down(1).expect("theta has a factor u").mul(&inv));
    let g2 = q_to_u(&eisenstein_series(2, q_order).scale(&rat(-1, 24)), u_order - 1);
    let mut log = vec![QSeries::zero(u_order - 1); z_order + 2];
    log[2] = g2;
    let gauss = ZSeries::from_coeffs(log).exp().map_err(|e| e.to_string())?;
    let lhs = ratio.mul(&gauss);
    let sigma = sigma_inverse_kernel(z_order, q_order).invert().map_err(|e| e.to_string())?;
    for k in 0..=z_order + 1 {
        let l = u_to_q(lhs.coeff(k)).map_err(|e| format!("z^{k}: {e}"))?.truncate(q_order);
        let r = if k == 0 { QSeries::zero(q_order) } else { sigma.coeff(k - 1).truncate(q_order) };
        ensure(l == r, || format!("z^{k} coefficient differs"))?;
    }
    Ok("theta(z)/theta'(0) e^{G2 z^2} = z/sigma-kernel through z^13, q^10".into())
}

// criterion 8

fn a_hat_closed_form(_: &SuiteConfig) -> Outcome {
    let p = GradedPolynomial::p;
    let mono = |c: Rational, factors: &[usize]| factors.iter().fold(GradedPolynomial::constant(c), |acc, &i| acc.mul(&p(i)));
    let closed = GradedPolynomial::one()
        .add(&mono(rat(-1, 24), &[1]))
        .add(&mono(int(7), &[1, 1]).add(&mono(int(-4), &[2])).scale(&rat(1, 5760)))
        .add(&mono(int(-31), &[1, 1, 1]).add(&mono(int(44), &[1, 2])).add(&mono(int(-16), &[3])).scale(&rat(1, 967680)))
        .add(
            &mono(int(381), &[1, 1, 1, 1])
                .add(&mono(int(-904), &[1, 1, 2]))
                .add(&mono(int(208), &[2, 2]))
                .add(&mono(int(512), &[1, 3]))
                .add(&mono(int(-192), &[4]))
                .scale(&rat(1, 464486400)),
        );
    for m in [6, 8, 10] {
        let r = m / 2;
        let expected = closed.filter(|mono| mono.exponents().iter().skip(r + 1).all(|&e| e == 0));
        let got = a_hat_class(m, 16);
        ensure(got == expected, || format!("m={m}: {got}"))?;
    }
    Ok("closed form through degree 16 for m = 6, 8, 10".into())
}

fn ch_v1_appendix(_: &SuiteConfig) -> Outcome {
    let p = GradedPolynomial::p;
    let (p1, p2, p3) = (p(1), p(2), p(3));
    let expected = GradedPolynomial::constant(int(8))
        .add(&p1)
        .add(&p1.mul(&p1).sub(&p2.scale(&int(2))).scale(&rat(1, 12)))
        .add(&p1.mul(&p1).mul(&p1).sub(&p1.mul(&p2).scale(&int(3))).add(&p3.scale(&int(3))).scale(&rat(1, 360)));
    for (route, t) in [("tower", twisted_ch_tower(8, 1, 12, 1)), ("direct", twisted_ch_direct(8, 1, 12, 1))] {
        ensure(t.chern[1] == expected, || format!("{route}: ch(V_1) = {}", t.chern[1]))?;
    }
    Ok("ch(V_C) = 8 + p1 + (p1^2 - 2p2)/12 + (p1^3 - 3p1p2 + 3p3)/360 by both routes".into())
}

fn dual_route(_: &SuiteConfig) -> Outcome {
    for m in [6, 8] {
        let a = twisted_ch_direct(m, 4, 16, 4);
        let b = twisted_ch_tower(m, 4, 16, 4);
        ensure(a.a_hat == b.a_hat, || format!("m={m}: A-hat differs"))?;
        for n in 0..=4 {
            ensure(a.chern[n] == b.chern[n], || format!("m={m}: ch(V_{n}) differs"))?;
        }
    }
    Ok("ch(V_n) agree for m = 6, 8, n <= 4, degree <= 16".into())
}

// criterion 9

fn e8_theta_nullwert(_: &SuiteConfig) -> Outcome {
    let t = e8::theta_e8(0, 10).map_err(|e| e.to_string())?;
    ensure(t.at_zero() == eisenstein_series(4, 10), || "Theta_E8(0) differs from E4".into())?;
    Ok("Theta_E8(0) = E4 through q^10".into())
}

fn e8_character_dims(_: &SuiteConfig) -> Outcome {
    let data = e8::basic_character(3).map_err(|e| e.to_string())?;
    let want: Vec<num_bigint::BigInt> = [1, 248, 4124, 34752].iter().map(|&d| d.into()).collect();
    ensure(data.dims == want, || format!("dims {:?}", data.dims))?;
    let q1 = data.bundle.coeff(1).truncate(8);
    ensure(q1 == e8::adjoint_character_pullback(), || format!("ch(W_1) = {q1}"))?;
    Ok(format!("dims 1, 248, 4124, 34752; ch(W_1) = {q1}"))
}

fn e8_h_coefficients(_: &SuiteConfig) -> Outcome {
    let h = e8::h_expansion(6, 6).map_err(|e| e.to_string())?;
    let expected = [
        ModularForm::e4(),
        ModularForm::e6().scale(&rat(-1, 12)),
        crate::modular::eisenstein_modular(8, 0).scale(&rat(1, 288)),
        crate::modular::eisenstein_modular(10, 0).scale(&rat(-1, 10368)),
    ];
    ensure(h.h.as_slice() == &expected[..], || format!("H coefficients {:?}", h.h.iter().map(|f| f.render_delta_basis()).collect::<Vec<_>>()))?;
    ensure(h.ck == e8::ck_coefficients(3), || "theta coefficients are not D^i E4/(i!(4)_i)".into())?;
    ensure(h.verified, || "G2 transfer between the two forms failed".into())?;
    Ok("E4, -E6/12, E8/288, -E10/10368 on (e1/2)^i; CK form verified".into())
}

fn e8_theorem(_: &SuiteConfig) -> Outcome {
    for cap in [12, 14] {
        let r = e8::verify_e8_theorem(cap, 6).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{}: {:?}", r.claim, r.first_mismatch))?;
    }
    Ok("Sch = nu_0 ch(V) under the hypothesis at degree <= 12 and <= 14, q^6".into())
}

fn e8_negative_control(_: &SuiteConfig) -> Outcome {
    let r = e8::verify_e8_theorem_with(14, 6, false).map_err(|e| e.to_string())?;
    let mm = r.first_mismatch.ok_or("negative control unexpectedly passed")?;
    ensure(mm.symbol == "ch_2(ind D)", || format!("first mismatch at {mm}"))?;
    Ok(format!("fails as expected at {mm}"))
}

// criterion 10

fn prop_series_ring(config: &SuiteConfig) -> Outcome {
    let mut rng = seeded(config, 1);
    for trial in 0..50 {
        let order = rng.gen_range(0..=20);
        let (a, b, c) = (random_series(&mut rng, order), random_series(&mut rng, order), random_series(&mut rng, order));
        ensure(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), || format!("associativity, trial {trial}"))?;
        ensure(a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c)), || format!("distributivity, trial {trial}"))?;
        ensure(a.mul(&b) == b.mul(&a), || format!("commutativity, trial {trial}"))?;
        ensure(a.mul(&b).derive() == a.derive().mul(&b).add(&a.mul(&b.derive())), || format!("Leibniz, trial {trial}"))?;
        let mut u = a.clone();
        if u.coeff(0).is_zero() {
            u.set(0, int(1));
        }
        let inv = u.invert().map_err(|e| e.to_string())?;
        ensure(u.mul(&inv) == QSeries::one(order), || format!("inverse, trial {trial}"))?;
    }
    Ok("50 random triples, orders <= 20".into())
}

fn prop_dimension_formula(_: &SuiteConfig) -> Outcome {
    for k in (0..=100).step_by(2) {
        ensure(dim_modular(k) == dim_formula(k), || format!("weight {k}"))?;
    }
    Ok("monomial count equals the closed formula for even k <= 100".into())
}

fn prop_phi_basis_triangular(_: &SuiteConfig) -> Outcome {
    let mut count = 0;
    for m in [6u32, 8, 20] {
        for w in (4..=26).step_by(2) {
            let basis = phi_basis(w, m).map_err(|e| e.to_string())?;
            let s = basis.dim();
            if s == 0 {
                continue;
            }
            let eta = eta_inverse_power(m, s - 1);
            for (i, phi) in basis.elements.iter().enumerate() {
                let n = phi.expand(s - 1).mul(&eta);
                ensure(n == QSeries::monomial(int(1), i, s - 1), || format!("weight {w}, m={m}, phi_{i}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} normalized basis elements are q^i + O(q^s)"))
}

fn prop_derivative_closure(_: &SuiteConfig) -> Outcome {
    let order = 40;
    for w in (4..=24).step_by(2) {
        for mono in modular_monomials(w) {
            let f = ModularForm::from_terms(w, [(mono, int(1))]);
            let reduced = qm_reduce(&f.expand(order).derive(), w + 2).map_err(|e| format!("weight {w}: {e}"))?;
            ensure(reduced == f.derive(), || format!("D(E4^{}E6^{}) differs", mono.0, mono.1))?;
        }
    }
    let e2 = QuasiModularForm::e2();
    let e4 = ModularForm::e4().to_quasi();
    let e6 = ModularForm::e6().to_quasi();
    let identities = [
        ("D E2", e2.derive(), e2.mul(&e2).sub(&e4).scale(&rat(1, 12))),
        ("D E4", e4.derive(), e2.mul(&e4).sub(&e6).scale(&rat(1, 3))),
        ("D E6", e6.derive(), e2.mul(&e6).sub(&e4.mul(&e4)).scale(&rat(1, 2))),
        ("D Delta", ModularForm::delta().derive(), ModularForm::delta().to_quasi().mul(&e2)),
    ];
    for (name, lhs, rhs) in identities {
        let by_series = qm_reduce(&lhs.expand(order), lhs.weight()).map_err(|e| e.to_string())?;
        ensure(lhs == rhs && by_series == rhs, || name.to_string())?;
    }
    Ok("derivatives of all monomials of weight <= 24 reduce; Ramanujan identities hold".into())
}

fn prop_weight_additivity(config: &SuiteConfig) -> Outcome {
    let mut rng = seeded(config, 2);
    for trial in 0..20 {
        let k1 = 2 * rng.gen_range(2..=8);
        let k2 = 2 * rng.gen_range(2..=8);
        let (f, g) = (random_modular(&mut rng, k1), random_modular(&mut rng, k2));
        let order = dim_modular(k1 + k2) + 12;
        let r = modular_reduce(&f.expand(order).mul(&g.expand(order)), k1 + k2).map_err(|e| e.to_string())?;
        ensure(r == f.mul(&g), || format!("trial {trial}: weights {k1}, {k2}"))?;
    }
    Ok("20 random products reduce in the sum weight".into())
}

fn prop_integrality(_: &SuiteConfig) -> Outcome {
    let s = ModularForm::e4().expand(20).mul(&eta_inverse_power(8, 20));
    for (n, c) in s.coeffs().iter().enumerate() {
        ensure(c.is_integer() && c.is_positive(), || format!("q^{n}: {c}"))?;
    }
    Ok("E4 prod (1-q^n)^{-8} has positive integer coefficients through q^20".into())
}

fn prop_newton_roundtrip(_: &SuiteConfig) -> Outcome {
    for r in 1..=5 {
        let mut e: Vec<GradedPolynomial> = (1..=r).map(GradedPolynomial::p).collect();
        e.resize(6, GradedPolynomial::zero());
        let s = power_sums_from_elementary(&e, 6);
        let back = elementary_from_power_sums(&s, 6);
        ensure(back == e, || format!("{r} symbols"))?;
    }
    Ok("elementary -> power sums -> elementary for r <= 5, degree <= 24".into())
}

fn random_even_kernel(rng: &mut ChaCha8Rng, z_order: usize, q_order: usize) -> KernelSeries {
    let mut c = vec![QSeries::zero(q_order); z_order + 1];
    c[0] = QSeries::one(q_order);
    for k in (2..=z_order).step_by(2) {
        c[k] = random_series(rng, q_order);
    }
    ZSeries::from_coeffs(c)
}

fn prop_symmetric_product(config: &SuiteConfig) -> Outcome {
    let mut rng = seeded(config, 3);
    let cap = 12;
    for trial in 0..10 {
        let f = random_even_kernel(&mut rng, 6, 2);
        let g = random_even_kernel(&mut rng, 6, 2);
        let ctx = SymmetricContext::new(2, cap);
        let ex = |k: &KernelSeries| collapse_z(&expand_symmetric_product(k, &ctx).expect("normalized"));
        let lhs = ex(&f.mul(&g));
        let rhs = gs_mul_capped(&ex(&f), &ex(&g), cap);
        ensure(lhs == rhs, || format!("multiplicativity, trial {trial}"))?;
    }
    // specialization at explicit roots
    let z_order = 8;
    for trial in 0..20 {
        let coeffs: Vec<Rational> =
            (0..=z_order).map(|k| if k == 0 { int(1) } else if k % 2 == 0 { random_rational(&mut rng) } else { int(0) }).collect();
        let kernel = ZSeries::from_coeffs(coeffs.iter().map(|c| QSeries::constant(c.clone(), 0)).collect());
        let ys: Vec<Rational> = (0..3).map(|_| random_rational(&mut rng)).collect();
        let expanded = expand_symmetric_product(&kernel, &SymmetricContext::new(3, 2 * z_order as u32)).expect("normalized");
        let mut one = vec![int(0); z_order + 1];
        one[0] = int(1);
        let mut direct = ZSeries::from_coeffs(one);
        for y in &ys {
            let scaled: Vec<Rational> = coeffs.iter().enumerate().map(|(k, c)| c * num_traits::pow(y.clone(), k)).collect();
            direct = direct.mul(&ZSeries::from_coeffs(scaled));
        }
        let squares: Vec<Rational> = ys.iter().map(|y| y * y).collect();
        let mut values = vec![int(0)];
        values.push(squares.iter().cloned().sum());
        values.push(&squares[0] * &squares[1] + &squares[0] * &squares[2] + &squares[1] * &squares[2]);
        values.push(&squares[0] * &squares[1] * &squares[2]);
        for k in 0..=z_order {
            let got = expanded.coeff(k).coeff(0).evaluate(&values);
            ensure(got == *direct.coeff(k), || format!("specialization, trial {trial}, z^{k}"))?;
        }
    }
    Ok("multiplicative on 10 random pairs; 20 root specializations agree".into())
}

fn prop_jlf_roundtrip(config: &SuiteConfig) -> Outcome {
    let mut rng = seeded(config, 4);
    let z_order = 16;
    let mut checked = 0;
    for lambda in [int(0), int(1), rat(-1, 2)] {
        for _ in 0..3 {
            let k = 2 * rng.gen_range(2..=5);
            let xs: Vec<QuasiModularForm> = (0..=z_order)
                .map(|n| {
                    if n % 2 == 0 {
                        random_modular(&mut rng, k + n as u32).to_quasi()
                    } else {
                        QuasiModularForm::zero(k + n as u32)
                    }
                })
                .collect();
            let f = jlf_assemble(&xs, k as i32, &lambda, z_order).map_err(|e| e.to_string())?;
            let back = jlf_decompose(&f).map_err(|e| e.to_string())?;
            ensure(back == xs, || format!("lambda {lambda}, weight {k}"))?;
            if lambda.is_zero() {
                ensure(f.coeffs().iter().all(|c| c.is_modular()), || "index 0 coefficient with E2 part".into())?;
            }
            let ck = ck_lift(&xs[0], k as i32, &lambda, z_order).map_err(|e| e.to_string())?;
            ensure(ck.coeff(0) == &xs[0], || "CK z^0 coefficient".into())?;
            checked += 1;
        }
    }
    // polynomial index -P/2 over graded series
    let q_order = 30;
    let lambda = GradedPolynomial::base().scale(&rat(-1, 2));
    let p = GradedPolynomial::p;
    let xs: Vec<GradedSeries> = (0..=8usize)
        .map(|n| {
            let w = 4 + n as u32;
            if n % 2 == 1 || dim_modular(w) == 0 {
                return GradedSeries::zero_with(q_order, &GradedPolynomial::zero());
            }
            let form = random_modular(&mut rng, w);
            gs_from_scalar(&form.expand(q_order), &p(1 + n / 2).scale(&random_rational(&mut rng)))
        })
        .collect();
    let f = jlf_assemble(&xs, 4, &lambda, 8).map_err(|e| e.to_string())?;
    let again = JacobiLikeForm::new(4, lambda.clone(), Parity::Even, f.coeffs().to_vec()).map_err(|e| e.to_string())?;
    let back = jlf_decompose(&again).map_err(|e| e.to_string())?;
    ensure(back == xs, || "polynomial index roundtrip".into())?;
    Ok(format!("{} rational-index roundtrips and one polynomial-index roundtrip", checked))
}

fn prop_natural_uniqueness(_: &SuiteConfig) -> Outcome {
    let mut broken = 0;
    for phi in [ModularForm::e4(), ModularForm::e6(), ModularForm::delta()] {
        let lift = natural_lift(&phi, 16).map_err(|e| e.to_string())?;
        ensure(natural_lift_violation(&lift.form).is_none(), || format!("weight {}: natural lift violates", phi.weight()))?;
        for l in 1..lift.corrections.len() {
            let w = phi.weight() + 2 * l as u32;
            for (b, _) in crate::modular::delta_basis(w) {
                let mut cs = lift.corrections.clone();
                cs[l] = cs[l].add(&b);
                let perturbed = lift_from_corrections(&cs, 16).map_err(|e| e.to_string())?;
                ensure(natural_lift_violation(&perturbed).is_some(), || {
                    format!("weight {}: perturbing f_{} kept the vanishing", phi.weight(), 2 * l)
                })?;
                broken += 1;
            }
        }
    }
    Ok(format!("{broken} perturbations all break the vanishing conditions"))
}

fn prop_parity_vanishing(_: &SuiteConfig) -> Outcome {
    for m in [4, 6, 8, 10, 12] {
        let s = family::sch_series(m, 12, 3);
        ensure(s.parity_holds(), || format!("m={m}"))?;
    }
    ensure(odd_part_vanishes(&sigma_inverse_kernel(12, 4)), || "sigma kernel".into())?;
    ensure(odd_part_vanishes(&a_hat_kernel(12)), || "A-hat kernel".into())?;
    for kind in [ThetaKind::Theta2, ThetaKind::Theta3, ThetaKind::Theta4] {
        ensure(odd_part_vanishes(&theta_kernel_u(kind, 12, 40)), || format!("{kind:?}"))?;
    }
    Ok("wrong-parity degrees vanish for m = 4..12; even kernels have no odd part".into())
}

fn prop_weight_twelve(_: &SuiteConfig) -> Outcome {
    let tower = IndexTower::new(8, 16, 4);
    let basis = phi_basis(12, 8).map_err(|e| e.to_string())?;
    let eta = eta_inverse_power(8, 4);
    let normalized: Vec<QSeries<Rational>> = basis.elements.iter().map(|f| f.expand(4).mul(&eta)).collect();
    for n in 2..=4 {
        let lhs = tower.ch(n, 8).at_base_zero();
        let rhs = tower
            .ch(0, 8)
            .at_base_zero()
            .scale(normalized[0].coeff(n))
            .add(&tower.ch(1, 8).at_base_zero().scale(normalized[1].coeff(n)));
        ensure(lhs == rhs, || format!("ch_8(V_{n})"))?;
    }
    ensure(
        normalized[0].coeff(2) == &int(196732) && normalized[1].coeff(2) == &int(-16),
        || "weight-12 basis coefficients".into(),
    )?;
    Ok("ch_8(V_n) = [phi_0]_n ch_8(V_0) + [phi_1]_n ch_8(V_1) at p1(X) = 0 for n = 2..4".into())
}
