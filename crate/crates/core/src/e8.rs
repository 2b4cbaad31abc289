//! The E8 theta function, the basic representation of affine E8 and the
//! associated bundle character over a string base.
//!
//! Theta functions are taken in the variable where `theta_3(z) = sum q^{n^2/2}
//! e^{nz}`, i.e. `2 pi i z` of the lattice sum is written `z`. In that
//! variable `Theta_E8(z) = sum_gamma q^{|gamma|^2/2} e^{<gamma, z>}`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::charclass::{g2_p1, theta_kernel_u, KernelSeries, ThetaKind};
use crate::family::{first_mismatch, sch_series, Check, FiberCombination, IndexTower, Mismatch, VerificationReport};
use crate::linalg::{self, Solution};
use crate::modular::{
    eta_inverse_power, factorial, membership_order, modular_reduce, pochhammer, FormError, ModularForm,
    QuasiModularForm,
};
use crate::series::{int, rat, QSeries, Rational, SeriesError, ZSeries};
use crate::sympoly::{
    collapse_z, expand_symmetric_product, gs_exp_capped, gs_mul_capped, GradedPolynomial, GradedSeries, Monomial,
    SymmetricContext,
};

pub const RANK: usize = 8;
/// Dimension of the adjoint representation `W_1`.
pub const ADJOINT_DIM: i64 = 248;
/// Dynkin index of the adjoint representation: `c_2 -> 60 u`.
pub const DYNKIN_INDEX: i64 = 60;
/// `ch` of the adjoint bundle on `BE8` through `u^2`: `248 + 60u + 6u^2`.
pub const ADJOINT_CHARACTER: [i64; 3] = [ADJOINT_DIM, DYNKIN_INDEX, 6];
/// Largest base degree reachable before the odd theta product enters.
pub const MAX_BUNDLE_DEGREE: u32 = 14;

pub const RESCALING_NOTE: &str = "theta arguments 2*pi*i*z_k are written z_k";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum E8Error {
    #[error("u-exponent {exponent} is not a multiple of 8")]
    FractionalResidue { exponent: usize },
    #[error("coefficient of (e1/2)^{power} is not a multiple of E{weight}: {source}")]
    ModularMismatch { power: usize, weight: u32, source: FormError },
    #[error("z-order {0} is outside the supported window")]
    ZOrderTooLarge(usize),
    #[error("degree cap {0} exceeds {MAX_BUNDLE_DEGREE}")]
    DegreeTooLarge(u32),
    #[error("unexpected symmetric term {0} below z^8")]
    NonInvariantTerm(String),
}

fn from_series_error(e: SeriesError) -> E8Error {
    match e {
        SeriesError::FractionalResidue { exponent, .. } => E8Error::FractionalResidue { exponent },
        other => panic!("unexpected series failure: {other}"),
    }
}

/// `Theta_E8(z_1..z_8)` as `even(e) + z_1...z_8 * odd(e)` where `e_i` are
/// the elementary symmetric polynomials in `z_k^2`, stored in slot `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaE8Expansion {
    pub z_order: usize,
    pub q_order: usize,
    pub even: GradedSeries,
    /// Present once `z_order >= 8`.
    pub odd: Option<GradedSeries>,
}

impl ThetaE8Expansion {
    /// `Theta_E8(0)`.
    pub fn at_zero(&self) -> QSeries<Rational> {
        self.even.map(|c| c.constant_term())
    }

    /// Coefficient series of `e_1^i`.
    pub fn e1_power(&self, i: u32) -> QSeries<Rational> {
        let mono = Monomial::symbol(1, i);
        self.even.map(|c| c.coefficient(&mono))
    }

    /// Evaluates the `q^n` coefficient at a point `z`.
    pub fn evaluate(&self, n: usize, z: &[Rational]) -> Rational {
        assert_eq!(z.len(), RANK);
        let squares: Vec<Rational> = z.iter().map(|x| x * x).collect();
        let mut values = vec![Rational::zero()];
        values.extend(elementary(&squares));
        let mut total = self.even.coeff(n).evaluate(&values);
        if let Some(odd) = &self.odd {
            let pf = z.iter().fold(Rational::one(), |acc, x| acc * x);
            total += odd.coeff(n).evaluate(&values) * pf;
        }
        total
    }
}

fn elementary(xs: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::one()];
    for x in xs {
        e.push(Rational::zero());
        for k in (1..e.len()).rev() {
            let prev = e[k - 1].clone() * x;
            e[k] += prev;
        }
    }
    e.remove(0);
    e
}

/// `prod_k K(z_k)` for an even `z`-series `K` over `u`, returned as a
/// `u`-series of polynomials in the `e_i` (all `z`-degrees summed).
fn symmetric_theta_product(k: &KernelSeries, z_order: usize, u_order: usize) -> GradedSeries {
    let c0 = k.coeff(0).clone();
    let v = c0.valuation().expect("nonzero theta constant");
    let c0s = c0.shift_down(v).expect("valuation");
    let inv = c0s.invert().expect("unit after shift");
    let normalized: Vec<QSeries<Rational>> =
        k.coeffs().iter().map(|c| c.shift_down(v).expect("common valuation").mul(&inv)).collect();
    let ctx = SymmetricContext::new(RANK, 2 * z_order as u32);
    let prod = expand_symmetric_product(&ZSeries::from_coeffs(normalized), &ctx).expect("normalized kernel");
    let scalar = c0s.pow(RANK as u32);
    collapse_z(&prod).mul_scalar_series(&scalar).shift_up(RANK * v).truncate(u_order)
}

/// `Theta_E8 = (prod theta_2 + prod theta_3 + prod theta_4 + prod theta_1) / 2`.
pub fn theta_e8(z_order: usize, q_order: usize) -> Result<ThetaE8Expansion, E8Error> {
    if z_order > 15 {
        return Err(E8Error::ZOrderTooLarge(z_order));
    }
    let z_even = z_order - z_order % 2;
    let u_order = 8 * q_order + 7;
    let mut sum: Option<GradedSeries> = None;
    for kind in [ThetaKind::Theta2, ThetaKind::Theta3, ThetaKind::Theta4] {
        // shift_down can shorten by one; pad the u-order
        let k = theta_kernel_u(kind, z_even, u_order + 1);
        let p = symmetric_theta_product(&k, z_even, u_order);
        sum = Some(match sum {
            None => p,
            Some(s) => s.add(&p),
        });
    }
    let half = rat(1, 2);
    let even = sum.unwrap().scale(&half).compress(8).map_err(from_series_error)?.truncate(q_order);

    let odd = if z_order >= RANK {
        // theta_1(z) / z is even with constant term theta_1'(0)
        let rest = z_order - RANK;
        let rest = rest - rest % 2;
        let k1 = theta_kernel_u(ThetaKind::Theta1, rest + 1, u_order + 1);
        let divided = ZSeries::from_coeffs(k1.coeffs()[1..].to_vec());
        let p = symmetric_theta_product(&divided, rest, u_order);
        Some(p.scale(&half).compress(8).map_err(from_series_error)?.truncate(q_order))
    } else {
        None
    };
    Ok(ThetaE8Expansion { z_order, q_order, even, odd })
}

/// Checks that below `z^8` only powers of `e_1` occur (the only Weyl
/// invariants in degrees 2, 4, 6).
fn check_e1_only(theta: &GradedSeries) -> Result<(), E8Error> {
    for c in theta.coeffs() {
        for (mono, coeff) in c.terms() {
            let pure = mono.exponents().iter().enumerate().all(|(slot, &e)| slot == 1 || e == 0);
            if !pure && !coeff.is_zero() && mono.degree() < 16 {
                return Err(E8Error::NonInvariantTerm(mono.render(&|i| format!("e{i}"))));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct E8CharacterData {
    /// `prod (1-q^n)^{-8} Theta_E8(0)`.
    pub character: QSeries<Rational>,
    /// `dim W_n`.
    pub dims: Vec<BigInt>,
    /// `ch(V)` over `Q[P]` through degree [`MAX_BUNDLE_DEGREE`].
    pub bundle: GradedSeries,
}

impl E8CharacterData {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "character": crate::json::series(&self.character),
            "dims": self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "bundle": self.bundle.coeffs().iter().map(|c| c.render_with(&base_names)).collect::<Vec<_>>(),
            "rescaling": RESCALING_NOTE,
        })
    }
}

fn base_names(slot: usize) -> String {
    if slot == 0 {
        "P".to_string()
    } else {
        format!("e{slot}")
    }
}

pub fn basic_character(q_order: usize) -> Result<E8CharacterData, E8Error> {
    let theta = theta_e8(0, q_order)?;
    let character = theta.at_zero().mul(&eta_inverse_power(RANK as u32, q_order));
    let dims = character
        .to_integers()
        .expect("level-one multiplicities are integers");
    let bundle = bundle_character(MAX_BUNDLE_DEGREE, q_order)?;
    Ok(E8CharacterData { character, dims, bundle })
}

/// `H = e^{G2 e_1} Theta_E8` on `(e_1/2)^i` for `i <= z_order/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HExpansion {
    /// Modular coefficient of `(e_1/2)^i` in `H`, weight `4 + 2i`.
    pub h: Vec<ModularForm>,
    /// Coefficient of `(e_1/2)^i` in `Theta_E8` itself, read from the theta
    /// product and identified as quasimodular.
    pub ck: Vec<QuasiModularForm>,
    /// `e^{-G2 e_1} sum h_i (e_1/2)^i` agrees with `sum ck_i (e_1/2)^i` in
    /// the ring of quasimodular forms.
    pub verified: bool,
}

impl HExpansion {
    pub fn to_json(&self, order: usize) -> serde_json::Value {
        serde_json::json!({
            "h": self.h.iter().map(|f| f.to_json(order)).collect::<Vec<_>>(),
            "ck": self.ck.iter().map(|f| f.to_json(order)).collect::<Vec<_>>(),
            "verified": self.verified,
            "rescaling": RESCALING_NOTE,
        })
    }
}

pub fn h_expansion(z_order: usize, q_order: usize) -> Result<HExpansion, E8Error> {
    if z_order > 7 {
        return Err(E8Error::ZOrderTooLarge(z_order));
    }
    let top = z_order / 2;
    let order = q_order.max(membership_order(4 + 2 * top as u32, true));
    let theta = theta_e8(z_order, order)?;
    check_e1_only(&theta.even)?;
    let cap = 2 * z_order as u32;
    let h_series = gs_mul_capped(&theta.even, &gs_exp_capped(&g2_p1(order), cap), cap);

    let mut h = Vec::new();
    let mut ck = Vec::new();
    for i in 0..=top {
        let w = 4 + 2 * i as u32;
        let mono = Monomial::symbol(1, i as u32);
        let scale = Rational::from_integer(BigInt::from(1u64 << i));
        let hi = h_series.map(|c| c.coefficient(&mono) * &scale);
        h.push(modular_reduce(&hi, w).map_err(|source| E8Error::ModularMismatch { power: i, weight: w, source })?);
        let ti = theta.e1_power(i as u32).scale(&scale);
        ck.push(
            crate::modular::qm_reduce(&ti, w)
                .map_err(|source| E8Error::ModularMismatch { power: i, weight: w, source })?,
        );
    }
    // e^{-G2 e1} = sum_t (-2 G2)^t/t! (e1/2)^t in the quasimodular ring
    let minus_two_g2 = QuasiModularForm::g2().scale(&int(-2));
    let mut verified = true;
    for i in 0..=top {
        let mut acc = QuasiModularForm::zero(4 + 2 * i as u32);
        for t in 0..=i {
            let f = Rational::from_integer(factorial(t)).recip();
            acc = acc.add(&minus_two_g2.pow(t as u32).mul(&h[i - t].to_quasi()).scale(&f));
        }
        verified &= acc == ck[i];
    }
    Ok(HExpansion { h, ck, verified })
}

/// The Cohen-Kuznetsov coefficients `D^i E4 / (i! (4)_i)`.
pub fn ck_coefficients(top: usize) -> Vec<QuasiModularForm> {
    let e4 = ModularForm::e4().to_quasi();
    (0..=top)
        .map(|i| {
            let d = pochhammer(&int(4), i) * Rational::from_integer(factorial(i));
            e4.derive_n(i).scale(&d.recip())
        })
        .collect()
}

/// `ch(V) = prod (1-q^n)^{-8} Theta_E8` with `e_1 -> P`, over `Q[P]`.
pub fn bundle_character(degree_cap: u32, q_order: usize) -> Result<GradedSeries, E8Error> {
    if degree_cap > MAX_BUNDLE_DEGREE {
        return Err(E8Error::DegreeTooLarge(degree_cap));
    }
    let theta = theta_e8((degree_cap / 2) as usize, q_order)?;
    check_e1_only(&theta.even)?;
    let p = GradedPolynomial::base();
    let pulled = theta.even.map(|c| c.substitute(1, &p).truncate(degree_cap));
    Ok(pulled.mul_scalar_series(&eta_inverse_power(RANK as u32, q_order)))
}

/// `248 + 60u + 6u^2` pulled back along `u -> p1(X)/2`.
pub fn adjoint_character_pullback() -> GradedPolynomial {
    let half_p = GradedPolynomial::base().scale(&rat(1, 2));
    let mut out = GradedPolynomial::zero();
    let mut power = GradedPolynomial::one();
    for c in ADJOINT_CHARACTER {
        out = out.add(&power.scale(&int(c)));
        power = power.mul(&half_p);
    }
    out
}

fn class_times_polynomial(class: &FiberCombination, p: &GradedPolynomial) -> FiberCombination {
    let mut out = FiberCombination::zero();
    for (mono, c) in p.terms() {
        assert!(mono.exponents().iter().skip(1).all(|&e| e == 0), "bundle character must be a polynomial in P");
        out = out.add(&class.times_base(mono.exponent(0)).scale(c));
    }
    out
}

/// `Sch(F; q)` for 8-dimensional fibers against `nu_0 ch(V)`. With
/// `impose_hypothesis` the classes `ch_2, ch_4, ch_6` of the untwisted index
/// are set to zero.
pub fn verify_e8_theorem_with(
    degree_cap: u32,
    q_order: usize,
    impose_hypothesis: bool,
) -> Result<VerificationReport, E8Error> {
    let m = RANK;
    let bundle = bundle_character(degree_cap, q_order)?;
    let sch = sch_series(m, degree_cap, q_order).normalized();
    let tower = IndexTower::new(m, degree_cap, 0);
    let nu0 = tower.ch(0, 0);
    let rhs = bundle.map(|c| class_times_polynomial(&nu0, c));

    // generators P^l ch_j(ind D), 2j + 4l <= degree_cap
    let mut gens: Vec<(u32, u32, FiberCombination)> = Vec::new();
    for j in (0..=degree_cap / 2).step_by(2) {
        for l in 0..=(degree_cap - 2 * j) / 4 {
            gens.push((j, l, tower.ch(0, j).times_base(l)));
        }
    }
    let killed = |j: u32| impose_hypothesis && (2..=6).contains(&j);

    let mut mismatch: Option<Mismatch> = None;
    let mut projected = Vec::new();
    for n in 0..=q_order {
        let diff = sch.coefficient(n).sub(rhs.coeff(n));
        let coords = coordinates(&diff, &gens);
        let Some(coords) = coords else {
            mismatch = first_mismatch(&sch.series, &rhs);
            break;
        };
        let mut residual = FiberCombination::zero();
        for ((j, l, g), c) in gens.iter().zip(&coords) {
            if !killed(*j) {
                residual = residual.add(&g.scale(c));
                if !c.is_zero() && mismatch.is_none() {
                    mismatch = Some(Mismatch {
                        q_power: n,
                        degree: 2 * j + 4 * l,
                        symbol: generator_name(*j, *l),
                        lhs: c.clone(),
                        rhs: Rational::zero(),
                    });
                }
            }
        }
        projected.push(residual);
        if mismatch.is_some() {
            break;
        }
    }

    let claim = format!(
        "e8_theorem(degree<={degree_cap}, q_order={q_order}, hypothesis={})",
        if impose_hypothesis { "imposed" } else { "not imposed" }
    );
    let checks = vec![Check {
        name: "adjoint_constants".to_string(),
        passed: bundle.coeff(1).truncate(8.min(degree_cap)) == adjoint_character_pullback().truncate(8.min(degree_cap)),
        detail: "q^1 coefficient of ch(V) is 248 + 30 p1(X) + 3/2 p1(X)^2".to_string(),
    }];
    Ok(VerificationReport {
        claim,
        equal: mismatch.is_none(),
        lhs: sch.render(),
        rhs: render_bundle(&bundle, "nu_0"),
        first_mismatch: mismatch,
        checks,
        display: vec![format!("Sch(F;q) = nu_0 * ch(V) modulo ch_2, ch_4, ch_6 of ind D; {RESCALING_NOTE}")],
    })
}

pub fn verify_e8_theorem(degree_cap: u32, q_order: usize) -> Result<VerificationReport, E8Error> {
    verify_e8_theorem_with(degree_cap, q_order, true)
}

fn generator_name(j: u32, l: u32) -> String {
    crate::render::product(&[crate::family::class_name(j, 0), crate::render::power("p1(X)", l)])
}

fn coordinates(target: &FiberCombination, gens: &[(u32, u32, FiberCombination)]) -> Option<Vec<Rational>> {
    let mut symbols: Vec<_> = target.terms().map(|(s, _)| s.clone()).collect();
    for (_, _, g) in gens {
        symbols.extend(g.terms().map(|(s, _)| s.clone()));
    }
    symbols.sort();
    symbols.dedup();
    let a: Vec<Vec<Rational>> =
        symbols.iter().map(|s| gens.iter().map(|(_, _, g)| g.coefficient(s)).collect()).collect();
    let b: Vec<Rational> = symbols.iter().map(|s| target.coefficient(s)).collect();
    match linalg::solve(&a, &b) {
        Solution::Unique(x) => Some(x),
        _ => None,
    }
}

fn render_bundle(bundle: &GradedSeries, prefix: &str) -> String {
    let mut lines = Vec::new();
    for (n, c) in bundle.coeffs().iter().enumerate() {
        if !c.is_zero() {
            lines.push(format!("q^{n}: {prefix} * ({})", c.render_with(&|_| "p1(X)".to_string())));
        }
    }
    lines.push(format!("O(q^{})", bundle.order() + 1));
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::eisenstein_series;

    #[test]
    fn theta_at_zero_is_e4() {
        let t = theta_e8(0, 6).unwrap();
        assert_eq!(t.at_zero(), eisenstein_series(4, 6));
        assert!(t.odd.is_none());
    }

    #[test]
    fn first_e1_coefficient() {
        // -E6/12 * (e1/2) after the G2 factor
        let h = h_expansion(2, 4).unwrap();
        assert_eq!(h.h[1], ModularForm::e6().scale(&rat(-1, 12)));
        assert!(h.verified);
    }

    #[test]
    fn elementary_symmetric() {
        let e = elementary(&[int(1), int(2), int(3)]);
        assert_eq!(e, vec![int(6), int(11), int(6)]);
    }

    #[test]
    fn bundle_q0_is_one() {
        let b = bundle_character(8, 2).unwrap();
        assert_eq!(*b.coeff(0), GradedPolynomial::one());
        assert_eq!(bundle_character(16, 2), Err(E8Error::DegreeTooLarge(16)));
    }
}
