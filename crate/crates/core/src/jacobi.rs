//! Jacobi-like forms as sequences of `z`-coefficients, Cohen-Kuznetsov lifts,
//! the splitting of a form into modular pieces `xi_n`, and natural lifts.
//!
//! Entries are generic over [`LiftAlgebra`]: quasimodular forms with a
//! rational index in the pure case, and graded `q`-series with a polynomial
//! index when the index is `-p1/2`.

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::modular::{
    factorial, modular_reduce, phi_basis, pochhammer, qm_reduce, FormError, ModularForm, QuasiModularForm,
};
use crate::series::{int, Module, Rational};
use crate::sympoly::{GradedPolynomial, GradedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JacobiError {
    #[error("cannot lift a non-constant form of weight 0")]
    WeightZeroNonConstant,
    #[error("weight {weight} is too small for this operation")]
    WeightTooSmall { weight: i32 },
    #[error("the coefficient of z^{n} needs (k+n-j-1)_j with k = {weight}, which vanishes")]
    DegenerateWeight { weight: i32, n: usize },
    #[error("xi_{n} is not modular of weight {weight}: {reason}")]
    NotModularResidue { n: usize, weight: i32, reason: String },
    #[error("z^{slot} coefficient breaks the {expected} parity")]
    ParityViolation { slot: usize, expected: Parity },
    #[error("z^{slot} coefficient is not quasimodular of weight {weight}: {reason}")]
    WrongWeight { slot: usize, weight: i32, reason: String },
    #[error("parity shift needs an even form")]
    NotEven,
    #[error("forms do not share weight and index")]
    Incompatible,
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn admits(self, slot: usize) -> bool {
        match self {
            Parity::Even => slot.is_multiple_of(2),
            Parity::Odd => slot % 2 == 1,
        }
    }

    fn flipped(self, by: usize) -> Self {
        if by.is_multiple_of(2) {
            self
        } else {
            match self {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
            }
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Coefficient algebras for Jacobi-like forms: closed under `D = q d/dq`
/// and multiplication by the index.
pub trait LiftAlgebra: Module {
    type Index: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync;

    fn derive(&self) -> Self;
    fn times_index(&self, lambda: &Self::Index) -> Self;
    fn is_constant(&self) -> bool;
    /// Succeeds when `self` lies in `M^weight` (tensored with the scalars).
    fn check_modular(&self, weight: i32) -> Result<(), String>;
    /// Succeeds when `self` lies in the quasimodular forms of this weight.
    fn check_quasimodular(&self, weight: i32) -> Result<(), String>;
    fn describe(&self) -> String;
}

impl Module for QuasiModularForm {
    fn zero_like(&self) -> Self {
        QuasiModularForm::zero(self.weight())
    }
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs)
    }
    fn negated(&self) -> Self {
        self.scale(&int(-1))
    }
    fn scaled(&self, r: &Rational) -> Self {
        self.scale(r)
    }
}

impl LiftAlgebra for QuasiModularForm {
    type Index = Rational;

    fn derive(&self) -> Self {
        QuasiModularForm::derive(self)
    }
    fn times_index(&self, lambda: &Rational) -> Self {
        self.scale(lambda)
    }
    fn is_constant(&self) -> bool {
        self.is_zero() || self.weight() == 0
    }
    fn check_modular(&self, weight: i32) -> Result<(), String> {
        if self.is_zero() {
            return Ok(());
        }
        if self.weight() as i32 != weight {
            return Err(format!("has weight {}", self.weight()));
        }
        if !self.is_modular() {
            return Err(format!("nonzero E2-part in {}", self.render()));
        }
        Ok(())
    }
    fn check_quasimodular(&self, weight: i32) -> Result<(), String> {
        if self.is_zero() {
            return Ok(());
        }
        if weight < 0 || self.weight() as i32 != weight {
            return Err(format!("has weight {}", self.weight()));
        }
        // independent check on the expansion
        let w = weight as u32;
        let order = crate::modular::membership_order(w, true);
        match qm_reduce(&self.expand(order), w) {
            Ok(g) if &g == self => Ok(()),
            Ok(g) => Err(format!("expansion reduces to {}", g.render())),
            Err(e) => Err(e.to_string()),
        }
    }
    fn describe(&self) -> String {
        self.render()
    }
}

impl LiftAlgebra for GradedSeries {
    type Index = GradedPolynomial;

    fn derive(&self) -> Self {
        crate::series::PowerSeries::derive(self)
    }
    fn times_index(&self, lambda: &GradedPolynomial) -> Self {
        self.map(|c| c.mul(lambda))
    }
    fn is_constant(&self) -> bool {
        self.coeffs().iter().skip(1).all(GradedPolynomial::is_zero)
    }
    fn check_modular(&self, weight: i32) -> Result<(), String> {
        check_components(self, weight, false)
    }
    fn check_quasimodular(&self, weight: i32) -> Result<(), String> {
        check_components(self, weight, true)
    }
    fn describe(&self) -> String {
        describe_graded_series(self)
    }
}

/// Splits a graded series by monomial and tests every scalar component.
fn check_components(s: &GradedSeries, weight: i32, quasi: bool) -> Result<(), String> {
    let mut monomials = std::collections::BTreeSet::new();
    for c in s.coeffs() {
        for (m, _) in c.terms() {
            monomials.insert(m.clone());
        }
    }
    if monomials.is_empty() {
        return Ok(());
    }
    if weight < 0 {
        return Err(format!("negative weight {weight}"));
    }
    for m in monomials {
        let scalar = crate::series::QSeries::from_coeffs(s.coeffs().iter().map(|c| c.coefficient(&m)).collect());
        let res = if quasi {
            qm_reduce(&scalar, weight as u32).map(|_| ())
        } else {
            modular_reduce(&scalar, weight as u32).map(|_| ())
        };
        res.map_err(|e| format!("component {}: {e}", m.render(&crate::sympoly::pontryagin_names)))?;
    }
    Ok(())
}

fn describe_graded_series(s: &GradedSeries) -> String {
    let mut parts = Vec::new();
    for (n, c) in s.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let q = match n {
            0 => String::new(),
            1 => "*q".to_string(),
            _ => format!("*q^{n}"),
        };
        parts.push(format!("({c}){q}"));
    }
    if parts.is_empty() {
        parts.push("0".to_string());
    }
    format!("{} + O(q^{})", parts.join(" + "), s.order() + 1)
}

/// A truncated Jacobi-like form `sum_j chi_j z^j` of weight `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiLikeForm<E: LiftAlgebra> {
    weight: i32,
    index: E::Index,
    parity: Parity,
    coeffs: Vec<E>,
}

impl<E: LiftAlgebra> JacobiLikeForm<E> {
    /// Validates parity and entry weights.
    pub fn new(weight: i32, index: E::Index, parity: Parity, coeffs: Vec<E>) -> Result<Self, JacobiError> {
        assert!(!coeffs.is_empty(), "a Jacobi-like form needs at least the z^0 entry");
        for (slot, c) in coeffs.iter().enumerate() {
            if c.vanishes() {
                continue;
            }
            if !parity.admits(slot) {
                return Err(JacobiError::ParityViolation { slot, expected: parity });
            }
            let w = weight + slot as i32;
            c.check_quasimodular(w)
                .map_err(|reason| JacobiError::WrongWeight { slot, weight: w, reason })?;
        }
        Ok(Self::new_unchecked(weight, index, parity, coeffs))
    }

    fn new_unchecked(weight: i32, index: E::Index, parity: Parity, coeffs: Vec<E>) -> Self {
        JacobiLikeForm { weight, index, parity, coeffs }
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn index(&self) -> &E::Index {
        &self.index
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn z_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &E {
        &self.coeffs[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Module::vanishes)
    }

    /// Drops coefficients above `z^z_order`.
    pub fn truncate(&self, z_order: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(z_order + 1);
        out
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, JacobiError> {
        if self.weight != rhs.weight || self.index != rhs.index || self.parity != rhs.parity {
            return Err(JacobiError::Incompatible);
        }
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeffs[j].plus(&rhs.coeffs[j])).collect();
        Ok(Self::new_unchecked(self.weight, self.index.clone(), self.parity, coeffs))
    }

    pub fn scaled(&self, r: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.scaled(r)).collect();
        Self::new_unchecked(self.weight, self.index.clone(), self.parity, coeffs)
    }

    /// Multiplication by `z^n`: weight drops by `n`, entries move up `n`
    /// slots.
    pub fn shift_z(&self, n: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = vec![zero; n];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new_unchecked(self.weight - n as i32, self.index.clone(), self.parity.flipped(n), coeffs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "index": self.index.to_string(),
            "parity": self.parity.to_string(),
            "coefficients": self.coeffs.iter().map(|c| c.describe()).collect::<Vec<_>>(),
        })
    }
}

/// `1 / (n! (k)_n)`, or `None` when the Pochhammer symbol vanishes.
fn lift_factor(k: i32, n: usize) -> Option<Rational> {
    let p = pochhammer(&int(k as i64), n) * Rational::from_integer(factorial(n));
    (!p.is_zero()).then(|| p.recip())
}

/// Cohen-Kuznetsov lift `sum_n lambda^n D^n f / (n! (k)_n) z^{2n}` of an
/// entry of weight `k`.
pub fn ck_lift<E: LiftAlgebra>(
    f: &E,
    weight: i32,
    lambda: &E::Index,
    z_order: usize,
) -> Result<JacobiLikeForm<E>, JacobiError> {
    let mut coeffs = vec![f.zero_like(); z_order + 1];
    coeffs[0] = f.clone();
    if weight == 0 {
        if !f.is_constant() {
            return Err(JacobiError::WeightZeroNonConstant);
        }
        return Ok(JacobiLikeForm::new_unchecked(0, lambda.clone(), Parity::Even, coeffs));
    }
    if weight < 0 {
        if !f.vanishes() {
            return Err(JacobiError::WeightTooSmall { weight });
        }
        return Ok(JacobiLikeForm::new_unchecked(weight, lambda.clone(), Parity::Even, coeffs));
    }
    let mut d = f.clone();
    for n in 1..=z_order / 2 {
        d = d.derive().times_index(lambda);
        let c = lift_factor(weight, n).expect("positive weight");
        coeffs[2 * n] = d.scaled(&c);
    }
    Ok(JacobiLikeForm::new_unchecked(weight, lambda.clone(), Parity::Even, coeffs))
}

/// [`ck_lift`] for a modular form with a rational index.
pub fn ck_lift_form(
    f: &ModularForm,
    lambda: &Rational,
    z_order: usize,
) -> Result<JacobiLikeForm<QuasiModularForm>, JacobiError> {
    ck_lift(&f.to_quasi(), f.weight() as i32, lambda, z_order)
}

/// The modular forms `xi_n` of weight `k+n` with `F = sum_n z^n CK(xi_n)`:
/// `xi_n = sum_j (-lambda)^j / (j! (k+n-j-1)_j) D^j chi_{n-2j}`.
pub fn jlf_decompose<E: LiftAlgebra>(f: &JacobiLikeForm<E>) -> Result<Vec<E>, JacobiError>
where
    E::Index: Module,
{
    let k = f.weight;
    let mut xs = Vec::with_capacity(f.coeffs.len());
    let minus_lambda = f.index.negated();
    for n in 0..f.coeffs.len() {
        let mut xi = f.coeffs[n].clone();
        // term = (-lambda)^j D^j chi_{n-2j}
        for j in 1..=n / 2 {
            let mut term = f.coeffs[n - 2 * j].clone();
            if term.vanishes() {
                continue;
            }
            for _ in 0..j {
                term = term.derive().times_index(&minus_lambda);
            }
            if term.vanishes() {
                continue;
            }
            let p = pochhammer(&int((k + n as i32 - j as i32 - 1) as i64), j)
                * Rational::from_integer(factorial(j));
            if p.is_zero() {
                return Err(JacobiError::DegenerateWeight { weight: k, n });
            }
            xi = xi.plus(&term.scaled(&p.recip()));
        }
        let w = k + n as i32;
        let check = if w % 2 != 0 && !xi.vanishes() {
            Err("odd weight".to_string())
        } else {
            xi.check_modular(w)
        };
        check.map_err(|reason| JacobiError::NotModularResidue { n, weight: w, reason })?;
        xs.push(xi);
    }
    Ok(xs)
}

/// `sum_n z^n CK(xi_n)` with `xi_n` of weight `weight + n`.
pub fn jlf_assemble<E: LiftAlgebra>(
    xs: &[E],
    weight: i32,
    lambda: &E::Index,
    z_order: usize,
) -> Result<JacobiLikeForm<E>, JacobiError> {
    assert!(!xs.is_empty(), "need at least xi_0");
    let zero = xs[0].zero_like();
    let mut coeffs = vec![zero; z_order + 1];
    let mut parity = None;
    for (n, xi) in xs.iter().enumerate().take(z_order + 1) {
        if xi.vanishes() {
            continue;
        }
        let p = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
        if *parity.get_or_insert(p) != p {
            return Err(JacobiError::ParityViolation { slot: n, expected: parity.unwrap() });
        }
        let lift = ck_lift(xi, weight + n as i32, lambda, z_order - n)?;
        for (j, c) in lift.coeffs.iter().enumerate() {
            coeffs[n + j] = coeffs[n + j].plus(c);
        }
    }
    let parity = parity.unwrap_or(if weight % 2 == 0 { Parity::Even } else { Parity::Odd });
    Ok(JacobiLikeForm::new_unchecked(weight, lambda.clone(), parity, coeffs))
}

/// Multiplication by `z`, taking an even form of weight `k` to an odd form
/// of weight `k-1`.
pub fn parity_shift<E: LiftAlgebra>(f: &JacobiLikeForm<E>) -> Result<JacobiLikeForm<E>, JacobiError> {
    if f.parity != Parity::Even {
        return Err(JacobiError::NotEven);
    }
    Ok(f.shift_z(1))
}

/// The natural lift of a modular form together with the forms `f_{2l}`
/// whose lifts build it.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalLift {
    pub form: JacobiLikeForm<QuasiModularForm>,
    /// `f_0 = phi, f_2, f_4, ...`, with `f_{2l}` of weight `k + 2l`.
    pub corrections: Vec<ModularForm>,
}

impl NaturalLift {
    /// The cusp-correction part `f_{2l}` for `l >= 1` that is nonzero.
    pub fn nonzero_corrections(&self) -> Vec<(usize, &ModularForm)> {
        self.corrections.iter().enumerate().skip(1).filter(|(_, f)| !f.is_zero()).collect()
    }
}

/// `D^{l-n} f / ((l-n)! (k)_{l-n})` summed over the already chosen `f_{2n}`.
fn partial_lift_sum(corrections: &[ModularForm], k: i32, l: usize) -> QuasiModularForm {
    let mut acc = QuasiModularForm::zero(k as u32 + 2 * l as u32);
    for (n, f) in corrections.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let c = lift_factor(k + 2 * n as i32, l - n).expect("weight at least 4");
        acc = acc.add(&f.derive().derive_n(l - n - 1).scale(&c));
    }
    acc
}

/// The unique index-1 Jacobi-like form above `phi` whose `z^{2l}`
/// coefficient lies in `q^s Q[[q]]`, `s = dim M^{k+2l}`.
pub fn natural_lift(phi: &ModularForm, z_order: usize) -> Result<NaturalLift, JacobiError> {
    let k = phi.weight() as i32;
    if phi.is_zero() {
        let zero = QuasiModularForm::zero(phi.weight());
        let form = JacobiLikeForm::new_unchecked(k, Rational::one(), Parity::Even, vec![zero; z_order + 1]);
        return Ok(NaturalLift { form, corrections: vec![ModularForm::zero(phi.weight()); z_order / 2 + 1] });
    }
    if k < 4 {
        return Err(JacobiError::WeightTooSmall { weight: k });
    }
    let mut corrections = vec![phi.clone()];
    let mut coeffs = vec![QuasiModularForm::zero(phi.weight()); z_order + 1];
    coeffs[0] = phi.to_quasi();
    for l in 1..=z_order / 2 {
        let w = phi.weight() + 2 * l as u32;
        let partial = partial_lift_sum(&corrections, k, l);
        let basis = phi_basis(w, 0)?;
        let f = basis.matching_leading(&partial.expand(basis.dim())).scale(&int(-1));
        coeffs[2 * l] = partial.add(&f.to_quasi());
        corrections.push(f);
    }
    let form = JacobiLikeForm::new_unchecked(k, Rational::one(), Parity::Even, coeffs);
    Ok(NaturalLift { form, corrections })
}

/// Builds the lift `sum_l z^{2l} CK(f_{2l})` from explicit corrections; the
/// natural lift is the case where these satisfy the vanishing conditions.
pub fn lift_from_corrections(
    corrections: &[ModularForm],
    z_order: usize,
) -> Result<JacobiLikeForm<QuasiModularForm>, JacobiError> {
    let k = corrections[0].weight() as i32;
    let mut xs = vec![QuasiModularForm::zero(k as u32); z_order + 1];
    for (l, f) in corrections.iter().enumerate() {
        if 2 * l <= z_order {
            xs[2 * l] = f.to_quasi();
        }
    }
    jlf_assemble(&xs, k, &Rational::one(), z_order)
}

/// `q`-valuations of the even coefficients of a lift, or `None` for zero
/// coefficients, computed to order `q_order`.
pub fn even_valuations(f: &JacobiLikeForm<QuasiModularForm>, q_order: usize) -> Vec<Option<usize>> {
    f.coeffs.iter().step_by(2).map(|c| c.expand(q_order).valuation()).collect()
}

/// Checks the vanishing conditions of a natural lift; returns the first
/// violating `z`-exponent.
pub fn natural_lift_violation(f: &JacobiLikeForm<QuasiModularForm>) -> Option<usize> {
    let k = f.weight();
    for (l, c) in f.coeffs.iter().enumerate().step_by(2).skip(1) {
        let s = crate::modular::dim_modular((k + l as i32) as u32);
        let order = s + 1;
        if let Some(v) = c.expand(order).valuation() {
            if v < s {
                return Some(l);
            }
        }
    }
    None
}
