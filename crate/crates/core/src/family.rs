//! Symbolic family index of the Dirac-Ramond operator.
//!
//! Classes on the total space are polynomials in the vertical Pontryagin
//! symbols `p_i` and the base class `P = p1(X)`. The string condition sets
//! `p1 = -P`. Fiber integration is the free functional that kills monomials
//! of fiber degree below `m` and records the rest as formal symbols
//! `I(mu)`, with powers of `P` passing through.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::charclass::{g2_p1, twisted_ch_direct, witten_kernel_psi};
use crate::jacobi::{jlf_assemble, jlf_decompose, natural_lift, JacobiError, JacobiLikeForm, NaturalLift, Parity};
use crate::linalg::{self, Solution};
use crate::modular::{
    dim_modular, eta_inverse_power, membership_order, one_dimensional_form, phi_basis, pochhammer, FormError,
    ModularForm,
};
use crate::render;
use crate::series::{int, rat, Module, QSeries, Rational};
use crate::sympoly::{gs_exp_capped, gs_mul_capped, pontryagin_names, GradedPolynomial, GradedSeries, Monomial};

/// Smallest `q`-order used internally by the theorem check.
pub const MIN_WORKING_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("p1 is still present; substitute p1 = -P first")]
    UnsubstitutedP1,
    #[error("weight {0} is not one-dimensional")]
    NotOneDimensional(u32),
    #[error("fiber dimension {0} is not supported here")]
    UnsupportedFiberDim(usize),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

/// `P^a * int_Y mu` with `deg mu >= m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiberSymbol {
    /// Cohomological degree on the base: `deg mu - m + 4a`.
    pub degree: u32,
    pub base_power: u32,
    /// Monomial in `p_2, p_3, ...`.
    pub integrand: Monomial,
}

impl FiberSymbol {
    pub fn new(integrand: Monomial, base_power: u32, m: usize) -> Option<Self> {
        assert!(integrand.exponent(0) == 0 && integrand.exponent(1) == 0, "integrand must avoid P and p1");
        let d = integrand.degree();
        (d >= m as u32).then(|| FiberSymbol { degree: d - m as u32 + 4 * base_power, base_power, integrand })
    }

    pub fn render(&self) -> String {
        let i = format!("I({})", self.integrand.render(&pontryagin_names));
        render::product(&[render::power("P", self.base_power), i])
    }
}

/// A finite rational combination of fiber symbols.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiberCombination {
    terms: BTreeMap<FiberSymbol, Rational>,
}

impl FiberCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn symbol(s: FiberSymbol) -> Self {
        let mut out = Self::zero();
        out.add_term(s, Rational::one());
        out
    }

    fn add_term(&mut self, s: FiberSymbol, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(s.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FiberSymbol, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &FiberSymbol) -> Rational {
        self.terms.get(s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&int(-1)))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero();
        if r.is_zero() {
            return out;
        }
        for (s, c) in &self.terms {
            out.add_term(s.clone(), c * r);
        }
        out
    }

    /// Multiplication by `P^e`.
    pub fn times_base(&self, e: u32) -> Self {
        let mut out = Self::zero();
        for (s, c) in &self.terms {
            let t = FiberSymbol { degree: s.degree + 4 * e, base_power: s.base_power + e, integrand: s.integrand.clone() };
            out.add_term(t, c.clone());
        }
        out
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        self.filter(|s| s.degree == degree)
    }

    pub fn truncate(&self, cap: u32) -> Self {
        self.filter(|s| s.degree <= cap)
    }

    /// The specialization `P = 0`.
    pub fn at_base_zero(&self) -> Self {
        self.filter(|s| s.base_power == 0)
    }

    fn filter(&self, keep: impl Fn(&FiberSymbol) -> bool) -> Self {
        FiberCombination { terms: self.terms.iter().filter(|(s, _)| keep(s)).map(|(s, c)| (s.clone(), c.clone())).collect() }
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|s| s.degree).collect();
        d.dedup();
        d
    }

    pub fn render(&self) -> String {
        let terms: Vec<(Rational, String)> = self.terms.iter().map(|(s, c)| (c.clone(), s.render())).collect();
        render::linear_combination(&terms)
    }
}

impl fmt::Display for FiberCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Module for FiberCombination {
    fn zero_like(&self) -> Self {
        Self::zero()
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

/// Integrates a class over the fiber. With `substitute_p1` the string
/// relation `p1 = -P` is applied first; otherwise any `p1` is an error.
pub fn fiber_integrate(
    class: &GradedPolynomial,
    m: usize,
    substitute_p1: bool,
) -> Result<FiberCombination, FamilyError> {
    let class = if substitute_p1 {
        class.substitute_p1()
    } else {
        if class.terms().any(|(mono, _)| mono.exponent(1) > 0) {
            return Err(FamilyError::UnsubstitutedP1);
        }
        class.clone()
    };
    let mut out = FiberCombination::zero();
    for (mono, c) in class.terms() {
        if let Some(s) = FiberSymbol::new(mono.without_base(), mono.exponent(0), m) {
            out.add_term(s, c.clone());
        }
    }
    Ok(out)
}

pub fn fiber_integrate_series(
    s: &GradedSeries,
    m: usize,
    substitute_p1: bool,
) -> Result<QSeries<FiberCombination>, FamilyError> {
    let coeffs = s.coeffs().iter().map(|c| fiber_integrate(c, m, substitute_p1)).collect::<Result<_, _>>()?;
    Ok(QSeries::from_coeffs(coeffs))
}

/// A `q`-series of fiber combinations on the base, truncated in degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SchExpression {
    pub fiber_dim: usize,
    pub degree_cap: u32,
    pub series: QSeries<FiberCombination>,
}

impl SchExpression {
    pub fn q_order(&self) -> usize {
        self.series.order()
    }

    pub fn coefficient(&self, n: usize) -> &FiberCombination {
        self.series.coeff(n)
    }

    /// The degree-`degree` part of the `q^n` coefficient.
    pub fn component(&self, n: usize, degree: u32) -> FiberCombination {
        self.series.coeff(n).homogeneous_part(degree)
    }

    pub fn homogeneous(&self, degree: u32) -> QSeries<FiberCombination> {
        self.series.map(|c| c.homogeneous_part(degree))
    }

    /// `Sch = prod (1-q^n)^{-m} sch`.
    pub fn normalized(&self) -> SchExpression {
        let eta = eta_inverse_power(self.fiber_dim as u32, self.q_order());
        SchExpression { series: self.series.mul_scalar_series(&eta), ..self.clone() }
    }

    pub fn truncate(&self, q_order: usize) -> SchExpression {
        SchExpression { series: self.series.truncate(q_order), ..self.clone() }
    }

    pub fn at_base_zero(&self) -> SchExpression {
        SchExpression { series: self.series.map(FiberCombination::at_base_zero), ..self.clone() }
    }

    /// Degrees `2j` of the wrong parity for `m` must vanish.
    pub fn parity_holds(&self) -> bool {
        let r = (self.fiber_dim % 4) as u32;
        self.series.coeffs().iter().all(|c| c.terms().all(|(s, _)| s.degree % 4 == (4 - r) % 4))
    }

    pub fn render(&self) -> String {
        let mut lines = Vec::new();
        for (n, c) in self.series.coeffs().iter().enumerate() {
            if !c.is_zero() {
                lines.push(format!("q^{n}: {c}"));
            }
        }
        lines.push(format!("O(q^{})", self.q_order() + 1));
        lines.join("\n")
    }
}

/// First place where two expressions differ.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub q_power: usize,
    pub degree: u32,
    pub symbol: String,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Mismatch {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q_power": self.q_power,
            "degree": self.degree,
            "symbol": self.symbol,
            "lhs": crate::json::rational(&self.lhs),
            "rhs": crate::json::rational(&self.rhs),
        })
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^{} degree {} {}: {} vs {}", self.q_power, self.degree, self.symbol, self.lhs, self.rhs)
    }
}

/// Compares coefficient by coefficient up to the common order, scanning
/// `q`-powers first and then degrees.
pub fn first_mismatch(a: &QSeries<FiberCombination>, b: &QSeries<FiberCombination>) -> Option<Mismatch> {
    let order = a.order().min(b.order());
    for n in 0..=order {
        let diff = a.coeff(n).sub(b.coeff(n));
        let first = diff.terms().next().map(|(s, _)| s.clone());
        if let Some(s) = first {
            let s = &s;
            return Some(Mismatch {
                q_power: n,
                degree: s.degree,
                symbol: s.render(),
                lhs: a.coeff(n).coefficient(s),
                rhs: b.coeff(n).coefficient(s),
            });
        }
    }
    None
}

/// A named sub-check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub claim: String,
    pub equal: bool,
    pub lhs: String,
    pub rhs: String,
    pub first_mismatch: Option<Mismatch>,
    pub checks: Vec<Check>,
    pub display: Vec<String>,
}

impl VerificationReport {
    /// Overall status: the main comparison and all sub-checks.
    pub fn passed(&self) -> bool {
        self.equal && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "claim": self.claim,
            "status": if self.passed() { "pass" } else { "fail" },
            "lhs": self.lhs,
            "rhs": self.rhs,
            "first_mismatch": self.first_mismatch.as_ref().map(Mismatch::to_json),
            "checks": self.checks.iter().map(|c| serde_json::json!({
                "name": c.name, "passed": c.passed, "detail": c.detail,
            })).collect::<Vec<_>>(),
            "display": self.display,
        })
    }
}

/// `int_Y A-hat(V) ch(V_n)` for `n = 0 .. q_order` through base degree
/// `degree_cap`, from the direct expansion of the `V_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexTower {
    pub fiber_dim: usize,
    pub degree_cap: u32,
    pub classes: Vec<FiberCombination>,
}

impl IndexTower {
    pub fn new(m: usize, degree_cap: u32, q_order: usize) -> Self {
        let t = twisted_ch_direct(m, q_order, m as u32 + degree_cap, q_order);
        let classes = t
            .products
            .iter()
            .map(|p| fiber_integrate(p, m, true).expect("substituted").truncate(degree_cap))
            .collect();
        IndexTower { fiber_dim: m, degree_cap, classes }
    }

    pub fn q_order(&self) -> usize {
        self.classes.len() - 1
    }

    /// `ch_j(ind D^{V_n})`, of degree `2j`.
    pub fn ch(&self, n: usize, j: u32) -> FiberCombination {
        self.classes[n].homogeneous_part(2 * j)
    }

    /// `Sch(F; q) = sum_n q^n ch(ind D^{V_n})`.
    pub fn sch_normalized(&self) -> SchExpression {
        SchExpression {
            fiber_dim: self.fiber_dim,
            degree_cap: self.degree_cap,
            series: QSeries::from_coeffs(self.classes.clone()),
        }
    }
}

/// `ch_j(ind D^{V_n})` with `p1 = -P` as a symbol combination.
pub fn twisted_index_chern(m: usize, n: usize, j: u32) -> FiberCombination {
    IndexTower::new(m, 2 * j, n).ch(n, j)
}

/// `sch(F; q) = int_Y psi(1, q) e^{G2 p1}` with `p1 = -P`.
pub fn sch_series(m: usize, degree_cap: u32, q_order: usize) -> SchExpression {
    let psi = witten_kernel_psi(m, q_order, m as u32 + degree_cap);
    sch_from_psi(m, degree_cap, q_order, &psi)
}

fn sch_from_psi(m: usize, degree_cap: u32, q_order: usize, psi: &crate::series::ZSeries<GradedSeries>) -> SchExpression {
    let cap = m as u32 + degree_cap;
    let at_one = crate::sympoly::collapse_z(psi);
    let total = gs_mul_capped(&at_one, &gs_exp_capped(&g2_p1(q_order), cap), cap);
    let series = fiber_integrate_series(&total, m, true).expect("substituted").map(|c| c.truncate(degree_cap));
    SchExpression { fiber_dim: m, degree_cap, series }
}

/// Coefficients `c(j, n)` with `ch_j(ind D^{V_n}) = c(j, n) ch_j(ind D)` when
/// `p1(X) = 0`, read off `E_{m/2+j} prod (1-q^n)^{-m}`.
pub fn c_table(m: usize, j: u32, n_max: usize) -> Result<Vec<Rational>, FamilyError> {
    let w = m as u32 / 2 + j;
    let form = one_dimensional_form(w).map_err(|_| FamilyError::NotOneDimensional(w))?;
    let s = form.expand(n_max).mul(&eta_inverse_power(m as u32, n_max));
    Ok(s.into_coeffs())
}

/// Checks `ch_j(V_n) = c(j, n) ch_j(V_0)` at `P = 0` on the symbols.
pub fn verify_c_table(m: usize, j: u32, n_max: usize, tower: &IndexTower) -> Result<Check, FamilyError> {
    let table = c_table(m, j, n_max)?;
    let base = tower.ch(0, j).at_base_zero();
    for (n, c) in table.iter().enumerate() {
        let lhs = tower.ch(n, j).at_base_zero();
        if lhs != base.scale(c) {
            return Ok(Check::new(
                "c_table",
                false,
                format!("m={m} j={j} n={n}: ch_j(V_n) = {lhs}, expected {c} * ({base})"),
            ));
        }
    }
    Ok(Check::new("c_table", true, format!("m={m} j={j} n<={n_max}")))
}

/// `ch_j(V_n) = sum_i coefficients[i] ch_j(V_i)` for `n >= s` at `P = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyRelations {
    pub fiber_dim: usize,
    /// The `ch_j` index; the relation lives in degree `2j`.
    pub j: u32,
    pub weight: u32,
    pub basis: Vec<ModularForm>,
    /// `(n, coefficients)` for `n = s .. n_max`.
    pub relations: Vec<(usize, Vec<Rational>)>,
    pub verified: bool,
}

impl AnomalyRelations {
    pub fn render(&self) -> Vec<String> {
        self.relations
            .iter()
            .map(|(n, cs)| {
                let terms: Vec<(Rational, String)> =
                    cs.iter().enumerate().map(|(i, c)| (c.clone(), class_name(self.j, i))).collect();
                format!("{} = {}", class_name(self.j, *n), render::linear_combination(&terms))
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "fiber_dim": self.fiber_dim,
            "j": self.j,
            "weight": self.weight,
            "basis": self.basis.iter().map(|f| f.render_delta_basis()).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(|(n, cs)| serde_json::json!({
                "n": n, "coefficients": cs.iter().map(crate::json::rational).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "verified": self.verified,
            "text": self.render(),
        })
    }
}

/// Relations among the degree-2 classes (`m = 2 mod 4`) or, for `m = 20`
/// where those vanish, among the degree-4 classes.
pub fn anomaly_relations(m: usize, n_max: usize) -> Result<AnomalyRelations, FamilyError> {
    let j = match m % 4 {
        2 => 1,
        0 if m == 20 => 2,
        _ => return Err(FamilyError::UnsupportedFiberDim(m)),
    };
    let w = m as u32 / 2 + j;
    let basis = phi_basis(w, m as u32)?;
    let s = basis.dim();
    let eta = eta_inverse_power(m as u32, n_max);
    let normalized: Vec<QSeries<Rational>> = basis.elements.iter().map(|f| f.expand(n_max).mul(&eta)).collect();
    let relations: Vec<(usize, Vec<Rational>)> =
        (s..=n_max).map(|n| (n, normalized.iter().map(|g| g.coeff(n).clone()).collect())).collect();

    let tower = IndexTower::new(m, 2 * j, n_max);
    let verified = relations.iter().all(|(n, cs)| {
        let rhs = cs
            .iter()
            .enumerate()
            .fold(FiberCombination::zero(), |acc, (i, c)| acc.add(&tower.ch(i, j).at_base_zero().scale(c)));
        tower.ch(*n, j).at_base_zero() == rhs
    });
    Ok(AnomalyRelations { fiber_dim: m, j, weight: w, basis: basis.elements, relations, verified })
}

/// Display name of `ch_j(ind D^{V_i})`.
pub fn class_name(j: u32, i: usize) -> String {
    match (j, i) {
        (0, 0) => "nu_0".to_string(),
        (_, 0) => format!("ch_{j}(ind D)"),
        _ => format!("ch_{j}(ind D^{{V_{i}}})"),
    }
}

/// A class `P^l ch_j(V_i)` used as a generator in relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGenerator {
    pub base_power: u32,
    pub j: u32,
    pub i: usize,
}

impl ClassGenerator {
    pub fn name(&self) -> String {
        let p = render::power("p1(X)", self.base_power);
        render::product(&[class_name(self.j, self.i), p])
    }
}

/// Expresses `ch_j(V_n)` in the classes `P^l ch_{j-2l}(V_i)` with
/// `i < dim M^{m/2+j-2l}`. Returns `None` if no unique combination exists.
pub fn class_relation(tower: &IndexTower, n: usize, j: u32) -> Option<Vec<(ClassGenerator, Rational)>> {
    let m = tower.fiber_dim;
    let mut gens = Vec::new();
    for l in 0..=j / 2 {
        let jj = j - 2 * l;
        let s = dim_modular(m as u32 / 2 + jj);
        for i in 0..s {
            gens.push(ClassGenerator { base_power: l, j: jj, i });
        }
    }
    let values: Vec<FiberCombination> =
        gens.iter().map(|g| tower.ch(g.i, g.j).times_base(g.base_power)).collect();
    let target = tower.ch(n, j);
    let mut symbols: Vec<FiberSymbol> = target.terms().map(|(s, _)| s.clone()).collect();
    for v in &values {
        symbols.extend(v.terms().map(|(s, _)| s.clone()));
    }
    symbols.sort();
    symbols.dedup();
    let a: Vec<Vec<Rational>> = symbols.iter().map(|s| values.iter().map(|v| v.coefficient(s)).collect()).collect();
    let b: Vec<Rational> = symbols.iter().map(|s| target.coefficient(s)).collect();
    match linalg::solve(&a, &b) {
        Solution::Unique(x) => Some(gens.into_iter().zip(x).collect()),
        _ => None,
    }
}

pub fn render_relation(n: usize, j: u32, rel: &[(ClassGenerator, Rational)]) -> String {
    let terms: Vec<(Rational, String)> = rel.iter().map(|(g, c)| (c.clone(), g.name())).collect();
    format!("{} = {}", class_name(j, n), render::linear_combination(&terms))
}

/// One `ch_j(V_i) phi_{j,i}^natural` term of the theorem.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftTerm {
    pub j: u32,
    pub i: usize,
    pub weight: u32,
    pub phi: ModularForm,
    pub lift: NaturalLift,
    /// Largest `l` with `2j + 4l <= degree_cap`.
    pub max_l: usize,
}

/// The terms `ch_j(V_i) phi^natural_{j,i}` for `2j <= degree_cap`.
pub fn lift_terms(m: usize, degree_cap: u32) -> Result<Vec<LiftTerm>, FamilyError> {
    let mut out = Vec::new();
    for j in 0..=degree_cap / 2 {
        let w = m as u32 / 2 + j;
        if w % 2 == 1 {
            continue;
        }
        let basis = phi_basis(w, m as u32)?;
        let max_l = ((degree_cap - 2 * j) / 4) as usize;
        for (i, phi) in basis.elements.into_iter().enumerate() {
            let lift = natural_lift(&phi, 2 * max_l)?;
            out.push(LiftTerm { j, i, weight: w, phi, lift, max_l });
        }
    }
    Ok(out)
}

/// `sum_{j,i} ch_j(V_i) sum_l chi_{2l} (P/2)^l` truncated to degree.
pub fn theorem_rhs(m: usize, degree_cap: u32, q_order: usize, terms: &[LiftTerm], tower: &IndexTower) -> SchExpression {
    let mut series = QSeries::zero_with(q_order, &FiberCombination::zero());
    for t in terms {
        let ch = tower.ch(t.i, t.j);
        if ch.is_zero() {
            continue;
        }
        for l in 0..=t.max_l {
            let chi = t.lift.form.coeff(2 * l).expand(q_order);
            let class = ch.times_base(l as u32).scale(&rat(1, 1 << l));
            for n in 0..=q_order {
                let c = chi.coeff(n);
                if !c.is_zero() {
                    series.set(n, series.coeff(n).add(&class.scale(c)));
                }
            }
        }
    }
    SchExpression { fiber_dim: m, degree_cap, series }
}

/// The working `q`-order: large enough for the membership tests used on
/// every intermediate coefficient.
pub fn working_q_order(m: usize, degree_cap: u32, q_order: usize) -> usize {
    let top = m as u32 / 2 + degree_cap / 2;
    let need = (m as u32 / 2..=top).map(|w| membership_order(w, true)).max().unwrap_or(0);
    q_order.max(need).max(MIN_WORKING_ORDER)
}

/// Intermediate objects of the proof for one `(m, degree_cap)`.
pub struct ProofData {
    pub fiber_dim: usize,
    pub degree_cap: u32,
    pub q_order: usize,
    /// `Psi(z, q)` with index `-p1/2`.
    pub psi_form: JacobiLikeForm<GradedSeries>,
    pub xi: Vec<GradedSeries>,
    pub sch: SchExpression,
    pub tower: IndexTower,
    pub terms: Vec<LiftTerm>,
}

/// `Psi = z^{-m/2} [psi - (terms of z-degree <= (m+r)/2 - 2)] e^{G2 p1 z^2}`.
fn build_psi(m: usize, degree_cap: u32, psi: &crate::series::ZSeries<GradedSeries>, q_order: usize) -> Vec<GradedSeries> {
    let r = m % 4;
    let cutoff = (m + r) / 2;
    let g2p1 = g2_p1(q_order);
    let zero = GradedSeries::zero_with(q_order, &GradedPolynomial::zero());
    let n_max = (degree_cap / 2) as usize;
    let mut powers = vec![crate::charclass::graded_one(q_order)];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut chi = zero.clone();
        let mut t = 0;
        // z^n receives a_e z^{e - m/2} (G2 p1 z^2)^t / t! with e = n + m/2 - 2t
        while 2 * t <= n + m / 2 {
            let e = n + m / 2 - 2 * t;
            if e < cutoff {
                break;
            }
            if e.is_multiple_of(2) && e <= psi.order() {
                while powers.len() <= t {
                    let next = powers.last().unwrap().mul(&g2p1);
                    powers.push(next);
                }
                let f = Rational::from_integer(crate::modular::factorial(t)).recip();
                chi = chi.add(&psi.coeff(e).mul(&powers[t]).scale(&f));
            }
            t += 1;
        }
        out.push(chi);
    }
    out
}

impl ProofData {
    pub fn new(m: usize, degree_cap: u32, q_order: usize) -> Result<Self, FamilyError> {
        assert!(m.is_multiple_of(2) && m >= 2, "fiber dimension must be even");
        let cap = m as u32 + degree_cap;
        let psi = witten_kernel_psi(m, q_order, cap);
        let sch = sch_from_psi(m, degree_cap, q_order, &psi);
        let chis = build_psi(m, degree_cap, &psi, q_order);
        let lambda = GradedPolynomial::p(1).scale(&rat(-1, 2));
        let parity = if m.is_multiple_of(4) { Parity::Even } else { Parity::Odd };
        let psi_form = JacobiLikeForm::new(m as i32 / 2, lambda, parity, chis)?;
        let xi = jlf_decompose(&psi_form)?;
        let tower = IndexTower::new(m, degree_cap, q_order);
        let terms = lift_terms(m, degree_cap)?;
        Ok(ProofData { fiber_dim: m, degree_cap, q_order, psi_form, xi, sch, tower, terms })
    }

    /// `chi_n` has polynomial degree `m + 2n`.
    fn check_psi_degrees(&self) -> Check {
        for (n, chi) in self.psi_form.coeffs().iter().enumerate() {
            let d = (self.fiber_dim + 2 * n) as u32;
            if let Some(c) = chi.coeffs().iter().find(|c| !c.is_homogeneous_of(d)) {
                return Check::new("psi_construction", false, format!("chi_{n} has a term off degree {d}: {c}"));
            }
        }
        Check::new(
            "psi_construction",
            true,
            format!("chi_n quasimodular of weight m/2+n and degree m+2n for n <= {}", self.psi_form.z_order()),
        )
    }

    fn check_psi_integral(&self) -> Check {
        let mut total = GradedSeries::zero_with(self.q_order, &GradedPolynomial::zero());
        for chi in self.psi_form.coeffs() {
            total = total.add(chi);
        }
        let integral = fiber_integrate_series(&total, self.fiber_dim, true).expect("substituted");
        match first_mismatch(&integral, &self.sch.series) {
            None => Check::new("psi_integral", true, "int_Y Psi(1,q) = sch(F;q)"),
            Some(mm) => Check::new("psi_integral", false, mm.to_string()),
        }
    }

    fn check_reassembly(&self) -> Result<Check, FamilyError> {
        let again = jlf_assemble(&self.xi, self.psi_form.weight(), self.psi_form.index(), self.psi_form.z_order())?;
        let ok = again.coeffs() == self.psi_form.coeffs();
        Ok(Check::new("reassembly", ok, "Psi = sum_n z^n CK(xi_n) with index -p1/2"))
    }

    /// `int xi_{j0} = sum_{j,i} ch_j(V_i) (P/2)^{(j0-j)/2} f^{j0-j}_{j,i}`.
    fn check_induction(&self) -> Check {
        let m = self.fiber_dim;
        for (j0, xi) in self.xi.iter().enumerate() {
            let lhs = fiber_integrate_series(xi, m, true).expect("substituted");
            let mut rhs = QSeries::zero_with(self.q_order, &FiberCombination::zero());
            for t in &self.terms {
                let j0 = j0 as u32;
                if t.j > j0 || (j0 - t.j) % 2 == 1 {
                    continue;
                }
                let l = ((j0 - t.j) / 2) as usize;
                let Some(f) = t.lift.corrections.get(l) else { continue };
                if f.is_zero() {
                    continue;
                }
                let class = self.tower.ch(t.i, t.j).times_base(l as u32).scale(&rat(1, 1 << l));
                let fe = f.expand(self.q_order);
                for n in 0..=self.q_order {
                    if !fe.coeff(n).is_zero() {
                        rhs.set(n, rhs.coeff(n).add(&class.scale(fe.coeff(n))));
                    }
                }
            }
            if let Some(mm) = first_mismatch(&lhs, &rhs) {
                return Check::new("induction", false, format!("xi_{j0}: {mm}"));
            }
        }
        Check::new("induction", true, format!("int xi_j0 matches the lift corrections for j0 <= {}", self.xi.len() - 1))
    }

    fn check_normalized(&self) -> Check {
        let lhs = self.sch.normalized();
        let rhs = self.tower.sch_normalized();
        match first_mismatch(&lhs.series, &rhs.series) {
            None => Check::new("sch_vs_index_tower", true, "prod(1-q^n)^{-m} sch = sum_n q^n ch(ind D^{V_n})"),
            Some(mm) => Check::new("sch_vs_index_tower", false, mm.to_string()),
        }
    }
}

/// Exact check of the main identity for `sch(F;q)` in the free symbol
/// model, with the intermediate steps of its proof.
pub fn verify_main_theorem(m: usize, degree_cap: u32, q_order: usize) -> Result<VerificationReport, FamilyError> {
    let wq = working_q_order(m, degree_cap, q_order);
    let data = ProofData::new(m, degree_cap, wq)?;
    let rhs = theorem_rhs(m, degree_cap, wq, &data.terms, &data.tower);
    let mismatch = first_mismatch(&data.sch.series, &rhs.series);
    let mut checks = vec![data.check_psi_degrees(), data.check_psi_integral(), data.check_reassembly()?];
    checks.push(data.check_induction());
    checks.push(data.check_normalized());
    checks.push(Check::new("parity", data.sch.parity_holds(), "wrong-parity degrees vanish"));
    let q0 = data.sch.normalized().component(0, 0) == fiber_integrate(&crate::charclass::a_hat_class(m, m as u32), m, true)?;
    checks.push(Check::new("untwisted_index", q0, "q^0 degree-0 part of Sch is int_Y A-hat(V)"));

    let display = if mismatch.is_none() {
        let mut d = vec![render_grouped(&data.terms, degree_cap)];
        if degree_cap.is_multiple_of(4) || m % 4 == 2 {
            d.push(render_component(&data.terms, degree_cap / 2));
        }
        d
    } else {
        Vec::new()
    };
    let shown = q_order.min(wq);
    Ok(VerificationReport {
        claim: format!("main_theorem(m={m}, degree<={degree_cap}, q_order={q_order})"),
        equal: mismatch.is_none(),
        lhs: data.sch.truncate(shown).render(),
        rhs: rhs.truncate(shown).render(),
        first_mismatch: mismatch,
        checks,
        display,
    })
}

fn derivative_name(name: &str, n: usize) -> String {
    let base = parenthesize(name);
    match n {
        0 => name.to_string(),
        1..=3 => format!("{base}{}", "'".repeat(n)),
        _ => format!("{base}^({n})"),
    }
}

/// `(k)_1` or `(l!*(k)_l)`.
fn lift_denominator(k: u32, l: usize) -> String {
    if l == 1 {
        format!("({k})_1")
    } else {
        format!("({l}!*({k})_{l})")
    }
}

fn is_composite(name: &str) -> bool {
    name.contains([' ', '^', '*', '+', '-'])
}

fn parenthesize(name: &str) -> String {
    if is_composite(name) {
        format!("({name})")
    } else {
        name.to_string()
    }
}

fn base_power(l: usize) -> String {
    match l {
        0 => String::new(),
        1 => "(p1(X)/2)".to_string(),
        _ => format!("(p1(X)/2)^{l}"),
    }
}

/// The coefficient of `(P/2)^l` in a lift term: `(denominator, body)`
/// where the term reads `1/denominator * body`, e.g. `("(4)_1", "E4'")` or
/// `("(4!*(4)_4)", "(E4^(4) - 240*Delta)")`.
fn lift_coefficient(t: &LiftTerm, l: usize) -> (Option<String>, String) {
    let name = t.phi.render_delta_basis();
    if l == 0 {
        return (None, parenthesize(&name));
    }
    let k = t.weight;
    let fs = &t.lift.corrections;
    let middle_zero = (1..l).all(|n| fs[n].is_zero());
    if middle_zero {
        let head = Some(lift_denominator(k, l));
        let d = derivative_name(&name, l);
        if fs[l].is_zero() {
            return (head, d);
        }
        // f_{2l} in units of 1/(l! (k)_l)
        let unit = pochhammer(&int(k as i64), l) * Rational::from_integer(crate::modular::factorial(l));
        let scaled = fs[l].scale(&unit);
        let coords = scaled.delta_basis_coordinates();
        let names: Vec<String> = crate::modular::delta_basis(scaled.weight()).into_iter().map(|(_, n)| n).collect();
        let mut terms: Vec<(Rational, String)> = vec![(Rational::one(), d)];
        terms.extend(coords.into_iter().zip(names));
        return (head, format!("({})", render::linear_combination(&terms)));
    }
    let mut parts: Vec<(Rational, String)> = Vec::new();
    for (n, f) in fs.iter().enumerate().take(l + 1) {
        if f.is_zero() {
            continue;
        }
        let fname = if n == 0 { name.clone() } else { f.render_delta_basis() };
        if n == l {
            parts.push((Rational::one(), parenthesize(&fname)));
        } else {
            let d = derivative_name(&fname, l - n);
            parts.push((Rational::one(), format!("1/{}*{d}", lift_denominator(k + 2 * n as u32, l - n))));
        }
    }
    (None, format!("({})", render::linear_combination(&parts)))
}

/// Grouped rendering by index class, e.g.
/// `nu_0 * ( E4 + 1/(4)_1 * E4' * (p1(X)/2) + ... )`.
pub fn render_grouped(terms: &[LiftTerm], degree_cap: u32) -> String {
    let mut lines = vec![format!("sch_{{<={}}}(F;q) =", degree_cap / 2)];
    for (idx, t) in terms.iter().enumerate() {
        let mut parts = Vec::new();
        for l in 0..=t.max_l {
            let (head, body) = lift_coefficient(t, l);
            let pieces: Vec<String> = head.map(|h| format!("1/{h}")).into_iter().chain([body]).chain(Some(base_power(l)).filter(|s| !s.is_empty())).collect();
            parts.push(pieces.join(" * "));
        }
        let group = if parts.len() == 1 { parts.pop().unwrap() } else { format!("( {} )", parts.join(" + ")) };
        let lead = if idx == 0 { "    " } else { "  + " };
        lines.push(format!("{lead}{} * {group}", class_name(t.j, t.i)));
    }
    lines.join("\n")
}

/// The degree-`2 j0` component: `l = 0` terms first, then the lifted
/// terms by increasing `j`.
pub fn render_component(terms: &[LiftTerm], j0: u32) -> String {
    let mut lines = vec![format!("sch_{j0}(F;q) =")];
    let mut entries = Vec::new();
    for t in terms.iter().filter(|t| t.j == j0) {
        entries.push(format!("{} * {}", class_name(t.j, t.i), lift_coefficient(t, 0).1));
    }
    for t in terms.iter().filter(|t| t.j < j0 && (j0 - t.j).is_multiple_of(2)) {
        let l = ((j0 - t.j) / 2) as usize;
        if l > t.max_l {
            continue;
        }
        let (head, body) = lift_coefficient(t, l);
        let name = class_name(t.j, t.i);
        let lead = match head {
            Some(h) => format!("{name}/{h}"),
            None => name,
        };
        entries.push(format!("{lead} * {body} * {}", base_power(l)));
    }
    for (idx, e) in entries.into_iter().enumerate() {
        let lead = if idx == 0 { "    " } else { "  + " };
        lines.push(format!("{lead}{e}"));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(exps: Vec<u32>, a: u32, m: usize) -> FiberSymbol {
        FiberSymbol::new(Monomial::new(exps), a, m).unwrap()
    }

    #[test]
    fn integration_rules() {
        let p2 = GradedPolynomial::p(2);
        let m = 8;
        let base2 = GradedPolynomial::base().mul(&GradedPolynomial::base());
        assert!(fiber_integrate(&base2, m, false).unwrap().is_zero());
        let i = fiber_integrate(&p2, m, false).unwrap();
        assert_eq!(i, FiberCombination::symbol(sym(vec![0, 0, 1], 0, m)));
        assert_eq!(i.degrees(), vec![0]);
        let pi = fiber_integrate(&GradedPolynomial::base().mul(&p2), m, false).unwrap();
        assert_eq!(pi.degrees(), vec![4]);
        assert_eq!(pi, i.times_base(1));
        assert_eq!(fiber_integrate(&GradedPolynomial::p(1), m, false), Err(FamilyError::UnsubstitutedP1));
    }

    #[test]
    fn low_degree_index_classes() {
        let m = 8;
        let tower = IndexTower::new(m, 4, 1);
        let i_p2 = FiberCombination::symbol(sym(vec![0, 0, 1], 0, m));
        assert_eq!(tower.ch(0, 0), i_p2.scale(&rat(-1, 1440)));
        assert_eq!(tower.ch(1, 0), i_p2.scale(&rat(-31, 180)));
        let i_p3 = FiberCombination::symbol(sym(vec![0, 0, 0, 1], 0, m));
        let expected = i_p3.scale(&rat(62, 7560)).add(&i_p2.times_base(1).scale(&rat(13, 7560)));
        assert_eq!(tower.ch(1, 2), expected);
        assert_eq!(twisted_index_chern(8, 1, 2), expected);
    }

    #[test]
    fn c_tables() {
        let ints = |v: Vec<Rational>| v.into_iter().map(|x| x.to_integer().try_into().unwrap()).collect::<Vec<i64>>();
        assert_eq!(ints(c_table(8, 0, 3).unwrap()), vec![1, 248, 4124, 34752]);
        assert_eq!(ints(c_table(8, 2, 2).unwrap()), vec![1, -496, -20620]);
        assert_eq!(ints(c_table(6, 1, 1).unwrap()), vec![1, 246]);
        assert_eq!(c_table(8, 8, 2), Err(FamilyError::NotOneDimensional(12)));
        assert_eq!(c_table(8, 1, 2), Err(FamilyError::NotOneDimensional(5)));
    }

    #[test]
    fn anomaly_m6_and_m10() {
        let a = anomaly_relations(6, 2).unwrap();
        assert!(a.verified);
        assert_eq!(a.relations[0], (1, vec![int(246)]));
        let b = anomaly_relations(10, 1).unwrap();
        assert_eq!(b.relations[0], (1, vec![int(-494)]));
        assert!(b.verified);
        assert!(matches!(anomaly_relations(8, 1), Err(FamilyError::UnsupportedFiberDim(8))));
    }

    #[test]
    fn sch_low_degree() {
        let s = sch_series(8, 4, 4);
        let e4 = ModularForm::e4().expand(4);
        let de4 = ModularForm::e4().derive().expand(4);
        let e6 = ModularForm::e6().expand(4);
        let tower = IndexTower::new(8, 4, 0);
        let nu = tower.ch(0, 0);
        let ch2 = tower.ch(0, 2);
        for n in 0..=4 {
            assert_eq!(s.component(n, 0), nu.scale(e4.coeff(n)));
            let expected = nu.times_base(1).scale(&(de4.coeff(n) * rat(1, 8))).add(&ch2.scale(e6.coeff(n)));
            assert_eq!(s.component(n, 4), expected, "q^{n}");
        }
        assert!(s.parity_holds());
    }

    #[test]
    fn p1_relations_degree_four() {
        let tower = IndexTower::new(8, 4, 2);
        let rel = class_relation(&tower, 1, 2).unwrap();
        assert_eq!(render_relation(1, 2, &rel), "ch_2(ind D^{V_1}) = -496*ch_2(ind D) + 30*nu_0*p1(X)");
    }

    #[test]
    fn derivative_names() {
        assert_eq!(derivative_name("E4", 1), "E4'");
        assert_eq!(derivative_name("E4", 4), "E4^(4)");
        assert_eq!(derivative_name("E4^3 - 728*Delta", 2), "(E4^3 - 728*Delta)''");
    }
}
