//! Level-one modular forms `Q[E4, E6]` and quasimodular forms `Q[E2, E4, E6]`.
//!
//! Forms are stored symbolically as polynomials in the Eisenstein generators
//! and expanded in `q` on demand. Membership of a bare `q`-series in a space of
//! (quasi)modular forms is decided by exact linear algebra against the
//! monomial basis, with a safety margin of ten extra coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, Solution};
use crate::render;
use crate::series::{int, rat, QSeries, Rational};

/// Extra coefficients required beyond the dimension in membership tests.
pub const MEMBERSHIP_MARGIN: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("series is not in the space of weight-{weight} forms (first residual at q^{exponent})")]
    NotInSpace { weight: u32, exponent: usize },
    #[error("membership in weight {weight} needs order {needed}, have {have}")]
    InsufficientOrder { weight: u32, needed: usize, have: usize },
    #[error("weight {0} is odd")]
    OddWeight(u32),
    #[error("weight mismatch: {0} vs {1}")]
    WeightMismatch(u32, u32),
    #[error("weight {0} is not one-dimensional")]
    NotOneDimensional(u32),
}

/// Bernoulli numbers `B_0 .. B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = Rational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * Rational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli(two_k: usize) -> Rational {
    assert!(two_k >= 2 && two_k.is_multiple_of(2), "bernoulli expects an even index >= 2");
    bernoulli_numbers(two_k).pop().unwrap()
}

/// Divisor power sum `sigma_k(n)`.
pub fn sigma(k: u32, n: usize) -> BigInt {
    let mut total = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            total += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                total += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    total
}

/// `E_{2k} = 1 - (4k / B_{2k}) sum sigma_{2k-1}(n) q^n` to the given order.
pub fn eisenstein_series(two_k: usize, order: usize) -> QSeries<Rational> {
    let factor = -int(2 * two_k as i64) / bernoulli(two_k);
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(Rational::one());
    for n in 1..=order {
        coeffs.push(&factor * Rational::from_integer(sigma(two_k as u32 - 1, n)));
    }
    QSeries::from_coeffs(coeffs)
}

/// The scalar `c` with `G_{2k} = c E_{2k}`, namely `-B_{2k}/(4k)`.
pub fn g_normalization(two_k: usize) -> Rational {
    -bernoulli(two_k) / int(2 * two_k as i64)
}

/// `prod_{n>=1} (1 - q^n)^{-m}`.
pub fn eta_inverse_power(m: u32, order: usize) -> QSeries<Rational> {
    eta_power(m as i64, order, true)
}

/// `prod_{n>=1} (1 - q^n)^{e}` for any integer `e`.
pub fn eta_product_power(e: i64, order: usize) -> QSeries<Rational> {
    eta_power(e, order, false)
}

fn eta_power(e: i64, order: usize, invert: bool) -> QSeries<Rational> {
    let e = if invert { -e } else { e };
    if e == 0 {
        return QSeries::one(order);
    }
    // log prod (1-q^n)^e = -e sum_N sigma_{-1}-type sum: sum_n sum_k q^{nk}/k
    let mut log = QSeries::zero(order);
    for n in 1..=order {
        let mut k = 1;
        while n * k <= order {
            let c = log.coeff(n * k) - rat(e, k as i64);
            log.set(n * k, c);
            k += 1;
        }
    }
    log.exp().expect("log has zero constant term")
}

/// Number of monomials `E4^a E6^b` of weight `k`.
pub fn dim_modular(k: u32) -> usize {
    modular_monomials(k).len()
}

/// The classical dimension formula for level-one modular forms.
pub fn dim_formula(k: u32) -> usize {
    if k % 2 == 1 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base
    } else {
        base + 1
    }
}

/// Exponent pairs `(a, b)` with `4a + 6b = k`, `a` descending.
pub fn modular_monomials(k: u32) -> Vec<(u32, u32)> {
    if k % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut a = k / 4;
    loop {
        let rest = k - 4 * a;
        if rest.is_multiple_of(6) {
            out.push((a, rest / 6));
        }
        if a == 0 {
            break;
        }
        a -= 1;
    }
    out
}

/// Exponent triples `(i, a, b)` with `2i + 4a + 6b = k`, ordered by `i`
/// ascending and then `a` descending.
pub fn quasi_monomials(k: u32) -> Vec<(u32, u32, u32)> {
    if k % 2 == 1 {
        return Vec::new();
    }
    (0..=k / 2)
        .flat_map(|i| modular_monomials(k - 2 * i).into_iter().map(move |(a, b)| (i, a, b)))
        .collect()
}

/// Memoized powers of `E2`, `E4`, `E6` for one expansion order. Local to a
/// computation; never shared.
pub struct Generators {
    order: usize,
    powers: [Vec<QSeries<Rational>>; 3],
}

impl Generators {
    pub fn new(order: usize) -> Self {
        let base = [
            eisenstein_series(2, order),
            eisenstein_series(4, order),
            eisenstein_series(6, order),
        ];
        Generators {
            order,
            powers: base.map(|s| vec![QSeries::one(order), s]),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn power(&mut self, which: usize, e: u32) -> QSeries<Rational> {
        let table = &mut self.powers[which];
        while table.len() <= e as usize {
            let next = table.last().unwrap().mul(&table[1]);
            table.push(next);
        }
        table[e as usize].clone()
    }

    pub fn monomial(&mut self, i: u32, a: u32, b: u32) -> QSeries<Rational> {
        let mut s = self.power(0, i);
        if a > 0 {
            s = s.mul(&self.power(1, a));
        }
        if b > 0 {
            s = s.mul(&self.power(2, b));
        }
        s
    }
}

/// An element of `M^k = Q[E4, E6]_k`.
#[derive(Clone, Debug)]
pub struct ModularForm {
    weight: u32,
    terms: BTreeMap<(u32, u32), Rational>,
    cache: Option<QSeries<Rational>>,
}

impl PartialEq for ModularForm {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && (self.weight == other.weight || self.terms.is_empty())
    }
}

impl ModularForm {
    pub fn zero(weight: u32) -> Self {
        ModularForm { weight, terms: BTreeMap::new(), cache: None }
    }

    /// The constant `c` as a weight-0 form.
    pub fn constant(c: Rational) -> Self {
        Self::from_terms(0, [((0, 0), c)])
    }

    pub fn from_terms(weight: u32, terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Self {
        let mut f = Self::zero(weight);
        for ((a, b), c) in terms {
            assert_eq!(4 * a + 6 * b, weight, "monomial E4^{a} E6^{b} has the wrong weight");
            f.add_term((a, b), c);
        }
        f
    }

    fn add_term(&mut self, key: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn e4() -> Self {
        Self::from_terms(4, [((1, 0), Rational::one())])
    }

    pub fn e6() -> Self {
        Self::from_terms(6, [((0, 1), Rational::one())])
    }

    /// `(E4^3 - E6^2) / 1728`.
    pub fn delta() -> Self {
        Self::from_terms(12, [((3, 0), rat(1, 1728)), ((0, 2), rat(-1, 1728))])
    }

    /// Stores an expansion computed from the monomials.
    pub fn with_expansion(mut self, order: usize) -> Self {
        self.cache = Some(self.expand(order));
        self
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomials in canonical order (`a` descending).
    pub fn monomials(&self) -> Vec<((u32, u32), Rational)> {
        self.terms.iter().rev().map(|(k, c)| (*k, c.clone())).collect()
    }

    pub fn coefficient(&self, a: u32, b: u32) -> Rational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn cached_expansion(&self) -> Option<&QSeries<Rational>> {
        self.cache.as_ref()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if rhs.is_zero() {
            return Self { cache: None, ..self.clone() };
        }
        if self.is_zero() {
            return Self { cache: None, ..rhs.clone() };
        }
        assert_eq!(self.weight, rhs.weight, "adding forms of different weights");
        let mut out = Self { cache: None, ..self.clone() };
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&int(-1)))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.weight);
        for (k, c) in &self.terms {
            out.add_term(*k, c * r);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.weight + rhs.weight);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    pub fn expand(&self, order: usize) -> QSeries<Rational> {
        if let Some(c) = &self.cache {
            if c.order() >= order {
                return c.truncate(order);
            }
        }
        let mut gens = Generators::new(order);
        self.expand_with(&mut gens)
    }

    pub fn expand_with(&self, gens: &mut Generators) -> QSeries<Rational> {
        let mut s = QSeries::zero(gens.order());
        for ((a, b), c) in &self.terms {
            s = s.add(&gens.monomial(0, *a, *b).scale(c));
        }
        s
    }

    pub fn to_quasi(&self) -> QuasiModularForm {
        QuasiModularForm::from_terms(
            self.weight,
            self.terms.iter().map(|((a, b), c)| ((0, *a, *b), c.clone())),
        )
    }

    /// `q d/dq` of the form, which is quasimodular of weight `k + 2`.
    pub fn derive(&self) -> QuasiModularForm {
        self.to_quasi().derive()
    }

    /// Coordinates in the monomial basis of `modular_monomials(weight)`.
    pub fn coordinates(&self) -> Vec<Rational> {
        modular_monomials(self.weight)
            .into_iter()
            .map(|(a, b)| self.coefficient(a, b))
            .collect()
    }

    /// Rendering in the `E4^a*E6^b` monomial basis.
    pub fn render_monomials(&self) -> String {
        let terms: Vec<(Rational, String)> = self
            .monomials()
            .into_iter()
            .map(|((a, b), c)| (c, monomial_name(0, a, b)))
            .collect();
        render::linear_combination(&terms)
    }

    /// Coordinates in the basis `L_{k-12j} Delta^j`, `j = 0..dim-1`, where
    /// `L_w` is the monomial with the largest power of `E4`.
    pub fn delta_basis_coordinates(&self) -> Vec<Rational> {
        let basis = delta_basis(self.weight);
        if basis.is_empty() {
            return Vec::new();
        }
        let monos = modular_monomials(self.weight);
        // rows: monomial coordinates; columns: basis elements
        let cols: Vec<Vec<Rational>> = basis.iter().map(|(f, _)| f.coordinates()).collect();
        let a: Vec<Vec<Rational>> = (0..monos.len())
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        match linalg::solve(&a, &self.coordinates()) {
            Solution::Unique(x) => x,
            other => panic!("delta basis is not a basis: {other:?}"),
        }
    }

    /// Rendering in the Delta basis, e.g. `E4^3 - 728*Delta`.
    pub fn render_delta_basis(&self) -> String {
        let names: Vec<String> = delta_basis(self.weight).into_iter().map(|(_, n)| n).collect();
        let terms: Vec<(Rational, String)> =
            self.delta_basis_coordinates().into_iter().zip(names).collect();
        render::linear_combination(&terms)
    }

    pub fn to_json(&self, order: usize) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "monomials": self.monomials().into_iter().map(|((a, b), c)| serde_json::json!({
                "a": a, "b": b, "coeff": crate::json::rational(&c),
            })).collect::<Vec<_>>(),
            "expansion": crate::json::series(&self.expand(order)),
        })
    }
}

impl fmt::Display for ModularForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_monomials())
    }
}

fn monomial_name(i: u32, a: u32, b: u32) -> String {
    render::product(&[render::power("E2", i), render::power("E4", a), render::power("E6", b)])
}

/// Name of the leading basis form of weight `w`: `E4`, `E6`, `E8`, `E10`,
/// `E14` for the one-dimensional Eisenstein weights, otherwise the monomial.
fn leading_name(w: u32) -> String {
    match w {
        0 => String::new(),
        4 | 6 | 8 | 10 | 14 => format!("E{w}"),
        _ => {
            let (a, b) = modular_monomials(w)[0];
            monomial_name(0, a, b)
        }
    }
}

/// The basis `L_{k-12j} Delta^j` of `M^k` with display names.
pub fn delta_basis(k: u32) -> Vec<(ModularForm, String)> {
    let dim = dim_modular(k);
    (0..dim as u32)
        .map(|j| {
            let w = k - 12 * j;
            let (a, b) = modular_monomials(w)[0];
            let lead = ModularForm::from_terms(w, [((a, b), Rational::one())]);
            let form = lead.mul(&ModularForm::delta().pow(j));
            let name = render::product(&[leading_name(w), render::power("Delta", j)]);
            (form, if name.is_empty() { "1".to_string() } else { name })
        })
        .collect()
}

/// An element of `M~^k = Q[E2, E4, E6]_k`.
#[derive(Clone, Debug)]
pub struct QuasiModularForm {
    weight: u32,
    terms: BTreeMap<(u32, u32, u32), Rational>,
}

// Zero forms of different weights compare equal.
impl PartialEq for QuasiModularForm {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && (self.weight == other.weight || self.terms.is_empty())
    }
}

impl QuasiModularForm {
    pub fn zero(weight: u32) -> Self {
        QuasiModularForm { weight, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        weight: u32,
        terms: impl IntoIterator<Item = ((u32, u32, u32), Rational)>,
    ) -> Self {
        let mut f = Self::zero(weight);
        for ((i, a, b), c) in terms {
            assert_eq!(2 * i + 4 * a + 6 * b, weight, "quasimodular monomial has the wrong weight");
            f.add_term((i, a, b), c);
        }
        f
    }

    fn add_term(&mut self, key: (u32, u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn e2() -> Self {
        Self::from_terms(2, [((1, 0, 0), Rational::one())])
    }

    /// `G2 = -E2/24`.
    pub fn g2() -> Self {
        Self::e2().scale(&rat(-1, 24))
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> Vec<((u32, u32, u32), Rational)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
        v.sort_by(|x, y| (x.0 .0, y.0 .1).cmp(&(y.0 .0, x.0 .1)));
        v
    }

    /// The coefficient of `E2^i`, a modular form of weight `k - 2i`.
    pub fn e2_part(&self, i: u32) -> ModularForm {
        if 2 * i > self.weight {
            return ModularForm::zero(0);
        }
        ModularForm::from_terms(
            self.weight - 2 * i,
            self.terms
                .iter()
                .filter(|((j, _, _), _)| *j == i)
                .map(|((_, a, b), c)| ((*a, *b), c.clone())),
        )
    }

    /// The sequence of `E2`-coefficients, through the highest `E2` power.
    pub fn e2_parts(&self) -> Vec<ModularForm> {
        let top = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        (0..=top).map(|i| self.e2_part(i)).collect()
    }

    pub fn is_modular(&self) -> bool {
        self.terms.keys().all(|k| k.0 == 0)
    }

    pub fn to_modular(&self) -> Option<ModularForm> {
        self.is_modular().then(|| self.e2_part(0))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        assert_eq!(self.weight, rhs.weight, "adding forms of different weights");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&int(-1)))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        let mut out = Self::zero(self.weight);
        for (k, c) in &self.terms {
            out.add_term(*k, c * r);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.weight + rhs.weight);
        for ((i1, a1, b1), c1) in &self.terms {
            for ((i2, a2, b2), c2) in &rhs.terms {
                out.add_term((i1 + i2, a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let one = Self::from_terms(0, [((0, 0, 0), Rational::one())]);
        (0..e).fold(one, |acc, _| acc.mul(self))
    }

    /// Symbolic `D = q d/dq` via the Ramanujan identities
    /// `DE2 = (E2^2 - E4)/12`, `DE4 = (E2 E4 - E6)/3`, `DE6 = (E2 E6 - E4^2)/2`.
    pub fn derive(&self) -> Self {
        let mut out = Self::zero(self.weight + 2);
        for ((i, a, b), c) in &self.terms {
            let (i, a, b) = (*i, *a, *b);
            if i > 0 {
                let f = c * int(i as i64) / int(12);
                out.add_term((i + 1, a, b), f.clone());
                out.add_term((i - 1, a + 1, b), -f);
            }
            if a > 0 {
                let f = c * int(a as i64) / int(3);
                out.add_term((i + 1, a, b), f.clone());
                out.add_term((i, a - 1, b + 1), -f);
            }
            if b > 0 {
                let f = c * int(b as i64) / int(2);
                out.add_term((i + 1, a, b), f.clone());
                out.add_term((i, a + 2, b - 1), -f);
            }
        }
        out
    }

    pub fn derive_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.derive())
    }

    pub fn expand(&self, order: usize) -> QSeries<Rational> {
        let mut gens = Generators::new(order);
        self.expand_with(&mut gens)
    }

    pub fn expand_with(&self, gens: &mut Generators) -> QSeries<Rational> {
        let mut s = QSeries::zero(gens.order());
        for ((i, a, b), c) in &self.terms {
            s = s.add(&gens.monomial(*i, *a, *b).scale(c));
        }
        s
    }

    pub fn render(&self) -> String {
        let terms: Vec<(Rational, String)> = self
            .monomials()
            .into_iter()
            .map(|((i, a, b), c)| (c, monomial_name(i, a, b)))
            .collect();
        render::linear_combination(&terms)
    }

    pub fn to_json(&self, order: usize) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "monomials": self.monomials().into_iter().map(|((i, a, b), c)| serde_json::json!({
                "e2": i, "a": a, "b": b, "coeff": crate::json::rational(&c),
            })).collect::<Vec<_>>(),
            "expansion": crate::json::series(&self.expand(order)),
        })
    }
}

impl From<ModularForm> for QuasiModularForm {
    fn from(f: ModularForm) -> Self {
        f.to_quasi()
    }
}

impl fmt::Display for QuasiModularForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `E_{2k}` with an expansion cached to `order`. For `2k >= 4` the result is
/// modular and its monomial coordinates are found by reducing the divisor-sum
/// expansion.
pub fn eisenstein(two_k: u32, order: usize) -> QuasiModularForm {
    assert!(two_k >= 2 && two_k.is_multiple_of(2));
    match two_k {
        2 => QuasiModularForm::e2(),
        4 => ModularForm::e4().to_quasi(),
        6 => ModularForm::e6().to_quasi(),
        _ => eisenstein_modular(two_k, order).to_quasi(),
    }
}

/// `E_{2k}` for `2k >= 4` as a modular form carrying its divisor-sum
/// expansion.
pub fn eisenstein_modular(two_k: u32, order: usize) -> ModularForm {
    assert!(two_k >= 4 && two_k.is_multiple_of(2));
    let needed = dim_modular(two_k) + MEMBERSHIP_MARGIN;
    let series = eisenstein_series(two_k as usize, order.max(needed));
    let mut f = modular_reduce(&series, two_k).expect("Eisenstein series are modular");
    f.cache = Some(series.truncate(order.max(needed)));
    f
}

pub fn delta(order: usize) -> ModularForm {
    ModularForm::delta().with_expansion(order)
}

fn reduce_against(
    series: &QSeries<Rational>,
    weight: u32,
    monos: &[(u32, u32, u32)],
) -> Result<Vec<Rational>, FormError> {
    let needed = monos.len() + MEMBERSHIP_MARGIN;
    if series.order() < needed {
        return Err(FormError::InsufficientOrder { weight, needed, have: series.order() });
    }
    let order = series.order();
    if monos.is_empty() {
        return match series.valuation() {
            None => Ok(Vec::new()),
            Some(e) => Err(FormError::NotInSpace { weight, exponent: e }),
        };
    }
    let mut gens = Generators::new(order);
    let cols: Vec<QSeries<Rational>> = monos.iter().map(|&(i, a, b)| gens.monomial(i, a, b)).collect();
    let a: Vec<Vec<Rational>> = (0..=order)
        .map(|n| cols.iter().map(|c| c.coeff(n).clone()).collect())
        .collect();
    match linalg::solve(&a, series.coeffs()) {
        Solution::Unique(x) => Ok(x),
        Solution::Inconsistent(e) => Err(FormError::NotInSpace { weight, exponent: e }),
        Solution::Underdetermined => unreachable!("monomial expansions are independent"),
    }
}

/// Finds the quasimodular form of weight `weight` with the given expansion.
pub fn qm_reduce(series: &QSeries<Rational>, weight: u32) -> Result<QuasiModularForm, FormError> {
    if weight % 2 == 1 {
        return Err(FormError::OddWeight(weight));
    }
    let monos = quasi_monomials(weight);
    let x = reduce_against(series, weight, &monos)?;
    Ok(QuasiModularForm::from_terms(weight, monos.into_iter().zip(x)))
}

/// Finds the modular form of weight `weight` with the given expansion.
pub fn modular_reduce(series: &QSeries<Rational>, weight: u32) -> Result<ModularForm, FormError> {
    if weight % 2 == 1 {
        return Err(FormError::OddWeight(weight));
    }
    let monos: Vec<(u32, u32, u32)> =
        modular_monomials(weight).into_iter().map(|(a, b)| (0, a, b)).collect();
    let x = reduce_against(series, weight, &monos)?;
    Ok(ModularForm::from_terms(weight, monos.into_iter().map(|(_, a, b)| (a, b)).zip(x)))
}

/// Minimal series order accepted by the membership tests at this weight.
pub fn membership_order(weight: u32, quasi: bool) -> usize {
    let n = if quasi { quasi_monomials(weight).len() } else { dim_modular(weight) };
    n + MEMBERSHIP_MARGIN
}

/// The basis `phi_0 .. phi_{s-1}` of `M^k` normalized so that
/// `prod (1-q^n)^{-m} phi_i = q^i + O(q^s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceBasis {
    pub weight: u32,
    pub fiber_dim: u32,
    pub elements: Vec<ModularForm>,
}

impl SpaceBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// The space is zero-dimensional.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The unique combination of basis elements whose normalized expansion
    /// agrees with the normalized `series` below `q^s`.
    pub fn matching_leading(&self, series: &QSeries<Rational>) -> ModularForm {
        let s = self.dim();
        let normalized = series.truncate(s.max(1) - 1).mul(&eta_inverse_power(self.fiber_dim, s.max(1) - 1));
        let mut out = ModularForm::zero(self.weight);
        for (i, phi) in self.elements.iter().enumerate() {
            out = out.add(&phi.scale(normalized.coeff(i)));
        }
        out
    }

    pub fn to_json(&self, order: usize) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "fiber_dim": self.fiber_dim,
            "dimension": self.dim(),
            "empty": self.is_empty(),
            "elements": self.elements.iter().map(|f| f.to_json(order)).collect::<Vec<_>>(),
        })
    }
}

pub fn phi_basis(weight: u32, m: u32) -> Result<SpaceBasis, FormError> {
    if weight % 2 == 1 {
        return Err(FormError::OddWeight(weight));
    }
    let monos = modular_monomials(weight);
    let s = monos.len();
    if s == 0 {
        return Ok(SpaceBasis { weight, fiber_dim: m, elements: Vec::new() });
    }
    let order = s - 1;
    let mut gens = Generators::new(order);
    let eta = eta_inverse_power(m, order);
    // g[l][n]: coefficient of q^n in the normalized l-th monomial
    let g: Vec<Vec<Rational>> = monos
        .iter()
        .map(|&(a, b)| gens.monomial(0, a, b).mul(&eta).into_coeffs())
        .collect();
    // phi_i = sum_l c[i][l] f_l with sum_l c[i][l] g[l][n] = delta_{in}, i.e.
    // C = G^{-1} where G is indexed [l][n].
    let inv = linalg::invert(&g).expect("monomial expansions are independent");
    let elements = (0..s)
        .map(|i| ModularForm::from_terms(weight, monos.iter().enumerate().map(|(l, &k)| (k, inv[i][l].clone()))))
        .collect();
    Ok(SpaceBasis { weight, fiber_dim: m, elements })
}

/// The single normalized form of a one-dimensional weight.
pub fn one_dimensional_form(weight: u32) -> Result<ModularForm, FormError> {
    let basis = phi_basis(weight, 0)?;
    if basis.dim() != 1 {
        return Err(FormError::NotOneDimensional(weight));
    }
    Ok(basis.elements[0].clone())
}

/// Pochhammer symbol `(k)_n = k (k+1) ... (k+n-1)` for rational `k`.
pub fn pochhammer(k: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, i| acc * (k + int(i as i64)))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Lowest common multiple of the denominators, handy for integrality checks.
pub fn common_denominator(values: &[Rational]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &QSeries<Rational>) -> Vec<i64> {
        s.to_integers()
            .unwrap()
            .into_iter()
            .map(|v| i64::try_from(v).unwrap())
            .collect()
    }

    #[test]
    fn bernoulli_recurrence() {
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
        assert_eq!(bernoulli_numbers(1)[1], rat(-1, 2));
    }

    #[test]
    fn eisenstein_leading_coefficients() {
        assert_eq!(ints(&eisenstein_series(2, 3)), vec![1, -24, -72, -96]);
        assert_eq!(ints(&eisenstein_series(4, 3)), vec![1, 240, 2160, 6720]);
        assert_eq!(ints(&eisenstein_series(6, 3)), vec![1, -504, -16632, -122976]);
        assert_eq!(ints(&eisenstein_series(8, 1)), vec![1, 480]);
        assert_eq!(eisenstein_modular(8, 1), ModularForm::e4().pow(2));
        assert_eq!(eisenstein_modular(10, 1), ModularForm::e4().mul(&ModularForm::e6()));
    }

    #[test]
    fn g_normalization_matches_g6() {
        assert_eq!(g_normalization(6), rat(-1, 504));
        assert_eq!(g_normalization(2), rat(-1, 24));
    }

    #[test]
    fn delta_expansion() {
        let d = delta(3);
        assert_eq!(ints(d.cached_expansion().unwrap()), vec![0, 1, -24, 252]);
        assert_eq!(ints(&ModularForm::delta().expand(3)), vec![0, 1, -24, 252]);
        let rel = ModularForm::e4()
            .pow(3)
            .sub(&ModularForm::e6().pow(2))
            .sub(&ModularForm::delta().scale(&int(1728)));
        assert!(rel.is_zero());
    }

    #[test]
    fn eta_powers() {
        assert_eq!(ints(&eta_inverse_power(8, 3)), vec![1, 8, 44, 192]);
        assert_eq!(ints(&eta_inverse_power(0, 4)), vec![1, 0, 0, 0, 0]);
        assert_eq!(ints(&eta_inverse_power(6, 1)), vec![1, 6]);
        // Euler's pentagonal theorem
        assert_eq!(ints(&eta_product_power(1, 7)), vec![1, -1, -1, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn ramanujan_identities_by_reduction() {
        let order = 24;
        let de4 = eisenstein_series(4, order).derive();
        let expected = QuasiModularForm::e2()
            .mul(&ModularForm::e4().to_quasi())
            .sub(&ModularForm::e6().to_quasi())
            .scale(&rat(1, 3));
        assert_eq!(qm_reduce(&de4, 6).unwrap(), expected);
        assert_eq!(ModularForm::e4().derive(), expected);
        let e4 = eisenstein_series(4, order);
        let r = qm_reduce(&e4, 4).unwrap();
        assert!(r.is_modular());
        assert_eq!(r.to_modular().unwrap(), ModularForm::e4());
    }

    #[test]
    fn not_in_space_and_insufficient_order() {
        let mut s = QSeries::zero(20);
        s.set(0, int(1));
        s.set(1, int(1));
        assert!(matches!(qm_reduce(&s, 4), Err(FormError::NotInSpace { .. })));
        let short = QSeries::one(3);
        assert!(matches!(qm_reduce(&short, 4), Err(FormError::InsufficientOrder { .. })));
    }

    #[test]
    fn delta_derivative_is_delta_e2() {
        let dd = ModularForm::delta().derive();
        assert_eq!(dd, QuasiModularForm::e2().mul(&ModularForm::delta().to_quasi()));
    }

    #[test]
    fn phi_basis_weight_twelve() {
        let b = phi_basis(12, 8).unwrap();
        let d = ModularForm::delta();
        assert_eq!(b.elements[0], ModularForm::e4().pow(3).sub(&d.scale(&int(728))));
        assert_eq!(b.elements[1], d);
        let b = phi_basis(12, 20).unwrap();
        assert_eq!(b.elements[0], ModularForm::e4().pow(3).sub(&d.scale(&int(740))));
        assert_eq!(phi_basis(4, 8).unwrap().elements, vec![ModularForm::e4()]);
        assert!(phi_basis(2, 8).unwrap().is_empty());
    }

    #[test]
    fn dimension_formula_small() {
        for k in [0, 4, 6, 8, 10, 12, 14, 24, 26] {
            assert_eq!(dim_modular(k), dim_formula(k), "weight {k}");
        }
        assert_eq!(dim_modular(2), 0);
    }

    #[test]
    fn delta_basis_rendering() {
        let b = phi_basis(12, 8).unwrap();
        assert_eq!(b.elements[0].render_delta_basis(), "E4^3 - 728*Delta");
        assert_eq!(b.elements[1].render_delta_basis(), "Delta");
        assert_eq!(eisenstein_modular(10, 2).render_delta_basis(), "E10");
        let f = ModularForm::e4().mul(&ModularForm::delta()).scale(&int(2));
        assert_eq!(f.render_delta_basis(), "2*E4*Delta");
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&int(4), 4), int(4 * 5 * 6 * 7));
        assert_eq!(pochhammer(&int(0), 0), int(1));
        assert_eq!(factorial(4), BigInt::from(24));
    }
}
