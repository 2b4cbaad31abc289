//! Graded polynomials in the base class `P` and Pontryagin symbols `p_i`.
//!
//! A monomial is an exponent vector: slot 0 is `P` (degree 4), slot `i >= 1`
//! is `p_i` (degree `4i`). Symmetric expansions of products `prod F(z y_i)`
//! go through the power sums of the `y_i^2` and the Newton identities.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::render;
use crate::series::{int, rat, Coeff, Module, QSeries, Rational, ZSeries};

/// Exponent vector without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    /// The single symbol in `slot` (0 for `P`, `i` for `p_i`).
    pub fn symbol(slot: usize, exp: u32) -> Self {
        let mut v = vec![0; slot + 1];
        v[slot] = exp;
        Self::new(v)
    }

    pub fn exponent(&self, slot: usize) -> u32 {
        self.0.get(slot).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().enumerate().map(|(i, &e)| 4 * (i.max(1) as u32) * e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn times(&self, rhs: &Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        Monomial((0..n).map(|i| self.exponent(i) + rhs.exponent(i)).collect())
    }

    /// The monomial with the `P` exponent removed.
    pub fn without_base(&self) -> Self {
        let mut v = self.0.clone();
        if let Some(x) = v.first_mut() {
            *x = 0;
        }
        Self::new(v)
    }

    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        let factors: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &e)| render::power(&names(i), e))
            .collect();
        render::product(&factors)
    }
}

/// Default symbol names: `P`, `p1`, `p2`, ...
pub fn pontryagin_names(slot: usize) -> String {
    if slot == 0 {
        "P".to_string()
    } else {
        format!("p{slot}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GradedPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymError {
    #[error("leading term of the kernel must be 1")]
    BadLeadingTerm,
}

impl GradedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// The base class `P`.
    pub fn base() -> Self {
        Self::term(Rational::one(), Monomial::symbol(0, 1))
    }

    /// The Pontryagin symbol `p_i`, `i >= 1`.
    pub fn p(i: usize) -> Self {
        assert!(i >= 1);
        Self::term(Rational::one(), Monomial::symbol(i, 1))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        GradedPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.mul_capped(rhs, u32::MAX)
    }

    /// Product keeping only monomials of degree `<= cap`.
    pub fn mul_capped(&self, rhs: &Self, cap: u32) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if d1 > cap {
                continue;
            }
            for (m2, c2) in &rhs.terms {
                if d1 + m2.degree() > cap {
                    continue;
                }
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow_capped(&self, e: u32, cap: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul_capped(self, cap))
    }

    pub fn truncate(&self, cap: u32) -> Self {
        self.filter(|m| m.degree() <= cap)
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        self.filter(|m| m.degree() == d)
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Self {
        GradedPolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_homogeneous_of(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    /// Replaces the symbol in `slot` by a polynomial.
    pub fn substitute(&self, slot: usize, value: &GradedPolynomial) -> Self {
        let mut powers = vec![Self::one()];
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(slot) as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap().mul(value);
                powers.push(next);
            }
            let mut rest = m.0.clone();
            if slot < rest.len() {
                rest[slot] = 0;
            }
            let rest = Self::term(c.clone(), Monomial::new(rest));
            out = out.add(&rest.mul(&powers[e]));
        }
        out
    }

    /// The string-family relation `p_1 -> -P`.
    pub fn substitute_p1(&self) -> Self {
        self.substitute(1, &Self::base().neg())
    }

    /// Evaluates at rational values; `values[slot]` is the value of that
    /// symbol, missing slots count as zero.
    pub fn evaluate(&self, values: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (slot, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = values.get(slot).cloned().unwrap_or_else(Rational::zero);
                t *= num_traits::pow(v, e as usize);
            }
            total += t;
        }
        total
    }

    /// `exp(self)` truncated at degree `cap`; the constant term must vanish.
    pub fn exp_capped(&self, cap: u32) -> Self {
        assert!(self.constant_term().is_zero(), "exp needs a nilpotent argument");
        let mut out = Self::one();
        let mut power = Self::one();
        let mut k = 1;
        loop {
            power = power.mul_capped(self, cap).scale(&rat(1, k));
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
            k += 1;
        }
        out
    }

    /// Inverse of `c + n` with `c` a nonzero constant and `n` of positive
    /// degree, truncated at `cap`.
    pub fn inverse_capped(&self, cap: u32) -> Option<Self> {
        let c = self.constant_term();
        if c.is_zero() {
            return None;
        }
        let cinv = c.recip();
        let n = self.sub(&Self::constant(c)).scale(&cinv);
        // 1/(1+n) = sum (-n)^k
        let mut out = Self::one();
        let mut power = Self::one();
        loop {
            power = power.mul_capped(&n, cap).neg();
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        Some(out.scale(&cinv))
    }

    pub fn render_with(&self, names: &dyn Fn(usize) -> String) -> String {
        let mut terms: Vec<(&Monomial, &Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| (a.0.degree(), b.0).cmp(&(b.0.degree(), a.0)));
        let rendered: Vec<(Rational, String)> =
            terms.into_iter().map(|(m, c)| (c.clone(), m.render(names))).collect();
        render::linear_combination(&rendered)
    }

    pub fn render(&self) -> String {
        self.render_with(&pontryagin_names)
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Module for GradedPolynomial {
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
        self.neg()
    }
    fn scaled(&self, r: &Rational) -> Self {
        self.scale(r)
    }
}

impl Coeff for GradedPolynomial {
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn try_inverse(&self) -> Option<Self> {
        if self.terms.len() == 1 && !self.constant_term().is_zero() {
            Some(Self::constant(self.constant_term().recip()))
        } else {
            None
        }
    }
}

/// A `q`-series of graded polynomials with an implicit degree cap.
pub type GradedSeries = QSeries<GradedPolynomial>;

pub fn gs_constant(p: GradedPolynomial, order: usize) -> GradedSeries {
    GradedSeries::constant_with(p, order)
}

/// Embeds a rational series times a fixed polynomial.
pub fn gs_from_scalar(s: &QSeries<Rational>, p: &GradedPolynomial) -> GradedSeries {
    s.map(|c| p.scale(c))
}

pub fn gs_mul_capped(a: &GradedSeries, b: &GradedSeries, cap: u32) -> GradedSeries {
    let n = a.order().min(b.order());
    let mut out = vec![GradedPolynomial::zero(); n + 1];
    for i in 0..=n {
        if a.coeff(i).is_zero() {
            continue;
        }
        for j in 0..=(n - i) {
            if b.coeff(j).is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&a.coeff(i).mul_capped(b.coeff(j), cap));
        }
    }
    GradedSeries::from_coeffs(out)
}

pub fn gs_truncate_degree(a: &GradedSeries, cap: u32) -> GradedSeries {
    a.map(|p| p.truncate(cap))
}

/// `exp(a)` for a graded series whose `q^0` coefficient has no constant term.
pub fn gs_exp_capped(a: &GradedSeries, cap: u32) -> GradedSeries {
    let n = a.order();
    // b' = a' b in terms of D = q d/dq is awkward with a nonzero q^0 part, so
    // split a = a0 + a_+ and use exp(a0) exp(a_+).
    let a0 = a.coeff(0).clone();
    let mut plus = a.clone();
    plus.set(0, GradedPolynomial::zero());
    let mut out: Vec<GradedPolynomial> = Vec::with_capacity(n + 1);
    out.push(GradedPolynomial::one());
    for m in 1..=n {
        let mut acc = GradedPolynomial::zero();
        for k in 1..=m {
            if plus.coeff(k).is_zero() {
                continue;
            }
            acc = acc.add(&plus.coeff(k).mul_capped(&out[m - k], cap).scale(&int(k as i64)));
        }
        out.push(acc.scale(&rat(1, m as i64)));
    }
    let e0 = gs_constant(a0.exp_capped(cap), n);
    gs_mul_capped(&e0, &GradedSeries::from_coeffs(out), cap)
}

/// Power sums from elementary symmetric polynomials: given `e_1 .. e_r`
/// (later ones are zero), returns `s_1 .. s_count`.
pub fn power_sums_from_elementary(e: &[GradedPolynomial], count: usize) -> Vec<GradedPolynomial> {
    let e_at = |i: usize| e.get(i - 1).cloned().unwrap_or_default();
    let mut s: Vec<GradedPolynomial> = Vec::with_capacity(count);
    for n in 1..=count {
        // s_n = sum_{i=1}^{n-1} (-1)^{i-1} e_i s_{n-i} + (-1)^{n-1} n e_n
        let mut acc = e_at(n).scale(&int(if n % 2 == 1 { n as i64 } else { -(n as i64) }));
        for i in 1..n {
            let ei = e_at(i);
            if ei.is_zero() {
                continue;
            }
            let t = ei.mul(&s[n - i - 1]);
            acc = if i % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
        }
        s.push(acc);
    }
    s
}

/// Elementary symmetric polynomials `e_1 .. e_count` from power sums
/// `s_1 ..` (at least `count` of them).
pub fn elementary_from_power_sums(s: &[GradedPolynomial], count: usize) -> Vec<GradedPolynomial> {
    assert!(s.len() >= count, "need power sums through index {count}");
    let mut e: Vec<GradedPolynomial> = vec![GradedPolynomial::one()];
    for n in 1..=count {
        // n e_n = sum_{i=1}^{n} (-1)^{i-1} e_{n-i} s_i
        let mut acc = GradedPolynomial::zero();
        for i in 1..=n {
            let t = e[n - i].mul(&s[i - 1]);
            acc = if i % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
        }
        e.push(acc.scale(&rat(1, n as i64)));
    }
    e.remove(0);
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetricContext {
    pub num_roots: usize,
    pub degree_cap: u32,
}

impl SymmetricContext {
    pub fn new(num_roots: usize, degree_cap: u32) -> Self {
        SymmetricContext { num_roots, degree_cap }
    }

    /// Power sums `s_n = sum_i y_i^{2n}` in terms of the symbols
    /// `p_j = e_j(y_1^2, ..)`, for `4n <= degree_cap`.
    pub fn power_sums(&self) -> Vec<GradedPolynomial> {
        let e: Vec<GradedPolynomial> = (1..=self.num_roots).map(GradedPolynomial::p).collect();
        power_sums_from_elementary(&e, (self.degree_cap / 4) as usize)
    }
}

/// Expands `prod_{i=1}^r F(z y_i)` for an even kernel `F` (a `z`-series of
/// `q`-series with `F(0) = 1`) as a `z`-series whose `z^{2n}` coefficient is a
/// `q`-series of degree-`4n` polynomials in the `p_j`.
pub fn expand_symmetric_product(
    f: &ZSeries<QSeries<Rational>>,
    ctx: &SymmetricContext,
) -> Result<ZSeries<QSeries<GradedPolynomial>>, SymError> {
    let q_order = f.coeff(0).order();
    if *f.coeff(0) != QSeries::one(q_order) {
        return Err(SymError::BadLeadingTerm);
    }
    let z_order = (ctx.degree_cap / 2) as usize;
    let f = if f.order() >= z_order {
        f.truncate(z_order)
    } else {
        // unknown higher coefficients would poison the result
        panic!("kernel known to z^{} but z^{z_order} requested", f.order());
    };
    let log = f.log().expect("constant term is 1");
    let s = ctx.power_sums();
    let zero = QSeries::zero_with(q_order, &GradedPolynomial::zero());
    let mut coeffs = vec![zero.clone(); z_order + 1];
    for n in 1..=z_order / 2 {
        assert!(log.coeff(2 * n - 1).is_zero(), "kernel must be even in z");
        coeffs[2 * n] = gs_from_scalar(log.coeff(2 * n), &s[n - 1]);
    }
    let total_log = ZSeries::from_coeffs(coeffs);
    let mut out = total_log.exp().expect("log has zero constant term");
    // exp over the nested coefficients may carry degree noise only within
    // homogeneous slots, so a final cap is exact
    for k in 0..=z_order {
        let capped = gs_truncate_degree(out.coeff(k), ctx.degree_cap);
        out.set(k, capped);
    }
    Ok(out)
}

/// Sets `z = 1`: the `z^{2n}` coefficient is homogeneous of degree `4n`, so
/// nothing is lost.
pub fn collapse_z(f: &ZSeries<QSeries<GradedPolynomial>>) -> GradedSeries {
    let mut acc = f.coeff(0).clone();
    for k in 1..=f.order() {
        acc = acc.add(f.coeff(k));
    }
    acc
}

/// Chern character components `ch_0 .. ch_max` from Chern classes
/// `c_1 .. c_k`: `ch_0` is the rank and `ch_j = s_j / j!`.
pub fn chern_character_components(
    chern_classes: &[GradedPolynomial],
    rank: Rational,
    max_component: usize,
) -> Vec<GradedPolynomial> {
    let s = power_sums_from_elementary(chern_classes, max_component);
    let mut out = vec![GradedPolynomial::constant(rank)];
    let mut fact = Rational::one();
    for (j, sj) in s.into_iter().enumerate() {
        fact *= int(j as i64 + 1);
        out.push(sj.scale(&fact.recip()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize) -> GradedPolynomial {
        GradedPolynomial::p(i)
    }

    #[test]
    fn degrees() {
        assert_eq!(Monomial::new(vec![1, 0, 2]).degree(), 4 + 16);
        assert_eq!(Monomial::symbol(3, 1).degree(), 12);
        assert_eq!(Monomial::new(vec![0, 0, 0]), Monomial::one());
    }

    #[test]
    fn two_variable_newton() {
        // s1 = e1, s2 = e1^2 - 2 e2
        let e1 = p(1);
        let e2 = p(2);
        let s = power_sums_from_elementary(&[e1.clone(), e2.clone()], 2);
        assert_eq!(s[0], e1);
        assert_eq!(s[1], e1.mul(&e1).sub(&e2.scale(&int(2))));
        let back = elementary_from_power_sums(&s, 2);
        assert_eq!(back, vec![e1, e2]);
    }

    #[test]
    fn zero_power_sums() {
        let zeros = vec![GradedPolynomial::zero(); 4];
        assert!(elementary_from_power_sums(&zeros, 4).iter().all(GradedPolynomial::is_zero));
    }

    #[test]
    fn symmetric_product_of_quadratic_kernel() {
        let q_order = 2;
        let f2 = QSeries::from_ints(&[3, 1, 0]);
        let one = QSeries::one(q_order);
        let zero = QSeries::zero(q_order);
        let f = ZSeries::from_coeffs(vec![one, zero.clone(), f2.clone(), zero.clone(), zero]);
        let out = expand_symmetric_product(&f, &SymmetricContext::new(2, 8)).unwrap();
        assert_eq!(*out.coeff(2), gs_from_scalar(&f2, &p(1)));
        assert_eq!(*out.coeff(4), gs_from_scalar(&f2.mul(&f2), &p(2)));
    }

    #[test]
    fn degree_eight_part_of_two_term_kernel() {
        // F = 1 + f2 z^2 + f4 z^4 with scalar f2 = 2, f4 = 5
        let f = ZSeries::from_coeffs(
            [1, 0, 2, 0, 5].iter().map(|&v| QSeries::constant(int(v), 0)).collect(),
        );
        let out = expand_symmetric_product(&f, &SymmetricContext::new(4, 8)).unwrap();
        let expected = p(1).mul(&p(1)).scale(&int(5)).add(&p(2).scale(&int(4 - 10)));
        assert_eq!(*out.coeff(4).coeff(0), expected);
    }

    #[test]
    fn identity_kernel() {
        let f = ZSeries::from_coeffs(vec![QSeries::one(3), QSeries::zero(3), QSeries::zero(3)]);
        let out = expand_symmetric_product(&f, &SymmetricContext::new(3, 4)).unwrap();
        assert_eq!(collapse_z(&out), gs_constant(GradedPolynomial::one(), 3));
        let bad = ZSeries::from_coeffs(vec![QSeries::constant(int(2), 3), QSeries::zero(3), QSeries::zero(3)]);
        assert_eq!(expand_symmetric_product(&bad, &SymmetricContext::new(3, 4)), Err(SymError::BadLeadingTerm));
    }

    #[test]
    fn chern_character_small_cases() {
        let c1 = p(1);
        let c2 = p(2);
        let ch = chern_character_components(&[GradedPolynomial::zero(), c2.clone()], int(248), 2);
        assert_eq!(ch[2], c2.neg());
        let ch = chern_character_components(std::slice::from_ref(&c1), int(1), 3);
        assert_eq!(ch[2], c1.mul(&c1).scale(&rat(1, 2)));
        assert_eq!(ch[3], c1.mul(&c1).mul(&c1).scale(&rat(1, 6)));
        let triv = chern_character_components(&vec![GradedPolynomial::zero(); 3], int(5), 3);
        assert!(triv[1..].iter().all(GradedPolynomial::is_zero));
    }

    #[test]
    fn p1_substitution() {
        let x = p(1).mul(&p(2)).add(&p(1).mul(&p(1)));
        let b = GradedPolynomial::base();
        assert_eq!(x.substitute_p1(), b.mul(&p(2)).neg().add(&b.mul(&b)));
    }

    #[test]
    fn graded_inverse_and_exp() {
        let a = GradedPolynomial::one().add(&p(1));
        let inv = a.inverse_capped(12).unwrap();
        assert_eq!(a.mul_capped(&inv, 12), GradedPolynomial::one());
        let e = p(1).exp_capped(8);
        assert_eq!(e, GradedPolynomial::one().add(&p(1)).add(&p(1).mul(&p(1)).scale(&rat(1, 2))));
    }

    #[test]
    fn rendering() {
        let x = p(2).scale(&rat(13, 7560)).mul(&GradedPolynomial::base()).add(&p(3).scale(&rat(62, 7560)));
        assert_eq!(x.render(), "13/7560*P*p2 + 31/3780*p3");
    }
}
