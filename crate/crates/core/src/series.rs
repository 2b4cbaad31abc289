//! Truncated power series over an exact coefficient algebra.
//!
//! A [`PowerSeries`] stores the coefficients of `x^0 .. x^N` where `N` is the
//! truncation order; everything at or beyond `x^(N+1)` is unknown. Binary
//! operations silently truncate to the smaller of the two orders. The same
//! type is used for the `q` variable, the elliptic variable `z`, and the
//! auxiliary variable `u = q^(1/8)`; the aliases [`QSeries`] and [`ZSeries`]
//! only document intent.
//!
//! Coefficients only need to implement [`Module`] (addition and rational
//! scaling) for the additive operations, and [`Coeff`] for products,
//! inversion, `exp` and `log`. Nested series (`ZSeries<QSeries<_>>`) are
//! themselves valid coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational numbers, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Additive structure with scaling by rationals.
pub trait Module: Clone + fmt::Debug + PartialEq + Send + Sync {
    /// Zero element compatible with `self` (same truncation, same shape).
    fn zero_like(&self) -> Self;
    fn vanishes(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, r: &Rational) -> Self;

    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }
}

/// Commutative ring structure on top of [`Module`].
pub trait Coeff: Module {
    fn one_like(&self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    /// Multiplicative inverse when `self` is a unit.
    fn try_inverse(&self) -> Option<Self>;
}

impl Module for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, r: &Rational) -> Self {
        self * r
    }
}

impl Coeff for Rational {
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn try_inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("constant term is not a unit")]
    NonUnitConstantTerm,
    #[error("bad constant term: {0}")]
    BadConstantTerm(&'static str),
    #[error("cannot divide by x^{shift}: coefficient of x^{exponent} is nonzero")]
    NotDivisible { shift: usize, exponent: usize },
    #[error("exponent {exponent} is not a multiple of {step}")]
    FractionalResidue { exponent: usize, step: usize },
}

#[derive(Clone, Debug)]
pub struct PowerSeries<A> {
    coeffs: Vec<A>,
}

pub type QSeries<A> = PowerSeries<A>;
pub type ZSeries<A> = PowerSeries<A>;

impl<A: Module> PowerSeries<A> {
    /// Series with the given coefficients; the truncation order is
    /// `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<A>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a constant term");
        PowerSeries { coeffs }
    }

    pub fn zero_with(order: usize, template: &A) -> Self {
        PowerSeries { coeffs: vec![template.zero_like(); order + 1] }
    }

    /// `c * x^0` known to `order`.
    pub fn constant_with(c: A, order: usize) -> Self {
        let mut coeffs = vec![c.zero_like(); order + 1];
        coeffs[0] = c;
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[A] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<A> {
        self.coeffs
    }

    /// Coefficient of `x^n`; panics beyond the truncation order.
    pub fn coeff(&self, n: usize) -> &A {
        &self.coeffs[n]
    }

    pub fn get(&self, n: usize) -> Option<&A> {
        self.coeffs.get(n)
    }

    pub fn set(&mut self, n: usize, value: A) {
        self.coeffs[n] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Module::vanishes)
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.vanishes())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        PowerSeries { coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn map<B: Module>(&self, f: impl Fn(&A) -> B) -> PowerSeries<B> {
        PowerSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..=n).map(|i| self.coeffs[i].plus(&rhs.coeffs[i])).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..=n).map(|i| self.coeffs[i].minus(&rhs.coeffs[i])).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(Module::negated)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.map(|c| c.scaled(r))
    }

    /// The operator `x d/dx`: multiplies the coefficient of `x^n` by `n`.
    pub fn derive(&self) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c.scaled(&int(n as i64)))
                .collect(),
        }
    }

    pub fn derive_n(&self, times: usize) -> Self {
        (0..times).fold(self.clone(), |acc, _| acc.derive())
    }

    /// Multiplication by `x^k`; the known range grows by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = vec![zero; k];
        coeffs.extend(self.coeffs.iter().cloned());
        PowerSeries { coeffs }
    }

    /// Division by `x^k`, which must divide the series exactly.
    pub fn shift_down(&self, k: usize) -> Result<Self, SeriesError> {
        if let Some(e) = (0..k.min(self.coeffs.len())).find(|&e| !self.coeffs[e].vanishes()) {
            return Err(SeriesError::NotDivisible { shift: k, exponent: e });
        }
        if k > self.order() {
            return Err(SeriesError::NotDivisible { shift: k, exponent: self.order() });
        }
        Ok(PowerSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    /// Keeps the coefficients at exponents divisible by `step` and renames
    /// `x^(step*k)` to `y^k`. Fails if any other coefficient is nonzero.
    pub fn compress(&self, step: usize) -> Result<Self, SeriesError> {
        assert!(step > 0);
        for (e, c) in self.coeffs.iter().enumerate() {
            if e % step != 0 && !c.vanishes() {
                return Err(SeriesError::FractionalResidue { exponent: e, step });
            }
        }
        Ok(PowerSeries {
            coeffs: self.coeffs.iter().step_by(step).cloned().collect(),
        })
    }

    /// Scalar series times a module-valued series (Cauchy product).
    pub fn mul_scalar_series(&self, s: &QSeries<Rational>) -> Self {
        let n = self.order().min(s.order());
        let zero = self.coeffs[0].zero_like();
        let mut out = vec![zero; n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.vanishes() {
                continue;
            }
            for j in 0..=(n - i) {
                if Zero::is_zero(&s.coeffs[j]) {
                    continue;
                }
                out[i + j] = out[i + j].plus(&a.scaled(&s.coeffs[j]));
            }
        }
        PowerSeries { coeffs: out }
    }

    /// First exponent where two series differ, up to their common order.
    pub fn first_difference(&self, rhs: &Self) -> Option<usize> {
        let n = self.order().min(rhs.order());
        (0..=n).find(|&i| self.coeffs[i] != rhs.coeffs[i])
    }
}

impl<A: Coeff> PowerSeries<A> {
    pub fn one_with(order: usize, template: &A) -> Self {
        Self::constant_with(template.one_like(), order)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.order().min(rhs.order());
        let mut out = vec![self.coeffs[0].zero_like(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.vanishes() {
                continue;
            }
            for j in 0..=(n - i) {
                let b = &rhs.coeffs[j];
                if b.vanishes() {
                    continue;
                }
                out[i + j] = out[i + j].plus(&a.times(b));
            }
        }
        PowerSeries { coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one_with(self.order(), &self.coeffs[0]);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplies every coefficient by the ring element `c`.
    pub fn scale_by(&self, c: &A) -> Self {
        self.map(|a| c.times(a))
    }

    /// `f(c x)`: the coefficient of `x^n` is multiplied by `c^n`.
    pub fn rescale_variable(&self, c: &A) -> Self {
        let mut power = c.one_like();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(power.times(a));
            power = power.times(c);
        }
        PowerSeries { coeffs }
    }

    pub fn invert(&self) -> Result<Self, SeriesError> {
        let inv0 = self.coeffs[0].try_inverse().ok_or(SeriesError::NonUnitConstantTerm)?;
        let n = self.order();
        let mut out: Vec<A> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut acc = self.coeffs[0].zero_like();
            for i in 1..=k {
                let a = &self.coeffs[i];
                if a.vanishes() {
                    continue;
                }
                acc = acc.plus(&a.times(&out[k - i]));
            }
            out.push(inv0.times(&acc).negated());
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// `exp(a)` for a series with vanishing constant term.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].vanishes() {
            return Err(SeriesError::BadConstantTerm("exp needs constant term 0"));
        }
        let n = self.order();
        // n b_n = sum_{k=1}^n k a_k b_{n-k}
        let mut out: Vec<A> = Vec::with_capacity(n + 1);
        out.push(self.coeffs[0].one_like());
        for m in 1..=n {
            let mut acc = self.coeffs[0].zero_like();
            for k in 1..=m {
                let a = &self.coeffs[k];
                if a.vanishes() {
                    continue;
                }
                acc = acc.plus(&a.times(&out[m - k]).scaled(&int(k as i64)));
            }
            out.push(acc.scaled(&rat(1, m as i64)));
        }
        Ok(PowerSeries { coeffs: out })
    }

    /// `log(u)` for a series with constant term 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if *c0 != c0.one_like() {
            return Err(SeriesError::BadConstantTerm("log needs constant term 1"));
        }
        let n = self.order();
        // l_m = u_m - (1/m) sum_{k=1}^{m-1} k l_k u_{m-k}
        let mut out: Vec<A> = Vec::with_capacity(n + 1);
        out.push(c0.zero_like());
        for m in 1..=n {
            let mut acc = c0.zero_like();
            for k in 1..m {
                let u = &self.coeffs[m - k];
                if u.vanishes() || out[k].vanishes() {
                    continue;
                }
                acc = acc.plus(&out[k].times(u).scaled(&int(k as i64)));
            }
            out.push(self.coeffs[m].minus(&acc.scaled(&rat(1, m as i64))));
        }
        Ok(PowerSeries { coeffs: out })
    }
}

impl PowerSeries<Rational> {
    pub fn constant(c: Rational, order: usize) -> Self {
        Self::constant_with(c, order)
    }

    pub fn zero(order: usize) -> Self {
        Self::zero_with(order, &Rational::zero())
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    /// `c x^n` known to `order`.
    pub fn monomial(c: Rational, n: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.coeffs[n] = c;
        }
        s
    }

    /// Series with the given integer coefficients, order `len - 1`.
    pub fn from_ints(values: &[i64]) -> Self {
        Self::from_coeffs(values.iter().map(|&v| int(v)).collect())
    }

    /// Integer coefficients when every coefficient is integral.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { Some(c.to_integer()) } else { None })
            .collect()
    }
}

impl<A: Module> PartialEq for PowerSeries<A> {
    /// Coefficient-wise equality up to the common truncation order.
    fn eq(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }
}

impl<A: Module> Module for PowerSeries<A> {
    fn zero_like(&self) -> Self {
        Self::zero_with(self.order(), &self.coeffs[0])
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

impl<A: Coeff> Coeff for PowerSeries<A> {
    fn one_like(&self) -> Self {
        Self::one_with(self.order(), &self.coeffs[0])
    }
    fn times(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn try_inverse(&self) -> Option<Self> {
        self.invert().ok()
    }
}

impl<A: Module> Add for &PowerSeries<A> {
    type Output = PowerSeries<A>;
    fn add(self, rhs: Self) -> PowerSeries<A> {
        PowerSeries::add(self, rhs)
    }
}

impl<A: Module> Sub for &PowerSeries<A> {
    type Output = PowerSeries<A>;
    fn sub(self, rhs: Self) -> PowerSeries<A> {
        PowerSeries::sub(self, rhs)
    }
}

impl<A: Module> Neg for &PowerSeries<A> {
    type Output = PowerSeries<A>;
    fn neg(self) -> PowerSeries<A> {
        PowerSeries::neg(self)
    }
}

impl<A: Coeff> Mul for &PowerSeries<A> {
    type Output = PowerSeries<A>;
    fn mul(self, rhs: Self) -> PowerSeries<A> {
        PowerSeries::mul(self, rhs)
    }
}

/// Renders a rational series as `1 - 24q - 72q^2 + O(q^4)`.
pub fn format_series(s: &QSeries<Rational>, var: &str) -> String {
    let mut out = String::new();
    for (n, c) in s.coeffs().iter().enumerate() {
        if Zero::is_zero(c) {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let var_part = match n {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{n}"),
        };
        if n == 0 || !mag.is_one() {
            if mag.is_integer() {
                out.push_str(&mag.to_string());
            } else {
                out.push_str(&format!("({mag})"));
            }
        }
        out.push_str(&var_part);
    }
    if out.is_empty() {
        out.push('0');
    }
    out.push_str(&format!(" + O({var}^{})", s.order() + 1));
    out
}

impl fmt::Display for PowerSeries<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_series(self, "q"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(values: &[i64]) -> QSeries<Rational> {
        QSeries::from_ints(values)
    }

    #[test]
    fn difference_of_squares() {
        let a = q(&[1, 1, 0, 0]);
        let b = q(&[1, -1, 0, 0]);
        assert_eq!(a.mul(&b), q(&[1, 0, -1, 0]));
    }

    #[test]
    fn geometric_series_inverse() {
        let one_minus_q = q(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(one_minus_q.invert().unwrap(), q(&[1, 1, 1, 1, 1, 1]));
        let geo = q(&[1, 1, 1, 1, 1]);
        assert_eq!(one_minus_q.truncate(4).mul(&geo), QSeries::one(4));
    }

    #[test]
    fn non_unit_constant_term() {
        assert_eq!(q(&[0, 1, 2]).invert().unwrap_err(), SeriesError::NonUnitConstantTerm);
    }

    #[test]
    fn exp_and_log_definitions() {
        let e = q(&[0, 1, 0, 0]).exp().unwrap();
        assert_eq!(e.coeffs(), &[int(1), int(1), rat(1, 2), rat(1, 6)]);
        let l = q(&[1, -1, 0, 0]).log().unwrap();
        assert_eq!(l.coeffs(), &[int(0), int(-1), rat(-1, 2), rat(-1, 3)]);
        let u = q(&[1, 5, 7, 0, 0, 0]);
        assert_eq!(u.log().unwrap().exp().unwrap(), u);
        assert!(q(&[1, 1]).exp().is_err());
        assert!(q(&[2, 1]).log().is_err());
    }

    #[test]
    fn derive_is_monomial_rule() {
        let s = QSeries::monomial(int(1), 3, 5);
        assert_eq!(s.derive(), QSeries::monomial(int(3), 3, 5));
        assert!(QSeries::constant(int(7), 4).derive().is_zero());
        assert_eq!(s.derive().order(), 5);
    }

    #[test]
    fn shifts_and_compression() {
        let s = q(&[0, 0, 3, 4]);
        assert_eq!(s.shift_down(2).unwrap(), q(&[3, 4]));
        assert!(s.shift_down(3).is_err());
        let t = q(&[1, 0, 2, 0, 5]);
        assert_eq!(t.compress(2).unwrap(), q(&[1, 2, 5]));
        assert!(q(&[1, 1, 0]).compress(2).is_err());
        assert_eq!(q(&[1, 2]).shift_up(2), q(&[0, 0, 1, 2]));
    }

    #[test]
    fn truncation_takes_the_minimum() {
        let a = q(&[1, 2, 3, 4, 5]);
        let b = q(&[1, 1]);
        assert_eq!(a.mul(&b).order(), 1);
        assert_eq!(a.add(&b).order(), 1);
    }

    #[test]
    fn nested_series_are_coefficients() {
        // (1 + z*(1+q)) * (1 - z*(1+q)) = 1 - z^2 (1+q)^2
        let one = QSeries::one(3);
        let a = q(&[1, 1, 0, 0]);
        let f = ZSeries::from_coeffs(vec![one.clone(), a.clone(), one.zero_like()]);
        let g = ZSeries::from_coeffs(vec![one.clone(), a.neg(), one.zero_like()]);
        let prod = f.mul(&g);
        assert_eq!(prod.coeff(2), &a.mul(&a).neg());
        assert!(prod.coeff(1).is_zero());
        let inv = f.invert().unwrap();
        assert_eq!(f.mul(&inv), ZSeries::one_with(2, &one));
    }

    #[test]
    fn formatting() {
        assert_eq!(format!("{}", q(&[1, -24, -72])), "1 - 24q - 72q^2 + O(q^3)");
        assert_eq!(format_series(&q(&[0, 1]), "u"), "u + O(u^2)");
    }
}
