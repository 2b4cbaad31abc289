//! Elliptic kernels and characteristic-class towers.
//!
//! Kernels are `z`-series of `q`-series. Theta kernels are expanded over the
//! auxiliary base `u = q^(1/8)` and only turned into `q`-series through the
//! checked [`PowerSeries::compress`].

use num_traits::{One, Zero};

use crate::modular::{eisenstein_series, eta_inverse_power, eta_product_power, g_normalization};
use crate::series::{int, rat, Module, PowerSeries, QSeries, Rational, SeriesError, ZSeries};
use crate::sympoly::{
    collapse_z, expand_symmetric_product, gs_constant, gs_exp_capped, gs_from_scalar, gs_mul_capped,
    gs_truncate_degree, GradedPolynomial, GradedSeries, SymmetricContext,
};

/// A `z`-series whose coefficients are rational `q`- (or `u`-) series.
pub type KernelSeries = ZSeries<QSeries<Rational>>;

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, i| acc * int(i as i64))
}

/// `z / sigma(z) = exp(sum_{n>=2} 2 G_{2n} / (2n)! z^{2n})`.
pub fn sigma_inverse_kernel(z_order: usize, q_order: usize) -> KernelSeries {
    let zero = QSeries::zero(q_order);
    let mut log = vec![zero; z_order + 1];
    for n in 2..=z_order / 2 {
        let c = g_normalization(2 * n) * int(2) / factorial(2 * n);
        log[2 * n] = eisenstein_series(2 * n, q_order).scale(&c);
    }
    KernelSeries::from_coeffs(log).exp().expect("zero constant term")
}

/// Which Jacobi theta function to expand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    /// `2u sinh(z/2) prod (1 - u^{8n} e^z)(1 - u^{8n} e^{-z})(1 - u^{8n})`
    Theta1,
    /// `2u cosh(z/2) prod (1 + u^{8n} e^z)(1 + u^{8n} e^{-z})(1 - u^{8n})`
    Theta2,
    /// `prod (1 + u^{8n-4} e^z)(1 + u^{8n-4} e^{-z})(1 - u^{8n})`
    Theta3,
    /// `prod (1 - u^{8n-4} e^z)(1 - u^{8n-4} e^{-z})(1 - u^{8n})`
    Theta4,
}

impl ThetaKind {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(ThetaKind::Theta1),
            2 => Some(ThetaKind::Theta2),
            3 => Some(ThetaKind::Theta3),
            4 => Some(ThetaKind::Theta4),
            _ => None,
        }
    }
}

/// Multiplies `f` by `1 + s x^a e^{c z}` where `x` is the inner variable.
fn mul_exp_factor(f: &KernelSeries, s: &Rational, a: usize, c: i64) -> KernelSeries {
    let z_order = f.order();
    let x_order = f.coeff(0).order();
    if a > x_order {
        return f.clone();
    }
    // weights (c z)^i / i!
    let mut w = Vec::with_capacity(z_order + 1);
    let mut acc = s.clone();
    for i in 0..=z_order {
        if i > 0 {
            acc = acc * int(c) / int(i as i64);
        }
        w.push(acc.clone());
    }
    let shifted: Vec<QSeries<Rational>> =
        f.coeffs().iter().map(|g| g.shift_up(a).truncate(x_order)).collect();
    let mut out = f.clone();
    for k in 0..=z_order {
        let mut add = out.coeff(k).clone();
        for i in 0..=k {
            if w[i].is_zero() {
                continue;
            }
            add = add.add(&shifted[k - i].scale(&w[i]));
        }
        out.set(k, add);
    }
    out
}

/// `f * (1 + s x^a)` with no `z` dependence.
fn mul_plain_factor(f: &KernelSeries, s: &Rational, a: usize) -> KernelSeries {
    mul_exp_factor(f, s, a, 0)
}

/// Expansion of a theta kernel in `z` (to `z_order`) and `u = q^(1/8)` (to
/// `u_order`).
pub fn theta_kernel_u(kind: ThetaKind, z_order: usize, u_order: usize) -> KernelSeries {
    let zero = QSeries::zero(u_order);
    let mut f = KernelSeries::from_coeffs(vec![zero; z_order + 1]);
    // prefactor
    match kind {
        ThetaKind::Theta1 | ThetaKind::Theta2 => {
            let odd = kind == ThetaKind::Theta1;
            // 2 sinh(z/2) = sum_{k odd} 2 (z/2)^k / k!, 2 cosh(z/2) likewise for k even
            for k in 0..=z_order {
                if (k % 2 == 1) != odd {
                    continue;
                }
                let c = int(2) / (factorial(k) * Rational::from_integer(num_bigint::BigInt::from(2).pow(k as u32)));
                f.set(k, QSeries::monomial(c, 1, u_order));
            }
        }
        ThetaKind::Theta3 | ThetaKind::Theta4 => f.set(0, QSeries::one(u_order)),
    }
    let (sign, offset) = match kind {
        ThetaKind::Theta1 => (-1, 0),
        ThetaKind::Theta2 => (1, 0),
        ThetaKind::Theta3 => (1, 4),
        ThetaKind::Theta4 => (-1, 4),
    };
    let s = int(sign);
    let mut n = 1;
    while 8 * n - offset <= u_order {
        let a = 8 * n - offset;
        f = mul_exp_factor(&f, &s, a, 1);
        f = mul_exp_factor(&f, &s, a, -1);
        n += 1;
    }
    let mut n = 1;
    while 8 * n <= u_order {
        f = mul_plain_factor(&f, &int(-1), 8 * n);
        n += 1;
    }
    f
}

/// Theta kernel over `u` covering `q` through `q_order`.
pub fn theta_kernel(kind: ThetaKind, z_order: usize, q_order: usize) -> KernelSeries {
    theta_kernel_u(kind, z_order, 8 * q_order + 7)
}

/// Converts a `u`-series to a `q`-series; every exponent must be a multiple
/// of 8.
pub fn u_to_q(s: &QSeries<Rational>) -> Result<QSeries<Rational>, SeriesError> {
    let usable = s.order() - s.order() % 8;
    s.truncate(usable).compress(8)
}

/// `eta^3` over `u` via `u prod (1 - u^{8n})^3`.
pub fn eta_cubed_u(u_order: usize) -> QSeries<Rational> {
    let inner = eta_product_power(3, u_order / 8);
    let mut out = QSeries::zero(u_order);
    for (n, c) in inner.coeffs().iter().enumerate() {
        if 8 * n < u_order {
            out.set(8 * n + 1, c.clone());
        }
    }
    out
}

/// `(z/2) / sinh(z/2)` as a rational `z`-series.
pub fn a_hat_kernel(z_order: usize) -> ZSeries<Rational> {
    // sinh(z/2)/(z/2) = sum (z/2)^{2k} / (2k+1)!
    let mut c = vec![Rational::zero(); z_order + 1];
    for k in 0..=z_order / 2 {
        c[2 * k] = rat(1, 1) / (factorial(2 * k + 1) * num_traits::pow(int(2), 2 * k));
    }
    ZSeries::from_coeffs(c).invert().expect("constant term 1")
}

/// Lifts a rational `z`-series to a kernel with constant `q`-series
/// coefficients.
pub fn constant_kernel(f: &ZSeries<Rational>, q_order: usize) -> KernelSeries {
    f.map(|c| QSeries::constant(c.clone(), q_order))
}

/// The `A-hat` class of a rank-`m` bundle through `degree_cap`, from the
/// root expansion of `prod (y_i/2)/sinh(y_i/2)`.
pub fn a_hat_class(m: usize, degree_cap: u32) -> GradedPolynomial {
    let z_order = (degree_cap / 2) as usize;
    let k = constant_kernel(&a_hat_kernel(z_order), 0);
    let expanded = expand_symmetric_product(&k, &SymmetricContext::new(m / 2, degree_cap))
        .expect("normalized kernel");
    collapse_z(&expanded).coeff(0).clone()
}

/// `psi(z, q) = prod_i z y_i / sigma(z y_i, q)` in the Pontryagin symbols of
/// `m/2` roots: the `z^{2n}` coefficient has degree `4n`.
pub fn witten_kernel_psi(m: usize, q_order: usize, degree_cap: u32) -> ZSeries<GradedSeries> {
    let z_order = (degree_cap / 2) as usize;
    let k = sigma_inverse_kernel(z_order, q_order);
    expand_symmetric_product(&k, &SymmetricContext::new(m / 2, degree_cap)).expect("normalized kernel")
}

/// `G2 p1` as a graded series.
pub fn g2_p1(q_order: usize) -> GradedSeries {
    gs_from_scalar(&eisenstein_series(2, q_order).scale(&rat(-1, 24)), &GradedPolynomial::p(1))
}

/// Per-`q`-power data of `A-hat(V) ch(tensor S_{q^j} V_C)` for a rank-`m`
/// bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassTower {
    pub fiber_dim: usize,
    pub degree_cap: u32,
    pub q_order: usize,
    pub a_hat: GradedPolynomial,
    /// `A-hat(V) ch(V_n)` for `n = 0 .. q_order`.
    pub products: Vec<GradedPolynomial>,
    /// `ch(V_n)` for `n = 0 .. q_order`.
    pub chern: Vec<GradedPolynomial>,
}

impl ClassTower {
    /// Rank of `V_n`.
    pub fn rank(&self, n: usize) -> Rational {
        self.chern[n].constant_term()
    }

    pub fn ch_component(&self, n: usize, degree: u32) -> GradedPolynomial {
        self.chern[n].homogeneous_part(degree)
    }
}

/// Tower route: `prod (1-q^n)^{-m} psi(1, q) e^{G2 p1}`, split by powers of
/// `q`, with `ch(V_n)` recovered by dividing out `A-hat`.
pub fn twisted_ch_tower(m: usize, n_max: usize, degree_cap: u32, q_order: usize) -> ClassTower {
    assert!(n_max <= q_order, "n_max must not exceed q_order");
    let psi = collapse_z(&witten_kernel_psi(m, q_order, degree_cap));
    let with_g2 = gs_mul_capped(&psi, &gs_exp_capped(&g2_p1(q_order), degree_cap), degree_cap);
    let total = gs_truncate_degree(&with_g2.mul_scalar_series(&eta_inverse_power(m as u32, q_order)), degree_cap);
    tower_from_total(m, n_max, degree_cap, q_order, &total)
}

fn tower_from_total(m: usize, n_max: usize, degree_cap: u32, q_order: usize, total: &GradedSeries) -> ClassTower {
    let a_hat = total.coeff(0).clone();
    let inv = a_hat.inverse_capped(degree_cap).expect("A-hat starts with 1");
    let products: Vec<GradedPolynomial> = (0..=n_max).map(|n| total.coeff(n).clone()).collect();
    let chern = products.iter().map(|p| p.mul_capped(&inv, degree_cap)).collect();
    ClassTower { fiber_dim: m, degree_cap, q_order, a_hat, products, chern }
}

/// `prod_{j>=1} (1 - q^j e^z)(1 - q^j e^{-z})` by direct multiplication.
fn symmetric_product_kernel(z_order: usize, q_order: usize) -> KernelSeries {
    let mut f = KernelSeries::from_coeffs(vec![QSeries::zero(q_order); z_order + 1]);
    f.set(0, QSeries::one(q_order));
    for j in 1..=q_order {
        f = mul_exp_factor(&f, &int(-1), j, 1);
        f = mul_exp_factor(&f, &int(-1), j, -1);
    }
    f
}

/// Direct route: expands the generating series of the `V_n` per root,
/// `prod_j 1/((1 - q^j e^y)(1 - q^j e^{-y}))`, symmetrizes, and returns
/// `ch(V_n)` for `n = 0 .. n_max` together with `A-hat` from its own root
/// expansion.
pub fn twisted_ch_direct(m: usize, n_max: usize, degree_cap: u32, q_order: usize) -> ClassTower {
    assert!(n_max <= q_order);
    let z_order = (degree_cap / 2) as usize;
    let d = symmetric_product_kernel(z_order, q_order);
    // G / G(0) = D(0) / D(z)
    let g = d.invert().expect("unit constant term").scale_by(d.coeff(0));
    let expanded = expand_symmetric_product(&g, &SymmetricContext::new(m / 2, degree_cap))
        .expect("normalized kernel");
    let d0 = d.coeff(0).clone();
    // G(0)^{m/2} = prod (1-q^j)^{-m}
    let rank_series = d0.pow((m / 2) as u32).invert().expect("unit constant term");
    let ch = collapse_z(&expanded).mul_scalar_series(&rank_series);
    let a_hat = a_hat_class(m, degree_cap);
    let chern: Vec<GradedPolynomial> = (0..=n_max).map(|n| ch.coeff(n).clone()).collect();
    let products = chern.iter().map(|c| c.mul_capped(&a_hat, degree_cap)).collect();
    ClassTower { fiber_dim: m, degree_cap, q_order, a_hat, products, chern }
}

/// `A-hat(V) ch(tensor S_{q^j} V_C)` as a single graded series, direct route.
pub fn a_hat_ch_series(m: usize, degree_cap: u32, q_order: usize) -> GradedSeries {
    let t = twisted_ch_direct(m, q_order, degree_cap, q_order);
    GradedSeries::from_coeffs(t.products)
}

/// Convenience: `psi(1, q)` as a graded series.
pub fn psi_at_one(m: usize, q_order: usize, degree_cap: u32) -> GradedSeries {
    collapse_z(&witten_kernel_psi(m, q_order, degree_cap))
}

/// Constant graded series `1`.
pub fn graded_one(q_order: usize) -> GradedSeries {
    gs_constant(GradedPolynomial::one(), q_order)
}

/// Checks that every odd `z` coefficient of an even kernel vanishes.
pub fn odd_part_vanishes<A: Module>(k: &PowerSeries<A>) -> bool {
    k.coeffs().iter().skip(1).step_by(2).all(Module::vanishes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympoly::Monomial;

    fn p(i: usize) -> GradedPolynomial {
        GradedPolynomial::p(i)
    }

    #[test]
    fn sigma_kernel_low_coefficients() {
        let k = sigma_inverse_kernel(6, 4);
        assert!(k.coeff(2).is_zero());
        assert_eq!(*k.coeff(4), eisenstein_series(4, 4).scale(&rat(1, 2880)));
        assert_eq!(*k.coeff(6), eisenstein_series(6, 4).scale(&rat(-1, 181440)));
        assert_eq!(*k.coeff(0), QSeries::one(4));
        assert!(odd_part_vanishes(&k));
    }

    #[test]
    fn theta_leading_term() {
        let t = theta_kernel(ThetaKind::Theta1, 3, 2);
        assert_eq!(*t.coeff(1).coeff(1), int(1));
        assert!(t.coeff(0).is_zero());
    }

    #[test]
    fn theta_prime_is_eta_cubed() {
        let u_order = 8 * 6 + 7;
        let t = theta_kernel_u(ThetaKind::Theta1, 1, u_order);
        assert_eq!(*t.coeff(1), eta_cubed_u(u_order));
        // Jacobi: eta^3 = sum (-1)^n (2n+1) q^{(2n+1)^2 / 8}
        let mut jacobi = QSeries::zero(u_order);
        let mut n = 0;
        while (2 * n + 1) * (2 * n + 1) <= u_order {
            let c = if n % 2 == 0 { int(2 * n as i64 + 1) } else { int(-(2 * n as i64 + 1)) };
            jacobi.set((2 * n + 1) * (2 * n + 1), c);
            n += 1;
        }
        assert_eq!(*t.coeff(1), jacobi);
    }

    #[test]
    fn theta3_has_half_integral_steps() {
        let t = theta_kernel(ThetaKind::Theta3, 0, 2);
        // 1 + 2 u^4 + ... : q^{1/2} appears
        assert_eq!(*t.coeff(0).coeff(4), int(2));
        assert!(u_to_q(t.coeff(0)).is_err());
    }

    #[test]
    fn a_hat_low_degrees() {
        let a = a_hat_class(8, 8);
        assert_eq!(a.homogeneous_part(4), p(1).scale(&rat(-1, 24)));
        let deg8 = p(1).mul(&p(1)).scale(&int(7)).sub(&p(2).scale(&int(4))).scale(&rat(1, 5760));
        assert_eq!(a.homogeneous_part(8), deg8);
    }

    #[test]
    fn psi_z4_coefficient() {
        let psi = witten_kernel_psi(8, 3, 8);
        let f2 = eisenstein_series(4, 3).scale(&rat(1, 2880));
        let f4 = eisenstein_series(6, 3).scale(&rat(-1, 181440));
        assert!(psi.coeff(2).is_zero());
        let expected = gs_from_scalar(&f2, &p(2).scale(&int(-2)))
            .add(&gs_from_scalar(&f2, &p(1).mul(&p(1))));
        assert_eq!(*psi.coeff(4), expected);
        let six = gs_from_scalar(&f4, &p(1).mul(&p(1)).mul(&p(1)).sub(&p(1).mul(&p(2)).scale(&int(3))).add(&p(3).scale(&int(3))));
        let psi12 = witten_kernel_psi(8, 3, 12);
        assert_eq!(*psi12.coeff(6), six);
    }

    #[test]
    fn v_one_character() {
        let t = twisted_ch_direct(8, 2, 12, 2);
        let ch1 = &t.chern[1];
        assert_eq!(ch1.constant_term(), int(8));
        assert_eq!(ch1.homogeneous_part(4), p(1));
        assert_eq!(ch1.homogeneous_part(8), p(1).mul(&p(1)).sub(&p(2).scale(&int(2))).scale(&rat(1, 12)));
        assert_eq!(t.rank(2), int(44));
        assert_eq!(t.chern[0], GradedPolynomial::one());
        assert_eq!(t.chern[0].coefficient(&Monomial::one()), int(1));
    }

    #[test]
    fn routes_agree_small() {
        let a = twisted_ch_direct(6, 2, 8, 2);
        let b = twisted_ch_tower(6, 2, 8, 2);
        assert_eq!(a.chern, b.chern);
        assert_eq!(a.a_hat, b.a_hat);
    }
}
