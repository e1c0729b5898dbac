//! The integer pair `F(K,P)`, `G(K,P)` with
//! `c_0 + ... + c_4 - q^4 = F / G`, and the expansion of `F` as a degree-4K
//! polynomial in `P`.
//!
//! `F = sum_{k<=4} k! C(K,k)^2 b_{K,k}(P) - b_K(P)` where both `b` terms are
//! products of linear factors `(P - root)`. Coefficients are obtained by
//! multiplying in one factor at a time.

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{CoreError, Result};
use crate::exact::{binom, c_sum, q_theta, KeyParams, Rational};

/// Highest overlap index kept in the truncated sum defining `F`.
pub const TRUNCATION: u64 = 4;

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `(K!)^4 [ sum_{k=0}^{4} C(P,K) C(K,k) C(P-K,K-k) C(P-2K+k,K)^2 - C(P-K,K)^4 ]`.
pub fn f_theta(theta: &KeyParams) -> Result<BigInt> {
    theta.require_triangle_regime()?;
    let (k, p) = (theta.k() as i64, theta.p() as i64);
    let rings = binom(p, k);
    let mut sum = BigInt::zero();
    for j in 0..=TRUNCATION as i64 {
        let avoid = binom(p - 2 * k + j, k);
        sum += &rings * binom(k, j) * binom(p - k, k - j) * &avoid * &avoid;
    }
    let disjoint = binom(p - k, k);
    sum -= disjoint.pow(4u32);
    Ok(factorial(theta.k()).pow(4u32) * sum)
}

/// `(P! / (P-K)!)^4`.
pub fn g_theta(theta: &KeyParams) -> BigInt {
    (0..theta.k())
        .map(|l| BigInt::from(theta.p() - l).pow(4u32))
        .product()
}

/// Returns `F/G` after checking it equals `sum_{k<=min(4,K)} c_k - q^4`
/// evaluated independently through the exact probability formulas.
pub fn verify_fg_identity(theta: &KeyParams) -> Result<Rational> {
    let f = f_theta(theta)?;
    let lhs = Rational::new(f, g_theta(theta));
    let q = q_theta(theta);
    let q2 = &q * &q;
    let rhs = c_sum(theta, TRUNCATION) - &q2 * &q2;
    if lhs != rhs {
        return Err(CoreError::IdentityViolation {
            what: format!("F/G at {theta}"),
            left: lhs.to_string(),
            right: rhs.to_string(),
        });
    }
    Ok(lhs)
}

/// Coefficients `rho_0..rho_M` of `prod_m (x - r_m)`, where `rho_m` multiplies
/// `x^(M-m)`. Built by multiplying in one linear factor at a time.
pub fn elementary_symmetric_coeffs(roots: &[i64]) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for &root in roots {
        let root = BigInt::from(root);
        let mut next = coeffs.clone();
        next.push(BigInt::zero());
        for (m, c) in coeffs.iter().enumerate() {
            next[m + 1] -= c * &root;
        }
        coeffs = next;
    }
    coeffs
}

/// Roots of `b_{K,k}(P) = prod_{i=1}^{K} (P-3K+k+i) * prod_{j=1}^{3K-k} (P-3K+k+j)`.
fn overlap_term_roots(k_ring: u64, k: u64) -> Vec<i64> {
    let base = (3 * k_ring - k) as i64;
    let first = (1..=k_ring as i64).map(|i| base - i);
    let second = (1..=base).map(|j| base - j);
    first.chain(second).collect()
}

/// Roots of `b_K(P) = (prod_{i=K}^{2K-1} (P - i))^4`.
fn disjoint_term_roots(k_ring: u64) -> Vec<i64> {
    (k_ring as i64..2 * k_ring as i64)
        .flat_map(|i| std::iter::repeat_n(i, 4))
        .collect()
}

/// `F(K, P)` as a polynomial in `P`: `coeffs[l]` multiplies `P^(4K-l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyInP {
    pub k: u64,
    pub coeffs: Vec<BigInt>,
}

impl PolyInP {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_l(K)`, zero past the degree.
    pub fn coeff(&self, l: usize) -> BigInt {
        self.coeffs.get(l).cloned().unwrap_or_default()
    }

    /// Horner evaluation at `P`.
    pub fn eval(&self, p: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc * p + c)
    }
}

/// Expands `F` into the integer coefficients `a_0(K)..a_{4K}(K)`.
pub fn expand_coefficients(k_ring: u64) -> Result<PolyInP> {
    if k_ring == 0 {
        return Err(CoreError::InvalidParams { k: 0, p: 0 });
    }
    let degree = 4 * k_ring as usize;
    let mut acc = vec![Rational::zero(); degree + 1];

    for k in 0..=TRUNCATION.min(k_ring) {
        let weight = factorial(k) * binom(k_ring as i64, k as i64).pow(2u32);
        let weight = Rational::from_integer(weight);
        // b_{K,k} has degree 4K-k, so its rho_m lands on a_{m+k}
        for (m, rho) in elementary_symmetric_coeffs(&overlap_term_roots(k_ring, k))
            .into_iter()
            .enumerate()
        {
            acc[m + k as usize] += &weight * Rational::from_integer(rho);
        }
    }
    for (l, rho) in elementary_symmetric_coeffs(&disjoint_term_roots(k_ring))
        .into_iter()
        .enumerate()
    {
        acc[l] -= Rational::from_integer(rho);
    }

    let coeffs = acc
        .into_iter()
        .enumerate()
        .map(|(l, a)| {
            if a.is_integer() {
                Ok(a.to_integer())
            } else {
                Err(CoreError::IntegralityViolation {
                    what: format!("a_{l}({k_ring})"),
                    value: a.to_string(),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyInP { k: k_ring, coeffs })
}

/// `a_3(K) = K^4`.
pub fn closed_form_a3(k: u64) -> BigInt {
    BigInt::from(k).pow(4u32)
}

/// `a_4(K) = -6K^6 + 6K^5 - K^4`.
pub fn closed_form_a4(k: u64) -> BigInt {
    let k = BigInt::from(k);
    -BigInt::from(6) * k.clone().pow(6u32) + BigInt::from(6) * k.clone().pow(5u32) - k.pow(4u32)
}

/// `(numerator, denominator, power of K)` terms of the degree-10 closed form
/// of `a_5(K)`.
const A5_TERMS: [(i64, i64, u32); 9] = [
    (-1, 120, 10),
    (1, 6, 9),
    (199, 12, 8),
    (-34, 1, 7),
    (1207, 120, 6),
    (161, 6, 5),
    (-209, 6, 4),
    (20, 1, 3),
    (-24, 5, 2),
];

fn eval_terms(terms: &[(i64, i64, u32)], k: u64) -> Rational {
    let k = BigInt::from(k);
    terms
        .iter()
        .map(|&(n, d, e)| Rational::new(n.into(), d.into()) * k.clone().pow(e))
        .fold(Rational::zero(), |acc, t| acc + t)
}

/// Closed form of `a_5(K)` as a rational; see [`closed_form_a5`].
pub fn closed_form_a5_rational(k: u64) -> Rational {
    eval_terms(&A5_TERMS, k)
}

/// Closed form of `a_5(K)`; errors if the rational polynomial does not land
/// on an integer.
pub fn closed_form_a5(k: u64) -> Result<BigInt> {
    let v = closed_form_a5_rational(k);
    if v.is_integer() {
        Ok(v.to_integer())
    } else {
        Err(CoreError::IntegralityViolation {
            what: format!("closed-form a_5({k})"),
            value: v.to_string(),
        })
    }
}

/// `a_5(K) + K^10 / 240`, whose leading coefficient is `-1/240`.
pub fn a5_star(k: u64) -> Rational {
    closed_form_a5_rational(k) + Rational::new(BigInt::from(k).pow(10u32), BigInt::from(240))
}

/// Smallest `K0 <= k_max` such that `a5_star(K) < 0` for every `K` in
/// `K0..=k_max`; `None` if `a5_star(k_max) >= 0`.
pub fn a5_star_negative_from(k_max: u64) -> Option<u64> {
    let mut k0 = None;
    for k in (1..=k_max).rev() {
        if a5_star(k) < Rational::zero() {
            k0 = Some(k);
        } else {
            break;
        }
    }
    k0
}

/// Closed-form value for `a_l(K)`, `l <= 5`.
pub fn closed_form(l: usize, k: u64) -> Result<BigInt> {
    match l {
        0..=2 => Ok(BigInt::zero()),
        3 => Ok(closed_form_a3(k)),
        4 => Ok(closed_form_a4(k)),
        5 => closed_form_a5(k),
        _ => Err(CoreError::IndexOutOfRange {
            k: l as u64,
            max: 5,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormCheck {
    pub k: u64,
    pub l: usize,
    pub expanded: BigInt,
    pub closed: BigInt,
    /// Agreement is only required for `K >= 4`; smaller `K` is recorded.
    pub required: bool,
}

impl ClosedFormCheck {
    pub fn matches(&self) -> bool {
        self.expanded == self.closed
    }
}

/// Compares the expansion against the closed forms for `l = 0..=5`.
pub fn verify_coefficient_closed_forms(
    ks: impl IntoIterator<Item = u64>,
) -> Result<Vec<ClosedFormCheck>> {
    let mut rows = Vec::new();
    for k in ks {
        let poly = expand_coefficients(k)?;
        for l in 0..=5 {
            rows.push(ClosedFormCheck {
                k,
                l,
                expanded: poly.coeff(l),
                closed: closed_form(l, k)?,
                required: k >= 4,
            });
        }
    }
    Ok(rows)
}

/// Required rows whose values disagree.
pub fn closed_form_mismatches(rows: &[ClosedFormCheck]) -> Vec<&ClosedFormCheck> {
    rows.iter().filter(|r| r.required && !r.matches()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub k: u64,
    pub l: usize,
    pub coeff: BigInt,
    /// `2 (12 K^2)^l`
    pub bound: BigInt,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.coeff.abs() <= self.bound
    }
}

pub fn coefficient_bound(k: u64, l: usize) -> BigInt {
    BigInt::from(2) * BigInt::from(12 * k * k).pow(l as u32)
}

/// Checks `|a_l(K)| <= 2 (12 K^2)^l` for every `l = 0..=4K`.
pub fn verify_coefficient_bound(k: u64) -> Result<Vec<BoundCheck>> {
    let poly = expand_coefficients(k)?;
    Ok(poly
        .coeffs
        .iter()
        .enumerate()
        .map(|(l, a)| BoundCheck {
            k,
            l,
            coeff: a.clone(),
            bound: coefficient_bound(k, l),
        })
        .collect())
}

/// Whether `F(K,P) <= K^4 P^(4K-3)` at this point. This holds only
/// eventually along admissible scalings, so it is reported, not enforced.
pub fn verify_f_bound(theta: &KeyParams) -> Result<bool> {
    let f = f_theta(theta)?;
    let rhs =
        BigInt::from(theta.k()).pow(4u32) * BigInt::from(theta.p()).pow((4 * theta.k() - 3) as u32);
    Ok(f <= rhs)
}

/// `F / (K^4 P^(4K-3))`, the slack in the F bound.
pub fn f_bound_ratio(theta: &KeyParams) -> Result<Rational> {
    let f = f_theta(theta)?;
    let rhs =
        BigInt::from(theta.k()).pow(4u32) * BigInt::from(theta.p()).pow((4 * theta.k() - 3) as u32);
    Ok(Rational::new(f, rhs))
}
