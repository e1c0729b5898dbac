//! Closed-form probabilities and triangle-count moments for the random key
//! graph, evaluated over exact big rationals.
//!
//! Every function here is pure. Nothing is rounded; conversion to `f64`
//! only happens at reporting boundaries.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Exact rational value. Always reduced, denominator positive.
pub type Rational = BigRational;

/// Ring size `K` and pool size `P` of the key predistribution scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyParams {
    k: u64,
    p: u64,
}

impl KeyParams {
    pub fn new(k: u64, p: u64) -> Result<Self> {
        if k == 0 || k > p {
            return Err(CoreError::InvalidParams { k, p });
        }
        Ok(Self { k, p })
    }

    /// Key ring size.
    pub fn k(&self) -> u64 {
        self.k
    }

    /// Key pool size.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// `P < 2K`: every pair of rings intersects and the graph is complete.
    pub fn is_complete(&self) -> bool {
        self.p < 2 * self.k
    }

    /// `3K <= P`, the regime where the F/G decomposition applies.
    pub fn in_triangle_regime(&self) -> bool {
        3 * self.k <= self.p
    }

    pub(crate) fn require_triangle_regime(&self) -> Result<()> {
        if self.in_triangle_regime() {
            Ok(())
        } else {
            Err(CoreError::OutsideRegime {
                k: self.k,
                p: self.p,
            })
        }
    }
}

impl fmt::Display for KeyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(K={}, P={})", self.k, self.p)
    }
}

pub(crate) fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub(crate) fn frac(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

/// Binomial coefficient with the zero convention: `C(n, k) = 0` whenever
/// `k < 0`, `k > n` or `n < 0`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

fn ring_count(theta: &KeyParams) -> BigInt {
    binom(theta.p as i64, theta.k as i64)
}

/// Probability that a uniform K-ring avoids a fixed set of `s` keys:
/// `C(P - s, K) / C(P, K)`.
pub fn subset_avoidance(theta: &KeyParams, s: u64) -> Rational {
    let (k, p) = (theta.k as i64, theta.p as i64);
    frac(binom(p - s as i64, k), ring_count(theta))
}

/// Probability that two rings are disjoint.
pub fn q_theta(theta: &KeyParams) -> Rational {
    subset_avoidance(theta, theta.k)
}

/// Probability that a ring avoids a fixed set of `2K` keys.
pub fn r_theta(theta: &KeyParams) -> Rational {
    subset_avoidance(theta, 2 * theta.k)
}

/// Probability that three given nodes form a triangle:
/// `(1-q)^3 + q^3 - q r`.
pub fn beta_theta(theta: &KeyParams) -> Rational {
    let q = q_theta(theta);
    let r = r_theta(theta);
    let edge = Rational::one() - &q;
    cube(&edge) + cube(&q) - &q * r
}

/// `K^3/P^2 + (K^2/P)^3`.
pub fn tau_theta(theta: &KeyParams) -> Rational {
    let k = int(theta.k);
    let p = int(theta.p);
    cube(&k) / (&p * &p) + cube(&(&k * &k / &p))
}

/// Joint edge-pattern probabilities for a node and two others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEventProbs {
    /// Node 1 adjacent to both 2 and 3: `(1-q)^2`.
    pub both_adjacent: Rational,
    /// Adjacent to exactly one given one of them: `q(1-q)`.
    pub one_adjacent: Rational,
    /// Adjacent to neither: `q^2`.
    pub neither_adjacent: Rational,
}

impl PairEventProbs {
    /// Sum of the four cells (the mixed cell counted twice). Always one.
    pub fn total(&self) -> Rational {
        &self.both_adjacent + &self.one_adjacent * int(2) + &self.neither_adjacent
    }
}

pub fn pair_event_probs(theta: &KeyParams) -> PairEventProbs {
    let q = q_theta(theta);
    let edge = Rational::one() - &q;
    PairEventProbs {
        both_adjacent: &edge * &edge,
        one_adjacent: &q * &edge,
        neither_adjacent: &q * &q,
    }
}

/// Probability that rings 1 and 2 share exactly `k` keys while their union
/// avoids both ring 3 and ring 4.
pub fn c_k(theta: &KeyParams, k: u64) -> Result<Rational> {
    if k > theta.k {
        return Err(CoreError::IndexOutOfRange { k, max: theta.k });
    }
    Ok(c_k_unchecked(theta, k))
}

fn c_k_unchecked(theta: &KeyParams, k: u64) -> Rational {
    let (kk, p, k) = (theta.k as i64, theta.p as i64, k as i64);
    let rings = ring_count(theta);
    let overlap = frac(binom(kk, k) * binom(p - kk, kk - k), rings.clone());
    let avoid = frac(binom(p - 2 * kk + k, kk), rings);
    overlap * &avoid * &avoid
}

/// `c_0 + ... + c_m` with `m = min(upto, K)`.
pub fn c_sum(theta: &KeyParams, upto: u64) -> Rational {
    (0..=upto.min(theta.k))
        .map(|k| c_k_unchecked(theta, k))
        .fold(Rational::zero(), |acc, c| acc + c)
}

/// `E[chi_123 chi_124]`, the probability that two triangles sharing the edge
/// {1, 2} are both present. Independent of `n`.
pub fn cross_moment(theta: &KeyParams) -> Rational {
    let q = q_theta(theta);
    // complete graph: both triangles are certain
    if q.is_zero() {
        return Rational::one();
    }
    let edge = Rational::one() - &q;
    let beta = beta_theta(theta);
    let edge2 = &edge * &edge;
    let edge3 = &edge2 * &edge;
    let excess = &beta - &edge3;
    let q2 = &q * &q;

    -(&edge3 * &edge2) + int(2) * &edge2 * &beta - &excess * &excess / &q + c_sum(theta, theta.k)
        - &q2 * &q2
}

fn require_nodes(n: u64) -> Result<()> {
    if n < 3 {
        Err(CoreError::TooFewNodes { n })
    } else {
        Ok(())
    }
}

fn triples(n: u64) -> BigInt {
    binom(n as i64, 3)
}

/// `E[T_n] = C(n,3) beta`.
pub fn first_moment(n: u64, theta: &KeyParams) -> Result<Rational> {
    require_nodes(n)?;
    Ok(Rational::from_integer(triples(n)) * beta_theta(theta))
}

/// Weight of `E[T]^2` in the second moment, contributed by vertex-disjoint
/// triangle pairs and pairs sharing one vertex.
fn independent_pair_weight(n: u64) -> Rational {
    let n = n as i64;
    let all = binom(n, 3);
    frac(binom(n - 3, 3) + BigInt::from(3) * binom(n - 3, 2), all)
}

/// `E[T_n^2]`.
pub fn second_moment(n: u64, theta: &KeyParams) -> Result<Rational> {
    let first = first_moment(n, theta)?;
    let ni = n as i64;
    let shared_edge_pairs = binom(ni, 3) * binom(3, 2) * binom(ni - 3, 1);
    Ok(&first
        + independent_pair_weight(n) * &first * &first
        + Rational::from_integer(shared_edge_pairs) * cross_moment(theta))
}

/// `E[T_n^2] / E[T_n]^2`, evaluated through the normalised expression rather
/// than by dividing the two moments.
pub fn second_moment_ratio(n: u64, theta: &KeyParams) -> Result<Rational> {
    let first = first_moment(n, theta)?;
    let beta = beta_theta(theta);
    let shared = frac(BigInt::from(3 * (n as i64 - 3)), triples(n));
    Ok(first.recip() + independent_pair_weight(n) + shared * cross_moment(theta) / (&beta * &beta))
}

/// First and second moments of the triangle count for one `(n, theta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleMoments {
    pub n: u64,
    pub theta: KeyParams,
    pub first: Rational,
    pub second: Rational,
    pub cross: Rational,
    pub ratio: Rational,
}

impl TriangleMoments {
    pub fn compute(n: u64, theta: &KeyParams) -> Result<Self> {
        let first = first_moment(n, theta)?;
        let second = second_moment(n, theta)?;
        let ratio = second_moment_ratio(n, theta)?;
        let direct = &second / (&first * &first);
        if direct != ratio {
            return Err(CoreError::IdentityViolation {
                what: format!("second moment ratio at n={n}, {theta}"),
                left: ratio.to_string(),
                right: direct.to_string(),
            });
        }
        Ok(Self {
            n,
            theta: *theta,
            first,
            second,
            cross: cross_moment(theta),
            ratio,
        })
    }

    /// `E[T^2] - E[T]^2`.
    pub fn variance(&self) -> Rational {
        &self.second - &self.first * &self.first
    }
}

fn cube(x: &Rational) -> Rational {
    x * x * x
}

/// Lossy conversion for display and float comparisons.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
