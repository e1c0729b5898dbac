//! Exhaustive enumeration over every ring assignment on tiny instances.
//!
//! Each ring is indexed by its position in colexicographic order and ring
//! intersections are tabulated once. Assignments are visited by an odometer
//! over ring indices, partitioned on the first node's ring.

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample::rings_intersect;
use crate::error::{CoreError, Result};
use crate::exact::{binom, KeyParams, Rational};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// All K-subsets of `0..P` in colexicographic order.
pub fn colex_subsets(theta: &KeyParams) -> Vec<Vec<u32>> {
    let (k, p) = (theta.k() as usize, theta.p() as u32);
    let mut out = Vec::new();
    let mut c: Vec<u32> = (0..k as u32).collect();
    loop {
        out.push(c.clone());
        // advance the lowest position that can move without colliding
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { c[i + 1] } else { p };
            if c[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            return out;
        }
        c[i] += 1;
        for (j, slot) in c.iter_mut().enumerate().take(i) {
            *slot = j as u32;
        }
    }
}

struct RingTable {
    m: usize,
    meets: Vec<bool>,
}

impl RingTable {
    fn new(rings: &[Vec<u32>]) -> Self {
        let m = rings.len();
        let mut meets = vec![false; m * m];
        for a in 0..m {
            for b in 0..m {
                meets[a * m + b] = rings_intersect(&rings[a], &rings[b]);
            }
        }
        Self { m, meets }
    }

    #[inline]
    fn adj(&self, a: usize, b: usize) -> bool {
        self.meets[a * self.m + b]
    }
}

fn require_feasible(m: u64, nodes: u32, cap: u64) -> Result<()> {
    let required = BigInt::from(m).pow(nodes);
    if required > BigInt::from(cap) {
        return Err(CoreError::Infeasible {
            required: required.to_string(),
            cap,
        });
    }
    Ok(())
}

/// Visits every tuple in `0..m`^len whose first entry is `first`.
fn for_each_tuple(m: usize, len: usize, first: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; len];
    idx[0] = first;
    loop {
        visit(&idx);
        let mut pos = len - 1;
        loop {
            if pos == 0 {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos -= 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub n: u64,
    pub theta: KeyParams,
    pub p_triangle: Rational,
    pub e_t: Rational,
    pub e_t2: Rational,
    /// `C(P,K)^n`, the common denominator before reduction.
    pub assignments: BigInt,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hits: u64,
    sum_t: u128,
    sum_t2: u128,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            hits: self.hits + o.hits,
            sum_t: self.sum_t + o.sum_t,
            sum_t2: self.sum_t2 + o.sum_t2,
        }
    }
}

fn count_in_assignment(table: &RingTable, idx: &[usize]) -> u64 {
    let n = idx.len();
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            if !table.adj(idx[i], idx[j]) {
                continue;
            }
            for k in j + 1..n {
                if table.adj(idx[i], idx[k]) && table.adj(idx[j], idx[k]) {
                    t += 1;
                }
            }
        }
    }
    t
}

/// Exact `P[T>0]`, `E[T]` and `E[T^2]` by enumerating all `C(P,K)^n`
/// assignments. Refuses when that count exceeds `cap`.
pub fn brute_force_moments(n: u64, theta: &KeyParams, cap: u64) -> Result<BruteForceReport> {
    if n < 3 {
        return Err(CoreError::TooFewNodes { n });
    }
    let m_big = binom(theta.p() as i64, theta.k() as i64);
    let m = m_big.to_u64().unwrap_or(u64::MAX);
    let nodes = u32::try_from(n).map_err(|_| CoreError::Infeasible {
        required: format!("{m_big}^{n}"),
        cap,
    })?;
    require_feasible(m, nodes, cap)?;

    let rings = colex_subsets(theta);
    let table = RingTable::new(&rings);
    let m = rings.len();
    let len = n as usize;

    let tally = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut acc = Tally::default();
            for_each_tuple(m, len, first, |idx| {
                let t = count_in_assignment(&table, idx);
                if t > 0 {
                    acc.hits += 1;
                }
                acc.sum_t += t as u128;
                acc.sum_t2 += (t as u128) * (t as u128);
            });
            acc
        })
        .reduce(Tally::default, Tally::merge);

    let total = BigInt::from(m).pow(nodes);
    let ratio = |x: BigInt| Rational::new(x, total.clone());
    Ok(BruteForceReport {
        n,
        theta: *theta,
        p_triangle: ratio(BigInt::from(tally.hits)),
        e_t: ratio(BigInt::from(tally.sum_t)),
        e_t2: ratio(BigInt::from(tally.sum_t2)),
        assignments: total,
    })
}

/// Enumeration over four rings `K_1..K_4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourRingReport {
    pub theta: KeyParams,
    /// `P[triangles 123 and 124 both present]`
    pub cross: Rational,
    /// `c[k] = P[|K_1 ∩ K_2| = k, K_3 and K_4 both disjoint from K_1 ∪ K_2]`
    pub c: Vec<Rational>,
    pub assignments: BigInt,
}

/// Oracle for the cross moment and the `c_k` terms over `C(P,K)^4`
/// assignments.
pub fn brute_force_four_rings(theta: &KeyParams, cap: u64) -> Result<FourRingReport> {
    let m = binom(theta.p() as i64, theta.k() as i64)
        .to_u64()
        .unwrap_or(u64::MAX);
    require_feasible(m, 4, cap)?;
    let rings = colex_subsets(theta);
    let table = RingTable::new(&rings);
    let m = rings.len();
    let kk = theta.k() as usize;

    let overlap: Vec<usize> = (0..m * m)
        .map(|ab| {
            let (a, b) = (ab / m, ab % m);
            rings[a].iter().filter(|x| rings[b].contains(x)).count()
        })
        .collect();

    let (cross, c) = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut cross = 0u64;
            let mut c = vec![0u64; kk + 1];
            for_each_tuple(m, 4, a, |idx| {
                let (a, b, x, y) = (idx[0], idx[1], idx[2], idx[3]);
                if table.adj(a, b)
                    && table.adj(a, x)
                    && table.adj(b, x)
                    && table.adj(a, y)
                    && table.adj(b, y)
                {
                    cross += 1;
                }
                if !table.adj(a, x) && !table.adj(b, x) && !table.adj(a, y) && !table.adj(b, y) {
                    c[overlap[a * m + b]] += 1;
                }
            });
            (cross, c)
        })
        .reduce(
            || (0, vec![0; kk + 1]),
            |(x1, c1), (x2, c2)| (x1 + x2, c1.iter().zip(&c2).map(|(a, b)| a + b).collect()),
        );

    let total = BigInt::from(m).pow(4u32);
    let ratio = |x: u64| Rational::new(BigInt::from(x), total.clone());
    Ok(FourRingReport {
        theta: *theta,
        cross: ratio(cross),
        c: c.into_iter().map(ratio).collect(),
        assignments: total,
    })
}

/// `P[triangle on three fixed nodes]` by enumerating three rings.
pub fn brute_force_beta(theta: &KeyParams, cap: u64) -> Result<Rational> {
    Ok(brute_force_moments(3, theta, cap)?.p_triangle)
}

impl BruteForceReport {
    /// `e_t2 - e_t^2`.
    pub fn variance(&self) -> Rational {
        &self.e_t2 - &self.e_t * &self.e_t
    }

    /// Checks the report's own invariants.
    pub fn is_consistent(&self) -> bool {
        self.p_triangle >= Rational::zero()
            && self.p_triangle <= Rational::one()
            && self.e_t2 >= self.e_t
            && self.e_t2 >= &self.e_t * &self.e_t
    }
}
