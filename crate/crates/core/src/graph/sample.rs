//! Samplers for the random key graph and the Erdős–Rényi graph.

use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adjacency::Adjacency;
use crate::error::{CoreError, Result};
use crate::exact::{to_f64, KeyParams, Rational};

/// Random stream for a seed. Stream `i` of the same seed is used by Monte
/// Carlo trial `i`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one uniform K-subset of `0..P`, sorted ascending.
pub fn sample_ring<R: Rng + ?Sized>(theta: &KeyParams, rng: &mut R) -> Vec<u32> {
    let mut ring: Vec<u32> = index::sample(rng, theta.p() as usize, theta.k() as usize)
        .into_iter()
        .map(|x| x as u32)
        .collect();
    ring.sort_unstable();
    ring
}

/// Whether two sorted rings share a key (linear merge).
pub fn rings_intersect(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Adjacency induced by key rings: nodes holding a common key form a clique.
pub fn adjacency_from_rings(rings: &[Vec<u32>]) -> Adjacency {
    let mut holders: Vec<(u32, u32)> = rings
        .iter()
        .enumerate()
        .flat_map(|(node, ring)| ring.iter().map(move |&key| (key, node as u32)))
        .collect();
    holders.sort_unstable();

    let mut adj = Adjacency::empty(rings.len());
    for group in holders.chunk_by(|a, b| a.0 == b.0) {
        for (x, &(_, a)) in group.iter().enumerate() {
            for &(_, b) in &group[x + 1..] {
                adj.add_edge(a as usize, b as usize);
            }
        }
    }
    adj
}

/// One realisation of the random key graph.
#[derive(Debug, Clone)]
pub struct KeyGraphSample {
    pub n: usize,
    pub theta: KeyParams,
    pub seed: u64,
    pub rings: Vec<Vec<u32>>,
    pub adjacency: Adjacency,
}

impl KeyGraphSample {
    pub fn from_rings(theta: KeyParams, seed: u64, rings: Vec<Vec<u32>>) -> Self {
        let adjacency = adjacency_from_rings(&rings);
        Self {
            n: rings.len(),
            theta,
            seed,
            rings,
            adjacency,
        }
    }

    pub fn count_triangles(&self) -> u64 {
        self.adjacency.count_triangles()
    }

    /// Header line `n K P seed`, then one `i j` line per edge with `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "{} {} {} {}",
            self.n,
            self.theta.k(),
            self.theta.p(),
            self.seed
        )?;
        for (i, j) in self.adjacency.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }
}

pub fn sample_rings_with<R: Rng + ?Sized>(
    n: usize,
    theta: &KeyParams,
    rng: &mut R,
) -> Vec<Vec<u32>> {
    (0..n).map(|_| sample_ring(theta, rng)).collect()
}

/// `n` independent uniform K-rings; deterministic in `(n, theta, seed)`.
pub fn sample_key_rings(n: usize, theta: &KeyParams, seed: u64) -> KeyGraphSample {
    let mut rng = seeded_rng(seed, 0);
    let rings = sample_rings_with(n, theta, &mut rng);
    KeyGraphSample::from_rings(*theta, seed, rings)
}

/// Edge probability of an Erdős–Rényi graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EdgeProbability {
    Exact(Rational),
    Float(f64),
}

impl EdgeProbability {
    pub fn exact(p: Rational) -> Result<Self> {
        if p < Rational::zero() || p > Rational::one() {
            return Err(CoreError::InvalidProbability(p.to_string()));
        }
        Ok(Self::Exact(p))
    }

    pub fn float(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(CoreError::InvalidProbability(p.to_string()));
        }
        Ok(Self::Float(p))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Self::Exact(p) => to_f64(p),
            Self::Float(p) => *p,
        }
    }

    fn coin(&self) -> Coin {
        match self {
            Self::Float(p) => Coin::Float(*p),
            Self::Exact(p) if p.is_zero() => Coin::Never,
            Self::Exact(p) if p.is_one() => Coin::Always,
            Self::Exact(p) => match (p.numer().to_u64(), p.denom().to_u64()) {
                (Some(num), Some(den)) => Coin::Ratio { num, den },
                _ => {
                    // floor(p * 2^64); off from p by less than 2^-64
                    let scaled = (p * Rational::from_integer(BigInt::one() << 64)).floor();
                    Coin::Threshold(scaled.to_integer().to_u64().unwrap_or(u64::MAX))
                }
            },
        }
    }
}

enum Coin {
    Never,
    Always,
    Ratio { num: u64, den: u64 },
    Threshold(u64),
    Float(f64),
}

impl Coin {
    fn flip<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        match *self {
            Coin::Never => false,
            Coin::Always => true,
            Coin::Ratio { num, den } => rng.gen_range(0..den) < num,
            Coin::Threshold(t) => rng.next_u64() < t,
            Coin::Float(p) => rng.gen::<f64>() < p,
        }
    }
}

/// Erdős–Rényi adjacency with one independent draw per node pair.
pub fn er_adjacency_with<R: Rng + ?Sized>(n: usize, p: &EdgeProbability, rng: &mut R) -> Adjacency {
    let coin = p.coin();
    let mut adj = Adjacency::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if coin.flip(rng) {
                adj.add_edge(i, j);
            }
        }
    }
    adj
}

#[derive(Debug, Clone)]
pub struct ErdosRenyiSample {
    pub n: usize,
    pub p: EdgeProbability,
    pub seed: u64,
    pub adjacency: Adjacency,
}

impl ErdosRenyiSample {
    pub fn count_triangles(&self) -> u64 {
        self.adjacency.count_triangles()
    }
}

pub fn sample_er(n: usize, p: &EdgeProbability, seed: u64) -> ErdosRenyiSample {
    let mut rng = seeded_rng(seed, 0);
    let adjacency = er_adjacency_with(n, p, &mut rng);
    ErdosRenyiSample {
        n,
        p: p.clone(),
        seed,
        adjacency,
    }
}

/// A random graph model that can be sampled from a caller-supplied stream.
pub trait GraphModel: Sync {
    fn sample_adjacency(&self, n: usize, rng: &mut ChaCha8Rng) -> Adjacency;
}

impl GraphModel for KeyParams {
    fn sample_adjacency(&self, n: usize, rng: &mut ChaCha8Rng) -> Adjacency {
        adjacency_from_rings(&sample_rings_with(n, self, rng))
    }
}

impl GraphModel for EdgeProbability {
    fn sample_adjacency(&self, n: usize, rng: &mut ChaCha8Rng) -> Adjacency {
        er_adjacency_with(n, self, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_theta;

    fn th(k: u64, p: u64) -> KeyParams {
        KeyParams::new(k, p).unwrap()
    }

    #[test]
    fn full_pool_rings() {
        let g = sample_key_rings(3, &th(3, 3), 99);
        for ring in &g.rings {
            assert_eq!(ring, &vec![0, 1, 2]);
        }
        assert_eq!(g.count_triangles(), 1);
    }

    #[test]
    fn ring_invariants_and_adjacency_rule() {
        let theta = th(4, 30);
        let g = sample_key_rings(40, &theta, 5);
        for ring in &g.rings {
            assert_eq!(ring.len(), 4);
            assert!(ring.windows(2).all(|w| w[0] < w[1]));
            assert!(ring.iter().all(|&k| k < 30));
        }
        for i in 0..40 {
            assert!(!g.adjacency.has_edge(i, i));
            for j in 0..40 {
                if i != j {
                    assert_eq!(
                        g.adjacency.has_edge(i, j),
                        rings_intersect(&g.rings[i], &g.rings[j])
                    );
                    assert_eq!(g.adjacency.has_edge(i, j), g.adjacency.has_edge(j, i));
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_key_rings(25, &th(2, 30), 11);
        let b = sample_key_rings(25, &th(2, 30), 11);
        let c = sample_key_rings(25, &th(2, 30), 12);
        assert_eq!(a.rings, b.rings);
        assert_eq!(a.adjacency, b.adjacency);
        assert_ne!(a.rings, c.rings);
    }

    #[test]
    fn singleton_rings_triangle() {
        let g = KeyGraphSample::from_rings(th(1, 4), 0, vec![vec![0], vec![0], vec![0], vec![1]]);
        assert_eq!(g.count_triangles(), 1);
    }

    #[test]
    fn complete_when_pool_small() {
        let g = sample_key_rings(4, &th(2, 3), 1);
        assert_eq!(g.count_triangles(), 4);
    }

    #[test]
    fn ring_frequencies_uniform() {
        // K=1, P=2: each ring is {0} or {1} with probability 1/2
        let theta = th(1, 2);
        let draws = 100_000u64;
        let mut rng = seeded_rng(2024, 0);
        let zeros = (0..draws)
            .filter(|_| sample_ring(&theta, &mut rng)[0] == 0)
            .count() as f64;
        let se = (draws as f64 * 0.25).sqrt();
        assert!((zeros - draws as f64 / 2.0).abs() < 4.0 * se);
    }

    #[test]
    fn edge_frequency_matches_one_minus_q() {
        let theta = th(2, 100);
        let g = sample_key_rings(10_000, &theta, 77);
        let pairs = 10_000f64 * 9_999.0 / 2.0;
        let p = 1.0 - to_f64(&q_theta(&theta));
        let observed = g.adjacency.edge_count() as f64 / pairs;
        // pairs share nodes, so this binomial standard error is only indicative;
        // the empirical tolerance is still generous at four of them
        let se = (p * (1.0 - p) / pairs).sqrt();
        assert!((observed - p).abs() < 4.0 * se, "{observed} vs {p}");
    }

    #[test]
    fn edge_list_format() {
        let g = KeyGraphSample::from_rings(th(1, 4), 9, vec![vec![0], vec![0], vec![2]]);
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "3 1 4 9\n0 1\n");
    }

    #[test]
    fn er_extremes() {
        let zero = EdgeProbability::exact(Rational::zero()).unwrap();
        let one = EdgeProbability::float(1.0).unwrap();
        assert_eq!(sample_er(30, &zero, 1).adjacency.edge_count(), 0);
        assert_eq!(sample_er(30, &one, 1).count_triangles(), 30 * 29 * 28 / 6);
        assert!(EdgeProbability::float(1.5).is_err());
        assert!(EdgeProbability::exact(Rational::new(3.into(), 2.into())).is_err());
    }

    #[test]
    fn er_edge_count_half() {
        let half = EdgeProbability::exact(Rational::new(1.into(), 2.into())).unwrap();
        let m = 4950.0;
        let sd = (m * 0.25f64).sqrt();
        for seed in 0..20 {
            let e = sample_er(100, &half, seed).adjacency.edge_count() as f64;
            assert!((e - m / 2.0).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn er_threshold_path_for_huge_denominators() {
        let den = BigInt::from(3u8).pow(60u32);
        let p = Rational::new(&den / BigInt::from(4), den);
        let ep = EdgeProbability::exact(p).unwrap();
        let g = sample_er(200, &ep, 3);
        let m = 200.0 * 199.0 / 2.0;
        let expect = m * ep.as_f64();
        let sd = (m * ep.as_f64() * (1.0 - ep.as_f64())).sqrt();
        assert!((g.adjacency.edge_count() as f64 - expect).abs() < 4.0 * sd);
    }
}
