//! Scaling families `n -> (K_n, P_n)` and finite-n probes of the zero-one
//! law, the asymptotic equivalences, and the Erdős–Rényi comparison.
//!
//! Limits are replaced by finite surrogates: a monotone trend over the grid
//! plus a threshold at the largest `n`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::exact::{
    beta_theta, binom, first_moment, int, q_theta, r_theta, tau_theta, KeyParams, Rational,
};
use crate::graph::{monte_carlo, Estimate, MonteCarloEstimate};

pub const DEFAULT_GRID: [u64; 5] = [20, 50, 100, 200, 500];
pub const DEFAULT_TRIALS: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Final `P[T>0]` must be at most this on a vanishing family.
    pub p_low: f64,
    /// Final `P[T>0]` must be at least this on a growing family.
    pub p_high: f64,
    /// Allowed `|ratio - 1|` at the largest n.
    pub ratio_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            p_low: 0.05,
            p_high: 0.95,
            ratio_tol: 0.10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalingRule {
    /// `K = ceil(c ln n)`, `P = ceil(K^2 n / (c ln n))`.
    WsnPractical { c: f64 },
    /// `K = 1`, `P = n^2`.
    ZeroRegime,
    /// `K = 1`, `P = ceil(n^1.5 / ln n)`.
    OneRegime,
    /// Fixed `(K, P)` for every n.
    Fixed { k: u64, p: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFamily {
    pub name: String,
    pub description: String,
    pub rule: ScalingRule,
}

fn ceil_u64(x: f64) -> u64 {
    x.ceil() as u64
}

impl ScalingFamily {
    fn new(name: &str, description: &str, rule: ScalingRule) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            rule,
        }
    }

    pub fn wsn_practical(c: f64) -> Self {
        Self::new(
            "wsn-practical",
            &format!("K = ceil({c} ln n), P = ceil(K^2 n / ({c} ln n))"),
            ScalingRule::WsnPractical { c },
        )
    }

    pub fn fixed(name: &str, k: u64, p: u64) -> Self {
        Self::new(
            name,
            &format!("K = {k}, P = {p} for every n"),
            ScalingRule::Fixed { k, p },
        )
    }

    /// `theta_n`. `P` is raised to `K` if a ceiling would leave `K > P`.
    pub fn params(&self, n: u64) -> Result<KeyParams> {
        if n < 3 {
            return Err(CoreError::TooFewNodes { n });
        }
        let nf = n as f64;
        let (k, p) = match self.rule {
            ScalingRule::WsnPractical { c } => {
                let k = ceil_u64(c * nf.ln());
                let p = ceil_u64((k * k) as f64 * nf / (c * nf.ln()));
                (k, p.max(k))
            }
            ScalingRule::ZeroRegime => (1, n * n),
            ScalingRule::OneRegime => (1, ceil_u64(nf.powf(1.5) / nf.ln()).max(1)),
            ScalingRule::Fixed { k, p } => (k, p),
        };
        KeyParams::new(k, p)
    }

    /// Parses a built-in name, `wsn-practical:<c>`, or `fixed:<K>:<P>`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || CoreError::InvalidGrid(format!("unknown family '{text}'"));
        if let Some(f) = builtin_scalings().into_iter().find(|f| f.name == text) {
            return Ok(f);
        }
        let mut parts = text.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("wsn-practical"), Some(c), None, None) => {
                let c: f64 = c.parse().map_err(|_| bad())?;
                if !(c > 0.0 && c.is_finite()) {
                    return Err(bad());
                }
                Ok(Self::wsn_practical(c))
            }
            (Some("fixed"), Some(k), Some(p), None) => {
                let k = k.parse().map_err(|_| bad())?;
                let p = p.parse().map_err(|_| bad())?;
                KeyParams::new(k, p)?;
                Ok(Self::fixed(text, k, p))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ScalingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.description)
    }
}

pub fn builtin_scalings() -> Vec<ScalingFamily> {
    vec![
        ScalingFamily::wsn_practical(2.0),
        ScalingFamily::new("zero-regime", "K = 1, P = n^2", ScalingRule::ZeroRegime),
        ScalingFamily::new(
            "one-regime",
            "K = 1, P = ceil(n^1.5 / ln n)",
            ScalingRule::OneRegime,
        ),
        ScalingFamily::new(
            "dense",
            "K = 2, P = 3 (P < 2K, complete graphs)",
            ScalingRule::Fixed { k: 2, p: 3 },
        ),
        ScalingFamily::new(
            "fixed-q",
            "K = 2, P = 10 (q constant at 28/45)",
            ScalingRule::Fixed { k: 2, p: 10 },
        ),
    ]
}

/// Checks a grid is strictly ascending with every `n >= 3`.
pub fn validate_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CoreError::InvalidGrid("empty".into()));
    }
    if let Some(&n) = grid.iter().find(|&&n| n < 3) {
        return Err(CoreError::InvalidGrid(format!("n={n} is below 3")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::InvalidGrid("not strictly ascending".into()));
    }
    Ok(())
}

/// `n^3 tau(theta_n)`.
pub fn condition_value(n: u64, family: &ScalingFamily) -> Result<Rational> {
    let theta = family.params(n)?;
    Ok(int(n * n) * int(n) * tau_theta(&theta))
}

/// Master seed for the grid point `n`, so that different `n` use
/// unrelated streams.
pub fn grid_seed(master_seed: u64, n: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = master_seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
    Flat,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Flat => "flat",
        })
    }
}

fn direction_of(values: &[Rational]) -> Direction {
    match (values.first(), values.last()) {
        (Some(a), Some(b)) if b > a => Direction::Increasing,
        (Some(a), Some(b)) if b < a => Direction::Decreasing,
        _ => Direction::Flat,
    }
}

/// Whether the point estimates move in `dir` with at most one step
/// against it, and that step only between overlapping intervals.
pub fn monotone_allowing_one_inversion(estimates: &[Estimate], dir: Direction) -> bool {
    let mut inversions = 0;
    for w in estimates.windows(2) {
        let against = match dir {
            Direction::Decreasing => w[1].value > w[0].value,
            Direction::Increasing => w[1].value < w[0].value,
            Direction::Flat => false,
        };
        if against {
            inversions += 1;
            if inversions > 1 || !w[0].overlaps(&w[1]) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub n: u64,
    pub theta: KeyParams,
    pub condition: Rational,
    pub e_t: Rational,
    pub mc: MonteCarloEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroOneProbe {
    pub family: ScalingFamily,
    pub points: Vec<ProbePoint>,
    /// Trend of `n^3 tau` across the grid.
    pub condition_trend: Direction,
    /// `P[T>0]` estimates follow the condition trend (one inversion allowed).
    pub trend_consistent: bool,
    /// Final estimate clears the threshold on the side the trend points to;
    /// `None` when the condition is flat.
    pub final_threshold_met: Option<bool>,
}

impl ZeroOneProbe {
    pub fn passes(&self) -> bool {
        self.trend_consistent && self.final_threshold_met.unwrap_or(true)
    }
}

pub fn zero_one_probe(
    family: &ScalingFamily,
    grid: &[u64],
    trials: u64,
    master_seed: u64,
    thresholds: &Thresholds,
) -> Result<ZeroOneProbe> {
    validate_grid(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    for &n in grid {
        let theta = family.params(n)?;
        points.push(ProbePoint {
            n,
            theta,
            condition: condition_value(n, family)?,
            e_t: first_moment(n, &theta)?,
            mc: monte_carlo(n, &theta, trials, grid_seed(master_seed, n)),
        });
    }
    let conds: Vec<Rational> = points.iter().map(|p| p.condition.clone()).collect();
    let dir = direction_of(&conds);
    let ests: Vec<Estimate> = points.iter().map(|p| p.mc.p_triangle).collect();
    let last = ests.last().map(|e| e.value).unwrap_or(f64::NAN);
    let final_threshold_met = match dir {
        Direction::Decreasing => Some(last <= thresholds.p_low),
        Direction::Increasing => Some(last >= thresholds.p_high),
        Direction::Flat => None,
    };
    Ok(ZeroOneProbe {
        family: family.clone(),
        trend_consistent: monotone_allowing_one_inversion(&ests, dir),
        condition_trend: dir,
        final_threshold_met,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Zero,
    One,
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `(1 - q) / (K^2 / P)`
    EdgeRatio,
    /// `beta / tau`
    BetaTauRatio,
    /// `(1 - r/q^2) / (K^3 / P^2)`
    RQ2Ratio,
    /// `n^2 (1 - q)`
    N2OneMinusQ,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Quantity::EdgeRatio,
        Quantity::BetaTauRatio,
        Quantity::RQ2Ratio,
        Quantity::N2OneMinusQ,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::EdgeRatio => "edge_ratio",
            Quantity::BetaTauRatio => "beta_tau_ratio",
            Quantity::RQ2Ratio => "r_q2_ratio",
            Quantity::N2OneMinusQ => "n2_one_minus_q",
        }
    }

    pub fn target(&self) -> Target {
        match self {
            Quantity::N2OneMinusQ => Target::Infinity,
            _ => Target::One,
        }
    }

    /// Exact value at `(n, theta)`, or the reason it is skipped.
    pub fn evaluate(&self, n: u64, theta: &KeyParams) -> std::result::Result<Rational, String> {
        let q = q_theta(theta);
        let (k, p) = (int(theta.k()), int(theta.p()));
        if *self != Quantity::N2OneMinusQ && q.is_zero() {
            return Err("q=0 (P < 2K)".into());
        }
        match self {
            Quantity::EdgeRatio => Ok((Rational::one() - &q) * &p / (&k * &k)),
            Quantity::BetaTauRatio => Ok(beta_theta(theta) / tau_theta(theta)),
            Quantity::RQ2Ratio => {
                if !theta.in_triangle_regime() {
                    return Err("3K > P (r=0)".into());
                }
                let r = r_theta(theta);
                Ok((Rational::one() - r / (&q * &q)) * &p * &p / (&k * &k * &k))
            }
            Quantity::N2OneMinusQ => Ok(int(n * n) * (Rational::one() - q)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDiagnostic {
    pub quantity: Quantity,
    pub target: Target,
    pub values: Vec<(u64, Rational)>,
    pub skipped: Vec<(u64, String)>,
    /// For target 1: `|v - 1|` never grows from one grid point to the next.
    /// For target infinity: strictly increasing.
    pub monotone: bool,
    /// For target 1: `|last - 1| <= ratio_tol`. `None` for other targets.
    pub within_tolerance: Option<bool>,
    /// Growth of `n^2 (1-q)` is only expected when `n^3 tau` grows; the
    /// ratio diagnostics always apply.
    pub applies: bool,
}

impl ConvergenceDiagnostic {
    pub fn last(&self) -> Option<&Rational> {
        self.values.last().map(|(_, v)| v)
    }

    pub fn passes(&self) -> bool {
        !self.applies
            || (!self.values.is_empty() && self.monotone && self.within_tolerance.unwrap_or(true))
    }
}

fn distance_to_one(v: &Rational) -> Rational {
    (v - Rational::one()).abs()
}

/// Recomputes the verdict from the emitted sequence alone.
pub fn trend_verdict(target: Target, values: &[Rational], ratio_tol: f64) -> (bool, Option<bool>) {
    match target {
        Target::One => {
            let d: Vec<Rational> = values.iter().map(distance_to_one).collect();
            let monotone = d.windows(2).all(|w| w[1] <= w[0]);
            let tol = Rational::from_float(ratio_tol).unwrap_or_else(Rational::zero);
            (monotone, d.last().map(|x| *x <= tol))
        }
        Target::Infinity => (values.windows(2).all(|w| w[1] > w[0]), None),
        Target::Zero => (values.windows(2).all(|w| w[1].abs() <= w[0].abs()), None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub family: ScalingFamily,
    pub grid: Vec<u64>,
    pub diagnostics: Vec<ConvergenceDiagnostic>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn get(&self, q: Quantity) -> Option<&ConvergenceDiagnostic> {
        self.diagnostics.iter().find(|d| d.quantity == q)
    }
}

pub fn convergence_diagnostics(
    family: &ScalingFamily,
    grid: &[u64],
    thresholds: &Thresholds,
) -> Result<Diagnostics> {
    validate_grid(grid)?;
    let thetas = grid
        .iter()
        .map(|&n| family.params(n))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let k2_over_p: Vec<Rational> = thetas
        .iter()
        .map(|t| int(t.k() * t.k()) / int(t.p()))
        .collect();
    if k2_over_p.windows(2).any(|w| w[1] >= w[0]) {
        warnings.push("K^2/P is not decreasing along the grid".to_string());
    }

    let conditions = grid
        .iter()
        .map(|&n| condition_value(n, family))
        .collect::<Result<Vec<_>>>()?;
    let one_law_side = direction_of(&conditions) == Direction::Increasing;

    let diagnostics = Quantity::ALL
        .par_iter()
        .map(|&quantity| {
            let mut values = Vec::new();
            let mut skipped = Vec::new();
            for (&n, theta) in grid.iter().zip(&thetas) {
                match quantity.evaluate(n, theta) {
                    Ok(v) => values.push((n, v)),
                    Err(reason) => skipped.push((n, reason)),
                }
            }
            let seq: Vec<Rational> = values.iter().map(|(_, v)| v.clone()).collect();
            let (monotone, within_tolerance) =
                trend_verdict(quantity.target(), &seq, thresholds.ratio_tol);
            ConvergenceDiagnostic {
                quantity,
                target: quantity.target(),
                values,
                skipped,
                monotone,
                within_tolerance,
                applies: quantity.target() != Target::Infinity || one_law_side,
            }
        })
        .collect();

    Ok(Diagnostics {
        family: family.clone(),
        grid: grid.to_vec(),
        diagnostics,
        warnings,
    })
}

/// Edge probability of the Erdős–Rényi graph matched exactly to `theta`.
pub fn matched_er_probability(theta: &KeyParams) -> Rational {
    Rational::one() - q_theta(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErComparisonRow {
    pub n: u64,
    pub theta: KeyParams,
    /// `C(n,3) beta`
    pub e_rkg: Rational,
    /// `C(n,3) (1-q)^3`
    pub e_er: Rational,
    pub ratio: Rational,
    /// `1 + P/K^3`
    pub predictor: Rational,
    /// `|ratio / predictor - 1|`
    pub relative_deviation: Rational,
}

pub fn er_comparison_at(n: u64, theta: &KeyParams) -> Result<ErComparisonRow> {
    if n < 3 {
        return Err(CoreError::TooFewNodes { n });
    }
    let triples = Rational::from_integer(binom(n as i64, 3));
    let p = matched_er_probability(theta);
    let e_rkg = &triples * beta_theta(theta);
    let e_er = &triples * &p * &p * &p;
    let ratio = &e_rkg / &e_er;
    let k = BigInt::from(theta.k());
    let predictor = Rational::one() + Rational::new(BigInt::from(theta.p()), &k * &k * &k);
    let relative_deviation = (&ratio / &predictor - Rational::one()).abs();
    Ok(ErComparisonRow {
        n,
        theta: *theta,
        e_rkg,
        e_er,
        ratio,
        predictor,
        relative_deviation,
    })
}

pub fn er_comparison(family: &ScalingFamily, grid: &[u64]) -> Result<Vec<ErComparisonRow>> {
    validate_grid(grid)?;
    grid.iter()
        .map(|&n| er_comparison_at(n, &family.params(n)?))
        .collect()
}
