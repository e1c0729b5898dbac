use std::ops::RangeInclusive;
use std::path::PathBuf;

use rkg_core::asymptotics::Thresholds;
use rkg_core::KeyParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// One subcommand with every parameter it consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    Exact {
        k: u64,
        p: u64,
        n: u64,
    },
    Poly {
        k_from: u64,
        k_to: u64,
    },
    Bruteforce {
        k: u64,
        p: u64,
        n: u64,
        cap: u64,
    },
    Mc {
        k: u64,
        p: u64,
        n: u64,
        trials: u64,
        seed: u64,
    },
    Sweep {
        family: String,
        grid: Vec<u64>,
        trials: u64,
        seed: u64,
        thresholds: Thresholds,
    },
    Sample {
        k: u64,
        p: u64,
        n: u64,
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact { .. } => "exact",
            Command::Poly { .. } => "poly",
            Command::Bruteforce { .. } => "bruteforce",
            Command::Mc { .. } => "mc",
            Command::Sweep { .. } => "sweep",
            Command::Sample { .. } => "sample",
        }
    }

    /// Checks parameters without running anything.
    pub fn validate(&self) -> Result<()> {
        let nodes = |n: u64| {
            if n < 3 {
                Err(CliError::Usage(format!("--n must be at least 3, got {n}")))
            } else {
                Ok(())
            }
        };
        match self {
            Command::Exact { k, p, n } | Command::Bruteforce { k, p, n, .. } => {
                KeyParams::new(*k, *p)?;
                nodes(*n)
            }
            Command::Mc {
                k, p, n, trials, ..
            } => {
                KeyParams::new(*k, *p)?;
                nodes(*n)?;
                positive_trials(*trials)
            }
            Command::Sample { k, p, n, .. } => {
                KeyParams::new(*k, *p)?;
                if *n == 0 {
                    return Err(CliError::Usage("--n must be positive".into()));
                }
                Ok(())
            }
            Command::Poly { k_from, k_to } => {
                if *k_from == 0 || k_from > k_to {
                    return Err(CliError::Usage(format!("bad K range {k_from}..{k_to}")));
                }
                Ok(())
            }
            Command::Sweep {
                family,
                grid,
                trials,
                ..
            } => {
                rkg_core::asymptotics::ScalingFamily::parse(family)?;
                rkg_core::asymptotics::validate_grid(grid)?;
                positive_trials(*trials)
            }
        }
    }
}

fn positive_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(CliError::Usage("--trials must be positive".into()))
    } else {
        Ok(())
    }
}

/// Everything needed to re-execute a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Parent directory; outputs go to `<out_dir>/<run_id>/`.
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// First 16 hex digits of SHA-256 over the JSON of the command. The
    /// output directory is excluded so a replay elsewhere keeps the id.
    pub fn run_id(&self) -> String {
        let json = serde_json::to_vec(&self.command).expect("command serializes");
        let digest = Sha256::digest(&json);
        hex::encode(&digest[..8])
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(self.run_id())
    }
}

/// `"4"` or `"4..8"` (inclusive).
pub fn parse_k_range(s: &str) -> Result<RangeInclusive<u64>> {
    let bad = || CliError::Usage(format!("invalid K range '{s}'"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (s.trim(), s.trim()),
    };
    let a: u64 = a.parse().map_err(|_| bad())?;
    let b: u64 = b.parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

/// Comma-separated node counts.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    let grid = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("invalid grid entry '{x}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    rkg_core::asymptotics::validate_grid(&grid)?;
    Ok(grid)
}

/// `p_low,p_high,ratio_tol`.
pub fn parse_thresholds(s: &str) -> Result<Thresholds> {
    let bad = || {
        CliError::Usage(format!(
            "invalid thresholds '{s}', want p_low,p_high,ratio_tol"
        ))
    };
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        &[p_low, p_high, ratio_tol]
            if (0.0..=1.0).contains(&p_low)
                && (0.0..=1.0).contains(&p_high)
                && ratio_tol >= 0.0 =>
        {
            Ok(Thresholds {
                p_low,
                p_high,
                ratio_tol,
            })
        }
        _ => Err(bad()),
    }
}
