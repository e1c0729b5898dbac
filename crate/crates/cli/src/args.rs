use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rkg_core::asymptotics::{Thresholds, DEFAULT_TRIALS};
use rkg_core::graph::DEFAULT_CAP;

use crate::config::{parse_grid, parse_k_range, parse_thresholds, Command, RunConfig};
use crate::error::Result;

pub const DEFAULT_OUT_DIR: &str = "rkg-out";

#[derive(Debug, Parser)]
#[command(
    name = "rkg",
    version,
    about = "Triangles in random key graphs: exact moments, oracles and experiments"
)]
pub struct Cli {
    /// Parent directory for run outputs
    #[arg(long, global = true, env = "RKG_OUT_DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Args)]
pub struct Theta {
    /// Key ring size
    #[arg(long = "K")]
    pub k: u64,
    /// Key pool size
    #[arg(long = "P")]
    pub p: u64,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Closed-form probabilities and moments
    Exact {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
    },
    /// Coefficients of F(K,P) in P, closed-form and bound checks
    Poly {
        /// A single K or an inclusive range such as 4..8
        #[arg(long = "K")]
        k: String,
    },
    /// Exhaustive enumeration of all key assignments
    Bruteforce {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Monte Carlo estimates with 99% intervals
    Mc {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scaling-family sweep: zero-one probe, convergence and ER comparison
    Sweep {
        /// wsn-practical, zero-regime, one-regime, dense, fixed-q,
        /// wsn-practical:<c> or fixed:<K>:<P>
        #[arg(long, default_value = "wsn-practical")]
        family: String,
        #[arg(long, default_value = "20,50,100,200,500")]
        grid: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// p_low,p_high,ratio_tol
        #[arg(long)]
        thresholds: Option<String>,
    },
    /// One sampled graph, exported as an edge list
    Sample {
        #[command(flatten)]
        theta: Theta,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run the configuration recorded in a manifest
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

pub enum Action {
    Run(RunConfig),
    Replay {
        manifest: PathBuf,
        out: Option<PathBuf>,
    },
}

impl Cli {
    pub fn into_action(self) -> Result<Action> {
        let out_dir = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let command = match self.command {
            Sub::Replay { manifest } => {
                return Ok(Action::Replay {
                    manifest,
                    out: self.out,
                })
            }
            Sub::Exact { theta, n } => Command::Exact {
                k: theta.k,
                p: theta.p,
                n,
            },
            Sub::Poly { k } => {
                let range = parse_k_range(&k)?;
                Command::Poly {
                    k_from: *range.start(),
                    k_to: *range.end(),
                }
            }
            Sub::Bruteforce { theta, n, cap } => Command::Bruteforce {
                k: theta.k,
                p: theta.p,
                n,
                cap,
            },
            Sub::Mc {
                theta,
                n,
                trials,
                seed,
            } => Command::Mc {
                k: theta.k,
                p: theta.p,
                n,
                trials,
                seed,
            },
            Sub::Sweep {
                family,
                grid,
                trials,
                seed,
                thresholds,
            } => Command::Sweep {
                family,
                grid: parse_grid(&grid)?,
                trials,
                seed,
                thresholds: match thresholds {
                    Some(t) => parse_thresholds(&t)?,
                    None => Thresholds::default(),
                },
            },
            Sub::Sample { theta, n, seed } => Command::Sample {
                k: theta.k,
                p: theta.p,
                n,
                seed,
            },
        };
        command.validate()?;
        Ok(Action::Run(RunConfig { command, out_dir }))
    }
}
