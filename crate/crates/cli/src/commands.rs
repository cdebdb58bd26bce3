use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use ssmlab::closedform::{profitability_root, ClosedFormQuery, Profitability, Strategy};
use ssmlab::games::{Game, StackelbergMode, StrategyProfile, Threshold, uniform_profitability_threshold};
use ssmlab::simkit::{simulate_replicas, StrategyKind};
use ssmlab::{HashDistribution, S22Variant};

use crate::error::{CliError, CliResult};
use crate::output::*;
use crate::prop::{parse_alpha, PropArg};
use crate::sweep::{self, Axis, Quantity, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "ssmlab", version, about = "Semi-selfish mining revenues, games and simulations")]
pub struct Cli {
    /// Reward rule in states with several lead-2 miners.
    #[arg(long, global = true, env = "SSMLAB_VARIANT", default_value = "appendix", value_parser = parse_variant)]
    pub variant: S22Variant,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_variant(s: &str) -> Result<S22Variant, String> {
    s.parse().map_err(|e: ssmlab::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state relative revenue with every listed miner running SSM.
    Solve {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "uniform")]
        prop: PropArg,
    },
    /// Closed-form single-miner revenue and profitability threshold.
    Closed {
        #[arg(long, value_parser = parse_strategy)]
        strategy: Strategy,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Queries on the binary SSM game and its partition extension.
    Game {
        #[arg(value_enum)]
        query: GameQuery,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "uniform")]
        prop: PropArg,
        /// Commitment grid step.
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        /// One-based leader for `sse`.
        #[arg(long, default_value_t = 1)]
        leader: usize,
        /// One-based victim for `coalitions`.
        #[arg(long, default_value_t = 1)]
        victim: usize,
    },
    /// Uniform profitability threshold for M symmetric miners.
    Threshold {
        #[arg(long)]
        miners: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value = "uniform")]
        prop: PropArg,
    },
    /// Evaluates a quantity over a hash grid and writes CSV.
    Sweep {
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Free coordinate `I=LO:HI`; repeat for more axes, first is outermost.
        #[arg(long = "axis", required = true, value_parser = sweep::parse_axis)]
        axes: Vec<Axis>,
        /// Fixed coordinate `I=V`.
        #[arg(long = "fixed", value_parser = sweep::parse_fixed)]
        fixed: Vec<(usize, f64)>,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long, default_value = "uniform")]
        prop: PropArg,
        #[arg(long, default_value_t = 1e-2)]
        grid_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Monte Carlo of the block tree.
    Simulate {
        #[arg(long)]
        alpha: String,
        /// One of honest, sm, ssm per miner; defaults to all ssm.
        #[arg(long)]
        strategies: Option<String>,
        #[arg(long, default_value_t = 1_000_000)]
        blocks: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(long, default_value = "uniform")]
        prop: PropArg,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: ssmlab::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GameQuery {
    Table,
    Pne,
    Sse,
    Coalitions,
    Type,
}

fn names(p: &[StrategyProfile]) -> Vec<String> {
    p.iter().map(|x| x.to_string()).collect()
}

fn hash(alpha: &str) -> CliResult<(Vec<f64>, HashDistribution)> {
    let a = parse_alpha(alpha)?;
    let hd = HashDistribution::new(a.clone())?;
    Ok((a, hd))
}

fn one_based(i: usize, m: usize, what: &str) -> CliResult<usize> {
    if (1..=m).contains(&i) {
        Ok(i - 1)
    } else {
        Err(CliError::Input(format!("{what} must be in 1..={m}, got {i}")))
    }
}

/// Runs a command; the returned text goes to stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    let variant = cli.variant;
    match cli.command {
        Command::Solve { alpha, prop } => {
            let (a, hd) = hash(&alpha)?;
            let model = prop.resolve(a.len())?;
            let p = ssmlab::relative_revenue(&hd, &model, variant)?;
            render(&SolveReport {
                alpha: a,
                prop: prop.to_string(),
                variant: variant.to_string(),
                shares: p.shares,
                rates: p.rates,
                residual: p.residual,
            })
        }
        Command::Closed { strategy, gamma, alpha } => {
            let revenue = alpha
                .map(|a| ClosedFormQuery::new(strategy, a, gamma)?.relative_revenue())
                .transpose()?;
            let root = profitability_root(strategy, gamma)?;
            let (kind, threshold) = match root {
                Profitability::At(v) => ("at", Some(v)),
                Profitability::Always => ("always", None),
                Profitability::Never => ("never", None),
            };
            render(&ClosedReport {
                strategy: strategy.to_string(),
                gamma,
                alpha,
                revenue,
                threshold_kind: kind.into(),
                threshold,
            })
        }
        Command::Game { query, alpha, prop, grid_step, leader, victim } => {
            let (a, hd) = hash(&alpha)?;
            let m = a.len();
            if m < 2 {
                return Err(CliError::Input("games need at least two miners".into()));
            }
            let game = Game::with_options(hd, prop.resolve(m)?, variant)?;
            match query {
                GameQuery::Table => render(&TableReport {
                    alpha: a,
                    variant: variant.to_string(),
                    rows: game
                        .table()?
                        .into_iter()
                        .map(|(x, u)| TableRow { profile: x.to_string(), utilities: u })
                        .collect(),
                }),
                GameQuery::Pne => render(&PneReport { alpha: a, pne: names(&game.enumerate_pne()?) }),
                GameQuery::Sse => {
                    let leader = one_based(leader, m, "leader")?;
                    let mode = if m == 2 { StackelbergMode::TwoPlayer } else { StackelbergMode::Pessimistic };
                    let r = game.stackelberg(leader, grid_step, mode)?;
                    render(&SseReport {
                        alpha: a,
                        leader: leader + 1,
                        mode: match mode {
                            StackelbergMode::TwoPlayer => "two-player".into(),
                            StackelbergMode::Pessimistic => "pessimistic".into(),
                        },
                        grid_step,
                        commitment: r.best.commitment,
                        profile: r.best.profile.clone(),
                        leader_value: r.best.leader_value,
                        utilities: r.best.utilities.clone(),
                        follower_indifferent: r.best.follower_indifferent,
                        ties: r.sse.iter().skip(1).map(|e| e.commitment).collect(),
                        no_pne: r.no_pne,
                    })
                }
                GameQuery::Coalitions => {
                    let v = one_based(victim, m, "victim")?;
                    render(&CoalitionReport {
                        alpha: a,
                        victim,
                        coalitions: game
                            .penalizing_coalitions(v)?
                            .into_iter()
                            .map(|c| CoalitionEntry {
                                members: c.members.iter().map(|j| j + 1).collect(),
                                penalty: c.penalty,
                            })
                            .collect(),
                    })
                }
                GameQuery::Type => {
                    let (t, r) = game.commitment_type(grid_step)?;
                    render(&TypeReport {
                        alpha: a,
                        commitment_type: t,
                        pne: names(&game.enumerate_pne()?),
                        sse_commitments: r.sse.iter().map(|e| e.commitment).collect(),
                        leader_value: r.best.leader_value,
                    })
                }
            }
        }
        Command::Threshold { miners, tol, prop } => {
            let r = uniform_profitability_threshold(miners, tol, &prop.resolve(miners)?, variant)?;
            let (kind, eta) = match r.threshold {
                Threshold::At(v) => ("at", Some(v)),
                Threshold::Always => ("always", None),
                Threshold::Never => ("never", None),
            };
            render(&ThresholdOutput {
                miners,
                tol,
                kind: kind.into(),
                eta,
                sign_changes: r.sign_changes,
                utilities_all_s: r.utilities_all_s,
                utilities_all_h: r.utilities_all_h,
                pareto_dominates: r.pareto_dominates,
                verification: r.verification,
            })
        }
        Command::Sweep { quantity, axes, fixed, step, prop, grid_step, out, jobs } => {
            let mut spec = SweepSpec {
                axes,
                fixed,
                step,
                quantity,
                prop: ssmlab::PropagationModel::Uniform,
                prop_label: prop.to_string(),
                variant,
                grid_step,
            };
            spec.check()?;
            spec.prop = prop.resolve(spec.miners())?;
            let csv = sweep::run(&spec, jobs)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
        Command::Simulate { alpha, strategies, blocks, seed, replicas, prop } => {
            let (a, hd) = hash(&alpha)?;
            let kinds: Vec<StrategyKind> = match strategies {
                Some(s) => s.split(',').map(str::parse).collect::<ssmlab::Result<_>>()?,
                None => vec![StrategyKind::Ssm; a.len()],
            };
            let agg = simulate_replicas(&hd, &kinds, &prop.resolve(a.len())?, blocks, seed, replicas)?;
            render(&SimulateReport {
                alpha: a,
                strategies: kinds.iter().map(|k| k.to_string()).collect(),
                prop: prop.to_string(),
                blocks,
                seed,
                mean_shares: agg.mean_shares,
                ci3: agg.ci3,
                runs: agg
                    .replicas
                    .into_iter()
                    .map(|r| RunEntry {
                        replica: r.replica,
                        counts: r.counts,
                        shares: r.shares,
                        accepted: r.accepted,
                        settlement_blocks: r.settlement_blocks,
                    })
                    .collect(),
            })
        }
    }
}
