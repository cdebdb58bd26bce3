//! Hash-space sweeps written as CSV.

use std::fmt::Write as _;

use clap::ValueEnum;
use rayon::prelude::*;
use ssmlab::games::{Game, StrategyProfile};
use ssmlab::{HashDistribution, PropagationModel, S22Variant};

use crate::error::{CliError, CliResult};

pub const MIN_STEP: f64 = 1e-3;
pub const MAX_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Shares,
    PneClass,
    CommitmentType,
    SseSurplus,
    CoalitionPenalty,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::Shares => "shares",
            Quantity::PneClass => "pne-class",
            Quantity::CommitmentType => "commitment-type",
            Quantity::SseSurplus => "sse-surplus",
            Quantity::CoalitionPenalty => "coalition-penalty",
        }
    }

    fn columns(self, miners: usize) -> Vec<String> {
        match self {
            Quantity::Shares => (1..=miners)
                .map(|i| format!("share_{i}"))
                .chain(std::iter::once("share_H".into()))
                .collect(),
            Quantity::PneClass => vec!["pne".into(), "pne_count".into()],
            Quantity::CommitmentType => vec!["type".into(), "commitment".into(), "leader_value".into()],
            Quantity::SseSurplus => vec!["leader_value".into(), "best_pne_u1".into(), "surplus".into()],
            Quantity::CoalitionPenalty => vec!["coalitions".into(), "max_penalty".into()],
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Quantity::Shares => "share_i: steady-state relative revenue of miner i when all run SSM; share_H: honest pool",
            Quantity::PneClass => "pne: pure equilibria of the binary game joined by '|'; pne_count: their number",
            Quantity::CommitmentType => "type: commitment type 0-3 of miner 1; commitment, leader_value: the optimal commitment",
            Quantity::SseSurplus => "leader_value: miner 1 at the commitment optimum; best_pne_u1: miner 1's best equilibrium utility; surplus: their difference",
            Quantity::CoalitionPenalty => "coalitions: penalizing coalitions against miner 1, members ';'-joined, sets '|'-joined; max_penalty: largest penalty or 0",
        }
    }
}

/// One free hash coordinate, `lo..=hi` in steps of the sweep step.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// One-based miner index.
    pub miner: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    /// One-based miner index and hash fraction.
    pub fixed: Vec<(usize, f64)>,
    pub step: f64,
    pub quantity: Quantity,
    pub prop: PropagationModel,
    pub prop_label: String,
    pub variant: S22Variant,
    pub grid_step: f64,
}

impl SweepSpec {
    pub fn miners(&self) -> usize {
        self.axes
            .iter()
            .map(|a| a.miner)
            .chain(self.fixed.iter().map(|f| f.0))
            .max()
            .unwrap_or(0)
    }

    pub fn check(&self) -> CliResult<()> {
        if self.axes.is_empty() {
            return Err(CliError::Input("a sweep needs at least one axis".into()));
        }
        if !(MIN_STEP..=MAX_STEP).contains(&self.step) {
            return Err(CliError::Input(format!("step out of [{MIN_STEP},{MAX_STEP}]: {}", self.step)));
        }
        let m = self.miners();
        let mut seen = vec![false; m + 1];
        for i in self.axes.iter().map(|a| a.miner).chain(self.fixed.iter().map(|f| f.0)) {
            if i == 0 || seen[i] {
                return Err(CliError::Input(format!("miner {i} given twice or out of range")));
            }
            seen[i] = true;
        }
        if let Some(i) = (1..=m).find(|&i| !seen[i]) {
            return Err(CliError::Input(format!("miner {i} is neither an axis nor fixed")));
        }
        for a in &self.axes {
            if !(a.lo <= a.hi) {
                return Err(CliError::Input(format!("empty range for miner {}", a.miner)));
            }
        }
        Ok(())
    }

    /// Grid points in row order, first axis outermost.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let m = self.miners();
        let mut base = vec![0.0; m];
        for &(i, v) in &self.fixed {
            base[i - 1] = v;
        }
        let mut out = vec![base];
        for a in &self.axes {
            let n = ((a.hi - a.lo) / self.step + 1e-9).floor() as usize;
            let values: Vec<f64> = (0..=n)
                .map(|k| ((a.lo + k as f64 * self.step) * 1e12).round() / 1e12)
                .collect();
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q[a.miner - 1] = v;
                        q
                    })
                })
                .collect();
        }
        out
    }
}

fn num(v: f64) -> String {
    format!("{v:.9}")
}

fn profiles(p: &[StrategyProfile]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|")
}

fn evaluate(spec: &SweepSpec, alpha: &[f64]) -> Result<Vec<String>, String> {
    let hd = HashDistribution::new(alpha.to_vec()).map_err(|e| e.to_string())?;
    let game = || Game::with_options(hd.clone(), spec.prop.clone(), spec.variant).map_err(|e| e.to_string());
    let e = |e: ssmlab::Error| e.to_string();
    Ok(match spec.quantity {
        Quantity::Shares => ssmlab::relative_revenue(&hd, &spec.prop, spec.variant)
            .map_err(e)?
            .shares
            .into_iter()
            .map(num)
            .collect(),
        Quantity::PneClass => {
            let pne = game()?.enumerate_pne().map_err(e)?;
            vec![profiles(&pne), pne.len().to_string()]
        }
        Quantity::CommitmentType => {
            let (t, r) = game()?.commitment_type(spec.grid_step).map_err(e)?;
            vec![t.to_string(), num(r.best.commitment), num(r.best.leader_value)]
        }
        Quantity::SseSurplus => {
            let g = game()?;
            let (_, r) = g.commitment_type(spec.grid_step).map_err(e)?;
            let best = g
                .enumerate_pne()
                .map_err(e)?
                .iter()
                .map(|x| g.utilities(x).map(|u| u[0]))
                .collect::<ssmlab::Result<Vec<f64>>>()
                .map_err(e)?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                vec![num(r.best.leader_value), num(best), num(r.best.leader_value - best)]
            } else {
                vec![num(r.best.leader_value), String::new(), String::new()]
            }
        }
        Quantity::CoalitionPenalty => {
            let cs = game()?.penalizing_coalitions(0).map_err(e)?;
            let sets: Vec<String> = cs
                .iter()
                .map(|c| c.members.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(";"))
                .collect();
            let max = cs.iter().map(|c| c.penalty).fold(0.0, f64::max);
            vec![sets.join("|"), num(max)]
        }
    })
}

fn header(spec: &SweepSpec) -> String {
    let mut h = String::new();
    let axes: Vec<String> = spec.axes.iter().map(|a| format!("{}={}:{}", a.miner, a.lo, a.hi)).collect();
    let fixed: Vec<String> = spec.fixed.iter().map(|(i, v)| format!("{i}={v}")).collect();
    let _ = writeln!(h, "# ssmlab sweep");
    let _ = writeln!(h, "# quantity: {}", spec.quantity.name());
    let _ = writeln!(h, "# axes: {}", axes.join(" "));
    let _ = writeln!(h, "# fixed: {}", if fixed.is_empty() { "none".into() } else { fixed.join(" ") });
    let _ = writeln!(h, "# step: {}", spec.step);
    let _ = writeln!(h, "# prop: {}", spec.prop_label);
    let _ = writeln!(h, "# variant: {}", spec.variant);
    let _ = writeln!(h, "# alpha_i: hash fraction of miner i");
    let _ = writeln!(h, "# {}", spec.quantity.describe());
    let _ = writeln!(h, "# error: empty unless the point failed; its value columns are then empty");
    h
}

/// Runs the sweep on `jobs` threads and returns the CSV text.
pub fn run(spec: &SweepSpec, jobs: usize) -> CliResult<String> {
    spec.check()?;
    let m = spec.miners();
    let points = spec.points();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<String>, String>> =
        pool.install(|| points.par_iter().map(|p| evaluate(spec, p)).collect());

    let columns = spec.quantity.columns(m);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let head: Vec<String> = (1..=m)
        .map(|i| format!("alpha_{i}"))
        .chain(columns.iter().cloned())
        .chain(std::iter::once("error".into()))
        .collect();
    w.write_record(&head).map_err(io)?;
    for (p, r) in points.iter().zip(results) {
        let mut rec: Vec<String> = p.iter().map(|&v| num(v)).collect();
        match r {
            Ok(vals) => {
                rec.extend(vals);
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), columns.len()));
                rec.push(msg);
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(header(spec) + &body)
}

/// Parses `I=LO:HI`.
pub fn parse_axis(s: &str) -> Result<Axis, String> {
    let (i, range) = s.split_once('=').ok_or_else(|| format!("expected I=LO:HI, got {s:?}"))?;
    let (lo, hi) = range.split_once(':').ok_or_else(|| format!("expected I=LO:HI, got {s:?}"))?;
    Ok(Axis {
        miner: i.trim().parse().map_err(|_| format!("bad miner index {i:?}"))?,
        lo: lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?,
        hi: hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?,
    })
}

/// Parses `I=V`.
pub fn parse_fixed(s: &str) -> Result<(usize, f64), String> {
    let (i, v) = s.split_once('=').ok_or_else(|| format!("expected I=V, got {s:?}"))?;
    Ok((
        i.trim().parse().map_err(|_| format!("bad miner index {i:?}"))?,
        v.trim().parse().map_err(|_| format!("bad hash fraction {v:?}"))?,
    ))
}
