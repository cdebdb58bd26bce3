//! JSON reports printed by single-query commands.
//!
//! Every report is checked before printing: it must serialise, parse back to
//! an equal value and pass its own `validate`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub trait Report: Serialize + DeserializeOwned + PartialEq {
    fn validate(&self) -> Result<(), String>;
}

/// Serialises `r`, then re-reads and validates the text it is about to print.
pub fn render<R: Report>(r: &R) -> CliResult<String> {
    let text = serde_json::to_string_pretty(r).map_err(|e| CliError::Output(e.to_string()))?;
    let back = parse::<R>(&text)?;
    if &back != r {
        return Err(CliError::Output("report does not round-trip".into()));
    }
    Ok(text)
}

/// Reads and validates a report, e.g. from another command's stdout.
pub fn parse<R: Report>(text: &str) -> CliResult<R> {
    let r: R = serde_json::from_str(text).map_err(|e| CliError::Output(e.to_string()))?;
    r.validate().map_err(CliError::Output)?;
    Ok(r)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_alpha(alpha: &[f64]) -> Result<(), String> {
    check(!alpha.is_empty(), || "empty alpha".into())?;
    check(alpha.iter().all(|a| (0.0..=0.5).contains(a)), || format!("alpha out of range: {alpha:?}"))?;
    check(alpha.iter().sum::<f64>() < 1.0, || "alpha sums to 1 or more".into())
}

fn check_distribution(v: &[f64], what: &str) -> Result<(), String> {
    check(v.iter().all(|x| x.is_finite() && (-1e-12..=1.0 + 1e-12).contains(x)), || {
        format!("{what} entries out of [0,1]: {v:?}")
    })?;
    let s: f64 = v.iter().sum();
    check((s - 1.0).abs() <= 1e-9, || format!("{what} sum to {s}"))
}

fn check_profile(p: &str, m: usize) -> Result<(), String> {
    check(p.len() == m && p.chars().all(|c| c == 'H' || c == 'S'), || {
        format!("bad profile {p:?} for {m} miners")
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub alpha: Vec<f64>,
    pub prop: String,
    pub variant: String,
    /// Honest pool last.
    pub shares: Vec<f64>,
    pub rates: Vec<f64>,
    pub residual: f64,
}

impl Report for SolveReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        check(self.shares.len() == self.alpha.len() + 1, || "shares length".into())?;
        check(self.rates.len() == self.shares.len(), || "rates length".into())?;
        check_distribution(&self.shares, "shares")?;
        check(self.rates.iter().all(|r| r.is_finite() && *r >= 0.0), || "negative rate".into())?;
        check(self.residual.is_finite() && self.residual >= 0.0, || "bad residual".into())?;
        check(self.variant == "appendix" || self.variant == "printed", || "bad variant".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedReport {
    pub strategy: String,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub revenue: Option<f64>,
    /// `at`, `always` or `never`.
    pub threshold_kind: String,
    pub threshold: Option<f64>,
}

impl Report for ClosedReport {
    fn validate(&self) -> Result<(), String> {
        check(self.strategy == "sm" || self.strategy == "ssm", || "bad strategy".into())?;
        check((0.0..=1.0).contains(&self.gamma), || "gamma out of range".into())?;
        check(self.alpha.is_some() == self.revenue.is_some(), || "alpha without revenue".into())?;
        if let Some(r) = self.revenue {
            check((0.0..=1.0).contains(&r), || "revenue out of range".into())?;
        }
        check(
            (self.threshold_kind == "at") == self.threshold.is_some()
                && ["at", "always", "never"].contains(&self.threshold_kind.as_str()),
            || "inconsistent threshold".into(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub profile: String,
    pub utilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub alpha: Vec<f64>,
    pub variant: String,
    pub rows: Vec<TableRow>,
}

impl Report for TableReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        let m = self.alpha.len();
        check(self.rows.len() == 1 << m, || "table has wrong row count".into())?;
        for r in &self.rows {
            check_profile(&r.profile, m)?;
            check(r.utilities.len() == m, || "utility length".into())?;
            check(r.utilities.iter().all(|u| (0.0..=1.0).contains(u)), || "utility out of range".into())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PneReport {
    pub alpha: Vec<f64>,
    pub pne: Vec<String>,
}

impl Report for PneReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        self.pne.iter().try_for_each(|p| check_profile(p, self.alpha.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SseReport {
    pub alpha: Vec<f64>,
    /// One-based.
    pub leader: usize,
    pub mode: String,
    pub grid_step: f64,
    pub commitment: f64,
    pub profile: Vec<f64>,
    pub leader_value: f64,
    pub utilities: Vec<f64>,
    pub follower_indifferent: bool,
    /// Other commitments reaching the same leader value.
    pub ties: Vec<f64>,
    pub no_pne: Vec<f64>,
}

impl Report for SseReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        let m = self.alpha.len();
        check((1..=m).contains(&self.leader), || "leader out of range".into())?;
        check((0.0..=1.0).contains(&self.commitment), || "commitment out of range".into())?;
        check(self.profile.len() == m && self.utilities.len() == m, || "profile length".into())?;
        check(self.profile.iter().all(|s| (0.0..=1.0).contains(s)), || "fraction out of range".into())?;
        check((self.profile[self.leader - 1] - self.commitment).abs() < 1e-15, || "leader fraction".into())?;
        check((self.utilities[self.leader - 1] - self.leader_value).abs() < 1e-15, || "leader value".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionEntry {
    /// One-based.
    pub members: Vec<usize>,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalitionReport {
    pub alpha: Vec<f64>,
    pub victim: usize,
    pub coalitions: Vec<CoalitionEntry>,
}

impl Report for CoalitionReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        let m = self.alpha.len();
        check((1..=m).contains(&self.victim), || "victim out of range".into())?;
        for c in &self.coalitions {
            check(c.penalty > 0.0, || "non-positive penalty".into())?;
            check(
                !c.members.is_empty() && c.members.iter().all(|&j| (1..=m).contains(&j) && j != self.victim),
                || format!("bad coalition {:?}", c.members),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub alpha: Vec<f64>,
    pub commitment_type: u8,
    pub pne: Vec<String>,
    pub sse_commitments: Vec<f64>,
    pub leader_value: f64,
}

impl Report for TypeReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        check(self.commitment_type <= 3, || "type out of range".into())?;
        check(!self.sse_commitments.is_empty(), || "no commitment".into())?;
        self.pne.iter().try_for_each(|p| check_profile(p, self.alpha.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutput {
    pub miners: usize,
    pub tol: f64,
    pub kind: String,
    pub eta: Option<f64>,
    pub sign_changes: Vec<f64>,
    pub utilities_all_s: Vec<f64>,
    pub utilities_all_h: Vec<f64>,
    pub pareto_dominates: bool,
    pub verification: Vec<(f64, f64)>,
}

impl Report for ThresholdOutput {
    fn validate(&self) -> Result<(), String> {
        check((1..=8).contains(&self.miners), || "miners out of range".into())?;
        check(
            (self.kind == "at") == self.eta.is_some() && ["at", "always", "never"].contains(&self.kind.as_str()),
            || "inconsistent threshold".into(),
        )?;
        if let Some(eta) = self.eta {
            check(eta > 0.0 && eta <= 0.5 && eta * (self.miners as f64) < 1.0, || "eta out of range".into())?;
            check(
                self.utilities_all_s.len() == self.miners && self.utilities_all_h.len() == self.miners,
                || "utility length".into(),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub replica: u64,
    pub counts: Vec<u64>,
    pub shares: Vec<f64>,
    pub accepted: u64,
    pub settlement_blocks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub alpha: Vec<f64>,
    pub strategies: Vec<String>,
    pub prop: String,
    pub blocks: u64,
    pub seed: u64,
    pub mean_shares: Vec<f64>,
    /// 3σ half-widths.
    pub ci3: Vec<f64>,
    pub runs: Vec<RunEntry>,
}

impl Report for SimulateReport {
    fn validate(&self) -> Result<(), String> {
        check_alpha(&self.alpha)?;
        let k = self.alpha.len() + 1;
        check(self.strategies.len() == self.alpha.len(), || "strategy count".into())?;
        check(self.mean_shares.len() == k && self.ci3.len() == k, || "share length".into())?;
        check_distribution(&self.mean_shares, "mean shares")?;
        check(self.ci3.iter().all(|c| c.is_finite() && *c >= 0.0), || "bad interval".into())?;
        check(!self.runs.is_empty(), || "no runs".into())?;
        for r in &self.runs {
            check(r.counts.iter().sum::<u64>() == r.accepted, || "counts do not add up".into())?;
            check(r.accepted <= self.blocks, || "more accepted than mined".into())?;
            check_distribution(&r.shares, "shares")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve() -> SolveReport {
        SolveReport {
            alpha: vec![0.3],
            prop: "uniform".into(),
            variant: "appendix".into(),
            shares: vec![0.1 + 0.2, 0.7],
            rates: vec![0.3, 0.7],
            residual: 0.0,
        }
    }

    #[test]
    fn round_trips() {
        let r = solve();
        let text = render(&r).unwrap();
        assert_eq!(parse::<SolveReport>(&text).unwrap(), r);
    }

    #[test]
    fn rejects_broken_report() {
        let mut r = solve();
        r.shares = vec![0.5, 0.6];
        assert!(matches!(render(&r), Err(CliError::Output(_))));
    }
}
