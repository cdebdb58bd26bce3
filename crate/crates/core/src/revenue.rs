//! Tie propagation, per-state block rewards and steady-state relative revenue.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chain::{transition_matrix, HashDistribution, LeadState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which statement of the reward in states with two or more lead-2 miners to use.
///
/// `Appendix` credits a non-participant who resolves the race with the winning
/// branch's two blocks. `Printed` credits only one, which is what the printed
/// two-miner revenue matrix does (its `½β²` entries).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum S22Variant {
    #[default]
    Appendix,
    Printed,
}

impl FromStr for S22Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "appendix" => Ok(S22Variant::Appendix),
            "printed" => Ok(S22Variant::Printed),
            other => Err(Error::domain(format!(
                "unknown revenue variant {other:?}, expected printed or appendix"
            ))),
        }
    }
}

impl fmt::Display for S22Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            S22Variant::Appendix => "appendix",
            S22Variant::Printed => "printed",
        })
    }
}

/// Explicit tie-splitting weights keyed by sorted tie set.
///
/// Indices are zero-based, the honest pool is index `miners`. Each row gives,
/// for one miner, its weight on every branch of the tie in set order.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationTable<T> {
    miners: usize,
    entries: BTreeMap<Vec<usize>, Vec<Vec<T>>>,
}

impl<T: Scalar> PropagationTable<T> {
    pub fn new(miners: usize, entries: BTreeMap<Vec<usize>, Vec<Vec<T>>>) -> Result<Self> {
        for (set, rows) in &entries {
            validate_table_entry(miners, set, rows).map_err(Error::PropagationTable)?;
        }
        Ok(Self { miners, entries })
    }

    pub fn miners(&self) -> usize {
        self.miners
    }

    pub fn get(&self, set: &[usize]) -> Option<&Vec<Vec<T>>> {
        self.entries.get(set)
    }
}

/// Checks one tie set and its weight rows; the message names the offending row.
pub fn validate_table_entry<T: Scalar>(
    miners: usize,
    set: &[usize],
    rows: &[Vec<T>],
) -> std::result::Result<(), String> {
    let label = set_label(miners, set);
    if set.is_empty() {
        return Err("empty tie set".into());
    }
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("tie set {label} must be sorted without repeats"));
    }
    if let Some(&bad) = set.iter().find(|&&i| i > miners) {
        return Err(format!("tie set {label} references unknown miner {}", bad + 1));
    }
    if rows.len() != miners + 1 {
        return Err(format!(
            "tie set {label} has {} rows, expected {}",
            rows.len(),
            miners + 1
        ));
    }
    let tol = T::lit(1e-9);
    for (i, row) in rows.iter().enumerate() {
        let who = miner_label(miners, i);
        if row.len() != set.len() {
            return Err(format!(
                "tie set {label}, miner {who}: {} weights for {} branches",
                row.len(),
                set.len()
            ));
        }
        if row.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(format!("tie set {label}, miner {who}: negative or non-finite weight"));
        }
        let sum = row.iter().fold(T::zero(), |s, &w| s + w);
        if (sum - T::one()).abs() > tol {
            return Err(format!("tie set {label}, miner {who}: weights sum to {sum}, not 1"));
        }
        if i < miners {
            if let Some(p) = set.iter().position(|&j| j == i) {
                if (row[p] - T::one()).abs() > tol {
                    return Err(format!(
                        "tie set {label}, miner {who}: a strategic participant must mine its own branch"
                    ));
                }
            }
        }
    }
    Ok(())
}

fn miner_label(miners: usize, i: usize) -> String {
    if i == miners {
        "H".into()
    } else {
        (i + 1).to_string()
    }
}

fn set_label(miners: usize, set: &[usize]) -> String {
    let parts: Vec<String> = set.iter().map(|&i| miner_label(miners, i)).collect();
    format!("{{{}}}", parts.join(","))
}

/// How miners not committed to a branch split their hash across a public tie.
#[derive(Debug, Clone, PartialEq)]
pub enum PropagationModel<T> {
    /// Everyone not mining its own branch spreads evenly, honest pool included.
    Uniform,
    /// The honest pool keeps `1 − γ` on its own branch and gives `γ` to the others.
    TwoWayGamma(T),
    Table(PropagationTable<T>),
}

impl<T: Scalar> PropagationModel<T> {
    pub fn two_way(gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::domain(format!("gamma out of [0,1]: {gamma}")));
        }
        Ok(PropagationModel::TwoWayGamma(gamma))
    }

    /// Weight miner `i` puts on branch `j` of tie `set` among `miners` strategic miners.
    pub fn weight(&self, miners: usize, set: &[usize], i: usize, j: usize) -> Result<T> {
        let d = T::count(set.len());
        let inside = set.contains(&i);
        if set.len() == 1 {
            return Ok(T::one());
        }
        if i < miners && inside {
            return Ok(if i == j { T::one() } else { T::zero() });
        }
        match self {
            PropagationModel::Uniform => Ok(T::one() / d),
            PropagationModel::TwoWayGamma(g) => {
                if i == miners && inside {
                    if j == i {
                        Ok(T::one() - *g)
                    } else {
                        Ok(*g / (d - T::one()))
                    }
                } else {
                    Ok(T::one() / d)
                }
            }
            PropagationModel::Table(t) => {
                if t.miners != miners {
                    return Err(Error::PropagationTable(format!(
                        "table is for {} miners, model has {miners}",
                        t.miners
                    )));
                }
                let rows = t.get(set).ok_or_else(|| {
                    Error::PropagationTable(format!("no entry for tie set {}", set_label(miners, set)))
                })?;
                let p = set.iter().position(|&b| b == j).expect("branch in tie set");
                Ok(rows[i][p])
            }
        }
    }
}

/// Expected rewards when the tie `set` with private lead `order` is resolved by the next block.
pub fn tie_reward<T: Scalar>(
    set: &[usize],
    order: u8,
    alpha: &HashDistribution<T>,
    prop: &PropagationModel<T>,
) -> Result<Vec<T>> {
    tie_reward_credit(set, order, order, alpha, prop)
}

fn tie_reward_credit<T: Scalar>(
    set: &[usize],
    order: u8,
    outsider_credit: u8,
    alpha: &HashDistribution<T>,
    prop: &PropagationModel<T>,
) -> Result<Vec<T>> {
    let miners = alpha.miners();
    if set.is_empty() {
        return Err(Error::domain("tie set must be nonempty"));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::domain(format!("tie order must be 1 or 2, got {order}")));
    }
    if let Some(&bad) = set.iter().find(|&&i| i > miners) {
        return Err(Error::domain(format!("tie set references unknown miner {}", bad + 1)));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let h = alpha.hashes();
    let mut out = vec![T::zero(); miners + 1];
    for i in 0..=miners {
        if h[i] == T::zero() {
            continue;
        }
        let credit = if sorted.contains(&i) { order } else { outsider_credit };
        let credit = T::count(credit as usize);
        for &j in &sorted {
            let g = prop.weight(miners, &sorted, i, j)?;
            if g == T::zero() {
                continue;
            }
            out[i] += h[i] * g;
            out[j] += h[i] * g * credit;
        }
    }
    Ok(out)
}

/// Expected rewards on leaving state `x`, whose coordinates follow `alpha`'s active miners.
pub fn state_revenue<T: Scalar>(
    x: &LeadState,
    alpha: &HashDistribution<T>,
    prop: &PropagationModel<T>,
    variant: S22Variant,
) -> Result<Vec<T>> {
    let active = alpha.active();
    if x.leads().len() != active.len() {
        return Err(Error::domain(format!(
            "state {x} has {} coordinates but {} miners are active",
            x.leads().len(),
            active.len()
        )));
    }
    let miners = alpha.miners();
    let beta = alpha.beta();
    let a_set: Vec<usize> = x.a_set().into_iter().map(|k| active[k]).collect();
    let b_set: Vec<usize> = x.b_set().into_iter().map(|k| active[k]).collect();
    let two = T::lit(2.0);
    let three = T::lit(3.0);

    let mut out = vec![T::zero(); miners + 1];
    match (a_set.is_empty(), b_set.len()) {
        (true, 0) => out[miners] = beta,
        (false, 0) => {
            let mut set = a_set;
            set.push(miners);
            for (o, t) in out.iter_mut().zip(tie_reward(&set, 1, alpha, prop)?) {
                *o = beta * t;
            }
        }
        (true, 1) => {
            let j = b_set[0];
            out[j] = alpha.alphas()[j] + two * beta;
        }
        (_, nb) if nb > 1 => {
            let outsider = match variant {
                S22Variant::Appendix => 2,
                S22Variant::Printed => 1,
            };
            let t = tie_reward_credit(&b_set, 2, outsider, alpha, prop)?;
            for (o, t) in out.iter_mut().zip(t) {
                *o = beta * t;
            }
            for &j in &b_set {
                out[j] += three * alpha.alphas()[j];
            }
        }
        _ => {
            let j = b_set[0];
            let aj = alpha.alphas()[j];
            out[j] = two * beta + two * aj * aj + three * aj * (T::one() - aj);
        }
    }
    Ok(out)
}

/// One row per chain state, in chain order.
pub fn revenue_matrix<T: Scalar>(
    alpha: &HashDistribution<T>,
    prop: &PropagationModel<T>,
    variant: S22Variant,
) -> Result<Vec<Vec<T>>> {
    let chain = transition_matrix(alpha)?;
    chain
        .states()
        .iter()
        .map(|x| state_revenue(x, alpha, prop, variant))
        .collect()
}

/// Steady-state block rates and their normalisation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueProfile<T> {
    /// Expected accepted blocks per chain transition, honest pool last.
    pub rates: Vec<T>,
    pub shares: Vec<T>,
    /// `‖Pπ − π‖∞` of the stationary solve.
    pub residual: T,
    pub variant: S22Variant,
}

pub fn relative_revenue<T: Scalar>(
    alpha: &HashDistribution<T>,
    prop: &PropagationModel<T>,
    variant: S22Variant,
) -> Result<RevenueProfile<T>> {
    let miners = alpha.miners();
    if let PropagationModel::Table(t) = prop {
        if t.miners() != miners {
            return Err(Error::PropagationTable(format!(
                "table is for {} miners, alpha has {miners}",
                t.miners()
            )));
        }
    }
    if alpha.active().is_empty() {
        let mut unit = vec![T::zero(); miners + 1];
        unit[miners] = T::one();
        return Ok(RevenueProfile {
            rates: unit.clone(),
            shares: unit,
            residual: T::zero(),
            variant,
        });
    }
    let chain = transition_matrix(alpha)?.solved()?;
    let mut rates = vec![T::zero(); miners + 1];
    for (x, &p) in chain.states().iter().zip(chain.pi()) {
        if p == T::zero() {
            continue;
        }
        for (r, v) in rates.iter_mut().zip(state_revenue(x, alpha, prop, variant)?) {
            *r += p * v;
        }
    }
    let total = rates.iter().fold(T::zero(), |s, &v| s + v);
    let shares = rates.iter().map(|&r| r / total).collect();
    Ok(RevenueProfile {
        residual: chain.residual(chain.pi()),
        rates,
        shares,
        variant,
    })
}
