//! The SSM game, the partition game and the searches built on top of them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chain::HashDistribution;
use crate::error::{Error, Result};
use crate::revenue::{relative_revenue, PropagationModel, S22Variant};

/// Deviations must gain more than this to break an equilibrium.
pub const PNE_TOL: f64 = 1e-12;
/// Follower payoffs closer than this count as a tie.
pub const INDIFFERENCE_TOL: f64 = 1e-9;
pub const ENDPOINT_TOL: f64 = 1e-6;
pub const GOLDEN_TOL: f64 = 1e-5;
pub const SWITCH_TOL: f64 = 1e-13;
pub const MAX_GAME_MINERS: usize = 8;

/// Pure profile of the binary game; `true` is SSM.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(Vec<bool>);

impl StrategyProfile {
    pub fn new(actions: Vec<bool>) -> Self {
        Self(actions)
    }

    pub fn honest(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn selfish(m: usize) -> Self {
        Self(vec![true; m])
    }

    /// Profile number `k` in table order: miner 1 is the most significant bit.
    pub fn from_index(m: usize, k: usize) -> Self {
        Self((0..m).map(|i| (k >> (m - 1 - i)) & 1 == 1).collect())
    }

    pub fn actions(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] = !v[i];
        Self(v)
    }

    pub fn as_fractions(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "S" } else { "H" })?;
        }
        Ok(())
    }
}

impl FromStr for StrategyProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'H' | '0' => Ok(false),
                'S' | '1' => Ok(true),
                other => Err(Error::domain(format!("bad action {other:?} in profile {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }
}

impl Serialize for StrategyProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Accounting of the honest part of a partitioned miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionVariant {
    /// Honest share weighted by `(1 − s_i)²`, as the definition is written.
    #[default]
    Literal,
    /// Honest share weighted by `(1 − s_i)` once.
    ShareConsistent,
}

impl FromStr for PartitionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(PartitionVariant::Literal),
            "share-consistent" => Ok(PartitionVariant::ShareConsistent),
            other => Err(Error::domain(format!("unknown partition variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StackelbergMode {
    /// One follower, ties broken in the leader's favour.
    TwoPlayer,
    /// Followers settle on the subgame equilibrium worst for the leader.
    Pessimistic,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestResponse {
    pub choice: u8,
    pub honest_utility: f64,
    pub selfish_utility: f64,
    pub indifferent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SseEntry {
    pub commitment: f64,
    pub profile: Vec<f64>,
    pub leader_value: f64,
    pub utilities: Vec<f64>,
    pub follower_indifferent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StackelbergReport {
    pub leader: usize,
    pub mode: StackelbergMode,
    pub grid_step: f64,
    pub best: SseEntry,
    pub sse: Vec<SseEntry>,
    /// Commitments whose follower subgame has no pure equilibrium.
    pub no_pne: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Coalition {
    pub members: Vec<usize>,
    pub penalty: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub pne: Vec<StrategyProfile>,
    pub utilities: Vec<(StrategyProfile, Vec<f64>)>,
    pub sse: StackelbergReport,
    pub commitment_type: u8,
    pub coalitions: Vec<Coalition>,
}

/// Game state for one hash distribution; revenue vectors are memoised.
pub struct Game {
    alpha: HashDistribution<f64>,
    prop: PropagationModel<f64>,
    variant: S22Variant,
    partition: PartitionVariant,
    cache: Mutex<HashMap<Vec<i64>, Arc<Vec<f64>>>>,
}

impl Game {
    pub fn new(alpha: HashDistribution<f64>) -> Result<Self> {
        Self::with_options(alpha, PropagationModel::Uniform, S22Variant::default())
    }

    pub fn with_options(
        alpha: HashDistribution<f64>,
        prop: PropagationModel<f64>,
        variant: S22Variant,
    ) -> Result<Self> {
        if alpha.miners() > MAX_GAME_MINERS {
            return Err(Error::SizeLimit(format!(
                "games support at most {MAX_GAME_MINERS} miners, got {}",
                alpha.miners()
            )));
        }
        Ok(Self {
            alpha,
            prop,
            variant,
            partition: PartitionVariant::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn partition_variant(mut self, v: PartitionVariant) -> Self {
        self.partition = v;
        self
    }

    pub fn alpha(&self) -> &HashDistribution<f64> {
        &self.alpha
    }

    pub fn miners(&self) -> usize {
        self.alpha.miners()
    }

    /// `R_SSM(eff)` for an effective SSM hash vector.
    pub fn shares(&self, eff: &[f64]) -> Result<Arc<Vec<f64>>> {
        let key: Vec<i64> = eff.iter().map(|v| (v * 1e12).round() as i64).collect();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let hd = HashDistribution::new(eff.to_vec())?;
        let shares = Arc::new(relative_revenue(&hd, &self.prop, self.variant)?.shares);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, shares.clone());
        Ok(shares)
    }

    /// Utilities of the binary game.
    pub fn utilities(&self, x: &StrategyProfile) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        self.partition_utilities_with(&x.as_fractions(), PartitionVariant::Literal)
    }

    /// The full `2^M` table in profile order.
    pub fn table(&self) -> Result<Vec<(StrategyProfile, Vec<f64>)>> {
        let m = self.miners();
        (0..1usize << m)
            .map(|k| {
                let x = StrategyProfile::from_index(m, k);
                let u = self.utilities(&x)?;
                Ok((x, u))
            })
            .collect()
    }

    pub fn enumerate_pne(&self) -> Result<Vec<StrategyProfile>> {
        let table: HashMap<StrategyProfile, Vec<f64>> = self.table()?.into_iter().collect();
        let m = self.miners();
        let mut out: Vec<StrategyProfile> = (0..1usize << m)
            .map(|k| StrategyProfile::from_index(m, k))
            .filter(|x| {
                (0..m).all(|i| table[&x.flipped(i)][i] <= table[x][i] + PNE_TOL)
            })
            .collect();
        out.sort_by_key(|x| {
            x.actions()
                .iter()
                .fold(0usize, |k, &b| k * 2 + b as usize)
        });
        Ok(out)
    }

    pub fn partition_utilities(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.partition_utilities_with(s, self.partition)
    }

    pub fn partition_utilities_with(&self, s: &[f64], variant: PartitionVariant) -> Result<Vec<f64>> {
        self.check_len(s.len())?;
        if let Some(bad) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain(format!("partition fraction out of [0,1]: {bad}")));
        }
        let a = self.alpha.alphas();
        let m = a.len();
        let eff: Vec<f64> = a.iter().zip(s).map(|(a, s)| a * s).collect();
        let r = self.shares(&eff)?;
        let d = 1.0 - eff.iter().sum::<f64>();
        Ok((0..m)
            .map(|i| {
                let honest = (1.0 - s[i]) * a[i] / d * r[m];
                let honest = match variant {
                    PartitionVariant::Literal => (1.0 - s[i]) * honest,
                    PartitionVariant::ShareConsistent => honest,
                };
                s[i] * r[i] + honest
            })
            .collect())
    }

    /// Best binary response of miner `i` with everyone else's fraction fixed by `s`.
    pub fn best_response(&self, i: usize, s: &[f64]) -> Result<BestResponse> {
        self.check_len(s.len())?;
        if i >= self.miners() {
            return Err(Error::domain(format!("no miner {}", i + 1)));
        }
        let mut s0 = s.to_vec();
        s0[i] = 0.0;
        let mut s1 = s.to_vec();
        s1[i] = 1.0;
        let u0 = self.partition_utilities(&s0)?[i];
        let u1 = self.partition_utilities(&s1)?[i];
        Ok(BestResponse {
            choice: u8::from(u1 > u0),
            honest_utility: u0,
            selfish_utility: u1,
            indifferent: (u0 - u1).abs() <= INDIFFERENCE_TOL,
        })
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.miners() {
            return Err(Error::domain(format!(
                "profile has {n} entries, game has {} miners",
                self.miners()
            )));
        }
        Ok(())
    }

    fn follow(&self, leader: usize, c: f64, mode: StackelbergMode) -> Result<Option<SseEntry>> {
        let m = self.miners();
        let followers: Vec<usize> = (0..m).filter(|&j| j != leader).collect();
        let nf = followers.len();
        let profiles: Vec<Vec<f64>> = (0..1usize << nf)
            .map(|k| {
                let mut s = vec![0.0; m];
                s[leader] = c;
                for (b, &j) in followers.iter().enumerate() {
                    if (k >> (nf - 1 - b)) & 1 == 1 {
                        s[j] = 1.0;
                    }
                }
                s
            })
            .collect();
        let utils: Vec<Vec<f64>> = profiles
            .iter()
            .map(|s| self.partition_utilities(s))
            .collect::<Result<_>>()?;

        let pick = |k: usize, indifferent: bool| SseEntry {
            commitment: c,
            profile: profiles[k].clone(),
            leader_value: utils[k][leader],
            utilities: utils[k].clone(),
            follower_indifferent: indifferent,
        };

        match mode {
            StackelbergMode::TwoPlayer => {
                let f = followers[0];
                let (u0, u1) = (utils[0][f], utils[1][f]);
                let tie = (u0 - u1).abs() <= INDIFFERENCE_TOL;
                let k = if tie {
                    usize::from(utils[1][leader] > utils[0][leader])
                } else {
                    usize::from(u1 > u0)
                };
                Ok(Some(pick(k, tie)))
            }
            StackelbergMode::Pessimistic => {
                let mut worst: Option<usize> = None;
                for k in 0..profiles.len() {
                    let stable = (0..nf).all(|b| {
                        let flip = k ^ (1 << (nf - 1 - b));
                        let j = followers[b];
                        utils[flip][j] <= utils[k][j] + PNE_TOL
                    });
                    if stable && worst.is_none_or(|w| utils[k][leader] < utils[w][leader]) {
                        worst = Some(k);
                    }
                }
                Ok(worst.map(|k| {
                    let indifferent = (0..nf).any(|b| {
                        let flip = k ^ (1 << (nf - 1 - b));
                        (utils[flip][followers[b]] - utils[k][followers[b]]).abs() <= INDIFFERENCE_TOL
                    });
                    pick(k, indifferent)
                }))
            }
        }
    }

    /// Leader-optimal commitment over a grid, refined around the best cell.
    pub fn stackelberg(
        &self,
        leader: usize,
        grid_step: f64,
        mode: StackelbergMode,
    ) -> Result<StackelbergReport> {
        let m = self.miners();
        if leader >= m {
            return Err(Error::domain(format!("no miner {}", leader + 1)));
        }
        if m < 2 || (mode == StackelbergMode::TwoPlayer && m != 2) {
            return Err(Error::domain(format!("{mode:?} commitment search needs a matching miner count, got {m}")));
        }
        if !(1e-4..=1e-2).contains(&grid_step) {
            return Err(Error::domain(format!("grid step out of [1e-4,1e-2]: {grid_step}")));
        }
        let n = (1.0 / grid_step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|k| (k as f64 * grid_step).min(1.0)).collect();
        let evals: Vec<Option<SseEntry>> = grid
            .par_iter()
            .map(|&c| self.follow(leader, c, mode))
            .collect::<Result<_>>()?;

        let no_pne: Vec<f64> = grid
            .iter()
            .zip(&evals)
            .filter(|(_, e)| e.is_none())
            .map(|(&c, _)| c)
            .collect();
        let mut best_k: Option<usize> = None;
        for (k, e) in evals.iter().enumerate() {
            if let Some(e) = e {
                if best_k.is_none_or(|b| e.leader_value > evals[b].as_ref().unwrap().leader_value + PNE_TOL) {
                    best_k = Some(k);
                }
            }
        }
        let best_k = best_k.ok_or_else(|| {
            Error::domain("no commitment admits a pure follower equilibrium".to_string())
        })?;
        let mut best = evals[best_k].clone().unwrap();
        let lo = grid[best_k.saturating_sub(1)];
        let hi = grid[(best_k + 1).min(n)];
        for cand in [self.refine(leader, mode, lo, best.commitment, 3)?, self.refine(leader, mode, best.commitment, hi, 3)?]
            .into_iter()
            .flatten()
        {
            if cand.leader_value > best.leader_value + PNE_TOL {
                best = cand;
            }
        }

        let mut sse = vec![best.clone()];
        for e in evals.iter().flatten() {
            if e.leader_value >= best.leader_value - INDIFFERENCE_TOL
                && (e.commitment - best.commitment).abs() > SWITCH_TOL
            {
                sse.push(e.clone());
            }
        }
        Ok(StackelbergReport {
            leader,
            mode,
            grid_step,
            best,
            sse,
            no_pne,
        })
    }

    fn response_key(e: &Option<SseEntry>, leader: usize) -> Option<Vec<u8>> {
        e.as_ref().map(|e| {
            e.profile
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != leader)
                .map(|(_, &v)| v as u8)
                .collect()
        })
    }

    fn better(a: Option<SseEntry>, b: Option<SseEntry>) -> Option<SseEntry> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.leader_value > a.leader_value { b } else { a }),
            (a, b) => a.or(b),
        }
    }

    /// Maximises the leader value on `[lo, hi]`: golden section where the
    /// follower response is constant, bisection onto response switches otherwise.
    fn refine(
        &self,
        leader: usize,
        mode: StackelbergMode,
        lo: f64,
        hi: f64,
        depth: u32,
    ) -> Result<Option<SseEntry>> {
        if hi <= lo {
            return self.follow(leader, lo, mode);
        }
        let el = self.follow(leader, lo, mode)?;
        let eh = self.follow(leader, hi, mode)?;
        let kl = Self::response_key(&el, leader);
        if kl == Self::response_key(&eh, leader) {
            if kl.is_none() {
                return Ok(None);
            }
            let golden = self.golden(leader, mode, lo, hi)?;
            return Ok(Self::better(Self::better(el, eh), golden));
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > SWITCH_TOL {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if Self::response_key(&self.follow(leader, mid, mode)?, leader) == kl {
                a = mid;
            } else {
                b = mid;
            }
        }
        let mut best = Self::better(self.follow(leader, a, mode)?, self.follow(leader, b, mode)?);
        if depth > 0 {
            best = Self::better(best, self.refine(leader, mode, lo, a, depth - 1)?);
            best = Self::better(best, self.refine(leader, mode, b, hi, depth - 1)?);
        } else {
            best = Self::better(best, Self::better(el, eh));
        }
        Ok(best)
    }

    fn golden(&self, leader: usize, mode: StackelbergMode, lo: f64, hi: f64) -> Result<Option<SseEntry>> {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let v = |c: f64| -> Result<f64> {
            Ok(self
                .follow(leader, c, mode)?
                .map_or(f64::NEG_INFINITY, |e| e.leader_value))
        };
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = v(x1)?;
        let mut f2 = v(x2)?;
        while b - a > GOLDEN_TOL {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = v(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = v(x1)?;
            }
        }
        self.follow(leader, 0.5 * (a + b), mode)
    }

    /// Commitment type of leader miner 1 (index 0).
    pub fn commitment_type(&self, grid_step: f64) -> Result<(u8, StackelbergReport)> {
        let mode = if self.miners() == 2 {
            StackelbergMode::TwoPlayer
        } else {
            StackelbergMode::Pessimistic
        };
        let report = self.stackelberg(0, grid_step, mode)?;
        let pne: BTreeSet<StrategyProfile> = self.enumerate_pne()?.into_iter().collect();
        Ok((classify(&report, &pne), report))
    }

    /// Coalitions able to push `victim` below its honest payoff after it deviates.
    pub fn penalizing_coalitions(&self, victim: usize) -> Result<Vec<Coalition>> {
        let m = self.miners();
        if victim >= m {
            return Err(Error::domain(format!("no miner {}", victim + 1)));
        }
        let base = self.utilities(&StrategyProfile::honest(m))?[victim];
        let mut solo = StrategyProfile::honest(m);
        solo = solo.flipped(victim);
        if self.utilities(&solo)?[victim] <= base + PNE_TOL {
            return Ok(Vec::new());
        }
        let others: Vec<usize> = (0..m).filter(|&j| j != victim).collect();
        let mut out = Vec::new();
        for mask in 1usize..(1 << others.len()) {
            let members: Vec<usize> = (0..others.len())
                .filter(|b| (mask >> b) & 1 == 1)
                .map(|b| others[b])
                .collect();
            let mut x = solo.clone();
            for &j in &members {
                x = x.flipped(j);
            }
            let ux = self.utilities(&x)?;
            let credible = members
                .iter()
                .map(|&j| Ok(ux[j] > self.utilities(&x.flipped(j))?[j] + PNE_TOL))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|ok| ok);
            if credible && ux[victim] < base - PNE_TOL {
                out.push(Coalition {
                    members,
                    penalty: base - ux[victim],
                });
            }
        }
        Ok(out)
    }

    pub fn equilibrium_report(&self, grid_step: f64) -> Result<EquilibriumReport> {
        let (commitment_type, sse) = self.commitment_type(grid_step)?;
        Ok(EquilibriumReport {
            pne: self.enumerate_pne()?,
            utilities: self.table()?,
            sse,
            commitment_type,
            coalitions: self.penalizing_coalitions(0)?,
        })
    }
}

/// Compares the SSE profiles with the PNE of the binary game.
pub fn classify(report: &StackelbergReport, pne: &BTreeSet<StrategyProfile>) -> u8 {
    let leader = report.leader;
    let keys: BTreeSet<Option<StrategyProfile>> = report
        .sse
        .iter()
        .map(|e| {
            let c = e.commitment;
            let bit = if c <= ENDPOINT_TOL {
                false
            } else if c >= 1.0 - ENDPOINT_TOL {
                true
            } else {
                return None;
            };
            let mut acts: Vec<bool> = e.profile.iter().map(|&v| v > 0.5).collect();
            acts[leader] = bit;
            Some(StrategyProfile::new(acts))
        })
        .collect();
    let subset = keys.iter().all(|k| k.as_ref().is_some_and(|p| pne.contains(p)));
    if subset {
        if keys.len() == pne.len() {
            0
        } else {
            1
        }
    } else if keys.iter().any(|k| k.is_some()) {
        2
    } else {
        3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "eta", rename_all = "lowercase")]
pub enum Threshold {
    At(f64),
    /// All-SSM is already an equilibrium at the first scanned point.
    Always,
    Never,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub miners: usize,
    pub threshold: Threshold,
    /// Scan points where the deviation gain changes sign.
    pub sign_changes: Vec<f64>,
    pub utilities_all_s: Vec<f64>,
    pub utilities_all_h: Vec<f64>,
    pub pareto_dominates: bool,
    /// `(η, U_1(all S) − U_1(miner 1 honest))` around the threshold.
    pub verification: Vec<(f64, f64)>,
}

pub const THRESHOLD_SCAN_STEP: f64 = 0.005;

/// Gain of miner 1 from staying SSM when everyone else runs SSM at hash `eta`.
pub fn symmetric_gain(miners: usize, eta: f64, prop: &PropagationModel<f64>, variant: S22Variant) -> Result<f64> {
    let game = Game::with_options(HashDistribution::new(vec![eta; miners])?, prop.clone(), variant)?;
    let all = StrategyProfile::selfish(miners);
    Ok(game.utilities(&all)?[0] - game.utilities(&all.flipped(0))?[0])
}

/// Smallest symmetric hash at which all-SSM is a pure equilibrium.
pub fn uniform_profitability_threshold(
    miners: usize,
    tol: f64,
    prop: &PropagationModel<f64>,
    variant: S22Variant,
) -> Result<ThresholdReport> {
    if miners == 0 || miners > MAX_GAME_MINERS {
        return Err(Error::SizeLimit(format!("miners must be in 1..={MAX_GAME_MINERS}, got {miners}")));
    }
    if !(tol > 0.0 && tol < THRESHOLD_SCAN_STEP) {
        return Err(Error::domain(format!("tolerance out of (0,{THRESHOLD_SCAN_STEP}): {tol}")));
    }
    let upper = if miners == 1 { 0.5 } else { (1.0 / miners as f64).min(0.5) };
    let inside = |eta: f64| if miners == 1 { eta <= upper + 1e-12 } else { eta < upper - 1e-12 };
    let grid: Vec<f64> = (1..)
        .map(|k| k as f64 * THRESHOLD_SCAN_STEP)
        .take_while(|&e| inside(e))
        .collect();
    let gains: Vec<f64> = grid
        .par_iter()
        .map(|&e| symmetric_gain(miners, e, prop, variant))
        .collect::<Result<_>>()?;
    let ok = |g: f64| g >= -PNE_TOL;

    let mut sign_changes = Vec::new();
    let mut first_up = None;
    for k in 0..gains.len().saturating_sub(1) {
        if ok(gains[k]) != ok(gains[k + 1]) {
            sign_changes.push(grid[k + 1]);
            if first_up.is_none() && !ok(gains[k]) {
                first_up = Some(k);
            }
        }
    }
    if sign_changes.len() > 1 {
        return Err(Error::Numerical {
            message: format!(
                "equilibrium condition changes sign {} times along the scan",
                sign_changes.len()
            ),
            residual: sign_changes.len() as f64,
        });
    }

    let threshold = if gains.first().is_some_and(|&g| ok(g)) {
        Threshold::Always
    } else if let Some(k) = first_up {
        let (mut lo, mut hi) = (grid[k], grid[k + 1]);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if ok(symmetric_gain(miners, mid, prop, variant)?) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Threshold::At(hi)
    } else {
        Threshold::Never
    };

    let (utilities_all_s, utilities_all_h, pareto_dominates, verification) = match threshold {
        Threshold::At(eta) => {
            let game = Game::with_options(HashDistribution::new(vec![eta; miners])?, prop.clone(), variant)?;
            let s = game.utilities(&StrategyProfile::selfish(miners))?;
            let h = game.utilities(&StrategyProfile::honest(miners))?;
            let dominates = s.iter().zip(&h).all(|(a, b)| a >= b) && s.iter().zip(&h).any(|(a, b)| a > b);
            let mut verification = Vec::new();
            for d in [-5e-3, -1e-3, 1e-3, 5e-3] {
                let e = eta + d;
                if e > 0.0 && inside(e) {
                    verification.push((e, symmetric_gain(miners, e, prop, variant)?));
                }
            }
            (s, h, dominates, verification)
        }
        _ => (Vec::new(), Vec::new(), false, Vec::new()),
    };

    Ok(ThresholdReport {
        miners,
        threshold,
        sign_changes,
        utilities_all_s,
        utilities_all_h,
        pareto_dominates,
        verification,
    })
}
