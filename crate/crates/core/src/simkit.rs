//! Block-tree Monte Carlo of honest, selfish and semi-selfish miners.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::HashDistribution;
use crate::error::{Error, Result};
use crate::revenue::PropagationModel;

pub const MIN_BLOCKS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Honest,
    Sm,
    Ssm,
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "honest" | "h" => Ok(StrategyKind::Honest),
            "sm" => Ok(StrategyKind::Sm),
            "ssm" | "s" => Ok(StrategyKind::Ssm),
            other => Err(Error::domain(format!("unknown strategy {other:?}"))),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Honest => "honest",
            StrategyKind::Sm => "sm",
            StrategyKind::Ssm => "ssm",
        })
    }
}

/// Internal state `ℓ` of a miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lead {
    Zero,
    /// No lead while the public chain is tied.
    ZeroPrime,
    Ahead(u32),
}

#[derive(Debug, Clone)]
pub struct MinerAutomaton {
    pub kind: StrategyKind,
    pub lead: Lead,
    /// Private branch from the fork point, oldest first; a prefix may be public.
    pub private: Vec<usize>,
    /// Public height when this miner last acted on a change.
    seen: u32,
}

#[derive(Debug, Clone)]
struct Block {
    parent: usize,
    height: u32,
    owner: usize,
    published: bool,
}

const GENESIS_OWNER: usize = usize::MAX;

/// Mutable world: the block tree, the public frontier and every automaton.
pub struct World {
    hashes: Vec<f64>,
    miners: Vec<MinerAutomaton>,
    prop: PropagationModel<f64>,
    blocks: Vec<Block>,
    frontier: Vec<usize>,
    height: u32,
    rng: ChaCha8Rng,
}

impl World {
    /// `specs` covers the strategic miners; the honest pool is appended.
    pub fn new(
        alpha: &HashDistribution<f64>,
        specs: &[StrategyKind],
        prop: PropagationModel<f64>,
        seed: u64,
        replica: u64,
    ) -> Result<Self> {
        if specs.len() != alpha.miners() {
            return Err(Error::domain(format!(
                "{} strategies for {} miners",
                specs.len(),
                alpha.miners()
            )));
        }
        let mut miners: Vec<MinerAutomaton> = specs
            .iter()
            .chain(std::iter::once(&StrategyKind::Honest))
            .map(|&kind| MinerAutomaton {
                kind,
                lead: Lead::Zero,
                private: Vec::new(),
                seen: 0,
            })
            .collect();
        miners.shrink_to_fit();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        Ok(Self {
            hashes: alpha.hashes(),
            miners,
            prop,
            blocks: vec![Block {
                parent: usize::MAX,
                height: 0,
                owner: GENESIS_OWNER,
                published: true,
            }],
            frontier: vec![0],
            height: 0,
            rng,
        })
    }

    pub fn miners(&self) -> &[MinerAutomaton] {
        &self.miners
    }

    pub fn public_height(&self) -> u32 {
        self.height
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len() - 1
    }

    fn honest_index(&self) -> usize {
        self.miners.len() - 1
    }

    /// Index used for tie bookkeeping: honest-strategy miners act as part of the pool.
    fn branch_owner(&self, miner: usize) -> usize {
        if miner == GENESIS_OWNER || self.miners[miner].kind == StrategyKind::Honest {
            self.honest_index()
        } else {
            miner
        }
    }

    pub fn draw_winner(&mut self) -> usize {
        let r: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, &h) in self.hashes.iter().enumerate() {
            acc += h;
            if r < acc && h > 0.0 {
                return i;
            }
        }
        self.honest_index()
    }

    fn publish(&mut self, b: usize) {
        if self.blocks[b].published {
            return;
        }
        self.blocks[b].published = true;
        let h = self.blocks[b].height;
        if h > self.height {
            self.height = h;
            self.frontier.clear();
            self.frontier.push(b);
        } else if h == self.height {
            self.frontier.push(b);
        }
    }

    fn add_block(&mut self, parent: usize, owner: usize) -> usize {
        let height = self.blocks[parent].height + 1;
        self.blocks.push(Block {
            parent,
            height,
            owner,
            published: false,
        });
        self.blocks.len() - 1
    }

    /// `oldest(F)` from miner `i`'s point of view.
    fn public_target(&mut self, i: usize) -> Result<usize> {
        if self.frontier.len() == 1 {
            return Ok(self.frontier[0]);
        }
        let me = self.branch_owner(i);
        let owners: Vec<usize> = self
            .frontier
            .iter()
            .map(|&b| self.branch_owner(self.blocks[b].owner))
            .collect();
        if let Some(k) = owners.iter().position(|&o| o == me && me != self.honest_index()) {
            return Ok(self.frontier[k]);
        }
        let mut set = owners.clone();
        set.sort_unstable();
        set.dedup();
        let pool = self.honest_index();
        let r: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut chosen = *set.last().expect("nonempty frontier");
        for &j in &set {
            acc += self.prop.weight(pool, &set, me, j)?;
            if r < acc {
                chosen = j;
                break;
            }
        }
        let k = owners.iter().position(|&o| o == chosen).expect("owner on frontier");
        Ok(self.frontier[k])
    }

    fn settle_state(&self) -> Lead {
        if self.frontier.len() > 1 {
            Lead::ZeroPrime
        } else {
            Lead::Zero
        }
    }

    /// One block found by `winner`, followed by every reaction it triggers.
    pub fn step(&mut self, winner: usize) -> Result<()> {
        let kind = self.miners[winner].kind;
        match (kind, self.miners[winner].lead) {
            (StrategyKind::Honest, _) | (_, Lead::ZeroPrime) => {
                let parent = self.public_target(winner)?;
                let b = self.add_block(parent, winner);
                self.publish(b);
                let m = &mut self.miners[winner];
                m.lead = Lead::Zero;
                m.private.clear();
            }
            (_, Lead::Zero) => {
                let parent = self.public_target(winner)?;
                let b = self.add_block(parent, winner);
                let m = &mut self.miners[winner];
                m.private = vec![b];
                m.lead = Lead::Ahead(1);
            }
            (StrategyKind::Sm, Lead::Ahead(l)) => {
                let tip = *self.miners[winner].private.last().expect("private tip");
                let b = self.add_block(tip, winner);
                let m = &mut self.miners[winner];
                m.private.push(b);
                m.lead = Lead::Ahead(l + 1);
            }
            (StrategyKind::Ssm, Lead::Ahead(l)) => {
                let tip = *self.miners[winner].private.last().expect("private tip");
                let b = self.add_block(tip, winner);
                self.miners[winner].private.push(b);
                if l >= 2 {
                    let oldest = self.miners[winner]
                        .private
                        .iter()
                        .copied()
                        .find(|&p| !self.blocks[p].published)
                        .expect("unpublished private block");
                    self.publish(oldest);
                    self.miners[winner].lead = Lead::Ahead(2);
                } else {
                    self.miners[winner].lead = Lead::Ahead(l + 1);
                }
            }
        }
        self.miners[winner].seen = self.height;
        self.cascade();
        self.check()
    }

    fn cascade(&mut self) {
        loop {
            let mut changed = false;
            for i in 0..self.miners.len() {
                let k = self.height - self.miners[i].seen;
                match (self.miners[i].kind, self.miners[i].lead) {
                    (_, Lead::Zero | Lead::ZeroPrime) => {
                        self.miners[i].lead = self.settle_state();
                        self.miners[i].seen = self.height;
                    }
                    (_, Lead::Ahead(_)) if k == 0 => {}
                    (StrategyKind::Sm, Lead::Ahead(l)) if k <= l.saturating_sub(2) => {
                        let h = self.height;
                        let prefix: Vec<usize> = self.miners[i]
                            .private
                            .iter()
                            .copied()
                            .filter(|&b| !self.blocks[b].published && self.blocks[b].height <= h)
                            .collect();
                        for b in prefix {
                            self.publish(b);
                        }
                        let m = &mut self.miners[i];
                        m.lead = Lead::Ahead(l - k);
                        m.seen = self.height;
                        changed = true;
                    }
                    (_, Lead::Ahead(_)) => {
                        let private = std::mem::take(&mut self.miners[i].private);
                        for b in private {
                            self.publish(b);
                        }
                        self.miners[i].seen = self.height;
                        self.miners[i].lead = self.settle_state();
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn check(&self) -> Result<()> {
        for (i, m) in self.miners.iter().enumerate() {
            match (m.kind, m.lead) {
                (StrategyKind::Honest, Lead::Ahead(l)) => {
                    return Err(Error::SimulationBug(format!("honest miner {i} holds lead {l}")))
                }
                (StrategyKind::Ssm, Lead::Ahead(l)) if l > 2 => {
                    return Err(Error::SimulationBug(format!("SSM miner {i} holds lead {l}")))
                }
                (_, Lead::Ahead(l)) => {
                    let tip = *m.private.last().ok_or_else(|| {
                        Error::SimulationBug(format!("miner {i} ahead without a private chain"))
                    })?;
                    if self.blocks[tip].height != self.height + l {
                        return Err(Error::SimulationBug(format!(
                            "miner {i} lead {l} but private tip at {} over public {}",
                            self.blocks[tip].height, self.height
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn max_lead(&self) -> u32 {
        self.miners
            .iter()
            .map(|m| match m.lead {
                Lead::Ahead(l) => l,
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    fn settled(&self) -> bool {
        self.frontier.len() == 1 && self.miners.iter().all(|m| !matches!(m.lead, Lead::Ahead(_)))
    }

    /// Forces honest-pool blocks until every fork is resolved.
    pub fn settle(&mut self) -> Result<usize> {
        let limit = 10 * self.max_lead() as usize + 10;
        let pool = self.honest_index();
        let mut extra = 0;
        while !self.settled() {
            if extra == limit {
                return Err(Error::Settlement(limit));
            }
            self.step(pool)?;
            extra += 1;
        }
        Ok(extra)
    }

    /// Blocks per participant on the settled longest chain, counting ids `< cutoff` only.
    fn count_path(&self, cutoff: usize) -> Vec<u64> {
        let mut counts = vec![0u64; self.miners.len()];
        let mut b = self.frontier[0];
        while b != 0 {
            if b < cutoff {
                counts[self.blocks[b].owner] += 1;
            }
            b = self.blocks[b].parent;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Accepted main-run blocks per participant, honest pool last.
    pub counts: Vec<u64>,
    pub shares: Vec<f64>,
    pub blocks: u64,
    pub accepted: u64,
    pub settlement_blocks: u64,
    pub seed: u64,
    pub replica: u64,
}

pub fn simulate(
    alpha: &HashDistribution<f64>,
    specs: &[StrategyKind],
    prop: &PropagationModel<f64>,
    n_blocks: u64,
    seed: u64,
) -> Result<SimResult> {
    simulate_replica(alpha, specs, prop, n_blocks, seed, 0)
}

/// One run on the stream `(seed, replica)`.
pub fn simulate_replica(
    alpha: &HashDistribution<f64>,
    specs: &[StrategyKind],
    prop: &PropagationModel<f64>,
    n_blocks: u64,
    seed: u64,
    replica: u64,
) -> Result<SimResult> {
    if n_blocks < MIN_BLOCKS {
        return Err(Error::domain(format!("at least {MIN_BLOCKS} blocks required, got {n_blocks}")));
    }
    let mut world = World::new(alpha, specs, prop.clone(), seed, replica)?;
    for _ in 0..n_blocks {
        let w = world.draw_winner();
        world.step(w)?;
    }
    let cutoff = world.blocks.len();
    let extra = world.settle()?;
    let counts = world.count_path(cutoff);
    let accepted: u64 = counts.iter().sum();
    let shares = counts.iter().map(|&c| c as f64 / accepted as f64).collect();
    Ok(SimResult {
        counts,
        shares,
        blocks: n_blocks,
        accepted,
        settlement_blocks: extra as u64,
        seed,
        replica,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimAggregate {
    pub mean_shares: Vec<f64>,
    /// Half-width of a 3σ interval per participant.
    pub ci3: Vec<f64>,
    pub replicas: Vec<SimResult>,
}

/// Independent replicas in parallel, one stream each.
pub fn simulate_replicas(
    alpha: &HashDistribution<f64>,
    specs: &[StrategyKind],
    prop: &PropagationModel<f64>,
    n_blocks: u64,
    seed: u64,
    replicas: u64,
) -> Result<SimAggregate> {
    if replicas == 0 {
        return Err(Error::domain("at least one replica required"));
    }
    let runs: Vec<SimResult> = (0..replicas)
        .into_par_iter()
        .map(|r| simulate_replica(alpha, specs, prop, n_blocks, seed, r))
        .collect::<Result<_>>()?;
    let k = runs[0].shares.len();
    let n = runs.len() as f64;
    let mean: Vec<f64> = (0..k)
        .map(|i| runs.iter().map(|r| r.shares[i]).sum::<f64>() / n)
        .collect();
    let accepted: f64 = runs.iter().map(|r| r.accepted as f64).sum();
    let ci3 = (0..k)
        .map(|i| {
            let p = mean[i];
            let binomial = (p * (1.0 - p) / accepted).sqrt();
            let spread = if runs.len() > 1 {
                let var = runs.iter().map(|r| (r.shares[i] - p).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            3.0 * binomial.max(spread)
        })
        .collect();
    Ok(SimAggregate {
        mean_shares: mean,
        ci3,
        replicas: runs,
    })
}
