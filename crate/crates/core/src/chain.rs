//! Lead-state Markov chain for `m` semi-selfish miners against an honest pool.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::scalar::Scalar;

pub const MAX_MINERS: usize = 10;

/// Largest chain the dense reference solver will accept (`3^6` states).
pub const DENSE_LIMIT: usize = 729;

/// Strategic hash rates plus the implied honest share.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashDistribution<T> {
    alphas: Vec<T>,
    beta: T,
}

impl<T: Scalar> HashDistribution<T> {
    /// Zero entries are allowed and mark inactive strategic miners.
    pub fn new(alphas: Vec<T>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::domain("at least one strategic miner is required"));
        }
        if alphas.len() > MAX_MINERS {
            return Err(Error::SizeLimit(format!(
                "{} strategic miners, at most {MAX_MINERS} supported",
                alphas.len()
            )));
        }
        let half = T::lit(0.5);
        let mut total = T::zero();
        for (i, &a) in alphas.iter().enumerate() {
            if !a.is_finite() || a < T::zero() || a > half {
                return Err(Error::domain(format!(
                    "alpha out of (0,0.5]: alpha[{}] = {}",
                    i + 1,
                    a
                )));
            }
            total += a;
        }
        if total >= T::one() {
            return Err(Error::domain(format!("sum of alpha must be below 1, got {total}")));
        }
        Ok(Self { beta: T::one() - total, alphas })
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Number of strategic miners, active or not.
    pub fn miners(&self) -> usize {
        self.alphas.len()
    }

    /// Hash of every participant, honest pool last.
    pub fn hashes(&self) -> Vec<T> {
        let mut h = self.alphas.clone();
        h.push(self.beta);
        h
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.alphas.len()).filter(|&i| self.alphas[i] > T::zero()).collect()
    }
}

/// Private leads, one coordinate per active miner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeadState(Vec<u8>);

impl LeadState {
    pub fn new(leads: Vec<u8>) -> Result<Self> {
        if leads.iter().any(|&l| l > 2) {
            return Err(Error::domain("lead coordinates must be 0, 1 or 2"));
        }
        Ok(Self(leads))
    }

    pub fn leads(&self) -> &[u8] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&l| l as usize).sum()
    }

    /// Miners whose lead is 1.
    pub fn a_set(&self) -> Vec<usize> {
        self.with_lead(1)
    }

    /// Miners whose lead is 2.
    pub fn b_set(&self) -> Vec<usize> {
        self.with_lead(2)
    }

    fn with_lead(&self, l: u8) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == l).collect()
    }

    fn code(&self) -> usize {
        self.0.iter().fold(0, |c, &l| c * 3 + l as usize)
    }
}

impl fmt::Display for LeadState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("S")?;
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// All `3^m` lead states, graded by total lead and then lexicographically.
pub fn enumerate_states(m: usize) -> Result<Vec<LeadState>> {
    if m == 0 || m > MAX_MINERS {
        return Err(Error::SizeLimit(format!("m = {m}, expected 1..={MAX_MINERS}")));
    }
    let n = 3usize.pow(m as u32);
    let mut states: Vec<LeadState> = (0..n)
        .map(|mut c| {
            let mut v = vec![0u8; m];
            for slot in v.iter_mut().rev() {
                *slot = (c % 3) as u8;
                c /= 3;
            }
            LeadState(v)
        })
        .collect();
    states.sort_by(|a, b| a.total().cmp(&b.total()).then_with(|| a.0.cmp(&b.0)));
    Ok(states)
}

/// Column-stochastic chain over the active miners of a hash distribution.
#[derive(Debug, Clone)]
pub struct ChainModel<T> {
    alpha: HashDistribution<T>,
    active: Vec<usize>,
    states: Vec<LeadState>,
    position: Vec<usize>,
    columns: Vec<Vec<(usize, T)>>,
    pi: Vec<T>,
}

impl<T: Scalar> ChainModel<T> {
    pub fn states(&self) -> &[LeadState] {
        &self.states
    }

    /// Hash distribution restricted to active miners.
    pub fn alpha(&self) -> &HashDistribution<T> {
        &self.alpha
    }

    /// Original indices of the miners the chain was built over.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, x: &LeadState) -> Option<usize> {
        if x.0.len() != self.alpha.miners() {
            return None;
        }
        self.position.get(x.code()).copied()
    }

    /// Nonzero entries `(to, probability)` of the column for state `from`.
    pub fn column(&self, from: usize) -> &[(usize, T)] {
        &self.columns[from]
    }

    /// Entry `P[to][from]`.
    pub fn entry(&self, to: usize, from: usize) -> T {
        self.columns[from]
            .iter()
            .filter(|(t, _)| *t == to)
            .fold(T::zero(), |s, &(_, p)| s + p)
    }

    /// Dense `P[to][from]`; intended for small chains.
    pub fn dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut p = vec![vec![T::zero(); n]; n];
        for (from, col) in self.columns.iter().enumerate() {
            for &(to, v) in col {
                p[to][from] += v;
            }
        }
        p
    }

    /// `P v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for (from, col) in self.columns.iter().enumerate() {
            for &(to, p) in col {
                out[to] += p * v[from];
            }
        }
        out
    }

    /// `‖P v − v‖∞`.
    pub fn residual(&self, v: &[T]) -> T {
        self.apply(v)
            .iter()
            .zip(v)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Stationary distribution, empty until solved.
    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn solved(mut self) -> Result<Self> {
        self.pi = steady_state(&self)?;
        Ok(self)
    }
}

/// Builds `P` for the active miners of `alpha`.
pub fn transition_matrix<T: Scalar>(alpha: &HashDistribution<T>) -> Result<ChainModel<T>> {
    let active = alpha.active();
    let m = active.len();
    if m == 0 {
        return Err(Error::domain("no active strategic miners"));
    }
    let a: Vec<T> = active.iter().map(|&i| alpha.alphas()[i]).collect();
    let projected = HashDistribution::new(a.clone())?;
    let beta = projected.beta();

    let states = enumerate_states(m)?;
    let mut position = vec![0usize; states.len()];
    for (k, s) in states.iter().enumerate() {
        position[s.code()] = k;
    }
    let weight: Vec<usize> = (0..m).map(|i| 3usize.pow((m - 1 - i) as u32)).collect();
    let zero = 0usize;

    let mut columns = Vec::with_capacity(states.len());
    for x in &states {
        let code = x.code();
        let a_set = x.a_set();
        let b_set = x.b_set();
        let mut col: Vec<(usize, T)> = Vec::with_capacity(m + 2);
        let mut push = |to_code: usize, p: T| {
            if p > T::zero() {
                col.push((position[to_code], p));
            }
        };
        match (a_set.is_empty(), b_set.len()) {
            (_, 0) => {
                for i in 0..m {
                    push(code + weight[i], a[i]);
                }
                push(zero, beta);
            }
            (true, 1) => {
                let j = b_set[0];
                for i in (0..m).filter(|&i| i != j) {
                    push(code + weight[i], a[i]);
                }
                push(code, a[j]);
                push(zero, beta);
            }
            (_, nb) if nb > 1 => {
                let mut back = beta;
                for i in 0..m {
                    if x.0[i] == 2 {
                        back += a[i];
                    } else {
                        push(code + weight[i], a[i]);
                    }
                }
                push(zero, back);
            }
            _ => {
                let j = b_set[0];
                for i in (0..m).filter(|&i| i != j) {
                    push(code + weight[i], a[i]);
                }
                push(2 * weight[j], a[j] * a[j]);
                push(zero, beta + a[j] * (T::one() - a[j]));
            }
        }
        columns.push(col);
    }

    Ok(ChainModel {
        alpha: projected,
        active,
        states,
        position,
        columns,
        pi: Vec::new(),
    })
}

fn residual_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::lit(1024.0) * T::epsilon())
}

fn clamp_tolerance<T: Scalar>() -> T {
    T::lit(1e-15).max(T::lit(4.0) * T::epsilon())
}

/// Exact stationary distribution.
///
/// Every transition either raises the total lead by one or lands on the
/// zero state or a `2e_j` state. Writing each probability as a combination of
/// those `m + 1` special unknowns in graded order leaves an `(m+1)`-square
/// system, so this is a direct solve that scales to `m = 10`.
pub fn steady_state<T: Scalar>(model: &ChainModel<T>) -> Result<Vec<T>> {
    let m = model.alpha.miners();
    let n = model.len();
    let k = m + 1;

    let mut slot = vec![usize::MAX; n];
    slot[0] = 0;
    for j in 0..m {
        let mut leads = vec![0u8; m];
        leads[j] = 2;
        slot[model.position[LeadState(leads).code()]] = j + 1;
    }

    let mut coef = vec![T::zero(); n * k];
    let mut eq = vec![T::zero(); k * k];
    for from in 0..n {
        if slot[from] != usize::MAX {
            coef[from * k + slot[from]] = T::one();
        }
        let grade = model.states[from].total();
        for &(to, p) in &model.columns[from] {
            if slot[to] != usize::MAX {
                let row = slot[to];
                for u in 0..k {
                    eq[row * k + u] += p * coef[from * k + u];
                }
            } else {
                assert!(
                    model.states[to].total() > grade,
                    "non-special transition must raise the total lead"
                );
                for u in 0..k {
                    let c = coef[from * k + u];
                    coef[to * k + u] += p * c;
                }
            }
        }
    }
    for s in 0..k {
        eq[s * k + s] -= T::one();
    }
    // the balance equations are rank deficient by one; normalisation replaces the zero-state row
    let mut rhs = vec![T::zero(); k];
    for u in 0..k {
        eq[u] = (0..n).fold(T::zero(), |acc, y| acc + coef[y * k + u]);
    }
    rhs[0] = T::one();
    let u = solve_dense(eq, rhs, k)?;

    let pi: Vec<T> = (0..n)
        .map(|y| (0..k).fold(T::zero(), |acc, s| acc + coef[y * k + s] * u[s]))
        .collect();
    finish(model, pi)
}

/// Reference solve of `(P − I)π = 0` plus normalisation by dense elimination.
pub fn steady_state_dense<T: Scalar>(model: &ChainModel<T>) -> Result<Vec<T>> {
    let n = model.len();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit(format!(
            "dense solve limited to {DENSE_LIMIT} states, chain has {n}"
        )));
    }
    let mut a = vec![T::zero(); n * n];
    for (from, col) in model.columns.iter().enumerate() {
        for &(to, p) in col {
            a[to * n + from] += p;
        }
    }
    for i in 0..n {
        a[i * n + i] -= T::one();
    }
    for v in a.iter_mut().take(n) {
        *v = T::one();
    }
    let mut b = vec![T::zero(); n];
    b[0] = T::one();
    let pi = solve_dense(a, b, n)?;
    finish(model, pi)
}

fn finish<T: Scalar>(model: &ChainModel<T>, mut pi: Vec<T>) -> Result<Vec<T>> {
    let clamp = clamp_tolerance::<T>();
    for (i, v) in pi.iter_mut().enumerate() {
        if !v.is_finite() || *v < -clamp {
            return Err(Error::Numerical {
                message: format!("stationary mass of state {} is {}", model.states[i], v),
                residual: v.to_f64_lossy(),
            });
        }
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let total = pi.iter().fold(T::zero(), |s, &v| s + v);
    for v in pi.iter_mut() {
        *v /= total;
    }
    let res = model.residual(&pi);
    if !(res <= residual_tolerance::<T>()) {
        return Err(Error::Numerical {
            message: "stationary residual above tolerance".into(),
            residual: res.to_f64_lossy(),
        });
    }
    Ok(pi)
}
