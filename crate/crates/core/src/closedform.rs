//! Single strategic miner against honest mining: closed-form revenue ratios.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Sm,
    Ssm,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sm" => Ok(Strategy::Sm),
            "ssm" => Ok(Strategy::Ssm),
            other => Err(Error::domain(format!("unknown strategy {other:?}"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Sm => "sm",
            Strategy::Ssm => "ssm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormQuery<T> {
    pub strategy: Strategy,
    pub alpha: T,
    pub gamma: T,
}

impl<T: Scalar> ClosedFormQuery<T> {
    pub fn new(strategy: Strategy, alpha: T, gamma: T) -> Result<Self> {
        check_alpha(alpha)?;
        check_gamma(gamma)?;
        Ok(Self { strategy, alpha, gamma })
    }

    pub fn relative_revenue(&self) -> Result<T> {
        match self.strategy {
            Strategy::Sm => sm_relative_revenue(self.alpha, self.gamma),
            Strategy::Ssm => ssm_relative_revenue(self.alpha, self.gamma),
        }
    }
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha <= T::lit(0.5)) {
        return Err(Error::domain(format!("alpha out of (0,0.5]: {alpha}")));
    }
    Ok(())
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::domain(format!("gamma out of [0,1]: {gamma}")));
    }
    Ok(())
}

/// Selfish mining revenue ratio against honest miners.
pub fn sm_relative_revenue<T: Scalar>(alpha: T, gamma: T) -> Result<T> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let a = alpha;
    let one = T::one();
    let two = T::lit(2.0);
    let num = a * (one - a) * (one - a) * (T::lit(4.0) * a + gamma * (one - two * a)) - a * a * a;
    let den = one - a * (one + (two - a) * a);
    if !(den > T::zero()) {
        return Err(Error::domain(format!("denominator vanishes at alpha = {alpha}")));
    }
    Ok(num / den)
}

/// Semi-selfish mining revenue ratio against honest miners.
pub fn ssm_relative_revenue<T: Scalar>(alpha: T, gamma: T) -> Result<T> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let a = alpha;
    let one = T::one();
    let am1 = a - one;
    let num = a * (a * (a * (T::lit(2.0) * a - T::lit(5.0)) + T::lit(4.0)) - am1 * am1 * am1 * gamma);
    let den = am1 * a * a + one;
    if !(den > T::zero()) {
        return Err(Error::domain(format!("denominator vanishes at alpha = {alpha}")));
    }
    Ok(num / den)
}

/// Un-normalised steady-state block rates `(r_ssm, r_others)`.
pub fn ssm_rates<T: Scalar>(alpha: T, gamma: T) -> Result<(T, T)> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let a = alpha;
    let g = gamma;
    let (two, three, four, five) = (T::lit(2.0), T::lit(3.0), T::lit(4.0), T::lit(5.0));
    let r_ssm = (two - g) * a.powi(4) + (three * g - five) * a.powi(3) + (four - three * g) * a * a + g * a;
    let om = T::one() - a;
    let r_others = om * om * ((g - two) * a * a + (two - g) * a + T::one());
    Ok((r_ssm, r_others))
}

/// Outcome of the profitability threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "lowercase")]
pub enum Profitability<T> {
    /// Smallest profitable hash rate, to the bisection tolerance.
    At(T),
    /// Profitable across the whole scanned range.
    Always,
    Never,
}

impl<T: Scalar> Profitability<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Profitability::At(a) => Some(*a),
            _ => None,
        }
    }
}

pub const ROOT_SCAN_STEP: f64 = 0.005;
pub const ROOT_TOL: f64 = 1e-6;

/// Smallest `α ∈ (0, 0.5]` with `R(α, γ) ≥ α`.
pub fn profitability_root<T: Scalar>(strategy: Strategy, gamma: T) -> Result<Profitability<T>> {
    check_gamma(gamma)?;
    let f = |a: T| -> Result<T> {
        Ok(ClosedFormQuery::new(strategy, a, gamma)?.relative_revenue()? - a)
    };
    let steps = (0.5 / ROOT_SCAN_STEP).round() as usize;
    let grid: Vec<T> = (1..=steps).map(|k| T::lit(k as f64 * ROOT_SCAN_STEP)).collect();
    if f(grid[0])? >= T::zero() {
        return Ok(Profitability::Always);
    }
    for w in grid.windows(2) {
        let cur = f(w[1])?;
        if cur >= T::zero() {
            let (mut lo, mut hi) = (w[0], w[1]);
            let tol = T::lit(ROOT_TOL);
            while hi - lo > tol {
                let mid = (lo + hi) / T::lit(2.0);
                if f(mid)? >= T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Profitability::At(hi));
        }
    }
    Ok(Profitability::Never)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sm_reference_points() {
        assert!((sm_relative_revenue(1.0f64 / 3.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((sm_relative_revenue(0.25f64, 0.5).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ssm_reference_points() {
        assert!((ssm_relative_revenue(0.5f64, 0.0).unwrap() - 4.0 / 7.0).abs() < 1e-12);
        let r = ssm_relative_revenue(0.26795f64, 0.5).unwrap();
        assert!((r - 0.26795).abs() < 1e-5);
    }

    #[test]
    fn rates_normalise_to_ratio() {
        for &a in &[0.01f64, 0.2, 0.37, 0.5] {
            for &g in &[0.0, 0.4, 1.0] {
                let (s, o) = ssm_rates(a, g).unwrap();
                let r = ssm_relative_revenue(a, g).unwrap();
                assert!((s / (s + o) - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(sm_relative_revenue(0.0, 0.5).is_err());
        assert!(ssm_relative_revenue(0.6, 0.5).is_err());
        assert!(ssm_relative_revenue(0.3, 1.5).is_err());
        assert!(profitability_root::<f64>(Strategy::Ssm, -0.1).is_err());
    }

    #[test]
    fn roots() {
        // at gamma = 0 the crossing solves a^2 - 3a + 1 = 0
        let r = profitability_root(Strategy::Ssm, 0.0f64).unwrap().value().unwrap();
        assert!((r - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-6);
        let r = profitability_root(Strategy::Sm, 0.5f64).unwrap().value().unwrap();
        assert!((r - 0.25).abs() < 1e-3);
        assert_eq!(profitability_root(Strategy::Sm, 1.0f64).unwrap(), Profitability::Always);
    }

    #[test]
    fn f32_evaluation() {
        let r = ssm_relative_revenue(0.4f32, 0.5).unwrap();
        assert!((r - 0.458_407).abs() < 1e-5);
    }
}
