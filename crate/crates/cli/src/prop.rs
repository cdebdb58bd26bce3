use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ssmlab::PropagationModel;

use crate::error::{CliError, CliResult};
use crate::proptable;

/// `--prop uniform | gamma=G | table=FILE`.
#[derive(Debug, Clone, PartialEq)]
pub enum PropArg {
    Uniform,
    Gamma(f64),
    Table(PathBuf),
}

impl FromStr for PropArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(PropArg::Uniform);
        }
        if let Some(g) = s.strip_prefix("gamma=") {
            let g: f64 = g.parse().map_err(|_| format!("bad gamma {g:?}"))?;
            if !(0.0..=1.0).contains(&g) {
                return Err(format!("gamma out of [0,1]: {g}"));
            }
            return Ok(PropArg::Gamma(g));
        }
        if let Some(path) = s.strip_prefix("table=") {
            return Ok(PropArg::Table(PathBuf::from(path)));
        }
        Err(format!("expected uniform, gamma=G or table=FILE, got {s:?}"))
    }
}

impl fmt::Display for PropArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropArg::Uniform => f.write_str("uniform"),
            PropArg::Gamma(g) => write!(f, "gamma={g}"),
            PropArg::Table(p) => write!(f, "table={}", p.display()),
        }
    }
}

impl PropArg {
    pub fn resolve(&self, miners: usize) -> CliResult<PropagationModel> {
        match self {
            PropArg::Uniform => Ok(PropagationModel::Uniform),
            PropArg::Gamma(g) => Ok(PropagationModel::two_way(*g)?),
            PropArg::Table(path) => Ok(PropagationModel::Table(proptable::load(path, miners)?)),
        }
    }
}

/// Parses `0.33,0.48` into hash fractions.
pub fn parse_alpha(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad hash fraction {p:?}")))
        })
        .collect()
}
