//! A fully resolved invocation, recorded in every document so that a trace
//! can be regenerated from the document alone.

use atomize::rewriting::{RuleId, RuleSet, Strategy};
use atomize::syntax::{parse_binding, Position};
use atomize::typing::{Environment, SystemId};
use serde::{Deserialize, Serialize};

use crate::doc::EnvDoc;
use crate::Failure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub system: SystemId,
    pub env: EnvDoc,
    /// Rule names; `None` means every rule of the system.
    pub rules: Option<Vec<String>>,
    /// `lo`, `li` or `random:SEED`.
    pub strategy: String,
    pub max_steps: usize,
    pub require_fine: bool,
    pub target: Option<String>,
    pub rule: Option<String>,
    pub position: Option<Vec<usize>>,
}

impl Job {
    pub fn environment(&self) -> Result<Environment, Failure> {
        crate::doc::parse_env_doc(&self.env).map_err(Failure::Parse)
    }

    pub fn rule_set(&self) -> Result<RuleSet, Failure> {
        match &self.rules {
            None => Ok(RuleSet::system(self.system)),
            Some(names) => {
                let set: RuleSet = names.join(",").parse().map_err(Failure::Parse)?;
                if let Some(r) = set.iter().find(|r| !r.valid_in(self.system)) {
                    return Err(Failure::Parse(format!("{r} is not a rule of {}", self.system)));
                }
                Ok(set)
            }
        }
    }

    pub fn strategy(&self) -> Result<Strategy, Failure> {
        self.strategy.parse().map_err(Failure::Parse)
    }

    pub fn rule(&self) -> Result<Option<RuleId>, Failure> {
        self.rule.as_deref().map(str::parse).transpose().map_err(Failure::Parse)
    }

    pub fn position(&self) -> Option<Position> {
        self.position.clone().map(Position)
    }
}

pub fn strategy_name(s: Strategy) -> String {
    match s {
        Strategy::LeftmostOutermost => "lo".into(),
        Strategy::LeftmostInnermost => "li".into(),
        Strategy::Random(seed) => format!("random:{seed}"),
    }
}

/// `x:A` bindings from flags and an optional file with one binding per line
/// (blank lines and `#` comments skipped).
pub fn read_env(flags: &[String], file: Option<&str>) -> Result<EnvDoc, Failure> {
    let mut lines: Vec<String> = Vec::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
        lines.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    lines.extend(flags.iter().cloned());
    let mut env = Environment::new();
    for l in &lines {
        let (x, a) = parse_binding(l).map_err(|e| Failure::Parse(format!("binding `{l}`: {e}")))?;
        env.declare(x, a).map_err(|e| Failure::Parse(e.to_string()))?;
    }
    Ok(crate::doc::env_doc(&env))
}

/// `0,1,2`, `[0,1,2]`, or empty for the root.
pub fn parse_position(s: &str) -> Result<Vec<usize>, Failure> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| c.parse().map_err(|_| Failure::Parse(format!("bad position `{s}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions() {
        assert_eq!(parse_position("").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_position("[]").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_position("0,1, 2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_position("[1,0]").unwrap(), vec![1, 0]);
        assert!(parse_position("a").is_err());
    }

    #[test]
    fn strategies_print_back() {
        for s in ["lo", "li", "random:7"] {
            assert_eq!(strategy_name(s.parse().unwrap()), s);
        }
    }
}
