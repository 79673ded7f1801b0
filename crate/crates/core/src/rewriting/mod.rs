//! Reduction: the rule catalogue, redex enumeration with environment
//! threading, single steps and strategy-driven normalization.

mod rules;
mod trace;

use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rules::{apply_rule, fineness_condition, matches, FinenessCondition, RuleError};
pub use trace::{ReductionTrace, ReplayError, Step};

use crate::syntax::{Position, Term};
use crate::typing::{premiss_is_fine, Environment, SystemId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    BetaImp,
    BetaAnd,
    BetaOr,
    BetaAll,
    EtaImp,
    EtaAnd,
    EtaOr,
    EtaAll,
    PiImp,
    PiAnd,
    PiOr,
    PiBot,
    VarpiImp,
    VarpiAnd,
    VarpiOr,
    VarpiBot,
    RhoCase,
    RhoAbort,
    Delta,
    EpsCase,
    EpsAbort,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::BetaImp,
        RuleId::BetaAnd,
        RuleId::BetaOr,
        RuleId::BetaAll,
        RuleId::EtaImp,
        RuleId::EtaAnd,
        RuleId::EtaOr,
        RuleId::EtaAll,
        RuleId::PiImp,
        RuleId::PiAnd,
        RuleId::PiOr,
        RuleId::PiBot,
        RuleId::VarpiImp,
        RuleId::VarpiAnd,
        RuleId::VarpiOr,
        RuleId::VarpiBot,
        RuleId::RhoCase,
        RuleId::RhoAbort,
        RuleId::Delta,
        RuleId::EpsCase,
        RuleId::EpsAbort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::BetaImp => "beta_imp",
            RuleId::BetaAnd => "beta_and",
            RuleId::BetaOr => "beta_or",
            RuleId::BetaAll => "beta_all",
            RuleId::EtaImp => "eta_imp",
            RuleId::EtaAnd => "eta_and",
            RuleId::EtaOr => "eta_or",
            RuleId::EtaAll => "eta_all",
            RuleId::PiImp => "pi_imp",
            RuleId::PiAnd => "pi_and",
            RuleId::PiOr => "pi_or",
            RuleId::PiBot => "pi_bot",
            RuleId::VarpiImp => "varpi_imp",
            RuleId::VarpiAnd => "varpi_and",
            RuleId::VarpiOr => "varpi_or",
            RuleId::VarpiBot => "varpi_bot",
            RuleId::RhoCase => "rho_case",
            RuleId::RhoAbort => "rho_abort",
            RuleId::Delta => "delta",
            RuleId::EpsCase => "eps_case",
            RuleId::EpsAbort => "eps_abort",
        }
    }

    pub fn valid_in(self, sys: SystemId) -> bool {
        use RuleId::*;
        match self {
            BetaImp | BetaAnd | EtaImp | EtaAnd => true,
            BetaOr | EtaOr | PiImp | PiAnd | PiOr | PiBot | VarpiImp | VarpiAnd | VarpiOr | VarpiBot => {
                sys == SystemId::Ipc
            }
            BetaAll | EtaAll => sys != SystemId::Ipc,
            RhoCase | RhoAbort | Delta | EpsCase | EpsAbort => sys == SystemId::F,
        }
    }

    pub fn is_beta(self) -> bool {
        matches!(
            self,
            RuleId::BetaImp | RuleId::BetaAnd | RuleId::BetaOr | RuleId::BetaAll
        )
    }

    pub fn is_eta(self) -> bool {
        matches!(self, RuleId::EtaImp | RuleId::EtaAnd | RuleId::EtaOr | RuleId::EtaAll)
    }

    /// ϱ and ρ, the atomization conversions.
    pub fn is_atomization(self) -> bool {
        matches!(self, RuleId::RhoCase | RuleId::RhoAbort)
    }

    pub fn is_commuting(self) -> bool {
        matches!(self, RuleId::EpsCase | RuleId::EpsAbort)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// A set of rules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RuleSet(u32);

impl RuleSet {
    pub fn empty() -> RuleSet {
        RuleSet(0)
    }

    pub fn of(rules: &[RuleId]) -> RuleSet {
        rules.iter().fold(RuleSet(0), |s, r| s.with(*r))
    }

    /// Every rule of `sys`.
    pub fn system(sys: SystemId) -> RuleSet {
        RuleSet::of(&RuleId::ALL.into_iter().filter(|r| r.valid_in(sys)).collect::<Vec<_>>())
    }

    /// ϱ and ρ.
    pub fn atomization() -> RuleSet {
        RuleSet::of(&[RuleId::RhoCase, RuleId::RhoAbort])
    }

    /// All β and η rules of `sys`.
    pub fn beta_eta(sys: SystemId) -> RuleSet {
        RuleSet::of(
            &RuleId::ALL
                .into_iter()
                .filter(|r| (r.is_beta() || r.is_eta()) && r.valid_in(sys))
                .collect::<Vec<_>>(),
        )
    }

    pub fn with(self, r: RuleId) -> RuleSet {
        RuleSet(self.0 | 1 << r as u32)
    }

    pub fn contains(self, r: RuleId) -> bool {
        self.0 & (1 << r as u32) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = RuleId> {
        RuleId::ALL.into_iter().filter(move |r| self.contains(*r))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl FromStr for RuleSet {
    type Err = String;

    /// Comma-separated rule names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .try_fold(RuleSet::empty(), |set, r| Ok(set.with(r.parse()?)))
    }
}

/// A redex occurrence in a subject term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    pub rule: RuleId,
    /// The environment in force at `position`.
    pub local_env: Environment,
    pub fine: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("{rule} redex at {position} is not fine")]
    NotFine { rule: RuleId, position: Position },
    #[error("no {rule} redex at {position}")]
    StaleRedex { rule: RuleId, position: Position },
    #[error("{rule} is not a rule of {system}")]
    WrongSystem { rule: RuleId, system: SystemId },
}

/// The environment in force at `pos`: `env` extended by every term binder on
/// the path (λ-abstractions, and case branches in IPC).
pub fn local_env(env: &Environment, m: &Term, pos: &Position) -> Option<Environment> {
    let mut env = env.clone();
    let mut t = m;
    for &i in &pos.0 {
        match (t, i) {
            (Term::Lam(x, a, _), 0) => env = env.extended(x.clone(), a.clone()),
            (Term::Case { left, .. }, 1) => env = env.extended(left.var.clone(), left.ty.clone()),
            (Term::Case { right, .. }, 2) => env = env.extended(right.var.clone(), right.ty.clone()),
            _ => {}
        }
        t = *t.children().get(i)?;
    }
    Some(env)
}

fn is_fine_in(env: &Environment, rule: RuleId, t: &Term) -> bool {
    match fineness_condition(rule, t) {
        None => true,
        Some(cond) => premiss_is_fine(env, &cond),
    }
}

/// Every redex of a rule in `rules` (restricted to `sys`), in preorder.
pub fn find_redexes(sys: SystemId, env: &Environment, m: &Term, rules: RuleSet) -> Vec<Redex> {
    let rules: Vec<RuleId> = rules.iter().filter(|r| r.valid_in(sys)).collect();
    let mut out = Vec::new();
    fn walk(t: &Term, env: &Environment, rules: &[RuleId], path: &mut Vec<usize>, out: &mut Vec<Redex>) {
        for &rule in rules {
            if matches(rule, t) {
                out.push(Redex {
                    position: Position(path.clone()),
                    rule,
                    local_env: env.clone(),
                    fine: is_fine_in(env, rule, t),
                });
            }
        }
        for (i, c) in t.children().into_iter().enumerate() {
            let inner;
            let env = match (t, i) {
                (Term::Lam(x, a, _), 0) => {
                    inner = env.extended(x.clone(), a.clone());
                    &inner
                }
                (Term::Case { left, .. }, 1) => {
                    inner = env.extended(left.var.clone(), left.ty.clone());
                    &inner
                }
                (Term::Case { right, .. }, 2) => {
                    inner = env.extended(right.var.clone(), right.ty.clone());
                    &inner
                }
                _ => env,
            };
            path.push(i);
            walk(c, env, rules, path, out);
            path.pop();
        }
    }
    walk(m, env, &rules, &mut Vec::new(), &mut out);
    out
}

/// Contracts the redex `r` of `m`.
pub fn step(sys: SystemId, m: &Term, r: &Redex, require_fine: bool) -> Result<Term, StepError> {
    if !r.rule.valid_in(sys) {
        return Err(StepError::WrongSystem {
            rule: r.rule,
            system: sys,
        });
    }
    if require_fine && !r.fine {
        return Err(StepError::NotFine {
            rule: r.rule,
            position: r.position.clone(),
        });
    }
    let stale = || StepError::StaleRedex {
        rule: r.rule,
        position: r.position.clone(),
    };
    let sub = m.subterm(&r.position).ok_or_else(stale)?;
    let contractum = apply_rule(r.rule, sub).map_err(|_| stale())?;
    m.replace_at(&r.position, contractum).ok_or_else(stale)
}

/// Locates the redex of `rule` at `pos`, computing its environment and fineness.
pub fn redex_at(sys: SystemId, env: &Environment, m: &Term, rule: RuleId, pos: &Position) -> Result<Redex, StepError> {
    if !rule.valid_in(sys) {
        return Err(StepError::WrongSystem { rule, system: sys });
    }
    let stale = || StepError::StaleRedex {
        rule,
        position: pos.clone(),
    };
    let sub = m.subterm(pos).ok_or_else(stale)?;
    if !matches(rule, sub) {
        return Err(stale());
    }
    let local = local_env(env, m, pos).ok_or_else(stale)?;
    let fine = is_fine_in(&local, rule, sub);
    Ok(Redex {
        position: pos.clone(),
        rule,
        local_env: local,
        fine,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    LeftmostInnermost,
    Random(u64),
}

impl FromStr for Strategy {
    type Err = String;

    /// `lo`, `li` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lo" | "leftmost-outermost" => Ok(Strategy::LeftmostOutermost),
            "li" | "leftmost-innermost" => Ok(Strategy::LeftmostInnermost),
            _ => match s.strip_prefix("random:") {
                Some(seed) => seed.parse().map(Strategy::Random).map_err(|e| format!("bad seed: {e}")),
                None => Err(format!("unknown strategy `{s}` (expected lo, li or random:SEED)")),
            },
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NormalizeOptions {
    pub strategy: Strategy,
    pub max_steps: usize,
    pub require_fine: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            strategy: Strategy::LeftmostOutermost,
            max_steps: 10_000,
            require_fine: true,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum NormalizeError {
    #[error("step limit of {limit} exceeded")]
    StepLimitExceeded { limit: usize, trace: Box<ReductionTrace> },
}

/// Picks the leftmost-innermost candidate: the first, in preorder, with no
/// other candidate strictly below it.
fn leftmost_innermost(cands: &[Redex]) -> usize {
    (0..cands.len())
        .find(|&i| {
            !cands
                .iter()
                .any(|d| d.position.len() > cands[i].position.len() && cands[i].position.is_prefix_of(&d.position))
        })
        .unwrap_or(0)
}

/// Reduces `m` with `rules` until no (fine, if required) redex remains.
pub fn normalize(
    sys: SystemId,
    env: &Environment,
    m: &Term,
    rules: RuleSet,
    opts: NormalizeOptions,
) -> Result<ReductionTrace, NormalizeError> {
    let mut rng = match opts.strategy {
        Strategy::Random(seed) => Some(StdRng::seed_from_u64(seed)),
        _ => None,
    };
    let mut trace = ReductionTrace::new(m.clone());
    loop {
        let current = trace.last();
        let cands: Vec<Redex> = find_redexes(sys, env, current, rules)
            .into_iter()
            .filter(|r| r.fine || !opts.require_fine)
            .collect();
        if cands.is_empty() {
            return Ok(trace);
        }
        if trace.len() >= opts.max_steps {
            return Err(NormalizeError::StepLimitExceeded {
                limit: opts.max_steps,
                trace: Box::new(trace),
            });
        }
        let pick = match (&mut rng, opts.strategy) {
            (Some(rng), _) => rng.gen_range(0..cands.len()),
            (None, Strategy::LeftmostInnermost) => leftmost_innermost(&cands),
            _ => 0,
        };
        let r = &cands[pick];
        let next = step(sys, current, r, opts.require_fine).expect("redex found on the current term");
        trace.push(Step {
            rule: r.rule,
            position: r.position.clone(),
            local_env: r.local_env.clone(),
            result: next,
            fine: r.fine,
            administrative: false,
        });
    }
}
