//! Local confluence of fine atomization, checked by bounded join search.

use std::collections::HashMap;

use super::AnalysisError;
use crate::rewriting::{find_redexes, local_env, redex_at, step, Redex, RuleId, RuleSet};
use crate::syntax::{Position, Term};
use crate::typing::{typecheck, Environment, SystemId};

pub const DEFAULT_MAX_JOIN: usize = 16;

// Bound on the reducts explored from either side of a pair.
const FRONTIER_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub first: (RuleId, Position),
    pub second: (RuleId, Position),
    /// Steps from each one-step reduct to the common reduct found.
    pub join: Option<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub pairs: Vec<PairReport>,
}

impl ConfluenceReport {
    pub fn all_joined(&self) -> bool {
        self.pairs.iter().all(|p| p.join.is_some())
    }
}

/// One side of a join search: every fine reduct found so far, keyed by
/// canonical form, and the terms of the last level reached.
struct Side {
    seen: HashMap<Term, usize>,
    frontier: Vec<Term>,
    depth: usize,
}

impl Side {
    fn new(t: Term) -> Side {
        Side {
            seen: HashMap::from([(t.canonical(), 0)]),
            frontier: vec![t],
            depth: 0,
        }
    }

    fn exhausted(&self) -> bool {
        self.frontier.is_empty() || self.seen.len() >= FRONTIER_CAP
    }

    /// Expands one level; returns the canonical forms first reached.
    fn expand(&mut self, env: &Environment, rules: RuleSet) -> Vec<Term> {
        self.depth += 1;
        let mut fresh = Vec::new();
        let mut next = Vec::new();
        for u in std::mem::take(&mut self.frontier) {
            for r in find_redexes(SystemId::F, env, &u, rules).into_iter().filter(|r| r.fine) {
                let v = step(SystemId::F, &u, &r, true).expect("fine redex of the current term");
                let key = v.canonical();
                if !self.seen.contains_key(&key) {
                    self.seen.insert(key.clone(), self.depth);
                    fresh.push(key);
                    next.push(v);
                }
            }
        }
        self.frontier = next;
        fresh
    }
}

/// The usual case: each redex is still in place after contracting the other,
/// and contracting it there closes the square in one step per side.
fn commute(env: &Environment, ta: &Term, tb: &Term, a: &Redex, b: &Redex) -> Option<(usize, usize)> {
    let redo = |t: &Term, r: &Redex| {
        let again = redex_at(SystemId::F, env, t, r.rule, &r.position)
            .ok()
            .filter(|r| r.fine)?;
        step(SystemId::F, t, &again, true).ok()
    };
    let (ab, ba) = (redo(ta, b)?, redo(tb, a)?);
    (ab.canonical() == ba.canonical()).then_some((1, 1))
}

/// Steps from `a` and from `b` to a common fine reduct, searching breadth-first
/// from both ends until the combined depth exceeds `max_join`.
fn join(env: &Environment, a: Term, b: Term, rules: RuleSet, max_join: usize) -> Option<(usize, usize)> {
    let mut sides = [Side::new(a), Side::new(b)];
    if let Some(&d) = sides[1].seen.get(&sides[0].frontier[0].canonical()) {
        return Some((0, d));
    }
    while sides[0].depth + sides[1].depth < max_join {
        let i = match (sides[0].exhausted(), sides[1].exhausted()) {
            (true, true) => return None,
            (false, true) => 0,
            (true, false) => 1,
            _ => usize::from(sides[1].frontier.len() < sides[0].frontier.len()),
        };
        let fresh = sides[i].expand(env, rules);
        let found = fresh
            .iter()
            .filter_map(|k| sides[1 - i].seen.get(k).map(|&d| (sides[i].depth, d)))
            .min_by_key(|(x, y)| x + y);
        if let Some((mine, theirs)) = found {
            return Some(if i == 0 { (mine, theirs) } else { (theirs, mine) });
        }
    }
    None
}

/// For every pair of distinct fine redexes of `m`, contracts both and looks
/// for a common fine reduct within `max_join` steps.
pub fn check_local_confluence(
    env: &Environment,
    m: &Term,
    rules: RuleSet,
    max_join: usize,
) -> Result<ConfluenceReport, AnalysisError> {
    if let Some(rule) = rules.iter().find(|r| !r.is_atomization()) {
        return Err(AnalysisError::RuleNotApplicable { rule });
    }
    typecheck(SystemId::F, env, m)?;
    let redexes: Vec<_> = find_redexes(SystemId::F, env, m, rules)
        .into_iter()
        .filter(|r| r.fine)
        .collect();
    let mut report = ConfluenceReport::default();
    for (i, a) in redexes.iter().enumerate() {
        for b in &redexes[i + 1..] {
            // Both reducts agree outside the smallest subterm holding the two
            // redexes, so the search can stay inside it.
            let shared: Vec<usize> = a
                .position
                .0
                .iter()
                .zip(&b.position.0)
                .take_while(|(x, y)| x == y)
                .map(|(x, _)| *x)
                .collect();
            let at = Position(shared);
            let local =
                local_env(env, m, &at).ok_or_else(|| AnalysisError::invariant("redex positions out of range"))?;
            let ta = step(SystemId::F, m, a, true)?;
            let tb = step(SystemId::F, m, b, true)?;
            let (Some(sa), Some(sb)) = (ta.subterm(&at), tb.subterm(&at)) else {
                return Err(AnalysisError::invariant(format!(
                    "no subterm at {at} after contraction"
                )));
            };
            let join = commute(env, &ta, &tb, a, b).or_else(|| join(&local, sa.clone(), sb.clone(), rules, max_join));
            report.pairs.push(PairReport {
                first: (a.rule, a.position.clone()),
                second: (b.rule, b.position.clone()),
                join,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{encode_bot, encode_or, parse_formula, parse_term};

    fn env() -> Environment {
        let f = |s: &str| parse_formula(s).unwrap();
        Environment::from_bindings([
            ("z".to_string(), encode_bot()),
            ("w".to_string(), encode_bot()),
            ("d".to_string(), encode_or(&f("X"), &f("Y"))),
        ])
        .unwrap()
    }

    #[test]
    fn disjoint_redexes_commute() {
        let m = parse_term("<z [X -> X], w [X & X]>").unwrap();
        let r = check_local_confluence(&env(), &m, RuleSet::atomization(), DEFAULT_MAX_JOIN).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.pairs[0].join, Some((1, 1)));
    }

    #[test]
    fn single_redex_is_vacuous() {
        let m = parse_term("z [X -> X]").unwrap();
        let r = check_local_confluence(&env(), &m, RuleSet::atomization(), DEFAULT_MAX_JOIN).unwrap();
        assert!(r.pairs.is_empty() && r.all_joined());
    }

    #[test]
    fn nested_overlap_joins() {
        // the outer ϱ copies the inner ρ into both components
        let m = parse_term("d [X & X] <fun x:X => z [X & X], fun y:Y => <z [X], w [X]>>").unwrap();
        let r = check_local_confluence(&env(), &m, RuleSet::atomization(), DEFAULT_MAX_JOIN).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert!(r.all_joined());
    }

    #[test]
    fn only_atomization_rules() {
        let m = parse_term("z [X]").unwrap();
        assert!(check_local_confluence(&env(), &m, RuleSet::of(&[RuleId::Delta]), 4).is_err());
    }
}
