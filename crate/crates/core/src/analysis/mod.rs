//! Normal forms, the termination weight, decomposition oracles, strict
//! simulation and the comparison diagrams between the two translations.

use thiserror::Error;

use crate::rewriting::{ReductionTrace, RuleId, StepError};
use crate::syntax::{Formula, Position};
use crate::translate::TranslateError;
use crate::typing::{Environment, SystemId, TypeError};

mod confluence;
mod decompose;
mod diagram;
mod nf;
mod simulate;
mod weight;

pub use confluence::{check_local_confluence, ConfluenceReport, PairReport, DEFAULT_MAX_JOIN};
pub use decompose::{decompose_delta, decompose_eps, expand_rho, expand_rho_via, RhoExpansion, RhoRoute};
pub use diagram::{build_diagram, Diagram, DiagramKind, Legs};
use nf::atomize_unchecked;
pub use nf::{atomic_nf, atomic_nf_capped, atomic_nf_with, check_nf_uniqueness, non_atomic_instantiations};
pub use simulate::{at_positions, rp_environment, rp_position, simulate_step};
pub use weight::{formula_size, weight, PreRedexWeight, WeightReport};

#[derive(Debug, Clone, Error)]
pub enum AnalysisError {
    #[error("not typable: {0}")]
    NotTypable(#[from] TypeError),
    #[error("no {rule} redex at {position}")]
    NotARedex { rule: RuleId, position: Position },
    #[error("no diagram for {rule}: it does not involve disjunction or absurdity")]
    RuleNotApplicable { rule: RuleId },
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("step limit of {limit} exceeded")]
    StepLimit { limit: usize, trace: Box<ReductionTrace> },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl AnalysisError {
    fn invariant(msg: impl Into<String>) -> AnalysisError {
        AnalysisError::Invariant(msg.into())
    }
}

/// Replays the steps of `sub`, a trace of the subterm at `prefix`, on the
/// whole term ending `trace`.
fn replay_under(
    trace: &mut ReductionTrace,
    sys: SystemId,
    env: &Environment,
    sub: &ReductionTrace,
    prefix: &Position,
    administrative: bool,
) -> Result<(), AnalysisError> {
    for s in &sub.steps {
        apply(trace, sys, env, s.rule, &prefix.join(&s.position.0), administrative)?;
    }
    Ok(())
}

fn apply(
    trace: &mut ReductionTrace,
    sys: SystemId,
    env: &Environment,
    rule: RuleId,
    pos: &Position,
    administrative: bool,
) -> Result<(), AnalysisError> {
    if administrative {
        trace.apply_administrative(sys, env, rule, pos)?;
    } else {
        trace.apply(sys, env, rule, pos)?;
    }
    Ok(())
}

/// Leaves of the tree the atomic case and abort constructors unfold along
/// `c`: one per atomic end of the `⊃`/`∧`/`∀` spine of `c`.
fn spine_leaves(c: &Formula) -> Vec<Position> {
    match c {
        Formula::Imp(_, b) | Formula::Forall(_, b) => spine_leaves(b)
            .into_iter()
            .map(|p| Position(prefixed(0, &p.0)))
            .collect(),
        Formula::And(a, b) => {
            let mut out: Vec<Position> = spine_leaves(a)
                .into_iter()
                .map(|p| Position(prefixed(0, &p.0)))
                .collect();
            out.extend(spine_leaves(b).into_iter().map(|p| Position(prefixed(1, &p.0))));
            out
        }
        _ => vec![Position::root()],
    }
}

fn prefixed(i: usize, rest: &[usize]) -> Vec<usize> {
    std::iter::once(i).chain(rest.iter().copied()).collect()
}

/// Positions of the copies of the `side` branch body inside an atomic case
/// analysis at `c`: below each leaf, under one eliminator per spine level.
fn case_branch_copies(c: &Formula, side: usize) -> Vec<Position> {
    spine_leaves(c)
        .into_iter()
        .map(|leaf| {
            let depth = leaf.len();
            let mut p = leaf.join(&[1, side, 0]);
            p.0.extend(std::iter::repeat_n(0, depth));
            p
        })
        .collect()
}

/// Both branch bodies' copies, left ones first.
fn case_branches(c: &Formula) -> Vec<Position> {
    let mut out = case_branch_copies(c, 0);
    out.extend(case_branch_copies(c, 1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term, Term};
    use crate::translate::mk_case_at;

    #[test]
    fn branch_copies_point_at_the_branches() {
        for c in [
            "X",
            "X -> Y",
            "X & (Y -> Z)",
            "forall Y. Y -> Y & X",
            "(X -> Y) -> forall Z. Z",
        ] {
            let c = parse_formula(c).unwrap();
            let t = mk_case_at(
                parse_term("m").unwrap(),
                "x",
                &Formula::var("A"),
                Term::var("p"),
                "y",
                &Formula::var("B"),
                Term::var("q"),
                &c,
            );
            for pos in case_branch_copies(&c, 0) {
                assert_eq!(t.subterm(&pos), Some(&Term::var("p")), "{c} at {pos}");
            }
            for pos in case_branch_copies(&c, 1) {
                assert_eq!(t.subterm(&pos), Some(&Term::var("q")), "{c} at {pos}");
            }
            for leaf in spine_leaves(&c) {
                assert_eq!(t.subterm(&leaf.join(&[0, 0])), Some(&Term::var("m")));
            }
        }
    }
}
