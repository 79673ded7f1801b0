//! Atomic normal forms: fine ϱρ-normal forms of typable F terms.

use super::{weight, AnalysisError};
use crate::rewriting::{normalize, NormalizeError, NormalizeOptions, ReductionTrace, RuleSet, Strategy};
use crate::syntax::{alpha_eq, as_encoded_or, is_encoded_bot, Position, Term};
use crate::typing::{type_table, typecheck, Environment, SystemId};

// Far beyond anything a typable desk-scale term needs; hitting it means the
// termination argument is broken.
const STEP_CAP: usize = 1_000_000;

/// The atomic normal form of `m` in `env`, leftmost-outermost.
pub fn atomic_nf(env: &Environment, m: &Term) -> Result<(Term, ReductionTrace), AnalysisError> {
    atomic_nf_with(env, m, Strategy::LeftmostOutermost)
}

/// Like [`atomic_nf`] under `strategy`. Every step is checked to strictly
/// decrease the weight.
pub fn atomic_nf_with(
    env: &Environment,
    m: &Term,
    strategy: Strategy,
) -> Result<(Term, ReductionTrace), AnalysisError> {
    atomic_nf_capped(env, m, strategy, STEP_CAP).map_err(|e| match e {
        AnalysisError::StepLimit { limit, .. } => {
            AnalysisError::invariant(format!("fine ϱρ-reduction did not stop within {limit} steps"))
        }
        e => e,
    })
}

/// Like [`atomic_nf_with`], giving up with [`AnalysisError::StepLimit`] after
/// `max_steps` steps.
pub fn atomic_nf_capped(
    env: &Environment,
    m: &Term,
    strategy: Strategy,
    max_steps: usize,
) -> Result<(Term, ReductionTrace), AnalysisError> {
    let trace = normalize_fine(env, m, strategy, max_steps)?;
    let mut before = weight(env, &trace.initial)?.total;
    for (i, s) in trace.steps.iter().enumerate() {
        let after = weight(env, &s.result)?.total;
        if after >= before {
            return Err(AnalysisError::invariant(format!(
                "weight did not decrease at step {i} ({} at {}): {before} -> {after}",
                s.rule, s.position
            )));
        }
        before = after;
    }
    Ok((trace.last().clone(), trace))
}

/// Fine ϱρ-normalization without the weight bookkeeping, for callers that
/// only need the trace.
pub(super) fn atomize_unchecked(
    env: &Environment,
    m: &Term,
    strategy: Strategy,
) -> Result<ReductionTrace, AnalysisError> {
    normalize_fine(env, m, strategy, STEP_CAP).map_err(|e| match e {
        AnalysisError::StepLimit { limit, .. } => {
            AnalysisError::invariant(format!("fine ϱρ-reduction did not stop within {limit} steps"))
        }
        e => e,
    })
}

fn normalize_fine(
    env: &Environment,
    m: &Term,
    strategy: Strategy,
    max_steps: usize,
) -> Result<ReductionTrace, AnalysisError> {
    typecheck(SystemId::F, env, m)?;
    let opts = NormalizeOptions {
        strategy,
        max_steps,
        require_fine: true,
    };
    normalize(SystemId::F, env, m, RuleSet::atomization(), opts).map_err(|e| match e {
        NormalizeError::StepLimitExceeded { limit, trace } => AnalysisError::StepLimit { limit, trace },
    })
}

/// Normalizes under every strategy and checks the results coincide.
pub fn check_nf_uniqueness(env: &Environment, m: &Term, strategies: &[Strategy]) -> Result<Term, AnalysisError> {
    let mut first: Option<(Strategy, Term)> = None;
    for &s in strategies {
        let (nf, _) = atomic_nf_with(env, m, s)?;
        match &first {
            None => first = Some((s, nf)),
            Some((s0, nf0)) if !alpha_eq(nf0, &nf) => {
                return Err(AnalysisError::invariant(format!(
                    "normal forms differ: {nf0} under {s0:?}, {nf} under {s:?}"
                )))
            }
            Some(_) => {}
        }
    }
    first
        .map(|(_, nf)| nf)
        .ok_or_else(|| AnalysisError::invariant("no strategy given"))
}

/// Instantiations `M C` with `C` non-atomic and `M` of type `A∨̇B` or `⊥̇`.
///
/// Empty on atomic normal forms of case analyses and aborts in encoded form;
/// an encoded disjunction applied to something other than a pair of
/// abstractions is no ϱ-redex and survives normalization.
pub fn non_atomic_instantiations(env: &Environment, m: &Term) -> Result<Vec<Position>, AnalysisError> {
    let types = type_table(SystemId::F, env, m)?;
    Ok(m.positions()
        .into_iter()
        .filter(|p| match m.subterm(p) {
            Some(Term::TyApp(_, c)) if !c.is_atomic() => types
                .get(&p.child(0))
                .is_some_and(|t| is_encoded_bot(t) || as_encoded_or(t).is_some()),
            _ => false,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::RuleId;
    use crate::syntax::{encode_bot, encode_or, parse_formula, parse_term};

    fn bot_env() -> Environment {
        Environment::from_bindings([("z".to_string(), encode_bot())]).unwrap()
    }

    #[test]
    fn abort_at_implication() {
        let (nf, trace) = atomic_nf(&bot_env(), &parse_term("z [X -> Y]").unwrap()).unwrap();
        assert!(alpha_eq(&nf, &parse_term("fun w:X => z [Y]").unwrap()));
        assert_eq!(trace.rules(), vec![RuleId::RhoAbort]);
    }

    #[test]
    fn normal_terms_stay_put() {
        let env = Environment::from_bindings([("x".to_string(), parse_formula("X").unwrap())]).unwrap();
        let (nf, trace) = atomic_nf(&env, &parse_term("x").unwrap()).unwrap();
        assert_eq!(nf, Term::var("x"));
        assert!(trace.is_empty());
    }

    #[test]
    fn strategies_agree() {
        let mut env = bot_env();
        env.declare(
            "d",
            encode_or(&parse_formula("X").unwrap(), &parse_formula("Y").unwrap()),
        )
        .unwrap();
        let t = parse_term(
            "d [(X -> X) & forall Z. Z] <fun x:X => z [(X -> X) & forall Z. Z], fun y:Y => z [(X -> X) & forall Z. Z]>",
        )
        .unwrap();
        let strategies = [
            Strategy::LeftmostOutermost,
            Strategy::LeftmostInnermost,
            Strategy::Random(1),
            Strategy::Random(2),
            Strategy::Random(3),
        ];
        let nf = check_nf_uniqueness(&env, &t, &strategies).unwrap();
        assert!(non_atomic_instantiations(&env, &nf).unwrap().is_empty());
    }

    #[test]
    fn unmatched_disjunction_survives() {
        let env = Environment::from_bindings([
            (
                "d".to_string(),
                encode_or(&parse_formula("X").unwrap(), &parse_formula("Y").unwrap()),
            ),
            ("q".to_string(), parse_formula("(X -> Y -> Y) & (Y -> Y -> Y)").unwrap()),
        ])
        .unwrap();
        let t = parse_term("d [Y -> Y] q").unwrap();
        let (nf, _) = atomic_nf(&env, &t).unwrap();
        assert_eq!(nf, t);
        assert_eq!(non_atomic_instantiations(&env, &nf).unwrap(), vec![Position(vec![0])]);
    }
}
