//! Strict simulation: each IPC step becomes a non-empty fine reduction
//! sequence between Russell–Prawitz images.

use super::{case_branch_copies, spine_leaves, AnalysisError};
use crate::rewriting::{redex_at, step, Redex, ReductionTrace, RuleId, StepError};
use crate::syntax::{alpha_eq, Position, Term};
use crate::translate::{rp_formula, rp_term};
use crate::typing::{typecheck, Environment, SystemId};

/// `⌜Γ⌝`.
pub fn rp_environment(env: &Environment) -> Result<Environment, AnalysisError> {
    for (_, a) in env.iter() {
        rp_formula(a)?;
    }
    Ok(env.map_types(|a| rp_formula(a).expect("checked above")))
}

/// Where the subterm of IPC term `m` at `pos` sits in `⌜m⌝`.
pub fn rp_position(m: &Term, pos: &Position) -> Option<Position> {
    let mut out = Vec::new();
    let mut t = m;
    for &i in &pos.0 {
        match (t, i) {
            (Term::Inj(..), 0) => out.extend([0, 0, 1]),
            (Term::Case { .. }, 0) => out.extend([0, 0]),
            (Term::Case { .. }, 1) => out.extend([1, 0, 0]),
            (Term::Case { .. }, 2) => out.extend([1, 1, 0]),
            _ => out.push(i),
        }
        t = *t.children().get(i)?;
    }
    Some(Position(out))
}

/// Every position of `⟦m⟧` holding a copy of the translation of the
/// subterm of `m` at `pos`; the atomic case and abort duplicate their
/// premisses once per atomic end of the instantiation.
pub fn at_positions(m: &Term, pos: &Position) -> Result<Vec<Position>, AnalysisError> {
    let bad = || AnalysisError::invariant(format!("{pos} is not a position of {m}"));
    let mut outs = vec![Position::root()];
    let mut t = m;
    for &i in &pos.0 {
        let rel: Vec<Position> = match (t, i) {
            (Term::Inj(..), 0) => vec![Position(vec![0, 0, 1])],
            (Term::Case { result, .. }, 0) => spine_leaves(&rp_formula(result)?)
                .into_iter()
                .map(|l| l.join(&[0, 0]))
                .collect(),
            (Term::Case { result, .. }, 1 | 2) => case_branch_copies(&rp_formula(result)?, i - 1),
            (Term::Abort(_, a), 0) => spine_leaves(&rp_formula(a)?).into_iter().map(|l| l.child(0)).collect(),
            _ => vec![Position(vec![i])],
        };
        outs = outs
            .iter()
            .flat_map(|o| rel.iter().map(move |r| o.join(&r.0)))
            .collect();
        t = *t.children().get(i).ok_or_else(bad)?;
    }
    Ok(outs)
}

/// The F-side steps simulating one root IPC step, relative to the redex.
fn simulation_plan(rule: RuleId) -> Vec<(RuleId, &'static [usize])> {
    use RuleId::*;
    match rule {
        BetaImp | BetaAnd | EtaImp | EtaAnd => vec![(rule, &[])],
        BetaOr => vec![(BetaAll, &[0]), (BetaImp, &[]), (BetaAnd, &[0]), (BetaImp, &[])],
        EtaOr => vec![
            (Delta, &[]),
            (Delta, &[0]),
            (EtaImp, &[0, 0, 1, 0]),
            (EtaImp, &[0, 0, 1, 1]),
            (EtaAnd, &[0, 0, 1]),
            (EtaImp, &[0]),
            (EtaAll, &[]),
        ],
        PiImp | PiAnd | PiBot => vec![(EpsCase, &[])],
        PiOr => vec![(EpsCase, &[0]), (EpsCase, &[])],
        VarpiImp | VarpiAnd | VarpiBot => vec![(EpsAbort, &[])],
        VarpiOr => vec![(EpsAbort, &[0]), (EpsAbort, &[])],
        BetaAll | EtaAll | RhoCase | RhoAbort | Delta | EpsCase | EpsAbort => Vec::new(),
    }
}

/// Checks `r` is a redex of the typable IPC term `m`; returns the contractum.
pub(super) fn ipc_step(env: &Environment, m: &Term, r: &Redex) -> Result<(Redex, Term), AnalysisError> {
    typecheck(SystemId::Ipc, env, m)?;
    let r = redex_at(SystemId::Ipc, env, m, r.rule, &r.position).map_err(|e| match e {
        StepError::StaleRedex { rule, position } => AnalysisError::NotARedex { rule, position },
        StepError::WrongSystem { rule, .. } => AnalysisError::NotARedex {
            rule,
            position: r.position.clone(),
        },
        e => e.into(),
    })?;
    let n = step(SystemId::Ipc, m, &r, true)?;
    Ok((r, n))
}

/// A fine trace `⌜m⌝ →⁺ ⌜n⌝` in `⌜env⌝`, where `m → n` contracts `r`.
pub fn simulate_step(env: &Environment, m: &Term, r: &Redex) -> Result<ReductionTrace, AnalysisError> {
    let (r, n) = ipc_step(env, m, r)?;
    let renv = rp_environment(env)?;
    let q = rp_position(m, &r.position).expect("redex positions exist");
    let mut trace = ReductionTrace::new(rp_term(m)?);
    for (rule, rel) in simulation_plan(r.rule) {
        trace.apply(SystemId::F, &renv, rule, &q.join(rel))?;
    }
    let target = rp_term(&n)?;
    if trace.is_empty() || !alpha_eq(trace.last(), &target) {
        return Err(AnalysisError::invariant(format!(
            "simulation of {} ends at {} instead of {target}",
            r.rule,
            trace.last()
        )));
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::{find_redexes, RuleSet};
    use crate::syntax::{parse_formula, parse_term};
    use crate::translate::at_term;

    fn env() -> Environment {
        let f = |s: &str| parse_formula(s).unwrap();
        Environment::from_bindings([
            ("b".to_string(), f("bot")),
            ("d".to_string(), f("X | Y")),
            ("x0".to_string(), f("X")),
            ("y0".to_string(), f("Y")),
            ("g".to_string(), f("X -> Y")),
        ])
        .unwrap()
    }

    fn simulate_root(src: &str, rule: RuleId) -> ReductionTrace {
        let m = parse_term(src).unwrap();
        let r = find_redexes(SystemId::Ipc, &env(), &m, RuleSet::of(&[rule]))
            .into_iter()
            .find(|r| r.position.is_empty())
            .unwrap_or_else(|| panic!("no root {rule} redex in {src}"));
        let t = simulate_step(&env(), &m, &r).unwrap();
        t.replay(SystemId::F, &rp_environment(&env()).unwrap()).unwrap();
        assert!(t.steps.iter().all(|s| s.fine));
        t
    }

    #[test]
    fn beta_or_takes_four_beta_steps() {
        let t = simulate_root("case in1[X|Y] x0 of { x:X => g x ; y:Y => y } : Y", RuleId::BetaOr);
        use RuleId::*;
        assert_eq!(t.rules(), vec![BetaAll, BetaImp, BetaAnd, BetaImp]);
        assert!(alpha_eq(t.last(), &parse_term("g x0").unwrap()));
    }

    #[test]
    fn eta_or_takes_seven_steps() {
        let t = simulate_root(
            "case d of { x:X => in1[X|Y] x ; y:Y => in2[X|Y] y } : X | Y",
            RuleId::EtaOr,
        );
        use RuleId::*;
        assert_eq!(t.rules(), vec![Delta, Delta, EtaImp, EtaImp, EtaAnd, EtaImp, EtaAll]);
        assert_eq!(t.last(), &Term::var("d"));
    }

    #[test]
    fn permutations() {
        let t = simulate_root(
            "(case d of { x:X => g ; y:Y => fun u:X => y } : X -> Y) x0",
            RuleId::PiImp,
        );
        assert_eq!(t.rules(), vec![RuleId::EpsCase]);
        let t = simulate_root(
            "case (case d of { x:X => in2[Y|X] x ; y:Y => in1[Y|X] y } : Y | X) of { u:Y => u ; v:X => g v } : Y",
            RuleId::PiOr,
        );
        assert_eq!(t.rules(), vec![RuleId::EpsCase; 2]);
        let t = simulate_root("abort[X & Y] (case d of { x:X => b ; y:Y => b } : bot)", RuleId::PiBot);
        assert_eq!(t.rules(), vec![RuleId::EpsCase]);
    }

    #[test]
    fn absurdity_permutations() {
        let t = simulate_root("abort[X] (abort[bot] b)", RuleId::VarpiBot);
        assert_eq!(t.rules(), vec![RuleId::EpsAbort]);
        assert!(alpha_eq(t.last(), &parse_term("b [X]").unwrap()));
        let t = simulate_root("case abort[X|Y] b of { x:X => x ; y:Y => x0 } : X", RuleId::VarpiOr);
        assert_eq!(t.rules(), vec![RuleId::EpsAbort; 2]);
        let t = simulate_root("(abort[X & Y] b).2", RuleId::VarpiAnd);
        assert_eq!(t.rules(), vec![RuleId::EpsAbort]);
    }

    #[test]
    fn nested_redexes_shift() {
        let m = parse_term("fun u:X => <case in2[X|Y] y0 of { x:X => g x ; y:Y => y } : Y, u>").unwrap();
        let rs = find_redexes(SystemId::Ipc, &env(), &m, RuleSet::of(&[RuleId::BetaOr]));
        let t = simulate_step(&env(), &m, &rs[0]).unwrap();
        assert_eq!(t.steps[0].position, Position(vec![0, 0, 0]));
        assert_eq!(t.steps[0].local_env.len(), env().len() + 1);
    }

    #[test]
    fn positions_in_translations() {
        let m = parse_term(
            "fun u:X => case d of { x:X => <abort[X -> Y & Y] b, in1[X|Y] x> ; y:Y => <fun v:X => <y, y>, in2[X|Y] y> } : (X -> Y & Y) & (X | Y)",
        )
        .unwrap();
        let rp = rp_term(&m).unwrap();
        let at = at_term(&m).unwrap();
        for pos in m.positions() {
            let sub = m.subterm(&pos).unwrap();
            let q = rp_position(&m, &pos).unwrap();
            assert_eq!(rp.subterm(&q), Some(&rp_term(sub).unwrap()), "rp at {pos}");
            let copies = at_positions(&m, &pos).unwrap();
            assert!(!copies.is_empty());
            for c in copies {
                assert!(
                    alpha_eq(at.subterm(&c).unwrap(), &at_term(sub).unwrap()),
                    "at {pos} -> {c}"
                );
            }
        }
        // the scrutinee is copied once per atomic end of the result type
        assert_eq!(at_positions(&m, &Position(vec![0, 0])).unwrap().len(), 3);
    }
}
