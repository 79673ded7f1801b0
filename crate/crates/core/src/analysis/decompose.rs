//! δ and the commuting conversions expressed through atomization and β, and
//! atomization recovered from δ or the commuting conversions after an
//! η-expansion.

use super::AnalysisError;
use crate::rewriting::{redex_at, step, Redex, ReductionTrace, RuleId, StepError};
use crate::syntax::{alpha_eq, fresh_name, Formula, Position, Side, Term};
use crate::typing::{Environment, SystemId};

const F: SystemId = SystemId::F;

fn located<'a>(
    env: &Environment,
    m: &'a Term,
    r: &Redex,
    allowed: &[RuleId],
) -> Result<(&'a Term, Redex), AnalysisError> {
    let not_a_redex = || AnalysisError::NotARedex {
        rule: r.rule,
        position: r.position.clone(),
    };
    if !allowed.contains(&r.rule) {
        return Err(not_a_redex());
    }
    let fresh = redex_at(F, env, m, r.rule, &r.position).map_err(|e| match e {
        StepError::StaleRedex { .. } => not_a_redex(),
        e => e.into(),
    })?;
    if !fresh.fine {
        return Err(StepError::NotFine {
            rule: r.rule,
            position: r.position.clone(),
        }
        .into());
    }
    Ok((m.subterm(&r.position).ok_or_else(not_a_redex)?, fresh))
}

/// The instantiation formula of an encoded case `M C Q` or abort `M C`.
fn instantiation(t: &Term) -> Option<&Formula> {
    match t {
        Term::App(f, _) => match f.as_ref() {
            Term::TyApp(_, c) => Some(c),
            _ => None,
        },
        Term::TyApp(_, c) => Some(c),
        _ => None,
    }
}

fn ends_at(trace: &ReductionTrace, target: &Term, what: &str) -> Result<(), AnalysisError> {
    if alpha_eq(trace.last(), target) {
        Ok(())
    } else {
        Err(AnalysisError::invariant(format!(
            "{what} ends at {} instead of {target}",
            trace.last()
        )))
    }
}

/// `M →_δ N` as one ϱ-step followed by the β-steps that remove the
/// introductions pulled down from the branches: two for `⊃` and `∀`, four
/// for `∧`.
pub fn decompose_delta(env: &Environment, m: &Term, r: &Redex) -> Result<ReductionTrace, AnalysisError> {
    let (sub, r) = located(env, m, r, &[RuleId::Delta])?;
    let p = &r.position;
    let c = instantiation(sub).expect("δ-redexes are encoded cases").clone();
    let mut trace = ReductionTrace::new(m.clone());
    trace.apply(F, env, RuleId::RhoCase, p)?;
    match c {
        Formula::Imp(..) | Formula::Forall(..) => {
            let beta = if matches!(c, Formula::Imp(..)) {
                RuleId::BetaImp
            } else {
                RuleId::BetaAll
            };
            for side in [0, 1] {
                trace.apply(F, env, beta, &p.join(&[0, 1, side, 0]))?;
            }
        }
        Formula::And(..) => {
            for i in [0, 1] {
                for side in [0, 1] {
                    trace.apply(F, env, RuleId::BetaAnd, &p.join(&[i, 1, side, 0]))?;
                }
            }
        }
        _ => unreachable!("δ instantiates at a compound formula"),
    }
    ends_at(&trace, &step(F, m, &r, true)?, "δ decomposition")?;
    Ok(trace)
}

/// `M →_ε N` as the atomization of the inner case or abort followed by one
/// β-step at the redex.
pub fn decompose_eps(env: &Environment, m: &Term, r: &Redex) -> Result<ReductionTrace, AnalysisError> {
    let (sub, r) = located(env, m, r, &[RuleId::EpsCase, RuleId::EpsAbort])?;
    let p = &r.position;
    let inner = if r.rule == RuleId::EpsCase {
        RuleId::RhoCase
    } else {
        RuleId::RhoAbort
    };
    let beta = match sub {
        Term::App(..) => RuleId::BetaImp,
        Term::Proj(..) => RuleId::BetaAnd,
        Term::TyApp(..) => RuleId::BetaAll,
        _ => unreachable!("ε-redexes are eliminations"),
    };
    let mut trace = ReductionTrace::new(m.clone());
    trace.apply(F, env, inner, &p.child(0))?;
    trace.apply(F, env, beta, p)?;
    ends_at(&trace, &step(F, m, &r, true)?, "ε decomposition")?;
    Ok(trace)
}

/// How an atomization step is recovered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoRoute {
    /// η-expand the branches of a ϱ-redex, then one δ-step.
    Delta,
    /// η-expand the whole redex, then one ε-step per component.
    Commuting,
}

#[derive(Clone, Debug)]
pub struct RhoExpansion {
    /// `m` with the redex η-expanded.
    pub expansion: Term,
    /// `expansion →η* m`.
    pub eta_back: ReductionTrace,
    /// `expansion →δ/ε* contractum`.
    pub trace: ReductionTrace,
}

/// The η-expansion of `t : C` for a compound `C`, avoiding `avoid`, with the
/// positions (relative to the expansion) of the eliminations it introduces.
fn eta_expand(t: &Term, c: &Formula, avoid: &dyn Fn(&str) -> bool) -> (Term, RuleId, Vec<Position>) {
    match c {
        Formula::Imp(a, _) => {
            let z = fresh_name("z", |n| avoid(n) || t.occurs_free(n));
            let body = Term::app(t.clone(), Term::var(z.clone()));
            (
                Term::lam(z, (**a).clone(), body),
                RuleId::EtaImp,
                vec![Position(vec![0])],
            )
        }
        Formula::And(..) => (
            Term::pair(Term::proj(Side::Left, t.clone()), Term::proj(Side::Right, t.clone())),
            RuleId::EtaAnd,
            vec![Position(vec![0]), Position(vec![1])],
        ),
        Formula::Forall(y, _) => {
            let y = fresh_name(y, |n| t.type_var_occurs_free(n));
            let body = Term::ty_app(t.clone(), Formula::var(y.clone()));
            (Term::ty_lam(y, body), RuleId::EtaAll, vec![Position(vec![0])])
        }
        _ => unreachable!("atomization instantiates at a compound formula"),
    }
}

/// [`expand_rho_via`] with δ for ϱ and ε⊥ for ρ.
pub fn expand_rho(env: &Environment, m: &Term, r: &Redex) -> Result<RhoExpansion, AnalysisError> {
    let route = if r.rule == RuleId::RhoCase {
        RhoRoute::Delta
    } else {
        RhoRoute::Commuting
    };
    expand_rho_via(env, m, r, route)
}

/// Witnesses `m = contractum` for a fine ϱ/ρ redex `r` as an η-expansion
/// followed by δ or ε steps.
pub fn expand_rho_via(env: &Environment, m: &Term, r: &Redex, route: RhoRoute) -> Result<RhoExpansion, AnalysisError> {
    let (sub, r) = located(env, m, r, &[RuleId::RhoCase, RuleId::RhoAbort])?;
    let p = &r.position;
    let c = instantiation(sub).expect("atomization redexes instantiate").clone();
    let contractum = step(F, m, &r, true)?;
    let (expanded, eta, forward, back): (Term, RuleId, Vec<(RuleId, Position)>, Vec<Position>) = match route {
        RhoRoute::Commuting => {
            let eps = if r.rule == RuleId::RhoCase {
                RuleId::EpsCase
            } else {
                RuleId::EpsAbort
            };
            let (e, eta, elims) = eta_expand(sub, &c, &|_| false);
            let forward = elims.into_iter().map(|q| (eps, p.join(&q.0))).collect();
            (e, eta, forward, vec![p.clone()])
        }
        RhoRoute::Delta => {
            let Term::App(head, branches) = sub else {
                return Err(AnalysisError::RuleNotApplicable { rule: r.rule });
            };
            let Term::Pair(l, rt) = branches.as_ref() else {
                unreachable!("ϱ-redexes carry a pair")
            };
            let expanded_branch = |b: &Term| -> (Term, RuleId) {
                let Term::Lam(x, a, body) = b else {
                    unreachable!("ϱ-redexes carry abstractions")
                };
                let (e, eta, _) = eta_expand(body, &c, &|n| n == x);
                (Term::lam(x.clone(), a.clone(), e), eta)
            };
            let (l, eta) = expanded_branch(l);
            let (rt, _) = expanded_branch(rt);
            let e = Term::app((**head).clone(), Term::pair(l, rt));
            (
                e,
                eta,
                vec![(RuleId::Delta, p.clone())],
                vec![p.join(&[1, 0, 0]), p.join(&[1, 1, 0])],
            )
        }
    };
    let expansion = m.replace_at(p, expanded).expect("the redex position exists");
    let mut eta_back = ReductionTrace::new(expansion.clone());
    for q in &back {
        eta_back.apply(F, env, eta, q)?;
    }
    ends_at(&eta_back, m, "η-reduction of the expansion")?;
    let mut trace = ReductionTrace::new(expansion.clone());
    for (rule, q) in &forward {
        trace.apply(F, env, *rule, q)?;
    }
    ends_at(&trace, &contractum, "expansion")?;
    Ok(RhoExpansion {
        expansion,
        eta_back,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::find_redexes;
    use crate::rewriting::RuleSet;
    use crate::syntax::{encode_bot, encode_or, parse_formula, parse_term};

    fn env() -> Environment {
        let f = |s: &str| parse_formula(s).unwrap();
        Environment::from_bindings([
            ("z".to_string(), encode_bot()),
            ("d".to_string(), encode_or(&f("X"), &f("Y"))),
            ("e".to_string(), encode_or(&f("X"), &f("Y"))),
            ("u".to_string(), f("U")),
        ])
        .unwrap()
    }

    fn only(m: &Term, rule: RuleId) -> Redex {
        let rs = find_redexes(F, &env(), m, RuleSet::of(&[rule]));
        assert_eq!(rs.len(), 1, "{m}");
        rs.into_iter().next().unwrap()
    }

    #[test]
    fn delta_implication() {
        let m = parse_term("d [U -> X] <fun x:X => fun a:U => x, fun y:Y => fun b:U => z [X]>").unwrap();
        let t = decompose_delta(&env(), &m, &only(&m, RuleId::Delta)).unwrap();
        assert_eq!(t.rules(), vec![RuleId::RhoCase, RuleId::BetaImp, RuleId::BetaImp]);
        assert!(alpha_eq(
            t.last(),
            &parse_term("fun a:U => d [X] <fun x:X => x, fun y:Y => z [X]>").unwrap()
        ));
    }

    #[test]
    fn delta_forall_and_conjunction() {
        let m = parse_term("d [forall W. W -> W] <fun x:X => tfun V => fun v:V => v, fun y:Y => tfun V => z [V -> V]>")
            .unwrap();
        let t = decompose_delta(&env(), &m, &only(&m, RuleId::Delta)).unwrap();
        assert_eq!(t.rules(), vec![RuleId::RhoCase, RuleId::BetaAll, RuleId::BetaAll]);
        let m = parse_term("d [X & U] <fun x:X => <x, u>, fun y:Y => <z [X], u>>").unwrap();
        let t = decompose_delta(&env(), &m, &only(&m, RuleId::Delta)).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.rules()[1..], [RuleId::BetaAnd; 4]);
    }

    #[test]
    fn eps_case_forall() {
        let m =
            parse_term("d [forall V. V -> V] <fun x:X => tfun V => z [V -> V], fun y:Y => tfun V => fun v:V => v> [U]")
                .unwrap();
        let t = decompose_eps(&env(), &m, &only(&m, RuleId::EpsCase)).unwrap();
        assert_eq!(t.rules(), vec![RuleId::RhoCase, RuleId::BetaAll]);
    }

    #[test]
    fn eps_abort_implication() {
        let m = parse_term("z [U -> X] u").unwrap();
        let t = decompose_eps(&env(), &m, &only(&m, RuleId::EpsAbort)).unwrap();
        assert_eq!(t.rules(), vec![RuleId::RhoAbort, RuleId::BetaImp]);
        assert!(alpha_eq(t.last(), &parse_term("z [X]").unwrap()));
    }

    #[test]
    fn rho_abort_conjunction_by_commuting() {
        let m = parse_term("z [X & Y]").unwrap();
        let e = expand_rho(&env(), &m, &only(&m, RuleId::RhoAbort)).unwrap();
        assert_eq!(e.expansion, parse_term("<(z [X & Y]).1, (z [X & Y]).2>").unwrap());
        assert_eq!(e.trace.rules(), vec![RuleId::EpsAbort, RuleId::EpsAbort]);
        assert!(alpha_eq(e.trace.last(), &parse_term("<z [X], z [Y]>").unwrap()));
        assert_eq!(e.eta_back.rules(), vec![RuleId::EtaAnd]);
    }

    #[test]
    fn rho_case_conjunction_by_delta() {
        let m = parse_term("d [U & U] <fun x:X => <u, u>, fun y:Y => z [U & U]>").unwrap();
        let r = only(&m, RuleId::RhoCase);
        let e = expand_rho(&env(), &m, &r).unwrap();
        assert_eq!(e.trace.rules(), vec![RuleId::Delta]);
        assert_eq!(e.eta_back.rules(), vec![RuleId::EtaAnd, RuleId::EtaAnd]);
        let e = expand_rho_via(&env(), &m, &r, RhoRoute::Commuting).unwrap();
        assert_eq!(e.trace.rules(), vec![RuleId::EpsCase, RuleId::EpsCase]);
    }

    #[test]
    fn rho_under_binders_avoids_capture() {
        // the branch variable is named like the η-binder would be
        let m = parse_term("d [U -> X] <fun z:X => e [U -> X] <fun a:X => fun b:U => z, fun b:Y => fun c:U => z>, fun y:Y => fun b:U => z [X]>").unwrap();
        for r in find_redexes(F, &env(), &m, RuleSet::atomization())
            .into_iter()
            .filter(|r| r.fine)
        {
            for route in [RhoRoute::Delta, RhoRoute::Commuting] {
                expand_rho_via(&env(), &m, &r, route).unwrap();
            }
        }
    }

    #[test]
    fn wrong_rule_is_not_a_redex() {
        let m = parse_term("z [X & Y]").unwrap();
        let mut r = only(&m, RuleId::RhoAbort);
        r.rule = RuleId::Delta;
        assert!(matches!(
            decompose_eps(&env(), &m, &r),
            Err(AnalysisError::NotARedex { .. })
        ));
        assert!(matches!(
            decompose_delta(&env(), &m, &r),
            Err(AnalysisError::NotARedex { .. })
        ));
    }
}
