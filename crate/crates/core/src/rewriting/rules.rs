//! The rule catalogue: left-hand-side recognition and contraction of root
//! redexes for every rule of IPC, System F and System Fat.

use std::collections::BTreeSet;

use thiserror::Error;

use super::RuleId;
use crate::syntax::{alpha_eq, formula_alpha_eq, fresh_name, Branch, Formula, Side, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("term does not match the left-hand side of {rule}")]
    ShapeMismatch { rule: RuleId },
    #[error("{rule} does not apply to an atomic instantiation")]
    AtomicInstantiation { rule: RuleId },
}

/// The condition a redex must meet to be fine, if any.
#[derive(Debug, Clone, Copy)]
pub enum FinenessCondition<'a> {
    /// The main premiss must have type `left ∨̇ right`.
    Disjunction {
        premiss: &'a Term,
        left: &'a Formula,
        right: &'a Formula,
    },
    /// The main premiss must have type `⊥̇`.
    Absurdity { premiss: &'a Term },
}

/// `M C ⟨λx:A.P, λy:B.Q⟩`, the encoded case analysis.
struct EncodedCase<'a> {
    m: &'a Term,
    c: &'a Formula,
    x: &'a str,
    a: &'a Formula,
    p: &'a Term,
    y: &'a str,
    b: &'a Formula,
    q: &'a Term,
}

fn encoded_case(t: &Term) -> Option<EncodedCase<'_>> {
    let Term::App(f, arg) = t else { return None };
    let Term::TyApp(m, c) = f.as_ref() else { return None };
    let Term::Pair(l, r) = arg.as_ref() else { return None };
    let (Term::Lam(x, a, p), Term::Lam(y, b, q)) = (l.as_ref(), r.as_ref()) else {
        return None;
    };
    Some(EncodedCase { m, c, x, a, p, y, b, q })
}

impl<'a> EncodedCase<'a> {
    fn condition(&self) -> FinenessCondition<'a> {
        FinenessCondition::Disjunction {
            premiss: self.m,
            left: self.a,
            right: self.b,
        }
    }

    /// Rebuilds `M C' ⟨λx:A.f(P), λy:B.g(Q)⟩`, renaming `x`/`y` away from `avoid`.
    fn rebuild(&self, c: Formula, avoid: &BTreeSet<String>, f: impl Fn(Term) -> Term) -> Term {
        Term::app(
            Term::ty_app(self.m.clone(), c),
            Term::pair(
                lam_into(self.x, self.a, self.p, avoid, &f),
                lam_into(self.y, self.b, self.q, avoid, &f),
            ),
        )
    }

    fn free_vars(&self) -> BTreeSet<String> {
        let mut s = self.m.free_vars();
        s.extend(self.p.free_vars());
        s.extend(self.q.free_vars());
        s.insert(self.x.to_string());
        s.insert(self.y.to_string());
        s
    }

    fn free_type_vars(&self) -> BTreeSet<String> {
        let mut s = self.m.free_type_vars();
        s.extend(self.p.free_type_vars());
        s.extend(self.q.free_type_vars());
        s.extend(self.a.free_type_vars());
        s.extend(self.b.free_type_vars());
        s.extend(self.c.free_type_vars());
        s
    }
}

/// `λx:A.f(body)`, renaming `x` first if it is in `avoid`.
fn lam_into(x: &str, a: &Formula, body: &Term, avoid: &BTreeSet<String>, f: &impl Fn(Term) -> Term) -> Term {
    if avoid.contains(x) {
        let x2 = fresh_name(x, |n| avoid.contains(n) || body.occurs_free(n));
        Term::lam(x2.clone(), a.clone(), f(body.subst(x, &Term::var(x2))))
    } else {
        Term::lam(x, a.clone(), f(body.clone()))
    }
}

/// A case branch whose body is wrapped by `f`, renaming the bound variable
/// away from `avoid` when it would capture.
fn branch_into(br: &Branch, avoid: &BTreeSet<String>, f: impl Fn(Term) -> Term) -> Branch {
    if avoid.contains(&br.var) {
        let v = fresh_name(&br.var, |n| avoid.contains(n) || br.body.occurs_free(n));
        Branch::new(v.clone(), br.ty.clone(), f(br.body.subst(&br.var, &Term::var(v))))
    } else {
        Branch::new(br.var.clone(), br.ty.clone(), f((*br.body).clone()))
    }
}

fn branches_free_vars(left: &Branch, right: &Branch) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for br in [left, right] {
        s.extend(br.body.free_vars().into_iter().filter(|v| *v != br.var));
    }
    s
}

fn component(c1: &Formula, c2: &Formula, i: Side) -> Formula {
    if i == Side::Left {
        c1.clone()
    } else {
        c2.clone()
    }
}

fn eta_or_matches(t: &Term) -> Option<&Term> {
    let Term::Case {
        scrutinee,
        left,
        right,
        result,
    } = t
    else {
        return None;
    };
    let ok_branch = |br: &Branch, side: Side| {
        matches!(br.body.as_ref(), Term::Inj(i, v, a, b)
            if *i == side
            && matches!(v.as_ref(), Term::Var(z) if *z == br.var)
            && formula_alpha_eq(a, &left.ty)
            && formula_alpha_eq(b, &right.ty))
    };
    let or = Formula::or(left.ty.clone(), right.ty.clone());
    (ok_branch(left, Side::Left) && ok_branch(right, Side::Right) && formula_alpha_eq(result, &or)).then_some(scrutinee)
}

fn delta_matches(ec: &EncodedCase<'_>) -> bool {
    match (ec.c, ec.p, ec.q) {
        (Formula::Imp(c1, _), Term::Lam(_, a1, _), Term::Lam(_, a2, _)) => {
            formula_alpha_eq(a1, c1) && formula_alpha_eq(a2, c1)
        }
        (Formula::And(..), Term::Pair(..), Term::Pair(..)) => true,
        (Formula::Forall(..), Term::TyLam(..), Term::TyLam(..)) => true,
        _ => false,
    }
}

/// The encoded case analysis under an ε∨ redex, with the outer context.
fn eps_case_inner(t: &Term) -> Option<EncodedCase<'_>> {
    let inner = match t {
        Term::App(f, _) => f.as_ref(),
        Term::Proj(_, f) => f.as_ref(),
        Term::TyApp(f, _) => f.as_ref(),
        _ => return None,
    };
    let ec = encoded_case(inner)?;
    let ok = matches!(
        (t, ec.c),
        (Term::App(..), Formula::Imp(..)) | (Term::Proj(..), Formula::And(..)) | (Term::TyApp(..), Formula::Forall(..))
    );
    ok.then_some(ec)
}

/// `(M, C)` of the instantiation `M C` under an ε⊥ redex.
fn eps_abort_inner(t: &Term) -> Option<(&Term, &Formula)> {
    let inner = match t {
        Term::App(f, _) => f.as_ref(),
        Term::Proj(_, f) => f.as_ref(),
        Term::TyApp(f, _) => f.as_ref(),
        _ => return None,
    };
    let Term::TyApp(m, c) = inner else { return None };
    let ok = matches!(
        (t, c),
        (Term::App(..), Formula::Imp(..)) | (Term::Proj(..), Formula::And(..)) | (Term::TyApp(..), Formula::Forall(..))
    );
    ok.then_some((m.as_ref(), c))
}

/// Whether `t` matches the left-hand side of `rule` at the root.
pub fn matches(rule: RuleId, t: &Term) -> bool {
    use RuleId::*;
    match rule {
        BetaImp => matches!(t, Term::App(f, _) if matches!(f.as_ref(), Term::Lam(..))),
        BetaAnd => matches!(t, Term::Proj(_, p) if matches!(p.as_ref(), Term::Pair(..))),
        BetaOr => matches!(t, Term::Case { scrutinee, .. } if matches!(scrutinee.as_ref(), Term::Inj(..))),
        BetaAll => matches!(t, Term::TyApp(f, _) if matches!(f.as_ref(), Term::TyLam(..))),
        EtaImp => matches!(t, Term::Lam(x, _, body)
            if matches!(body.as_ref(), Term::App(m, v)
                if matches!(v.as_ref(), Term::Var(z) if z == x) && !m.occurs_free(x))),
        EtaAnd => matches!(t, Term::Pair(l, r)
            if matches!((l.as_ref(), r.as_ref()),
                (Term::Proj(Side::Left, m), Term::Proj(Side::Right, n)) if alpha_eq(m, n))),
        EtaOr => eta_or_matches(t).is_some(),
        EtaAll => matches!(t, Term::TyLam(x, body)
            if matches!(body.as_ref(), Term::TyApp(m, v)
                if matches!(v, Formula::Var(z) if z == x) && !m.type_var_occurs_free(x))),
        PiImp => matches!(t, Term::App(f, _)
            if matches!(f.as_ref(), Term::Case { result: Formula::Imp(..), .. })),
        PiAnd => matches!(t, Term::Proj(_, f)
            if matches!(f.as_ref(), Term::Case { result: Formula::And(..), .. })),
        PiOr => matches!(t, Term::Case { scrutinee, .. }
            if matches!(scrutinee.as_ref(), Term::Case { result: Formula::Or(..), .. })),
        PiBot => matches!(t, Term::Abort(f, _)
            if matches!(f.as_ref(), Term::Case { result: Formula::Bottom, .. })),
        VarpiImp => matches!(t, Term::App(f, _) if matches!(f.as_ref(), Term::Abort(_, Formula::Imp(..)))),
        VarpiAnd => matches!(t, Term::Proj(_, f) if matches!(f.as_ref(), Term::Abort(_, Formula::And(..)))),
        VarpiOr => matches!(t, Term::Case { scrutinee, .. }
            if matches!(scrutinee.as_ref(), Term::Abort(_, Formula::Or(..)))),
        VarpiBot => matches!(t, Term::Abort(f, _) if matches!(f.as_ref(), Term::Abort(_, Formula::Bottom))),
        RhoCase => encoded_case(t).is_some_and(|ec| !ec.c.is_atomic()),
        RhoAbort => matches!(t, Term::TyApp(_, c) if !c.is_atomic()),
        Delta => encoded_case(t).is_some_and(|ec| delta_matches(&ec)),
        EpsCase => eps_case_inner(t).is_some(),
        EpsAbort => eps_abort_inner(t).is_some(),
    }
}

/// The typing condition under which the root redex `t` of `rule` is fine.
///
/// `None` means the redex is unconditionally fine (every β and η rule, and
/// every IPC rule). The result is meaningless if `t` does not match `rule`.
pub fn fineness_condition(rule: RuleId, t: &Term) -> Option<FinenessCondition<'_>> {
    match rule {
        RuleId::RhoCase | RuleId::Delta => encoded_case(t).map(|ec| ec.condition()),
        RuleId::EpsCase => eps_case_inner(t).map(|ec| ec.condition()),
        RuleId::RhoAbort => match t {
            Term::TyApp(m, _) => Some(FinenessCondition::Absurdity { premiss: m }),
            _ => None,
        },
        RuleId::EpsAbort => eps_abort_inner(t).map(|(m, _)| FinenessCondition::Absurdity { premiss: m }),
        _ => None,
    }
}

/// Contracts the root redex `t` of `rule`.
pub fn apply_rule(rule: RuleId, t: &Term) -> Result<Term, RuleError> {
    use RuleId::*;
    let shape = RuleError::ShapeMismatch { rule };
    if !matches(rule, t) {
        let atomic = match rule {
            RhoCase => encoded_case(t).is_some(),
            RhoAbort => matches!(t, Term::TyApp(..)),
            _ => false,
        };
        return Err(if atomic {
            RuleError::AtomicInstantiation { rule }
        } else {
            shape
        });
    }
    let out = match (rule, t) {
        (BetaImp, Term::App(f, n)) => {
            let Term::Lam(x, _, body) = f.as_ref() else {
                return Err(shape);
            };
            body.subst(x, n)
        }
        (BetaAnd, Term::Proj(i, p)) => {
            let Term::Pair(a, b) = p.as_ref() else {
                return Err(shape);
            };
            if *i == Side::Left {
                (**a).clone()
            } else {
                (**b).clone()
            }
        }
        (
            BetaOr,
            Term::Case {
                scrutinee, left, right, ..
            },
        ) => {
            let Term::Inj(i, m, _, _) = scrutinee.as_ref() else {
                return Err(shape);
            };
            let br = if *i == Side::Left { left } else { right };
            br.body.subst(&br.var, m)
        }
        (BetaAll, Term::TyApp(f, b)) => {
            let Term::TyLam(x, body) = f.as_ref() else {
                return Err(shape);
            };
            body.subst_type(x, b)
        }
        (EtaImp, Term::Lam(_, _, body)) => {
            let Term::App(m, _) = body.as_ref() else {
                return Err(shape);
            };
            (**m).clone()
        }
        (EtaAnd, Term::Pair(l, _)) => {
            let Term::Proj(_, m) = l.as_ref() else {
                return Err(shape);
            };
            (**m).clone()
        }
        (EtaOr, _) => eta_or_matches(t).ok_or(shape)?.clone(),
        (EtaAll, Term::TyLam(_, body)) => {
            let Term::TyApp(m, _) = body.as_ref() else {
                return Err(shape);
            };
            (**m).clone()
        }
        (PiImp, Term::App(f, n)) => {
            let Term::Case {
                scrutinee,
                left,
                right,
                result: Formula::Imp(_, d),
            } = f.as_ref()
            else {
                return Err(shape);
            };
            let avoid = n.free_vars();
            let wrap = |b: Term| Term::app(b, (**n).clone());
            Term::case(
                (**scrutinee).clone(),
                branch_into(left, &avoid, wrap),
                branch_into(right, &avoid, wrap),
                (**d).clone(),
            )
        }
        (PiAnd, Term::Proj(i, f)) => {
            let Term::Case {
                scrutinee,
                left,
                right,
                result: Formula::And(c1, c2),
            } = f.as_ref()
            else {
                return Err(shape);
            };
            let wrap = |b: Term| Term::proj(*i, b);
            Term::case(
                (**scrutinee).clone(),
                branch_into(left, &BTreeSet::new(), wrap),
                branch_into(right, &BTreeSet::new(), wrap),
                component(c1, c2, *i),
            )
        }
        (
            PiOr,
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            },
        ) => {
            let Term::Case {
                scrutinee: inner,
                left: l2,
                right: r2,
                ..
            } = scrutinee.as_ref()
            else {
                return Err(shape);
            };
            let avoid = branches_free_vars(left, right);
            let wrap = |b: Term| Term::case(b, left.clone(), right.clone(), result.clone());
            Term::case(
                (**inner).clone(),
                branch_into(l2, &avoid, wrap),
                branch_into(r2, &avoid, wrap),
                result.clone(),
            )
        }
        (PiBot, Term::Abort(f, c)) => {
            let Term::Case {
                scrutinee, left, right, ..
            } = f.as_ref()
            else {
                return Err(shape);
            };
            let wrap = |b: Term| Term::abort(b, c.clone());
            Term::case(
                (**scrutinee).clone(),
                branch_into(left, &BTreeSet::new(), wrap),
                branch_into(right, &BTreeSet::new(), wrap),
                c.clone(),
            )
        }
        (VarpiImp, Term::App(f, _)) => {
            let Term::Abort(m, Formula::Imp(_, d)) = f.as_ref() else {
                return Err(shape);
            };
            Term::abort((**m).clone(), (**d).clone())
        }
        (VarpiAnd, Term::Proj(i, f)) => {
            let Term::Abort(m, Formula::And(c1, c2)) = f.as_ref() else {
                return Err(shape);
            };
            Term::abort((**m).clone(), component(c1, c2, *i))
        }
        (VarpiOr, Term::Case { scrutinee, result, .. }) => {
            let Term::Abort(m, _) = scrutinee.as_ref() else {
                return Err(shape);
            };
            Term::abort((**m).clone(), result.clone())
        }
        (VarpiBot, Term::Abort(f, c)) => {
            let Term::Abort(m, _) = f.as_ref() else {
                return Err(shape);
            };
            Term::abort((**m).clone(), c.clone())
        }
        (RhoCase, _) => rho_case(&encoded_case(t).ok_or(shape)?),
        (RhoAbort, Term::TyApp(m, c)) => rho_abort(m, c),
        (Delta, _) => delta(&encoded_case(t).ok_or(shape)?),
        (EpsCase, _) => {
            let ec = eps_case_inner(t).ok_or(shape)?;
            let none = BTreeSet::new();
            match (t, ec.c) {
                (Term::App(_, n), Formula::Imp(_, c2)) => {
                    let avoid = n.free_vars();
                    ec.rebuild((**c2).clone(), &avoid, |b| Term::app(b, (**n).clone()))
                }
                (Term::Proj(i, _), Formula::And(c1, c2)) => {
                    ec.rebuild(component(c1, c2, *i), &none, |b| Term::proj(*i, b))
                }
                (Term::TyApp(_, c2), Formula::Forall(y, c1)) => {
                    ec.rebuild(c1.subst(y, c2), &none, |b| Term::ty_app(b, c2.clone()))
                }
                _ => return Err(shape),
            }
        }
        (EpsAbort, _) => {
            let (m, c) = eps_abort_inner(t).ok_or(shape)?;
            let c = match (t, c) {
                (Term::App(..), Formula::Imp(_, c2)) => (**c2).clone(),
                (Term::Proj(i, _), Formula::And(c1, c2)) => component(c1, c2, *i),
                (Term::TyApp(_, c2), Formula::Forall(y, c1)) => c1.subst(y, c2),
                _ => return Err(shape),
            };
            Term::ty_app(m.clone(), c)
        }
        _ => return Err(shape),
    };
    Ok(out)
}

fn rho_case(ec: &EncodedCase<'_>) -> Term {
    let none = BTreeSet::new();
    match ec.c {
        Formula::Imp(c1, c2) => {
            let fv = ec.free_vars();
            let z = fresh_name("z", |n| fv.contains(n));
            let zv = Term::var(z.clone());
            Term::lam(
                z,
                (**c1).clone(),
                ec.rebuild((**c2).clone(), &none, |b| Term::app(b, zv.clone())),
            )
        }
        Formula::And(c1, c2) => Term::pair(
            ec.rebuild((**c1).clone(), &none, |b| Term::proj(Side::Left, b)),
            ec.rebuild((**c2).clone(), &none, |b| Term::proj(Side::Right, b)),
        ),
        Formula::Forall(y, d) => {
            let ftv = ec.free_type_vars();
            let y2 = fresh_name(y, |n| ftv.contains(n));
            let yv = Formula::var(y2.clone());
            let d2 = d.subst(y, &yv);
            Term::ty_lam(y2, ec.rebuild(d2, &none, |b| Term::ty_app(b, yv.clone())))
        }
        Formula::Var(_) | Formula::Bottom | Formula::Or(..) => unreachable!("checked by matches"),
    }
}

fn rho_abort(m: &Term, c: &Formula) -> Term {
    match c {
        Formula::Imp(c1, c2) => {
            let w = fresh_name("w", |n| m.occurs_free(n));
            Term::lam(w, (**c1).clone(), Term::ty_app(m.clone(), (**c2).clone()))
        }
        Formula::And(c1, c2) => Term::pair(
            Term::ty_app(m.clone(), (**c1).clone()),
            Term::ty_app(m.clone(), (**c2).clone()),
        ),
        Formula::Forall(y, d) => {
            let y2 = fresh_name(y, |n| m.type_var_occurs_free(n) || c.occurs_free(n));
            let d2 = d.subst(y, &Formula::var(y2.clone()));
            Term::ty_lam(y2, Term::ty_app(m.clone(), d2))
        }
        Formula::Var(_) | Formula::Bottom | Formula::Or(..) => unreachable!("checked by matches"),
    }
}

fn delta(ec: &EncodedCase<'_>) -> Term {
    let case = |c: Formula, p: Term, q: Term| {
        Term::app(
            Term::ty_app(ec.m.clone(), c),
            Term::pair(Term::lam(ec.x, ec.a.clone(), p), Term::lam(ec.y, ec.b.clone(), q)),
        )
    };
    match (ec.c, ec.p, ec.q) {
        (Formula::Imp(c1, c2), Term::Lam(z1, _, p), Term::Lam(z2, _, q)) => {
            let mut avoid = ec.m.free_vars();
            avoid.extend(ec.p.free_vars());
            avoid.extend(ec.q.free_vars());
            avoid.insert(ec.x.to_string());
            avoid.insert(ec.y.to_string());
            let w = fresh_name(z1, |n| avoid.contains(n));
            let wv = Term::var(w.clone());
            Term::lam(
                w,
                (**c1).clone(),
                case((**c2).clone(), p.subst(z1, &wv), q.subst(z2, &wv)),
            )
        }
        (Formula::And(c1, c2), Term::Pair(p1, p2), Term::Pair(q1, q2)) => Term::pair(
            case((**c1).clone(), (**p1).clone(), (**q1).clone()),
            case((**c2).clone(), (**p2).clone(), (**q2).clone()),
        ),
        (Formula::Forall(y, d), Term::TyLam(y1, p), Term::TyLam(y2, q)) => {
            let mut avoid = ec.m.free_type_vars();
            avoid.extend(ec.a.free_type_vars());
            avoid.extend(ec.b.free_type_vars());
            avoid.extend(ec.p.free_type_vars());
            avoid.extend(ec.q.free_type_vars());
            avoid.extend(ec.c.free_type_vars());
            let w = fresh_name(y, |n| avoid.contains(n));
            let wv = Formula::var(w.clone());
            Term::ty_lam(w, case(d.subst(y, &wv), p.subst_type(y1, &wv), q.subst_type(y2, &wv)))
        }
        _ => unreachable!("checked by matches"),
    }
}
