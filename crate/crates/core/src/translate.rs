//! The Russell–Prawitz translation of IPC into System F and the atomic
//! translation into System Fat.
//!
//! Both are homomorphic on variables, implication and conjunction and differ
//! only in how case analysis and absurdity are rendered, so they share one
//! traversal parameterized by those two constructors.

use thiserror::Error;

use crate::syntax::{encode_bot, encode_or, fresh_name, Formula, FormulaKind, Side, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("`{0}` is not an IPC formula")]
    NotIpcFormula(Formula),
    #[error("`{0}` is not an IPC term")]
    NotIpcTerm(Box<Term>),
}

/// `⌜A⌝`: disjunction and absurdity replaced by their second-order encodings.
pub fn rp_formula(a: &Formula) -> Result<Formula, TranslateError> {
    match a.kind() {
        FormulaKind::Shared | FormulaKind::Ipc => Ok(rp_formula_unchecked(a)),
        _ => Err(TranslateError::NotIpcFormula(a.clone())),
    }
}

fn rp_formula_unchecked(a: &Formula) -> Formula {
    match a {
        Formula::Var(_) => a.clone(),
        Formula::Bottom => encode_bot(),
        Formula::Imp(p, q) => Formula::imp(rp_formula_unchecked(p), rp_formula_unchecked(q)),
        Formula::And(p, q) => Formula::and(rp_formula_unchecked(p), rp_formula_unchecked(q)),
        Formula::Or(p, q) => encode_or(&rp_formula_unchecked(p), &rp_formula_unchecked(q)),
        Formula::Forall(..) => unreachable!("rejected by rp_formula"),
    }
}

/// `IN_i(M,A,B) := ΛX.λw:(A⊃X)∧(B⊃X).(w.i) M` with `X` fresh for `M`, `A`, `B`.
pub fn mk_in(i: Side, m: Term, a: &Formula, b: &Formula) -> Term {
    let x = fresh_name("X", |n| {
        m.type_var_occurs_free(n) || a.occurs_free(n) || b.occurs_free(n)
    });
    let w = fresh_name("w", |n| m.occurs_free(n));
    let xv = Formula::var(x.clone());
    let hyp = Formula::and(Formula::imp(a.clone(), xv.clone()), Formula::imp(b.clone(), xv));
    Term::ty_lam(x, Term::lam(w.clone(), hyp, Term::app(Term::proj(i, Term::var(w)), m)))
}

/// `CASE(M, x.P, y.Q, C) := M C ⟨λx:A.P, λy:B.Q⟩`.
#[allow(clippy::too_many_arguments)]
pub fn mk_case(m: Term, x: &str, a: &Formula, p: Term, y: &str, b: &Formula, q: Term, c: &Formula) -> Term {
    Term::app(
        Term::ty_app(m, c.clone()),
        Term::pair(Term::lam(x, a.clone(), p), Term::lam(y, b.clone(), q)),
    )
}

/// `ABORT(M, A) := M A`.
pub fn mk_abort(m: Term, a: &Formula) -> Term {
    Term::ty_app(m, a.clone())
}

/// The atomic case analysis, unfolded by recursion on `c` so that every
/// instantiation of `m` is atomic.
#[allow(clippy::too_many_arguments)]
pub fn mk_case_at(m: Term, x: &str, a: &Formula, p: Term, y: &str, b: &Formula, q: Term, c: &Formula) -> Term {
    match c {
        Formula::Var(_) => mk_case(m, x, a, p, y, b, q, c),
        Formula::And(c1, c2) => Term::pair(
            mk_case_at(
                m.clone(),
                x,
                a,
                Term::proj(Side::Left, p.clone()),
                y,
                b,
                Term::proj(Side::Left, q.clone()),
                c1,
            ),
            mk_case_at(
                m,
                x,
                a,
                Term::proj(Side::Right, p),
                y,
                b,
                Term::proj(Side::Right, q),
                c2,
            ),
        ),
        Formula::Imp(c1, c2) => {
            let z = fresh_name("z", |n| {
                n == x || n == y || m.occurs_free(n) || p.occurs_free(n) || q.occurs_free(n)
            });
            let zv = Term::var(z.clone());
            Term::lam(
                z,
                (**c1).clone(),
                mk_case_at(m, x, a, Term::app(p, zv.clone()), y, b, Term::app(q, zv), c2),
            )
        }
        Formula::Forall(v, body) => {
            let v2 = fresh_name(v, |n| {
                m.type_var_occurs_free(n)
                    || p.type_var_occurs_free(n)
                    || q.type_var_occurs_free(n)
                    || a.occurs_free(n)
                    || b.occurs_free(n)
                    || c.occurs_free(n)
            });
            let vv = Formula::var(v2.clone());
            let body = body.subst(v, &vv);
            Term::ty_lam(
                v2,
                mk_case_at(m, x, a, Term::ty_app(p, vv.clone()), y, b, Term::ty_app(q, vv), &body),
            )
        }
        Formula::Bottom | Formula::Or(..) => unreachable!("not an F formula: {c}"),
    }
}

/// The atomic absurdity, unfolded by recursion on `a`.
pub fn mk_abort_at(m: Term, a: &Formula) -> Term {
    match a {
        Formula::Var(_) => mk_abort(m, a),
        Formula::And(a1, a2) => Term::pair(mk_abort_at(m.clone(), a1), mk_abort_at(m, a2)),
        Formula::Imp(a1, a2) => {
            let z = fresh_name("z", |n| m.occurs_free(n));
            Term::lam(z, (**a1).clone(), mk_abort_at(m, a2))
        }
        Formula::Forall(v, body) => {
            let v2 = fresh_name(v, |n| m.type_var_occurs_free(n) || a.occurs_free(n));
            let body = body.subst(v, &Formula::var(v2.clone()));
            Term::ty_lam(v2, mk_abort_at(m, &body))
        }
        Formula::Bottom | Formula::Or(..) => unreachable!("not an F formula: {a}"),
    }
}

type CaseCtor = fn(Term, &str, &Formula, Term, &str, &Formula, Term, &Formula) -> Term;
type AbortCtor = fn(Term, &Formula) -> Term;

fn translate(m: &Term, case: CaseCtor, abort: AbortCtor) -> Result<Term, TranslateError> {
    let go = |t: &Term| translate(t, case, abort);
    let f = |a: &Formula| rp_formula(a);
    Ok(match m {
        Term::Var(_) => m.clone(),
        Term::Lam(x, a, body) => Term::lam(x.clone(), f(a)?, go(body)?),
        Term::App(p, q) => Term::app(go(p)?, go(q)?),
        Term::Pair(p, q) => Term::pair(go(p)?, go(q)?),
        Term::Proj(i, p) => Term::proj(*i, go(p)?),
        Term::Inj(i, p, a, b) => mk_in(*i, go(p)?, &f(a)?, &f(b)?),
        Term::Case {
            scrutinee,
            left,
            right,
            result,
        } => case(
            go(scrutinee)?,
            &left.var,
            &f(&left.ty)?,
            go(&left.body)?,
            &right.var,
            &f(&right.ty)?,
            go(&right.body)?,
            &f(result)?,
        ),
        Term::Abort(p, a) => abort(go(p)?, &f(a)?),
        Term::TyLam(..) | Term::TyApp(..) => return Err(TranslateError::NotIpcTerm(Box::new(m.clone()))),
    })
}

/// `⌜M⌝`, the Russell–Prawitz translation.
pub fn rp_term(m: &Term) -> Result<Term, TranslateError> {
    translate(m, mk_case, mk_abort)
}

/// `⟦M⟧`, the atomic translation into System Fat.
pub fn at_term(m: &Term) -> Result<Term, TranslateError> {
    translate(m, mk_case_at, mk_abort_at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, formula_alpha_eq, parse_formula, parse_term};
    use crate::typing::{typecheck, Environment, SystemId};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn formulas() {
        assert_eq!(rp_formula(&f("X")), Ok(f("X")));
        assert!(formula_alpha_eq(&rp_formula(&f("bot")).unwrap(), &f("forall X. X")));
        let got = rp_formula(&f("(X | Y) -> bot")).unwrap();
        assert!(formula_alpha_eq(
            &got,
            &f("(forall Z. (X -> Z) & (Y -> Z) -> Z) -> forall Z. Z")
        ));
        assert!(rp_formula(&f("forall X. X")).is_err());
    }

    #[test]
    fn injection() {
        let m = mk_in(Side::Left, t("m"), &f("Y"), &f("Z"));
        assert_eq!(m, t("tfun X => fun w:(Y -> X) & (Z -> X) => w.1 m"));
        let env = Environment::from_bindings([("m", f("Y"))]).unwrap();
        let ty = typecheck(SystemId::F, &env, &m).unwrap();
        assert!(formula_alpha_eq(&ty, &encode_or(&f("Y"), &f("Z"))));
        // The bound variables dodge the free names of the arguments.
        let m = mk_in(Side::Right, t("w [X]"), &f("X"), &f("Z"));
        assert_eq!(m, t("tfun X' => fun w':(X -> X') & (Z -> X') => w'.2 (w [X])"));
    }

    #[test]
    fn case_and_abort() {
        let m = mk_case(t("m"), "x", &f("Y"), t("p"), "y", &f("Z"), t("q"), &f("W"));
        assert_eq!(m, t("m [W] <fun x:Y => p, fun y:Z => q>"));
        assert_eq!(mk_abort(t("m"), &f("X -> X")), t("m [X -> X]"));
        let env = Environment::from_bindings([("m", encode_bot())]).unwrap();
        assert_eq!(typecheck(SystemId::F, &env, &mk_abort(t("m"), &f("C"))), Ok(f("C")));
    }

    #[test]
    fn rp_examples() {
        assert_eq!(rp_term(&t("x")), Ok(t("x")));
        assert_eq!(rp_term(&t("abort[X] m")), Ok(t("m [X]")));
        assert_eq!(
            rp_term(&t("case m of { x:X => p ; y:Y => q } : C")),
            Ok(t("m [C] <fun x:X => p, fun y:Y => q>"))
        );
        assert!(rp_term(&t("tfun X => x")).is_err());
    }

    #[test]
    fn atomic_constructors() {
        assert_eq!(
            mk_case_at(t("m"), "x", &f("A"), t("p"), "y", &f("B"), t("q"), &f("Z")),
            t("m [Z] <fun x:A => p, fun y:B => q>")
        );
        assert_eq!(
            mk_case_at(t("m"), "x", &f("A"), t("p"), "y", &f("B"), t("q"), &f("C1 -> C2")),
            t("fun z:C1 => m [C2] <fun x:A => p z, fun y:B => q z>")
        );
        assert_eq!(
            mk_case_at(t("m"), "x", &f("A"), t("p"), "y", &f("B"), t("q"), &f("forall Z. Z")),
            t("tfun Z => m [Z] <fun x:A => p [Z], fun y:B => q [Z]>")
        );
        assert_eq!(mk_abort_at(t("m"), &f("Z")), t("m [Z]"));
        assert_eq!(mk_abort_at(t("m"), &f("B -> C")), t("fun z:B => m [C]"));
        assert_eq!(mk_abort_at(t("m"), &f("X1 & X2")), t("<m [X1], m [X2]>"));
    }

    #[test]
    fn at_examples() {
        assert_eq!(at_term(&t("abort[X -> Y] m")), Ok(t("fun z:X => m [Y]")));
        assert_eq!(at_term(&t("x")), Ok(t("x")));
        let c = t("case m of { x:X => p ; y:Y => q } : C");
        assert!(alpha_eq(&at_term(&c).unwrap(), &rp_term(&c).unwrap()));
    }

    #[test]
    fn atomic_translation_lands_in_fat() {
        let env = Environment::from_bindings([("b", Formula::Bottom), ("p", f("X | Y"))]).unwrap();
        let m = t("case p of { x:X => fun u:Y & X => <u.2, x> ; y:Y => abort[Y & X -> X & X] b } : Y & X -> X & X");
        let a = typecheck(SystemId::Ipc, &env, &m).unwrap();
        let fenv = env.map_types(|a| rp_formula(a).unwrap());
        let at = at_term(&m).unwrap();
        let ty = typecheck(SystemId::Fat, &fenv, &at).unwrap();
        assert!(formula_alpha_eq(&ty, &rp_formula(&a).unwrap()));
        let rp = rp_term(&m).unwrap();
        assert!(typecheck(SystemId::Fat, &fenv, &rp).is_err());
        let ty = typecheck(SystemId::F, &fenv, &rp).unwrap();
        assert!(formula_alpha_eq(&ty, &rp_formula(&a).unwrap()));
    }
}
