//! Capture-avoiding substitution of terms for term variables and of formulas
//! for type variables.
//!
//! A binder is renamed only when it would capture a free variable of the
//! substituted object *and* the substitution actually reaches under it; the
//! new name is the smallest primed variant that is free for the job.

use std::collections::BTreeSet;

use super::{fresh_name, Branch, Formula, Term};

impl Formula {
    /// `[b/x] self`.
    pub fn subst(&self, x: &str, b: &Formula) -> Formula {
        if !self.occurs_free(x) {
            return self.clone();
        }
        let ftv_b = b.free_type_vars();
        self.subst_with(x, b, &ftv_b)
    }

    fn subst_with(&self, x: &str, b: &Formula, ftv_b: &BTreeSet<String>) -> Formula {
        match self {
            Formula::Var(y) if y == x => b.clone(),
            Formula::Var(_) | Formula::Bottom => self.clone(),
            Formula::Imp(p, q) => Formula::imp(p.subst_with(x, b, ftv_b), q.subst_with(x, b, ftv_b)),
            Formula::And(p, q) => Formula::and(p.subst_with(x, b, ftv_b), q.subst_with(x, b, ftv_b)),
            Formula::Or(p, q) => Formula::or(p.subst_with(x, b, ftv_b), q.subst_with(x, b, ftv_b)),
            Formula::Forall(y, body) => {
                if y == x || !body.occurs_free(x) {
                    return self.clone();
                }
                if ftv_b.contains(y) {
                    let y2 = fresh_name(y, |n| n == x || ftv_b.contains(n) || body.occurs_free(n));
                    let renamed = body.subst(y, &Formula::var(y2.clone()));
                    Formula::forall(y2, renamed.subst_with(x, b, ftv_b))
                } else {
                    Formula::forall(y.clone(), body.subst_with(x, b, ftv_b))
                }
            }
        }
    }
}

impl Term {
    /// `[n/x] self`.
    pub fn subst(&self, x: &str, n: &Term) -> Term {
        if !self.occurs_free(x) {
            return self.clone();
        }
        let fv_n = n.free_vars();
        let ftv_n = n.free_type_vars();
        self.subst_with(x, n, &fv_n, &ftv_n)
    }

    fn subst_branch(b: &Branch, x: &str, n: &Term, fv_n: &BTreeSet<String>, ftv_n: &BTreeSet<String>) -> Branch {
        if b.var == x || !b.body.occurs_free(x) {
            return b.clone();
        }
        if fv_n.contains(&b.var) {
            let v = fresh_name(&b.var, |c| c == x || fv_n.contains(c) || b.body.occurs_free(c));
            let body = b.body.subst(&b.var, &Term::var(v.clone()));
            Branch::new(v, b.ty.clone(), body.subst_with(x, n, fv_n, ftv_n))
        } else {
            Branch::new(b.var.clone(), b.ty.clone(), b.body.subst_with(x, n, fv_n, ftv_n))
        }
    }

    fn subst_with(&self, x: &str, n: &Term, fv_n: &BTreeSet<String>, ftv_n: &BTreeSet<String>) -> Term {
        let go = |t: &Term| t.subst_with(x, n, fv_n, ftv_n);
        match self {
            Term::Var(y) if y == x => n.clone(),
            Term::Var(_) => self.clone(),
            Term::Lam(y, a, body) => {
                if y == x || !body.occurs_free(x) {
                    return self.clone();
                }
                if fv_n.contains(y) {
                    let y2 = fresh_name(y, |c| c == x || fv_n.contains(c) || body.occurs_free(c));
                    let renamed = body.subst(y, &Term::var(y2.clone()));
                    Term::lam(y2, a.clone(), go(&renamed))
                } else {
                    Term::lam(y.clone(), a.clone(), go(body))
                }
            }
            Term::App(a, b) => Term::app(go(a), go(b)),
            Term::Pair(a, b) => Term::pair(go(a), go(b)),
            Term::Proj(i, m) => Term::proj(*i, go(m)),
            Term::Inj(i, m, a, b) => Term::inj(*i, go(m), a.clone(), b.clone()),
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => Term::case(
                go(scrutinee),
                Self::subst_branch(left, x, n, fv_n, ftv_n),
                Self::subst_branch(right, x, n, fv_n, ftv_n),
                result.clone(),
            ),
            Term::Abort(m, a) => Term::abort(go(m), a.clone()),
            Term::TyLam(y, body) => {
                if !body.occurs_free(x) {
                    return self.clone();
                }
                if ftv_n.contains(y) {
                    let y2 = fresh_name(y, |c| ftv_n.contains(c) || body.type_var_occurs_free(c));
                    let renamed = body.subst_type(y, &Formula::var(y2.clone()));
                    Term::ty_lam(y2, go(&renamed))
                } else {
                    Term::ty_lam(y.clone(), go(body))
                }
            }
            Term::TyApp(m, a) => Term::ty_app(go(m), a.clone()),
        }
    }

    /// `[b/x] self` on every annotation and instantiation of the term.
    pub fn subst_type(&self, x: &str, b: &Formula) -> Term {
        if !self.type_var_occurs_free(x) {
            return self.clone();
        }
        let ftv_b = b.free_type_vars();
        self.subst_type_with(x, b, &ftv_b)
    }

    fn subst_type_with(&self, x: &str, b: &Formula, ftv_b: &BTreeSet<String>) -> Term {
        let go = |t: &Term| t.subst_type_with(x, b, ftv_b);
        let sf = |f: &Formula| f.subst(x, b);
        match self {
            Term::Var(_) => self.clone(),
            Term::Lam(y, a, body) => Term::lam(y.clone(), sf(a), go(body)),
            Term::App(p, q) => Term::app(go(p), go(q)),
            Term::Pair(p, q) => Term::pair(go(p), go(q)),
            Term::Proj(i, m) => Term::proj(*i, go(m)),
            Term::Inj(i, m, p, q) => Term::inj(*i, go(m), sf(p), sf(q)),
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => Term::case(
                go(scrutinee),
                Branch::new(left.var.clone(), sf(&left.ty), go(&left.body)),
                Branch::new(right.var.clone(), sf(&right.ty), go(&right.body)),
                sf(result),
            ),
            Term::Abort(m, a) => Term::abort(go(m), sf(a)),
            Term::TyLam(y, body) => {
                if y == x || !body.type_var_occurs_free(x) {
                    return self.clone();
                }
                if ftv_b.contains(y) {
                    let y2 = fresh_name(y, |c| c == x || ftv_b.contains(c) || body.type_var_occurs_free(c));
                    let renamed = body.subst_type(y, &Formula::var(y2.clone()));
                    Term::ty_lam(y2, go(&renamed))
                } else {
                    Term::ty_lam(y.clone(), go(body))
                }
            }
            Term::TyApp(m, a) => Term::ty_app(go(m), sf(a)),
        }
    }
}
