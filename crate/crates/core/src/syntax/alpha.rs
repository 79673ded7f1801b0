//! α-equivalence through canonical renaming.
//!
//! Bound variables are renamed to de Bruijn levels (`#t0`, `#t1`, … for term
//! binders and `#T0`, … for type binders). Those names cannot be produced by
//! the parser, so they never collide with free variables. Two terms are
//! α-equivalent exactly when their canonical forms are structurally equal.

use super::{Branch, Formula, Term};

#[derive(Default)]
struct Scope {
    terms: Vec<(String, String)>,
    types: Vec<(String, String)>,
}

impl Scope {
    fn lookup(stack: &[(String, String)], x: &str) -> Option<String> {
        stack
            .iter()
            .rev()
            .find(|(orig, _)| orig == x)
            .map(|(_, new)| new.clone())
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Var(x) => Formula::Var(Self::lookup(&self.types, x).unwrap_or_else(|| x.clone())),
            Formula::Bottom => Formula::Bottom,
            Formula::Imp(a, b) => Formula::imp(self.formula(a), self.formula(b)),
            Formula::And(a, b) => Formula::and(self.formula(a), self.formula(b)),
            Formula::Or(a, b) => Formula::or(self.formula(a), self.formula(b)),
            Formula::Forall(x, a) => {
                let name = format!("#T{}", self.types.len());
                self.types.push((x.clone(), name.clone()));
                let body = self.formula(a);
                self.types.pop();
                Formula::forall(name, body)
            }
        }
    }

    fn bind_term<R>(&mut self, x: &str, k: impl FnOnce(&mut Self) -> R) -> (String, R) {
        let name = format!("#t{}", self.terms.len());
        self.terms.push((x.to_string(), name.clone()));
        let r = k(self);
        self.terms.pop();
        (name, r)
    }

    fn branch(&mut self, b: &Branch) -> Branch {
        let ty = self.formula(&b.ty);
        let (var, body) = self.bind_term(&b.var, |s| s.term(&b.body));
        Branch {
            var,
            ty,
            body: std::rc::Rc::new(body),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(x) => Term::Var(Self::lookup(&self.terms, x).unwrap_or_else(|| x.clone())),
            Term::Lam(x, a, b) => {
                let a = self.formula(a);
                let (x, b) = self.bind_term(x, |s| s.term(b));
                Term::lam(x, a, b)
            }
            Term::App(a, b) => Term::app(self.term(a), self.term(b)),
            Term::Pair(a, b) => Term::pair(self.term(a), self.term(b)),
            Term::Proj(i, m) => Term::proj(*i, self.term(m)),
            Term::Inj(i, m, a, b) => Term::inj(*i, self.term(m), self.formula(a), self.formula(b)),
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => Term::case(
                self.term(scrutinee),
                self.branch(left),
                self.branch(right),
                self.formula(result),
            ),
            Term::Abort(m, a) => Term::abort(self.term(m), self.formula(a)),
            Term::TyLam(x, b) => {
                let name = format!("#T{}", self.types.len());
                self.types.push((x.clone(), name.clone()));
                let body = self.term(b);
                self.types.pop();
                Term::ty_lam(name, body)
            }
            Term::TyApp(m, a) => Term::ty_app(self.term(m), self.formula(a)),
        }
    }
}

impl Formula {
    /// Representative of the α-class of `self`.
    pub fn canonical(&self) -> Formula {
        Scope::default().formula(self)
    }
}

impl Term {
    /// Representative of the α-class of `self`.
    pub fn canonical(&self) -> Term {
        Scope::default().term(self)
    }
}

pub fn formula_alpha_eq(a: &Formula, b: &Formula) -> bool {
    a == b || a.canonical() == b.canonical()
}

pub fn alpha_eq(m: &Term, n: &Term) -> bool {
    m == n || m.canonical() == n.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn formulas_up_to_renaming() {
        assert!(formula_alpha_eq(&f("forall X. X -> Y"), &f("forall Z. Z -> Y")));
        assert!(!formula_alpha_eq(&f("forall X. X -> Y"), &f("forall Y. Y -> Y")));
        assert!(formula_alpha_eq(
            &f("forall X. forall Y. X -> Y"),
            &f("forall Y. forall X. Y -> X")
        ));
        assert!(!formula_alpha_eq(
            &f("forall X. forall Y. X -> Y"),
            &f("forall X. forall Y. Y -> X")
        ));
    }

    #[test]
    fn terms_up_to_renaming() {
        assert!(alpha_eq(&t("fun x:X => x y"), &t("fun z:X => z y")));
        assert!(!alpha_eq(&t("fun x:X => x y"), &t("fun y:X => y y")));
        assert!(alpha_eq(
            &t("tfun X => fun x:X => x [X]"),
            &t("tfun Y => fun z:Y => z [Y]")
        ));
        assert!(alpha_eq(
            &t("case m of { x:X => x ; y:Y => k y } : X"),
            &t("case m of { a:X => a ; b:Y => k b } : X")
        ));
        assert!(!alpha_eq(&t("fun x:X => x"), &t("fun x:Y => x")));
    }

    #[test]
    fn term_and_type_binders_are_separate() {
        // A term variable named like a type variable does not interact with it.
        assert!(alpha_eq(&t("tfun X => fun X:X => X"), &t("tfun Y => fun z:Y => z")));
    }
}
