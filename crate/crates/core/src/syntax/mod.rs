//! Formulas and proof terms shared by IPC, System F and System Fat.
//!
//! One pair of enums covers all three calculi; membership in a particular
//! system is a property checked by [`Formula::kind`] and by the typechecker.
//! Equality that matters semantically is α-equivalence ([`alpha`]); the
//! derived `PartialEq` is plain structural equality and is only meaningful
//! on canonical forms.

pub mod alpha;
mod parse;
mod print;
pub mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

pub use alpha::{alpha_eq, formula_alpha_eq};
pub use parse::{parse_binding, parse_formula, parse_term, ParseError};

/// Index of a projection or injection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Side> {
        match i {
            1 => Some(Side::Left),
            2 => Some(Side::Right),
            _ => None,
        }
    }

    pub fn both() -> [Side; 2] {
        [Side::Left, Side::Right]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(String),
    Bottom,
    Imp(Rc<Formula>, Rc<Formula>),
    And(Rc<Formula>, Rc<Formula>),
    Or(Rc<Formula>, Rc<Formula>),
    Forall(String, Rc<Formula>),
}

/// Which calculi a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaKind {
    /// Only variables, implication and conjunction: legal everywhere.
    Shared,
    /// Uses ⊥ or ∨ but no quantifier.
    Ipc,
    /// Uses ∀ but neither ⊥ nor ∨.
    Polymorphic,
    /// Mixes IPC-only and F-only connectives.
    Mixed,
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Rc::new(a), Rc::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Rc::new(a), Rc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Rc::new(a), Rc::new(b))
    }

    pub fn forall(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(x.into(), Rc::new(body))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Var(_))
    }

    pub fn kind(&self) -> FormulaKind {
        let mut ipc = false;
        let mut poly = false;
        self.scan_connectives(&mut ipc, &mut poly);
        match (ipc, poly) {
            (false, false) => FormulaKind::Shared,
            (true, false) => FormulaKind::Ipc,
            (false, true) => FormulaKind::Polymorphic,
            (true, true) => FormulaKind::Mixed,
        }
    }

    fn scan_connectives(&self, ipc: &mut bool, poly: &mut bool) {
        match self {
            Formula::Var(_) => {}
            Formula::Bottom => *ipc = true,
            Formula::Or(a, b) => {
                *ipc = true;
                a.scan_connectives(ipc, poly);
                b.scan_connectives(ipc, poly);
            }
            Formula::Imp(a, b) | Formula::And(a, b) => {
                a.scan_connectives(ipc, poly);
                b.scan_connectives(ipc, poly);
            }
            Formula::Forall(_, a) => {
                *poly = true;
                a.scan_connectives(ipc, poly);
            }
        }
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_ftv(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_ftv(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Formula::Bottom => {}
            Formula::Imp(a, b) | Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_ftv(bound, out);
                b.collect_ftv(bound, out);
            }
            Formula::Forall(x, a) => {
                bound.push(x.clone());
                a.collect_ftv(bound, out);
                bound.pop();
            }
        }
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            Formula::Var(y) => y == x,
            Formula::Bottom => false,
            Formula::Imp(a, b) | Formula::And(a, b) | Formula::Or(a, b) => a.occurs_free(x) || b.occurs_free(x),
            Formula::Forall(y, a) => y != x && a.occurs_free(x),
        }
    }
}

/// `A∨̇B := ∀X.((A⊃X)∧(B⊃X))⊃X` with `X` fresh for `a` and `b`.
pub fn encode_or(a: &Formula, b: &Formula) -> Formula {
    let x = fresh_name("X", |n| a.occurs_free(n) || b.occurs_free(n));
    let xv = Formula::var(x.clone());
    Formula::forall(
        x,
        Formula::imp(
            Formula::and(Formula::imp(a.clone(), xv.clone()), Formula::imp(b.clone(), xv.clone())),
            xv,
        ),
    )
}

/// `⊥̇ := ∀X.X`.
pub fn encode_bot() -> Formula {
    Formula::forall("X", Formula::var("X"))
}

/// Recognizes `∀X.((A⊃X)∧(B⊃X))⊃X` with `X` not free in `A`, `B`.
pub fn as_encoded_or(f: &Formula) -> Option<(&Formula, &Formula)> {
    let Formula::Forall(x, body) = f else {
        return None;
    };
    let Formula::Imp(hyp, concl) = body.as_ref() else {
        return None;
    };
    if !matches!(concl.as_ref(), Formula::Var(v) if v == x) {
        return None;
    }
    let Formula::And(l, r) = hyp.as_ref() else {
        return None;
    };
    let (Formula::Imp(a, xa), Formula::Imp(b, xb)) = (l.as_ref(), r.as_ref()) else {
        return None;
    };
    let is_x = |f: &Formula| matches!(f, Formula::Var(v) if v == x);
    if is_x(xa) && is_x(xb) && !a.occurs_free(x) && !b.occurs_free(x) {
        Some((a, b))
    } else {
        None
    }
}

pub fn is_encoded_bot(f: &Formula) -> bool {
    matches!(f, Formula::Forall(x, body) if matches!(body.as_ref(), Formula::Var(y) if y == x))
}

/// Smallest primed variant of `base` (`base`, `base'`, `base''`, …) rejected by `taken`.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut name = base.to_string();
    while taken(&name) {
        name.push('\'');
    }
    name
}

/// A case branch `x:A => body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub var: String,
    pub ty: Formula,
    pub body: Rc<Term>,
}

impl Branch {
    pub fn new(var: impl Into<String>, ty: Formula, body: Term) -> Branch {
        Branch {
            var: var.into(),
            ty,
            body: Rc::new(body),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Formula, Rc<Term>),
    App(Rc<Term>, Rc<Term>),
    Pair(Rc<Term>, Rc<Term>),
    Proj(Side, Rc<Term>),
    /// `in_i[A|B] M`; both component formulas are carried.
    Inj(Side, Rc<Term>, Formula, Formula),
    Case {
        scrutinee: Rc<Term>,
        left: Branch,
        right: Branch,
        result: Formula,
    },
    Abort(Rc<Term>, Formula),
    TyLam(String, Rc<Term>),
    TyApp(Rc<Term>, Formula),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn lam(x: impl Into<String>, ty: Formula, body: Term) -> Term {
        Term::Lam(x.into(), ty, Rc::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Rc::new(f), Rc::new(a))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Rc::new(a), Rc::new(b))
    }

    pub fn proj(side: Side, m: Term) -> Term {
        Term::Proj(side, Rc::new(m))
    }

    pub fn inj(side: Side, m: Term, a: Formula, b: Formula) -> Term {
        Term::Inj(side, Rc::new(m), a, b)
    }

    pub fn case(scrutinee: Term, left: Branch, right: Branch, result: Formula) -> Term {
        Term::Case {
            scrutinee: Rc::new(scrutinee),
            left,
            right,
            result,
        }
    }

    pub fn abort(m: Term, ty: Formula) -> Term {
        Term::Abort(Rc::new(m), ty)
    }

    pub fn ty_lam(x: impl Into<String>, body: Term) -> Term {
        Term::TyLam(x.into(), Rc::new(body))
    }

    pub fn ty_app(m: Term, ty: Formula) -> Term {
        Term::TyApp(Rc::new(m), ty)
    }

    /// Children in grammar order; positions index into this list.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) => vec![],
            Term::Lam(_, _, b) | Term::TyLam(_, b) => vec![b],
            Term::App(a, b) | Term::Pair(a, b) => vec![a, b],
            Term::Proj(_, m) | Term::Inj(_, m, _, _) | Term::Abort(m, _) | Term::TyApp(m, _) => {
                vec![m]
            }
            Term::Case {
                scrutinee, left, right, ..
            } => vec![scrutinee, &left.body, &right.body],
        }
    }

    fn child_mut(&mut self, i: usize) -> Option<&mut Term> {
        match (self, i) {
            (Term::Lam(_, _, b), 0) | (Term::TyLam(_, b), 0) => Some(Rc::make_mut(b)),
            (Term::App(a, _), 0) | (Term::Pair(a, _), 0) => Some(Rc::make_mut(a)),
            (Term::App(_, b), 1) | (Term::Pair(_, b), 1) => Some(Rc::make_mut(b)),
            (Term::Proj(_, m), 0) | (Term::Inj(_, m, _, _), 0) | (Term::Abort(m, _), 0) | (Term::TyApp(m, _), 0) => {
                Some(Rc::make_mut(m))
            }
            (Term::Case { scrutinee, .. }, 0) => Some(Rc::make_mut(scrutinee)),
            (Term::Case { left, .. }, 1) => Some(Rc::make_mut(&mut left.body)),
            (Term::Case { right, .. }, 2) => Some(Rc::make_mut(&mut right.body)),
            _ => None,
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = *t.children().get(i)?;
        }
        Some(t)
    }

    pub fn subterm_mut(&mut self, pos: &Position) -> Option<&mut Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.child_mut(i)?;
        }
        Some(t)
    }

    /// Copy of `self` with the subterm at `pos` replaced; `None` on an invalid
    /// path. Only the spine down to `pos` is copied.
    pub fn replace_at(&self, pos: &Position, new: Term) -> Option<Term> {
        let mut out = self.clone();
        *out.subterm_mut(pos)? = new;
        Some(out)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// All positions, outermost first, left to right.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut path, &mut out);
        out
    }

    /// Positions of every free occurrence of the term variable `x`.
    pub fn var_positions(&self, x: &str) -> Vec<Position> {
        let mut out = Vec::new();
        fn walk(t: &Term, x: &str, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            match t {
                Term::Var(y) if y == x => out.push(Position(path.clone())),
                Term::Lam(y, _, _) if y == x => {}
                _ => {
                    for (i, c) in t.children().into_iter().enumerate() {
                        if let Term::Case { left, right, .. } = t {
                            if (i == 1 && left.var == x) || (i == 2 && right.var == x) {
                                continue;
                            }
                        }
                        path.push(i);
                        walk(c, x, path, out);
                        path.pop();
                    }
                }
            }
        }
        walk(self, x, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            Term::Lam(x, _, b) => {
                bound.push(x.clone());
                b.collect_fv(bound, out);
                bound.pop();
            }
            Term::Case {
                scrutinee, left, right, ..
            } => {
                scrutinee.collect_fv(bound, out);
                for br in [left, right] {
                    bound.push(br.var.clone());
                    br.body.collect_fv(bound, out);
                    bound.pop();
                }
            }
            _ => {
                for c in self.children() {
                    c.collect_fv(bound, out);
                }
            }
        }
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Lam(y, _, b) => y != x && b.occurs_free(x),
            Term::Case {
                scrutinee, left, right, ..
            } => {
                scrutinee.occurs_free(x)
                    || (left.var != x && left.body.occurs_free(x))
                    || (right.var != x && right.body.occurs_free(x))
            }
            _ => self.children().iter().any(|c| c.occurs_free(x)),
        }
    }

    /// Free type variables of every annotation and instantiation in the term.
    pub fn free_type_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_ftv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_ftv(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(_) => {}
            Term::Lam(_, a, b) => {
                a.collect_ftv(bound, out);
                b.collect_ftv(bound, out);
            }
            Term::Inj(_, m, a, b) => {
                m.collect_ftv(bound, out);
                a.collect_ftv(bound, out);
                b.collect_ftv(bound, out);
            }
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => {
                scrutinee.collect_ftv(bound, out);
                for br in [left, right] {
                    br.ty.collect_ftv(bound, out);
                    br.body.collect_ftv(bound, out);
                }
                result.collect_ftv(bound, out);
            }
            Term::Abort(m, a) | Term::TyApp(m, a) => {
                m.collect_ftv(bound, out);
                a.collect_ftv(bound, out);
            }
            Term::TyLam(x, b) => {
                bound.push(x.clone());
                b.collect_ftv(bound, out);
                bound.pop();
            }
            Term::App(a, b) | Term::Pair(a, b) => {
                a.collect_ftv(bound, out);
                b.collect_ftv(bound, out);
            }
            Term::Proj(_, m) => m.collect_ftv(bound, out),
        }
    }

    pub fn type_var_occurs_free(&self, x: &str) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Lam(_, a, b) => a.occurs_free(x) || b.type_var_occurs_free(x),
            Term::Inj(_, m, a, b) => m.type_var_occurs_free(x) || a.occurs_free(x) || b.occurs_free(x),
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => {
                scrutinee.type_var_occurs_free(x)
                    || left.ty.occurs_free(x)
                    || right.ty.occurs_free(x)
                    || left.body.type_var_occurs_free(x)
                    || right.body.type_var_occurs_free(x)
                    || result.occurs_free(x)
            }
            Term::Abort(m, a) | Term::TyApp(m, a) => m.type_var_occurs_free(x) || a.occurs_free(x),
            Term::TyLam(y, b) => y != x && b.type_var_occurs_free(x),
            Term::App(a, b) | Term::Pair(a, b) => a.type_var_occurs_free(x) || b.type_var_occurs_free(x),
            Term::Proj(_, m) => m.type_var_occurs_free(x),
        }
    }

    /// Splits `E[M]` into its elimination context and main premiss.
    pub fn as_elim(&self) -> Option<(ElimContext, &Term)> {
        Some(match self {
            Term::App(m, n) => (ElimContext::App((**n).clone()), m),
            Term::Proj(i, m) => (ElimContext::Proj(*i), m),
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => (
                ElimContext::Case {
                    left: left.clone(),
                    right: right.clone(),
                    result: result.clone(),
                },
                scrutinee,
            ),
            Term::Abort(m, a) => (ElimContext::Abort(a.clone()), m),
            Term::TyApp(m, a) => (ElimContext::TyApp(a.clone()), m),
            _ => return None,
        })
    }
}

/// Path of child indices from the root, children ordered as in the grammar.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn join(&self, rest: &[usize]) -> Position {
        let mut p = self.0.clone();
        p.extend_from_slice(rest);
        Position(p)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// An elimination inference with a hole at its main premiss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElimContext {
    App(Term),
    Proj(Side),
    Case {
        left: Branch,
        right: Branch,
        result: Formula,
    },
    Abort(Formula),
    TyApp(Formula),
}

impl ElimContext {
    pub fn fill(&self, m: Term) -> Term {
        match self {
            ElimContext::App(n) => Term::app(m, n.clone()),
            ElimContext::Proj(i) => Term::proj(*i, m),
            ElimContext::Case { left, right, result } => Term::case(m, left.clone(), right.clone(), result.clone()),
            ElimContext::Abort(a) => Term::abort(m, a.clone()),
            ElimContext::TyApp(a) => Term::ty_app(m, a.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn encode_or_shape() {
        let e = encode_or(&f("Y"), &f("Z"));
        assert!(formula_alpha_eq(&e, &f("forall X. ((Y -> X) & (Z -> X)) -> X")));
        assert_eq!(e.to_string(), "forall X. (Y -> X) & (Z -> X) -> X");
    }

    #[test]
    fn encode_or_avoids_capture() {
        let e = encode_or(&f("X"), &f("X"));
        assert_eq!(e, f("forall X'. (X -> X') & (X -> X') -> X'"));
        assert_eq!(as_encoded_or(&e), Some((&f("X"), &f("X"))));
    }

    #[test]
    fn encode_bot_is_polymorphic() {
        assert!(formula_alpha_eq(&encode_bot(), &f("forall Y. Y")));
        assert_eq!(encode_bot().kind(), FormulaKind::Polymorphic);
        assert_eq!(encode_or(&f("A"), &f("B")).kind(), FormulaKind::Polymorphic);
        assert!(is_encoded_bot(&f("forall Q. Q")));
        assert!(as_encoded_or(&encode_bot()).is_none());
    }

    #[test]
    fn kinds() {
        assert_eq!(f("X -> Y & Z").kind(), FormulaKind::Shared);
        assert_eq!(f("X | bot").kind(), FormulaKind::Ipc);
        assert_eq!(f("forall X. X | Y").kind(), FormulaKind::Mixed);
    }

    #[test]
    fn fill_contexts() {
        let m = t("m");
        assert_eq!(ElimContext::App(t("n")).fill(m.clone()), t("m n"));
        assert_eq!(ElimContext::Proj(Side::Left).fill(m.clone()), t("m.1"));
        assert_eq!(ElimContext::TyApp(f("B")).fill(m.clone()), t("m [B]"));
        let c = t("case m of { x:X => x ; y:Y => p } : X");
        let (e, main) = c.as_elim().unwrap();
        assert_eq!(main, &m);
        assert_eq!(e.fill(m), t("case m of { x:X => x ; y:Y => p } : X"));
    }

    #[test]
    fn positions_and_replacement() {
        let m = t("case m of { x:X => x y ; y:Y => p } : X");
        assert_eq!(m.subterm(&Position(vec![1, 1])), Some(&t("y")));
        assert_eq!(m.subterm(&Position(vec![3])), None);
        let r = m.replace_at(&Position(vec![2]), t("q")).unwrap();
        assert_eq!(r, t("case m of { x:X => x y ; y:Y => q } : X"));
        assert!(m.replace_at(&Position(vec![0, 0]), t("q")).is_none());
        assert_eq!(m.positions().len(), m.size());
        assert_eq!(m.var_positions("y"), vec![Position(vec![1, 1])]);
    }

    #[test]
    fn free_variables() {
        let m = t("fun x:X => case x of { y:Y => y z ; w:W => w } : Z");
        assert_eq!(m.free_vars().into_iter().collect::<Vec<_>>(), vec!["z"]);
        let p = t("tfun X => fun w:X -> Y => w [Z]");
        assert_eq!(p.free_type_vars().into_iter().collect::<Vec<_>>(), vec!["Y", "Z"]);
        assert!(!p.type_var_occurs_free("X"));
    }
}
