//! Typecheckers for IPC, System F and System Fat, typing of elimination
//! contexts, and the fineness predicate on redexes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rewriting::{self, RuleId};
use crate::syntax::{
    as_encoded_or, encode_or, formula_alpha_eq, fresh_name, is_encoded_bot, Branch, ElimContext, Formula, FormulaKind,
    Position, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Ipc,
    F,
    Fat,
}

impl SystemId {
    pub fn name(self) -> &'static str {
        match self {
            SystemId::Ipc => "ipc",
            SystemId::F => "f",
            SystemId::Fat => "fat",
        }
    }

    /// Whether `f` may appear in a term or context of this system.
    pub fn admits(self, f: &Formula) -> bool {
        matches!(
            (self, f.kind()),
            (_, FormulaKind::Shared)
                | (SystemId::Ipc, FormulaKind::Ipc)
                | (SystemId::F | SystemId::Fat, FormulaKind::Polymorphic)
        )
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SystemId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ipc" => Ok(SystemId::Ipc),
            "f" => Ok(SystemId::F),
            "fat" => Ok(SystemId::Fat),
            _ => Err(format!("unknown system `{s}` (expected ipc, f or fat)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("variable `{0}` is already declared")]
pub struct DuplicateDeclaration(pub String);

/// Ordered declarations `x:A`.
///
/// [`Environment::declare`] rejects a name that is already present. The
/// extension used when descending under a binder ([`Environment::extended`])
/// may shadow an outer declaration of the same name; lookup always finds the
/// innermost one.
///
/// Entries are shared, so cloning an environment per redex stays cheap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Environment {
    entries: Vec<(Rc<str>, Rc<Formula>)>,
}

impl Environment {
    pub fn new() -> Environment {
        Environment::default()
    }

    pub fn from_bindings<I, S>(bindings: I) -> Result<Environment, DuplicateDeclaration>
    where
        I: IntoIterator<Item = (S, Formula)>,
        S: Into<String>,
    {
        let mut env = Environment::new();
        for (x, a) in bindings {
            env.declare(x, a)?;
        }
        Ok(env)
    }

    pub fn declare(&mut self, name: impl Into<String>, ty: Formula) -> Result<(), DuplicateDeclaration> {
        let name = name.into();
        if self.entries.iter().any(|(x, _)| **x == *name) {
            return Err(DuplicateDeclaration(name));
        }
        self.entries.push((name.into(), Rc::new(ty)));
        Ok(())
    }

    pub fn extended(&self, name: impl Into<String>, ty: Formula) -> Environment {
        let mut env = self.clone();
        env.entries.push((Rc::from(name.into()), Rc::new(ty)));
        env
    }

    pub fn lookup(&self, name: &str) -> Option<&Formula> {
        self.entries.iter().rev().find(|(x, _)| **x == *name).map(|(_, a)| &**a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Formula)> {
        self.entries.iter().map(|(x, a)| (&**x, &**a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn free_type_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (_, a) in &self.entries {
            out.extend(a.free_type_vars());
        }
        out
    }

    pub fn map_types(&self, f: impl Fn(&Formula) -> Formula) -> Environment {
        Environment {
            entries: self.entries.iter().map(|(x, a)| (x.clone(), Rc::new(f(a)))).collect(),
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:{a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{construct} is not part of {system} (at {position})")]
    NotInSystem {
        system: SystemId,
        construct: String,
        position: Position,
    },
    #[error("unbound variable `{name}` at {position}")]
    UnboundVariable { name: String, position: Position },
    #[error("type mismatch at {position}: expected {expected}, found {found}")]
    TypeMismatch {
        position: Position,
        expected: String,
        found: Formula,
    },
    #[error("type variable {var} is free in the context of the abstraction at {position}")]
    ForallProvisoViolated { var: String, position: Position },
    #[error("non-atomic instantiation by {formula} at {position}")]
    NonAtomicInstantiation { position: Position, formula: Formula },
    #[error("hole type mismatch: expected {expected}, found {found}")]
    HoleTypeMismatch { expected: String, found: Formula },
}

impl TypeError {
    pub fn position(&self) -> Option<&Position> {
        match self {
            TypeError::NotInSystem { position, .. }
            | TypeError::UnboundVariable { position, .. }
            | TypeError::TypeMismatch { position, .. }
            | TypeError::ForallProvisoViolated { position, .. }
            | TypeError::NonAtomicInstantiation { position, .. } => Some(position),
            TypeError::HoleTypeMismatch { .. } => None,
        }
    }
}

struct Checker<'t> {
    sys: SystemId,
    /// Reject rather than rename a `ΛX` whose `X` is free in the context.
    strict: bool,
    table: Option<&'t mut HashMap<Position, Formula>>,
}

fn here(path: &[usize]) -> Position {
    Position(path.to_vec())
}

impl Checker<'_> {
    fn formula(&self, f: &Formula, path: &[usize]) -> Result<(), TypeError> {
        if self.sys.admits(f) {
            Ok(())
        } else {
            Err(TypeError::NotInSystem {
                system: self.sys,
                construct: format!("formula `{f}`"),
                position: here(path),
            })
        }
    }

    fn construct(&self, ok: bool, name: &str, path: &[usize]) -> Result<(), TypeError> {
        if ok {
            Ok(())
        } else {
            Err(TypeError::NotInSystem {
                system: self.sys,
                construct: name.to_string(),
                position: here(path),
            })
        }
    }

    fn expect(&self, found: &Formula, expected: &Formula, path: &[usize]) -> Result<(), TypeError> {
        if formula_alpha_eq(found, expected) {
            Ok(())
        } else {
            Err(TypeError::TypeMismatch {
                position: here(path),
                expected: expected.to_string(),
                found: found.clone(),
            })
        }
    }

    fn child(&mut self, env: &Environment, m: &Term, path: &mut Vec<usize>, i: usize) -> Result<Formula, TypeError> {
        path.push(i);
        let r = self.infer(env, m, path);
        path.pop();
        r
    }

    fn infer(&mut self, env: &Environment, m: &Term, path: &mut Vec<usize>) -> Result<Formula, TypeError> {
        let ty = self.infer_node(env, m, path)?;
        if let Some(table) = self.table.as_deref_mut() {
            table.insert(here(path), ty.clone());
        }
        Ok(ty)
    }

    fn infer_node(&mut self, env: &Environment, m: &Term, path: &mut Vec<usize>) -> Result<Formula, TypeError> {
        let ipc = self.sys == SystemId::Ipc;
        match m {
            Term::Var(x) => env.lookup(x).cloned().ok_or_else(|| TypeError::UnboundVariable {
                name: x.clone(),
                position: here(path),
            }),
            Term::Lam(x, a, body) => {
                self.formula(a, path)?;
                let b = self.child(&env.extended(x.clone(), a.clone()), body, path, 0)?;
                Ok(Formula::imp(a.clone(), b))
            }
            Term::App(f, n) => {
                let tf = self.child(env, f, path, 0)?;
                let tn = self.child(env, n, path, 1)?;
                match tf {
                    Formula::Imp(a, b) => {
                        path.push(1);
                        let r = self.expect(&tn, &a, path);
                        path.pop();
                        r?;
                        Ok((*b).clone())
                    }
                    other => {
                        path.push(0);
                        let e = TypeError::TypeMismatch {
                            position: here(path),
                            expected: "an implication".into(),
                            found: other,
                        };
                        path.pop();
                        Err(e)
                    }
                }
            }
            Term::Pair(p, q) => {
                let a = self.child(env, p, path, 0)?;
                let b = self.child(env, q, path, 1)?;
                Ok(Formula::and(a, b))
            }
            Term::Proj(i, p) => match self.child(env, p, path, 0)? {
                Formula::And(a, b) => Ok(if i.index() == 1 { (*a).clone() } else { (*b).clone() }),
                other => Err(TypeError::TypeMismatch {
                    position: here(path).child(0),
                    expected: "a conjunction".into(),
                    found: other,
                }),
            },
            Term::Inj(i, p, a, b) => {
                self.construct(ipc, "injection", path)?;
                self.formula(a, path)?;
                self.formula(b, path)?;
                let t = self.child(env, p, path, 0)?;
                path.push(0);
                let r = self.expect(&t, if i.index() == 1 { a } else { b }, path);
                path.pop();
                r?;
                Ok(Formula::or(a.clone(), b.clone()))
            }
            Term::Case {
                scrutinee,
                left,
                right,
                result,
            } => {
                self.construct(ipc, "case analysis", path)?;
                self.formula(&left.ty, path)?;
                self.formula(&right.ty, path)?;
                self.formula(result, path)?;
                let t = self.child(env, scrutinee, path, 0)?;
                path.push(0);
                let r = self.expect(&t, &Formula::or(left.ty.clone(), right.ty.clone()), path);
                path.pop();
                r?;
                for (i, br) in [(1, left), (2, right)] {
                    let tb = self.child(&env.extended(br.var.clone(), br.ty.clone()), &br.body, path, i)?;
                    path.push(i);
                    let r = self.expect(&tb, result, path);
                    path.pop();
                    r?;
                }
                Ok(result.clone())
            }
            Term::Abort(p, c) => {
                self.construct(ipc, "abort", path)?;
                self.formula(c, path)?;
                let t = self.child(env, p, path, 0)?;
                path.push(0);
                let r = self.expect(&t, &Formula::Bottom, path);
                path.pop();
                r?;
                Ok(c.clone())
            }
            Term::TyLam(x, body) => {
                self.construct(!ipc, "type abstraction", path)?;
                let ftv = env.free_type_vars();
                if !ftv.contains(x) {
                    let a = self.child(env, body, path, 0)?;
                    return Ok(Formula::forall(x.clone(), a));
                }
                if self.strict {
                    return Err(TypeError::ForallProvisoViolated {
                        var: x.clone(),
                        position: here(path),
                    });
                }
                // Work with an α-variant whose binder is fresh for the context.
                let y = fresh_name(x, |n| ftv.contains(n) || body.type_var_occurs_free(n));
                let renamed = body.subst_type(x, &Formula::var(y.clone()));
                let a = self.child(env, &renamed, path, 0)?;
                Ok(Formula::forall(y, a))
            }
            Term::TyApp(p, b) => {
                self.construct(!ipc, "type application", path)?;
                self.formula(b, path)?;
                if self.sys == SystemId::Fat && !b.is_atomic() {
                    return Err(TypeError::NonAtomicInstantiation {
                        position: here(path),
                        formula: b.clone(),
                    });
                }
                match self.child(env, p, path, 0)? {
                    Formula::Forall(x, a) => Ok(a.subst(&x, b)),
                    other => Err(TypeError::TypeMismatch {
                        position: here(path).child(0),
                        expected: "a universal formula".into(),
                        found: other,
                    }),
                }
            }
        }
    }

    fn check_env(&self, env: &Environment) -> Result<(), TypeError> {
        for (x, a) in env.iter() {
            if !self.sys.admits(a) {
                return Err(TypeError::NotInSystem {
                    system: self.sys,
                    construct: format!("declaration {x}:{a}"),
                    position: Position::root(),
                });
            }
        }
        Ok(())
    }
}

/// The unique `A` with `env ⊢ m : A` in `sys`.
///
/// A type abstraction `ΛX.M` whose `X` is free in the context is checked as
/// an α-variant with a fresh binder, so α-equivalent terms always receive
/// α-equivalent types. Use [`typecheck_strict`] to reject such terms instead.
pub fn typecheck(sys: SystemId, env: &Environment, m: &Term) -> Result<Formula, TypeError> {
    let mut c = Checker {
        sys,
        strict: false,
        table: None,
    };
    c.check_env(env)?;
    c.infer(env, m, &mut Vec::new())
}

/// Like [`typecheck`], but enforces the `∀I` proviso on binder names literally.
pub fn typecheck_strict(sys: SystemId, env: &Environment, m: &Term) -> Result<Formula, TypeError> {
    let mut c = Checker {
        sys,
        strict: true,
        table: None,
    };
    c.check_env(env)?;
    c.infer(env, m, &mut Vec::new())
}

/// Typechecks `m` and records the type of every subterm by position.
pub fn type_table(sys: SystemId, env: &Environment, m: &Term) -> Result<HashMap<Position, Formula>, TypeError> {
    let mut table = HashMap::new();
    let mut c = Checker {
        sys,
        strict: false,
        table: Some(&mut table),
    };
    c.check_env(env)?;
    c.infer(env, m, &mut Vec::new())?;
    Ok(table)
}

/// The `B` with `env | hole ⊢ e : B`.
pub fn typecheck_elim_context(
    sys: SystemId,
    env: &Environment,
    e: &ElimContext,
    hole: &Formula,
) -> Result<Formula, TypeError> {
    let mut c = Checker {
        sys,
        strict: false,
        table: None,
    };
    c.check_env(env)?;
    let mismatch = |expected: &str| TypeError::HoleTypeMismatch {
        expected: expected.to_string(),
        found: hole.clone(),
    };
    let ipc = sys == SystemId::Ipc;
    match e {
        ElimContext::App(n) => {
            let Formula::Imp(a, b) = hole else {
                return Err(mismatch("an implication"));
            };
            let tn = c.infer(env, n, &mut vec![1])?;
            c.expect(&tn, a, &[1])?;
            Ok((**b).clone())
        }
        ElimContext::Proj(i) => match hole {
            Formula::And(a, b) => Ok(if i.index() == 1 { (**a).clone() } else { (**b).clone() }),
            _ => Err(mismatch("a conjunction")),
        },
        ElimContext::Case { left, right, result } => {
            c.construct(ipc, "case analysis", &[])?;
            for f in [&left.ty, &right.ty, result] {
                c.formula(f, &[])?;
            }
            let expected = Formula::or(left.ty.clone(), right.ty.clone());
            if !formula_alpha_eq(hole, &expected) {
                return Err(mismatch(&expected.to_string()));
            }
            for (i, br) in [(1usize, left), (2, right)] {
                let Branch { var, ty, body } = br;
                let tb = c.infer(&env.extended(var.clone(), ty.clone()), body, &mut vec![i])?;
                c.expect(&tb, result, &[i])?;
            }
            Ok(result.clone())
        }
        ElimContext::Abort(a) => {
            c.construct(ipc, "abort", &[])?;
            c.formula(a, &[])?;
            if *hole != Formula::Bottom {
                return Err(mismatch("bot"));
            }
            Ok(a.clone())
        }
        ElimContext::TyApp(b) => {
            c.construct(!ipc, "type application", &[])?;
            c.formula(b, &[])?;
            if sys == SystemId::Fat && !b.is_atomic() {
                return Err(TypeError::NonAtomicInstantiation {
                    position: Position::root(),
                    formula: b.clone(),
                });
            }
            match hole {
                Formula::Forall(x, a) => Ok(a.subst(x, b)),
                _ => Err(mismatch("a universal formula")),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("term is not a {rule} redex")]
pub struct NotARedex {
    pub rule: RuleId,
}

/// Whether the root redex `m` of `rule` is fine in `env`.
///
/// Only the conversions that replay a disjunction or absurdity elimination
/// carry a condition: their main premiss must have type `A∨̇B` (matching the
/// branch annotations) or `⊥̇`. Every β and η redex is fine.
pub fn is_fine_redex(env: &Environment, m: &Term, rule: RuleId) -> Result<bool, NotARedex> {
    if !rewriting::matches(rule, m) {
        return Err(NotARedex { rule });
    }
    Ok(match rewriting::fineness_condition(rule, m) {
        None => true,
        Some(cond) => premiss_is_fine(env, &cond),
    })
}

pub(crate) fn premiss_is_fine(env: &Environment, cond: &rewriting::FinenessCondition<'_>) -> bool {
    match cond {
        rewriting::FinenessCondition::Disjunction { premiss, left, right } => {
            match typecheck(SystemId::F, env, premiss) {
                Ok(t) => as_encoded_or(&t).is_some() && formula_alpha_eq(&t, &encode_or(left, right)),
                Err(_) => false,
            }
        }
        rewriting::FinenessCondition::Absurdity { premiss } => {
            matches!(typecheck(SystemId::F, env, premiss), Ok(t) if is_encoded_bot(&t))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{encode_bot, parse_formula, parse_term, Side};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn env(bs: &[(&str, Formula)]) -> Environment {
        Environment::from_bindings(bs.iter().map(|(x, a)| (x.to_string(), a.clone()))).unwrap()
    }

    #[test]
    fn assumption() {
        assert_eq!(typecheck(SystemId::Ipc, &env(&[("x", f("X"))]), &t("x")), Ok(f("X")));
    }

    #[test]
    fn polymorphic_identity() {
        let ty = typecheck(SystemId::F, &Environment::new(), &t("tfun X => fun w:X => w")).unwrap();
        assert!(formula_alpha_eq(&ty, &f("forall X. X -> X")));
    }

    #[test]
    fn instantiation_in_f_and_fat() {
        let e = env(&[("z", encode_bot())]);
        assert_eq!(typecheck(SystemId::F, &e, &t("z [Y -> Y]")), Ok(f("Y -> Y")));
        assert!(matches!(
            typecheck(SystemId::Fat, &e, &t("z [Y -> Y]")),
            Err(TypeError::NonAtomicInstantiation { .. })
        ));
        assert_eq!(typecheck(SystemId::Fat, &e, &t("z [Y]")), Ok(f("Y")));
    }

    #[test]
    fn ipc_connectives() {
        let e = env(&[("b", Formula::Bottom), ("p", f("X | Y"))]);
        let m = t("case p of { x:X => in2[Y|X] x ; y:Y => in1[Y|X] y } : Y | X");
        assert_eq!(typecheck(SystemId::Ipc, &e, &m), Ok(f("Y | X")));
        assert_eq!(typecheck(SystemId::Ipc, &e, &t("abort[X -> Y] b")), Ok(f("X -> Y")));
        let bad = t("case p of { x:X => x ; y:Y => y } : X");
        assert!(matches!(
            typecheck(SystemId::Ipc, &e, &bad),
            Err(TypeError::TypeMismatch { position, .. }) if position == Position(vec![2])
        ));
    }

    #[test]
    fn system_membership() {
        let e = Environment::new();
        assert!(matches!(
            typecheck(SystemId::F, &e, &t("fun x:bot => x")),
            Err(TypeError::NotInSystem { .. })
        ));
        assert!(matches!(
            typecheck(SystemId::Ipc, &e, &t("tfun X => fun x:X => x")),
            Err(TypeError::NotInSystem { .. })
        ));
        assert!(matches!(
            typecheck(SystemId::F, &env(&[("x", f("X"))]), &t("in1[X|X] x")),
            Err(TypeError::NotInSystem { .. })
        ));
    }

    #[test]
    fn unbound_and_mismatch_positions() {
        let e = env(&[("f", f("X -> Y")), ("y", f("Y"))]);
        assert_eq!(
            typecheck(SystemId::Ipc, &e, &t("f z")),
            Err(TypeError::UnboundVariable {
                name: "z".into(),
                position: Position(vec![1])
            })
        );
        assert_eq!(
            typecheck(SystemId::Ipc, &e, &t("f y")),
            Err(TypeError::TypeMismatch {
                position: Position(vec![1]),
                expected: "X".into(),
                found: f("Y")
            })
        );
    }

    #[test]
    fn forall_proviso() {
        let e = env(&[("z", f("X"))]);
        let m = t("tfun X => z");
        assert!(matches!(
            typecheck_strict(SystemId::F, &e, &m),
            Err(TypeError::ForallProvisoViolated { .. })
        ));
        let ty = typecheck(SystemId::F, &e, &m).unwrap();
        assert!(formula_alpha_eq(&ty, &f("forall Y. X")));
        // α-variants get α-equal types.
        let ty2 = typecheck(SystemId::F, &e, &t("tfun W => z")).unwrap();
        assert!(formula_alpha_eq(&ty, &ty2));
    }

    #[test]
    fn shadowing_under_binders() {
        let e = env(&[("x", f("X"))]);
        assert_eq!(typecheck(SystemId::Ipc, &e, &t("fun x:Y => x")), Ok(f("Y -> Y")));
        let mut e2 = e.clone();
        assert!(e2.declare("x", f("Y")).is_err());
    }

    #[test]
    fn elim_contexts() {
        let e = Environment::new();
        assert_eq!(
            typecheck_elim_context(SystemId::Ipc, &e, &ElimContext::Proj(Side::Left), &f("A & B")),
            Ok(f("A"))
        );
        assert_eq!(
            typecheck_elim_context(SystemId::F, &e, &ElimContext::TyApp(f("Y")), &f("forall X. X -> X")),
            Ok(f("Y -> Y"))
        );
        let n = ElimContext::App(Term::var("n"));
        assert!(matches!(
            typecheck_elim_context(SystemId::Ipc, &env(&[("n", f("X"))]), &n, &f("X")),
            Err(TypeError::HoleTypeMismatch { .. })
        ));
    }

    #[test]
    fn fineness() {
        let bot = env(&[("z", encode_bot())]);
        assert_eq!(is_fine_redex(&bot, &t("z [X -> Y]"), RuleId::RhoAbort), Ok(true));
        let id = env(&[("z", f("forall X. X -> X"))]);
        assert_eq!(is_fine_redex(&id, &t("z [X -> Y]"), RuleId::RhoAbort), Ok(false));
        let or = env(&[("m", encode_or(&f("X"), &f("Y")))]);
        let r = t("m [C1 & C2] <fun x:X => p, fun y:Y => q>");
        assert_eq!(is_fine_redex(&or, &r, RuleId::RhoCase), Ok(true));
        // Annotations must agree with the disjuncts.
        let r = t("m [C1 & C2] <fun x:Y => p, fun y:X => q>");
        assert_eq!(is_fine_redex(&or, &r, RuleId::RhoCase), Ok(false));
        assert!(is_fine_redex(&bot, &t("z [X]"), RuleId::RhoAbort).is_err());
        assert_eq!(is_fine_redex(&bot, &t("(fun x:X => x) y"), RuleId::BetaImp), Ok(true));
    }

    #[test]
    fn fat_terms_type_identically_in_f() {
        let e = env(&[("z", encode_bot()), ("y", f("Y"))]);
        let m = t("tfun X => fun w:X -> X => <z [X], w (z [X])>");
        let a = typecheck(SystemId::Fat, &e, &m).unwrap();
        let b = typecheck(SystemId::F, &e, &m).unwrap();
        assert!(formula_alpha_eq(&a, &b));
    }
}
