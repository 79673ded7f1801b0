//! Seeded generation of typable IPC terms, for property tests.
//!
//! Generation is type-directed: a term is built for a goal formula, so every
//! sample is typable by construction. `abort[A] b` with `b : ⊥` in the base
//! environment inhabits every goal, which keeps depths bounded.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::rewriting::RuleId;
use crate::syntax::{Branch, Formula, Side, Term};
use crate::typing::{typecheck, Environment, SystemId};

/// Every rule of IPC.
pub const IPC_RULES: [RuleId; 14] = [
    RuleId::BetaImp,
    RuleId::BetaAnd,
    RuleId::BetaOr,
    RuleId::EtaImp,
    RuleId::EtaAnd,
    RuleId::EtaOr,
    RuleId::PiImp,
    RuleId::PiAnd,
    RuleId::PiOr,
    RuleId::PiBot,
    RuleId::VarpiImp,
    RuleId::VarpiAnd,
    RuleId::VarpiOr,
    RuleId::VarpiBot,
];

pub const MAX_DEPTH: usize = 7;

#[derive(Clone, Debug)]
pub struct Sample {
    pub env: Environment,
    pub term: Term,
    pub ty: Formula,
    /// The rule whose redex was planted.
    pub planted: RuleId,
}

/// `b:⊥, x0:X, y0:Y, f0:X⊃Y, p0:X∧Y, d0:X∨Y`.
pub fn base_env() -> Environment {
    let x = || Formula::var("X");
    let y = || Formula::var("Y");
    Environment::from_bindings([
        ("b".to_string(), Formula::Bottom),
        ("x0".to_string(), x()),
        ("y0".to_string(), y()),
        ("f0".to_string(), Formula::imp(x(), y())),
        ("p0".to_string(), Formula::and(x(), y())),
        ("d0".to_string(), Formula::or(x(), y())),
    ])
    .expect("distinct names")
}

pub struct Generator {
    rng: StdRng,
    counter: usize,
    // Compound constructors left for the current sample.
    budget: usize,
}

/// Compound constructors a sample may use outside its planted redex.
pub const NODE_BUDGET: usize = 10;

const ATOMS: [&str; 3] = ["X", "Y", "Z"];
const POOL: [&str; 4] = ["x", "y", "u", "v"];

impl Generator {
    pub fn new(seed: u64) -> Generator {
        Generator {
            rng: StdRng::seed_from_u64(seed),
            counter: 0,
            budget: NODE_BUDGET,
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A binder name; sometimes reused from a small pool so that shadowing
    /// and capture avoidance get exercised.
    fn binder(&mut self) -> String {
        if self.chance(0.3) {
            POOL[self.rng.gen_range(0..POOL.len())].to_string()
        } else {
            self.fresh()
        }
    }

    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("v{}", self.counter)
    }

    /// A random IPC formula with at most `size` connectives.
    pub fn formula(&mut self, size: usize) -> Formula {
        if size == 0 || self.chance(0.35) {
            return if self.chance(0.1) {
                Formula::Bottom
            } else {
                Formula::var(ATOMS[self.rng.gen_range(0..ATOMS.len())])
            };
        }
        let left = self.rng.gen_range(0..size);
        let a = self.formula(left);
        let b = self.formula(size - 1 - left);
        match self.rng.gen_range(0..3) {
            0 => Formula::imp(a, b),
            1 => Formula::and(a, b),
            _ => Formula::or(a, b),
        }
    }

    fn leaf(&mut self, env: &Environment, a: &Formula) -> Term {
        let vars: Vec<&str> = env
            .iter()
            .filter(|(x, t)| *t == a && env.lookup(x) == Some(a))
            .map(|(x, _)| x)
            .collect();
        if !vars.is_empty() && self.chance(0.8) {
            return Term::var(vars[self.rng.gen_range(0..vars.len())]);
        }
        if *a == Formula::Bottom {
            return Term::var("b");
        }
        Term::abort(Term::var("b"), a.clone())
    }

    /// A term of type `a` in `env` of depth at most `d` (`d ≥ 2`).
    pub fn term(&mut self, env: &Environment, a: &Formula, d: usize) -> Term {
        if d <= 2 || self.budget == 0 || self.chance(0.25) {
            return self.leaf(env, a);
        }
        self.budget -= 1;
        if self.chance(0.2) {
            let rule = IPC_RULES[self.rng.gen_range(0..IPC_RULES.len())];
            if let Some(t) = self.redex(env, rule, a, d) {
                return t;
            }
        }
        match (a, self.rng.gen_range(0..4)) {
            (Formula::Imp(b, c), 0 | 1) => {
                let x = self.binder();
                Term::lam(
                    x.clone(),
                    (**b).clone(),
                    self.term(&env.extended(x, (**b).clone()), c, d - 1),
                )
            }
            (Formula::And(b, c), 0 | 1) => Term::pair(self.term(env, b, d - 1), self.term(env, c, d - 1)),
            (Formula::Or(b, c), 0 | 1) => {
                let side = if self.chance(0.5) { Side::Left } else { Side::Right };
                let inner = if side == Side::Left { b } else { c };
                Term::inj(side, self.term(env, inner, d - 1), (**b).clone(), (**c).clone())
            }
            (_, 2) => {
                let b = self.formula(1);
                Term::app(
                    self.term(env, &Formula::imp(b.clone(), a.clone()), d - 1),
                    self.term(env, &b, d - 1),
                )
            }
            (_, 3) if self.chance(0.5) => {
                let b = self.formula(1);
                let (side, pair) = if self.chance(0.5) {
                    (Side::Left, Formula::and(a.clone(), b))
                } else {
                    (Side::Right, Formula::and(b, a.clone()))
                };
                Term::proj(side, self.term(env, &pair, d - 1))
            }
            _ => {
                let (b, c) = (self.formula(1), self.formula(1));
                let s = self.term(env, &Formula::or(b.clone(), c.clone()), d - 1);
                self.case(env, s, &b, &c, a, d - 1)
            }
        }
    }

    /// `case s of { x:b => …; y:c => … } : a`, branches of depth below `d`.
    fn case(&mut self, env: &Environment, s: Term, b: &Formula, c: &Formula, a: &Formula, d: usize) -> Term {
        let (x, y) = (self.binder(), self.binder());
        let p = self.term(&env.extended(x.clone(), b.clone()), a, d);
        let q = self.term(&env.extended(y.clone(), c.clone()), a, d);
        Term::case(s, Branch::new(x, b.clone(), p), Branch::new(y, c.clone(), q), a.clone())
    }

    fn absurd(&mut self, env: &Environment, d: usize) -> Term {
        self.term(env, &Formula::Bottom, d)
    }

    fn side(&mut self) -> Side {
        if self.chance(0.5) {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// A `rule`-redex of type `a` and depth at most `d`, if `a` has the shape
    /// the rule needs and `d` leaves room.
    pub fn redex(&mut self, env: &Environment, rule: RuleId, a: &Formula, d: usize) -> Option<Term> {
        use RuleId::*;
        if d < 4 {
            return None;
        }
        let small = |g: &mut Generator| g.formula(1);
        Some(match rule {
            BetaImp => {
                let b = small(self);
                let x = self.binder();
                let body = self.term(&env.extended(x.clone(), b.clone()), a, d - 2);
                Term::app(Term::lam(x, b.clone(), body), self.term(env, &b, d - 1))
            }
            BetaAnd => {
                let b = small(self);
                let side = self.side();
                let (l, r) = match side {
                    Side::Left => (self.term(env, a, d - 2), self.term(env, &b, d - 2)),
                    Side::Right => (self.term(env, &b, d - 2), self.term(env, a, d - 2)),
                };
                Term::proj(side, Term::pair(l, r))
            }
            BetaOr => {
                let (b, c) = (small(self), small(self));
                let side = self.side();
                let inner = if side == Side::Left { &b } else { &c };
                let s = Term::inj(side, self.term(env, inner, d - 2), b.clone(), c.clone());
                self.case(env, s, &b, &c, a, d - 1)
            }
            EtaImp => {
                let Formula::Imp(b, _) = a else { return None };
                let x = self.fresh();
                Term::lam(
                    x.clone(),
                    (**b).clone(),
                    Term::app(self.term(env, a, d - 2), Term::var(x)),
                )
            }
            EtaAnd => {
                let Formula::And(..) = a else { return None };
                let t = self.term(env, a, d - 2);
                Term::pair(Term::proj(Side::Left, t.clone()), Term::proj(Side::Right, t))
            }
            EtaOr => {
                let Formula::Or(b, c) = a else { return None };
                let (x, y) = (self.binder(), self.binder());
                let s = self.term(env, a, d - 1);
                Term::case(
                    s,
                    Branch::new(
                        x.clone(),
                        (**b).clone(),
                        Term::inj(Side::Left, Term::var(x), (**b).clone(), (**c).clone()),
                    ),
                    Branch::new(
                        y.clone(),
                        (**c).clone(),
                        Term::inj(Side::Right, Term::var(y), (**b).clone(), (**c).clone()),
                    ),
                    a.clone(),
                )
            }
            PiImp => {
                let b = small(self);
                let f = Formula::imp(b.clone(), a.clone());
                let inner = self.case_of(env, &f, d - 2);
                Term::app(inner, self.term(env, &b, d - 1))
            }
            PiAnd => {
                let b = small(self);
                let side = self.side();
                let pair = match side {
                    Side::Left => Formula::and(a.clone(), b),
                    Side::Right => Formula::and(b, a.clone()),
                };
                Term::proj(side, self.case_of(env, &pair, d - 2))
            }
            PiOr => {
                let (b, c) = (small(self), small(self));
                let inner = self.case_of(env, &Formula::or(b.clone(), c.clone()), d - 2);
                self.case(env, inner, &b, &c, a, d - 1)
            }
            PiBot => Term::abort(self.case_of(env, &Formula::Bottom, d - 2), a.clone()),
            VarpiImp => {
                let b = small(self);
                let f = Formula::imp(b.clone(), a.clone());
                Term::app(Term::abort(self.absurd(env, d - 2), f), self.term(env, &b, d - 1))
            }
            VarpiAnd => {
                let b = small(self);
                let side = self.side();
                let pair = match side {
                    Side::Left => Formula::and(a.clone(), b),
                    Side::Right => Formula::and(b, a.clone()),
                };
                Term::proj(side, Term::abort(self.absurd(env, d - 2), pair))
            }
            VarpiOr => {
                let (b, c) = (small(self), small(self));
                let s = Term::abort(self.absurd(env, d - 2), Formula::or(b.clone(), c.clone()));
                self.case(env, s, &b, &c, a, d - 1)
            }
            VarpiBot => Term::abort(Term::abort(self.absurd(env, d - 2), Formula::Bottom), a.clone()),
            _ => return None,
        })
    }

    /// A case analysis of type `a` with a random scrutinee.
    fn case_of(&mut self, env: &Environment, a: &Formula, d: usize) -> Term {
        let (b, c) = (self.formula(1), self.formula(1));
        let s = self.term(env, &Formula::or(b.clone(), c.clone()), d - 1);
        self.case(env, s, &b, &c, a, d - 1)
    }

    /// A goal formula `rule` can produce a redex at.
    fn goal_for(&mut self, rule: RuleId) -> Formula {
        let (b, c) = (self.formula(1), self.formula(1));
        match rule {
            RuleId::EtaImp => Formula::imp(b, c),
            RuleId::EtaAnd => Formula::and(b, c),
            RuleId::EtaOr => Formula::or(b, c),
            _ => self.formula(2),
        }
    }

    /// A typable term of depth at most [`MAX_DEPTH`] containing a `rule`
    /// redex, at the root or under a small context.
    pub fn sample(&mut self, rule: RuleId) -> Sample {
        let env = base_env();
        loop {
            self.budget = NODE_BUDGET;
            let a = self.goal_for(rule);
            let (term, ty) = match self.rng.gen_range(0..4) {
                0 => {
                    let u = self.binder();
                    let c = self.formula(1);
                    let inner = self.redex(&env.extended(u.clone(), c.clone()), rule, &a, MAX_DEPTH - 1);
                    match inner {
                        Some(t) => (Term::lam(u, c.clone(), t), Formula::imp(c, a)),
                        None => continue,
                    }
                }
                1 => {
                    let Some(t) = self.redex(&env, rule, &a, MAX_DEPTH - 1) else {
                        continue;
                    };
                    let other = self.term(&env, &Formula::var("X"), MAX_DEPTH - 1);
                    (Term::pair(other, t), Formula::and(Formula::var("X"), a))
                }
                2 => {
                    let x = self.binder();
                    let inner = self.redex(&env.extended(x.clone(), Formula::var("X")), rule, &a, MAX_DEPTH - 1);
                    let Some(t) = inner else { continue };
                    let y = self.binder();
                    let q = self.term(&env.extended(y.clone(), Formula::var("Y")), &a, MAX_DEPTH - 1);
                    let s = Term::var("d0");
                    let branches = (
                        Branch::new(x, Formula::var("X"), t),
                        Branch::new(y, Formula::var("Y"), q),
                    );
                    (Term::case(s, branches.0, branches.1, a.clone()), a)
                }
                _ => match self.redex(&env, rule, &a, MAX_DEPTH) {
                    Some(t) => (t, a),
                    None => continue,
                },
            };
            debug_assert!(term.depth() <= MAX_DEPTH, "{term}");
            debug_assert!(typecheck(SystemId::Ipc, &env, &term).is_ok(), "{term}");
            return Sample {
                env,
                term,
                ty,
                planted: rule,
            };
        }
    }
}

/// `n` samples cycling through every IPC rule.
pub fn corpus(seed: u64, n: usize) -> Vec<Sample> {
    let mut g = Generator::new(seed);
    (0..n).map(|i| g.sample(IPC_RULES[i % IPC_RULES.len()])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewriting::{find_redexes, RuleSet};
    use crate::syntax::formula_alpha_eq;

    #[test]
    fn samples_are_typable_shallow_and_planted() {
        for s in corpus(7, 400) {
            let ty = typecheck(SystemId::Ipc, &s.env, &s.term).unwrap_or_else(|e| panic!("{}: {e}", s.term));
            assert!(formula_alpha_eq(&ty, &s.ty), "{}", s.term);
            assert!(s.term.depth() <= MAX_DEPTH, "{}", s.term);
            let found = find_redexes(SystemId::Ipc, &s.env, &s.term, RuleSet::of(&[s.planted]));
            assert!(!found.is_empty(), "no {} redex in {}", s.planted, s.term);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a: Vec<Term> = corpus(3, 20).into_iter().map(|s| s.term).collect();
        let b: Vec<Term> = corpus(3, 20).into_iter().map(|s| s.term).collect();
        assert_eq!(a, b);
    }
}
