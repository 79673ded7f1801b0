//! The weight `W(M;Γ)`, a sum over fine pre-redex occurrences that strictly
//! decreases along fine ϱρ-steps.

use num_bigint::BigUint;

use super::AnalysisError;
use crate::syntax::{as_encoded_or, is_encoded_bot, Formula, Position, Term};
use crate::typing::{typecheck, Environment, SystemId};

/// `|C|`. Note `|A⊃B|` ignores `A`.
pub fn formula_size(c: &Formula) -> BigUint {
    match c {
        Formula::Var(_) | Formula::Bottom => BigUint::default(),
        Formula::Imp(_, b) => {
            let b = formula_size(b);
            BigUint::from(2u32) * &b * &b + BigUint::from(3u32) * b + 1u32
        }
        Formula::And(a, b) | Formula::Or(a, b) => formula_size(a) + formula_size(b) + 1u32,
        Formula::Forall(_, a) => formula_size(a) + 1u32,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreRedexWeight {
    pub position: Position,
    pub local_env: Environment,
    /// `w(r;Γ')`.
    pub contribution: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightReport {
    pub total: BigUint,
    pub per_pre_redex: Vec<PreRedexWeight>,
}

struct Weigher {
    found: Vec<PreRedexWeight>,
}

// Only the heads of candidate pre-redexes need a type; the whole term was
// checked up front.
fn head_type(env: &Environment, p: &Term) -> Result<Formula, AnalysisError> {
    Ok(typecheck(SystemId::F, env, p)?)
}

impl Weigher {
    fn sub(&mut self, t: &Term, env: &Environment, path: &mut Vec<usize>, i: usize) -> Result<BigUint, AnalysisError> {
        path.push(i);
        let w = self.w(t, env, path);
        path.pop();
        w
    }

    fn record(&mut self, path: &[usize], env: &Environment, contribution: BigUint) {
        self.found.push(PreRedexWeight {
            position: Position(path.to_vec()),
            local_env: env.clone(),
            contribution,
        });
    }

    fn w(&mut self, t: &Term, env: &Environment, path: &mut Vec<usize>) -> Result<BigUint, AnalysisError> {
        match t {
            Term::Var(_) => Ok(BigUint::default()),
            Term::Lam(x, a, body) => self.sub(body, &env.extended(x.clone(), a.clone()), path, 0),
            Term::Pair(a, b) => Ok(self.sub(a, env, path, 0)? + self.sub(b, env, path, 1)?),
            Term::Proj(_, a) | Term::TyLam(_, a) => self.sub(a, env, path, 0),
            Term::TyApp(p, c) => {
                let wp = self.sub(p, env, path, 0)?;
                if c.is_atomic() || !is_encoded_bot(&head_type(env, p)?) {
                    return Ok(wp);
                }
                let contribution = formula_size(c) * (&wp + 1u32);
                self.record(path, env, contribution.clone());
                Ok(wp + contribution)
            }
            Term::App(f, n) => {
                if let Term::TyApp(p, c) = f.as_ref() {
                    let p_ty = if c.is_atomic() { None } else { Some(head_type(env, p)?) };
                    if let Some(p_ty) = p_ty.filter(|t| as_encoded_or(t).is_some()) {
                        if is_encoded_bot(&p_ty) {
                            return Err(AnalysisError::invariant(format!(
                                "pre-redex at {} is fine both as a case and as an abort",
                                Position(path.clone())
                            )));
                        }
                        path.push(0);
                        let wp = self.sub(p, env, path, 0)?;
                        path.pop();
                        let wn = self.sub(n, env, path, 1)?;
                        let contribution = formula_size(c) * (&wp + &wn + 1u32);
                        self.record(path, env, contribution.clone());
                        return Ok(wp + wn + contribution);
                    }
                }
                Ok(self.sub(f, env, path, 0)? + self.sub(n, env, path, 1)?)
            }
            Term::Inj(..) | Term::Case { .. } | Term::Abort(..) => {
                Err(AnalysisError::invariant("weight is defined on System F terms only"))
            }
        }
    }
}

/// `W(m;env)`, with the contribution of each fine pre-redex occurrence.
pub fn weight(env: &Environment, m: &Term) -> Result<WeightReport, AnalysisError> {
    typecheck(SystemId::F, env, m)?;
    let mut weigher = Weigher { found: Vec::new() };
    let total = weigher.w(m, env, &mut Vec::new())?;
    let sum: BigUint = weigher.found.iter().map(|p| &p.contribution).sum();
    if sum != total {
        return Err(AnalysisError::invariant(format!(
            "weight {total} differs from its contributions' sum {sum}"
        )));
    }
    Ok(WeightReport {
        total,
        per_pre_redex: weigher.found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{encode_bot, encode_or, parse_formula, parse_term};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn n(k: u32) -> BigUint {
        BigUint::from(k)
    }

    // Direct transcription of the size clauses, on u64.
    fn size_oracle(c: &Formula) -> u64 {
        match c {
            Formula::Imp(_, b) => {
                let b = size_oracle(b);
                2 * b * b + 3 * b + 1
            }
            Formula::And(a, b) => 1 + size_oracle(a) + size_oracle(b),
            Formula::Forall(_, a) => 1 + size_oracle(a),
            _ => 0,
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(formula_size(&f("X")), n(0));
        assert_eq!(formula_size(&f("X -> Y")), n(1));
        assert_eq!(formula_size(&f("forall X. X & X")), n(2));
        // the antecedent does not count
        assert_eq!(formula_size(&f("(X & X & X) -> Y")), n(1));
        // |X⊃(Y⊃Z)| = 2·1+3·1+1
        assert_eq!(formula_size(&f("X -> Y -> Z")), n(6));
        for s in ["X -> Y -> Z -> W", "forall X. (X -> X) & Y", "(X -> Y) & (Y -> X -> X)"] {
            assert_eq!(formula_size(&f(s)), n(size_oracle(&f(s)) as u32), "{s}");
        }
    }

    fn bot_env() -> Environment {
        Environment::from_bindings([("z".to_string(), encode_bot()), ("w".to_string(), encode_bot())]).unwrap()
    }

    #[test]
    fn variables_weigh_nothing() {
        let env = Environment::from_bindings([("x".to_string(), f("X"))]).unwrap();
        assert_eq!(weight(&env, &parse_term("x").unwrap()).unwrap().total, n(0));
    }

    #[test]
    fn abort_pre_redex() {
        let r = weight(&bot_env(), &parse_term("z [X & X]").unwrap()).unwrap();
        // (|X∧X|+1)·0 + |X∧X|
        assert_eq!(r.total, n(1));
        assert_eq!(r.per_pre_redex.len(), 1);
        assert_eq!(r.per_pre_redex[0].position, Position::root());
        let r = weight(&bot_env(), &parse_term("<z [X], z [X]>").unwrap()).unwrap();
        assert_eq!(r.total, n(0));
        assert!(r.per_pre_redex.is_empty());
    }

    #[test]
    fn nested_abort_pre_redexes_multiply() {
        // z [∀X.X] [Y -> Y]: inner (1+0)·1 = 1; outer |Y⊃Y|·(1+1) = 2
        let r = weight(&bot_env(), &parse_term("z [forall X. X] [Y -> Y]").unwrap()).unwrap();
        assert_eq!(r.total, n(3));
        assert_eq!(r.per_pre_redex.len(), 2);
    }

    #[test]
    fn case_pre_redex_counts_branches() {
        let mut env = bot_env();
        env.declare("d", encode_or(&f("X"), &f("Y"))).unwrap();
        env.declare("q", f("(X -> Y -> Y) & (Y -> Y -> Y)")).unwrap();
        // unconstrained Q: |Y⊃Y|·(1 + 0 + 0)
        let r = weight(&env, &parse_term("d [Y -> Y] q").unwrap()).unwrap();
        assert_eq!(r.total, n(1));
        // the branches carry an abort pre-redex of weight |Y⊃Y| = 1 each
        let t = parse_term("d [Y -> Y] <fun x:X => z [Y -> Y], fun y:Y => w [Y -> Y]>").unwrap();
        let r = weight(&env, &t).unwrap();
        // inner: 1 + 1; outer: 1·(1 + 0 + 2) = 3
        assert_eq!(r.total, n(5));
        assert_eq!(r.per_pre_redex.len(), 3);
        assert_eq!(r.per_pre_redex[0].local_env.len(), 5);
    }

    #[test]
    fn untypable_terms_are_rejected() {
        assert!(matches!(
            weight(&Environment::new(), &parse_term("x").unwrap()),
            Err(AnalysisError::NotTypable(_))
        ));
    }
}
