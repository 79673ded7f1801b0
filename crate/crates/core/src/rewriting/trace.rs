//! Replayable reduction sequences.

use thiserror::Error;

use super::{redex_at, step, RuleId, StepError};
use crate::syntax::{alpha_eq, Position, Term};
use crate::typing::{Environment, SystemId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: RuleId,
    pub position: Position,
    pub local_env: Environment,
    pub result: Term,
    pub fine: bool,
    /// Marks the β-steps that only undo the administrative redexes created
    /// by the atomic translation.
    pub administrative: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub initial: Term,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: {source}")]
    Step { index: usize, source: StepError },
    #[error("step {index}: recorded result differs from replayed result {found}")]
    Mismatch { index: usize, found: Box<Term> },
    #[error("trace does not start at the expected term")]
    WrongStart,
}

impl ReductionTrace {
    pub fn new(initial: Term) -> ReductionTrace {
        ReductionTrace {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn last(&self) -> &Term {
        self.steps.last().map_or(&self.initial, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, s: Step) {
        self.steps.push(s);
    }

    pub fn rules(&self) -> Vec<RuleId> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    /// Every term of the sequence, starting with the initial one.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.result))
    }

    fn apply_tagged(
        &mut self,
        sys: SystemId,
        env: &Environment,
        rule: RuleId,
        pos: &Position,
        administrative: bool,
    ) -> Result<&Term, StepError> {
        let r = redex_at(sys, env, self.last(), rule, pos)?;
        let next = step(sys, self.last(), &r, true)?;
        self.steps.push(Step {
            rule,
            position: r.position,
            local_env: r.local_env,
            result: next,
            fine: r.fine,
            administrative,
        });
        Ok(self.last())
    }

    /// Performs a fine `rule` step at `pos` on the last term.
    pub fn apply(
        &mut self,
        sys: SystemId,
        env: &Environment,
        rule: RuleId,
        pos: &Position,
    ) -> Result<&Term, StepError> {
        self.apply_tagged(sys, env, rule, pos, false)
    }

    /// Like [`ReductionTrace::apply`], tagging the step as administrative.
    pub fn apply_administrative(
        &mut self,
        sys: SystemId,
        env: &Environment,
        rule: RuleId,
        pos: &Position,
    ) -> Result<&Term, StepError> {
        self.apply_tagged(sys, env, rule, pos, true)
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn append(&mut self, other: ReductionTrace) -> Result<(), ReplayError> {
        if !alpha_eq(&other.initial, self.last()) {
            return Err(ReplayError::WrongStart);
        }
        self.steps.extend(other.steps);
        Ok(())
    }

    /// Re-applies every recorded step and checks each recorded result.
    pub fn replay(&self, sys: SystemId, env: &Environment) -> Result<(), ReplayError> {
        let mut current = &self.initial;
        for (index, s) in self.steps.iter().enumerate() {
            let r = redex_at(sys, env, current, s.rule, &s.position)
                .map_err(|source| ReplayError::Step { index, source })?;
            let next =
                step(sys, current, &r, s.fine || r.fine).map_err(|source| ReplayError::Step { index, source })?;
            if r.fine != s.fine || !r.rule.valid_in(sys) {
                return Err(ReplayError::Step {
                    index,
                    source: StepError::NotFine {
                        rule: s.rule,
                        position: s.position.clone(),
                    },
                });
            }
            if !alpha_eq(&next, &s.result) {
                return Err(ReplayError::Mismatch {
                    index,
                    found: Box::new(next),
                });
            }
            current = &s.result;
        }
        Ok(())
    }
}
