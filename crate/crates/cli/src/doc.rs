//! The structured trace document and its text rendering.

use std::fmt::Write as _;

use atomize::rewriting::{redex_at, step, ReductionTrace, RuleId};
use atomize::syntax::{parse_formula, parse_term, Position};
use atomize::typing::{Environment, SystemId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::job::Job;

/// `[name, formula]` pairs, in declaration order.
pub type EnvDoc = Vec<(String, String)>;

pub fn env_doc(env: &Environment) -> EnvDoc {
    env.iter().map(|(x, a)| (x.to_string(), a.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub index: usize,
    pub rule: String,
    pub position: Vec<usize>,
    /// The environment in force at `position`.
    pub env: EnvDoc,
    /// The whole term after the step.
    pub term: String,
    pub fine: bool,
    pub administrative: bool,
}

/// One leg of a diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegDoc {
    pub name: String,
    pub system: SystemId,
    pub initial: String,
    pub steps: Vec<StepDoc>,
    pub end: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub command: String,
    pub input: String,
    pub job: Job,
    /// System and environment the steps below are taken in.
    pub system: SystemId,
    pub env: EnvDoc,
    pub initial: String,
    pub steps: Vec<StepDoc>,
    pub result: Value,
    pub fine: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub legs: Vec<LegDoc>,
}

pub fn steps_doc(trace: &ReductionTrace) -> Vec<StepDoc> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| StepDoc {
            index: i + 1,
            rule: s.rule.name().to_string(),
            position: s.position.0.clone(),
            env: env_doc(&s.local_env),
            term: s.result.to_string(),
            fine: s.fine,
            administrative: s.administrative,
        })
        .collect()
}

pub fn leg_doc(name: &str, system: SystemId, trace: &ReductionTrace) -> LegDoc {
    LegDoc {
        name: name.to_string(),
        system,
        initial: trace.initial.to_string(),
        steps: steps_doc(trace),
        end: trace.last().to_string(),
    }
}

pub fn parse_env_doc(env: &EnvDoc) -> Result<Environment, String> {
    let mut out = Environment::new();
    for (x, a) in env {
        let a = parse_formula(a).map_err(|e| format!("binding {x}: {e}"))?;
        out.declare(x.clone(), a).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

/// Re-applies every recorded step from `initial`, requiring each printed
/// term, local environment and fineness flag to come out exactly as recorded.
pub fn replay_steps(system: SystemId, env: &Environment, initial: &str, steps: &[StepDoc]) -> Result<String, String> {
    let mut current = parse_term(initial).map_err(|e| format!("initial term: {e}"))?;
    if current.to_string() != initial {
        return Err(format!("initial term does not print back as `{initial}`"));
    }
    for s in steps {
        let fail = |msg: String| format!("step {}: {msg}", s.index);
        let rule: RuleId = s.rule.parse().map_err(fail)?;
        let pos = Position(s.position.clone());
        let r = redex_at(system, env, &current, rule, &pos).map_err(|e| fail(e.to_string()))?;
        if r.fine != s.fine {
            return Err(fail(format!("recorded fine={}, found fine={}", s.fine, r.fine)));
        }
        if env_doc(&r.local_env) != s.env {
            return Err(fail("local environment differs".into()));
        }
        let next = step(system, &current, &r, r.fine).map_err(|e| fail(e.to_string()))?;
        let printed = next.to_string();
        if printed != s.term {
            return Err(fail(format!("expected `{}`, replay gives `{printed}`", s.term)));
        }
        current = next;
    }
    Ok(current.to_string())
}

impl Document {
    /// Replays the main steps and every leg.
    pub fn replay(&self) -> Result<(), String> {
        let env = parse_env_doc(&self.env)?;
        replay_steps(self.system, &env, &self.initial, &self.steps)?;
        for leg in &self.legs {
            let end =
                replay_steps(leg.system, &env, &leg.initial, &leg.steps).map_err(|e| format!("{}: {e}", leg.name))?;
            if end != leg.end {
                return Err(format!("{}: ends at `{end}`, recorded `{}`", leg.name, leg.end));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} ({}): {}", self.command, self.system, self.input);
        write_steps(&mut out, &self.initial, &self.steps, "  ");
        for leg in &self.legs {
            let _ = writeln!(out, "leg {} ({}, {} steps)", leg.name, leg.system, leg.steps.len());
            write_steps(&mut out, &leg.initial, &leg.steps, "  ");
        }
        let _ = writeln!(out, "result: {}", render_value(&self.result));
        let _ = writeln!(out, "fine: {}", self.fine);
        out
    }
}

fn write_steps(out: &mut String, initial: &str, steps: &[StepDoc], indent: &str) {
    if steps.is_empty() {
        return;
    }
    let _ = writeln!(out, "{indent}0. {initial}");
    for s in steps {
        let tag = match (s.fine, s.administrative) {
            (_, true) => " (administrative)",
            (false, _) => " (not fine)",
            _ => "",
        };
        let _ = writeln!(
            out,
            "{indent}{}. {} at {}{tag}: {}",
            s.index,
            s.rule,
            Position(s.position.clone()),
            s.term
        );
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(map) => {
            let mut out = String::new();
            for (k, v) in map {
                let _ = write!(out, "\n  {k}: {}", render_value(v).replace('\n', "\n  "));
            }
            out
        }
        Value::Array(items) if !items.is_empty() && items.iter().all(Value::is_string) => {
            items.iter().map(render_value).collect::<Vec<_>>().join("; ")
        }
        other => other.to_string(),
    }
}
