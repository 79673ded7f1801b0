//! One function per subcommand; each turns a [`Job`] and an input term into a
//! [`Document`].

use atomize::analysis::{
    atomic_nf_capped, build_diagram, rp_environment, simulate_step, weight, AnalysisError, DiagramKind,
};
use atomize::rewriting::{find_redexes, normalize, step, NormalizeError, NormalizeOptions, Redex, RuleSet};
use atomize::syntax::{parse_term, Term};
use atomize::translate::{at_term, rp_formula, rp_term};
use atomize::typing::{typecheck, Environment, SystemId};
use serde_json::{json, Value};

use crate::doc::{env_doc, leg_doc, steps_doc, Document};
use crate::job::Job;
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandId {
    Check,
    Reduce,
    Translate,
    Nf,
    Weight,
    Simulate,
    Diagram,
}

impl CommandId {
    pub const ALL: [CommandId; 7] = [
        CommandId::Check,
        CommandId::Reduce,
        CommandId::Translate,
        CommandId::Nf,
        CommandId::Weight,
        CommandId::Simulate,
        CommandId::Diagram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandId::Check => "check",
            CommandId::Reduce => "reduce",
            CommandId::Translate => "translate",
            CommandId::Nf => "nf",
            CommandId::Weight => "weight",
            CommandId::Simulate => "simulate",
            CommandId::Diagram => "diagram",
        }
    }

    pub fn from_name(s: &str) -> Option<CommandId> {
        CommandId::ALL.into_iter().find(|c| c.name() == s)
    }

    /// The system a command works in when `--sys` is not given, and whether
    /// that is the only one it accepts.
    pub fn default_system(self) -> (SystemId, bool) {
        match self {
            CommandId::Check | CommandId::Reduce => (SystemId::Ipc, false),
            CommandId::Nf | CommandId::Weight => (SystemId::F, true),
            CommandId::Translate | CommandId::Simulate | CommandId::Diagram => (SystemId::Ipc, true),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Failure {
        match e {
            AnalysisError::NotTypable(e) => Failure::Type(e.to_string()),
            AnalysisError::Invariant(msg) => Failure::Invariant(msg),
            e => Failure::Rejected(e.to_string()),
        }
    }
}

struct Input {
    job: Job,
    input: String,
    env: Environment,
    term: Term,
}

impl Input {
    fn doc(&self, cmd: CommandId, result: Value) -> Document {
        Document {
            command: cmd.name().to_string(),
            input: self.input.clone(),
            job: self.job.clone(),
            system: self.job.system,
            env: self.job.env.clone(),
            initial: self.term.to_string(),
            steps: Vec::new(),
            result,
            fine: true,
            legs: Vec::new(),
        }
    }

    fn typecheck(&self) -> Result<String, Failure> {
        typecheck(self.job.system, &self.env, &self.term)
            .map(|a| a.to_string())
            .map_err(|e| Failure::Type(e.to_string()))
    }
}

pub fn run(cmd: CommandId, job: &Job, input: &str) -> Result<Document, Failure> {
    let term = parse_term(input).map_err(|e| Failure::Parse(e.to_string()))?;
    let inp = Input {
        env: job.environment()?,
        job: job.clone(),
        input: input.to_string(),
        term,
    };
    match cmd {
        CommandId::Check => {
            let ty = inp.typecheck()?;
            Ok(inp.doc(cmd, Value::String(ty)))
        }
        CommandId::Reduce => reduce(&inp),
        CommandId::Translate => translate(&inp),
        CommandId::Nf => nf(&inp),
        CommandId::Weight => {
            let report = weight(&inp.env, &inp.term)?;
            let pre: Vec<Value> = report
                .per_pre_redex
                .iter()
                .map(|p| {
                    json!({
                        "position": p.position.0,
                        "env": env_doc(&p.local_env),
                        "contribution": p.contribution.to_string(),
                    })
                })
                .collect();
            Ok(inp.doc(cmd, json!({ "total": report.total.to_string(), "pre_redexes": pre })))
        }
        CommandId::Simulate => simulate(&inp),
        CommandId::Diagram => diagram(&inp),
    }
}

fn reduce(inp: &Input) -> Result<Document, Failure> {
    inp.typecheck()?;
    let opts = NormalizeOptions {
        strategy: inp.job.strategy()?,
        max_steps: inp.job.max_steps,
        require_fine: inp.job.require_fine,
    };
    let (trace, capped) = match normalize(inp.job.system, &inp.env, &inp.term, inp.job.rule_set()?, opts) {
        Ok(t) => (t, None),
        Err(NormalizeError::StepLimitExceeded { limit, trace }) => (*trace, Some(limit)),
    };
    let mut doc = inp.doc(CommandId::Reduce, Value::String(trace.last().to_string()));
    doc.steps = steps_doc(&trace);
    doc.fine = trace.steps.iter().all(|s| s.fine);
    match capped {
        None => Ok(doc),
        Some(limit) => Err(Failure::StepCap {
            limit,
            doc: Box::new(doc),
        }),
    }
}

fn translate(inp: &Input) -> Result<Document, Failure> {
    inp.typecheck()?;
    let out = match inp.job.target.as_deref() {
        Some("rp") => rp_term(&inp.term),
        Some("at") => at_term(&inp.term),
        other => return Err(Failure::Parse(format!("unknown target {other:?} (expected rp or at)"))),
    }
    .map_err(|e| Failure::Rejected(e.to_string()))?;
    Ok(inp.doc(CommandId::Translate, Value::String(out.to_string())))
}

fn nf(inp: &Input) -> Result<Document, Failure> {
    let (trace, capped) = match atomic_nf_capped(&inp.env, &inp.term, inp.job.strategy()?, inp.job.max_steps) {
        Ok((_, t)) => (t, None),
        Err(AnalysisError::StepLimit { limit, trace }) => (*trace, Some(limit)),
        Err(e) => return Err(e.into()),
    };
    let mut doc = inp.doc(CommandId::Nf, Value::String(trace.last().to_string()));
    doc.steps = steps_doc(&trace);
    match capped {
        None => Ok(doc),
        Some(limit) => Err(Failure::StepCap {
            limit,
            doc: Box::new(doc),
        }),
    }
}

/// The first IPC redex matching `--rule` and `--position`, in preorder.
fn pick_redex(inp: &Input) -> Result<Redex, Failure> {
    inp.typecheck()?;
    let rule = inp.job.rule()?;
    let pos = inp.job.position();
    find_redexes(SystemId::Ipc, &inp.env, &inp.term, RuleSet::system(SystemId::Ipc))
        .into_iter()
        .find(|r| rule.is_none_or(|x| x == r.rule) && pos.as_ref().is_none_or(|p| *p == r.position))
        .ok_or_else(|| {
            Failure::Rejected(format!(
                "no {} redex{}",
                rule.map_or("IPC".to_string(), |r| r.to_string()),
                pos.map_or(String::new(), |p| format!(" at {p}"))
            ))
        })
}

/// Documents of translated traces live in `⌜Γ⌝` and start at `⌜M⌝`.
fn translated_doc(inp: &Input, cmd: CommandId, renv: &Environment, initial: &Term, result: Value) -> Document {
    let mut doc = inp.doc(cmd, result);
    doc.system = SystemId::F;
    doc.env = env_doc(renv);
    doc.initial = initial.to_string();
    doc
}

fn simulate(inp: &Input) -> Result<Document, Failure> {
    let r = pick_redex(inp)?;
    let n = step(SystemId::Ipc, &inp.term, &r, false).map_err(|e| Failure::Rejected(e.to_string()))?;
    let trace = simulate_step(&inp.env, &inp.term, &r)?;
    let renv = rp_environment(&inp.env)?;
    let result = json!({
        "rule": r.rule.name(),
        "position": r.position.0,
        "source": n.to_string(),
        "target": trace.last().to_string(),
    });
    let mut doc = translated_doc(inp, CommandId::Simulate, &renv, &trace.initial, result);
    doc.steps = steps_doc(&trace);
    doc.fine = trace.steps.iter().all(|s| s.fine);
    Ok(doc)
}

fn diagram(inp: &Input) -> Result<Document, Failure> {
    let r = pick_redex(inp)?;
    let d = build_diagram(&inp.env, &inp.term, &r)?;
    d.verify()?;
    let renv = rp_environment(&inp.env)?;
    let kind = match d.kind {
        DiagramKind::Simple => "simple",
        DiagramKind::CentralLeft => "central_left",
        DiagramKind::CentralRight => "central_right",
    };
    let result = json!({
        "rule": d.rule.name(),
        "position": d.position.0,
        "kind": kind,
        "m": d.m.to_string(),
        "n": d.n.to_string(),
        "m_rp": d.m_rp.to_string(),
        "n_rp": d.n_rp.to_string(),
        "m_at": d.m_at.to_string(),
        "n_at": d.n_at.to_string(),
        "q1": d.q1.to_string(),
        "q2": d.q2.to_string(),
        "central": d.central.as_ref().map(Term::to_string),
        "remarks": d.remarks,
    });
    let mut doc = translated_doc(inp, CommandId::Diagram, &renv, &d.m_rp, result);
    doc.steps = steps_doc(&d.legs.m_rp_n_rp);
    doc.legs = d
        .all_legs()
        .iter()
        .map(|(name, sys, trace, _, _)| leg_doc(name, *sys, trace))
        .collect();
    doc.fine = d
        .all_legs()
        .iter()
        .all(|(_, _, t, _, _)| t.steps.iter().all(|s| s.fine));
    Ok(doc)
}

/// Extra checks behind `--verify`: every trace replays exactly, and a
/// translation is typed by the translated formula in the translated context.
pub fn verify(cmd: CommandId, doc: &Document) -> Result<(), Failure> {
    doc.replay().map_err(Failure::Invariant)?;
    if cmd == CommandId::Translate {
        let env = doc.job.environment()?;
        let m = parse_term(&doc.input).map_err(|e| Failure::Parse(e.to_string()))?;
        let a = typecheck(SystemId::Ipc, &env, &m).map_err(|e| Failure::Type(e.to_string()))?;
        let out = parse_term(doc.result.as_str().unwrap_or_default()).map_err(|e| Failure::Parse(e.to_string()))?;
        let sys = if doc.job.target.as_deref() == Some("at") {
            SystemId::Fat
        } else {
            SystemId::F
        };
        let renv = rp_environment(&env)?;
        let b = typecheck(sys, &renv, &out)
            .map_err(|e| Failure::Invariant(format!("translation does not typecheck: {e}")))?;
        let expected = rp_formula(&a).map_err(|e| Failure::Invariant(e.to_string()))?;
        if !atomize::syntax::formula_alpha_eq(&b, &expected) {
            return Err(Failure::Invariant(format!(
                "translation has type {b}, expected {expected}"
            )));
        }
    }
    Ok(())
}
