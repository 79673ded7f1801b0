//! `atomize`: typecheck, reduce, translate and analyse IPC / System F proof
//! terms from the command line.
//!
//! Exit codes: 0 ok, 1 type error or rejected input, 2 parse or usage error,
//! 3 step cap reached (the partial trace is still printed), 4 invariant
//! violation.

mod commands;
mod doc;
mod job;

use std::path::PathBuf;
use std::process::ExitCode;

use atomize::typing::SystemId;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use commands::CommandId;
use doc::Document;
use job::{parse_position, read_env, strategy_name, Job};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("{0}")]
    Rejected(String),
    #[error("step limit of {limit} reached")]
    StepCap { limit: usize, doc: Box<Document> },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Type(_) | Failure::Rejected(_) => 1,
            Failure::Parse(_) | Failure::Io(_) => 2,
            Failure::StepCap { .. } => 3,
            Failure::Invariant(_) => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "atomize", version, about = "Proof terms for IPC, System F and System Fat")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Re-check every emitted trace by replaying it
    #[arg(long, global = true)]
    verify: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer the type of a term
    Check(JobArgs),
    /// Normalize with a rule set and strategy
    Reduce(JobArgs),
    /// Russell–Prawitz (`rp`) or atomic (`at`) translation of an IPC term
    Translate {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, value_parser = ["rp", "at"])]
        target: String,
    },
    /// Atomic normal form of a System F term
    Nf(JobArgs),
    /// Termination weight of a System F term
    Weight(JobArgs),
    /// Translate one IPC step into a System F reduction sequence
    Simulate {
        #[command(flatten)]
        job: JobArgs,
        #[command(flatten)]
        redex: RedexArgs,
    },
    /// Build and check the diagram comparing both translations on one IPC step
    Diagram {
        #[command(flatten)]
        job: JobArgs,
        #[command(flatten)]
        redex: RedexArgs,
    },
    /// Replay a structured trace; with --verify, also regenerate it and
    /// compare byte for byte
    Replay { file: PathBuf },
}

#[derive(Args)]
struct JobArgs {
    /// Inline term
    term: Option<String>,
    /// Read the term from a file instead
    #[arg(long, conflicts_with = "term")]
    file: Option<PathBuf>,
    #[arg(long)]
    sys: Option<SystemId>,
    /// A binding `x:A`; repeatable
    #[arg(long = "env")]
    env: Vec<String>,
    /// File with one binding per line
    #[arg(long)]
    env_file: Option<PathBuf>,
    /// Comma-separated rule names (default: every rule of the system)
    #[arg(long)]
    rules: Option<String>,
    /// lo, li, random or random:SEED
    #[arg(long, default_value = "lo")]
    strategy: String,
    /// Seed for `--strategy random`
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Allow steps on redexes that are not fine
    #[arg(long)]
    no_require_fine: bool,
}

#[derive(Args)]
struct RedexArgs {
    /// Rule of the redex to use (default: the first redex of any rule)
    #[arg(long)]
    rule: Option<String>,
    /// Position of the redex, e.g. `0,1` (default: the first in preorder)
    #[arg(long)]
    position: Option<String>,
}

impl JobArgs {
    fn resolve(
        &self,
        cmd: CommandId,
        target: Option<String>,
        redex: Option<&RedexArgs>,
    ) -> Result<(Job, String), Failure> {
        let input = match (&self.term, &self.file) {
            (Some(t), None) => t.trim().to_string(),
            (None, Some(p)) => std::fs::read_to_string(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?
                .trim()
                .to_string(),
            _ => return Err(Failure::Parse("give exactly one of an inline term or --file".into())),
        };
        let (default_sys, only) = cmd.default_system();
        let system = self.sys.unwrap_or(default_sys);
        if only && system != default_sys {
            return Err(Failure::Parse(format!("{} works in {default_sys} only", cmd.name())));
        }
        let strategy = match (self.strategy.as_str(), self.seed) {
            ("random", seed) => format!("random:{}", seed.unwrap_or(0)),
            (s, None) => s.to_string(),
            (_, Some(_)) => return Err(Failure::Parse("--seed only goes with --strategy random".into())),
        };
        let strategy = strategy_name(strategy.parse().map_err(Failure::Parse)?);
        let env_file = self.env_file.as_ref().map(|p| p.to_string_lossy().into_owned());
        let job = Job {
            system,
            env: read_env(&self.env, env_file.as_deref())?,
            rules: self.rules.as_ref().map(|r| {
                r.split(',')
                    .map(|x| x.trim().to_string())
                    .filter(|x| !x.is_empty())
                    .collect()
            }),
            strategy,
            max_steps: self.max_steps,
            require_fine: !self.no_require_fine,
            target,
            rule: redex.and_then(|r| r.rule.clone()),
            position: redex
                .and_then(|r| r.position.as_deref())
                .map(parse_position)
                .transpose()?,
        };
        job.rule_set()?;
        job.rule()?;
        Ok((job, input))
    }
}

fn emit(doc: &Document, format: Format) {
    match format {
        Format::Json => print!("{}", doc.to_json()),
        Format::Text => print!("{}", doc.to_text()),
    }
}

fn replay(file: &PathBuf, verify: bool, format: Format) -> Result<(), Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure::Io(format!("{}: {e}", file.display())))?;
    let doc: Document = serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", file.display())))?;
    doc.replay().map_err(Failure::Invariant)?;
    if verify {
        let cmd = CommandId::from_name(&doc.command)
            .ok_or_else(|| Failure::Parse(format!("unknown command `{}`", doc.command)))?;
        let fresh = match commands::run(cmd, &doc.job, &doc.input) {
            Ok(d) => d,
            Err(Failure::StepCap { doc, .. }) => *doc,
            Err(e) => return Err(e),
        };
        let fresh = fresh.to_json();
        if fresh != text {
            let line = fresh.lines().zip(text.lines()).position(|(a, b)| a != b).unwrap_or(0) + 1;
            return Err(Failure::Invariant(format!(
                "{}: regenerated trace differs (first at line {line})",
                file.display()
            )));
        }
    }
    let steps = doc.steps.len() + doc.legs.iter().map(|l| l.steps.len()).sum::<usize>();
    match format {
        Format::Json => println!(
            "{}",
            json!({ "file": file.display().to_string(), "steps": steps, "legs": doc.legs.len(), "verified": verify })
        ),
        Format::Text => println!(
            "{}: {steps} steps replayed{}",
            file.display(),
            if verify { ", regenerated identically" } else { "" }
        ),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (cmd, args, target, redex) = match &cli.command {
        Command::Replay { file } => return replay(file, cli.verify, cli.format),
        Command::Check(a) => (CommandId::Check, a, None, None),
        Command::Reduce(a) => (CommandId::Reduce, a, None, None),
        Command::Nf(a) => (CommandId::Nf, a, None, None),
        Command::Weight(a) => (CommandId::Weight, a, None, None),
        Command::Translate { job, target } => (CommandId::Translate, job, Some(target.clone()), None),
        Command::Simulate { job, redex } => (CommandId::Simulate, job, None, Some(redex)),
        Command::Diagram { job, redex } => (CommandId::Diagram, job, None, Some(redex)),
    };
    let (job, input) = args.resolve(cmd, target, redex)?;
    let doc = match commands::run(cmd, &job, &input) {
        Ok(doc) => doc,
        Err(Failure::StepCap { limit, doc }) => {
            emit(&doc, cli.format);
            return Err(Failure::StepCap { limit, doc });
        }
        Err(e) => return Err(e),
    };
    if cli.verify {
        commands::verify(cmd, &doc)?;
    }
    emit(&doc, cli.format);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
