//! Comparison diagrams: how one IPC step is rendered by the two translations.
//!
//! ```text
//!   ⌜M⌝ ──────────────→ ⌜N⌝
//!    │ δϱρ               │ ε∨ε⊥ϱρ
//!    ↓        βη         ↓
//!    q1 ──────────────→ q2
//!    ↑ β                 ↑ β
//!   ⟦M⟧                ⟦N⟧
//! ```
//!
//! For β∨, π⊃, π∧ and the ϖ rules the corners collapse (`q1 = ⟦M⟧`,
//! `q2 = ⟦N⟧`). For η∨ the square has a central `q1 = Q` reached from `⟦M⟧`
//! by administrative β-steps; for π∨ and π⊥ the central term is `q2`,
//! reached from `⟦N⟧` by administrative β-steps.

use super::{
    apply, at_positions, atomize_unchecked, case_branches, replay_under, rp_environment, rp_position, simulate_step,
    spine_leaves, AnalysisError,
};
use crate::rewriting::{local_env, ReductionTrace, RuleId, Strategy};
use crate::syntax::{alpha_eq, Formula, Position, Side, Term};
use crate::translate::{at_term, rp_formula, rp_term};
use crate::typing::{Environment, SystemId};

use super::simulate::ipc_step;

const F: SystemId = SystemId::F;
const FAT: SystemId = SystemId::Fat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramKind {
    /// `q1 = ⟦M⟧`, `q2 = ⟦N⟧`.
    Simple,
    /// `q2 = ⟦N⟧` and `q1` is the central term.
    CentralLeft,
    /// `q1 = ⟦M⟧` and `q2` is the central term.
    CentralRight,
}

#[derive(Clone, Debug)]
pub struct Legs {
    pub m_rp_q1: ReductionTrace,
    pub m_rp_n_rp: ReductionTrace,
    pub n_rp_q2: ReductionTrace,
    pub m_at_q1: ReductionTrace,
    pub n_at_q2: ReductionTrace,
    pub q1_q2: ReductionTrace,
}

#[derive(Clone, Debug)]
pub struct Diagram {
    pub env: Environment,
    pub m: Term,
    pub n: Term,
    pub rule: RuleId,
    pub position: Position,
    pub kind: DiagramKind,
    pub m_rp: Term,
    pub n_rp: Term,
    pub m_at: Term,
    pub n_at: Term,
    pub q1: Term,
    pub q2: Term,
    /// The central term built for the redex itself, before embedding.
    pub central: Option<Term>,
    pub legs: Legs,
    pub bridge_m: ReductionTrace,
    pub bridge_n: ReductionTrace,
    /// Observations worth reporting, such as step counts that differ from
    /// the ones stated for the construction.
    pub remarks: Vec<String>,
}

/// The rule classes each leg may use.
fn leg_allows(name: &str, rule: RuleId) -> bool {
    use RuleId::*;
    match name {
        "m_rp_q1" => matches!(rule, Delta | RhoCase | RhoAbort),
        "m_rp_n_rp" => rule.is_beta() || rule.is_eta() || matches!(rule, EpsCase | EpsAbort | Delta),
        "n_rp_q2" => matches!(rule, EpsCase | EpsAbort | RhoCase | RhoAbort),
        "m_at_q1" | "n_at_q2" => rule.is_beta(),
        "q1_q2" => rule.is_beta() || rule.is_eta(),
        "bridge_m" | "bridge_n" => rule.is_atomization(),
        _ => false,
    }
}

impl Diagram {
    /// Every leg and bridge with its name, system, start and end corners.
    pub fn all_legs(&self) -> [(&'static str, SystemId, &ReductionTrace, &Term, &Term); 8] {
        let l = &self.legs;
        [
            ("m_rp_q1", F, &l.m_rp_q1, &self.m_rp, &self.q1),
            ("m_rp_n_rp", F, &l.m_rp_n_rp, &self.m_rp, &self.n_rp),
            ("n_rp_q2", F, &l.n_rp_q2, &self.n_rp, &self.q2),
            ("m_at_q1", FAT, &l.m_at_q1, &self.m_at, &self.q1),
            ("n_at_q2", FAT, &l.n_at_q2, &self.n_at, &self.q2),
            ("q1_q2", FAT, &l.q1_q2, &self.q1, &self.q2),
            ("bridge_m", F, &self.bridge_m, &self.m_rp, &self.m_at),
            ("bridge_n", F, &self.bridge_n, &self.n_rp, &self.n_at),
        ]
    }

    /// Replays every leg and checks corners, rule classes, fineness and
    /// administrative tags.
    pub fn verify(&self) -> Result<(), AnalysisError> {
        let renv = rp_environment(&self.env)?;
        for (name, sys, leg, start, end) in self.all_legs() {
            let fail = |what: String| AnalysisError::invariant(format!("leg {name}: {what}"));
            leg.replay(sys, &renv).map_err(|e| fail(e.to_string()))?;
            if !alpha_eq(&leg.initial, start) {
                return Err(fail("does not start at its corner".into()));
            }
            if !alpha_eq(leg.last(), end) {
                return Err(fail(format!("ends at {} instead of {end}", leg.last())));
            }
            for (i, s) in leg.steps.iter().enumerate() {
                if !leg_allows(name, s.rule) {
                    return Err(fail(format!("step {i} uses {}", s.rule)));
                }
                if !s.fine {
                    return Err(fail(format!("step {i} is not fine")));
                }
                if s.administrative && !matches!(name, "m_at_q1" | "n_at_q2") {
                    return Err(fail(format!("step {i} is tagged administrative")));
                }
            }
        }
        if self.kind != DiagramKind::CentralLeft && !alpha_eq(&self.q1, &self.m_at) {
            return Err(AnalysisError::invariant("q1 differs from the atomic image of M"));
        }
        if alpha_eq(&self.q1, &self.m_at) && self.legs.m_rp_q1.rules() != self.bridge_m.rules() {
            return Err(AnalysisError::invariant(
                "with q1 = ⟦M⟧ the left leg must be the bridge",
            ));
        }
        Ok(())
    }
}

type Plan = Vec<(RuleId, Position)>;

fn run(
    trace: &mut ReductionTrace,
    sys: SystemId,
    env: &Environment,
    plan: &Plan,
    administrative: bool,
) -> Result<(), AnalysisError> {
    for (rule, pos) in plan {
        apply(trace, sys, env, *rule, pos, administrative)?;
    }
    Ok(())
}

fn expect_end(trace: &ReductionTrace, target: &Term, what: &str) -> Result<(), AnalysisError> {
    if alpha_eq(trace.last(), target) {
        Ok(())
    } else {
        Err(AnalysisError::invariant(format!(
            "{what} ends at {} instead of {target}",
            trace.last()
        )))
    }
}

/// Continues `trace` to the atomic normal form of its last term.
fn finish_atomizing(trace: &mut ReductionTrace, renv: &Environment) -> Result<(), AnalysisError> {
    let rest = atomize_unchecked(renv, trace.last(), Strategy::LeftmostOutermost)?;
    trace.append(rest).map_err(|e| AnalysisError::invariant(e.to_string()))
}

/// The η-contractions that fold an atomic case tree over `c` back into its
/// branch, innermost first.
fn eta_folds(c: &Formula, p: &Position, out: &mut Plan) {
    match c {
        Formula::Imp(_, c2) => {
            eta_folds(c2, &p.child(0), out);
            out.push((RuleId::EtaImp, p.clone()));
        }
        Formula::And(c1, c2) => {
            eta_folds(c1, &p.child(0), out);
            eta_folds(c2, &p.child(1), out);
            out.push((RuleId::EtaAnd, p.clone()));
        }
        Formula::Forall(_, d) => {
            eta_folds(d, &p.child(0), out);
            out.push((RuleId::EtaAll, p.clone()));
        }
        _ => {}
    }
}

/// `⟦M⟧ →βη ⟦N⟧` for the rules whose diagram collapses, relative to a copy
/// of the redex.
fn simple_leg(rule: RuleId, redex: &Term) -> Result<Plan, AnalysisError> {
    use RuleId::*;
    let mut plan = Plan::new();
    match (rule, redex) {
        (BetaOr, Term::Case { result, .. }) => {
            let c = rp_formula(result)?;
            for leaf in spine_leaves(&c) {
                plan.push((BetaAll, leaf.child(0)));
                plan.push((BetaImp, leaf.clone()));
                plan.push((BetaAnd, leaf.child(0)));
                plan.push((BetaImp, leaf));
            }
            eta_folds(&c, &Position::root(), &mut plan);
        }
        (PiImp | VarpiImp, _) => plan.push((BetaImp, Position::root())),
        (PiAnd | VarpiAnd, _) => plan.push((BetaAnd, Position::root())),
        (VarpiOr, Term::Case { result, .. }) => {
            for leaf in spine_leaves(&rp_formula(result)?) {
                plan.push((BetaAll, leaf.child(0)));
                plan.push((BetaImp, leaf));
            }
        }
        (VarpiBot, Term::Abort(_, c)) => {
            for leaf in spine_leaves(&rp_formula(c)?) {
                plan.push((BetaAll, leaf));
            }
        }
        _ => unreachable!("{rule} has no collapsed diagram"),
    }
    Ok(plan)
}

/// `⟦N⟧ → Q` for π∨/π⊥: at each level of the result type, one β-step per
/// copy of each branch, then recurse into the components.
fn pi_admin(c: &Formula, p: &Position, plan: &mut Plan, counts: &mut Vec<(Position, &'static str, usize)>) {
    let (beta, subs): (RuleId, Vec<(usize, &Formula)>) = match c {
        Formula::Imp(_, c2) => (RuleId::BetaImp, vec![(0, c2)]),
        Formula::And(c1, c2) => (RuleId::BetaAnd, vec![(0, c1), (1, c2)]),
        Formula::Forall(_, d) => (RuleId::BetaAll, vec![(0, d)]),
        _ => return,
    };
    let before = plan.len();
    for (i, sub) in &subs {
        for b in case_branches(sub) {
            plan.push((beta, p.child(*i).join(&b.0)));
        }
    }
    let connective = match c {
        Formula::Imp(..) => "⊃",
        Formula::And(..) => "∧",
        _ => "∀",
    };
    counts.push((p.clone(), connective, plan.len() - before));
    for (i, sub) in subs {
        pi_admin(sub, &p.child(i), plan, counts);
    }
}

/// `⌜N⌝ → …` for π∨/π⊥ before the final atomization: at each level, ϱ on
/// the outer case and one commuting step in each branch.
fn pi_commute(c: &Formula, p: &Position, eps: RuleId, plan: &mut Plan) {
    let subs: Vec<(usize, &Formula)> = match c {
        Formula::Imp(_, c2) | Formula::Forall(_, c2) => vec![(0, c2)],
        Formula::And(c1, c2) => vec![(0, c1), (1, c2)],
        _ => return,
    };
    plan.push((RuleId::RhoCase, p.clone()));
    for (i, _) in &subs {
        for side in [0, 1] {
            plan.push((eps, p.join(&[*i, 1, side, 0])));
        }
    }
    for (i, sub) in subs {
        pi_commute(sub, &p.child(i), eps, plan);
    }
}

/// The administrative counts stated for one level of the π∨/π⊥ construction.
fn stated_count(rule: RuleId, connective: &str) -> usize {
    match (rule, connective) {
        (RuleId::PiOr, "∧") => 4,
        _ => 2,
    }
}

/// `Q = ΛX.λw.M X ⟨λx.(w.1) x, λy.(w.2) y⟩`.
fn eta_or_central(q: &Term) -> bool {
    let Term::TyLam(x, body) = q else { return false };
    let Term::Lam(w, _, body) = body.as_ref() else {
        return false;
    };
    let Term::App(head, branches) = body.as_ref() else {
        return false;
    };
    let Term::TyApp(_, c) = head.as_ref() else { return false };
    let Term::Pair(l, r) = branches.as_ref() else {
        return false;
    };
    let folded = |b: &Term, side: Side| {
        matches!(b, Term::Lam(v, _, inner)
            if **inner == Term::app(Term::proj(side, Term::var(w.clone())), Term::var(v.clone())))
    };
    *c == Formula::var(x.clone()) && folded(l, Side::Left) && folded(r, Side::Right)
}

/// Builds and checks the diagram for the IPC step contracting `r` in `m`.
pub fn build_diagram(env: &Environment, m: &Term, r: &crate::rewriting::Redex) -> Result<Diagram, AnalysisError> {
    use RuleId::*;
    let (r, n) = ipc_step(env, m, r)?;
    if matches!(r.rule, BetaImp | BetaAnd | EtaImp | EtaAnd) {
        return Err(AnalysisError::RuleNotApplicable { rule: r.rule });
    }
    let renv = rp_environment(env)?;
    let (m_rp, n_rp, m_at, n_at) = (rp_term(m)?, rp_term(&n)?, at_term(m)?, at_term(&n)?);
    let bridge_m = atomize_unchecked(&renv, &m_rp, Strategy::LeftmostOutermost)?;
    expect_end(&bridge_m, &m_at, "atomization of ⌜M⌝")?;
    let bridge_n = atomize_unchecked(&renv, &n_rp, Strategy::LeftmostOutermost)?;
    expect_end(&bridge_n, &n_at, "atomization of ⌜N⌝")?;
    let m_rp_n_rp = simulate_step(env, m, &r)?;

    let pos = &r.position;
    let redex = m.subterm(pos).expect("located redex");
    let q = rp_position(m, pos).expect("located redex");
    let copies = at_positions(m, pos)?;
    let at_copies = |plan: &Plan| -> Plan {
        copies
            .iter()
            .flat_map(|c| plan.iter().map(move |(rule, p)| (*rule, c.join(&p.0))))
            .collect()
    };
    let mut remarks = Vec::new();
    let mut m_at_q1 = ReductionTrace::new(m_at.clone());
    let mut n_at_q2 = ReductionTrace::new(n_at.clone());
    let mut q1_q2;
    let m_rp_q1;
    let n_rp_q2;
    let kind;
    let mut central = None;

    match r.rule {
        EtaOr => {
            kind = DiagramKind::CentralLeft;
            let rel = |v: &[usize]| Position(v.to_vec());
            let admin: Plan = vec![
                (BetaAll, rel(&[0, 0, 1, 0, 0, 0])),
                (BetaAll, rel(&[0, 0, 1, 1, 0, 0])),
                (BetaImp, rel(&[0, 0, 1, 0, 0])),
                (BetaImp, rel(&[0, 0, 1, 1, 0])),
            ];
            run(&mut m_at_q1, FAT, &renv, &at_copies(&admin), true)?;
            let q_term = m_at_q1.last().subterm(&copies[0]).expect("copy position").clone();
            if !eta_or_central(&q_term) {
                return Err(AnalysisError::invariant(format!(
                    "central term {q_term} is not of the expected shape"
                )));
            }
            central = Some(q_term);
            let folds: Plan = vec![
                (EtaImp, rel(&[0, 0, 1, 0])),
                (EtaImp, rel(&[0, 0, 1, 1])),
                (EtaAnd, rel(&[0, 0, 1])),
                (EtaImp, rel(&[0])),
                (EtaAll, rel(&[])),
            ];
            q1_q2 = ReductionTrace::new(m_at_q1.last().clone());
            run(&mut q1_q2, FAT, &renv, &at_copies(&folds), false)?;

            // ⌜M⌝: atomize the scrutinee, pull the introductions down, atomize the rest.
            let mut left = ReductionTrace::new(m_rp.clone());
            let scrut_pos = q.join(&[0, 0]);
            let scrut_env = local_env(&renv, &m_rp, &scrut_pos).expect("scrutinee position");
            let scrut_nf = atomize_unchecked(
                &scrut_env,
                m_rp.subterm(&scrut_pos).expect("scrutinee position"),
                Strategy::LeftmostOutermost,
            )?;
            replay_under(&mut left, F, &renv, &scrut_nf, &scrut_pos, false)?;
            left.apply(F, &renv, Delta, &q)?;
            left.apply(F, &renv, Delta, &q.child(0))?;
            finish_atomizing(&mut left, &renv)?;
            m_rp_q1 = left;
            n_rp_q2 = bridge_n.clone();
        }
        PiOr | PiBot => {
            kind = DiagramKind::CentralRight;
            let c = match redex {
                Term::Case { result, .. } | Term::Abort(_, result) => rp_formula(result)?,
                _ => unreachable!("π∨/π⊥ redexes are cases and aborts"),
            };
            let mut lhs = Plan::new();
            for leaf in spine_leaves(&c) {
                if r.rule == PiOr {
                    lhs.push((BetaAll, leaf.child(0)));
                    lhs.push((BetaImp, leaf));
                } else {
                    lhs.push((BetaAll, leaf));
                }
            }
            q1_q2 = ReductionTrace::new(m_at.clone());
            run(&mut q1_q2, FAT, &renv, &at_copies(&lhs), false)?;

            let mut admin = Plan::new();
            let mut counts = Vec::new();
            pi_admin(&c, &Position::root(), &mut admin, &mut counts);
            for (p, connective, k) in counts {
                let stated = stated_count(r.rule, connective);
                if k != stated {
                    remarks.push(format!(
                        "{} level {connective} at {p}: {k} administrative β-steps per copy (the construction states {stated})",
                        r.rule
                    ));
                }
            }
            run(&mut n_at_q2, FAT, &renv, &at_copies(&admin), true)?;
            expect_end(&n_at_q2, q1_q2.last(), "administrative reduction of ⟦N⟧")?;
            central = Some(n_at_q2.last().subterm(&copies[0]).expect("copy position").clone());

            let eps = if r.rule == PiOr { EpsCase } else { EpsAbort };
            let mut commute = Plan::new();
            pi_commute(&c, &rp_position(&n, pos).expect("same context"), eps, &mut commute);
            let mut right = ReductionTrace::new(n_rp.clone());
            run(&mut right, F, &renv, &commute, false)?;
            finish_atomizing(&mut right, &renv)?;
            n_rp_q2 = right;
            m_rp_q1 = bridge_m.clone();
        }
        _ => {
            kind = DiagramKind::Simple;
            q1_q2 = ReductionTrace::new(m_at.clone());
            run(&mut q1_q2, FAT, &renv, &at_copies(&simple_leg(r.rule, redex)?), false)?;
            m_rp_q1 = bridge_m.clone();
            n_rp_q2 = bridge_n.clone();
        }
    }

    let q1 = m_at_q1.last().clone();
    let q2 = n_at_q2.last().clone();
    expect_end(&q1_q2, &q2, "q1 → q2")?;
    expect_end(&m_rp_q1, &q1, "⌜M⌝ → q1")?;
    expect_end(&n_rp_q2, &q2, "⌜N⌝ → q2")?;
    if q1_q2.is_empty() {
        q1_q2 = ReductionTrace::new(q1.clone());
    }
    let d = Diagram {
        env: env.clone(),
        m: m.clone(),
        n,
        rule: r.rule,
        position: pos.clone(),
        kind,
        m_rp,
        n_rp,
        m_at,
        n_at,
        q1,
        q2,
        central,
        legs: Legs {
            m_rp_q1,
            m_rp_n_rp,
            n_rp_q2,
            m_at_q1,
            n_at_q2,
            q1_q2,
        },
        bridge_m,
        bridge_n,
        remarks,
    };
    d.verify()?;
    Ok(d)
}
