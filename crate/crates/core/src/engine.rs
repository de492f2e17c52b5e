//! End-to-end diagnosis: classification, then a core from SAT unrollings,
//! counterstrategy analysis or iterated realizability checks.

use std::collections::{BTreeMap, BTreeSet};

use log::{debug, info};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cs::{self, CsError};
use crate::game::{self, Counterstrategy, GameError, GameOptions, GoalSelection, Realizability};
use crate::sat::{self, CnfInstance, Conjunct, GroupKey, Limits, MusResult, Origin, SatError};
use crate::spec::{Slot, Span, Spec, StmtId};
use crate::unroll::{self, UnrollError};
use crate::workspace::TOPOLOGY_TEXT;
use crate::Budget;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Deepest unrolling tried for unsatisfiable specifications.
    pub max_depth: u32,
    /// Unrolling depth for counterstrategy livelock cores; derived from the
    /// counterstrategy when unset.
    pub livelock_depth: Option<u32>,
    /// Wall-clock budget for each solver call.
    pub budget_ms: u64,
    pub atom_cap: usize,
    /// Evaluate iterated-realizability candidates speculatively in parallel.
    pub parallel: bool,
    /// Longest preventing cycle considered, as a multiple of the states
    /// marked with the goal.
    pub cycle_factor: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_depth: 15,
            livelock_depth: None,
            budget_ms: 30_000,
            atom_cap: 20,
            parallel: false,
            cycle_factor: 2,
        }
    }
}

impl EngineConfig {
    fn game(&self) -> GameOptions {
        GameOptions {
            atom_cap: self.atom_cap,
            budget: Budget::from_millis(self.budget_ms),
        }
    }

    fn limits(&self) -> Limits {
        Limits {
            max_conflicts: None,
            budget: Budget::from_millis(self.budget_ms),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{atoms} propositions exceed the state-space cap of {cap}")]
    StateSpaceTooLarge { atoms: usize, cap: usize },
    #[error("analysis timed out during {0}")]
    AnalysisTimeout(&'static str),
    #[error("SAT search hit its conflict limit during {0}")]
    ResourceLimit(&'static str),
    #[error("no unrolling up to depth {0} is unsatisfiable")]
    DepthExhausted(u32),
    #[error("the goal is reachable within {0} steps; try a different depth")]
    NotUnsatAtDepth(u32),
    #[error("the starting specification slice is already synthesizable")]
    NotUnsynthesizable,
    #[error("{0}")]
    Internal(String),
}

fn game_err(phase: &'static str) -> impl Fn(GameError) -> EngineError {
    move |e| match e {
        GameError::StateSpaceTooLarge { atoms, cap } => EngineError::StateSpaceTooLarge { atoms, cap },
        GameError::Timeout => EngineError::AnalysisTimeout(phase),
        other => EngineError::Internal(format!("{phase}: {other}")),
    }
}

fn sat_err(phase: &'static str) -> impl Fn(SatError) -> EngineError {
    move |e| match e {
        SatError::Timeout => EngineError::AnalysisTimeout(phase),
        SatError::ResourceLimit { .. } => EngineError::ResourceLimit(phase),
        SatError::NotUnsat => EngineError::Internal(format!("{phase}: instance is satisfiable")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Synthesizable,
    Unsatisfiable,
    Unrealizable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    Deadlock,
    Livelock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SatUnroll,
    CounterstrategySat,
    IteratedRealizability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The core has no system safety statement besides the topology.
    PossiblyNotMeaningful,
    /// Minimal over clause groups but not over statements.
    GroupMinimal,
}

/// One reported statement. The topology is a single entry covering all of
/// its generated statements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreEntry {
    pub ids: Vec<StmtId>,
    pub slot: Slot,
    pub sentence: u32,
    pub text: String,
    pub source: String,
    pub span: Span,
    pub topology: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub schema: u32,
    pub verdict: Verdict,
    pub failure_mode: Option<FailureMode>,
    /// Statement id of the goal the environment keeps out of reach.
    pub livelocked_goal: Option<StmtId>,
    pub bad_init: Option<BTreeMap<String, bool>>,
    pub core: Vec<CoreEntry>,
    pub method: Option<Method>,
    pub depth_used: Option<u32>,
    pub flags: Vec<Flag>,
    pub notes: Vec<String>,
}

impl Diagnosis {
    pub fn core_ids(&self) -> BTreeSet<StmtId> {
        self.core.iter().flat_map(|e| e.ids.iter().copied()).collect()
    }

    /// Sentence numbers of the core, topology excluded.
    pub fn core_sentences(&self) -> BTreeSet<u32> {
        self.core.iter().filter(|e| !e.topology).map(|e| e.sentence).collect()
    }

    pub fn has_topology(&self) -> bool {
        self.core.iter().any(|e| e.topology)
    }

    pub fn bad_init_word(&self, spec: &Spec) -> Option<u64> {
        self.bad_init.as_ref().map(|m| {
            m.iter()
                .filter(|(_, &v)| v)
                .filter_map(|(n, _)| spec.prop(n))
                .fold(0, |w, p| w | p.bit())
        })
    }
}

/// Verdict, failure mode and the witnesses later phases need.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub failure_mode: Option<FailureMode>,
    /// 1-based goal index for livelock.
    pub goal: Option<usize>,
    pub bad_init: Option<u64>,
    pub counterstrategy: Option<Counterstrategy>,
    pub notes: Vec<String>,
}

/// States of the counterstrategy lying on some cycle.
fn cycle_states(cs: &Counterstrategy) -> Vec<usize> {
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..cs.len()).map(|_| g.add_node(())).collect();
    for q in 0..cs.len() {
        for &t in cs.delta_s(q) {
            g.add_edge(nodes[q], nodes[t], ());
        }
    }
    let mut out = Vec::new();
    for scc in tarjan_scc(&g) {
        if scc.len() > 1 || g.contains_edge(scc[0], scc[0]) {
            out.extend(scc.iter().map(|n| n.index()));
        }
    }
    out.sort_unstable();
    out
}

pub fn classify(spec: &Spec, cfg: &EngineConfig) -> Result<Classification, EngineError> {
    let mut c = Classification {
        verdict: Verdict::Synthesizable,
        failure_mode: None,
        goal: None,
        bad_init: None,
        counterstrategy: None,
        notes: Vec::new(),
    };
    let real = match game::check_realizability(spec, &cfg.game()) {
        Err(GameError::NoAdmissibleEnvInit) => {
            c.notes.push(
                "no input assignment satisfies the environment initial condition; the specification holds vacuously"
                    .to_string(),
            );
            return Ok(c);
        }
        r => r.map_err(game_err("realizability check"))?,
    };
    let Realizability::Unrealizable { bad_init, .. } = real else {
        return Ok(c);
    };
    c.bad_init = bad_init;
    let opts = cfg.game();
    let n_goals = spec.sys_goals().len();
    if !game::check_satisfiability(spec, &opts).map_err(game_err("satisfiability check"))? {
        c.verdict = Verdict::Unsatisfiable;
        let alone = game::system_only(spec, &opts).map_err(game_err("satisfiability check"))?;
        let coop = game::cooperative(spec, &opts).map_err(game_err("satisfiability check"))?;
        if n_goals == 0 || !alone.infinite || !coop.infinite {
            c.failure_mode = Some(FailureMode::Deadlock);
        } else {
            c.failure_mode = Some(FailureMode::Livelock);
            let first_off = |v: &[bool]| v.iter().position(|&b| !b).map(|j| j + 1);
            c.goal = Some(
                first_off(&alone.goal_on_cycle)
                    .or_else(|| first_off(&coop.goal_on_cycle))
                    .unwrap_or(1),
            );
        }
        return Ok(c);
    }

    c.verdict = Verdict::Unrealizable;
    let cs = game::extract_counterstrategy(spec, &cfg.game()).map_err(game_err("counterstrategy extraction"))?;
    if let Some(&q0) = cs.initial.first() {
        c.bad_init = Some(cs.states[q0].state);
        if cs.initial.len() > 1 {
            c.notes.push(format!(
                "the counterstrategy has {} initial states; analysis starts from the lowest-numbered one",
                cs.initial.len()
            ));
        }
    }
    if cs.initial.is_empty() || !cs::deadlocked_states(&cs).is_empty() {
        c.failure_mode = Some(FailureMode::Deadlock);
    } else {
        c.failure_mode = Some(FailureMode::Livelock);
        let k = cycle_states(&cs).iter().map(|&q| cs.states[q].goal).min().unwrap_or(1);
        c.goal = Some(k);
    }
    c.counterstrategy = Some(cs);
    Ok(c)
}

/// CNF instances and the counterstrategy built along the way, for dumps.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    pub cnfs: Vec<(String, CnfInstance)>,
    pub counterstrategy: Option<Counterstrategy>,
}

/// Statement-level core plus notes for the synthetic groups it used.
pub fn map_back(spec: &Spec, groups: &[GroupKey]) -> (Vec<CoreEntry>, Vec<String>) {
    let mut ids = BTreeSet::new();
    let mut notes = BTreeSet::new();
    for g in groups {
        match g.origin {
            Origin::Statement(id) => {
                ids.insert(id);
            }
            Origin::Anchor => {
                notes.insert("the conflict depends on the starting state".to_string());
            }
            Origin::EnvPin => {
                notes.insert("the conflict depends on the environment inputs".to_string());
            }
            Origin::MovePin => {
                notes.insert("the conflict depends on the proposed move".to_string());
            }
        }
    }
    (entries(spec, &ids), notes.into_iter().collect())
}

fn entries(spec: &Spec, ids: &BTreeSet<StmtId>) -> Vec<CoreEntry> {
    let mut out = Vec::new();
    let mut topo: Option<CoreEntry> = None;
    for st in spec.statements.iter().filter(|s| ids.contains(&s.id)) {
        if st.topology {
            match &mut topo {
                Some(e) => e.ids.push(st.id),
                None => {
                    topo = Some(CoreEntry {
                        ids: vec![st.id],
                        slot: st.slot,
                        sentence: st.sentence,
                        text: TOPOLOGY_TEXT.to_string(),
                        source: st.source.clone(),
                        span: spec.topology_span.unwrap_or(st.span),
                        topology: true,
                    })
                }
            }
        } else {
            out.push(CoreEntry {
                ids: vec![st.id],
                slot: st.slot,
                sentence: st.sentence,
                text: st.text.clone(),
                source: st.source.clone(),
                span: st.span,
                topology: false,
            });
        }
    }
    out.extend(topo);
    out
}

fn base(spec: &Spec, c: &Classification) -> Diagnosis {
    Diagnosis {
        schema: SCHEMA_VERSION,
        verdict: c.verdict,
        failure_mode: c.failure_mode,
        livelocked_goal: c.goal.and_then(|k| spec.sys_goals().get(k - 1).map(|s| s.id)),
        bad_init: c.bad_init.map(|w| spec.assignment(w)),
        core: Vec::new(),
        method: None,
        depth_used: None,
        flags: Vec::new(),
        notes: c.notes.clone(),
    }
}

fn mus(cnf: &CnfInstance, cfg: &EngineConfig, phase: &'static str) -> Result<Vec<GroupKey>, EngineError> {
    sat::extract_mus(cnf, &cfg.limits()).map_err(sat_err(phase))
}

fn is_unsat(cnf: &CnfInstance, cfg: &EngineConfig, phase: &'static str) -> Result<bool, EngineError> {
    Ok(matches!(
        sat::solve(cnf, &cfg.limits()).map_err(sat_err(phase))?,
        MusResult::Unsat(_)
    ))
}

fn has_meaningful_safety(spec: &Spec, ids: &BTreeSet<StmtId>) -> bool {
    ids.iter().any(|&id| {
        spec.statement(id)
            .is_some_and(|s| s.slot == Slot::SysTrans && !s.topology)
    })
}

/// Core of an unsatisfiable specification from unrollings of the system
/// initial condition and safety. Deadlock tries depths `0..=max_depth` and
/// stops at the first unsatisfiable one; livelock solves once at
/// `max_depth` with goal `k` required at the last step.
pub fn unsat_bmc(
    spec: &Spec,
    cfg: &EngineConfig,
    mode: FailureMode,
    k: Option<usize>,
    art: &mut Artifacts,
) -> Result<(BTreeSet<StmtId>, u32, Vec<String>), EngineError> {
    let phase = "unsatisfiable core search";
    let (cnf, d) = match mode {
        FailureMode::Deadlock => {
            let mut hit = None;
            for d in 0..=cfg.max_depth {
                let cnf = sat::to_cnf(&unroll::unroll_from_init(spec, d));
                if is_unsat(&cnf, cfg, phase)? {
                    hit = Some((cnf, d));
                    break;
                }
            }
            hit.ok_or(EngineError::DepthExhausted(cfg.max_depth))?
        }
        FailureMode::Livelock => {
            let d = cfg.max_depth;
            let mut cs = unroll::unroll_from_init(spec, d);
            cs.push(unroll::goal_clause(spec, k.unwrap_or(1), d).map_err(|e| EngineError::Internal(e.to_string()))?);
            let cnf = sat::to_cnf(&cs);
            if !is_unsat(&cnf, cfg, phase)? {
                return Err(EngineError::NotUnsatAtDepth(d));
            }
            (cnf, d)
        }
    };
    let groups = mus(&cnf, cfg, phase)?;
    art.cnfs.push((format!("unrolling at depth {d}"), cnf));
    let (entries, notes) = map_back(spec, &groups);
    Ok((entries.iter().flat_map(|e| e.ids.clone()).collect(), d, notes))
}

fn union_of_cores(
    spec: &Spec,
    instances: Vec<(String, Vec<Conjunct>)>,
    cfg: &EngineConfig,
    art: &mut Artifacts,
) -> Result<(BTreeSet<StmtId>, Vec<String>), EngineError> {
    let phase = "counterstrategy core search";
    let results: Vec<Result<(String, CnfInstance, Vec<GroupKey>), EngineError>> = instances
        .into_par_iter()
        .map(|(label, conj)| {
            let cnf = sat::to_cnf(&conj);
            let g = mus(&cnf, cfg, phase)?;
            Ok((label, cnf, g))
        })
        .collect();
    let mut ids = BTreeSet::new();
    let mut notes = BTreeSet::new();
    for r in results {
        let (label, cnf, groups) = r?;
        let (entries, n) = map_back(spec, &groups);
        ids.extend(entries.iter().flat_map(|e| e.ids.clone()));
        notes.extend(n);
        art.cnfs.push((label, cnf));
    }
    Ok((ids, notes.into_iter().collect()))
}

/// Slice keeping `keep`, every environment statement and the topology.
fn support_slice(spec: &Spec, keep: &BTreeSet<StmtId>) -> Spec {
    let mut ids = keep.clone();
    for st in &spec.statements {
        if st.slot.is_env() || st.topology {
            ids.insert(st.id);
        }
    }
    spec.statement_slice(&ids).expect("ids taken from the spec")
}

/// Whether the slice keeping `keep` is synthesizable: from `anchor` with all
/// remaining goals when given, otherwise from the slice's own initial
/// conditions.
fn slice_synthesizable(
    spec: &Spec,
    keep: &BTreeSet<StmtId>,
    anchor: Option<u64>,
    cfg: &EngineConfig,
) -> Result<bool, EngineError> {
    let slice = support_slice(spec, keep);
    let phase = "core minimality check";
    match anchor {
        Some(w) => game::wins_from(&slice, w, GoalSelection::All, &cfg.game()).map_err(game_err(phase)),
        None => match game::check_realizability(&slice, &cfg.game()) {
            Err(GameError::NoAdmissibleEnvInit) => Ok(true),
            r => Ok(r.map_err(game_err(phase))? == Realizability::Realizable),
        },
    }
}

/// Goals the iterated check keeps: none for deadlock, otherwise goal `k`,
/// otherwise all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GoalKeep {
    None,
    One(usize),
    All,
}

fn goal_ids(spec: &Spec, g: GoalKeep) -> BTreeSet<StmtId> {
    let goals = spec.sys_goals();
    match g {
        GoalKeep::None => BTreeSet::new(),
        GoalKeep::One(k) => goals.get(k - 1).map(|s| s.id).into_iter().collect(),
        GoalKeep::All => goals.iter().map(|s| s.id).collect(),
    }
}

/// Iterated realizability from a fixed state: drop each system safety
/// statement in ascending id order unless dropping it makes the slice
/// synthesizable. Returns the surviving statements and the goals kept.
pub fn unreal_iterate(
    spec: &Spec,
    bad_init: u64,
    mode: FailureMode,
    k: Option<usize>,
    cfg: &EngineConfig,
) -> Result<(BTreeSet<StmtId>, Vec<String>), EngineError> {
    let phase = "iterated realizability";
    let safety: Vec<StmtId> = spec
        .in_slot(Slot::SysTrans)
        .filter(|s| !s.topology)
        .map(|s| s.id)
        .collect();
    let all: BTreeSet<StmtId> = safety.iter().copied().collect();

    let mut order = Vec::new();
    if mode == FailureMode::Deadlock {
        order.push(GoalKeep::None);
    }
    if let Some(k) = k.filter(|&k| k >= 1 && k <= spec.sys_goals().len()) {
        order.push(GoalKeep::One(k));
    }
    order.push(GoalKeep::All);
    let mut notes = Vec::new();
    let mut chosen = None;
    for g in order {
        let keep: BTreeSet<StmtId> = all.union(&goal_ids(spec, g)).copied().collect();
        if !slice_synthesizable(spec, &keep, Some(bad_init), cfg)? {
            chosen = Some(g);
            break;
        }
    }
    let Some(goals) = chosen else {
        return Err(EngineError::NotUnsynthesizable);
    };
    match goals {
        GoalKeep::None if mode == FailureMode::Livelock => {
            notes.push("the system can be forced into deadlock from the starting state".to_string())
        }
        GoalKeep::All => {
            notes.push("no single goal is unsynthesizable from the starting state; all goals are kept".to_string())
        }
        GoalKeep::One(_) if mode == FailureMode::Deadlock => notes.push(
            "the system cannot be forced into deadlock from the starting state; the blocked goal is kept".to_string(),
        ),
        _ => {}
    }
    let gids = goal_ids(spec, goals);
    let unsynth = |s: &BTreeSet<StmtId>| -> Result<bool, EngineError> {
        let keep: BTreeSet<StmtId> = s.union(&gids).copied().collect();
        Ok(!slice_synthesizable(spec, &keep, Some(bad_init), cfg)?)
    };

    let mut current = all.clone();
    let mut pending: Vec<StmtId> = safety.clone();
    while !pending.is_empty() {
        if cfg.parallel && pending.len() > 1 {
            let results: Vec<Result<bool, EngineError>> = pending
                .par_iter()
                .map(|i| {
                    let mut s = current.clone();
                    s.remove(i);
                    unsynth(&s)
                })
                .collect();
            let mut drop_at = None;
            for (pos, r) in results.into_iter().enumerate() {
                if r? {
                    drop_at = Some(pos);
                    break;
                }
            }
            match drop_at {
                Some(pos) => {
                    current.remove(&pending[pos]);
                    pending.drain(..=pos);
                }
                None => pending.clear(),
            }
        } else {
            let i = pending.remove(0);
            let mut s = current.clone();
            s.remove(&i);
            if unsynth(&s)? {
                debug!("{phase}: statement {i} is not needed");
                current = s;
            }
        }
    }
    current.extend(gids);
    Ok((current, notes))
}

fn livelock_depth(cfg: &EngineConfig, cs: &Counterstrategy) -> u32 {
    cfg.livelock_depth
        .unwrap_or_else(|| (cs::diameter_sum(cs) as u32).max(15))
}

fn unreal_bmc(
    spec: &Spec,
    c: &Classification,
    cfg: &EngineConfig,
    d: &mut Diagnosis,
    art: &mut Artifacts,
) -> Result<BTreeSet<StmtId>, EngineError> {
    let cs = c
        .counterstrategy
        .as_ref()
        .expect("unrealizable classification has a counterstrategy");
    match c.failure_mode {
        Some(FailureMode::Deadlock) if cs.initial.is_empty() => {
            d.method = Some(Method::CounterstrategySat);
            d.notes.push(format!(
                "no system initial state is compatible with the initial input {}",
                spec.describe(cs.x0, spec.input_mask())
            ));
            let mut conj = vec![Conjunct {
                origin: Origin::EnvPin,
                step: 0,
                expr: unroll::input_formula(spec, cs.x0, 0),
            }];
            conj.extend(spec.in_slot(Slot::SysInit).map(|st| Conjunct {
                origin: Origin::Statement(st.id),
                step: 0,
                expr: unroll::instantiate(&st.expr, 0),
            }));
            let (ids, notes) = union_of_cores(spec, vec![("initial condition".to_string(), conj)], cfg, art)?;
            d.notes.extend(notes);
            Ok(ids)
        }
        Some(FailureMode::Deadlock) => {
            d.method = Some(Method::CounterstrategySat);
            let mut instances = Vec::new();
            for q in cs::deadlocked_states(cs) {
                let conj = unroll::deadlock_formula(spec, cs.states[q].state, cs.delta_e(q))
                    .map_err(|e| EngineError::Internal(format!("counterstrategy state {q}: {e}")))?;
                instances.push((format!("deadlock at counterstrategy state {q}"), conj));
            }
            let (ids, notes) = union_of_cores(spec, instances, cfg, art)?;
            d.notes.extend(notes);
            Ok(ids)
        }
        _ => {
            let k = c.goal.unwrap_or(1);
            let fallback = |d: &mut Diagnosis, why: String| -> Result<BTreeSet<StmtId>, EngineError> {
                d.notes.push(why);
                d.method = Some(Method::IteratedRealizability);
                let start = cs.states[cs.initial[0]].state;
                let (ids, notes) = unreal_iterate(spec, start, FailureMode::Livelock, Some(k), cfg)?;
                d.notes.extend(notes);
                Ok(ids)
            };
            if !cs::is_countertrace(cs) {
                return fallback(
                    d,
                    "the counterstrategy is not a countertrace; the core comes from iterated realizability checks"
                        .to_string(),
                );
            }
            let cycles = match cs::preventing_cycles(cs, k, cfg.cycle_factor) {
                Ok(c) if !c.is_empty() => c,
                Ok(_) | Err(CsError::GoalNotPrevented(_)) => {
                    return fallback(d, format!("no cycle of the counterstrategy keeps goal {k} away"))
                }
                Err(e @ CsError::TooManyCycles(_)) => return fallback(d, e.to_string()),
            };
            d.method = Some(Method::CounterstrategySat);
            let depth = livelock_depth(cfg, cs);
            d.depth_used = Some(depth);
            let mut instances = Vec::new();
            for cyc in &cycles {
                let inputs: Vec<u64> = cyc.states.iter().map(|&q| cs.gamma_x(q)).collect();
                let start = cs.states[cyc.states[0]].state;
                let conj = unroll::livelock_formula(spec, start, &inputs, k, depth)
                    .map_err(|e: UnrollError| EngineError::Internal(e.to_string()))?;
                let cnf = sat::to_cnf(&conj);
                if !is_unsat(&cnf, cfg, "counterstrategy core search")? {
                    return fallback(
                        d,
                        format!("goal {k} is reachable within {depth} steps along a preventing cycle"),
                    );
                }
                instances.push((format!("preventing cycle {:?} at depth {depth}", cyc.states), conj));
            }
            let (ids, notes) = union_of_cores(spec, instances, cfg, art)?;
            d.notes.extend(notes);
            Ok(ids)
        }
    }
}

/// Statement-level minimality check for a SAT-derived core whose slice is
/// known to be unsynthesizable. Adds the `group-minimal` flag when some
/// statement can be dropped.
fn check_statement_minimality(
    spec: &Spec,
    core: &BTreeSet<StmtId>,
    anchor: Option<u64>,
    cfg: &EngineConfig,
    d: &mut Diagnosis,
) -> Result<(), EngineError> {
    for &id in core {
        let st = spec.statement(id).expect("core ids come from the spec");
        if st.topology {
            continue;
        }
        let mut smaller = core.clone();
        smaller.remove(&id);
        if !slice_synthesizable(spec, &smaller, anchor, cfg)? {
            if !d.flags.contains(&Flag::GroupMinimal) {
                d.flags.push(Flag::GroupMinimal);
            }
            d.notes.push(format!(
                "group-minimal: statement {id} (\"{}\") can be dropped and the rest stays unsynthesizable",
                st.text
            ));
        }
    }
    Ok(())
}

/// Replaces a SAT-derived core whose slice turns out synthesizable. Cores
/// with no system safety statement are kept for the caller to flag, since
/// they mean the unrolling was too shallow.
fn validate_core(
    spec: &Spec,
    c: &Classification,
    core: BTreeSet<StmtId>,
    cfg: &EngineConfig,
    d: &mut Diagnosis,
) -> Result<BTreeSet<StmtId>, EngineError> {
    let anchor = if c.verdict == Verdict::Unrealizable {
        c.bad_init
    } else {
        None
    };
    if !slice_synthesizable(spec, &core, anchor, cfg)? {
        check_statement_minimality(spec, &core, anchor, cfg, d)?;
        return Ok(core);
    }
    let mode = c.failure_mode.unwrap_or(FailureMode::Deadlock);
    match c.bad_init {
        Some(start) if has_meaningful_safety(spec, &core) => {
            d.notes.push(
                "the unrolling core is synthesizable on its own; using iterated realizability checks instead"
                    .to_string(),
            );
            d.method = Some(Method::IteratedRealizability);
            d.depth_used = None;
            let (ids, notes) = unreal_iterate(spec, start, mode, c.goal, cfg)?;
            d.notes.extend(notes);
            Ok(ids)
        }
        _ => {
            d.notes.push("the core on its own is synthesizable".to_string());
            if mode == FailureMode::Deadlock && !d.flags.contains(&Flag::PossiblyNotMeaningful) {
                d.flags.push(Flag::PossiblyNotMeaningful);
            }
            Ok(core)
        }
    }
}

/// Verdict and failure mode without a core.
pub fn check(spec: &Spec, cfg: &EngineConfig) -> Result<Diagnosis, EngineError> {
    let c = classify(spec, cfg)?;
    Ok(base(spec, &c))
}

pub fn explain(spec: &Spec, cfg: &EngineConfig) -> Result<Diagnosis, EngineError> {
    explain_with_artifacts(spec, cfg).map(|(d, _)| d)
}

pub fn explain_with_artifacts(spec: &Spec, cfg: &EngineConfig) -> Result<(Diagnosis, Artifacts), EngineError> {
    let c = classify(spec, cfg)?;
    info!("classified as {:?} {:?}", c.verdict, c.failure_mode);
    let mut d = base(spec, &c);
    let mut art = Artifacts {
        counterstrategy: c.counterstrategy.clone(),
        ..Artifacts::default()
    };
    let mode = c.failure_mode.unwrap_or(FailureMode::Deadlock);
    let core = match c.verdict {
        Verdict::Synthesizable => return Ok((d, art)),
        Verdict::Unsatisfiable => match unsat_bmc(spec, cfg, mode, c.goal, &mut art) {
            Ok((ids, depth, notes)) => {
                d.method = Some(Method::SatUnroll);
                d.depth_used = Some(depth);
                d.notes.extend(notes);
                validate_core(spec, &c, ids, cfg, &mut d)?
            }
            Err(e @ (EngineError::DepthExhausted(_) | EngineError::NotUnsatAtDepth(_))) => {
                d.notes
                    .push(format!("{e}; falling back to iterated realizability checks"));
                d.method = Some(Method::IteratedRealizability);
                let start = c.bad_init.ok_or_else(|| {
                    EngineError::Internal("no initial state to anchor iterated realizability".to_string())
                })?;
                let (ids, notes) = unreal_iterate(spec, start, mode, c.goal, cfg)?;
                d.notes.extend(notes);
                ids
            }
            Err(e) => return Err(e),
        },
        Verdict::Unrealizable => {
            let ids = unreal_bmc(spec, &c, cfg, &mut d, &mut art)?;
            if d.method == Some(Method::CounterstrategySat) {
                validate_core(spec, &c, ids, cfg, &mut d)?
            } else {
                ids
            }
        }
    };
    if mode == FailureMode::Livelock && !has_meaningful_safety(spec, &core) {
        d.flags.push(Flag::PossiblyNotMeaningful);
        d.notes.push(
            "the core contains no system safety statement besides the topology; a deeper unrolling may be needed"
                .to_string(),
        );
    }
    d.core = entries(spec, &core);
    Ok((d, art))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spec::parse_spec;

    fn run(text: &str) -> Diagnosis {
        explain(&parse_spec(text).unwrap(), &EngineConfig::default()).unwrap()
    }

    #[test]
    fn kitchen_deadlock_core() {
        let d = run(fixtures::KITCHEN_DEADLOCK);
        assert_eq!(d.verdict, Verdict::Unsatisfiable);
        assert_eq!(d.failure_mode, Some(FailureMode::Deadlock));
        assert_eq!(d.core_sentences(), BTreeSet::from([1, 2]));
        assert!(!d.has_topology());
        assert_eq!(d.depth_used, Some(0));
        assert_eq!(d.method, Some(Method::SatUnroll));
    }

    #[test]
    fn hospital_patrol_core() {
        let d = run(fixtures::HOSPITAL_PATROL);
        assert_eq!(d.verdict, Verdict::Unsatisfiable);
        assert_eq!(d.failure_mode, Some(FailureMode::Livelock));
        assert_eq!(d.core_sentences(), BTreeSet::from([1, 2, 4]));
        assert!(d.has_topology());
        assert!(d.flags.is_empty(), "{:?}", d.notes);
    }

    #[test]
    fn hallway_deadlock_core() {
        let d = run(fixtures::HALLWAY_DEADLOCK);
        assert_eq!(d.verdict, Verdict::Unrealizable);
        assert_eq!(d.failure_mode, Some(FailureMode::Deadlock));
        assert_eq!(d.core_ids(), BTreeSet::from([2, 3]));
    }

    #[test]
    fn hallway_livelock_core() {
        let d = run(fixtures::HALLWAY_LIVELOCK);
        assert_eq!(d.verdict, Verdict::Unrealizable);
        assert_eq!(d.failure_mode, Some(FailureMode::Livelock));
        assert_eq!(d.method, Some(Method::CounterstrategySat));
        assert_eq!(d.livelocked_goal, Some(4));
        let ids = d.core_ids();
        assert!(ids.contains(&2) && !ids.contains(&3));
        assert!(d.has_topology());
    }

    #[test]
    fn house_fixtures() {
        let d = run(fixtures::HOUSE_DEADLOCK);
        assert_eq!(d.failure_mode, Some(FailureMode::Deadlock));
        assert_eq!(d.core_ids(), BTreeSet::from([4, 5, 6, 7, 8]));
        let d = run(fixtures::HOUSE_LIVELOCK);
        assert_eq!(d.failure_mode, Some(FailureMode::Livelock));
        assert_eq!(d.core_sentences(), BTreeSet::from([3, 4, 8]));
        assert!(d.has_topology());
    }

    #[test]
    fn synthesizable_has_empty_core() {
        let d = run("[INPUT]\nx\n[OUTPUT]\ny\n[SYS_TRANS]\nnext(y) <-> next(x)\n[SYS_LIVENESS]\ny | !y\n");
        assert_eq!(d.verdict, Verdict::Synthesizable);
        assert!(d.core.is_empty());
        assert!(d.failure_mode.is_none());
    }

    #[test]
    fn iterated_core_is_the_single_conflicting_safety() {
        let spec = parse_spec(
            "[OUTPUT]\na\nb\n[SYS_INIT]\n!a & !b\n[SYS_TRANS]\n!next(a)\nnext(b) | !next(b)\n[SYS_LIVENESS]\na\n",
        )
        .unwrap();
        let (core, _) = unreal_iterate(&spec, 0, FailureMode::Livelock, Some(1), &EngineConfig::default()).unwrap();
        assert_eq!(core, BTreeSet::from([2, 4]));
        let par = EngineConfig {
            parallel: true,
            ..EngineConfig::default()
        };
        assert_eq!(
            unreal_iterate(&spec, 0, FailureMode::Livelock, Some(1), &par)
                .unwrap()
                .0,
            core
        );
    }

    #[test]
    fn non_countertrace_livelock_falls_back() {
        // the environment blocks whichever side the robot is on
        let text = "\
[INPUT]
block_l
block_r

[OUTPUT]
l
m
r
goal_l
goal_r

[ENV_TRANS]
!(next(block_l) & next(block_r))

[SYS_INIT]
m

[SYS_TRANS]
next(block_l) -> !next(goal_l)
next(block_r) -> !next(goal_r)

[SYS_LIVENESS]
goal_l | goal_r

[TOPOLOGY]
region l
region m
region r
region goal_l
region goal_r
adj l m
adj m r
adj l goal_l
adj r goal_r
";
        let spec = parse_spec(text).unwrap();
        let c = classify(&spec, &EngineConfig::default()).unwrap();
        let cs = c.counterstrategy.as_ref().unwrap();
        assert!(!cs::is_countertrace(cs), "{}", cs.dump(&spec));
        let d = explain(&spec, &EngineConfig::default()).unwrap();
        assert_eq!(d.method, Some(Method::IteratedRealizability));
        assert!(d.notes.iter().any(|n| n.contains("not a countertrace")));
    }
}
