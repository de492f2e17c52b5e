//! Interactive play: the environment follows its counterstrategy, the user
//! moves the robot, and illegal moves are explained by one-step cores.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cs;
use crate::engine::{map_back, CoreEntry, EngineConfig};
use crate::expr::Expr;
use crate::game::arena::solutions;
use crate::game::{self, Counterstrategy, GameError, GameOptions};
use crate::sat::{self, Limits, MusResult, SatError};
use crate::spec::{Atom, Slot, Spec};
use crate::unroll;
use crate::Budget;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("malformed move: {0}")]
    MalformedMove(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("no state satisfies the initial conditions")]
    NoInitialState,
    #[error("move check failed: {0}")]
    Sat(#[from] SatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Counterstrategy,
    Sandbox,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalView {
    pub id: u32,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub state: BTreeMap<String, bool>,
    #[serde(rename = "move")]
    pub proposed: BTreeMap<String, bool>,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub v: u32,
    pub state: BTreeMap<String, bool>,
    pub pending_inputs: BTreeMap<String, bool>,
    pub goal: Option<GoalView>,
    pub history: Vec<HistoryEntry>,
    pub mode: Mode,
    pub banner: Option<String>,
    /// Region names in map order when the spec has a workspace.
    pub regions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub accepted: bool,
    pub core: Vec<CoreEntry>,
    pub notes: Vec<String>,
}

pub struct Session {
    spec: Arc<Spec>,
    cs: Option<Counterstrategy>,
    mode: Mode,
    /// Current counterstrategy state in counterstrategy mode.
    q: Option<usize>,
    state: u64,
    pending: u64,
    /// 0-based index of the goal being pursued.
    goal: usize,
    history: Vec<HistoryEntry>,
    banner: Option<String>,
    rng: ChaCha8Rng,
    budget_ms: u64,
}

fn exprs(spec: &Spec, slot: Slot) -> Vec<&Expr<Atom>> {
    spec.in_slot(slot).map(|s| &s.expr).collect()
}

impl Session {
    /// Anchors at the first initial state of the counterstrategy, or starts in
    /// sandbox mode when the specification is realizable.
    pub fn new(spec: Arc<Spec>, cfg: &EngineConfig, seed: u64) -> Result<Session, SessionError> {
        let opts = GameOptions {
            atom_cap: cfg.atom_cap,
            budget: Budget::from_millis(cfg.budget_ms),
        };
        let mut s = Session {
            spec: spec.clone(),
            cs: None,
            mode: Mode::Sandbox,
            q: None,
            state: 0,
            pending: 0,
            goal: 0,
            history: Vec::new(),
            banner: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget_ms: cfg.budget_ms,
        };
        match game::extract_counterstrategy(&spec, &opts) {
            Ok(c) if !c.initial.is_empty() => {
                let q = c.initial[0];
                s.state = c.states[q].state;
                s.pending = c.delta_e(q);
                s.goal = c.states[q].goal.saturating_sub(1);
                s.mode = Mode::Counterstrategy;
                s.q = Some(q);
                if !cs::deadlocked_states(&c).is_empty() {
                    s.banner = Some("the environment can force a deadlock".to_string());
                }
                s.cs = Some(c);
            }
            Ok(_) => {
                s.banner = Some(
                    "sandbox mode: the initial conditions conflict, so play starts from an arbitrary state".to_string(),
                );
                s.start_sandbox(false)?;
            }
            Err(GameError::SpecRealizable) => {
                s.banner = Some("sandbox mode: the specification is realizable".to_string());
                s.start_sandbox(true)?;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(s)
    }

    fn start_sandbox(&mut self, use_sys_init: bool) -> Result<(), SessionError> {
        let spec = self.spec.clone();
        let in_bits: Vec<usize> = (0..spec.n_inputs).collect();
        let out_bits: Vec<usize> = (spec.n_inputs..spec.n_props()).collect();
        let env_i = exprs(&spec, Slot::EnvInit);
        let sys_i = if use_sys_init {
            exprs(&spec, Slot::SysInit)
        } else {
            Vec::new()
        };
        let start = solutions(&in_bits, 0, 0, &env_i, false)
            .into_iter()
            .find_map(|x| solutions(&out_bits, x, 0, &sys_i, false).first().copied())
            .ok_or(SessionError::NoInitialState)?;
        self.state = start;
        self.mode = Mode::Sandbox;
        self.q = None;
        self.pending = self.draw_inputs().unwrap_or(start & spec.input_mask());
        Ok(())
    }

    /// Uniform choice among the admissible next inputs.
    fn draw_inputs(&mut self) -> Option<u64> {
        let in_bits: Vec<usize> = (0..self.spec.n_inputs).collect();
        let env_t = exprs(&self.spec, Slot::EnvTrans);
        let options = solutions(&in_bits, 0, self.state, &env_t, true);
        options.choose(&mut self.rng).copied()
    }

    pub fn spec(&self) -> &Spec {
        &self.spec
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn state_word(&self) -> u64 {
        self.state
    }

    pub fn pending_inputs(&self) -> u64 {
        self.pending
    }

    pub fn snapshot(&self) -> Snapshot {
        let spec = &self.spec;
        let inputs = |w: u64| -> BTreeMap<String, bool> {
            spec.inputs()
                .iter()
                .enumerate()
                .map(|(i, p)| (p.name.clone(), w >> i & 1 == 1))
                .collect()
        };
        Snapshot {
            v: SNAPSHOT_VERSION,
            state: spec.assignment(self.state),
            pending_inputs: inputs(self.pending),
            goal: spec.sys_goals().get(self.goal).map(|g| GoalView {
                id: g.id,
                text: g.text.clone(),
            }),
            history: self.history.clone(),
            mode: self.mode,
            banner: self.banner.clone(),
            regions: spec.workspace.as_ref().map(|w| w.regions.clone()).unwrap_or_default(),
        }
    }

    fn parse_outputs(&self, proposed: &BTreeMap<String, bool>) -> Result<u64, SessionError> {
        let spec = &self.spec;
        let mut word = 0;
        for (name, &v) in proposed {
            let p = spec
                .prop(name)
                .ok_or_else(|| SessionError::MalformedMove(format!("unknown proposition {name}")))?;
            if spec.is_input(p) {
                return Err(SessionError::MalformedMove(format!("{name} is an environment input")));
            }
            if v {
                word |= p.bit();
            }
        }
        if let Some(missing) = spec.outputs().iter().find(|p| !proposed.contains_key(&p.name)) {
            return Err(SessionError::MalformedMove(format!("no value for {}", missing.name)));
        }
        Ok(word)
    }

    fn limits(&self) -> Limits {
        Limits {
            max_conflicts: None,
            budget: Budget::from_millis(self.budget_ms),
        }
    }

    /// Checks `proposed` against the system safety statements. Unless `dry`,
    /// an accepted move advances the game and every attempt is recorded.
    pub fn try_move(&mut self, proposed: &BTreeMap<String, bool>, dry: bool) -> Result<MoveOutcome, SessionError> {
        let outs = self.parse_outputs(proposed)?;
        let spec = self.spec.clone();
        let cnf = sat::to_cnf(&unroll::move_formula(&spec, self.state, self.pending, outs));
        let outcome = match sat::solve(&cnf, &self.limits())? {
            MusResult::Sat(_) => {
                let next = self.pending | outs;
                let legal = spec.in_slot(Slot::SysTrans).all(|st| {
                    st.expr.eval(&|a: &Atom| {
                        let w = if a.next { next } else { self.state };
                        w & a.prop.bit() != 0
                    })
                });
                if !legal {
                    return Err(SessionError::MalformedMove(
                        "solver accepted a move that violates a safety statement".to_string(),
                    ));
                }
                MoveOutcome {
                    accepted: true,
                    core: Vec::new(),
                    notes: Vec::new(),
                }
            }
            MusResult::Unsat(_) => {
                let groups = sat::extract_mus(&cnf, &self.limits())?;
                let (mut core, mut notes) = map_back(&spec, &groups);
                let deadlocked = self
                    .q
                    .zip(self.cs.as_ref())
                    .is_some_and(|(q, c)| c.delta_s(q).is_empty());
                if deadlocked {
                    if let Ok(conj) = unroll::deadlock_formula(&spec, self.state, self.pending) {
                        let groups = sat::extract_mus(&sat::to_cnf(&conj), &self.limits())?;
                        let (more, _) = map_back(&spec, &groups);
                        for e in more {
                            if !core.contains(&e) {
                                core.push(e);
                            }
                        }
                        core.sort_by_key(|e| (e.topology, e.ids[0]));
                    }
                    notes.push("no move is legal from this state".to_string());
                }
                MoveOutcome {
                    accepted: false,
                    core,
                    notes,
                }
            }
        };
        if !dry {
            self.history.push(HistoryEntry {
                state: spec.assignment(self.state),
                proposed: proposed.clone(),
                accepted: outcome.accepted,
            });
            if outcome.accepted {
                self.advance(self.pending | outs);
            }
        }
        Ok(outcome)
    }

    fn advance(&mut self, next: u64) {
        let spec = self.spec.clone();
        self.state = next;
        if let (Some(q), Some(c)) = (self.q, self.cs.as_ref()) {
            if let Some(&t) = c.delta_s(q).iter().find(|&&t| c.states[t].state == next) {
                self.q = Some(t);
                self.pending = c.delta_e(t);
                self.goal = c.states[t].goal.saturating_sub(1);
                return;
            }
            self.mode = Mode::Sandbox;
            self.q = None;
            self.banner = Some("sandbox mode: the move left the counterstrategy".to_string());
        }
        let goals = spec.sys_goals();
        if let Some(g) = goals.get(self.goal) {
            let reached = g.expr.eval(&|a: &Atom| next & a.prop.bit() != 0);
            if reached {
                self.goal = (self.goal + 1) % goals.len();
            }
        }
        self.pending = match self.draw_inputs() {
            Some(x) => x,
            None => {
                self.banner = Some("sandbox mode: the environment has no admissible move".to_string());
                next & spec.input_mask()
            }
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spec::parse_spec;

    fn session(text: &str) -> Session {
        Session::new(Arc::new(parse_spec(text).unwrap()), &EngineConfig::default(), 7).unwrap()
    }

    fn stay(s: &Session) -> BTreeMap<String, bool> {
        s.snapshot()
            .state
            .into_iter()
            .filter(|(n, _)| !s.spec().is_input(s.spec().prop(n).unwrap()))
            .collect()
    }

    #[test]
    fn deadlock_session_rejects_every_move() {
        let mut s = session(fixtures::HALLWAY_DEADLOCK);
        let snap = s.snapshot();
        assert_eq!(snap.mode, Mode::Counterstrategy);
        assert!(snap.state["r5"] && snap.state["camera"]);
        assert!(snap.pending_inputs["person"]);
        let out = s.try_move(&stay(&s), false).unwrap();
        assert!(!out.accepted);
        let ids: Vec<u32> = out.core.iter().flat_map(|e| e.ids.clone()).collect();
        assert_eq!(ids, vec![2, 3]);
        assert_eq!(s.snapshot().history.len(), 1);
    }

    #[test]
    fn dry_moves_leave_state_alone() {
        let mut s = session(fixtures::HALLWAY_LIVELOCK);
        let before = s.snapshot();
        let out = s.try_move(&stay(&s), true).unwrap();
        assert!(out.accepted);
        assert_eq!(s.snapshot(), before);
        let out = s.try_move(&stay(&s), false).unwrap();
        assert!(out.accepted);
        assert_eq!(s.snapshot().history.len(), 1);
    }

    #[test]
    fn malformed_moves() {
        let mut s = session(fixtures::HALLWAY_LIVELOCK);
        let mut m = stay(&s);
        m.insert("person".to_string(), true);
        assert!(matches!(s.try_move(&m, false), Err(SessionError::MalformedMove(_))));
        let mut m = stay(&s);
        m.remove("camera");
        assert!(matches!(s.try_move(&m, false), Err(SessionError::MalformedMove(_))));
    }

    #[test]
    fn realizable_spec_plays_in_sandbox() {
        let text = "[INPUT]\nx\n[OUTPUT]\ny\n[SYS_TRANS]\nnext(y) <-> next(x)\n";
        let mut a = session(text);
        let b = session(text);
        assert_eq!(a.mode(), Mode::Sandbox);
        assert_eq!(a.snapshot(), b.snapshot());
        let want = a.pending_inputs() & 1 == 1;
        let m = BTreeMap::from([("y".to_string(), want)]);
        assert!(a.try_move(&m, false).unwrap().accepted);
        let m = BTreeMap::from([("y".to_string(), !(a.pending_inputs() & 1 == 1))]);
        assert!(!a.try_move(&m, false).unwrap().accepted);
    }
}
