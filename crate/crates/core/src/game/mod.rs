//! Explicit-state GR(1) games: realizability, cooperative satisfiability and
//! environment counterstrategies.

pub(crate) mod arena;
mod solve;
mod strategy;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::expr::Expr;
use crate::spec::{Atom, Slot, Spec};
use crate::Budget;

pub use arena::{Arena, Move, Roots};
pub use strategy::{Counterstrategy, CsState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("{atoms} propositions exceed the state-space cap of {cap}")]
    StateSpaceTooLarge { atoms: usize, cap: usize },
    #[error("no input assignment satisfies the environment initial condition")]
    NoAdmissibleEnvInit,
    #[error("specification is realizable; there is no counterstrategy")]
    SpecRealizable,
    #[error("game solving exceeded its time budget")]
    Timeout,
}

#[derive(Clone, Copy, Debug)]
pub struct GameOptions {
    /// Largest number of propositions that will be enumerated.
    pub atom_cap: usize,
    pub budget: Budget,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            atom_cap: 20,
            budget: Budget::unlimited(),
        }
    }
}

/// Which system liveness conditions take part in a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GoalSelection {
    All,
    /// A single trivially true goal.
    Trivial,
    /// Only goal `k` (1-based).
    Only(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realizability {
    Realizable,
    /// `x0` is a losing initial input; `bad_init` the lowest initial state
    /// compatible with it, if any exists.
    Unrealizable {
        x0: u64,
        bad_init: Option<u64>,
    },
}

fn goal_sets(spec: &Spec, a: &Arena, sel: GoalSelection) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let all_true = || vec![vec![true; a.len()]];
    let sys: Vec<Vec<bool>> = match sel {
        GoalSelection::Trivial => all_true(),
        GoalSelection::Only(k) => match spec.sys_goals().get(k.wrapping_sub(1)) {
            Some(st) => vec![a.holds(&st.expr)],
            None => all_true(),
        },
        GoalSelection::All => {
            let g: Vec<_> = spec.sys_goals().iter().map(|st| a.holds(&st.expr)).collect();
            if g.is_empty() {
                all_true()
            } else {
                g
            }
        }
    };
    let env: Vec<Vec<bool>> = spec.env_goals().iter().map(|st| a.holds(&st.expr)).collect();
    (sys, if env.is_empty() { all_true() } else { env })
}

fn init_constraints(spec: &Spec, slot: Slot) -> Vec<&Expr<Atom>> {
    spec.in_slot(slot).map(|s| &s.expr).collect()
}

/// Admissible initial inputs, ascending.
fn initial_inputs(spec: &Spec) -> Vec<u64> {
    let bits: Vec<usize> = (0..spec.n_inputs).collect();
    arena::solutions(&bits, 0, 0, &init_constraints(spec, Slot::EnvInit), false)
}

/// System initial states compatible with the initial input `x0`.
fn initial_states(spec: &Spec, x0: u64) -> Vec<u64> {
    let bits: Vec<usize> = (spec.n_inputs..spec.n_props()).collect();
    arena::solutions(&bits, x0, 0, &init_constraints(spec, Slot::SysInit), false)
}

struct Solved {
    arena: Arena,
    sys_win: Vec<bool>,
}

fn solve_init(spec: &Spec, opts: &GameOptions) -> Result<(Solved, Vec<u64>), GameError> {
    let xs = initial_inputs(spec);
    if xs.is_empty() {
        return Err(GameError::NoAdmissibleEnvInit);
    }
    let arena = Arena::build(spec, Roots::Init, true, opts)?;
    let (sys, env) = goal_sets(spec, &arena, GoalSelection::All);
    let sys_win = solve::sys_winning(&arena, &sys, &env, &opts.budget)?;
    Ok((Solved { arena, sys_win }, xs))
}

fn losing_inputs(spec: &Spec, s: &Solved, xs: &[u64]) -> Vec<u64> {
    xs.iter()
        .copied()
        .filter(|&x| {
            initial_states(spec, x).iter().all(|&w| {
                let i = s.arena.index_of(w).expect("initial state explored");
                !s.sys_win[i as usize]
            })
        })
        .collect()
}

/// Realizable iff for every admissible initial input some compatible system
/// initial state lies in the system winning region.
pub fn check_realizability(spec: &Spec, opts: &GameOptions) -> Result<Realizability, GameError> {
    let (solved, xs) = solve_init(spec, opts)?;
    Ok(match losing_inputs(spec, &solved, &xs).first() {
        None => Realizability::Realizable,
        Some(&x0) => Realizability::Unrealizable {
            x0,
            bad_init: initial_states(spec, x0).first().copied(),
        },
    })
}

/// Initial inputs beyond this many are not compared when picking the
/// counterstrategy to report.
const MAX_X0_CANDIDATES: usize = 64;

/// Extracts a counterstrategy. Among losing initial inputs the one giving
/// the fewest states wins; ties prefer an initial input the environment keeps
/// playing, then the lowest input.
pub fn extract_counterstrategy(spec: &Spec, opts: &GameOptions) -> Result<Counterstrategy, GameError> {
    let (solved, xs) = solve_init(spec, opts)?;
    let losing = losing_inputs(spec, &solved, &xs);
    if losing.is_empty() {
        return Err(GameError::SpecRealizable);
    }
    let a = &solved.arena;
    let (sys, env) = goal_sets(spec, a, GoalSelection::All);
    let layers = solve::env_layers(a, &sys, &env, &opts.budget)?;
    debug_assert_eq!(layers.winning(), solved.sys_win.iter().map(|w| !w).collect::<Vec<_>>());
    let mut best: Option<((usize, bool, u64), Counterstrategy)> = None;
    for &x0 in losing.iter().take(MAX_X0_CANDIDATES) {
        let init: Vec<u32> = initial_states(spec, x0)
            .iter()
            .map(|&w| a.index_of(w).expect("initial state explored"))
            .collect();
        let cs = strategy::unfold(a, &layers, &env, spec, x0, &init);
        let switches = cs.initial.first().is_some_and(|&q| cs.delta_e(q) != x0);
        let key = (cs.len(), switches, x0);
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, cs));
        }
    }
    Ok(best.expect("at least one losing input").1)
}

/// Whether the system wins from a fixed state, using the selected goals.
pub fn wins_from(spec: &Spec, state: u64, goals: GoalSelection, opts: &GameOptions) -> Result<bool, GameError> {
    let a = Arena::build(spec, Roots::State(state), true, opts)?;
    let (sys, env) = goal_sets(spec, &a, goals);
    let win = solve::sys_winning(&a, &sys, &env, &opts.budget)?;
    Ok(win[a.roots[0] as usize])
}

/// Cycle structure of a one-player exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleReport {
    /// Some reachable cycle exists, so an infinite run exists.
    pub infinite: bool,
    /// One reachable cycle meets every system and environment goal.
    pub all_goals: bool,
    /// Per system goal, whether some reachable cycle meets it.
    pub goal_on_cycle: Vec<bool>,
}

fn cycle_report(spec: &Spec, a: &Arena) -> CycleReport {
    let mut g = DiGraph::<(), ()>::with_capacity(a.len(), 0);
    let nodes: Vec<_> = (0..a.len()).map(|_| g.add_node(())).collect();
    for (s, ms) in a.moves.iter().enumerate() {
        for m in ms {
            for &t in &m.succ {
                g.update_edge(nodes[s], nodes[t as usize], ());
            }
        }
    }
    let sys: Vec<Vec<bool>> = spec.sys_goals().iter().map(|st| a.holds(&st.expr)).collect();
    let env: Vec<Vec<bool>> = spec.env_goals().iter().map(|st| a.holds(&st.expr)).collect();
    let mut report = CycleReport {
        infinite: false,
        all_goals: false,
        goal_on_cycle: vec![false; sys.len()],
    };
    for scc in tarjan_scc(&g) {
        if scc.len() == 1 && !g.contains_edge(scc[0], scc[0]) {
            continue;
        }
        report.infinite = true;
        let hits = |set: &Vec<bool>| scc.iter().any(|n| set[n.index()]);
        for (j, b) in sys.iter().enumerate() {
            report.goal_on_cycle[j] |= hits(b);
        }
        if sys.iter().all(hits) && env.iter().all(hits) {
            report.all_goals = true;
        }
    }
    report
}

/// Cooperative exploration: one player controls everything, both transition
/// relations hold, and runs start in a state meeting both initial conditions.
pub fn cooperative(spec: &Spec, opts: &GameOptions) -> Result<CycleReport, GameError> {
    let a = Arena::build(spec, Roots::Init, true, opts)?;
    Ok(cycle_report(spec, &a))
}

/// Exploration under system safety alone: inputs are free at every step.
pub fn system_only(spec: &Spec, opts: &GameOptions) -> Result<CycleReport, GameError> {
    let a = Arena::build(spec, Roots::SysInit, false, opts)?;
    Ok(cycle_report(spec, &a))
}

/// Satisfiable iff some admissible run satisfies every goal of both players.
pub fn check_satisfiability(spec: &Spec, opts: &GameOptions) -> Result<bool, GameError> {
    Ok(cooperative(spec, opts)?.all_goals)
}
