use std::collections::{HashMap, VecDeque};

use super::{GameError, GameOptions};
use crate::expr::Expr;
use crate::spec::{Atom, Slot, Spec};

/// One environment choice and every system answer to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    /// Next-step input bits.
    pub input: u64,
    /// Successor state indices, ascending by state word.
    pub succ: Vec<u32>,
}

/// Explicit game graph over full assignments reachable from the roots.
#[derive(Clone, Debug)]
pub struct Arena {
    pub states: Vec<u64>,
    /// Per state, sorted by input.
    pub moves: Vec<Vec<Move>>,
    pub roots: Vec<u32>,
    index: HashMap<u64, u32>,
}

/// Assignments to the `free` bit positions of a word that satisfy every
/// constraint, in ascending numeric order. Atoms whose `next` flag equals
/// `building_next` read the word under construction; the others read `cur`.
pub(crate) fn solutions(
    free: &[usize],
    fixed: u64,
    cur: u64,
    constraints: &[&Expr<Atom>],
    building_next: bool,
) -> Vec<u64> {
    let mut out = Vec::new();
    let pending: Vec<usize> = (0..constraints.len()).collect();
    dfs(free, 0, fixed, 0, cur, constraints, building_next, &pending, &mut out);
    out.sort_unstable();
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    free: &[usize],
    depth: usize,
    word: u64,
    known: u64,
    cur: u64,
    constraints: &[&Expr<Atom>],
    building_next: bool,
    pending: &[usize],
    out: &mut Vec<u64>,
) {
    let free_mask: u64 = free.iter().fold(0, |m, &b| m | 1 << b);
    let lookup = |a: &Atom| -> Option<bool> {
        let bit = a.prop.bit();
        if a.next == building_next {
            if free_mask & bit != 0 && known & bit == 0 {
                None
            } else {
                Some(word & bit != 0)
            }
        } else {
            Some(cur & bit != 0)
        }
    };
    let mut still = Vec::with_capacity(pending.len());
    for &c in pending {
        match constraints[c].eval3(&lookup) {
            Some(false) => return,
            Some(true) => {}
            None => still.push(c),
        }
    }
    if depth == free.len() {
        debug_assert!(still.is_empty());
        out.push(word);
        return;
    }
    let bit = 1u64 << free[depth];
    for v in [false, true] {
        let w = if v { word | bit } else { word & !bit };
        dfs(
            free,
            depth + 1,
            w,
            known | bit,
            cur,
            constraints,
            building_next,
            &still,
            out,
        );
    }
}

/// Which states seed the exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Roots {
    /// Environment and system initial conditions together.
    Init,
    /// System initial conditions only; inputs are unconstrained.
    SysInit,
    /// A single fixed state.
    State(u64),
}

impl Arena {
    /// Explores every state reachable from the roots. With `env_trans` false
    /// the environment may pick any input at every step.
    pub fn build(spec: &Spec, roots: Roots, env_trans: bool, opts: &GameOptions) -> Result<Arena, GameError> {
        if spec.n_props() > opts.atom_cap {
            return Err(GameError::StateSpaceTooLarge {
                atoms: spec.n_props(),
                cap: opts.atom_cap,
            });
        }
        let in_bits: Vec<usize> = (0..spec.n_inputs).collect();
        let out_bits: Vec<usize> = (spec.n_inputs..spec.n_props()).collect();
        let env_t: Vec<&Expr<Atom>> = if env_trans {
            spec.in_slot(Slot::EnvTrans).map(|s| &s.expr).collect()
        } else {
            Vec::new()
        };
        let sys_t: Vec<&Expr<Atom>> = spec.in_slot(Slot::SysTrans).map(|s| &s.expr).collect();

        let root_words = match roots {
            Roots::State(w) => vec![w],
            Roots::Init | Roots::SysInit => {
                let env_i: Vec<&Expr<Atom>> = if roots == Roots::Init {
                    spec.in_slot(Slot::EnvInit).map(|s| &s.expr).collect()
                } else {
                    Vec::new()
                };
                let sys_i: Vec<&Expr<Atom>> = spec.in_slot(Slot::SysInit).map(|s| &s.expr).collect();
                let mut words = Vec::new();
                for x in solutions(&in_bits, 0, 0, &env_i, false) {
                    words.extend(solutions(&out_bits, x, 0, &sys_i, false));
                }
                words
            }
        };

        let mut arena = Arena {
            states: Vec::new(),
            moves: Vec::new(),
            roots: Vec::new(),
            index: HashMap::new(),
        };
        let mut queue = VecDeque::new();
        for w in root_words {
            let (i, fresh) = arena.intern(w);
            if fresh {
                queue.push_back(i);
            }
            arena.roots.push(i);
        }
        let mut sys_cache: HashMap<(u64, u64), Vec<u64>> = HashMap::new();
        while let Some(i) = queue.pop_front() {
            if arena.states.len().is_multiple_of(256) && opts.budget.expired() {
                return Err(GameError::Timeout);
            }
            let cur = arena.states[i as usize];
            let mut moves = Vec::new();
            for x in solutions(&in_bits, 0, cur, &env_t, true) {
                // ρs depends on the inputs and outputs of `cur`; cache per pair
                let outs = sys_cache
                    .entry((cur, x))
                    .or_insert_with(|| solutions(&out_bits, x, cur, &sys_t, true))
                    .clone();
                let mut succ = Vec::with_capacity(outs.len());
                for w in outs {
                    let (j, fresh) = arena.intern(w);
                    if fresh {
                        queue.push_back(j);
                    }
                    succ.push(j);
                }
                moves.push(Move { input: x, succ });
            }
            arena.moves[i as usize] = moves;
        }
        Ok(arena)
    }

    fn intern(&mut self, w: u64) -> (u32, bool) {
        if let Some(&i) = self.index.get(&w) {
            return (i, false);
        }
        let i = self.states.len() as u32;
        self.states.push(w);
        self.moves.push(Vec::new());
        self.index.insert(w, i);
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, w: u64) -> Option<u32> {
        self.index.get(&w).copied()
    }

    /// Truth of a current-step formula in every state.
    pub fn holds(&self, e: &Expr<Atom>) -> Vec<bool> {
        self.states
            .iter()
            .map(|&w| e.eval(&|a: &Atom| w & a.prop.bit() != 0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spec::parse_spec;

    #[test]
    fn solutions_respect_constraints() {
        let spec = parse_spec("[OUTPUT]\na\nb\nc\n[SYS_INIT]\na | b\n!(a & b)\n").unwrap();
        let c: Vec<&Expr<Atom>> = spec.statements.iter().map(|s| &s.expr).collect();
        assert_eq!(solutions(&[0, 1, 2], 0, 0, &c, false), vec![1, 2, 5, 6]);
    }

    #[test]
    fn hallway_arena_is_small_and_consistent() {
        let spec = parse_spec(fixtures::HALLWAY_LIVELOCK).unwrap();
        let a = Arena::build(&spec, Roots::Init, true, &GameOptions::default()).unwrap();
        assert_eq!(a.roots.len(), 2);
        // every reachable state has exactly one region
        let regions = spec.output_mask() & !spec.prop("camera").unwrap().bit();
        for &w in &a.states {
            assert_eq!((w & regions).count_ones(), 1);
        }
        for (i, ms) in a.moves.iter().enumerate() {
            assert_eq!(ms.len(), 2, "state {i}");
            for m in ms {
                assert!(!m.succ.is_empty());
            }
        }
    }

    #[test]
    fn atom_cap_enforced() {
        let spec = parse_spec(fixtures::FOLLOW_ME).unwrap();
        let opts = GameOptions {
            atom_cap: 4,
            ..GameOptions::default()
        };
        assert!(matches!(
            Arena::build(&spec, Roots::Init, true, &opts),
            Err(GameError::StateSpaceTooLarge { atoms: 16, cap: 4 })
        ));
    }
}
