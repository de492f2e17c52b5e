//! Brute-force reference implementations.

use std::collections::{BTreeSet, VecDeque};

use unsyn_core::expr::Expr;
use unsyn_core::spec::{Atom, Slot, Spec};
use unsyn_core::workspace::MapView;

pub fn eval(e: &Expr<Atom>, cur: u64, next: u64) -> bool {
    e.eval(&|a: &Atom| (if a.next { next } else { cur }) >> a.prop.index() & 1 == 1)
}

fn all(spec: &Spec, slot: Slot, cur: u64, next: u64) -> bool {
    spec.in_slot(slot).all(|s| eval(&s.expr, cur, next))
}

/// Turn-based max-parity game. Player 0 is the system.
struct Parity {
    owner: Vec<u8>,
    prio: Vec<u8>,
    succ: Vec<Vec<usize>>,
}

impl Parity {
    fn attractor(&self, mask: &[bool], target: &[bool], player: u8) -> Vec<bool> {
        let mut attr: Vec<bool> = (0..mask.len()).map(|v| mask[v] && target[v]).collect();
        loop {
            let mut grew = false;
            for v in 0..mask.len() {
                if !mask[v] || attr[v] {
                    continue;
                }
                let mut inside = self.succ[v].iter().filter(|&&t| mask[t]);
                let hit = if self.owner[v] == player {
                    inside.any(|&t| attr[t])
                } else {
                    inside.all(|&t| attr[t])
                };
                if hit {
                    attr[v] = true;
                    grew = true;
                }
            }
            if !grew {
                return attr;
            }
        }
    }

    /// Winning regions `[player 0, player 1]` of the subgame `mask`.
    fn zielonka(&self, mask: &[bool]) -> [Vec<bool>; 2] {
        let n = mask.len();
        let Some(d) = (0..n).filter(|&v| mask[v]).map(|v| self.prio[v]).max() else {
            return [vec![false; n], vec![false; n]];
        };
        let p = (d % 2) as usize;
        let top: Vec<bool> = (0..n).map(|v| mask[v] && self.prio[v] == d).collect();
        let a = self.attractor(mask, &top, p as u8);
        let rest: Vec<bool> = (0..n).map(|v| mask[v] && !a[v]).collect();
        let w = self.zielonka(&rest);
        if !w[1 - p].iter().any(|&b| b) {
            let mut out = [vec![false; n], vec![false; n]];
            out[p] = mask.to_vec();
            return out;
        }
        let b = self.attractor(mask, &w[1 - p], (1 - p) as u8);
        let rest: Vec<bool> = (0..n).map(|v| mask[v] && !b[v]).collect();
        let mut w2 = self.zielonka(&rest);
        for v in 0..n {
            w2[1 - p][v] |= b[v];
        }
        w2
    }
}

/// Explicit GR(1) game with degeneralization counters, solved as a parity
/// game. A stuck environment loses, a stuck system loses.
pub struct Oracle {
    n_states: usize,
    me: usize,
    ms: usize,
    sys_win: Vec<bool>,
}

impl Oracle {
    pub fn new(spec: &Spec) -> Oracle {
        let n_props = spec.n_props();
        let n_states = 1usize << n_props;
        let n_in = 1usize << spec.n_inputs;
        let env_goals: Vec<&Expr<Atom>> = spec.env_goals().iter().map(|s| &s.expr).collect();
        let sys_goals: Vec<&Expr<Atom>> = spec.sys_goals().iter().map(|s| &s.expr).collect();
        let me = env_goals.len().max(1);
        let ms = sys_goals.len().max(1);
        let holds = |goals: &[&Expr<Atom>], k: usize, s: u64| goals.get(k).is_none_or(|g| eval(g, s, s));

        let env_node = |s: usize, i: usize, j: usize| (s * me + i) * ms + j;
        let n_env = n_states * me * ms;
        let sys_node = |s: usize, x: usize, i: usize, j: usize| n_env + ((s * n_in + x) * me + i) * ms + j;
        let n = n_env + n_states * n_in * me * ms;
        let (sys_sink, env_sink) = (n, n + 1);
        let mut g = Parity {
            owner: vec![0; n + 2],
            prio: vec![0; n + 2],
            succ: vec![Vec::new(); n + 2],
        };
        g.owner[env_sink] = 1;
        g.prio[sys_sink] = 2;
        g.prio[env_sink] = 1;
        g.succ[sys_sink] = vec![sys_sink];
        g.succ[env_sink] = vec![env_sink];
        let in_mask = (1u64 << spec.n_inputs) - 1;
        for s in 0..n_states {
            let sw = s as u64;
            for i in 0..me {
                for j in 0..ms {
                    let v = env_node(s, i, j);
                    g.owner[v] = 1;
                    let a = holds(&env_goals, i, sw);
                    let b = holds(&sys_goals, j, sw);
                    g.prio[v] = if b && j == ms - 1 {
                        2
                    } else if a && i == me - 1 {
                        1
                    } else {
                        0
                    };
                    let ni = if a { (i + 1) % me } else { i };
                    let nj = if b { (j + 1) % ms } else { j };
                    for x in 0..n_in {
                        if all(spec, Slot::EnvTrans, sw, x as u64) {
                            g.succ[v].push(sys_node(s, x, ni, nj));
                        }
                    }
                    if g.succ[v].is_empty() {
                        g.succ[v].push(sys_sink);
                    }
                }
            }
        }
        for s in 0..n_states {
            for x in 0..n_in {
                let mut outs = Vec::new();
                for t in (0..n_states).filter(|&t| t as u64 & in_mask == x as u64) {
                    if all(spec, Slot::SysTrans, s as u64, t as u64) {
                        outs.push(t);
                    }
                }
                for i in 0..me {
                    for j in 0..ms {
                        let v = sys_node(s, x, i, j);
                        g.succ[v] = outs.iter().map(|&t| env_node(t, i, j)).collect();
                        if g.succ[v].is_empty() {
                            g.succ[v].push(env_sink);
                        }
                    }
                }
            }
        }
        let w = g.zielonka(&vec![true; n + 2]);
        Oracle {
            n_states,
            me,
            ms,
            sys_win: w[0][..n_env].to_vec(),
        }
    }

    /// The system wins when play starts in `state`.
    pub fn wins_from(&self, state: u64) -> bool {
        self.sys_win[state as usize * self.me * self.ms]
    }

    /// Every admissible initial input has a winning system initial answer.
    pub fn realizable(&self, spec: &Spec) -> bool {
        let in_mask = (1u64 << spec.n_inputs) - 1;
        (0..self.n_states as u64)
            .filter(|&x| x & !in_mask == 0)
            .filter(|&x| spec.in_slot(Slot::EnvInit).all(|s| eval(&s.expr, x, x)))
            .all(|x| {
                (0..self.n_states as u64)
                    .filter(|&s| s & in_mask == x)
                    .any(|s| all(spec, Slot::SysInit, s, s) && self.wins_from(s))
            })
    }
}

/// Truth-table satisfiability of DIMACS clauses.
pub fn brute_sat(vars: u32, clauses: &[&Vec<i64>]) -> bool {
    (0u64..1 << vars).any(|m| {
        clauses
            .iter()
            .all(|c| c.iter().any(|&l| (m >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
    })
}

pub fn groups_sat(vars: u32, groups: &[Vec<Vec<i64>>], pick: &BTreeSet<usize>) -> bool {
    let clauses: Vec<&Vec<i64>> = pick.iter().flat_map(|&g| groups[g].iter()).collect();
    brute_sat(vars, &clauses)
}

/// Every minimal unsatisfiable subset of groups, by enumerating the power set.
pub fn all_muses(vars: u32, groups: &[Vec<Vec<i64>>]) -> Vec<BTreeSet<usize>> {
    let n = groups.len();
    let unsat: Vec<bool> = (0u32..1 << n)
        .map(|m| !groups_sat(vars, groups, &(0..n).filter(|&g| m >> g & 1 == 1).collect()))
        .collect();
    (0u32..1 << n)
        .filter(|&m| {
            unsat[m as usize]
                && (0..n)
                    .filter(|&g| m >> g & 1 == 1)
                    .all(|g| !unsat[(m & !(1 << g)) as usize])
        })
        .map(|m| (0..n).filter(|&g| m >> g & 1 == 1).collect())
        .collect()
}

/// Hop distance between two regions.
pub fn bfs(map: &MapView, from: &str, to: &str) -> Option<usize> {
    let mut dist = std::collections::HashMap::from([(from.to_string(), 0usize)]);
    let mut queue = VecDeque::from([from.to_string()]);
    while let Some(r) = queue.pop_front() {
        if r == to {
            return dist.get(&r).copied();
        }
        let d = dist[&r];
        for (a, b) in &map.adjacency {
            let other = if *a == r {
                b
            } else if *b == r {
                a
            } else {
                continue;
            };
            if !dist.contains_key(other) {
                dist.insert(other.clone(), d + 1);
                queue.push_back(other.clone());
            }
        }
    }
    None
}
