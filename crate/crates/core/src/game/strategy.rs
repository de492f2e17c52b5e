use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::arena::{Arena, Move};
use super::solve::{EnvLayers, NONE};
use crate::spec::{Atom, Slot, Spec};

/// One automaton state: a full assignment plus the environment's goal
/// counter, the input it plays next and every legal system answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsState {
    pub state: u64,
    pub counter: usize,
    /// 1-based system goal this state keeps from being reached.
    pub goal: usize,
    /// Next-step input chosen by the environment.
    pub input: u64,
    /// Successor ids, ascending.
    pub succ: Vec<usize>,
}

/// Environment counterstrategy. States are numbered in breadth-first order
/// from the initial states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterstrategy {
    pub n_inputs: usize,
    pub n_props: usize,
    pub states: Vec<CsState>,
    pub initial: Vec<usize>,
    /// Initial input; the only information left when no system initial
    /// state is compatible with it.
    pub x0: u64,
}

impl Counterstrategy {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn in_mask(&self) -> u64 {
        crate::spec::low_mask(self.n_inputs)
    }

    pub fn gamma_x(&self, q: usize) -> u64 {
        self.states[q].state & self.in_mask()
    }

    pub fn gamma_y(&self, q: usize) -> u64 {
        self.states[q].state & !self.in_mask()
    }

    pub fn delta_e(&self, q: usize) -> u64 {
        self.states[q].input
    }

    pub fn delta_s(&self, q: usize) -> &[usize] {
        &self.states[q].succ
    }

    /// Line-oriented text form: `state`, `einput`, `edge` and `init` lines,
    /// plus `einit` for the initial input.
    pub fn dump(&self, spec: &Spec) -> String {
        let bits = |w: u64, range: std::ops::Range<usize>| -> String {
            if range.is_empty() {
                return "-".to_string();
            }
            range.map(|i| if w >> i & 1 == 1 { '1' } else { '0' }).collect()
        };
        let ins = 0..spec.n_inputs;
        let outs = spec.n_inputs..spec.n_props();
        let mut out = String::new();
        out.push_str(&format!("einit {}\n", bits(self.x0, ins.clone())));
        for (id, q) in self.states.iter().enumerate() {
            out.push_str(&format!(
                "state {id} in={} out={} goal={}\n",
                bits(q.state, ins.clone()),
                bits(q.state, outs.clone()),
                q.goal
            ));
        }
        for &id in &self.initial {
            out.push_str(&format!("init {id}\n"));
        }
        for (id, q) in self.states.iter().enumerate() {
            out.push_str(&format!("einput {id} {}\n", bits(q.input, ins.clone())));
        }
        for (id, q) in self.states.iter().enumerate() {
            for t in &q.succ {
                out.push_str(&format!("edge {id} {t}\n"));
            }
        }
        out
    }

    /// Reads the [`dump`](Self::dump) format back. Goal counters are not part
    /// of the format and come back as 0.
    pub fn parse(spec: &Spec, text: &str) -> Result<Counterstrategy, String> {
        let word = |s: &str, offset: usize, width: usize, line: usize| -> Result<u64, String> {
            if s == "-" && width == 0 {
                return Ok(0);
            }
            if s.len() != width || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(format!("line {line}: expected {width} bits, found `{s}`"));
            }
            Ok(s.chars()
                .enumerate()
                .fold(0, |w, (i, c)| if c == '1' { w | 1 << (offset + i) } else { w }))
        };
        let num = |s: &str, line: usize| -> Result<usize, String> {
            s.parse().map_err(|_| format!("line {line}: bad number `{s}`"))
        };
        let (n_in, n_out) = (spec.n_inputs, spec.n_outputs());
        let mut cs = Counterstrategy {
            n_inputs: n_in,
            n_props: spec.n_props(),
            states: Vec::new(),
            initial: Vec::new(),
            x0: 0,
        };
        let mut edges = Vec::new();
        let mut inputs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let w: Vec<&str> = line.split_whitespace().collect();
            match w.as_slice() {
                [] => {}
                ["einit", b] => cs.x0 = word(b, 0, n_in, n)?,
                ["state", id, inb, outb, goal] => {
                    if num(id, n)? != cs.states.len() {
                        return Err(format!("line {n}: states must be numbered in order"));
                    }
                    let field = |f: &str, key: &str| -> Result<String, String> {
                        f.strip_prefix(key)
                            .map(str::to_string)
                            .ok_or(format!("line {n}: expected `{key}...`"))
                    };
                    let x = word(&field(inb, "in=")?, 0, n_in, n)?;
                    let y = word(&field(outb, "out=")?, n_in, n_out, n)?;
                    let goal = num(&field(goal, "goal=")?, n)?;
                    cs.states.push(CsState {
                        state: x | y,
                        counter: 0,
                        goal,
                        input: 0,
                        succ: Vec::new(),
                    });
                }
                ["init", id] => cs.initial.push(num(id, n)?),
                ["einput", id, b] => inputs.push((num(id, n)?, word(b, 0, n_in, n)?)),
                ["edge", a, b] => edges.push((num(a, n)?, num(b, n)?)),
                _ => return Err(format!("line {n}: unrecognized `{line}`")),
            }
        }
        let len = cs.states.len();
        let check = |id: usize| -> Result<usize, String> {
            if id < len {
                Ok(id)
            } else {
                Err(format!("unknown state {id}"))
            }
        };
        for id in cs.initial.clone() {
            check(id)?;
        }
        for (id, x) in inputs {
            cs.states[check(id)?].input = x;
        }
        for (a, b) in edges {
            let b = check(b)?;
            cs.states[check(a)?].succ.push(b);
        }
        Ok(cs)
    }

    /// Checks the structural contract against the specification: initial
    /// states satisfy both initial conditions, inputs and successors respect
    /// both transition relations, successor inputs match the chosen input,
    /// and no cycle lets the system satisfy its goals while the environment
    /// satisfies its own.
    pub fn verify(&self, spec: &Spec) -> Result<(), String> {
        let holds = |slot: Slot, cur: u64, next: u64| {
            spec.in_slot(slot).all(|st| {
                st.expr.eval(&|a: &Atom| {
                    let w = if a.next { next } else { cur };
                    w & a.prop.bit() != 0
                })
            })
        };
        let in_mask = self.in_mask();
        for &q in &self.initial {
            let w = self.states[q].state;
            if !holds(Slot::EnvInit, w, 0) || !holds(Slot::SysInit, w, 0) {
                return Err(format!("initial state {q} violates an initial condition"));
            }
            if w & in_mask != self.x0 {
                return Err(format!("initial state {q} disagrees with the initial input"));
            }
        }
        let goals = spec.sys_goals().len().max(1);
        for (id, q) in self.states.iter().enumerate() {
            if q.goal == 0 || q.goal > goals {
                return Err(format!("state {id} has goal mark {}", q.goal));
            }
            if !holds(Slot::EnvTrans, q.state, q.input) {
                return Err(format!("state {id} plays an inadmissible input"));
            }
            for &t in &q.succ {
                let next = self.states[t].state;
                if next & in_mask != q.input {
                    return Err(format!("edge {id}->{t} disagrees with the chosen input"));
                }
                if !holds(Slot::SysTrans, q.state, next) {
                    return Err(format!("edge {id}->{t} violates system safety"));
                }
            }
        }

        let sys_goals: Vec<_> = spec.sys_goals().into_iter().map(|s| &s.expr).collect();
        let env_goals: Vec<_> = spec.env_goals().into_iter().map(|s| &s.expr).collect();
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for (id, q) in self.states.iter().enumerate() {
            for &t in &q.succ {
                g.add_edge(nodes[id], nodes[t], ());
            }
        }
        for scc in tarjan_scc(&g) {
            let nontrivial = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
            if !nontrivial {
                continue;
            }
            let hits = |e: &&crate::expr::Expr<Atom>| {
                scc.iter().any(|n| {
                    let w = self.states[n.index()].state;
                    e.eval(&|a: &Atom| w & a.prop.bit() != 0)
                })
            };
            if sys_goals.iter().all(&hits) && env_goals.iter().all(hits) {
                return Err(format!(
                    "cycle through state {} satisfies the specification",
                    scc[0].index()
                ));
            }
        }
        Ok(())
    }
}

/// Preferred move among those satisfying `ok`: one with no system answer,
/// then one repeating the current input, then the lowest input.
fn pick(moves: &[Move], cur_input: u64, ok: impl Fn(&Move) -> bool) -> Option<usize> {
    let valid: Vec<usize> = (0..moves.len()).filter(|&k| ok(&moves[k])).collect();
    valid
        .iter()
        .find(|&&k| moves[k].succ.is_empty())
        .or_else(|| valid.iter().find(|&&k| moves[k].input == cur_input))
        .or(valid.first())
        .copied()
}

/// Environment move at arena state `s` with goal counter `i`, and the
/// counter to carry into the successors.
pub(crate) fn choose(
    a: &Arena,
    layers: &EnvLayers,
    env_goals: &[Vec<bool>],
    in_mask: u64,
    s: usize,
    i: usize,
) -> (usize, usize) {
    let r = layers.layer[s];
    debug_assert_ne!(r, NONE);
    let lay = |t: &u32| layers.layer[*t as usize];
    let moves = &a.moves[s];
    let cur = a.states[s] & in_mask;
    if let Some(k) = pick(moves, cur, |m| m.succ.iter().all(|t| lay(t) < r)) {
        return (k, i);
    }
    if env_goals[i][s] {
        if let Some(k) = pick(moves, cur, |m| m.succ.iter().all(|t| lay(t) <= r)) {
            return (k, (i + 1) % env_goals.len());
        }
    }
    let rank = &layers.rank[i];
    let k = pick(moves, cur, |m| {
        m.succ.iter().all(|t| {
            let l = lay(t);
            l < r || (l == r && rank[*t as usize] < rank[s])
        })
    })
    .expect("environment-winning state has an attractor move");
    (k, i)
}

/// Unfolds the environment strategy from the given initial arena states.
pub(crate) fn unfold(
    a: &Arena,
    layers: &EnvLayers,
    env_goals: &[Vec<bool>],
    spec: &Spec,
    x0: u64,
    init: &[u32],
) -> Counterstrategy {
    let in_mask = spec.input_mask();
    let mut cs = Counterstrategy {
        n_inputs: spec.n_inputs,
        n_props: spec.n_props(),
        states: Vec::new(),
        initial: Vec::new(),
        x0,
    };
    let mut ids: HashMap<(u32, usize), usize> = HashMap::new();
    let mut arena_of: Vec<u32> = Vec::new();
    let mut intern = |s: u32, i: usize, cs: &mut Counterstrategy, arena_of: &mut Vec<u32>| -> usize {
        *ids.entry((s, i)).or_insert_with(|| {
            let l = layers.layer[s as usize];
            cs.states.push(CsState {
                state: a.states[s as usize],
                counter: i,
                goal: layers.layer_goal[l as usize - 1] + 1,
                input: 0,
                succ: Vec::new(),
            });
            arena_of.push(s);
            cs.states.len() - 1
        })
    };
    let mut sorted: Vec<u32> = init.to_vec();
    sorted.sort_by_key(|&s| a.states[s as usize]);
    for s in sorted {
        let id = intern(s, 0, &mut cs, &mut arena_of);
        cs.initial.push(id);
    }
    // ids are handed out in discovery order, so a plain scan is breadth-first
    let mut q = 0;
    while q < cs.states.len() {
        let s = arena_of[q] as usize;
        let (k, next_i) = choose(a, layers, env_goals, in_mask, s, cs.states[q].counter);
        let mv = &a.moves[s][k];
        let mut succ: Vec<usize> = mv
            .succ
            .iter()
            .map(|&t| intern(t, next_i, &mut cs, &mut arena_of))
            .collect();
        succ.sort_unstable();
        cs.states[q].input = mv.input;
        cs.states[q].succ = succ;
        q += 1;
    }
    cs
}
