//! Structure of a counterstrategy: deadlocked states, countertraces and the
//! maximal cycles that keep a goal out of reach.

use std::collections::{BTreeSet, HashSet, VecDeque};

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::game::Counterstrategy;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CsError {
    #[error("no counterstrategy state is marked with goal {0}")]
    GoalNotPrevented(usize),
    #[error("more than {0} candidate cycles; giving up on cycle enumeration")]
    TooManyCycles(usize),
}

/// A closed walk, stored in its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    pub states: Vec<usize>,
}

impl Cycle {
    /// Normalizes to the lexicographically least rotation.
    pub fn new(states: Vec<usize>) -> Cycle {
        let n = states.len();
        let best = (0..n)
            .map(|o| (0..n).map(|i| states[(i + o) % n]).collect::<Vec<_>>())
            .min()
            .unwrap_or_default();
        Cycle { states: best }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Strict sub-cycle: shorter, and found contiguously in `other` at some
    /// offset, wrapping around.
    pub fn is_sub_cycle_of(&self, other: &Cycle) -> bool {
        let (a, b) = (self.len(), other.len());
        a < b && (0..b).any(|o| (0..a).all(|i| self.states[i] == other.states[(i + o) % b]))
    }
}

pub fn deadlocked_states(cs: &Counterstrategy) -> BTreeSet<usize> {
    (0..cs.len()).filter(|&q| cs.delta_s(q).is_empty()).collect()
}

/// True iff all runs from the initial states see the same input sequence:
/// every breadth-first layer agrees on the chosen input.
pub fn is_countertrace(cs: &Counterstrategy) -> bool {
    let mut layer: BTreeSet<usize> = cs.initial.iter().copied().collect();
    let mut seen: HashSet<BTreeSet<usize>> = HashSet::new();
    while !layer.is_empty() && seen.insert(layer.clone()) {
        let mut inputs = layer.iter().map(|&q| cs.delta_e(q));
        let first = inputs.next().expect("nonempty layer");
        if inputs.any(|x| x != first) {
            return false;
        }
        layer = layer.iter().flat_map(|&q| cs.delta_s(q).iter().copied()).collect();
    }
    true
}

/// Upper bound on closed walks examined before giving up.
pub const CYCLE_LIMIT: usize = 20_000;

/// Maximal closed walks through states marked with goal `k`. A walk never
/// repeats a directed edge, never stays on a state between consecutive
/// positions (self-loops only as one-state walks), and has at most
/// `factor * |Q_k|` positions.
pub fn preventing_cycles(cs: &Counterstrategy, k: usize, factor: usize) -> Result<Vec<Cycle>, CsError> {
    let qk: Vec<bool> = cs.states.iter().map(|q| q.goal == k).collect();
    let size = qk.iter().filter(|&&b| b).count();
    if size == 0 {
        return Err(CsError::GoalNotPrevented(k));
    }
    let max_len = factor.max(1) * size;
    let mut found: BTreeSet<Cycle> = BTreeSet::new();
    for q in 0..cs.len() {
        if qk[q] && cs.delta_s(q).contains(&q) {
            found.insert(Cycle { states: vec![q] });
        }
    }
    for start in (0..cs.len()).filter(|&q| qk[q]) {
        let mut path = vec![start];
        let mut used = HashSet::new();
        walk(cs, &qk, start, max_len, &mut path, &mut used, &mut found)?;
    }
    let all: Vec<Cycle> = found.into_iter().collect();
    Ok(all
        .iter()
        .filter(|c| !all.iter().any(|d| c.is_sub_cycle_of(d)))
        .cloned()
        .collect())
}

fn walk(
    cs: &Counterstrategy,
    qk: &[bool],
    start: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    used: &mut HashSet<(usize, usize)>,
    found: &mut BTreeSet<Cycle>,
) -> Result<(), CsError> {
    let cur = *path.last().expect("path starts nonempty");
    for &t in cs.delta_s(cur) {
        // the least state of a walk is its first position
        if !qk[t] || t < start || t == cur || used.contains(&(cur, t)) {
            continue;
        }
        if t == start {
            found.insert(Cycle::new(path.clone()));
            if found.len() > CYCLE_LIMIT {
                return Err(CsError::TooManyCycles(CYCLE_LIMIT));
            }
        }
        if path.len() < max_len {
            used.insert((cur, t));
            path.push(t);
            walk(cs, qk, start, max_len, path, used, found)?;
            path.pop();
            used.remove(&(cur, t));
        }
    }
    Ok(())
}

/// Sum over weakly connected components of the longest finite shortest-path
/// distance inside the component.
pub fn diameter_sum(cs: &Counterstrategy) -> usize {
    let n = cs.len();
    let mut uf = UnionFind::<usize>::new(n);
    for q in 0..n {
        for &t in cs.delta_s(q) {
            uf.union(q, t);
        }
    }
    let mut diam = vec![0usize; n];
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(q) = queue.pop_front() {
            for &t in cs.delta_s(q) {
                if dist[t] == usize::MAX {
                    dist[t] = dist[q] + 1;
                    queue.push_back(t);
                }
            }
        }
        let far = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
        let root = uf.find(s);
        diam[root] = diam[root].max(far);
    }
    (0..n).filter(|&q| uf.find(q) == q).map(|q| diam[q]).sum()
}
