//! Conflict-driven clause learning with two watched literals and first-UIP
//! learning. No restarts; decisions pick the lowest unassigned variable and
//! try `false` first, so runs are fully deterministic.

use super::{Lit, SatError};
use crate::Budget;

#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub max_conflicts: Option<u64>,
    pub budget: Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Total assignment indexed by variable.
    Sat(Vec<bool>),
    /// Subset of the assumptions that is already contradictory.
    Unsat(Vec<Lit>),
}

const FALSE: u8 = 0;
const TRUE: u8 = 1;
const UNDEF: u8 = 2;

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    values: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    ok: bool,
}

impl Solver {
    fn new(num_vars: usize) -> Self {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            values: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; num_vars],
            ok: true,
        }
    }

    fn value(&self, l: Lit) -> u8 {
        let v = self.values[l.var().0 as usize];
        if v == UNDEF {
            UNDEF
        } else {
            v ^ (!l.is_positive()) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var().0 as usize;
        self.values[v] = l.is_positive() as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        c.retain(|&l| self.value(l) != FALSE);
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return;
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let idx = self.clauses.len();
                self.watches[c[0].index()].push(idx);
                self.watches[c[1].index()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                let clause = &mut self.clauses[cr];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let fv = {
                    let v = self.values[first.var().0 as usize];
                    if v == UNDEF {
                        UNDEF
                    } else {
                        v ^ (!first.is_positive()) as u8
                    }
                };
                if fv == TRUE {
                    ws[j] = cr;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.values[l.var().0 as usize];
                    let lv = if v == UNDEF {
                        UNDEF
                    } else {
                        v ^ (!l.is_positive()) as u8
                    };
                    if lv != FALSE {
                        clause.swap(1, k);
                        self.watches[clause[1].index()].push(cr);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cr;
                j += 1;
                if fv == FALSE {
                    conflict = Some(cr);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(cr));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            let clause = &self.clauses[confl];
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &clause[start..] {
                let v = q.var().0 as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().0 as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var().0 as usize;
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var().0 as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().0 as usize] > self.level[learnt[max_i].var().0 as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            back = self.level[learnt[1].var().0 as usize];
        }
        (learnt, back)
    }

    /// Collects the assumptions responsible for `failed` being false.
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut out = vec![failed];
        if self.decision_level() == 0 {
            return out;
        }
        self.seen[failed.var().0 as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().0 as usize;
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if self.level[v] > 0 && l != !failed {
                        out.push(l);
                    }
                }
                Some(cr) => {
                    for &q in &self.clauses[cr][1..] {
                        if self.level[q.var().0 as usize] > 0 {
                            self.seen[q.var().0 as usize] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[failed.var().0 as usize] = false;
        out.sort_unstable();
        out.dedup();
        out
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let v = self.trail[i].var().0 as usize;
            self.values[v] = UNDEF;
            self.reason[v] = None;
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn search(&mut self, assumptions: &[Lit], limits: &Limits) -> Result<Outcome, SatError> {
        if !self.ok {
            return Ok(Outcome::Unsat(Vec::new()));
        }
        let mut conflicts = 0u64;
        let mut next_var = 0usize;
        let mut steps = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                conflicts += 1;
                if limits.max_conflicts.is_some_and(|m| conflicts > m) {
                    return Err(SatError::ResourceLimit { conflicts });
                }
                if conflicts.is_multiple_of(64) && limits.budget.expired() {
                    return Err(SatError::Timeout);
                }
                if self.decision_level() == 0 {
                    return Ok(Outcome::Unsat(Vec::new()));
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                next_var = 0;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let idx = self.clauses.len();
                    self.watches[learnt[0].index()].push(idx);
                    self.watches[learnt[1].index()].push(idx);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(first, Some(idx));
                }
                continue;
            }

            steps += 1;
            if steps.is_multiple_of(1024) && limits.budget.expired() {
                return Err(SatError::Timeout);
            }

            let dl = self.decision_level() as usize;
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        let core = self.analyze_final(a);
                        return Ok(Outcome::Unsat(core));
                    }
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }

            while next_var < self.values.len() && self.values[next_var] != UNDEF {
                next_var += 1;
            }
            if next_var == self.values.len() {
                return Ok(Outcome::Sat(self.values.iter().map(|&v| v == TRUE).collect()));
            }
            self.trail_lim.push(self.trail.len());
            self.enqueue(Lit::neg(next_var as u32), None);
        }
    }
}

/// Decides `clauses` under `assumptions`. Each call owns its search state.
pub fn solve_clauses(
    num_vars: usize,
    clauses: &[Vec<Lit>],
    assumptions: &[Lit],
    limits: &Limits,
) -> Result<Outcome, SatError> {
    let needed = clauses
        .iter()
        .flatten()
        .chain(assumptions)
        .map(|l| l.var().0 as usize + 1)
        .max()
        .unwrap_or(0)
        .max(num_vars);
    let mut s = Solver::new(needed);
    for c in clauses {
        s.add_clause(c);
        if !s.ok {
            break;
        }
    }
    let out = s.search(assumptions, limits)?;
    Ok(match out {
        Outcome::Sat(mut m) => {
            m.truncate(needed);
            Outcome::Sat(m)
        }
        u => u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lits(v: &[i64]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    fn sat(n: usize, cls: &[&[i64]], assume: &[i64]) -> Outcome {
        let clauses: Vec<Vec<Lit>> = cls.iter().map(|c| lits(c)).collect();
        solve_clauses(n, &clauses, &lits(assume), &Limits::default()).unwrap()
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(sat(1, &[&[1], &[-1]], &[]), Outcome::Unsat(vec![]));
        match sat(2, &[&[1, 2]], &[]) {
            Outcome::Sat(m) => assert!(m[0] || m[1]),
            o => panic!("{o:?}"),
        }
        assert!(matches!(sat(0, &[], &[]), Outcome::Sat(_)));
        assert_eq!(sat(1, &[&[]], &[]), Outcome::Unsat(vec![]));
    }

    #[test]
    fn assumptions_core() {
        // x1 -> x2, x2 -> x3; assuming x1 and !x3 fails, x4 is irrelevant.
        let out = sat(4, &[&[-1, 2], &[-2, 3]], &[4, 1, -3]);
        match out {
            Outcome::Unsat(core) => {
                let mut c: Vec<i64> = core.iter().map(|l| l.to_dimacs()).collect();
                c.sort();
                assert_eq!(c, vec![-3, 1]);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn pigeonhole_three_into_two() {
        // p_{i,j}: pigeon i in hole j, var = 2*i + j + 1
        let v = |i: i64, j: i64| 2 * i + j + 1;
        let mut cls: Vec<Vec<i64>> = Vec::new();
        for i in 0..3 {
            cls.push(vec![v(i, 0), v(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cls.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        let refs: Vec<&[i64]> = cls.iter().map(|c| c.as_slice()).collect();
        assert_eq!(sat(6, &refs, &[]), Outcome::Unsat(vec![]));
    }

    #[test]
    fn conflict_limit_reported() {
        let v = |i: i64, j: i64| 4 * i + j + 1;
        let mut cls: Vec<Vec<i64>> = Vec::new();
        for i in 0..5 {
            cls.push((0..4).map(|j| v(i, j)).collect());
        }
        for j in 0..4 {
            for a in 0..5 {
                for b in a + 1..5 {
                    cls.push(vec![-v(a, j), -v(b, j)]);
                }
            }
        }
        let clauses: Vec<Vec<Lit>> = cls.iter().map(|c| lits(c)).collect();
        let limits = Limits {
            max_conflicts: Some(2),
            ..Limits::default()
        };
        assert!(matches!(
            solve_clauses(20, &clauses, &[], &limits),
            Err(SatError::ResourceLimit { .. })
        ));
    }
}
