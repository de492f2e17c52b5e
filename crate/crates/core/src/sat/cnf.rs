use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Lit, Var};
use crate::expr::Expr;
use crate::spec::{PropId, StmtId};

/// Value of a proposition at one time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimedAtom {
    pub prop: PropId,
    pub step: u32,
}

/// Where a conjunct came from. Synthetic origins sort before statements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Pins the full starting state.
    Anchor,
    /// Pins environment inputs.
    EnvPin,
    /// Pins a proposed system move.
    MovePin,
    Statement(StmtId),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Anchor => f.write_str("state"),
            Origin::EnvPin => f.write_str("env-input"),
            Origin::MovePin => f.write_str("move"),
            Origin::Statement(id) => write!(f, "s{id}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub origin: Origin,
    pub step: u32,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.origin, self.step)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjunct {
    pub origin: Origin,
    pub step: u32,
    pub expr: Expr<TimedAtom>,
}

impl Conjunct {
    pub fn key(&self) -> GroupKey {
        GroupKey {
            origin: self.origin,
            step: self.step,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// Index into `groups` for every clause.
    pub clause_group: Vec<usize>,
    /// Sorted, distinct.
    pub groups: Vec<GroupKey>,
    pub atoms: BTreeMap<TimedAtom, Var>,
}

impl CnfInstance {
    /// Raw clause groups with no atom table; group `i` gets key
    /// `Statement(i)@0`. Literals are DIMACS integers.
    pub fn from_groups(groups: &[Vec<Vec<i64>>]) -> CnfInstance {
        let mut cnf = CnfInstance::default();
        for (g, clauses) in groups.iter().enumerate() {
            cnf.groups.push(GroupKey {
                origin: Origin::Statement(g as StmtId),
                step: 0,
            });
            for c in clauses {
                let lits: Vec<Lit> = c.iter().map(|&x| Lit::from_dimacs(x)).collect();
                for l in &lits {
                    cnf.num_vars = cnf.num_vars.max(l.var().0 as usize + 1);
                }
                cnf.clauses.push(lits);
                cnf.clause_group.push(g);
            }
        }
        cnf
    }

    pub fn group_index(&self, key: &GroupKey) -> Option<usize> {
        self.groups.binary_search(key).ok()
    }

    pub fn var(&self, prop: PropId, step: u32) -> Option<Var> {
        self.atoms.get(&TimedAtom { prop, step }).copied()
    }
}

/// Conjuncts whose clause expansion exceeds this many clauses fall back to
/// definitional (Tseitin) encoding.
const DISTRIBUTE_CAP: usize = 256;

enum Nnf {
    True,
    False,
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

struct Builder {
    num_vars: usize,
}

impl Builder {
    fn fresh(&mut self) -> Lit {
        self.num_vars += 1;
        Lit::pos(self.num_vars as u32 - 1)
    }
}

fn nnf(e: &Expr<TimedAtom>, positive: bool, atoms: &BTreeMap<TimedAtom, Var>) -> Nnf {
    let simplify = |parts: Vec<Nnf>, conj: bool| -> Nnf {
        let mut out = Vec::new();
        for p in parts {
            match (p, conj) {
                (Nnf::True, true) | (Nnf::False, false) => {}
                (Nnf::False, true) => return Nnf::False,
                (Nnf::True, false) => return Nnf::True,
                (Nnf::And(xs), true) => out.extend(xs),
                (Nnf::Or(xs), false) => out.extend(xs),
                (p, _) => out.push(p),
            }
        }
        match out.len() {
            0 if conj => Nnf::True,
            0 => Nnf::False,
            1 => out.pop().unwrap(),
            _ if conj => Nnf::And(out),
            _ => Nnf::Or(out),
        }
    };
    match e {
        Expr::Const(b) => {
            if *b == positive {
                Nnf::True
            } else {
                Nnf::False
            }
        }
        Expr::Atom(a) => Nnf::Lit(Lit::new(atoms[a], positive)),
        Expr::Not(x) => nnf(x, !positive, atoms),
        Expr::And(xs) => simplify(xs.iter().map(|x| nnf(x, positive, atoms)).collect(), positive),
        Expr::Or(xs) => simplify(xs.iter().map(|x| nnf(x, positive, atoms)).collect(), !positive),
        Expr::Implies(a, b) => {
            if positive {
                simplify(vec![nnf(a, false, atoms), nnf(b, true, atoms)], false)
            } else {
                simplify(vec![nnf(a, true, atoms), nnf(b, false, atoms)], true)
            }
        }
        Expr::Iff(a, b) => {
            // a <-> b  ==  (!a | b) & (a | !b);  !(a <-> b)  ==  (a | b) & (!a | !b)
            let (pa, pb) = if positive { (false, true) } else { (true, true) };
            let first = simplify(vec![nnf(a, pa, atoms), nnf(b, pb, atoms)], false);
            let second = simplify(vec![nnf(a, !pa, atoms), nnf(b, !pb, atoms)], false);
            simplify(vec![first, second], true)
        }
    }
}

/// Clause expansion by distribution, or `None` if it would exceed the cap.
fn distribute(n: &Nnf, cap: usize) -> Option<Vec<Vec<Lit>>> {
    match n {
        Nnf::True => Some(Vec::new()),
        Nnf::False => Some(vec![Vec::new()]),
        Nnf::Lit(l) => Some(vec![vec![*l]]),
        Nnf::And(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(distribute(x, cap)?);
                if out.len() > cap {
                    return None;
                }
            }
            Some(out)
        }
        Nnf::Or(xs) => {
            let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
            for x in xs {
                let part = distribute(x, cap)?;
                if acc.len() * part.len() > cap {
                    return None;
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        c.extend_from_slice(p);
                        next.push(c);
                    }
                }
                acc = next;
            }
            Some(acc)
        }
    }
}

/// Returns a literal that implies `n`, adding one-sided definitions.
fn define(n: &Nnf, b: &mut Builder, out: &mut Vec<Vec<Lit>>) -> Lit {
    match n {
        Nnf::Lit(l) => *l,
        Nnf::True | Nnf::False => {
            let v = b.fresh();
            if matches!(n, Nnf::False) {
                out.push(vec![!v]);
            }
            v
        }
        Nnf::And(xs) => {
            let v = b.fresh();
            for x in xs {
                let l = define(x, b, out);
                out.push(vec![!v, l]);
            }
            v
        }
        Nnf::Or(xs) => {
            let v = b.fresh();
            let mut c = vec![!v];
            for x in xs {
                c.push(define(x, b, out));
            }
            out.push(c);
            v
        }
    }
}

fn encode(n: &Nnf, b: &mut Builder, out: &mut Vec<Vec<Lit>>) {
    if let Nnf::And(xs) = n {
        for x in xs {
            encode(x, b, out);
        }
        return;
    }
    if let Some(cs) = distribute(n, DISTRIBUTE_CAP) {
        out.extend(cs);
        return;
    }
    match n {
        Nnf::Or(xs) => {
            let c = xs.iter().map(|x| define(x, b, out)).collect();
            out.push(c);
        }
        _ => unreachable!("literals and constants always distribute"),
    }
}

fn normalize(mut c: Vec<Lit>) -> Option<Vec<Lit>> {
    c.sort_unstable();
    c.dedup();
    if c.windows(2).any(|w| w[0] == !w[1]) {
        None
    } else {
        Some(c)
    }
}

/// Converts conjuncts to an equisatisfiable clause set. Atom variables are
/// numbered in atom order before any auxiliary variable; conjuncts sharing a
/// `(origin, step)` key share one group.
pub fn to_cnf(conjuncts: &[Conjunct]) -> CnfInstance {
    let mut seen = BTreeSet::new();
    for c in conjuncts {
        c.expr.for_each_atom(&mut |a: &TimedAtom| {
            seen.insert(*a);
        });
    }
    let atoms: BTreeMap<TimedAtom, Var> = seen.into_iter().enumerate().map(|(i, a)| (a, Var(i as u32))).collect();
    let groups: Vec<GroupKey> = conjuncts
        .iter()
        .map(Conjunct::key)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut b = Builder { num_vars: atoms.len() };
    let mut cnf = CnfInstance {
        groups,
        ..CnfInstance::default()
    };
    for c in conjuncts {
        let g = cnf.group_index(&c.key()).expect("group collected above");
        let mut out = Vec::new();
        encode(&nnf(&c.expr, true, &atoms), &mut b, &mut out);
        for clause in out.into_iter().filter_map(normalize) {
            cnf.clauses.push(clause);
            cnf.clause_group.push(g);
        }
    }
    cnf.num_vars = b.num_vars;
    cnf.atoms = atoms;
    cnf
}
