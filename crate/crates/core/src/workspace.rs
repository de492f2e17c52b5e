//! Region maps and their compilation into topology safety conjuncts.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::spec::{Atom, ParseError, PropKind, Proposition, Slot, Span, Statement, StmtId};

/// Regions plus a symmetric adjacency relation. Staying put is always allowed
/// and is not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workspace {
    pub regions: Vec<String>,
    adjacency: BTreeSet<(usize, usize)>,
}

/// Rendering payload for map views.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapView {
    pub regions: Vec<String>,
    pub adjacency: Vec<(String, String)>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_region(&mut self, name: &str) -> usize {
        if let Some(i) = self.index(name) {
            return i;
        }
        self.regions.push(name.to_string());
        self.regions.len() - 1
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == name)
    }

    /// Adds an undirected edge. Self-edges are ignored.
    pub fn connect(&mut self, a: usize, b: usize) {
        if a != b {
            self.adjacency.insert((a.min(b), a.max(b)));
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, r: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .adjacency
            .iter()
            .filter_map(|&(a, b)| {
                if a == r {
                    Some(b)
                } else if b == r {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().copied()
    }

    /// Hop count of a shortest path, if any.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.regions.len()];
        let mut queue = VecDeque::from([from]);
        dist[from] = 0;
        while let Some(r) = queue.pop_front() {
            if r == to {
                return Some(dist[r]);
            }
            for n in self.neighbors(r) {
                if dist[n] == usize::MAX {
                    dist[n] = dist[r] + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Parses the `region` / `adj` line format used by `.map` files and the
    /// `[TOPOLOGY]` section, given `(line number, text)` pairs.
    pub fn parse_lines<'a>(lines: impl IntoIterator<Item = (u32, &'a str)>) -> Result<Workspace, ParseError> {
        let mut w = Workspace::new();
        let mut pending = Vec::new();
        for (line, raw) in lines {
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let words: Vec<&str> = text.split_whitespace().collect();
            match words.as_slice() {
                ["region", name] => {
                    if w.index(name).is_some() {
                        return Err(ParseError::Syntax {
                            line,
                            msg: format!("region `{name}` declared twice"),
                        });
                    }
                    w.add_region(name);
                }
                ["adj", a, b] => {
                    if a == b {
                        return Err(ParseError::Syntax {
                            line,
                            msg: format!("region `{a}` cannot be adjacent to itself"),
                        });
                    }
                    pending.push((line, a.to_string(), b.to_string()));
                }
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        msg: format!("expected `region <name>` or `adj <a> <b>`, found `{text}`"),
                    })
                }
            }
        }
        for (line, a, b) in pending {
            let ia = w
                .index(&a)
                .ok_or(ParseError::UndeclaredRegion { name: a.clone(), line })?;
            let ib = w
                .index(&b)
                .ok_or(ParseError::UndeclaredRegion { name: b.clone(), line })?;
            w.connect(ia, ib);
        }
        Ok(w)
    }

    pub fn parse_map(text: &str) -> Result<Workspace, ParseError> {
        Self::parse_lines(text.lines().enumerate().map(|(i, l)| (i as u32 + 1, l)))
    }

    pub fn render_map(&self) -> String {
        let mut out = String::new();
        for r in &self.regions {
            out.push_str(&format!("region {r}\n"));
        }
        for (a, b) in self.edges() {
            out.push_str(&format!("adj {} {}\n", self.regions[a], self.regions[b]));
        }
        out
    }

    pub fn view(&self) -> MapView {
        MapView {
            regions: self.regions.clone(),
            adjacency: self
                .edges()
                .map(|(a, b)| (self.regions[a].clone(), self.regions[b].clone()))
                .collect(),
        }
    }
}

pub const TOPOLOGY_TEXT: &str = "environment topology";

/// Compiles the map into system conjuncts: one adjacency statement per
/// region, exactly-one over current and over next region atoms, and an
/// exactly-one initial condition. Statement ids start at `first_id`.
pub fn compile_topology(
    w: &Workspace,
    props: &[Proposition],
    first_id: StmtId,
    sentence: u32,
    span: Span,
) -> Result<Vec<Statement>, ParseError> {
    let mut ids = Vec::with_capacity(w.regions.len());
    for r in &w.regions {
        match props.iter().position(|p| &p.name == r) {
            Some(i) if props[i].kind == PropKind::Output => ids.push(crate::spec::PropId(i as u16)),
            _ => {
                return Err(ParseError::UndeclaredRegion {
                    name: r.clone(),
                    line: span.line,
                })
            }
        }
    }
    let cur = |i: usize| {
        Expr::Atom(Atom {
            prop: ids[i],
            next: false,
        })
    };
    let nxt = |i: usize| {
        Expr::Atom(Atom {
            prop: ids[i],
            next: true,
        })
    };
    let exactly_one = |lit: &dyn Fn(usize) -> Expr<Atom>| {
        let n = ids.len();
        let mut parts = vec![Expr::or((0..n).map(lit).collect())];
        for i in 0..n {
            for j in i + 1..n {
                parts.push(Expr::not(Expr::and(vec![lit(i), lit(j)])));
            }
        }
        Expr::and(parts)
    };

    let mut exprs: Vec<(Slot, Expr<Atom>)> = Vec::new();
    for r in 0..w.regions.len() {
        let mut targets = vec![nxt(r)];
        targets.extend(w.neighbors(r).into_iter().map(nxt));
        exprs.push((Slot::SysTrans, Expr::implies(cur(r), Expr::or(targets))));
    }
    if !ids.is_empty() {
        exprs.push((Slot::SysTrans, exactly_one(&cur)));
        exprs.push((Slot::SysTrans, exactly_one(&nxt)));
        exprs.push((Slot::SysInit, exactly_one(&cur)));
    }

    let name = |a: &Atom| {
        let n = &props[a.prop.index()].name;
        if a.next {
            format!("next({n})")
        } else {
            n.clone()
        }
    };
    Ok(exprs
        .into_iter()
        .enumerate()
        .map(|(i, (slot, expr))| Statement {
            id: first_id + i as StmtId,
            slot,
            sentence,
            text: TOPOLOGY_TEXT.to_string(),
            source: expr.render(&name),
            span,
            expr,
            topology: true,
        })
        .collect())
}
