//! GR(1) specification model.
//!
//! A [`Spec`] holds the declared propositions and a flat list of
//! [`Statement`]s. Every statement is one top-level conjunct of a single slot
//! (environment/system × init/safety/liveness) and carries a stable id that
//! all downstream analyses use to report cores.

mod parse;
mod print;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::workspace::Workspace;

pub use parse::parse_spec;
pub use print::render_spec;

pub type StmtId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PropId(pub u16);

impl PropId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit(self) -> u64 {
        1u64 << self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropKind {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub name: String,
    pub kind: PropKind,
}

/// `prop` or `next(prop)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub prop: PropId,
    pub next: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    EnvInit,
    EnvTrans,
    EnvGoal,
    SysInit,
    SysTrans,
    SysGoal,
}

impl Slot {
    pub fn is_env(self) -> bool {
        matches!(self, Slot::EnvInit | Slot::EnvTrans | Slot::EnvGoal)
    }

    pub fn section(self) -> &'static str {
        match self {
            Slot::EnvInit => "ENV_INIT",
            Slot::EnvTrans => "ENV_TRANS",
            Slot::EnvGoal => "ENV_LIVENESS",
            Slot::SysInit => "SYS_INIT",
            Slot::SysTrans => "SYS_TRANS",
            Slot::SysGoal => "SYS_LIVENESS",
        }
    }
}

/// Source location. Lines and columns are 1-based; `end_col` is exclusive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub id: StmtId,
    pub slot: Slot,
    /// 1-based sentence number; statements sharing a label share a sentence.
    pub sentence: u32,
    /// Sentence text shown to users.
    pub text: String,
    /// The formula as written on its source line.
    pub source: String,
    pub span: Span,
    pub expr: Expr<Atom>,
    /// Generated from the `[TOPOLOGY]` section.
    pub topology: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spec {
    /// Inputs first, then outputs; a proposition's index is its state bit.
    pub props: Vec<Proposition>,
    pub n_inputs: usize,
    pub statements: Vec<Statement>,
    pub workspace: Option<Workspace>,
    pub topology_span: Option<Span>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: u32, msg: String },
    #[error("line {line}: undeclared proposition `{name}`")]
    UndeclaredProposition { name: String, line: u32 },
    #[error("line {line}: next() is not allowed in initial conditions or liveness conditions")]
    NextInInitOrGoal { line: u32 },
    #[error("line {line}: region `{name}` is not a declared output")]
    UndeclaredRegion { name: String, line: u32 },
    #[error("line {line}: proposition `{name}` is declared twice")]
    DuplicateProposition { name: String, line: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error("unknown statement id {0}")]
    UnknownStatementId(StmtId),
}

impl Spec {
    pub fn n_props(&self) -> usize {
        self.props.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.props.len() - self.n_inputs
    }

    pub fn inputs(&self) -> &[Proposition] {
        &self.props[..self.n_inputs]
    }

    pub fn outputs(&self) -> &[Proposition] {
        &self.props[self.n_inputs..]
    }

    /// Bit mask of the input propositions within a state word.
    pub fn input_mask(&self) -> u64 {
        low_mask(self.n_inputs)
    }

    pub fn output_mask(&self) -> u64 {
        low_mask(self.props.len()) & !self.input_mask()
    }

    pub fn prop(&self, name: &str) -> Option<PropId> {
        self.props.iter().position(|p| p.name == name).map(|i| PropId(i as u16))
    }

    pub fn prop_name(&self, p: PropId) -> &str {
        &self.props[p.index()].name
    }

    pub fn is_input(&self, p: PropId) -> bool {
        p.index() < self.n_inputs
    }

    pub fn statement(&self, id: StmtId) -> Option<&Statement> {
        self.statements.iter().find(|s| s.id == id)
    }

    pub fn in_slot(&self, slot: Slot) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(move |s| s.slot == slot)
    }

    /// System liveness statements in order; goal `k` is `sys_goals()[k - 1]`.
    pub fn sys_goals(&self) -> Vec<&Statement> {
        self.in_slot(Slot::SysGoal).collect()
    }

    pub fn env_goals(&self) -> Vec<&Statement> {
        self.in_slot(Slot::EnvGoal).collect()
    }

    /// Number of system safety conjuncts.
    pub fn n_sys_trans(&self) -> usize {
        self.in_slot(Slot::SysTrans).count()
    }

    pub fn topology_ids(&self) -> Vec<StmtId> {
        self.statements.iter().filter(|s| s.topology).map(|s| s.id).collect()
    }

    pub fn all_ids(&self) -> BTreeSet<StmtId> {
        self.statements.iter().map(|s| s.id).collect()
    }

    /// Keeps only the listed statements; ids of retained statements are unchanged.
    pub fn statement_slice(&self, keep: &BTreeSet<StmtId>) -> Result<Spec, SliceError> {
        for id in keep {
            if self.statement(*id).is_none() {
                return Err(SliceError::UnknownStatementId(*id));
            }
        }
        let mut out = self.clone();
        out.statements.retain(|s| keep.contains(&s.id));
        Ok(out)
    }

    /// Name-to-value view of a state word.
    pub fn assignment(&self, state: u64) -> std::collections::BTreeMap<String, bool> {
        self.props
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), state >> i & 1 == 1))
            .collect()
    }

    /// Comma-separated list of the propositions true in `state`, restricted to `mask`.
    pub fn describe(&self, state: u64, mask: u64) -> String {
        let names: Vec<&str> = self
            .props
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1 && state >> i & 1 == 1)
            .map(|(_, p)| p.name.as_str())
            .collect();
        if names.is_empty() {
            "{}".to_string()
        } else {
            format!("{{{}}}", names.join(", "))
        }
    }

    pub fn atom_name(&self, a: &Atom) -> String {
        if a.next {
            format!("next({})", self.prop_name(a.prop))
        } else {
            self.prop_name(a.prop).to_string()
        }
    }

    pub fn render_expr(&self, e: &Expr<Atom>) -> String {
        e.render(&|a| self.atom_name(a))
    }
}

pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
