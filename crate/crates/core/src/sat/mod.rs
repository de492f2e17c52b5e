//! Propositional layer: CNF with provenance groups, a clause-learning solver
//! with assumptions, and group-level minimal unsatisfiable subsets.

mod cnf;
mod dimacs;
mod mus;
mod solver;

use thiserror::Error;

pub use cnf::{to_cnf, CnfInstance, Conjunct, GroupKey, Origin, TimedAtom};
pub use dimacs::{parse_dimacs, write_dimacs, DimacsFile};
pub use mus::{extract_mus, solve, solve_groups, Model, MusResult};
pub use solver::{solve_clauses, Limits, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// Literal encoded as `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(v: Var, positive: bool) -> Lit {
        Lit(v.0 << 1 | (!positive) as u32)
    }

    pub fn pos(v: u32) -> Lit {
        Lit::new(Var(v), true)
    }

    pub fn neg(v: u32) -> Lit {
        Lit::new(Var(v), false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS integer form (1-based, sign is polarity).
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(x: i64) -> Lit {
        Lit::new(Var(x.unsigned_abs() as u32 - 1), x > 0)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("SAT search gave up after {conflicts} conflicts")]
    ResourceLimit { conflicts: u64 },
    #[error("SAT search exceeded its time budget")]
    Timeout,
    #[error("clause set is satisfiable")]
    NotUnsat,
}
