//! Diagnosis of unsynthesizable GR(1) specifications.
//!
//! The pipeline parses a specification ([`spec`]), classifies it with an
//! explicit-state game solver ([`game`]) and explains failures as minimal
//! cores of specification statements ([`engine`]).

pub mod cs;
pub mod engine;
pub mod expr;
pub mod fixtures;
pub mod game;
pub mod report;
pub mod sat;
pub mod session;
pub mod spec;
pub mod unroll;
pub mod workspace;

mod budget;

pub use budget::Budget;
