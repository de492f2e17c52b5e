use std::collections::{BTreeMap, BTreeSet};

use super::cnf::{CnfInstance, GroupKey, TimedAtom};
use super::solver::{solve_clauses, Limits, Outcome};
use super::{Lit, SatError};

/// Values of the named atoms in a satisfying assignment.
pub type Model = BTreeMap<TimedAtom, bool>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MusResult {
    Sat(Model),
    /// Groups whose clauses are jointly unsatisfiable.
    Unsat(Vec<GroupKey>),
}

fn selector(cnf: &CnfInstance, g: usize) -> Lit {
    Lit::pos((cnf.num_vars + g) as u32)
}

fn guarded(cnf: &CnfInstance) -> Vec<Vec<Lit>> {
    cnf.clauses
        .iter()
        .zip(&cnf.clause_group)
        .map(|(c, &g)| {
            let mut c = c.clone();
            c.push(!selector(cnf, g));
            c
        })
        .collect()
}

enum Check {
    Sat(Vec<bool>),
    Unsat(BTreeSet<usize>),
}

fn check(
    cnf: &CnfInstance,
    clauses: &[Vec<Lit>],
    active: &BTreeSet<usize>,
    limits: &Limits,
) -> Result<Check, SatError> {
    let assumptions: Vec<Lit> = active.iter().map(|&g| selector(cnf, g)).collect();
    let n = cnf.num_vars + cnf.groups.len();
    Ok(match solve_clauses(n, clauses, &assumptions, limits)? {
        Outcome::Sat(m) => Check::Sat(m),
        Outcome::Unsat(failed) => Check::Unsat(failed.into_iter().map(|l| l.var().0 as usize - cnf.num_vars).collect()),
    })
}

fn model(cnf: &CnfInstance, m: &[bool]) -> Model {
    cnf.atoms.iter().map(|(a, v)| (*a, m[v.0 as usize])).collect()
}

/// Satisfiability of the groups at the given indices.
pub fn solve_groups(cnf: &CnfInstance, groups: &BTreeSet<usize>, limits: &Limits) -> Result<MusResult, SatError> {
    let clauses = guarded(cnf);
    Ok(match check(cnf, &clauses, groups, limits)? {
        Check::Sat(m) => MusResult::Sat(model(cnf, &m)),
        Check::Unsat(core) => MusResult::Unsat(core.into_iter().map(|g| cnf.groups[g]).collect()),
    })
}

/// Satisfiability of the whole instance. An UNSAT answer names some
/// contradictory groups, not necessarily a minimal set.
pub fn solve(cnf: &CnfInstance, limits: &Limits) -> Result<MusResult, SatError> {
    solve_groups(cnf, &(0..cnf.groups.len()).collect(), limits)
}

/// Group-minimal unsatisfiable subset. Every group is tried for deletion in
/// ascending key order, so among several cores the one keeping the
/// higher-numbered groups wins regardless of solver conflict order.
pub fn extract_mus(cnf: &CnfInstance, limits: &Limits) -> Result<Vec<GroupKey>, SatError> {
    let clauses = guarded(cnf);
    let all: BTreeSet<usize> = (0..cnf.groups.len()).collect();
    if let Check::Sat(_) = check(cnf, &clauses, &all, limits)? {
        return Err(SatError::NotUnsat);
    }
    let mut core = all.clone();
    for g in all {
        core.remove(&g);
        if let Check::Sat(_) = check(cnf, &clauses, &core, limits)? {
            core.insert(g);
        }
    }
    Ok(core.into_iter().map(|g| cnf.groups[g]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::Origin;

    fn key(g: u32) -> GroupKey {
        GroupKey {
            origin: Origin::Statement(g),
            step: 0,
        }
    }

    #[test]
    fn drops_irrelevant_group() {
        let cnf = CnfInstance::from_groups(&[vec![vec![1]], vec![vec![-1]], vec![vec![2]]]);
        assert_eq!(extract_mus(&cnf, &Limits::default()).unwrap(), vec![key(0), key(1)]);
    }

    #[test]
    fn three_of_four() {
        let cnf = CnfInstance::from_groups(&[vec![vec![1, 2]], vec![vec![-1]], vec![vec![-2]], vec![vec![1, -2]]]);
        let core = extract_mus(&cnf, &Limits::default()).unwrap();
        assert_eq!(core.len(), 3);
    }

    #[test]
    fn satisfiable_is_rejected() {
        let cnf = CnfInstance::from_groups(&[vec![vec![1, 2]]]);
        assert_eq!(extract_mus(&cnf, &Limits::default()), Err(SatError::NotUnsat));
        assert!(matches!(solve(&cnf, &Limits::default()).unwrap(), MusResult::Sat(_)));
    }
}
