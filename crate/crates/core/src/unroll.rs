//! Time-indexed instantiations of specification formulas.
//!
//! A depth-`d` unrolling copies the system safety conjuncts at steps `0..=d`,
//! so atoms range over steps `0..=d + 1`. Every conjunct keeps the id of the
//! statement it came from; synthetic pins use the non-statement origins.

use thiserror::Error;

use crate::expr::Expr;
use crate::sat::{Conjunct, Origin, TimedAtom};
use crate::spec::{Atom, PropId, Slot, Spec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnrollError {
    #[error("no system liveness condition number {0}")]
    UnknownGoal(usize),
    #[error("state has a legal system move; it is not deadlocked")]
    NotDeadlocked,
}

/// Replaces `p` by `p^step` and `next(p)` by `p^(step+1)`.
pub fn instantiate(e: &Expr<Atom>, step: u32) -> Expr<TimedAtom> {
    e.map(&|a: &Atom| TimedAtom {
        prop: a.prop,
        step: step + a.next as u32,
    })
}

fn literals(spec: &Spec, bits: u64, mask: u64, step: u32) -> Expr<TimedAtom> {
    Expr::and(
        (0..spec.n_props())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| {
                let a = Expr::atom(TimedAtom {
                    prop: PropId(i as u16),
                    step,
                });
                if bits >> i & 1 == 1 {
                    a
                } else {
                    Expr::not(a)
                }
            })
            .collect(),
    )
}

/// Literal-complete description of a full state.
pub fn state_formula(spec: &Spec, state: u64, step: u32) -> Expr<TimedAtom> {
    literals(spec, state, spec.input_mask() | spec.output_mask(), step)
}

pub fn input_formula(spec: &Spec, inputs: u64, step: u32) -> Expr<TimedAtom> {
    literals(spec, inputs, spec.input_mask(), step)
}

pub fn output_formula(spec: &Spec, outputs: u64, step: u32) -> Expr<TimedAtom> {
    literals(spec, outputs, spec.output_mask(), step)
}

/// System safety conjuncts at steps `0..=d`.
pub fn unroll_trans(spec: &Spec, d: u32) -> Vec<Conjunct> {
    let mut out = Vec::new();
    for step in 0..=d {
        for st in spec.in_slot(Slot::SysTrans) {
            out.push(Conjunct {
                origin: Origin::Statement(st.id),
                step,
                expr: instantiate(&st.expr, step),
            });
        }
    }
    out
}

/// System initial conditions at step 0 plus the depth-`d` safety unrolling.
pub fn unroll_from_init(spec: &Spec, d: u32) -> Vec<Conjunct> {
    let mut out: Vec<Conjunct> = spec
        .in_slot(Slot::SysInit)
        .map(|st| Conjunct {
            origin: Origin::Statement(st.id),
            step: 0,
            expr: instantiate(&st.expr, 0),
        })
        .collect();
    out.extend(unroll_trans(spec, d));
    out
}

/// System goal `k` (1-based) required at step `d`.
pub fn goal_clause(spec: &Spec, k: usize, d: u32) -> Result<Conjunct, UnrollError> {
    let goals = spec.sys_goals();
    let st = k
        .checked_sub(1)
        .and_then(|i| goals.get(i))
        .ok_or(UnrollError::UnknownGoal(k))?;
    Ok(Conjunct {
        origin: Origin::Statement(st.id),
        step: d,
        expr: instantiate(&st.expr, d),
    })
}

/// One-step instance from a fixed state under fixed next inputs.
fn one_step(spec: &Spec, state: u64, inputs: u64) -> Vec<Conjunct> {
    let mut out = vec![
        Conjunct {
            origin: Origin::Anchor,
            step: 0,
            expr: state_formula(spec, state, 0),
        },
        Conjunct {
            origin: Origin::EnvPin,
            step: 1,
            expr: input_formula(spec, inputs, 1),
        },
    ];
    out.extend(unroll_trans(spec, 0));
    out
}

/// Whether some output assignment satisfies every system safety conjunct
/// from `state` when the environment picks `inputs`.
pub fn has_sys_move(spec: &Spec, state: u64, inputs: u64) -> bool {
    let trans: Vec<_> = spec.in_slot(Slot::SysTrans).collect();
    let n_in = spec.n_inputs;
    (0..1u64 << spec.n_outputs()).any(|y| {
        let next = inputs | y << n_in;
        trans.iter().all(|st| {
            st.expr.eval(&|a: &Atom| {
                let word = if a.next { next } else { state };
                word & a.prop.bit() != 0
            })
        })
    })
}

/// Anchor at `state`, environment inputs pinned at step 1, and every system
/// safety conjunct once. Unsatisfiable exactly when the state is deadlocked.
pub fn deadlock_formula(spec: &Spec, state: u64, inputs: u64) -> Result<Vec<Conjunct>, UnrollError> {
    if has_sys_move(spec, state, inputs) {
        return Err(UnrollError::NotDeadlocked);
    }
    Ok(one_step(spec, state, inputs))
}

/// Input sequence of length `d + 1` cycling through the given inputs.
pub fn env_unrolling(cycle_inputs: &[u64], d: u32) -> Vec<u64> {
    assert!(!cycle_inputs.is_empty(), "cycle must be nonempty");
    (0..=d as usize).map(|i| cycle_inputs[i % cycle_inputs.len()]).collect()
}

/// Anchor at `start`, environment inputs pinned from the cycle for steps
/// `1..=d + 1`, safety unrolled to depth `d`, goal `k` at step `d`.
/// `cycle_inputs[0]` is the input part of `start`.
pub fn livelock_formula(
    spec: &Spec,
    start: u64,
    cycle_inputs: &[u64],
    k: usize,
    d: u32,
) -> Result<Vec<Conjunct>, UnrollError> {
    let goal = goal_clause(spec, k, d)?;
    let pins = env_unrolling(cycle_inputs, d + 1);
    let mut out = vec![Conjunct {
        origin: Origin::Anchor,
        step: 0,
        expr: state_formula(spec, start, 0),
    }];
    for (step, &x) in pins.iter().enumerate().skip(1) {
        out.push(Conjunct {
            origin: Origin::EnvPin,
            step: step as u32,
            expr: input_formula(spec, x, step as u32),
        });
    }
    out.extend(unroll_trans(spec, d));
    out.push(goal);
    Ok(out)
}

/// The single-step move check used by the game: anchor at `state`, pending
/// inputs and the proposed outputs pinned at step 1, safety once.
pub fn move_formula(spec: &Spec, state: u64, inputs: u64, outputs: u64) -> Vec<Conjunct> {
    let mut out = one_step(spec, state, inputs);
    out.push(Conjunct {
        origin: Origin::MovePin,
        step: 1,
        expr: output_formula(spec, outputs, 1),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sat::{extract_mus, solve, to_cnf, Limits, MusResult};
    use crate::spec::parse_spec;

    fn max_step(cs: &[Conjunct]) -> u32 {
        let mut m = 0;
        for c in cs {
            c.expr.for_each_atom(&mut |a: &TimedAtom| m = m.max(a.step));
        }
        m
    }

    fn is_unsat(cs: &[Conjunct]) -> bool {
        matches!(solve(&to_cnf(cs), &Limits::default()).unwrap(), MusResult::Unsat(_))
    }

    #[test]
    fn kitchen_unrolling_shapes() {
        let mut spec = parse_spec(fixtures::KITCHEN_DEADLOCK).unwrap();
        spec.statements.retain(|s| !s.topology);
        let name = |a: &TimedAtom| format!("{}^{}", spec.prop_name(a.prop), a.step);
        let render = |cs: &[Conjunct]| -> Vec<String> { cs.iter().map(|c| c.expr.render(&name)).collect() };
        assert_eq!(
            render(&unroll_from_init(&spec, 0)),
            vec!["kitchen^0", "!kitchen^0", "!kitchen^0", "camera^1"]
        );
        assert_eq!(render(&unroll_from_init(&spec, 1))[4..], ["!kitchen^1", "camera^2"]);
        assert!(is_unsat(&unroll_from_init(&spec, 0)));
    }

    #[test]
    fn empty_trans_leaves_init_only() {
        let spec = parse_spec("[OUTPUT]\na\n[SYS_INIT]\na\n").unwrap();
        assert_eq!(unroll_from_init(&spec, 4).len(), 1);
    }

    #[test]
    fn goal_lookup() {
        let spec = parse_spec(fixtures::HOSPITAL_PATROL).unwrap();
        let g = goal_clause(&spec, 1, 7).unwrap();
        assert_eq!(g.step, 7);
        assert_eq!(
            g.expr
                .render(&|a: &TimedAtom| format!("{}^{}", spec.prop_name(a.prop), a.step)),
            "r3^7"
        );
        assert_eq!(goal_clause(&spec, 2, 0), Err(UnrollError::UnknownGoal(2)));
        assert_eq!(goal_clause(&spec, 0, 0), Err(UnrollError::UnknownGoal(0)));
    }

    #[test]
    fn state_formula_is_literal_complete() {
        let spec = parse_spec(fixtures::HALLWAY_DEADLOCK).unwrap();
        let bits = |names: &[&str]| names.iter().fold(0u64, |acc, n| acc | spec.prop(n).unwrap().bit());
        let q1 = bits(&["person", "r5", "camera"]);
        let f = state_formula(&spec, q1, 0);
        let mut count = 0;
        f.for_each_atom(&mut |_: &TimedAtom| count += 1);
        assert_eq!(count, spec.n_props());
        assert!(f.eval(&|a: &TimedAtom| q1 & a.prop.bit() != 0));
        let none = state_formula(&spec, 0, 0);
        assert!(none.eval(&|_: &TimedAtom| false));
    }

    #[test]
    fn deadlock_instance_and_core() {
        let spec = parse_spec(fixtures::HALLWAY_DEADLOCK).unwrap();
        let bits = |names: &[&str]| names.iter().fold(0u64, |acc, n| acc | spec.prop(n).unwrap().bit());
        let q1 = bits(&["person", "r5", "camera"]);
        let person = bits(&["person"]);
        let f = deadlock_formula(&spec, q1, person).unwrap();
        assert!(max_step(&f) <= 1);
        let core = extract_mus(&to_cnf(&f), &Limits::default()).unwrap();
        let ids: Vec<Origin> = core.iter().map(|g| g.origin).collect();
        assert!(ids.contains(&Origin::Statement(2)));
        assert!(ids.contains(&Origin::Statement(3)));
        assert!(!ids.contains(&Origin::Statement(4)));
        assert_eq!(deadlock_formula(&spec, q1, 0), Err(UnrollError::NotDeadlocked));
    }

    #[test]
    fn env_unrolling_cycles() {
        assert_eq!(env_unrolling(&[0], 2), vec![0, 0, 0]);
        assert_eq!(env_unrolling(&[1, 0], 3), vec![1, 0, 1, 0]);
        assert_eq!(env_unrolling(&[1, 1, 1, 1], 5), vec![1; 6]);
    }

    #[test]
    fn livelock_step_range_and_depth_zero() {
        let spec = parse_spec(fixtures::HALLWAY_LIVELOCK).unwrap();
        let bits = |names: &[&str]| names.iter().fold(0u64, |acc, n| acc | spec.prop(n).unwrap().bit());
        let q0 = bits(&["person", "start", "camera"]);
        let person = bits(&["person"]);
        for d in [0, 3, 9] {
            let f = livelock_formula(&spec, q0, &[person], 1, d).unwrap();
            assert_eq!(max_step(&f), d + 1);
        }
        assert!(is_unsat(&livelock_formula(&spec, q0, &[person], 1, 0).unwrap()));
    }
}
