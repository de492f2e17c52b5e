//! Random specifications and CNF instances.

use proptest::prelude::*;
use proptest::sample::select;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

fn expr(atoms: Vec<String>) -> BoxedStrategy<String> {
    let leaf = (select(atoms), any::<bool>())
        .prop_map(|(a, neg)| if neg { format!("!{a}") } else { a })
        .boxed();
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), select(vec!["&", "|", "->", "<->"]))
                .prop_map(|(a, b, op)| format!("({a} {op} {b})")),
            inner.prop_map(|a| format!("!{a}")),
        ]
    })
    .boxed()
}

fn section(out: &mut String, name: &str, items: &[String]) {
    if !items.is_empty() {
        out.push_str(&format!("[{name}]\n"));
        for i in items {
            out.push_str(i);
            out.push('\n');
        }
        out.push('\n');
    }
}

/// Specification text with up to `max_in` inputs, `max_out` outputs and
/// `max_trans` system safety statements.
pub fn spec_text(max_in: usize, max_out: usize, max_trans: usize) -> BoxedStrategy<String> {
    (1..=max_in, 1..=max_out)
        .prop_flat_map(move |(ni, no)| {
            let ins: Vec<String> = (0..ni).map(|i| format!("x{i}")).collect();
            let outs: Vec<String> = (0..no).map(|i| format!("y{i}")).collect();
            let cur: Vec<String> = ins.iter().chain(&outs).cloned().collect();
            let mut env_atoms = cur.clone();
            env_atoms.extend(ins.iter().map(|x| format!("next({x})")));
            let mut sys_atoms = cur.clone();
            sys_atoms.extend(cur.iter().map(|x| format!("next({x})")));
            (
                Just((ins.clone(), outs)),
                prop::collection::vec(expr(ins.clone()), 0..=1),
                prop::collection::vec(expr(env_atoms), 0..=2),
                prop::collection::vec(expr(cur.clone()), 0..=1),
                prop::collection::vec(expr(cur.clone()), 0..=2),
                prop::collection::vec(expr(sys_atoms), 1..=max_trans),
                prop::collection::vec(expr(cur), 0..=2),
            )
        })
        .prop_map(|((ins, outs), ei, et, el, si, st, sl)| {
            let mut s = String::new();
            section(&mut s, "INPUT", &ins);
            section(&mut s, "OUTPUT", &outs);
            section(&mut s, "ENV_INIT", &ei);
            section(&mut s, "ENV_TRANS", &et);
            section(&mut s, "ENV_LIVENESS", &el);
            section(&mut s, "SYS_INIT", &si);
            section(&mut s, "SYS_TRANS", &st);
            section(&mut s, "SYS_LIVENESS", &sl);
            s
        })
        .boxed()
}

/// Groups of DIMACS clauses over `1..=vars`.
pub fn cnf_groups(vars: i64, max_groups: usize) -> BoxedStrategy<Vec<Vec<Vec<i64>>>> {
    let lit = (1..=vars, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
    let clause = prop::collection::vec(lit, 1..=2);
    let group = prop::collection::vec(clause, 1..=2);
    prop::collection::vec(group, 2..=max_groups).boxed()
}

/// One value drawn from `strategy`, for code outside a proptest runner.
pub fn sample<S: Strategy>(strategy: &S, runner: &mut TestRunner) -> S::Value {
    strategy.new_tree(runner).expect("strategy generates").current()
}
