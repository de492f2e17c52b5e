//! Human-readable and JSON renderings of a [`Diagnosis`].

use std::fmt::Write;

use crate::engine::{Diagnosis, FailureMode, Flag, Method, Verdict};

/// One line: verdict, failure mode and the blocked goal.
pub fn summary(d: &Diagnosis, goal_text: Option<&str>) -> String {
    let mut s = match d.verdict {
        Verdict::Synthesizable => "SYNTHESIZABLE".to_string(),
        Verdict::Unsatisfiable => "UNSATISFIABLE".to_string(),
        Verdict::Unrealizable => "UNREALIZABLE".to_string(),
    };
    if let Some(m) = d.failure_mode {
        s.push_str(match m {
            FailureMode::Deadlock => " (deadlock)",
            FailureMode::Livelock => " (livelock)",
        });
    }
    if let Some(g) = goal_text {
        let _ = write!(s, ", goal: {g}");
    }
    s
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::SatUnroll => "SAT unrolling",
        Method::CounterstrategySat => "counterstrategy unrolling",
        Method::IteratedRealizability => "iterated realizability",
    }
}

fn true_props(d: &Diagnosis) -> Option<String> {
    d.bad_init.as_ref().map(|m| {
        let on: Vec<&str> = m.iter().filter(|(_, &v)| v).map(|(n, _)| n.as_str()).collect();
        if on.is_empty() {
            "(all false)".to_string()
        } else {
            on.join(" ")
        }
    })
}

pub fn check_text(d: &Diagnosis, goal_text: Option<&str>) -> String {
    let mut out = summary(d, goal_text);
    out.push('\n');
    if let Some(init) = true_props(d) {
        let _ = writeln!(out, "initial state: {init}");
    }
    out
}

pub fn explain_text(d: &Diagnosis, goal_text: Option<&str>) -> String {
    let mut out = check_text(d, goal_text);
    if let Some(m) = d.method {
        let _ = write!(out, "method: {}", method_name(m));
        if let Some(depth) = d.depth_used {
            let _ = write!(out, ", depth {depth}");
        }
        out.push('\n');
    }
    if !d.core.is_empty() {
        out.push_str("The statements that cause the problem are:\n");
        for e in &d.core {
            if e.topology {
                let _ = writeln!(out, "  {}", e.text);
            } else {
                let _ = writeln!(out, "  line {}: {}", e.span.line, e.text);
                if e.source != e.text {
                    let _ = writeln!(out, "      {}", e.source);
                }
            }
        }
    }
    for f in &d.flags {
        let _ = writeln!(
            out,
            "flag: {}",
            match f {
                Flag::PossiblyNotMeaningful => "possibly-not-meaningful",
                Flag::GroupMinimal => "group-minimal",
            }
        );
    }
    for n in &d.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn to_json(d: &Diagnosis) -> String {
    serde_json::to_string_pretty(d).expect("diagnosis serializes")
}

pub fn from_json(text: &str) -> Result<Diagnosis, serde_json::Error> {
    serde_json::from_str(text)
}
