//! Sectioned text format.
//!
//! ```text
//! [INPUT]
//! person
//! [OUTPUT]
//! r1
//! camera
//! [SYS_TRANS]
//! "Always activate the camera": next(camera)
//! ```
//!
//! A line may start with a quoted sentence label followed by `:`. Lines that
//! share a label form one sentence.

use std::collections::HashMap;

use super::{Atom, ParseError, PropId, PropKind, Proposition, Slot, Span, Spec, Statement, StmtId};
use crate::expr::Expr;
use crate::workspace::{compile_topology, Workspace};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Input,
    Output,
    Slot(Slot),
    Topology,
}

fn section_kind(name: &str) -> Option<Section> {
    Some(match name {
        "INPUT" => Section::Input,
        "OUTPUT" => Section::Output,
        "ENV_INIT" => Section::Slot(Slot::EnvInit),
        "ENV_TRANS" => Section::Slot(Slot::EnvTrans),
        "ENV_LIVENESS" => Section::Slot(Slot::EnvGoal),
        "SYS_INIT" => Section::Slot(Slot::SysInit),
        "SYS_TRANS" => Section::Slot(Slot::SysTrans),
        "SYS_LIVENESS" => Section::Slot(Slot::SysGoal),
        "TOPOLOGY" => Section::Topology,
        _ => return None,
    })
}

struct Line<'a> {
    no: u32,
    /// Content with comments removed, untrimmed.
    text: &'a str,
}

/// Drops a trailing `#` comment, ignoring `#` inside a quoted label.
fn strip_comment(raw: &str) -> &str {
    let mut quoted = false;
    for (i, c) in raw.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &raw[..i],
            _ => {}
        }
    }
    raw
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: [&str; 3] = ["next", "TRUE", "FALSE"];

pub fn parse_spec(source: &str) -> Result<Spec, ParseError> {
    let mut sections: Vec<(Section, u32, Vec<Line>)> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let no = i as u32 + 1;
        let text = strip_comment(raw);
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            let name = &trimmed[1..trimmed.len() - 1];
            let kind = section_kind(name).ok_or_else(|| ParseError::Syntax {
                line: no,
                msg: format!("unknown section [{name}]"),
            })?;
            sections.push((kind, no, Vec::new()));
            continue;
        }
        match sections.last_mut() {
            Some((_, _, lines)) => lines.push(Line { no, text }),
            None => {
                return Err(ParseError::Syntax {
                    line: no,
                    msg: "content before the first section header".into(),
                })
            }
        }
    }

    let mut props = Vec::new();
    for kind in [PropKind::Input, PropKind::Output] {
        let want = if kind == PropKind::Input {
            Section::Input
        } else {
            Section::Output
        };
        for (_, _, lines) in sections.iter().filter(|s| s.0 == want) {
            for l in lines {
                let name = l.text.trim();
                if !is_ident(name) || RESERVED.contains(&name) {
                    return Err(ParseError::Syntax {
                        line: l.no,
                        msg: format!("`{name}` is not a valid proposition name"),
                    });
                }
                if props.iter().any(|p: &Proposition| p.name == name) {
                    return Err(ParseError::DuplicateProposition {
                        name: name.to_string(),
                        line: l.no,
                    });
                }
                props.push(Proposition {
                    name: name.to_string(),
                    kind,
                });
            }
        }
    }
    let n_inputs = props.iter().filter(|p| p.kind == PropKind::Input).count();
    if props.len() > 63 {
        return Err(ParseError::Syntax {
            line: 1,
            msg: "at most 63 propositions are supported".into(),
        });
    }

    let mut statements = Vec::new();
    let mut warnings = Vec::new();
    let mut sentences: HashMap<String, u32> = HashMap::new();
    let mut next_sentence = 1u32;
    for (kind, _, lines) in &sections {
        let Section::Slot(slot) = *kind else { continue };
        for l in lines {
            let st = parse_statement(
                l,
                slot,
                &props,
                n_inputs,
                statements.len() as StmtId + 1,
                &mut sentences,
                &mut next_sentence,
                &mut warnings,
            )?;
            statements.push(st);
        }
    }

    let mut workspace = None;
    let mut topology_span = None;
    let topo: Vec<&(Section, u32, Vec<Line>)> = sections.iter().filter(|s| s.0 == Section::Topology).collect();
    if !topo.is_empty() {
        let w = Workspace::parse_lines(
            topo.iter()
                .flat_map(|(_, _, lines)| lines.iter().map(|l| (l.no, l.text))),
        )?;
        let start = topo[0].1;
        let end = topo
            .iter()
            .flat_map(|(_, h, lines)| std::iter::once((*h, "")).chain(lines.iter().map(|l| (l.no, l.text))))
            .map(|(no, t)| (no, t.trim_end().chars().count() as u32 + 1))
            .max_by_key(|(no, _)| *no)
            .unwrap_or((start, 1));
        let span = Span {
            line: start,
            col: 1,
            end_line: end.0,
            end_col: end.1,
        };
        let compiled = compile_topology(&w, &props, statements.len() as StmtId + 1, next_sentence, span)?;
        statements.extend(compiled);
        workspace = Some(w);
        topology_span = Some(span);
    }

    Ok(Spec {
        props,
        n_inputs,
        statements,
        workspace,
        topology_span,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn parse_statement(
    l: &Line,
    slot: Slot,
    props: &[Proposition],
    n_inputs: usize,
    id: StmtId,
    sentences: &mut HashMap<String, u32>,
    next_sentence: &mut u32,
    warnings: &mut Vec<String>,
) -> Result<Statement, ParseError> {
    let lead = l.text.len() - l.text.trim_start().len();
    let content = l.text.trim();
    let col = l.text[..lead].chars().count() as u32 + 1;
    let span = Span {
        line: l.no,
        col,
        end_line: l.no,
        end_col: col + content.chars().count() as u32,
    };

    let (label, body) = if let Some(rest) = content.strip_prefix('"') {
        let close = rest.find('"').ok_or_else(|| ParseError::Syntax {
            line: l.no,
            msg: "unterminated sentence label".into(),
        })?;
        let label = rest[..close].trim();
        let after = rest[close + 1..].trim_start();
        let body = after.strip_prefix(':').ok_or_else(|| ParseError::Syntax {
            line: l.no,
            msg: "expected `:` after sentence label".into(),
        })?;
        if label.is_empty() {
            return Err(ParseError::Syntax {
                line: l.no,
                msg: "empty sentence label".into(),
            });
        }
        (Some(label.to_string()), body.trim())
    } else {
        (None, content)
    };
    if body.is_empty() {
        return Err(ParseError::Syntax {
            line: l.no,
            msg: "missing formula".into(),
        });
    }

    let tokens = tokenize(body, l.no)?;
    let mut p = ExprParser {
        tokens,
        pos: 0,
        line: l.no,
        props,
        in_next: false,
    };
    let expr = p.parse_iff()?;
    if p.pos != p.tokens.len() {
        return Err(ParseError::Syntax {
            line: l.no,
            msg: format!("unexpected `{}`", p.tokens[p.pos].text()),
        });
    }

    let has_next = expr.any_atom(|a| a.next);
    match slot {
        Slot::EnvInit | Slot::SysInit | Slot::EnvGoal | Slot::SysGoal if has_next => {
            return Err(ParseError::NextInInitOrGoal { line: l.no });
        }
        Slot::EnvInit if expr.any_atom(|a| a.prop.index() >= n_inputs) => {
            return Err(ParseError::Syntax {
                line: l.no,
                msg: "environment initial conditions may only mention inputs".into(),
            });
        }
        Slot::EnvTrans if expr.any_atom(|a| a.next && a.prop.index() >= n_inputs) => {
            return Err(ParseError::Syntax {
                line: l.no,
                msg: "environment safety may not constrain next-step outputs".into(),
            });
        }
        Slot::SysInit if expr.any_atom(|a| a.prop.index() < n_inputs) => {
            warnings.push(format!("line {}: system initial condition mentions inputs", l.no));
        }
        _ => {}
    }

    let text = label.clone().unwrap_or_else(|| body.to_string());
    let sentence = match &label {
        Some(lbl) => *sentences.entry(lbl.clone()).or_insert_with(|| {
            *next_sentence += 1;
            *next_sentence - 1
        }),
        None => {
            *next_sentence += 1;
            *next_sentence - 1
        }
    };

    Ok(Statement {
        id,
        slot,
        sentence,
        text,
        source: body.to_string(),
        span,
        expr,
        topology: false,
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Not => "!".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::Imp => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(s: &str, line: u32) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '!' => {
                out.push(Tok::Not);
                i += 1
            }
            '&' => {
                out.push(Tok::And);
                i += 1
            }
            '|' => {
                out.push(Tok::Or);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Imp);
                i += 2
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push(Tok::Iff);
                i += 3
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    line: u32,
    props: &'a [Proposition],
    in_next: bool,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn parse_iff(&mut self) -> Result<Expr<Atom>, ParseError> {
        let mut lhs = self.parse_imp()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.parse_imp()?;
            lhs = Expr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_imp(&mut self) -> Result<Expr<Atom>, ParseError> {
        let lhs = self.parse_or()?;
        if self.eat(&Tok::Imp) {
            let rhs = self.parse_imp()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_or(&mut self) -> Result<Expr<Atom>, ParseError> {
        let mut items = vec![self.parse_and()?];
        while self.eat(&Tok::Or) {
            items.push(self.parse_and()?);
        }
        Ok(Expr::or(items))
    }

    fn parse_and(&mut self) -> Result<Expr<Atom>, ParseError> {
        let mut items = vec![self.parse_unary()?];
        while self.eat(&Tok::And) {
            items.push(self.parse_unary()?);
        }
        Ok(Expr::and(items))
    }

    fn parse_unary(&mut self) -> Result<Expr<Atom>, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::not(self.parse_unary()?));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr<Atom>, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.parse_iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "TRUE" => Ok(Expr::Const(true)),
                    "FALSE" => Ok(Expr::Const(false)),
                    "next" => {
                        if self.in_next {
                            return Err(self.err("nested next() is not allowed"));
                        }
                        if !self.eat(&Tok::LParen) {
                            return Err(self.err("expected `(` after next"));
                        }
                        self.in_next = true;
                        let e = self.parse_iff();
                        self.in_next = false;
                        let e = e?;
                        if !self.eat(&Tok::RParen) {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(e)
                    }
                    _ => {
                        let idx = self.props.iter().position(|p| p.name == name).ok_or(
                            ParseError::UndeclaredProposition {
                                name: name.clone(),
                                line: self.line,
                            },
                        )?;
                        Ok(Expr::Atom(Atom {
                            prop: PropId(idx as u16),
                            next: self.in_next,
                        }))
                    }
                }
            }
            Some(t) => Err(self.err(format!("unexpected `{}`", t.text()))),
            None => Err(self.err("unexpected end of formula")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn kitchen_deadlock_statements() {
        let spec = parse_spec(fixtures::KITCHEN_DEADLOCK).unwrap();
        let slots: Vec<(StmtId, Slot, u32)> = spec
            .statements
            .iter()
            .filter(|s| !s.topology)
            .map(|s| (s.id, s.slot, s.sentence))
            .collect();
        assert_eq!(
            slots,
            vec![
                (1, Slot::SysInit, 1),
                (2, Slot::SysInit, 2),
                (3, Slot::SysTrans, 2),
                (4, Slot::SysTrans, 3)
            ]
        );
        assert_eq!(spec.statement(2).unwrap().text, "Avoid the kitchen");
        assert_eq!(spec.statement(3).unwrap().text, "Avoid the kitchen");
        assert_ne!(spec.statement(2).unwrap().span, spec.statement(3).unwrap().span);
    }

    #[test]
    fn empty_sys_trans_section() {
        let spec = parse_spec("[OUTPUT]\na\n[SYS_TRANS]\n[SYS_LIVENESS]\na\n").unwrap();
        assert_eq!(spec.n_sys_trans(), 0);
        assert_eq!(spec.sys_goals().len(), 1);
    }

    #[test]
    fn next_in_liveness_rejected() {
        let err = parse_spec("[INPUT]\nperson\n[OUTPUT]\na\n[SYS_LIVENESS]\nnext(person)\n").unwrap_err();
        assert_eq!(err, ParseError::NextInInitOrGoal { line: 6 });
        let err = parse_spec("[OUTPUT]\na\n[SYS_INIT]\n!next(a)\n").unwrap_err();
        assert_eq!(err, ParseError::NextInInitOrGoal { line: 4 });
    }

    #[test]
    fn undeclared_and_duplicate() {
        let err = parse_spec("[OUTPUT]\na\n[SYS_TRANS]\na -> b\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::UndeclaredProposition {
                name: "b".into(),
                line: 4
            }
        );
        let err = parse_spec("[INPUT]\na\n[OUTPUT]\na\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateProposition { .. }));
    }

    #[test]
    fn next_distributes_over_subformula() {
        let spec = parse_spec("[INPUT]\nx\n[OUTPUT]\na\nb\n[SYS_TRANS]\nnext(a & !b) | x\n").unwrap();
        assert_eq!(spec.render_expr(&spec.statements[0].expr), "next(a) & !next(b) | x");
        assert!(parse_spec("[OUTPUT]\na\n[SYS_TRANS]\nnext(next(a))\n").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let spec = parse_spec("[OUTPUT]\na\nb\nc\n[SYS_INIT]\na -> b -> c\n!a & b | c <-> a\n").unwrap();
        let e0 = &spec.statements[0].expr;
        assert!(matches!(e0, Expr::Implies(_, r) if matches!(**r, Expr::Implies(..))));
        let e1 = &spec.statements[1].expr;
        assert!(matches!(e1, Expr::Iff(l, _) if matches!(**l, Expr::Or(_))));
    }

    #[test]
    fn env_restrictions() {
        assert!(parse_spec("[INPUT]\nx\n[OUTPUT]\na\n[ENV_INIT]\na\n").is_err());
        assert!(parse_spec("[INPUT]\nx\n[OUTPUT]\na\n[ENV_TRANS]\nnext(a) -> next(x)\n").is_err());
        let spec = parse_spec("[INPUT]\nx\n[OUTPUT]\na\n[SYS_INIT]\nx & a\n").unwrap();
        assert_eq!(spec.warnings.len(), 1);
    }

    #[test]
    fn comments_and_labels() {
        let spec =
            parse_spec("# header\n[OUTPUT]\na # trailing\n[SYS_TRANS]\n  \"Keep #a on\": next(a) # why\n").unwrap();
        let st = &spec.statements[0];
        assert_eq!(st.text, "Keep #a on");
        assert_eq!(st.source, "next(a)");
        assert_eq!((st.span.line, st.span.col), (5, 3));
    }

    #[test]
    fn topology_appended_after_source_statements() {
        let spec = parse_spec(fixtures::HALLWAY_LIVELOCK).unwrap();
        let first_topo = spec.statements.iter().position(|s| s.topology).unwrap();
        assert!(spec.statements[first_topo..].iter().all(|s| s.topology));
        let ids: Vec<StmtId> = spec.statements.iter().map(|s| s.id).collect();
        assert_eq!(ids, (1..=spec.statements.len() as StmtId).collect::<Vec<_>>());
        assert!(spec.topology_span.is_some());
    }
}
