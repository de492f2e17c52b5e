use super::{PropKind, Spec};

/// Renders a spec back into the text format. Re-parsing the output yields the
/// same propositions, statement ids, slots, sentences and formulas.
pub fn render_spec(spec: &Spec) -> String {
    let mut out = String::new();
    for (kind, header) in [(PropKind::Input, "[INPUT]"), (PropKind::Output, "[OUTPUT]")] {
        out.push_str(header);
        out.push('\n');
        for p in spec.props.iter().filter(|p| p.kind == kind) {
            out.push_str(&p.name);
            out.push('\n');
        }
        out.push('\n');
    }

    let mut current = None;
    for st in spec.statements.iter().filter(|s| !s.topology) {
        if current != Some(st.slot) {
            if current.is_some() {
                out.push('\n');
            }
            out.push_str(&format!("[{}]\n", st.slot.section()));
            current = Some(st.slot);
        }
        if st.text == st.source {
            out.push_str(&st.source);
        } else {
            out.push_str(&format!("\"{}\": {}", st.text, spec.render_expr(&st.expr)));
        }
        out.push('\n');
    }

    if let Some(w) = &spec.workspace {
        if spec.statements.iter().any(|s| s.topology) {
            out.push_str("\n[TOPOLOGY]\n");
            out.push_str(&w.render_map());
        }
    }
    out
}
