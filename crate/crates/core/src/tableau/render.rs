//! JSON and GraphViz renderings of a tableau.

use std::fmt::Write;

use serde::Serialize;

use super::{Mark, Rule, Tableau, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct TableauJson {
    pub verdict: &'static str,
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub rule: Option<Rule>,
    pub label: Vec<String>,
    pub distinguished: Option<String>,
    pub selected: Option<String>,
    pub mark: Mark,
}

pub fn to_json(t: &Tableau) -> TableauJson {
    TableauJson {
        verdict: match t.verdict() {
            Verdict::Closed => "closed",
            Verdict::Open { .. } => "open",
        },
        nodes: t
            .nodes()
            .iter()
            .map(|n| NodeJson {
                id: n.id,
                parent: n.parent,
                rule: n.rule,
                label: n.label.formulas().iter().map(|f| f.to_string()).collect(),
                distinguished: n.label.distinguished().map(|d| d.to_string()),
                selected: n.selected.as_ref().map(|f| f.to_string()),
                mark: n.mark,
            })
            .collect(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT graph in the usual figure style: `×` under closed leaves, `⊙` under
/// open ones, edges labelled α, β, ∃ or X.
pub fn to_dot(t: &Tableau) -> String {
    let mut out = String::from("digraph tableau {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in t.nodes() {
        let mut parts: Vec<String> = n
            .label
            .formulas()
            .iter()
            .map(|f| {
                let text = f.pretty().to_string();
                if n.label.distinguished() == Some(f) {
                    format!("[{text}]")
                } else {
                    text
                }
            })
            .collect();
        if parts.is_empty() {
            parts.push("∅".to_string());
        }
        let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, escape(&parts.join(", ")));
        let marker = match n.mark {
            Mark::Closed => Some("×"),
            Mark::Open | Mark::OpenCycle { .. } => Some("⊙"),
            Mark::Unmarked => None,
        };
        if let Some(m) = marker {
            let _ = writeln!(out, "  m{} [label=\"{m}\", shape=plaintext];", n.id);
            let _ = writeln!(out, "  n{} -> m{} [arrowhead=none];", n.id, n.id);
        }
        if let Mark::OpenCycle { ancestor } = n.mark {
            let _ = writeln!(out, "  n{} -> n{ancestor} [style=dashed, constraint=false];", n.id);
        }
        if let (Some(p), Some(rule)) = (n.parent, n.rule) {
            let _ = writeln!(out, "  n{p} -> n{} [label=\"{}\"];", n.id, rule.edge_label());
        }
    }
    out.push_str("}\n");
    out
}
