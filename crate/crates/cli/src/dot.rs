//! Graphviz export of the state digraph with its inputs.

use std::fmt::Write;

use inputsel_core::graph::{strongly_connected_components, StateDigraph};
use inputsel_core::model::{SparsityPattern, SwitchedStructuredSystem};

use crate::labels::Labels;

/// `parts` holds one `(A, B)` per mode; a fixed system has one part.
/// Source components are drawn as clusters, selected inputs filled and
/// unreachable states dashed.
pub fn render(
    parts: &[(&SparsityPattern, &SparsityPattern)],
    labels: &Labels,
    selected: &[bool],
    unreachable: &[usize],
) -> String {
    let n = labels.n;
    let mut union = SparsityPattern::new(n, n);
    for (a, _) in parts {
        union = union.or(a);
    }
    let scc = strongly_connected_components(&StateDigraph::from_pattern(&union));
    let mut out = String::from("digraph system {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (k, c) in scc.source_components().into_iter().enumerate() {
        let _ = writeln!(
            out,
            "  subgraph cluster_s{} {{\n    label=\"source {}\";\n    style=rounded;",
            k + 1,
            k + 1
        );
        for &x in &scc.components[c] {
            let _ = writeln!(out, "    {};", labels.state(x));
        }
        out.push_str("  }\n");
    }
    for x in unreachable {
        let _ = writeln!(out, "  {} [style=dashed];", labels.state(*x));
    }
    for (j, name) in labels.inputs.iter().enumerate() {
        let style = if selected[j] {
            ",style=filled,fillcolor=lightblue"
        } else {
            ""
        };
        let _ = writeln!(out, "  {name} [shape=box{style}];");
    }
    let multi = parts.len() > 1;
    let mut flat = 0;
    for (k, (a, b)) in parts.iter().enumerate() {
        let tag = if multi {
            format!(" [label=\"m{}\"]", k + 1)
        } else {
            String::new()
        };
        for (i, j) in a.entries() {
            let _ = writeln!(out, "  {} -> {}{tag};", labels.state(j), labels.state(i));
        }
        for (i, j) in b.entries() {
            let _ = writeln!(out, "  {} -> {};", labels.inputs[flat + j], labels.state(i));
        }
        flat += b.cols();
    }
    out.push_str("}\n");
    out
}

pub fn switched_parts(sw: &SwitchedStructuredSystem) -> Vec<(&SparsityPattern, &SparsityPattern)> {
    sw.modes().iter().map(|m| (&m.a, &m.b)).collect()
}
