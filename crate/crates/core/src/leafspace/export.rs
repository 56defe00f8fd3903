use std::fmt::Write as _;
use std::str::FromStr;

use super::{LeafSpaceError, LeafSpaceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = LeafSpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(LeafSpaceError::UnknownFormat(other.to_string())),
        }
    }
}

/// Renders the leaf space. In DOT, strip ends are small points, each strip is an edge
/// between its two ends, vertices hang off the ends they are attached to, and
/// non-separated pairs are joined by dashed links.
pub fn export_graph(graph: &LeafSpaceGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => serde_json::to_string_pretty(graph).expect("graph serializes"),
        ExportFormat::Dot => to_dot(graph),
    }
}

fn end_node(graph: &LeafSpaceGraph, end: &crate::model::SideEnd) -> String {
    format!("end:{}.{}", graph.edges[end.strip.0].name, end.side)
}

fn to_dot(graph: &LeafSpaceGraph) -> String {
    let mut out = String::from("graph leafspace {\n");
    for att in &graph.attachments {
        let _ = writeln!(out, "  \"{}\" [shape=point];", end_node(graph, &att.end));
    }
    for e in &graph.edges {
        let lo = end_node(graph, &crate::model::SideEnd { strip: e.strip, side: crate::model::Side::Bottom });
        let hi = end_node(graph, &crate::model::SideEnd { strip: e.strip, side: crate::model::Side::Top });
        let _ = writeln!(out, "  \"{lo}\" -- \"{hi}\" [label=\"{}\"];", e.name);
    }
    for v in &graph.vertices {
        let _ = writeln!(out, "  \"{}\" [shape=circle];", v.label);
        for end in &v.ends {
            let _ = writeln!(out, "  \"{}\" -- \"{}\";", v.label, end_node(graph, end));
        }
    }
    for (a, b) in &graph.nonseparated {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [style=dashed, constraint=false];",
            graph.vertices[a.0].label, graph.vertices[b.0].label
        );
    }
    out.push_str("}\n");
    out
}

impl LeafSpaceGraph {
    pub fn from_json(text: &str) -> Result<LeafSpaceGraph, LeafSpaceError> {
        serde_json::from_str(text).map_err(|e| LeafSpaceError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::leafspace::build_leaf_space;

    #[test]
    fn json_round_trips() {
        for (name, _) in fixtures::VALID {
            let g = build_leaf_space(&fixtures::model(name));
            let text = export_graph(&g, ExportFormat::Json);
            assert_eq!(LeafSpaceGraph::from_json(&text).unwrap(), g);
        }
    }

    #[test]
    fn dot_marks_nonseparated_pairs() {
        let g = build_leaf_space(&fixtures::model("M1"));
        let dot = export_graph(&g, ExportFormat::Dot);
        assert!(dot.starts_with("graph leafspace {"));
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert!(dot.contains("\"g0\" -- \"g1\""));
        let g0 = build_leaf_space(&fixtures::model("M0"));
        assert!(!export_graph(&g0, ExportFormat::Dot).contains("dashed"));
    }

    #[test]
    fn unknown_format_is_an_error() {
        assert_eq!("svg".parse::<ExportFormat>(), Err(LeafSpaceError::UnknownFormat("svg".into())));
        assert_eq!("DOT".parse::<ExportFormat>(), Ok(ExportFormat::Dot));
    }
}
