//! JSON serialization of hierarchical logical trees.
//!
//! Formulas are stored as canonical machine syntax strings, spans as
//! `[start, end]` byte pairs.

use serde::{Deserialize, Serialize};

use super::{Hlt, HltNode, LateralKind, LateralRelation, NodeId};
use crate::formula::{parse_formula, serialize_formula, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum HltIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {id}: {source}")]
    Formula { id: NodeId, source: ParseError },
}

#[derive(Serialize, Deserialize)]
struct HltFile {
    instruction: String,
    root: NodeId,
    nodes: Vec<NodeFile>,
    edges: Vec<(NodeId, NodeId)>,
    laterals: Vec<LateralFile>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: NodeId,
    formula: String,
    spans: Vec<(usize, usize)>,
    level: usize,
}

#[derive(Serialize, Deserialize)]
struct LateralFile {
    a: NodeId,
    b: NodeId,
    kind: LateralKind,
}

pub fn hlt_to_json(h: &Hlt) -> String {
    let file = HltFile {
        instruction: h.instruction.clone(),
        root: h.root,
        nodes: h
            .nodes
            .iter()
            .map(|n| NodeFile {
                id: n.id,
                formula: serialize_formula(&n.label),
                spans: n.spans.clone(),
                level: n.level,
            })
            .collect(),
        edges: h.edges.clone(),
        laterals: h
            .laterals
            .iter()
            .map(|l| LateralFile {
                a: l.a,
                b: l.b,
                kind: l.kind,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("tree serialization cannot fail");
    out.push('\n');
    out
}

pub fn hlt_from_json(text: &str) -> Result<Hlt, HltIoError> {
    let file: HltFile = serde_json::from_str(text)?;
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for n in file.nodes {
        let label = parse_formula(&n.formula).map_err(|source| HltIoError::Formula {
            id: n.id,
            source,
        })?;
        nodes.push(HltNode {
            id: n.id,
            label,
            spans: n.spans,
            level: n.level,
        });
    }
    Ok(Hlt {
        instruction: file.instruction,
        root: file.root,
        nodes,
        edges: file.edges,
        laterals: file
            .laterals
            .into_iter()
            .map(|l| LateralRelation {
                a: l.a,
                b: l.b,
                kind: l.kind,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn json_round_trip_preserves_the_tree() {
        let h = fixtures::block_sorting_hlt();
        let json = hlt_to_json(&h);
        let back = hlt_from_json(&json).unwrap();
        assert_eq!(back, h);
        // and the encoding itself is stable
        assert_eq!(hlt_to_json(&back), json);
    }

    #[test]
    fn bad_formula_strings_are_reported_with_the_node_id() {
        let mut json = hlt_to_json(&fixtures::block_sorting_hlt());
        json = json.replace("touch(obj_r,obj_g;0.05)", "touch(obj_r;0.05)");
        let err = hlt_from_json(&json).unwrap_err();
        assert!(matches!(err, HltIoError::Formula { .. }));
    }
}
