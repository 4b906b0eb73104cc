//! Proof-tree export as Graphviz DOT or JSON.

use serde::{Deserialize, Serialize};

use crate::print::formula_to_string;
use crate::tableau::{NodeStatus, ProofTree};

const DOT_LABEL_LIMIT: usize = 120;

/// A proof-tree node with its label printed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub rule: String,
    pub label: Vec<String>,
    pub status: NodeStatus,
    pub closed: bool,
    pub layer: bool,
    pub nexp: usize,
    pub loop_target: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDump {
    pub depth_param: Option<String>,
    pub nodes: Vec<NodeDump>,
}

impl TreeDump {
    pub fn from_tree(tree: &ProofTree) -> Self {
        let sig = &tree.sig;
        TreeDump {
            depth_param: tree.depth_param.map(|n| sig.param(n).name.clone()),
            nodes: tree
                .nodes
                .iter()
                .map(|n| NodeDump {
                    id: n.id,
                    parent: n.parent,
                    children: n.children.clone(),
                    rule: n.rule.name().to_string(),
                    label: n.label.iter().map(|f| formula_to_string(sig, f)).collect(),
                    status: n.status,
                    closed: n.closed(),
                    layer: n.layer,
                    nexp: n.nexp,
                    loop_target: n.loop_target,
                })
                .collect(),
        }
    }
}

pub fn to_json(tree: &ProofTree) -> String {
    serde_json::to_string_pretty(&TreeDump::from_tree(tree)).expect("tree dumps serialize")
}

pub fn from_json(text: &str) -> Result<TreeDump, serde_json::Error> {
    serde_json::from_str(text)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn truncate(s: &str, limit: usize) -> String {
    if s.chars().count() <= limit {
        return s.to_string();
    }
    let mut out: String = s.chars().take(limit - 3).collect();
    out.push_str("...");
    out
}

pub fn to_dot(tree: &ProofTree) -> String {
    let dump = TreeDump::from_tree(tree);
    let mut out = String::from("digraph proof {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in &dump.nodes {
        let text = truncate(&format!("{}\n{{{}}}", n.rule, n.label.join(", ")), DOT_LABEL_LIMIT);
        let style = if n.closed {
            ", style=filled, fillcolor=gray"
        } else {
            ""
        };
        out.push_str(&format!(
            "  n{} [label=\"{}\"{}];\n",
            n.id,
            escape(&text).replace('\n', "\\n"),
            style
        ));
    }
    for n in &dump.nodes {
        for c in &n.children {
            out.push_str(&format!("  n{} -> n{};\n", n.id, c));
        }
        if let Some(t) = n.loop_target {
            out.push_str(&format!(
                "  n{} -> n{} [style=dashed, constraint=false];\n",
                n.id, t
            ));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Formula, NodeLabel};
    use crate::sig::Signature;
    use crate::tableau::{ProofNode, RuleTag};

    fn single_closed() -> ProofTree {
        let mut label = NodeLabel::new();
        label.insert(Formula::False);
        ProofTree {
            sig: Signature::new(),
            nodes: vec![ProofNode {
                id: 0,
                label,
                parent: None,
                children: vec![],
                rule: RuleTag::Start,
                expanded_by: None,
                status: NodeStatus::Closed,
                layer: false,
                nexp: 0,
                loop_target: None,
            }],
            depth_param: None,
        }
    }

    #[test]
    fn closed_node_is_gray() {
        let dot = to_dot(&single_closed());
        assert_eq!(dot.matches("fillcolor=gray").count(), 1);
        assert!(dot.contains("n0 [label=\"Start\\n{false}\""));
    }

    #[test]
    fn json_round_trip() {
        let t = single_closed();
        let back = from_json(&to_json(&t)).unwrap();
        assert_eq!(back, TreeDump::from_tree(&t));
    }

    #[test]
    fn long_labels_are_truncated() {
        let s = "x".repeat(200);
        assert_eq!(truncate(&s, 120).chars().count(), 120);
        assert!(truncate(&s, 120).ends_with("..."));
    }
}
