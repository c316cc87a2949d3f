//! Execution trace records and graph snapshots.
//!
//! A trace file is JSON Lines: one `snapshot` record holding the graph
//! before execution, followed by event records. Replaying the `delta` of
//! every `rule-applied` event on the snapshot reproduces the final graph.

use serde::{Deserialize, Serialize};

use crate::graph::{Change, EdgeId, Elem, Graph, NodeId};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapNode {
    pub id: NodeId,
    pub class: String,
    pub attrs: Vec<(String, Value)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapEdge {
    pub id: EdgeId,
    pub class: String,
    pub src: NodeId,
    pub tgt: NodeId,
    pub attrs: Vec<(String, Value)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
/// Nodes and edges, each sorted by id.
pub struct GraphSnapshot {
    pub nodes: Vec<SnapNode>,
    pub edges: Vec<SnapEdge>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReplayError {
    #[error("{0:?} already exists")]
    Exists(Elem),
    #[error("{0:?} does not exist")]
    Missing(Elem),
    #[error("node {0} removed while edges still touch it")]
    Dangling(NodeId),
    #[error("{elem:?} has no attribute `{attr}`")]
    NoAttribute { elem: Elem, attr: String },
}

impl GraphSnapshot {
    pub fn of(graph: &Graph) -> GraphSnapshot {
        let named = |el: Elem| -> Vec<(String, Value)> {
            let class = graph.class_of(el).expect("live element");
            let info = graph.schema().class(class);
            info.attributes()
                .iter()
                .zip(graph.attrs(el).expect("live element"))
                .map(|(a, v)| (a.name.clone(), v.clone()))
                .collect()
        };
        let nodes = graph
            .nodes()
            .map(|n| {
                let class = graph.class_name(n.into()).unwrap().to_string();
                SnapNode {
                    id: n,
                    class,
                    attrs: named(n.into()),
                }
            })
            .collect();
        let edges = graph
            .edges()
            .map(|e| {
                let (_, src, tgt) = graph.edge_ends(e).unwrap();
                let class = graph.class_name(e.into()).unwrap().to_string();
                SnapEdge {
                    id: e,
                    class,
                    src,
                    tgt,
                    attrs: named(e.into()),
                }
            })
            .collect();
        GraphSnapshot { nodes, edges }
    }

    fn node_pos(&self, id: NodeId) -> Result<usize, usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id)
    }

    fn edge_pos(&self, id: EdgeId) -> Result<usize, usize> {
        self.edges.binary_search_by_key(&id, |e| e.id)
    }

    pub fn apply(&mut self, change: &Change) -> Result<(), ReplayError> {
        match change {
            Change::NodeAdded { id, class, attrs } => {
                let at = self
                    .node_pos(*id)
                    .err()
                    .ok_or(ReplayError::Exists(Elem::Node(*id)))?;
                self.nodes.insert(
                    at,
                    SnapNode {
                        id: *id,
                        class: class.clone(),
                        attrs: attrs.clone(),
                    },
                );
            }
            Change::EdgeAdded {
                id,
                class,
                src,
                tgt,
                attrs,
            } => {
                let at = self
                    .edge_pos(*id)
                    .err()
                    .ok_or(ReplayError::Exists(Elem::Edge(*id)))?;
                for n in [src, tgt] {
                    if self.node_pos(*n).is_err() {
                        return Err(ReplayError::Missing(Elem::Node(*n)));
                    }
                }
                let e = SnapEdge {
                    id: *id,
                    class: class.clone(),
                    src: *src,
                    tgt: *tgt,
                    attrs: attrs.clone(),
                };
                self.edges.insert(at, e);
            }
            Change::NodeRemoved { id } => {
                let at = self
                    .node_pos(*id)
                    .map_err(|_| ReplayError::Missing(Elem::Node(*id)))?;
                if self.edges.iter().any(|e| e.src == *id || e.tgt == *id) {
                    return Err(ReplayError::Dangling(*id));
                }
                self.nodes.remove(at);
            }
            Change::EdgeRemoved { id } => {
                let at = self
                    .edge_pos(*id)
                    .map_err(|_| ReplayError::Missing(Elem::Edge(*id)))?;
                self.edges.remove(at);
            }
            Change::AttrSet { elem, attr, value } => {
                let missing = ReplayError::Missing(*elem);
                let attrs = match elem {
                    Elem::Node(n) => {
                        let at = self.node_pos(*n).map_err(|_| missing)?;
                        &mut self.nodes[at].attrs
                    }
                    Elem::Edge(e) => {
                        let at = self.edge_pos(*e).map_err(|_| missing)?;
                        &mut self.edges[at].attrs
                    }
                };
                let slot = attrs.iter_mut().find(|(n, _)| n == attr).ok_or_else(|| {
                    ReplayError::NoAttribute {
                        elem: *elem,
                        attr: attr.clone(),
                    }
                })?;
                slot.1 = value.clone();
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceBinding {
    pub name: String,
    pub value: String,
    /// Class of a bound graph element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TraceRecord {
    Snapshot {
        graph: GraphSnapshot,
    },
    SequenceEnter {
        step: u64,
        seq: String,
    },
    RuleApplied {
        step: u64,
        rule: String,
        bindings: Vec<TraceBinding>,
        delta: Vec<Change>,
        /// Text appended by `emit` statements of this application.
        #[serde(default)]
        emitted: String,
    },
    RuleFailed {
        step: u64,
        rule: String,
    },
    SequenceExit {
        step: u64,
        seq: String,
        result: bool,
    },
}

/// Receives trace records as execution proceeds.
pub trait TraceHook {
    fn record(&mut self, rec: TraceRecord);
}

impl TraceHook for Vec<TraceRecord> {
    fn record(&mut self, rec: TraceRecord) {
        self.push(rec);
    }
}

/// Replays every delta of `records` on the first snapshot among them.
pub fn replay(records: &[TraceRecord]) -> Result<GraphSnapshot, ReplayError> {
    let mut snap = None;
    for r in records {
        match r {
            TraceRecord::Snapshot { graph } if snap.is_none() => snap = Some(graph.clone()),
            TraceRecord::RuleApplied { delta, .. } => {
                let s = snap.get_or_insert_with(GraphSnapshot::default);
                for c in delta {
                    s.apply(c)?;
                }
            }
            _ => {}
        }
    }
    Ok(snap.unwrap_or_default())
}

pub fn to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Vec<TraceRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
