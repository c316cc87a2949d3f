//! State-machine XMI writer.
//!
//! The output is produced in five passes: id assignment, prefix, states,
//! transitions, suffix. States and transitions are written in node id
//! order and referenced by positional paths (`/0/@states.3`), so equal
//! graphs give equal bytes. The exact template is in `docs/xmi-format.md`.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::graph::{Elem, Graph, NodeId};
use crate::metamodel::ClassId;
use crate::rules::expr::xml_escape;

pub const SM_NS: &str = "http://statemachine/1.0";

pub const PREFIX: &str = concat!(
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
    "<sm:StateMachine xmi:version=\"2.0\" xmlns:xmi=\"http://www.omg.org/XMI\" ",
    "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" xmlns:sm=\"http://statemachine/1.0\">\n",
);
pub const SUFFIX: &str = "</sm:StateMachine>\n";

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("schema has no class `{0}`")]
    MissingClass(&'static str),
    #[error("graph has no state machine")]
    NoStateMachine,
    #[error("graph has {0} state machines, expected one")]
    ManyStateMachines(usize),
    #[error("transition {transition} has {found} {end} edges, expected one state")]
    BadEndpoint {
        transition: NodeId,
        end: &'static str,
        found: usize,
    },
}

struct Classes {
    machine: ClassId,
    state: ClassId,
    transition: ClassId,
    source: ClassId,
    target: ClassId,
}

fn classes(graph: &Graph) -> Result<Classes, ExportError> {
    let s = graph.schema();
    let node = |n: &'static str| s.node_class(n).ok_or(ExportError::MissingClass(n));
    let edge = |n: &'static str| s.edge_class(n).ok_or(ExportError::MissingClass(n));
    Ok(Classes {
        machine: node("sm_StateMachine")?,
        state: node("sm_State")?,
        transition: node("sm_Transition")?,
        source: edge("sm_Transition_source")?,
        target: edge("sm_Transition_target")?,
    })
}

fn text(graph: &Graph, n: NodeId, attr: &str) -> String {
    match graph.get_attr(Elem::Node(n), attr) {
        Ok(v) => xml_escape(&v.to_string()),
        Err(_) => String::new(),
    }
}

pub fn export_state_machine_xmi(graph: &Graph) -> Result<String, ExportError> {
    let c = classes(graph)?;
    match graph
        .nodes_of_type(c.machine, true)
        .expect("node class")
        .len()
    {
        0 => return Err(ExportError::NoStateMachine),
        1 => {}
        n => return Err(ExportError::ManyStateMachines(n)),
    }
    let states = graph.nodes_of_type(c.state, true).expect("node class");
    let transitions = graph.nodes_of_type(c.transition, true).expect("node class");

    // 1. ids
    let mut ids: HashMap<NodeId, String> = HashMap::new();
    for (i, &s) in states.iter().enumerate() {
        ids.insert(s, format!("/0/@states.{i}"));
    }
    for (i, &t) in transitions.iter().enumerate() {
        ids.insert(t, format!("/0/@transitions.{i}"));
    }
    let end = |t: NodeId, class: ClassId, name: &'static str| -> Result<&str, ExportError> {
        let edges: Vec<_> = graph.outgoing_of(t, class).expect("live node").collect();
        let tgt = match edges.as_slice() {
            [e] => graph.target(*e).expect("live edge"),
            _ => {
                return Err(ExportError::BadEndpoint {
                    transition: t,
                    end: name,
                    found: edges.len(),
                })
            }
        };
        match states.binary_search(&tgt) {
            Ok(_) => Ok(&ids[&tgt]),
            Err(_) => Err(ExportError::BadEndpoint {
                transition: t,
                end: name,
                found: 0,
            }),
        }
    };

    // 2. prefix
    let mut out = String::from(PREFIX);
    // 3. states
    for &s in &states {
        writeln!(out, "  <states name=\"{}\"/>", text(graph, s, "name")).unwrap();
    }
    // 4. transitions
    for &t in &transitions {
        let source = end(t, c.source, "source")?;
        let target = end(t, c.target, "target")?;
        writeln!(
            out,
            "  <transitions trigger=\"{}\" action=\"{}\" source=\"{source}\" target=\"{target}\"/>",
            text(graph, t, "trigger"),
            text(graph, t, "action"),
        )
        .unwrap();
    }
    // 5. suffix
    out.push_str(SUFFIX);
    Ok(out)
}
