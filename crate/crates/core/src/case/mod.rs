//! State-machine extraction from mini-Java program graphs.
//!
//! The extraction itself lives in the rule files under `rules/`; this
//! module bundles the fixtures, runs the rules through the sequence
//! executor and reads the resulting machine back out of the graph.
//! [`oracle`] computes the same machine by plain traversal.

pub mod oracle;
pub mod program;

use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Elem, Graph, NodeId};
use crate::metamodel::{Schema, SchemaError};
use crate::model_io::{import_ecore, import_xmi, EcoreError, XmiError};
use crate::rules::{Engine, RewriteEnv, RuleError};
use crate::schema_text::{parse_schema_text, SchemaTextError};
use crate::sequences::{parse_seq, Executor, SeqError};
use crate::trace::TraceHook;
use crate::value::Value;

pub const JAVA_ECORE: &str = include_str!("../../fixtures/java.ecore");
pub const STATEMACHINE_ECORE: &str = include_str!("../../fixtures/statemachine.ecore");
pub const HELPERS_GM: &str = include_str!("../../fixtures/helpers.gm");
pub const TCP_SMALL_XMI: &str = include_str!("../../fixtures/tcp_small.xmi");

pub const EXTRACT_RULES: &str = include_str!("../../rules/extract.grg");
pub const EXPORT_RULES: &str = include_str!("../../rules/export.gri");
pub const VISUALIZE_RULES: &str = include_str!("../../rules/visualize.grg");
pub const SCRIPT: &str = include_str!("../../scripts/reengineering.grs");
pub const MACHINE_LAYOUT: &str = include_str!("../../layout/machine.toml");

pub const STATES: &str = "createStates";
pub const TRANSITIONS: &str = "[createTransition]";
pub const TRIGGERS: &str =
    "[triggerFromMethod] ;> [triggerFromCase] ;> [triggerFromCatch] ;> [triggerFallback]";
pub const ACTIONS: &str = "[actionFromSend] ;> [actionFallback]";
pub const EXPORT: &str =
    "exportIds ;> exportPrefix ;> [exportState] ;> [exportTransition] ;> exportSuffix";

/// Literal written for a trigger or action no rule could determine.
pub const FALLBACK: &str = "--";

/// The whole pipeline as one sequence; the shipped script runs the same text.
pub fn extraction_sequence() -> String {
    [STATES, TRANSITIONS, TRIGGERS, ACTIONS, EXPORT].join(" ;> ")
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error(transparent)]
    Ecore(#[from] EcoreError),
    #[error(transparent)]
    SchemaText(#[from] SchemaTextError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Xmi(#[from] XmiError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error("no abstract class named `State`")]
    NoStateRoot,
    #[error("{0} abstract classes named `State`")]
    ManyStateRoots(usize),
}

/// Mini-Java and state-machine metamodels plus the helper edge classes.
pub fn schema() -> Result<Arc<Schema>, CaseError> {
    let mut b = import_ecore(JAVA_ECORE)?.builder;
    b.merge(import_ecore(STATEMACHINE_ECORE)?.builder)?;
    b.merge(parse_schema_text(HELPERS_GM)?)?;
    Ok(Arc::new(b.build()?))
}

pub fn import_program(xml: &str, schema: Arc<Schema>) -> Result<Graph, CaseError> {
    Ok(import_xmi(xml, schema)?.graph)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub trigger: String,
    pub action: String,
}

/// A state machine as plain values: state names and transitions, each
/// sorted, duplicates kept.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Machine {
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
}

impl Machine {
    pub fn normalize(&mut self) {
        self.states.sort();
        self.transitions.sort();
    }
}

fn str_attr(g: &Graph, n: NodeId, attr: &str) -> String {
    g.get_attr(Elem::Node(n), attr)
        .map(|v| v.to_string())
        .unwrap_or_default()
}

fn single_end(g: &Graph, t: NodeId, edge_class: &str) -> Option<NodeId> {
    let c = g.schema().edge_class(edge_class)?;
    let mut it = g.outgoing_of(t, c).ok()?;
    let e = it.next()?;
    g.target(e).ok()
}

/// Reads the `sm_*` part of an extracted graph.
pub fn read_machine(g: &Graph) -> Machine {
    let schema = g.schema();
    let nodes = |class: &str| {
        schema
            .node_class(class)
            .map(|c| g.nodes_of_type(c, true).unwrap())
            .unwrap_or_default()
    };
    let mut m = Machine {
        states: nodes("sm_State")
            .into_iter()
            .map(|s| str_attr(g, s, "name"))
            .collect(),
        transitions: nodes("sm_Transition")
            .into_iter()
            .map(|t| Transition {
                source: single_end(g, t, "sm_Transition_source")
                    .map(|s| str_attr(g, s, "name"))
                    .unwrap_or_default(),
                target: single_end(g, t, "sm_Transition_target")
                    .map(|s| str_attr(g, s, "name"))
                    .unwrap_or_default(),
                trigger: str_attr(g, t, "trigger"),
                action: str_attr(g, t, "action"),
            })
            .collect(),
    };
    m.normalize();
    m
}

fn count(g: &Graph, class: &str) -> usize {
    g.schema()
        .node_class(class)
        .map_or(0, |c| g.nodes_of_type(c, true).unwrap().len())
}

/// Abstract classes named `State`.
pub fn state_roots(g: &Graph) -> Vec<NodeId> {
    let Some(class) = g.schema().node_class("java_Class") else {
        return Vec::new();
    };
    g.nodes_of_type(class, true)
        .unwrap()
        .into_iter()
        .filter(|&c| {
            g.get_attr(c.into(), "name").ok().and_then(Value::as_str) == Some("State")
                && g.get_attr(c.into(), "isAbstract")
                    .ok()
                    .and_then(Value::as_bool)
                    == Some(true)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub states: usize,
    pub transitions: usize,
    pub machine: Machine,
    /// The XMI written by the export rules.
    pub xmi: String,
}

/// The compiled extraction and export rules.
pub struct Extraction {
    engine: Engine,
}

impl Extraction {
    pub fn new(schema: Arc<Schema>) -> Result<Extraction, CaseError> {
        let src = format!("{EXTRACT_RULES}\n{EXPORT_RULES}\n{VISUALIZE_RULES}");
        Ok(Extraction {
            engine: Engine::from_source(schema, &src)?,
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    fn run(
        &self,
        g: &mut Graph,
        env: &mut RewriteEnv,
        seq: &str,
        trace: Option<&mut dyn TraceHook>,
    ) -> Result<bool, CaseError> {
        let seq = parse_seq(seq).map_err(SeqError::Syntax)?;
        let mut ex = Executor::new(&self.engine, g, env);
        if let Some(t) = trace {
            ex = ex.with_trace(t);
        }
        Ok(ex.run(&seq)?)
    }

    /// Runs any sequence over the bundled rules.
    pub fn run_sequence(
        &self,
        g: &mut Graph,
        env: &mut RewriteEnv,
        seq: &str,
    ) -> Result<bool, CaseError> {
        self.run(g, env, seq, None)
    }

    fn check_roots(g: &Graph) -> Result<(), CaseError> {
        match state_roots(g).len() {
            0 => Err(CaseError::NoStateRoot),
            1 => Ok(()),
            n => Err(CaseError::ManyStateRoots(n)),
        }
    }

    /// Returns the number of states.
    pub fn extract_states(&self, g: &mut Graph, env: &mut RewriteEnv) -> Result<usize, CaseError> {
        Self::check_roots(g)?;
        self.run(g, env, STATES, None)?;
        Ok(count(g, "sm_State"))
    }

    /// Returns the number of transitions.
    pub fn extract_transitions(
        &self,
        g: &mut Graph,
        env: &mut RewriteEnv,
    ) -> Result<usize, CaseError> {
        self.run(g, env, TRANSITIONS, None)?;
        Ok(count(g, "sm_Transition"))
    }

    pub fn assign_triggers(&self, g: &mut Graph, env: &mut RewriteEnv) -> Result<(), CaseError> {
        self.run(g, env, TRIGGERS, None).map(drop)
    }

    pub fn assign_actions(&self, g: &mut Graph, env: &mut RewriteEnv) -> Result<(), CaseError> {
        self.run(g, env, ACTIONS, None).map(drop)
    }

    /// Runs the export rules and returns the text they emitted.
    pub fn export(&self, g: &mut Graph, env: &mut RewriteEnv) -> Result<String, CaseError> {
        let start = env.emitted.len();
        self.run(g, env, EXPORT, None)?;
        Ok(env.emitted[start..].to_string())
    }

    /// The full pipeline, optionally traced.
    pub fn run_all(
        &self,
        g: &mut Graph,
        trace: Option<&mut dyn TraceHook>,
    ) -> Result<Summary, CaseError> {
        Self::check_roots(g)?;
        let mut env = RewriteEnv::new();
        self.run(g, &mut env, &extraction_sequence(), trace)?;
        Ok(Summary {
            states: count(g, "sm_State"),
            transitions: count(g, "sm_Transition"),
            machine: read_machine(g),
            xmi: env.emitted,
        })
    }
}

/// Runs the shipped extraction sequence on an imported program graph.
pub fn run_extraction(g: &mut Graph) -> Result<Summary, CaseError> {
    Extraction::new(g.schema().clone())?.run_all(g, None)
}
