//! Graph rewriting over typed attributed multigraphs.
//!
//! The crate bundles a metamodel with multiple inheritance, an append-only
//! graph store, a rule language with nested and recursive patterns, a
//! rule-application control language, Ecore/XMI/DOT model I/O, and the
//! state-machine extraction case built on top of all of them.

pub mod case;
pub mod graph;
pub mod lexer;
pub mod metamodel;
pub mod model_io;
pub mod rules;
pub mod schema_text;
pub mod sequences;
pub mod trace;
pub mod value;

pub use graph::{Change, EdgeId, Elem, Graph, GraphError, NodeId};
pub use metamodel::{ClassId, ClassKind, Schema, SchemaBuilder, SchemaError, ValueType};
pub use value::Value;
