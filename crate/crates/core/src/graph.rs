//! Attributed typed multigraph store.
//!
//! Element identities are indices into append-only tables and are never
//! reused, so a stale [`NodeId`]/[`EdgeId`] is always detected. Every
//! iteration is in creation order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metamodel::{ClassId, ClassKind, Schema, SchemaError};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Elem {
    Node(NodeId),
    Edge(EdgeId),
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Node(n) => n.fmt(f),
            Elem::Edge(e) => e.fmt(f),
        }
    }
}

impl From<NodeId> for Elem {
    fn from(n: NodeId) -> Self {
        Elem::Node(n)
    }
}

impl From<EdgeId> for Elem {
    fn from(e: EdgeId) -> Self {
        Elem::Edge(e)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("class `{0}` is abstract")]
    AbstractClass(String),
    #[error("`{class}` is not a {expected} class")]
    WrongKind { class: String, expected: ClassKind },
    #[error("dangling element reference {0}")]
    Dangling(Elem),
    #[error("class `{class}` has no attribute `{attr}`")]
    UnknownAttribute { class: String, attr: String },
    #[error("attribute `{attr}` expects {expected}, got {found}")]
    TypeMismatch {
        attr: String,
        expected: String,
        found: String,
    },
    #[error("name `{0}` is already taken")]
    DuplicateName(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// One recorded mutation; see [`Graph::start_journal`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Change {
    NodeAdded {
        id: NodeId,
        class: String,
        attrs: Vec<(String, Value)>,
    },
    EdgeAdded {
        id: EdgeId,
        class: String,
        src: NodeId,
        tgt: NodeId,
        attrs: Vec<(String, Value)>,
    },
    NodeRemoved {
        id: NodeId,
    },
    EdgeRemoved {
        id: EdgeId,
    },
    AttrSet {
        elem: Elem,
        attr: String,
        value: Value,
    },
}

#[derive(Clone, Debug)]
struct NodeData {
    class: ClassId,
    attrs: Vec<Value>,
    out: Vec<EdgeId>,
    inc: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
struct EdgeData {
    class: ClassId,
    src: NodeId,
    tgt: NodeId,
    attrs: Vec<Value>,
}

#[derive(Clone, Debug)]
pub struct Graph {
    schema: Arc<Schema>,
    nodes: Vec<Option<NodeData>>,
    edges: Vec<Option<EdgeData>>,
    node_count: usize,
    edge_count: usize,
    // per exact class, ascending ids
    nodes_by_class: Vec<Vec<NodeId>>,
    edges_by_class: Vec<Vec<EdgeId>>,
    names: BTreeMap<String, Elem>,
    name_of: HashMap<Elem, String>,
    journal: Option<Vec<Change>>,
}

impl Graph {
    pub fn new(schema: Arc<Schema>) -> Graph {
        let n = schema.classes().len();
        Graph {
            schema,
            nodes: Vec::new(),
            edges: Vec::new(),
            node_count: 0,
            edge_count: 0,
            nodes_by_class: vec![Vec::new(); n],
            edges_by_class: vec![Vec::new(); n],
            names: BTreeMap::new(),
            name_of: HashMap::new(),
            journal: None,
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    fn check_instantiable(&self, class: ClassId, kind: ClassKind) -> Result<(), GraphError> {
        let info = self.schema.try_class(class)?;
        if info.kind() != kind {
            return Err(GraphError::WrongKind {
                class: info.name().to_string(),
                expected: kind,
            });
        }
        if info.is_abstract() {
            return Err(GraphError::AbstractClass(info.name().to_string()));
        }
        Ok(())
    }

    fn default_attrs(&self, class: ClassId) -> Vec<Value> {
        self.schema
            .class(class)
            .attributes()
            .iter()
            .map(|a| Value::default_for(&a.value_type, &self.schema))
            .collect()
    }

    fn named_attrs(&self, class: ClassId, values: &[Value]) -> Vec<(String, Value)> {
        self.schema
            .class(class)
            .attributes()
            .iter()
            .zip(values)
            .map(|(a, v)| (a.name.clone(), v.clone()))
            .collect()
    }

    pub fn add_node(&mut self, class: ClassId) -> Result<NodeId, GraphError> {
        self.check_instantiable(class, ClassKind::Node)?;
        let id = NodeId(self.nodes.len() as u32);
        let attrs = self.default_attrs(class);
        if self.journal.is_some() {
            let change = Change::NodeAdded {
                id,
                class: self.schema.class(class).name().to_string(),
                attrs: self.named_attrs(class, &attrs),
            };
            if let Some(j) = &mut self.journal {
                j.push(change);
            }
        }
        self.nodes.push(Some(NodeData {
            class,
            attrs,
            out: Vec::new(),
            inc: Vec::new(),
        }));
        self.nodes_by_class[class.index()].push(id);
        self.node_count += 1;
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        class: ClassId,
        src: NodeId,
        tgt: NodeId,
    ) -> Result<EdgeId, GraphError> {
        self.check_instantiable(class, ClassKind::Edge)?;
        self.node_data(src)?;
        self.node_data(tgt)?;
        let id = EdgeId(self.edges.len() as u32);
        let attrs = self.default_attrs(class);
        if self.journal.is_some() {
            let change = Change::EdgeAdded {
                id,
                class: self.schema.class(class).name().to_string(),
                src,
                tgt,
                attrs: self.named_attrs(class, &attrs),
            };
            if let Some(j) = &mut self.journal {
                j.push(change);
            }
        }
        self.edges.push(Some(EdgeData {
            class,
            src,
            tgt,
            attrs,
        }));
        self.nodes[src.0 as usize].as_mut().unwrap().out.push(id);
        self.nodes[tgt.0 as usize].as_mut().unwrap().inc.push(id);
        self.edges_by_class[class.index()].push(id);
        self.edge_count += 1;
        Ok(id)
    }

    pub fn remove_edge(&mut self, e: EdgeId) -> Result<(), GraphError> {
        let data = self
            .edges
            .get_mut(e.0 as usize)
            .and_then(Option::take)
            .ok_or(GraphError::Dangling(Elem::Edge(e)))?;
        let src = self.nodes[data.src.0 as usize]
            .as_mut()
            .expect("edge source live");
        src.out.retain(|&x| x != e);
        let tgt = self.nodes[data.tgt.0 as usize]
            .as_mut()
            .expect("edge target live");
        tgt.inc.retain(|&x| x != e);
        let list = &mut self.edges_by_class[data.class.index()];
        if let Ok(pos) = list.binary_search(&e) {
            list.remove(pos);
        }
        self.edge_count -= 1;
        self.drop_name(Elem::Edge(e));
        if let Some(j) = self.journal.as_mut() {
            j.push(Change::EdgeRemoved { id: e });
        }
        Ok(())
    }

    /// Removes a node together with all incident edges.
    pub fn remove_node(&mut self, n: NodeId) -> Result<(), GraphError> {
        let data = self.node_data(n)?;
        let mut incident: Vec<EdgeId> = data.out.iter().chain(&data.inc).copied().collect();
        incident.sort();
        incident.dedup();
        for e in incident {
            self.remove_edge(e)?;
        }
        let data = self.nodes[n.0 as usize].take().expect("checked live");
        let list = &mut self.nodes_by_class[data.class.index()];
        if let Ok(pos) = list.binary_search(&n) {
            list.remove(pos);
        }
        self.node_count -= 1;
        self.drop_name(Elem::Node(n));
        if let Some(j) = self.journal.as_mut() {
            j.push(Change::NodeRemoved { id: n });
        }
        Ok(())
    }

    pub fn remove(&mut self, el: Elem) -> Result<(), GraphError> {
        match el {
            Elem::Node(n) => self.remove_node(n),
            Elem::Edge(e) => self.remove_edge(e),
        }
    }

    fn node_data(&self, n: NodeId) -> Result<&NodeData, GraphError> {
        self.nodes
            .get(n.0 as usize)
            .and_then(Option::as_ref)
            .ok_or(GraphError::Dangling(Elem::Node(n)))
    }

    fn edge_data(&self, e: EdgeId) -> Result<&EdgeData, GraphError> {
        self.edges
            .get(e.0 as usize)
            .and_then(Option::as_ref)
            .ok_or(GraphError::Dangling(Elem::Edge(e)))
    }

    pub fn is_live(&self, el: Elem) -> bool {
        match el {
            Elem::Node(n) => self.node_data(n).is_ok(),
            Elem::Edge(e) => self.edge_data(e).is_ok(),
        }
    }

    pub fn class_of(&self, el: Elem) -> Result<ClassId, GraphError> {
        match el {
            Elem::Node(n) => Ok(self.node_data(n)?.class),
            Elem::Edge(e) => Ok(self.edge_data(e)?.class),
        }
    }

    pub fn node_class(&self, n: NodeId) -> Result<ClassId, GraphError> {
        Ok(self.node_data(n)?.class)
    }

    pub fn edge_class(&self, e: EdgeId) -> Result<ClassId, GraphError> {
        Ok(self.edge_data(e)?.class)
    }

    pub fn source(&self, e: EdgeId) -> Result<NodeId, GraphError> {
        Ok(self.edge_data(e)?.src)
    }

    pub fn target(&self, e: EdgeId) -> Result<NodeId, GraphError> {
        Ok(self.edge_data(e)?.tgt)
    }

    /// `(class, source, target)` of a live edge.
    pub fn edge_ends(&self, e: EdgeId) -> Option<(ClassId, NodeId, NodeId)> {
        self.edge_data(e).ok().map(|d| (d.class, d.src, d.tgt))
    }

    pub fn attrs(&self, el: Elem) -> Result<&[Value], GraphError> {
        match el {
            Elem::Node(n) => Ok(&self.node_data(n)?.attrs),
            Elem::Edge(e) => Ok(&self.edge_data(e)?.attrs),
        }
    }

    pub fn get_attr(&self, el: Elem, name: &str) -> Result<&Value, GraphError> {
        let class = self.class_of(el)?;
        let slot = self.attr_slot(class, name)?;
        Ok(&self.attrs(el)?[slot])
    }

    fn attr_slot(&self, class: ClassId, name: &str) -> Result<usize, GraphError> {
        let info = self.schema.class(class);
        info.attr_slot(name)
            .ok_or_else(|| GraphError::UnknownAttribute {
                class: info.name().to_string(),
                attr: name.to_string(),
            })
    }

    pub fn set_attr(&mut self, el: Elem, name: &str, value: Value) -> Result<(), GraphError> {
        let class = self.class_of(el)?;
        let slot = self.attr_slot(class, name)?;
        let decl = &self.schema.class(class).attributes()[slot];
        let value = value.coerce(&decl.value_type);
        if !value.conforms(&decl.value_type, &self.schema) {
            return Err(GraphError::TypeMismatch {
                attr: name.to_string(),
                expected: decl.value_type.to_string(),
                found: value.to_string(),
            });
        }
        if let Some(j) = self.journal.as_mut() {
            j.push(Change::AttrSet {
                elem: el,
                attr: name.to_string(),
                value: value.clone(),
            });
        }
        let attrs = match el {
            Elem::Node(n) => &mut self.nodes[n.0 as usize].as_mut().unwrap().attrs,
            Elem::Edge(e) => &mut self.edges[e.0 as usize].as_mut().unwrap().attrs,
        };
        attrs[slot] = value;
        Ok(())
    }

    /// Live nodes in creation order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some())
            .map(|(i, _)| NodeId(i as u32))
    }

    /// Live edges in creation order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_some())
            .map(|(i, _)| EdgeId(i as u32))
    }

    pub fn nodes_of_type(
        &self,
        class: ClassId,
        include_subtypes: bool,
    ) -> Result<Vec<NodeId>, GraphError> {
        let info = self.schema.try_class(class)?;
        if info.kind() != ClassKind::Node {
            return Err(GraphError::WrongKind {
                class: info.name().to_string(),
                expected: ClassKind::Node,
            });
        }
        if !include_subtypes {
            return Ok(self.nodes_by_class[class.index()].clone());
        }
        if class == self.schema.node_root() {
            return Ok(self.nodes().collect());
        }
        let mut out: Vec<NodeId> = info
            .subtypes()
            .iter()
            .flat_map(|c| self.nodes_by_class[c.index()].iter().copied())
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn edges_of_type(
        &self,
        class: ClassId,
        include_subtypes: bool,
    ) -> Result<Vec<EdgeId>, GraphError> {
        let info = self.schema.try_class(class)?;
        if info.kind() != ClassKind::Edge {
            return Err(GraphError::WrongKind {
                class: info.name().to_string(),
                expected: ClassKind::Edge,
            });
        }
        if !include_subtypes {
            return Ok(self.edges_by_class[class.index()].clone());
        }
        if class == self.schema.edge_root() {
            return Ok(self.edges().collect());
        }
        let mut out: Vec<EdgeId> = info
            .subtypes()
            .iter()
            .flat_map(|c| self.edges_by_class[c.index()].iter().copied())
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Outgoing edges of `n` in creation order.
    pub fn outgoing(&self, n: NodeId) -> Result<&[EdgeId], GraphError> {
        Ok(&self.node_data(n)?.out)
    }

    pub fn incoming(&self, n: NodeId) -> Result<&[EdgeId], GraphError> {
        Ok(&self.node_data(n)?.inc)
    }

    /// Outgoing edges whose class is a subtype of `class`.
    pub fn outgoing_of(
        &self,
        n: NodeId,
        class: ClassId,
    ) -> Result<impl Iterator<Item = EdgeId> + '_, GraphError> {
        let list = self.outgoing(n)?;
        Ok(list.iter().copied().filter(move |&e| {
            self.schema
                .is_a(self.edges[e.0 as usize].as_ref().unwrap().class, class)
        }))
    }

    pub fn incoming_of(
        &self,
        n: NodeId,
        class: ClassId,
    ) -> Result<impl Iterator<Item = EdgeId> + '_, GraphError> {
        let list = self.incoming(n)?;
        Ok(list.iter().copied().filter(move |&e| {
            self.schema
                .is_a(self.edges[e.0 as usize].as_ref().unwrap().class, class)
        }))
    }

    /// Incoming then outgoing edges, each in creation order.
    pub fn incident(&self, n: NodeId) -> Result<impl Iterator<Item = EdgeId> + '_, GraphError> {
        let d = self.node_data(n)?;
        Ok(d.inc.iter().chain(&d.out).copied())
    }

    pub fn set_name(&mut self, el: Elem, name: &str) -> Result<(), GraphError> {
        if !self.is_live(el) {
            return Err(GraphError::Dangling(el));
        }
        if self.names.contains_key(name) {
            return Err(GraphError::DuplicateName(name.to_string()));
        }
        self.drop_name(el);
        self.names.insert(name.to_string(), el);
        self.name_of.insert(el, name.to_string());
        Ok(())
    }

    fn drop_name(&mut self, el: Elem) {
        if let Some(name) = self.name_of.remove(&el) {
            self.names.remove(&name);
        }
    }

    pub fn by_name(&self, name: &str) -> Option<Elem> {
        self.names.get(name).copied()
    }

    pub fn name_of(&self, el: Elem) -> Option<&str> {
        self.name_of.get(&el).map(String::as_str)
    }

    /// Starts recording every mutation; a previous journal is discarded.
    pub fn start_journal(&mut self) {
        self.journal = Some(Vec::new());
    }

    /// Returns recorded changes since the last call and keeps recording.
    pub fn drain_journal(&mut self) -> Vec<Change> {
        self.journal
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }

    pub fn stop_journal(&mut self) -> Vec<Change> {
        self.journal.take().unwrap_or_default()
    }

    pub fn class_name(&self, el: Elem) -> Result<&str, GraphError> {
        Ok(self.schema.class(self.class_of(el)?).name())
    }

    /// Full sweep of the structural invariants; used by tests.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut live_edges = 0;
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            live_edges += 1;
            let id = EdgeId(i as u32);
            let src = self
                .node_data(e.src)
                .map_err(|_| format!("{id}: dangling source"))?;
            let tgt = self
                .node_data(e.tgt)
                .map_err(|_| format!("{id}: dangling target"))?;
            if !src.out.contains(&id) || !tgt.inc.contains(&id) {
                return Err(format!("{id}: missing from incidence lists"));
            }
            if self.schema.class(e.class).is_abstract() {
                return Err(format!("{id}: abstract class"));
            }
        }
        let mut live_nodes = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            let Some(n) = n else { continue };
            live_nodes += 1;
            for e in n.out.iter().chain(&n.inc) {
                if self.edge_data(*e).is_err() {
                    return Err(format!("n{i}: incidence list holds dead edge {e}"));
                }
            }
            if self.schema.class(n.class).is_abstract() {
                return Err(format!("n{i}: abstract class"));
            }
        }
        if live_nodes != self.node_count || live_edges != self.edge_count {
            return Err("element counters out of sync".into());
        }
        for (name, el) in &self.names {
            if !self.is_live(*el) || self.name_of.get(el) != Some(name) {
                return Err(format!("name index broken at `{name}`"));
            }
        }
        if self.names.len() != self.name_of.len() {
            return Err("name index is not a bijection".into());
        }
        Ok(())
    }
}
