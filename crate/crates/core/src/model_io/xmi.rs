//! XMI instance import.
//!
//! Each XML element becomes one node. A root element is typed by its
//! qualified tag (`java:Class` gives `java_Class`), a nested element by its
//! `xsi:type` or else by the target class of the containment reference its
//! tag names. Plain XML attributes are either declared attributes of the
//! node class or space-separated reference lists; references are resolved in
//! a second pass, by `xmi:id` first and positional path second.
//!
//! Positional paths follow the EMF fragment shape: the k-th root is `/k`
//! and the i-th child under feature `f` of an element at `p` is `p/@f.i`.
//! `/` and `//@f.i` are accepted as spellings of `/0` and `/0/@f.i`.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeId};
use crate::metamodel::{ClassId, Schema, ValueType};
use crate::value::Value;

use super::{line_of, XMI_NS, XSI_NS};

#[derive(Debug, Error)]
pub enum XmiError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("line {line}: unknown type `{name}`")]
    UnknownType { line: u32, name: String },
    #[error("line {line}: class `{class}` has no containment reference `{feature}`")]
    UnknownFeature {
        line: u32,
        class: String,
        feature: String,
    },
    #[error("line {line}: `{class}` cannot be contained in `{feature}`, which holds `{expected}`")]
    IllTyped {
        line: u32,
        class: String,
        feature: String,
        expected: String,
    },
    #[error("line {line}: unresolved reference `{reference}` in `{feature}`")]
    Unresolved {
        line: u32,
        feature: String,
        reference: String,
    },
    #[error("line {line}: attribute `{attr}`: cannot read `{value}` as {expected}")]
    BadAttribute {
        line: u32,
        attr: String,
        value: String,
        expected: String,
    },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: u32, id: String },
    #[error("line {line}: {source}")]
    Graph { line: u32, source: GraphError },
}

#[derive(Debug)]
pub struct XmiImport {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

struct PendingRef {
    /// Byte offset of the owning element, turned into a line on error.
    pos: usize,
    src: NodeId,
    edge: ClassId,
    feature: String,
    targets: String,
}

struct Importer<'a, 'input> {
    doc: &'a Document<'input>,
    graph: Graph,
    ids: HashMap<String, NodeId>,
    paths: HashMap<String, NodeId>,
    pending: Vec<PendingRef>,
    warnings: Vec<String>,
}

pub fn import_xmi(xml: &str, schema: Arc<Schema>) -> Result<XmiImport, XmiError> {
    let doc = Document::parse(xml)?;
    let root = doc.root_element();
    let roots: Vec<Node> =
        if root.tag_name().namespace() == Some(XMI_NS) && root.tag_name().name() == "XMI" {
            root.children().filter(Node::is_element).collect()
        } else {
            vec![root]
        };
    let mut imp = Importer {
        doc: &doc,
        graph: Graph::new(schema),
        ids: HashMap::new(),
        paths: HashMap::new(),
        pending: Vec::new(),
        warnings: Vec::new(),
    };
    for (k, r) in roots.iter().enumerate() {
        let class = imp.root_class(*r)?;
        imp.element(*r, class, format!("/{k}"))?;
    }
    imp.resolve()?;
    Ok(XmiImport {
        graph: imp.graph,
        warnings: imp.warnings,
    })
}

/// Edge class `<A>_<feature>` for `class` or its nearest ancestor `A`
/// declaring it.
pub(crate) fn feature_edge(schema: &Schema, class: ClassId, feature: &str) -> Option<ClassId> {
    let mut queue = VecDeque::from([class]);
    let mut seen = vec![class];
    while let Some(c) = queue.pop_front() {
        let info = schema.class(c);
        if let Some(e) = schema.edge_class(&format!("{}_{feature}", info.name())) {
            return Some(e);
        }
        for &s in &info.supers {
            if !seen.contains(&s) {
                seen.push(s);
                queue.push_back(s);
            }
        }
    }
    None
}

fn qualified(prefix: Option<&str>, local: &str) -> String {
    match prefix {
        Some(p) if !p.is_empty() => format!("{p}_{local}"),
        _ => local.to_string(),
    }
}

fn normalize_path(p: &str) -> String {
    if p == "/" {
        "/0".to_string()
    } else if let Some(rest) = p.strip_prefix("//") {
        format!("/0/{rest}")
    } else {
        p.to_string()
    }
}

fn parse_scalar(vt: &ValueType, text: &str, schema: &Schema) -> Option<Value> {
    Some(match vt {
        ValueType::Boolean => Value::Bool(text.trim().parse().ok()?),
        ValueType::Integer => Value::Int(text.trim().parse().ok()?),
        ValueType::Double => Value::Double(text.trim().parse().ok()?),
        ValueType::String => Value::Str(text.to_string()),
        ValueType::Enum(e) => {
            let item = text.trim();
            schema.enum_def(e)?.item_value(item)?;
            Value::Enum {
                ty: e.clone(),
                item: item.to_string(),
            }
        }
        _ => return None,
    })
}

fn parse_value(vt: &ValueType, text: &str, schema: &Schema) -> Option<Value> {
    match vt {
        ValueType::Array(t) => text
            .split_whitespace()
            .map(|s| parse_scalar(t, s, schema))
            .collect::<Option<_>>()
            .map(Value::Array),
        _ => parse_scalar(vt, text, schema),
    }
}

impl Importer<'_, '_> {
    fn line(&self, n: Node) -> u32 {
        line_of(self.doc, n)
    }

    fn lookup_type(&self, n: Node, qname: &str) -> Result<ClassId, XmiError> {
        let (prefix, local) = match qname.split_once(':') {
            Some((p, l)) => (Some(p), l),
            None => (None, qname),
        };
        let name = qualified(prefix, local);
        self.graph
            .schema()
            .node_class(&name)
            .ok_or_else(|| XmiError::UnknownType {
                line: self.line(n),
                name,
            })
    }

    fn root_class(&self, n: Node) -> Result<ClassId, XmiError> {
        if let Some(t) = n.attribute((XSI_NS, "type")) {
            return self.lookup_type(n, t);
        }
        let tag = n.tag_name();
        let prefix = tag.namespace().and_then(|ns| n.lookup_prefix(ns));
        let name = qualified(prefix, tag.name());
        self.graph
            .schema()
            .node_class(&name)
            .ok_or_else(|| XmiError::UnknownType {
                line: self.line(n),
                name,
            })
    }

    fn graph_err(&self, n: Node, source: GraphError) -> XmiError {
        XmiError::Graph {
            line: self.line(n),
            source,
        }
    }

    fn element(&mut self, n: Node, class: ClassId, path: String) -> Result<NodeId, XmiError> {
        let node = self
            .graph
            .add_node(class)
            .map_err(|e| self.graph_err(n, e))?;
        let schema = self.graph.schema().clone();
        match n.attribute((XMI_NS, "id")) {
            Some(id) => {
                if self.ids.insert(id.to_string(), node).is_some() {
                    return Err(XmiError::DuplicateId {
                        line: self.line(n),
                        id: id.to_string(),
                    });
                }
                self.graph
                    .set_name(node.into(), id)
                    .map_err(|e| self.graph_err(n, e))?;
            }
            None => self
                .graph
                .set_name(node.into(), &path)
                .map_err(|e| self.graph_err(n, e))?,
        }
        self.paths.insert(path.clone(), node);

        let info = schema.class(class);
        for a in n.attributes() {
            if a.namespace().is_some() {
                continue;
            }
            if let Some(slot) = info.attr_slot(a.name()) {
                let vt = &info.attributes()[slot].value_type;
                let value =
                    parse_value(vt, a.value(), &schema).ok_or_else(|| XmiError::BadAttribute {
                        line: self.line(n),
                        attr: a.name().to_string(),
                        value: a.value().to_string(),
                        expected: vt.to_string(),
                    })?;
                self.graph
                    .set_attr(node.into(), a.name(), value)
                    .map_err(|e| self.graph_err(n, e))?;
            } else if let Some(edge) =
                feature_edge(&schema, class, a.name()).filter(|&e| !schema.is_containment(e))
            {
                self.pending.push(PendingRef {
                    pos: n.range().start,
                    src: node,
                    edge,
                    feature: a.name().to_string(),
                    targets: a.value().to_string(),
                });
            } else {
                self.warnings.push(format!(
                    "line {}: `{}` has no feature `{}`; ignored",
                    self.line(n),
                    info.name(),
                    a.name()
                ));
            }
        }

        let mut counters: HashMap<&str, usize> = HashMap::new();
        for c in n.children().filter(Node::is_element) {
            let feature = c.tag_name().name();
            let edge = feature_edge(&schema, class, feature)
                .filter(|&e| schema.is_containment(e))
                .ok_or_else(|| XmiError::UnknownFeature {
                    line: self.line(c),
                    class: info.name().to_string(),
                    feature: feature.to_string(),
                })?;
            let expected = schema
                .class(edge)
                .connect()
                .map(|(_, t)| t)
                .unwrap_or(schema.node_root());
            let child_class = match c.attribute((XSI_NS, "type")) {
                Some(t) => self.lookup_type(c, t)?,
                None => expected,
            };
            if !schema.is_a(child_class, expected) {
                return Err(XmiError::IllTyped {
                    line: self.line(c),
                    class: schema.class(child_class).name().to_string(),
                    feature: feature.to_string(),
                    expected: schema.class(expected).name().to_string(),
                });
            }
            let i = counters.entry(feature).or_default();
            let child_path = format!("{path}/@{feature}.{i}");
            *i += 1;
            let child = self.element(c, child_class, child_path)?;
            self.graph
                .add_edge(edge, node, child)
                .map_err(|e| self.graph_err(c, e))?;
        }
        Ok(node)
    }

    fn resolve(&mut self) -> Result<(), XmiError> {
        for p in std::mem::take(&mut self.pending) {
            let line = || self.doc.text_pos_at(p.pos).row;
            for token in p.targets.split_whitespace() {
                let frag = token.rsplit('#').next().unwrap_or(token);
                let target = self
                    .ids
                    .get(frag)
                    .or_else(|| self.paths.get(&normalize_path(frag)))
                    .copied()
                    .ok_or_else(|| XmiError::Unresolved {
                        line: line(),
                        feature: p.feature.clone(),
                        reference: token.to_string(),
                    })?;
                let schema = self.graph.schema();
                if let Some((_, want)) = schema.class(p.edge).connect() {
                    let got = self.graph.node_class(target).expect("imported node");
                    if !schema.is_a(got, want) {
                        return Err(XmiError::IllTyped {
                            line: line(),
                            class: schema.class(got).name().to_string(),
                            feature: p.feature.clone(),
                            expected: schema.class(want).name().to_string(),
                        });
                    }
                }
                self.graph
                    .add_edge(p.edge, p.src, target)
                    .map_err(|source| XmiError::Graph {
                        line: line(),
                        source,
                    })?;
            }
        }
        Ok(())
    }
}
