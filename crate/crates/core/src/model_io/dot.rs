//! GraphViz rendering with containment nesting.
//!
//! Nodes reached through a configured containment edge class are drawn
//! inside a `cluster` subgraph of their container, and the containment edge
//! itself is omitted. A node with several containers is nested under the one
//! with the lowest edge id; the remaining containment edges are drawn as
//! plain edges. Containment cycles are cut at one edge, which is then drawn
//! as a plain edge and reported in a comment.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::graph::{EdgeId, Elem, Graph, NodeId};

use super::layout::{ClassStyle, LayoutConfig};

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

/// Expands `{attr}`, `{class}` and `{id}`; unknown placeholders stay as written.
fn expand(graph: &Graph, el: Elem, template: &str) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else {
            out.push_str(&rest[open..]);
            return out;
        };
        let key = &after[..close];
        match key {
            "class" => out.push_str(graph.class_name(el).unwrap_or_default()),
            "id" => write!(out, "{el}").unwrap(),
            _ => match graph.get_attr(el, key) {
                Ok(v) => write!(out, "{v}").unwrap(),
                Err(_) => write!(out, "{{{key}}}").unwrap(),
            },
        }
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    out
}

struct Renderer<'a> {
    graph: &'a Graph,
    config: &'a LayoutConfig,
    children: HashMap<NodeId, Vec<NodeId>>,
    out: String,
}

impl Renderer<'_> {
    fn style(&self, el: Elem) -> Option<&ClassStyle> {
        let class = self.graph.class_of(el).ok()?;
        self.config.style_for(self.graph.schema(), class)
    }

    fn hidden(&self, el: Elem) -> bool {
        self.style(el).is_some_and(|s| s.hidden)
    }

    fn label(&self, el: Elem) -> String {
        match self.style(el).and_then(|s| s.label.as_deref()) {
            Some(t) => expand(self.graph, el, t),
            None => self.graph.class_name(el).unwrap_or_default().to_string(),
        }
    }

    fn attrs(&self, el: Elem) -> String {
        let mut s = format!("label=\"{}\"", escape(&self.label(el)));
        if let Some(style) = self.style(el) {
            if let Some(shape) = &style.shape {
                write!(s, ", shape={shape}").unwrap();
            }
            if let Some(color) = &style.color {
                write!(s, ", color=\"{}\"", escape(color)).unwrap();
            }
        }
        s
    }

    fn node(&mut self, n: NodeId, depth: usize) {
        let kids = self.children.get(&n).cloned().unwrap_or_default();
        if self.hidden(n.into()) {
            for k in kids {
                self.node(k, depth);
            }
            return;
        }
        let pad = "  ".repeat(depth);
        let line = format!("{pad}n{} [{}];\n", n.0, self.attrs(n.into()));
        if kids.is_empty() {
            self.out.push_str(&line);
            return;
        }
        writeln!(self.out, "{pad}subgraph cluster_n{} {{", n.0).unwrap();
        writeln!(
            self.out,
            "{pad}  label=\"{}\";",
            escape(&self.label(n.into()))
        )
        .unwrap();
        write!(self.out, "  {line}").unwrap();
        for k in kids {
            self.node(k, depth + 1);
        }
        writeln!(self.out, "{pad}}}").unwrap();
    }
}

pub fn export_dot(graph: &Graph, config: &LayoutConfig) -> String {
    let schema = graph.schema();
    let mut parent: HashMap<NodeId, (NodeId, EdgeId)> = HashMap::new();
    for e in graph.edges() {
        let (class, src, tgt) = graph.edge_ends(e).expect("live edge");
        if config.is_containment(schema, class) && !parent.contains_key(&tgt) {
            parent.insert(tgt, (src, e));
        }
    }

    let mut children: HashMap<NodeId, Vec<(EdgeId, NodeId)>> = HashMap::new();
    for (&c, &(p, e)) in &parent {
        children.entry(p).or_default().push((e, c));
    }
    for v in children.values_mut() {
        v.sort();
    }

    let mut warnings = Vec::new();
    let mut roots: Vec<NodeId> = graph.nodes().filter(|n| !parent.contains_key(n)).collect();
    let mut placed: BTreeSet<NodeId> = BTreeSet::new();
    let mark = |from: NodeId,
                children: &HashMap<NodeId, Vec<(EdgeId, NodeId)>>,
                placed: &mut BTreeSet<NodeId>| {
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if placed.insert(n) {
                stack.extend(children.get(&n).into_iter().flatten().map(|&(_, c)| c));
            }
        }
    };
    for &r in &roots {
        mark(r, &children, &mut placed);
    }
    for u in graph.nodes().collect::<Vec<_>>() {
        if placed.contains(&u) {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut c = u;
        while seen.insert(c) {
            c = parent[&c].0;
        }
        let (p, e) = parent.remove(&c).expect("cycle member has a parent");
        children
            .get_mut(&p)
            .expect("parent has children")
            .retain(|&(x, _)| x != e);
        warnings.push(format!(
            "containment cycle broken at e{} (n{} -> n{})",
            e.0, p.0, c.0
        ));
        roots.push(c);
        mark(c, &children, &mut placed);
    }

    let tree: BTreeSet<EdgeId> = parent.values().map(|&(_, e)| e).collect();
    let children = children
        .into_iter()
        .map(|(p, v)| (p, v.into_iter().map(|(_, c)| c).collect()))
        .collect();

    let mut r = Renderer {
        graph,
        config,
        children,
        out: String::from("digraph G {\n"),
    };
    for w in &warnings {
        writeln!(r.out, "  // warning: {w}").unwrap();
    }
    for root in roots {
        r.node(root, 1);
    }
    for e in graph.edges() {
        if tree.contains(&e) || r.hidden(e.into()) {
            continue;
        }
        let (_, src, tgt) = graph.edge_ends(e).expect("live edge");
        if r.hidden(src.into()) || r.hidden(tgt.into()) {
            continue;
        }
        let line = format!("  n{} -> n{} [{}];\n", src.0, tgt.0, r.attrs(e.into()));
        r.out.push_str(&line);
    }
    r.out.push_str("}\n");
    r.out
}
