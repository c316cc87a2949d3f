//! Brute-force reference matcher. It keeps its own record of the generated
//! graph and its own subtype table, and enumerates injective assignments
//! directly, so it shares nothing with the engine's search.

#![allow(dead_code)]

use std::sync::Arc;

use grewrite::rules::{BlockMatch, Engine, RewriteEnv};
use grewrite::schema_text::parse_schema_text;
use grewrite::{Elem, Graph, NodeId, Schema, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SCHEMA: &str = r#"
    node class A { v : int; }
    node class B extends A;
    node class C;
    edge class e;
    edge class f extends e;
    edge class g;
"#;

const NODE_TYPES: [&str; 4] = ["Node", "A", "B", "C"];
const EDGE_TYPES: [&str; 4] = ["Edge", "e", "f", "g"];

fn is_a(sub: &str, sup: &str) -> bool {
    sub == sup
        || sup == "Node"
        || sup == "Edge"
        || (sup == "A" && sub == "B")
        || (sup == "e" && sub == "f")
}

pub struct RefGraph {
    pub graph: Graph,
    pub nodes: Vec<(NodeId, &'static str, i64)>,
    pub edges: Vec<(grewrite::EdgeId, &'static str, NodeId, NodeId)>,
}

pub fn schema() -> Arc<Schema> {
    Arc::new(parse_schema_text(SCHEMA).unwrap().build().unwrap())
}

pub fn random_graph(rng: &mut ChaCha8Rng, schema: &Arc<Schema>) -> RefGraph {
    let mut graph = Graph::new(schema.clone());
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let n = rng.gen_range(1..=7);
    for _ in 0..n {
        let ty = NODE_TYPES[rng.gen_range(1..4)];
        let id = graph.add_node(schema.node_class(ty).unwrap()).unwrap();
        let v = rng.gen_range(0..3);
        if ty != "C" {
            graph.set_attr(id.into(), "v", Value::Int(v)).unwrap();
        }
        nodes.push((id, ty, v));
    }
    let m = rng.gen_range(0..=14);
    for _ in 0..m {
        let ty = EDGE_TYPES[rng.gen_range(1..4)];
        let s = nodes[rng.gen_range(0..nodes.len())].0;
        let t = nodes[rng.gen_range(0..nodes.len())].0;
        let id = graph
            .add_edge(schema.edge_class(ty).unwrap(), s, t)
            .unwrap();
        edges.push((id, ty, s, t));
    }
    // some deletions so that ids have gaps
    if rng.gen_bool(0.3) && !edges.is_empty() {
        let i = rng.gen_range(0..edges.len());
        graph.remove_edge(edges.remove(i).0).unwrap();
    }
    RefGraph {
        graph,
        nodes,
        edges,
    }
}

struct FlatPattern {
    node_types: Vec<&'static str>,
    /// (src index, tgt index, type)
    edges: Vec<(usize, usize, &'static str)>,
    /// (node index, bound): `n.v <= bound`
    conds: Vec<(usize, i64)>,
}

impl FlatPattern {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(1..=3);
        let node_types: Vec<&str> = (0..k).map(|_| NODE_TYPES[rng.gen_range(0..4)]).collect();
        let edges = (0..rng.gen_range(0..=3))
            .map(|_| {
                (
                    rng.gen_range(0..k),
                    rng.gen_range(0..k),
                    EDGE_TYPES[rng.gen_range(0..4)],
                )
            })
            .collect();
        let mut conds = Vec::new();
        for (i, t) in node_types.iter().enumerate() {
            if matches!(*t, "A" | "B") && rng.gen_bool(0.5) {
                conds.push((i, rng.gen_range(0..3)));
            }
        }
        FlatPattern {
            node_types,
            edges,
            conds,
        }
    }

    fn source(&self) -> String {
        let mut s = String::from("rule r {\n");
        for (i, t) in self.node_types.iter().enumerate() {
            s.push_str(&format!("  n{i}:{t};\n"));
        }
        for (j, (a, b, t)) in self.edges.iter().enumerate() {
            s.push_str(&format!("  n{a} -x{j}:{t}-> n{b};\n"));
        }
        if !self.conds.is_empty() {
            s.push_str("  if {");
            for (i, c) in &self.conds {
                s.push_str(&format!(" n{i}.v <= {c};"));
            }
            s.push_str(" }\n");
        }
        s.push('}');
        s
    }

    fn oracle(&self, g: &RefGraph) -> Vec<Vec<Elem>> {
        let mut out = Vec::new();
        let mut nodes: Vec<usize> = Vec::new();
        self.assign_nodes(g, &mut nodes, &mut out);
        out.sort();
        out
    }

    fn assign_nodes(&self, g: &RefGraph, chosen: &mut Vec<usize>, out: &mut Vec<Vec<Elem>>) {
        if chosen.len() == self.node_types.len() {
            for &(i, bound) in &self.conds {
                if g.nodes[chosen[i]].2 > bound {
                    return;
                }
            }
            let mut edges = Vec::new();
            self.assign_edges(g, chosen, &mut edges, out);
            return;
        }
        let want = self.node_types[chosen.len()];
        for (gi, (_, ty, _)) in g.nodes.iter().enumerate() {
            if is_a(ty, want) && !chosen.contains(&gi) {
                chosen.push(gi);
                self.assign_nodes(g, chosen, out);
                chosen.pop();
            }
        }
    }

    fn assign_edges(
        &self,
        g: &RefGraph,
        nodes: &[usize],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<Elem>>,
    ) {
        if chosen.len() == self.edges.len() {
            let mut key: Vec<Elem> = nodes.iter().map(|&i| Elem::Node(g.nodes[i].0)).collect();
            key.extend(chosen.iter().map(|&i| Elem::Edge(g.edges[i].0)));
            out.push(key);
            return;
        }
        let (a, b, want) = self.edges[chosen.len()];
        for (gi, (_, ty, s, t)) in g.edges.iter().enumerate() {
            if is_a(ty, want)
                && *s == g.nodes[nodes[a]].0
                && *t == g.nodes[nodes[b]].0
                && !chosen.contains(&gi)
            {
                chosen.push(gi);
                self.assign_edges(g, nodes, chosen, out);
                chosen.pop();
            }
        }
    }
}

/// One random flat pattern against one random graph.
pub fn check_flat(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = schema();
    let g = random_graph(&mut rng, &schema);
    let p = FlatPattern::random(&mut rng);
    let src = p.source();
    let engine = Engine::from_source(schema, &src).map_err(|e| format!("{src}\n{e}"))?;
    let env = RewriteEnv::new();
    let got: Vec<Vec<Elem>> = engine
        .find_matches(&g.graph, &env, "r", &[], None)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|m| m.key(engine.program()))
        .collect();
    let want = p.oracle(&g);
    if got != want {
        return Err(format!(
            "seed {seed}\n{src}\nengine {got:?}\noracle {want:?}"
        ));
    }
    Ok(want.len())
}

#[derive(Clone, Copy, Debug)]
enum Block {
    Negative,
    Optional,
    Iterated,
}

/// A single node with one nested block around a single edge.
pub fn check_nested(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = schema();
    let g = random_graph(&mut rng, &schema);
    let top = ["Node", "A", "B"][rng.gen_range(0..3)];
    let et = EDGE_TYPES[rng.gen_range(0..4)];
    let yt = NODE_TYPES[rng.gen_range(0..4)];
    let outgoing = rng.gen_bool(0.5);
    let block = [Block::Negative, Block::Optional, Block::Iterated][rng.gen_range(0..3)];
    let inner = if outgoing {
        format!("x -o:{et}-> y:{yt};")
    } else {
        format!("x <-o:{et}- y:{yt};")
    };
    let kw = match block {
        Block::Negative => "negative",
        Block::Optional => "optional",
        Block::Iterated => "iterated",
    };
    let src = format!("rule r {{ x:{top}; {kw} {{ {inner} }} }}");
    let engine = Engine::from_source(schema, &src).map_err(|e| format!("{src}\n{e}"))?;
    let env = RewriteEnv::new();
    let matches = engine
        .find_matches(&g.graph, &env, "r", &[], None)
        .map_err(|e| e.to_string())?;

    // oracle: per top node, the candidate (edge, other end) pairs in key order
    let mut want: Vec<(Elem, Vec<Vec<Elem>>)> = Vec::new();
    for &(x, xt, _) in &g.nodes {
        if !is_a(xt, top) {
            continue;
        }
        let mut cands: Vec<(grewrite::EdgeId, NodeId)> = g
            .edges
            .iter()
            .filter(|(_, ty, _, _)| is_a(ty, et))
            .filter_map(|&(id, _, s, t)| {
                let (near, far) = if outgoing { (s, t) } else { (t, s) };
                (near == x).then_some((id, far))
            })
            .filter(|&(_, y)| y != x && g.nodes.iter().any(|&(n, ty, _)| n == y && is_a(ty, yt)))
            .collect();
        cands.sort();
        let blocks = match block {
            Block::Negative if !cands.is_empty() => continue,
            Block::Negative => vec![],
            Block::Optional => cands
                .first()
                .map(|&(e, y)| vec![vec![Elem::Edge(e), Elem::Node(y)]])
                .unwrap_or_default(),
            Block::Iterated => {
                let mut used = Vec::new();
                let mut picked = Vec::new();
                for (e, y) in cands {
                    if !used.contains(&y) {
                        used.push(y);
                        picked.push(vec![Elem::Edge(e), Elem::Node(y)]);
                    }
                }
                picked
            }
        };
        want.push((Elem::Node(x), blocks));
    }
    want.sort();

    let prog = engine.program();
    let got: Vec<(Elem, Vec<Vec<Elem>>)> = matches
        .iter()
        .map(|m| {
            let blocks = match &m.blocks[0] {
                BlockMatch::Negative => vec![],
                BlockMatch::Optional(o) => o.iter().map(|b| b.key(prog)).collect(),
                BlockMatch::Iterated(v) => v.iter().map(|b| b.key(prog)).collect(),
            };
            (m.key(prog)[0], blocks)
        })
        .collect();
    if got != want {
        return Err(format!(
            "seed {seed}\n{src}\nengine {got:?}\noracle {want:?}"
        ));
    }
    Ok(want.len())
}
