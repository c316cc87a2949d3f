//! Brute-force isomorphism of small labelled multigraphs.

#![allow(dead_code)]

use std::collections::BTreeMap;

use grewrite::trace::GraphSnapshot;
use grewrite::{Graph, NodeId};

/// Node label, and edges as (label, src index, tgt index).
pub struct Labelled {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, usize, usize)>,
}

/// Keeps the nodes and edges whose class satisfies `keep`; labels carry
/// class and attribute values.
pub fn project(graph: &Graph, keep: impl Fn(&str) -> bool) -> Labelled {
    let snap = GraphSnapshot::of(graph);
    let mut index: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    for n in snap.nodes.iter().filter(|n| keep(&n.class)) {
        index.insert(n.id, nodes.len());
        nodes.push(format!("{}{:?}", n.class, n.attrs));
    }
    let edges = snap
        .edges
        .iter()
        .filter(|e| keep(&e.class))
        .filter_map(|e| {
            Some((
                format!("{}{:?}", e.class, e.attrs),
                *index.get(&e.src)?,
                *index.get(&e.tgt)?,
            ))
        })
        .collect();
    Labelled { nodes, edges }
}

fn edge_multiset(g: &Labelled, map: &[usize]) -> Vec<(String, usize, usize)> {
    let mut v: Vec<_> = g
        .edges
        .iter()
        .map(|(l, s, t)| (l.clone(), map[*s], map[*t]))
        .collect();
    v.sort();
    v
}

pub fn isomorphic(a: &Labelled, b: &Labelled) -> bool {
    if a.nodes.len() != b.nodes.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let identity: Vec<usize> = (0..b.nodes.len()).collect();
    let target = edge_multiset(b, &identity);
    let mut map = vec![usize::MAX; a.nodes.len()];
    let mut used = vec![false; b.nodes.len()];
    search(a, b, &target, 0, &mut map, &mut used)
}

fn search(
    a: &Labelled,
    b: &Labelled,
    target: &[(String, usize, usize)],
    i: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if i == a.nodes.len() {
        return edge_multiset(a, map) == target;
    }
    for j in 0..b.nodes.len() {
        if used[j] || a.nodes[i] != b.nodes[j] {
            continue;
        }
        map[i] = j;
        used[j] = true;
        if search(a, b, target, i + 1, map, used) {
            return true;
        }
        used[j] = false;
    }
    false
}
