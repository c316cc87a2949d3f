//! Reference extraction by direct graph traversal. Does not touch the rules
//! engine; used to cross-check it.

use std::collections::HashMap;

use crate::graph::{Elem, Graph, NodeId};
use crate::value::Value;

use super::{state_roots, CaseError, Machine, Transition, FALLBACK};

/// Statement and expression containment edges, by class name.
const CONTAINMENT: &[&str] = &[
    "java_Method_body",
    "java_Block_statements",
    "java_Switch_cases",
    "java_SwitchCase_statements",
    "java_Try_body",
    "java_Try_catches",
    "java_CatchBlock_body",
    "java_ExpressionStatement_expression",
    "java_MethodCall_receiver",
    "java_MethodCall_arguments",
];

struct View<'a> {
    g: &'a Graph,
}

impl View<'_> {
    fn class(&self, n: NodeId) -> &str {
        self.g.class_name(Elem::Node(n)).unwrap_or_default()
    }

    fn string(&self, n: NodeId, attr: &str) -> String {
        match self.g.get_attr(Elem::Node(n), attr) {
            Ok(Value::Str(s)) => s.clone(),
            _ => String::new(),
        }
    }

    /// Targets of `n`'s outgoing edges of exactly class `edge`, by edge id.
    fn out(&self, n: NodeId, edge: &str) -> Vec<NodeId> {
        let mut es: Vec<_> = self
            .g
            .outgoing(n)
            .unwrap()
            .iter()
            .copied()
            .filter(|&e| self.g.class_name(Elem::Edge(e)).unwrap_or_default() == edge)
            .collect();
        es.sort();
        es.into_iter().map(|e| self.g.target(e).unwrap()).collect()
    }

    fn one(&self, n: NodeId, edge: &str) -> Option<NodeId> {
        match self.out(n, edge).as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }

    /// Containment parent and the edge class leading to it.
    fn parent(&self, n: NodeId) -> Option<(NodeId, &str)> {
        let mut incoming: Vec<_> = self.g.incoming(n).unwrap().to_vec();
        incoming.sort();
        incoming.into_iter().find_map(|e| {
            let name = self.g.class_name(Elem::Edge(e)).unwrap_or_default();
            (name == "java_Class_methods" || CONTAINMENT.contains(&name))
                .then(|| (self.g.source(e).unwrap(), name))
        })
    }

    fn is_call(&self, n: NodeId, name: &str) -> bool {
        self.class(n) == "java_MethodCall" && self.string(n, "methodName") == name
    }
}

/// The machine the extraction rules are expected to produce.
pub fn brute_force_extract(g: &Graph) -> Result<Machine, CaseError> {
    let roots = state_roots(g);
    let root = match roots.as_slice() {
        [] => return Err(CaseError::NoStateRoot),
        [r] => *r,
        _ => return Err(CaseError::ManyStateRoots(roots.len())),
    };
    let v = View { g };
    let nodes: Vec<NodeId> = g.nodes().collect();

    // states: non-abstract classes below the root
    let mut subclasses: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &n in &nodes {
        if v.class(n) == "java_Class" {
            for sup in v.out(n, "java_Class_extends") {
                subclasses.entry(sup).or_default().push(n);
            }
        }
    }
    let mut state_of: HashMap<NodeId, String> = HashMap::new();
    let mut stack = vec![root];
    while let Some(c) = stack.pop() {
        for &d in subclasses.get(&c).into_iter().flatten() {
            if g.get_attr(d.into(), "isAbstract")
                .ok()
                .and_then(Value::as_bool)
                != Some(true)
            {
                state_of.insert(d, v.string(d, "name"));
            }
            stack.push(d);
        }
    }

    let mut m = Machine {
        states: state_of.values().cloned().collect(),
        transitions: Vec::new(),
    };
    for &es in &nodes {
        if v.class(es) != "java_ExpressionStatement" {
            continue;
        }
        let Some(act) = v.one(es, "java_ExpressionStatement_expression") else {
            continue;
        };
        if !v.is_call(act, "activate") {
            continue;
        }
        let Some(inst) = v.one(act, "java_MethodCall_target") else {
            continue;
        };
        if !v.is_call(inst, "Instance") {
            continue;
        }
        let Some(target) = v
            .one(inst, "java_MethodCall_target")
            .and_then(|c| state_of.get(&c))
        else {
            continue;
        };

        // ascent to the owning class
        let mut path = Vec::new();
        let mut x = es;
        let source = loop {
            match v.parent(x) {
                Some((k, "java_Class_methods")) => break state_of.get(&k),
                Some((p, _)) => {
                    path.push(p);
                    x = p;
                }
                None => break None,
            }
        };
        let Some(source) = source else { continue };

        let method = path
            .iter()
            .find(|&&p| v.class(p) == "java_Method" && v.string(p, "name") != "run");
        let innermost = |class: &str, attr: &str| {
            path.iter()
                .find(|&&p| v.class(p) == class)
                .map(|&p| v.string(p, attr))
        };
        let trigger = method
            .map(|&p| v.string(p, "name"))
            .or_else(|| innermost("java_SwitchCase", "constantName"))
            .or_else(|| innermost("java_CatchBlock", "exceptionType"))
            .unwrap_or_else(|| FALLBACK.to_string());

        let action = v.parent(es).and_then(|(p, edge)| {
            let siblings = v.out(p, edge);
            let mut siblings: Vec<_> = siblings.into_iter().filter(|&s| s != es).collect();
            siblings.sort();
            siblings.into_iter().find_map(|s| {
                if v.class(s) != "java_ExpressionStatement" {
                    return None;
                }
                let call = v
                    .one(s, "java_ExpressionStatement_expression")
                    .filter(|&c| v.is_call(c, "send"))?;
                v.out(call, "java_MethodCall_arguments")
                    .into_iter()
                    .filter(|&a| v.class(a) == "java_EnumReference")
                    .find_map(|a| v.one(a, "java_EnumReference_constant"))
                    .map(|k| v.string(k, "name"))
            })
        });

        m.transitions.push(Transition {
            source: source.clone(),
            target: target.clone(),
            trigger,
            action: action.unwrap_or_else(|| FALLBACK.to_string()),
        });
    }
    m.normalize();
    Ok(m)
}
