//! Injective pattern matching with nested blocks and subpatterns.
//!
//! Raw matches of a scope are found by a depth-first search along the
//! compiled plan and then ordered by their key (the bound local elements in
//! declaration order). Completion resolves negatives, subpatterns, iterated
//! and optional blocks, yields and deferred conditions, in that order.

use std::collections::HashSet;

use crate::graph::{Elem, Graph, NodeId};
use crate::rules::compile::{Action, Program, ScopeKind, SlotKind, Step, SubArgC};
use crate::rules::expr::{Binding, CExpr, EvalCtx, Frame, RewriteEnv, Val};
use crate::rules::RuleError;

#[derive(Clone, Debug)]
pub struct Match {
    pub action: usize,
    pub scope: usize,
    pub frame: Frame,
    /// One entry per child block, in declaration order.
    pub blocks: Vec<BlockMatch>,
    /// One entry per subpattern instance, in declaration order.
    pub subs: Vec<Match>,
}

#[derive(Clone, Debug)]
pub enum BlockMatch {
    Negative,
    Optional(Option<Box<Match>>),
    Iterated(Vec<Match>),
}

impl Match {
    pub fn key(&self, prog: &Program) -> Vec<Elem> {
        key_of(prog.action(self.action), self.scope, &self.frame)
    }

    /// Every graph element the match (including nested parts) is bound to.
    pub fn elements(&self, prog: &Program, out: &mut Vec<Elem>) {
        let a = prog.action(self.action);
        for (slot, b) in a.slots.iter().zip(&self.frame) {
            if matches!(
                slot.kind,
                SlotKind::PatternNode | SlotKind::PatternEdge | SlotKind::NodeParam
            ) {
                if let Some(el) = b.as_ref().and_then(Binding::elem) {
                    out.push(el);
                }
            }
        }
        for b in &self.blocks {
            match b {
                BlockMatch::Negative | BlockMatch::Optional(None) => {}
                BlockMatch::Optional(Some(m)) => m.elements(prog, out),
                BlockMatch::Iterated(ms) => ms.iter().for_each(|m| m.elements(prog, out)),
            }
        }
        for s in &self.subs {
            s.elements(prog, out);
        }
    }
}

fn key_of(a: &Action, scope: usize, frame: &Frame) -> Vec<Elem> {
    a.scopes[scope]
        .key
        .iter()
        .filter_map(|&s| frame[s].as_ref().and_then(Binding::elem))
        .collect()
}

pub struct Matcher<'a> {
    prog: &'a Program,
    graph: &'a Graph,
    env: &'a RewriteEnv,
    max_depth: usize,
    reverse: bool,
    depth: usize,
}

impl<'a> Matcher<'a> {
    pub fn new(
        prog: &'a Program,
        graph: &'a Graph,
        env: &'a RewriteEnv,
        max_depth: usize,
        reverse: bool,
    ) -> Self {
        Matcher {
            prog,
            graph,
            env,
            max_depth,
            reverse,
            depth: 0,
        }
    }

    /// Complete matches of an action's top scope, in key order.
    pub fn find(
        &mut self,
        action: usize,
        frame: Frame,
        limit: Option<usize>,
    ) -> Result<Vec<Match>, RuleError> {
        let mut out = Vec::new();
        if limit == Some(0) || !self.params_ok(action, &frame) {
            return Ok(out);
        }
        for (_, raw) in self.sorted_raw(action, 0, &frame)? {
            if let Some(m) = self.complete(action, 0, raw)? {
                out.push(m);
                if limit.is_some_and(|l| out.len() >= l) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn params_ok(&self, action: usize, frame: &Frame) -> bool {
        let a = self.prog.action(action);
        a.params.iter().all(|&p| {
            let slot = &a.slots[p];
            match (slot.kind, &frame[p]) {
                (SlotKind::NodeParam, Some(Binding::Node(n))) => self
                    .graph
                    .node_class(*n)
                    .is_ok_and(|c| self.graph.schema().is_a(c, slot.class)),
                (SlotKind::NodeParam, _) => false,
                _ => true,
            }
        })
    }

    fn first(
        &mut self,
        action: usize,
        scope: usize,
        frame: Frame,
    ) -> Result<Option<Match>, RuleError> {
        if scope == 0 && !self.params_ok(action, &frame) {
            return Ok(None);
        }
        for (_, raw) in self.sorted_raw(action, scope, &frame)? {
            if let Some(m) = self.complete(action, scope, raw)? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn sorted_raw(
        &self,
        action: usize,
        scope: usize,
        frame: &Frame,
    ) -> Result<Vec<(Vec<Elem>, Frame)>, RuleError> {
        let a = self.prog.action(action);
        let mut raws = Vec::new();
        let mut work = frame.clone();
        self.search(a, scope, 0, &mut work, &mut raws)?;
        let mut keyed: Vec<(Vec<Elem>, Frame)> = raws
            .into_iter()
            .map(|f| (key_of(a, scope, &f), f))
            .collect();
        keyed.sort_by(|x, y| x.0.cmp(&y.0));
        Ok(keyed)
    }

    fn cond(&self, c: &CExpr, frame: &Frame) -> Result<bool, RuleError> {
        EvalCtx {
            frame,
            graph: self.graph,
            env: self.env,
        }
        .truth(c)
    }

    /// Whether `b` is unused by the pattern elements and node parameters of
    /// the frame.
    fn free(a: &Action, frame: &Frame, b: &Binding) -> bool {
        !frame.iter().zip(&a.slots).any(|(f, s)| {
            f.as_ref() == Some(b)
                && matches!(
                    s.kind,
                    SlotKind::PatternNode | SlotKind::PatternEdge | SlotKind::NodeParam
                )
        })
    }

    /// Binds `slot` to `n` if compatible. Returns `Some(newly_bound)`.
    fn bind_node(&self, a: &Action, frame: &mut Frame, slot: usize, n: NodeId) -> Option<bool> {
        match &frame[slot] {
            Some(Binding::Node(m)) => (*m == n).then_some(false),
            Some(_) => None,
            None => {
                let class = self.graph.node_class(n).ok()?;
                let b = Binding::Node(n);
                if !self.graph.schema().is_a(class, a.slots[slot].class)
                    || !Self::free(a, frame, &b)
                {
                    return None;
                }
                frame[slot] = Some(b);
                Some(true)
            }
        }
    }

    fn search(
        &self,
        a: &Action,
        scope: usize,
        step: usize,
        frame: &mut Frame,
        out: &mut Vec<Frame>,
    ) -> Result<(), RuleError> {
        let sc = &a.scopes[scope];
        for c in &sc.conds_at[step] {
            if !self.cond(c, frame)? {
                return Ok(());
            }
        }
        if step == sc.plan.len() {
            out.push(frame.clone());
            return Ok(());
        }
        match sc.plan[step] {
            Step::ScanNode(s) => {
                let mut cands = self.graph.nodes_of_type(a.slots[s].class, true)?;
                if self.reverse {
                    cands.reverse();
                }
                for n in cands {
                    if self.bind_node(a, frame, s, n) == Some(true) {
                        self.search(a, scope, step + 1, frame, out)?;
                        frame[s] = None;
                    }
                }
            }
            Step::ScanEdge(i) => {
                let spec = &sc.edges[i];
                let mut cands = self.graph.edges_of_type(a.slots[spec.slot].class, true)?;
                if self.reverse {
                    cands.reverse();
                }
                for e in cands {
                    let b = Binding::Edge(e);
                    if !Self::free(a, frame, &b) {
                        continue;
                    }
                    let (_, src, tgt) = self.graph.edge_ends(e).expect("live edge");
                    frame[spec.slot] = Some(b);
                    if let Some(new_src) = self.bind_node(a, frame, spec.src, src) {
                        if let Some(new_tgt) = self.bind_node(a, frame, spec.tgt, tgt) {
                            self.search(a, scope, step + 1, frame, out)?;
                            if new_tgt {
                                frame[spec.tgt] = None;
                            }
                        }
                        if new_src {
                            frame[spec.src] = None;
                        }
                    }
                    frame[spec.slot] = None;
                }
            }
            Step::Extend { edge, from_src } => {
                let spec = &sc.edges[edge];
                let (from, other) = if from_src {
                    (spec.src, spec.tgt)
                } else {
                    (spec.tgt, spec.src)
                };
                let Some(Binding::Node(n)) = frame[from] else {
                    return Ok(());
                };
                let class = a.slots[spec.slot].class;
                let mut cands: Vec<_> = if from_src {
                    self.graph.outgoing_of(n, class)?.collect()
                } else {
                    self.graph.incoming_of(n, class)?.collect()
                };
                if self.reverse {
                    cands.reverse();
                }
                for e in cands {
                    let b = Binding::Edge(e);
                    if !Self::free(a, frame, &b) {
                        continue;
                    }
                    let (_, src, tgt) = self.graph.edge_ends(e).expect("live edge");
                    let far = if from_src { tgt } else { src };
                    frame[spec.slot] = Some(b);
                    if let Some(newly) = self.bind_node(a, frame, other, far) {
                        self.search(a, scope, step + 1, frame, out)?;
                        if newly {
                            frame[other] = None;
                        }
                    }
                    frame[spec.slot] = None;
                }
            }
        }
        Ok(())
    }

    fn exists(&mut self, action: usize, scope: usize, frame: &Frame) -> Result<bool, RuleError> {
        let a = self.prog.action(action);
        let mut raws = Vec::new();
        let mut work = frame.clone();
        self.search(a, scope, 0, &mut work, &mut raws)?;
        for raw in raws {
            if self.complete(action, scope, raw)?.is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn complete(
        &mut self,
        action: usize,
        scope: usize,
        mut frame: Frame,
    ) -> Result<Option<Match>, RuleError> {
        let prog = self.prog;
        let a = prog.action(action);
        let sc = &a.scopes[scope];

        for &c in &sc.children {
            if a.scopes[c].kind == ScopeKind::Negative && self.exists(action, c, &frame)? {
                return Ok(None);
            }
        }

        let mut subs = Vec::with_capacity(sc.subs.len());
        for call in &sc.subs {
            let callee = prog.action(call.action);
            let mut cf: Frame = vec![None; callee.slots.len()];
            for (i, arg) in call.args.iter().enumerate() {
                if let SubArgC::Elem(s) = arg {
                    cf[callee.params[i]] = frame[*s].clone();
                }
            }
            if self.depth >= self.max_depth {
                return Err(RuleError::RecursionLimit(self.max_depth));
            }
            self.depth += 1;
            let found = self.first(call.action, 0, cf);
            self.depth -= 1;
            let Some(m) = found? else {
                return Ok(None);
            };
            for (i, arg) in call.args.iter().enumerate() {
                if let SubArgC::Yield(s) = arg {
                    if let Some(v) = &m.frame[callee.params[i]] {
                        frame[*s] = Some(v.clone());
                    }
                }
            }
            subs.push(m);
        }

        let mut blocks = Vec::with_capacity(sc.children.len());
        for &c in &sc.children {
            match a.scopes[c].kind {
                ScopeKind::Negative => blocks.push(BlockMatch::Negative),
                ScopeKind::Optional => {
                    let m = self.first(action, c, frame.clone())?;
                    if let Some(m) = &m {
                        merge_defs(a, &mut frame, &m.frame);
                    }
                    blocks.push(BlockMatch::Optional(m.map(Box::new)));
                }
                ScopeKind::Iterated => {
                    let mut used: HashSet<Elem> = HashSet::new();
                    let mut ms = Vec::new();
                    for (key, raw) in self.sorted_raw(action, c, &frame)? {
                        if key.iter().any(|e| used.contains(e)) {
                            continue;
                        }
                        if let Some(m) = self.complete(action, c, raw)? {
                            used.extend(key);
                            merge_defs(a, &mut frame, &m.frame);
                            ms.push(m);
                        }
                    }
                    blocks.push(BlockMatch::Iterated(ms));
                }
                ScopeKind::Top => unreachable!("top scope nested"),
            }
        }

        for (slot, e) in &sc.yields {
            let v = EvalCtx {
                frame: &frame,
                graph: self.graph,
                env: self.env,
            }
            .eval(e)?;
            frame[*slot] = match v {
                Val::Elem(Elem::Node(n)) => Some(Binding::Node(n)),
                Val::Undef => None,
                other => {
                    return Err(RuleError::Runtime(format!(
                        "`{}` must be yielded a node, got {other:?}",
                        a.slots[*slot].name
                    )))
                }
            };
        }

        for c in &sc.deferred {
            if !self.cond(c, &frame)? {
                return Ok(None);
            }
        }
        Ok(Some(Match {
            action,
            scope,
            frame,
            blocks,
            subs,
        }))
    }
}

fn merge_defs(a: &Action, frame: &mut Frame, child: &Frame) {
    for (i, slot) in a.slots.iter().enumerate() {
        if slot.kind == SlotKind::DefNode && child[i].is_some() {
            frame[i] = child[i].clone();
        }
    }
}
