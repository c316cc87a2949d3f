//! Applies the rewrite part of a match.
//!
//! Per scope: creations, then evaluations and emits in textual order, then
//! the rewrites of matched optional and iterated blocks in declaration
//! order, then subpattern rewrite calls in textual order, deletions last.

use crate::graph::{Elem, Graph};
use crate::rules::compile::{Create, Program, RwOp};
use crate::rules::expr::{text_of, Binding, EvalCtx, Frame, RewriteEnv, Val};
use crate::rules::matcher::{BlockMatch, Match};
use crate::rules::RuleError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewriteOutcome {
    pub created: Vec<Elem>,
    pub deleted: Vec<Elem>,
}

pub struct Rewriter<'a> {
    prog: &'a Program,
    graph: &'a mut Graph,
    env: &'a mut RewriteEnv,
    pub outcome: RewriteOutcome,
}

fn rt(msg: impl Into<String>) -> RuleError {
    RuleError::Runtime(msg.into())
}

impl<'a> Rewriter<'a> {
    pub fn new(prog: &'a Program, graph: &'a mut Graph, env: &'a mut RewriteEnv) -> Self {
        Rewriter {
            prog,
            graph,
            env,
            outcome: RewriteOutcome::default(),
        }
    }

    pub fn apply(&mut self, m: &Match) -> Result<(), RuleError> {
        self.run(m, m.frame.clone())
    }

    fn eval(&self, frame: &Frame, e: &crate::rules::expr::CExpr) -> Result<Val, RuleError> {
        EvalCtx {
            frame,
            graph: self.graph,
            env: self.env,
        }
        .eval(e)
    }

    fn run(&mut self, m: &Match, mut frame: Frame) -> Result<(), RuleError> {
        let prog = self.prog;
        let a = prog.action(m.action);
        let sc = &a.scopes[m.scope];
        let name = |s: usize| a.slots[s].name.clone();

        if let Some(rw) = &sc.rewrite {
            for c in &rw.creates {
                match *c {
                    Create::Node { slot, class } => {
                        let n = self.graph.add_node(class)?;
                        frame[slot] = Some(Binding::Node(n));
                        self.outcome.created.push(Elem::Node(n));
                    }
                    Create::Edge {
                        slot,
                        class,
                        src,
                        tgt,
                    } => {
                        let (Some(Binding::Node(s)), Some(Binding::Node(t))) =
                            (&frame[src], &frame[tgt])
                        else {
                            return Err(rt(format!(
                                "edge endpoint `{}` or `{}` is unbound",
                                name(src),
                                name(tgt)
                            )));
                        };
                        let e = self.graph.add_edge(class, *s, *t)?;
                        frame[slot] = Some(Binding::Edge(e));
                        self.outcome.created.push(Elem::Edge(e));
                    }
                }
            }
            for op in &rw.ops {
                match op {
                    RwOp::SetAttr { slot, attr, value } => {
                        let Some(el) = frame[*slot].as_ref().and_then(Binding::elem) else {
                            return Err(rt(format!("`{}` is unbound", name(*slot))));
                        };
                        let v = value_of(self.eval(&frame, value)?, attr)?;
                        self.graph.set_attr(el, attr, v)?;
                    }
                    RwOp::SetGlobal { name: g, value } => {
                        let v = value_of(self.eval(&frame, value)?, g)?;
                        self.env.globals.insert(g.clone(), v);
                    }
                    RwOp::SetMap { map, key, value } => {
                        let Val::Elem(k) = self.eval(&frame, key)? else {
                            return Err(rt(format!("key of `::{map}` must be a graph element")));
                        };
                        let v = value_of(self.eval(&frame, value)?, map)?;
                        self.env.maps.entry(map.clone()).or_default().insert(k, v);
                    }
                    RwOp::Emit(parts) => {
                        for p in parts {
                            let v = value_of(self.eval(&frame, p)?, "emit")?;
                            self.env.emitted.push_str(&text_of(&v));
                        }
                    }
                }
            }
        }

        for block in &m.blocks {
            match block {
                BlockMatch::Optional(Some(cm)) => self.run(cm, merged(&cm.frame, &frame))?,
                BlockMatch::Iterated(ms) => {
                    for cm in ms {
                        self.run(cm, merged(&cm.frame, &frame))?;
                    }
                }
                BlockMatch::Optional(None) | BlockMatch::Negative => {}
            }
        }

        if let Some(rw) = &sc.rewrite {
            for call in &rw.calls {
                let inst = &m.subs[call.sub];
                let callee = prog.action(inst.action);
                let mut cf = inst.frame.clone();
                for (i, &s) in call.args.iter().enumerate() {
                    cf[callee.rewrite_params[i]] = frame[s].clone();
                }
                self.run(inst, cf)?;
            }
            for &s in &rw.deletes {
                if let Some(el) = frame[s].as_ref().and_then(Binding::elem) {
                    if self.graph.is_live(el) {
                        self.graph.remove(el)?;
                        self.outcome.deleted.push(el);
                    }
                }
            }
        }
        Ok(())
    }
}

fn merged(child: &Frame, outer: &Frame) -> Frame {
    child
        .iter()
        .zip(outer)
        .map(|(c, o)| if c.is_some() { c.clone() } else { o.clone() })
        .collect()
}

fn value_of(v: Val, what: &str) -> Result<crate::value::Value, RuleError> {
    match v {
        Val::V(v) => Ok(v),
        Val::Elem(e) => Err(rt(format!("`{what}`: expected a value, got element {e:?}"))),
        Val::Undef => Err(rt(format!("`{what}`: value is undefined"))),
    }
}
