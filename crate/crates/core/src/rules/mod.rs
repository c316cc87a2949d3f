//! The rule language: parsing, compilation, matching and rewriting.

pub mod ast;
pub mod compile;
pub mod expr;
pub mod matcher;
pub mod parser;
pub mod rewrite;

use std::sync::Arc;

use thiserror::Error;

use crate::graph::{Elem, Graph, GraphError};
use crate::lexer::SyntaxError;
use crate::metamodel::Schema;
use crate::value::Value;

pub use ast::RuleSet;
pub use compile::{Program, SlotKind};
pub use expr::{Binding, Frame, RewriteEnv};
pub use matcher::{BlockMatch, Match};
pub use parser::parse as parse_rules;
pub use rewrite::RewriteOutcome;

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{col}: {message}")]
    Compile {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` takes {expected} arguments, got {found}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("bad argument for `{param}`: {message}")]
    BadArgument { param: String, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("subpattern recursion deeper than {0} levels")]
    RecursionLimit(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An actual argument of a rule call.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Elem(Elem),
    Value(Value),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AllOutcome {
    pub applied: usize,
    /// Matches skipped because an earlier rewrite deleted one of their elements.
    pub stale: usize,
}

/// Compiled rules ready to run against graphs of one schema.
#[derive(Clone, Debug)]
pub struct Engine {
    program: Program,
    max_depth: usize,
    reverse: bool,
}

impl Engine {
    pub fn new(schema: Arc<Schema>, rules: &RuleSet) -> Result<Engine, RuleError> {
        Ok(Engine {
            program: Program::compile(schema, rules)?,
            max_depth: DEFAULT_MAX_DEPTH,
            reverse: false,
        })
    }

    pub fn from_source(schema: Arc<Schema>, src: &str) -> Result<Engine, RuleError> {
        Engine::new(schema, &parse_rules(src)?)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn has_rule(&self, name: &str) -> bool {
        self.program.rule(name).is_some()
    }

    pub fn rule_names(&self) -> Vec<String> {
        self.program.rule_names().map(str::to_string).collect()
    }

    pub fn set_max_depth(&mut self, depth: usize) {
        self.max_depth = depth;
    }

    /// Scan candidates in reverse creation order. Results are ordered by key
    /// either way, so this only exists to check that nothing depends on it.
    pub fn set_reverse_candidates(&mut self, reverse: bool) {
        self.reverse = reverse;
    }

    fn bind_args(
        &self,
        graph: &Graph,
        rule: &str,
        args: &[Arg],
    ) -> Result<(usize, Frame), RuleError> {
        let idx = self
            .program
            .rule(rule)
            .ok_or_else(|| RuleError::UnknownRule(rule.to_string()))?;
        let a = self.program.action(idx);
        if args.len() != a.params.len() {
            return Err(RuleError::Arity {
                rule: rule.to_string(),
                expected: a.params.len(),
                found: args.len(),
            });
        }
        let mut frame: Frame = vec![None; a.slots.len()];
        for (&p, arg) in a.params.iter().zip(args) {
            let slot = &a.slots[p];
            let bad = |message: String| RuleError::BadArgument {
                param: slot.name.clone(),
                message,
            };
            frame[p] = Some(match (slot.kind, arg) {
                (SlotKind::NodeParam, Arg::Elem(Elem::Node(n))) => Binding::Node(*n),
                (SlotKind::NodeParam, Arg::Value(Value::Str(name))) => match graph.by_name(name) {
                    Some(Elem::Node(n)) => Binding::Node(n),
                    _ => return Err(bad(format!("no node named `{name}`"))),
                },
                (SlotKind::VarParam, Arg::Value(v)) => {
                    let vt = slot.value_type.as_ref().expect("var slot has a type");
                    let v = v.clone().coerce(vt);
                    if !v.conforms(vt, graph.schema()) {
                        return Err(bad(format!("expected {vt}, got `{v}`")));
                    }
                    Binding::Val(v)
                }
                _ => return Err(bad(format!("unexpected argument {arg:?}"))),
            });
        }
        Ok((idx, frame))
    }

    /// Matches of `rule` in key order, at most `limit` of them.
    pub fn find_matches(
        &self,
        graph: &Graph,
        env: &RewriteEnv,
        rule: &str,
        args: &[Arg],
        limit: Option<usize>,
    ) -> Result<Vec<Match>, RuleError> {
        let (idx, frame) = self.bind_args(graph, rule, args)?;
        matcher::Matcher::new(&self.program, graph, env, self.max_depth, self.reverse)
            .find(idx, frame, limit)
    }

    pub fn apply(
        &self,
        graph: &mut Graph,
        env: &mut RewriteEnv,
        m: &Match,
    ) -> Result<RewriteOutcome, RuleError> {
        let mut rw = rewrite::Rewriter::new(&self.program, graph, env);
        rw.apply(m)?;
        Ok(rw.outcome)
    }

    /// Rewrites the first match, if any.
    pub fn apply_first(
        &self,
        graph: &mut Graph,
        env: &mut RewriteEnv,
        rule: &str,
        args: &[Arg],
    ) -> Result<Option<(Match, RewriteOutcome)>, RuleError> {
        let Some(m) = self.find_matches(graph, env, rule, args, Some(1))?.pop() else {
            return Ok(None);
        };
        let out = self.apply(graph, env, &m)?;
        Ok(Some((m, out)))
    }

    /// Collects all matches, then rewrites them one after the other in key
    /// order. A match whose elements were deleted by an earlier rewrite of
    /// the same batch is skipped.
    pub fn apply_all(
        &self,
        graph: &mut Graph,
        env: &mut RewriteEnv,
        rule: &str,
        args: &[Arg],
        mut on_apply: impl FnMut(&Match, &RewriteOutcome, &mut Graph),
    ) -> Result<AllOutcome, RuleError> {
        let matches = self.find_matches(graph, env, rule, args, None)?;
        let mut out = AllOutcome::default();
        for m in &matches {
            let mut els = Vec::new();
            m.elements(&self.program, &mut els);
            if !els.iter().all(|&e| graph.is_live(e)) {
                out.stale += 1;
                continue;
            }
            let res = self.apply(graph, env, m)?;
            on_apply(m, &res, graph);
            out.applied += 1;
        }
        Ok(out)
    }

    /// Named top-level bindings of a match, in declaration order.
    pub fn bindings(&self, m: &Match) -> Vec<(String, Binding)> {
        let a = self.program.action(m.action);
        a.slots
            .iter()
            .zip(&m.frame)
            .filter(|(s, b)| {
                s.scope == m.scope
                    && !s.is_anonymous()
                    && b.is_some()
                    && s.kind != SlotKind::RewriteParam
            })
            .map(|(s, b)| (s.name.clone(), b.clone().unwrap()))
            .collect()
    }
}
