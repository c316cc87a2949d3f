//! Rule application control: a small language of rule calls combined with
//! boolean and sequencing operators.
//!
//! ```text
//! seq   := left ((";>" | "<;") left)*
//! left  := or
//! or    := and ("||" and)*
//! and   := unary ("&&" unary)*
//! unary := "!" unary | post
//! post  := prim "*"*
//! prim  := rule | "[" rule "]" | "(" seq ")" | "true" | "false"
//! rule  := ident [ "(" literal ("," literal)* ")" ]
//! ```
//!
//! `r` applies the first match of `r`; `[r]` applies all matches found in
//! one search. Both succeed iff something was applied. `a ;> b` runs both
//! and yields `b`, `a <; b` runs both and yields `a`. `&&` and `||` are
//! lazy. `s*` runs `s` until it fails and succeeds iff it succeeded at
//! least once.

use std::fmt;

use thiserror::Error;

use crate::graph::Graph;
use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::rules::{Arg, Binding, Engine, Match, RewriteEnv, RuleError};
use crate::trace::{GraphSnapshot, TraceBinding, TraceHook, TraceRecord};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum Seq {
    Rule {
        name: String,
        args: Vec<Value>,
        all: bool,
    },
    Const(bool),
    Not(Box<Seq>),
    And(Box<Seq>, Box<Seq>),
    Or(Box<Seq>, Box<Seq>),
    ThenRight(Box<Seq>, Box<Seq>),
    ThenLeft(Box<Seq>, Box<Seq>),
    Star(Box<Seq>),
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seq::Rule { name, args, all } => {
                if *all {
                    f.write_str("[")?;
                }
                f.write_str(name)?;
                if !args.is_empty() {
                    let parts: Vec<String> = args.iter().map(literal).collect();
                    write!(f, "({})", parts.join(", "))?;
                }
                if *all {
                    f.write_str("]")?;
                }
                Ok(())
            }
            Seq::Const(b) => write!(f, "{b}"),
            Seq::Not(s) => write!(f, "!{}", Paren(s)),
            Seq::And(a, b) => write!(f, "{} && {}", Paren(a), Paren(b)),
            Seq::Or(a, b) => write!(f, "{} || {}", Paren(a), Paren(b)),
            Seq::ThenRight(a, b) => write!(f, "{} ;> {}", Paren(a), Paren(b)),
            Seq::ThenLeft(a, b) => write!(f, "{} <; {}", Paren(a), Paren(b)),
            Seq::Star(s) => write!(f, "{}*", Paren(s)),
        }
    }
}

/// Parenthesizes anything but atoms.
struct Paren<'a>(&'a Seq);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Seq::Rule { .. } | Seq::Const(_) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Str(s) => format!("{s:?}"),
        other => other.to_string(),
    }
}

pub fn parse_seq(src: &str) -> Result<Seq, SyntaxError> {
    let mut cur = Cursor::new(src)?;
    let s = seq(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("unexpected {}", cur.peek())));
    }
    Ok(s)
}

fn seq(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut s = or(cur)?;
    loop {
        if cur.eat_punct(";>") {
            s = Seq::ThenRight(Box::new(s), Box::new(or(cur)?));
        } else if cur.eat_punct("<;") {
            s = Seq::ThenLeft(Box::new(s), Box::new(or(cur)?));
        } else {
            return Ok(s);
        }
    }
}

fn or(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut s = and(cur)?;
    while cur.eat_punct("||") {
        s = Seq::Or(Box::new(s), Box::new(and(cur)?));
    }
    Ok(s)
}

fn and(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    let mut s = unary(cur)?;
    while cur.eat_punct("&&") {
        s = Seq::And(Box::new(s), Box::new(unary(cur)?));
    }
    Ok(s)
}

fn unary(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    if cur.eat_punct("!") {
        return Ok(Seq::Not(Box::new(unary(cur)?)));
    }
    let mut s = prim(cur)?;
    while cur.eat_punct("*") {
        s = Seq::Star(Box::new(s));
    }
    Ok(s)
}

fn prim(cur: &mut Cursor) -> Result<Seq, SyntaxError> {
    if cur.eat_punct("(") {
        let s = seq(cur)?;
        cur.expect_punct(")")?;
        return Ok(s);
    }
    if cur.eat_punct("[") {
        let (name, args) = rule_call(cur)?;
        cur.expect_punct("]")?;
        return Ok(Seq::Rule {
            name,
            args,
            all: true,
        });
    }
    if cur.eat_keyword("true") {
        return Ok(Seq::Const(true));
    }
    if cur.eat_keyword("false") {
        return Ok(Seq::Const(false));
    }
    let (name, args) = rule_call(cur)?;
    Ok(Seq::Rule {
        name,
        args,
        all: false,
    })
}

fn rule_call(cur: &mut Cursor) -> Result<(String, Vec<Value>), SyntaxError> {
    let name = cur.expect_ident()?;
    let mut args = Vec::new();
    if cur.eat_punct("(") && !cur.eat_punct(")") {
        loop {
            let neg = cur.eat_punct("-");
            let v = match cur.next() {
                Tok::Int(i) => Value::Int(if neg { -i } else { i }),
                Tok::Double(d) => Value::Double(if neg { -d } else { d }),
                Tok::Str(s) if !neg => Value::Str(s),
                Tok::Ident(b) if !neg && (b == "true" || b == "false") => Value::Bool(b == "true"),
                other => {
                    return Err(cur.error(format!("expected a literal argument, found {other}")))
                }
            };
            args.push(v);
            if cur.eat_punct(")") {
                break;
            }
            cur.expect_punct(",")?;
        }
    }
    Ok((name, args))
}

#[derive(Debug, Error)]
pub enum SeqError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("rule `{rule}`: {source}")]
    Rule { rule: String, source: RuleError },
    #[error("step budget of {0} rule applications exhausted")]
    Budget(u64),
}

/// Runs sequences against a graph. Holds the rewrite environment so that
/// globals and emitted text persist across sequences.
pub struct Executor<'a> {
    engine: &'a Engine,
    graph: &'a mut Graph,
    env: &'a mut RewriteEnv,
    hook: Option<&'a mut dyn TraceHook>,
    budget: Option<u64>,
    applications: u64,
    step: u64,
}

impl<'a> Executor<'a> {
    pub fn new(engine: &'a Engine, graph: &'a mut Graph, env: &'a mut RewriteEnv) -> Self {
        Executor {
            engine,
            graph,
            env,
            hook: None,
            budget: None,
            applications: 0,
            step: 0,
        }
    }

    /// Records a snapshot now and every event from here on.
    pub fn with_trace(mut self, hook: &'a mut dyn TraceHook) -> Self {
        hook.record(TraceRecord::Snapshot {
            graph: GraphSnapshot::of(self.graph),
        });
        self.hook = Some(hook);
        self
    }

    /// Limits the total number of rule applications.
    pub fn with_budget(mut self, max_applications: u64) -> Self {
        self.budget = Some(max_applications);
        self
    }

    pub fn applications(&self) -> u64 {
        self.applications
    }

    pub fn run(&mut self, seq: &Seq) -> Result<bool, SeqError> {
        if self.hook.is_some() {
            self.graph.start_journal();
        }
        let res = self.exec(seq);
        if self.hook.is_some() {
            self.graph.stop_journal();
        }
        res
    }

    fn emit(&mut self, make: impl FnOnce(u64) -> TraceRecord) {
        if let Some(h) = self.hook.as_mut() {
            self.step += 1;
            h.record(make(self.step));
        }
    }

    fn count(&mut self) -> Result<(), SeqError> {
        self.applications += 1;
        match self.budget {
            Some(b) if self.applications > b => Err(SeqError::Budget(b)),
            _ => Ok(()),
        }
    }

    fn exec(&mut self, seq: &Seq) -> Result<bool, SeqError> {
        match seq {
            Seq::Rule { name, args, all } => return self.call(name, args, *all),
            Seq::Const(b) => return Ok(*b),
            _ => {}
        }
        let text = seq.to_string();
        self.emit(|step| TraceRecord::SequenceEnter {
            step,
            seq: text.clone(),
        });
        let result = match seq {
            Seq::Rule { .. } | Seq::Const(_) => unreachable!(),
            Seq::Not(s) => !self.exec(s)?,
            Seq::And(a, b) => self.exec(a)? && self.exec(b)?,
            Seq::Or(a, b) => self.exec(a)? || self.exec(b)?,
            Seq::ThenRight(a, b) => {
                self.exec(a)?;
                self.exec(b)?
            }
            Seq::ThenLeft(a, b) => {
                let r = self.exec(a)?;
                self.exec(b)?;
                r
            }
            Seq::Star(s) => {
                let mut any = false;
                while self.exec(s)? {
                    any = true;
                }
                any
            }
        };
        self.emit(|step| TraceRecord::SequenceExit {
            step,
            seq: text,
            result,
        });
        Ok(result)
    }

    fn bindings(&self, m: &Match) -> Vec<TraceBinding> {
        self.engine
            .bindings(m)
            .into_iter()
            .map(|(name, b)| TraceBinding {
                name,
                class: b
                    .elem()
                    .and_then(|e| self.graph.class_name(e).ok())
                    .map(str::to_string),
                value: match b {
                    Binding::Val(v) => literal(&v),
                    other => other.to_string(),
                },
            })
            .collect()
    }

    fn call(&mut self, name: &str, args: &[Value], all: bool) -> Result<bool, SeqError> {
        let wrap = |source| SeqError::Rule {
            rule: name.to_string(),
            source,
        };
        let args: Vec<Arg> = args.iter().cloned().map(Arg::Value).collect();
        let matches = if all {
            self.engine
                .find_matches(self.graph, self.env, name, &args, None)
                .map_err(wrap)?
        } else {
            self.engine
                .find_matches(self.graph, self.env, name, &args, Some(1))
                .map_err(wrap)?
        };
        let program = self.engine.program();
        let mut applied = 0;
        for m in &matches {
            if applied > 0 {
                let mut els = Vec::new();
                m.elements(program, &mut els);
                if !els.iter().all(|&e| self.graph.is_live(e)) {
                    continue;
                }
            }
            self.count()?;
            let bindings = if self.hook.is_some() {
                self.bindings(m)
            } else {
                Vec::new()
            };
            let mark = self.env.emitted.len();
            self.engine.apply(self.graph, self.env, m).map_err(wrap)?;
            applied += 1;
            if self.hook.is_some() {
                let delta = self.graph.drain_journal();
                let emitted = self.env.emitted[mark..].to_string();
                self.emit(|step| TraceRecord::RuleApplied {
                    step,
                    rule: name.to_string(),
                    bindings,
                    delta,
                    emitted,
                });
            }
        }
        if applied == 0 {
            self.emit(|step| TraceRecord::RuleFailed {
                step,
                rule: name.to_string(),
            });
        }
        Ok(applied > 0)
    }
}
