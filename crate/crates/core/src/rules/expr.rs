//! Compiled expressions over a match frame.

use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{EdgeId, Elem, Graph, NodeId};
use crate::rules::ast::{BinOp, UnOp};
use crate::rules::RuleError;
use crate::value::{total_cmp, Value};

/// What a pattern slot is bound to.
#[derive(Clone, Debug, PartialEq)]
pub enum Binding {
    Node(NodeId),
    Edge(EdgeId),
    Val(Value),
}

impl Binding {
    pub fn elem(&self) -> Option<Elem> {
        match self {
            Binding::Node(n) => Some(Elem::Node(*n)),
            Binding::Edge(e) => Some(Elem::Edge(*e)),
            Binding::Val(_) => None,
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Node(n) => write!(f, "{n}"),
            Binding::Edge(e) => write!(f, "{e}"),
            Binding::Val(v) => write!(f, "{v}"),
        }
    }
}

pub type Frame = Vec<Option<Binding>>;

/// Graph-global variables written by `eval { ::x = ...; ::m[e] = ...; }`
/// and the text produced by `emit`.
#[derive(Clone, Debug, Default)]
pub struct RewriteEnv {
    pub globals: BTreeMap<String, Value>,
    pub maps: BTreeMap<String, BTreeMap<Elem, Value>>,
    pub emitted: String,
}

impl RewriteEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn map_value(&self, map: &str, key: Elem) -> Option<&Value> {
        self.maps.get(map).and_then(|m| m.get(&key))
    }
}

#[derive(Clone, Debug)]
pub enum CExpr {
    Lit(Value),
    Slot(usize),
    Attr(usize, String),
    Global(String),
    GlobalMap(String, Box<CExpr>),
    Unary(UnOp, Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Cond(Box<CExpr>, Box<CExpr>, Box<CExpr>),
    Defined(Box<CExpr>),
    XmlEscape(Box<CExpr>),
}

impl CExpr {
    pub fn slots(&self, out: &mut Vec<usize>) {
        match self {
            CExpr::Lit(_) | CExpr::Global(_) => {}
            CExpr::Slot(s) | CExpr::Attr(s, _) => out.push(*s),
            CExpr::GlobalMap(_, e)
            | CExpr::Unary(_, e)
            | CExpr::Defined(e)
            | CExpr::XmlEscape(e) => e.slots(out),
            CExpr::Binary(_, a, b) => {
                a.slots(out);
                b.slots(out);
            }
            CExpr::Cond(c, a, b) => {
                c.slots(out);
                a.slots(out);
                b.slots(out);
            }
        }
    }
}

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    V(Value),
    Elem(Elem),
    Undef,
}

fn rt(msg: impl Into<String>) -> RuleError {
    RuleError::Runtime(msg.into())
}

pub struct EvalCtx<'a> {
    pub frame: &'a Frame,
    pub graph: &'a Graph,
    pub env: &'a RewriteEnv,
}

impl EvalCtx<'_> {
    pub fn eval(&self, e: &CExpr) -> Result<Val, RuleError> {
        Ok(match e {
            CExpr::Lit(v) => Val::V(v.clone()),
            CExpr::Slot(s) => match &self.frame[*s] {
                None => Val::Undef,
                Some(Binding::Val(v)) => Val::V(v.clone()),
                Some(b) => Val::Elem(b.elem().unwrap()),
            },
            CExpr::Attr(s, attr) => match self.frame[*s].as_ref().and_then(Binding::elem) {
                Some(el) => Val::V(self.graph.get_attr(el, attr)?.clone()),
                None => return Err(rt(format!("attribute `{attr}` read on an unbound element"))),
            },
            CExpr::Global(name) => self
                .env
                .globals
                .get(name)
                .cloned()
                .map_or(Val::Undef, Val::V),
            CExpr::GlobalMap(map, key) => match self.eval(key)? {
                Val::Elem(el) => self
                    .env
                    .map_value(map, el)
                    .cloned()
                    .map_or(Val::Undef, Val::V),
                _ => return Err(rt(format!("key of `::{map}` must be a graph element"))),
            },
            CExpr::Unary(UnOp::Not, a) => Val::V(Value::Bool(!self.truth(a)?)),
            CExpr::Unary(UnOp::Neg, a) => match self.eval(a)? {
                Val::V(Value::Int(i)) => Val::V(Value::Int(-i)),
                Val::V(Value::Double(d)) => Val::V(Value::Double(-d)),
                other => return Err(rt(format!("cannot negate {}", describe(&other)))),
            },
            CExpr::Binary(BinOp::And, a, b) => {
                Val::V(Value::Bool(self.truth(a)? && self.truth(b)?))
            }
            CExpr::Binary(BinOp::Or, a, b) => Val::V(Value::Bool(self.truth(a)? || self.truth(b)?)),
            CExpr::Binary(op, a, b) => binary(*op, self.eval(a)?, self.eval(b)?)?,
            CExpr::Cond(c, a, b) => {
                if self.truth(c)? {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
            CExpr::Defined(a) => Val::V(Value::Bool(self.eval(a)? != Val::Undef)),
            CExpr::XmlEscape(a) => match self.eval(a)? {
                Val::V(v) => Val::V(Value::Str(xml_escape(&text_of(&v)))),
                other => {
                    return Err(rt(format!(
                        "xmlEscape expects a value, got {}",
                        describe(&other)
                    )))
                }
            },
        })
    }

    pub fn truth(&self, e: &CExpr) -> Result<bool, RuleError> {
        match self.eval(e)? {
            Val::V(Value::Bool(b)) => Ok(b),
            other => Err(rt(format!("expected a boolean, got {}", describe(&other)))),
        }
    }
}

fn describe(v: &Val) -> String {
    match v {
        Val::V(v) => format!("{} `{v}`", v.type_name()),
        Val::Elem(e) => format!("element {e:?}"),
        Val::Undef => "an undefined value".to_string(),
    }
}

/// Plain text of a scalar for string concatenation and emits.
pub fn text_of(v: &Value) -> String {
    match v {
        Value::Enum { item, .. } => item.clone(),
        other => other.to_string(),
    }
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#xA;"),
            '\r' => out.push_str("&#xD;"),
            '\t' => out.push_str("&#x9;"),
            c => out.push(c),
        }
    }
    out
}

fn binary(op: BinOp, a: Val, b: Val) -> Result<Val, RuleError> {
    use std::cmp::Ordering;
    let cmp = |a: &Val, b: &Val| -> Result<Ordering, RuleError> {
        match (a, b) {
            (Val::V(Value::Int(x)), Val::V(Value::Double(y))) => Ok((*x as f64).total_cmp(y)),
            (Val::V(Value::Double(x)), Val::V(Value::Int(y))) => Ok(x.total_cmp(&(*y as f64))),
            (Val::V(x), Val::V(y)) if x.type_name() == y.type_name() => Ok(total_cmp(x, y)),
            _ => Err(rt(format!(
                "cannot compare {} with {}",
                describe(a),
                describe(b)
            ))),
        }
    };
    let eq = |a: &Val, b: &Val| -> Result<bool, RuleError> {
        match (a, b) {
            (Val::V(_), Val::V(_)) => Ok(cmp(a, b)? == Ordering::Equal),
            _ => Ok(a == b),
        }
    };
    Ok(Val::V(match op {
        BinOp::Eq => Value::Bool(eq(&a, &b)?),
        BinOp::Ne => Value::Bool(!eq(&a, &b)?),
        BinOp::Lt => Value::Bool(cmp(&a, &b)? == Ordering::Less),
        BinOp::Le => Value::Bool(cmp(&a, &b)? != Ordering::Greater),
        BinOp::Gt => Value::Bool(cmp(&a, &b)? == Ordering::Greater),
        BinOp::Ge => Value::Bool(cmp(&a, &b)? != Ordering::Less),
        BinOp::Add => match (&a, &b) {
            (Val::V(Value::Int(x)), Val::V(Value::Int(y))) => {
                Value::Int(x.checked_add(*y).ok_or_else(|| rt("integer overflow"))?)
            }
            (Val::V(Value::Str(x)), Val::V(y)) => Value::Str(format!("{x}{}", text_of(y))),
            (Val::V(x), Val::V(Value::Str(y))) => Value::Str(format!("{}{y}", text_of(x))),
            (Val::V(x), Val::V(y)) => match (num(x), num(y)) {
                (Some(x), Some(y)) => Value::Double(x + y),
                _ => {
                    return Err(rt(format!(
                        "cannot add {} and {}",
                        describe(&a),
                        describe(&b)
                    )))
                }
            },
            _ => {
                return Err(rt(format!(
                    "cannot add {} and {}",
                    describe(&a),
                    describe(&b)
                )))
            }
        },
        BinOp::Sub => match (&a, &b) {
            (Val::V(Value::Int(x)), Val::V(Value::Int(y))) => {
                Value::Int(x.checked_sub(*y).ok_or_else(|| rt("integer overflow"))?)
            }
            (Val::V(x), Val::V(y)) => match (num(x), num(y)) {
                (Some(x), Some(y)) => Value::Double(x - y),
                _ => {
                    return Err(rt(format!(
                        "cannot subtract {} from {}",
                        describe(&b),
                        describe(&a)
                    )))
                }
            },
            _ => {
                return Err(rt(format!(
                    "cannot subtract {} from {}",
                    describe(&b),
                    describe(&a)
                )))
            }
        },
        BinOp::And | BinOp::Or => unreachable!("short-circuited by the caller"),
    }))
}

fn num(v: &Value) -> Option<f64> {
    match v {
        Value::Int(i) => Some(*i as f64),
        Value::Double(d) => Some(*d),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metamodel::Schema;

    fn ev(e: &CExpr) -> Result<Val, RuleError> {
        let g = Graph::new(Arc::new(Schema::empty()));
        let env = RewriteEnv::new();
        let frame = vec![Some(Binding::Val(Value::Int(4))), None];
        EvalCtx {
            frame: &frame,
            graph: &g,
            env: &env,
        }
        .eval(e)
    }

    fn lit(v: Value) -> Box<CExpr> {
        Box::new(CExpr::Lit(v))
    }

    #[test]
    fn arithmetic_and_concat() {
        let e = CExpr::Binary(BinOp::Add, Box::new(CExpr::Slot(0)), lit(Value::Int(3)));
        assert_eq!(ev(&e).unwrap(), Val::V(Value::Int(7)));
        let e = CExpr::Binary(
            BinOp::Add,
            lit(Value::Str("/0/@states.".into())),
            Box::new(CExpr::Slot(0)),
        );
        assert_eq!(ev(&e).unwrap(), Val::V(Value::Str("/0/@states.4".into())));
        let e = CExpr::Binary(BinOp::Lt, lit(Value::Int(1)), lit(Value::Double(1.5)));
        assert_eq!(ev(&e).unwrap(), Val::V(Value::Bool(true)));
    }

    #[test]
    fn undefined_and_errors() {
        assert_eq!(
            ev(&CExpr::Defined(Box::new(CExpr::Slot(1)))).unwrap(),
            Val::V(Value::Bool(false))
        );
        assert!(ev(&CExpr::Binary(
            BinOp::Add,
            lit(Value::Bool(true)),
            lit(Value::Int(1))
        ))
        .is_err());
        assert!(ev(&CExpr::Unary(UnOp::Not, lit(Value::Int(1)))).is_err());
    }

    #[test]
    fn escaping() {
        assert_eq!(xml_escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
