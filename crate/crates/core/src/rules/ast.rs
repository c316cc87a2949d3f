//! Syntax tree of the rule language, as produced by the parser and before
//! any name or type resolution.

use indexmap::IndexMap;

use crate::metamodel::ValueType;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RuleSet {
    pub rules: IndexMap<String, RuleDecl>,
    pub patterns: IndexMap<String, PatternDecl>,
}

impl RuleSet {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.patterns.is_empty()
    }

    /// Adds all declarations of `other`; returns the first clashing name.
    pub fn extend(&mut self, other: RuleSet) -> Result<(), String> {
        for (name, r) in other.rules {
            if self.rules.contains_key(&name) || self.patterns.contains_key(&name) {
                return Err(name);
            }
            self.rules.insert(name, r);
        }
        for (name, p) in other.patterns {
            if self.rules.contains_key(&name) || self.patterns.contains_key(&name) {
                return Err(name);
            }
            self.patterns.insert(name, p);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RuleDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Body,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct PatternDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub rewrite_params: Vec<Param>,
    pub body: Body,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamKind {
    /// `x:Type`
    Node(String),
    /// `def x:Type`, an output filled by `yield`
    Def(String),
    /// `var x:type`, a scalar value
    Var(ValueType),
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default)]
pub struct Body {
    pub items: Vec<Item>,
    pub rewrite: Option<Rewrite>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct NodeTerm {
    pub name: Option<String>,
    pub ty: Option<String>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct EdgeTerm {
    pub name: Option<String>,
    pub ty: Option<String>,
    pub pos: Pos,
}

/// `src -edge-> tgt`; backward arrows are normalized at parse time.
#[derive(Clone, Debug)]
pub struct EdgeDecl {
    pub src: NodeTerm,
    pub edge: EdgeTerm,
    pub tgt: NodeTerm,
    /// Whether `src` was written first (forward arrow). Declaration order of
    /// new elements follows the written order.
    pub forward: bool,
}

#[derive(Clone, Debug)]
pub enum SubArg {
    Elem(String, Pos),
    Yield(String, Pos),
}

#[derive(Clone, Debug)]
pub enum Item {
    Node(NodeTerm),
    Edge(EdgeDecl),
    Def {
        name: String,
        ty: String,
        pos: Pos,
    },
    Cond(Vec<Expr>),
    Subpattern {
        name: String,
        pattern: String,
        args: Vec<SubArg>,
        pos: Pos,
    },
    Iterated(Body),
    Optional(Body),
    Negative(Body),
    Yield(Vec<YieldAssign>),
}

#[derive(Clone, Debug)]
pub struct YieldAssign {
    pub target: String,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Modify,
    Replace,
}

#[derive(Clone, Debug)]
pub struct Rewrite {
    pub mode: Mode,
    pub stmts: Vec<RwStmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub enum RwStmt {
    Node(NodeTerm),
    Edge(EdgeDecl),
    Delete(Vec<(String, Pos)>),
    Eval(Vec<Assign>),
    Emit(Vec<Expr>),
    Call {
        name: String,
        args: Vec<(String, Pos)>,
        pos: Pos,
    },
}

#[derive(Clone, Debug)]
pub enum AssignTarget {
    Attr { elem: String, attr: String },
    Global(String),
    GlobalMap { map: String, key: Expr },
}

#[derive(Clone, Debug)]
pub struct Assign {
    pub target: AssignTarget,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
}

#[derive(Clone, Debug)]
pub enum Expr {
    Lit(Value),
    EnumLit {
        ty: String,
        item: String,
        pos: Pos,
    },
    Var(String, Pos),
    Attr {
        elem: String,
        attr: String,
        pos: Pos,
    },
    Global(String),
    GlobalMap {
        map: String,
        key: Box<Expr>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Call {
        func: String,
        args: Vec<Expr>,
        pos: Pos,
    },
}

impl Expr {
    /// Names of elements or variables the expression reads.
    pub fn idents(&self, out: &mut Vec<String>) {
        match self {
            Expr::Lit(_) | Expr::EnumLit { .. } | Expr::Global(_) => {}
            Expr::Var(n, _) => out.push(n.clone()),
            Expr::Attr { elem, .. } => out.push(elem.clone()),
            Expr::GlobalMap { key, .. } => key.idents(out),
            Expr::Unary(_, e) => e.idents(out),
            Expr::Binary(_, a, b) => {
                a.idents(out);
                b.idents(out);
            }
            Expr::Cond(c, a, b) => {
                c.idents(out);
                a.idents(out);
                b.idents(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.idents(out)),
        }
    }
}
