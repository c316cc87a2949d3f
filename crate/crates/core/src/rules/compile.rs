//! Resolves names and types of a parsed rule set against a schema and turns
//! every rule and subpattern into an [`Action`]: a flat slot table plus a
//! tree of scopes, each with its search plan and rewrite program.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::metamodel::{ClassId, ClassKind, Schema, ValueType};
use crate::rules::ast::*;
use crate::rules::expr::CExpr;
use crate::rules::RuleError;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    PatternNode,
    PatternEdge,
    NodeParam,
    DefNode,
    VarParam,
    RewriteParam,
    CreatedNode,
    CreatedEdge,
}

impl SlotKind {
    pub fn is_node(self) -> bool {
        matches!(
            self,
            SlotKind::PatternNode
                | SlotKind::NodeParam
                | SlotKind::DefNode
                | SlotKind::RewriteParam
                | SlotKind::CreatedNode
        )
    }

    pub fn is_element(self) -> bool {
        self != SlotKind::VarParam
    }
}

#[derive(Clone, Debug)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
    /// Static class; the node root for value slots.
    pub class: ClassId,
    pub value_type: Option<ValueType>,
    pub scope: usize,
}

impl Slot {
    pub fn is_anonymous(&self) -> bool {
        self.name.starts_with('$')
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeKind {
    Top,
    Iterated,
    Optional,
    Negative,
}

#[derive(Clone, Debug)]
pub struct EdgeSpec {
    pub slot: usize,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    ScanNode(usize),
    /// Index into the scope's edges; binds the edge and both endpoints.
    ScanEdge(usize),
    /// Follow an edge from its bound source (or target) endpoint.
    Extend {
        edge: usize,
        from_src: bool,
    },
}

#[derive(Clone, Debug)]
pub enum SubArgC {
    Elem(usize),
    Yield(usize),
}

#[derive(Clone, Debug)]
pub struct SubCall {
    pub name: String,
    pub pattern: String,
    pub action: usize,
    pub args: Vec<SubArgC>,
}

#[derive(Clone, Debug)]
pub enum Create {
    Node {
        slot: usize,
        class: ClassId,
    },
    Edge {
        slot: usize,
        class: ClassId,
        src: usize,
        tgt: usize,
    },
}

#[derive(Clone, Debug)]
pub enum RwOp {
    SetAttr {
        slot: usize,
        attr: String,
        value: CExpr,
    },
    SetGlobal {
        name: String,
        value: CExpr,
    },
    SetMap {
        map: String,
        key: CExpr,
        value: CExpr,
    },
    Emit(Vec<CExpr>),
}

#[derive(Clone, Debug)]
pub struct RwCall {
    pub sub: usize,
    pub args: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CRewrite {
    pub mode: Mode,
    pub creates: Vec<Create>,
    pub ops: Vec<RwOp>,
    pub calls: Vec<RwCall>,
    /// Explicit deletions followed by the unmentioned locals of a replace.
    pub deletes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Scope {
    pub kind: ScopeKind,
    pub parent: Option<usize>,
    /// Local pattern nodes and edges in declaration order; matches of the
    /// scope are ordered by the elements bound to these.
    pub key: Vec<usize>,
    pub nodes: Vec<usize>,
    pub edges: Vec<EdgeSpec>,
    pub plan: Vec<Step>,
    /// `conds_at[i]` is checked once the first `i` plan steps are bound.
    pub conds_at: Vec<Vec<CExpr>>,
    /// Conditions reading `def` variables, checked after completion.
    pub deferred: Vec<CExpr>,
    pub subs: Vec<SubCall>,
    pub children: Vec<usize>,
    pub yields: Vec<(usize, CExpr)>,
    pub rewrite: Option<CRewrite>,
}

impl Scope {
    fn new(kind: ScopeKind, parent: Option<usize>) -> Scope {
        Scope {
            kind,
            parent,
            key: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            plan: Vec::new(),
            conds_at: Vec::new(),
            deferred: Vec::new(),
            subs: Vec::new(),
            children: Vec::new(),
            yields: Vec::new(),
            rewrite: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Action {
    pub name: String,
    pub is_pattern: bool,
    pub slots: Vec<Slot>,
    pub params: Vec<usize>,
    pub rewrite_params: Vec<usize>,
    pub scopes: Vec<Scope>,
}

#[derive(Clone, Debug)]
pub struct Program {
    schema: Arc<Schema>,
    actions: Vec<Action>,
    index: HashMap<String, usize>,
    rule_count: usize,
}

impl Program {
    pub fn compile(schema: Arc<Schema>, set: &RuleSet) -> Result<Program, RuleError> {
        let mut index = HashMap::new();
        for (i, name) in set.rules.keys().chain(set.patterns.keys()).enumerate() {
            index.insert(name.clone(), i);
        }
        let mut actions = Vec::new();
        {
            let ctx = Ctx {
                schema: &schema,
                set,
                index: &index,
            };
            for r in set.rules.values() {
                actions.push(ActionBuilder::new(&ctx).build(
                    &r.name,
                    false,
                    &r.params,
                    &[],
                    &r.body,
                )?);
            }
            for p in set.patterns.values() {
                actions.push(ActionBuilder::new(&ctx).build(
                    &p.name,
                    true,
                    &p.params,
                    &p.rewrite_params,
                    &p.body,
                )?);
            }
        }
        Ok(Program {
            schema,
            actions,
            index,
            rule_count: set.rules.len(),
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, i: usize) -> &Action {
        &self.actions[i]
    }

    /// Index of the rule (not subpattern) called `name`.
    pub fn rule(&self, name: &str) -> Option<usize> {
        self.index
            .get(name)
            .copied()
            .filter(|&i| i < self.rule_count)
    }

    pub fn rule_names(&self) -> impl Iterator<Item = &str> {
        self.actions[..self.rule_count]
            .iter()
            .map(|a| a.name.as_str())
    }
}

struct Ctx<'a> {
    schema: &'a Schema,
    set: &'a RuleSet,
    index: &'a HashMap<String, usize>,
}

fn err(pos: Pos, message: impl Into<String>) -> RuleError {
    RuleError::Compile {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

struct ActionBuilder<'a> {
    ctx: &'a Ctx<'a>,
    slots: Vec<Slot>,
    scopes: Vec<Scope>,
    names: Vec<HashMap<String, usize>>,
    rw_names: Vec<HashMap<String, usize>>,
    sub_names: Vec<HashMap<String, usize>>,
    anon: usize,
}

impl<'a> ActionBuilder<'a> {
    fn new(ctx: &'a Ctx<'a>) -> Self {
        ActionBuilder {
            ctx,
            slots: Vec::new(),
            scopes: Vec::new(),
            names: Vec::new(),
            rw_names: Vec::new(),
            sub_names: Vec::new(),
            anon: 0,
        }
    }

    fn build(
        mut self,
        name: &str,
        is_pattern: bool,
        params: &[Param],
        rewrite_params: &[Param],
        body: &Body,
    ) -> Result<Action, RuleError> {
        let top = self.new_scope(ScopeKind::Top, None);
        let mut param_slots = Vec::new();
        for p in params {
            if self.lookup(top, &p.name).is_some() {
                return Err(err(p.pos, format!("duplicate parameter `{}`", p.name)));
            }
            let slot = match &p.kind {
                ParamKind::Node(ty) => {
                    let class = self.class(ClassKind::Node, Some(ty), p.pos)?;
                    self.declare(top, Some(&p.name), SlotKind::NodeParam, class, None)
                }
                ParamKind::Def(ty) => {
                    let class = self.class(ClassKind::Node, Some(ty), p.pos)?;
                    self.declare(top, Some(&p.name), SlotKind::DefNode, class, None)
                }
                ParamKind::Var(vt) => {
                    self.check_value_type(vt, p.pos)?;
                    let root = self.ctx.schema.node_root();
                    self.declare(
                        top,
                        Some(&p.name),
                        SlotKind::VarParam,
                        root,
                        Some(vt.clone()),
                    )
                }
            };
            param_slots.push(slot);
        }
        let mut rw_slots = Vec::new();
        for p in rewrite_params {
            if self.lookup_rw(top, &p.name).is_some() {
                return Err(err(p.pos, format!("duplicate parameter `{}`", p.name)));
            }
            let ParamKind::Node(ty) = &p.kind else {
                return Err(err(p.pos, "rewrite parameters must be nodes"));
            };
            let class = self.class(ClassKind::Node, Some(ty), p.pos)?;
            let slot = self.push_slot(top, &p.name, SlotKind::RewriteParam, class, None);
            self.rw_names[top].insert(p.name.clone(), slot);
            rw_slots.push(slot);
        }
        self.body(top, body)?;
        Ok(Action {
            name: name.to_string(),
            is_pattern,
            slots: self.slots,
            params: param_slots,
            rewrite_params: rw_slots,
            scopes: self.scopes,
        })
    }

    fn new_scope(&mut self, kind: ScopeKind, parent: Option<usize>) -> usize {
        self.scopes.push(Scope::new(kind, parent));
        self.names.push(HashMap::new());
        self.rw_names.push(HashMap::new());
        self.sub_names.push(HashMap::new());
        self.scopes.len() - 1
    }

    fn chain(&self, sc: usize) -> Vec<usize> {
        let mut out = vec![sc];
        let mut cur = sc;
        while let Some(p) = self.scopes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    fn lookup(&self, sc: usize, name: &str) -> Option<usize> {
        self.chain(sc)
            .into_iter()
            .find_map(|s| self.names[s].get(name).copied())
    }

    fn lookup_rw(&self, sc: usize, name: &str) -> Option<usize> {
        self.chain(sc).into_iter().find_map(|s| {
            self.rw_names[s]
                .get(name)
                .or_else(|| self.names[s].get(name))
                .copied()
        })
    }

    fn class(&self, kind: ClassKind, ty: Option<&String>, pos: Pos) -> Result<ClassId, RuleError> {
        let schema = self.ctx.schema;
        match ty {
            None => Ok(match kind {
                ClassKind::Node => schema.node_root(),
                ClassKind::Edge => schema.edge_root(),
            }),
            Some(name) => schema
                .lookup(kind, name)
                .map_err(|_| err(pos, format!("unknown {kind} class `{name}`"))),
        }
    }

    fn check_value_type(&self, vt: &ValueType, pos: Pos) -> Result<(), RuleError> {
        match vt {
            ValueType::Enum(name) if self.ctx.schema.enum_def(name).is_none() => {
                Err(err(pos, format!("unknown enum `{name}`")))
            }
            ValueType::Set(t) | ValueType::Array(t) => self.check_value_type(t, pos),
            ValueType::Map(k, v) => {
                self.check_value_type(k, pos)?;
                self.check_value_type(v, pos)
            }
            _ => Ok(()),
        }
    }

    fn push_slot(
        &mut self,
        sc: usize,
        name: &str,
        kind: SlotKind,
        class: ClassId,
        vt: Option<ValueType>,
    ) -> usize {
        self.slots.push(Slot {
            name: name.to_string(),
            kind,
            class,
            value_type: vt,
            scope: sc,
        });
        self.slots.len() - 1
    }

    fn declare(
        &mut self,
        sc: usize,
        name: Option<&String>,
        kind: SlotKind,
        class: ClassId,
        vt: Option<ValueType>,
    ) -> usize {
        let name = match name {
            Some(n) => n.clone(),
            None => {
                self.anon += 1;
                format!("${}", self.anon)
            }
        };
        let slot = self.push_slot(sc, &name, kind, class, vt);
        if !name.starts_with('$') {
            self.names[sc].insert(name, slot);
        }
        match kind {
            SlotKind::PatternNode => {
                self.scopes[sc].key.push(slot);
                self.scopes[sc].nodes.push(slot);
            }
            SlotKind::PatternEdge => self.scopes[sc].key.push(slot),
            _ => {}
        }
        slot
    }

    fn body(&mut self, sc: usize, body: &Body) -> Result<(), RuleError> {
        let mut conds = Vec::new();
        for item in &body.items {
            match item {
                Item::Node(t) => {
                    self.pattern_node(sc, t)?;
                }
                Item::Edge(e) => self.pattern_edge(sc, e)?,
                Item::Def { name, ty, pos } => {
                    if self.lookup(sc, name).is_some() {
                        return Err(err(*pos, format!("`{name}` is already declared")));
                    }
                    let class = self.class(ClassKind::Node, Some(ty), *pos)?;
                    self.declare(sc, Some(name), SlotKind::DefNode, class, None);
                }
                Item::Cond(es) => {
                    for e in es {
                        conds.push(self.expr(sc, e, false)?);
                    }
                }
                Item::Subpattern {
                    name,
                    pattern,
                    args,
                    pos,
                } => self.subpattern(sc, name, pattern, args, *pos)?,
                Item::Iterated(b) | Item::Optional(b) | Item::Negative(b) => {
                    let kind = match item {
                        Item::Iterated(_) => ScopeKind::Iterated,
                        Item::Optional(_) => ScopeKind::Optional,
                        _ => ScopeKind::Negative,
                    };
                    let child = self.new_scope(kind, Some(sc));
                    self.scopes[sc].children.push(child);
                    self.body(child, b)?;
                }
                Item::Yield(assigns) => {
                    for a in assigns {
                        let Some(slot) = self.lookup(sc, &a.target) else {
                            return Err(err(a.pos, format!("unknown variable `{}`", a.target)));
                        };
                        if self.slots[slot].kind != SlotKind::DefNode {
                            return Err(err(
                                a.pos,
                                format!("`{}` is not a def variable", a.target),
                            ));
                        }
                        let value = self.expr(sc, &a.value, false)?;
                        self.scopes[sc].yields.push((slot, value));
                    }
                }
            }
        }
        self.plan(sc);
        self.attach_conds(sc, conds);
        if let Some(rw) = &body.rewrite {
            let compiled = self.rewrite(sc, rw)?;
            self.scopes[sc].rewrite = Some(compiled);
        }
        self.validate(sc, body)
    }

    fn validate(&self, sc: usize, body: &Body) -> Result<(), RuleError> {
        let scope = &self.scopes[sc];
        if scope.kind == ScopeKind::Negative {
            let has_def = self
                .slots
                .iter()
                .any(|s| s.scope == sc && s.kind == SlotKind::DefNode);
            if has_def
                || !scope.yields.is_empty()
                || !scope.subs.is_empty()
                || scope.rewrite.is_some()
            {
                return Err(err(
                    body.pos,
                    "a negative block may only hold a plain pattern",
                ));
            }
            if scope
                .children
                .iter()
                .any(|&c| self.scopes[c].kind != ScopeKind::Negative)
            {
                return Err(err(
                    body.pos,
                    "a negative block may only nest negative blocks",
                ));
            }
        }
        if scope
            .rewrite
            .as_ref()
            .is_some_and(|r| r.mode == Mode::Replace)
            && scope
                .children
                .iter()
                .any(|&c| self.scopes[c].kind == ScopeKind::Iterated)
        {
            return Err(err(
                body.pos,
                "replace mode cannot be combined with iterated blocks",
            ));
        }
        Ok(())
    }

    fn pattern_node(&mut self, sc: usize, t: &NodeTerm) -> Result<usize, RuleError> {
        if let Some(name) = &t.name {
            if let Some(slot) = self.lookup(sc, name) {
                if t.ty.is_some() {
                    return Err(err(t.pos, format!("`{name}` is already declared")));
                }
                if !matches!(
                    self.slots[slot].kind,
                    SlotKind::PatternNode | SlotKind::NodeParam
                ) {
                    return Err(err(t.pos, format!("`{name}` is not a pattern node")));
                }
                return Ok(slot);
            }
        }
        let class = self.class(ClassKind::Node, t.ty.as_ref(), t.pos)?;
        Ok(self.declare(sc, t.name.as_ref(), SlotKind::PatternNode, class, None))
    }

    fn pattern_edge(&mut self, sc: usize, e: &EdgeDecl) -> Result<(), RuleError> {
        let (first, second) = if e.forward {
            (&e.src, &e.tgt)
        } else {
            (&e.tgt, &e.src)
        };
        let a = self.pattern_node(sc, first)?;
        if let Some(name) = &e.edge.name {
            if self.lookup(sc, name).is_some() {
                return Err(err(e.edge.pos, format!("`{name}` is already declared")));
            }
        }
        let class = self.class(ClassKind::Edge, e.edge.ty.as_ref(), e.edge.pos)?;
        let slot = self.declare(sc, e.edge.name.as_ref(), SlotKind::PatternEdge, class, None);
        let b = self.pattern_node(sc, second)?;
        let (src, tgt) = if e.forward { (a, b) } else { (b, a) };
        self.scopes[sc].edges.push(EdgeSpec { slot, src, tgt });
        Ok(())
    }

    fn subpattern(
        &mut self,
        sc: usize,
        name: &str,
        pattern: &str,
        args: &[SubArg],
        pos: Pos,
    ) -> Result<(), RuleError> {
        let Some(decl) = self.ctx.set.patterns.get(pattern) else {
            return Err(err(pos, format!("unknown pattern `{pattern}`")));
        };
        if args.len() != decl.params.len() {
            return Err(err(
                pos,
                format!(
                    "`{pattern}` takes {} arguments, got {}",
                    decl.params.len(),
                    args.len()
                ),
            ));
        }
        if self.sub_names[sc].contains_key(name) || self.lookup(sc, name).is_some() {
            return Err(err(pos, format!("`{name}` is already declared")));
        }
        let mut cargs = Vec::new();
        for (arg, param) in args.iter().zip(&decl.params) {
            match (arg, &param.kind) {
                (SubArg::Elem(n, p), ParamKind::Node(_) | ParamKind::Var(_)) => {
                    let Some(slot) = self.lookup(sc, n) else {
                        return Err(err(*p, format!("unknown element `{n}`")));
                    };
                    let ok = match param.kind {
                        ParamKind::Var(_) => self.slots[slot].kind == SlotKind::VarParam,
                        _ => matches!(
                            self.slots[slot].kind,
                            SlotKind::PatternNode | SlotKind::NodeParam
                        ),
                    };
                    if !ok {
                        return Err(err(
                            *p,
                            format!("`{n}` cannot be passed as `{}`", param.name),
                        ));
                    }
                    cargs.push(SubArgC::Elem(slot));
                }
                (SubArg::Yield(n, p), ParamKind::Def(_)) => match self.lookup(sc, n) {
                    Some(slot) if self.slots[slot].kind == SlotKind::DefNode => {
                        cargs.push(SubArgC::Yield(slot))
                    }
                    _ => return Err(err(*p, format!("`{n}` is not a def variable"))),
                },
                (SubArg::Elem(_, p), ParamKind::Def(_)) => {
                    return Err(err(
                        *p,
                        format!("parameter `{}` must be passed with `yield`", param.name),
                    ))
                }
                (SubArg::Yield(_, p), _) => {
                    return Err(err(
                        *p,
                        format!("parameter `{}` is not a def parameter", param.name),
                    ))
                }
            }
        }
        let action = self.ctx.index[pattern];
        let idx = self.scopes[sc].subs.len();
        self.scopes[sc].subs.push(SubCall {
            name: name.to_string(),
            pattern: pattern.to_string(),
            action,
            args: cargs,
        });
        self.sub_names[sc].insert(name.to_string(), idx);
        Ok(())
    }

    fn is_local_matched(&self, sc: usize, slot: usize) -> bool {
        let s = &self.slots[slot];
        s.scope == sc && matches!(s.kind, SlotKind::PatternNode | SlotKind::PatternEdge)
    }

    fn plan(&mut self, sc: usize) {
        let mut bound: Vec<bool> = (0..self.slots.len())
            .map(|s| !self.is_local_matched(sc, s))
            .collect();
        let scope = &self.scopes[sc];
        let root = self.ctx.schema.node_root();
        let mut done = vec![false; scope.edges.len()];
        let mut plan = Vec::new();
        loop {
            if let Some(i) = (0..done.len())
                .find(|&i| !done[i] && (bound[scope.edges[i].src] || bound[scope.edges[i].tgt]))
            {
                let e = &scope.edges[i];
                plan.push(Step::Extend {
                    edge: i,
                    from_src: bound[e.src],
                });
                done[i] = true;
                bound[e.slot] = true;
                bound[e.src] = true;
                bound[e.tgt] = true;
                continue;
            }
            let typed_endpoint = scope.nodes.iter().copied().find(|&n| {
                !bound[n]
                    && self.slots[n].class != root
                    && scope
                        .edges
                        .iter()
                        .enumerate()
                        .any(|(i, e)| !done[i] && (e.src == n || e.tgt == n))
            });
            if let Some(n) = typed_endpoint {
                plan.push(Step::ScanNode(n));
                bound[n] = true;
                continue;
            }
            if let Some(i) = (0..done.len()).find(|&i| !done[i]) {
                let e = &scope.edges[i];
                plan.push(Step::ScanEdge(i));
                done[i] = true;
                bound[e.slot] = true;
                bound[e.src] = true;
                bound[e.tgt] = true;
                continue;
            }
            if let Some(&n) = scope.nodes.iter().find(|&&n| !bound[n]) {
                plan.push(Step::ScanNode(n));
                bound[n] = true;
                continue;
            }
            break;
        }
        self.scopes[sc].plan = plan;
    }

    fn attach_conds(&mut self, sc: usize, conds: Vec<CExpr>) {
        let scope = &self.scopes[sc];
        let mut bound_at = vec![0usize; self.slots.len()];
        for (i, step) in scope.plan.iter().enumerate() {
            let newly: Vec<usize> = match *step {
                Step::ScanNode(n) => vec![n],
                Step::ScanEdge(e) | Step::Extend { edge: e, .. } => {
                    let e = &scope.edges[e];
                    vec![e.slot, e.src, e.tgt]
                }
            };
            for s in newly {
                if self.is_local_matched(sc, s) && bound_at[s] == 0 {
                    bound_at[s] = i + 1;
                }
            }
        }
        let mut conds_at = vec![Vec::new(); scope.plan.len() + 1];
        let mut deferred = Vec::new();
        for c in conds {
            let mut used = Vec::new();
            c.slots(&mut used);
            if used
                .iter()
                .any(|&s| self.slots[s].kind == SlotKind::DefNode)
            {
                deferred.push(c);
            } else {
                let at = used.iter().map(|&s| bound_at[s]).max().unwrap_or(0);
                conds_at[at].push(c);
            }
        }
        self.scopes[sc].conds_at = conds_at;
        self.scopes[sc].deferred = deferred;
    }

    fn expr(&self, sc: usize, e: &Expr, rw: bool) -> Result<CExpr, RuleError> {
        let find = |name: &str| {
            if rw {
                self.lookup_rw(sc, name)
            } else {
                self.lookup(sc, name)
            }
        };
        Ok(match e {
            Expr::Lit(v) => CExpr::Lit(v.clone()),
            Expr::EnumLit { ty, item, pos } => match self.ctx.schema.enum_def(ty) {
                Some(def) if def.item_value(item).is_some() => CExpr::Lit(Value::Enum {
                    ty: ty.clone(),
                    item: item.clone(),
                }),
                Some(_) => return Err(err(*pos, format!("enum `{ty}` has no item `{item}`"))),
                None => return Err(err(*pos, format!("unknown enum `{ty}`"))),
            },
            Expr::Var(name, pos) => match find(name) {
                Some(slot) => CExpr::Slot(slot),
                None => return Err(err(*pos, format!("unknown variable `{name}`"))),
            },
            Expr::Attr { elem, attr, pos } => {
                let Some(slot) = find(elem) else {
                    return Err(err(*pos, format!("unknown element `{elem}`")));
                };
                self.check_attr(slot, attr, *pos)?;
                CExpr::Attr(slot, attr.clone())
            }
            Expr::Global(name) => CExpr::Global(name.clone()),
            Expr::GlobalMap { map, key } => {
                CExpr::GlobalMap(map.clone(), Box::new(self.expr(sc, key, rw)?))
            }
            Expr::Unary(op, a) => CExpr::Unary(*op, Box::new(self.expr(sc, a, rw)?)),
            Expr::Binary(op, a, b) => CExpr::Binary(
                *op,
                Box::new(self.expr(sc, a, rw)?),
                Box::new(self.expr(sc, b, rw)?),
            ),
            Expr::Cond(c, a, b) => CExpr::Cond(
                Box::new(self.expr(sc, c, rw)?),
                Box::new(self.expr(sc, a, rw)?),
                Box::new(self.expr(sc, b, rw)?),
            ),
            Expr::Call { func, args, pos } => {
                if args.len() != 1 {
                    return Err(err(*pos, format!("`{func}` takes one argument")));
                }
                let a = Box::new(self.expr(sc, &args[0], rw)?);
                match func.as_str() {
                    "defined" => CExpr::Defined(a),
                    "xmlEscape" => CExpr::XmlEscape(a),
                    _ => return Err(err(*pos, format!("unknown function `{func}`"))),
                }
            }
        })
    }

    fn check_attr(&self, slot: usize, attr: &str, pos: Pos) -> Result<(), RuleError> {
        let s = &self.slots[slot];
        if !s.kind.is_element() {
            return Err(err(pos, format!("`{}` is not a graph element", s.name)));
        }
        self.ctx
            .schema
            .resolve_attribute(s.class, attr)
            .map(|_| ())
            .map_err(|_| {
                err(
                    pos,
                    format!(
                        "class `{}` has no attribute `{attr}`",
                        self.ctx.schema.class(s.class).name()
                    ),
                )
            })
    }

    fn rewrite(&mut self, sc: usize, rw: &Rewrite) -> Result<CRewrite, RuleError> {
        let mut out = CRewrite {
            mode: rw.mode,
            creates: Vec::new(),
            ops: Vec::new(),
            calls: Vec::new(),
            deletes: Vec::new(),
        };
        let mut mentioned = HashSet::new();
        for stmt in &rw.stmts {
            match stmt {
                RwStmt::Node(t) => {
                    self.rw_node(sc, t, &mut out, &mut mentioned)?;
                }
                RwStmt::Edge(e) => {
                    let (first, second) = if e.forward {
                        (&e.src, &e.tgt)
                    } else {
                        (&e.tgt, &e.src)
                    };
                    let a = self.rw_node(sc, first, &mut out, &mut mentioned)?;
                    let existing = e.edge.name.as_ref().and_then(|n| self.lookup_rw(sc, n));
                    let b = self.rw_node(sc, second, &mut out, &mut mentioned)?;
                    let (src, tgt) = if e.forward { (a, b) } else { (b, a) };
                    match existing {
                        Some(slot) => {
                            if e.edge.ty.is_some() || self.slots[slot].kind != SlotKind::PatternEdge
                            {
                                return Err(err(
                                    e.edge.pos,
                                    format!("`{}` is already declared", self.slots[slot].name),
                                ));
                            }
                            mentioned.insert(slot);
                        }
                        None => {
                            let Some(ty) = &e.edge.ty else {
                                return Err(err(e.edge.pos, "a new edge needs a type"));
                            };
                            let class = self.class(ClassKind::Edge, Some(ty), e.edge.pos)?;
                            if self.ctx.schema.class(class).is_abstract() {
                                return Err(err(
                                    e.edge.pos,
                                    format!("edge class `{ty}` is abstract"),
                                ));
                            }
                            let slot = self.declare_created(
                                sc,
                                e.edge.name.as_ref(),
                                SlotKind::CreatedEdge,
                                class,
                            );
                            out.creates.push(Create::Edge {
                                slot,
                                class,
                                src,
                                tgt,
                            });
                        }
                    }
                }
                RwStmt::Delete(names) => {
                    for (n, p) in names {
                        match self.lookup_rw(sc, n) {
                            Some(slot) if self.slots[slot].kind.is_element() => {
                                out.deletes.push(slot)
                            }
                            _ => return Err(err(*p, format!("unknown element `{n}`"))),
                        }
                    }
                }
                RwStmt::Eval(assigns) => {
                    for a in assigns {
                        let value = self.expr(sc, &a.value, true)?;
                        out.ops.push(match &a.target {
                            AssignTarget::Attr { elem, attr } => {
                                let Some(slot) = self.lookup_rw(sc, elem) else {
                                    return Err(err(a.pos, format!("unknown element `{elem}`")));
                                };
                                self.check_attr(slot, attr, a.pos)?;
                                RwOp::SetAttr {
                                    slot,
                                    attr: attr.clone(),
                                    value,
                                }
                            }
                            AssignTarget::Global(name) => RwOp::SetGlobal {
                                name: name.clone(),
                                value,
                            },
                            AssignTarget::GlobalMap { map, key } => RwOp::SetMap {
                                map: map.clone(),
                                key: self.expr(sc, key, true)?,
                                value,
                            },
                        });
                    }
                }
                RwStmt::Emit(parts) => {
                    let parts = parts
                        .iter()
                        .map(|p| self.expr(sc, p, true))
                        .collect::<Result<_, _>>()?;
                    out.ops.push(RwOp::Emit(parts));
                }
                RwStmt::Call { name, args, pos } => {
                    let Some(&sub) = self.sub_names[sc].get(name) else {
                        return Err(err(
                            *pos,
                            format!("no subpattern instance `{name}` in this block"),
                        ));
                    };
                    let expected = self.ctx.set.patterns[&self.scopes[sc].subs[sub].pattern]
                        .rewrite_params
                        .len();
                    if args.len() != expected {
                        return Err(err(
                            *pos,
                            format!(
                                "`{name}` takes {expected} rewrite arguments, got {}",
                                args.len()
                            ),
                        ));
                    }
                    let mut slots = Vec::new();
                    for (n, p) in args {
                        match self.lookup_rw(sc, n) {
                            Some(slot) if self.slots[slot].kind.is_node() => slots.push(slot),
                            _ => return Err(err(*p, format!("unknown node `{n}`"))),
                        }
                    }
                    out.calls.push(RwCall { sub, args: slots });
                }
            }
        }
        if rw.mode == Mode::Replace {
            for &slot in &self.scopes[sc].key {
                if !mentioned.contains(&slot) && !out.deletes.contains(&slot) {
                    out.deletes.push(slot);
                }
            }
        }
        Ok(out)
    }

    fn declare_created(
        &mut self,
        sc: usize,
        name: Option<&String>,
        kind: SlotKind,
        class: ClassId,
    ) -> usize {
        let name = match name {
            Some(n) => n.clone(),
            None => {
                self.anon += 1;
                format!("${}", self.anon)
            }
        };
        let slot = self.push_slot(sc, &name, kind, class, None);
        if !name.starts_with('$') {
            self.rw_names[sc].insert(name, slot);
        }
        slot
    }

    fn rw_node(
        &mut self,
        sc: usize,
        t: &NodeTerm,
        out: &mut CRewrite,
        mentioned: &mut HashSet<usize>,
    ) -> Result<usize, RuleError> {
        if let Some(name) = &t.name {
            if let Some(slot) = self.lookup_rw(sc, name) {
                if t.ty.is_some() {
                    return Err(err(t.pos, format!("`{name}` is already declared")));
                }
                if !self.slots[slot].kind.is_node() {
                    return Err(err(t.pos, format!("`{name}` is not a node")));
                }
                mentioned.insert(slot);
                return Ok(slot);
            }
        }
        let Some(ty) = &t.ty else {
            return Err(err(
                t.pos,
                match &t.name {
                    Some(n) => format!("unknown node `{n}`"),
                    None => "a new node needs a type".to_string(),
                },
            ));
        };
        let class = self.class(ClassKind::Node, Some(ty), t.pos)?;
        if self.ctx.schema.class(class).is_abstract() {
            return Err(err(t.pos, format!("node class `{ty}` is abstract")));
        }
        let slot = self.declare_created(sc, t.name.as_ref(), SlotKind::CreatedNode, class);
        out.creates.push(Create::Node { slot, class });
        Ok(slot)
    }
}
