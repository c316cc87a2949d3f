//! Recursive-descent parser for rule files. The grammar is documented in
//! `docs/rule-language.md`.

use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::rules::ast::*;
use crate::schema_text::parse_value_type;
use crate::value::Value;

pub fn parse(src: &str) -> Result<RuleSet, SyntaxError> {
    let mut p = Parser {
        cur: Cursor::new(src)?,
    };
    let mut set = RuleSet::default();
    while !p.cur.at_eof() {
        let pos = p.pos();
        if p.cur.eat_keyword("rule") {
            let r = p.rule(pos)?;
            if set.rules.contains_key(&r.name) || set.patterns.contains_key(&r.name) {
                return Err(SyntaxError::new(
                    pos.line,
                    pos.col,
                    format!("duplicate declaration `{}`", r.name),
                ));
            }
            set.rules.insert(r.name.clone(), r);
        } else if p.cur.eat_keyword("pattern") {
            let d = p.pattern(pos)?;
            if set.rules.contains_key(&d.name) || set.patterns.contains_key(&d.name) {
                return Err(SyntaxError::new(
                    pos.line,
                    pos.col,
                    format!("duplicate declaration `{}`", d.name),
                ));
            }
            set.patterns.insert(d.name.clone(), d);
        } else {
            return Err(p.cur.error(format!(
                "expected `rule` or `pattern`, found {}",
                p.cur.peek()
            )));
        }
    }
    Ok(set)
}

/// Parses a standalone expression (used by tests and tooling).
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser {
        cur: Cursor::new(src)?,
    };
    let e = p.expr()?;
    if !p.cur.at_eof() {
        return Err(p.cur.error(format!("unexpected {}", p.cur.peek())));
    }
    Ok(e)
}

struct Parser {
    cur: Cursor,
}

impl Parser {
    fn pos(&self) -> Pos {
        let (line, col) = self.cur.pos();
        Pos { line, col }
    }

    fn rule(&mut self, pos: Pos) -> Result<RuleDecl, SyntaxError> {
        let name = self.cur.expect_ident()?;
        let params = if self.cur.is_punct("(") {
            self.params(false)?
        } else {
            Vec::new()
        };
        let body = self.braced_body()?;
        Ok(RuleDecl {
            name,
            params,
            body,
            pos,
        })
    }

    fn pattern(&mut self, pos: Pos) -> Result<PatternDecl, SyntaxError> {
        let name = self.cur.expect_ident()?;
        let params = if self.cur.is_punct("(") {
            self.params(true)?
        } else {
            Vec::new()
        };
        let mut rewrite_params = Vec::new();
        if self.cur.is_keyword("modify") || self.cur.is_keyword("replace") {
            self.cur.next();
            rewrite_params = self.params(false)?;
        }
        let body = self.braced_body()?;
        Ok(PatternDecl {
            name,
            params,
            rewrite_params,
            body,
            pos,
        })
    }

    fn params(&mut self, allow_def: bool) -> Result<Vec<Param>, SyntaxError> {
        self.cur.expect_punct("(")?;
        let mut out = Vec::new();
        if self.cur.eat_punct(")") {
            return Ok(out);
        }
        loop {
            let pos = self.pos();
            if self.cur.eat_keyword("var") {
                let name = self.cur.expect_ident()?;
                self.cur.expect_punct(":")?;
                let vt = parse_value_type(&mut self.cur)?;
                out.push(Param {
                    name,
                    kind: ParamKind::Var(vt),
                    pos,
                });
            } else if self.cur.is_keyword("def") {
                if !allow_def {
                    return Err(self
                        .cur
                        .error("`def` parameters are only allowed on subpatterns"));
                }
                self.cur.next();
                let name = self.cur.expect_ident()?;
                self.cur.expect_punct(":")?;
                let ty = self.cur.expect_ident()?;
                out.push(Param {
                    name,
                    kind: ParamKind::Def(ty),
                    pos,
                });
            } else {
                let name = self.cur.expect_ident()?;
                self.cur.expect_punct(":")?;
                let ty = self.cur.expect_ident()?;
                out.push(Param {
                    name,
                    kind: ParamKind::Node(ty),
                    pos,
                });
            }
            if self.cur.eat_punct(")") {
                return Ok(out);
            }
            self.cur.expect_punct(",")?;
        }
    }

    fn braced_body(&mut self) -> Result<Body, SyntaxError> {
        let pos = self.pos();
        self.cur.expect_punct("{")?;
        let mut body = Body {
            items: Vec::new(),
            rewrite: None,
            pos,
        };
        loop {
            if self.cur.eat_punct("}") {
                return Ok(body);
            }
            if body.rewrite.is_some() {
                return Err(self.cur.error("the rewrite part must close its pattern"));
            }
            let pos = self.pos();
            if self.cur.is_keyword("modify") || self.cur.is_keyword("replace") {
                let mode = if self.cur.eat_keyword("modify") {
                    Mode::Modify
                } else {
                    self.cur.next();
                    Mode::Replace
                };
                body.rewrite = Some(self.rewrite(mode, pos)?);
                continue;
            }
            if self.cur.eat_keyword("if") {
                self.cur.expect_punct("{")?;
                let mut conds = Vec::new();
                while !self.cur.eat_punct("}") {
                    conds.push(self.expr()?);
                    self.cur.expect_punct(";")?;
                }
                body.items.push(Item::Cond(conds));
                continue;
            }
            if self.cur.eat_keyword("iterated") {
                body.items.push(Item::Iterated(self.braced_body()?));
                continue;
            }
            if self.cur.eat_keyword("optional") {
                body.items.push(Item::Optional(self.braced_body()?));
                continue;
            }
            if self.cur.eat_keyword("negative") {
                body.items.push(Item::Negative(self.braced_body()?));
                continue;
            }
            if self.cur.eat_keyword("def") {
                let name = self.cur.expect_ident()?;
                self.cur.expect_punct(":")?;
                let ty = self.cur.expect_ident()?;
                self.cur.expect_punct(";")?;
                body.items.push(Item::Def { name, ty, pos });
                continue;
            }
            if self.cur.eat_keyword("yield") {
                body.items.push(Item::Yield(self.yield_block()?));
                continue;
            }
            // name:Pattern(args);
            if matches!(self.cur.peek(), Tok::Ident(_))
                && matches!(self.cur.peek_at(1), Tok::Punct(":"))
                && matches!(self.cur.peek_at(2), Tok::Ident(_))
                && matches!(self.cur.peek_at(3), Tok::Punct("("))
            {
                let name = self.cur.expect_ident()?;
                self.cur.next();
                let pattern = self.cur.expect_ident()?;
                let args = self.sub_args()?;
                self.cur.expect_punct(";")?;
                body.items.push(Item::Subpattern {
                    name,
                    pattern,
                    args,
                    pos,
                });
                continue;
            }
            for g in self.graphlet()? {
                body.items.push(match g {
                    Graphlet::Node(n) => Item::Node(n),
                    Graphlet::Edge(e) => Item::Edge(e),
                });
            }
        }
    }

    fn sub_args(&mut self) -> Result<Vec<SubArg>, SyntaxError> {
        self.cur.expect_punct("(")?;
        let mut args = Vec::new();
        if self.cur.eat_punct(")") {
            return Ok(args);
        }
        loop {
            let pos = self.pos();
            if self.cur.eat_keyword("yield") {
                args.push(SubArg::Yield(self.cur.expect_ident()?, pos));
            } else {
                args.push(SubArg::Elem(self.cur.expect_ident()?, pos));
            }
            if self.cur.eat_punct(")") {
                return Ok(args);
            }
            self.cur.expect_punct(",")?;
        }
    }

    fn yield_block(&mut self) -> Result<Vec<YieldAssign>, SyntaxError> {
        self.cur.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.cur.eat_punct("}") {
            let pos = self.pos();
            self.cur.eat_keyword("yield");
            let target = self.cur.expect_ident()?;
            self.cur.expect_punct("=")?;
            let value = self.expr()?;
            self.cur.expect_punct(";")?;
            out.push(YieldAssign { target, value, pos });
        }
        Ok(out)
    }

    fn rewrite(&mut self, mode: Mode, pos: Pos) -> Result<Rewrite, SyntaxError> {
        self.cur.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.cur.eat_punct("}") {
            let pos = self.pos();
            if self.cur.eat_keyword("delete") {
                self.cur.expect_punct("(")?;
                let mut names = Vec::new();
                if !self.cur.eat_punct(")") {
                    loop {
                        let p = self.pos();
                        names.push((self.cur.expect_ident()?, p));
                        if self.cur.eat_punct(")") {
                            break;
                        }
                        self.cur.expect_punct(",")?;
                    }
                }
                self.cur.expect_punct(";")?;
                stmts.push(RwStmt::Delete(names));
                continue;
            }
            if self.cur.eat_keyword("eval") {
                self.cur.expect_punct("{")?;
                let mut assigns = Vec::new();
                while !self.cur.eat_punct("}") {
                    assigns.push(self.assign()?);
                }
                stmts.push(RwStmt::Eval(assigns));
                continue;
            }
            if self.cur.eat_keyword("emit") {
                self.cur.expect_punct("(")?;
                let mut parts = vec![self.expr()?];
                while self.cur.eat_punct(",") {
                    parts.push(self.expr()?);
                }
                self.cur.expect_punct(")")?;
                self.cur.expect_punct(";")?;
                stmts.push(RwStmt::Emit(parts));
                continue;
            }
            if matches!(self.cur.peek(), Tok::Ident(_))
                && matches!(self.cur.peek_at(1), Tok::Punct("("))
            {
                let name = self.cur.expect_ident()?;
                self.cur.next();
                let mut args = Vec::new();
                if !self.cur.eat_punct(")") {
                    loop {
                        let p = self.pos();
                        args.push((self.cur.expect_ident()?, p));
                        if self.cur.eat_punct(")") {
                            break;
                        }
                        self.cur.expect_punct(",")?;
                    }
                }
                self.cur.expect_punct(";")?;
                stmts.push(RwStmt::Call { name, args, pos });
                continue;
            }
            for g in self.graphlet()? {
                stmts.push(match g {
                    Graphlet::Node(n) => RwStmt::Node(n),
                    Graphlet::Edge(e) => RwStmt::Edge(e),
                });
            }
        }
        Ok(Rewrite { mode, stmts, pos })
    }

    fn assign(&mut self) -> Result<Assign, SyntaxError> {
        let pos = self.pos();
        let target = if self.cur.eat_punct("::") {
            let name = self.cur.expect_ident()?;
            if self.cur.eat_punct("[") {
                let key = self.expr()?;
                self.cur.expect_punct("]")?;
                AssignTarget::GlobalMap { map: name, key }
            } else {
                AssignTarget::Global(name)
            }
        } else {
            let elem = self.cur.expect_ident()?;
            self.cur.expect_punct(".")?;
            let attr = self.cur.expect_ident()?;
            AssignTarget::Attr { elem, attr }
        };
        self.cur.expect_punct("=")?;
        let value = self.expr()?;
        self.cur.expect_punct(";")?;
        Ok(Assign { target, value, pos })
    }

    fn at_edge_op(&self) -> bool {
        ["-", "->", "-->", "<-", "<--"]
            .iter()
            .any(|p| self.cur.is_punct(p))
    }

    /// `[node] (edge node)* ;`
    fn graphlet(&mut self) -> Result<Vec<Graphlet>, SyntaxError> {
        let mut out = Vec::new();
        let mut left = self.node_term()?;
        while self.at_edge_op() {
            let (edge, forward) = self.edge_term()?;
            let right = self.node_term()?;
            let (src, tgt) = if forward {
                (left, right.clone())
            } else {
                (right.clone(), left)
            };
            out.push(Graphlet::Edge(EdgeDecl {
                src,
                edge,
                tgt,
                forward,
            }));
            if self.at_edge_op() && right.name.is_none() {
                return Err(SyntaxError::new(
                    right.pos.line,
                    right.pos.col,
                    "an anonymous node cannot be chained; name it",
                ));
            }
            // only the first mention of a chained node carries its type
            left = strip_type(right);
        }
        if out.is_empty() {
            if left.name.is_none() && left.ty.is_none() {
                return Err(self.cur.error(format!(
                    "expected a graph element, found {}",
                    self.cur.peek()
                )));
            }
            out.push(Graphlet::Node(left));
        }
        self.cur.expect_punct(";")?;
        Ok(out)
    }

    fn node_term(&mut self) -> Result<NodeTerm, SyntaxError> {
        let pos = self.pos();
        let name = match self.cur.peek() {
            Tok::Ident(_) => Some(self.cur.expect_ident()?),
            _ => None,
        };
        let ty = if self.cur.eat_punct(":") {
            Some(self.cur.expect_ident()?)
        } else {
            None
        };
        Ok(NodeTerm { name, ty, pos })
    }

    fn edge_term(&mut self) -> Result<(EdgeTerm, bool), SyntaxError> {
        let pos = self.pos();
        if self.cur.eat_punct("-->") {
            return Ok((
                EdgeTerm {
                    name: None,
                    ty: None,
                    pos,
                },
                true,
            ));
        }
        if self.cur.eat_punct("<--") {
            return Ok((
                EdgeTerm {
                    name: None,
                    ty: None,
                    pos,
                },
                false,
            ));
        }
        let forward = if self.cur.eat_punct("-") {
            true
        } else if self.cur.eat_punct("<-") {
            false
        } else {
            return Err(self
                .cur
                .error(format!("expected an edge, found {}", self.cur.peek())));
        };
        let name = match self.cur.peek() {
            Tok::Ident(_) => Some(self.cur.expect_ident()?),
            _ => None,
        };
        let ty = if self.cur.eat_punct(":") {
            Some(self.cur.expect_ident()?)
        } else {
            None
        };
        if forward {
            self.cur.expect_punct("->")?;
        } else {
            self.cur.expect_punct("-")?;
        }
        Ok((EdgeTerm { name, ty, pos }, forward))
    }

    // expressions, lowest precedence first

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let c = self.or()?;
        if self.cur.eat_punct("?") {
            let a = self.expr()?;
            self.cur.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr::Cond(Box::new(c), Box::new(a), Box::new(b)));
        }
        Ok(c)
    }

    fn or(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.and()?;
        while self.cur.eat_punct("||") {
            e = Expr::Binary(BinOp::Or, Box::new(e), Box::new(self.and()?));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.cmp()?;
        while self.cur.eat_punct("&&") {
            e = Expr::Binary(BinOp::And, Box::new(e), Box::new(self.cmp()?));
        }
        Ok(e)
    }

    fn cmp(&mut self) -> Result<Expr, SyntaxError> {
        let e = self.add()?;
        let op = match self.cur.peek() {
            Tok::Punct("==") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Ne,
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct(">=") => BinOp::Ge,
            _ => return Ok(e),
        };
        self.cur.next();
        Ok(Expr::Binary(op, Box::new(e), Box::new(self.add()?)))
    }

    fn add(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.unary()?;
        loop {
            let op = if self.cur.eat_punct("+") {
                BinOp::Add
            } else if self.cur.eat_punct("-") {
                BinOp::Sub
            } else {
                return Ok(e);
            };
            e = Expr::Binary(op, Box::new(e), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.cur.eat_punct("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.cur.eat_punct("-") {
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        match self.cur.next() {
            Tok::Int(i) => Ok(Expr::Lit(Value::Int(i))),
            Tok::Double(d) => Ok(Expr::Lit(Value::Double(d))),
            Tok::Str(s) => Ok(Expr::Lit(Value::Str(s))),
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.cur.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("::") => {
                let name = self.cur.expect_ident()?;
                if self.cur.eat_punct("[") {
                    let key = self.expr()?;
                    self.cur.expect_punct("]")?;
                    Ok(Expr::GlobalMap {
                        map: name,
                        key: Box::new(key),
                    })
                } else {
                    Ok(Expr::Global(name))
                }
            }
            Tok::Ident(id) => match id.as_str() {
                "true" => Ok(Expr::Lit(Value::Bool(true))),
                "false" => Ok(Expr::Lit(Value::Bool(false))),
                _ if self.cur.eat_punct("::") => {
                    let item = self.cur.expect_ident()?;
                    Ok(Expr::EnumLit { ty: id, item, pos })
                }
                _ if self.cur.is_punct("(") => {
                    self.cur.next();
                    let mut args = Vec::new();
                    if !self.cur.eat_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.cur.eat_punct(")") {
                                break;
                            }
                            self.cur.expect_punct(",")?;
                        }
                    }
                    Ok(Expr::Call {
                        func: id,
                        args,
                        pos,
                    })
                }
                _ if self.cur.eat_punct(".") => {
                    let attr = self.cur.expect_ident()?;
                    Ok(Expr::Attr {
                        elem: id,
                        attr,
                        pos,
                    })
                }
                _ => Ok(Expr::Var(id, pos)),
            },
            other => Err(SyntaxError::new(
                pos.line,
                pos.col,
                format!("expected an expression, found {other}"),
            )),
        }
    }
}

enum Graphlet {
    Node(NodeTerm),
    Edge(EdgeDecl),
}

fn strip_type(mut n: NodeTerm) -> NodeTerm {
    n.ty = None;
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("  // nothing\n").unwrap().is_empty());
    }

    #[test]
    fn state_start_rule_shape() {
        let set =
            parse(r#"rule r { c:Class; if { c.name == "State"; } modify { sm:StateMachine; } }"#)
                .unwrap();
        assert_eq!(set.rules.len(), 1);
        let r = &set.rules["r"];
        let nodes = r
            .body
            .items
            .iter()
            .filter(|i| matches!(i, Item::Node(_)))
            .count();
        let conds: usize = r
            .body
            .items
            .iter()
            .map(|i| if let Item::Cond(c) = i { c.len() } else { 0 })
            .sum();
        assert_eq!((nodes, conds), (1, 1));
        let rw = r.body.rewrite.as_ref().unwrap();
        assert_eq!(rw.mode, Mode::Modify);
        assert!(
            matches!(&rw.stmts[..], [RwStmt::Node(NodeTerm { name: Some(n), ty: Some(t), .. })] if n == "sm" && t == "StateMachine")
        );
    }

    #[test]
    fn edges_chains_and_backward_arrows() {
        let set = parse("rule r { a:A -e:E-> b:B <-:F- c:C; -:G-> a; } ").unwrap();
        let edges: Vec<&EdgeDecl> = set.rules["r"]
            .body
            .items
            .iter()
            .filter_map(|i| if let Item::Edge(e) = i { Some(e) } else { None })
            .collect();
        assert_eq!(edges.len(), 3);
        assert_eq!(edges[0].src.ty.as_deref(), Some("A"));
        assert_eq!(edges[0].edge.name.as_deref(), Some("e"));
        // b <-:F- c  is  c -:F-> b
        assert_eq!(edges[1].src.name.as_deref(), Some("c"));
        assert_eq!(edges[1].tgt.name.as_deref(), Some("b"));
        assert_eq!(edges[1].tgt.ty, None);
        assert!(!edges[1].forward);
        assert_eq!(edges[2].src.name, None);
    }

    #[test]
    fn subpatterns_and_nesting() {
        let src = r#"
            pattern P(x:A, def d:B) modify(m:C) {
                iterated { y:A --> x; s:P(y, yield d); modify { s(m); } }
                optional { negative { if { x.flag; } } yield { yield d = x; } }
                modify { }
            }
        "#;
        let set = parse(src).unwrap();
        let p = &set.patterns["P"];
        assert_eq!(p.params.len(), 2);
        assert_eq!(p.params[1].kind, ParamKind::Def("B".into()));
        assert_eq!(p.rewrite_params.len(), 1);
        assert!(matches!(p.body.items[0], Item::Iterated(_)));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse("rule r {\n  a:A -e:E- b;\n}").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse("rule r { } rule r { }").unwrap_err();
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn expression_precedence() {
        let e = parse_expr("a.x == 1 || !b && c.y < 2 + 3").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Or, _, _)));
        let e = parse_expr("t.trigger == \"\" ? m.name : t.trigger").unwrap();
        assert!(matches!(e, Expr::Cond(..)));
        assert!(matches!(
            parse_expr("Flag::ACK").unwrap(),
            Expr::EnumLit { .. }
        ));
        assert!(matches!(
            parse_expr("::ids[s]").unwrap(),
            Expr::GlobalMap { .. }
        ));
    }
}
