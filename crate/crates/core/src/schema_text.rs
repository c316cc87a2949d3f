//! The `.gm`-style schema text format.
//!
//! ```text
//! // comment
//! enum Flag { SYN = 0, ACK }
//! abstract node class State { name : string; }
//! node class SynSent extends State;
//! edge class Class_methods extends Containment connect Class -> Method;
//! ```

use std::fmt::Write;

use thiserror::Error;

use crate::lexer::{Cursor, SyntaxError, Tok};
use crate::metamodel::{
    AttributeDecl, ClassDecl, ClassKind, EnumDef, Schema, SchemaBuilder, SchemaError, ValueType,
};

#[derive(Debug, Error)]
pub enum SchemaTextError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{col}: {source}")]
    Schema {
        line: usize,
        col: usize,
        source: SchemaError,
    },
}

pub fn parse_schema_text(src: &str) -> Result<SchemaBuilder, SchemaTextError> {
    let mut cur = Cursor::new(src)?;
    let mut builder = SchemaBuilder::new();
    while !cur.at_eof() {
        let (line, col) = cur.pos();
        let wrap = |source| SchemaTextError::Schema { line, col, source };
        if cur.eat_keyword("enum") {
            let def = parse_enum(&mut cur)?;
            builder.declare_enum(def).map_err(wrap)?;
            continue;
        }
        let is_abstract = cur.eat_keyword("abstract");
        let kind = if cur.eat_keyword("node") {
            ClassKind::Node
        } else if cur.eat_keyword("edge") {
            ClassKind::Edge
        } else {
            return Err(cur
                .error(format!(
                    "expected `node`, `edge` or `enum`, found {}",
                    cur.peek()
                ))
                .into());
        };
        cur.expect_keyword("class")?;
        let name = cur.expect_ident()?;
        let mut supers = Vec::new();
        if cur.eat_keyword("extends") {
            loop {
                supers.push(cur.expect_ident()?);
                if !cur.eat_punct(",") {
                    break;
                }
            }
        }
        let mut connect = None;
        if kind == ClassKind::Edge && cur.eat_keyword("connect") {
            let s = cur.expect_ident()?;
            cur.expect_punct("->")?;
            let t = cur.expect_ident()?;
            connect = Some((s, t));
        }
        let mut attributes = Vec::new();
        if cur.eat_punct("{") {
            while !cur.eat_punct("}") {
                let attr = cur.expect_ident()?;
                cur.expect_punct(":")?;
                let vt = parse_value_type(&mut cur)?;
                cur.expect_punct(";")?;
                attributes.push(AttributeDecl::new(attr, vt));
            }
            cur.eat_punct(";");
        } else {
            cur.expect_punct(";")?;
        }
        builder
            .declare(ClassDecl {
                name,
                kind,
                supers,
                attributes,
                is_abstract,
                connect,
            })
            .map_err(wrap)?;
    }
    Ok(builder)
}

fn parse_enum(cur: &mut Cursor) -> Result<EnumDef, SyntaxError> {
    let name = cur.expect_ident()?;
    cur.expect_punct("{")?;
    let mut items = Vec::new();
    let mut next = 0i64;
    while !cur.is_punct("}") {
        let item = cur.expect_ident()?;
        if cur.eat_punct("=") {
            let neg = cur.eat_punct("-");
            match cur.next() {
                Tok::Int(v) => next = if neg { -v } else { v },
                other => return Err(cur.error(format!("expected integer, found {other}"))),
            }
        }
        items.push((item, next));
        next += 1;
        if !cur.eat_punct(",") {
            break;
        }
    }
    cur.expect_punct("}")?;
    cur.eat_punct(";");
    Ok(EnumDef { name, items })
}

pub fn parse_value_type(cur: &mut Cursor) -> Result<ValueType, SyntaxError> {
    let name = cur.expect_ident()?;
    Ok(match name.as_str() {
        "boolean" => ValueType::Boolean,
        "int" => ValueType::Integer,
        "double" => ValueType::Double,
        "string" => ValueType::String,
        "set" | "array" => {
            cur.expect_punct("<")?;
            let t = parse_value_type(cur)?;
            cur.expect_punct(">")?;
            if name == "set" {
                ValueType::Set(Box::new(t))
            } else {
                ValueType::Array(Box::new(t))
            }
        }
        "map" => {
            cur.expect_punct("<")?;
            let k = parse_value_type(cur)?;
            cur.expect_punct(",")?;
            let v = parse_value_type(cur)?;
            cur.expect_punct(">")?;
            ValueType::Map(Box::new(k), Box::new(v))
        }
        _ => ValueType::Enum(name),
    })
}

pub fn emit_schema_text(schema: &Schema) -> String {
    emit_parts(schema.enums(), schema.declarations())
}

pub fn emit_builder_text(builder: &SchemaBuilder) -> String {
    emit_parts(builder.enums(), builder.declarations().iter())
}

fn emit_parts<'a>(enums: &[EnumDef], decls: impl Iterator<Item = &'a ClassDecl>) -> String {
    let mut out = String::new();
    for e in enums {
        let items: Vec<String> = e.items.iter().map(|(n, v)| format!("{n} = {v}")).collect();
        writeln!(out, "enum {} {{ {} }}", e.name, items.join(", ")).unwrap();
    }
    for d in decls {
        if d.is_abstract {
            out.push_str("abstract ");
        }
        write!(out, "{} class {}", d.kind, d.name).unwrap();
        if !d.supers.is_empty() {
            write!(out, " extends {}", d.supers.join(", ")).unwrap();
        }
        if let Some((s, t)) = &d.connect {
            write!(out, " connect {s} -> {t}").unwrap();
        }
        if d.attributes.is_empty() {
            out.push_str(";\n");
        } else {
            out.push_str(" {\n");
            for a in &d.attributes {
                writeln!(out, "    {} : {};", a.name, a.value_type).unwrap();
            }
            out.push_str("}\n");
        }
    }
    out
}
