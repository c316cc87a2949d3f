//! Ecore metamodel import.
//!
//! Every `EClass` becomes a node class and every `EReference` an edge class
//! named `<Owner>_<reference>`, connecting the owner to the reference type.
//! All classifier names are prefixed with the chain of enclosing package
//! names, joined by `_`. Containment references extend the abstract
//! [`CONTAINMENT`] edge class.

use std::collections::HashMap;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::metamodel::{
    AttributeDecl, ClassDecl, ClassKind, EnumDef, SchemaBuilder, SchemaError, ValueType,
    CONTAINMENT,
};

use super::{line_of, XSI_NS};

#[derive(Debug, Error)]
pub enum EcoreError {
    #[error("malformed XML: {0}")]
    Xml(#[from] roxmltree::Error),
    #[error("line {line}: expected an EPackage, found `{found}`")]
    NotAPackage { line: u32, found: String },
    #[error("line {line}: `{owner}` is missing attribute `{attr}`")]
    Missing {
        line: u32,
        owner: String,
        attr: &'static str,
    },
    #[error("line {line}: `{owner}` refers to unresolved {what} `{reference}`")]
    Unresolved {
        line: u32,
        owner: String,
        what: &'static str,
        reference: String,
    },
    #[error("line {line}: `{owner}` uses unsupported construct `{construct}`")]
    Unsupported {
        line: u32,
        owner: String,
        construct: String,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// The imported declarations, plus diagnostics for constructs that were
/// approximated or ignored.
#[derive(Debug, Default)]
pub struct EcoreImport {
    pub builder: SchemaBuilder,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Classifier {
    Class,
    Enum,
}

struct Ctx<'a, 'input> {
    doc: &'a Document<'input>,
    /// `#//a/b/Name` fragment -> (mangled name, kind)
    index: HashMap<String, (String, Classifier)>,
    out: EcoreImport,
    containment_declared: bool,
}

pub fn import_ecore(xml: &str) -> Result<EcoreImport, EcoreError> {
    let doc = Document::parse(xml)?;
    let root = doc.root_element();
    let packages: Vec<Node> = if root.tag_name().name() == "XMI" {
        root.children().filter(Node::is_element).collect()
    } else {
        vec![root]
    };
    let mut ctx = Ctx {
        doc: &doc,
        index: HashMap::new(),
        out: EcoreImport::default(),
        containment_declared: false,
    };
    for p in &packages {
        if p.tag_name().name() != "EPackage" {
            return Err(EcoreError::NotAPackage {
                line: line_of(&doc, *p),
                found: p.tag_name().name().to_string(),
            });
        }
        ctx.index_package(*p, "#/", "")?;
    }
    for p in &packages {
        ctx.declare_package(*p, "")?;
    }
    Ok(ctx.out)
}

fn xsi_type<'a>(n: Node<'a, '_>) -> Option<&'a str> {
    n.attribute((XSI_NS, "type"))
        .map(|t| t.rsplit(':').next().unwrap_or(t))
}

fn mangle(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}_{name}")
    }
}

fn data_type(name: &str) -> Option<ValueType> {
    Some(match name {
        "EString" => ValueType::String,
        "EInt" | "EIntegerObject" | "ELong" | "ELongObject" | "EShort" | "EShortObject"
        | "EByte" | "EByteObject" => ValueType::Integer,
        "EBoolean" | "EBooleanObject" => ValueType::Boolean,
        "EDouble" | "EDoubleObject" | "EFloat" | "EFloatObject" => ValueType::Double,
        _ => return None,
    })
}

impl Ctx<'_, '_> {
    fn line(&self, n: Node) -> u32 {
        line_of(self.doc, n)
    }

    fn name_of(&self, n: Node, owner: &str) -> Result<String, EcoreError> {
        n.attribute("name")
            .map(str::to_string)
            .ok_or_else(|| EcoreError::Missing {
                line: self.line(n),
                owner: owner.to_string(),
                attr: "name",
            })
    }

    fn index_package(&mut self, pkg: Node, path: &str, prefix: &str) -> Result<(), EcoreError> {
        let pname = self.name_of(pkg, "EPackage")?;
        let prefix = mangle(prefix, &pname);
        for c in pkg.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "eClassifiers" => {
                    let name = self.name_of(c, &prefix)?;
                    let kind = match xsi_type(c) {
                        Some("EClass") => Classifier::Class,
                        Some("EEnum") => Classifier::Enum,
                        other => {
                            return Err(EcoreError::Unsupported {
                                line: self.line(c),
                                owner: mangle(&prefix, &name),
                                construct: other.unwrap_or("untyped classifier").to_string(),
                            })
                        }
                    };
                    self.index
                        .insert(format!("{path}/{name}"), (mangle(&prefix, &name), kind));
                }
                "eSubpackages" => {
                    let sub = self.name_of(c, &prefix)?;
                    self.index_package(c, &format!("{path}/{sub}"), &prefix)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn resolve(
        &self,
        n: Node,
        owner: &str,
        what: &'static str,
        reference: &str,
    ) -> Result<&(String, Classifier), EcoreError> {
        // `ecore:EClass other.ecore#//X` and `#//X` both name the fragment after `#`
        let frag = reference.rsplit(' ').next().unwrap_or(reference);
        let local = frag
            .find('#')
            .map(|i| &frag[i..])
            .filter(|_| frag.starts_with('#'));
        local
            .and_then(|f| self.index.get(f))
            .ok_or_else(|| EcoreError::Unresolved {
                line: self.line(n),
                owner: owner.to_string(),
                what,
                reference: reference.to_string(),
            })
    }

    fn declare_package(&mut self, pkg: Node, prefix: &str) -> Result<(), EcoreError> {
        let pname = self.name_of(pkg, "EPackage")?;
        let prefix = mangle(prefix, &pname);
        for c in pkg.children().filter(Node::is_element) {
            match c.tag_name().name() {
                "eClassifiers" if xsi_type(c) == Some("EEnum") => self.declare_enum(c, &prefix)?,
                "eClassifiers" => self.declare_class(c, &prefix)?,
                "eSubpackages" => self.declare_package(c, &prefix)?,
                "eAnnotations" => self.out.warnings.push(format!(
                    "line {}: package `{prefix}`: annotation ignored",
                    self.line(c)
                )),
                other => {
                    return Err(EcoreError::Unsupported {
                        line: self.line(c),
                        owner: prefix,
                        construct: other.to_string(),
                    })
                }
            }
        }
        Ok(())
    }

    fn declare_enum(&mut self, n: Node, prefix: &str) -> Result<(), EcoreError> {
        let name = mangle(prefix, &self.name_of(n, prefix)?);
        let mut items = Vec::new();
        let mut next = 0i64;
        for lit in n.children().filter(|c| c.has_tag_name("eLiterals")) {
            let item = self.name_of(lit, &name)?;
            let value = match lit.attribute("value") {
                Some(v) => v.trim().parse().map_err(|_| EcoreError::Unsupported {
                    line: self.line(lit),
                    owner: name.clone(),
                    construct: format!("literal value `{v}`"),
                })?,
                None => next,
            };
            next = value + 1;
            items.push((item, value));
        }
        self.out.builder.declare_enum(EnumDef { name, items })?;
        Ok(())
    }

    fn declare_class(&mut self, n: Node, prefix: &str) -> Result<(), EcoreError> {
        let name = mangle(prefix, &self.name_of(n, prefix)?);
        let is_abstract =
            n.attribute("abstract") == Some("true") || n.attribute("interface") == Some("true");
        let mut supers = Vec::new();
        for s in n.attribute("eSuperTypes").unwrap_or("").split_whitespace() {
            let (sup, kind) = self.resolve(n, &name, "supertype", s)?;
            if *kind != Classifier::Class {
                return Err(EcoreError::Unresolved {
                    line: self.line(n),
                    owner: name,
                    what: "supertype",
                    reference: s.into(),
                });
            }
            supers.push(sup.clone());
        }
        let mut attributes = Vec::new();
        let mut edges = Vec::new();
        for f in n.children().filter(Node::is_element) {
            let tag = f.tag_name().name();
            if tag == "eAnnotations" {
                self.out.warnings.push(format!(
                    "line {}: class `{name}`: annotation ignored",
                    self.line(f)
                ));
                continue;
            }
            if tag != "eStructuralFeatures" {
                return Err(EcoreError::Unsupported {
                    line: self.line(f),
                    owner: name,
                    construct: tag.to_string(),
                });
            }
            let fname = self.name_of(f, &name)?;
            let owner = format!("{name}.{fname}");
            if f.children().any(|c| c.has_tag_name("eGenericType")) {
                return Err(EcoreError::Unsupported {
                    line: self.line(f),
                    owner,
                    construct: "eGenericType".into(),
                });
            }
            let ety = f.attribute("eType").ok_or_else(|| EcoreError::Missing {
                line: self.line(f),
                owner: owner.clone(),
                attr: "eType",
            })?;
            let many = f
                .attribute("upperBound")
                .is_some_and(|u| u == "-1" || u.parse::<i64>().is_ok_and(|u| u > 1));
            for ignored in ["eOpposite", "defaultValueLiteral"] {
                if f.attribute(ignored).is_some() {
                    self.out.warnings.push(format!(
                        "line {}: `{owner}`: `{ignored}` ignored",
                        self.line(f)
                    ));
                }
            }
            match xsi_type(f) {
                Some("EAttribute") => {
                    let vt = self.attribute_type(f, &owner, ety)?;
                    let vt = if many {
                        ValueType::Array(Box::new(vt))
                    } else {
                        vt
                    };
                    attributes.push(AttributeDecl::new(fname, vt));
                }
                Some("EReference") => {
                    let (target, kind) = self.resolve(f, &owner, "reference type", ety)?.clone();
                    if kind != Classifier::Class {
                        return Err(EcoreError::Unresolved {
                            line: self.line(f),
                            owner,
                            what: "reference type",
                            reference: ety.into(),
                        });
                    }
                    let containment = f.attribute("containment") == Some("true");
                    edges.push((format!("{name}_{fname}"), target, containment));
                }
                other => {
                    return Err(EcoreError::Unsupported {
                        line: self.line(f),
                        owner,
                        construct: other.unwrap_or("untyped feature").to_string(),
                    })
                }
            }
        }
        self.out.builder.declare(ClassDecl {
            name: name.clone(),
            kind: ClassKind::Node,
            supers,
            attributes,
            is_abstract,
            connect: None,
        })?;
        for (edge, target, containment) in edges {
            if containment && !self.containment_declared {
                self.declare_containment()?;
            }
            self.out.builder.declare(ClassDecl {
                name: edge,
                kind: ClassKind::Edge,
                supers: if containment {
                    vec![CONTAINMENT.to_string()]
                } else {
                    vec![]
                },
                attributes: vec![],
                is_abstract: false,
                connect: Some((name.clone(), target)),
            })?;
        }
        Ok(())
    }

    fn declare_containment(&mut self) -> Result<(), EcoreError> {
        self.containment_declared = true;
        if !self.out.builder.has_edge_class(CONTAINMENT) {
            self.out.builder.declare(ClassDecl {
                name: CONTAINMENT.to_string(),
                kind: ClassKind::Edge,
                supers: vec![],
                attributes: vec![],
                is_abstract: true,
                connect: None,
            })?;
        }
        Ok(())
    }

    fn attribute_type(&mut self, f: Node, owner: &str, ety: &str) -> Result<ValueType, EcoreError> {
        if ety.rsplit(' ').next().is_some_and(|t| t.starts_with('#')) {
            let (name, kind) = self.resolve(f, owner, "attribute type", ety)?;
            return match kind {
                Classifier::Enum => Ok(ValueType::Enum(name.clone())),
                Classifier::Class => Err(EcoreError::Unresolved {
                    line: self.line(f),
                    owner: owner.to_string(),
                    what: "attribute type",
                    reference: ety.to_string(),
                }),
            };
        }
        let dt = ety.rsplit("#//").next().unwrap_or(ety);
        Ok(data_type(dt).unwrap_or_else(|| {
            self.out.warnings.push(format!(
                "line {}: `{owner}`: data type `{dt}` mapped to string",
                self.line(f)
            ));
            ValueType::String
        }))
    }
}
