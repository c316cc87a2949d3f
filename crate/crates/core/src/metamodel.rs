//! Type universe of all graphs: node classes, edge classes, enums and
//! attribute value types, with multiple inheritance.
//!
//! A [`Schema`] is assembled through a [`SchemaBuilder`] and validated once
//! in [`SchemaBuilder::build`]. After that it is immutable; subtype queries
//! are constant time and attribute lookups go through a per-class index.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Name of the implicit root node class.
pub const NODE_ROOT: &str = "Node";
/// Name of the implicit root edge class (the type of an anonymous `-->`).
pub const EDGE_ROOT: &str = "Edge";
/// Abstract edge class that every containment reference extends when the
/// schema was produced by the Ecore importer.
pub const CONTAINMENT: &str = "Containment";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Node,
    Edge,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKind::Node => f.write_str("node"),
            ClassKind::Edge => f.write_str("edge"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValueType {
    Boolean,
    Integer,
    Double,
    String,
    Enum(String),
    Set(Box<ValueType>),
    Map(Box<ValueType>, Box<ValueType>),
    Array(Box<ValueType>),
}

impl ValueType {
    pub fn is_scalar(&self) -> bool {
        !matches!(
            self,
            ValueType::Set(_) | ValueType::Map(..) | ValueType::Array(_)
        )
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Boolean => f.write_str("boolean"),
            ValueType::Integer => f.write_str("int"),
            ValueType::Double => f.write_str("double"),
            ValueType::String => f.write_str("string"),
            ValueType::Enum(name) => f.write_str(name),
            ValueType::Set(t) => write!(f, "set<{t}>"),
            ValueType::Map(k, v) => write!(f, "map<{k},{v}>"),
            ValueType::Array(t) => write!(f, "array<{t}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeDecl {
    pub name: String,
    pub value_type: ValueType,
}

impl AttributeDecl {
    pub fn new(name: impl Into<String>, value_type: ValueType) -> Self {
        AttributeDecl {
            name: name.into(),
            value_type,
        }
    }
}

/// A class declaration as written, before supertype names are resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub kind: ClassKind,
    pub supers: Vec<String>,
    pub attributes: Vec<AttributeDecl>,
    pub is_abstract: bool,
    /// Declared endpoint classes of an edge class (`connect A -> B`).
    pub connect: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumDef {
    pub name: String,
    pub items: Vec<(String, i64)>,
}

impl EnumDef {
    pub fn item_value(&self, item: &str) -> Option<i64> {
        self.items.iter().find(|(n, _)| n == item).map(|(_, v)| *v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("duplicate {kind} class `{name}`")]
    DuplicateClass { kind: ClassKind, name: String },
    #[error("duplicate enum `{0}`")]
    DuplicateEnum(String),
    #[error("enum `{name}`: duplicate item `{item}`")]
    DuplicateEnumItem { name: String, item: String },
    #[error("enum `{name}`: duplicate value {value}")]
    DuplicateEnumValue { name: String, value: i64 },
    #[error("class `{class}` extends unknown {kind} class `{super_name}`")]
    UnknownSuper {
        class: String,
        kind: ClassKind,
        super_name: String,
    },
    #[error("inheritance cycle through `{0}`")]
    InheritanceCycle(String),
    #[error("class `{class}`: attribute `{attr}` collides with an inherited declaration of another type")]
    AttributeCollision { class: String, attr: String },
    #[error("class `{class}`: attribute `{attr}` is inherited from unrelated declarations in `{first}` and `{second}`")]
    AmbiguousAttribute {
        class: String,
        attr: String,
        first: String,
        second: String,
    },
    #[error("class `{class}`: duplicate local attribute `{attr}`")]
    DuplicateAttribute { class: String, attr: String },
    #[error("unknown enum `{0}`")]
    UnknownEnum(String),
    #[error("container element type must be scalar, found `{0}`")]
    NonScalarElement(String),
    #[error("unknown {kind} class `{name}`")]
    UnknownClass { kind: ClassKind, name: String },
    #[error("unknown class id {0}")]
    UnknownClassId(u32),
    #[error("class `{class}` has no attribute `{attr}`")]
    UnknownAttribute { class: String, attr: String },
    #[error("`{0}` and `{1}` are of different kinds")]
    KindMismatch(String, String),
    #[error("edge class `{class}` connects unknown node class `{node}`")]
    UnknownConnectClass { class: String, node: String },
}

/// An attribute slot as seen from a concrete class after inheritance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedAttr {
    pub name: String,
    pub value_type: ValueType,
    /// Class holding the declaration this slot comes from.
    pub origin: ClassId,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub id: ClassId,
    pub decl: ClassDecl,
    pub supers: Vec<ClassId>,
    ancestors: Vec<bool>,
    subtypes: Vec<ClassId>,
    attrs: Vec<ResolvedAttr>,
    attr_index: HashMap<String, usize>,
    connect: Option<(ClassId, ClassId)>,
}

impl ClassInfo {
    pub fn name(&self) -> &str {
        &self.decl.name
    }

    pub fn kind(&self) -> ClassKind {
        self.decl.kind
    }

    pub fn is_abstract(&self) -> bool {
        self.decl.is_abstract
    }

    /// All attribute slots, inherited first.
    pub fn attributes(&self) -> &[ResolvedAttr] {
        &self.attrs
    }

    pub fn attr_slot(&self, name: &str) -> Option<usize> {
        self.attr_index.get(name).copied()
    }

    /// Reflexive-transitive subclasses, in id order.
    pub fn subtypes(&self) -> &[ClassId] {
        &self.subtypes
    }

    pub fn connect(&self) -> Option<(ClassId, ClassId)> {
        self.connect
    }
}

#[derive(Debug, Default, Clone)]
pub struct SchemaBuilder {
    decls: Vec<ClassDecl>,
    enums: Vec<EnumDef>,
}

impl SchemaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn has_class(&self, kind: ClassKind, name: &str) -> bool {
        let root = match kind {
            ClassKind::Node => NODE_ROOT,
            ClassKind::Edge => EDGE_ROOT,
        };
        name == root || self.decls.iter().any(|d| d.kind == kind && d.name == name)
    }

    pub fn has_node_class(&self, name: &str) -> bool {
        self.has_class(ClassKind::Node, name)
    }

    pub fn has_edge_class(&self, name: &str) -> bool {
        self.has_class(ClassKind::Edge, name)
    }

    /// Registers a class declaration. Supertypes are resolved in [`build`](Self::build),
    /// so declarations may appear in any order.
    pub fn declare(&mut self, decl: ClassDecl) -> Result<(), SchemaError> {
        if self.has_class(decl.kind, &decl.name) {
            return Err(SchemaError::DuplicateClass {
                kind: decl.kind,
                name: decl.name,
            });
        }
        self.decls.push(decl);
        Ok(())
    }

    pub fn declare_node_class(
        &mut self,
        name: &str,
        supers: &[&str],
        attrs: Vec<AttributeDecl>,
        is_abstract: bool,
    ) -> Result<(), SchemaError> {
        self.declare(ClassDecl {
            name: name.to_string(),
            kind: ClassKind::Node,
            supers: supers.iter().map(|s| s.to_string()).collect(),
            attributes: attrs,
            is_abstract,
            connect: None,
        })
    }

    pub fn declare_edge_class(
        &mut self,
        name: &str,
        supers: &[&str],
        attrs: Vec<AttributeDecl>,
        is_abstract: bool,
    ) -> Result<(), SchemaError> {
        self.declare(ClassDecl {
            name: name.to_string(),
            kind: ClassKind::Edge,
            supers: supers.iter().map(|s| s.to_string()).collect(),
            attributes: attrs,
            is_abstract,
            connect: None,
        })
    }

    pub fn declare_enum(&mut self, def: EnumDef) -> Result<(), SchemaError> {
        if self.enums.iter().any(|e| e.name == def.name) {
            return Err(SchemaError::DuplicateEnum(def.name));
        }
        let mut names = HashSet::new();
        let mut values = HashSet::new();
        for (item, value) in &def.items {
            if !names.insert(item.as_str()) {
                return Err(SchemaError::DuplicateEnumItem {
                    name: def.name.clone(),
                    item: item.clone(),
                });
            }
            if !values.insert(*value) {
                return Err(SchemaError::DuplicateEnumValue {
                    name: def.name.clone(),
                    value: *value,
                });
            }
        }
        self.enums.push(def);
        Ok(())
    }

    /// Adds every declaration of `other`, failing on the first name clash.
    /// Declarations identical to one already present are skipped.
    pub fn merge(&mut self, other: SchemaBuilder) -> Result<(), SchemaError> {
        for e in other.enums {
            if !self.enums.contains(&e) {
                self.declare_enum(e)?;
            }
        }
        for d in other.decls {
            if !self.decls.contains(&d) {
                self.declare(d)?;
            }
        }
        Ok(())
    }

    pub fn declarations(&self) -> &[ClassDecl] {
        &self.decls
    }

    pub fn enums(&self) -> &[EnumDef] {
        &self.enums
    }

    pub fn build(self) -> Result<Schema, SchemaError> {
        Schema::validate(self)
    }
}

/// A validated, immutable type universe.
#[derive(Debug, Clone)]
pub struct Schema {
    classes: Vec<ClassInfo>,
    node_by_name: HashMap<String, ClassId>,
    edge_by_name: HashMap<String, ClassId>,
    enums: Vec<EnumDef>,
    enum_by_name: HashMap<String, usize>,
    containment: Option<ClassId>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.classes.len() == other.classes.len()
            && self
                .classes
                .iter()
                .zip(&other.classes)
                .all(|(a, b)| a.decl == b.decl)
            && self.enums == other.enums
    }
}

fn root_decl(kind: ClassKind) -> ClassDecl {
    ClassDecl {
        name: match kind {
            ClassKind::Node => NODE_ROOT.to_string(),
            ClassKind::Edge => EDGE_ROOT.to_string(),
        },
        kind,
        supers: Vec::new(),
        attributes: Vec::new(),
        is_abstract: false,
        connect: None,
    }
}

impl Schema {
    /// The schema holding only the root classes.
    pub fn empty() -> Schema {
        SchemaBuilder::new().build().expect("empty schema is valid")
    }

    fn validate(builder: SchemaBuilder) -> Result<Schema, SchemaError> {
        let SchemaBuilder { decls, enums } = builder;
        let mut all = vec![root_decl(ClassKind::Node), root_decl(ClassKind::Edge)];
        all.extend(decls);

        let mut node_by_name = HashMap::new();
        let mut edge_by_name = HashMap::new();
        for (i, d) in all.iter().enumerate() {
            let map = match d.kind {
                ClassKind::Node => &mut node_by_name,
                ClassKind::Edge => &mut edge_by_name,
            };
            if map.insert(d.name.clone(), ClassId(i as u32)).is_some() {
                return Err(SchemaError::DuplicateClass {
                    kind: d.kind,
                    name: d.name.clone(),
                });
            }
        }
        let mut enum_by_name = HashMap::new();
        for (i, e) in enums.iter().enumerate() {
            if enum_by_name.insert(e.name.clone(), i).is_some() {
                return Err(SchemaError::DuplicateEnum(e.name.clone()));
            }
        }

        // resolve supertypes; classes without explicit supers hang off their root
        let mut supers: Vec<Vec<ClassId>> = Vec::with_capacity(all.len());
        for (i, d) in all.iter().enumerate() {
            let map = match d.kind {
                ClassKind::Node => &node_by_name,
                ClassKind::Edge => &edge_by_name,
            };
            let mut resolved = Vec::new();
            for s in &d.supers {
                let id = map
                    .get(s)
                    .copied()
                    .ok_or_else(|| SchemaError::UnknownSuper {
                        class: d.name.clone(),
                        kind: d.kind,
                        super_name: s.clone(),
                    })?;
                if !resolved.contains(&id) {
                    resolved.push(id);
                }
            }
            if resolved.is_empty() && i >= 2 {
                resolved.push(match d.kind {
                    ClassKind::Node => ClassId(0),
                    ClassKind::Edge => ClassId(1),
                });
            }
            supers.push(resolved);
        }

        let order = topo_order(&all, &supers)?;

        let n = all.len();
        let mut ancestors = vec![vec![false; n]; n];
        for &c in &order {
            let mut row = vec![false; n];
            row[c] = true;
            for s in &supers[c] {
                for (k, flag) in ancestors[s.index()].iter().enumerate() {
                    row[k] |= *flag;
                }
            }
            ancestors[c] = row;
        }

        let mut classes: Vec<ClassInfo> = Vec::with_capacity(n);
        let topo_rank: Vec<usize> = {
            let mut r = vec![0; n];
            for (rank, &c) in order.iter().enumerate() {
                r[c] = rank;
            }
            r
        };

        for (i, d) in all.iter().enumerate() {
            let mut seen = HashSet::new();
            for a in &d.attributes {
                if !seen.insert(a.name.as_str()) {
                    return Err(SchemaError::DuplicateAttribute {
                        class: d.name.clone(),
                        attr: a.name.clone(),
                    });
                }
                check_value_type(&a.value_type, &enum_by_name)?;
            }
            let attrs = resolve_class_attributes(i, &all, &ancestors, &topo_rank)?;
            let attr_index = attrs
                .iter()
                .enumerate()
                .map(|(k, a)| (a.name.clone(), k))
                .collect();
            let connect = match &d.connect {
                Some((s, t)) => {
                    let look = |name: &String| {
                        node_by_name.get(name).copied().ok_or_else(|| {
                            SchemaError::UnknownConnectClass {
                                class: d.name.clone(),
                                node: name.clone(),
                            }
                        })
                    };
                    Some((look(s)?, look(t)?))
                }
                None => None,
            };
            classes.push(ClassInfo {
                id: ClassId(i as u32),
                decl: d.clone(),
                supers: supers[i].clone(),
                ancestors: ancestors[i].clone(),
                subtypes: Vec::new(),
                attrs,
                attr_index,
                connect,
            });
        }
        for sub in 0..n {
            for sup in 0..n {
                if ancestors[sub][sup] {
                    classes[sup].subtypes.push(ClassId(sub as u32));
                }
            }
        }
        let containment = edge_by_name.get(CONTAINMENT).copied();
        Ok(Schema {
            classes,
            node_by_name,
            edge_by_name,
            enums,
            enum_by_name,
            containment,
        })
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// Declared classes excluding the implicit roots, in declaration order.
    pub fn declarations(&self) -> impl Iterator<Item = &ClassDecl> {
        self.classes[2..].iter().map(|c| &c.decl)
    }

    pub fn enums(&self) -> &[EnumDef] {
        &self.enums
    }

    pub fn enum_def(&self, name: &str) -> Option<&EnumDef> {
        self.enum_by_name.get(name).map(|&i| &self.enums[i])
    }

    pub fn class(&self, id: ClassId) -> &ClassInfo {
        &self.classes[id.index()]
    }

    pub fn try_class(&self, id: ClassId) -> Result<&ClassInfo, SchemaError> {
        self.classes
            .get(id.index())
            .ok_or(SchemaError::UnknownClassId(id.0))
    }

    pub fn node_class(&self, name: &str) -> Option<ClassId> {
        self.node_by_name.get(name).copied()
    }

    pub fn edge_class(&self, name: &str) -> Option<ClassId> {
        self.edge_by_name.get(name).copied()
    }

    pub fn lookup(&self, kind: ClassKind, name: &str) -> Result<ClassId, SchemaError> {
        match kind {
            ClassKind::Node => self.node_class(name),
            ClassKind::Edge => self.edge_class(name),
        }
        .ok_or_else(|| SchemaError::UnknownClass {
            kind,
            name: name.to_string(),
        })
    }

    pub fn node_root(&self) -> ClassId {
        ClassId(0)
    }

    pub fn edge_root(&self) -> ClassId {
        ClassId(1)
    }

    /// Reflexive, transitive subtype test between classes of the same kind.
    pub fn is_subtype_of(&self, sub: ClassId, sup: ClassId) -> Result<bool, SchemaError> {
        let a = self.try_class(sub)?;
        let b = self.try_class(sup)?;
        if a.kind() != b.kind() {
            return Err(SchemaError::KindMismatch(
                a.name().to_string(),
                b.name().to_string(),
            ));
        }
        Ok(a.ancestors[sup.index()])
    }

    /// Unchecked variant for hot paths; ids must come from this schema.
    #[inline]
    pub fn is_a(&self, sub: ClassId, sup: ClassId) -> bool {
        self.classes[sub.index()].ancestors[sup.index()]
    }

    pub fn resolve_attribute(
        &self,
        class: ClassId,
        attr: &str,
    ) -> Result<&ResolvedAttr, SchemaError> {
        let info = self.try_class(class)?;
        info.attr_slot(attr)
            .map(|i| &info.attrs[i])
            .ok_or_else(|| SchemaError::UnknownAttribute {
                class: info.name().to_string(),
                attr: attr.to_string(),
            })
    }

    pub fn is_containment(&self, edge_class: ClassId) -> bool {
        self.containment.is_some_and(|c| self.is_a(edge_class, c))
    }
}

fn check_value_type(vt: &ValueType, enums: &HashMap<String, usize>) -> Result<(), SchemaError> {
    match vt {
        ValueType::Enum(name) if !enums.contains_key(name) => {
            Err(SchemaError::UnknownEnum(name.clone()))
        }
        ValueType::Set(t) | ValueType::Array(t) => check_element_type(t, enums),
        ValueType::Map(k, v) => {
            check_element_type(k, enums)?;
            check_element_type(v, enums)
        }
        _ => Ok(()),
    }
}

fn check_element_type(vt: &ValueType, enums: &HashMap<String, usize>) -> Result<(), SchemaError> {
    if !vt.is_scalar() {
        return Err(SchemaError::NonScalarElement(vt.to_string()));
    }
    check_value_type(vt, enums)
}

/// Orders classes so that every class comes after all of its supertypes.
/// Ids stay declaration indices.
fn topo_order(all: &[ClassDecl], supers: &[Vec<ClassId>]) -> Result<Vec<usize>, SchemaError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = all.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        mark[start] = Mark::Active;
        while let Some(&mut (c, ref mut next)) = stack.last_mut() {
            if *next < supers[c].len() {
                let s = supers[c][*next].index();
                *next += 1;
                match mark[s] {
                    Mark::New => {
                        mark[s] = Mark::Active;
                        stack.push((s, 0));
                    }
                    Mark::Active => return Err(SchemaError::InheritanceCycle(all[s].name.clone())),
                    Mark::Done => {}
                }
            } else {
                mark[c] = Mark::Done;
                order.push(c);
                stack.pop();
            }
        }
    }
    Ok(order)
}

fn resolve_class_attributes(
    class: usize,
    all: &[ClassDecl],
    ancestors: &[Vec<bool>],
    topo_rank: &[usize],
) -> Result<Vec<ResolvedAttr>, SchemaError> {
    let mut declaring: Vec<usize> = (0..all.len()).filter(|&a| ancestors[class][a]).collect();
    declaring.sort_by_key(|&a| topo_rank[a]);

    // name -> every (origin, type) visible from this class
    let mut by_name: Vec<(String, Vec<(usize, ValueType)>)> = Vec::new();
    for &a in &declaring {
        for decl in &all[a].attributes {
            match by_name.iter_mut().find(|(n, _)| *n == decl.name) {
                Some((_, list)) => list.push((a, decl.value_type.clone())),
                None => by_name.push((decl.name.clone(), vec![(a, decl.value_type.clone())])),
            }
        }
    }

    let mut out = Vec::with_capacity(by_name.len());
    for (name, decls) in by_name {
        let first_type = &decls[0].1;
        if decls.iter().any(|(_, t)| t != first_type) {
            return Err(SchemaError::AttributeCollision {
                class: all[class].name.clone(),
                attr: name,
            });
        }
        // a declaration is shadowed by one on a strict subclass of its origin
        let visible: Vec<usize> = decls
            .iter()
            .map(|(o, _)| *o)
            .filter(|&o| !decls.iter().any(|&(p, _)| p != o && ancestors[p][o]))
            .collect();
        if visible.len() > 1 {
            return Err(SchemaError::AmbiguousAttribute {
                class: all[class].name.clone(),
                attr: name,
                first: all[visible[0]].name.clone(),
                second: all[visible[1]].name.clone(),
            });
        }
        out.push(ResolvedAttr {
            name,
            value_type: first_type.clone(),
            origin: ClassId(visible[0] as u32),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn string_attr(name: &str) -> AttributeDecl {
        AttributeDecl::new(name, ValueType::String)
    }

    #[test]
    fn abstract_class_without_attributes() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("State", &[], vec![], true).unwrap();
        let s = b.build().unwrap();
        let st = s.node_class("State").unwrap();
        assert!(s.class(st).is_abstract());
        assert!(s.class(st).attributes().is_empty());
    }

    #[test]
    fn direct_subtype_and_reflexivity() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("SynSent", &["State"], vec![], false)
            .unwrap();
        b.declare_node_class("State", &[], vec![], true).unwrap();
        let s = b.build().unwrap();
        let syn = s.node_class("SynSent").unwrap();
        let st = s.node_class("State").unwrap();
        assert!(s.is_subtype_of(syn, st).unwrap());
        assert!(s.is_subtype_of(st, st).unwrap());
        assert!(!s.is_subtype_of(st, syn).unwrap());
        assert!(s.is_subtype_of(syn, s.node_root()).unwrap());
    }

    // Manual resolution table for the diamond:
    //   Base{name:string} <- A, Base <- B, {A,B} <- C
    //   C.name -> origin Base, one slot
    #[test]
    fn diamond_shares_single_slot() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("Base", &[], vec![string_attr("name")], false)
            .unwrap();
        b.declare_node_class("A", &["Base"], vec![], false).unwrap();
        b.declare_node_class("B", &["Base"], vec![], false).unwrap();
        b.declare_node_class("C", &["A", "B"], vec![], false)
            .unwrap();
        let s = b.build().unwrap();
        let c = s.node_class("C").unwrap();
        assert_eq!(s.class(c).attributes().len(), 1);
        let r = s.resolve_attribute(c, "name").unwrap();
        assert_eq!(r.origin, s.node_class("Base").unwrap());
        assert_eq!(r.value_type, ValueType::String);
    }

    #[test]
    fn grandparent_attribute_resolves() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("G", &[], vec![string_attr("name")], false)
            .unwrap();
        b.declare_node_class("P", &["G"], vec![], false).unwrap();
        b.declare_node_class("K", &["P"], vec![], false).unwrap();
        let s = b.build().unwrap();
        let r = s
            .resolve_attribute(s.node_class("K").unwrap(), "name")
            .unwrap();
        assert_eq!(r.origin, s.node_class("G").unwrap());
        assert!(matches!(
            s.resolve_attribute(s.node_class("K").unwrap(), "nope"),
            Err(SchemaError::UnknownAttribute { .. })
        ));
    }

    #[test]
    fn independent_declarations_are_ambiguous() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("A", &[], vec![string_attr("name")], false)
            .unwrap();
        b.declare_node_class("B", &[], vec![string_attr("name")], false)
            .unwrap();
        b.declare_node_class("C", &["A", "B"], vec![], false)
            .unwrap();
        assert!(matches!(
            b.build(),
            Err(SchemaError::AmbiguousAttribute { .. })
        ));
    }

    #[test]
    fn redeclaration_with_other_type_collides() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("A", &[], vec![string_attr("x")], false)
            .unwrap();
        b.declare_node_class(
            "B",
            &["A"],
            vec![AttributeDecl::new("x", ValueType::Integer)],
            false,
        )
        .unwrap();
        assert!(matches!(
            b.build(),
            Err(SchemaError::AttributeCollision { .. })
        ));
    }

    #[test]
    fn errors_on_bad_declarations() {
        let mut b = SchemaBuilder::new();
        b.declare_node_class("A", &[], vec![], false).unwrap();
        assert!(matches!(
            b.declare_node_class("A", &[], vec![], false),
            Err(SchemaError::DuplicateClass { .. })
        ));
        // same name is fine across kinds
        b.declare_edge_class("A", &[], vec![], false).unwrap();

        let mut b = SchemaBuilder::new();
        b.declare_node_class("A", &["Missing"], vec![], false)
            .unwrap();
        assert!(matches!(b.build(), Err(SchemaError::UnknownSuper { .. })));

        let mut b = SchemaBuilder::new();
        b.declare_node_class("A", &["B"], vec![], false).unwrap();
        b.declare_node_class("B", &["A"], vec![], false).unwrap();
        assert!(matches!(b.build(), Err(SchemaError::InheritanceCycle(_))));

        // an edge class cannot extend a node class
        let mut b = SchemaBuilder::new();
        b.declare_node_class("N", &[], vec![], false).unwrap();
        b.declare_edge_class("E", &["N"], vec![], false).unwrap();
        assert!(matches!(b.build(), Err(SchemaError::UnknownSuper { .. })));
    }

    #[test]
    fn enum_validation() {
        let mut b = SchemaBuilder::new();
        let err = b.declare_enum(EnumDef {
            name: "E".into(),
            items: vec![("A".into(), 0), ("A".into(), 1)],
        });
        assert!(matches!(err, Err(SchemaError::DuplicateEnumItem { .. })));
        let err = b.declare_enum(EnumDef {
            name: "E".into(),
            items: vec![("A".into(), 0), ("B".into(), 0)],
        });
        assert!(matches!(err, Err(SchemaError::DuplicateEnumValue { .. })));
        b.declare_node_class(
            "X",
            &[],
            vec![AttributeDecl::new("c", ValueType::Enum("Nope".into()))],
            false,
        )
        .unwrap();
        assert!(matches!(b.build(), Err(SchemaError::UnknownEnum(_))));
    }

    #[test]
    fn nested_containers_rejected() {
        let mut b = SchemaBuilder::new();
        let t = ValueType::Set(Box::new(ValueType::Array(Box::new(ValueType::Integer))));
        b.declare_node_class("X", &[], vec![AttributeDecl::new("c", t)], false)
            .unwrap();
        assert!(matches!(b.build(), Err(SchemaError::NonScalarElement(_))));
    }

    #[test]
    fn kind_mismatch_in_subtype_query() {
        let s = Schema::empty();
        assert!(s.is_subtype_of(s.node_root(), s.edge_root()).is_err());
        assert!(s.is_subtype_of(ClassId(99), s.node_root()).is_err());
    }
}
