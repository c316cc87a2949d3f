//! Rendering configuration for [`export_dot`](super::export_dot), read from
//! TOML:
//!
//! ```toml
//! containment = ["java_Class_methods", "java_Method_body"]
//!
//! [classes.java_Class]
//! color = "lightblue"
//! shape = "box"
//! label = "class {name}"
//!
//! [classes.java_Block]
//! hidden = true
//! ```
//!
//! A style applies to the named class and to subclasses without a style of
//! their own. Label templates substitute `{attr}` with the attribute value
//! and `{class}` / `{id}` with the class name and element id.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metamodel::{ClassId, Schema};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("layout config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("layout config names unknown {kind} class `{name}`")]
    UnknownClass { kind: &'static str, name: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassStyle {
    pub color: Option<String>,
    pub shape: Option<String>,
    pub label: Option<String>,
    #[serde(default)]
    pub hidden: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    /// Edge classes whose targets are drawn nested inside their source.
    #[serde(default)]
    pub containment: Vec<String>,
    #[serde(default)]
    pub classes: BTreeMap<String, ClassStyle>,
}

impl LayoutConfig {
    pub fn from_toml(text: &str) -> Result<LayoutConfig, LayoutError> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(&self, schema: &Schema) -> Result<(), LayoutError> {
        for name in &self.containment {
            if schema.edge_class(name).is_none() {
                return Err(LayoutError::UnknownClass {
                    kind: "edge",
                    name: name.clone(),
                });
            }
        }
        for name in self.classes.keys() {
            if schema.node_class(name).is_none() && schema.edge_class(name).is_none() {
                return Err(LayoutError::UnknownClass {
                    kind: "node or edge",
                    name: name.clone(),
                });
            }
        }
        Ok(())
    }

    /// Style of `class` or of its nearest styled ancestor.
    pub fn style_for(&self, schema: &Schema, class: ClassId) -> Option<&ClassStyle> {
        let mut queue = VecDeque::from([class]);
        let mut seen = vec![class];
        while let Some(c) = queue.pop_front() {
            let info = schema.class(c);
            if let Some(s) = self.classes.get(info.name()) {
                return Some(s);
            }
            for &s in &info.supers {
                if !seen.contains(&s) {
                    seen.push(s);
                    queue.push_back(s);
                }
            }
        }
        None
    }

    pub fn is_containment(&self, schema: &Schema, edge_class: ClassId) -> bool {
        self.containment.iter().any(|n| {
            schema
                .edge_class(n)
                .is_some_and(|c| schema.is_a(edge_class, c))
        })
    }
}
