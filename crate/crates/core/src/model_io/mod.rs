//! Model I/O: Ecore metamodels, XMI instance graphs, the state-machine XMI
//! writer and DOT rendering.

pub mod dot;
pub mod ecore;
pub mod export;
pub mod layout;
pub mod xmi;

pub use dot::export_dot;
pub use ecore::{import_ecore, EcoreError, EcoreImport};
pub use export::{export_state_machine_xmi, ExportError};
pub use layout::{ClassStyle, LayoutConfig, LayoutError};
pub use xmi::{import_xmi, XmiError, XmiImport};

pub const XMI_NS: &str = "http://www.omg.org/XMI";
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";

fn line_of(doc: &roxmltree::Document, n: roxmltree::Node) -> u32 {
    doc.text_pos_at(n.range().start).row
}
