mod support {
    pub mod iso;
}

use std::sync::Arc;

use grewrite::model_io::export::{PREFIX, SUFFIX};
use grewrite::model_io::{
    export_dot, export_state_machine_xmi, import_ecore, import_xmi, ExportError, LayoutConfig,
};
use grewrite::schema_text::parse_schema_text;
use grewrite::{Graph, NodeId, Schema, Value};
use support::iso::{isomorphic, project};

fn sm_schema() -> Arc<Schema> {
    let b = import_ecore(include_str!("../fixtures/statemachine.ecore"))
        .unwrap()
        .builder;
    Arc::new(b.build().unwrap())
}

struct Machine {
    g: Graph,
    m: NodeId,
}

impl Machine {
    fn new() -> Machine {
        let schema = sm_schema();
        let mut g = Graph::new(schema.clone());
        let m = g
            .add_node(schema.node_class("sm_StateMachine").unwrap())
            .unwrap();
        Machine { g, m }
    }

    fn contain(&mut self, feature: &str, n: NodeId) {
        let e = self
            .g
            .schema()
            .edge_class(&format!("sm_StateMachine_{feature}"))
            .unwrap();
        self.g.add_edge(e, self.m, n).unwrap();
    }

    fn state(&mut self, name: &str) -> NodeId {
        let s = self
            .g
            .add_node(self.g.schema().node_class("sm_State").unwrap())
            .unwrap();
        self.g
            .set_attr(s.into(), "name", Value::Str(name.into()))
            .unwrap();
        self.contain("states", s);
        s
    }

    fn transition(&mut self, src: NodeId, tgt: NodeId, trigger: &str, action: &str) -> NodeId {
        let schema = self.g.schema().clone();
        let t = self
            .g
            .add_node(schema.node_class("sm_Transition").unwrap())
            .unwrap();
        self.g
            .set_attr(t.into(), "trigger", Value::Str(trigger.into()))
            .unwrap();
        self.g
            .set_attr(t.into(), "action", Value::Str(action.into()))
            .unwrap();
        self.g
            .add_edge(schema.edge_class("sm_Transition_source").unwrap(), t, src)
            .unwrap();
        self.g
            .add_edge(schema.edge_class("sm_Transition_target").unwrap(), t, tgt)
            .unwrap();
        self.contain("transitions", t);
        t
    }
}

fn documented() -> Machine {
    let mut m = Machine::new();
    let closed = m.state("Closed");
    let listen = m.state("Listen");
    m.transition(closed, listen, "open", "--");
    m.transition(listen, closed, "close", "FIN & ACK");
    m
}

fn golden_block() -> String {
    let doc = include_str!("../../../docs/xmi-format.md");
    let start = doc.find("<!-- golden:begin -->\n```xml\n").unwrap()
        + "<!-- golden:begin -->\n```xml\n".len();
    let end = doc.find("```\n<!-- golden:end -->").unwrap();
    doc[start..end].to_string()
}

#[test]
fn documented_example_is_exact() {
    assert_eq!(
        export_state_machine_xmi(&documented().g).unwrap(),
        golden_block()
    );
}

#[test]
fn no_states_is_prefix_and_suffix() {
    let out = export_state_machine_xmi(&Machine::new().g).unwrap();
    assert_eq!(out, format!("{PREFIX}{SUFFIX}"));
    let back = import_xmi(&out, sm_schema()).unwrap().graph;
    assert_eq!((back.node_count(), back.edge_count()), (1, 0));
}

#[test]
fn single_state() {
    let mut m = Machine::new();
    m.state("Closed");
    let out = export_state_machine_xmi(&m.g).unwrap();
    assert_eq!(
        out,
        format!("{PREFIX}  <states name=\"Closed\"/>\n{SUFFIX}")
    );
}

#[test]
fn equal_graphs_give_equal_bytes() {
    let a = export_state_machine_xmi(&documented().g).unwrap();
    let b = export_state_machine_xmi(&documented().g).unwrap();
    assert_eq!(a.as_bytes(), b.as_bytes());
}

#[test]
fn round_trip_is_isomorphic() {
    let m = documented();
    let xml = export_state_machine_xmi(&m.g).unwrap();
    let back = import_xmi(&xml, sm_schema()).unwrap();
    assert!(back.warnings.is_empty(), "{:?}", back.warnings);
    let all = |_: &str| true;
    assert!(isomorphic(&project(&m.g, all), &project(&back.graph, all)));
    // and the importer output exports to the same bytes
    assert_eq!(export_state_machine_xmi(&back.graph).unwrap(), xml);
}

#[test]
fn isomorphism_check_is_not_vacuous() {
    let a = documented();
    let mut b = Machine::new();
    let closed = b.state("Closed");
    let listen = b.state("Listen");
    b.transition(closed, listen, "open", "--");
    b.transition(closed, listen, "close", "FIN & ACK");
    let all = |_: &str| true;
    assert!(!isomorphic(&project(&a.g, all), &project(&b.g, all)));
}

#[test]
fn export_errors() {
    let schema = sm_schema();
    assert_eq!(
        export_state_machine_xmi(&Graph::new(schema.clone())).unwrap_err(),
        ExportError::NoStateMachine
    );

    let mut two = Machine::new();
    two.g
        .add_node(schema.node_class("sm_StateMachine").unwrap())
        .unwrap();
    assert_eq!(
        export_state_machine_xmi(&two.g).unwrap_err(),
        ExportError::ManyStateMachines(2)
    );

    let mut m = Machine::new();
    let t =
        m.g.add_node(schema.node_class("sm_Transition").unwrap())
            .unwrap();
    let err = export_state_machine_xmi(&m.g).unwrap_err();
    assert_eq!(
        err,
        ExportError::BadEndpoint {
            transition: t,
            end: "source",
            found: 0
        }
    );

    let other = Arc::new(parse_schema_text("node class X;").unwrap().build().unwrap());
    assert_eq!(
        export_state_machine_xmi(&Graph::new(other)).unwrap_err(),
        ExportError::MissingClass("sm_StateMachine")
    );
}

fn tree_schema() -> Arc<Schema> {
    let text = r#"
        abstract edge class Containment;
        node class Cls { name : string; }
        node class Mth { name : string; }
        node class Blk;
        edge class Cls_methods extends Containment connect Cls -> Mth;
        edge class Mth_body extends Containment connect Mth -> Blk;
        edge class calls;
    "#;
    Arc::new(parse_schema_text(text).unwrap().build().unwrap())
}

fn named(g: &mut Graph, class: &str, name: &str) -> NodeId {
    let n = g.add_node(g.schema().node_class(class).unwrap()).unwrap();
    g.set_attr(n.into(), "name", Value::Str(name.into()))
        .unwrap();
    n
}

fn tree() -> Graph {
    let schema = tree_schema();
    let mut g = Graph::new(schema.clone());
    let c = named(&mut g, "Cls", "SynSent");
    let run = named(&mut g, "Mth", "run");
    let b = g.add_node(schema.node_class("Blk").unwrap()).unwrap();
    let other = named(&mut g, "Cls", "Listen");
    g.add_edge(schema.edge_class("Cls_methods").unwrap(), c, run)
        .unwrap();
    g.add_edge(schema.edge_class("Mth_body").unwrap(), run, b)
        .unwrap();
    g.add_edge(schema.edge_class("calls").unwrap(), run, other)
        .unwrap();
    g
}

#[test]
fn dot_empty_config_is_flat() {
    let want = "digraph G {
  n0 [label=\"Cls\"];
  n1 [label=\"Mth\"];
  n2 [label=\"Blk\"];
  n3 [label=\"Cls\"];
  n0 -> n1 [label=\"Cls_methods\"];
  n1 -> n2 [label=\"Mth_body\"];
  n1 -> n3 [label=\"calls\"];
}
";
    assert_eq!(export_dot(&tree(), &LayoutConfig::default()), want);
}

#[test]
fn dot_method_nested_in_class_cluster() {
    let config = LayoutConfig::from_toml(
        r#"
        containment = ["Cls_methods"]
        [classes.Cls]
        label = "class {name}"
        shape = "box"
        color = "lightblue"
        [classes.Mth]
        label = "{name}()"
        [classes.Blk]
        hidden = true
        "#,
    )
    .unwrap();
    config.validate(&tree_schema()).unwrap();
    let want = "digraph G {
  subgraph cluster_n0 {
    label=\"class SynSent\";
    n0 [label=\"class SynSent\", shape=box, color=\"lightblue\"];
    n1 [label=\"run()\"];
  }
  n3 [label=\"class Listen\", shape=box, color=\"lightblue\"];
  n1 -> n3 [label=\"calls\"];
}
";
    assert_eq!(export_dot(&tree(), &config), want);
}

#[test]
fn dot_breaks_containment_cycle() {
    let schema = tree_schema();
    let mut g = Graph::new(schema.clone());
    let n: Vec<NodeId> = (0..3)
        .map(|i| named(&mut g, "Cls", &format!("c{i}")))
        .collect();
    let calls = schema.edge_class("calls").unwrap();
    for i in 0..3 {
        g.add_edge(calls, n[i], n[(i + 1) % 3]).unwrap();
    }
    let config =
        LayoutConfig::from_toml("containment = [\"calls\"]\n[classes.Cls]\nlabel = \"{name}\"\n")
            .unwrap();
    let want = "digraph G {
  // warning: containment cycle broken at e2 (n2 -> n0)
  subgraph cluster_n0 {
    label=\"c0\";
    n0 [label=\"c0\"];
    subgraph cluster_n1 {
      label=\"c1\";
      n1 [label=\"c1\"];
      n2 [label=\"c2\"];
    }
  }
  n2 -> n0 [label=\"calls\"];
}
";
    assert_eq!(export_dot(&g, &config), want);
}

#[test]
fn layout_config_rejects_unknown_classes() {
    let schema = tree_schema();
    assert!(LayoutConfig::from_toml("containment = [\"nope\"]")
        .unwrap()
        .validate(&schema)
        .is_err());
    assert!(LayoutConfig::from_toml("[classes.Nope]\nhidden = true")
        .unwrap()
        .validate(&schema)
        .is_err());
    assert!(LayoutConfig::from_toml("bogus = 1").is_err());
}
