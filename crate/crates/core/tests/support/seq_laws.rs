//! Behavioural laws of the sequence language, checked on a token graph.

#![allow(dead_code)]

use std::sync::Arc;

use grewrite::rules::{Engine, RewriteEnv};
use grewrite::schema_text::parse_schema_text;
use grewrite::sequences::{parse_seq, Executor};
use grewrite::trace::GraphSnapshot;
use grewrite::{Graph, Schema};

const SCHEMA: &str = "node class Tok; node class Done; node class Nothing;";

const RULES: &str = r#"
    rule tok { t:Tok; modify { delete(t); } }
    rule mark { modify { :Done; } }
    rule no { :Nothing; }
"#;

pub struct World {
    pub engine: Engine,
    pub graph: Graph,
    pub env: RewriteEnv,
}

impl World {
    pub fn new(tokens: usize) -> World {
        let schema: Arc<Schema> = Arc::new(parse_schema_text(SCHEMA).unwrap().build().unwrap());
        let engine = Engine::from_source(schema.clone(), RULES).unwrap();
        let mut graph = Graph::new(schema.clone());
        let tok = schema.node_class("Tok").unwrap();
        for _ in 0..tokens {
            graph.add_node(tok).unwrap();
        }
        World {
            engine,
            graph,
            env: RewriteEnv::new(),
        }
    }

    pub fn run(&mut self, src: &str) -> (bool, u64) {
        let seq = parse_seq(src).unwrap();
        let mut ex = Executor::new(&self.engine, &mut self.graph, &mut self.env);
        let r = ex.run(&seq).unwrap();
        (r, ex.applications())
    }

    pub fn count(&self, class: &str) -> usize {
        let c = self.graph.schema().node_class(class).unwrap();
        self.graph.nodes_of_type(c, false).unwrap().len()
    }
}

fn expect(
    src: &str,
    tokens: usize,
    result: bool,
    marks: usize,
    toks_left: usize,
) -> Result<(), String> {
    let mut w = World::new(tokens);
    let (r, _) = w.run(src);
    let got = (r, w.count("Done"), w.count("Tok"));
    if got != (result, marks, toks_left) {
        return Err(format!(
            "`{src}` on {tokens} tokens: got {got:?}, want {:?}",
            (result, marks, toks_left)
        ));
    }
    Ok(())
}

pub fn laws() -> Vec<(&'static str, Result<(), String>)> {
    let mut out: Vec<(&'static str, Result<(), String>)> = vec![
        ("&& is lazy", expect("no && mark", 0, false, 0, 0)),
        ("|| is lazy", expect("mark || mark", 0, true, 1, 0)),
        (
            ";> runs both, yields right",
            expect("mark ;> no", 0, false, 1, 0).and(expect("no ;> mark", 0, true, 1, 0)),
        ),
        (
            "<; runs both, yields left",
            expect("mark <; no", 0, true, 1, 0).and(expect("no <; mark", 0, false, 1, 0)),
        ),
        (
            "! negates without undoing",
            expect("!mark", 0, false, 1, 0).and(expect("!!no", 0, false, 0, 0)),
        ),
        (
            "* repeats until failure",
            expect("tok*", 5, true, 0, 0).and(expect("tok*", 0, false, 0, 0)),
        ),
        (
            "[r] applies every match",
            expect("[tok]", 5, true, 0, 0).and(expect("[no]", 3, false, 0, 3)),
        ),
        ("r applies exactly one match", expect("tok", 5, true, 0, 4)),
        ("* over a sequence", expect("(tok && mark)*", 3, true, 3, 0)),
    ];

    let mut w = World::new(5);
    let first = w.graph.nodes().next();
    w.run("tok");
    out.push((
        "r picks the first match in key order",
        if first.is_some_and(|n| !w.graph.is_live(n.into())) {
            Ok(())
        } else {
            Err("lowest id survived".into())
        },
    ));

    let mut w = World::new(4);
    let (r, apps) = w.run("[tok]");
    out.push((
        "[r] searches once and applies each match once",
        if r && apps == 4 {
            Ok(())
        } else {
            Err(format!("result {r}, {apps} applications"))
        },
    ));

    let mut demorgan = Ok(());
    for a in ["true", "false"] {
        for b in ["true", "false"] {
            let mut w = World::new(0);
            let l = w.run(&format!("!({a} && {b})")).0;
            let r = w.run(&format!("!{a} || !{b}")).0;
            if l != r {
                demorgan = Err(format!("{a}, {b}"));
            }
        }
    }
    out.push(("De Morgan on constants", demorgan));

    let snap = |src: &str| {
        let mut w = World::new(6);
        w.run(src);
        GraphSnapshot::of(&w.graph)
    };
    let same = snap("(tok && mark)* ;> [tok]") == snap("(tok && mark)* ;> [tok]");
    out.push((
        "runs are deterministic",
        if same {
            Ok(())
        } else {
            Err("snapshots differ".into())
        },
    ));
    out
}
