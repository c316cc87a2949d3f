//! Acceptance criteria of the engine and the re-engineering case, one line
//! per criterion. Exits non-zero if any criterion fails.

#[path = "../../core/tests/support/iso.rs"]
mod iso;
#[path = "../../core/tests/support/matcher_oracle.rs"]
mod matcher_oracle;
#[path = "../../core/tests/support/program_gen.rs"]
mod program_gen;
#[path = "../../core/tests/support/seq_laws.rs"]
mod seq_laws;
mod support {
    pub mod workspace;
}

use std::sync::Arc;
use std::time::{Duration, Instant};

use grewrite::case::oracle::brute_force_extract;
use grewrite::case::{import_program, run_extraction, schema, Machine, JAVA_ECORE, TCP_SMALL_XMI};
use grewrite::model_io::{import_ecore, import_xmi};
use grewrite::rules::{Engine, RewriteEnv};
use grewrite::schema_text::{emit_builder_text, parse_schema_text};
use grewrite::{Graph, NodeId, Schema};
use program_gen::{generate, Size};
use support::workspace::Scratch;

const TCP_LARGE: &str = include_str!("../../core/fixtures/tcp_large.xmi");
const JAVA_GM: &str = include_str!("../../core/fixtures/java.gm");

const SMALL_LIMIT: Duration = Duration::from_secs(1);
const LARGE_LIMIT: Duration = Duration::from_secs(2);
const RANDOM_SEEDS: u64 = 100;
const FLAT_SEEDS: u64 = 500;
const NESTED_SEEDS: u64 = 100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn engine_and_oracle(xml: &str) -> Result<(Machine, Machine, Duration), String> {
    let g = import_program(xml, schema().map_err(err)?).map_err(err)?;
    let expected = brute_force_extract(&g).map_err(err)?;
    let mut g = g;
    let start = Instant::now();
    let summary = run_extraction(&mut g).map_err(err)?;
    Ok((summary.machine, expected, start.elapsed()))
}

fn correct_extraction() -> Outcome {
    let (got, expected, elapsed) = engine_and_oracle(TCP_SMALL_XMI)?;
    ensure(got == expected, || {
        format!("machine differs from oracle: {got:?} vs {expected:?}")
    })?;
    ensure(elapsed < SMALL_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} states, {} transitions, {:.1} ms (limit {SMALL_LIMIT:?})",
        got.states.len(),
        got.transitions.len(),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn randomized_differential() -> Outcome {
    let mut transitions = 0;
    for seed in 0..RANDOM_SEEDS {
        let size = Size {
            classes: 1 + (seed as usize * 7) % 200,
            statements: 500,
        };
        let xml = generate(seed, size).to_xmi();
        let (got, expected, _) =
            engine_and_oracle(&xml).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(got == expected, || {
            format!("seed {seed}: machine differs from oracle")
        })?;
        transitions += got.transitions.len();
    }
    Ok(format!(
        "{RANDOM_SEEDS} seeds equal, {transitions} transitions in total"
    ))
}

fn desk_scale() -> Outcome {
    let start = Instant::now();
    let mut g = import_program(TCP_LARGE, schema().map_err(err)?).map_err(err)?;
    let import = start.elapsed();
    let (nodes, edges) = (g.node_count(), g.edge_count());
    let start = Instant::now();
    let summary = run_extraction(&mut g).map_err(err)?;
    let extraction = start.elapsed();
    ensure(extraction < LARGE_LIMIT, || {
        format!("extraction took {extraction:?}")
    })?;

    // the heap figure comes from the binary's counting allocator
    let ws = Scratch::new();
    let out = ws.shell(&["extract", "fixtures/tcp_large.xmi", "--out", "m.xmi"]);
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    let report = String::from_utf8_lossy(&out.stderr);
    let heap = report
        .split("peak heap ")
        .nth(1)
        .map(str::trim)
        .unwrap_or("unknown");
    Ok(format!(
        "{nodes} nodes + {edges} edges, {} states, {} transitions; import {:.1} ms, extraction {:.1} ms (limit {LARGE_LIMIT:?}), peak heap {heap}",
        summary.states,
        summary.transitions,
        import.as_secs_f64() * 1e3,
        extraction.as_secs_f64() * 1e3
    ))
}

fn matcher_oracle() -> Outcome {
    let mut flat = 0;
    for seed in 0..FLAT_SEEDS {
        flat += matcher_oracle::check_flat(seed).map_err(|e| format!("flat seed {seed}: {e}"))?;
    }
    let mut nested = 0;
    for seed in 0..NESTED_SEEDS {
        nested +=
            matcher_oracle::check_nested(seed).map_err(|e| format!("nested seed {seed}: {e}"))?;
    }
    Ok(format!(
        "{FLAT_SEEDS} flat pairs ({flat} matches), {NESTED_SEEDS} nested pairs ({nested} matches)"
    ))
}

const RULE_SCHEMA: &str = "node class A { v : int; } node class C; edge class e; edge class g;";

fn rule_world(src: &str) -> Result<(Engine, Graph, NodeId, NodeId), String> {
    let schema: Arc<Schema> = Arc::new(
        parse_schema_text(RULE_SCHEMA)
            .map_err(err)?
            .build()
            .map_err(err)?,
    );
    let engine = Engine::from_source(schema.clone(), src).map_err(err)?;
    let mut g = Graph::new(schema.clone());
    let a = g.add_node(schema.node_class("A").unwrap()).map_err(err)?;
    let c = g.add_node(schema.node_class("C").unwrap()).map_err(err)?;
    g.add_edge(schema.edge_class("e").unwrap(), a, c)
        .map_err(err)?;
    Ok((engine, g, a, c))
}

fn rewrite_semantics() -> Outcome {
    let mut env = RewriteEnv::new();

    let (eng, mut g, a, c) =
        rule_world("rule r { a:A -x:e-> b:C; replace { a; n:C; a -:g-> n; } }")?;
    eng.apply_first(&mut g, &mut env, "r", &[])
        .map_err(err)?
        .ok_or("replace: no match")?;
    ensure(g.is_live(a.into()) && !g.is_live(c.into()), || {
        "replace kept b or dropped a".into()
    })?;
    ensure((g.node_count(), g.edge_count()) == (2, 1), || {
        "replace: wrong element counts".into()
    })?;

    let (eng, mut g, a, c) = rule_world("rule r { a:A -x:e-> b:C; modify { n:C; a -:g-> n; } }")?;
    eng.apply_first(&mut g, &mut env, "r", &[])
        .map_err(err)?
        .ok_or("modify: no match")?;
    ensure(g.is_live(a.into()) && g.is_live(c.into()), || {
        "modify deleted a matched element".into()
    })?;
    ensure((g.node_count(), g.edge_count()) == (3, 2), || {
        "modify: wrong element counts".into()
    })?;

    let (eng, mut g, a, _) =
        rule_world("rule r { a:A; modify { eval { a.v = a.v + 41; ::x = a.v; } } }")?;
    let before = grewrite::trace::GraphSnapshot::of(&g);
    eng.apply_first(&mut g, &mut env, "r", &[])
        .map_err(err)?
        .ok_or("eval: no match")?;
    let after = grewrite::trace::GraphSnapshot::of(&g);
    ensure(
        before.nodes.len() == after.nodes.len() && before.edges.len() == after.edges.len(),
        || "eval-only rule changed the structure".into(),
    )?;
    ensure(
        g.get_attr(a.into(), "v").ok() == Some(&grewrite::Value::Int(41)),
        || "eval: a.v != 41".into(),
    )?;
    ensure(
        env.globals.get("x") == Some(&grewrite::Value::Int(41)),
        || "eval: ::x != 41".into(),
    )?;

    let (eng, mut g, _, _) = rule_world(r#"rule r { a:A; modify { emit("v=", a.v, "\n"); } }"#)?;
    let mut env = RewriteEnv::new();
    eng.apply_first(&mut g, &mut env, "r", &[]).map_err(err)?;
    eng.apply_first(&mut g, &mut env, "r", &[]).map_err(err)?;
    ensure(env.emitted == "v=0\nv=0\n", || {
        format!("emitted {:?}", env.emitted)
    })?;
    Ok("replace deletion, modify frame, eval-only, emit capture".into())
}

fn sequence_laws() -> Outcome {
    let laws = seq_laws::laws();
    let failed: Vec<String> = laws
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} laws hold", laws.len()))
}

fn pipeline(reverse: bool) -> Result<[String; 3], String> {
    let ws = Scratch::new();
    let mut args = vec!["--quiet", "--trace", "run.trace.jsonl"];
    if reverse {
        args.extend(["--seed-order", "reverse"]);
    }
    args.push("scripts/reengineering.grs");
    let out = ws.shell(&args);
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    Ok([
        ws.read("scripts/tcp_statemachine.xmi"),
        ws.read("scripts/tcp_statemachine.dot"),
        ws.read("run.trace.jsonl"),
    ])
}

fn determinism() -> Outcome {
    let a = pipeline(false)?;
    let b = pipeline(false)?;
    let r = pipeline(true)?;
    for (i, name) in ["XMI", "DOT", "trace"].iter().enumerate() {
        ensure(a[i] == b[i], || format!("{name} differs between runs"))?;
        ensure(a[i] == r[i], || {
            format!("{name} differs under reverse scan order")
        })?;
    }
    Ok(format!(
        "XMI {} B, DOT {} B, trace {} B identical over 3 runs",
        a[0].len(),
        a[1].len(),
        a[2].len()
    ))
}

fn xmi_round_trip() -> Outcome {
    let schema = schema().map_err(err)?;
    let mut g = import_program(TCP_SMALL_XMI, schema.clone()).map_err(err)?;
    let summary = run_extraction(&mut g).map_err(err)?;
    let back = import_xmi(&summary.xmi, schema).map_err(err)?;
    ensure(back.warnings.is_empty(), || format!("{:?}", back.warnings))?;
    let machine = |c: &str| c.starts_with("sm_");
    let (a, b) = (
        iso::project(&g, machine),
        iso::project(&back.graph, machine),
    );
    ensure(iso::isomorphic(&a, &b), || {
        "re-imported machine is not isomorphic".into()
    })?;
    Ok(format!(
        "{} nodes, {} edges isomorphic",
        a.nodes.len(),
        a.edges.len()
    ))
}

fn name_mangling() -> Outcome {
    let text = emit_builder_text(&import_ecore(JAVA_ECORE).map_err(err)?.builder);
    ensure(text == JAVA_GM, || {
        "schema text differs from fixtures/java.gm".into()
    })?;
    for name in [
        "node class java_Class ",
        "edge class java_Class_extends ",
        "edge class java_Class_methods ",
    ] {
        ensure(text.contains(name), || format!("missing `{name}`"))?;
    }
    Ok(format!(
        "{} declarations match the golden file",
        text.lines().filter(|l| l.contains("class ")).count()
    ))
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 9] = [
        ("correct extraction on tcp_small", correct_extraction),
        ("randomized differential test", randomized_differential),
        ("desk-scale performance on tcp_large", desk_scale),
        ("matcher oracle equivalence", matcher_oracle),
        ("rewrite semantics", rewrite_semantics),
        ("sequence semantics", sequence_laws),
        ("determinism", determinism),
        ("XMI round trip", xmi_round_trip),
        ("name mangling", name_mangling),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(e) => {
                println!("FAIL {name}: {e}");
                failed.push(name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
