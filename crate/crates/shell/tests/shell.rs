mod support {
    pub mod workspace;
}

use grewrite::case::oracle::brute_force_extract;
use grewrite::case::{import_program, read_machine, schema, TCP_SMALL_XMI};
use grewrite::model_io::import_xmi;
use grewrite::trace::{from_jsonl, replay, GraphSnapshot, TraceRecord};
use grewrite_shell::shell::run_script;
use grewrite_shell::{parse_script, Command, ErrorKind, Options, Shell};
use support::workspace::Scratch;

fn quiet() -> Options {
    Options {
        quiet: true,
        ..Options::default()
    }
}

#[test]
fn shipped_script_writes_the_oracle_machine() {
    let ws = Scratch::new();
    let out = ws.shell(&["scripts/reengineering.grs"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let xmi = ws.read("scripts/tcp_statemachine.xmi");
    let back = import_xmi(&xmi, schema().unwrap()).unwrap().graph;
    let program = import_program(TCP_SMALL_XMI, schema().unwrap()).unwrap();
    assert_eq!(read_machine(&back), brute_force_extract(&program).unwrap());
    let dot = ws.read("scripts/tcp_statemachine.dot");
    assert!(dot.contains("[label=\"open / SYN\"]"), "{dot}");
}

#[test]
fn unknown_command_is_a_line_numbered_error() {
    let ws = Scratch::new();
    ws.write("bad.grs", "new graph\n\n# fine so far\nfrobnicate now\n");
    let out = ws.shell(&["bad.grs"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 4: unknown command `frobnicate`"),
        "{err}"
    );
}

#[test]
fn usage_errors_exit_with_2() {
    let ws = Scratch::new();
    assert_eq!(ws.shell(&[]).status.code(), Some(2));
    assert_eq!(
        ws.shell(&["--seed-order", "sideways", "x.grs"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ws.shell(&["--script", "a.grs", "b.grs"]).status.code(),
        Some(2)
    );
    // a missing script is a failed run, not a usage error
    assert_eq!(ws.shell(&["missing.grs"]).status.code(), Some(1));
}

#[test]
fn failing_command_stops_the_script() {
    let ws = Scratch::new();
    ws.write(
        "s.grs",
        "import fixtures/statemachine.ecore\nxgrs nosuchrule\necho unreachable\n",
    );
    let mut out = Vec::new();
    let err = run_script(&ws.path("s.grs"), Options::default(), &mut out).unwrap_err();
    assert_eq!(err.line, 2);
    assert!(matches!(*err.kind, ErrorKind::Sequence(_)), "{err}");
    assert!(!String::from_utf8(out).unwrap().contains("unreachable"));
}

#[test]
fn script_parser() {
    let lines = parse_script(
        "# c\nnew graph\n  debug xgrs [a] ;> b\nredirect emit -\ndot x.dot\necho hi there\nquit\n",
    )
    .unwrap();
    let cmds: Vec<_> = lines
        .iter()
        .map(|l| (l.number, l.command.clone()))
        .collect();
    assert_eq!(
        cmds,
        vec![
            (2, Command::NewGraph),
            (
                3,
                Command::Xgrs {
                    seq: "[a] ;> b".into(),
                    debug: true
                }
            ),
            (4, Command::RedirectEmit(None)),
            (
                5,
                Command::Dot {
                    file: "x.dot".into(),
                    config: None
                }
            ),
            (6, Command::Echo("hi there".into())),
            (7, Command::Quit),
        ]
    );
    for (src, line) in [
        ("xgrs a ;>", 1),
        ("new\n", 1),
        ("\nimport", 2),
        ("redirect x y", 1),
        ("debug a", 1),
    ] {
        assert_eq!(parse_script(src).unwrap_err().line, line, "{src}");
    }
}

#[test]
fn rule_syntax_errors_name_file_line_and_column() {
    let ws = Scratch::new();
    ws.write("bad.grg", "rule ok { }\nrule r {\n  a:A -e:E- b;\n}\n");
    ws.write("s.grs", "include bad.grg\n");
    let err = run_script(&ws.path("s.grs"), quiet(), &mut Vec::new()).unwrap_err();
    let text = err.to_string();
    assert!(
        text.starts_with("line 1: ") && text.contains("bad.grg:3:"),
        "{text}"
    );
}

#[test]
fn quit_stops_and_echo_prints() {
    let ws = Scratch::new();
    ws.write("s.grs", "echo one\nquit\necho two\n");
    let mut out = Vec::new();
    run_script(&ws.path("s.grs"), quiet(), &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "one\n");
}

#[test]
fn schema_is_fixed_after_the_model() {
    let ws = Scratch::new();
    ws.write(
        "s.grs",
        "import fixtures/java.ecore fixtures/statemachine.ecore fixtures/helpers.gm fixtures/tcp_small.xmi\nimport fixtures/helpers.gm\n",
    );
    let err = run_script(&ws.path("s.grs"), quiet(), &mut Vec::new()).unwrap_err();
    assert!(matches!(*err.kind, ErrorKind::SchemaFrozen));
    ws.write(
        "t.grs",
        "import fixtures/java.ecore\nimport fixtures/x.txt\n",
    );
    let err = run_script(&ws.path("t.grs"), quiet(), &mut Vec::new()).unwrap_err();
    assert!(matches!(*err.kind, ErrorKind::FileType { .. }));
}

const DEBUG: &str = "new graph
import ../fixtures/java.ecore ../fixtures/statemachine.ecore ../fixtures/helpers.gm ../fixtures/tcp_small.xmi
include ../rules/extract.grg
xgrs createStates
debug xgrs [createTransition] ;> [triggerFromMethod]
";

#[test]
fn debug_xgrs_writes_a_replayable_trace() {
    let ws = Scratch::new();
    ws.write("scripts/debug.grs", DEBUG);
    let mut out = Vec::new();
    let mut shell = Shell::new(quiet(), &ws.path("scripts/debug.grs"), &mut out);
    let report = shell.run_text(DEBUG).unwrap();
    let final_graph = GraphSnapshot::of(shell.graph().unwrap());
    drop(shell);

    let path = ws.path("scripts/debug.trace.jsonl");
    assert_eq!(report.trace_file.as_deref(), Some(path.as_path()));
    let records = from_jsonl(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(records.len(), report.trace_records);
    assert!(matches!(records[0], TraceRecord::Snapshot { .. }));
    let created = records
        .iter()
        .filter(
            |r| matches!(r, TraceRecord::RuleApplied { rule, .. } if rule == "createTransition"),
        )
        .count();
    let program = import_program(TCP_SMALL_XMI, schema().unwrap()).unwrap();
    assert_eq!(
        created,
        brute_force_extract(&program).unwrap().transitions.len()
    );
    assert_eq!(replay(&records).unwrap(), final_graph);

    // bindings carry element classes
    let TraceRecord::RuleApplied { bindings, .. } = &records[2] else {
        panic!("{:?}", records[2])
    };
    assert!(
        bindings
            .iter()
            .any(|b| b.class.as_deref() == Some("java_ExpressionStatement")),
        "{bindings:?}"
    );
}

#[test]
fn zero_event_debug_run_is_a_snapshot() {
    let ws = Scratch::new();
    ws.write(
        "s.grs",
        "import fixtures/statemachine.ecore\ndebug xgrs true\n",
    );
    let report = run_script(&ws.path("s.grs"), quiet(), &mut Vec::new()).unwrap();
    let records = from_jsonl(&ws.read("s.trace.jsonl")).unwrap();
    assert_eq!(report.trace_records, 1);
    assert!(matches!(&records[..], [TraceRecord::Snapshot { graph }] if graph.nodes.is_empty()));
}

#[test]
fn emitted_text_follows_redirects() {
    let ws = Scratch::new();
    let rules = "rule hello { modify { emit(\"hello\\n\"); } }\n";
    ws.write("r.grg", rules);
    ws.write("s.grs", "include r.grg\nxgrs hello\nredirect emit out.txt\nxgrs hello ;> hello\nredirect emit -\nxgrs hello\n");
    let mut out = Vec::new();
    run_script(&ws.path("s.grs"), quiet(), &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "hello\nhello\n");
    assert_eq!(ws.read("out.txt"), "hello\nhello\n");
}

#[test]
fn timing_report_is_consistent() {
    let ws = Scratch::new();
    let mut out = Vec::new();
    let opts = Options {
        time: true,
        ..Options::default()
    };
    let r = run_script(&ws.path("scripts/reengineering.grs"), opts, &mut out).unwrap();
    assert!(r.total >= r.import + r.extraction);
    assert_eq!(
        r.timings
            .iter()
            .map(|t| t.elapsed)
            .sum::<std::time::Duration>(),
        r.total
    );
    assert_eq!(
        r.timings.iter().filter(|t| t.command == "import").count(),
        2
    );
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("timing: import "), "{text}");
}

fn full_run(ws: &Scratch, extra: &[&str]) -> (String, String, String) {
    let mut args = vec!["--quiet", "--trace", "run.trace.jsonl"];
    args.extend_from_slice(extra);
    args.push("scripts/reengineering.grs");
    let out = ws.shell(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (
        ws.read("scripts/tcp_statemachine.xmi"),
        ws.read("scripts/tcp_statemachine.dot"),
        ws.read("run.trace.jsonl"),
    )
}

#[test]
fn runs_are_byte_identical() {
    let a = full_run(&Scratch::new(), &[]);
    let b = full_run(&Scratch::new(), &[]);
    assert!(a == b);
    let reversed = full_run(&Scratch::new(), &["--seed-order", "reverse"]);
    assert!(a == reversed);
}

#[test]
fn extract_subcommand() {
    let ws = Scratch::new();
    let out = ws.shell(&[
        "extract",
        "fixtures/tcp_small.xmi",
        "--out",
        "m.xmi",
        "--dot",
        "m.dot",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.starts_with("11 states, 22 transitions; import "),
        "{err}"
    );
    assert!(err.contains("peak heap"));
    ws.shell(&["--quiet", "scripts/reengineering.grs"]);
    assert_eq!(ws.read("m.xmi"), ws.read("scripts/tcp_statemachine.xmi"));
    assert_eq!(ws.read("m.dot"), ws.read("scripts/tcp_statemachine.dot"));
    assert_eq!(ws.shell(&["extract", "nope.xmi"]).status.code(), Some(1));
}
