//! Script execution.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use grewrite::model_io::{
    export_dot, export_state_machine_xmi, import_ecore, import_xmi, LayoutConfig,
};
use grewrite::rules::{parse_rules, Engine, RewriteEnv, RuleSet};
use grewrite::schema_text::parse_schema_text;
use grewrite::sequences::{parse_seq, Executor};
use grewrite::trace::{to_jsonl, TraceRecord};
use grewrite::{Graph, Schema, SchemaBuilder};

use crate::script::{parse_script, Command, Line};
use crate::{ErrorKind, Options, Report, ScriptError, Timing};

/// Interpreter state for one script. Relative paths resolve against `base`.
pub struct Shell<'o> {
    opts: Options,
    base: PathBuf,
    /// Default trace file for `debug xgrs`.
    default_trace: PathBuf,
    out: &'o mut dyn Write,
    builder: SchemaBuilder,
    schema: Option<Arc<Schema>>,
    graph: Option<Graph>,
    rules: RuleSet,
    engine: Option<Engine>,
    env: RewriteEnv,
    emit_to: Option<PathBuf>,
    trace_started: bool,
    report: Report,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ErrorKind + '_ {
    move |source| ErrorKind::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<String, ErrorKind> {
    fs::read_to_string(path).map_err(io(path))
}

fn append(path: &Path, text: &str) -> Result<(), ErrorKind> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io(path))?;
    f.write_all(text.as_bytes()).map_err(io(path))
}

fn ms(d: Duration) -> String {
    format!("{:.3} ms", d.as_secs_f64() * 1e3)
}

impl<'o> Shell<'o> {
    /// `script_path` names the script, for the default trace file name; it
    /// is not read.
    pub fn new(opts: Options, script_path: &Path, out: &'o mut dyn Write) -> Shell<'o> {
        let base = script_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let stem = script_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("script");
        let default_trace = base.join(format!("{stem}.trace.jsonl"));
        Shell {
            opts,
            base,
            default_trace,
            out,
            builder: SchemaBuilder::new(),
            schema: None,
            graph: None,
            rules: RuleSet::default(),
            engine: None,
            env: RewriteEnv::new(),
            emit_to: None,
            trace_started: false,
            report: Report::default(),
        }
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    fn path(&self, p: &str) -> PathBuf {
        self.base.join(p)
    }

    fn say(&mut self, text: &str, elapsed: Option<Duration>) {
        if self.opts.quiet {
            return;
        }
        let _ = match elapsed {
            Some(d) if self.opts.time => writeln!(self.out, "{text} ({})", ms(d)),
            _ => writeln!(self.out, "{text}"),
        };
    }

    /// Parses and runs a script text.
    pub fn run_text(&mut self, text: &str) -> Result<Report, ScriptError> {
        let lines = parse_script(text)?;
        self.run_lines(&lines)
    }

    pub fn run_lines(&mut self, lines: &[Line]) -> Result<Report, ScriptError> {
        for l in lines {
            let start = Instant::now();
            let quit = self
                .exec(&l.command)
                .map_err(|kind| ScriptError::new(l.number, kind))?;
            let elapsed = start.elapsed();
            let name = match &l.command {
                Command::NewGraph => "new graph",
                Command::Import(_) => "import",
                Command::Include(_) => "include",
                Command::Xgrs { debug: false, .. } => "xgrs",
                Command::Xgrs { debug: true, .. } => "debug xgrs",
                Command::RedirectEmit(_) => "redirect emit",
                Command::Export(_) => "export",
                Command::Dot { .. } => "dot",
                Command::Echo(_) => "echo",
                Command::Quit => "quit",
            };
            match l.command {
                Command::Import(_) => self.report.import += elapsed,
                Command::Xgrs { .. } => self.report.extraction += elapsed,
                _ => {}
            }
            self.report.total += elapsed;
            self.report.timings.push(Timing {
                line: l.number,
                command: name,
                elapsed,
            });
            if quit {
                break;
            }
        }
        if let Some(g) = &self.graph {
            self.report.nodes = g.node_count();
            self.report.edges = g.edge_count();
        }
        if self.opts.time && !self.opts.quiet {
            let r = &self.report;
            let _ = writeln!(
                self.out,
                "timing: import {}, extraction {}, total {}",
                ms(r.import),
                ms(r.extraction),
                ms(r.total)
            );
        }
        Ok(self.report.clone())
    }

    /// Runs one command; `Ok(true)` means stop.
    fn exec(&mut self, cmd: &Command) -> Result<bool, ErrorKind> {
        let start = Instant::now();
        match cmd {
            Command::NewGraph => {
                self.builder = SchemaBuilder::new();
                self.schema = None;
                self.graph = None;
                self.rules = RuleSet::default();
                self.engine = None;
                self.env = RewriteEnv::new();
                self.say("new graph", None);
            }
            Command::Import(files) => {
                for f in files {
                    self.import(f)?;
                }
                let (n, e) = self
                    .graph
                    .as_ref()
                    .map_or((0, 0), |g| (g.node_count(), g.edge_count()));
                self.say(
                    &format!("import: {} file(s), {n} nodes, {e} edges", files.len()),
                    Some(start.elapsed()),
                );
            }
            Command::Include(f) => {
                let path = self.path(f);
                let src = read(&path)?;
                let set = parse_rules(&src).map_err(|source| ErrorKind::RuleSyntax {
                    path: path.clone(),
                    source,
                })?;
                for (name, r) in set.rules {
                    if self.rules.rules.contains_key(&name)
                        || self.rules.patterns.contains_key(&name)
                    {
                        return Err(ErrorKind::DuplicateRule {
                            path,
                            what: "rule",
                            name,
                        });
                    }
                    self.rules.rules.insert(name, r);
                }
                for (name, p) in set.patterns {
                    if self.rules.rules.contains_key(&name)
                        || self.rules.patterns.contains_key(&name)
                    {
                        return Err(ErrorKind::DuplicateRule {
                            path,
                            what: "pattern",
                            name,
                        });
                    }
                    self.rules.patterns.insert(name, p);
                }
                self.engine = None;
                self.say(&format!("include {f}"), None);
            }
            Command::Xgrs { seq, debug } => self.xgrs(seq, *debug)?,
            Command::RedirectEmit(target) => {
                self.emit_to = match target {
                    Some(f) => {
                        let path = self.path(f);
                        fs::write(&path, "").map_err(io(&path))?;
                        Some(path)
                    }
                    None => None,
                };
            }
            Command::Export(f) => {
                let path = self.path(f);
                let xml = export_state_machine_xmi(self.graph_mut()?)?;
                fs::write(&path, xml).map_err(io(&path))?;
                self.say(&format!("export {f}"), Some(start.elapsed()));
            }
            Command::Dot { file, config } => {
                let layout = match config {
                    Some(c) => {
                        let path = self.path(c);
                        let text = read(&path)?;
                        let layout =
                            LayoutConfig::from_toml(&text).map_err(|source| ErrorKind::Layout {
                                path: path.clone(),
                                source,
                            })?;
                        let schema = self.graph_mut()?.schema().clone();
                        layout
                            .validate(&schema)
                            .map_err(|source| ErrorKind::Layout { path, source })?;
                        layout
                    }
                    None => LayoutConfig::default(),
                };
                let path = self.path(file);
                let dot = export_dot(self.graph_mut()?, &layout);
                fs::write(&path, dot).map_err(io(&path))?;
                self.say(&format!("dot {file}"), Some(start.elapsed()));
            }
            Command::Echo(text) => {
                let _ = writeln!(self.out, "{text}");
            }
            Command::Quit => return Ok(true),
        }
        Ok(false)
    }

    fn import(&mut self, f: &str) -> Result<(), ErrorKind> {
        let path = self.path(f);
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default();
        if !matches!(ext, "ecore" | "gm" | "xmi") {
            return Err(ErrorKind::FileType { path });
        }
        let text = read(&path)?;
        if ext == "xmi" {
            if self.graph.is_some() {
                return Err(ErrorKind::GraphExists);
            }
            let schema = self.schema()?;
            let imported = import_xmi(&text, schema).map_err(|source| ErrorKind::Xmi {
                path: path.clone(),
                source,
            })?;
            for w in &imported.warnings {
                self.say(&format!("warning: {}: {w}", path.display()), None);
            }
            self.graph = Some(imported.graph);
            return Ok(());
        }
        if self.schema.is_some() {
            return Err(ErrorKind::SchemaFrozen);
        }
        let part = if ext == "ecore" {
            let imported = import_ecore(&text).map_err(|source| ErrorKind::Ecore {
                path: path.clone(),
                source,
            })?;
            for w in &imported.warnings {
                self.say(&format!("warning: {}: {w}", path.display()), None);
            }
            imported.builder
        } else {
            parse_schema_text(&text).map_err(|source| ErrorKind::SchemaText { path, source })?
        };
        self.builder.merge(part)?;
        Ok(())
    }

    /// The schema, built from the imports so far and fixed from then on.
    fn schema(&mut self) -> Result<Arc<Schema>, ErrorKind> {
        if let Some(s) = &self.schema {
            return Ok(s.clone());
        }
        let s = Arc::new(self.builder.clone().build()?);
        self.schema = Some(s.clone());
        Ok(s)
    }

    /// The host graph; an empty one if no model was imported.
    fn graph_mut(&mut self) -> Result<&mut Graph, ErrorKind> {
        if self.graph.is_none() {
            let schema = self.schema()?;
            self.graph = Some(Graph::new(schema));
        }
        Ok(self.graph.as_mut().expect("just set"))
    }

    fn xgrs(&mut self, text: &str, debug: bool) -> Result<(), ErrorKind> {
        let start = Instant::now();
        let seq = parse_seq(text)?;
        self.graph_mut()?;
        if self.engine.is_none() {
            let mut engine = Engine::new(self.schema()?, &self.rules)?;
            engine.set_reverse_candidates(self.opts.reverse_order);
            self.engine = Some(engine);
        }
        let trace_path = match (&self.opts.trace, debug) {
            (Some(p), _) => Some(p.clone()),
            (None, true) => Some(self.default_trace.clone()),
            (None, false) => None,
        };
        let engine = self.engine.as_ref().expect("compiled above");
        let graph = self.graph.as_mut().expect("created above");
        let mut records: Vec<TraceRecord> = Vec::new();
        let mut ex = Executor::new(engine, graph, &mut self.env);
        if trace_path.is_some() {
            ex = ex.with_trace(&mut records);
        }
        let result = ex.run(&seq);
        let applications = ex.applications();
        self.report.applications += applications;

        // whatever happened, keep the emitted text and trace so far
        let emitted = std::mem::take(&mut self.env.emitted);
        match &self.emit_to {
            Some(path) => append(path, &emitted)?,
            None => {
                let _ = self.out.write_all(emitted.as_bytes());
            }
        }
        if let Some(path) = trace_path {
            if !self.trace_started {
                fs::write(&path, "").map_err(io(&path))?;
                self.trace_started = true;
            }
            append(&path, &to_jsonl(&records))?;
            self.report.trace_records += records.len();
            self.report.trace_file = Some(path);
        }
        let ok = result?;
        self.say(
            &format!("xgrs: {ok}, {applications} rule applications"),
            Some(start.elapsed()),
        );
        Ok(())
    }
}

/// Reads and runs the script at `path`.
pub fn run_script(path: &Path, opts: Options, out: &mut dyn Write) -> Result<Report, ScriptError> {
    let text = fs::read_to_string(path).map_err(|source| {
        ScriptError::new(
            0,
            ErrorKind::Io {
                path: path.to_path_buf(),
                source,
            },
        )
    })?;
    Shell::new(opts, path, out).run_text(&text)
}
