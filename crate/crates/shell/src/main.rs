use std::alloc::{GlobalAlloc, Layout, System};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use grewrite::case::{import_program, schema, Extraction};
use grewrite::model_io::{export_dot, LayoutConfig};
use grewrite_shell::shell::run_script;
use grewrite_shell::Options;

/// Counts live and peak heap bytes for the timing report.
struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

fn peak_kib() -> usize {
    PEAK.load(Ordering::Relaxed) / 1024
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SeedOrder {
    Creation,
    Reverse,
}

#[derive(Parser, Debug)]
#[command(
    name = "grshell",
    version,
    about = "Runs grewrite scripts",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// Script to run
    #[arg(long = "script", value_name = "FILE")]
    script_flag: Option<PathBuf>,
    /// Script to run
    #[arg(value_name = "SCRIPT")]
    script: Option<PathBuf>,
    /// Only print errors and emitted text
    #[arg(long)]
    quiet: bool,
    /// Print per-command and per-phase timings
    #[arg(long)]
    time: bool,
    /// Trace every xgrs command into this file
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Order in which match candidates are scanned
    #[arg(long, value_enum, default_value = "creation")]
    seed_order: SeedOrder,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Extracts the state machine of a mini-Java program with the bundled rules
    Extract {
        /// Program graph in XMI
        program: PathBuf,
        /// Where to write the state machine XMI (default: standard output)
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also render the machine as DOT
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn extract(
    program: PathBuf,
    out: Option<PathBuf>,
    dot: Option<PathBuf>,
    quiet: bool,
) -> Result<(), String> {
    let text =
        std::fs::read_to_string(&program).map_err(|e| format!("{}: {e}", program.display()))?;
    let t0 = Instant::now();
    let schema = schema().map_err(|e| e.to_string())?;
    let mut g =
        import_program(&text, schema.clone()).map_err(|e| format!("{}: {e}", program.display()))?;
    let import = t0.elapsed();
    let ex = Extraction::new(schema).map_err(|e| e.to_string())?;
    let t1 = Instant::now();
    let summary = ex.run_all(&mut g, None).map_err(|e| e.to_string())?;
    let extraction = t1.elapsed();
    match &out {
        Some(p) => std::fs::write(p, &summary.xmi).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{}", summary.xmi),
    }
    if let Some(p) = &dot {
        let mut env = grewrite::rules::RewriteEnv::new();
        ex.run_sequence(&mut g, &mut env, "[transitionToEdge]")
            .map_err(|e| e.to_string())?;
        let layout =
            LayoutConfig::from_toml(grewrite::case::MACHINE_LAYOUT).map_err(|e| e.to_string())?;
        std::fs::write(p, export_dot(&g, &layout)).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    if !quiet {
        eprintln!(
            "{} states, {} transitions; import {:.3} ms, extraction {:.3} ms, peak heap {} KiB",
            summary.states,
            summary.transitions,
            import.as_secs_f64() * 1e3,
            extraction.as_secs_f64() * 1e3,
            peak_kib()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(Sub::Extract {
        program,
        out,
        dot,
        quiet,
    }) = cli.command
    {
        return match extract(program, out, dot, quiet) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    let script = match (cli.script_flag, cli.script) {
        (Some(s), None) | (None, Some(s)) => s,
        _ => {
            eprintln!(
                "usage: grshell [OPTIONS] <SCRIPT> | grshell extract <PROGRAM>  (see --help)"
            );
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        quiet: cli.quiet,
        time: cli.time,
        trace: cli.trace,
        reverse_order: matches!(cli.seed_order, SeedOrder::Reverse),
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let res = run_script(&script, opts.clone(), &mut out);
    let _ = out.flush();
    match res {
        Ok(report) => {
            if opts.time && !opts.quiet {
                let _ = writeln!(out, "peak heap: {} KiB", peak_kib());
            }
            if !opts.quiet {
                let _ = writeln!(out, "graph: {} nodes, {} edges", report.nodes, report.edges);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", script.display());
            ExitCode::from(1)
        }
    }
}
