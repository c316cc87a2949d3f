//! `.grs` script syntax: one command per line, `#` starts a comment line.

use grewrite::sequences::parse_seq;

use crate::{ErrorKind, ScriptError};

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    NewGraph,
    /// Schema files (`.ecore`, `.gm`) and at most one instance (`.xmi`).
    Import(Vec<String>),
    Include(String),
    Xgrs {
        seq: String,
        debug: bool,
    },
    /// `None` sends emitted text to standard output.
    RedirectEmit(Option<String>),
    Export(String),
    Dot {
        file: String,
        config: Option<String>,
    },
    Echo(String),
    Quit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub number: u32,
    pub command: Command,
}

fn usage(number: u32, text: &'static str) -> ScriptError {
    ScriptError::new(number, ErrorKind::Usage(text))
}

fn parse_line(number: u32, line: &str) -> Result<Option<Command>, ScriptError> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let args: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    let seq = |debug: bool, text: &str| -> Result<Command, ScriptError> {
        if text.is_empty() {
            return Err(usage(number, "xgrs <sequence>"));
        }
        parse_seq(text).map_err(|e| ScriptError::new(number, ErrorKind::Syntax(e)))?;
        Ok(Command::Xgrs {
            seq: text.to_string(),
            debug,
        })
    };
    let cmd = match word {
        "new" if rest == "graph" => Command::NewGraph,
        "new" => return Err(usage(number, "new graph")),
        "import" if !args.is_empty() => Command::Import(args),
        "import" => return Err(usage(number, "import <file>...")),
        "include" if args.len() == 1 => Command::Include(args[0].clone()),
        "include" => return Err(usage(number, "include <rule file>")),
        "xgrs" => seq(false, rest)?,
        "debug" => match rest.split_once(char::is_whitespace) {
            Some(("xgrs", s)) => seq(true, s.trim())?,
            _ => return Err(usage(number, "debug xgrs <sequence>")),
        },
        "redirect" => match args.as_slice() {
            [emit, file] if emit == "emit" => {
                Command::RedirectEmit((file != "-").then(|| file.clone()))
            }
            _ => return Err(usage(number, "redirect emit <file>|-")),
        },
        "export" if args.len() == 1 => Command::Export(args[0].clone()),
        "export" => return Err(usage(number, "export <file>")),
        "dot" => match args.as_slice() {
            [file] => Command::Dot {
                file: file.clone(),
                config: None,
            },
            [file, config] => Command::Dot {
                file: file.clone(),
                config: Some(config.clone()),
            },
            _ => return Err(usage(number, "dot <file> [layout.toml]")),
        },
        "echo" => Command::Echo(rest.to_string()),
        "quit" | "exit" if rest.is_empty() => Command::Quit,
        _ => {
            return Err(ScriptError::new(
                number,
                ErrorKind::UnknownCommand(word.to_string()),
            ))
        }
    };
    Ok(Some(cmd))
}

/// Parses a whole script; nothing runs if any line is malformed.
pub fn parse_script(text: &str) -> Result<Vec<Line>, ScriptError> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let number = i as u32 + 1;
        if let Some(command) = parse_line(number, l)? {
            out.push(Line { number, command });
        }
    }
    Ok(out)
}
