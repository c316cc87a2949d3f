//! Copies of the bundled case files in a scratch directory.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CORE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core");

pub struct Scratch {
    pub dir: tempfile::TempDir,
}

impl Scratch {
    /// `fixtures/`, `rules/`, `scripts/` and `layout/` of the core crate.
    pub fn new() -> Scratch {
        let dir = tempfile::tempdir().unwrap();
        for sub in ["fixtures", "rules", "scripts", "layout"] {
            std::fs::create_dir(dir.path().join(sub)).unwrap();
            for entry in std::fs::read_dir(Path::new(CORE).join(sub)).unwrap() {
                let entry = entry.unwrap();
                if entry.file_type().unwrap().is_file() {
                    std::fs::copy(entry.path(), dir.path().join(sub).join(entry.file_name()))
                        .unwrap();
                }
            }
        }
        Scratch { dir }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn read(&self, rel: &str) -> String {
        std::fs::read_to_string(self.path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    pub fn write(&self, rel: &str, text: &str) {
        std::fs::write(self.path(rel), text).unwrap();
    }

    pub fn shell(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_grshell"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}
