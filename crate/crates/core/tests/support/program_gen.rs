//! Seeded random mini-Java programs.

use grewrite::case::program::{Program, Stmt};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Size {
    pub classes: usize,
    pub statements: usize,
}

const METHODS: &[&str] = &["run", "run", "open", "close", "send", "abort", "timeout"];
const CASES: &[&str] = &["SYN", "ACK", "FIN", "RST", "PSH"];
const EXCEPTIONS: &[&str] = &["IOException", "TimeoutException"];

struct Gen {
    rng: ChaCha8Rng,
    classes: usize,
    /// `State` and everything below it.
    tree: Vec<usize>,
    enums: Vec<usize>,
    budget: usize,
}

impl Gen {
    /// Mostly classes of the `State` tree.
    fn class(&mut self) -> usize {
        if self.rng.gen_bool(0.8) {
            *self.tree.choose(&mut self.rng).unwrap()
        } else {
            self.rng.gen_range(0..self.classes)
        }
    }

    fn stmt(&mut self, depth: usize) -> Stmt {
        self.budget = self.budget.saturating_sub(1);
        let compound = depth < 4 && self.budget > 0;
        match self.rng.gen_range(0..if compound { 10 } else { 6 }) {
            0..=2 => Stmt::Activate(self.class()),
            3 | 4 => {
                let enumeration = self.rng.gen_range(0..self.enums.len());
                Stmt::Send {
                    enumeration,
                    constant: self.rng.gen_range(0..self.enums[enumeration]),
                }
            }
            5 => Stmt::Call(
                ["log", "send", "activate", "Instance"]
                    .choose(&mut self.rng)
                    .unwrap()
                    .to_string(),
            ),
            6 => Stmt::Block(self.body(depth + 1)),
            7 | 8 => {
                let n = self.rng.gen_range(0..4);
                Stmt::Switch(
                    (0..n)
                        .map(|_| {
                            (
                                CASES.choose(&mut self.rng).unwrap().to_string(),
                                self.body(depth + 1),
                            )
                        })
                        .collect(),
                )
            }
            _ => {
                let body = self.body(depth + 1);
                let n = self.rng.gen_range(0..3);
                let catches = (0..n)
                    .map(|_| {
                        (
                            EXCEPTIONS.choose(&mut self.rng).unwrap().to_string(),
                            self.body(depth + 1),
                        )
                    })
                    .collect();
                Stmt::Try { body, catches }
            }
        }
    }

    fn body(&mut self, depth: usize) -> Vec<Stmt> {
        let n = self.rng.gen_range(0..4).min(self.budget);
        (0..n).map(|_| self.stmt(depth)).collect()
    }
}

/// A program with one abstract `State` class, a random class hierarchy
/// partly below it, and methods full of `activate` and `send` calls.
pub fn generate(seed: u64, size: Size) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Program::default();
    let enums: Vec<usize> = (0..rng.gen_range(1..=3))
        .map(|i| {
            let n = rng.gen_range(1..=5);
            let names: Vec<String> = (0..n).map(|k| format!("K{i}_{k}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            p.enumeration(&format!("Flags{i}"), &refs);
            n
        })
        .collect();

    let classes = size.classes.max(2);
    p.class("State", true, None);
    let mut tree = vec![0];
    for i in 1..classes {
        let extends = match rng.gen_range(0..10) {
            0 => None,
            1 | 2 => Some(rng.gen_range(0..i)),
            _ => Some(*tree.choose(&mut rng).unwrap()),
        };
        if extends.is_some_and(|e| tree.contains(&e)) {
            tree.push(i);
        }
        // names repeat now and then, so duplicate state names occur
        let name = format!("S{}", rng.gen_range(0..classes * 3 / 2));
        p.class(&name, rng.gen_bool(0.2), extends);
    }

    let mut g = Gen {
        rng,
        classes,
        tree,
        enums,
        budget: size.statements,
    };
    while g.budget > 0 {
        let c = g.class();
        let name = *METHODS.choose(&mut g.rng).unwrap();
        let body = g.body(0);
        p.method(c, name, body);
    }
    p
}
