//! Shared fixtures: corpus access and seeded random generators for
//! qualifiers, types, and small nat/bool programs.

#![allow(dead_code)]

use std::path::PathBuf;

use covcheck_core::{parse_type, PredicateRegistry, RefinementType, Solver, SolverConfig};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn corpus_src(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tg"))
        .collect();
    v.sort();
    v
}

pub fn solver() -> Solver {
    Solver::new(SolverConfig::default(), PredicateRegistry::builtin())
}

pub fn ty(s: &str) -> RefinementType {
    parse_type(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Numeric literals stay within `0..=LIT` so the oracle domain covers them.
pub const LIT: i64 = 3;

fn lit(rng: &mut ChaCha8Rng) -> i64 {
    rng.gen_range(0..=LIT)
}

/// Qualifier over `v` (and `x` when `with_x`) for a numeric base.
pub fn num_qual(rng: &mut ChaCha8Rng, with_x: bool, depth: u32) -> String {
    if depth > 0 && rng.gen_bool(0.4) {
        let a = num_qual(rng, with_x, depth - 1);
        let b = num_qual(rng, with_x, depth - 1);
        return match rng.gen_range(0..3) {
            0 => format!("({a} && {b})"),
            1 => format!("({a} || {b})"),
            _ => format!("not ({a})"),
        };
    }
    let k = lit(rng);
    let mut atoms = vec![
        format!("v == {k}"),
        format!("v < {k}"),
        format!("v > {k}"),
        format!("v <= {k}"),
        "v mod 2 == 0".to_string(),
        "true".to_string(),
        "false".to_string(),
    ];
    if with_x {
        atoms.extend(["v == x".to_string(), "v > x".to_string(), "v == x + 1".to_string(), format!("x < {k}")]);
    }
    atoms.choose(rng).unwrap().clone()
}

pub fn bool_qual(rng: &mut ChaCha8Rng, with_x: bool) -> String {
    let mut atoms = vec!["v", "not v", "true", "false", "v || not v"];
    if with_x {
        atoms.extend(["v <=> x > 1", "v && x == 0"]);
    }
    atoms.choose(rng).unwrap().to_string()
}

/// A pair of comparable base types (both coverage or both
/// overapproximate) over the same base.
pub fn type_pair(rng: &mut ChaCha8Rng, with_x: bool) -> (String, String) {
    let under = rng.gen_bool(0.5);
    let (base, q1, q2) = match rng.gen_range(0..5) {
        0 => ("bool", bool_qual(rng, with_x), bool_qual(rng, with_x)),
        1 | 2 => ("nat", num_qual(rng, with_x, 1), num_qual(rng, with_x, 1)),
        _ => ("int", num_qual(rng, with_x, 1), num_qual(rng, with_x, 1)),
    };
    let wrap = |q: &str| if under { format!("[v:{base} | {q}]") } else { format!("{{v:{base} | {q}}}") };
    (wrap(&q1), wrap(&q2))
}

/// Random closed program source for a single definition `p`, with its
/// coverage type. Bodies are small nat/bool let-chains over the generators.
pub struct ProgramGen {
    next: usize,
}

impl ProgramGen {
    pub fn new() -> Self {
        ProgramGen { next: 0 }
    }

    fn fresh(&mut self, stem: &str) -> String {
        self.next += 1;
        format!("{stem}{}", self.next)
    }

    fn nat_atom(&mut self, rng: &mut ChaCha8Rng, nats: &[String]) -> String {
        if !nats.is_empty() && rng.gen_bool(0.6) {
            nats.choose(rng).unwrap().clone()
        } else {
            lit(rng).to_string()
        }
    }

    pub fn nat_expr(&mut self, rng: &mut ChaCha8Rng, nats: &[String], bools: &[String], depth: u32) -> String {
        let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..8) };
        match pick {
            0 => self.nat_atom(rng, nats),
            1 => "nat_gen ()".into(),
            2 => {
                let a = self.nat_atom(rng, nats);
                let b = self.nat_atom(rng, nats);
                format!("{a} + {b}")
            }
            3 | 4 => {
                let x = self.fresh("n");
                let bound = self.nat_expr(rng, nats, bools, depth - 1);
                let mut inner = nats.to_vec();
                inner.push(x.clone());
                let body = self.nat_expr(rng, &inner, bools, depth - 1);
                format!("let ({x}: nat) = {bound} in {body}")
            }
            5 => {
                let c = self.fresh("c");
                let bound = self.bool_expr(rng, nats, bools);
                let mut inner = bools.to_vec();
                inner.push(c.clone());
                let t = self.nat_expr(rng, nats, &inner, depth - 1);
                let e = self.nat_expr(rng, nats, &inner, depth - 1);
                format!("let ({c}: bool) = {bound} in if {c} then {t} else {e}")
            }
            6 if !nats.is_empty() => {
                let s = nats.choose(rng).unwrap().clone();
                let m = self.fresh("m");
                let z = self.nat_expr(rng, nats, bools, depth - 1);
                let mut inner = nats.to_vec();
                inner.push(m.clone());
                let n = self.nat_expr(rng, &inner, bools, depth - 1);
                format!("match {s} with O -> {z} | S {m} -> {n}")
            }
            _ => {
                if rng.gen_bool(0.3) {
                    "err".into()
                } else {
                    "nat_gen ()".into()
                }
            }
        }
    }

    pub fn bool_expr(&mut self, rng: &mut ChaCha8Rng, nats: &[String], bools: &[String]) -> String {
        match rng.gen_range(0..5) {
            0 => "bool_gen ()".into(),
            1 => {
                let a = self.nat_atom(rng, nats);
                let b = self.nat_atom(rng, nats);
                format!("{a} < {b}")
            }
            2 => {
                let a = self.nat_atom(rng, nats);
                let b = self.nat_atom(rng, nats);
                format!("{a} == {b}")
            }
            3 if !bools.is_empty() => bools.choose(rng).unwrap().clone(),
            _ => if rng.gen_bool(0.5) { "true" } else { "false" }.into(),
        }
    }

    fn bool_body(&mut self, rng: &mut ChaCha8Rng, depth: u32) -> String {
        let x = self.fresh("n");
        let bound = self.nat_expr(rng, &[], &[], depth);
        let c = self.fresh("c");
        let nats = vec![x.clone()];
        let test = self.bool_expr(rng, &nats, &[]);
        let other = self.bool_expr(rng, &nats, &[]);
        format!("let ({x}: nat) = {bound} in let ({c}: bool) = {test} in if {c} then {other} else bool_gen ()")
    }

    /// `(source, result base)` of a program defining `p`.
    pub fn program(&mut self, rng: &mut ChaCha8Rng) -> (String, &'static str) {
        let depth = rng.gen_range(1..=3);
        if rng.gen_bool(0.75) {
            let body = self.nat_expr(rng, &[], &[], depth);
            let q = num_qual(rng, false, 1);
            (format!("val p : [v:nat | {q}]\nlet p = {body}\n"), "nat")
        } else {
            let body = self.bool_body(rng, depth - 1);
            let q = bool_qual(rng, false);
            (format!("val p : [v:bool | {q}]\nlet p = {body}\n"), "bool")
        }
    }
}
