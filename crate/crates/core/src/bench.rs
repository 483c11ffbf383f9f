//! Desk-scale timing of the reference interpreter against converted
//! procedures.
//!
//! Every row is checked before its timing counts: both engines must agree on
//! the answers. When a query has infinitely many answers the two engines may
//! list them in different orders, so a prefix that differs is accepted only if
//! each engine's answers all show up early in the other's stream.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::convert::{convert, Procs};
use crate::corpus;
use crate::goal::Program;
use crate::interp::{answers, query, Reification};
use crate::modes::{Direction, Mode};
use crate::normal::normalize;
use crate::parse::parse_ground;
use crate::schema::GroundValue;

pub const SUITES: [&str; 3] = ["add", "sort", "typecheck"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Ref,
    Converted,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Ref => "ref",
            Engine::Converted => "converted",
        })
    }
}

/// One query of a suite. `n` is the number of answers requested; `None`
/// means all of them.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub suite: &'static str,
    pub file: &'static str,
    pub rel: &'static str,
    pub dir: &'static str,
    pub inputs: Vec<String>,
    pub n: Option<usize>,
    pub param: usize,
}

impl BenchCase {
    pub fn label(&self) -> String {
        format!("{}@{}", self.rel, self.dir)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub suite: String,
    pub query: String,
    pub engine: Engine,
    pub param: usize,
    pub median_ns: u128,
    pub reps: usize,
    pub answers_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unknown suite `{0}` (expected add, sort, typecheck or all)")]
    UnknownSuite(String),
    #[error("{query} with parameter {param}: engines disagree on the answers")]
    HashMismatch { query: String, param: usize },
    #[error("{0}")]
    Setup(String),
}

fn nat(k: usize) -> String {
    format!("{}O{}", "S(".repeat(k), ")".repeat(k))
}

fn sorted_list(len: usize) -> String {
    (0..len).rev().fold("Nil".to_string(), |acc, k| format!("Cons({}, {acc})", nat(k)))
}

/// The queries of a suite, or of every suite for `all`.
pub fn suite_cases(suite: &str) -> Result<Vec<BenchCase>, BenchError> {
    let case = |suite, file, rel, dir, inputs: Vec<String>, n, param| BenchCase {
        suite,
        file,
        rel,
        dir,
        inputs,
        n,
        param,
    };
    let mut out = Vec::new();
    match suite {
        "add" => {
            for dir in ["ioo", "oio"] {
                for e in 4..=10 {
                    let n = 1usize << e;
                    out.push(case("add", "addo", "addo", dir, vec![nat(2)], Some(n), n));
                }
            }
            for e in [4, 6, 8, 10] {
                let k = 1usize << e;
                out.push(case("add", "addo", "addo", "iio", vec![nat(k), nat(k)], Some(1), k));
                out.push(case("add", "addo", "addo", "ioi", vec![nat(k), nat(2 * k)], Some(1), k));
            }
        }
        "sort" => {
            for len in 1..=6 {
                out.push(case("sort", "sort", "sorto", "oi", vec![sorted_list(len)], None, len));
            }
        }
        "typecheck" => {
            for n in [10, 20, 50] {
                out.push(case("typecheck", "typecheck", "typecheck", "oi", vec!["TInt".into()], Some(n), n));
                out.push(case(
                    "typecheck",
                    "typecheck",
                    "typeo",
                    "ioi",
                    vec!["Bind(TInt, Empty)".into(), "TInt".into()],
                    Some(n),
                    n,
                ));
            }
        }
        "all" => {
            for s in SUITES {
                out.extend(suite_cases(s)?);
            }
        }
        other => return Err(BenchError::UnknownSuite(other.to_string())),
    }
    Ok(out)
}

/// Order-independent digest of an answer list.
pub fn answers_hash(p: &Program, answers: &[Vec<GroundValue>]) -> String {
    let mut shown: Vec<String> = answers
        .iter()
        .map(|t| t.iter().map(|g| p.schema.show_ground(g)).collect::<Vec<_>>().join(", "))
        .collect();
    shown.sort();
    let mut h = DefaultHasher::new();
    shown.hash(&mut h);
    format!("{:016x}", h.finish())
}

/// A case with its program parsed, its direction compiled and its inputs
/// resolved, ready to be timed.
pub struct Prepared {
    pub case: BenchCase,
    pub program: Program,
    pub procs: Procs,
    pub dir: Direction,
    pub inputs: Vec<GroundValue>,
}

pub fn prepare(case: &BenchCase) -> Result<Prepared, BenchError> {
    let setup = |e: String| BenchError::Setup(format!("{}: {e}", case.label()));
    let program = corpus::load(case.file);
    let dir = Direction::parse(case.rel, case.dir).map_err(|e| setup(e.to_string()))?;
    let np = normalize(&program);
    let (procs, _) = convert(&np, &dir).map_err(|e| setup(e.to_string()))?;
    let inputs = case
        .inputs
        .iter()
        .map(|t| parse_ground(&program.schema, t).map_err(|e| setup(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Prepared {
        case: case.clone(),
        program,
        procs,
        dir,
        inputs,
    })
}

impl Prepared {
    fn query_args(&self) -> Vec<Option<GroundValue>> {
        let mut ins = self.inputs.iter();
        self.dir
            .modes
            .iter()
            .map(|m| if *m == Mode::In { ins.next().cloned() } else { None })
            .collect()
    }

    /// The first `n` answers (all of them for `None`) of one engine.
    pub fn run(&self, engine: Engine, n: Option<usize>) -> Vec<Vec<GroundValue>> {
        let n = n.unwrap_or(usize::MAX);
        match engine {
            Engine::Ref => {
                let q = query(&self.program, self.case.rel, &self.query_args()).expect("bench query is well formed");
                answers(&self.program, &q, Reification::Enumerate)
                    .into_iter()
                    .take(n)
                    .map(|r| r.expect("bench answers are ground"))
                    .collect()
            }
            Engine::Converted => self.procs.execute(&self.dir, &self.inputs, n).expect("bench inputs are well typed"),
        }
    }

    /// Whether the two engines agree. Equal answer multisets always do; for a
    /// full-length prefix of an infinite stream, each side's answers must
    /// appear among the other's first `10 n`.
    pub fn verify(&self, ref_answers: &[Vec<GroundValue>], conv_answers: &[Vec<GroundValue>]) -> bool {
        if answers_hash(&self.program, ref_answers) == answers_hash(&self.program, conv_answers) {
            return true;
        }
        let Some(n) = self.case.n else { return false };
        if ref_answers.len() < n || conv_answers.len() < n {
            return false;
        }
        let wide = Some(10 * n);
        let more_ref = self.run(Engine::Ref, wide);
        let more_conv = self.run(Engine::Converted, wide);
        conv_answers.iter().all(|a| more_ref.contains(a)) && ref_answers.iter().all(|a| more_conv.contains(a))
    }
}

/// Times both engines on one case: one warmup run, then `reps` timed runs.
pub fn run_case(case: &BenchCase, reps: usize) -> Result<[BenchRow; 2], BenchError> {
    let prep = prepare(case)?;
    let ref_answers = prep.run(Engine::Ref, case.n);
    let conv_answers = prep.run(Engine::Converted, case.n);
    if !prep.verify(&ref_answers, &conv_answers) {
        return Err(BenchError::HashMismatch {
            query: case.label(),
            param: case.param,
        });
    }
    let row = |engine: Engine, got: &[Vec<GroundValue>]| {
        let mut times: Vec<u128> = (0..reps)
            .map(|_| {
                let t = Instant::now();
                let out = prep.run(engine, case.n);
                let ns = t.elapsed().as_nanos();
                std::hint::black_box(out);
                ns
            })
            .collect();
        times.sort_unstable();
        BenchRow {
            suite: case.suite.to_string(),
            query: case.label(),
            engine,
            param: case.param,
            median_ns: median(&times),
            reps,
            answers_hash: answers_hash(&prep.program, got),
        }
    };
    Ok([row(Engine::Ref, &ref_answers), row(Engine::Converted, &conv_answers)])
}

fn median(sorted: &[u128]) -> u128 {
    match sorted.len() {
        0 => 0,
        n if n % 2 == 1 => sorted[n / 2],
        n => (sorted[n / 2 - 1] + sorted[n / 2]) / 2,
    }
}

pub fn write_csv(rows: &[BenchRow], path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["suite", "query", "engine", "param", "median_ns", "reps", "answers_hash"])?;
    for r in rows {
        w.write_record([
            r.suite.clone(),
            r.query.clone(),
            r.engine.to_string(),
            r.param.to_string(),
            r.median_ns.to_string(),
            r.reps.to_string(),
            r.answers_hash.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table pairing the two engines of each case.
pub fn table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<10} {:<16} {:>6} {:>14} {:>14} {:>7}\n",
        "suite", "query", "param", "ref ns", "converted ns", "ratio"
    );
    for pair in rows.chunks(2) {
        if let [r, c] = pair {
            let ratio = c.median_ns as f64 / r.median_ns.max(1) as f64;
            out.push_str(&format!(
                "{:<10} {:<16} {:>6} {:>14} {:>14} {:>7.3}\n",
                r.suite, r.query, r.param, r.median_ns, c.median_ns, ratio
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_well_formed() {
        for case in suite_cases("all").unwrap() {
            prepare(&case).unwrap();
        }
        assert!(matches!(suite_cases("nope"), Err(BenchError::UnknownSuite(_))));
    }

    #[test]
    fn small_case_runs() {
        let case = &suite_cases("sort").unwrap()[2];
        let [r, c] = run_case(case, 3).unwrap();
        assert_eq!(r.answers_hash, c.answers_hash);
        assert_eq!((r.reps, c.param), (3, 3));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[1, 2, 9]), 2);
        assert_eq!(median(&[1, 3, 5, 9]), 4);
    }
}
