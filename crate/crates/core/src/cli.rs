//! The `kanrel` command line.
//!
//! Exit codes: 0 on success, 1 for user errors (bad arguments, unparsable or
//! unmodable programs), 2 when an internal check fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::bench::{self, BenchError, BenchRow};
use crate::convert::{convert, unbound_reads};
use crate::corpus;
use crate::goal::Program;
use crate::interp::{self, Reification};
use crate::modes::{infer, show_table, Direction, Mode, ModeTable};
use crate::normal::{check_normal, normalize, NormalProgram};
use crate::parse::{parse, parse_ground};
use crate::schema::GroundValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Print the answers of a query.
    Run,
    /// Print the program in disjunctive superhomogeneous form.
    Normalize,
    /// Print the mode-annotated schedule of a direction and its callees.
    Modes,
    /// Print the directed procedures compiled for a direction.
    Convert,
    /// Time both engines on a benchmark suite.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Ref,
    Converted,
}

#[derive(Debug, Parser)]
#[command(name = "kanrel", version, about = "Run, analyze and convert relational programs")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Source file or bundled program (addo, sort, tree, typecheck). For
    /// `bench`, a suite: add, sort, typecheck or all.
    pub file: String,
    /// Relation to query. Defaults to the last one in the file.
    #[arg(long)]
    pub rel: Option<String>,
    /// One `i` or `o` per argument. Defaults to all outputs.
    #[arg(long)]
    pub dir: Option<String>,
    /// Ground term for the next `i` position.
    #[arg(long = "in", value_name = "TERM")]
    pub inputs: Vec<String>,
    /// Number of answers (`run`, default 10) or timed repetitions (`bench`,
    /// default 10).
    #[arg(short = 'n')]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = EngineArg::Ref)]
    pub engine: EngineArg,
    /// Print answers as JSON constructor trees.
    #[arg(long)]
    pub json: bool,
    /// With `convert`, dump the compiled structure instead of pseudocode.
    #[arg(long)]
    pub ir: bool,
    /// With `bench`, also write the rows to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn user(e: impl ToString) -> CliError {
    CliError::User(e.to_string())
}

fn load(file: &str) -> Result<Program, CliError> {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => match corpus::source(file) {
            Some(t) => t.to_string(),
            None => return Err(user(format!("{file}: {e}"))),
        },
    };
    parse(&text).map_err(|e| user(format!("{file}:{e}")))
}

fn normalized(p: &Program) -> Result<NormalProgram, CliError> {
    let np = normalize(p);
    if let Err(vs) = check_normal(&np) {
        let lines: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Internal(format!("normal form check failed:\n{}", lines.join("\n"))));
    }
    Ok(np)
}

/// The relation, direction and parsed inputs of a query.
fn query_spec(args: &Args, p: &Program) -> Result<(String, Direction, Vec<GroundValue>), CliError> {
    let (rel, dir, _) = query_spec_no_inputs(args, p)?;
    if args.inputs.len() != dir.in_count() {
        return Err(user(format!(
            "direction `{}` needs {} --in terms, got {}",
            dir.dir_string(),
            dir.in_count(),
            args.inputs.len()
        )));
    }
    let def = p.relation(&rel).expect("checked above");
    let in_types = def.params.iter().zip(&dir.modes).filter(|(_, m)| **m == Mode::In).map(|(v, _)| v.ty);
    let mut inputs = Vec::new();
    for (text, ty) in args.inputs.iter().zip(in_types) {
        let g = parse_ground(&p.schema, text).map_err(|e| user(format!("--in {text:?}: {e}")))?;
        p.schema.check_ground(&g, ty).map_err(|e| user(format!("--in {text:?}: {e}")))?;
        inputs.push(g);
    }
    Ok((rel, dir, inputs))
}

fn print_answers(args: &Args, p: &Program, answers: &[Vec<GroundValue>], out: &mut dyn Write) -> std::io::Result<()> {
    if args.json {
        let json: Vec<serde_json::Value> = answers
            .iter()
            .map(|t| serde_json::Value::Array(t.iter().map(|g| p.schema.ground_to_json(g)).collect()))
            .collect();
        writeln!(out, "{}", serde_json::Value::Array(json))
    } else {
        for t in answers {
            let shown: Vec<String> = t.iter().map(|g| p.schema.show_ground(g)).collect();
            if shown.len() == 1 {
                writeln!(out, "{}", shown[0])?;
            } else {
                writeln!(out, "({})", shown.join(", "))?;
            }
        }
        Ok(())
    }
}

fn cmd_run(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&args.file)?;
    let (rel, dir, inputs) = query_spec(args, &p)?;
    let n = args.n.unwrap_or(10);
    let answers = match args.engine {
        EngineArg::Ref => {
            let mut ins = inputs.iter();
            let full: Vec<Option<GroundValue>> = dir
                .modes
                .iter()
                .map(|m| if *m == Mode::In { ins.next().cloned() } else { None })
                .collect();
            interp::run(&p, &rel, &full, n, Reification::Enumerate).map_err(user)?
        }
        EngineArg::Converted => {
            let np = normalized(&p)?;
            let (procs, _) = convert(&np, &dir).map_err(user)?;
            procs.execute(&dir, &inputs, n).map_err(user)?
        }
    };
    print_answers(args, &p, &answers, out).map_err(user)
}

fn cmd_modes(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&args.file)?;
    let (_, dir, _) = query_spec_no_inputs(args, &p)?;
    let np = normalized(&p)?;
    let mut table = ModeTable::new();
    infer(&np, &dir, &mut table).map_err(user)?;
    write!(out, "{}", show_table(&np, &table)).map_err(user)
}

fn cmd_convert(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&args.file)?;
    let (_, dir, _) = query_spec_no_inputs(args, &p)?;
    let np = normalized(&p)?;
    let (procs, _) = convert(&np, &dir).map_err(user)?;
    for proc in &procs.procs {
        if !unbound_reads(proc).is_empty() {
            return Err(CliError::Internal(format!("{} reads unbound variables", proc.direction)));
        }
    }
    let text = if args.ir { procs.emit_ir() } else { procs.emit_all() };
    write!(out, "{text}").map_err(user)
}

/// Relation and direction only; `--in` terms are not needed for analysis.
fn query_spec_no_inputs(args: &Args, p: &Program) -> Result<(String, Direction, Vec<GroundValue>), CliError> {
    let rel = match &args.rel {
        Some(r) => r.clone(),
        None => p.relations.keys().last().cloned().ok_or_else(|| user("the program declares no relations"))?,
    };
    let def = p.relation(&rel).ok_or_else(|| user(format!("unknown relation `{rel}`")))?;
    let dir_text = args.dir.clone().unwrap_or_else(|| "o".repeat(def.arity()));
    let dir = Direction::parse(&rel, &dir_text).map_err(user)?;
    if dir.modes.len() != def.arity() {
        return Err(user(format!(
            "direction `{dir_text}` has {} modes but `{rel}` takes {} arguments",
            dir.modes.len(),
            def.arity()
        )));
    }
    Ok((rel, dir, vec![]))
}

fn cmd_normalize(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load(&args.file)?;
    let np = normalized(&p)?;
    write!(out, "{}", np.pretty()).map_err(user)
}

fn cmd_bench(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cases = bench::suite_cases(&args.file).map_err(user)?;
    let reps = args.n.unwrap_or(10).max(1);
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut failed = Vec::new();
    for case in &cases {
        match bench::run_case(case, reps) {
            Ok(pair) => rows.extend(pair),
            Err(e @ BenchError::HashMismatch { .. }) => {
                let _ = writeln!(err, "error: {e}");
                failed.push(e.to_string());
            }
            Err(e) => return Err(user(e)),
        }
    }
    write!(out, "{}", bench::table(&rows)).map_err(user)?;
    if let Some(path) = &args.csv {
        bench::write_csv(&rows, path).map_err(|e| user(format!("{}: {e}", path.display())))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Internal(format!("{} row(s) aborted", failed.len())))
    }
}

/// Runs one parsed command line, writing results to `out` and diagnostics to
/// `err`.
pub fn run(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match args.command {
        Command::Run => cmd_run(args, out),
        Command::Normalize => cmd_normalize(args, out),
        Command::Modes => cmd_modes(args, out),
        Command::Convert => cmd_convert(args, out),
        Command::Bench => cmd_bench(args, out, err),
    }
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match run(&args, &mut out, &mut err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            match &e {
                CliError::User(m) | CliError::Internal(m) => {
                    let _ = writeln!(err, "error: {m}");
                }
            }
            e.code()
        }
    }
}
