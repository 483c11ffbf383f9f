//! Determinism analysis and conversion of moded relations into directed
//! procedures.
//!
//! A procedure runs over an environment of ground values, one slot per
//! variable of its relation. Procedures proved to yield at most one answer run
//! on a plain call path that stops at the first answer; the rest produce
//! interleaved streams.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::modes::{in_args, infer, out_args, Direction, Mode, ModeError, ModeTable, ModedOp};
use crate::normal::{FlatTerm, NormalProgram};
use crate::schema::{CtorId, Generator, GroundValue, TermSchema, TypeId, VarId};
use crate::stream::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Determinism {
    /// Exactly one answer.
    Det,
    /// At most one answer.
    Semidet,
    /// Any number of answers.
    Nondet,
}

impl Determinism {
    pub fn join(self, other: Determinism) -> Determinism {
        self.max(other)
    }

    pub fn at_most_one(self) -> bool {
        self <= Determinism::Semidet
    }
}

impl fmt::Display for Determinism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Determinism::Det => "det",
            Determinism::Semidet => "semidet",
            Determinism::Nondet => "nondet",
        })
    }
}

pub type DetTable = IndexMap<Direction, Determinism>;

pub fn op_det(schema: &TermSchema, op: &ModedOp, table: &DetTable) -> Determinism {
    match op {
        ModedOp::Guard(..) | ModedOp::GuardCtor(..) | ModedOp::Match(..) => Determinism::Semidet,
        ModedOp::Assign(..) => Determinism::Det,
        ModedOp::GenerateVar(v) => {
            if schema.is_singleton(v.ty) {
                Determinism::Semidet
            } else {
                Determinism::Nondet
            }
        }
        ModedOp::DirCall(d, _) => table.get(d).copied().unwrap_or(Determinism::Nondet),
    }
}

/// Where a clause looks inside its inputs: an input position followed by
/// constructor argument indices.
type Path = (usize, Vec<usize>);

/// Constructor tests a clause performs on its inputs. Two clauses whose tests
/// demand different constructors at the same path can never both succeed.
fn input_tests(in_params: &[VarId], ops: &[ModedOp]) -> Vec<(Path, CtorId)> {
    let mut paths: HashMap<VarId, Path> = in_params.iter().enumerate().map(|(i, v)| (*v, (i, vec![]))).collect();
    let mut heads: HashMap<VarId, CtorId> = HashMap::new();
    let mut tests = Vec::new();
    let child = |p: &Path, i: usize| {
        let mut q = p.clone();
        q.1.push(i);
        q
    };
    for op in ops {
        match op {
            ModedOp::Match(v, c, args) | ModedOp::GuardCtor(v, c, args, _) => {
                let modes = match op {
                    ModedOp::GuardCtor(_, _, _, m) => m.clone(),
                    _ => vec![Mode::Out; args.len()],
                };
                if let Some(p) = paths.get(v).cloned() {
                    tests.push((p.clone(), *c));
                    for (i, (a, m)) in args.iter().zip(&modes).enumerate() {
                        if *m == Mode::Out {
                            paths.insert(*a, child(&p, i));
                        } else if let Some(h) = heads.get(a) {
                            tests.push((child(&p, i), *h));
                        }
                    }
                }
                heads.insert(*v, *c);
            }
            ModedOp::Guard(v, w) => {
                for (a, b) in [(v, w), (w, v)] {
                    if let (Some(p), Some(h)) = (paths.get(a), heads.get(b)) {
                        tests.push((p.clone(), *h));
                    }
                }
            }
            ModedOp::Assign(v, FlatTerm::Ctor(c, _)) => {
                heads.insert(*v, *c);
            }
            ModedOp::Assign(v, FlatTerm::Var(w)) => {
                if let Some(h) = heads.get(w).copied() {
                    heads.insert(*v, h);
                }
                if let Some(p) = paths.get(w).cloned() {
                    paths.insert(*v, p);
                }
            }
            ModedOp::GenerateVar(_) | ModedOp::DirCall(..) => {}
        }
    }
    tests
}

fn exclusive(a: &[(Path, CtorId)], b: &[(Path, CtorId)]) -> bool {
    a.iter().any(|(p, c)| b.iter().any(|(q, d)| p == q && c != d))
}

/// Determinism of every analyzed direction, with the number of fixpoint rounds
/// it took (the final, unchanged round included).
pub fn infer_det(schema: &TermSchema, table: &ModeTable) -> (DetTable, usize) {
    let mut dets: DetTable = table.done().map(|m| (m.direction.clone(), Determinism::Det)).collect();
    let mut exclusive_procs: HashMap<Direction, bool> = HashMap::new();
    for m in table.done() {
        let tests: Vec<Vec<(Path, CtorId)>> = m
            .clauses
            .iter()
            .map(|c| {
                let ops: Vec<ModedOp> = c.iter().map(|s| s.op.clone()).collect();
                input_tests(&m.in_params, &ops)
            })
            .collect();
        let ok = (0..tests.len()).all(|i| (i + 1..tests.len()).all(|j| exclusive(&tests[i], &tests[j])));
        exclusive_procs.insert(m.direction.clone(), ok);
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for m in table.done() {
            let clause_dets: Vec<Determinism> = m
                .clauses
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|s| op_det(schema, &s.op, &dets))
                        .fold(Determinism::Det, Determinism::join)
                })
                .collect();
            let d = proc_det(&clause_dets, exclusive_procs[&m.direction]);
            let old = dets[&m.direction];
            if d.join(old) != old {
                dets.insert(m.direction.clone(), d.join(old));
                changed = true;
            }
        }
        if !changed {
            return (dets, rounds);
        }
    }
}

fn proc_det(clause_dets: &[Determinism], exclusive: bool) -> Determinism {
    let joined = clause_dets.iter().copied().fold(Determinism::Det, Determinism::join);
    match clause_dets.len() {
        0 => Determinism::Semidet,
        1 => joined,
        _ if exclusive => joined.join(Determinism::Semidet),
        _ => Determinism::Nondet,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedClause {
    pub ops: Vec<ModedOp>,
    pub det: Determinism,
}

#[derive(Debug, Clone)]
pub struct DirectedProc {
    pub direction: Direction,
    pub in_params: Vec<VarId>,
    pub out_params: Vec<VarId>,
    pub clauses: Vec<DirectedClause>,
    pub det: Determinism,
    span: usize,
    code: Vec<Vec<Instr>>,
}

#[derive(Debug, Clone)]
enum Build {
    Var(usize),
    Ctor(CtorId, Vec<usize>),
}

#[derive(Debug, Clone)]
enum Instr {
    Guard(usize, usize),
    /// Constructor check; each argument slot is bound (`true`) or compared.
    GuardCtor(usize, CtorId, Vec<(usize, bool)>),
    Assign(usize, Build),
    Match(usize, CtorId, Vec<usize>),
    Generate(usize, TypeId),
    Call(usize, Vec<usize>, Vec<usize>),
}

/// Every compiled direction of one program.
#[derive(Debug, Clone)]
pub struct Procs {
    pub schema: Arc<TermSchema>,
    pub procs: Vec<DirectedProc>,
    pub index: IndexMap<Direction, usize>,
    pub names: HashMap<String, HashMap<u64, String>>,
}

pub fn compile(np: &NormalProgram, table: &ModeTable, dets: &DetTable) -> Procs {
    let index: IndexMap<Direction, usize> = table
        .done()
        .enumerate()
        .map(|(i, m)| (m.direction.clone(), i))
        .collect();
    let slot = |v: &VarId| v.id as usize;
    let mut procs = Vec::new();
    for m in table.done() {
        let rel = np.relation(&m.direction.rel).expect("analyzed relation exists");
        let clauses: Vec<DirectedClause> = m
            .clauses
            .iter()
            .map(|c| {
                let ops: Vec<ModedOp> = c.iter().map(|s| s.op.clone()).collect();
                let det = ops
                    .iter()
                    .map(|o| op_det(&np.schema, o, dets))
                    .fold(Determinism::Det, Determinism::join);
                DirectedClause { ops, det }
            })
            .collect();
        let code = clauses
            .iter()
            .map(|c| {
                c.ops
                    .iter()
                    .map(|op| match op {
                        ModedOp::Guard(v, w) => Instr::Guard(slot(v), slot(w)),
                        ModedOp::GuardCtor(v, c, args, modes) => Instr::GuardCtor(
                            slot(v),
                            *c,
                            args.iter().zip(modes).map(|(a, m)| (slot(a), *m == Mode::Out)).collect(),
                        ),
                        ModedOp::Assign(v, FlatTerm::Var(w)) => Instr::Assign(slot(v), Build::Var(slot(w))),
                        ModedOp::Assign(v, FlatTerm::Ctor(c, args)) => {
                            Instr::Assign(slot(v), Build::Ctor(*c, args.iter().map(slot).collect()))
                        }
                        ModedOp::Match(v, c, args) => Instr::Match(slot(v), *c, args.iter().map(slot).collect()),
                        ModedOp::GenerateVar(v) => Instr::Generate(slot(v), v.ty),
                        ModedOp::DirCall(d, args) => Instr::Call(
                            index[d],
                            in_args(d, args).iter().map(slot).collect(),
                            out_args(d, args).iter().map(slot).collect(),
                        ),
                    })
                    .collect()
            })
            .collect();
        procs.push(DirectedProc {
            direction: m.direction.clone(),
            in_params: m.in_params.clone(),
            out_params: m.out_tuple.clone(),
            clauses,
            det: dets[&m.direction],
            span: rel.var_span() as usize,
            code,
        });
    }
    let names = np.relations.values().map(|r| (r.name.clone(), r.names.clone())).collect();
    Procs {
        schema: np.schema.clone(),
        procs,
        index,
        names,
    }
}

/// Mode analysis, determinism inference and compilation for one requested
/// direction and everything it reaches.
pub fn convert(np: &NormalProgram, dir: &Direction) -> Result<(Procs, ModeTable), ModeError> {
    let mut table = ModeTable::new();
    infer(np, dir, &mut table)?;
    let (dets, _) = infer_det(&np.schema, &table);
    Ok((compile(np, &table, &dets), table))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("direction {0} was not compiled")]
    UnknownDirection(String),
    #[error("{dir} takes {expected} inputs, got {found}")]
    Arity { dir: String, expected: usize, found: usize },
    #[error("input {index} of {dir} has the wrong type")]
    ArgumentType { dir: String, index: usize },
}

/// Result of running a procedure.
pub enum Answers<'p> {
    AtMostOne(Option<Vec<GroundValue>>),
    Stream(Stream<'p, Vec<GroundValue>>),
}

impl<'p> Answers<'p> {
    /// Views any result as a stream.
    pub fn into_stream(self) -> Stream<'p, Vec<GroundValue>> {
        match self {
            Answers::AtMostOne(None) => Stream::Empty,
            Answers::AtMostOne(Some(t)) => Stream::unit(t),
            Answers::Stream(s) => s,
        }
    }
}

type Env = Vec<Option<GroundValue>>;

#[derive(Clone, Copy)]
struct Exec<'p> {
    procs: &'p Procs,
    force_stream: bool,
}

impl<'p> Exec<'p> {
    fn fresh_env(&self, pi: usize, inputs: &[GroundValue]) -> Env {
        let p = &self.procs.procs[pi];
        let mut env: Env = vec![None; p.span];
        for (v, g) in p.in_params.iter().zip(inputs) {
            env[v.id as usize] = Some(g.clone());
        }
        env
    }

    fn outputs(&self, pi: usize, env: &Env) -> Vec<GroundValue> {
        self.procs.procs[pi]
            .out_params
            .iter()
            .map(|v| env[v.id as usize].clone().expect("outputs bound at clause end"))
            .collect()
    }

    fn uses_stream(&self, pi: usize) -> bool {
        self.force_stream || !self.procs.procs[pi].det.at_most_one()
    }

    /// Runs an instruction that cannot branch. `None` means it failed.
    fn step(&self, instr: &Instr, env: &mut Env) -> Option<()> {
        let val = |env: &Env, s: usize| env[s].clone().expect("read of an unbound slot");
        match instr {
            Instr::Guard(a, b) => (env[*a] == env[*b]).then_some(()),
            Instr::GuardCtor(v, c, args) => {
                let g = val(env, *v);
                if g.ctor != *c {
                    return None;
                }
                for ((s, out), x) in args.iter().zip(g.args.iter()) {
                    if *out {
                        env[*s] = Some(x.clone());
                    } else if env[*s].as_ref() != Some(x) {
                        return None;
                    }
                }
                Some(())
            }
            Instr::Assign(v, Build::Var(w)) => {
                env[*v] = env[*w].clone();
                Some(())
            }
            Instr::Assign(v, Build::Ctor(c, args)) => {
                let args = args.iter().map(|a| val(env, *a)).collect();
                env[*v] = Some(GroundValue::new(*c, args));
                Some(())
            }
            Instr::Match(v, c, args) => {
                let g = val(env, *v);
                if g.ctor != *c {
                    return None;
                }
                for (s, x) in args.iter().zip(g.args.iter()) {
                    env[*s] = Some(x.clone());
                }
                Some(())
            }
            Instr::Generate(v, ty) => {
                // Only reached for singleton types.
                env[*v] = Generator::new(self.procs.schema.clone(), *ty).next();
                env[*v].as_ref().map(|_| ())
            }
            Instr::Call(callee, ins, outs) => {
                let args: Vec<GroundValue> = ins.iter().map(|s| val(env, *s)).collect();
                let res = self.run_one(*callee, &args)?;
                for (s, g) in outs.iter().zip(res) {
                    env[*s] = Some(g);
                }
                Some(())
            }
        }
    }

    /// The at-most-one path: the first clause to succeed gives the answer.
    fn run_one(&self, pi: usize, inputs: &[GroundValue]) -> Option<Vec<GroundValue>> {
        let p = &self.procs.procs[pi];
        'clauses: for code in &p.code {
            let mut env = self.fresh_env(pi, inputs);
            for instr in code {
                if self.step(instr, &mut env).is_none() {
                    continue 'clauses;
                }
            }
            return Some(self.outputs(pi, &env));
        }
        None
    }

    fn run_stream(self, pi: usize, inputs: Vec<GroundValue>) -> Stream<'p, Vec<GroundValue>> {
        if !self.uses_stream(pi) {
            return Answers::AtMostOne(self.run_one(pi, &inputs)).into_stream();
        }
        let n = self.procs.procs[pi].code.len();
        let inputs = Rc::new(inputs);
        let mut out = Stream::Empty;
        for ci in (0..n).rev() {
            let inputs = inputs.clone();
            let s = Stream::delay(move || {
                let env = self.fresh_env(pi, &inputs);
                self.run_clause(pi, ci, 0, env)
            });
            out = s.mplus(out);
        }
        out
    }

    fn run_clause(self, pi: usize, ci: usize, mut pc: usize, mut env: Env) -> Stream<'p, Vec<GroundValue>> {
        let code = &self.procs.procs[pi].code[ci];
        while pc < code.len() {
            match &code[pc] {
                Instr::Generate(v, ty) if self.force_stream || !self.procs.schema.is_singleton(*ty) => {
                    let v = *v;
                    let gen = Generator::new(self.procs.schema.clone(), *ty);
                    return Stream::from_iter(gen).bind(Rc::new(move |g| {
                        let mut env = env.clone();
                        env[v] = Some(g);
                        self.run_clause(pi, ci, pc + 1, env)
                    }));
                }
                Instr::Call(callee, ins, outs) if self.uses_stream(*callee) => {
                    let callee = *callee;
                    let args: Vec<GroundValue> = ins.iter().map(|s| env[*s].clone().unwrap()).collect();
                    let outs = outs.clone();
                    return self.run_stream(callee, args).bind(Rc::new(move |res: Vec<GroundValue>| {
                        let mut env = env.clone();
                        for (s, g) in outs.iter().zip(res) {
                            env[*s] = Some(g);
                        }
                        self.run_clause(pi, ci, pc + 1, env)
                    }));
                }
                instr => {
                    if self.step(instr, &mut env).is_none() {
                        return Stream::Empty;
                    }
                }
            }
            pc += 1;
        }
        Stream::unit(self.outputs(pi, &env))
    }
}

impl Procs {
    pub fn get(&self, dir: &Direction) -> Option<&DirectedProc> {
        self.index.get(dir).map(|i| &self.procs[*i])
    }

    fn check_inputs(&self, dir: &Direction, inputs: &[GroundValue]) -> Result<usize, ExecError> {
        let pi = *self
            .index
            .get(dir)
            .ok_or_else(|| ExecError::UnknownDirection(dir.to_string()))?;
        let p = &self.procs[pi];
        if p.in_params.len() != inputs.len() {
            return Err(ExecError::Arity {
                dir: dir.to_string(),
                expected: p.in_params.len(),
                found: inputs.len(),
            });
        }
        for (i, (v, g)) in p.in_params.iter().zip(inputs).enumerate() {
            if self.schema.check_ground(g, v.ty).is_err() {
                return Err(ExecError::ArgumentType {
                    dir: dir.to_string(),
                    index: i,
                });
            }
        }
        Ok(pi)
    }

    /// Runs `dir` on `inputs`. Set `force_stream` to send every procedure,
    /// however deterministic, down the stream path.
    pub fn answers(&self, dir: &Direction, inputs: &[GroundValue], force_stream: bool) -> Result<Answers<'_>, ExecError> {
        let pi = self.check_inputs(dir, inputs)?;
        let ex = Exec {
            procs: self,
            force_stream,
        };
        if ex.uses_stream(pi) {
            Ok(Answers::Stream(ex.run_stream(pi, inputs.to_vec())))
        } else {
            Ok(Answers::AtMostOne(ex.run_one(pi, inputs)))
        }
    }

    /// First `n` output tuples of `dir` on `inputs`.
    pub fn execute(&self, dir: &Direction, inputs: &[GroundValue], n: usize) -> Result<Vec<Vec<GroundValue>>, ExecError> {
        if n == 0 {
            self.check_inputs(dir, inputs)?;
            return Ok(vec![]);
        }
        Ok(self.answers(dir, inputs, false)?.into_stream().into_iter().take(n).collect())
    }

    fn var_name(&self, rel: &str, v: &VarId) -> String {
        self.names
            .get(rel)
            .and_then(|m| m.get(&v.id))
            .cloned()
            .unwrap_or_else(|| format!("x{}", v.id))
    }

    fn fn_name(d: &Direction) -> String {
        format!("{}_{}", d.rel, d.dir_string())
    }

    /// Functional pseudocode for one procedure.
    pub fn emit(&self, p: &DirectedProc) -> String {
        let rel = &p.direction.rel;
        let n = |v: &VarId| self.var_name(rel, v);
        let ty = |v: &VarId| self.schema.type_name(v.ty).to_string();
        let typed = |vs: &[VarId]| -> String {
            vs.iter().map(|v| format!("{}: {}", n(v), ty(v))).collect::<Vec<_>>().join(", ")
        };
        let tuple = |vs: Vec<String>| -> String {
            if vs.len() == 1 {
                vs[0].clone()
            } else {
                format!("({})", vs.join(", "))
            }
        };
        let ctor = |c: &CtorId, args: Vec<String>| -> String {
            let name = self.schema.ctor_name(*c);
            if args.is_empty() {
                name.to_string()
            } else {
                format!("{name}({})", args.join(", "))
            }
        };
        let result = match p.det {
            Determinism::Det => format!("({})", typed(&p.out_params)),
            Determinism::Semidet => format!("Maybe ({})", typed(&p.out_params)),
            Determinism::Nondet => format!("Stream ({})", typed(&p.out_params)),
        };
        let mut out = format!(
            "{} : ({}) -> {}  -- {}\n",
            Self::fn_name(&p.direction),
            typed(&p.in_params),
            result,
            p.det
        );
        let ins: Vec<String> = p.in_params.iter().map(n).collect();
        let head = format!("{}({})", Self::fn_name(&p.direction), ins.join(", "));
        let wrapper = match p.det {
            Determinism::Det => "",
            Determinism::Semidet => "firstOf ",
            Determinism::Nondet => "allOf ",
        };
        let ret = format!("return {}", tuple(p.out_params.iter().map(n).collect()));
        let body = |c: &DirectedClause| -> Vec<String> {
            let mut lines: Vec<String> = c
                .ops
                .iter()
                .map(|op| match op {
                    ModedOp::Guard(v, w) => format!("guard {} == {}", n(v), n(w)),
                    ModedOp::GuardCtor(v, c, args, modes) => format!(
                        "match {} with {}",
                        n(v),
                        ctor(
                            c,
                            args.iter()
                                .zip(modes)
                                .map(|(a, m)| if *m == Mode::In { format!("={}", n(a)) } else { n(a) })
                                .collect()
                        )
                    ),
                    ModedOp::Match(v, c, args) => format!("match {} with {}", n(v), ctor(c, args.iter().map(n).collect())),
                    ModedOp::Assign(v, FlatTerm::Var(w)) => format!("{} = {}", n(v), n(w)),
                    ModedOp::Assign(v, FlatTerm::Ctor(c, args)) => {
                        format!("{} = {}", n(v), ctor(c, args.iter().map(n).collect()))
                    }
                    ModedOp::GenerateVar(v) => format!("{} <- generate {}", n(v), ty(v)),
                    ModedOp::DirCall(d, args) => {
                        let call = format!(
                            "{}({})",
                            Self::fn_name(d),
                            in_args(d, args).iter().map(n).collect::<Vec<_>>().join(", ")
                        );
                        let outs = out_args(d, args);
                        if outs.is_empty() {
                            format!("check {call}")
                        } else {
                            format!("{} <- {call}", tuple(outs.iter().map(n).collect()))
                        }
                    }
                })
                .collect();
            lines.push(ret.clone());
            lines
        };
        if p.clauses.len() == 1 && p.det == Determinism::Det {
            out.push_str(&format!("{head} =\n"));
            for l in body(&p.clauses[0]) {
                out.push_str(&format!("  {l}\n"));
            }
            return out;
        }
        out.push_str(&format!("{head} = {wrapper}[\n"));
        for (i, c) in p.clauses.iter().enumerate() {
            let lines = body(c);
            out.push_str(&format!("  -- clause {}: {}\n", i + 1, c.det));
            for (j, l) in lines.iter().enumerate() {
                let open = if j == 0 { "  { " } else { "    " };
                let close = if j + 1 == lines.len() {
                    if i + 1 == p.clauses.len() {
                        " }"
                    } else {
                        " },"
                    }
                } else {
                    ";"
                };
                out.push_str(&format!("{open}{l}{close}\n"));
            }
        }
        out.push_str("]\n");
        out
    }

    /// All procedures, in analysis order.
    pub fn emit_all(&self) -> String {
        self.procs.iter().map(|p| self.emit(p)).collect::<Vec<_>>().join("\n")
    }

    /// A stable S-expression dump of the compiled structure.
    pub fn emit_ir(&self) -> String {
        let mut out = String::new();
        for p in &self.procs {
            let rel = &p.direction.rel;
            let n = |v: &VarId| self.var_name(rel, v);
            let list = |vs: &[VarId]| vs.iter().map(n).collect::<Vec<_>>().join(" ");
            out.push_str(&format!(
                "(proc {} (in {}) (out {}) {}\n",
                p.direction,
                list(&p.in_params),
                list(&p.out_params),
                p.det
            ));
            for c in &p.clauses {
                out.push_str(&format!("  (clause {}", c.det));
                for op in &c.ops {
                    let s = match op {
                        ModedOp::Guard(v, w) => format!("(guard {} {})", n(v), n(w)),
                        ModedOp::GuardCtor(v, c, args, modes) => {
                            let args: Vec<String> = args
                                .iter()
                                .zip(modes)
                                .map(|(a, m)| format!("({} {})", if *m == Mode::In { "in" } else { "out" }, n(a)))
                                .collect();
                            format!("(guard-ctor {} {} ({}))", n(v), self.schema.ctor_name(*c), args.join(" "))
                        }
                        ModedOp::Match(v, c, args) => {
                            format!("(match {} {} ({}))", n(v), self.schema.ctor_name(*c), list(args))
                        }
                        ModedOp::Assign(v, FlatTerm::Var(w)) => format!("(assign {} (var {}))", n(v), n(w)),
                        ModedOp::Assign(v, FlatTerm::Ctor(c, args)) => {
                            format!("(assign {} (ctor {} ({})))", n(v), self.schema.ctor_name(*c), list(args))
                        }
                        ModedOp::GenerateVar(v) => {
                            format!("(generate {} {})", n(v), self.schema.type_name(v.ty))
                        }
                        ModedOp::DirCall(d, args) => format!(
                            "(call {} (in {}) (out {}))",
                            d,
                            list(&in_args(d, args)),
                            list(&out_args(d, args))
                        ),
                    };
                    out.push_str(&format!("\n    {s}"));
                }
                out.push_str(")\n");
            }
            out.push_str(")\n");
        }
        out
    }
}

/// Variables some clause reads before they are bound. Empty for every
/// procedure `compile` produces.
pub fn unbound_reads(p: &DirectedProc) -> Vec<(usize, VarId)> {
    let mut bad = Vec::new();
    for (i, c) in p.clauses.iter().enumerate() {
        let mut known: BTreeSet<VarId> = p.in_params.iter().copied().collect();
        for op in &c.ops {
            for v in op.reads() {
                if !known.contains(&v) {
                    bad.push((i, v));
                }
            }
            known.extend(op.writes());
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::normalize;
    use crate::parse::{parse, parse_ground};

    const ADDO: &str = "type Nat = O | S(Nat).\n\
        rel addo(x: Nat, y: Nat, z: Nat) := (x == O, y == z) \
        | (fresh x': Nat, z': Nat . (x == S(x'), addo(x', y, z'), z == S(z'))).\n";

    fn setup(dir: &str) -> (NormalProgram, Procs, Direction) {
        let np = normalize(&parse(ADDO).unwrap());
        let d = Direction::parse("addo", dir).unwrap();
        let (procs, _) = convert(&np, &d).unwrap();
        (np, procs, d)
    }

    fn nat(np: &NormalProgram, k: usize) -> GroundValue {
        parse_ground(&np.schema, &format!("{}O{}", "S(".repeat(k), ")".repeat(k))).unwrap()
    }

    #[test]
    fn op_determinism() {
        let (np, procs, d) = setup("iio");
        let p = procs.get(&d).unwrap();
        let dets = DetTable::new();
        let kinds: Vec<Determinism> = p.clauses[1].ops.iter().take(1).map(|o| op_det(&np.schema, o, &dets)).collect();
        assert_eq!(kinds, [Determinism::Semidet]);
        let assign = p.clauses[1].ops.last().unwrap();
        assert_eq!(op_det(&np.schema, assign, &dets), Determinism::Det);
    }

    #[test]
    fn addo_directions() {
        for (d, want) in [
            ("iio", Determinism::Semidet),
            ("ioi", Determinism::Semidet),
            ("iii", Determinism::Semidet),
            ("ioo", Determinism::Nondet),
            ("oio", Determinism::Nondet),
            ("ooi", Determinism::Nondet),
        ] {
            let (_, procs, dir) = setup(d);
            assert_eq!(procs.get(&dir).unwrap().det, want, "{d}");
        }
    }

    #[test]
    fn execute_examples() {
        let (np, procs, d) = setup("iio");
        assert_eq!(procs.execute(&d, &[nat(&np, 1), nat(&np, 1)], 1).unwrap(), vec![vec![nat(&np, 2)]]);
        let (np, procs, d) = setup("ioo");
        let got = procs.execute(&d, &[nat(&np, 2)], 3).unwrap();
        let want: Vec<Vec<GroundValue>> = (0..3).map(|k| vec![nat(&np, k), nat(&np, k + 2)]).collect();
        assert_eq!(got, want);
        let (np, procs, d) = setup("ooi");
        assert_eq!(procs.execute(&d, &[nat(&np, 0)], 5).unwrap(), vec![vec![nat(&np, 0), nat(&np, 0)]]);
        assert!(procs.execute(&d, &[nat(&np, 0)], 0).unwrap().is_empty());
    }

    #[test]
    fn compiled_clause_shapes() {
        let (_, procs, d) = setup("ioo");
        let p = procs.get(&d).unwrap();
        let kinds = |i: usize| p.clauses[i].ops.iter().map(|o| o.kind()).collect::<Vec<_>>();
        assert_eq!(kinds(0), ["GuardCtor", "GenerateVar", "Assign"]);
        assert_eq!(kinds(1), ["Match", "DirCall", "Assign"]);
        assert!(procs.emit(p).contains("y <- generate Nat"));
    }

    #[test]
    fn emit_uses_det_wrappers() {
        let (_, procs, d) = setup("iio");
        let text = procs.emit(procs.get(&d).unwrap());
        assert!(text.starts_with("addo_iio : (x: Nat, y: Nat) -> Maybe (z: Nat)"), "{text}");
        assert!(text.contains("firstOf") && !text.contains("allOf"));
        assert!(text.contains("z' <- addo_iio(x', y)"));
        let ir = procs.emit_ir();
        assert!(ir.starts_with("(proc addo@iio (in x y) (out z) semidet"), "{ir}");
    }

    #[test]
    fn det_single_clause_has_no_wrapper() {
        let np = normalize(&parse("type Nat = O | S(Nat).\nrel succ(x: Nat, y: Nat) := (y == S(x)).\n").unwrap());
        let d = Direction::parse("succ", "io").unwrap();
        let (procs, _) = convert(&np, &d).unwrap();
        let p = procs.get(&d).unwrap();
        assert_eq!(p.det, Determinism::Det);
        let text = procs.emit(p);
        assert!(!text.contains("allOf") && !text.contains("firstOf"), "{text}");
    }

    #[test]
    fn singleton_generation_is_semidet() {
        let np = normalize(&parse("type U = Unit.\nrel any(u: U) := (u == u).\n").unwrap());
        let d = Direction::parse("any", "o").unwrap();
        let (procs, _) = convert(&np, &d).unwrap();
        assert_eq!(procs.get(&d).unwrap().det, Determinism::Semidet);
        assert_eq!(procs.execute(&d, &[], 5).unwrap().len(), 1);
    }

    #[test]
    fn fixpoint_is_bounded() {
        let np = normalize(&parse(ADDO).unwrap());
        let mut table = ModeTable::new();
        for d in ["ooo", "iio", "oio"] {
            infer(&np, &Direction::parse("addo", d).unwrap(), &mut table).unwrap();
        }
        let (_, rounds) = infer_det(&np.schema, &table);
        assert!(rounds <= 2 * table.done().count());
    }
}
