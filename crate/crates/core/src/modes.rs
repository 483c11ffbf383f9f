//! Mode analysis: for a requested direction, decides which side of every
//! unification is known, orders each clause so that data flows from inputs to
//! outputs, and analyzes callees in the directions their calls induce.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::normal::{BaseOp, FlatTerm, NormalProgram, NormalRelation};
use crate::schema::{CtorId, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    pub rel: String,
    pub modes: Vec<Mode>,
}

impl Direction {
    pub fn new(rel: impl Into<String>, modes: Vec<Mode>) -> Self {
        Direction { rel: rel.into(), modes }
    }

    /// Parses a string of `i`/`o` characters, one per argument.
    pub fn parse(rel: &str, dir: &str) -> Result<Direction, ModeError> {
        let modes = dir
            .chars()
            .map(|c| match c {
                'i' | 'I' => Ok(Mode::In),
                'o' | 'O' => Ok(Mode::Out),
                _ => Err(ModeError::BadDirection(dir.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(Direction::new(rel, modes))
    }

    /// `iio`-style spelling of the modes.
    pub fn dir_string(&self) -> String {
        self.modes
            .iter()
            .map(|m| if *m == Mode::In { 'i' } else { 'o' })
            .collect()
    }

    pub fn in_count(&self) -> usize {
        self.modes.iter().filter(|m| **m == Mode::In).count()
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.rel, self.dir_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModedOp {
    /// Both variables known: compare them.
    Guard(VarId, VarId),
    /// `v` known: check its constructor, bind the `Out` arguments and compare
    /// the `In` ones.
    GuardCtor(VarId, CtorId, Vec<VarId>, Vec<Mode>),
    /// `v` unknown: build it from known variables.
    Assign(VarId, FlatTerm),
    /// `v` known: check its constructor and bind every argument.
    Match(VarId, CtorId, Vec<VarId>),
    /// Enumerate every value of the variable's type.
    GenerateVar(VarId),
    DirCall(Direction, Vec<VarId>),
}

impl ModedOp {
    pub fn is_generation(&self) -> bool {
        matches!(self, ModedOp::GenerateVar(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModedOp::Guard(..) => "Guard",
            ModedOp::GuardCtor(..) => "GuardCtor",
            ModedOp::Assign(..) => "Assign",
            ModedOp::Match(..) => "Match",
            ModedOp::GenerateVar(_) => "GenerateVar",
            ModedOp::DirCall(..) => "DirCall",
        }
    }

    /// Variables the op needs to be known beforehand.
    pub fn reads(&self) -> Vec<VarId> {
        match self {
            ModedOp::Guard(v, w) => vec![*v, *w],
            ModedOp::GuardCtor(v, _, args, modes) => std::iter::once(*v)
                .chain(args.iter().zip(modes).filter(|(_, m)| **m == Mode::In).map(|(a, _)| *a))
                .collect(),
            ModedOp::Assign(_, FlatTerm::Var(w)) => vec![*w],
            ModedOp::Assign(_, FlatTerm::Ctor(_, args)) => args.clone(),
            ModedOp::Match(v, ..) => vec![*v],
            ModedOp::GenerateVar(_) => vec![],
            ModedOp::DirCall(d, args) => in_args(d, args),
        }
    }

    /// Variables the op binds.
    pub fn writes(&self) -> Vec<VarId> {
        match self {
            ModedOp::Guard(..) => vec![],
            ModedOp::GuardCtor(_, _, args, modes) => args
                .iter()
                .zip(modes)
                .filter(|(_, m)| **m == Mode::Out)
                .map(|(a, _)| *a)
                .collect(),
            ModedOp::Assign(v, _) | ModedOp::GenerateVar(v) => vec![*v],
            ModedOp::Match(_, _, args) => args.clone(),
            ModedOp::DirCall(d, args) => out_args(d, args),
        }
    }
}

pub fn in_args(d: &Direction, args: &[VarId]) -> Vec<VarId> {
    args.iter().zip(&d.modes).filter(|(_, m)| **m == Mode::In).map(|(a, _)| *a).collect()
}

pub fn out_args(d: &Direction, args: &[VarId]) -> Vec<VarId> {
    args.iter().zip(&d.modes).filter(|(_, m)| **m == Mode::Out).map(|(a, _)| *a).collect()
}

/// A moded op together with everything known once it has run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledOp {
    pub op: ModedOp,
    pub binds_after: BTreeSet<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModedRelation {
    pub direction: Direction,
    pub clauses: Vec<Vec<ScheduledOp>>,
    /// The `Out` parameters in declaration order.
    pub out_tuple: Vec<VarId>,
    pub in_params: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entry {
    InProgress,
    Done(ModedRelation),
    Failed(String),
}

/// Per-direction analysis results, in the order analyses were started.
#[derive(Debug, Clone, Default)]
pub struct ModeTable {
    pub entries: IndexMap<Direction, Entry>,
}

impl ModeTable {
    pub fn new() -> Self {
        ModeTable::default()
    }

    pub fn get(&self, d: &Direction) -> Option<&ModedRelation> {
        match self.entries.get(d) {
            Some(Entry::Done(m)) => Some(m),
            _ => None,
        }
    }

    pub fn done(&self) -> impl Iterator<Item = &ModedRelation> {
        self.entries.values().filter_map(|e| match e {
            Entry::Done(m) => Some(m),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("bad direction `{0}`: use one `i` or `o` per argument")]
    BadDirection(String),
    #[error("direction {dir} has {found} modes but the relation takes {expected} arguments")]
    Arity { dir: String, expected: usize, found: usize },
    #[error("{dir} clause {clause}: cannot schedule {remaining}")]
    SchedulingStuck {
        dir: String,
        clause: usize,
        remaining: String,
    },
}

/// Moded ops for one unification under the binding set `bound`.
pub fn classify(op: &BaseOp, bound: &BTreeSet<VarId>) -> Vec<ModedOp> {
    let BaseOp::Unify(v, t) = op else {
        panic!("classify takes unifications; calls are moded by schedule");
    };
    let v = *v;
    let known = |x: &VarId| bound.contains(x);
    match t {
        FlatTerm::Var(w) => {
            let w = *w;
            match (known(&v), known(&w)) {
                (true, true) => vec![ModedOp::Guard(v, w)],
                (true, false) => vec![ModedOp::Assign(w, FlatTerm::Var(v))],
                (false, true) => vec![ModedOp::Assign(v, FlatTerm::Var(w))],
                (false, false) if v == w => vec![ModedOp::GenerateVar(v)],
                (false, false) => vec![ModedOp::GenerateVar(v), ModedOp::Assign(w, FlatTerm::Var(v))],
            }
        }
        FlatTerm::Ctor(c, args) => {
            if known(&v) {
                if !args.is_empty() && args.iter().all(|a| !known(a)) {
                    vec![ModedOp::Match(v, *c, args.clone())]
                } else {
                    let modes = args.iter().map(|a| if known(a) { Mode::In } else { Mode::Out }).collect();
                    vec![ModedOp::GuardCtor(v, *c, args.clone(), modes)]
                }
            } else {
                let mut out: Vec<ModedOp> = Vec::new();
                let mut seen = BTreeSet::new();
                for a in args {
                    if !known(a) && seen.insert(*a) {
                        out.push(ModedOp::GenerateVar(*a));
                    }
                }
                if seen.contains(&v) {
                    // `v` occurs among its own arguments and is now generated.
                    let modes = vec![Mode::In; args.len()];
                    out.push(ModedOp::GuardCtor(v, *c, args.clone(), modes));
                } else {
                    out.push(ModedOp::Assign(v, FlatTerm::Ctor(*c, args.clone())));
                }
                out
            }
        }
    }
}

/// Scheduling preference: lower ranks go first.
fn rank(ops: &[ModedOp]) -> u8 {
    if ops.iter().any(ModedOp::is_generation) {
        return 5;
    }
    match ops[0] {
        ModedOp::Guard(..) | ModedOp::GuardCtor(..) => 0,
        ModedOp::Assign(..) => 1,
        ModedOp::Match(..) => 2,
        _ => unreachable!(),
    }
}

fn call_direction(rel: &str, args: &[VarId], bound: &BTreeSet<VarId>) -> Direction {
    let modes = args
        .iter()
        .map(|a| if bound.contains(a) { Mode::In } else { Mode::Out })
        .collect();
    Direction::new(rel, modes)
}

/// Orders one clause of `rel` for `dir`, analyzing callees on demand.
pub fn schedule(
    np: &NormalProgram,
    rel: &NormalRelation,
    clause: usize,
    dir: &Direction,
    table: &mut ModeTable,
) -> Result<Vec<ScheduledOp>, ModeError> {
    let mut bound: BTreeSet<VarId> = rel
        .params
        .iter()
        .zip(&dir.modes)
        .filter(|(_, m)| **m == Mode::In)
        .map(|(p, _)| *p)
        .collect();
    let mut remaining: Vec<(usize, &BaseOp)> = rel.clauses[clause].ops.iter().enumerate().collect();
    let mut out = Vec::new();
    let emit = |op: ModedOp, bound: &mut BTreeSet<VarId>, out: &mut Vec<ScheduledOp>| {
        bound.extend(op.writes());
        out.push(ScheduledOp {
            op,
            binds_after: bound.clone(),
        });
    };
    while !remaining.is_empty() {
        // Best candidate as (rank, index into remaining, moded ops).
        let mut best: Option<(u8, usize, Vec<ModedOp>)> = None;
        for (k, (_, op)) in remaining.iter().enumerate() {
            let (r, ops) = match op {
                BaseOp::Unify(..) => {
                    let ops = classify(op, &bound);
                    (rank(&ops), ops)
                }
                BaseOp::Call(callee, args) => {
                    let d = call_direction(callee, args, &bound);
                    let r = match table.entries.get(&d) {
                        Some(Entry::Done(_)) | Some(Entry::InProgress) => 3,
                        Some(Entry::Failed(_)) => continue,
                        None => 4,
                    };
                    (r, vec![ModedOp::DirCall(d, args.clone())])
                }
            };
            if best.as_ref().is_none_or(|(br, _, _)| r < *br) {
                best = Some((r, k, ops));
            }
        }
        let Some((r, k, ops)) = best else {
            let rest: Vec<String> = remaining.iter().map(|(i, _)| format!("op {}", i + 1)).collect();
            return Err(ModeError::SchedulingStuck {
                dir: dir.to_string(),
                clause: clause + 1,
                remaining: rest.join(", "),
            });
        };
        if r == 4 {
            if let ModedOp::DirCall(d, _) = &ops[0] {
                if infer(np, d, table).is_err() {
                    continue;
                }
            }
        }
        remaining.remove(k);
        for op in ops {
            emit(op, &mut bound, &mut out);
        }
    }
    for (p, m) in rel.params.iter().zip(&dir.modes) {
        if *m == Mode::Out && !bound.contains(p) {
            emit(ModedOp::GenerateVar(*p), &mut bound, &mut out);
        }
    }
    Ok(out)
}

/// Analyzes `dir` and every direction it reaches. Results are memoized in
/// `table`; a recursive request for a direction still being analyzed is
/// assumed to succeed with all its outputs bound.
pub fn infer(np: &NormalProgram, dir: &Direction, table: &mut ModeTable) -> Result<ModedRelation, ModeError> {
    match table.entries.get(dir) {
        Some(Entry::Done(m)) => return Ok(m.clone()),
        Some(Entry::Failed(e)) => {
            return Err(ModeError::SchedulingStuck {
                dir: dir.to_string(),
                clause: 0,
                remaining: e.clone(),
            })
        }
        _ => {}
    }
    let rel = np
        .relation(&dir.rel)
        .ok_or_else(|| ModeError::UnknownRelation(dir.rel.clone()))?;
    if rel.params.len() != dir.modes.len() {
        return Err(ModeError::Arity {
            dir: dir.to_string(),
            expected: rel.params.len(),
            found: dir.modes.len(),
        });
    }
    table.entries.insert(dir.clone(), Entry::InProgress);
    let mut clauses = Vec::with_capacity(rel.clauses.len());
    for i in 0..rel.clauses.len() {
        match schedule(np, rel, i, dir, table) {
            Ok(c) => clauses.push(c),
            Err(e) => {
                table.entries.insert(dir.clone(), Entry::Failed(e.to_string()));
                return Err(e);
            }
        }
    }
    let pick = |want: Mode| -> Vec<VarId> {
        rel.params
            .iter()
            .zip(&dir.modes)
            .filter(|(_, m)| **m == want)
            .map(|(p, _)| *p)
            .collect()
    };
    let m = ModedRelation {
        direction: dir.clone(),
        clauses,
        out_tuple: pick(Mode::Out),
        in_params: pick(Mode::In),
    };
    table.entries.insert(dir.clone(), Entry::Done(m.clone()));
    Ok(m)
}

/// Renders one moded op with `^in`/`^out` annotations on every occurrence.
pub fn show_op(np: &NormalProgram, rel: &NormalRelation, op: &ModedOp) -> String {
    let n = |v: &VarId| rel.var_name(*v);
    let ctor = |c: &CtorId, args: Vec<String>| {
        let name = np.schema.ctor_name(*c);
        if args.is_empty() {
            name.to_string()
        } else {
            format!("{name}({})", args.join(", "))
        }
    };
    let ann = |v: &VarId, m: Mode| format!("{}^{}", n(v), if m == Mode::In { "in" } else { "out" });
    match op {
        ModedOp::Guard(v, w) => format!("{} == {}", ann(v, Mode::In), ann(w, Mode::In)),
        ModedOp::GuardCtor(v, c, args, modes) => format!(
            "{} == {}",
            ann(v, Mode::In),
            ctor(c, args.iter().zip(modes).map(|(a, m)| ann(a, *m)).collect())
        ),
        ModedOp::Assign(v, FlatTerm::Var(w)) => format!("{} == {}", ann(v, Mode::Out), ann(w, Mode::In)),
        ModedOp::Assign(v, FlatTerm::Ctor(c, args)) => format!(
            "{} == {}",
            ann(v, Mode::Out),
            ctor(c, args.iter().map(|a| ann(a, Mode::In)).collect())
        ),
        ModedOp::Match(v, c, args) => format!(
            "{} == {}",
            ann(v, Mode::In),
            ctor(c, args.iter().map(|a| ann(a, Mode::Out)).collect())
        ),
        ModedOp::GenerateVar(v) => format!("generate {} : {}", ann(v, Mode::Out), np.schema.type_name(v.ty)),
        ModedOp::DirCall(d, args) => {
            let args: Vec<String> = args.iter().zip(&d.modes).map(|(a, m)| ann(a, *m)).collect();
            format!("{}({})", d.rel, args.join(", "))
        }
    }
}

/// Every analyzed direction with its clauses in scheduled order.
pub fn show_table(np: &NormalProgram, table: &ModeTable) -> String {
    let mut out = String::new();
    for m in table.done() {
        let rel = np.relation(&m.direction.rel).expect("analyzed relation exists");
        let params: Vec<String> = rel
            .params
            .iter()
            .zip(&m.direction.modes)
            .map(|(p, md)| format!("{}^{}", rel.var_name(*p), if *md == Mode::In { "in" } else { "out" }))
            .collect();
        out.push_str(&format!("{} ({}):\n", m.direction, params.join(", ")));
        for (i, c) in m.clauses.iter().enumerate() {
            out.push_str(&format!("  clause {}:\n", i + 1));
            for s in c {
                out.push_str(&format!("    {}\n", show_op(np, rel, &s.op)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::normalize;
    use crate::parse::parse;

    const ADDO: &str = "type Nat = O | S(Nat).\n\
        rel addo(x: Nat, y: Nat, z: Nat) := (x == O, y == z) \
        | (fresh x': Nat, z': Nat . (x == S(x'), addo(x', y, z'), z == S(z'))).\n";

    fn addo() -> NormalProgram {
        normalize(&parse(ADDO).unwrap())
    }

    fn kinds(m: &ModedRelation, clause: usize) -> Vec<&'static str> {
        m.clauses[clause].iter().map(|s| s.op.kind()).collect()
    }

    fn analyze(np: &NormalProgram, dir: &str) -> (ModedRelation, ModeTable) {
        let mut table = ModeTable::new();
        let m = infer(np, &Direction::parse("addo", dir).unwrap(), &mut table).unwrap();
        (m, table)
    }

    #[test]
    fn classify_examples() {
        let np = addo();
        let r = np.relation("addo").unwrap();
        let (x, y, z) = (r.params[0], r.params[1], r.params[2]);
        let c1 = &r.clauses[0].ops;
        let c2 = &r.clauses[1].ops;
        let xs = |vs: &[VarId]| vs.iter().copied().collect::<BTreeSet<_>>();
        assert!(matches!(classify(&c1[0], &xs(&[x]))[..], [ModedOp::GuardCtor(_, _, ref a, _)] if a.is_empty()));
        assert!(matches!(classify(&c2[0], &xs(&[x]))[..], [ModedOp::Match(..)]));
        assert!(matches!(
            classify(&c1[1], &xs(&[]))[..],
            [ModedOp::GenerateVar(g), ModedOp::Assign(a, FlatTerm::Var(b))] if g == y && a == z && b == y
        ));
        assert!(matches!(classify(&c1[1], &xs(&[y, z]))[..], [ModedOp::Guard(..)]));
    }

    #[test]
    fn forward_addition() {
        let np = addo();
        let (m, table) = analyze(&np, "iio");
        assert_eq!(kinds(&m, 0), ["GuardCtor", "Assign"]);
        assert_eq!(kinds(&m, 1), ["Match", "DirCall", "Assign"]);
        assert_eq!(table.entries.len(), 1);
        assert!(m.clauses.iter().flatten().all(|s| !s.op.is_generation()));
    }

    #[test]
    fn subtraction_matches_z_first() {
        let np = addo();
        let (m, _) = analyze(&np, "ooi");
        assert_eq!(kinds(&m, 1), ["Match", "DirCall", "Assign"]);
        let r = np.relation("addo").unwrap();
        assert!(matches!(&m.clauses[1][0].op, ModedOp::Match(v, ..) if *v == r.params[2]));
        assert!(matches!(&m.clauses[1][2].op, ModedOp::Assign(v, _) if *v == r.params[0]));
        assert!(m.clauses.iter().flatten().all(|s| !s.op.is_generation()));
    }

    #[test]
    fn generation_when_both_sides_unknown() {
        let np = addo();
        let (m, _) = analyze(&np, "ioo");
        assert_eq!(kinds(&m, 0), ["GuardCtor", "GenerateVar", "Assign"]);
        assert_eq!(kinds(&m, 1), ["Match", "DirCall", "Assign"]);
        let (m, table) = analyze(&np, "ooo");
        assert!(m.clauses[0].iter().any(|s| s.op.is_generation()));
        assert_eq!(table.entries.len(), 1);
    }

    #[test]
    fn binding_sets_grow() {
        let np = addo();
        for d in ["iii", "iio", "ioi", "ioo", "oii", "oio", "ooi", "ooo"] {
            let (m, _) = analyze(&np, d);
            for c in &m.clauses {
                let mut known: BTreeSet<VarId> = m.in_params.iter().copied().collect();
                for s in c {
                    assert!(s.op.reads().iter().all(|v| known.contains(v)), "{d}: {:?}", s.op);
                    assert!(known.is_subset(&s.binds_after));
                    known = s.binds_after.clone();
                }
                assert!(m.out_tuple.iter().all(|v| known.contains(v)));
            }
        }
    }

    #[test]
    fn printed_with_annotations() {
        let np = addo();
        let mut table = ModeTable::new();
        infer(&np, &Direction::parse("addo", "ooi").unwrap(), &mut table).unwrap();
        let text = show_table(&np, &table);
        assert!(text.contains("z^in == S(z'^out)\n    addo(x'^out, y^out, z'^in)\n    x^out == S(x'^in)"), "{text}");
    }

    #[test]
    fn direction_syntax() {
        assert_eq!(Direction::parse("r", "ioo").unwrap().dir_string(), "ioo");
        assert!(Direction::parse("r", "ix").is_err());
        let mut table = ModeTable::new();
        let err = infer(&addo(), &Direction::parse("addo", "io").unwrap(), &mut table);
        assert!(matches!(err, Err(ModeError::Arity { .. })));
    }
}
