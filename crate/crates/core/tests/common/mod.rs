//! Oracles shared by the integration tests: brute-force value pools, native
//! Rust semantics for every corpus relation, and the engine comparison.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use kanrel::convert::{convert, Procs};
use kanrel::corpus;
use kanrel::goal::Program;
use kanrel::interp::{answers, eval_stream, query, walk_all, Reification, State};
use kanrel::modes::{Direction, Mode};
use kanrel::normal::normalize;
use kanrel::schema::{GroundValue, LogicValue, TermSchema, TypeId, VarId};
use kanrel::stream::Pull;

pub type Tuple = Vec<GroundValue>;

/// Runs `f` on a thread with a large stack.
pub fn big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .unwrap()
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}

/// Every value of `ty` with at most `k` nodes, built by plain recursion.
pub fn pool(schema: &TermSchema, ty: TypeId, k: usize) -> Vec<GroundValue> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    for c in schema.ctors(ty) {
        let args = schema.ctor_args(c).to_vec();
        let mut partial: Vec<(Vec<GroundValue>, usize)> = vec![(vec![], 1)];
        for a in args {
            let mut next = Vec::new();
            for (prefix, used) in &partial {
                for v in pool(schema, a, k - used) {
                    let n = v.node_count();
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push((p, used + n));
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(args, _)| GroundValue::new(c, args)));
    }
    out
}

/// All tuples of the cartesian product.
pub fn product(columns: &[Vec<GroundValue>]) -> Vec<Tuple> {
    columns.iter().fold(vec![vec![]], |acc, col| {
        acc.iter()
            .flat_map(|t| {
                col.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v.clone());
                    t
                })
            })
            .collect()
    })
}

pub fn in_types(p: &Program, dir: &Direction) -> Vec<TypeId> {
    let def = p.relation(&dir.rel).unwrap();
    def.params.iter().zip(&dir.modes).filter(|(_, m)| **m == Mode::In).map(|(v, _)| v.ty).collect()
}

pub fn out_types(p: &Program, dir: &Direction) -> Vec<TypeId> {
    let def = p.relation(&dir.rel).unwrap();
    def.params.iter().zip(&dir.modes).filter(|(_, m)| **m == Mode::Out).map(|(v, _)| v.ty).collect()
}

/// Input tuples for `dir` with every component of at most `k` nodes.
pub fn input_pool(p: &Program, dir: &Direction, k: usize) -> Vec<Tuple> {
    let cols: Vec<_> = in_types(p, dir).into_iter().map(|t| pool(&p.schema, t, k)).collect();
    product(&cols)
}

pub fn merge(dir: &Direction, ins: &[GroundValue], outs: &[GroundValue]) -> Tuple {
    let (mut i, mut o) = (ins.iter(), outs.iter());
    dir.modes
        .iter()
        .map(|m| match m {
            Mode::In => i.next().unwrap().clone(),
            Mode::Out => o.next().unwrap().clone(),
        })
        .collect()
}

// ---- native semantics ----

fn name<'a>(s: &'a TermSchema, g: &GroundValue) -> &'a str {
    s.ctor_name(g.ctor)
}

pub fn nat(s: &TermSchema, g: &GroundValue) -> usize {
    match name(s, g) {
        "O" => 0,
        _ => 1 + nat(s, &g.args[0]),
    }
}

fn list(s: &TermSchema, g: &GroundValue) -> Vec<usize> {
    match name(s, g) {
        "Nil" => vec![],
        _ => {
            let mut v = vec![nat(s, &g.args[0])];
            v.extend(list(s, &g.args[1]));
            v
        }
    }
}

#[derive(Debug, PartialEq, Eq, Clone)]
enum Tree {
    Leaf,
    Node(Box<Tree>, Box<Tree>),
}

fn tree(s: &TermSchema, g: &GroundValue) -> Tree {
    match name(s, g) {
        "Leaf" => Tree::Leaf,
        _ => Tree::Node(Box::new(tree(s, &g.args[0])), Box::new(tree(s, &g.args[1]))),
    }
}

fn size(t: &Tree) -> usize {
    match t {
        Tree::Leaf => 0,
        Tree::Node(l, r) => 1 + size(l) + size(r),
    }
}

fn balanced(n: usize) -> Tree {
    if n == 0 {
        return Tree::Leaf;
    }
    let m = n - 1;
    Tree::Node(Box::new(balanced(m / 2)), Box::new(balanced(m - m / 2)))
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
enum Ty {
    Int,
    Bool,
}

fn ty(s: &TermSchema, g: &GroundValue) -> Ty {
    if name(s, g) == "TInt" {
        Ty::Int
    } else {
        Ty::Bool
    }
}

fn ctx(s: &TermSchema, g: &GroundValue) -> Vec<Ty> {
    match name(s, g) {
        "Empty" => vec![],
        _ => {
            let mut v = vec![ty(s, &g.args[0])];
            v.extend(ctx(s, &g.args[1]));
            v
        }
    }
}

fn type_of(s: &TermSchema, g: &[Ty], e: &GroundValue) -> Option<Ty> {
    match name(s, e) {
        "Lit" => Some(Ty::Int),
        "BTrue" | "BFalse" => Some(Ty::Bool),
        "Add" => (type_of(s, g, &e.args[0])? == Ty::Int && type_of(s, g, &e.args[1])? == Ty::Int).then_some(Ty::Int),
        "If" => {
            if type_of(s, g, &e.args[0])? != Ty::Bool {
                return None;
            }
            let a = type_of(s, g, &e.args[1])?;
            (type_of(s, g, &e.args[2])? == a).then_some(a)
        }
        _ => g.get(nat(s, &e.args[0])).copied(),
    }
}

/// Whether the ground tuple `args` is in relation `rel`, computed natively.
pub fn holds(p: &Program, rel: &str, args: &[GroundValue]) -> bool {
    let s = &*p.schema;
    let n = |i: usize| nat(s, &args[i]);
    match rel {
        "addo" => n(0) + n(1) == n(2),
        "leo" => n(0) <= n(1),
        "gto" => n(0) > n(1),
        "sorto" => {
            let mut xs = list(s, &args[0]);
            xs.sort();
            xs == list(s, &args[1])
        }
        "sizeo" => size(&tree(s, &args[0])) == n(1),
        "halveo" => n(0) / 2 == n(1) && n(0) - n(0) / 2 == n(2),
        "balancedo" => balanced(n(0)) == tree(s, &args[1]),
        "balanceo" => balanced(size(&tree(s, &args[0]))) == tree(s, &args[1]),
        "typecheck" => type_of(s, &[], &args[0]) == Some(ty(s, &args[1])),
        "typeo" => type_of(s, &ctx(s, &args[0]), &args[1]) == Some(ty(s, &args[2])),
        "lookupo" => ctx(s, &args[0]).get(n(1)) == Some(&ty(s, &args[2])),
        other => panic!("no native semantics for `{other}`"),
    }
}

/// Output tuples with every component of at most `k` nodes that complete
/// `ins` to a member of the relation.
pub fn brute_force(p: &Program, dir: &Direction, ins: &[GroundValue], k: usize) -> Vec<Tuple> {
    let cols: Vec<_> = out_types(p, dir).into_iter().map(|t| pool(&p.schema, t, k)).collect();
    product(&cols)
        .into_iter()
        .filter(|outs| holds(p, &dir.rel, &merge(dir, ins, outs)))
        .collect()
}

// ---- engines ----

pub fn multiset(ts: &[Tuple]) -> BTreeMap<Tuple, usize> {
    let mut m = BTreeMap::new();
    for t in ts {
        *m.entry(t.clone()).or_insert(0) += 1;
    }
    m
}

pub fn ref_args(dir: &Direction, ins: &[GroundValue]) -> Vec<Option<GroundValue>> {
    let mut i = ins.iter();
    dir.modes.iter().map(|m| (*m == Mode::In).then(|| i.next().unwrap().clone())).collect()
}

/// Up to `n` reference answers within `budget` stream steps.
pub fn ref_take(p: &Program, dir: &Direction, ins: &[GroundValue], n: usize, budget: u64) -> (Vec<Tuple>, Pull) {
    let q = query(p, &dir.rel, &ref_args(dir, ins)).unwrap();
    let mut it = answers(p, &q, Reification::Enumerate).into_iter();
    let (got, pull) = it.take_within(n, budget);
    (got.into_iter().map(|r| r.unwrap()).collect(), pull)
}

/// Up to `n` converted answers within `budget` stream steps.
pub fn conv_take(procs: &Procs, dir: &Direction, ins: &[GroundValue], n: usize, budget: u64) -> (Vec<Tuple>, Pull) {
    let mut it = procs.answers(dir, ins, false).unwrap().into_stream().into_iter();
    it.take_within(n, budget)
}

/// A loaded corpus query with its converted procedures.
pub struct Case {
    pub program: Program,
    pub procs: Procs,
    pub dir: Direction,
}

pub fn case(file: &str, rel: &str, dir: &str) -> Case {
    let program = corpus::load(file);
    let dir = Direction::parse(rel, dir).unwrap();
    let (procs, _) = convert(&normalize(&program), &dir).unwrap();
    Case { program, procs, dir }
}

/// How the two engines agreed on one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Agreement {
    /// Same first-`n` multiset, both streams complete or exhausted.
    Exact,
    /// The converted stream ended with `m < n` answers. The reference found
    /// exactly those, then ran a further `tail` steps without finding more
    /// and without ending.
    RefTail,
    /// Both produced `n` answers in different orders; each side's answers
    /// appear among the other's first `WINDOW * n`.
    Reordered,
}

/// How far into the other engine's stream a reordered answer may sit. The
/// reference engine dives into right-nested conditionals on typecheck@oi and
/// reaches some converted answers only after about 3500 others.
pub const WINDOW: usize = 200;

/// Extra reference steps spent looking for answers the converted engine
/// did not produce.
pub const TAIL: u64 = 200;

pub fn compare(c: &Case, ins: &[GroundValue], n: usize, budget: u64) -> Result<Agreement, String> {
    let (ca, cp) = conv_take(&c.procs, &c.dir, ins, n, budget);
    let q = query(&c.program, &c.dir.rel, &ref_args(&c.dir, ins)).unwrap();
    let mut it = answers(&c.program, &q, Reification::Enumerate).into_iter();
    let want = if cp == Pull::Exhausted { ca.len() } else { n };
    let (mut ra, mut rp) = it.take_within(want, budget);
    if cp == Pull::Exhausted && rp == Pull::Complete {
        // Look a little further for surplus answers.
        let (more, p) = it.take_within(n - want, it.steps() + TAIL);
        ra.extend(more);
        rp = p;
    }
    let ra: Vec<Tuple> = ra.into_iter().map(|r| r.unwrap()).collect();
    let show = |ts: &[Tuple]| -> String {
        ts.iter()
            .map(|t| t.iter().map(|g| c.program.schema.show_ground(g)).collect::<Vec<_>>().join(", "))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let detail = || {
        format!(
            "{} on [{}]: ref {:?} [{}] vs converted {:?} [{}]",
            c.dir,
            show(&[ins.to_vec()]),
            rp,
            show(&ra),
            cp,
            show(&ca)
        )
    };
    if cp == Pull::OutOfSteps {
        return Err(format!("converted engine out of steps: {}", detail()));
    }
    let same = multiset(&ra) == multiset(&ca);
    match (rp, cp, same) {
        (Pull::OutOfSteps, Pull::Exhausted, true) if ra.len() == ca.len() => Ok(Agreement::RefTail),
        (Pull::OutOfSteps, _, _) => Err(detail()),
        (_, _, true) => Ok(Agreement::Exact),
        (Pull::Complete, Pull::Complete, false) => {
            let (rw, _) = ref_take(&c.program, &c.dir, ins, WINDOW * n, budget * WINDOW as u64);
            let (cw, _) = conv_take(&c.procs, &c.dir, ins, WINDOW * n, budget * WINDOW as u64);
            if ca.iter().all(|t| rw.contains(t)) && ra.iter().all(|t| cw.contains(t)) {
                Ok(Agreement::Reordered)
            } else {
                Err(detail())
            }
        }
        _ => Err(detail()),
    }
}

/// Whether `g` is an instance of `l`, extending `env` with hole values.
pub fn instance_of(l: &LogicValue, g: &GroundValue, env: &mut HashMap<VarId, GroundValue>) -> bool {
    match l {
        LogicValue::Hole(v) => match env.get(v) {
            Some(h) => h == g,
            None => {
                env.insert(*v, g.clone());
                true
            }
        },
        LogicValue::Node(c, args) => *c == g.ctor && args.iter().zip(g.args.iter()).all(|(a, b)| instance_of(a, b, env)),
    }
}

/// Reference answer states of a query, each as the walked tuple of its
/// output positions (holes left where the answer is not ground).
pub fn ref_states<'p>(p: &'p Program, dir: &Direction, ins: &[GroundValue]) -> impl FnMut(u64) -> Option<Vec<LogicValue>> + 'p {
    let q = query(p, &dir.rel, &ref_args(dir, ins)).unwrap();
    let holes = q.holes.clone();
    let mut it = eval_stream(p, &q.goal, State::new()).into_iter();
    move |budget| {
        let st = it.next_within(budget).ok()??;
        Some(holes.iter().map(|h| walk_all(&st.subst, &LogicValue::Hole(*h))).collect())
    }
}

/// Whether the ground tuple is covered by the answer tuple.
pub fn covers(answer: &[LogicValue], t: &[GroundValue]) -> bool {
    let mut env = HashMap::new();
    answer.iter().zip(t).all(|(l, g)| instance_of(l, g, &mut env))
}

/// The reference engine's first `n` answers on `c`. When the converted
/// stream shows there are fewer than `n`, only that many are pulled, plus a
/// short tail to catch extras.
pub fn ref_window(c: &Case, ins: &[GroundValue], n: usize, budget: u64) -> Result<(Vec<Tuple>, Pull), String> {
    let (ca, cp) = conv_take(&c.procs, &c.dir, ins, n, budget);
    let want = if cp == Pull::Exhausted { ca.len() } else { n };
    let q = query(&c.program, &c.dir.rel, &ref_args(&c.dir, ins)).unwrap();
    let mut it = answers(&c.program, &q, Reification::Enumerate).into_iter();
    let (mut got, mut pull) = it.take_within(want, budget);
    if pull == Pull::OutOfSteps {
        return Err(format!("{} ran out of steps", c.dir));
    }
    if want < n && pull == Pull::Complete {
        let (more, p) = it.take_within(n - want, it.steps() + TAIL);
        got.extend(more);
        pull = p;
    }
    let got = got.into_iter().map(|r| r.unwrap()).collect();
    Ok((got, pull))
}

/// Same answer multiset.
pub fn agree(a: &(Vec<Tuple>, Pull), b: &(Vec<Tuple>, Pull)) -> bool {
    multiset(&a.0) == multiset(&b.0)
}
