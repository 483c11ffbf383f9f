//! Reference evaluator: triangular substitutions, unification with occurs check,
//! and complete interleaving search.
//!
//! Every relation call is suspended once before its body is unfolded, so
//! recursive relations always yield control to the stream scheduler.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::goal::{Goal, GoalAlgebra, Program};
use crate::schema::{generate, GroundValue, LogicValue, TermSchema, TypeId, VarId};
use crate::stream::{Cont, Stream, StreamIter};

/// Triangular substitution: bound values may mention other bound variables,
/// never themselves.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    bindings: im::HashMap<u64, LogicValue>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, v: VarId) -> Option<&LogicValue> {
        self.bindings.get(&v.id)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (u64, &LogicValue)> {
        self.bindings.iter().map(|(k, v)| (*k, v))
    }

    /// Extends without any checks. Used by tests to build fixtures.
    pub fn extended(&self, v: VarId, l: LogicValue) -> Substitution {
        Substitution {
            bindings: self.bindings.update(v.id, l),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct State {
    pub subst: Substitution,
    /// Next unused variable id.
    pub counter: u64,
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn with_counter(counter: u64) -> Self {
        State {
            subst: Substitution::new(),
            counter,
        }
    }
}

/// Shallow walk: resolves a bound hole until a node or an unbound hole.
pub fn walk(s: &Substitution, l: &LogicValue) -> LogicValue {
    let mut cur = l;
    loop {
        match cur {
            LogicValue::Hole(v) => match s.get(*v) {
                Some(next) => cur = next,
                None => return cur.clone(),
            },
            LogicValue::Node(..) => return cur.clone(),
        }
    }
}

/// Resolves every hole reachable through `s`.
pub fn walk_all(s: &Substitution, l: &LogicValue) -> LogicValue {
    match walk(s, l) {
        LogicValue::Node(c, args) => LogicValue::Node(c, args.iter().map(|a| walk_all(s, a)).collect()),
        hole => hole,
    }
}

fn occurs(s: &Substitution, v: VarId, l: &LogicValue) -> bool {
    match walk(s, l) {
        LogicValue::Hole(w) => v == w,
        LogicValue::Node(_, args) => args.iter().any(|a| occurs(s, v, a)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot unify a value of type #{left} with a value of type #{right}")]
pub struct TypeMismatch {
    pub left: u32,
    pub right: u32,
}

fn shallow_type(l: &LogicValue) -> TypeId {
    match l {
        LogicValue::Hole(v) => v.ty,
        LogicValue::Node(c, _) => c.ty,
    }
}

/// Most general extension of `s` making `a` and `b` equal; `Ok(None)` on failure.
pub fn unify(s: &Substitution, a: &LogicValue, b: &LogicValue) -> Result<Option<Substitution>, TypeMismatch> {
    let (ta, tb) = (shallow_type(a), shallow_type(b));
    if ta != tb {
        return Err(TypeMismatch {
            left: ta.0,
            right: tb.0,
        });
    }
    let mut bindings = s.bindings.clone();
    let mut work = vec![(a.clone(), b.clone())];
    while let Some((a, b)) = work.pop() {
        let cur = Substitution { bindings };
        let a = walk(&cur, &a);
        let b = walk(&cur, &b);
        bindings = cur.bindings;
        match (a, b) {
            (LogicValue::Hole(v), LogicValue::Hole(w)) if v == w => {}
            (LogicValue::Hole(v), t) | (t, LogicValue::Hole(v)) => {
                if shallow_type(&t) != v.ty {
                    return Err(TypeMismatch {
                        left: v.ty.0,
                        right: shallow_type(&t).0,
                    });
                }
                let cur = Substitution { bindings };
                if occurs(&cur, v, &t) {
                    return Ok(None);
                }
                bindings = cur.bindings.update(v.id, t);
            }
            (LogicValue::Node(c1, xs), LogicValue::Node(c2, ys)) => {
                if c1 != c2 || xs.len() != ys.len() {
                    return Ok(None);
                }
                for (x, y) in xs.iter().zip(ys.iter()).rev() {
                    work.push((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(Some(Substitution { bindings }))
}

fn shift(l: &LogicValue, offset: u64) -> LogicValue {
    if offset == 0 {
        return l.clone();
    }
    match l {
        LogicValue::Hole(v) => LogicValue::Hole(VarId::new(v.id + offset, v.ty)),
        LogicValue::Node(c, args) => LogicValue::Node(*c, args.iter().map(|a| shift(a, offset)).collect()),
    }
}

type Compiled<'p> = Rc<dyn Fn(&Rc<Session<'p>>, u64, State) -> Stream<'p, State> + 'p>;

struct CompiledRelation<'p> {
    params: Vec<VarId>,
    span: u64,
    body: Compiled<'p>,
}

/// Per-evaluation cache of compiled relation bodies.
struct Session<'p> {
    program: &'p Program,
    relations: RefCell<HashMap<String, Rc<CompiledRelation<'p>>>>,
}

impl<'p> Session<'p> {
    fn relation(&self, name: &str) -> Rc<CompiledRelation<'p>> {
        if let Some(r) = self.relations.borrow().get(name) {
            return r.clone();
        }
        let def = self
            .program
            .relation(name)
            .unwrap_or_else(|| panic!("call to undefined relation `{name}`"));
        let compiled = Rc::new(CompiledRelation {
            params: def.params.clone(),
            span: def.var_span(),
            body: def.body.fold(&mut Evaluator { _p: std::marker::PhantomData }),
        });
        self.relations.borrow_mut().insert(name.to_string(), compiled.clone());
        compiled
    }
}

/// The evaluating interpretation of goals. Variables of a relation body are
/// renamed apart at each call by offsetting their ids into a block freshly
/// reserved from the state counter.
struct Evaluator<'p> {
    _p: std::marker::PhantomData<&'p ()>,
}

impl<'p> GoalAlgebra for Evaluator<'p> {
    type Repr = Compiled<'p>;

    fn unify(&mut self, lhs: &LogicValue, rhs: &LogicValue) -> Compiled<'p> {
        let (lhs, rhs) = (lhs.clone(), rhs.clone());
        Rc::new(move |_, off, st: State| {
            match unify(&st.subst, &shift(&lhs, off), &shift(&rhs, off)) {
                Ok(Some(subst)) => Stream::unit(State { subst, ..st }),
                Ok(None) => Stream::Empty,
                Err(e) => panic!("ill-typed unification reached the evaluator: {e}"),
            }
        })
    }

    fn conj(&mut self, goals: Vec<Compiled<'p>>) -> Compiled<'p> {
        let goals: Rc<[Compiled<'p>]> = goals.into();
        Rc::new(move |ses, off, st| {
            let mut stream = goals[0](ses, off, st);
            for g in goals[1..].iter() {
                let (g, ses) = (g.clone(), ses.clone());
                let k: Cont<'p, State, State> = Rc::new(move |st| g(&ses, off, st));
                stream = stream.bind(k);
            }
            stream
        })
    }

    fn disj(&mut self, goals: Vec<Compiled<'p>>) -> Compiled<'p> {
        let goals: Rc<[Compiled<'p>]> = goals.into();
        Rc::new(move |ses, off, st| {
            let mut stream = Stream::Empty;
            for g in goals.iter().rev() {
                stream = g(ses, off, st.clone()).mplus(stream);
            }
            stream
        })
    }

    fn call(&mut self, rel: &str, args: &[LogicValue]) -> Compiled<'p> {
        let rel = rel.to_string();
        let args = args.to_vec();
        Rc::new(move |ses, off, st| {
            let (ses, rel, args) = (ses.clone(), rel.clone(), args.clone());
            Stream::delay(move || {
                let callee = ses.relation(&rel);
                let base = st.counter;
                let mut subst = st.subst;
                for (p, a) in callee.params.iter().zip(&args) {
                    let param = LogicValue::Hole(VarId::new(p.id + base, p.ty));
                    match unify(&subst, &param, &shift(a, off)) {
                        Ok(Some(s)) => subst = s,
                        Ok(None) => return Stream::Empty,
                        Err(e) => panic!("ill-typed call reached the evaluator: {e}"),
                    }
                }
                let st = State {
                    subst,
                    counter: base + callee.span,
                };
                (callee.body)(&ses, base, st)
            })
        })
    }

    fn fresh(&mut self, _var: VarId, body: Compiled<'p>) -> Compiled<'p> {
        // The variable already lives in the block reserved by the enclosing call.
        body
    }
}

/// A lazily evaluated stream of answer states.
pub struct AnswerStream<'p> {
    inner: StreamIter<'p, State>,
}

impl<'p> AnswerStream<'p> {
    pub fn into_inner(self) -> StreamIter<'p, State> {
        self.inner
    }
}

impl<'p> Iterator for AnswerStream<'p> {
    type Item = State;

    fn next(&mut self) -> Option<State> {
        self.inner.next()
    }
}

/// Lazy stream of states satisfying `g`, starting from `st`.
///
/// Variables of `g` keep their ids; the state counter is raised past them so
/// that relation calls allocate disjoint blocks.
pub fn eval_stream<'p>(p: &'p Program, g: &Goal, st: State) -> Stream<'p, State> {
    let ses = Rc::new(Session {
        program: p,
        relations: RefCell::new(HashMap::new()),
    });
    let top = g.fold(&mut Evaluator { _p: std::marker::PhantomData });
    let min_counter = g.all_vars().iter().map(|v| v.id + 1).max().unwrap_or(0);
    let st = State {
        counter: st.counter.max(min_counter),
        ..st
    };
    top(&ses, 0, st)
}

pub fn eval<'p>(p: &'p Program, g: &Goal, st: State) -> AnswerStream<'p> {
    AnswerStream {
        inner: eval_stream(p, g, st).into_iter(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{rel}` takes {expected} arguments, got {found}")]
    Arity {
        rel: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{rel}` has the wrong type")]
    ArgumentType { rel: String, index: usize },
    #[error("answer leaves variable _{} unconstrained", .0.id)]
    UnconstrainedAnswer(VarId),
}

/// What to do with answers that leave query variables unbound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reification {
    /// Report [`RunError::UnconstrainedAnswer`].
    Strict,
    /// Enumerate every ground instance of the answer with the type generators.
    Enumerate,
}

/// A prepared query: the call goal plus the holes whose values make up an answer.
pub struct Query {
    pub goal: Goal,
    pub holes: Vec<VarId>,
}

pub fn query(p: &Program, rel: &str, args: &[Option<GroundValue>]) -> Result<Query, RunError> {
    let def = p
        .relation(rel)
        .ok_or_else(|| RunError::UnknownRelation(rel.to_string()))?;
    if def.arity() != args.len() {
        return Err(RunError::Arity {
            rel: rel.to_string(),
            expected: def.arity(),
            found: args.len(),
        });
    }
    let mut holes = Vec::new();
    let mut terms = Vec::new();
    for (i, (a, param)) in args.iter().zip(&def.params).enumerate() {
        match a {
            Some(g) => {
                if p.schema.check_ground(g, param.ty).is_err() {
                    return Err(RunError::ArgumentType {
                        rel: rel.to_string(),
                        index: i,
                    });
                }
                terms.push(g.project());
            }
            None => {
                let v = VarId::new(holes.len() as u64, param.ty);
                holes.push(v);
                terms.push(LogicValue::Hole(v));
            }
        }
    }
    Ok(Query {
        goal: Goal::Call(rel.to_string(), terms),
        holes,
    })
}

/// Stream of answer tuples (values of the hole positions, in order).
pub fn answers<'p>(p: &'p Program, q: &Query, how: Reification) -> Stream<'p, Result<Vec<GroundValue>, RunError>> {
    let holes = q.holes.clone();
    let schema = p.schema.clone();
    let states = eval_stream(p, &q.goal, State::new());
    states.bind(Rc::new(move |st: State| {
        let tuple: Vec<LogicValue> = holes
            .iter()
            .map(|h| walk_all(&st.subst, &LogicValue::Hole(*h)))
            .collect();
        let mut free = Vec::new();
        tuple.iter().for_each(|t| t.collect_holes(&mut free));
        if free.is_empty() {
            return Stream::unit(Ok(tuple.iter().map(|t| t.reify().unwrap()).collect()));
        }
        match how {
            Reification::Strict => Stream::unit(Err(RunError::UnconstrainedAnswer(free[0]))),
            Reification::Enumerate => ground_instances(&schema, tuple, free).bind(Rc::new(|t| Stream::unit(Ok(t)))),
        }
    }))
}

/// Every ground instance of `tuple`, choosing values for `free` fairly.
pub fn ground_instances<'p>(
    schema: &Arc<TermSchema>,
    tuple: Vec<LogicValue>,
    free: Vec<VarId>,
) -> Stream<'p, Vec<GroundValue>> {
    fn go<'p>(
        schema: Arc<TermSchema>,
        tuple: Rc<Vec<LogicValue>>,
        free: Rc<Vec<VarId>>,
        chosen: Vec<(VarId, GroundValue)>,
    ) -> Stream<'p, Vec<GroundValue>> {
        if chosen.len() == free.len() {
            let env = |v: VarId| chosen.iter().find(|(w, _)| *w == v).map(|(_, g)| g.project());
            let out = tuple
                .iter()
                .map(|t| t.deref(&env).ok().flatten().expect("all holes chosen"))
                .collect();
            return Stream::unit(out);
        }
        let v = free[chosen.len()];
        let gen = generate(&schema, v.ty);
        Stream::from_iter(gen).bind(Rc::new(move |g: GroundValue| {
            let mut chosen = chosen.clone();
            chosen.push((v, g));
            go(schema.clone(), tuple.clone(), free.clone(), chosen)
        }))
    }
    go(schema.clone(), Rc::new(tuple), Rc::new(free), Vec::new())
}

/// First `n` answers of `rel` with the given inputs (`None` marks an output position).
pub fn run(
    p: &Program,
    rel: &str,
    args: &[Option<GroundValue>],
    n: usize,
    how: Reification,
) -> Result<Vec<Vec<GroundValue>>, RunError> {
    let q = query(p, rel, args)?;
    answers(p, &q, how).into_iter().take(n).collect()
}
