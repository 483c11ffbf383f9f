//! The goal language: unification, conjunction, disjunction, relation calls and
//! fresh-variable introduction.
//!
//! Goals are built through a checked [`GoalBuilder`] and stored as a syntax tree.
//! Every consumer of goals (evaluation, normalization, printing) is written as an
//! implementation of [`GoalAlgebra`] and driven by [`Goal::fold`], so new
//! interpreters plug in without touching this module.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::schema::{LogicValue, TermSchema, TypeError, TypeId, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Goal {
    Unify(LogicValue, LogicValue),
    Conj(Vec<Goal>),
    Disj(Vec<Goal>),
    Call(String, Vec<LogicValue>),
    Fresh(VarId, Box<Goal>),
}

/// A constructor interface over goals. Each interpreter chooses its own
/// representation; [`Goal::fold`] feeds a syntax tree through it bottom-up.
pub trait GoalAlgebra {
    type Repr;

    fn unify(&mut self, lhs: &LogicValue, rhs: &LogicValue) -> Self::Repr;
    fn conj(&mut self, goals: Vec<Self::Repr>) -> Self::Repr;
    fn disj(&mut self, goals: Vec<Self::Repr>) -> Self::Repr;
    fn call(&mut self, rel: &str, args: &[LogicValue]) -> Self::Repr;
    fn fresh(&mut self, var: VarId, body: Self::Repr) -> Self::Repr;
}

/// The initial interpretation: rebuilds the syntax tree.
pub struct SyntaxTree;

impl GoalAlgebra for SyntaxTree {
    type Repr = Goal;

    fn unify(&mut self, lhs: &LogicValue, rhs: &LogicValue) -> Goal {
        Goal::Unify(lhs.clone(), rhs.clone())
    }
    fn conj(&mut self, goals: Vec<Goal>) -> Goal {
        Goal::Conj(goals)
    }
    fn disj(&mut self, goals: Vec<Goal>) -> Goal {
        Goal::Disj(goals)
    }
    fn call(&mut self, rel: &str, args: &[LogicValue]) -> Goal {
        Goal::Call(rel.to_string(), args.to_vec())
    }
    fn fresh(&mut self, var: VarId, body: Goal) -> Goal {
        Goal::Fresh(var, Box::new(body))
    }
}

impl Goal {
    pub fn fold<A: GoalAlgebra>(&self, alg: &mut A) -> A::Repr {
        match self {
            Goal::Unify(l, r) => alg.unify(l, r),
            Goal::Conj(gs) => {
                let parts = gs.iter().map(|g| g.fold(alg)).collect();
                alg.conj(parts)
            }
            Goal::Disj(gs) => {
                let parts = gs.iter().map(|g| g.fold(alg)).collect();
                alg.disj(parts)
            }
            Goal::Call(r, args) => alg.call(r, args),
            Goal::Fresh(v, body) => {
                let b = body.fold(alg);
                alg.fresh(*v, b)
            }
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarId>, out: &mut Vec<VarId>) {
        let push = |l: &LogicValue, bound: &Vec<VarId>, out: &mut Vec<VarId>| {
            for v in l.holes() {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Goal::Unify(l, r) => {
                push(l, bound, out);
                push(r, bound, out);
            }
            Goal::Call(_, args) => args.iter().for_each(|a| push(a, bound, out)),
            Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| g.collect_free(bound, out)),
            Goal::Fresh(v, body) => {
                bound.push(*v);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable mentioned, bound or free.
    pub fn all_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.visit(&mut |g| match g {
            Goal::Unify(l, r) => {
                l.collect_holes(&mut out);
                r.collect_holes(&mut out);
            }
            Goal::Call(_, args) => args.iter().for_each(|a| a.collect_holes(&mut out)),
            Goal::Fresh(v, _) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            _ => {}
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Goal)) {
        f(self);
        match self {
            Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| g.visit(f)),
            Goal::Fresh(_, b) => b.visit(f),
            _ => {}
        }
    }

    /// Number of unifications and calls.
    pub fn atom_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |g| {
            if matches!(g, Goal::Unify(..) | Goal::Call(..)) {
                n += 1;
            }
        });
        n
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoalError {
    #[error("relation `{rel}` takes {expected} arguments, got {found}")]
    ArityMismatch {
        rel: String,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    TypeMismatch(#[from] TypeError),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("empty {0}")]
    EmptyJunction(&'static str),
    #[error("variable _{0} is introduced twice")]
    DuplicateVar(u64),
    #[error("variable _{0} is not in scope")]
    UnboundVar(u64),
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
}

/// Hands out session-unique variable ids. Safe to share between threads.
#[derive(Debug, Default)]
pub struct VarSupply {
    next: AtomicU64,
}

impl VarSupply {
    pub fn new() -> Self {
        VarSupply::default()
    }

    pub fn starting_at(first: u64) -> Self {
        VarSupply {
            next: AtomicU64::new(first),
        }
    }

    pub fn fresh_var(&self, ty: TypeId) -> VarId {
        let id = self.next.fetch_add(1, Ordering::Relaxed);
        assert!(id != u64::MAX, "variable supply exhausted");
        VarId::new(id, ty)
    }

    pub fn peek(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }
}

/// Checked construction of goals against a schema and a set of relation signatures.
pub struct GoalBuilder<'a> {
    schema: &'a TermSchema,
    signatures: HashMap<String, Vec<TypeId>>,
    supply: VarSupply,
}

impl<'a> GoalBuilder<'a> {
    pub fn new(schema: &'a TermSchema) -> Self {
        GoalBuilder {
            schema,
            signatures: HashMap::new(),
            supply: VarSupply::new(),
        }
    }

    pub fn schema(&self) -> &TermSchema {
        self.schema
    }

    /// Declares a relation so calls to it can be checked (recursion included).
    pub fn declare(&mut self, rel: &str, params: &[TypeId]) {
        self.signatures.insert(rel.to_string(), params.to_vec());
    }

    pub fn fresh_var(&self, ty: TypeId) -> VarId {
        self.supply.fresh_var(ty)
    }

    pub fn fresh_var_named(&self, ty: &str) -> Result<VarId, GoalError> {
        let t = self
            .schema
            .type_id(ty)
            .ok_or_else(|| TypeError::UnknownType(ty.to_string()))?;
        Ok(self.fresh_var(t))
    }

    pub fn var(v: VarId) -> LogicValue {
        LogicValue::Hole(v)
    }

    /// Builds a constructor term.
    pub fn term(&self, ctor: &str, args: Vec<LogicValue>) -> Result<LogicValue, GoalError> {
        let c = self
            .schema
            .ctor_id(ctor)
            .ok_or_else(|| TypeError::UnknownCtor(ctor.to_string()))?;
        let t = LogicValue::node(c, args);
        self.schema.type_of(&t)?;
        Ok(t)
    }

    pub fn unify(&self, lhs: LogicValue, rhs: LogicValue) -> Result<Goal, GoalError> {
        let lt = self.schema.type_of(&lhs)?;
        let rt = self.schema.type_of(&rhs)?;
        if lt != rt {
            return Err(TypeError::Mismatch {
                expected: self.schema.type_name(lt).to_string(),
                found: self.schema.type_name(rt).to_string(),
            }
            .into());
        }
        Ok(Goal::Unify(lhs, rhs))
    }

    pub fn conj(&self, goals: Vec<Goal>) -> Result<Goal, GoalError> {
        if goals.is_empty() {
            return Err(GoalError::EmptyJunction("conjunction"));
        }
        Ok(Goal::Conj(goals))
    }

    pub fn disj(&self, goals: Vec<Goal>) -> Result<Goal, GoalError> {
        if goals.is_empty() {
            return Err(GoalError::EmptyJunction("disjunction"));
        }
        Ok(Goal::Disj(goals))
    }

    pub fn call(&self, rel: &str, args: Vec<LogicValue>) -> Result<Goal, GoalError> {
        let sig = self
            .signatures
            .get(rel)
            .ok_or_else(|| GoalError::UnknownRelation(rel.to_string()))?;
        check_call(self.schema, rel, sig, &args)?;
        Ok(Goal::Call(rel.to_string(), args))
    }

    /// Introduces a fresh variable of type `ty` scoped over the body built by `f`.
    pub fn fresh(
        &self,
        ty: TypeId,
        f: impl FnOnce(&Self, VarId) -> Result<Goal, GoalError>,
    ) -> Result<Goal, GoalError> {
        let v = self.fresh_var(ty);
        let body = f(self, v)?;
        Ok(Goal::Fresh(v, Box::new(body)))
    }
}

fn check_call(schema: &TermSchema, rel: &str, sig: &[TypeId], args: &[LogicValue]) -> Result<(), GoalError> {
    if sig.len() != args.len() {
        return Err(GoalError::ArityMismatch {
            rel: rel.to_string(),
            expected: sig.len(),
            found: args.len(),
        });
    }
    for (a, t) in args.iter().zip(sig) {
        let at = schema.type_of(a)?;
        if at != *t {
            return Err(TypeError::Mismatch {
                expected: schema.type_name(*t).to_string(),
                found: schema.type_name(at).to_string(),
            }
            .into());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDef {
    pub name: String,
    pub params: Vec<VarId>,
    pub body: Goal,
    /// Source names of variables, by id. Unnamed variables print as `x<id>`.
    pub names: HashMap<u64, String>,
}

impl RelationDef {
    pub fn new(name: impl Into<String>, params: Vec<VarId>, body: Goal) -> Self {
        RelationDef {
            name: name.into(),
            params,
            body,
            names: HashMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn param_types(&self) -> Vec<TypeId> {
        self.params.iter().map(|v| v.ty).collect()
    }

    /// One past the largest variable id used by this relation.
    pub fn var_span(&self) -> u64 {
        self.params
            .iter()
            .copied()
            .chain(self.body.all_vars())
            .map(|v| v.id + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn var_name(&self, v: VarId) -> String {
        self.names.get(&v.id).cloned().unwrap_or_else(|| format!("x{}", v.id))
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub schema: Arc<TermSchema>,
    pub relations: IndexMap<String, RelationDef>,
}

impl Program {
    /// Validates every relation against the schema and the other relations.
    pub fn new(schema: Arc<TermSchema>, relations: Vec<RelationDef>) -> Result<Program, GoalError> {
        let mut map = IndexMap::new();
        for r in relations {
            if map.contains_key(&r.name) {
                return Err(GoalError::DuplicateRelation(r.name));
            }
            map.insert(r.name.clone(), r);
        }
        let p = Program { schema, relations: map };
        for r in p.relations.values() {
            p.check_relation(r)?;
        }
        Ok(p)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDef> {
        self.relations.get(name)
    }

    fn check_relation(&self, r: &RelationDef) -> Result<(), GoalError> {
        let mut seen = HashSet::new();
        for p in &r.params {
            if !seen.insert(p.id) {
                return Err(GoalError::DuplicateVar(p.id));
            }
        }
        let mut scope: Vec<VarId> = r.params.clone();
        self.check_goal(&r.body, &mut scope, &mut seen)
    }

    fn check_goal(&self, g: &Goal, scope: &mut Vec<VarId>, seen: &mut HashSet<u64>) -> Result<(), GoalError> {
        let in_scope = |l: &LogicValue, scope: &Vec<VarId>| -> Result<(), GoalError> {
            for v in l.holes() {
                if !scope.contains(&v) {
                    return Err(GoalError::UnboundVar(v.id));
                }
            }
            Ok(())
        };
        match g {
            Goal::Unify(l, r) => {
                in_scope(l, scope)?;
                in_scope(r, scope)?;
                let lt = self.schema.type_of(l)?;
                let rt = self.schema.type_of(r)?;
                if lt != rt {
                    return Err(TypeError::Mismatch {
                        expected: self.schema.type_name(lt).to_string(),
                        found: self.schema.type_name(rt).to_string(),
                    }
                    .into());
                }
                Ok(())
            }
            Goal::Call(rel, args) => {
                let callee = self
                    .relations
                    .get(rel)
                    .ok_or_else(|| GoalError::UnknownRelation(rel.clone()))?;
                for a in args {
                    in_scope(a, scope)?;
                }
                check_call(&self.schema, rel, &callee.param_types(), args)
            }
            Goal::Conj(gs) | Goal::Disj(gs) => {
                if gs.is_empty() {
                    return Err(GoalError::EmptyJunction(if matches!(g, Goal::Conj(_)) {
                        "conjunction"
                    } else {
                        "disjunction"
                    }));
                }
                gs.iter().try_for_each(|g| self.check_goal(g, scope, seen))
            }
            Goal::Fresh(v, body) => {
                if !seen.insert(v.id) {
                    return Err(GoalError::DuplicateVar(v.id));
                }
                scope.push(*v);
                let res = self.check_goal(body, scope, seen);
                scope.pop();
                res
            }
        }
    }
}

/// Intermediate document produced by the printing interpreter.
#[derive(Debug, Clone)]
pub enum Doc {
    Atom(String),
    Conj(Vec<Doc>),
    Disj(Vec<Doc>),
    Fresh(Vec<String>, Box<Doc>),
}

/// Renders goals in the concrete syntax.
pub struct Pretty<'a> {
    pub schema: &'a TermSchema,
    pub names: &'a dyn Fn(VarId) -> String,
}

impl GoalAlgebra for Pretty<'_> {
    type Repr = Doc;

    fn unify(&mut self, lhs: &LogicValue, rhs: &LogicValue) -> Doc {
        Doc::Atom(format!(
            "{} == {}",
            self.schema.show_logic(lhs, self.names),
            self.schema.show_logic(rhs, self.names)
        ))
    }
    fn conj(&mut self, goals: Vec<Doc>) -> Doc {
        if goals.len() == 1 {
            return goals.into_iter().next().unwrap();
        }
        Doc::Conj(goals)
    }
    fn disj(&mut self, goals: Vec<Doc>) -> Doc {
        if goals.len() == 1 {
            return goals.into_iter().next().unwrap();
        }
        Doc::Disj(goals)
    }
    fn call(&mut self, rel: &str, args: &[LogicValue]) -> Doc {
        let args: Vec<String> = args.iter().map(|a| self.schema.show_logic(a, self.names)).collect();
        Doc::Atom(format!("{}({})", rel, args.join(", ")))
    }
    fn fresh(&mut self, var: VarId, body: Doc) -> Doc {
        let binder = format!("{}: {}", (self.names)(var), self.schema.type_name(var.ty));
        match body {
            Doc::Fresh(mut bs, b) => {
                bs.insert(0, binder);
                Doc::Fresh(bs, b)
            }
            other => Doc::Fresh(vec![binder], Box::new(other)),
        }
    }
}

impl Doc {
    /// Text usable wherever a single goal is expected.
    fn render_goal(&self) -> String {
        match self {
            Doc::Atom(s) => s.clone(),
            Doc::Conj(_) | Doc::Disj(_) => format!("({})", self.render_junction()),
            Doc::Fresh(bs, body) => format!("fresh {} . {}", bs.join(", "), body.render_goal()),
        }
    }

    /// Text usable inside parentheses (a conjunction or disjunction).
    fn render_junction(&self) -> String {
        match self {
            Doc::Conj(gs) => gs.iter().map(Doc::render_goal).collect::<Vec<_>>().join(", "),
            Doc::Disj(gs) => gs
                .iter()
                .map(|g| match g {
                    Doc::Conj(_) => g.render_junction(),
                    _ => g.render_goal(),
                })
                .collect::<Vec<_>>()
                .join(" | "),
            _ => self.render_goal(),
        }
    }

    fn clauses(&self) -> Vec<String> {
        match self {
            Doc::Disj(gs) => gs.iter().map(|g| format!("({})", g.as_clause())).collect(),
            other => vec![format!("({})", other.as_clause())],
        }
    }

    fn as_clause(&self) -> String {
        match self {
            Doc::Conj(_) => self.render_junction(),
            _ => self.render_goal(),
        }
    }
}

pub fn pretty_goal(schema: &TermSchema, g: &Goal) -> String {
    let names = |v: VarId| format!("x{}", v.id);
    let doc = g.fold(&mut Pretty { schema, names: &names });
    doc.render_goal()
}

pub fn pretty_schema(schema: &TermSchema) -> String {
    let mut out = String::new();
    for t in &schema.raw().types {
        let ctors: Vec<String> = t
            .constructors
            .iter()
            .map(|c| {
                if c.arg_types.is_empty() {
                    c.name.clone()
                } else {
                    format!("{}({})", c.name, c.arg_types.join(", "))
                }
            })
            .collect();
        out.push_str(&format!("type {} = {}.\n", t.name, ctors.join(" | ")));
    }
    out
}

pub fn pretty_relation(schema: &TermSchema, r: &RelationDef) -> String {
    let names = |v: VarId| r.var_name(v);
    let doc = r.body.fold(&mut Pretty { schema, names: &names });
    let params: Vec<String> = r
        .params
        .iter()
        .map(|p| format!("{}: {}", r.var_name(*p), schema.type_name(p.ty)))
        .collect();
    format!(
        "rel {}({}) :=\n    {}.\n",
        r.name,
        params.join(", "),
        doc.clauses().join("\n  | ")
    )
}

pub fn pretty_program(p: &Program) -> String {
    let mut out = pretty_schema(&p.schema);
    for r in p.relations.values() {
        out.push('\n');
        out.push_str(&pretty_relation(&p.schema, r));
    }
    out
}
