//! Normalization into disjunctive, superhomogeneous form.
//!
//! Every relation becomes a list of clauses. A clause is a flat conjunction of
//! [`BaseOp`]s, each either `v == Var(w)`, `v == C(w1, ..., wn)` with distinct
//! `wi`, or a call whose arguments are distinct variables. Disjunctions that sit
//! inside a conjunction next to another disjunction are lifted into auxiliary
//! relations named `<rel>$disj<k>`, which keeps the output linear in the input.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::goal::{pretty_program, Goal, GoalAlgebra, GoalError, Program, RelationDef};
use crate::schema::{CtorId, LogicValue, TermSchema, TypeId, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FlatTerm {
    Var(VarId),
    Ctor(CtorId, Vec<VarId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseOp {
    Unify(VarId, FlatTerm),
    Call(String, Vec<VarId>),
}

impl BaseOp {
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            BaseOp::Unify(v, FlatTerm::Var(w)) => vec![*v, *w],
            BaseOp::Unify(v, FlatTerm::Ctor(_, args)) => std::iter::once(*v).chain(args.iter().copied()).collect(),
            BaseOp::Call(_, args) => args.clone(),
        }
    }

    fn rename(&self, f: &dyn Fn(VarId) -> VarId) -> BaseOp {
        match self {
            BaseOp::Unify(v, FlatTerm::Var(w)) => BaseOp::Unify(f(*v), FlatTerm::Var(f(*w))),
            BaseOp::Unify(v, FlatTerm::Ctor(c, args)) => {
                BaseOp::Unify(f(*v), FlatTerm::Ctor(*c, args.iter().map(|a| f(*a)).collect()))
            }
            BaseOp::Call(r, args) => BaseOp::Call(r.clone(), args.iter().map(|a| f(*a)).collect()),
        }
    }

    fn to_goal(&self) -> Goal {
        match self {
            BaseOp::Unify(v, FlatTerm::Var(w)) => Goal::Unify(LogicValue::Hole(*v), LogicValue::Hole(*w)),
            BaseOp::Unify(v, FlatTerm::Ctor(c, args)) => Goal::Unify(
                LogicValue::Hole(*v),
                LogicValue::node(*c, args.iter().map(|a| LogicValue::Hole(*a)).collect()),
            ),
            BaseOp::Call(r, args) => Goal::Call(r.clone(), args.iter().map(|a| LogicValue::Hole(*a)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub locals: Vec<VarId>,
    pub ops: Vec<BaseOp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalRelation {
    pub name: String,
    pub params: Vec<VarId>,
    pub clauses: Vec<Clause>,
    pub names: HashMap<u64, String>,
    /// Introduced by the normalizer rather than written by the user.
    pub aux: bool,
}

impl NormalRelation {
    pub fn var_name(&self, v: VarId) -> String {
        self.names.get(&v.id).cloned().unwrap_or_else(|| format!("x{}", v.id))
    }

    pub fn param_types(&self) -> Vec<TypeId> {
        self.params.iter().map(|v| v.ty).collect()
    }

    pub fn op_count(&self) -> usize {
        self.clauses.iter().map(|c| c.ops.len()).sum()
    }

    /// One past the largest variable id.
    pub fn var_span(&self) -> u64 {
        self.params
            .iter()
            .chain(self.clauses.iter().flat_map(|c| c.locals.iter()))
            .map(|v| v.id + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct NormalProgram {
    pub schema: Arc<TermSchema>,
    pub relations: IndexMap<String, NormalRelation>,
}

impl NormalProgram {
    pub fn relation(&self, name: &str) -> Option<&NormalRelation> {
        self.relations.get(name)
    }

    pub fn op_count(&self) -> usize {
        self.relations.values().map(|r| r.op_count()).sum()
    }

    /// Reads the normal form back as an ordinary program.
    pub fn embed(&self) -> Result<Program, GoalError> {
        let rels = self
            .relations
            .values()
            .map(|r| {
                let mut clauses: Vec<Goal> = r
                    .clauses
                    .iter()
                    .map(|c| {
                        let mut ops: Vec<Goal> = c.ops.iter().map(BaseOp::to_goal).collect();
                        let mut g = if ops.len() == 1 { ops.pop().unwrap() } else { Goal::Conj(ops) };
                        for v in c.locals.iter().rev() {
                            g = Goal::Fresh(*v, Box::new(g));
                        }
                        g
                    })
                    .collect();
                let body = if clauses.len() == 1 { clauses.pop().unwrap() } else { Goal::Disj(clauses) };
                let mut def = RelationDef::new(r.name.clone(), r.params.clone(), body);
                def.names = r.names.clone();
                def
            })
            .collect();
        Program::new(self.schema.clone(), rels)
    }

    /// Surface syntax for the normal form. It parses back to the same program.
    pub fn pretty(&self) -> String {
        match self.embed() {
            Ok(p) => pretty_program(&p),
            Err(e) => format!("% ill-formed normal program: {e}\n"),
        }
    }
}

/// Flattens `l == r` into base unifications. Temporaries are numbered from
/// `next` and returned alongside the ops.
pub fn flatten_unify(l: &LogicValue, r: &LogicValue, next: &mut u64) -> (Vec<BaseOp>, Vec<VarId>) {
    let mut ops = Vec::new();
    let mut temps = Vec::new();
    match (l, r) {
        (LogicValue::Hole(v), LogicValue::Hole(w)) => {
            if v != w {
                ops.push(BaseOp::Unify(*v, FlatTerm::Var(*w)));
            }
        }
        (LogicValue::Hole(v), node) | (node, LogicValue::Hole(v)) => {
            bind(*v, node, next, &mut ops, &mut temps);
        }
        (LogicValue::Node(c, _), _) => {
            let t = temp(c.ty, next, &mut temps);
            bind(t, l, next, &mut ops, &mut temps);
            bind(t, r, next, &mut ops, &mut temps);
        }
    }
    (ops, temps)
}

/// Flattens a call so that every argument is a distinct variable.
pub fn flatten_call(rel: &str, args: &[LogicValue], next: &mut u64) -> (Vec<BaseOp>, Vec<VarId>) {
    let mut ops = Vec::new();
    let mut temps = Vec::new();
    let vars = linear_args(args, next, &mut ops, &mut temps);
    let mut pre = Vec::new();
    std::mem::swap(&mut pre, &mut ops);
    pre.push(BaseOp::Call(rel.to_string(), vars));
    (pre, temps)
}

fn temp(ty: TypeId, next: &mut u64, temps: &mut Vec<VarId>) -> VarId {
    let v = VarId::new(*next, ty);
    *next += 1;
    temps.push(v);
    v
}

fn bind(v: VarId, node: &LogicValue, next: &mut u64, ops: &mut Vec<BaseOp>, temps: &mut Vec<VarId>) {
    let LogicValue::Node(c, args) = node else {
        let w = node.as_hole().unwrap();
        if v != w {
            ops.push(BaseOp::Unify(v, FlatTerm::Var(w)));
        }
        return;
    };
    let mut rest = Vec::new();
    let vars = linear_args(args, next, &mut rest, temps);
    ops.push(BaseOp::Unify(v, FlatTerm::Ctor(*c, vars)));
    ops.extend(rest);
}

// Replaces repeated variables and nested terms by temporaries, whose defining
// ops go to `ops` in argument order.
fn linear_args(args: &[LogicValue], next: &mut u64, ops: &mut Vec<BaseOp>, temps: &mut Vec<VarId>) -> Vec<VarId> {
    let mut vars: Vec<VarId> = Vec::with_capacity(args.len());
    let mut pending: Vec<(VarId, &LogicValue)> = Vec::new();
    for a in args {
        match a {
            LogicValue::Hole(w) if !vars.contains(w) => vars.push(*w),
            LogicValue::Hole(w) => {
                let t = temp(w.ty, next, temps);
                vars.push(t);
                pending.push((t, a));
            }
            LogicValue::Node(c, _) => {
                let t = temp(c.ty, next, temps);
                vars.push(t);
                pending.push((t, a));
            }
        }
    }
    for (t, a) in pending {
        bind(t, a, next, ops, temps);
    }
    vars
}

#[derive(Debug, Clone)]
enum Atom {
    Unify(LogicValue, LogicValue),
    Call(String, Vec<LogicValue>),
}

#[derive(Debug, Clone, Default)]
struct Conjunct {
    locals: Vec<VarId>,
    atoms: Vec<Atom>,
}

/// What the normalizing interpreter builds for each goal: the goal itself (for
/// free-variable queries) and its disjunctive normal form.
pub struct Dnf {
    goal: Goal,
    conjuncts: Vec<Conjunct>,
}

/// The normalizer as a goal interpreter. Lifted disjunctions accumulate in
/// `aux` while folding the body of `top`.
struct Normalizer<'a> {
    top: String,
    taken: &'a mut HashSet<String>,
    k: usize,
    aux: Vec<(String, Vec<VarId>, Vec<Conjunct>)>,
}

impl Normalizer<'_> {
    fn aux_name(&mut self) -> String {
        loop {
            let name = format!("{}$disj{}", self.top, self.k);
            self.k += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

impl GoalAlgebra for Normalizer<'_> {
    type Repr = Dnf;

    fn unify(&mut self, lhs: &LogicValue, rhs: &LogicValue) -> Dnf {
        Dnf {
            goal: Goal::Unify(lhs.clone(), rhs.clone()),
            conjuncts: vec![Conjunct {
                locals: vec![],
                atoms: vec![Atom::Unify(lhs.clone(), rhs.clone())],
            }],
        }
    }

    fn conj(&mut self, goals: Vec<Dnf>) -> Dnf {
        let goal = Goal::Conj(goals.iter().map(|d| d.goal.clone()).collect());
        let mut inline: Option<usize> = None;
        let mut parts = Vec::with_capacity(goals.len());
        for (i, d) in goals.into_iter().enumerate() {
            if d.conjuncts.len() > 1 {
                if inline.is_none() {
                    inline = Some(i);
                } else {
                    let params = d.goal.free_vars();
                    let name = self.aux_name();
                    let call = Atom::Call(name.clone(), params.iter().map(|v| LogicValue::Hole(*v)).collect());
                    self.aux.push((name, params, d.conjuncts));
                    parts.push(vec![Conjunct {
                        locals: vec![],
                        atoms: vec![call],
                    }]);
                    continue;
                }
            }
            parts.push(d.conjuncts);
        }
        let width = inline.map_or(1, |i| parts[i].len());
        let conjuncts = (0..width)
            .map(|j| {
                let mut out = Conjunct::default();
                for (i, p) in parts.iter().enumerate() {
                    let c = if Some(i) == inline { &p[j] } else { &p[0] };
                    out.locals.extend(c.locals.iter().copied());
                    out.atoms.extend(c.atoms.iter().cloned());
                }
                out
            })
            .collect();
        Dnf { goal, conjuncts }
    }

    fn disj(&mut self, goals: Vec<Dnf>) -> Dnf {
        let goal = Goal::Disj(goals.iter().map(|d| d.goal.clone()).collect());
        let conjuncts = goals.into_iter().flat_map(|d| d.conjuncts).collect();
        Dnf { goal, conjuncts }
    }

    fn call(&mut self, rel: &str, args: &[LogicValue]) -> Dnf {
        Dnf {
            goal: Goal::Call(rel.to_string(), args.to_vec()),
            conjuncts: vec![Conjunct {
                locals: vec![],
                atoms: vec![Atom::Call(rel.to_string(), args.to_vec())],
            }],
        }
    }

    fn fresh(&mut self, var: VarId, body: Dnf) -> Dnf {
        let conjuncts = body
            .conjuncts
            .into_iter()
            .map(|mut c| {
                c.locals.insert(0, var);
                c
            })
            .collect();
        Dnf {
            goal: Goal::Fresh(var, Box::new(body.goal)),
            conjuncts,
        }
    }
}

/// Normalizes every relation of `p`. Auxiliary relations follow the relation
/// they were lifted from.
pub fn normalize(p: &Program) -> NormalProgram {
    let mut taken: HashSet<String> = p.relations.keys().cloned().collect();
    let mut relations = IndexMap::new();
    for r in p.relations.values() {
        let mut alg = Normalizer {
            top: r.name.clone(),
            taken: &mut taken,
            k: 0,
            aux: Vec::new(),
        };
        let dnf = r.body.fold(&mut alg);
        let aux = std::mem::take(&mut alg.aux);
        let nr = finish(&r.name, &r.params, dnf.conjuncts, &r.names, false);
        relations.insert(nr.name.clone(), nr);
        for (name, params, conjuncts) in aux {
            let nr = finish(&name, &params, conjuncts, &r.names, true);
            relations.insert(name, nr);
        }
    }
    NormalProgram {
        schema: p.schema.clone(),
        relations,
    }
}

fn atom_vars(a: &Atom) -> Vec<VarId> {
    match a {
        Atom::Unify(l, r) => {
            let mut out = l.holes();
            out.extend(r.holes());
            out
        }
        Atom::Call(_, args) => args.iter().flat_map(|a| a.holes()).collect(),
    }
}

fn finish(
    name: &str,
    params: &[VarId],
    conjuncts: Vec<Conjunct>,
    names: &HashMap<u64, String>,
    aux: bool,
) -> NormalRelation {
    let mut next = params
        .iter()
        .copied()
        .chain(conjuncts.iter().flat_map(|c| c.locals.iter().copied().chain(c.atoms.iter().flat_map(atom_vars))))
        .map(|v| v.id + 1)
        .max()
        .unwrap_or(0);
    let first_temp = next;

    // Flatten.
    let mut raw: Vec<Clause> = Vec::with_capacity(conjuncts.len());
    for c in conjuncts {
        let mut ops = Vec::new();
        let mut temps = Vec::new();
        for a in &c.atoms {
            let (o, t) = match a {
                Atom::Unify(l, r) => flatten_unify(l, r, &mut next),
                Atom::Call(rel, args) => flatten_call(rel, args, &mut next),
            };
            ops.extend(o);
            temps.extend(t);
        }
        let used: HashSet<VarId> = ops.iter().flat_map(BaseOp::vars).collect();
        let mut locals: Vec<VarId> = c.locals.iter().chain(&temps).copied().filter(|v| used.contains(v)).collect();
        if ops.is_empty() {
            let v = match params.first().or(c.locals.first()) {
                Some(v) => *v,
                None => temp(TypeId(0), &mut next, &mut temps),
            };
            if !params.contains(&v) {
                locals = vec![v];
            }
            ops.push(BaseOp::Unify(v, FlatTerm::Var(v)));
        }
        raw.push(Clause { locals, ops });
    }

    // Rename densely: parameters first, then each clause's locals in turn.
    let mut out_names: HashMap<u64, String> = HashMap::new();
    let mut used_names: HashSet<String> = HashSet::new();
    let mut pick = |base: String, id: u64, scope: &mut HashSet<String>| {
        let mut n = base.clone();
        let mut k = 1;
        while scope.contains(&n) {
            n = format!("{base}_{k}");
            k += 1;
        }
        scope.insert(n.clone());
        out_names.insert(id, n);
    };
    let source_name = |v: VarId| -> String {
        if v.id >= first_temp {
            format!("_t{}", v.id - first_temp)
        } else {
            names.get(&v.id).cloned().unwrap_or_else(|| format!("x{}", v.id))
        }
    };
    let new_params: Vec<VarId> = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pick(source_name(*p), i as u64, &mut used_names);
            VarId::new(i as u64, p.ty)
        })
        .collect();
    let mut counter = params.len() as u64;
    let mut clauses = Vec::with_capacity(raw.len());
    for c in raw {
        let mut map: HashMap<VarId, VarId> = params.iter().copied().zip(new_params.iter().copied()).collect();
        let mut scope = used_names.clone();
        let locals: Vec<VarId> = c
            .locals
            .iter()
            .map(|v| {
                let nv = VarId::new(counter, v.ty);
                counter += 1;
                pick(source_name(*v), nv.id, &mut scope);
                map.insert(*v, nv);
                nv
            })
            .collect();
        let f = |v: VarId| map[&v];
        clauses.push(Clause {
            locals,
            ops: c.ops.iter().map(|o| o.rename(&f)).collect(),
        });
    }
    NormalRelation {
        name: name.to_string(),
        params: new_params,
        clauses,
        names: out_names,
        aux,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub relation: String,
    pub clause: Option<usize>,
    pub what: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clause {
            Some(i) => write!(f, "{} clause {}: {}", self.relation, i, self.what),
            None => write!(f, "{}: {}", self.relation, self.what),
        }
    }
}

/// Checks the structural invariants of the normal form.
pub fn check_normal(np: &NormalProgram) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    for r in np.relations.values() {
        let mut bad = |clause: Option<usize>, what: String| {
            out.push(Violation {
                relation: r.name.clone(),
                clause,
                what,
            })
        };
        if r.clauses.is_empty() {
            bad(None, "no clauses".into());
        }
        let mut declared: HashSet<u64> = HashSet::new();
        for p in &r.params {
            if !declared.insert(p.id) {
                bad(None, format!("variable {} declared twice", r.var_name(*p)));
            }
        }
        for (i, c) in r.clauses.iter().enumerate() {
            let mut scope: HashSet<VarId> = r.params.iter().copied().collect();
            for v in &c.locals {
                if !declared.insert(v.id) {
                    bad(Some(i), format!("variable {} declared twice", r.var_name(*v)));
                }
                scope.insert(*v);
            }
            if c.ops.is_empty() {
                bad(Some(i), "empty clause".into());
            }
            for op in &c.ops {
                for v in op.vars() {
                    if !scope.contains(&v) {
                        bad(Some(i), format!("variable {} is not in scope", r.var_name(v)));
                    }
                }
                match op {
                    BaseOp::Unify(v, FlatTerm::Var(w)) => {
                        if v.ty != w.ty {
                            bad(Some(i), format!("{} and {} differ in type", r.var_name(*v), r.var_name(*w)));
                        }
                    }
                    BaseOp::Unify(v, FlatTerm::Ctor(c, args)) => {
                        let expected = np.schema.ctor_args(*c);
                        if c.ty != v.ty
                            || expected.len() != args.len()
                            || args.iter().zip(expected).any(|(a, t)| a.ty != *t)
                        {
                            bad(Some(i), format!("ill-typed unification on {}", r.var_name(*v)));
                        }
                        if !distinct(args) {
                            bad(Some(i), format!("constructor arguments of {} are not distinct", r.var_name(*v)));
                        }
                    }
                    BaseOp::Call(rel, args) => {
                        match np.relations.get(rel) {
                            None => bad(Some(i), format!("unknown relation `{rel}`")),
                            Some(callee) => {
                                if callee.param_types() != args.iter().map(|a| a.ty).collect::<Vec<_>>() {
                                    bad(Some(i), format!("call to `{rel}` does not match its signature"));
                                }
                            }
                        }
                        if !distinct(args) {
                            bad(Some(i), format!("arguments of `{rel}` are not distinct"));
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn distinct(vs: &[VarId]) -> bool {
    let set: HashSet<&VarId> = vs.iter().collect();
    set.len() == vs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    const NAT: &str = "type Nat = O | S(Nat).\ntype Pair = P(Nat, Nat).\n";

    fn prog(rels: &str) -> Program {
        parse(&format!("{NAT}{rels}")).unwrap()
    }

    fn show(np: &NormalProgram, r: &NormalRelation, op: &BaseOp) -> String {
        match op {
            BaseOp::Unify(v, FlatTerm::Var(w)) => format!("{} == Var({})", r.var_name(*v), r.var_name(*w)),
            BaseOp::Unify(v, FlatTerm::Ctor(c, args)) => {
                let args: Vec<String> = args.iter().map(|a| r.var_name(*a)).collect();
                let c = np.schema.ctor_name(*c);
                if args.is_empty() {
                    format!("{} == {c}", r.var_name(*v))
                } else {
                    format!("{} == {c}({})", r.var_name(*v), args.join(", "))
                }
            }
            BaseOp::Call(rel, args) => {
                let args: Vec<String> = args.iter().map(|a| r.var_name(*a)).collect();
                format!("{rel}({})", args.join(", "))
            }
        }
    }

    fn ops_of(np: &NormalProgram, rel: &str, clause: usize) -> Vec<String> {
        let r = np.relation(rel).unwrap();
        r.clauses[clause].ops.iter().map(|o| show(np, r, o)).collect()
    }

    #[test]
    fn nested_constructor_gets_a_temporary() {
        let np = normalize(&prog("rel r(z: Nat) := (fresh z': Nat . z == S(S(z'))).\n"));
        assert_eq!(ops_of(&np, "r", 0), ["z == S(_t0)", "_t0 == S(z')"]);
    }

    #[test]
    fn repeated_argument_is_linearized() {
        let np = normalize(&prog("rel r(x: Pair, y: Nat) := (x == P(y, y)).\n"));
        assert_eq!(ops_of(&np, "r", 0), ["x == P(y, _t0)", "_t0 == Var(y)"]);
    }

    #[test]
    fn addo_normal_form() {
        let np = normalize(&prog(
            "rel addo(x: Nat, y: Nat, z: Nat) := (x == O, y == z) \
             | (fresh x': Nat, z': Nat . (x == S(x'), addo(x', y, z'), z == S(z'))).\n",
        ));
        assert_eq!(np.relations.len(), 1);
        assert_eq!(ops_of(&np, "addo", 0), ["x == O", "y == Var(z)"]);
        assert_eq!(ops_of(&np, "addo", 1), ["x == S(x')", "addo(x', y, z')", "z == S(z')"]);
        assert!(check_normal(&np).is_ok());
    }

    #[test]
    fn second_disjunction_is_lifted() {
        let np = normalize(&prog(
            "rel r(x: Nat, y: Nat) := (x == O | x == S(O)), (y == O | y == S(O)).\n",
        ));
        let total: usize = np.relations.values().map(|r| r.clauses.len()).sum();
        assert_eq!(total, 4);
        assert_eq!(np.relation("r").unwrap().clauses.len(), 2);
        let aux = np.relation("r$disj0").unwrap();
        assert!(aux.aux);
        assert_eq!(aux.params.len(), 1);
        assert_eq!(ops_of(&np, "r", 0), ["x == O", "r$disj0(y)"]);
        assert!(check_normal(&np).is_ok());
    }

    #[test]
    fn aux_names_avoid_collisions() {
        let np = normalize(&prog(
            "rel r$disj0(x: Nat) := (x == O).\n\
             rel r(x: Nat, y: Nat) := (x == O | x == S(O)), (y == O | y == S(O)).\n",
        ));
        assert!(np.relation("r$disj1").unwrap().aux);
    }

    #[test]
    fn constant_equation_and_trivial_clause() {
        let np = normalize(&prog("rel r(x: Nat) := (S(O) == S(O)) | (x == x).\n"));
        assert_eq!(ops_of(&np, "r", 0), ["_t0 == S(_t1)", "_t1 == O", "_t0 == S(_t2)", "_t2 == O"]);
        assert_eq!(ops_of(&np, "r", 1), ["x == Var(x)"]);
        assert!(check_normal(&np).is_ok());
    }

    #[test]
    fn nested_call_arguments_are_flattened() {
        let np = normalize(&prog(
            "rel p(a: Nat, b: Nat) := (a == b).\nrel q(x: Nat) := (p(x, x)) | (p(S(x), O)).\n",
        ));
        assert_eq!(ops_of(&np, "q", 0), ["_t0 == Var(x)", "p(x, _t0)"]);
        assert_eq!(ops_of(&np, "q", 1), ["_t1 == S(x)", "_t2 == O", "p(_t1, _t2)"]);
    }

    #[test]
    fn embedding_round_trips() {
        let np = normalize(&prog(
            "rel r(x: Nat, y: Nat) := (x == O | x == S(O)), (y == O | fresh k: Nat . y == S(S(k))).\n",
        ));
        let strip = |np: &NormalProgram| -> Vec<(Vec<VarId>, Vec<Clause>)> {
            np.relations.values().map(|r| (r.params.clone(), r.clauses.clone())).collect()
        };
        let again = normalize(&np.embed().unwrap());
        assert_eq!(strip(&np), strip(&again));
        let reparsed = parse(&np.pretty()).unwrap();
        assert_eq!(strip(&normalize(&reparsed)), strip(&np));
    }

    #[test]
    fn violations_are_reported() {
        let mut np = normalize(&prog("rel r(x: Pair, y: Nat) := (x == P(y, y)).\n"));
        let r = np.relations.get_mut("r").unwrap();
        let y = r.params[1];
        let c = np.schema.ctor_id("S").unwrap();
        r.clauses[0].ops.push(BaseOp::Unify(r.params[0], FlatTerm::Ctor(c, vec![y, y])));
        r.clauses.push(Clause { locals: vec![], ops: vec![] });
        let errs = check_normal(&np).unwrap_err();
        assert_eq!(errs.len(), 3);
    }
}
