//! Algebraic data type declarations and the values that live over them.
//!
//! A [`TermSchema`] is validated once from a [`RawSchema`] and is then read-only.
//! Ground values ([`GroundValue`]) contain no holes; logic values ([`LogicValue`])
//! may contain typed holes ([`VarId`]). The two are related by [`GroundValue::project`]
//! and [`LogicValue::reify`], and every inhabited type has a canonical enumeration
//! ([`Generator`]).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

/// A constructor, identified by its owning type and its position in that
/// type's declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtorId {
    pub ty: TypeId,
    pub index: u32,
}

/// A typed logic variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub id: u64,
    pub ty: TypeId,
}

impl VarId {
    pub fn new(id: u64, ty: TypeId) -> Self {
        VarId { id, ty }
    }
}

/// Unvalidated constructor declaration, as written in source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: String,
    pub arg_types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub constructors: Vec<CtorDecl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawSchema {
    pub types: Vec<TypeDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("constructor `{ctor}` refers to unknown type `{ty}`")]
    UnknownType { ctor: String, ty: String },
    #[error("type `{0}` has no finite values")]
    UninhabitedType(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("constructor `{ctor}` expects {expected} arguments, got {found}")]
    Arity {
        ctor: String,
        expected: usize,
        found: usize,
    },
    #[error("expected a value of type `{expected}`, found `{found}`")]
    Mismatch { expected: String, found: String },
    #[error("unknown constructor `{0}`")]
    UnknownCtor(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
}

#[derive(Debug, Clone)]
struct CtorInfo {
    name: String,
    args: Vec<TypeId>,
}

#[derive(Debug, Clone)]
struct TypeInfo {
    name: String,
    ctors: Vec<CtorInfo>,
    min_size: usize,
    /// `None` for types with infinitely many values.
    max_size: Option<usize>,
    /// Number of values, `None` when infinite or too large to count.
    count: Option<u64>,
}

/// A validated, closed set of algebraic data types.
#[derive(Debug, Clone)]
pub struct TermSchema {
    types: Vec<TypeInfo>,
    type_index: HashMap<String, TypeId>,
    ctor_index: HashMap<String, CtorId>,
    raw: RawSchema,
}

impl PartialEq for TermSchema {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl Eq for TermSchema {}

pub fn validate_schema(raw: RawSchema) -> Result<TermSchema, SchemaError> {
    TermSchema::validate(raw)
}

impl TermSchema {
    pub fn validate(raw: RawSchema) -> Result<TermSchema, SchemaError> {
        let mut type_index = HashMap::new();
        for (i, t) in raw.types.iter().enumerate() {
            if type_index.insert(t.name.clone(), TypeId(i as u32)).is_some() {
                return Err(SchemaError::DuplicateName(t.name.clone()));
            }
        }
        let mut ctor_index = HashMap::new();
        let mut types = Vec::with_capacity(raw.types.len());
        for (i, t) in raw.types.iter().enumerate() {
            let mut ctors = Vec::with_capacity(t.constructors.len());
            for (j, c) in t.constructors.iter().enumerate() {
                let id = CtorId {
                    ty: TypeId(i as u32),
                    index: j as u32,
                };
                if type_index.contains_key(&c.name) || ctor_index.insert(c.name.clone(), id).is_some() {
                    return Err(SchemaError::DuplicateName(c.name.clone()));
                }
                let args = c
                    .arg_types
                    .iter()
                    .map(|a| {
                        type_index.get(a).copied().ok_or_else(|| SchemaError::UnknownType {
                            ctor: c.name.clone(),
                            ty: a.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ctors.push(CtorInfo {
                    name: c.name.clone(),
                    args,
                });
            }
            types.push(TypeInfo {
                name: t.name.clone(),
                ctors,
                min_size: 0,
                max_size: None,
                count: None,
            });
        }

        // Inhabitation and minimal sizes by fixpoint.
        let mut min: Vec<Option<usize>> = vec![None; types.len()];
        loop {
            let mut changed = false;
            for (i, t) in types.iter().enumerate() {
                for c in &t.ctors {
                    let size = c
                        .args
                        .iter()
                        .try_fold(1usize, |acc, a| min[a.0 as usize].map(|m| acc + m));
                    if let Some(s) = size {
                        if min[i].map_or(true, |m| s < m) {
                            min[i] = Some(s);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (i, t) in types.iter_mut().enumerate() {
            match min[i] {
                Some(m) => t.min_size = m,
                None => return Err(SchemaError::UninhabitedType(t.name.clone())),
            }
        }

        // A type is finite iff no type reachable from it lies on a cycle.
        let n = types.len();
        let succ: Vec<HashSet<usize>> = types
            .iter()
            .map(|t| t.ctors.iter().flat_map(|c| c.args.iter().map(|a| a.0 as usize)).collect())
            .collect();
        let reach: Vec<HashSet<usize>> = (0..n)
            .map(|s| {
                let mut seen = HashSet::new();
                let mut stack: Vec<usize> = succ[s].iter().copied().collect();
                while let Some(u) = stack.pop() {
                    if seen.insert(u) {
                        stack.extend(succ[u].iter().copied());
                    }
                }
                seen
            })
            .collect();
        let cyclic: Vec<bool> = (0..n).map(|u| reach[u].contains(&u)).collect();
        let infinite: Vec<bool> = (0..n)
            .map(|t| cyclic[t] || reach[t].iter().any(|&u| cyclic[u]))
            .collect();
        // Finite types form a DAG; resolve sizes and counts by repeated passes.
        let mut max: Vec<Option<usize>> = vec![None; n];
        let mut count: Vec<Option<u64>> = vec![None; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                if infinite[i] || max[i].is_some() {
                    continue;
                }
                let ready = types[i]
                    .ctors
                    .iter()
                    .all(|c| c.args.iter().all(|a| max[a.0 as usize].is_some()));
                if !ready {
                    continue;
                }
                let mut m = 0;
                let mut total: Option<u64> = Some(0);
                for c in &types[i].ctors {
                    m = m.max(1 + c.args.iter().map(|a| max[a.0 as usize].unwrap()).sum::<usize>());
                    let prod = c.args.iter().try_fold(1u64, |acc, a| {
                        count[a.0 as usize].and_then(|k| acc.checked_mul(k))
                    });
                    total = total.and_then(|t| prod.and_then(|p| t.checked_add(p)));
                }
                max[i] = Some(m);
                count[i] = total;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        for (i, t) in types.iter_mut().enumerate() {
            t.max_size = max[i];
            t.count = count[i];
        }

        Ok(TermSchema {
            types,
            type_index,
            ctor_index,
            raw,
        })
    }

    pub fn raw(&self) -> &RawSchema {
        &self.raw
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn type_name(&self, ty: TypeId) -> &str {
        &self.types[ty.0 as usize].name
    }

    pub fn ctor_id(&self, name: &str) -> Option<CtorId> {
        self.ctor_index.get(name).copied()
    }

    pub fn ctor_name(&self, c: CtorId) -> &str {
        &self.types[c.ty.0 as usize].ctors[c.index as usize].name
    }

    pub fn ctor_args(&self, c: CtorId) -> &[TypeId] {
        &self.types[c.ty.0 as usize].ctors[c.index as usize].args
    }

    pub fn ctor_arity(&self, c: CtorId) -> usize {
        self.ctor_args(c).len()
    }

    /// Constructors of `ty` in declaration order.
    pub fn ctors(&self, ty: TypeId) -> impl Iterator<Item = CtorId> + '_ {
        (0..self.types[ty.0 as usize].ctors.len() as u32).map(move |index| CtorId { ty, index })
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> {
        (0..self.types.len() as u32).map(TypeId)
    }

    pub fn min_size(&self, ty: TypeId) -> usize {
        self.types[ty.0 as usize].min_size
    }

    /// Largest node count of any value of `ty`, or `None` if `ty` is infinite.
    pub fn max_size(&self, ty: TypeId) -> Option<usize> {
        self.types[ty.0 as usize].max_size
    }

    /// Number of values of `ty` when finite and representable.
    pub fn inhabitants(&self, ty: TypeId) -> Option<u64> {
        self.types[ty.0 as usize].count
    }

    pub fn is_singleton(&self, ty: TypeId) -> bool {
        self.inhabitants(ty) == Some(1)
    }

    /// Checks arity and argument types of a ground value against `expected`.
    pub fn check_ground(&self, g: &GroundValue, expected: TypeId) -> Result<(), TypeError> {
        // Values built against another schema may carry ids this one lacks.
        let known = self
            .types
            .get(g.ctor.ty.0 as usize)
            .is_some_and(|t| (g.ctor.index as usize) < t.ctors.len());
        if !known {
            return Err(TypeError::UnknownCtor(format!("#{}.{}", g.ctor.ty.0, g.ctor.index)));
        }
        if g.ctor.ty != expected {
            return Err(TypeError::Mismatch {
                expected: self.type_name(expected).to_string(),
                found: self.type_name(g.ctor.ty).to_string(),
            });
        }
        let args = self.ctor_args(g.ctor);
        if args.len() != g.args.len() {
            return Err(TypeError::Arity {
                ctor: self.ctor_name(g.ctor).to_string(),
                expected: args.len(),
                found: g.args.len(),
            });
        }
        for (a, t) in g.args.iter().zip(args) {
            self.check_ground(a, *t)?;
        }
        Ok(())
    }

    /// Computes the type of a logic value, checking it along the way.
    pub fn type_of(&self, l: &LogicValue) -> Result<TypeId, TypeError> {
        match l {
            LogicValue::Hole(v) => Ok(v.ty),
            LogicValue::Node(c, args) => {
                let expected = self.ctor_args(*c);
                if expected.len() != args.len() {
                    return Err(TypeError::Arity {
                        ctor: self.ctor_name(*c).to_string(),
                        expected: expected.len(),
                        found: args.len(),
                    });
                }
                for (a, t) in args.iter().zip(expected) {
                    let found = self.type_of(a)?;
                    if found != *t {
                        return Err(TypeError::Mismatch {
                            expected: self.type_name(*t).to_string(),
                            found: self.type_name(found).to_string(),
                        });
                    }
                }
                Ok(c.ty)
            }
        }
    }

    pub fn show_ground(&self, g: &GroundValue) -> String {
        let mut out = String::new();
        self.write_ground(&mut out, g);
        out
    }

    fn write_ground(&self, out: &mut String, g: &GroundValue) {
        out.push_str(self.ctor_name(g.ctor));
        if !g.args.is_empty() {
            out.push('(');
            for (i, a) in g.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.write_ground(out, a);
            }
            out.push(')');
        }
    }

    /// Renders a logic value; holes are printed through `var`.
    pub fn show_logic(&self, l: &LogicValue, var: &dyn Fn(VarId) -> String) -> String {
        match l {
            LogicValue::Hole(v) => var(*v),
            LogicValue::Node(c, args) if args.is_empty() => self.ctor_name(*c).to_string(),
            LogicValue::Node(c, args) => {
                let inner: Vec<String> = args.iter().map(|a| self.show_logic(a, var)).collect();
                format!("{}({})", self.ctor_name(*c), inner.join(", "))
            }
        }
    }

    /// JSON constructor tree: `{"ctor": name, "args": [...]}`.
    pub fn ground_to_json(&self, g: &GroundValue) -> serde_json::Value {
        serde_json::json!({
            "ctor": self.ctor_name(g.ctor),
            "args": g.args.iter().map(|a| self.ground_to_json(a)).collect::<Vec<_>>(),
        })
    }

    pub fn ground(&self, ctor: &str, args: Vec<GroundValue>) -> Result<GroundValue, TypeError> {
        let c = self
            .ctor_id(ctor)
            .ok_or_else(|| TypeError::UnknownCtor(ctor.to_string()))?;
        let g = GroundValue::new(c, args);
        self.check_ground(&g, c.ty)?;
        Ok(g)
    }
}

/// A hole-free value of some schema type.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundValue {
    pub ctor: CtorId,
    pub args: Arc<[GroundValue]>,
}

impl fmt::Debug for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}.{}", self.ctor.ty.0, self.ctor.index)?;
        if !self.args.is_empty() {
            f.debug_list().entries(self.args.iter()).finish()?;
        }
        Ok(())
    }
}

impl GroundValue {
    pub fn new(ctor: CtorId, args: Vec<GroundValue>) -> Self {
        GroundValue {
            ctor,
            args: args.into(),
        }
    }

    pub fn leaf(ctor: CtorId) -> Self {
        GroundValue::new(ctor, Vec::new())
    }

    pub fn ty(&self) -> TypeId {
        self.ctor.ty
    }

    pub fn node_count(&self) -> usize {
        1 + self.args.iter().map(GroundValue::node_count).sum::<usize>()
    }

    /// The fully-ground logic value with the same structure.
    pub fn project(&self) -> LogicValue {
        LogicValue::Node(self.ctor, self.args.iter().map(GroundValue::project).collect())
    }
}

/// A value that may contain holes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LogicValue {
    Hole(VarId),
    Node(CtorId, Arc<[LogicValue]>),
}

impl fmt::Debug for LogicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicValue::Hole(v) => write!(f, "_{}", v.id),
            LogicValue::Node(c, args) => {
                write!(f, "#{}.{}", c.ty.0, c.index)?;
                if !args.is_empty() {
                    f.debug_list().entries(args.iter()).finish()?;
                }
                Ok(())
            }
        }
    }
}

/// One layer of structure of a logic value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quoted {
    Hole(VarId),
    Ctor(CtorId, Vec<LogicValue>),
}

impl Quoted {
    pub fn rebuild(self) -> LogicValue {
        match self {
            Quoted::Hole(v) => LogicValue::Hole(v),
            Quoted::Ctor(c, fields) => LogicValue::Node(c, fields.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("binding of variable _{0} does not terminate")]
pub struct CyclicBinding(pub u64);

impl LogicValue {
    pub fn node(c: CtorId, args: Vec<LogicValue>) -> Self {
        LogicValue::Node(c, args.into())
    }

    pub fn leaf(c: CtorId) -> Self {
        LogicValue::Node(c, Arc::from(Vec::new()))
    }

    pub fn as_hole(&self) -> Option<VarId> {
        match self {
            LogicValue::Hole(v) => Some(*v),
            LogicValue::Node(..) => None,
        }
    }

    /// `None` if any hole remains.
    pub fn reify(&self) -> Option<GroundValue> {
        match self {
            LogicValue::Hole(_) => None,
            LogicValue::Node(c, args) => Some(GroundValue {
                ctor: *c,
                args: args.iter().map(LogicValue::reify).collect::<Option<Vec<_>>>()?.into(),
            }),
        }
    }

    pub fn quote(&self) -> Quoted {
        match self {
            LogicValue::Hole(v) => Quoted::Hole(*v),
            LogicValue::Node(c, args) => Quoted::Ctor(*c, args.to_vec()),
        }
    }

    /// Resolves every hole through `env`. Returns `Ok(None)` if some hole is unbound,
    /// and an error if a hole's expansion reaches the hole itself.
    pub fn deref(
        &self,
        env: &dyn Fn(VarId) -> Option<LogicValue>,
    ) -> Result<Option<GroundValue>, CyclicBinding> {
        self.deref_along(env, &mut Vec::new())
    }

    fn deref_along(
        &self,
        env: &dyn Fn(VarId) -> Option<LogicValue>,
        path: &mut Vec<VarId>,
    ) -> Result<Option<GroundValue>, CyclicBinding> {
        match self {
            LogicValue::Hole(v) => {
                if path.contains(v) {
                    return Err(CyclicBinding(v.id));
                }
                match env(*v) {
                    Some(l) => {
                        path.push(*v);
                        let r = l.deref_along(env, path);
                        path.pop();
                        r
                    }
                    None => Ok(None),
                }
            }
            LogicValue::Node(c, args) => {
                let mut out = Vec::with_capacity(args.len());
                for a in args.iter() {
                    match a.deref_along(env, path)? {
                        Some(g) => out.push(g),
                        None => return Ok(None),
                    }
                }
                Ok(Some(GroundValue::new(*c, out)))
            }
        }
    }

    /// Holes in left-to-right first-occurrence order.
    pub fn holes(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_holes(&mut out);
        out
    }

    pub(crate) fn collect_holes(&self, out: &mut Vec<VarId>) {
        match self {
            LogicValue::Hole(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            LogicValue::Node(_, args) => args.iter().for_each(|a| a.collect_holes(out)),
        }
    }

    pub fn contains_hole(&self, v: VarId) -> bool {
        match self {
            LogicValue::Hole(w) => *w == v,
            LogicValue::Node(_, args) => args.iter().any(|a| a.contains_hole(v)),
        }
    }

    /// Replaces holes through `f`, leaving holes for which `f` returns `None`.
    pub fn map_holes(&self, f: &dyn Fn(VarId) -> Option<LogicValue>) -> LogicValue {
        match self {
            LogicValue::Hole(v) => f(*v).unwrap_or_else(|| self.clone()),
            LogicValue::Node(c, args) => {
                LogicValue::Node(*c, args.iter().map(|a| a.map_holes(f)).collect())
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            LogicValue::Hole(_) => 1,
            LogicValue::Node(_, args) => 1 + args.iter().map(LogicValue::node_count).sum::<usize>(),
        }
    }
}

impl From<&GroundValue> for LogicValue {
    fn from(g: &GroundValue) -> Self {
        g.project()
    }
}

/// Lazily enumerates every ground value of one type exactly once, by increasing
/// node count; equal sizes follow constructor declaration order and then the
/// enumeration order of the arguments from left to right.
pub struct Generator {
    schema: Arc<TermSchema>,
    ty: TypeId,
    cache: HashMap<(TypeId, usize), Arc<Vec<GroundValue>>>,
    size: usize,
    current: Arc<Vec<GroundValue>>,
    pos: usize,
}

pub fn generate(schema: &Arc<TermSchema>, ty: TypeId) -> Generator {
    Generator::new(schema.clone(), ty)
}

impl Generator {
    pub fn new(schema: Arc<TermSchema>, ty: TypeId) -> Self {
        Generator {
            schema,
            ty,
            cache: HashMap::new(),
            size: 0,
            current: Arc::new(Vec::new()),
            pos: 0,
        }
    }

    /// All values of `ty` with exactly `size` nodes, in enumeration order.
    pub fn of_size(&mut self, ty: TypeId, size: usize) -> Arc<Vec<GroundValue>> {
        if let Some(v) = self.cache.get(&(ty, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size >= self.schema.min_size(ty) && self.schema.max_size(ty).map_or(true, |m| size <= m) {
            let ctors: Vec<CtorId> = self.schema.ctors(ty).collect();
            for c in ctors {
                let args = self.schema.ctor_args(c).to_vec();
                if args.is_empty() {
                    if size == 1 {
                        out.push(GroundValue::leaf(c));
                    }
                    continue;
                }
                let mut prefix = Vec::with_capacity(args.len());
                self.fill(c, &args, size - 1, &mut prefix, &mut out);
            }
        }
        let out = Arc::new(out);
        self.cache.insert((ty, size), out.clone());
        out
    }

    fn fill(
        &mut self,
        c: CtorId,
        args: &[TypeId],
        budget: usize,
        prefix: &mut Vec<GroundValue>,
        out: &mut Vec<GroundValue>,
    ) {
        let Some((&first, rest)) = args.split_first() else {
            if budget == 0 {
                out.push(GroundValue::new(c, prefix.clone()));
            }
            return;
        };
        let rest_min: usize = rest.iter().map(|t| self.schema.min_size(*t)).sum();
        let rest_max: Option<usize> = rest.iter().try_fold(0, |acc, t| self.schema.max_size(*t).map(|m| acc + m));
        let lo = self.schema.min_size(first);
        if budget < lo + rest_min {
            return;
        }
        let mut hi = budget - rest_min;
        if let Some(m) = self.schema.max_size(first) {
            hi = hi.min(m);
        }
        for s in lo..=hi {
            if let Some(rm) = rest_max {
                if budget - s > rm {
                    continue;
                }
            }
            let vals = self.of_size(first, s);
            for v in vals.iter() {
                prefix.push(v.clone());
                self.fill(c, rest, budget - s, prefix, out);
                prefix.pop();
            }
        }
    }
}

impl Iterator for Generator {
    type Item = GroundValue;

    fn next(&mut self) -> Option<GroundValue> {
        loop {
            if self.pos < self.current.len() {
                self.pos += 1;
                return Some(self.current[self.pos - 1].clone());
            }
            self.size += 1;
            if let Some(m) = self.schema.max_size(self.ty) {
                if self.size > m {
                    return None;
                }
            }
            self.current = self.of_size(self.ty, self.size);
            self.pos = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl(name: &str, ctors: &[(&str, &[&str])]) -> TypeDecl {
        TypeDecl {
            name: name.into(),
            constructors: ctors
                .iter()
                .map(|(c, a)| CtorDecl {
                    name: (*c).into(),
                    arg_types: a.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        }
    }

    fn nat_schema() -> Arc<TermSchema> {
        Arc::new(
            validate_schema(RawSchema {
                types: vec![
                    decl("Nat", &[("O", &[]), ("S", &["Nat"])]),
                    decl("Bool", &[("True", &[]), ("False", &[])]),
                    decl("List", &[("Nil", &[]), ("Cons", &["Nat", "List"])]),
                    decl("Unit", &[("U", &[])]),
                    decl("Pair", &[("P", &["Bool", "Bool"])]),
                ],
            })
            .unwrap(),
        )
    }

    #[test]
    fn nat_is_valid() {
        let s = validate_schema(RawSchema {
            types: vec![decl("Nat", &[("O", &[]), ("S", &["Nat"])])],
        });
        assert!(s.is_ok());
    }

    #[test]
    fn self_recursive_type_is_uninhabited() {
        let s = validate_schema(RawSchema {
            types: vec![decl("A", &[("MkA", &["A"])])],
        });
        assert_eq!(s.unwrap_err(), SchemaError::UninhabitedType("A".into()));
    }

    #[test]
    fn duplicate_and_unknown_names() {
        let dup = validate_schema(RawSchema {
            types: vec![decl("A", &[("X", &[])]), decl("B", &[("X", &[])])],
        });
        assert_eq!(dup.unwrap_err(), SchemaError::DuplicateName("X".into()));
        let dup_ty = validate_schema(RawSchema {
            types: vec![decl("A", &[("X", &[])]), decl("A", &[("Y", &[])])],
        });
        assert_eq!(dup_ty.unwrap_err(), SchemaError::DuplicateName("A".into()));
        let unknown = validate_schema(RawSchema {
            types: vec![decl("A", &[("X", &["B"])])],
        });
        assert!(matches!(unknown.unwrap_err(), SchemaError::UnknownType { .. }));
    }

    #[test]
    fn monolithic_term_type_admits_nonsense() {
        let s = validate_schema(RawSchema {
            types: vec![decl(
                "Term",
                &[
                    ("O", &[]),
                    ("S", &["Term"]),
                    ("Nil", &[]),
                    ("Cons", &["Term", "Term"]),
                    ("Leaf", &[]),
                    ("Node", &["Term", "Term"]),
                ],
            )],
        })
        .unwrap();
        let nil = s.ground("Nil", vec![]).unwrap();
        let leaf = s.ground("Leaf", vec![]).unwrap();
        let s_nil = s.ground("S", vec![nil]).unwrap();
        let cons = s.ground("Cons", vec![leaf, s_nil]).unwrap();
        let v = s.ground("S", vec![cons]).unwrap();
        assert_eq!(s.show_ground(&v), "S(Cons(Leaf, S(Nil)))");
    }

    #[test]
    fn project_reify_quote() {
        let s = nat_schema();
        let o = s.ground("O", vec![]).unwrap();
        let two = s.ground("S", vec![s.ground("S", vec![o.clone()]).unwrap()]).unwrap();
        let sc = s.ctor_id("S").unwrap();
        let oc = s.ctor_id("O").unwrap();
        assert_eq!(
            two.project(),
            LogicValue::node(sc, vec![LogicValue::node(sc, vec![LogicValue::leaf(oc)])])
        );
        assert_eq!(o.project(), LogicValue::leaf(oc));
        let nat = s.type_id("Nat").unwrap();
        let hole = LogicValue::node(sc, vec![LogicValue::Hole(VarId::new(0, nat))]);
        assert_eq!(hole.reify(), None);
        assert_eq!(LogicValue::leaf(oc).reify(), Some(o));
        let one = LogicValue::node(sc, vec![LogicValue::leaf(oc)]);
        assert_eq!(one.quote(), Quoted::Ctor(sc, vec![LogicValue::leaf(oc)]));
        let v3 = VarId::new(3, nat);
        assert_eq!(LogicValue::Hole(v3).quote(), Quoted::Hole(v3));
    }

    #[test]
    fn deref_examples() {
        let s = nat_schema();
        let nat = s.type_id("Nat").unwrap();
        let v0 = VarId::new(0, nat);
        let o = LogicValue::leaf(s.ctor_id("O").unwrap());
        let env = |v: VarId| (v == v0).then(|| o.clone());
        let l = LogicValue::node(s.ctor_id("S").unwrap(), vec![LogicValue::Hole(v0)]);
        assert_eq!(s.show_ground(&l.deref(&env).unwrap().unwrap()), "S(O)");
        assert_eq!(LogicValue::Hole(v0).deref(&|_| None).unwrap(), None);
        // A cyclic environment is reported rather than looping forever.
        let cyc = LogicValue::node(s.ctor_id("S").unwrap(), vec![LogicValue::Hole(v0)]);
        let bad = move |v: VarId| (v == v0).then(|| cyc.clone());
        assert_eq!(LogicValue::Hole(v0).deref(&bad), Err(CyclicBinding(0)));
    }

    #[test]
    fn generate_nat_and_finite_types() {
        let s = nat_schema();
        let nats: Vec<String> = generate(&s, s.type_id("Nat").unwrap())
            .take(4)
            .map(|g| s.show_ground(&g))
            .collect();
        assert_eq!(nats, ["O", "S(O)", "S(S(O))", "S(S(S(O)))"]);
        let bools: Vec<String> = generate(&s, s.type_id("Bool").unwrap())
            .map(|g| s.show_ground(&g))
            .collect();
        assert_eq!(bools, ["True", "False"]);
        let pairs: Vec<String> = generate(&s, s.type_id("Pair").unwrap())
            .map(|g| s.show_ground(&g))
            .collect();
        assert_eq!(
            pairs,
            ["P(True, True)", "P(True, False)", "P(False, True)", "P(False, False)"]
        );
        assert!(s.is_singleton(s.type_id("Unit").unwrap()));
        assert_eq!(s.inhabitants(s.type_id("Pair").unwrap()), Some(4));
        assert_eq!(s.inhabitants(s.type_id("Nat").unwrap()), None);
    }

    #[test]
    fn list_generation_order() {
        let s = nat_schema();
        let lists: Vec<String> = generate(&s, s.type_id("List").unwrap())
            .take(5)
            .map(|g| s.show_ground(&g))
            .collect();
        assert_eq!(
            lists,
            [
                "Nil",
                "Cons(O, Nil)",
                "Cons(S(O), Nil)",
                "Cons(O, Cons(O, Nil))",
                "Cons(S(S(O)), Nil)"
            ]
        );
    }
}
