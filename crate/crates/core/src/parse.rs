//! Concrete syntax.
//!
//! ```text
//! type Nat = O | S(Nat).
//! rel addo(x: Nat, y: Nat, z: Nat) :=
//!     (x == O, y == z)
//!   | (fresh x1: Nat, z1: Nat . (x == S(x1), addo(x1, y, z1), z == S(z1))).
//! ```
//!
//! Constructors and types start with an uppercase letter; variables and
//! relations with a lowercase letter or `_`. `%` starts a line comment.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::goal::{Goal, GoalError, Program, RelationDef};
use crate::schema::{
    validate_schema, CtorDecl, GroundValue, LogicValue, RawSchema, SchemaError, TermSchema, TypeDecl, TypeId,
    VarId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown constructor `{0}`")]
    UnknownCtor(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{loc}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub loc: Loc,
}

fn err<T>(loc: Loc, kind: impl Into<ParseErrorKind>) -> Result<T, ParseError> {
    Err(ParseError {
        kind: kind.into(),
        loc,
    })
}

fn syntax<T>(loc: Loc, msg: impl Into<String>) -> Result<T, ParseError> {
    err(loc, ParseErrorKind::Syntax(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Upper(String),
    Lower(String),
    LParen,
    RParen,
    Comma,
    Bar,
    Dot,
    Colon,
    Define,
    EqEq,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Upper(s) | Tok::Lower(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Define => f.write_str("`:=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Loc)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let loc = Loc { line, col };
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => adv(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                out.push((Tok::LParen, loc));
                adv(1, &mut i, &mut col);
            }
            ')' => {
                out.push((Tok::RParen, loc));
                adv(1, &mut i, &mut col);
            }
            ',' => {
                out.push((Tok::Comma, loc));
                adv(1, &mut i, &mut col);
            }
            '|' => {
                out.push((Tok::Bar, loc));
                adv(1, &mut i, &mut col);
            }
            '.' => {
                out.push((Tok::Dot, loc));
                adv(1, &mut i, &mut col);
            }
            ':' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::Define, loc));
                adv(2, &mut i, &mut col);
            }
            ':' => {
                out.push((Tok::Colon, loc));
                adv(1, &mut i, &mut col);
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::EqEq, loc));
                adv(2, &mut i, &mut col);
            }
            '=' => {
                out.push((Tok::Eq, loc));
                adv(1, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '\'' | '$')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                if c.is_ascii_uppercase() {
                    out.push((Tok::Upper(word), loc));
                } else {
                    out.push((Tok::Lower(word), loc));
                }
            }
            other => return syntax(loc, format!("unexpected character `{other}`")),
        }
    }
    out.push((Tok::Eof, Loc { line, col }));
    Ok(out)
}

#[derive(Debug, Clone)]
enum TermAst {
    Var(String, Loc),
    Ctor(String, Vec<TermAst>, Loc),
}

#[derive(Debug, Clone)]
enum GoalAst {
    Eq(TermAst, TermAst, Loc),
    Call(String, Vec<TermAst>, Loc),
    Fresh(Vec<(String, String, Loc)>, Box<GoalAst>),
    Conj(Vec<GoalAst>),
    Disj(Vec<GoalAst>),
}

struct RelAst {
    name: String,
    loc: Loc,
    params: Vec<(String, String, Loc)>,
    body: GoalAst,
}

struct Parser {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Loc) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Loc, ParseError> {
        let (t, loc) = self.bump();
        if t == want {
            Ok(loc)
        } else {
            syntax(loc, format!("expected {want}, found {t}"))
        }
    }

    fn upper(&mut self) -> Result<(String, Loc), ParseError> {
        match self.bump() {
            (Tok::Upper(s), loc) => Ok((s, loc)),
            (t, loc) => syntax(loc, format!("expected an uppercase name, found {t}")),
        }
    }

    fn lower(&mut self) -> Result<(String, Loc), ParseError> {
        match self.bump() {
            (Tok::Lower(s), loc) => Ok((s, loc)),
            (t, loc) => syntax(loc, format!("expected a lowercase name, found {t}")),
        }
    }

    fn type_decl(&mut self) -> Result<(TypeDecl, Loc), ParseError> {
        let (name, loc) = self.upper()?;
        self.expect(Tok::Eq)?;
        let mut constructors = Vec::new();
        loop {
            let (cname, _) = self.upper()?;
            let mut arg_types = Vec::new();
            if *self.peek() == Tok::LParen {
                self.bump();
                loop {
                    arg_types.push(self.upper()?.0);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
            }
            constructors.push(CtorDecl { name: cname, arg_types });
            if *self.peek() == Tok::Bar {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Dot)?;
        Ok((TypeDecl { name, constructors }, loc))
    }

    fn binders(&mut self) -> Result<Vec<(String, String, Loc)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (v, loc) = self.lower()?;
            self.expect(Tok::Colon)?;
            let (t, _) = self.upper()?;
            out.push((v, t, loc));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn rel_decl(&mut self) -> Result<RelAst, ParseError> {
        let (name, loc) = self.lower()?;
        self.expect(Tok::LParen)?;
        let params = if *self.peek() == Tok::RParen {
            Vec::new()
        } else {
            self.binders()?
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::Define)?;
        let body = self.disj()?;
        self.expect(Tok::Dot)?;
        Ok(RelAst {
            name,
            loc,
            params,
            body,
        })
    }

    fn disj(&mut self) -> Result<GoalAst, ParseError> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            GoalAst::Disj(parts)
        })
    }

    fn conj(&mut self) -> Result<GoalAst, ParseError> {
        let mut parts = vec![self.goal()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            parts.push(self.goal()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            GoalAst::Conj(parts)
        })
    }

    fn goal(&mut self) -> Result<GoalAst, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let g = self.disj()?;
                self.expect(Tok::RParen)?;
                Ok(g)
            }
            Tok::Lower(w) if w == "fresh" => {
                self.bump();
                let bs = self.binders()?;
                self.expect(Tok::Dot)?;
                let body = self.goal()?;
                Ok(GoalAst::Fresh(bs, Box::new(body)))
            }
            Tok::Lower(name) if self.toks[self.pos + 1].0 == Tok::LParen => {
                let loc = self.loc();
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(GoalAst::Call(name, args, loc))
            }
            _ => {
                let loc = self.loc();
                let lhs = self.term()?;
                self.expect(Tok::EqEq)?;
                let rhs = self.term()?;
                Ok(GoalAst::Eq(lhs, rhs, loc))
            }
        }
    }

    fn term(&mut self) -> Result<TermAst, ParseError> {
        match self.bump() {
            (Tok::Lower(v), loc) => Ok(TermAst::Var(v, loc)),
            (Tok::Upper(c), loc) => {
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    loop {
                        args.push(self.term()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                Ok(TermAst::Ctor(c, args, loc))
            }
            (t, loc) => syntax(loc, format!("expected a term, found {t}")),
        }
    }
}

struct Resolver<'a> {
    schema: &'a TermSchema,
    signatures: &'a HashMap<String, Vec<TypeId>>,
    scope: Vec<(String, VarId)>,
    names: HashMap<u64, String>,
    next: u64,
}

impl Resolver<'_> {
    fn bind(&mut self, name: &str, ty: &str, loc: Loc) -> Result<VarId, ParseError> {
        let Some(t) = self.schema.type_id(ty) else {
            return err(loc, ParseErrorKind::UnknownType(ty.to_string()));
        };
        let v = VarId::new(self.next, t);
        self.next += 1;
        self.names.insert(v.id, name.to_string());
        self.scope.push((name.to_string(), v));
        Ok(v)
    }

    fn term(&self, t: &TermAst) -> Result<LogicValue, ParseError> {
        match t {
            TermAst::Var(name, loc) => match self.scope.iter().rev().find(|(n, _)| n == name) {
                Some((_, v)) => Ok(LogicValue::Hole(*v)),
                None => err(*loc, ParseErrorKind::UnknownVariable(name.clone())),
            },
            TermAst::Ctor(name, args, loc) => {
                let Some(c) = self.schema.ctor_id(name) else {
                    return err(*loc, ParseErrorKind::UnknownCtor(name.clone()));
                };
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                let l = LogicValue::node(c, args);
                if let Err(e) = self.schema.type_of(&l) {
                    return err(*loc, GoalError::from(e));
                }
                Ok(l)
            }
        }
    }

    fn goal(&mut self, g: &GoalAst) -> Result<Goal, ParseError> {
        match g {
            GoalAst::Eq(l, r, loc) => {
                let (l, r) = (self.term(l)?, self.term(r)?);
                let (lt, rt) = (self.schema.type_of(&l).unwrap(), self.schema.type_of(&r).unwrap());
                if lt != rt {
                    return err(
                        *loc,
                        GoalError::from(crate::schema::TypeError::Mismatch {
                            expected: self.schema.type_name(lt).to_string(),
                            found: self.schema.type_name(rt).to_string(),
                        }),
                    );
                }
                Ok(Goal::Unify(l, r))
            }
            GoalAst::Call(name, args, loc) => {
                let Some(sig) = self.signatures.get(name) else {
                    return err(*loc, ParseErrorKind::UnknownRelation(name.clone()));
                };
                if sig.len() != args.len() {
                    return err(
                        *loc,
                        GoalError::ArityMismatch {
                            rel: name.clone(),
                            expected: sig.len(),
                            found: args.len(),
                        },
                    );
                }
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                for (a, t) in args.iter().zip(sig) {
                    let at = self.schema.type_of(a).unwrap();
                    if at != *t {
                        return err(
                            *loc,
                            GoalError::from(crate::schema::TypeError::Mismatch {
                                expected: self.schema.type_name(*t).to_string(),
                                found: self.schema.type_name(at).to_string(),
                            }),
                        );
                    }
                }
                Ok(Goal::Call(name.clone(), args))
            }
            GoalAst::Fresh(bs, body) => {
                let depth = self.scope.len();
                let vars = bs
                    .iter()
                    .map(|(n, t, loc)| self.bind(n, t, *loc))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut g = self.goal(body)?;
                self.scope.truncate(depth);
                for v in vars.into_iter().rev() {
                    g = Goal::Fresh(v, Box::new(g));
                }
                Ok(g)
            }
            GoalAst::Conj(gs) => Ok(Goal::Conj(gs.iter().map(|g| self.goal(g)).collect::<Result<_, _>>()?)),
            GoalAst::Disj(gs) => Ok(Goal::Disj(gs.iter().map(|g| self.goal(g)).collect::<Result<_, _>>()?)),
        }
    }
}

/// Parses a whole program: type declarations followed by relation definitions
/// (the two may be interleaved; relations may refer to ones defined later).
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut raw = RawSchema::default();
    let mut type_locs = Vec::new();
    let mut rels = Vec::new();
    loop {
        match p.bump() {
            (Tok::Eof, _) => break,
            (Tok::Lower(k), _) if k == "type" => {
                let (decl, loc) = p.type_decl()?;
                raw.types.push(decl);
                type_locs.push(loc);
            }
            (Tok::Lower(k), _) if k == "rel" => rels.push(p.rel_decl()?),
            (t, loc) => return syntax(loc, format!("expected `type` or `rel`, found {t}")),
        }
    }
    let schema = match validate_schema(raw.clone()) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            let name = match &e {
                SchemaError::DuplicateName(n) | SchemaError::UninhabitedType(n) => n.clone(),
                SchemaError::UnknownType { ctor, .. } => ctor.clone(),
            };
            let loc = raw
                .types
                .iter()
                .zip(&type_locs)
                .find(|(t, _)| t.name == name || t.constructors.iter().any(|c| c.name == name))
                .map(|(_, l)| *l)
                .unwrap_or_default();
            return err(loc, e);
        }
    };

    let mut signatures = HashMap::new();
    for r in &rels {
        let mut tys = Vec::new();
        for (_, t, loc) in &r.params {
            match schema.type_id(t) {
                Some(id) => tys.push(id),
                None => return err(*loc, ParseErrorKind::UnknownType(t.clone())),
            }
        }
        if signatures.insert(r.name.clone(), tys).is_some() {
            return err(r.loc, GoalError::DuplicateRelation(r.name.clone()));
        }
    }

    let mut defs = Vec::new();
    for r in &rels {
        let mut res = Resolver {
            schema: &schema,
            signatures: &signatures,
            scope: Vec::new(),
            names: HashMap::new(),
            next: 0,
        };
        let mut params = Vec::new();
        for (n, t, loc) in &r.params {
            if res.scope.iter().any(|(m, _)| m == n) {
                return syntax(*loc, format!("parameter `{n}` is declared twice"));
            }
            params.push(res.bind(n, t, *loc)?);
        }
        let body = res.goal(&r.body)?;
        defs.push(RelationDef {
            name: r.name.clone(),
            params,
            body,
            names: res.names,
        });
    }
    Program::new(schema, defs).map_err(|e| ParseError {
        kind: e.into(),
        loc: Loc::default(),
    })
}

/// Parses a ground term such as `S(S(O))` or `Cons(O, Nil)`.
pub fn parse_ground(schema: &TermSchema, text: &str) -> Result<GroundValue, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return syntax(p.loc(), format!("unexpected {} after term", p.peek()));
    }
    let res = Resolver {
        schema,
        signatures: &HashMap::new(),
        scope: Vec::new(),
        names: HashMap::new(),
        next: 0,
    };
    let l = res.term(&t)?;
    Ok(l.reify().expect("variables are rejected during resolution"))
}
