//! Bundled example programs and the queries the test suites run on them.

use crate::goal::Program;
use crate::parse::parse;

pub const ADDO: &str = include_str!("../corpus/addo.kr");
pub const SORT: &str = include_str!("../corpus/sort.kr");
pub const TREE: &str = include_str!("../corpus/tree.kr");
pub const TYPECHECK: &str = include_str!("../corpus/typecheck.kr");

/// `(name, source)` for every bundled file.
pub const FILES: [(&str, &str); 4] = [("addo", ADDO), ("sort", SORT), ("tree", TREE), ("typecheck", TYPECHECK)];

pub fn source(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a bundled file. Panics if it does not exist or fails to parse.
pub fn load(name: &str) -> Program {
    let text = source(name).unwrap_or_else(|| panic!("no bundled file `{name}`"));
    parse(text).unwrap_or_else(|e| panic!("bundled file `{name}`: {e}"))
}

/// A relation and direction the suites exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusQuery {
    pub file: &'static str,
    pub rel: &'static str,
    pub dir: &'static str,
}

const fn q(file: &'static str, rel: &'static str, dir: &'static str) -> CorpusQuery {
    CorpusQuery { file, rel, dir }
}

pub const QUERIES: [CorpusQuery; 14] = [
    q("addo", "addo", "iii"),
    q("addo", "addo", "iio"),
    q("addo", "addo", "ioi"),
    q("addo", "addo", "ioo"),
    q("addo", "addo", "oii"),
    q("addo", "addo", "oio"),
    q("addo", "addo", "ooi"),
    q("addo", "addo", "ooo"),
    q("sort", "sorto", "io"),
    q("sort", "sorto", "oi"),
    q("tree", "balanceo", "oo"),
    q("tree", "balanceo", "io"),
    q("typecheck", "typecheck", "oi"),
    q("typecheck", "typeo", "ioi"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_file_parses() {
        for (name, _) in FILES {
            let p = load(name);
            assert!(!p.relations.is_empty());
        }
        for q in QUERIES {
            let p = load(q.file);
            assert_eq!(p.relation(q.rel).unwrap().arity(), q.dir.len());
        }
    }
}
