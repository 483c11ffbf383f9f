//! Runs a sorting relation backwards to list every permutation of a sorted list.

use std::collections::BTreeSet;

use kanrel::convert::convert;
use kanrel::corpus;
use kanrel::interp::{run, Reification};
use kanrel::modes::Direction;
use kanrel::normal::normalize;
use kanrel::parse::parse_ground;

fn main() {
    let p = corpus::load("sort");
    let sorted = parse_ground(&p.schema, "Cons(O, Cons(S(O), Cons(S(S(O)), Cons(S(S(S(O))), Nil))))").unwrap();

    let reference = run(&p, "sorto", &[None, Some(sorted.clone())], 100, Reification::Strict).unwrap();

    let dir = Direction::parse("sorto", "oi").unwrap();
    let (procs, _) = convert(&normalize(&p), &dir).unwrap();
    let converted = procs.execute(&dir, &[sorted], 100).unwrap();

    for t in converted.iter().take(5) {
        println!("{}", p.schema.show_ground(&t[0]));
    }
    let a: BTreeSet<_> = reference.into_iter().collect();
    let b: BTreeSet<_> = converted.into_iter().collect();
    println!("... {} permutations, both engines agree: {}", b.len(), a == b);
}
