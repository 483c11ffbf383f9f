//! Runs relations on the reference interpreter, including a query whose
//! answers contain unconstrained parts.

use kanrel::corpus;
use kanrel::interp::{run, Reification};
use kanrel::parse::parse_ground;

fn main() {
    let p = corpus::load("addo");
    let s = &p.schema;

    // Every way to split 3, then the search keeps looking forever, so ask for 4.
    let three = parse_ground(s, "S(S(S(O)))").unwrap();
    for t in run(&p, "addo", &[None, None, Some(three)], 4, Reification::Strict).unwrap() {
        println!("{} + {}", s.show_ground(&t[0]), s.show_ground(&t[1]));
    }

    // With x = O the answer is y = z for any y. Strict reification refuses it,
    // enumeration fills the hole with every Nat in turn.
    let zero = parse_ground(s, "O").unwrap();
    let args = [Some(zero), None, None];
    println!("strict: {}", run(&p, "addo", &args, 1, Reification::Strict).unwrap_err());
    for t in run(&p, "addo", &args, 3, Reification::Enumerate).unwrap() {
        println!("O + {} = {}", s.show_ground(&t[0]), s.show_ground(&t[1]));
    }
}
