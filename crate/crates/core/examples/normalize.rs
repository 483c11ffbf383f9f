//! Shows a relation before and after normalization.

use kanrel::goal::pretty_program;
use kanrel::normal::{check_normal, normalize};
use kanrel::parse::parse;

const SRC: &str = "
type Nat = O | S(Nat).
type List = Nil | Cons(Nat, List).

rel pick(x: Nat, xs: List, ys: List) :=
    (fresh t: List . (xs == Cons(x, t), ys == t))
  | (fresh h: Nat, t: List, r: List . (xs == Cons(h, t), pick(x, t, r), ys == Cons(h, r))).

rel both(xs: List, ys: List) :=
    ((xs == Nil) | (xs == Cons(O, Nil))), ((ys == Nil) | (fresh n: Nat . ys == Cons(S(n), Nil))).
";

fn main() {
    let p = parse(SRC).unwrap();
    print!("{}", pretty_program(&p));
    println!("\n-- normalized --\n");
    let np = normalize(&p);
    check_normal(&np).unwrap();
    print!("{}", np.pretty());
    println!("\n{} ops", np.op_count());
}
