//! Uses a type checker backwards to produce well-typed programs, then checks
//! them forwards.

use kanrel::convert::convert;
use kanrel::corpus;
use kanrel::modes::Direction;
use kanrel::normal::normalize;
use kanrel::parse::parse_ground;

fn main() {
    let p = corpus::load("typecheck");
    let np = normalize(&p);
    let s = &p.schema;

    let back = Direction::parse("typecheck", "oi").unwrap();
    let fwd = Direction::parse("typecheck", "io").unwrap();
    let (synth, _) = convert(&np, &back).unwrap();
    let (check, _) = convert(&np, &fwd).unwrap();

    let bool_ty = parse_ground(s, "TBool").unwrap();
    for t in synth.execute(&back, &[bool_ty.clone()], 12).unwrap() {
        let e = &t[0];
        let ty = check.execute(&fwd, &[e.clone()], 2).unwrap();
        assert_eq!(ty, vec![vec![bool_ty.clone()]]);
        println!("{} : TBool", s.show_ground(e));
    }

    // Terms that use the one Int variable in scope.
    let typeo = Direction::parse("typeo", "ioi").unwrap();
    let (procs, _) = convert(&np, &typeo).unwrap();
    let ctx = parse_ground(s, "Bind(TInt, Empty)").unwrap();
    let int_ty = parse_ground(s, "TInt").unwrap();
    let found = procs.execute(&typeo, &[ctx, int_ty], 200).unwrap();
    let shown: Vec<String> = found.iter().map(|t| s.show_ground(&t[0])).collect();
    for e in shown.iter().filter(|e| e.contains("Ref")).take(6) {
        println!("x0: Int |- {e} : TInt");
    }
}
