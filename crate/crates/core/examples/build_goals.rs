//! Builds the addition relation with the checked goal builder instead of the
//! parser and runs it both ways.

use std::sync::Arc;

use kanrel::goal::{pretty_program, GoalBuilder, Program, RelationDef};
use kanrel::interp::{run, Reification};
use kanrel::parse::{parse, parse_ground};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = Arc::new(parse("type Nat = O | S(Nat).")?.schema.as_ref().clone());
    let nat = schema.type_id("Nat").unwrap();

    let mut b = GoalBuilder::new(&schema);
    b.declare("addo", &[nat, nat, nat]);
    let (x, y, z) = (b.fresh_var(nat), b.fresh_var(nat), b.fresh_var(nat));
    let v = GoalBuilder::var;

    let base = b.conj(vec![b.unify(v(x), b.term("O", vec![])?)?, b.unify(v(y), v(z))?])?;
    let step = b.fresh(nat, |b, x1| {
        b.fresh(nat, |b, z1| {
            b.conj(vec![
                b.unify(v(x), b.term("S", vec![v(x1)])?)?,
                b.call("addo", vec![v(x1), v(y), v(z1)])?,
                b.unify(v(z), b.term("S", vec![v(z1)])?)?,
            ])
        })
    })?;
    let body = b.disj(vec![base, step])?;
    let p = Program::new(schema.clone(), vec![RelationDef::new("addo", vec![x, y, z], body)])?;
    print!("{}", pretty_program(&p));

    let two = parse_ground(&schema, "S(S(O))")?;
    let sums = run(&p, "addo", &[Some(two.clone()), Some(two), None], 1, Reification::Strict)?;
    println!("2 + 2 = {}", schema.show_ground(&sums[0][0]));

    let three = parse_ground(&schema, "S(S(S(O)))")?;
    for t in run(&p, "addo", &[None, None, Some(three)], 4, Reification::Strict)? {
        println!("{} + {} = 3", schema.show_ground(&t[0]), schema.show_ground(&t[1]));
    }
    Ok(())
}
