//! Converts addo into directed procedures, prints them and runs them.

use kanrel::convert::{convert, Answers};
use kanrel::corpus;
use kanrel::modes::Direction;
use kanrel::normal::normalize;
use kanrel::parse::parse_ground;

fn main() {
    let np = normalize(&corpus::load("addo"));
    let s = np.schema.clone();
    let nat = |t: &str| parse_ground(&s, t).unwrap();

    let fwd = Direction::parse("addo", "iio").unwrap();
    let (procs, _) = convert(&np, &fwd).unwrap();
    println!("{}", procs.emit_all());
    // A semidet procedure returns at most one answer without any stream.
    match procs.answers(&fwd, &[nat("S(S(O))"), nat("S(O)")], false).unwrap() {
        Answers::AtMostOne(Some(t)) => println!("2 + 1 = {}\n", s.show_ground(&t[0])),
        _ => unreachable!(),
    }

    let back = Direction::parse("addo", "ooi").unwrap();
    let (procs, _) = convert(&np, &back).unwrap();
    println!("{}", procs.emit_all());
    print!("{}", procs.emit_ir());
    for t in procs.execute(&back, &[nat("S(S(O))")], 10).unwrap() {
        println!("{} + {} = 2", s.show_ground(&t[0]), s.show_ground(&t[1]));
    }
}
