//! Prints the inferred determinism of addo in every direction.

use kanrel::convert::infer_det;
use kanrel::corpus;
use kanrel::modes::{infer, Direction, ModeTable};
use kanrel::normal::normalize;

fn main() {
    let np = normalize(&corpus::load("addo"));
    let mut table = ModeTable::new();
    for bits in 0..8u32 {
        let dir: String = (0..3).map(|i| if bits >> (2 - i) & 1 == 1 { 'o' } else { 'i' }).collect();
        infer(&np, &Direction::parse("addo", &dir).unwrap(), &mut table).unwrap();
    }
    let (dets, rounds) = infer_det(&np.schema, &table);
    for (d, det) in &dets {
        println!("{d:<10} {det}");
    }
    println!("fixpoint after {rounds} rounds");
}
