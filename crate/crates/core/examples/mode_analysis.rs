//! Infers moded schedules for a few directions of addo and sorto.

use kanrel::corpus;
use kanrel::modes::{infer, show_table, Direction, ModeTable};
use kanrel::normal::normalize;

fn main() {
    let np = normalize(&corpus::load("addo"));
    for dir in ["iio", "ooi", "ioo"] {
        let mut table = ModeTable::new();
        infer(&np, &Direction::parse("addo", dir).unwrap(), &mut table).unwrap();
        println!("{}", show_table(&np, &table));
    }

    // Running sorto backwards pulls in inserto, leo and gto in new directions.
    let np = normalize(&corpus::load("sort"));
    let mut table = ModeTable::new();
    infer(&np, &Direction::parse("sorto", "oi").unwrap(), &mut table).unwrap();
    let reached: Vec<String> = table.entries.keys().map(|d| d.to_string()).collect();
    println!("sorto@oi reaches {}", reached.join(", "));
}
