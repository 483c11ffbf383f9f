//! Times both engines on the sort suite and prints the comparison table.

use kanrel::bench::{run_case, suite_cases, table};

fn main() {
    let mut rows = Vec::new();
    for case in suite_cases("sort").unwrap() {
        rows.extend(run_case(&case, 10).unwrap());
    }
    print!("{}", table(&rows));
}
