use std::process::{Command, Output};

fn kanrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kanrel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn lines(o: &Output) -> Vec<String> {
    stdout(o).lines().map(str::to_string).collect()
}

#[test]
fn one_plus_one_is_two() {
    for engine in ["ref", "converted"] {
        let o = kanrel(&["run", "addo", "--dir", "iio", "--in", "S(O)", "--in", "S(O)", "--engine", engine]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "S(S(O))\n");
    }
}

#[test]
fn sorting_backwards_yields_every_permutation() {
    let sorted = "Cons(O, Cons(S(O), Cons(S(S(O)), Nil)))";
    for engine in ["ref", "converted"] {
        let o = kanrel(&["run", "sort", "--rel", "sorto", "--dir", "oi", "--in", sorted, "-n", "10", "--engine", engine]);
        assert_eq!(o.status.code(), Some(0));
        let mut got = lines(&o);
        assert_eq!(got.len(), 6, "{engine}");
        got.sort();
        got.dedup();
        assert_eq!(got.len(), 6, "{engine}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["run", "typecheck", "--dir", "oi", "--in", "TBool", "-n", "15"];
    let a = kanrel(&args);
    let b = kanrel(&args);
    assert_eq!(a.stdout, b.stdout);
    let args = ["convert", "sort", "--rel", "sorto", "--dir", "oi", "--ir"];
    assert_eq!(kanrel(&args).stdout, kanrel(&args).stdout);
}

#[test]
fn generated_programs_typecheck_forward() {
    let o = kanrel(&["run", "typecheck", "--dir", "oi", "--in", "TInt", "-n", "12", "--engine", "converted"]);
    let terms = lines(&o);
    assert_eq!(terms.len(), 12);
    for e in &terms {
        let back = kanrel(&["run", "typecheck", "--dir", "io", "--in", e]);
        assert_eq!(stdout(&back), "TInt\n", "{e}");
    }
}

#[test]
fn json_output_is_an_array_of_tuples() {
    let o = kanrel(&["run", "addo", "--dir", "ooi", "--in", "S(O)", "--json", "--engine", "converted"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 2));
}

#[test]
fn normalized_output_reparses_to_itself() {
    let dir = std::env::temp_dir().join(format!("kanrel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["addo", "sort", "tree", "typecheck"] {
        let first = kanrel(&["normalize", name]);
        assert_eq!(first.status.code(), Some(0));
        let path = dir.join(format!("{name}.kr"));
        std::fs::write(&path, &first.stdout).unwrap();
        let second = kanrel(&["normalize", path.to_str().unwrap()]);
        assert_eq!(stdout(&first), stdout(&second), "{name}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn user_errors_exit_with_one() {
    for args in [
        &["run", "addo", "--dir", "iix"][..],
        &["run", "no-such-file.kr"],
        &["frobnicate", "addo"],
        &["run", "addo", "--dir", "iio", "--in", "S(O)"],
        &["run", "addo", "--dir", "iio", "--in", "Nil", "--in", "O"],
        &["run", "addo", "--rel", "nope"],
        &["bench", "nope"],
    ] {
        let o = kanrel(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(kanrel(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_writes_csv() {
    let path = std::env::temp_dir().join(format!("kanrel-bench-{}.csv", std::process::id()));
    let o = kanrel(&["bench", "sort", "-n", "1", "--csv", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["suite", "query", "engine", "param", "median_ns", "reps", "answers_hash"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for pair in rows.chunks(2) {
        assert_eq!(&pair[0][6], &pair[1][6], "hashes differ");
        assert_eq!((&pair[0][2], &pair[1][2]), ("ref", "converted"));
    }
    std::fs::remove_file(&path).unwrap();
}
