//! Declares a schema in code, builds values against it and enumerates a type.

use std::sync::Arc;

use kanrel::schema::{generate, validate_schema, CtorDecl, RawSchema, TypeDecl};

fn ctor(name: &str, args: &[&str]) -> CtorDecl {
    CtorDecl {
        name: name.into(),
        arg_types: args.iter().map(|a| a.to_string()).collect(),
    }
}

fn main() {
    let raw = RawSchema {
        types: vec![
            TypeDecl {
                name: "Nat".into(),
                constructors: vec![ctor("O", &[]), ctor("S", &["Nat"])],
            },
            TypeDecl {
                name: "Tree".into(),
                constructors: vec![ctor("Leaf", &[]), ctor("Node", &["Tree", "Nat", "Tree"])],
            },
        ],
    };
    let schema = Arc::new(validate_schema(raw).expect("valid schema"));

    let one = schema.ground("S", vec![schema.ground("O", vec![]).unwrap()]).unwrap();
    let leaf = schema.ground("Leaf", vec![]).unwrap();
    let t = schema.ground("Node", vec![leaf.clone(), one, leaf]).unwrap();
    println!("{} has {} nodes", schema.show_ground(&t), t.node_count());

    // Projecting and reifying are inverse on ground values.
    assert_eq!(t.project().reify(), Some(t.clone()));

    // A wrongly typed value is rejected.
    let err = schema.ground("S", vec![t]).unwrap_err();
    println!("rejected: {err}");

    let tree = schema.type_id("Tree").unwrap();
    println!("first trees, smallest first:");
    for g in generate(&schema, tree).take(6) {
        println!("  {}", schema.show_ground(&g));
    }
}
