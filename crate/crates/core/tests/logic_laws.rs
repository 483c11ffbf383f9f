mod common;

use std::collections::{HashMap, HashSet};

use common::pool;
use kanrel::corpus;
use kanrel::schema::{generate, GroundValue, LogicValue, VarId};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Replaces the subterms whose preorder index has its bit set in `mask` by
/// holes, recording what each hole stood for.
fn punch(g: &GroundValue, mask: u64, index: &mut u32, env: &mut HashMap<VarId, LogicValue>) -> LogicValue {
    let here = *index;
    *index += 1;
    let args: Vec<LogicValue> = g.args.iter().map(|a| punch(a, mask, index, env)).collect();
    let node = LogicValue::node(g.ctor, args);
    if here > 0 && here < 64 && mask & (1 << here) != 0 {
        let v = VarId::new(1000 + here as u64, g.ty());
        env.insert(v, node);
        LogicValue::Hole(v)
    } else {
        node
    }
}

#[test]
fn logic_type_laws_hold_for_every_corpus_type() {
    for (name, _) in corpus::FILES {
        let p = corpus::load(name);
        for ty in p.schema.type_ids() {
            let values = pool(&p.schema, ty, 8);
            let strategy = (prop::sample::select(values), any::<u64>(), any::<u64>());
            let mut runner = TestRunner::new(Config::with_cases(1000));
            let schema = p.schema.clone();
            runner
                .run(&strategy, |(g, mask, other)| {
                    let l = g.project();
                    prop_assert_eq!(l.reify(), Some(g.clone()));
                    prop_assert_eq!(l.quote().rebuild(), l.clone());
                    // A projected value has no holes, so any environment leaves it alone.
                    let junk = LogicValue::leaf(schema.ctors(ty).next().unwrap());
                    let env = move |v: VarId| (v.id % 2 == other % 2).then(|| junk.clone());
                    prop_assert_eq!(l.deref(&env), Ok(Some(g.clone())));

                    let mut holes = HashMap::new();
                    let punched = punch(&g, mask, &mut 0, &mut holes);
                    prop_assert_eq!(punched.quote().rebuild(), punched.clone());
                    prop_assert_eq!(punched.reify().is_some(), holes.is_empty());
                    prop_assert_eq!(punched.deref(&|v| holes.get(&v).cloned()), Ok(Some(g.clone())));
                    if let Some(v) = holes.keys().next() {
                        let v = *v;
                        prop_assert_eq!(punched.deref(&|w| if w == v { None } else { holes.get(&w).cloned() }), Ok(None));
                    }
                    prop_assert!(schema.check_ground(&g, ty).is_ok());
                    Ok(())
                })
                .unwrap_or_else(|e| panic!("{name}.{}: {e}", p.schema.type_name(ty)));
        }
    }
}

#[test]
fn generator_matches_brute_force_up_to_seven_nodes() {
    for (name, _) in corpus::FILES {
        let p = corpus::load(name);
        for ty in p.schema.type_ids() {
            let brute: HashSet<GroundValue> = pool(&p.schema, ty, 7).into_iter().collect();
            let got: Vec<GroundValue> = generate(&p.schema, ty).take_while(|g| g.node_count() <= 7).collect();
            let distinct: HashSet<GroundValue> = got.iter().cloned().collect();
            assert_eq!(distinct.len(), got.len(), "{name}.{} repeats a value", p.schema.type_name(ty));
            assert_eq!(distinct, brute, "{name}.{}", p.schema.type_name(ty));
            assert!(got.windows(2).all(|w| w[0].node_count() <= w[1].node_count()));
        }
    }
}

#[test]
fn finite_types_enumerate_and_stop() {
    let p = corpus::load("typecheck");
    let ty = p.schema.type_id("Ty").unwrap();
    let all: Vec<String> = generate(&p.schema, ty).map(|g| p.schema.show_ground(&g)).collect();
    assert_eq!(all, ["TInt", "TBool"]);
}

#[test]
fn cyclic_environment_is_reported() {
    let p = corpus::load("addo");
    let nat = p.schema.type_id("Nat").unwrap();
    let s = p.schema.ctor_id("S").unwrap();
    let v = VarId::new(0, nat);
    let l = LogicValue::Hole(v);
    let looped = LogicValue::node(s, vec![LogicValue::Hole(v)]);
    assert!(l.deref(&|_| Some(looped.clone())).is_err());
}
