mod common;

use common::{config, relation_upto};
use proptest::prelude::*;
use reducts::canonical::{
    catalog_in, enumerate_behaviors, is_realizable, preserves, violates, Behavior, EnumOptions, CATALOG,
};
use reducts::formulas::builtin_in;
use reducts::typespace::{Base, Constants};

fn catalog_pairs() -> Vec<(String, Base)> {
    CATALOG
        .iter()
        .flat_map(|c| c.bases.iter().map(move |b| (c.name.to_string(), *b)))
        .collect()
}

#[test]
fn catalog_behaviors_are_realizable() {
    for (name, base) in catalog_pairs() {
        let b = catalog_in(&name, base).unwrap();
        assert!(is_realizable(&b), "{name} over {base}");
    }
}

#[test]
fn enumeration_is_closed_under_duality() {
    let cases = [
        (Base::QOrder, 1, Constants::none()),
        (Base::QOrder, 1, Constants::new(1)),
        (Base::RandomGraph, 1, Constants::none()),
        (Base::Equality, 1, Constants::none()),
        (Base::Equality, 2, Constants::none()),
    ];
    for (base, m, c) in cases {
        let all = enumerate_behaviors(base, m, &c, EnumOptions::default()).unwrap();
        assert!(!all.is_empty());
        for b in &all {
            let d = b.dual().unwrap();
            assert!(is_realizable(&d), "dual of {} over {base}", b.name);
            assert!(all.contains(&d), "dual of {} over {base} missing", b.name);
        }
    }
}

#[test]
fn switching_and_complement_on_parity_relations() {
    let g = Base::RandomGraph;
    let sw = catalog_in("sw", g).unwrap();
    let minus = catalog_in("minus", g).unwrap();
    let check = |rel: &str, s: bool, m: bool| {
        let r = builtin_in(rel, g).unwrap();
        assert_eq!(preserves(&sw, &r).unwrap(), s, "sw on {rel}");
        assert_eq!(preserves(&minus, &r).unwrap(), m, "minus on {rel}");
    };
    check("R3", true, false);
    check("R4", false, true);
    check("R5", true, true);
}

fn behavior_and_relation() -> impl Strategy<Value = (Behavior, reducts::Relation)> {
    prop::sample::select(catalog_pairs()).prop_flat_map(|(name, base)| {
        let b = catalog_in(&name, base).unwrap();
        (Just(b), relation_upto(base, 4))
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn preserves_iff_no_witness((b, r) in behavior_and_relation()) {
        let p = preserves(&b, &r).unwrap();
        match violates(&b, &r).unwrap() {
            None => prop_assert!(p),
            Some(w) => {
                prop_assert!(!p);
                prop_assert!(w.recheck(&r));
            }
        }
    }
}
