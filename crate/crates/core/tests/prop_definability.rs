mod common;

use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

use common::{config, relation_upto};
use proptest::prelude::*;
use reducts::canonical::{find_behavior, is_realizable, preserves, FindOutcome};
use reducts::definability::{decide_pp, verify_verdict, DefinabilityCaps, DefinabilityVerdict, Verdict};
use reducts::formulas::{Language, Relation};
use reducts::ppalg::{pp_closure, ClosureCaps, ClosureReport};
use reducts::typespace::{Base, Constants};

const POOL: [(Base, &[&str], usize); 5] = [
    (Base::QOrder, &["lt"], 3),
    (Base::QOrder, &["Betw"], 3),
    (Base::QOrder, &["Cycl"], 3),
    (Base::RandomGraph, &["E"], 3),
    (Base::RandomGraph, &["N", "neq"], 3),
];

static LANGS: LazyLock<Vec<(Language, ClosureReport)>> = LazyLock::new(|| {
    POOL.iter()
        .map(|(b, rels, arity)| {
            let l = Language::from_builtins(rels.join("_"), *b, rels).unwrap();
            let c = pp_closure(&l, ClosureCaps::new(3, *arity)).unwrap();
            (l, c)
        })
        .collect()
});

/// Random inputs repeat; each distinct one is decided once.
static VERDICTS: LazyLock<Mutex<HashMap<(usize, String), DefinabilityVerdict>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

// Pool entries repeat across cases, so outcomes are computed once.
static DONE: LazyLock<Mutex<HashMap<(usize, usize), Option<(usize, usize)>>>> =
    LazyLock::new(|| Mutex::new(Default::default()));

fn caps() -> DefinabilityCaps {
    DefinabilityCaps {
        max_vars: 4,
        closure_steps: 20_000,
        behavior_budget: 200_000,
        parallel: false,
        ..DefinabilityCaps::default()
    }
}

fn input() -> impl Strategy<Value = (usize, Relation)> {
    (0..POOL.len()).prop_flat_map(|i| (Just(i), relation_upto(POOL[i].0, 3)))
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn verdicts_are_sound((i, target) in input()) {
        let lang = &LANGS[i].0;
        let key = (i, format!("{}:{:?}", target.arity(), target.types));
        let cached = VERDICTS.lock().unwrap().get(&key).cloned();
        let v = match cached {
            Some(v) => v,
            None => {
                let v = decide_pp(&target, lang, caps()).unwrap();
                VERDICTS.lock().unwrap().insert(key, v.clone());
                v
            }
        };
        prop_assert!(verify_verdict(&v, &target, lang));
        if let Verdict::NotDefinable { witness } = &v.verdict {
            prop_assert!(is_realizable(&witness.behavior));
            for r in &lang.relations {
                prop_assert!(preserves(&witness.behavior, r).unwrap());
            }
            prop_assert!(witness.recheck(&target));
        }
    }

    #[test]
    fn the_two_sides_exclude_each_other(i in 0..POOL.len(), pick in any::<prop::sample::Index>()) {
        let (lang, closure) = &LANGS[i];
        let e = pick.index(closure.entries.len());
        let target = &closure.entries[e].relation;
        let found = *DONE.lock().unwrap().entry((i, e)).or_insert_with(|| {
            for m in 1..=2 {
                for k in 0..=1 {
                    if lang.base == Base::RandomGraph && k > 0 {
                        continue;
                    }
                    let c = Constants::new(k);
                    let out = find_behavior(lang.base, m, &c, &lang.relations, Some(target), 200_000, None).unwrap();
                    if matches!(out, FindOutcome::Found(..)) {
                        return Some((m, k));
                    }
                }
            }
            None
        });
        prop_assert_eq!(found, None);
    }
}
