mod common;

use std::collections::BTreeSet;

use common::{config, language, relation_upto, types};
use proptest::prelude::*;
use reducts::classifiers::{
    cameron_class, equality_csp, equality_pattern, thomas_class, CameronClass, EqualityCsp,
    ThomasClass,
};
use reducts::formulas::{Language, Relation};
use reducts::typespace::{enumerate_types, Base, Constants, Type, TypeSpace};

fn cameron_flags(c: CameronClass) -> (bool, bool, bool) {
    match c {
        CameronClass::Equality => (true, true, true),
        CameronClass::Sep => (true, true, false),
        CameronClass::Betw => (true, false, false),
        CameronClass::Cycl => (false, true, false),
        CameronClass::Order => (false, false, false),
    }
}

fn thomas_flags(c: ThomasClass) -> (bool, bool, bool) {
    match c {
        ThomasClass::Equality => (true, true, true),
        ThomasClass::Both => (true, true, false),
        ThomasClass::Switch => (true, false, false),
        ThomasClass::Minus => (false, true, false),
        ThomasClass::Graph => (false, false, false),
    }
}

fn and3(a: (bool, bool, bool), b: (bool, bool, bool)) -> (bool, bool, bool) {
    (a.0 && b.0, a.1 && b.1, a.2 && b.2)
}

/// Every relation renamed and with its arguments permuted.
fn scrambled(l: &Language, perms: &[Vec<usize>]) -> Language {
    let mut out = Language::new("scrambled", l.base);
    for (i, r) in l.relations.iter().enumerate() {
        let p = &perms[i % perms.len()];
        let perm: Vec<usize> = (0..r.arity()).map(|j| p[j % p.len()] % r.arity()).collect();
        let perm = if is_perm(&perm) { perm } else { (0..r.arity()).rev().collect() };
        out.add(r.permuted(&perm).unwrap().renamed(format!("S{i}"))).unwrap();
    }
    out
}

fn is_perm(p: &[usize]) -> bool {
    let s: BTreeSet<usize> = p.iter().copied().collect();
    s.len() == p.len() && p.iter().all(|&x| x < p.len())
}

fn union(a: &Language, b: &Language) -> Language {
    let mut out = Language::new("union", a.base);
    for (i, r) in a.relations.iter().chain(&b.relations).enumerate() {
        out.add(r.clone().renamed(format!("U{i}"))).unwrap();
    }
    out
}

fn perms() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), 1..=2)
}

fn a_type(base: Base, max_arity: usize) -> impl Strategy<Value = Type> {
    (1..=max_arity).prop_flat_map(move |a| prop::sample::select(types(base, a)))
}

/// The q-order relation whose tuples are those with an equality pattern in `r`.
fn lift(r: &Relation, base: Base) -> Relation {
    let patterns: BTreeSet<Vec<u8>> = r.types.iter().map(equality_pattern).collect();
    let set: BTreeSet<Type> = enumerate_types(base, r.arity(), &Constants::none())
        .unwrap()
        .into_iter()
        .filter(|t| patterns.contains(&equality_pattern(t)))
        .collect();
    Relation::new(r.name.clone(), TypeSpace::new(base, r.arity()), set).unwrap()
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn cameron_ignores_names_and_argument_order(l in language(Base::QOrder, 4), p in perms()) {
        let a = cameron_class(&l).unwrap().verdict;
        let b = cameron_class(&scrambled(&l, &p)).unwrap().verdict;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn thomas_ignores_names_and_argument_order(l in language(Base::RandomGraph, 3), p in perms()) {
        let a = thomas_class(&l).unwrap().verdict;
        let b = thomas_class(&scrambled(&l, &p)).unwrap().verdict;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cameron_of_a_union_is_the_meet(a in language(Base::QOrder, 3), b in language(Base::QOrder, 3)) {
        let fa = cameron_flags(cameron_class(&a).unwrap().verdict);
        let fb = cameron_flags(cameron_class(&b).unwrap().verdict);
        let fu = cameron_flags(cameron_class(&union(&a, &b)).unwrap().verdict);
        prop_assert_eq!(fu, and3(fa, fb));
    }

    #[test]
    fn thomas_of_a_union_is_the_meet(a in language(Base::RandomGraph, 3), b in language(Base::RandomGraph, 3)) {
        let fa = thomas_flags(thomas_class(&a).unwrap().verdict);
        let fb = thomas_flags(thomas_class(&b).unwrap().verdict);
        let fu = thomas_flags(thomas_class(&union(&a, &b)).unwrap().verdict);
        prop_assert_eq!(fu, and3(fa, fb));
    }

    #[test]
    fn order_actions_are_invertible(t in a_type(Base::QOrder, 5), k in 0usize..8) {
        let space = TypeSpace::new(Base::QOrder, t.len());
        let b = t.class_count();
        let k = k % b;
        prop_assert_eq!(&t.reversed().reversed(), &t);
        let r = t.rotated(k);
        prop_assert!(space.contains(&r));
        prop_assert_eq!(&r.rotated((b - k) % b), &t);
    }

    #[test]
    fn graph_actions_are_involutions(t in a_type(Base::RandomGraph, 5), side in any::<u32>()) {
        let space = TypeSpace::new(Base::RandomGraph, t.len());
        let side = side & ((1u32 << t.class_count()) - 1);
        let s = t.switched(side);
        prop_assert!(space.contains(&s));
        prop_assert_eq!(&s.switched(side), &t);
        prop_assert_eq!(&t.complemented().complemented(), &t);
        // switching about a set and about its complement agree
        let all = (1u32 << t.class_count()) - 1;
        prop_assert_eq!(&t.switched(all ^ side), &s);
    }

    #[test]
    fn equality_csp_constant_case(l in language(Base::Equality, 4)) {
        // the constant map preserves R iff R is empty or holds on a constant tuple
        let constant = l.relations.iter().all(|r| {
            r.is_empty() || r.types.iter().any(|t| t.class_count() == 1)
        });
        let v = equality_csp(&l).unwrap().verdict;
        prop_assert_eq!(v == EqualityCsp::PConst, constant);
    }

    #[test]
    fn equality_csp_is_base_independent(l in language(Base::Equality, 3)) {
        let v = equality_csp(&l).unwrap().verdict;
        for base in [Base::QOrder, Base::RandomGraph] {
            let mut lifted = Language::new("lifted", base);
            for r in &l.relations {
                lifted.add(lift(r, base)).unwrap();
            }
            prop_assert_eq!(equality_csp(&lifted).unwrap().verdict, v);
        }
    }

    #[test]
    fn cameron_equality_iff_equality_determined(r in relation_upto(Base::QOrder, 4)) {
        let l = Language::new("L", Base::QOrder).with(r.clone()).unwrap();
        let eq = cameron_class(&l).unwrap().verdict == CameronClass::Equality;
        prop_assert_eq!(eq, lift(&r, Base::QOrder) == r);
    }
}
