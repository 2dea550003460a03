#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use reducts::formulas::{Language, Relation};
use reducts::typespace::{enumerate_types, Base, Constants, Type, TypeSpace};

pub const BASES: [Base; 4] = [
    Base::QOrder,
    Base::RandomGraph,
    Base::OrderedRandomGraph,
    Base::Equality,
];

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

pub fn types(base: Base, arity: usize) -> Vec<Type> {
    enumerate_types(base, arity, &Constants::none()).unwrap()
}

pub fn from_bits(name: &str, base: Base, arity: usize, bits: &[bool]) -> Relation {
    let set: BTreeSet<Type> = types(base, arity)
        .into_iter()
        .zip(bits)
        .filter(|(_, &b)| b)
        .map(|(t, _)| t)
        .collect();
    Relation::new(name, TypeSpace::new(base, arity), set).unwrap()
}

/// A uniformly random relation of the given arity.
pub fn relation(base: Base, arity: usize) -> impl Strategy<Value = Relation> {
    let n = types(base, arity).len();
    prop::collection::vec(any::<bool>(), n).prop_map(move |bits| from_bits("R", base, arity, &bits))
}

pub fn relation_upto(base: Base, max_arity: usize) -> impl Strategy<Value = Relation> {
    (1..=max_arity).prop_flat_map(move |a| relation(base, a))
}

/// A random relation over one of `bases`.
pub fn any_relation(bases: &'static [Base], max_arity: usize) -> impl Strategy<Value = Relation> {
    prop::sample::select(bases).prop_flat_map(move |b| relation_upto(b, max_arity))
}

/// A language of one or two random relations named R0, R1.
pub fn language(base: Base, max_arity: usize) -> impl Strategy<Value = Language> {
    prop::collection::vec(relation_upto(base, max_arity), 1..=2).prop_map(move |rs| {
        let mut l = Language::new("L", base);
        for (i, r) in rs.into_iter().enumerate() {
            l.add(r.renamed(format!("R{i}"))).unwrap();
        }
        l
    })
}
