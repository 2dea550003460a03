mod common;

use common::{config, types, BASES};
use proptest::prelude::*;
use reducts::typespace::{
    check_age, enumerate_types, restrict_type, type_of_values, Base, Constants, FiniteStructure,
    TypeSpace,
};

/// Ordered Bell numbers by `a(n) = sum_k C(n,k) a(n-k)`.
fn ordered_bell(n: usize) -> u64 {
    let mut a = vec![1u64];
    for m in 1..=n {
        let mut c = 1u64;
        let mut s = 0;
        for k in 1..=m {
            c = c * (m - k + 1) as u64 / k as u64;
            s += c * a[m - k];
        }
        a.push(s);
    }
    a[n]
}

#[test]
fn order_type_counts_are_ordered_bell_numbers() {
    let expect = [1, 1, 3, 13, 75, 541];
    for (k, &e) in expect.iter().enumerate() {
        assert_eq!(ordered_bell(k), e);
        assert_eq!(types(Base::QOrder, k).len() as u64, e, "arity {k}");
    }
}

fn positions(arity: usize, mask: u32) -> Vec<usize> {
    (0..arity).filter(|i| mask >> i & 1 == 1).collect()
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn restriction_stays_in_the_space(
        base in prop::sample::select(&BASES[..]),
        arity in 1usize..=4,
        pick in any::<prop::sample::Index>(),
        mask in any::<u32>(),
    ) {
        let all = types(base, arity);
        let t = pick.get(&all);
        let pos = positions(arity, mask);
        let r = restrict_type(&TypeSpace::new(base, arity), t, &pos).unwrap();
        prop_assert!(types(base, pos.len()).contains(&r));
    }

    #[test]
    fn restriction_with_constants(
        arity in 1usize..=3,
        k in 0usize..=2,
        pick in any::<prop::sample::Index>(),
        mask in any::<u32>(),
    ) {
        let c = Constants::new(k);
        let space = TypeSpace::with_constants(Base::QOrder, arity, c.clone()).unwrap();
        let all = enumerate_types(Base::QOrder, arity, &c).unwrap();
        let t = pick.get(&all);
        let pos = positions(arity, mask);
        let r = restrict_type(&space, t, &pos).unwrap();
        prop_assert!(enumerate_types(Base::QOrder, pos.len(), &c).unwrap().contains(&r));
    }

    #[test]
    fn type_of_values_is_order_invariant(
        values in prop::collection::vec(-30i64..30, 1..=5),
        consts in prop::collection::btree_set(-30i64..30, 0..=2),
        shift in -100i64..100,
        scale in 1i64..5,
    ) {
        // strictly increasing on the integers
        let f = |x: i64| scale * x * x * x + 7 * x + shift;
        let consts: Vec<i64> = consts.into_iter().collect();
        let moved: Vec<i64> = values.iter().map(|&x| f(x)).collect();
        let moved_c: Vec<i64> = consts.iter().map(|&x| f(x)).collect();
        for base in [Base::QOrder, Base::Equality] {
            let a = type_of_values(base, &values, &consts).unwrap();
            let b = type_of_values(base, &moved, &moved_c).unwrap();
            prop_assert_eq!(a, b);
        }
        // for equality any injection will do
        let g = |x: i64| -3 * x + 1;
        let a = type_of_values(Base::Equality, &values, &consts).unwrap();
        let gv: Vec<i64> = values.iter().map(|&x| g(x)).collect();
        let gc: Vec<i64> = consts.iter().map(|&x| g(x)).collect();
        let mut gc_sorted = gc.clone();
        gc_sorted.sort();
        prop_assume!(gc_sorted == gc || consts.len() < 2);
        prop_assert_eq!(a, type_of_values(Base::Equality, &gv, &gc).unwrap());
    }

    #[test]
    fn types_are_in_the_age(
        base in prop::sample::select(&BASES[..]),
        arity in 0usize..=4,
        pick in any::<prop::sample::Index>(),
    ) {
        let all = types(base, arity);
        let t = pick.get(&all);
        prop_assert!(check_age(base, &FiniteStructure::from_type(base, t)).unwrap());
    }

    #[test]
    fn situated_types_are_in_the_age(
        arity in 0usize..=3,
        k in 1usize..=2,
        pick in any::<prop::sample::Index>(),
    ) {
        let all = enumerate_types(Base::QOrder, arity, &Constants::new(k)).unwrap();
        let t = pick.get(&all);
        prop_assert!(check_age(Base::QOrder, &FiniteStructure::from_type(Base::QOrder, t)).unwrap());
    }
}
