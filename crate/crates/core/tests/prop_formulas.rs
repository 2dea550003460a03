mod common;

use common::{any_relation, config, types};
use proptest::prelude::*;
use reducts::formulas::{default_vars, parse_rendered, render};
use reducts::typespace::{Base, TypeSpace};

const BOTH: [Base; 2] = [Base::QOrder, Base::RandomGraph];

fn de_morgan(disjuncts: &[String]) -> String {
    let negated: Vec<String> = disjuncts.iter().map(|d| format!("!({d})")).collect();
    format!("!({})", negated.join(" & "))
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn render_then_parse_is_identity(r in any_relation(&BOTH, 4)) {
        let back = parse_rendered(&render(&r), &r.space, &default_vars(r.arity())).unwrap();
        prop_assert_eq!(back.types, r.types);
    }

    #[test]
    fn normalize_ignores_disjunct_order_and_de_morgan(
        (r, order) in any_relation(&BOTH, 3).prop_flat_map(|r| {
            let n = r.len();
            (Just(r), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        }),
    ) {
        let text = render(&r);
        prop_assume!(!r.is_empty());
        let parts: Vec<String> = text.split(" | ").map(str::to_string).collect();
        let shuffled: Vec<String> = order.iter().map(|&i| parts[i].clone()).collect();
        let vars = default_vars(r.arity());
        let a = parse_rendered(&shuffled.join(" | "), &r.space, &vars).unwrap();
        let b = parse_rendered(&de_morgan(&shuffled), &r.space, &vars).unwrap();
        prop_assert_eq!(&a.types, &r.types);
        prop_assert_eq!(&b.types, &r.types);
    }

    #[test]
    fn true_and_contradiction(base in prop::sample::select(&BOTH[..]), arity in 1usize..=4) {
        let space = TypeSpace::new(base, arity);
        let vars = default_vars(arity);
        let all = parse_rendered("true", &space, &vars).unwrap();
        prop_assert_eq!(all.len(), types(base, arity).len());
        let none = parse_rendered(&format!("{0}!={0}", vars[0]), &space, &vars).unwrap();
        prop_assert!(none.is_empty());
    }
}
