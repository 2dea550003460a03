mod common;

use common::config;
use proptest::prelude::*;
use reducts::ramsey::{
    arrows, arrows_exhaustive, recheck_bad_coloring, recheck_certificate, ArrowCaps, ArrowQuery,
    ArrowReport,
};
use reducts::typespace::FiniteStructure;
use reducts::Error;

/// An ordered graph as its vertex count and edge list.
#[derive(Clone, Debug)]
struct Og {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Og {
    fn structure(&self) -> FiniteStructure {
        FiniteStructure::ordered_graph(self.n, &self.edges).unwrap()
    }

    /// Adds a vertex at position `at` adjacent to the old vertices in `nbrs`.
    fn insert(&self, at: usize, nbrs: &[bool]) -> Og {
        let shift = |v: usize| if v >= at { v + 1 } else { v };
        let mut edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&(a, b)| (shift(a), shift(b))).collect();
        for v in 0..self.n {
            if nbrs[v % nbrs.len()] {
                let w = shift(v);
                edges.push((w.min(at), w.max(at)));
            }
        }
        Og { n: self.n + 1, edges }
    }

    /// The induced subgraph without vertex `v`.
    fn remove(&self, v: usize) -> Og {
        let shift = |w: usize| if w > v { w - 1 } else { w };
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        Og { n: self.n - 1, edges }
    }

    fn reversed(&self) -> Og {
        let r = |v: usize| self.n - 1 - v;
        Og {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| (r(b), r(a))).collect(),
        }
    }
}

fn og(min: usize, max: usize) -> impl Strategy<Value = Og> {
    (min..=max).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
        prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |bits| Og {
            n,
            edges: pairs
                .iter()
                .zip(&bits)
                .filter(|(_, &b)| b)
                .map(|(&e, _)| e)
                .collect(),
        })
    })
}

fn caps() -> ArrowCaps {
    ArrowCaps {
        max_copies: 16,
        max_nodes: 2_000_000,
        sample: 4,
        parallel: false,
    }
}

fn query(s: &Og, h: &Og, p: &Og, k: usize) -> ArrowQuery {
    ArrowQuery {
        s: s.structure(),
        h: h.structure(),
        p: p.structure(),
        k,
    }
}

/// The answer, or `None` when the instance is over the caps.
fn decide(q: &ArrowQuery) -> Option<ArrowReport> {
    match arrows(q, &caps()) {
        Ok(r) => Some(r),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn answers_carry_rechecked_evidence(s in og(1, 6), h in og(1, 4), p in og(1, 2), k in 1usize..=3) {
        let q = query(&s, &h, &p, k);
        let Some(r) = decide(&q) else { return Ok(()) };
        match &r.bad_coloring {
            Some(c) => {
                prop_assert!(!r.holds);
                prop_assert!(recheck_bad_coloring(&q, c).unwrap());
            }
            None => {
                prop_assert!(r.holds);
                for cert in &r.certificates {
                    prop_assert!(recheck_certificate(&q, cert).unwrap());
                }
            }
        }
    }

    #[test]
    fn search_agrees_with_plain_enumeration(s in og(1, 6), h in og(1, 4), p in og(1, 2), k in 1usize..=2) {
        let q = query(&s, &h, &p, k);
        let Some(r) = decide(&q) else { return Ok(()) };
        match arrows_exhaustive(&q, 1 << 16) {
            Ok(bad) => prop_assert_eq!(r.holds, bad.is_none()),
            Err(Error::CapExceeded { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn monotone_in_the_big_structure(
        s in og(1, 5), h in og(1, 4), p in og(1, 2), k in 1usize..=2,
        at in 0usize..6, nbrs in prop::collection::vec(any::<bool>(), 5),
    ) {
        let bigger = s.insert(at % (s.n + 1), &nbrs);
        let (Some(a), Some(b)) = (decide(&query(&s, &h, &p, k)), decide(&query(&bigger, &h, &p, k))) else {
            return Ok(());
        };
        prop_assert!(!a.holds || b.holds);
    }

    #[test]
    fn antitone_in_colors_and_in_the_pattern(
        s in og(1, 6), h in og(2, 4), p in og(1, 2), k in 1usize..=2, v in 0usize..4,
    ) {
        let q = query(&s, &h, &p, k + 1);
        if let (Some(more), Some(fewer)) = (decide(&q), decide(&query(&s, &h, &p, k))) {
            prop_assert!(!more.holds || fewer.holds);
        }
        let smaller = h.remove(v % h.n);
        if let (Some(big), Some(small)) = (decide(&query(&s, &h, &p, k)), decide(&query(&s, &smaller, &p, k))) {
            prop_assert!(!big.holds || small.holds);
        }
    }

    #[test]
    fn reversing_the_order_changes_nothing(s in og(1, 6), h in og(1, 4), p in og(1, 2), k in 1usize..=2) {
        let a = decide(&query(&s, &h, &p, k)).map(|r| r.holds);
        let b = decide(&query(&s.reversed(), &h.reversed(), &p.reversed(), k)).map(|r| r.holds);
        prop_assert_eq!(a, b);
    }
}
