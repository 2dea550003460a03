//! Built-in named relations.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::{parse_formula, QfFormula, Relation};
use crate::error::{Error, Result};
use crate::typespace::{Base, Type, TypeSpace};

#[derive(Clone, Copy)]
enum Def {
    Formula(&'static str),
    Predicate(fn(&Type) -> bool),
}

/// Static description of a built-in relation.
#[derive(Clone, Copy)]
pub struct BuiltinInfo {
    pub name: &'static str,
    /// Bases the relation is defined over; the first is the default.
    pub bases: &'static [Base],
    pub vars: &'static [&'static str],
    pub description: &'static str,
    def: Def,
}

impl BuiltinInfo {
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn definition(&self) -> String {
        match self.def {
            Def::Formula(f) => f.to_string(),
            Def::Predicate(_) => self.description.to_string(),
        }
    }
}

const EQ_FIRST: &[Base] = &[
    Base::Equality,
    Base::QOrder,
    Base::RandomGraph,
    Base::OrderedRandomGraph,
];
const ORDERED: &[Base] = &[Base::QOrder, Base::OrderedRandomGraph];
const GRAPH: &[Base] = &[Base::RandomGraph, Base::OrderedRandomGraph];

fn distinct(t: &Type, n: usize) -> bool {
    (0..n).all(|a| (a + 1..n).all(|b| !t.same(a, b)))
}

fn edges_on(t: &Type, pts: &[usize]) -> usize {
    t.edge_count(pts)
}

fn r_k(t: &Type, k: usize) -> bool {
    let pts: Vec<usize> = (0..k).collect();
    distinct(t, k) && edges_on(t, &pts) % 2 == 1
}

fn degree(t: &Type, p: usize, n: usize) -> usize {
    (0..n).filter(|&q| q != p && t.edge(p, q)).count()
}

fn rel_t(t: &Type) -> bool {
    if !distinct(t, 4) {
        return false;
    }
    let m = edges_on(t, &[0, 1, 2, 3]);
    let mut deg: Vec<usize> = (0..4).map(|p| degree(t, p, 4)).collect();
    deg.sort_unstable();
    match m {
        1 | 5 => true,
        2 => deg[3] == 2,
        3 => deg == [1, 1, 2, 2],
        4 => deg[3] == 3,
        _ => false,
    }
}

fn rel_h_with(t: &Type, n: fn(&Type, usize, usize) -> bool) -> bool {
    // points: x1 y1 x2 y2 x3 y3
    let pair = |i: usize| [2 * i, 2 * i + 1];
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            for u in pair(i) {
                for v in pair(j) {
                    if !n(t, u, v) {
                        return false;
                    }
                }
            }
        }
    }
    let e = |i: usize| t.edge(2 * i, 2 * i + 1);
    let nn = |i: usize| n(t, 2 * i, 2 * i + 1);
    (e(0) && nn(1) && nn(2)) || (nn(0) && e(1) && nn(2)) || (nn(0) && nn(1) && e(2))
}

fn non_edge_distinct(t: &Type, u: usize, v: usize) -> bool {
    !t.same(u, v) && !t.edge(u, v)
}

fn edge_distinct(t: &Type, u: usize, v: usize) -> bool {
    !t.same(u, v) && t.edge(u, v)
}

fn rel_h(t: &Type) -> bool {
    rel_h_with(t, non_edge_distinct)
}

fn rel_h_literal(t: &Type) -> bool {
    rel_h_with(t, edge_distinct)
}

fn rel_p3(t: &Type) -> bool {
    distinct(t, 3) && matches!(edges_on(t, &[0, 1, 2]), 1 | 2)
}

fn rel_q4(t: &Type) -> bool {
    distinct(t, 4) && matches!(edges_on(t, &[0, 1, 2, 3]), 0 | 6)
}

fn rel_l(t: &Type) -> bool {
    distinct(t, 6) && edges_on(t, &[0, 1, 2]) % 2 == edges_on(t, &[3, 4, 5]) % 2
}

pub const BUILTINS: &[BuiltinInfo] = &[
    BuiltinInfo {
        name: "eq",
        bases: EQ_FIRST,
        vars: &["x", "y"],
        description: "equality",
        def: Def::Formula("x=y"),
    },
    BuiltinInfo {
        name: "neq",
        bases: EQ_FIRST,
        vars: &["x", "y"],
        description: "disequality",
        def: Def::Formula("x!=y"),
    },
    BuiltinInfo {
        name: "lt",
        bases: ORDERED,
        vars: &["x", "y"],
        description: "strict order",
        def: Def::Formula("x<y"),
    },
    BuiltinInfo {
        name: "le",
        bases: ORDERED,
        vars: &["x", "y"],
        description: "non-strict order",
        def: Def::Formula("x<=y"),
    },
    BuiltinInfo {
        name: "Betw",
        bases: ORDERED,
        vars: &["x", "y", "z"],
        description: "y lies strictly between x and z",
        def: Def::Formula("x<y & y<z | z<y & y<x"),
    },
    BuiltinInfo {
        name: "Cycl",
        bases: ORDERED,
        vars: &["x", "y", "z"],
        description: "x, y, z in cyclic order",
        def: Def::Formula("x<y & y<z | y<z & z<x | z<x & x<y"),
    },
    BuiltinInfo {
        name: "Sep",
        bases: ORDERED,
        vars: &["x1", "y1", "x2", "y2"],
        description: "the pair {x1,y1} separates the pair {x2,y2} on the circle",
        def: Def::Formula(
            "x1<x2 & x2<y1 & y1<y2 | x1<y2 & y2<y1 & y1<x2 | y1<x2 & x2<x1 & x1<y2 \
             | y1<y2 & y2<x1 & x1<x2 | x2<x1 & x1<y2 & y2<y1 | x2<y1 & y1<y2 & y2<x1 \
             | y2<x1 & x1<x2 & x2<y1 | y2<y1 & y1<x2 & x2<x1",
        ),
    },
    BuiltinInfo {
        name: "T3",
        bases: ORDERED,
        vars: &["x", "y", "z"],
        description: "x=y<z or x=z<y",
        def: Def::Formula("x=y & y<z | x=z & z<y"),
    },
    BuiltinInfo {
        name: "negT3",
        bases: ORDERED,
        vars: &["x", "y", "z"],
        description: "x=y>z or x=z>y (order dual of T3)",
        def: Def::Formula("x=y & z<y | x=z & y<z"),
    },
    BuiltinInfo {
        name: "E6",
        bases: EQ_FIRST,
        vars: &["x1", "x2", "y1", "y2", "z1", "z2"],
        description: "exactly one of the pairs (x1,x2), (y1,y2), (z1,z2) is equal",
        def: Def::Formula(
            "x1=x2 & y1!=y2 & z1!=z2 | x1!=x2 & y1=y2 & z1!=z2 | x1!=x2 & y1!=y2 & z1=z2",
        ),
    },
    BuiltinInfo {
        name: "E",
        bases: GRAPH,
        vars: &["x", "y"],
        description: "adjacency",
        def: Def::Formula("E(x,y)"),
    },
    BuiltinInfo {
        name: "N",
        bases: GRAPH,
        vars: &["x", "y"],
        description: "distinct and non-adjacent",
        def: Def::Formula("x!=y & !E(x,y)"),
    },
    BuiltinInfo {
        name: "R3",
        bases: GRAPH,
        vars: &["x1", "x2", "x3"],
        description: "pairwise distinct with an odd number of edges",
        def: Def::Predicate(|t| r_k(t, 3)),
    },
    BuiltinInfo {
        name: "R4",
        bases: GRAPH,
        vars: &["x1", "x2", "x3", "x4"],
        description: "pairwise distinct with an odd number of edges",
        def: Def::Predicate(|t| r_k(t, 4)),
    },
    BuiltinInfo {
        name: "R5",
        bases: GRAPH,
        vars: &["x1", "x2", "x3", "x4", "x5"],
        description: "pairwise distinct with an odd number of edges",
        def: Def::Predicate(|t| r_k(t, 5)),
    },
    BuiltinInfo {
        name: "T",
        bases: GRAPH,
        vars: &["x1", "x2", "x3", "x4"],
        description: "pairwise distinct, inducing one edge plus two isolated vertices, \
                      a 2-edge path plus an isolated vertex, a 3-edge path, or a complement of these",
        def: Def::Predicate(rel_t),
    },
    BuiltinInfo {
        name: "H",
        bases: GRAPH,
        vars: &["x1", "y1", "x2", "y2", "x3", "y3"],
        description: "all cross pairs distinct and non-adjacent; exactly one of the pairs \
                      (xi,yi) is an edge, the other two distinct non-edges",
        def: Def::Predicate(rel_h),
    },
    BuiltinInfo {
        name: "H_literal",
        bases: GRAPH,
        vars: &["x1", "y1", "x2", "y2", "x3", "y3"],
        description: "variant of H reading N(u,v) as E(u,v) & u!=v",
        def: Def::Predicate(rel_h_literal),
    },
    BuiltinInfo {
        name: "P3",
        bases: GRAPH,
        vars: &["x1", "x2", "x3"],
        description: "pairwise distinct, neither a clique nor an independent set",
        def: Def::Predicate(rel_p3),
    },
    BuiltinInfo {
        name: "Q4",
        bases: GRAPH,
        vars: &["x1", "x2", "x3", "x4"],
        description: "pairwise distinct, a clique or an independent set",
        def: Def::Predicate(rel_q4),
    },
    BuiltinInfo {
        name: "L",
        bases: GRAPH,
        vars: &["x1", "x2", "x3", "x4", "x5", "x6"],
        description: "pairwise distinct, edge parity on {x1,x2,x3} equals edge parity on {x4,x5,x6}",
        def: Def::Predicate(rel_l),
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|b| b.name).collect()
}

fn info(name: &str) -> Result<&'static BuiltinInfo> {
    BUILTINS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownRelation(name.to_string()))
}

/// A built-in relation over its default base.
pub fn builtin(name: &str) -> Result<Relation> {
    let i = info(name)?;
    builtin_in(name, i.bases[0])
}

type Cache = Mutex<HashMap<(&'static str, Base), Relation>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// A built-in relation over a specific base.
pub fn builtin_in(name: &str, base: Base) -> Result<Relation> {
    let i = info(name)?;
    if !i.bases.contains(&base) {
        return Err(Error::UnsupportedBase(base));
    }
    if let Some(r) = cache().lock().unwrap().get(&(i.name, base)) {
        return Ok(r.clone());
    }
    let r = build(i, base)?;
    cache().lock().unwrap().insert((i.name, base), r.clone());
    Ok(r)
}

fn build(i: &BuiltinInfo, base: Base) -> Result<Relation> {
    let name = i.name;
    let space = TypeSpace::new(base, i.arity());
    match i.def {
        Def::Formula(text) => {
            let vars: Vec<String> = i.vars.iter().map(|s| s.to_string()).collect();
            let f = QfFormula::new(parse_formula(text)?, space, vars, &|_| None)?;
            f.normalize(name)
        }
        Def::Predicate(p) => Relation::from_predicate(name, space, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for b in BUILTINS {
            for &base in b.bases {
                // ordered graph 6-types number in the tens of millions
                if base == Base::OrderedRandomGraph && b.arity() > 4 {
                    continue;
                }
                let r = builtin_in(b.name, base).unwrap();
                assert_eq!(r.arity(), b.arity());
            }
        }
    }

    #[test]
    fn relation_sizes() {
        // labelled graphs on 4 vertices: 6 + 12 + 12 + 12 + 6 lie in T
        assert_eq!(builtin("T").unwrap().len(), 48);
        // odd edge counts on k labelled vertices: half of 2^C(k,2)
        assert_eq!(builtin("R3").unwrap().len(), 4);
        assert_eq!(builtin("R4").unwrap().len(), 32);
        assert_eq!(builtin("R5").unwrap().len(), 512);
        assert_eq!(builtin("P3").unwrap().len(), 6);
        assert_eq!(builtin("Q4").unwrap().len(), 2);
        // 3 pairs inside triples times matching parity: 2^15 / 2
        assert_eq!(builtin("L").unwrap().len(), 1 << 14);
        // cross pairs fixed; one of three inner pairs is an edge
        assert_eq!(builtin("H").unwrap().len(), 3);
        assert_eq!(builtin("H_literal").unwrap().len(), 1);
        assert_eq!(builtin("T3").unwrap().len(), 2);
        // set partitions of 6 points with exactly one equal pair, counted separately
        assert_eq!(builtin("E6").unwrap().len(), 81);
    }

    #[test]
    fn unsupported_base() {
        assert!(matches!(
            builtin_in("Betw", Base::RandomGraph),
            Err(Error::UnsupportedBase(_))
        ));
        assert!(matches!(builtin("nope"), Err(Error::UnknownRelation(_))));
    }
}
