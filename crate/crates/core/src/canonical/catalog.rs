//! Named canonical functions.

use std::cmp::Ordering;

use super::Behavior;
use crate::error::{Error, Result};
use crate::typespace::{Base, Constants, Type};

pub struct CatalogInfo {
    pub name: &'static str,
    /// Bases the entry is defined for; the first is the default.
    pub bases: &'static [Base],
    pub arity: usize,
    pub constants: usize,
    pub description: &'static str,
}

const ANY: &[Base] = &[
    Base::QOrder,
    Base::RandomGraph,
    Base::OrderedRandomGraph,
    Base::Equality,
];
const Q: &[Base] = &[Base::QOrder];
const G: &[Base] = &[Base::RandomGraph];
const EQ: &[Base] = &[Base::Equality];

macro_rules! entry {
    ($name:expr, $bases:expr, $m:expr, $k:expr, $d:expr) => {
        CatalogInfo {
            name: $name,
            bases: $bases,
            arity: $m,
            constants: $k,
            description: $d,
        }
    };
}

pub static CATALOG: &[CatalogInfo] = &[
    entry!("identity", ANY, 1, 0, "every 2-type kept"),
    entry!("constant", ANY, 1, 0, "everything collapsed to one point"),
    entry!("reversal", Q, 1, 0, "order inverted"),
    entry!(
        "rotation",
        Q,
        1,
        1,
        "points above the constant moved below the rest, order kept on each side"
    ),
    entry!(
        "lex",
        Q,
        2,
        0,
        "lexicographic: first argument decides, ties broken by the second"
    ),
    entry!(
        "dual_lex",
        Q,
        2,
        0,
        "order dual of lex (coincides with lex)"
    ),
    entry!(
        "pp",
        Q,
        2,
        1,
        "first argument at or below the constant: ordered by it; above: by the second argument"
    ),
    entry!("dual_pp", Q, 2, 1, "order dual of pp"),
    entry!("e_E", G, 1, 0, "injective onto a clique"),
    entry!("e_N", G, 1, 0, "injective onto an independent set"),
    entry!("minus", G, 1, 0, "edges and non-edges exchanged"),
    entry!(
        "sw",
        G,
        1,
        1,
        "adjacency to the constant flipped, the rest kept"
    ),
    entry!(
        "p1_balanced",
        G,
        2,
        0,
        "binary injection of type p1, balanced in both arguments"
    ),
    entry!(
        "max_balanced",
        G,
        2,
        0,
        "binary injection of type max, balanced in both arguments"
    ),
    entry!(
        "max_edom",
        G,
        2,
        0,
        "binary injection of type max, E-dominated in both arguments"
    ),
    entry!(
        "p1_edom",
        G,
        2,
        0,
        "binary injection of type p1, E-dominated in both arguments"
    ),
    entry!(
        "p1_bal_edom",
        G,
        2,
        0,
        "binary injection of type p1, balanced in the first and E-dominated in the second argument"
    ),
    entry!("dual_max_balanced", G, 2, 0, "dual of max_balanced"),
    entry!("dual_max_edom", G, 2, 0, "dual of max_edom"),
    entry!("dual_p1_edom", G, 2, 0, "dual of p1_edom"),
    entry!("dual_p1_bal_edom", G, 2, 0, "dual of p1_bal_edom"),
    entry!(
        "binary_injection_equality",
        EQ,
        2,
        0,
        "binary injection of the pure set"
    ),
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|c| c.name).collect()
}

fn info(name: &str) -> Result<&'static CatalogInfo> {
    CATALOG
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCatalogEntry(name.to_string()))
}

/// The named behavior over its default base.
pub fn catalog(name: &str) -> Result<Behavior> {
    let i = info(name)?;
    catalog_in(name, i.bases[0])
}

pub fn catalog_in(name: &str, base: Base) -> Result<Behavior> {
    let i = info(name)?;
    if !i.bases.contains(&base) {
        return Err(Error::UnsupportedBase(base));
    }
    let k = Constants::new(i.constants);
    let m = i.arity;
    let b = match name {
        "identity" => Behavior::from_fn(name, base, 1, k, |ins| ins[0].restrict(base, &[0, 1]))?,
        "constant" => Behavior::from_fn(name, base, 1, k, |_| same_point(base))?,
        "reversal" => by_key(name, m, k, |p| -p[0].0)?,
        "rotation" => by_key(name, m, k, |p| {
            let (x, c) = p[0];
            if x <= c[0] {
                (1, x)
            } else {
                (0, x)
            }
        })?,
        "lex" => by_key(name, m, k, |p| (p[0].0, p[1].0))?,
        "pp" => by_key(name, m, k, |p| {
            let (x, c) = p[0];
            if x <= c[0] {
                (0, x)
            } else {
                (1, p[1].0)
            }
        })?,
        "dual_lex" | "dual_pp" | "dual_max_balanced" | "dual_max_edom" | "dual_p1_edom"
        | "dual_p1_bal_edom" => catalog_in(&name["dual_".len()..], base)?
            .dual()?
            .renamed(name),
        "e_E" => graph(name, m, k, |_| G2::E)?,
        "e_N" => graph(name, m, k, |_| G2::N)?,
        "minus" => graph(name, m, k, |g| g[0].flip())?,
        "sw" => Behavior::from_fn(name, base, 1, k, |ins| {
            let t = &ins[0];
            let g = G2::of(t, 0, 1);
            // exactly one of the two points is the constant
            if t.same(0, 2) != t.same(1, 2) {
                g.flip().to_type()
            } else {
                g.to_type()
            }
        })?,
        "p1_balanced" => graph(name, m, k, |g| binary(g, |a, _| a, |a| a, |b| b))?,
        "max_balanced" => graph(name, m, k, |g| binary(g, max, |a| a, |b| b))?,
        "max_edom" => graph(name, m, k, |g| binary(g, max, |_| G2::E, |_| G2::E))?,
        "p1_edom" => graph(name, m, k, |g| binary(g, |a, _| a, |_| G2::E, |_| G2::E))?,
        "p1_bal_edom" => graph(name, m, k, |g| binary(g, |a, _| a, |a| a, |_| G2::E))?,
        "binary_injection_equality" => Behavior::from_fn(name, base, 2, k, |_| {
            Type::from_partition(Base::Equality, &[0, 1], &[]).unwrap()
        })?,
        _ => unreachable!("catalog entry without a definition"),
    };
    Ok(b)
}

fn same_point(base: Base) -> Type {
    if base.is_ordered() {
        Type::from_ranks(&[0, 0]).unwrap()
    } else {
        Type::from_partition(base, &[0, 0], &[]).unwrap()
    }
}

/// A q-order behavior whose output order is the order of `key` on the
/// image points. `key` receives, for each argument, the rank of the point
/// and the ranks of the constants in that argument's type.
fn by_key<K: Ord>(
    name: &str,
    m: usize,
    constants: Constants,
    key: impl Fn(&[(i64, &[i64])]) -> K,
) -> Result<Behavior> {
    let k = constants.count();
    Behavior::from_fn(name, Base::QOrder, m, constants, |ins| {
        let consts: Vec<Vec<i64>> = ins
            .iter()
            .map(|t| (2..2 + k).map(|c| t.class_of(c) as i64).collect())
            .collect();
        let point = |p: usize| -> K {
            let args: Vec<(i64, &[i64])> = ins
                .iter()
                .zip(&consts)
                .map(|(t, c)| (t.class_of(p) as i64, c.as_slice()))
                .collect();
            key(&args)
        };
        let ranks: &[u8] = match point(0).cmp(&point(1)) {
            Ordering::Less => &[0, 1],
            Ordering::Equal => &[0, 0],
            Ordering::Greater => &[1, 0],
        };
        Type::from_ranks(ranks).unwrap()
    })
}

/// A graph 2-type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum G2 {
    Same,
    E,
    N,
}

impl G2 {
    fn of(t: &Type, p: usize, q: usize) -> G2 {
        if t.same(p, q) {
            G2::Same
        } else if t.edge(p, q) {
            G2::E
        } else {
            G2::N
        }
    }

    fn flip(self) -> G2 {
        match self {
            G2::E => G2::N,
            G2::N => G2::E,
            G2::Same => G2::Same,
        }
    }

    fn to_type(self) -> Type {
        let g = Base::RandomGraph;
        match self {
            G2::Same => Type::from_partition(g, &[0, 0], &[]).unwrap(),
            G2::E => Type::from_partition(g, &[0, 1], &[(0, 1)]).unwrap(),
            G2::N => Type::from_partition(g, &[0, 1], &[]).unwrap(),
        }
    }
}

fn max(a: G2, b: G2) -> G2 {
    if a == G2::E || b == G2::E {
        G2::E
    } else {
        G2::N
    }
}

/// Binary injection: `both` on pairs distinct in both arguments, `first`
/// when only the first argument differs, `second` when only the second
/// does.
fn binary(
    g: &[G2],
    both: impl Fn(G2, G2) -> G2,
    first: impl Fn(G2) -> G2,
    second: impl Fn(G2) -> G2,
) -> G2 {
    match (g[0], g[1]) {
        (G2::Same, b) => second(b),
        (a, G2::Same) => first(a),
        (a, b) => both(a, b),
    }
}

fn graph(name: &str, m: usize, constants: Constants, f: impl Fn(&[G2]) -> G2) -> Result<Behavior> {
    Behavior::from_fn(name, Base::RandomGraph, m, constants, |ins| {
        let g: Vec<G2> = ins.iter().map(|t| G2::of(t, 0, 1)).collect();
        if g.iter().all(|x| *x == G2::Same) {
            return G2::Same.to_type();
        }
        f(&g).to_type()
    })
}
