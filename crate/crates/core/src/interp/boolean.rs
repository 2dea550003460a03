//! Structures on {0,1} and their polymorphisms up to arity 3.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanRelation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<u8>>,
}

impl BooleanRelation {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<u8>>,
    ) -> Result<Self> {
        let tuples: BTreeSet<Vec<u8>> = tuples.into_iter().collect();
        if let Some(t) = tuples
            .iter()
            .find(|t| t.len() != arity || t.iter().any(|&b| b > 1))
        {
            return Err(Error::InvalidArgument(format!(
                "{t:?} is not a 0/1 tuple of length {arity}"
            )));
        }
        Ok(BooleanRelation {
            name: name.into(),
            arity,
            tuples,
        })
    }

    pub fn from_predicate(
        name: impl Into<String>,
        arity: usize,
        f: impl Fn(&[u8]) -> bool,
    ) -> Self {
        let tuples = all_tuples(arity).filter(|t| f(t)).collect();
        BooleanRelation {
            name: name.into(),
            arity,
            tuples,
        }
    }

    pub fn contains(&self, t: &[u8]) -> bool {
        self.tuples.contains(t)
    }
}

fn all_tuples(arity: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << arity).map(move |m| (0..arity).map(|i| (m >> i & 1) as u8).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanStructure {
    pub name: String,
    pub relations: Vec<BooleanRelation>,
}

impl BooleanStructure {
    pub fn new(name: impl Into<String>, relations: Vec<BooleanRelation>) -> Self {
        BooleanStructure {
            name: name.into(),
            relations,
        }
    }

    pub fn get(&self, name: &str) -> Option<&BooleanRelation> {
        self.relations.iter().find(|r| r.name == name)
    }
}

/// Not-all-equal: `{0,1}³` minus the two constant tuples.
pub fn nae() -> BooleanStructure {
    BooleanStructure::new(
        "NAE",
        vec![BooleanRelation::from_predicate("NAE", 3, |t| {
            t.iter().any(|&b| b != t[0])
        })],
    )
}

/// One-in-three: exactly one coordinate is 1.
pub fn oit() -> BooleanStructure {
    BooleanStructure::new(
        "OIT",
        vec![BooleanRelation::from_predicate("OIT", 3, |t| {
            t.iter().filter(|&&b| b == 1).count() == 1
        })],
    )
}

/// Exactly two of four coordinates are 1.
pub fn exactly_two_of_four() -> BooleanStructure {
    BooleanStructure::new(
        "R",
        vec![BooleanRelation::from_predicate("R", 4, |t| {
            t.iter().filter(|&&b| b == 1).count() == 2
        })],
    )
}

/// Not-all-zero together with negation.
pub fn nonzero_and_negation() -> BooleanStructure {
    BooleanStructure::new(
        "R_neg",
        vec![
            BooleanRelation::from_predicate("R", 3, |t| t.contains(&1)),
            BooleanRelation::from_predicate("neg", 2, |t| t[0] != t[1]),
        ],
    )
}

/// An operation on {0,1}; bit `i` of `table` is the value on the input
/// whose j-th argument is bit j of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoolOp {
    pub arity: usize,
    pub table: u32,
}

impl BoolOp {
    pub const CONST0: BoolOp = BoolOp {
        arity: 1,
        table: 0b00,
    };
    pub const CONST1: BoolOp = BoolOp {
        arity: 1,
        table: 0b11,
    };
    pub const AND: BoolOp = BoolOp {
        arity: 2,
        table: 0b1000,
    };
    pub const OR: BoolOp = BoolOp {
        arity: 2,
        table: 0b1110,
    };
    pub const MAJORITY: BoolOp = BoolOp {
        arity: 3,
        table: 0b1110_1000,
    };
    pub const MINORITY: BoolOp = BoolOp {
        arity: 3,
        table: 0b1001_0110,
    };

    pub fn apply(&self, args: &[u8]) -> u8 {
        let idx = args
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | (b as usize) << j);
        (self.table >> idx & 1) as u8
    }

    /// `f(x) = g(x_i)` for some `i` and a bijection `g`.
    pub fn is_essentially_permutation(&self) -> bool {
        (0..self.arity).any(|i| {
            let mut g = [None::<u8>; 2];
            for idx in 0..1usize << self.arity {
                let xi = idx >> i & 1;
                let v = (self.table >> idx & 1) as u8;
                match g[xi] {
                    None => g[xi] = Some(v),
                    Some(w) if w != v => return false,
                    _ => {}
                }
            }
            g[0] != g[1]
        })
    }

    pub fn preserves(&self, r: &BooleanRelation) -> bool {
        let rows: Vec<&Vec<u8>> = r.tuples.iter().collect();
        if rows.is_empty() {
            return true;
        }
        let mut idx = vec![0usize; self.arity];
        let mut args = vec![0u8; self.arity];
        let mut out = vec![0u8; r.arity];
        loop {
            for (c, o) in out.iter_mut().enumerate() {
                for (j, a) in args.iter_mut().enumerate() {
                    *a = rows[idx[j]][c];
                }
                *o = self.apply(&args);
            }
            if !r.contains(&out) {
                return false;
            }
            let mut j = 0;
            loop {
                if j == self.arity {
                    return true;
                }
                idx[j] += 1;
                if idx[j] < rows.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    pub fn is_polymorphism(&self, s: &BooleanStructure) -> bool {
        s.relations.iter().all(|r| self.preserves(r))
    }
}

impl fmt::Display for BoolOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let named = [
            (BoolOp::CONST0, "const0"),
            (BoolOp::CONST1, "const1"),
            (BoolOp::AND, "and"),
            (BoolOp::OR, "or"),
            (BoolOp::MAJORITY, "majority"),
            (BoolOp::MINORITY, "minority"),
            (
                BoolOp {
                    arity: 1,
                    table: 0b10,
                },
                "id",
            ),
            (
                BoolOp {
                    arity: 1,
                    table: 0b01,
                },
                "not",
            ),
        ];
        match named.iter().find(|(op, _)| op == self) {
            Some((_, name)) => f.write_str(name),
            None => write!(
                f,
                "op{}:{:0w$b}",
                self.arity,
                self.table,
                w = 1 << self.arity
            ),
        }
    }
}

/// Every operation of arity at most `max_arity` preserving `s`.
pub fn bool_polymorphisms(s: &BooleanStructure, max_arity: usize) -> Result<Vec<BoolOp>> {
    if max_arity > 3 {
        return Err(Error::CapExceeded {
            cap: "boolean polymorphism arity",
            limit: 3,
            needed: max_arity,
        });
    }
    let mut out = Vec::new();
    for arity in 1..=max_arity {
        for table in 0..1u32 << (1 << arity) {
            let op = BoolOp { arity, table };
            if op.is_polymorphism(s) {
                out.push(op);
            }
        }
    }
    Ok(out)
}

/// The six operations one of which lies in every clone on {0,1} that is
/// not made of essential permutations.
pub const SIX_GENERATORS: [BoolOp; 6] = [
    BoolOp::CONST0,
    BoolOp::CONST1,
    BoolOp::AND,
    BoolOp::OR,
    BoolOp::MAJORITY,
    BoolOp::MINORITY,
];

/// Whether all polymorphisms of `s` are essentially permutations.
pub fn essentially_permutations(s: &BooleanStructure) -> bool {
    !SIX_GENERATORS.iter().any(|op| op.is_polymorphism(s))
}

/// The same question answered by listing every polymorphism up to arity 3.
pub fn essentially_permutations_brute(s: &BooleanStructure) -> bool {
    bool_polymorphisms(s, 3)
        .expect("arity 3 is within the cap")
        .iter()
        .all(|op| op.is_essentially_permutation())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_polymorphisms_of_nae() {
        let ops = bool_polymorphisms(&nae(), 1).unwrap();
        let names: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
        assert_eq!(names, ["not", "id"]);
    }

    #[test]
    fn and_breaks_one_in_three() {
        let ops = bool_polymorphisms(&oit(), 2).unwrap();
        assert!(!ops.contains(&BoolOp::AND));
        assert_eq!(BoolOp::AND.apply(&[1, 0]), 0);
    }

    #[test]
    fn generator_test_matches_brute_force() {
        for s in [nae(), oit(), exactly_two_of_four(), nonzero_and_negation()] {
            assert!(essentially_permutations(&s), "{}", s.name);
            assert!(essentially_permutations_brute(&s), "{}", s.name);
        }
        let full = BooleanStructure::new(
            "full",
            vec![BooleanRelation::from_predicate("F", 3, |_| true)],
        );
        assert!(!essentially_permutations(&full));
        assert!(!essentially_permutations_brute(&full));
        // every ternary relation on its own
        for mask in 0u32..256 {
            let r = BooleanRelation::from_predicate("S", 3, |t| {
                mask >> (t[0] as u32 | (t[1] as u32) << 1 | (t[2] as u32) << 2) & 1 == 1
            });
            let s = BooleanStructure::new("s", vec![r]);
            assert_eq!(
                essentially_permutations(&s),
                essentially_permutations_brute(&s),
                "{mask:08b}"
            );
        }
    }

    #[test]
    fn permutation_recognition() {
        assert!(BoolOp {
            arity: 1,
            table: 0b10
        }
        .is_essentially_permutation());
        assert!(BoolOp {
            arity: 3,
            table: 0b0101_0101
        }
        .is_essentially_permutation());
        assert!(!BoolOp::CONST0.is_essentially_permutation());
        assert!(!BoolOp::MINORITY.is_essentially_permutation());
    }
}
