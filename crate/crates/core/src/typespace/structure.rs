use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Base, Type};
use crate::error::{Error, Result};

/// A finite relational structure on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteStructure {
    pub sig: Vec<(String, usize)>,
    pub n: usize,
    #[serde(default)]
    pub rels: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl FiniteStructure {
    pub fn new(sig: &[(&str, usize)], n: usize) -> Self {
        FiniteStructure {
            sig: sig.iter().map(|(s, a)| (s.to_string(), *a)).collect(),
            n,
            rels: sig
                .iter()
                .map(|(s, _)| (s.to_string(), BTreeSet::new()))
                .collect(),
        }
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.sig.iter().find(|(s, _)| s == name).map(|(_, a)| *a)
    }

    pub fn add(&mut self, name: &str, tuple: &[usize]) -> Result<()> {
        let arity = self
            .arity_of(name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
        if arity != tuple.len() {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n,
            });
        }
        self.rels
            .entry(name.to_string())
            .or_default()
            .insert(tuple.to_vec());
        Ok(())
    }

    pub fn holds(&self, name: &str, tuple: &[usize]) -> bool {
        self.rels.get(name).is_some_and(|ts| ts.contains(tuple))
    }

    /// Checks indices and arities against the signature.
    pub fn validate(&self) -> Result<()> {
        for (name, tuples) in &self.rels {
            let arity = self.arity_of(name).ok_or_else(|| {
                Error::InvalidStructure(format!("relation `{name}` not in signature"))
            })?;
            for t in tuples {
                if t.len() != arity {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {t:?} of `{name}` has wrong arity"
                    )));
                }
                if let Some(&i) = t.iter().find(|&&i| i >= self.n) {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: self.n,
                    });
                }
            }
        }
        Ok(())
    }

    /// The strict chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let mut s = FiniteStructure::new(&[("<", 2)], n);
        for a in 0..n {
            for b in a + 1..n {
                s.add("<", &[a, b]).unwrap();
            }
        }
        s
    }

    /// An undirected graph, stored with both orientations.
    pub fn graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut s = FiniteStructure::new(&[("E", 2)], n);
        for &(a, b) in edges {
            s.add("E", &[a, b])?;
            s.add("E", &[b, a])?;
        }
        Ok(s)
    }

    /// A graph on the chain `0 < ... < n-1`.
    pub fn ordered_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut s = FiniteStructure::new(&[("<", 2), ("E", 2)], n);
        for a in 0..n {
            for b in a + 1..n {
                s.add("<", &[a, b])?;
            }
        }
        for &(a, b) in edges {
            s.add("E", &[a, b])?;
            s.add("E", &[b, a])?;
        }
        Ok(s)
    }

    /// The structure induced on the classes of `t` (class `i` is element `i`).
    pub fn from_type(base: Base, t: &Type) -> Self {
        let b = t.class_count();
        let mut s = FiniteStructure::new(base_signature(base), b);
        for x in 0..b {
            for y in 0..b {
                if base.is_ordered() && x < y {
                    s.add("<", &[x, y]).unwrap();
                }
                if base.has_edges() && t.class_edge(x, y) {
                    s.add("E", &[x, y]).unwrap();
                }
            }
        }
        s
    }

    /// The reduct to the given relation names.
    pub fn reduct(&self, names: &[String]) -> FiniteStructure {
        FiniteStructure {
            sig: self
                .sig
                .iter()
                .filter(|(s, _)| names.contains(s))
                .cloned()
                .collect(),
            n: self.n,
            rels: self
                .rels
                .iter()
                .filter(|(s, _)| names.contains(s))
                .map(|(s, t)| (s.clone(), t.clone()))
                .collect(),
        }
    }

    pub fn same_signature(&self, other: &FiniteStructure) -> bool {
        let a: BTreeSet<_> = self.sig.iter().collect();
        let b: BTreeSet<_> = other.sig.iter().collect();
        a == b
    }
}

pub(crate) fn base_signature(base: Base) -> &'static [(&'static str, usize)] {
    match base {
        Base::QOrder => &[("<", 2)],
        Base::RandomGraph => &[("E", 2)],
        Base::OrderedRandomGraph => &[("<", 2), ("E", 2)],
        Base::Equality => &[],
    }
}

/// A base catalog: its signature and forbidden bounds. For the ordered
/// random graph each bound lives in a reduct of the signature and is tested
/// against the matching reduct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCatalog {
    pub tag: Base,
    pub max_relation_arity: usize,
    pub bounds: Vec<FiniteStructure>,
}

fn order_bounds() -> Vec<FiniteStructure> {
    let mut looped = FiniteStructure::new(&[("<", 2)], 1);
    looped.add("<", &[0, 0]).unwrap();
    let incomparable = FiniteStructure::new(&[("<", 2)], 2);
    let mut two_cycle = FiniteStructure::new(&[("<", 2)], 2);
    two_cycle.add("<", &[0, 1]).unwrap();
    two_cycle.add("<", &[1, 0]).unwrap();
    let mut three_cycle = FiniteStructure::new(&[("<", 2)], 3);
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        three_cycle.add("<", &[a, b]).unwrap();
    }
    vec![looped, incomparable, two_cycle, three_cycle]
}

fn graph_bounds() -> Vec<FiniteStructure> {
    let mut looped = FiniteStructure::new(&[("E", 2)], 1);
    looped.add("E", &[0, 0]).unwrap();
    let mut asym = FiniteStructure::new(&[("E", 2)], 2);
    asym.add("E", &[0, 1]).unwrap();
    vec![looped, asym]
}

pub fn base_catalog(base: Base) -> BaseCatalog {
    let bounds = match base {
        Base::QOrder => order_bounds(),
        Base::RandomGraph => graph_bounds(),
        Base::OrderedRandomGraph => order_bounds().into_iter().chain(graph_bounds()).collect(),
        Base::Equality => Vec::new(),
    };
    BaseCatalog {
        tag: base,
        max_relation_arity: 2,
        bounds,
    }
}

/// True iff no bound of the base embeds into `s`.
pub fn check_age(base: Base, s: &FiniteStructure) -> Result<bool> {
    s.validate()?;
    let expected = FiniteStructure::new(base_signature(base), 0);
    if !s.same_signature(&expected) {
        return Err(Error::InvalidStructure(format!(
            "signature {:?} does not match base {base}",
            s.sig
        )));
    }
    for bound in base_catalog(base).bounds {
        let names: Vec<String> = bound.sig.iter().map(|(n, _)| n.clone()).collect();
        let reduct = s.reduct(&names);
        if !embeddings_limited(&bound, &reduct, 1)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All embeddings of `p` into `s` (injective, preserving and reflecting
/// every relation), as maps from elements of `p` to elements of `s`.
pub fn embeddings(p: &FiniteStructure, s: &FiniteStructure) -> Result<Vec<Vec<usize>>> {
    embeddings_limited(p, s, usize::MAX)
}

pub(crate) fn embeddings_limited(
    p: &FiniteStructure,
    s: &FiniteStructure,
    limit: usize,
) -> Result<Vec<Vec<usize>>> {
    p.validate()?;
    s.validate()?;
    if !p.same_signature(s) {
        return Err(Error::InvalidStructure(
            "embedding between different signatures".into(),
        ));
    }
    let mut out = Vec::new();
    let mut map = Vec::with_capacity(p.n);
    let mut used = vec![false; s.n];
    extend(p, s, &mut map, &mut used, &mut out, limit);
    Ok(out)
}

fn consistent(p: &FiniteStructure, s: &FiniteStructure, map: &[usize]) -> bool {
    let last = map.len() - 1;
    for (name, arity) in &p.sig {
        let arity = *arity;
        if arity == 0 {
            continue;
        }
        // every tuple over 0..=last that mentions `last`
        let mut idx = vec![0usize; arity];
        'tuples: loop {
            if idx.contains(&last) {
                let image: Vec<usize> = idx.iter().map(|&i| map[i]).collect();
                if p.holds(name, &idx) != s.holds(name, &image) {
                    return false;
                }
            }
            for k in 0..arity {
                idx[k] += 1;
                if idx[k] <= last {
                    continue 'tuples;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    true
}

fn extend(
    p: &FiniteStructure,
    s: &FiniteStructure,
    map: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if map.len() == p.n {
        out.push(map.clone());
        return;
    }
    for v in 0..s.n {
        if used[v] {
            continue;
        }
        map.push(v);
        if consistent(p, s, map) {
            used[v] = true;
            extend(p, s, map, used, out, limit);
            used[v] = false;
        }
        map.pop();
        if out.len() >= limit {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typespace::{enumerate_types, Constants};

    #[test]
    fn age_examples() {
        let mut cyc = FiniteStructure::new(&[("<", 2)], 3);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            cyc.add("<", &[a, b]).unwrap();
        }
        assert!(!check_age(Base::QOrder, &cyc).unwrap());
        assert!(check_age(Base::QOrder, &FiniteStructure::chain(4)).unwrap());
        let c4 = FiniteStructure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(check_age(Base::RandomGraph, &c4).unwrap());
        let mut asym = FiniteStructure::new(&[("E", 2)], 2);
        asym.add("E", &[0, 1]).unwrap();
        assert!(!check_age(Base::RandomGraph, &asym).unwrap());
        // non-transitive but total is still a 3-cycle
        let mut partial = FiniteStructure::new(&[("<", 2)], 3);
        partial.add("<", &[0, 1]).unwrap();
        partial.add("<", &[1, 2]).unwrap();
        assert!(!check_age(Base::QOrder, &partial).unwrap());
    }

    #[test]
    fn embedding_counts() {
        let c2 = FiniteStructure::chain(2);
        let c3 = FiniteStructure::chain(3);
        assert_eq!(embeddings(&c2, &c3).unwrap().len(), 3);
        assert_eq!(embeddings(&c3, &c2).unwrap().len(), 0);
        let edge = FiniteStructure::graph(2, &[(0, 1)]).unwrap();
        let c4 = FiniteStructure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let maps = embeddings(&edge, &c4).unwrap();
        assert_eq!(maps.len(), 8);
        let copies: BTreeSet<BTreeSet<usize>> =
            maps.iter().map(|m| m.iter().copied().collect()).collect();
        assert_eq!(copies.len(), 4);
    }

    #[test]
    fn every_type_is_in_the_age() {
        for base in Base::ALL {
            for t in enumerate_types(base, 4, &Constants::none()).unwrap() {
                let s = FiniteStructure::from_type(base, &t);
                assert!(check_age(base, &s).unwrap(), "{base} {t:?}");
            }
        }
    }

    #[test]
    fn json_shape() {
        let s = FiniteStructure::chain(2);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["rels"]["<"][0], serde_json::json!([0, 1]));
        let back: FiniteStructure = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
