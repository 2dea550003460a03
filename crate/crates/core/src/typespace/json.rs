use serde::{Deserialize, Serialize};

use super::{Base, Constants, Type};
use crate::error::{Error, Result};

/// Wire form of a type: `{"ranks":[...]}` for weak orders,
/// `{"partition":[[...]],"edges":[[i,j]],"order":[...]}` for graph and
/// equality types (edges index classes of the partition).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

impl TypeJson {
    pub fn from_type(base: Base, t: &Type) -> TypeJson {
        if base == Base::QOrder {
            return TypeJson {
                ranks: Some(t.classes().to_vec()),
                ..TypeJson::default()
            };
        }
        let b = t.class_count();
        let partition: Vec<Vec<usize>> = (0..b)
            .map(|c| (0..t.len()).filter(|&p| t.class_of(p) == c).collect())
            .collect();
        let mut edges = Vec::new();
        if base.has_edges() {
            for hi in 1..b {
                for lo in 0..hi {
                    if t.class_edge(lo, hi) {
                        edges.push([lo, hi]);
                    }
                }
            }
        }
        TypeJson {
            ranks: None,
            partition: Some(partition),
            edges: base.has_edges().then_some(edges),
            order: base.is_ordered().then(|| (0..b).collect()),
        }
    }

    pub fn to_type(&self, base: Base) -> Result<Type> {
        if let Some(ranks) = &self.ranks {
            if base != Base::QOrder {
                return Err(Error::InvalidType(format!("`ranks` given for base {base}")));
            }
            return Type::from_ranks(ranks);
        }
        let partition = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::InvalidType("missing `ranks` or `partition`".into()))?;
        let n: usize = partition.iter().map(Vec::len).sum();
        if n > base.max_points() {
            return Err(Error::InvalidType(format!(
                "more than {} points",
                base.max_points()
            )));
        }
        let mut labels = vec![u8::MAX; n];
        for (c, class) in partition.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidType("empty class".into()));
            }
            for &p in class {
                if p >= n || labels[p] != u8::MAX {
                    return Err(Error::InvalidType(format!(
                        "point {p} misplaced in partition"
                    )));
                }
                labels[p] = c as u8;
            }
        }
        let b = partition.len();
        let edges = self.edges.clone().unwrap_or_default();
        if !base.has_edges() && !edges.is_empty() {
            return Err(Error::InvalidType(format!("edges given for base {base}")));
        }
        for [x, y] in &edges {
            if x == y || *x >= b || *y >= b {
                return Err(Error::InvalidType(format!("bad class edge ({x},{y})")));
            }
        }
        let has = |a: u8, c: u8| {
            edges.iter().any(|&[x, y]| {
                (x, y) == (a as usize, c as usize) || (y, x) == (a as usize, c as usize)
            })
        };
        if base.is_ordered() {
            let order: Vec<usize> = self.order.clone().unwrap_or_else(|| (0..b).collect());
            let mut rank = vec![usize::MAX; b];
            for (r, &c) in order.iter().enumerate() {
                if c >= b || rank[c] != usize::MAX {
                    return Err(Error::InvalidType(
                        "`order` is not a permutation of the classes".into(),
                    ));
                }
                rank[c] = r;
            }
            if order.len() != b {
                return Err(Error::InvalidType(
                    "`order` is not a permutation of the classes".into(),
                ));
            }
            let raw: Vec<u8> = labels.iter().map(|&c| rank[c as usize] as u8).collect();
            // canonical() hands back ranks; map them to original classes for adjacency
            return Ok(Type::canonical(base, &raw, |ra, rb| {
                has(order[ra as usize] as u8, order[rb as usize] as u8)
            }));
        }
        if self.order.is_some() {
            return Err(Error::InvalidType(format!("`order` given for base {base}")));
        }
        Ok(Type::canonical(base, &labels, has))
    }
}

/// Wire form of a constant configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsJson {
    pub count: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
}

impl From<&Constants> for ConstantsJson {
    fn from(c: &Constants) -> Self {
        ConstantsJson {
            count: c.count(),
            edges: c.edge_list().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl TryFrom<&ConstantsJson> for Constants {
    type Error = Error;

    fn try_from(j: &ConstantsJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|&[a, b]| (a, b)).collect();
        Constants::with_edges(j.count, &edges)
    }
}

impl Serialize for Constants {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstantsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Constants {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ConstantsJson::deserialize(d)?;
        Constants::try_from(&j).map_err(serde::de::Error::custom)
    }
}
