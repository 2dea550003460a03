use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::typespace::{Base, Constants, Type, TypeJson, TypeSpace};

/// A relation given exactly by the set of complete types of its tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub space: TypeSpace,
    pub types: BTreeSet<Type>,
}

impl Relation {
    pub fn new(name: impl Into<String>, space: TypeSpace, types: BTreeSet<Type>) -> Result<Self> {
        if let Some(bad) = types.iter().find(|t| !space.contains(t)) {
            return Err(Error::InvalidType(format!(
                "{bad:?} is not a type of the relation's space"
            )));
        }
        Ok(Relation {
            name: name.into(),
            space,
            types,
        })
    }

    pub fn from_predicate(
        name: impl Into<String>,
        space: TypeSpace,
        pred: impl Fn(&Type) -> bool,
    ) -> Result<Self> {
        let types = space.enumerate()?.into_iter().filter(|t| pred(t)).collect();
        Ok(Relation {
            name: name.into(),
            space,
            types,
        })
    }

    pub fn full(name: impl Into<String>, space: TypeSpace) -> Result<Self> {
        Relation::from_predicate(name, space, |_| true)
    }

    pub fn empty(name: impl Into<String>, space: TypeSpace) -> Self {
        Relation {
            name: name.into(),
            space,
            types: BTreeSet::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.space.arity
    }

    pub fn base(&self) -> Base {
        self.space.base
    }

    pub fn constants(&self) -> &Constants {
        &self.space.constants
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn contains(&self, t: &Type) -> bool {
        self.types.contains(t)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// The same relation over a space with more constants: every refined
    /// type whose restriction to the variables lies in the relation.
    pub fn refine(&self, constants: &Constants) -> Result<Relation> {
        if self.space.constants == *constants {
            return Ok(self.clone());
        }
        if !self.space.constants.is_empty() {
            return Err(Error::ConstantsMismatch);
        }
        let space = TypeSpace::with_constants(self.base(), self.arity(), constants.clone())?;
        let vars: Vec<usize> = (0..self.arity()).collect();
        let base = self.base();
        Relation::from_predicate(self.name.clone(), space, |t| {
            self.types.contains(&t.restrict(base, &vars))
        })
    }

    fn aligned(&self, other: &Relation) -> Result<(Relation, Relation)> {
        if self.base() != other.base() {
            return Err(Error::BaseMismatch {
                expected: self.base(),
                found: other.base(),
            });
        }
        if self.arity() != other.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: other.arity(),
            });
        }
        if self.space.constants == other.space.constants {
            return Ok((self.clone(), other.clone()));
        }
        if self.space.constants.is_empty() {
            Ok((self.refine(&other.space.constants)?, other.clone()))
        } else if other.space.constants.is_empty() {
            Ok((self.clone(), other.refine(&self.space.constants)?))
        } else {
            Err(Error::ConstantsMismatch)
        }
    }

    /// Type-set equality (after refining over a common constant set).
    pub fn equivalent(&self, other: &Relation) -> Result<bool> {
        let (a, b) = self.aligned(other)?;
        Ok(a.types == b.types)
    }

    pub fn is_subset(&self, other: &Relation) -> Result<bool> {
        let (a, b) = self.aligned(other)?;
        Ok(a.types.is_subset(&b.types))
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        let (a, b) = self.aligned(other)?;
        Ok(Relation {
            name: format!("{}|{}", self.name, other.name),
            space: a.space.clone(),
            types: a.types.union(&b.types).cloned().collect(),
        })
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        let (a, b) = self.aligned(other)?;
        Ok(Relation {
            name: format!("{}&{}", self.name, other.name),
            space: a.space.clone(),
            types: a.types.intersection(&b.types).cloned().collect(),
        })
    }

    pub fn complement(&self) -> Result<Relation> {
        let types = self
            .space
            .enumerate()?
            .into_iter()
            .filter(|t| !self.types.contains(t))
            .collect();
        Ok(Relation {
            name: format!("!{}", self.name),
            space: self.space.clone(),
            types,
        })
    }

    /// Maps every type through `f` (used for the reversal/complement duals).
    pub fn map_types(&self, name: impl Into<String>, f: impl Fn(&Type) -> Type) -> Relation {
        Relation {
            name: name.into(),
            space: self.space.clone(),
            types: self.types.iter().map(f).collect(),
        }
    }

    /// Relation on the reordered arguments: result position `i` is
    /// argument `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Relation> {
        if perm.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: perm.len(),
            });
        }
        let mut inverse = vec![usize::MAX; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            if p >= perm.len() || inverse[p] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            inverse[p] = i;
        }
        let layout: Vec<usize> = perm
            .iter()
            .copied()
            .chain(self.space.constant_points())
            .collect();
        let base = self.base();
        Ok(self.map_types(self.name.clone(), |t| t.restrict(base, &layout)))
    }

    pub fn to_json(&self) -> RelationJson {
        RelationJson {
            name: self.name.clone(),
            base: self.base(),
            arity: self.arity(),
            constants: (!self.space.constants.is_empty()).then(|| self.space.constants.clone()),
            types: self
                .types
                .iter()
                .map(|t| TypeJson::from_type(self.base(), t))
                .collect(),
        }
    }

    pub fn from_json(j: &RelationJson) -> Result<Relation> {
        let space =
            TypeSpace::with_constants(j.base, j.arity, j.constants.clone().unwrap_or_default())?;
        let types = j
            .types
            .iter()
            .map(|t| t.to_type(j.base))
            .collect::<Result<BTreeSet<_>>>()?;
        Relation::new(j.name.clone(), space, types)
    }
}

/// Wire form of a relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationJson {
    pub name: String,
    pub base: Base,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub types: Vec<TypeJson>,
}

/// Type-set equality; errors on base or arity mismatch.
pub fn equivalent(r1: &Relation, r2: &Relation) -> Result<bool> {
    r1.equivalent(r2)
}
