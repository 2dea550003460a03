//! Behaviors: canonical functions as finite tables on 2-types.
//!
//! Both catalogs are binary homogeneous, and stay so after naming finitely
//! many constants, so a canonical function `(D, c1..ck)^m -> D` is fixed up
//! to automorphisms by what it does to 2-types. A behavior stores, for
//! every m-tuple of 2-types over the constants, the plain 2-type of the
//! image pair. Types of longer tuples are assembled pairwise.
//!
//! Realizability is checked locally: every m-tuple of 3-types must assemble
//! into a consistent type. Both ages are defined by bounds on at most three
//! points (equality transitivity, order transitivity) and contain every
//! finite graph or order, so local consistency is all that is needed; the
//! compactness step from finite pieces to a function on the countable base
//! is taken as given.

mod catalog;
mod search;

pub use catalog::{catalog, catalog_in, catalog_names, CatalogInfo, CATALOG};
pub use search::{enumerate_behaviors, find_behavior, EnumOptions, FindOutcome};

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::Relation;
use crate::typespace::{Base, Constants, Type, TypeJson, TypeSpace};

/// The input and output 2-types for one base and constant configuration.
pub(crate) struct KeySpace {
    pub base: Base,
    pub constants: Constants,
    /// 2-types over the constants (two points, then the constants).
    pub keys: Vec<Type>,
    pub index: HashMap<Type, usize>,
    pub flip: Vec<usize>,
    pub diag: Vec<bool>,
    /// Plain 2-types, the possible outputs.
    pub outs: Vec<Type>,
    pub out_index: HashMap<Type, u8>,
    pub out_flip: Vec<u8>,
    pub eq_out: u8,
    /// For each 3-type over the constants, the keys of its pairs
    /// (0,1), (0,2), (1,2).
    pub triples: Vec<[usize; 3]>,
    /// consistent3[(a * n + b) * n + c]: the outputs a, b, c on the pairs
    /// (0,1), (0,2), (1,2) form a type.
    pub consistent3: Vec<bool>,
}

impl KeySpace {
    fn build(base: Base, constants: &Constants) -> Result<KeySpace> {
        constants.validate(base)?;
        let k = constants.count();
        let keys = TypeSpace::with_constants(base, 2, constants.clone())?.enumerate()?;
        let index: HashMap<Type, usize> = keys
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        let mut swap: Vec<usize> = vec![1, 0];
        swap.extend(2..2 + k);
        let flip = keys
            .iter()
            .map(|t| index[&t.restrict(base, &swap)])
            .collect();
        let diag = keys.iter().map(|t| t.same(0, 1)).collect();
        let outs = TypeSpace::new(base, 2).enumerate()?;
        let out_index: HashMap<Type, u8> = outs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i as u8))
            .collect();
        let out_flip = outs
            .iter()
            .map(|t| out_index[&t.restrict(base, &[1, 0])])
            .collect();
        let eq_out = outs
            .iter()
            .position(|t| t.same(0, 1))
            .expect("equality type") as u8;
        let mut triples = Vec::new();
        for t in TypeSpace::with_constants(base, 3, constants.clone())?.enumerate()? {
            let key = |p: usize, q: usize| {
                let mut pos = vec![p, q];
                pos.extend(3..3 + k);
                index[&t.restrict(base, &pos)]
            };
            triples.push([key(0, 1), key(0, 2), key(1, 2)]);
        }
        let n = outs.len();
        let mut consistent3 = vec![false; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let pick = [a, b, c];
                    consistent3[(a * n + b) * n + c] =
                        Type::from_pairs(base, 3, |p, q| outs[pick[p + q - 1]].clone()).is_some();
                }
            }
        }
        Ok(KeySpace {
            base,
            constants: constants.clone(),
            keys,
            index,
            flip,
            diag,
            outs,
            out_index,
            out_flip,
            eq_out,
            triples,
            consistent3,
        })
    }

    pub fn get(base: Base, constants: &Constants) -> Result<Arc<KeySpace>> {
        type Cache = Mutex<HashMap<(Base, Constants), Arc<KeySpace>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(ks) = cache.lock().unwrap().get(&(base, constants.clone())) {
            return Ok(ks.clone());
        }
        let ks = Arc::new(KeySpace::build(base, constants)?);
        cache
            .lock()
            .unwrap()
            .insert((base, constants.clone()), ks.clone());
        Ok(ks)
    }

    pub fn consistent(&self, a: u8, b: u8, c: u8) -> bool {
        let n = self.outs.len();
        self.consistent3[(a as usize * n + b as usize) * n + c as usize]
    }

    pub fn tuple_count(&self, m: usize) -> usize {
        self.keys.len().pow(m as u32)
    }

    pub fn encode(&self, keys: &[usize]) -> usize {
        keys.iter()
            .rev()
            .fold(0, |acc, &k| acc * self.keys.len() + k)
    }

    pub fn decode(&self, mut code: usize, m: usize) -> Vec<usize> {
        let n = self.keys.len();
        (0..m)
            .map(|_| {
                let k = code % n;
                code /= n;
                k
            })
            .collect()
    }

    pub fn is_diag(&self, code: usize, m: usize) -> bool {
        self.decode(code, m).iter().all(|&k| self.diag[k])
    }

    pub fn flip_code(&self, code: usize, m: usize) -> usize {
        let ks: Vec<usize> = self.decode(code, m).iter().map(|&k| self.flip[k]).collect();
        self.encode(&ks)
    }

    /// Key of the pair `(p, q)` of a type over the constants.
    pub fn pair_key(&self, t: &Type, p: usize, q: usize) -> usize {
        let r = t.len() - self.constants.count();
        let mut pos = vec![p, q];
        pos.extend(r..t.len());
        self.index[&t.restrict(self.base, &pos)]
    }
}

/// A complete behavior of an m-ary function `(D, c1..ck)^m -> D`.
#[derive(Clone)]
pub struct Behavior {
    pub name: String,
    pub base: Base,
    pub arity: usize,
    pub constants: Constants,
    table: Vec<u8>,
    keys: Arc<KeySpace>,
}

impl PartialEq for Behavior {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.arity == other.arity
            && self.constants == other.constants
            && self.table == other.table
    }
}

impl Eq for Behavior {}

impl fmt::Debug for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Behavior({} {}-ary over {} with {} constants)",
            self.name,
            self.arity,
            self.base,
            self.constants.count()
        )
    }
}

impl Behavior {
    /// Tabulates `f`, which receives m 2-types over the constants (never
    /// all diagonal) and returns a plain 2-type.
    pub fn from_fn(
        name: impl Into<String>,
        base: Base,
        arity: usize,
        constants: Constants,
        f: impl Fn(&[Type]) -> Type,
    ) -> Result<Behavior> {
        if arity == 0 {
            return Err(Error::InvalidArgument(
                "behaviors have arity at least 1".into(),
            ));
        }
        let keys = KeySpace::get(base, &constants)?;
        let total = keys.tuple_count(arity);
        let mut table = Vec::with_capacity(total);
        for code in 0..total {
            if keys.is_diag(code, arity) {
                table.push(keys.eq_out);
                continue;
            }
            let inputs: Vec<Type> = keys
                .decode(code, arity)
                .iter()
                .map(|&k| keys.keys[k].clone())
                .collect();
            let out = f(&inputs);
            let o = *keys
                .out_index
                .get(&out)
                .ok_or_else(|| Error::InvalidType(format!("{out:?} is not a 2-type of {base}")))?;
            table.push(o);
        }
        Ok(Behavior {
            name: name.into(),
            base,
            arity,
            constants,
            table,
            keys,
        })
    }

    pub(crate) fn from_table(
        name: String,
        arity: usize,
        keys: Arc<KeySpace>,
        table: Vec<u8>,
    ) -> Behavior {
        Behavior {
            name,
            base: keys.base,
            arity,
            constants: keys.constants.clone(),
            table,
            keys,
        }
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Output 2-type for m input 2-types over the constants.
    pub fn output(&self, inputs: &[Type]) -> Result<Type> {
        if inputs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: inputs.len(),
            });
        }
        let ks = inputs
            .iter()
            .map(|t| {
                self.keys.index.get(t).copied().ok_or_else(|| {
                    Error::InvalidType(format!("{t:?} is not a 2-type over the constants"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.keys.outs[self.table[self.keys.encode(&ks)] as usize].clone())
    }

    /// A copy with one row overwritten (and nothing else adjusted, so the
    /// result may well be unrealizable).
    pub fn with_row(&self, inputs: &[Type], output: &Type) -> Result<Behavior> {
        let keys = inputs
            .iter()
            .map(|t| {
                self.keys.index.get(t).copied().ok_or_else(|| {
                    Error::InvalidType(format!("{t:?} is not a 2-type over the constants"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if keys.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: keys.len(),
            });
        }
        let o = *self
            .keys
            .out_index
            .get(output)
            .ok_or_else(|| Error::InvalidType(format!("{output:?} is not a 2-type")))?;
        let mut b = self.clone();
        b.table[self.keys.encode(&keys)] = o;
        Ok(b)
    }

    /// Non-diagonal rows `(inputs, output)` in table order.
    pub fn rows(&self) -> Vec<(Vec<Type>, Type)> {
        let ks = &self.keys;
        (0..self.table.len())
            .filter(|&c| !ks.is_diag(c, self.arity))
            .map(|c| {
                let inputs = ks
                    .decode(c, self.arity)
                    .iter()
                    .map(|&k| ks.keys[k].clone())
                    .collect();
                (inputs, ks.outs[self.table[c] as usize].clone())
            })
            .collect()
    }

    /// The dual `-f(-x1, ..., -xm)`: conjugation by order reversal on
    /// ordered bases, by complementation on the random graph. Equality
    /// behaviors are self-dual.
    pub fn dual(&self) -> Result<Behavior> {
        let k = self.constants.count();
        let base = self.base;
        let (constants, key_map): (Constants, Box<dyn Fn(&Type) -> Type>) = match base {
            Base::Equality => (self.constants.clone(), Box::new(|t: &Type| t.clone())),
            Base::RandomGraph => (
                self.constants.complemented(),
                Box::new(|t: &Type| t.complemented()),
            ),
            Base::QOrder | Base::OrderedRandomGraph => {
                // reversing also reverses the constants; relabel them
                let mut pos = vec![0, 1];
                pos.extend((2..2 + k).rev());
                let rev = self
                    .constants
                    .config()
                    .reversed()
                    .restrict(base, &(0..k).rev().collect::<Vec<_>>());
                if rev != self.constants.config() {
                    return Err(Error::InvalidArgument(
                        "order dual needs a reversal-symmetric constant configuration".into(),
                    ));
                }
                (
                    self.constants.clone(),
                    Box::new(move |t: &Type| t.reversed().restrict(base, &pos)),
                )
            }
        };
        let out_map = |t: &Type| -> Type {
            match base {
                Base::Equality => t.clone(),
                Base::RandomGraph => t.complemented(),
                _ => t.reversed(),
            }
        };
        let name = match self.name.strip_prefix("dual_") {
            Some(n) => n.to_string(),
            None => format!("dual_{}", self.name),
        };
        let me = self;
        Behavior::from_fn(name, base, self.arity, constants, |inputs| {
            let back: Vec<Type> = inputs.iter().map(&key_map).collect();
            out_map(&me.output(&back).expect("dual keys are keys"))
        })
    }

    pub fn to_json(&self) -> BehaviorJson {
        BehaviorJson {
            name: self.name.clone(),
            base: self.base,
            arity: self.arity,
            constants: (!self.constants.is_empty()).then(|| self.constants.clone()),
            rows: self
                .rows()
                .into_iter()
                .map(|(ins, out)| BehaviorRow {
                    inputs: ins
                        .iter()
                        .map(|t| TypeJson::from_type(self.base, t))
                        .collect(),
                    output: TypeJson::from_type(self.base, &out),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &BehaviorJson) -> Result<Behavior> {
        let constants = j.constants.clone().unwrap_or_default();
        let mut rows: HashMap<Vec<Type>, Type> = HashMap::new();
        for r in &j.rows {
            let ins = r
                .inputs
                .iter()
                .map(|t| t.to_type(j.base))
                .collect::<Result<Vec<_>>>()?;
            rows.insert(ins, r.output.to_type(j.base)?);
        }
        let missing = std::cell::Cell::new(false);
        let b = Behavior::from_fn(j.name.clone(), j.base, j.arity, constants, |ins| match rows
            .get(ins)
        {
            Some(t) => t.clone(),
            None => {
                missing.set(true);
                Type::empty()
            }
        });
        if missing.get() {
            return Err(Error::InvalidArgument(
                "behavior table is incomplete".into(),
            ));
        }
        b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorRow {
    pub inputs: Vec<TypeJson>,
    pub output: TypeJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorJson {
    pub name: String,
    pub base: Base,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    pub rows: Vec<BehaviorRow>,
}

/// Why a behavior is not realizable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealizabilityFailure {
    /// A diagonal input is not sent to equality.
    Diagonal(Vec<Type>),
    /// Swapping the two points does not swap the output.
    Asymmetric(Vec<Type>),
    /// These m 3-types have pairwise images that do not form a type.
    Inconsistent(Vec<Type>),
}

/// The first local obstruction to realizing `b`, if any.
pub fn realizability_failure(b: &Behavior) -> Option<RealizabilityFailure> {
    let ks = &b.keys;
    let m = b.arity;
    let inputs = |code: usize| -> Vec<Type> {
        ks.decode(code, m)
            .iter()
            .map(|&k| ks.keys[k].clone())
            .collect()
    };
    for code in 0..b.table.len() {
        if ks.is_diag(code, m) {
            if b.table[code] != ks.eq_out {
                return Some(RealizabilityFailure::Diagonal(inputs(code)));
            }
            continue;
        }
        if b.table[ks.flip_code(code, m)] != ks.out_flip[b.table[code] as usize] {
            return Some(RealizabilityFailure::Asymmetric(inputs(code)));
        }
    }
    let n3 = ks.triples.len();
    let mut idx = vec![0usize; m];
    let mut k01 = vec![0usize; m];
    let mut k02 = vec![0usize; m];
    let mut k12 = vec![0usize; m];
    loop {
        for (i, &t) in idx.iter().enumerate() {
            let tr = ks.triples[t];
            k01[i] = tr[0];
            k02[i] = tr[1];
            k12[i] = tr[2];
        }
        let (a, bb, c) = (
            b.table[ks.encode(&k01)],
            b.table[ks.encode(&k02)],
            b.table[ks.encode(&k12)],
        );
        if !ks.consistent(a, bb, c) {
            let types = TypeSpace::with_constants(b.base, 3, b.constants.clone())
                .and_then(|s| s.enumerate())
                .unwrap_or_default();
            return Some(RealizabilityFailure::Inconsistent(
                idx.iter().map(|&i| types[i].clone()).collect(),
            ));
        }
        // odometer
        let mut i = 0;
        loop {
            if i == m {
                return None;
            }
            idx[i] += 1;
            if idx[i] < n3 {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

pub fn is_realizable(b: &Behavior) -> bool {
    realizability_failure(b).is_none()
}

/// The plain type of the image of m tuples of equal length `r`, each
/// given as a type over the behavior's constants (or as a plain type when
/// the behavior has none).
pub fn apply_to_type(b: &Behavior, inputs: &[Type]) -> Result<Type> {
    if inputs.len() != b.arity {
        return Err(Error::ArityMismatch {
            expected: b.arity,
            found: inputs.len(),
        });
    }
    let k = b.constants.count();
    let len = inputs[0].len();
    if len < k || inputs.iter().any(|t| t.len() != len) {
        return Err(Error::InvalidArgument(
            "input types of different lengths".into(),
        ));
    }
    let r = len - k;
    let ks = &b.keys;
    let mut codes = vec![0usize; r * r];
    for p in 0..r {
        for q in p + 1..r {
            let keys = inputs
                .iter()
                .map(|t| {
                    let mut pos = vec![p, q];
                    pos.extend(r..len);
                    ks.index
                        .get(&t.restrict(b.base, &pos))
                        .copied()
                        .ok_or_else(|| {
                            Error::InvalidType(format!("{t:?} does not fit the constants"))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            codes[p * r + q] = ks.encode(&keys);
        }
    }
    Type::from_pairs(b.base, r, |p, q| {
        ks.outs[b.table[codes[p * r + q]] as usize].clone()
    })
    .ok_or_else(|| Error::NotRealizable(format!("{} does not assemble on {r} points", b.name)))
}

/// A tuple of relation members whose image leaves the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub behavior: Behavior,
    pub relation: String,
    /// Types over the behavior's constants, each in the relation.
    pub inputs: Vec<Type>,
    pub output: Type,
}

impl Witness {
    /// Re-derives the output and checks membership again.
    pub fn recheck(&self, r: &Relation) -> bool {
        let Ok(refined) = r.refine(&self.behavior.constants) else {
            return false;
        };
        self.inputs.iter().all(|t| refined.contains(t))
            && apply_to_type(&self.behavior, &self.inputs).is_ok_and(|o| o == self.output)
            && !r.contains(&self.output)
    }

    pub fn to_json(&self) -> WitnessJson {
        let base = self.behavior.base;
        WitnessJson {
            behavior: self.behavior.to_json(),
            relation: self.relation.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|t| TypeJson::from_type(base, t))
                .collect(),
            output: TypeJson::from_type(base, &self.output),
        }
    }

    pub fn from_json(j: &WitnessJson) -> Result<Witness> {
        let behavior = Behavior::from_json(&j.behavior)?;
        let base = behavior.base;
        Ok(Witness {
            relation: j.relation.clone(),
            inputs: j
                .inputs
                .iter()
                .map(|t| t.to_type(base))
                .collect::<Result<_>>()?,
            output: j.output.to_type(base)?,
            behavior,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub behavior: BehaviorJson,
    pub relation: String,
    pub inputs: Vec<TypeJson>,
    pub output: TypeJson,
}

fn check_relation(b: &Behavior, r: &Relation) -> Result<Relation> {
    if r.base() != b.base {
        return Err(Error::BaseMismatch {
            expected: b.base,
            found: r.base(),
        });
    }
    if !r.constants().is_empty() {
        return Err(Error::InvalidArgument(format!(
            "relation `{}` mentions constants; behaviors only act on constant-free relations",
            r.name
        )));
    }
    r.refine(&b.constants)
}

/// Some tuple of members of `r` sent outside `r`, if there is one.
pub fn violates(b: &Behavior, r: &Relation) -> Result<Option<Witness>> {
    let refined = check_relation(b, r)?;
    let members: Vec<&Type> = refined.types.iter().collect();
    if members.is_empty() {
        return Ok(None);
    }
    let m = b.arity;
    let mut idx = vec![0usize; m];
    loop {
        let inputs: Vec<Type> = idx.iter().map(|&i| members[i].clone()).collect();
        let out = apply_to_type(b, &inputs)?;
        if !r.contains(&out) {
            return Ok(Some(Witness {
                behavior: b.clone(),
                relation: r.name.clone(),
                inputs,
                output: out,
            }));
        }
        let mut i = 0;
        loop {
            if i == m {
                return Ok(None);
            }
            idx[i] += 1;
            if idx[i] < members.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

pub fn preserves(b: &Behavior, r: &Relation) -> Result<bool> {
    Ok(violates(b, r)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{builtin, builtin_in};

    fn q_unary(name: &str, f: impl Fn(std::cmp::Ordering) -> std::cmp::Ordering) -> Behavior {
        Behavior::from_fn(name, Base::QOrder, 1, Constants::none(), |ins| {
            let o = f(ins[0].cmp_points(0, 1));
            let ranks: &[u8] = match o {
                std::cmp::Ordering::Less => &[0, 1],
                std::cmp::Ordering::Equal => &[0, 0],
                std::cmp::Ordering::Greater => &[1, 0],
            };
            Type::from_ranks(ranks).unwrap()
        })
        .unwrap()
    }

    #[test]
    fn key_space_sizes() {
        let ks = KeySpace::get(Base::QOrder, &Constants::none()).unwrap();
        assert_eq!(ks.keys.len(), 3);
        assert_eq!(ks.triples.len(), 13);
        let ks = KeySpace::get(Base::QOrder, &Constants::new(1)).unwrap();
        // two points around one constant: 3 x 3 placements, 3 orders when
        // both share an open interval
        assert_eq!(ks.keys.len(), 13);
        let ks = KeySpace::get(Base::RandomGraph, &Constants::none()).unwrap();
        assert_eq!(ks.outs.len(), 3);
        assert_eq!(ks.triples.len(), 15);
        let ks = KeySpace::get(Base::OrderedRandomGraph, &Constants::none()).unwrap();
        assert_eq!(ks.outs.len(), 5);
    }

    #[test]
    fn unary_realizability_examples() {
        use std::cmp::Ordering::*;
        assert!(is_realizable(&q_unary("identity", |o| o)));
        assert!(is_realizable(&q_unary("reversal", |o| o.reverse())));
        assert!(is_realizable(&q_unary("constant", |_| Equal)));
        // < kept, > collapsed: a<b<c forces a contradiction on (a,c)
        let bad = q_unary("half", |o| if o == Greater { Equal } else { o });
        assert!(matches!(
            realizability_failure(&bad),
            Some(RealizabilityFailure::Asymmetric(_))
        ));
    }

    #[test]
    fn apply_and_preserve() {
        let rev = q_unary("reversal", |o| o.reverse());
        let abc = Type::from_ranks(&[0, 1, 2]).unwrap();
        assert_eq!(
            apply_to_type(&rev, &[abc]).unwrap(),
            Type::from_ranks(&[2, 1, 0]).unwrap()
        );
        assert!(preserves(&rev, &builtin("Betw").unwrap()).unwrap());
        let w = violates(&rev, &builtin("lt").unwrap()).unwrap().unwrap();
        assert!(w.recheck(&builtin("lt").unwrap()));
        let constant = q_unary("constant", |_| std::cmp::Ordering::Equal);
        let neq = builtin_in("neq", Base::QOrder).unwrap();
        let w = violates(&constant, &neq).unwrap().unwrap();
        assert!(w.output.same(0, 1));
        assert!(preserves(&q_unary("identity", |o| o), &builtin("Sep").unwrap()).unwrap());
    }

    #[test]
    fn duals_and_json() {
        let rev = q_unary("reversal", |o| o.reverse());
        assert_eq!(rev.dual().unwrap().table, rev.table);
        let j = serde_json::to_string(&rev.to_json()).unwrap();
        let back = Behavior::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, rev);
    }
}
