//! Complete quantifier-free types over the four base catalogs.
//!
//! A [`Type`] is the canonical description of a finite tuple of points: which
//! points coincide, how the classes are ordered (ordered bases), and which
//! classes are adjacent (graph bases). Ordered bases store classes as ranks
//! (a surjection onto `0..b`), unordered bases store them as a restricted
//! growth string. Both encodings are unique, so derived equality is type
//! equality.

mod json;
mod structure;

pub use json::{ConstantsJson, TypeJson};
pub use structure::{base_catalog, check_age, embeddings, BaseCatalog, FiniteStructure};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of points in a single type.
pub const MAX_POINTS: usize = 32;
/// Graph types keep class adjacency in a `u128`, one bit per class pair.
pub const MAX_GRAPH_CLASSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    #[serde(rename = "q-order")]
    QOrder,
    #[serde(rename = "random-graph")]
    RandomGraph,
    #[serde(rename = "ordered-random-graph")]
    OrderedRandomGraph,
    #[serde(rename = "equality")]
    Equality,
}

impl Base {
    pub const ALL: [Base; 4] = [
        Base::QOrder,
        Base::RandomGraph,
        Base::OrderedRandomGraph,
        Base::Equality,
    ];

    pub fn is_ordered(self) -> bool {
        matches!(self, Base::QOrder | Base::OrderedRandomGraph)
    }

    pub fn has_edges(self) -> bool {
        matches!(self, Base::RandomGraph | Base::OrderedRandomGraph)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Base::QOrder => "q-order",
            Base::RandomGraph => "random-graph",
            Base::OrderedRandomGraph => "ordered-random-graph",
            Base::Equality => "equality",
        }
    }

    /// Largest number of points a type over this base may have.
    pub fn max_points(self) -> usize {
        if self.has_edges() {
            MAX_GRAPH_CLASSES
        } else {
            MAX_POINTS
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Base {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q-order" | "qorder" | "Q" => Ok(Base::QOrder),
            "random-graph" | "graph" => Ok(Base::RandomGraph),
            "ordered-random-graph" | "ordered-graph" => Ok(Base::OrderedRandomGraph),
            "equality" | "eq" => Ok(Base::Equality),
            other => Err(Error::InvalidArgument(format!("unknown base `{other}`"))),
        }
    }
}

#[inline]
fn pair_bit(a: usize, b: usize) -> u32 {
    debug_assert!(a != b);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (hi * (hi - 1) / 2 + lo) as u32
}

/// Remaps class adjacency through `map` (old class -> new class).
fn remap_edges(edges: u128, old_classes: usize, map: &[u8]) -> u128 {
    if edges == 0 {
        return 0;
    }
    let mut out = 0u128;
    for hi in 1..old_classes {
        for lo in 0..hi {
            if edges >> pair_bit(lo, hi) & 1 == 1 {
                out |= 1u128 << pair_bit(map[lo] as usize, map[hi] as usize);
            }
        }
    }
    out
}

/// A complete quantifier-free type of a tuple of points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Type {
    classes: ArrayVec<u8, MAX_POINTS>,
    edges: u128,
}

impl Type {
    /// The unique type of the empty tuple.
    pub fn empty() -> Self {
        Type {
            classes: ArrayVec::new(),
            edges: 0,
        }
    }

    /// Builds the canonical type from raw class labels.
    ///
    /// For ordered bases the labels must be order-compatible (a smaller label
    /// means a smaller point). `edge` is queried on pairs of distinct labels.
    pub(crate) fn canonical(base: Base, raw: &[u8], edge: impl Fn(u8, u8) -> bool) -> Type {
        let mut map = [u8::MAX; 256];
        let mut reps: ArrayVec<u8, MAX_POINTS> = ArrayVec::new();
        if base.is_ordered() {
            let mut seen = [false; 256];
            for &r in raw {
                seen[r as usize] = true;
            }
            for (label, _) in seen.iter().enumerate().filter(|(_, s)| **s) {
                map[label] = reps.len() as u8;
                reps.push(label as u8);
            }
        } else {
            for &r in raw {
                if map[r as usize] == u8::MAX {
                    map[r as usize] = reps.len() as u8;
                    reps.push(r);
                }
            }
        }
        let classes = raw.iter().map(|&r| map[r as usize]).collect();
        let mut edges = 0u128;
        if base.has_edges() {
            for hi in 1..reps.len() {
                for lo in 0..hi {
                    if edge(reps[lo], reps[hi]) {
                        edges |= 1u128 << pair_bit(lo, hi);
                    }
                }
            }
        }
        Type { classes, edges }
    }

    /// A weak order given by its rank array (ranks must cover `0..b`).
    pub fn from_ranks(ranks: &[u8]) -> Result<Type> {
        if ranks.len() > MAX_POINTS {
            return Err(Error::InvalidType(format!("more than {MAX_POINTS} points")));
        }
        let blocks = ranks.iter().map(|&r| r as usize + 1).max().unwrap_or(0);
        let mut hit = vec![false; blocks];
        for &r in ranks {
            hit[r as usize] = true;
        }
        if hit.iter().any(|h| !h) {
            return Err(Error::InvalidType(format!(
                "ranks {ranks:?} are not a surjection onto an initial segment"
            )));
        }
        Ok(Type {
            classes: ranks.iter().copied().collect(),
            edges: 0,
        })
    }

    /// A type over an unordered base: arbitrary class labels plus adjacency
    /// between labels.
    pub fn from_partition(base: Base, labels: &[u8], edges: &[(u8, u8)]) -> Result<Type> {
        if base.is_ordered() {
            return Err(Error::UnsupportedBase(base));
        }
        if labels.len() > base.max_points() {
            return Err(Error::InvalidType(format!(
                "more than {} points",
                base.max_points()
            )));
        }
        if !base.has_edges() && !edges.is_empty() {
            return Err(Error::InvalidType("edges on an equality type".into()));
        }
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidType("loop on a class".into()));
            }
        }
        let has = |a: u8, b: u8| {
            edges
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
        };
        Ok(Type::canonical(base, labels, has))
    }

    /// Number of points (variables plus constants).
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class label of every point: ranks for ordered bases, a restricted
    /// growth string otherwise.
    pub fn classes(&self) -> &[u8] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes
            .iter()
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn class_of(&self, p: usize) -> usize {
        self.classes[p] as usize
    }

    pub fn same(&self, p: usize, q: usize) -> bool {
        self.classes[p] == self.classes[q]
    }

    /// Order between two points; only meaningful for ordered bases.
    pub fn cmp_points(&self, p: usize, q: usize) -> Ordering {
        self.classes[p].cmp(&self.classes[q])
    }

    pub fn class_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges >> pair_bit(a, b) & 1 == 1
    }

    /// Adjacency between two points (false when they coincide).
    pub fn edge(&self, p: usize, q: usize) -> bool {
        self.class_edge(self.class_of(p), self.class_of(q))
    }

    /// True when all points are pairwise distinct.
    pub fn is_discrete(&self) -> bool {
        self.class_count() == self.len()
    }

    /// Number of edges among the given points, counting each class pair once.
    pub fn edge_count(&self, points: &[usize]) -> usize {
        let mut n = 0;
        for (i, &p) in points.iter().enumerate() {
            for &q in &points[i + 1..] {
                if self.edge(p, q) {
                    n += 1;
                }
            }
        }
        n
    }

    /// The induced type on `positions` (in that order, repetitions allowed).
    pub fn restrict(&self, base: Base, positions: &[usize]) -> Type {
        let raw: ArrayVec<u8, MAX_POINTS> = positions.iter().map(|&p| self.classes[p]).collect();
        Type::canonical(base, &raw, |a, b| self.class_edge(a as usize, b as usize))
    }

    /// Order reversal (ordered bases); classes keep their adjacency.
    pub fn reversed(&self) -> Type {
        let b = self.class_count();
        let map: ArrayVec<u8, MAX_POINTS> = (0..b).map(|r| (b - 1 - r) as u8).collect();
        Type {
            classes: self.classes.iter().map(|&r| map[r as usize]).collect(),
            edges: remap_edges(self.edges, b, &map),
        }
    }

    /// Complementation of adjacency between distinct classes.
    pub fn complemented(&self) -> Type {
        let b = self.class_count();
        let mask = if b < 2 {
            0
        } else {
            (1u128 << (b * (b - 1) / 2)) - 1
        };
        Type {
            classes: self.classes.clone(),
            edges: !self.edges & mask,
        }
    }

    /// Flips adjacency between the classes in `side` and the other classes.
    pub fn switched(&self, side: u32) -> Type {
        let b = self.class_count();
        let mut edges = self.edges;
        for hi in 1..b {
            for lo in 0..hi {
                if (side >> lo & 1) != (side >> hi & 1) {
                    edges ^= 1u128 << pair_bit(lo, hi);
                }
            }
        }
        Type {
            classes: self.classes.clone(),
            edges,
        }
    }

    /// Moves the lowest `k` blocks above the remaining ones (ordered bases).
    pub fn rotated(&self, k: usize) -> Type {
        let b = self.class_count();
        let map: ArrayVec<u8, MAX_POINTS> = (0..b)
            .map(|r| {
                if r < k {
                    (r + b - k) as u8
                } else {
                    (r - k) as u8
                }
            })
            .collect();
        Type {
            classes: self.classes.iter().map(|&r| map[r as usize]).collect(),
            edges: remap_edges(self.edges, b, &map),
        }
    }

    /// Calls `f` on every type with one extra point appended; stops early and
    /// returns false as soon as `f` does.
    pub(crate) fn for_each_extension(&self, base: Base, mut f: impl FnMut(Type) -> bool) -> bool {
        let b = self.class_count();
        for r in 0..b {
            let mut t = self.clone();
            t.classes.push(r as u8);
            if !f(t) {
                return false;
            }
        }
        match base {
            Base::Equality => {
                let mut t = self.clone();
                t.classes.push(b as u8);
                f(t)
            }
            Base::RandomGraph => {
                for mask in 0u32..(1 << b) {
                    let mut t = self.clone();
                    t.classes.push(b as u8);
                    for i in 0..b {
                        if mask >> i & 1 == 1 {
                            t.edges |= 1u128 << pair_bit(i, b);
                        }
                    }
                    if !f(t) {
                        return false;
                    }
                }
                true
            }
            Base::QOrder | Base::OrderedRandomGraph => {
                let masks = if base.has_edges() { 1u32 << b } else { 1 };
                for gap in 0..=b {
                    let map: ArrayVec<u8, MAX_POINTS> = (0..b)
                        .map(|r| if r >= gap { r as u8 + 1 } else { r as u8 })
                        .collect();
                    let mut classes: ArrayVec<u8, MAX_POINTS> =
                        self.classes.iter().map(|&r| map[r as usize]).collect();
                    classes.push(gap as u8);
                    let shifted = remap_edges(self.edges, b, &map);
                    for mask in 0..masks {
                        let mut edges = shifted;
                        for i in 0..b {
                            if mask >> i & 1 == 1 {
                                edges |= 1u128 << pair_bit(map[i] as usize, gap);
                            }
                        }
                        if !f(Type {
                            classes: classes.clone(),
                            edges,
                        }) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Assembles a type on `n` points from pairwise 2-types. Returns `None`
    /// when the pairwise data is inconsistent (equality not transitive, order
    /// not a weak order, adjacency not class-invariant).
    pub fn from_pairs(base: Base, n: usize, pair: impl Fn(usize, usize) -> Type) -> Option<Type> {
        if n > base.max_points() {
            return None;
        }
        let mut rel: Vec<Type> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rel.push(if i < j {
                    pair(i, j)
                } else if i == j {
                    Type {
                        classes: [0u8].into_iter().collect(),
                        edges: 0,
                    }
                } else {
                    Type::empty()
                });
            }
        }
        let get = |i: usize, j: usize| -> (bool, Ordering, bool) {
            // (same, order of i relative to j, edge)
            if i == j {
                return (true, Ordering::Equal, false);
            }
            let (t, flip) = if i < j {
                (&rel[i * n + j], false)
            } else {
                (&rel[j * n + i], true)
            };
            let same = t.same(0, 1);
            let ord = t.cmp_points(0, 1);
            (same, if flip { ord.reverse() } else { ord }, t.edge(0, 1))
        };
        // classes by first occurrence
        let mut raw = [0u8; MAX_POINTS];
        let mut reps: Vec<usize> = Vec::new();
        for i in 0..n {
            let mut found = None;
            for (c, &r) in reps.iter().enumerate() {
                if get(r, i).0 {
                    found = Some(c);
                    break;
                }
            }
            let c = match found {
                Some(c) => c,
                None => {
                    reps.push(i);
                    reps.len() - 1
                }
            };
            raw[i] = c as u8;
        }
        for i in 0..n {
            for j in i + 1..n {
                let (same, ord, e) = get(i, j);
                if same != (raw[i] == raw[j]) {
                    return None;
                }
                if same {
                    if base.is_ordered() && ord != Ordering::Equal {
                        return None;
                    }
                    continue;
                }
                let (ri, rj) = (reps[raw[i] as usize], reps[raw[j] as usize]);
                let (_, rep_ord, rep_e) = get(ri, rj);
                if base.is_ordered() && ord != rep_ord {
                    return None;
                }
                if base.has_edges() && e != rep_e {
                    return None;
                }
            }
        }
        let k = reps.len();
        let mut labels = [0u8; MAX_POINTS];
        if base.is_ordered() {
            // rank = number of classes strictly below; must be a strict total order
            let mut ranks = vec![0usize; k];
            for a in 0..k {
                for b in 0..k {
                    if a != b && get(reps[b], reps[a]).1 == Ordering::Less {
                        ranks[a] += 1;
                    }
                }
            }
            let mut seen = vec![false; k];
            for &r in &ranks {
                if r >= k || seen[r] {
                    return None;
                }
                seen[r] = true;
            }
            for a in 0..k {
                for b in 0..k {
                    if a != b {
                        let ord = get(reps[a], reps[b]).1;
                        if ord != ranks[a].cmp(&ranks[b]) {
                            return None;
                        }
                    }
                }
            }
            for i in 0..n {
                labels[i] = ranks[raw[i] as usize] as u8;
            }
        } else {
            labels[..n].copy_from_slice(&raw[..n]);
        }
        let class_rep =
            |label: u8| -> usize { (0..n).find(|&i| labels[i] == label).expect("label present") };
        Some(Type::canonical(base, &labels[..n], |a, b| {
            get(class_rep(a), class_rep(b)).2
        }))
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type{:?}", self.classes.as_slice())?;
        if self.edges != 0 {
            write!(f, "E{:#x}", self.edges)?;
        }
        Ok(())
    }
}

/// Constants are pairwise distinct points appended after the variables.
/// For ordered bases they sit in increasing order `c1 < ... < ck`; for graph
/// bases the caller fixes the induced graph on them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constants {
    count: usize,
    edges: u128,
}

impl Constants {
    pub fn none() -> Self {
        Constants::default()
    }

    /// `k` constants with no edges among them.
    pub fn new(count: usize) -> Self {
        Constants { count, edges: 0 }
    }

    pub fn with_edges(count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if count > MAX_GRAPH_CLASSES {
            return Err(Error::InvalidConstants(format!("{count} constants")));
        }
        let mut bits = 0u128;
        for &(a, b) in edges {
            if a == b || a >= count || b >= count {
                return Err(Error::InvalidConstants(format!(
                    "bad constant edge ({a},{b})"
                )));
            }
            bits |= 1u128 << pair_bit(a, b);
        }
        Ok(Constants { count, edges: bits })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges >> pair_bit(a, b) & 1 == 1
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 1..self.count {
            for a in 0..b {
                if self.edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The configuration as a type on the constants alone.
    pub fn config(&self) -> Type {
        Type {
            classes: (0..self.count as u8).collect(),
            edges: self.edges,
        }
    }

    pub fn validate(&self, base: Base) -> Result<()> {
        if self.count > base.max_points() {
            return Err(Error::InvalidConstants(format!("{} constants", self.count)));
        }
        if self.edges != 0 && !base.has_edges() {
            return Err(Error::InvalidConstants(format!(
                "base {base} has no edges between constants"
            )));
        }
        Ok(())
    }

    /// Complemented configuration, used by graph duality.
    pub fn complemented(&self) -> Constants {
        let c = self.config().complemented();
        Constants {
            count: self.count,
            edges: c.edges,
        }
    }
}

/// The context of a type: base, number of variable positions and the
/// constant configuration (constants occupy the trailing positions).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeSpace {
    pub base: Base,
    pub arity: usize,
    pub constants: Constants,
}

impl TypeSpace {
    pub fn new(base: Base, arity: usize) -> Self {
        TypeSpace {
            base,
            arity,
            constants: Constants::none(),
        }
    }

    pub fn with_constants(base: Base, arity: usize, constants: Constants) -> Result<Self> {
        constants.validate(base)?;
        Ok(TypeSpace {
            base,
            arity,
            constants,
        })
    }

    /// Total number of points: variables then constants.
    pub fn points(&self) -> usize {
        self.arity + self.constants.count()
    }

    /// Point indices of the constants.
    pub fn constant_points(&self) -> std::ops::Range<usize> {
        self.arity..self.points()
    }

    /// Whether `t` is a type of this space.
    pub fn contains(&self, t: &Type) -> bool {
        if t.len() != self.points() {
            return false;
        }
        if !self.base.is_ordered() {
            // restricted growth string
            let mut next = 0u8;
            for &c in t.classes() {
                if c > next {
                    return false;
                }
                if c == next {
                    next += 1;
                }
            }
        } else {
            let mut hit = vec![false; t.len()];
            for &c in t.classes() {
                match hit.get_mut(c as usize) {
                    Some(h) => *h = true,
                    None => return false,
                }
            }
            if hit[..t.class_count()].iter().any(|h| !h) {
                return false;
            }
        }
        if !self.base.has_edges() && t.edges != 0 {
            return false;
        }
        if self.base.has_edges() {
            let b = t.class_count();
            let mask = if b < 2 {
                0
            } else {
                (1u128 << (b * (b - 1) / 2)) - 1
            };
            if t.edges & !mask != 0 {
                return false;
            }
        }
        if self.constants.is_empty() {
            return true;
        }
        let consts: Vec<usize> = self.constant_points().collect();
        let restricted = t.restrict(self.base, &consts);
        restricted == Type::canonical(self.base, restricted.classes(), |_, _| false)
            && restricted.is_discrete()
            && (!self.base.is_ordered() || restricted.classes().windows(2).all(|w| w[0] < w[1]))
            && (restricted.edges == self.constants.config().edges || !self.base.has_edges())
            && {
                // constant edges compare in constant order
                let cfg = self.constants.config();
                (0..consts.len()).all(|a| {
                    (0..consts.len())
                        .all(|b| a == b || t.edge(consts[a], consts[b]) == cfg.edge(a, b))
                })
            }
    }

    /// The starting configuration for incremental construction: the constants
    /// placed as points `0..c`.
    pub(crate) fn seed(&self) -> Type {
        self.constants.config()
    }

    /// All types of the space in canonical (lexicographic) order.
    pub fn enumerate(&self) -> Result<Vec<Type>> {
        self.constants.validate(self.base)?;
        if self.points() > self.base.max_points() {
            return Err(Error::CapExceeded {
                cap: "points",
                limit: self.base.max_points(),
                needed: self.points(),
            });
        }
        let c = self.constants.count();
        let layout: Vec<usize> = (c..c + self.arity).chain(0..c).collect();
        let mut out = BTreeSet::new();
        let mut stack = vec![(self.seed(), 0usize)];
        while let Some((t, depth)) = stack.pop() {
            if depth == self.arity {
                out.insert(t.restrict(self.base, &layout));
                continue;
            }
            t.for_each_extension(self.base, |child| {
                stack.push((child, depth + 1));
                true
            });
        }
        Ok(out.into_iter().collect())
    }
}

/// Shorthand for [`TypeSpace::enumerate`].
pub fn enumerate_types(base: Base, arity: usize, constants: &Constants) -> Result<Vec<Type>> {
    TypeSpace::with_constants(base, arity, constants.clone())?.enumerate()
}

/// Restriction of `t` to `positions`; positions index variables only, the
/// constants of `space` are carried along.
pub fn restrict_type(space: &TypeSpace, t: &Type, positions: &[usize]) -> Result<Type> {
    if !space.contains(t) {
        return Err(Error::InvalidType(format!(
            "{t:?} is not in the given space"
        )));
    }
    let mut all = Vec::with_capacity(positions.len() + space.constants.count());
    for &p in positions {
        if p >= space.arity {
            return Err(Error::IndexOutOfRange {
                index: p,
                len: space.arity,
            });
        }
        all.push(p);
    }
    all.extend(space.constant_points());
    Ok(t.restrict(space.base, &all))
}

/// The type of a tuple of values from a linear order (q-order) or of plain
/// values (equality). Constant values must be strictly increasing (resp.
/// pairwise distinct).
pub fn type_of_values<T: PartialOrd>(base: Base, values: &[T], constants: &[T]) -> Result<Type> {
    if base.has_edges() {
        return Err(Error::UnsupportedBase(base));
    }
    if values.len() + constants.len() > MAX_POINTS {
        return Err(Error::CapExceeded {
            cap: "points",
            limit: MAX_POINTS,
            needed: values.len() + constants.len(),
        });
    }
    for w in constants.windows(2) {
        if base.is_ordered() && w[0].partial_cmp(&w[1]) != Some(Ordering::Less) {
            return Err(Error::InvalidConstants(
                "constant values must increase".into(),
            ));
        }
    }
    let all: Vec<&T> = values.iter().chain(constants.iter()).collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i..] {
            if a.partial_cmp(b).is_none() {
                return Err(Error::InvalidArgument("incomparable values".into()));
            }
        }
    }
    for (i, a) in constants.iter().enumerate() {
        for b in &constants[i + 1..] {
            if a == b {
                return Err(Error::InvalidConstants("constants must be distinct".into()));
            }
        }
    }
    let mut raw = Vec::with_capacity(all.len());
    for v in &all {
        // rank among distinct values, or index of first equal value
        let label = if base.is_ordered() {
            let mut smaller: Vec<&T> = all.iter().copied().filter(|w| *w < *v).collect();
            smaller.dedup_by(|a, b| a == b);
            let mut distinct: Vec<&T> = Vec::new();
            for w in smaller {
                if !distinct.contains(&w) {
                    distinct.push(w);
                }
            }
            distinct.len()
        } else {
            all.iter().position(|w| w == v).unwrap()
        };
        raw.push(label as u8);
    }
    Ok(Type::canonical(base, &raw, |_, _| false))
}

/// The type of `tuple` (then `constants`) inside a finite certificate
/// structure of the base's age.
pub fn type_of_tuple(
    base: Base,
    certificate: &FiniteStructure,
    tuple: &[usize],
    constants: &[usize],
) -> Result<Type> {
    if !check_age(base, certificate)? {
        return Err(Error::NotInAge(base));
    }
    let points: Vec<usize> = tuple.iter().chain(constants).copied().collect();
    if points.len() > base.max_points() {
        return Err(Error::CapExceeded {
            cap: "points",
            limit: base.max_points(),
            needed: points.len(),
        });
    }
    for &p in &points {
        if p >= certificate.n {
            return Err(Error::IndexOutOfRange {
                index: p,
                len: certificate.n,
            });
        }
    }
    for (i, a) in constants.iter().enumerate() {
        if constants[i + 1..].contains(a) {
            return Err(Error::InvalidConstants("constants must be distinct".into()));
        }
    }
    let raw: Vec<u8> = points
        .iter()
        .map(|&p| {
            if base.is_ordered() {
                (0..certificate.n)
                    .filter(|&q| certificate.holds("<", &[q, p]))
                    .count() as u8
            } else {
                p as u8
            }
        })
        .collect();
    let elem_of = |label: u8| -> usize {
        let i = raw.iter().position(|&r| r == label).unwrap();
        points[i]
    };
    let t = Type::canonical(base, &raw, |a, b| {
        certificate.holds("E", &[elem_of(a), elem_of(b)])
    });
    if base.is_ordered() {
        let ordered: Vec<usize> = (0..constants.len()).map(|i| tuple.len() + i).collect();
        if ordered
            .windows(2)
            .any(|w| t.cmp_points(w[0], w[1]) != Ordering::Less)
        {
            return Err(Error::InvalidConstants(
                "constants must be increasing".into(),
            ));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ordered Bell numbers via the recursion a(n) = sum_k C(n,k) a(n-k).
    fn ordered_bell(n: usize) -> u64 {
        let mut a = vec![1u64];
        for m in 1..=n {
            let mut s = 0u64;
            let mut binom = 1u64;
            for k in 1..=m {
                binom = binom * (m - k + 1) as u64 / k as u64;
                s += binom * a[m - k];
            }
            a.push(s);
        }
        a[n]
    }

    #[test]
    fn q_order_counts_match_ordered_bell() {
        for k in 0..=5 {
            let n = enumerate_types(Base::QOrder, k, &Constants::none())
                .unwrap()
                .len() as u64;
            assert_eq!(n, ordered_bell(k), "arity {k}");
        }
        assert_eq!(ordered_bell(5), 541);
    }

    #[test]
    fn two_point_orders() {
        let ts = enumerate_types(Base::QOrder, 2, &Constants::none()).unwrap();
        assert_eq!(
            ts,
            vec![
                Type::from_ranks(&[0, 0]).unwrap(),
                Type::from_ranks(&[0, 1]).unwrap(),
                Type::from_ranks(&[1, 0]).unwrap()
            ]
        );
    }

    #[test]
    fn graph_three_types() {
        // 8 (discrete) + 3*2 (one merged pair) + 1 (all equal)
        let ts = enumerate_types(Base::RandomGraph, 3, &Constants::none()).unwrap();
        assert_eq!(ts.len(), 15);
        let pairs: BTreeSet<Type> = ts
            .iter()
            .map(|t| t.restrict(Base::RandomGraph, &[0, 1]))
            .collect();
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn equality_counts_are_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (k, b) in bell.iter().enumerate() {
            assert_eq!(
                enumerate_types(Base::Equality, k, &Constants::none())
                    .unwrap()
                    .len(),
                *b
            );
        }
    }

    #[test]
    fn ordered_graph_two_types() {
        // =, or one of </> with or without an edge
        let ts = enumerate_types(Base::OrderedRandomGraph, 2, &Constants::none()).unwrap();
        assert_eq!(ts.len(), 5);
    }

    #[test]
    fn constants_are_respected() {
        let c = Constants::new(1);
        let space = TypeSpace::with_constants(Base::QOrder, 2, c).unwrap();
        let ts = space.enumerate().unwrap();
        // weak orders on 3 points, one of which is the constant
        assert_eq!(ts.len(), 13);
        assert!(ts.iter().all(|t| space.contains(t)));
        let c2 = Constants::new(2);
        let space2 = TypeSpace::with_constants(Base::QOrder, 1, c2).unwrap();
        // x below, equal to, or between/above the two constants: 5 positions
        assert_eq!(space2.enumerate().unwrap().len(), 5);
    }

    #[test]
    fn graph_constants_fix_the_configuration() {
        let c = Constants::with_edges(2, &[(0, 1)]).unwrap();
        let space = TypeSpace::with_constants(Base::RandomGraph, 1, c).unwrap();
        let ts = space.enumerate().unwrap();
        // equal to c0, equal to c1, or new with any adjacency to both
        assert_eq!(ts.len(), 6);
        assert!(ts.iter().all(|t| t.edge(1, 2)));
    }

    #[test]
    fn type_of_values_examples() {
        let t = type_of_values(Base::QOrder, &[2.5, 1.0, 2.5], &[]).unwrap();
        assert_eq!(t.classes(), &[1, 0, 1]);
        let t = type_of_values(Base::QOrder, &[-1.0, 3.0], &[0.0]).unwrap();
        assert_eq!(t.classes(), &[0, 2, 1]);
        assert!(type_of_values(Base::QOrder, &[1.0], &[2.0, 1.0]).is_err());
        assert!(type_of_values(Base::QOrder, &[f64::NAN], &[]).is_err());
    }

    #[test]
    fn restriction_examples() {
        let t = Type::from_ranks(&[1, 0, 1]).unwrap();
        assert_eq!(t.restrict(Base::QOrder, &[0, 1]).classes(), &[1, 0]);
        assert_eq!(t.restrict(Base::QOrder, &[0, 1, 2]), t);
        let space = TypeSpace::new(Base::QOrder, 3);
        assert!(restrict_type(&space, &t, &[3]).is_err());
    }

    #[test]
    fn from_pairs_detects_inconsistency() {
        let lt = Type::from_ranks(&[0, 1]).unwrap();
        let eq = Type::from_ranks(&[0, 0]).unwrap();
        // a<b, a<c, b=c is fine
        let ok = Type::from_pairs(Base::QOrder, 3, |i, j| {
            if (i, j) == (1, 2) {
                eq.clone()
            } else {
                lt.clone()
            }
        });
        assert_eq!(ok.unwrap().classes(), &[0, 1, 1]);
        // a<b, b<c, c... a=c is not
        let bad = Type::from_pairs(Base::QOrder, 3, |i, j| {
            if (i, j) == (0, 2) {
                eq.clone()
            } else {
                lt.clone()
            }
        });
        assert!(bad.is_none());
    }

    #[test]
    fn rotation_and_reversal_are_involutive_enough() {
        let t = Type::from_ranks(&[2, 0, 1, 0]).unwrap();
        assert_eq!(t.reversed().reversed(), t);
        assert_eq!(t.rotated(1).rotated(2), t);
        assert_eq!(t.rotated(1).classes(), &[1, 2, 0, 2]);
    }

    #[test]
    fn switching_flips_cut_edges() {
        let t = Type::from_partition(Base::RandomGraph, &[0, 1, 2], &[(0, 1)]).unwrap();
        let s = t.switched(0b001);
        assert!(!s.edge(0, 1));
        assert!(s.edge(0, 2));
        assert!(!s.edge(1, 2));
        assert_eq!(t.complemented().complemented(), t);
    }
}
