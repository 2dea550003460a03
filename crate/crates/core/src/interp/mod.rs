//! Primitive positive interpretations: data model, exhaustive verification
//! over types, and composition.
//!
//! A d-dimensional interpretation of a target in a source language maps
//! d-tuples satisfying the domain formula to target elements. Verification
//! enumerates every type of the relevant arity over the source constants
//! and compares each defining formula with the pulled-back relation.

mod boolean;
mod shipped;

pub use boolean::{
    bool_polymorphisms, essentially_permutations, essentially_permutations_brute,
    exactly_two_of_four, nae, nonzero_and_negation, oit, BoolOp, BooleanRelation, BooleanStructure,
    SIX_GENERATORS,
};
pub use shipped::{
    betw_from_sep_literal, betw_in_sep, cycl_building_blocks, hardness_chain, interpretation,
    interpretation_names, nae_in_betw, nae_in_betw_fresh, nae_in_p3, nae_in_sep, oit_in_e6,
    oit_in_neg_t3, oit_in_neg_t3_fresh, oit_in_t3, oit_in_t3_fresh, ChainStep, CyclBlockReport,
    ReductionChain,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulas::{parse_pp_with_free, Language, PpAtom, PpFormula, PpTerm, Relation};
use crate::ppalg::evaluate_pp_capped;
use crate::typespace::{Base, Type, TypeJson, TypeSpace};

/// Free variable names for `blocks` target points of dimension `dim`:
/// `x1,x2,y1,y2,...`, letters running over `x y z w v s t r`.
pub fn block_vars(blocks: usize, dim: usize) -> Vec<String> {
    const LETTERS: [char; 8] = ['x', 'y', 'z', 'w', 'v', 's', 't', 'r'];
    (0..blocks)
        .flat_map(|b| (0..dim).map(move |i| format!("{}{}", LETTERS[b % 8], i + 1 + dim * (b / 8))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Boolean(BooleanStructure),
    Relational(Language),
}

impl Target {
    pub fn name(&self) -> &str {
        match self {
            Target::Boolean(s) => &s.name,
            Target::Relational(l) => &l.name,
        }
    }

    fn relation_names(&self) -> Vec<(String, usize)> {
        match self {
            Target::Boolean(s) => s
                .relations
                .iter()
                .map(|r| (r.name.clone(), r.arity))
                .collect(),
            Target::Relational(l) => l
                .relations
                .iter()
                .map(|r| (r.name.clone(), r.arity()))
                .collect(),
        }
    }

    fn constant_count(&self) -> usize {
        match self {
            Target::Boolean(_) => 0,
            Target::Relational(l) => l.constants.count(),
        }
    }
}

/// Values of target points computed from a source type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bits(Vec<u8>),
    /// The type of the target points, target constants trailing.
    Type(Type),
}

/// Coordinate maps, applied at the level of types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordRule {
    /// 1 if the first coordinate is source constant 0 (dimension 2).
    FirstSlotZero,
    /// 1 if the point lies above source constant 0 (dimension 1).
    AboveZero,
    /// 1 if both coordinates are equal (dimension 2).
    PairEqual,
    /// 1 if the two coordinates are adjacent (dimension 2).
    PairEdge,
    /// 0 if the triple is in cyclic order, 1 otherwise (dimension 3).
    CyclTriple,
    /// The circular order cut at source constant 0, read as a line
    /// (dimension 1, order target).
    RotateAtZero,
    /// Points map to themselves (dimension 1, same base).
    Identity,
    /// `outer` applied to the values of `inner`; `inner_dim` is the
    /// dimension of `inner`, `inner_constants` the source positions (as
    /// constant indices) of the intermediate structure's constants.
    Compose {
        inner: Box<CoordRule>,
        inner_dim: usize,
        inner_constants: Vec<Vec<usize>>,
        outer: Box<CoordRule>,
    },
}

impl CoordRule {
    pub fn id(&self) -> String {
        match self {
            CoordRule::FirstSlotZero => "first-slot-zero".into(),
            CoordRule::AboveZero => "above-zero".into(),
            CoordRule::PairEqual => "pair-equal".into(),
            CoordRule::PairEdge => "pair-edge".into(),
            CoordRule::CyclTriple => "cycl-triple".into(),
            CoordRule::RotateAtZero => "rotate-at-zero".into(),
            CoordRule::Identity => "identity".into(),
            CoordRule::Compose { inner, outer, .. } => format!("{}∘{}", outer.id(), inner.id()),
        }
    }

    pub fn from_id(id: &str) -> Result<CoordRule> {
        Ok(match id {
            "first-slot-zero" => CoordRule::FirstSlotZero,
            "above-zero" => CoordRule::AboveZero,
            "pair-equal" => CoordRule::PairEqual,
            "pair-edge" => CoordRule::PairEdge,
            "cycl-triple" => CoordRule::CyclTriple,
            "rotate-at-zero" => CoordRule::RotateAtZero,
            "identity" => CoordRule::Identity,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown coordinate rule `{id}`"
                )))
            }
        })
    }

    /// `t` is a source type with `k` trailing constants; `points` lists each
    /// target point as its source positions. `None` if the rule is undefined
    /// on some point.
    pub fn apply(&self, base: Base, t: &Type, k: usize, points: &[Vec<usize>]) -> Option<Value> {
        let c0 = t.len().checked_sub(k);
        let bit = |f: &dyn Fn(&[usize]) -> Option<bool>| -> Option<Value> {
            points
                .iter()
                .map(|p| f(p).map(u8::from))
                .collect::<Option<Vec<u8>>>()
                .map(Value::Bits)
        };
        match self {
            CoordRule::FirstSlotZero => {
                let c = c0.filter(|_| k > 0)?;
                bit(&|p| Some(t.same(p[0], c)))
            }
            CoordRule::AboveZero => {
                let c = c0.filter(|_| k > 0 && base.is_ordered())?;
                bit(&|p| Some(t.cmp_points(p[0], c).is_gt()))
            }
            CoordRule::PairEqual => bit(&|p| Some(t.same(p[0], p[1]))),
            CoordRule::PairEdge => bit(&|p| (!t.same(p[0], p[1])).then(|| t.edge(p[0], p[1]))),
            CoordRule::CyclTriple => bit(&|p| {
                if t.same(p[0], p[1]) || t.same(p[1], p[2]) || t.same(p[0], p[2]) {
                    return None;
                }
                let lt = |a: usize, b: usize| t.cmp_points(a, b).is_lt();
                let (a, b, c) = (p[0], p[1], p[2]);
                let cyc =
                    (lt(a, b) && lt(b, c)) || (lt(b, c) && lt(c, a)) || (lt(c, a) && lt(a, b));
                Some(!cyc)
            }),
            CoordRule::RotateAtZero => {
                let c = c0.filter(|_| k > 0 && base.is_ordered())?;
                let keys: Vec<(bool, usize)> = points
                    .iter()
                    .map(|p| (t.cmp_points(p[0], c).is_lt(), t.class_of(p[0])))
                    .collect();
                if points.iter().any(|p| t.same(p[0], c)) {
                    return None;
                }
                let distinct: BTreeSet<(bool, usize)> = keys.iter().copied().collect();
                let ranks: Vec<u8> = keys
                    .iter()
                    .map(|key| distinct.iter().position(|d| d == key).expect("present") as u8)
                    .collect();
                Type::from_ranks(&ranks).ok().map(Value::Type)
            }
            CoordRule::Identity => {
                let flat: Vec<usize> = points.iter().map(|p| p[0]).collect();
                Some(Value::Type(t.restrict(base, &flat)))
            }
            CoordRule::Compose {
                inner,
                inner_dim,
                inner_constants,
                outer,
            } => {
                let n = t.len() - k;
                let mut mid: Vec<Vec<usize>> = Vec::new();
                let mut regroup: Vec<Vec<usize>> = Vec::new();
                for p in points {
                    let mut group = Vec::new();
                    for chunk in p.chunks(*inner_dim) {
                        group.push(mid.len());
                        mid.push(chunk.to_vec());
                    }
                    regroup.push(group);
                }
                let mid_k = inner_constants.len();
                for c in inner_constants {
                    mid.push(c.iter().map(|&i| n + i).collect());
                }
                let Value::Type(u) = inner.apply(base, t, k, &mid)? else {
                    return None;
                };
                outer.apply(inner_base(inner, base), &u, mid_k, &regroup)
            }
        }
    }
}

fn inner_base(rule: &CoordRule, source: Base) -> Base {
    match rule {
        CoordRule::RotateAtZero => Base::QOrder,
        _ => source,
    }
}

#[derive(Clone, Debug)]
pub struct Interpretation {
    pub name: String,
    pub dim: usize,
    pub source: Language,
    pub target: Target,
    pub delta: PpFormula,
    /// Defining formula per target relation, free variables by [`block_vars`].
    pub phi: BTreeMap<String, PpFormula>,
    pub phi_eq: PpFormula,
    /// Source constant tuples standing for the target's constants.
    pub constants: Vec<Vec<usize>>,
    pub rule: CoordRule,
    /// Variable cap used when evaluating the formulas.
    pub var_cap: usize,
}

impl Interpretation {
    /// Builds an interpretation from formula texts over `source`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_texts(
        name: &str,
        dim: usize,
        source: Language,
        target: Target,
        delta: &str,
        phi: &[(&str, &str)],
        phi_eq: &str,
        rule: CoordRule,
    ) -> Result<Interpretation> {
        let delta = parse_pp_with_free(delta, &source, &block_vars(1, dim))?;
        let phi_eq = parse_pp_with_free(phi_eq, &source, &block_vars(2, dim))?;
        let arities: HashMap<String, usize> = target.relation_names().into_iter().collect();
        let mut parsed = BTreeMap::new();
        for (rel, text) in phi {
            let r = *arities
                .get(*rel)
                .ok_or_else(|| Error::UnknownRelation(rel.to_string()))?;
            parsed.insert(
                rel.to_string(),
                parse_pp_with_free(text, &source, &block_vars(r, dim))?,
            );
        }
        let cap = crate::ppalg::default_max_vars(source.base);
        Ok(Interpretation {
            name: name.to_string(),
            dim,
            source,
            target,
            delta,
            phi: parsed,
            phi_eq,
            constants: Vec::new(),
            rule,
            var_cap: cap,
        })
    }

    pub fn with_constants(mut self, constants: Vec<Vec<usize>>) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_var_cap(mut self, cap: usize) -> Self {
        self.var_cap = cap;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub formula: String,
    pub source_type: TypeJson,
    /// What the coordinate map says.
    pub expected: bool,
    /// What the formula says.
    pub got: bool,
    /// Some source point occurs in two different blocks.
    pub shared_points: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpretationReport {
    pub name: String,
    pub dim: usize,
    /// `(formula, types checked)` for each check that ran.
    pub checked: Vec<(String, usize)>,
    /// The first few counterexamples.
    pub counterexamples: Vec<Counterexample>,
    /// Number of failing types, and those among them with disjoint blocks.
    pub failures: usize,
    pub generic_failures: usize,
    pub notes: Vec<String>,
}

impl InterpretationReport {
    pub fn verified(&self) -> bool {
        self.counterexamples.is_empty() && self.failures == 0
    }

    /// No counterexample among tuples whose blocks share no source point.
    pub fn verified_on_disjoint_blocks(&self) -> bool {
        self.generic_failures == 0
    }
}

const MAX_COUNTEREXAMPLES: usize = 20;

struct Checker<'a> {
    i: &'a Interpretation,
    k: usize,
    delta: Relation,
    report: InterpretationReport,
}

impl Checker<'_> {
    fn evaluate(&self, f: &PpFormula) -> Result<Relation> {
        let r = evaluate_pp_capped(f, &self.i.source, self.i.var_cap)?;
        if r.constants().is_empty() && self.k > 0 {
            r.refine(&self.i.source.constants)
        } else {
            Ok(r)
        }
    }

    fn blocks(&self, r: usize) -> Vec<Vec<usize>> {
        let d = self.i.dim;
        (0..r).map(|b| (b * d..(b + 1) * d).collect()).collect()
    }

    fn in_domain(&self, t: &Type, block: &[usize], n: usize) -> bool {
        let mut pos = block.to_vec();
        pos.extend(n..n + self.k);
        self.delta.contains(&t.restrict(self.i.source.base, &pos))
    }

    /// Target points with the target constants appended.
    fn points(&self, r: usize) -> Vec<Vec<usize>> {
        let n = r * self.i.dim;
        let mut p = self.blocks(r);
        p.extend(
            self.i
                .constants
                .iter()
                .map(|c| c.iter().map(|&j| n + j).collect()),
        );
        p
    }

    fn check(
        &mut self,
        label: &str,
        f: &PpFormula,
        r: usize,
        expected: impl Fn(&Value) -> Result<bool>,
    ) -> Result<()> {
        let rel = self.evaluate(f)?;
        let space = TypeSpace::with_constants(
            self.i.source.base,
            r * self.i.dim,
            self.i.source.constants.clone(),
        )?;
        let n = r * self.i.dim;
        let blocks = self.blocks(r);
        let points = self.points(r);
        let mut count = 0;
        for t in space.enumerate()? {
            if !blocks.iter().all(|b| self.in_domain(&t, b, n)) {
                continue;
            }
            count += 1;
            let Some(v) = self.i.rule.apply(self.i.source.base, &t, self.k, &points) else {
                return Err(Error::InvalidArgument(format!(
                    "coordinate rule `{}` undefined on a domain type",
                    self.i.rule.id()
                )));
            };
            let want = expected(&v)?;
            let got = rel.contains(&t);
            if want != got {
                let shared = blocks.iter().enumerate().any(|(a, ba)| {
                    blocks[a + 1..]
                        .iter()
                        .any(|bb| ba.iter().any(|&p| bb.iter().any(|&q| t.same(p, q))))
                });
                self.report.failures += 1;
                if !shared {
                    self.report.generic_failures += 1;
                }
                if self.report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    self.report.counterexamples.push(Counterexample {
                        formula: label.to_string(),
                        source_type: TypeJson::from_type(self.i.source.base, &t),
                        expected: want,
                        got,
                        shared_points: shared,
                    });
                }
            }
        }
        self.report.checked.push((label.to_string(), count));
        Ok(())
    }
}

fn value_in_relation(target: &Target, rel: &str, v: &Value) -> Result<bool> {
    match (target, v) {
        (Target::Boolean(s), Value::Bits(bits)) => Ok(s
            .get(rel)
            .ok_or_else(|| Error::UnknownRelation(rel.into()))?
            .contains(bits)),
        (Target::Relational(l), Value::Type(u)) => {
            let r = l
                .get(rel)
                .ok_or_else(|| Error::UnknownRelation(rel.into()))?;
            if r.constants().is_empty() {
                let pos: Vec<usize> = (0..r.arity()).collect();
                Ok(r.contains(&u.restrict(l.base, &pos)))
            } else {
                Ok(r.contains(u))
            }
        }
        _ => Err(Error::InvalidArgument(
            "coordinate rule does not fit the target".into(),
        )),
    }
}

fn values_equal(v: &Value) -> Result<bool> {
    match v {
        Value::Bits(b) => Ok(b[0] == b[1]),
        Value::Type(u) => Ok(u.same(0, 1)),
    }
}

/// Checks every defining formula against the coordinate map on all types.
pub fn verify_interpretation(i: &Interpretation) -> Result<InterpretationReport> {
    let k = i.source.constants.count();
    if i.constants.len() != i.target.constant_count() {
        return Err(Error::InvalidArgument(format!(
            "{} constant images for {} target constants",
            i.constants.len(),
            i.target.constant_count()
        )));
    }
    if i.constants
        .iter()
        .any(|c| c.len() != i.dim || c.iter().any(|&j| j >= k))
    {
        return Err(Error::InvalidArgument(
            "constant images must be source constant tuples".into(),
        ));
    }
    let mut checker = Checker {
        i,
        k,
        delta: Relation::empty("", TypeSpace::new(i.source.base, 0)),
        report: InterpretationReport {
            name: i.name.clone(),
            dim: i.dim,
            checked: Vec::new(),
            counterexamples: Vec::new(),
            failures: 0,
            generic_failures: 0,
            notes: Vec::new(),
        },
    };
    checker.delta = checker.evaluate(&i.delta)?;

    // the rule is total on the domain, and onto for finite targets
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let dom: Vec<Type> = checker.delta.types.iter().cloned().collect();
    let d_points: Vec<Vec<usize>> = {
        let mut p = vec![(0..i.dim).collect::<Vec<_>>()];
        p.extend(
            i.constants
                .iter()
                .map(|c| c.iter().map(|&j| i.dim + j).collect()),
        );
        p
    };
    for t in &dom {
        match i.rule.apply(i.source.base, t, k, &d_points) {
            Some(Value::Bits(b)) => {
                seen.insert(b[..1].to_vec());
            }
            Some(Value::Type(_)) => {}
            None => {
                return Err(Error::InvalidArgument(format!(
                    "coordinate rule `{}` undefined on a domain type",
                    i.rule.id()
                )))
            }
        }
    }
    for (c, img) in i.constants.iter().enumerate() {
        let t = i.source.constants.config();
        let pos: Vec<usize> = img.iter().copied().chain(0..k).collect();
        if !checker.delta.contains(&t.restrict(i.source.base, &pos)) {
            checker.report.notes.push(format!(
                "image of target constant {c} is outside the domain"
            ));
            checker.report.failures += 1;
            checker.report.generic_failures += 1;
        }
    }
    if let Target::Boolean(_) = i.target {
        if seen.len() < 2 {
            checker
                .report
                .notes
                .push(format!("coordinate map hits only {seen:?}"));
            checker.report.failures += 1;
            checker.report.generic_failures += 1;
        }
    } else {
        checker
            .report
            .notes
            .push("surjectivity onto an infinite target is not checked".into());
    }

    let phi_eq = i.phi_eq.clone();
    checker.check("=", &phi_eq, 2, values_equal)?;
    for (name, arity) in i.target.relation_names() {
        let Some(f) = i.phi.get(&name).cloned() else {
            checker
                .report
                .notes
                .push(format!("no defining formula for `{name}`"));
            continue;
        };
        let target = &i.target;
        checker.check(&name, &f, arity, |v| value_in_relation(target, &name, v))?;
    }
    Ok(checker.report)
}

/// Substitutes one formula into a growing conjunction.
struct Builder {
    free: Vec<String>,
    exists: Vec<String>,
    atoms: Vec<PpAtom>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        let name = format!("q{}", self.exists.len() + 1);
        self.exists.push(name);
        self.free.len() + self.exists.len() - 1
    }

    /// Adds `f(args)` with its existentials renamed apart.
    fn instantiate(&mut self, f: &PpFormula, args: &[PpTerm]) {
        let mut map: Vec<PpTerm> = args.to_vec();
        for _ in &f.exists {
            let v = self.fresh();
            map.push(PpTerm::Var(v));
        }
        for a in &f.atoms {
            self.atoms.push(PpAtom {
                rel: a.rel.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        PpTerm::Var(j) => map[*j],
                        c => *c,
                    })
                    .collect(),
            });
        }
    }

    fn finish(self) -> PpFormula {
        let nfree = self.free.len();
        let mut f = PpFormula {
            free: self.free,
            exists: self.exists,
            atoms: self.atoms,
        };
        f.atoms.sort();
        f.atoms.dedup();
        debug_assert!(f.atoms.iter().all(|a| a.args.iter().all(|t| match t {
            PpTerm::Var(v) => *v < nfree + f.exists.len(),
            PpTerm::Const(_) => true,
        })));
        f
    }
}

/// The translation of an intermediate formula `g` through `i`.
fn translate(g: &PpFormula, i: &Interpretation, budget: usize) -> Result<PpFormula> {
    let d = i.dim;
    let free: Vec<String> = g
        .free
        .iter()
        .flat_map(|v| {
            (0..d).map(move |j| {
                if d == 1 {
                    v.clone()
                } else {
                    format!("{v}_{}", j + 1)
                }
            })
        })
        .collect();
    let mut b = Builder {
        free,
        exists: Vec::new(),
        atoms: Vec::new(),
    };
    let mut var_block: Vec<Vec<PpTerm>> = (0..g.free.len())
        .map(|v| (0..d).map(|j| PpTerm::Var(v * d + j)).collect())
        .collect();
    for _ in &g.exists {
        let block = (0..d).map(|_| PpTerm::Var(b.fresh())).collect();
        var_block.push(block);
    }
    let term_block = |t: &PpTerm| -> Result<Vec<PpTerm>> {
        match t {
            PpTerm::Var(v) => Ok(var_block[*v].clone()),
            PpTerm::Const(c) => i
                .constants
                .get(*c)
                .map(|img| img.iter().map(|&j| PpTerm::Const(j)).collect())
                .ok_or_else(|| Error::InvalidArgument(format!("constant {c} has no image"))),
        }
    };
    for block in var_block.clone() {
        b.instantiate(&i.delta, &block);
    }
    for a in &g.atoms {
        let args: Vec<PpTerm> = a
            .args
            .iter()
            .map(&term_block)
            .collect::<Result<Vec<_>>>()?
            .concat();
        let f = if a.rel == "=" {
            &i.phi_eq
        } else {
            i.phi
                .get(&a.rel)
                .ok_or_else(|| Error::UnknownRelation(a.rel.clone()))?
        };
        b.instantiate(f, &args);
        if b.free.len() + b.exists.len() > budget {
            return Err(Error::CapExceeded {
                cap: "composed formula variables",
                limit: budget,
                needed: b.free.len() + b.exists.len(),
            });
        }
    }
    let f = b.finish();
    Ok(f)
}

/// `j ∘ i`: interprets `j`'s target in `i`'s source, with dimension
/// `i.dim * j.dim`. `j`'s source must be `i`'s target.
pub fn compose(
    i: &Interpretation,
    j: &Interpretation,
    var_budget: usize,
) -> Result<Interpretation> {
    let Target::Relational(mid) = &i.target else {
        return Err(Error::InvalidArgument(
            "inner interpretation must have a relational target".into(),
        ));
    };
    if mid.base != j.source.base || mid.constants != j.source.constants {
        return Err(Error::InvalidArgument(format!(
            "`{}` is not interpreted by `{}`",
            j.source.name, i.name
        )));
    }
    for r in &j.source.relations {
        if mid.get(&r.name).is_none() {
            return Err(Error::UnknownRelation(r.name.clone()));
        }
    }
    let delta = translate(&j.delta, i, var_budget)?;
    let phi_eq = translate(&j.phi_eq, i, var_budget)?;
    let mut phi = BTreeMap::new();
    for (name, f) in &j.phi {
        phi.insert(name.clone(), translate(f, i, var_budget)?);
    }
    // target constants of j are j-source constant tuples, i.e. tuples of i-target constants
    let constants = j
        .constants
        .iter()
        .map(|img| img.iter().flat_map(|&c| i.constants[c].clone()).collect())
        .collect();
    Ok(Interpretation {
        name: format!("{}∘{}", j.name, i.name),
        dim: i.dim * j.dim,
        source: i.source.clone(),
        target: j.target.clone(),
        delta: rename_free(delta, i.dim * j.dim, 1),
        phi_eq: rename_free(phi_eq, i.dim * j.dim, 2),
        phi: phi
            .into_iter()
            .map(|(n, f)| {
                let r = f.free.len() / (i.dim * j.dim);
                (n, rename_free(f, i.dim * j.dim, r))
            })
            .collect(),
        constants,
        rule: CoordRule::Compose {
            inner: Box::new(i.rule.clone()),
            inner_dim: i.dim,
            inner_constants: i.constants.clone(),
            outer: Box::new(j.rule.clone()),
        },
        var_cap: i.var_cap.max(j.var_cap).max(var_budget.min(16)),
    })
}

/// Rewrites `φ_rel` so that the listed blocks are first replaced by fresh
/// representatives of the same target elements:
/// `∃ȳ'. δ(ȳ') ∧ φ_=(ȳ,ȳ') ∧ φ_rel(..ȳ'..)`.
///
/// A defining formula that is only right when its blocks use pairwise
/// different source points becomes right everywhere, as the copies can
/// always be chosen apart from everything else.
pub fn with_fresh_copies(
    i: &Interpretation,
    rel: &str,
    blocks: &[usize],
) -> Result<Interpretation> {
    let f = i
        .phi
        .get(rel)
        .ok_or_else(|| Error::UnknownRelation(rel.to_string()))?;
    let d = i.dim;
    let mut b = Builder {
        free: f.free.clone(),
        exists: Vec::new(),
        atoms: Vec::new(),
    };
    let mut args: Vec<PpTerm> = (0..f.free.len()).map(PpTerm::Var).collect();
    for &blk in blocks {
        if (blk + 1) * d > f.free.len() {
            return Err(Error::IndexOutOfRange {
                index: blk,
                len: f.free.len() / d,
            });
        }
        let copy: Vec<PpTerm> = (0..d).map(|_| PpTerm::Var(b.fresh())).collect();
        let orig: Vec<PpTerm> = (blk * d..(blk + 1) * d).map(PpTerm::Var).collect();
        b.instantiate(&i.delta, &copy);
        b.instantiate(&i.phi_eq, &[orig, copy.clone()].concat());
        args.splice(blk * d..(blk + 1) * d, copy);
    }
    b.instantiate(f, &args);
    let mut out = i.clone();
    out.phi.insert(rel.to_string(), b.finish());
    out.name = format!("{}/fresh", i.name);
    Ok(out)
}

fn rename_free(mut f: PpFormula, dim: usize, blocks: usize) -> PpFormula {
    f.free = block_vars(blocks, dim);
    f
}

/// The identity interpretation of a language in itself.
pub fn identity(lang: &Language) -> Result<Interpretation> {
    let phi: Vec<(String, String)> = lang
        .relations
        .iter()
        .map(|r| {
            (
                r.name.clone(),
                format!("{}({})", r.name, block_vars(r.arity(), 1).join(",")),
            )
        })
        .collect();
    let phi_ref: Vec<(&str, &str)> = phi.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let k = lang.constants.count();
    Ok(Interpretation::from_texts(
        &format!("id_{}", lang.name),
        1,
        lang.clone(),
        Target::Relational(lang.clone()),
        "true",
        &phi_ref,
        "x1=y1",
        CoordRule::Identity,
    )?
    .with_constants((0..k).map(|c| vec![c]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_names() {
        assert_eq!(block_vars(3, 2), ["x1", "x2", "y1", "y2", "z1", "z2"]);
        assert_eq!(block_vars(2, 1), ["x1", "y1"]);
    }

    #[test]
    fn identity_verifies_and_composes() {
        let lang = Language::from_builtins("betw", Base::QOrder, &["Betw"]).unwrap();
        let id = identity(&lang).unwrap();
        assert!(verify_interpretation(&id).unwrap().verified());
        let i = nae_in_betw_fresh().unwrap();
        let c = compose(&identity(&i.source).unwrap(), &i, 16).unwrap();
        assert_eq!(c.dim, 1);
        assert!(verify_interpretation(&c).unwrap().verified());
    }

    #[test]
    fn broken_formula_is_caught() {
        let mut i = oit_in_t3().unwrap();
        let wrong = parse_pp_with_free("T3(0,x1,y1)", &i.source, &block_vars(2, 2)).unwrap();
        i.phi_eq = wrong;
        let r = verify_interpretation(&i).unwrap();
        assert!(!r.verified());
        assert_eq!(r.counterexamples[0].formula, "=");
    }

    #[test]
    fn literal_sep_claim_fails() {
        let r = verify_interpretation(&betw_from_sep_literal().unwrap()).unwrap();
        assert!(!r.verified());
        // the formula holds on more than Betw, never on less
        assert!(r.counterexamples.iter().all(|c| !c.expected && c.got));
    }
}
