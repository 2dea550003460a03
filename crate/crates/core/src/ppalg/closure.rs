//! Bounded pp and ep closures.
//!
//! The pp closure grows a list of relations by single steps: take one or
//! two relations already in the list, identify some of their arguments,
//! conjoin, and project onto any ordered tuple of distinct variables. A
//! step may use at most `max_vars` distinct variables and only outputs of
//! arity at most `max_arity` are kept. Rounds are semi-naive: each new
//! relation is combined with itself and with every older one exactly once.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::Serialize;

use super::engine::{Constraint, Problem};
use crate::error::{Error, Result};
use crate::formulas::{builtin_in, default_vars, Language, PpAtom, PpFormula, PpTerm, Relation};
use crate::typespace::{Base, Type, TypeSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureCaps {
    /// Distinct variables allowed in one step.
    pub max_vars: usize,
    /// Largest arity of a generated relation.
    pub max_arity: usize,
    /// Number of joins before giving up.
    pub max_steps: usize,
    /// Number of relations before giving up.
    pub max_relations: usize,
}

impl ClosureCaps {
    pub fn new(max_vars: usize, max_arity: usize) -> Self {
        ClosureCaps {
            max_vars,
            max_arity,
            max_steps: 200_000,
            max_relations: 20_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_vars == 0 || self.max_arity == 0 {
            return Err(Error::InvalidArgument(
                "closure caps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A generated relation and how it was obtained. A pp entry has one
/// disjunct; ep entries may have several.
#[derive(Clone, Debug)]
pub struct ClosureEntry {
    pub relation: Relation,
    pub disjuncts: Vec<PpFormula>,
}

impl ClosureEntry {
    pub fn arity(&self) -> usize {
        self.relation.arity()
    }

    pub fn is_pp(&self) -> bool {
        self.disjuncts.len() == 1
    }
}

impl fmt::Display for ClosureEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return f.write_str("false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            if self.disjuncts.len() > 1 && !d.exists.is_empty() {
                write!(f, "({d})")?;
            } else {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub language: String,
    pub base: Base,
    pub caps: ClosureCaps,
    pub entries: Vec<ClosureEntry>,
    /// Number of joins evaluated.
    pub steps: usize,
}

impl ClosureReport {
    /// The entry with exactly the types of `r` (after moving `r` over the
    /// closure's constants when it has none).
    pub fn find(&self, r: &Relation) -> Option<&ClosureEntry> {
        let r = self.align(r)?;
        self.entries
            .iter()
            .find(|e| e.arity() == r.arity() && e.relation.types == r.types)
    }

    pub fn contains(&self, r: &Relation) -> bool {
        self.find(r).is_some()
    }

    fn align(&self, r: &Relation) -> Option<Relation> {
        let Some(first) = self.entries.first() else {
            return Some(r.clone());
        };
        let c = first.relation.constants();
        if r.base() != self.base {
            return None;
        }
        if r.constants() == c {
            Some(r.clone())
        } else if r.constants().is_empty() {
            r.refine(c).ok()
        } else {
            None
        }
    }

    pub fn of_arity(&self, arity: usize) -> impl Iterator<Item = &ClosureEntry> {
        self.entries.iter().filter(move |e| e.arity() == arity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SearchOutcome {
    Fixpoint,
    Found(usize),
    Budget,
    Cancelled,
}

/// Restricted growth strings of length `n` with at most `max_blocks`
/// blocks: every way of identifying `n` argument places.
fn patterns(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, n: usize, blocks: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=blocks.min(max.saturating_sub(1)) {
            cur.push(b);
            go(cur, n, blocks.max(b + 1), max, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), n, 0, max_blocks, &mut out);
    out
}

/// Ordered tuples of distinct elements of `0..v` of length `1..=max_len`.
fn tuples(v: usize, max_len: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], len: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                go(cur, used, len, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    for len in 1..=max_len.min(v) {
        go(&mut Vec::new(), &mut vec![false; v], len, &mut out);
    }
    out
}

/// Derivation of `Ey. (part_1 & ... )` projected onto `out`, where each
/// part is a derivation applied to join variables.
fn compose(parts: &[(&PpFormula, &[usize])], nvars: usize, out: &[usize]) -> PpFormula {
    // join variable -> formula variable (free first)
    let mut map = vec![usize::MAX; nvars];
    for (k, &jv) in out.iter().enumerate() {
        map[jv] = k;
    }
    let mut next = out.len();
    for slot in map.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let mut atoms = Vec::new();
    for (f, args) in parts {
        let nf = f.free.len();
        let base = next;
        next += f.exists.len();
        for a in &f.atoms {
            let args: Vec<PpTerm> = a
                .args
                .iter()
                .map(|t| match t {
                    PpTerm::Var(i) if *i < nf => PpTerm::Var(map[args[*i]]),
                    PpTerm::Var(i) => PpTerm::Var(base + i - nf),
                    PpTerm::Const(c) => PpTerm::Const(*c),
                })
                .collect();
            if a.rel == "=" && args[0] == args[1] {
                continue;
            }
            let atom = PpAtom {
                rel: a.rel.clone(),
                args,
            };
            if !atoms.contains(&atom) {
                atoms.push(atom);
            }
        }
    }
    // keep only existentials that occur, renumbered in order of use
    let nfree = out.len();
    let mut renum: HashMap<usize, usize> = HashMap::new();
    for a in &atoms {
        for t in &a.args {
            if let PpTerm::Var(i) = t {
                if *i >= nfree && !renum.contains_key(i) {
                    let k = nfree + renum.len();
                    renum.insert(*i, k);
                }
            }
        }
    }
    for a in &mut atoms {
        for t in &mut a.args {
            if let PpTerm::Var(i) = t {
                if *i >= nfree {
                    *i = renum[i];
                }
            }
        }
    }
    PpFormula {
        free: default_vars(nfree),
        exists: (1..=renum.len()).map(|i| format!("u{i}")).collect(),
        atoms,
    }
}

struct Search<'a> {
    lang: &'a Language,
    caps: ClosureCaps,
    space_constants: crate::typespace::Constants,
    entries: Vec<ClosureEntry>,
    index: HashMap<(usize, BTreeSet<Type>), usize>,
    steps: usize,
    target: Option<Relation>,
    cancel: Option<&'a AtomicBool>,
}

enum Stop {
    Found(usize),
    Budget,
    Cancelled,
}

impl<'a> Search<'a> {
    fn add(&mut self, relation: Relation, derivation: PpFormula) -> std::result::Result<(), Stop> {
        let key = (relation.arity(), relation.types.clone());
        if self.index.contains_key(&key) {
            return Ok(());
        }
        if self.entries.len() >= self.caps.max_relations {
            return Err(Stop::Budget);
        }
        let i = self.entries.len();
        self.index.insert(key, i);
        let hit = self
            .target
            .as_ref()
            .is_some_and(|t| t.arity() == relation.arity() && t.types == relation.types);
        self.entries.push(ClosureEntry {
            relation,
            disjuncts: vec![derivation],
        });
        if hit {
            return Err(Stop::Found(i));
        }
        Ok(())
    }

    fn seeds(&mut self) -> Result<std::result::Result<(), Stop>> {
        let c = self.space_constants.clone();
        let lift = |r: &Relation| -> Result<Relation> {
            if r.constants().is_empty() && !c.is_empty() {
                r.refine(&c)
            } else {
                Ok(r.clone())
            }
        };
        let mut seeds = Vec::new();
        for r in &self.lang.relations {
            seeds.push((lift(r)?, PpFormula::atom(&r.name, r.arity())));
        }
        let eq = builtin_in("eq", self.lang.base)?;
        seeds.push((lift(&eq)?, PpFormula::atom("=", 2)));
        for k in 0..c.count() {
            let f = PpFormula {
                free: default_vars(1),
                exists: Vec::new(),
                atoms: vec![PpAtom {
                    rel: "=".into(),
                    args: vec![PpTerm::Var(0), PpTerm::Const(k)],
                }],
            };
            let space = TypeSpace {
                base: self.lang.base,
                arity: 1,
                constants: c.clone(),
            };
            let types = space
                .enumerate()?
                .into_iter()
                .filter(|t| t.same(0, 1 + k))
                .collect();
            seeds.push((Relation::new("", space, types)?, f));
        }
        for (r, f) in seeds {
            if let Err(s) = self.add(r.renamed(""), f) {
                return Ok(Err(s));
            }
        }
        Ok(Ok(()))
    }

    /// Joins the given entries under every argument pattern and adds all
    /// projections.
    fn step(&mut self, parts: &[usize]) -> std::result::Result<(), Stop> {
        let arities: Vec<usize> = parts.iter().map(|&p| self.entries[p].arity()).collect();
        let total: usize = arities.iter().sum();
        let nconst = self.space_constants.count();
        for pat in patterns(total, self.caps.max_vars) {
            if self.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Err(Stop::Cancelled);
            }
            if self.steps >= self.caps.max_steps {
                return Err(Stop::Budget);
            }
            self.steps += 1;
            let v = pat.iter().max().map_or(0, |m| m + 1);
            let mut offset = 0;
            let mut slices = Vec::new();
            for &a in &arities {
                slices.push(pat[offset..offset + a].to_vec());
                offset += a;
            }
            let joined = {
                let problem = Problem {
                    base: self.lang.base,
                    constants: self.space_constants.clone(),
                    nvars: v,
                    nfree: v,
                    constraints: parts
                        .iter()
                        .zip(&slices)
                        .map(|(&p, s)| Constraint {
                            rel: &self.entries[p].relation,
                            args: s.clone(),
                        })
                        .collect(),
                };
                match problem.plan(usize::MAX, true) {
                    Ok(plan) => plan.relation("", self.cancel),
                    Err(_) => continue,
                }
            };
            for out in tuples(v, self.caps.max_arity) {
                let mut layout = out.clone();
                layout.extend(v..v + nconst);
                let types: BTreeSet<Type> = joined
                    .types
                    .iter()
                    .map(|t| t.restrict(self.lang.base, &layout))
                    .collect();
                if self.index.contains_key(&(out.len(), types.clone())) {
                    continue;
                }
                let space = TypeSpace {
                    base: self.lang.base,
                    arity: out.len(),
                    constants: self.space_constants.clone(),
                };
                let rel = Relation {
                    name: String::new(),
                    space,
                    types,
                };
                let derivation = {
                    let fs: Vec<(&PpFormula, &[usize])> = parts
                        .iter()
                        .zip(&slices)
                        .map(|(&p, s)| (&self.entries[p].disjuncts[0], s.as_slice()))
                        .collect();
                    compose(&fs, v, &out)
                };
                self.add(rel, derivation)?;
            }
        }
        Ok(())
    }

    fn run(&mut self) -> std::result::Result<(), Stop> {
        let mut next = 0;
        while next < self.entries.len() {
            let j = next;
            next += 1;
            self.step(&[j])?;
            for i in 0..=j {
                self.step(&[i, j])?;
            }
        }
        Ok(())
    }
}

/// The closure search with an optional target (stop as soon as it shows
/// up) and a cancellation flag. Always returns what was generated.
pub(crate) fn closure_search(
    lang: &Language,
    caps: ClosureCaps,
    target: Option<&Relation>,
    cancel: Option<&AtomicBool>,
) -> Result<(ClosureReport, SearchOutcome)> {
    caps.validate()?;
    let target = match target {
        Some(t) if t.base() != lang.base => {
            return Err(Error::BaseMismatch {
                expected: lang.base,
                found: t.base(),
            })
        }
        Some(t) if t.constants().is_empty() && !lang.constants.is_empty() => {
            Some(t.refine(&lang.constants)?)
        }
        Some(t) => Some(t.clone()),
        None => None,
    };
    let mut s = Search {
        lang,
        caps,
        space_constants: lang.constants.clone(),
        entries: Vec::new(),
        index: HashMap::new(),
        steps: 0,
        target,
        cancel,
    };
    let stop = match s.seeds()? {
        Ok(()) => s.run(),
        Err(stop) => Err(stop),
    };
    let outcome = match stop {
        Ok(()) => SearchOutcome::Fixpoint,
        Err(Stop::Found(i)) => SearchOutcome::Found(i),
        Err(Stop::Budget) => SearchOutcome::Budget,
        Err(Stop::Cancelled) => SearchOutcome::Cancelled,
    };
    let mut entries = s.entries;
    for (i, e) in entries.iter_mut().enumerate() {
        e.relation.name = format!("R{i}");
    }
    Ok((
        ClosureReport {
            language: lang.name.clone(),
            base: lang.base,
            caps,
            entries,
            steps: s.steps,
        },
        outcome,
    ))
}

/// All relations reachable within the caps, each with a pp derivation.
pub fn pp_closure(lang: &Language, caps: ClosureCaps) -> Result<ClosureReport> {
    let (report, outcome) = closure_search(lang, caps, None, None)?;
    match outcome {
        SearchOutcome::Fixpoint => Ok(report),
        _ => Err(Error::BudgetExhausted("pp closure")),
    }
}

/// The pp closure further closed under unions of relations of equal arity.
pub fn ep_closure(lang: &Language, caps: ClosureCaps) -> Result<ClosureReport> {
    let mut report = pp_closure(lang, caps)?;
    let mut index: HashMap<(usize, BTreeSet<Type>), usize> = report
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.arity(), e.relation.types.clone()), i))
        .collect();
    let mut next = 0;
    while next < report.entries.len() {
        let j = next;
        next += 1;
        for i in 0..j {
            let (a, b) = (&report.entries[i], &report.entries[j]);
            if a.arity() != b.arity() || a.relation.space != b.relation.space {
                continue;
            }
            let types: BTreeSet<Type> =
                a.relation.types.union(&b.relation.types).cloned().collect();
            let key = (a.arity(), types);
            if index.contains_key(&key) {
                continue;
            }
            if report.entries.len() >= caps.max_relations {
                return Err(Error::BudgetExhausted("ep closure"));
            }
            let mut disjuncts = a.disjuncts.clone();
            for d in &b.disjuncts {
                if !disjuncts.contains(d) {
                    disjuncts.push(d.clone());
                }
            }
            let relation = Relation {
                name: format!("R{}", report.entries.len()),
                space: a.relation.space.clone(),
                types: key.1.clone(),
            };
            index.insert(key, report.entries.len());
            report.entries.push(ClosureEntry {
                relation,
                disjuncts,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppalg::evaluate_pp_capped;

    fn builtin(name: &str) -> Relation {
        builtin_in(name, Base::QOrder).unwrap()
    }

    fn lang(base: Base, names: &[&str]) -> Language {
        Language::from_builtins("l", base, names).unwrap()
    }

    fn reevaluates(report: &ClosureReport, lang: &Language) {
        for e in &report.entries {
            let mut types = BTreeSet::new();
            for d in &e.disjuncts {
                let r = evaluate_pp_capped(d, lang, 16).unwrap();
                let r = if r.constants().is_empty() && !lang.constants.is_empty() {
                    r.refine(&lang.constants).unwrap()
                } else {
                    r
                };
                types.extend(r.types);
            }
            assert_eq!(types, e.relation.types, "{e}");
        }
    }

    #[test]
    fn pattern_and_tuple_counts() {
        // Bell numbers truncated by block count
        assert_eq!(patterns(3, 3).len(), 5);
        assert_eq!(patterns(4, 4).len(), 15);
        assert_eq!(patterns(4, 2).len(), 8);
        assert_eq!(patterns(6, 3).len(), 1 + 31 + 90);
        assert_eq!(tuples(3, 2).len(), 3 + 6);
    }

    #[test]
    fn betweenness_closure_has_disequality() {
        let l = lang(Base::QOrder, &["Betw"]);
        let report = pp_closure(&l, ClosureCaps::new(3, 2)).unwrap();
        let neq = builtin("neq");
        let e = report.find(&neq).expect("neq derived");
        assert!(e.to_string().contains("Betw"));
        reevaluates(&report, &l);
    }

    #[test]
    fn order_closure_lacks_disequality() {
        let l = lang(Base::QOrder, &["lt"]);
        let report = pp_closure(&l, ClosureCaps::new(3, 2)).unwrap();
        assert!(report.contains(&builtin("lt")));
        assert!(report.contains(&builtin("eq")));
        assert!(!report.contains(&builtin("neq")));
        assert!(!report.contains(&builtin("le")));
        // binary: <, >, =, full, empty; unary: full, empty
        assert_eq!(report.of_arity(2).count(), 5);
        reevaluates(&report, &l);
    }

    #[test]
    fn ep_closure_adds_unions() {
        let l = lang(Base::QOrder, &["lt"]);
        let report = ep_closure(&l, ClosureCaps::new(3, 2)).unwrap();
        // < | > is a union of pp-definable relations
        let e = report.find(&builtin("neq")).unwrap();
        assert_eq!(e.disjuncts.len(), 2);
        assert!(report.contains(&builtin("le")));
        assert_eq!(report.of_arity(2).count(), 8);
        reevaluates(&report, &l);
    }

    #[test]
    fn equality_closure_is_patterns_only() {
        let l = Language::new("eq", Base::QOrder);
        let report = pp_closure(&l, ClosureCaps::new(4, 3)).unwrap();
        for e in &report.entries {
            let perms: Vec<Type> = e.relation.types.iter().map(Type::reversed).collect();
            assert!(perms.iter().all(|t| e.relation.contains(t)));
        }
        assert!(!report.contains(&builtin("lt")));
    }

    #[test]
    fn constants_seed_singletons() {
        let l = lang(Base::QOrder, &["lt"])
            .with_constants(crate::typespace::Constants::new(1))
            .unwrap();
        let (report, outcome) = closure_search(&l, ClosureCaps::new(2, 1), None, None).unwrap();
        assert_eq!(outcome, SearchOutcome::Fixpoint);
        // unary over one constant: {x<0}, {x=0}, {x>0} and their pp combinations
        let sizes: BTreeSet<usize> = report.of_arity(1).map(|e| e.relation.len()).collect();
        assert!(sizes.contains(&1));
        reevaluates(&report, &l);
    }

    #[test]
    fn target_stops_early_and_budget_reports() {
        let l = lang(Base::QOrder, &["Betw"]);
        let neq = builtin("neq");
        let (report, outcome) =
            closure_search(&l, ClosureCaps::new(3, 2), Some(&neq), None).unwrap();
        let SearchOutcome::Found(i) = outcome else {
            panic!()
        };
        assert_eq!(report.entries[i].relation.types, neq.types);
        let mut tiny = ClosureCaps::new(6, 3);
        tiny.max_steps = 3;
        assert!(matches!(
            pp_closure(&l, tiny),
            Err(Error::BudgetExhausted(_))
        ));
    }
}
