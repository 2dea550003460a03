//! Behavior search as a finite CSP.
//!
//! Variables are the non-diagonal table rows up to swapping the two points
//! (a row and its swap must have swapped outputs). Constraints:
//! - every m-tuple of 3-types assembles consistently (realizability);
//! - every m-tuple of members of a preserved relation lands inside it;
//! - optionally one fixed m-tuple of members of a target lands outside.
//!
//! Search is backtracking with forward checking and smallest-domain-first.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use super::{Behavior, KeySpace, Witness};
use crate::error::{Error, Result};
use crate::formulas::Relation;
use crate::typespace::{Base, Constants, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Largest arity accepted.
    pub max_arity: usize,
    /// Stop after this many behaviors.
    pub max_results: usize,
    /// Search nodes before giving up.
    pub budget: u64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_arity: 2,
            max_results: 1_000_000,
            budget: 50_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Slot {
    Eq,
    Var(u32, bool),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Triple,
    /// Output must be a member of relation `i`.
    Member(usize),
    /// Output must be a type outside relation `i`.
    Outside(usize),
}

struct Con {
    kind: Kind,
    points: usize,
    slots: Vec<Slot>,
    vars: Vec<u32>,
}

struct Csp<'a> {
    ks: &'a KeySpace,
    m: usize,
    /// key tuple code -> slot
    slot_of: Vec<Slot>,
    /// variable -> representative code
    rep: Vec<usize>,
    init_domain: Vec<u8>,
    rels: Vec<HashSet<Type>>,
    cons: Vec<Con>,
    seen: HashSet<(Kind, Vec<Slot>)>,
    var_cons: Vec<Vec<usize>>,
    assemble_cache: HashMap<(usize, Vec<u8>), Option<Type>>,
}

impl<'a> Csp<'a> {
    fn new(ks: &'a KeySpace, m: usize) -> Csp<'a> {
        let total = ks.tuple_count(m);
        let mut slot_of = vec![Slot::Eq; total];
        let mut rep = Vec::new();
        let mut init_domain = Vec::new();
        let all: u8 = ((1u16 << ks.outs.len()) - 1) as u8;
        let self_flip: u8 = (0..ks.outs.len())
            .filter(|&o| ks.out_flip[o] as usize == o)
            .fold(0, |acc, o| acc | 1 << o);
        for code in 0..total {
            if ks.is_diag(code, m) {
                continue;
            }
            let f = ks.flip_code(code, m);
            if f < code {
                let Slot::Var(v, _) = slot_of[f] else {
                    unreachable!()
                };
                slot_of[code] = Slot::Var(v, true);
            } else {
                let v = rep.len() as u32;
                rep.push(code);
                init_domain.push(if f == code { self_flip } else { all });
                slot_of[code] = Slot::Var(v, false);
            }
        }
        let n = rep.len();
        Csp {
            ks,
            m,
            slot_of,
            rep,
            init_domain,
            rels: Vec::new(),
            cons: Vec::new(),
            seen: HashSet::new(),
            var_cons: vec![Vec::new(); n],
            assemble_cache: HashMap::new(),
        }
    }

    fn add(&mut self, kind: Kind, points: usize, slots: Vec<Slot>) {
        if !self.seen.insert((kind.clone(), slots.clone())) {
            return;
        }
        let mut vars: Vec<u32> = slots
            .iter()
            .filter_map(|s| match s {
                Slot::Var(v, _) => Some(*v),
                Slot::Eq => None,
            })
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let i = self.cons.len();
        for &v in &vars {
            self.var_cons[v as usize].push(i);
        }
        self.cons.push(Con {
            kind,
            points,
            slots,
            vars,
        });
    }

    fn remove_last(&mut self) {
        if let Some(c) = self.cons.pop() {
            let i = self.cons.len();
            for &v in &c.vars {
                let list = &mut self.var_cons[v as usize];
                if list.last() == Some(&i) {
                    list.pop();
                }
            }
            self.seen.remove(&(c.kind, c.slots));
        }
    }

    fn add_realizability(&mut self) {
        let ks = self.ks;
        let n3 = ks.triples.len();
        let m = self.m;
        let mut idx = vec![0usize; m];
        loop {
            let mut slots = Vec::with_capacity(3);
            for e in 0..3 {
                let keys: Vec<usize> = idx.iter().map(|&t| ks.triples[t][e]).collect();
                slots.push(self.slot_of[ks.encode(&keys)]);
            }
            if slots.iter().any(|s| matches!(s, Slot::Var(..))) {
                self.add(Kind::Triple, 3, slots);
            }
            let mut i = 0;
            loop {
                if i == m {
                    return;
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

    /// Slots of the pairs of m member types (over the constants).
    fn tuple_slots(&self, inputs: &[&Type]) -> Vec<Slot> {
        let r = inputs[0].len() - self.ks.constants.count();
        let mut slots = Vec::new();
        for p in 0..r {
            for q in p + 1..r {
                let keys: Vec<usize> = inputs.iter().map(|t| self.ks.pair_key(t, p, q)).collect();
                slots.push(self.slot_of[self.ks.encode(&keys)]);
            }
        }
        slots
    }

    fn add_relation(&mut self, r: &Relation) -> Result<usize> {
        let i = self.rels.len();
        self.rels.push(r.types.iter().cloned().collect());
        Ok(i)
    }

    fn add_preservation(&mut self, r: &Relation, refined: &Relation) -> Result<()> {
        let i = self.add_relation(r)?;
        let members: Vec<&Type> = refined.types.iter().collect();
        if members.is_empty() || r.arity() < 2 {
            // a constant-free unary relation is empty or everything
            return Ok(());
        }
        let m = self.m;
        let mut idx = vec![0usize; m];
        loop {
            let inputs: Vec<&Type> = idx.iter().map(|&j| members[j]).collect();
            let slots = self.tuple_slots(&inputs);
            self.add(Kind::Member(i), r.arity(), slots);
            let mut k = 0;
            loop {
                if k == m {
                    return Ok(());
                }
                idx[k] += 1;
                if idx[k] < members.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn assemble(&mut self, points: usize, outs: &[u8]) -> Option<Type> {
        if let Some(t) = self.assemble_cache.get(&(points, outs.to_vec())) {
            return t.clone();
        }
        let ks = self.ks;
        let mut at = vec![0u8; points * points];
        let mut i = 0;
        for p in 0..points {
            for q in p + 1..points {
                at[p * points + q] = outs[i];
                i += 1;
            }
        }
        let t = Type::from_pairs(ks.base, points, |p, q| {
            ks.outs[at[p * points + q] as usize].clone()
        });
        self.assemble_cache
            .insert((points, outs.to_vec()), t.clone());
        t
    }

    fn satisfied(&mut self, c: usize, value: &[u8]) -> bool {
        let ks = self.ks;
        let con = &self.cons[c];
        let outs: Vec<u8> = con
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Eq => ks.eq_out,
                Slot::Var(v, false) => value[v as usize],
                Slot::Var(v, true) => ks.out_flip[value[v as usize] as usize],
            })
            .collect();
        match con.kind {
            Kind::Triple => ks.consistent(outs[0], outs[1], outs[2]),
            Kind::Member(i) => {
                let points = con.points;
                match self.assemble(points, &outs) {
                    Some(t) => self.rels[i].contains(&t),
                    None => false,
                }
            }
            Kind::Outside(i) => {
                let points = con.points;
                match self.assemble(points, &outs) {
                    Some(t) => !self.rels[i].contains(&t),
                    None => false,
                }
            }
        }
    }
}

/// Search state for one run.
struct Solver<'c, 'a> {
    csp: &'c mut Csp<'a>,
    domain: Vec<u8>,
    value: Vec<u8>,
    assigned: Vec<bool>,
    nodes: u64,
    budget: u64,
    cancel: Option<&'c AtomicBool>,
}

enum End {
    Done,
    Budget,
    Cancelled,
}

impl Solver<'_, '_> {
    /// Forward checking after assigning `v`. Returns the trail of domain
    /// changes, or `None` on a wipe-out (changes already undone).
    fn propagate(&mut self, v: usize) -> Option<Vec<(usize, u8)>> {
        let mut trail = Vec::new();
        let cons = self.csp.var_cons[v].clone();
        for c in cons {
            let open: Vec<u32> = self.csp.cons[c]
                .vars
                .iter()
                .copied()
                .filter(|&w| !self.assigned[w as usize])
                .collect();
            match open.len() {
                0 => {
                    if !self.csp.satisfied(c, &self.value) {
                        self.undo(&trail);
                        return None;
                    }
                }
                1 => {
                    let w = open[0] as usize;
                    let mut keep = 0u8;
                    for o in 0..8u8 {
                        if self.domain[w] >> o & 1 == 1 {
                            self.value[w] = o;
                            if self.csp.satisfied(c, &self.value) {
                                keep |= 1 << o;
                            }
                        }
                    }
                    if keep != self.domain[w] {
                        trail.push((w, self.domain[w]));
                        self.domain[w] = keep;
                    }
                    if keep == 0 {
                        self.undo(&trail);
                        return None;
                    }
                }
                _ => {}
            }
        }
        Some(trail)
    }

    fn undo(&mut self, trail: &[(usize, u8)]) {
        for &(w, d) in trail.iter().rev() {
            self.domain[w] = d;
        }
    }

    fn run(&mut self, found: &mut dyn FnMut(&[u8]) -> bool) -> std::result::Result<(), End> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(End::Budget);
        }
        if self.nodes.is_multiple_of(1024) && self.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(End::Cancelled);
        }
        // smallest domain first
        let mut best: Option<(u32, usize)> = None;
        for v in 0..self.domain.len() {
            if !self.assigned[v] {
                let size = self.domain[v].count_ones();
                if best.is_none_or(|(s, _)| size < s) {
                    best = Some((size, v));
                }
            }
        }
        let Some((_, v)) = best else {
            return if found(&self.value) {
                Ok(())
            } else {
                Err(End::Done)
            };
        };
        self.assigned[v] = true;
        for o in 0..8u8 {
            if self.domain[v] >> o & 1 == 0 {
                continue;
            }
            self.value[v] = o;
            let saved = self.domain[v];
            self.domain[v] = 1 << o;
            if let Some(trail) = self.propagate(v) {
                let r = self.run(found);
                self.undo(&trail);
                if r.is_err() {
                    self.domain[v] = saved;
                    self.assigned[v] = false;
                    return r;
                }
            }
            self.domain[v] = saved;
        }
        self.assigned[v] = false;
        Ok(())
    }

    fn solve(
        csp: &mut Csp<'_>,
        budget: u64,
        cancel: Option<&AtomicBool>,
        found: &mut dyn FnMut(&[u8]) -> bool,
    ) -> std::result::Result<u64, End> {
        let n = csp.rep.len();
        let mut s = Solver {
            domain: csp.init_domain.clone(),
            csp,
            value: vec![0; n],
            assigned: vec![false; n],
            nodes: 0,
            budget,
            cancel,
        };
        // constraints without variables, and constraints on a single
        // variable, before any branching
        for c in 0..s.csp.cons.len() {
            if s.csp.cons[c].vars.len() == 1 {
                let w = s.csp.cons[c].vars[0] as usize;
                let mut keep = 0u8;
                for o in 0..8u8 {
                    if s.domain[w] >> o & 1 == 1 {
                        s.value[w] = o;
                        if s.csp.satisfied(c, &s.value) {
                            keep |= 1 << o;
                        }
                    }
                }
                s.domain[w] = keep;
            } else if s.csp.cons[c].vars.is_empty() && !s.csp.satisfied(c, &s.value) {
                return Ok(0);
            }
        }
        if s.domain.contains(&0) {
            return Ok(0);
        }
        match s.run(found) {
            Ok(()) | Err(End::Done) => Ok(s.nodes),
            Err(e) => Err(e),
        }
    }

    fn behavior(csp: &Csp<'_>, keys: &Arc<KeySpace>, name: String, value: &[u8]) -> Behavior {
        let ks = csp.ks;
        let table = csp
            .slot_of
            .iter()
            .map(|s| match *s {
                Slot::Eq => ks.eq_out,
                Slot::Var(v, false) => value[v as usize],
                Slot::Var(v, true) => ks.out_flip[value[v as usize] as usize],
            })
            .collect();
        Behavior::from_table(name, csp.m, keys.clone(), table)
    }
}

fn check_arity(m: usize, keys: &KeySpace, max: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "behaviors have arity at least 1".into(),
        ));
    }
    // beyond binary only tiny key spaces are feasible
    if m > max || (m > 2 && keys.tuple_count(m) > 1000) {
        return Err(Error::CapExceeded {
            cap: "behavior arity",
            limit: max,
            needed: m,
        });
    }
    Ok(())
}

/// All realizable complete behaviors of arity `m` over the constants,
/// ordered by table.
pub fn enumerate_behaviors(
    base: Base,
    m: usize,
    constants: &Constants,
    options: EnumOptions,
) -> Result<Vec<Behavior>> {
    let keys = KeySpace::get(base, constants)?;
    check_arity(m, &keys, options.max_arity)?;
    let mut csp = Csp::new(&keys, m);
    csp.add_realizability();
    let mut out = Vec::new();
    let max = options.max_results;
    let r = Solver::solve(&mut csp, options.budget, None, &mut |value| {
        out.push(value.to_vec());
        out.len() < max
    });
    if let Err(End::Budget) = r {
        return Err(Error::BudgetExhausted("behavior enumeration"));
    }
    let mut behaviors: Vec<Behavior> = out
        .iter()
        .enumerate()
        .map(|(i, v)| Solver::behavior(&csp, &keys, format!("b{i}"), v))
        .collect();
    behaviors.sort_by(|a, b| a.table.cmp(&b.table));
    for (i, b) in behaviors.iter_mut().enumerate() {
        b.name = format!("b{i}");
    }
    Ok(behaviors)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FindOutcome {
    /// A realizable behavior preserving everything and, when a target was
    /// given, violating it.
    Found(Box<Behavior>, Option<Box<Witness>>),
    /// No such behavior of this arity over these constants.
    None,
    Budget,
    Cancelled,
}

/// Searches for a realizable behavior preserving `preserve` and violating
/// `target`. All relations must be constant-free.
pub fn find_behavior(
    base: Base,
    m: usize,
    constants: &Constants,
    preserve: &[Relation],
    target: Option<&Relation>,
    budget: u64,
    cancel: Option<&AtomicBool>,
) -> Result<FindOutcome> {
    let keys = KeySpace::get(base, constants)?;
    check_arity(m, &keys, 2)?;
    for r in preserve.iter().chain(target) {
        if r.base() != base {
            return Err(Error::BaseMismatch {
                expected: base,
                found: r.base(),
            });
        }
        if !r.constants().is_empty() {
            return Err(Error::InvalidArgument(format!(
                "relation `{}` mentions constants; behavior search needs constant-free relations",
                r.name
            )));
        }
    }
    let mut csp = Csp::new(&keys, m);
    csp.add_realizability();
    for r in preserve {
        let refined = r.refine(constants)?;
        csp.add_preservation(r, &refined)?;
    }
    let mut left = budget;
    let solve = |csp: &mut Csp<'_>, left: &mut u64| -> std::result::Result<Option<Vec<u8>>, End> {
        let mut hit = None;
        let nodes = Solver::solve(csp, *left, cancel, &mut |v| {
            hit = Some(v.to_vec());
            false
        })?;
        *left = left.saturating_sub(nodes);
        Ok(hit)
    };
    let lift = |e: End| match e {
        End::Budget => FindOutcome::Budget,
        End::Cancelled => FindOutcome::Cancelled,
        End::Done => FindOutcome::None,
    };
    let Some(target) = target else {
        return Ok(match solve(&mut csp, &mut left) {
            Ok(Some(v)) => FindOutcome::Found(
                Box::new(Solver::behavior(&csp, &keys, "found".into(), &v)),
                None,
            ),
            Ok(None) => FindOutcome::None,
            Err(e) => lift(e),
        });
    };
    let refined = target.refine(constants)?;
    let members: Vec<&Type> = refined.types.iter().collect();
    if members.is_empty() {
        return Ok(FindOutcome::None);
    }
    let ti = csp.add_relation(target)?;
    // one search per candidate tuple of target members
    let mut tried: HashSet<Vec<Slot>> = HashSet::new();
    let mut idx = vec![0usize; m];
    loop {
        let inputs: Vec<&Type> = idx.iter().map(|&j| members[j]).collect();
        let slots = csp.tuple_slots(&inputs);
        if tried.insert(slots.clone()) {
            let before = csp.cons.len();
            csp.add(Kind::Outside(ti), target.arity(), slots);
            let added = csp.cons.len() > before;
            let r = solve(&mut csp, &mut left);
            if added {
                csp.remove_last();
            }
            match r {
                Ok(Some(v)) => {
                    let b = Solver::behavior(&csp, &keys, "found".into(), &v);
                    let inputs: Vec<Type> = inputs.into_iter().cloned().collect();
                    let output = super::apply_to_type(&b, &inputs)?;
                    let w = Witness {
                        behavior: b.clone(),
                        relation: target.name.clone(),
                        inputs,
                        output,
                    };
                    return Ok(FindOutcome::Found(Box::new(b), Some(Box::new(w))));
                }
                Ok(None) => {}
                Err(e) => return Ok(lift(e)),
            }
        }
        let mut k = 0;
        loop {
            if k == m {
                return Ok(FindOutcome::None);
            }
            idx[k] += 1;
            if idx[k] < members.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{catalog, catalog_in, is_realizable, preserves};
    use crate::formulas::{builtin, builtin_in};

    fn opts() -> EnumOptions {
        EnumOptions::default()
    }

    #[test]
    fn unary_order_behaviors_are_identity_reversal_constant() {
        let bs = enumerate_behaviors(Base::QOrder, 1, &Constants::none(), opts()).unwrap();
        assert_eq!(bs.len(), 3);
        for name in ["identity", "reversal", "constant"] {
            let c = catalog(name).unwrap();
            assert!(bs.contains(&c), "{name}");
        }
    }

    #[test]
    fn one_constant_brings_rotation() {
        let bs = enumerate_behaviors(Base::QOrder, 1, &Constants::new(1), opts()).unwrap();
        let rot = catalog("rotation").unwrap();
        assert!(bs.contains(&rot));
        assert!(bs.iter().all(is_realizable));
    }

    #[test]
    fn unary_graph_behaviors() {
        let bs = enumerate_behaviors(Base::RandomGraph, 1, &Constants::none(), opts()).unwrap();
        for name in ["identity", "constant", "e_E", "e_N", "minus"] {
            let c = catalog_in(name, Base::RandomGraph).unwrap();
            assert!(bs.contains(&c), "{name}");
        }
        // every map on {E, N} into {=, E, N}, except a single collapse
        // (collapsing one kind of pair but not the other is inconsistent
        // on a triangle with mixed edges)
        assert_eq!(bs.len(), 5);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        // brute force: every symmetric, diagonal-respecting table
        for (base, m) in [
            (Base::QOrder, 2),
            (Base::Equality, 2),
            (Base::RandomGraph, 2),
        ] {
            let ks = KeySpace::get(base, &Constants::none()).unwrap();
            let csp = Csp::new(&ks, m);
            let nvars = csp.rep.len();
            let nouts = ks.outs.len() as u64;
            let mut count = 0;
            for code in 0..nouts.pow(nvars as u32) {
                let mut c = code;
                let value: Vec<u8> = (0..nvars)
                    .map(|_| {
                        let v = (c % nouts) as u8;
                        c /= nouts;
                        v
                    })
                    .collect();
                let ok = (0..nvars).all(|v| csp.init_domain[v] >> value[v] & 1 == 1);
                if ok && is_realizable(&Solver::behavior(&csp, &ks, "x".into(), &value)) {
                    count += 1;
                }
            }
            let bs = enumerate_behaviors(base, m, &Constants::none(), opts()).unwrap();
            assert_eq!(bs.len(), count, "{base}");
        }
    }

    #[test]
    fn duals_of_enumerated_behaviors_are_enumerated() {
        for (base, k) in [(Base::QOrder, 0), (Base::QOrder, 1), (Base::RandomGraph, 0)] {
            let bs = enumerate_behaviors(base, 1, &Constants::new(k), opts()).unwrap();
            for b in &bs {
                assert!(bs.contains(&b.dual().unwrap()));
            }
        }
        let bs = enumerate_behaviors(Base::QOrder, 2, &Constants::none(), opts()).unwrap();
        for b in &bs {
            assert!(bs.contains(&b.dual().unwrap()));
        }
    }

    #[test]
    fn witness_search_for_betweenness_over_order() {
        let lt = builtin("lt").unwrap();
        let betw = builtin("Betw").unwrap();
        // nothing unary, with or without a constant
        for k in 0..2 {
            let r = find_behavior(
                Base::QOrder,
                1,
                &Constants::new(k),
                std::slice::from_ref(&lt),
                Some(&betw),
                1 << 24,
                None,
            )
            .unwrap();
            assert_eq!(r, FindOutcome::None);
        }
        let r = find_behavior(
            Base::QOrder,
            2,
            &Constants::new(1),
            std::slice::from_ref(&lt),
            Some(&betw),
            1 << 24,
            None,
        )
        .unwrap();
        let FindOutcome::Found(b, Some(w)) = r else {
            panic!("{r:?}")
        };
        assert!(is_realizable(&b));
        assert!(preserves(&b, &lt).unwrap());
        assert!(w.recheck(&betw));
    }

    #[test]
    fn no_witness_when_definable() {
        // ≠ is pp-definable from Betw, so nothing preserving Betw breaks it
        let betw = builtin("Betw").unwrap();
        let neq = builtin_in("neq", Base::QOrder).unwrap();
        for (m, k) in [(1, 0), (1, 1), (2, 0), (2, 1)] {
            let r = find_behavior(
                Base::QOrder,
                m,
                &Constants::new(k),
                std::slice::from_ref(&betw),
                Some(&neq),
                1 << 24,
                None,
            )
            .unwrap();
            assert_eq!(r, FindOutcome::None, "m={m} k={k}");
        }
    }
}
