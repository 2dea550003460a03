//! Depth-first search over partial types.
//!
//! Points are placed one variable at a time (constants first, then free
//! variables, then existential ones). After each placement every constraint
//! is checked against the projection of its relation onto the arguments
//! placed so far, so dead branches are cut as early as the relations allow.
//!
//! Satisfiability over the infinite base is the same as existence of a
//! consistent complete type: every finite linear order, graph, ordered
//! graph or set embeds into the base, so any type is realized.

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::formulas::Relation;
use crate::typespace::{Base, Constants, Type, TypeSpace};

/// An atom of a problem: relation applied to problem points (variables are
/// `0..nvars`, constant `i` is `nvars + i`).
#[derive(Clone, Debug)]
pub(crate) struct Constraint<'a> {
    pub rel: &'a Relation,
    pub args: Vec<usize>,
}

pub(crate) struct Problem<'a> {
    pub base: Base,
    pub constants: Constants,
    pub nvars: usize,
    /// Variables `0..nfree` are free, the rest are existential.
    pub nfree: usize,
    pub constraints: Vec<Constraint<'a>>,
}

struct Check {
    /// Construction-order points to restrict the partial type to.
    points: Vec<usize>,
    allowed: HashSet<Type>,
}

pub(crate) struct Plan {
    base: Base,
    seed: Type,
    nconst: usize,
    nvars: usize,
    nfree: usize,
    /// Variable placed at each step.
    order: Vec<usize>,
    /// Checks to run right after step `s` (index `s` = after placing `s`
    /// variables, so index 0 runs on the constants alone).
    checks: Vec<Vec<Check>>,
    /// Construction points of the free variables in their own order,
    /// followed by the constants when the output keeps them.
    out_layout: Vec<usize>,
    out_space: TypeSpace,
}

pub(crate) fn default_var_cap(base: Base) -> usize {
    if base.has_edges() {
        8
    } else {
        10
    }
}

impl<'a> Problem<'a> {
    fn validate(&self, max_vars: usize) -> Result<()> {
        if self.nvars > max_vars {
            return Err(Error::CapExceeded {
                cap: "pp variables",
                limit: max_vars,
                needed: self.nvars,
            });
        }
        let points = self.nvars + self.constants.count();
        if points > self.base.max_points() {
            return Err(Error::CapExceeded {
                cap: "points",
                limit: self.base.max_points(),
                needed: points,
            });
        }
        for c in &self.constraints {
            if c.rel.base() != self.base {
                return Err(Error::BaseMismatch {
                    expected: self.base,
                    found: c.rel.base(),
                });
            }
            if c.rel.arity() != c.args.len() {
                return Err(Error::ArityMismatch {
                    expected: c.rel.arity(),
                    found: c.args.len(),
                });
            }
            if !c.rel.constants().is_empty() && *c.rel.constants() != self.constants {
                return Err(Error::ConstantsMismatch);
            }
            if let Some(&p) = c.args.iter().find(|&&p| p >= points) {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    len: points,
                });
            }
        }
        Ok(())
    }

    /// Greedy placement: free variables before existential ones; within a
    /// group prefer variables that complete constraints, then ones linked to
    /// placed variables.
    fn placement(&self) -> Vec<usize> {
        let mut placed = vec![false; self.nvars];
        let mut order = Vec::with_capacity(self.nvars);
        let is_var = |p: usize| p < self.nvars;
        for group in [0..self.nfree, self.nfree..self.nvars] {
            let mut left: Vec<usize> = group.collect();
            while !left.is_empty() {
                let score = |v: usize| -> (usize, usize, usize) {
                    let mut complete = 0;
                    let mut linked = 0;
                    for c in &self.constraints {
                        if !c.args.contains(&v) {
                            continue;
                        }
                        let open = c
                            .args
                            .iter()
                            .filter(|&&p| is_var(p) && p != v && !placed[p])
                            .count();
                        if open == 0 {
                            complete += 1;
                        }
                        linked += c.args.iter().filter(|&&p| !is_var(p) || placed[p]).count();
                    }
                    (complete, linked, usize::MAX - v)
                };
                let (i, _) = left
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, &v)| score(v))
                    .unwrap();
                let v = left.remove(i);
                placed[v] = true;
                order.push(v);
            }
        }
        order
    }

    pub fn plan(&self, max_vars: usize, keep_constants: bool) -> Result<Plan> {
        self.validate(max_vars)?;
        let c = self.constants.count();
        let order = self.placement();
        let mut step_of = vec![0usize; self.nvars];
        for (s, &v) in order.iter().enumerate() {
            step_of[v] = s + 1;
        }
        // problem point -> construction point, and the step that places it
        let cons = |p: usize| {
            if p < self.nvars {
                c + step_of[p] - 1
            } else {
                p - self.nvars
            }
        };
        let ready = |p: usize| if p < self.nvars { step_of[p] } else { 0 };
        let mut checks: Vec<Vec<Check>> = (0..=self.nvars).map(|_| Vec::new()).collect();
        for con in &self.constraints {
            // problem points the relation's types are laid out on
            let mut pts = con.args.clone();
            if !con.rel.constants().is_empty() {
                pts.extend(self.nvars..self.nvars + c);
            }
            let mut steps: Vec<usize> = pts.iter().map(|&p| ready(p)).collect();
            steps.sort_unstable();
            steps.dedup();
            if steps.is_empty() {
                steps.push(0);
            }
            for s in steps {
                let positions: Vec<usize> =
                    (0..pts.len()).filter(|&i| ready(pts[i]) <= s).collect();
                let allowed: HashSet<Type> = con
                    .rel
                    .types
                    .iter()
                    .map(|t| t.restrict(self.base, &positions))
                    .collect();
                checks[s].push(Check {
                    points: positions.iter().map(|&i| cons(pts[i])).collect(),
                    allowed,
                });
            }
        }
        let mut out_layout: Vec<usize> = (0..self.nfree).map(|v| c + step_of[v] - 1).collect();
        let out_constants = if keep_constants {
            out_layout.extend(0..c);
            self.constants.clone()
        } else {
            Constants::none()
        };
        Ok(Plan {
            base: self.base,
            seed: self.constants.config(),
            nconst: c,
            nvars: self.nvars,
            nfree: self.nfree,
            order,
            checks,
            out_layout,
            out_space: TypeSpace {
                base: self.base,
                arity: self.nfree,
                constants: out_constants,
            },
        })
    }
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

impl Plan {
    fn passes(&self, t: &Type, step: usize) -> bool {
        self.checks[step]
            .iter()
            .all(|ch| ch.allowed.contains(&t.restrict(self.base, &ch.points)))
    }

    /// First completion of `t` (placed up to `step`), if any.
    fn complete(&self, t: &Type, step: usize, cancel: Option<&AtomicBool>) -> Option<Type> {
        if step == self.nvars {
            return Some(t.clone());
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return None;
        }
        let mut found = None;
        t.for_each_extension(self.base, |child| {
            if self.passes(&child, step + 1) {
                if let Some(full) = self.complete(&child, step + 1, cancel) {
                    found = Some(full);
                    return false;
                }
            }
            true
        });
        found
    }

    fn free_dfs(
        &self,
        t: &Type,
        step: usize,
        cancel: Option<&AtomicBool>,
        emit: &mut dyn FnMut(&Type, Type) -> Flow,
    ) -> bool {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return false;
        }
        if step == self.nfree {
            if let Some(full) = self.complete(t, step, cancel) {
                return matches!(emit(t, full), Flow::Continue);
            }
            return true;
        }
        t.for_each_extension(self.base, |child| {
            if self.passes(&child, step + 1) {
                self.free_dfs(&child, step + 1, cancel, emit)
            } else {
                true
            }
        })
    }

    /// Runs the search; `emit` receives the partial type on constants and
    /// free variables plus one full witness.
    pub fn run(&self, cancel: Option<&AtomicBool>, emit: &mut dyn FnMut(&Type, Type) -> Flow) {
        if !self.passes(&self.seed, 0) {
            return;
        }
        self.free_dfs(&self.seed, 0, cancel, emit);
    }

    /// The projected relation on the free variables.
    pub fn relation(&self, name: &str, cancel: Option<&AtomicBool>) -> Relation {
        let mut types = BTreeSet::new();
        self.run(cancel, &mut |t, _| {
            types.insert(t.restrict(self.base, &self.out_layout));
            Flow::Continue
        });
        Relation {
            name: name.to_string(),
            space: self.out_space.clone(),
            types,
        }
    }

    /// Reorders a construction-order type into problem order
    /// (variables, then constants).
    pub fn to_problem_order(&self, t: &Type) -> Type {
        let mut layout = vec![0usize; self.nvars];
        for (s, &v) in self.order.iter().enumerate() {
            layout[v] = self.nconst + s;
        }
        layout.extend(0..self.nconst);
        t.restrict(self.base, &layout)
    }
}
