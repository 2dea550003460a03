//! Deciding pp and ep definability.
//!
//! Two semi-procedures run side by side under iterative deepening:
//! - the closure side looks for an explicit derivation of the target;
//! - the witness side looks for a realizable canonical behavior (with a few
//!   constants) that preserves the language and breaks the target.
//!
//! A derivation proves definability, a witness refutes it, and the caps
//! are the only source of an `Inconclusive` answer.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};
use web_time::Instant;

use serde::Serialize;

use crate::canonical::{
    find_behavior, is_realizable, preserves, FindOutcome, Witness, WitnessJson,
};
use crate::error::{Error, Result};
use crate::formulas::{Language, PpFormula, Relation};
use crate::ppalg::{closure_search, evaluate_pp_capped, ClosureCaps, SearchOutcome};
use crate::typespace::{Base, Constants, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pp,
    Ep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DefinabilityCaps {
    /// Ceiling on variables per closure step.
    pub max_vars: usize,
    /// Arity of intermediate relations (defaults to the target's, at least 2).
    pub max_arity: Option<usize>,
    /// Ceiling on the arity of witness behaviors.
    pub max_behavior_arity: usize,
    /// Ceiling on the number of constants of witness behaviors.
    pub max_constants: usize,
    /// Closure joins allowed in the last round.
    pub closure_steps: usize,
    /// Search nodes per witness search.
    pub behavior_budget: u64,
    /// Run the two sides on separate threads.
    pub parallel: bool,
}

impl Default for DefinabilityCaps {
    fn default() -> Self {
        DefinabilityCaps {
            max_vars: 8,
            max_arity: None,
            max_behavior_arity: 2,
            max_constants: 2,
            closure_steps: 100_000,
            behavior_budget: 5_000_000,
            parallel: true,
        }
    }
}

impl DefinabilityCaps {
    fn validate(&self) -> Result<()> {
        if self.max_vars == 0 || self.max_arity == Some(0) || self.max_behavior_arity == 0 {
            return Err(Error::InvalidArgument(
                "definability caps must be positive".into(),
            ));
        }
        if self.max_behavior_arity > 2 {
            return Err(Error::CapExceeded {
                cap: "behavior arity",
                limit: 2,
                needed: self.max_behavior_arity,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    /// The target is the union of the disjuncts (one disjunct for pp).
    Definable {
        disjuncts: Vec<PpFormula>,
    },
    NotDefinable {
        witness: Box<Witness>,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug)]
pub struct DefinabilityVerdict {
    pub mode: Mode,
    pub verdict: Verdict,
    pub caps: DefinabilityCaps,
    /// One line per deepening round.
    pub log: Vec<String>,
    pub elapsed_ms: u128,
}

impl DefinabilityVerdict {
    pub fn label(&self) -> &'static str {
        match self.verdict {
            Verdict::Definable { .. } => "Definable",
            Verdict::NotDefinable { .. } => "NotDefinable",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn is_definable(&self) -> bool {
        matches!(self.verdict, Verdict::Definable { .. })
    }

    pub fn is_not_definable(&self) -> bool {
        matches!(self.verdict, Verdict::NotDefinable { .. })
    }

    /// The derivation as text, `|`-separated for ep.
    pub fn formula(&self) -> Option<String> {
        match &self.verdict {
            Verdict::Definable { disjuncts } if disjuncts.is_empty() => Some("false".into()),
            Verdict::Definable { disjuncts } => Some(
                disjuncts
                    .iter()
                    .map(|d| {
                        if disjuncts.len() > 1 && !d.exists.is_empty() {
                            format!("({d})")
                        } else {
                            d.to_string()
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" | "),
            ),
            _ => None,
        }
    }

    pub fn to_json(&self) -> VerdictJson {
        let (formula, witness, reason) = match &self.verdict {
            Verdict::Definable { .. } => (self.formula(), None, None),
            Verdict::NotDefinable { witness } => (None, Some(witness.to_json()), None),
            Verdict::Inconclusive { reason } => (None, None, Some(reason.clone())),
        };
        VerdictJson {
            mode: self.mode,
            verdict: self.label(),
            formula,
            witness,
            reason,
            caps: self.caps,
            log: self.log.clone(),
            elapsed_ms: self.elapsed_ms,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictJson {
    pub mode: Mode,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub caps: DefinabilityCaps,
    pub log: Vec<String>,
    pub elapsed_ms: u128,
}

/// Every constant configuration of `k` constants, up to the order of the
/// constants (all graphs on them for graph bases).
pub fn constant_configs(base: Base, k: usize) -> Vec<Constants> {
    if !base.has_edges() || k < 2 {
        return vec![Constants::new(k)];
    }
    let pairs: Vec<(usize, usize)> = (1..k).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
    (0..1u64 << pairs.len())
        .map(|mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, p)| *p)
                .collect();
            Constants::with_edges(k, &edges).expect("valid constants")
        })
        .collect()
}

struct Round {
    vars: usize,
    steps: usize,
    /// (m, k) pairs first tried in this round.
    behaviors: Vec<(usize, usize)>,
}

fn schedule(caps: &DefinabilityCaps, mode: Mode, min_vars: usize) -> Vec<Round> {
    let max_m = if mode == Mode::Ep {
        1
    } else {
        caps.max_behavior_arity
    };
    let mut rounds = Vec::new();
    let stage_vars = [
        min_vars.min(caps.max_vars),
        (min_vars + 2).min(caps.max_vars),
        caps.max_vars,
    ];
    let stage_steps = [
        caps.closure_steps / 50,
        caps.closure_steps / 5,
        caps.closure_steps,
    ];
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    for s in 0..3 {
        let mut behaviors = Vec::new();
        for m in 1..=max_m.min(s + 1) {
            for k in 0..=caps.max_constants.min(s) {
                if done.insert((m, k)) {
                    behaviors.push((m, k));
                }
            }
        }
        if s == 2 {
            for m in 1..=max_m {
                for k in 0..=caps.max_constants {
                    if done.insert((m, k)) {
                        behaviors.push((m, k));
                    }
                }
            }
        }
        rounds.push(Round {
            vars: stage_vars[s].max(1),
            steps: stage_steps[s].max(100),
            behaviors,
        });
    }
    rounds
}

enum SideResult {
    Found,
    Nothing,
    Stopped(String),
}

fn check_inputs(target: &Relation, lang: &Language) -> Result<()> {
    if target.base() != lang.base {
        return Err(Error::BaseMismatch {
            expected: lang.base,
            found: target.base(),
        });
    }
    if !target.constants().is_empty() && *target.constants() != lang.constants {
        return Err(Error::ConstantsMismatch);
    }
    Ok(())
}

/// Closure side of one round.
fn closure_side(
    mode: Mode,
    target: &Relation,
    lang: &Language,
    caps: ClosureCaps,
    cancel: &AtomicBool,
) -> Result<(SideResult, Option<Vec<PpFormula>>)> {
    match mode {
        Mode::Pp => {
            let (report, outcome) = closure_search(lang, caps, Some(target), Some(cancel))?;
            Ok(match outcome {
                SearchOutcome::Found(i) => {
                    (SideResult::Found, Some(report.entries[i].disjuncts.clone()))
                }
                SearchOutcome::Fixpoint => (SideResult::Nothing, None),
                SearchOutcome::Budget => (SideResult::Stopped("closure step budget".into()), None),
                SearchOutcome::Cancelled => (SideResult::Stopped("cancelled".into()), None),
            })
        }
        Mode::Ep => {
            let (report, outcome) = closure_search(lang, caps, None, Some(cancel))?;
            let aligned = if target.constants().is_empty() && !lang.constants.is_empty() {
                target.refine(&lang.constants)?
            } else {
                target.clone()
            };
            // greedy cover of the target by pp-definable subsets
            let mut covered: BTreeSet<Type> = BTreeSet::new();
            let mut disjuncts = Vec::new();
            let mut parts: Vec<_> = report
                .entries
                .iter()
                .filter(|e| {
                    e.arity() == target.arity() && e.relation.types.is_subset(&aligned.types)
                })
                .collect();
            parts.sort_by_key(|e| std::cmp::Reverse(e.relation.len()));
            for e in parts {
                if !e.relation.types.is_subset(&covered) {
                    covered.extend(e.relation.types.iter().cloned());
                    disjuncts.push(e.disjuncts[0].clone());
                }
            }
            if covered == aligned.types {
                return Ok((SideResult::Found, Some(disjuncts)));
            }
            Ok(match outcome {
                SearchOutcome::Fixpoint => (SideResult::Nothing, None),
                SearchOutcome::Cancelled => (SideResult::Stopped("cancelled".into()), None),
                _ => (SideResult::Stopped("closure step budget".into()), None),
            })
        }
    }
}

/// Witness side of one round.
fn witness_side(
    target: &Relation,
    lang: &Language,
    round: &Round,
    budget: u64,
    cancel: &AtomicBool,
) -> Result<(SideResult, Option<Witness>)> {
    if !lang.constants.is_empty() || !target.constants().is_empty() {
        return Ok((
            SideResult::Stopped("witness search needs constant-free relations".into()),
            None,
        ));
    }
    let mut stopped = None;
    for &(m, k) in &round.behaviors {
        for constants in constant_configs(lang.base, k) {
            if lang.base.max_points() < 3 + k {
                continue;
            }
            let outcome = find_behavior(
                lang.base,
                m,
                &constants,
                &lang.relations,
                Some(target),
                budget,
                Some(cancel),
            );
            match outcome {
                Ok(FindOutcome::Found(_, Some(w))) => return Ok((SideResult::Found, Some(*w))),
                Ok(FindOutcome::Found(_, None)) | Ok(FindOutcome::None) => {}
                Ok(FindOutcome::Budget) => {
                    stopped = Some(format!("behavior budget at m={m}, k={k}"))
                }
                Ok(FindOutcome::Cancelled) => {
                    return Ok((SideResult::Stopped("cancelled".into()), None))
                }
                Err(Error::CapExceeded { .. }) => {
                    stopped = Some(format!("key space too large at m={m}, k={k}"))
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(match stopped {
        Some(s) => (SideResult::Stopped(s), None),
        None => (SideResult::Nothing, None),
    })
}

fn decide(
    mode: Mode,
    target: &Relation,
    lang: &Language,
    caps: DefinabilityCaps,
) -> Result<DefinabilityVerdict> {
    caps.validate()?;
    check_inputs(target, lang)?;
    let start = Instant::now();
    let max_arity = caps.max_arity.unwrap_or(target.arity().max(2));
    let min_vars = target.arity().max(lang.max_arity()).max(3);
    let mut log = Vec::new();
    let mut last_reason = String::new();
    for round in schedule(&caps, mode, min_vars) {
        let mut ccaps = ClosureCaps::new(round.vars, max_arity.max(target.arity()));
        ccaps.max_steps = round.steps;
        let cancel_closure = AtomicBool::new(false);
        let cancel_witness = AtomicBool::new(false);
        let run_closure = || {
            let r = closure_side(mode, target, lang, ccaps, &cancel_closure);
            if matches!(r, Ok((SideResult::Found, _))) {
                cancel_witness.store(true, Ordering::Relaxed);
            }
            r
        };
        let run_witness = || {
            let r = witness_side(target, lang, &round, caps.behavior_budget, &cancel_witness);
            if matches!(r, Ok((SideResult::Found, _))) {
                cancel_closure.store(true, Ordering::Relaxed);
            }
            r
        };
        let (c, w) = if caps.parallel {
            std::thread::scope(|s| {
                let h = s.spawn(run_witness);
                let c = run_closure();
                (c, h.join().expect("witness search panicked"))
            })
        } else {
            // the witness side is usually much cheaper; the two sides never
            // both succeed, so the order does not change the verdict
            let w = run_witness();
            let c = if matches!(w, Ok((SideResult::Found, _))) {
                Ok((SideResult::Stopped("witness won".into()), None))
            } else {
                run_closure()
            };
            (c, w)
        };
        let (c, derivation) = c?;
        let (w, witness) = w?;
        let describe = |r: &SideResult| match r {
            SideResult::Found => "found".to_string(),
            SideResult::Nothing => "nothing".to_string(),
            SideResult::Stopped(s) => format!("stopped ({s})"),
        };
        log.push(format!(
            "vars<={} steps<={} behaviors {:?}: closure {}, witness {}",
            round.vars,
            round.steps,
            round.behaviors,
            describe(&c),
            describe(&w)
        ));
        // the closure side wins ties
        if let (SideResult::Found, Some(disjuncts)) = (&c, derivation) {
            return Ok(DefinabilityVerdict {
                mode,
                verdict: Verdict::Definable { disjuncts },
                caps,
                log,
                elapsed_ms: start.elapsed().as_millis(),
            });
        }
        if let (SideResult::Found, Some(witness)) = (&w, witness) {
            return Ok(DefinabilityVerdict {
                mode,
                verdict: Verdict::NotDefinable {
                    witness: Box::new(witness),
                },
                caps,
                log,
                elapsed_ms: start.elapsed().as_millis(),
            });
        }
        last_reason = match (&c, &w) {
            (SideResult::Nothing, _) => format!(
                "closure reached a fixpoint at {} variables without the target; no witness within m<={}, k<={}",
                round.vars, caps.max_behavior_arity, caps.max_constants
            ),
            _ => "caps reached on both sides".to_string(),
        };
    }
    Ok(DefinabilityVerdict {
        mode,
        verdict: Verdict::Inconclusive {
            reason: last_reason,
        },
        caps,
        log,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Primitive positive definability of `target` from `lang`.
pub fn decide_pp(
    target: &Relation,
    lang: &Language,
    caps: DefinabilityCaps,
) -> Result<DefinabilityVerdict> {
    decide(Mode::Pp, target, lang, caps)
}

/// Existential positive definability; witnesses are unary behaviors.
pub fn decide_ep(
    target: &Relation,
    lang: &Language,
    caps: DefinabilityCaps,
) -> Result<DefinabilityVerdict> {
    decide(Mode::Ep, target, lang, caps)
}

/// Re-checks a verdict from scratch: derivations are re-evaluated,
/// witnesses re-verified (realizable, language preserved, target broken).
pub fn verify_verdict(v: &DefinabilityVerdict, target: &Relation, lang: &Language) -> bool {
    match &v.verdict {
        Verdict::Definable { disjuncts } => {
            if v.mode == Mode::Pp && disjuncts.len() != 1 {
                return false;
            }
            let mut types = BTreeSet::new();
            let mut space = None;
            for d in disjuncts {
                let Ok(r) = evaluate_pp_capped(d, lang, 16) else {
                    return false;
                };
                let r = if r.constants().is_empty() && !lang.constants.is_empty() {
                    match r.refine(&lang.constants) {
                        Ok(r) => r,
                        Err(_) => return false,
                    }
                } else {
                    r
                };
                if r.arity() != target.arity() {
                    return false;
                }
                space = Some(r.space.clone());
                types.extend(r.types);
            }
            let Some(space) = space.or_else(|| Some(target.space.clone())) else {
                return false;
            };
            let got = Relation {
                name: String::new(),
                space,
                types,
            };
            got.equivalent(target).unwrap_or(false)
        }
        Verdict::NotDefinable { witness } => {
            let b = &witness.behavior;
            (v.mode == Mode::Pp || b.arity == 1)
                && is_realizable(b)
                && lang
                    .relations
                    .iter()
                    .all(|r| preserves(b, r).unwrap_or(false))
                && witness.recheck(target)
        }
        Verdict::Inconclusive { .. } => true,
    }
}
