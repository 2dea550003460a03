//! Classification of reducts and of their CSP complexity.
//!
//! The first-order classifiers only test closure of type sets under the
//! generating permutations, acting on types. The CSP classifiers combine
//! catalog behaviors with the definability engine.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::canonical::{catalog_in, preserves, violates, Behavior, WitnessJson};
use crate::definability::{decide_pp, DefinabilityCaps, Verdict};
use crate::error::{Error, Result};
use crate::formulas::{builtin_in, Language, Relation};
use crate::ppalg::evaluate_pp;
use crate::typespace::{Base, Type, TypeJson};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Closure of one relation under one type-level action.
    Closure {
        relation: String,
        test: &'static str,
        closed: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        counterexample: Option<TypeJson>,
    },
    /// A catalog behavior and whether it preserves the whole language.
    Behavior {
        behavior: String,
        preserves_all: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        broken: Option<String>,
    },
    /// A pp definition of a hard relation.
    Derivation { hard: String, formula: String },
    /// A polymorphism showing a hard relation is not pp-definable.
    Refutation {
        hard: String,
        witness: Box<WitnessJson>,
    },
    /// A conclusion taken from a classification theorem rather than computed.
    Inferred { note: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifierReport<V> {
    pub verdict: V,
    pub evidence: Vec<Evidence>,
    pub caveats: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CameronClass {
    Order,
    Betw,
    Cycl,
    Sep,
    Equality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThomasClass {
    Graph,
    Switch,
    Minus,
    Both,
    Equality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EqualityCsp {
    #[serde(rename = "P-const")]
    PConst,
    #[serde(rename = "P-injective")]
    PInjective,
    #[serde(rename = "NPc")]
    NpComplete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum TemporalCsp {
    P {
        evidence: String,
    },
    #[serde(rename = "NPc")]
    NpComplete {
        hard: String,
    },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphMonoidCase {
    /// Those of `constant`, `e_E`, `e_N` that preserve every relation.
    pub preserving: Vec<String>,
    /// True when none does, so the remaining case of the theorem applies.
    pub residual: bool,
}

/// Restricted growth string of a type's equality pattern.
pub fn equality_pattern(t: &Type) -> Vec<u8> {
    let mut seen: Vec<u8> = Vec::new();
    t.classes()
        .iter()
        .map(|c| match seen.iter().position(|s| s == c) {
            Some(i) => i as u8,
            None => {
                seen.push(*c);
                (seen.len() - 1) as u8
            }
        })
        .collect()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Number of types of `base` sharing one equality pattern with `blocks` classes.
fn types_per_pattern(base: Base, blocks: usize) -> usize {
    let edges = 1usize << (blocks * blocks.saturating_sub(1) / 2);
    match base {
        Base::Equality => 1,
        Base::QOrder => factorial(blocks),
        Base::RandomGraph => edges,
        Base::OrderedRandomGraph => factorial(blocks) * edges,
    }
}

/// First type of a pattern class that is only partly in `r`, if any.
fn pattern_counterexample(r: &Relation) -> Option<Type> {
    let mut groups: BTreeMap<Vec<u8>, Vec<&Type>> = BTreeMap::new();
    for t in &r.types {
        groups.entry(equality_pattern(t)).or_default().push(t);
    }
    groups.into_values().find_map(|ts| {
        let blocks = ts[0].class_count();
        (ts.len() != types_per_pattern(r.base(), blocks)).then(|| ts[0].clone())
    })
}

/// Whether membership in `r` depends only on the equality pattern.
pub fn is_equality_determined(r: &Relation) -> bool {
    r.constants().is_empty() && pattern_counterexample(r).is_none()
}

/// The same relation read over the bare set; errors if `r` is not
/// equality-determined.
pub fn to_equality(r: &Relation) -> Result<Relation> {
    if r.base() == Base::Equality {
        return Ok(r.clone());
    }
    if !is_equality_determined(r) {
        return Err(Error::InvalidArgument(format!(
            "relation `{}` is not determined by its equality pattern",
            r.name
        )));
    }
    let space = crate::typespace::TypeSpace::new(Base::Equality, r.arity());
    let types = r
        .types
        .iter()
        .map(|t| Type::from_partition(Base::Equality, &equality_pattern(t), &[]))
        .collect::<Result<_>>()?;
    Relation::new(r.name.clone(), space, types)
}

/// Type-level closure test; returns a member whose image falls outside.
fn closure_counterexample(r: &Relation, images: impl Fn(&Type) -> Vec<Type>) -> Option<Type> {
    r.types
        .iter()
        .find(|t| images(t).iter().any(|u| !r.contains(u)))
        .cloned()
}

fn closure_evidence(
    evidence: &mut Vec<Evidence>,
    r: &Relation,
    test: &'static str,
    images: impl Fn(&Type) -> Vec<Type>,
) -> bool {
    let cx = closure_counterexample(r, images);
    let closed = cx.is_none();
    evidence.push(Evidence::Closure {
        relation: r.name.clone(),
        test,
        closed,
        counterexample: cx.map(|t| TypeJson::from_type(r.base(), &t)),
    });
    closed
}

fn require(lang: &Language, base: Base) -> Result<()> {
    if lang.base != base {
        return Err(Error::BaseMismatch {
            expected: base,
            found: lang.base,
        });
    }
    if !lang.constants.is_empty() {
        return Err(Error::InvalidArgument(
            "the language must not have constants".into(),
        ));
    }
    Ok(())
}

fn pattern_evidence(evidence: &mut Vec<Evidence>, r: &Relation) -> bool {
    let cx = pattern_counterexample(r);
    let closed = cx.is_none();
    evidence.push(Evidence::Closure {
        relation: r.name.clone(),
        test: "all permutations",
        closed,
        counterexample: cx.map(|t| TypeJson::from_type(r.base(), &t)),
    });
    closed
}

/// The first-order class of a reduct of the rational order.
///
/// Rotation acts on a weak order by moving a prefix of blocks to the end.
/// A permutation realizing it with an irrational cut never splits a block,
/// so these are all the images of a type.
pub fn cameron_class(lang: &Language) -> Result<ClassifierReport<CameronClass>> {
    require(lang, Base::QOrder)?;
    let mut evidence = Vec::new();
    let (mut rev, mut rot, mut sym) = (true, true, true);
    for r in &lang.relations {
        rev &= closure_evidence(&mut evidence, r, "reversal", |t| vec![t.reversed()]);
        rot &= closure_evidence(&mut evidence, r, "rotation", |t| {
            (1..t.class_count()).map(|k| t.rotated(k)).collect()
        });
        sym &= pattern_evidence(&mut evidence, r);
    }
    let verdict = match (sym, rev, rot) {
        (true, _, _) => CameronClass::Equality,
        (_, true, true) => CameronClass::Sep,
        (_, true, false) => CameronClass::Betw,
        (_, false, true) => CameronClass::Cycl,
        (_, false, false) => CameronClass::Order,
    };
    Ok(ClassifierReport {
        verdict,
        evidence,
        caveats: vec![],
    })
}

/// The first-order class of a reduct of the random graph. Switching is
/// tested about every set of classes, which is what the group generated by
/// switching at single vertices does to types.
pub fn thomas_class(lang: &Language) -> Result<ClassifierReport<ThomasClass>> {
    require(lang, Base::RandomGraph)?;
    let mut evidence = Vec::new();
    let (mut sw, mut minus, mut sym) = (true, true, true);
    for r in &lang.relations {
        sw &= closure_evidence(&mut evidence, r, "switching", |t| {
            (1..1u32 << t.class_count())
                .map(|s| t.switched(s))
                .collect()
        });
        minus &= closure_evidence(&mut evidence, r, "complement", |t| vec![t.complemented()]);
        sym &= pattern_evidence(&mut evidence, r);
    }
    let verdict = match (sym, sw, minus) {
        (true, _, _) => ThomasClass::Equality,
        (_, true, true) => ThomasClass::Both,
        (_, true, false) => ThomasClass::Switch,
        (_, false, true) => ThomasClass::Minus,
        (_, false, false) => ThomasClass::Graph,
    };
    Ok(ClassifierReport {
        verdict,
        evidence,
        caveats: vec![],
    })
}

fn behavior_evidence(b: &Behavior, lang: &Language) -> Result<(bool, Evidence)> {
    let mut broken = None;
    for r in &lang.relations {
        if !preserves(b, r)? {
            broken = Some(r.name.clone());
            break;
        }
    }
    Ok((
        broken.is_none(),
        Evidence::Behavior {
            behavior: b.name.clone(),
            preserves_all: broken.is_none(),
            broken,
        },
    ))
}

/// Which of the constant map, the clique embedding and the independent-set
/// embedding are endomorphisms of a random graph reduct.
pub fn graph_monoid_case(lang: &Language) -> Result<ClassifierReport<GraphMonoidCase>> {
    require(lang, Base::RandomGraph)?;
    let mut evidence = Vec::new();
    let mut preserving = Vec::new();
    for name in ["constant", "e_E", "e_N"] {
        let b = catalog_in(name, Base::RandomGraph)?;
        let (ok, ev) = behavior_evidence(&b, lang)?;
        evidence.push(ev);
        if ok {
            preserving.push(name.to_string());
        }
    }
    let residual = preserving.is_empty();
    if residual {
        evidence.push(Evidence::Inferred {
            note:
                "no catalog endomorphism applies, so automorphisms are dense in the endomorphisms"
                    .into(),
        });
    }
    Ok(ClassifierReport {
        verdict: GraphMonoidCase {
            preserving,
            residual,
        },
        evidence,
        caveats: if residual {
            vec![
                "the residual case follows from the classification theorem and is not computed"
                    .into(),
            ]
        } else {
            vec![]
        },
    })
}

/// CSP complexity of a language whose relations only see equalities.
pub fn equality_csp(lang: &Language) -> Result<ClassifierReport<EqualityCsp>> {
    if !lang.constants.is_empty() {
        return Err(Error::InvalidArgument(
            "the language must not have constants".into(),
        ));
    }
    let mut eq = Language::new(lang.name.clone(), Base::Equality);
    for r in &lang.relations {
        eq.add(to_equality(r)?)?;
    }
    let mut evidence = Vec::new();
    let (c, ev) = behavior_evidence(&catalog_in("constant", Base::Equality)?, &eq)?;
    evidence.push(ev);
    if c {
        return Ok(ClassifierReport {
            verdict: EqualityCsp::PConst,
            evidence,
            caveats: vec![],
        });
    }
    let (i, ev) = behavior_evidence(
        &catalog_in("binary_injection_equality", Base::Equality)?,
        &eq,
    )?;
    evidence.push(ev);
    if i {
        return Ok(ClassifierReport {
            verdict: EqualityCsp::PInjective,
            evidence,
            caveats: vec![],
        });
    }
    evidence.push(Evidence::Inferred {
        note: "neither a constant endomorphism nor a binary injective polymorphism; \
               NAE on {0,1} then has a pp-interpretation (through E6)"
            .into(),
    });
    Ok(ClassifierReport {
        verdict: EqualityCsp::NpComplete,
        evidence,
        caveats: vec![],
    })
}

/// The six temporal relations whose pp-definability makes a temporal CSP hard.
/// Ordered by the cost of deciding them.
pub const HARD_TEMPORAL: [&str; 6] = ["Betw", "Cycl", "T3", "negT3", "Sep", "E6"];

const TRACTABLE_TEMPORAL: [&str; 4] = ["lex", "dual_lex", "pp", "dual_pp"];

/// CSP complexity of a reduct of the rational order.
///
/// NPc needs a pp definition of one of [`HARD_TEMPORAL`]. P needs a constant
/// endomorphism or a proof that none of the six is pp-definable; the
/// dichotomy then yields one of the tractable polymorphisms. The catalog
/// behavior preserving the language is reported as evidence.
pub fn temporal_csp(
    lang: &Language,
    caps: DefinabilityCaps,
) -> Result<ClassifierReport<TemporalCsp>> {
    require(lang, Base::QOrder)?;
    let mut evidence = Vec::new();
    let mut caveats = Vec::new();
    let (c, ev) = behavior_evidence(&catalog_in("constant", Base::QOrder)?, lang)?;
    evidence.push(ev);
    if c {
        return Ok(ClassifierReport {
            verdict: TemporalCsp::P {
                evidence: "constant".into(),
            },
            evidence,
            caveats,
        });
    }
    let hard: Vec<Relation> = HARD_TEMPORAL
        .iter()
        .map(|n| builtin_in(n, Base::QOrder))
        .collect::<Result<_>>()?;

    // a hard relation that is already in the language
    for h in &hard {
        for r in &lang.relations {
            if r.arity() == h.arity() && r.equivalent(h)? {
                evidence.push(Evidence::Derivation {
                    hard: h.name.clone(),
                    formula: format!(
                        "{}({})",
                        r.name,
                        crate::formulas::default_vars(r.arity()).join(",")
                    ),
                });
                return Ok(ClassifierReport {
                    verdict: TemporalCsp::NpComplete {
                        hard: h.name.clone(),
                    },
                    evidence,
                    caveats,
                });
            }
        }
    }

    let mut tractable = Vec::new();
    for name in TRACTABLE_TEMPORAL {
        let b = catalog_in(name, Base::QOrder)?;
        let (ok, ev) = behavior_evidence(&b, lang)?;
        evidence.push(ev);
        if ok {
            tractable.push(b);
        }
    }

    let mut refuted = 0;
    for h in &hard {
        // a preserving catalog behavior that breaks h settles it cheaply
        let mut witness = None;
        for b in &tractable {
            if let Some(w) = violates(b, h)? {
                witness = Some(w);
                break;
            }
        }
        if let Some(w) = witness {
            evidence.push(Evidence::Refutation {
                hard: h.name.clone(),
                witness: Box::new(w.to_json()),
            });
            refuted += 1;
            continue;
        }
        let v = decide_pp(h, lang, caps)?;
        match v.verdict {
            Verdict::Definable { .. } => {
                evidence.push(Evidence::Derivation {
                    hard: h.name.clone(),
                    formula: v.formula().expect("definable"),
                });
                return Ok(ClassifierReport {
                    verdict: TemporalCsp::NpComplete {
                        hard: h.name.clone(),
                    },
                    evidence,
                    caveats,
                });
            }
            Verdict::NotDefinable { witness } => {
                evidence.push(Evidence::Refutation {
                    hard: h.name.clone(),
                    witness: Box::new(witness.to_json()),
                });
                refuted += 1;
            }
            Verdict::Inconclusive { reason } => caveats.push(format!("{}: {reason}", h.name)),
        }
    }
    let verdict = if refuted == hard.len() {
        let evidence_name = tractable
            .first()
            .map(|b| b.name.clone())
            .unwrap_or_else(|| "uncataloged tractable polymorphism".into());
        if tractable.is_empty() {
            caveats.push("none of the cataloged tractable behaviors applies".into());
        }
        TemporalCsp::P {
            evidence: evidence_name,
        }
    } else {
        TemporalCsp::Inconclusive
    };
    Ok(ClassifierReport {
        verdict,
        evidence,
        caveats,
    })
}

/// Re-evaluates the derivation of an NPc verdict against its hard relation.
pub fn recheck_derivation(lang: &Language, hard: &str, formula: &str) -> Result<bool> {
    let h = builtin_in(hard, lang.base)?;
    let vars = crate::formulas::default_vars(h.arity());
    let f = crate::formulas::parse_pp_with_free(formula, lang, &vars)?;
    let r = evaluate_pp(&f, lang)?;
    r.equivalent(&h)
}
