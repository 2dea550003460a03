//! Exact evaluation of primitive-positive formulas, CSP solving and bounded
//! pp/ep closures.

mod closure;
mod engine;

pub(crate) use closure::{closure_search, SearchOutcome};
pub use closure::{ep_closure, pp_closure, ClosureCaps, ClosureEntry, ClosureReport};
pub(crate) use engine::{default_var_cap, Constraint, Flow, Problem};

use std::collections::BTreeMap;
use std::sync::atomic::AtomicBool;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{builtin_in, Language, PpFormula, PpTerm, Relation};
use crate::typespace::{Base, Constants, FiniteStructure, Type, TypeJson};

/// Default bound on the number of variables of an evaluated formula.
pub fn default_max_vars(base: Base) -> usize {
    default_var_cap(base)
}

fn point(f_vars: usize, t: &PpTerm) -> usize {
    match t {
        PpTerm::Var(i) => *i,
        PpTerm::Const(c) => f_vars + c,
    }
}

/// Resolves the atoms of a pp formula against a language (`=` is equality).
pub(crate) fn resolve_atoms(f: &PpFormula, lang: &Language) -> Result<(Vec<Relation>, bool)> {
    let mut rels = Vec::with_capacity(f.atoms.len());
    let mut uses_constants = f.max_constant().is_some();
    for a in &f.atoms {
        let r = if a.rel == "=" {
            builtin_in("eq", lang.base)?
        } else {
            lang.get(&a.rel)
                .cloned()
                .ok_or_else(|| Error::UnknownRelation(a.rel.clone()))?
        };
        if r.arity() != a.args.len() {
            return Err(Error::ArityMismatch {
                expected: r.arity(),
                found: a.args.len(),
            });
        }
        uses_constants |= !r.constants().is_empty();
        rels.push(r);
    }
    if let Some(c) = f.max_constant() {
        if c >= lang.constants.count() {
            return Err(Error::InvalidConstants(format!(
                "constant {c} is not declared"
            )));
        }
    }
    Ok((rels, uses_constants))
}

/// Evaluates `f` under a variable cap; the result lives over the language's
/// constants when the formula mentions any, over the plain space otherwise.
pub fn evaluate_pp_capped(f: &PpFormula, lang: &Language, max_vars: usize) -> Result<Relation> {
    evaluate_pp_impl(f, lang, max_vars, None)
}

pub(crate) fn evaluate_pp_impl(
    f: &PpFormula,
    lang: &Language,
    max_vars: usize,
    cancel: Option<&AtomicBool>,
) -> Result<Relation> {
    let (rels, uses_constants) = resolve_atoms(f, lang)?;
    let constants = if uses_constants {
        lang.constants.clone()
    } else {
        Constants::none()
    };
    let n = f.var_count();
    let problem = Problem {
        base: lang.base,
        constants,
        nvars: n,
        nfree: f.free.len(),
        constraints: f
            .atoms
            .iter()
            .zip(&rels)
            .map(|(a, r)| Constraint {
                rel: r,
                args: a.args.iter().map(|t| point(n, t)).collect(),
            })
            .collect(),
    };
    let plan = problem.plan(max_vars, uses_constants)?;
    Ok(plan.relation("", cancel))
}

/// Evaluates a pp formula exactly, with the default variable cap.
pub fn evaluate_pp(f: &PpFormula, lang: &Language) -> Result<Relation> {
    evaluate_pp_capped(f, lang, default_var_cap(lang.base))
}

/// A CSP instance: a pp sentence over a language.
#[derive(Clone, Debug)]
pub struct CspInstance {
    pub language: Language,
    pub vars: Vec<String>,
    pub constraints: Vec<(String, Vec<String>)>,
}

/// Wire form; `language` is either an inline language object or a
/// reference the caller resolves (a path, for the command line).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CspInstanceJson {
    pub language: serde_json::Value,
    pub vars: Vec<String>,
    pub constraints: Vec<CspConstraintJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CspConstraintJson {
    pub rel: String,
    pub args: Vec<String>,
}

impl CspInstance {
    pub fn from_json(
        j: &CspInstanceJson,
        load_ref: &dyn Fn(&str) -> Result<Language>,
    ) -> Result<CspInstance> {
        let language = match &j.language {
            serde_json::Value::String(r) => load_ref(r)?,
            v => Language::from_json(&serde_json::from_value(v.clone())?)?,
        };
        Ok(CspInstance {
            language,
            vars: j.vars.clone(),
            constraints: j
                .constraints
                .iter()
                .map(|c| (c.rel.clone(), c.args.clone()))
                .collect(),
        })
    }

    /// The instance as a pp sentence (every variable existential).
    pub fn to_sentence(&self) -> Result<PpFormula> {
        let mut atoms = Vec::new();
        for (rel, args) in &self.constraints {
            let args = args
                .iter()
                .map(|a| {
                    if let Ok(c) = a.parse::<usize>() {
                        return Ok(PpTerm::Const(c));
                    }
                    self.vars
                        .iter()
                        .position(|v| v == a)
                        .map(PpTerm::Var)
                        .ok_or_else(|| Error::UnknownVariable(a.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            atoms.push(crate::formulas::PpAtom {
                rel: rel.clone(),
                args,
            });
        }
        Ok(PpFormula {
            free: Vec::new(),
            exists: self.vars.clone(),
            atoms,
        })
    }
}

/// A satisfying assignment, as a complete type plus a concrete model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspWitness {
    /// The type of (variables..., constants...).
    pub type_json: TypeJson,
    /// Integer values realizing the order (ordered bases) or class labels.
    pub assignment: BTreeMap<String, i64>,
    /// For graph bases: the graph on the classes; `assignment` maps each
    /// variable to its vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FiniteStructure>,
    #[serde(skip)]
    pub type_: Option<Type>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CspResult {
    Sat(Box<CspWitness>),
    Unsat,
}

impl CspResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, CspResult::Sat(_))
    }
}

pub(crate) fn witness_of(base: Base, vars: &[String], nconst: usize, t: &Type) -> CspWitness {
    let mut assignment = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        assignment.insert(v.clone(), t.class_of(i) as i64);
    }
    for c in 0..nconst {
        assignment.insert(format!("#{c}"), t.class_of(vars.len() + c) as i64);
    }
    let certificate = base
        .has_edges()
        .then(|| FiniteStructure::from_type(base, t));
    CspWitness {
        type_json: TypeJson::from_type(base, t),
        assignment,
        certificate,
        type_: Some(t.clone()),
    }
}

/// Decides a CSP instance by search over complete types.
pub fn solve_csp(inst: &CspInstance) -> Result<CspResult> {
    solve_csp_capped(inst, default_var_cap(inst.language.base))
}

pub fn solve_csp_capped(inst: &CspInstance, max_vars: usize) -> Result<CspResult> {
    let f = inst.to_sentence()?;
    let lang = &inst.language;
    let (rels, uses_constants) = resolve_atoms(&f, lang)?;
    let constants = if uses_constants {
        lang.constants.clone()
    } else {
        Constants::none()
    };
    let n = f.var_count();
    let nconst = constants.count();
    let problem = Problem {
        base: lang.base,
        constants,
        nvars: n,
        nfree: 0,
        constraints: f
            .atoms
            .iter()
            .zip(&rels)
            .map(|(a, r)| Constraint {
                rel: r,
                args: a.args.iter().map(|t| point(n, t)).collect(),
            })
            .collect(),
    };
    let plan = problem.plan(max_vars, true)?;
    let mut found = None;
    plan.run(None, &mut |_, full| {
        found = Some(full);
        Flow::Stop
    });
    Ok(match found {
        Some(full) => {
            let t = plan.to_problem_order(&full);
            CspResult::Sat(Box::new(witness_of(lang.base, &inst.vars, nconst, &t)))
        }
        None => CspResult::Unsat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{builtin, parse_pp};
    use crate::typespace::TypeSpace;

    fn lang(base: Base, names: &[&str]) -> Language {
        Language::from_builtins("l", base, names).unwrap()
    }

    #[test]
    fn betweenness_projects_to_disequality() {
        let l = lang(Base::QOrder, &["Betw"]);
        let r = evaluate_pp(&parse_pp("Ez. Betw(x,z,y)", &l).unwrap(), &l).unwrap();
        let neq = builtin_in("neq", Base::QOrder).unwrap();
        assert_eq!(r.types, neq.types);
    }

    #[test]
    fn separation_projection_is_not_betweenness() {
        // For distinct x, y, z a point u with {u,x} separating {y,z} always
        // exists: put u on the arc between y and z avoiding x.
        let l = lang(Base::QOrder, &["Sep"]);
        let r = evaluate_pp(&parse_pp("Eu. Sep(u,x,y,z)", &l).unwrap(), &l).unwrap();
        assert!(!r.equivalent(&builtin("Betw").unwrap()).unwrap());
        let distinct: Vec<_> = r
            .space
            .enumerate()
            .unwrap()
            .into_iter()
            .filter(Type::is_discrete)
            .collect();
        assert_eq!(r.types, distinct.into_iter().collect());
        // brute force over small integers
        let sep = |a: i32, b: i32, c: i32, d: i32| {
            let inside = |p: i32| (a.min(b) < p) && (p < a.max(b));
            a != b && c != d && [a, b].iter().all(|p| *p != c && *p != d) && inside(c) != inside(d)
        };
        // x, y, z even so there is always room for u in between
        for x in (0..10).step_by(2) {
            for y in (0..10).step_by(2) {
                for z in (0..10).step_by(2) {
                    let found = (-1..11).any(|u| sep(u, x, y, z));
                    assert_eq!(found, x != y && y != z && x != z);
                }
            }
        }
    }

    #[test]
    fn separation_with_a_parameter_gives_rotated_betweenness() {
        // Cutting the circle at the constant: {0,y} separates {x,z}.
        let l = lang(Base::QOrder, &["Sep"])
            .with_constants(Constants::new(1))
            .unwrap();
        let free: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let f = crate::formulas::parse_pp_with_free("Sep(0,y,x,z)", &l, &free).unwrap();
        let r = evaluate_pp(&f, &l).unwrap();
        for t in &r.types {
            // rotate: points above the constant come first
            let key = |i: usize| {
                (
                    t.cmp_points(i, 3) != std::cmp::Ordering::Greater,
                    t.class_of(i),
                )
            };
            let (a, b, c) = (key(0), key(1), key(2));
            assert!((a < b && b < c) || (c < b && b < a));
        }
        // 2 of 6 rotated orders, times 4 positions of the cut
        assert!(r.types.iter().all(Type::is_discrete));
        assert_eq!(r.len(), 8);
    }

    #[test]
    fn identity_formula() {
        let l = lang(Base::QOrder, &["Betw"]);
        let r = evaluate_pp(&parse_pp("Betw(x,y,z)", &l).unwrap(), &l).unwrap();
        assert_eq!(r.types, builtin("Betw").unwrap().types);
    }

    #[test]
    fn repeated_arguments_and_equalities() {
        let l = lang(Base::QOrder, &["lt"]);
        let r = evaluate_pp(&parse_pp("x<y & y=z & x<z", &l).unwrap(), &l).unwrap();
        assert_eq!(r.len(), 1);
        let empty = evaluate_pp(&parse_pp("lt(x,x)", &l).unwrap(), &l).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn constants_in_formulas() {
        let l = lang(Base::QOrder, &["T3"])
            .with_constants(Constants::new(1))
            .unwrap();
        let r = evaluate_pp(&parse_pp("T3(0,x1,x2)", &l).unwrap(), &l).unwrap();
        assert_eq!(r.constants().count(), 1);
        // (x1,x2) = (0, positive) or (positive, 0)
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn cap_is_reported() {
        let l = lang(Base::RandomGraph, &["E"]);
        let f = parse_pp(
            "E(a,b) & E(b,c) & E(c,d) & E(d,e) & E(e,f) & E(f,g) & E(g,h) & E(h,i)",
            &l,
        )
        .unwrap();
        assert!(matches!(
            evaluate_pp(&f, &l),
            Err(Error::CapExceeded { .. })
        ));
    }

    fn inst(l: &Language, vars: &[&str], cons: &[(&str, &[&str])]) -> CspInstance {
        CspInstance {
            language: l.clone(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            constraints: cons
                .iter()
                .map(|(r, a)| (r.to_string(), a.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    #[test]
    fn csp_examples() {
        let l = lang(Base::QOrder, &["Betw"]);
        let sat = solve_csp(&inst(&l, &["a", "b", "c"], &[("Betw", &["a", "b", "c"])])).unwrap();
        match sat {
            CspResult::Sat(w) => {
                let (a, b, c) = (w.assignment["a"], w.assignment["b"], w.assignment["c"]);
                assert!((a < b && b < c) || (c < b && b < a));
            }
            CspResult::Unsat => panic!(),
        }
        let unsat = solve_csp(&inst(
            &l,
            &["a", "b", "c"],
            &[("Betw", &["a", "b", "c"]), ("Betw", &["b", "c", "a"])],
        ))
        .unwrap();
        assert_eq!(unsat, CspResult::Unsat);
        let g = lang(Base::RandomGraph, &["P3"]);
        match solve_csp(&inst(&g, &["a", "b", "c"], &[("P3", &["a", "b", "c"])])).unwrap() {
            CspResult::Sat(w) => {
                let t = w.type_.unwrap();
                assert!(t.is_discrete());
                let e = t.edge_count(&[0, 1, 2]);
                assert!(e == 1 || e == 2);
                assert!(w.certificate.is_some());
            }
            CspResult::Unsat => panic!(),
        }
    }

    #[test]
    fn zero_ary_evaluation_matches_solver() {
        let l = lang(Base::QOrder, &["Betw"]);
        let f = parse_pp("Ea b c. Betw(a,b,c) & Betw(b,c,a)", &l).unwrap();
        let r = evaluate_pp(&f, &l).unwrap();
        assert_eq!(r.space, TypeSpace::new(Base::QOrder, 0));
        assert!(r.is_empty());
        let g = parse_pp("Ea b c. Betw(a,b,c)", &l).unwrap();
        assert_eq!(evaluate_pp(&g, &l).unwrap().len(), 1);
    }
}
