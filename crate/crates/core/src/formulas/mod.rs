//! Quantifier-free and primitive-positive formulas, their exact semantics as
//! type sets, and named relations.

mod ast;
mod catalog;
mod language;
mod parser;
mod relation;

pub use ast::{CmpOp, Formula, Term};
pub use catalog::{builtin, builtin_in, builtin_names, BuiltinInfo, BUILTINS};
pub use language::{Language, LanguageJson, RelationEntry};
pub use parser::parse_formula;
pub use relation::{equivalent, Relation, RelationJson};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::typespace::{Base, Constants, Type, TypeSpace};

/// Compiled quantifier-free formula: variables and constants are point
/// indices of the space.
#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    Cmp(CmpOp, usize, usize),
    Edge(usize, usize),
    Rel(usize, Vec<usize>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

/// A quantifier-free formula over a fixed type space.
#[derive(Clone, Debug)]
pub struct QfFormula {
    pub space: TypeSpace,
    pub vars: Vec<String>,
    pub body: Formula,
    relations: Vec<Relation>,
    node: Node,
}

fn point_of(space: &TypeSpace, vars: &[String], t: &Term) -> Result<usize> {
    match t {
        Term::Var(v) => vars
            .iter()
            .position(|w| w == v)
            .ok_or_else(|| Error::UnknownVariable(v.clone())),
        Term::Const(c) => {
            if *c < space.constants.count() {
                Ok(space.arity + c)
            } else {
                Err(Error::InvalidConstants(format!(
                    "constant {c} used but only {} declared",
                    space.constants.count()
                )))
            }
        }
    }
}

impl QfFormula {
    /// Checks and compiles `body` over `space`; named relations are looked
    /// up through `scope`.
    pub fn new(
        body: Formula,
        space: TypeSpace,
        vars: Vec<String>,
        scope: &dyn Fn(&str) -> Option<Relation>,
    ) -> Result<Self> {
        if vars.len() != space.arity {
            return Err(Error::ArityMismatch {
                expected: space.arity,
                found: vars.len(),
            });
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidArgument(format!(
                    "variable `{v}` listed twice"
                )));
            }
        }
        let mut relations = Vec::new();
        let node = compile(&body, &space, &vars, scope, &mut relations)?;
        Ok(QfFormula {
            space,
            vars,
            body,
            relations,
            node,
        })
    }

    /// Whether a type of the space satisfies the formula.
    pub fn holds(&self, t: &Type) -> bool {
        eval(&self.node, t, &self.space, &self.relations)
    }

    /// The exact relation defined by the formula.
    pub fn normalize(&self, name: impl Into<String>) -> Result<Relation> {
        Relation::from_predicate(name, self.space.clone(), |t| self.holds(t))
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

fn compile(
    f: &Formula,
    space: &TypeSpace,
    vars: &[String],
    scope: &dyn Fn(&str) -> Option<Relation>,
    rels: &mut Vec<Relation>,
) -> Result<Node> {
    let base = space.base;
    Ok(match f {
        Formula::True => Node::True,
        Formula::False => Node::False,
        Formula::Cmp(op, a, b) => {
            if op.needs_order() && !base.is_ordered() {
                return Err(Error::InvalidArgument(format!(
                    "order atom `{f}` over unordered base {base}"
                )));
            }
            Node::Cmp(*op, point_of(space, vars, a)?, point_of(space, vars, b)?)
        }
        Formula::Edge(a, b) => {
            if !base.has_edges() {
                return Err(Error::InvalidArgument(format!(
                    "edge atom `{f}` over base {base}"
                )));
            }
            Node::Edge(point_of(space, vars, a)?, point_of(space, vars, b)?)
        }
        Formula::Rel(name, args) => {
            let idx = match rels.iter().position(|r| r.name == *name) {
                Some(i) => i,
                None => {
                    let r = scope(name).ok_or_else(|| Error::UnknownRelation(name.clone()))?;
                    if r.base() != base {
                        return Err(Error::BaseMismatch {
                            expected: base,
                            found: r.base(),
                        });
                    }
                    if !r.constants().is_empty() && *r.constants() != space.constants {
                        return Err(Error::ConstantsMismatch);
                    }
                    rels.push(r.renamed(name.clone()));
                    rels.len() - 1
                }
            };
            if rels[idx].arity() != args.len() {
                return Err(Error::ArityMismatch {
                    expected: rels[idx].arity(),
                    found: args.len(),
                });
            }
            let pts = args
                .iter()
                .map(|a| point_of(space, vars, a))
                .collect::<Result<Vec<_>>>()?;
            Node::Rel(idx, pts)
        }
        Formula::Not(g) => Node::Not(Box::new(compile(g, space, vars, scope, rels)?)),
        Formula::And(gs) => Node::And(
            gs.iter()
                .map(|g| compile(g, space, vars, scope, rels))
                .collect::<Result<_>>()?,
        ),
        Formula::Or(gs) => Node::Or(
            gs.iter()
                .map(|g| compile(g, space, vars, scope, rels))
                .collect::<Result<_>>()?,
        ),
        Formula::Exists(..) => {
            return Err(Error::InvalidArgument(
                "quantifiers are not allowed in a quantifier-free formula".into(),
            ))
        }
    })
}

fn eval(n: &Node, t: &Type, space: &TypeSpace, rels: &[Relation]) -> bool {
    match n {
        Node::True => true,
        Node::False => false,
        Node::Cmp(op, a, b) => {
            let ord = t.cmp_points(*a, *b);
            match op {
                CmpOp::Eq => t.same(*a, *b),
                CmpOp::Ne => !t.same(*a, *b),
                CmpOp::Lt => ord == Ordering::Less,
                CmpOp::Le => ord != Ordering::Greater,
                CmpOp::Gt => ord == Ordering::Greater,
                CmpOp::Ge => ord != Ordering::Less,
            }
        }
        Node::Edge(a, b) => t.edge(*a, *b),
        Node::Rel(i, pts) => {
            let r = &rels[*i];
            if r.constants().is_empty() {
                r.contains(&t.restrict(space.base, pts))
            } else {
                let all: Vec<usize> = pts.iter().copied().chain(space.constant_points()).collect();
                r.contains(&t.restrict(space.base, &all))
            }
        }
        Node::Not(g) => !eval(g, t, space, rels),
        Node::And(gs) => gs.iter().all(|g| eval(g, t, space, rels)),
        Node::Or(gs) => gs.iter().any(|g| eval(g, t, space, rels)),
    }
}

/// Parses a quantifier-free formula over `base` with the given variable
/// order; named atoms resolve to built-in relations.
pub fn parse_qf(text: &str, base: Base, vars: &[&str]) -> Result<QfFormula> {
    let body = parse_formula(text)?;
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    QfFormula::new(body, TypeSpace::new(base, vars.len()), vars, &|n| {
        builtin_in(n, base).ok()
    })
}

/// Parses a quantifier-free formula in the context of a language (its
/// relations and constants). Without `vars`, free variables are taken in
/// order of first appearance.
pub fn parse_qf_in(text: &str, lang: &Language, vars: Option<&[String]>) -> Result<QfFormula> {
    let body = parse_formula(text)?;
    let vars = match vars {
        Some(v) => v.to_vec(),
        None => body.free_vars(),
    };
    let constants = if body.max_constant().is_some() {
        lang.constants.clone()
    } else {
        Constants::none()
    };
    let space = TypeSpace::with_constants(lang.base, vars.len(), constants)?;
    QfFormula::new(body, space, vars, &|n| lang.resolve(n))
}

/// The exact relation of a quantifier-free formula.
pub fn normalize(f: &QfFormula) -> Result<Relation> {
    f.normalize("")
}

/// Default variable names for a relation of the given arity.
pub fn default_vars(arity: usize) -> Vec<String> {
    if arity <= 3 {
        ["x", "y", "z"][..arity]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        (1..=arity).map(|i| format!("x{i}")).collect()
    }
}

/// Complete conjunction of atoms describing one type.
pub fn describe_type(space: &TypeSpace, t: &Type, vars: &[String]) -> Vec<String> {
    let base = space.base;
    let name = |p: usize| -> String {
        if p < space.arity {
            vars[p].clone()
        } else {
            (p - space.arity).to_string()
        }
    };
    let is_const = |p: usize| p >= space.arity;
    let n = t.len();
    let mut atoms = Vec::new();
    if base.is_ordered() {
        let mut pts: Vec<usize> = (0..n).collect();
        pts.sort_by_key(|&p| (t.class_of(p), p));
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if is_const(a) && is_const(b) {
                continue;
            }
            let op = if t.same(a, b) { "=" } else { "<" };
            atoms.push(format!("{}{op}{}", name(a), name(b)));
        }
    }
    // class representatives: first point of each class
    let mut reps: Vec<usize> = Vec::new();
    for p in 0..n {
        match reps.iter().find(|&&r| t.same(r, p)) {
            Some(&r) if !base.is_ordered() => {
                if !(is_const(r) && is_const(p)) {
                    atoms.push(format!("{}={}", name(p), name(r)));
                }
            }
            Some(_) => {}
            None => reps.push(p),
        }
    }
    for (i, &a) in reps.iter().enumerate() {
        for &b in &reps[i + 1..] {
            if is_const(a) && is_const(b) {
                continue;
            }
            if !base.is_ordered() {
                atoms.push(format!("{}!={}", name(a), name(b)));
            }
            if base.has_edges() {
                let e = if t.edge(a, b) { "" } else { "!" };
                atoms.push(format!("{e}E({},{})", name(a), name(b)));
            }
        }
    }
    atoms
}

/// Canonical DNF of a relation, one disjunct per type.
pub fn render_with(r: &Relation, vars: &[String]) -> String {
    if r.types.is_empty() {
        return "false".into();
    }
    let disjuncts: Vec<String> = r
        .types
        .iter()
        .map(|t| {
            let atoms = describe_type(&r.space, t, vars);
            if atoms.is_empty() {
                "true".to_string()
            } else {
                atoms.join(" & ")
            }
        })
        .collect();
    disjuncts.join(" | ")
}

pub fn render(r: &Relation) -> String {
    render_with(r, &default_vars(r.arity()))
}

/// Parses a rendered relation back over the relation's own space.
pub fn parse_rendered(text: &str, space: &TypeSpace, vars: &[String]) -> Result<Relation> {
    let base = space.base;
    let f = QfFormula::new(parse_formula(text)?, space.clone(), vars.to_vec(), &|n| {
        builtin_in(n, base).ok()
    })?;
    f.normalize("")
}

/// Argument of a pp atom: a variable (index into free then existential
/// variables) or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PpTerm {
    Var(usize),
    Const(usize),
}

/// One conjunct; relation `=` is equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PpAtom {
    pub rel: String,
    pub args: Vec<PpTerm>,
}

/// A primitive positive formula `∃ exists. atoms` with free variables `free`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PpFormula {
    pub free: Vec<String>,
    pub exists: Vec<String>,
    pub atoms: Vec<PpAtom>,
}

impl PpFormula {
    pub fn var_count(&self) -> usize {
        self.free.len() + self.exists.len()
    }

    pub fn var_name(&self, i: usize) -> &str {
        if i < self.free.len() {
            &self.free[i]
        } else {
            &self.exists[i - self.free.len()]
        }
    }

    pub fn max_constant(&self) -> Option<usize> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| match t {
                PpTerm::Const(c) => Some(*c),
                PpTerm::Var(_) => None,
            })
            .max()
    }

    /// The single-atom formula `rel(free...)`.
    pub fn atom(rel: &str, arity: usize) -> PpFormula {
        PpFormula {
            free: default_vars(arity),
            exists: Vec::new(),
            atoms: vec![PpAtom {
                rel: rel.to_string(),
                args: (0..arity).map(PpTerm::Var).collect(),
            }],
        }
    }

    fn term_text(&self, t: &PpTerm) -> String {
        match t {
            PpTerm::Var(i) => self.var_name(*i).to_string(),
            PpTerm::Const(c) => c.to_string(),
        }
    }
}

impl fmt::Display for PpFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists.is_empty() {
            write!(f, "E{}. ", self.exists.join(" "))?;
        }
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            if a.rel == "=" {
                write!(
                    f,
                    "{}={}",
                    self.term_text(&a.args[0]),
                    self.term_text(&a.args[1])
                )?;
            } else {
                write!(f, "{}(", a.rel)?;
                for (j, t) in a.args.iter().enumerate() {
                    if j > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(&self.term_text(t))?;
                }
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// Language relation standing in for a comparison sugar.
fn sugar_relation(lang: &Language, op: CmpOp) -> Result<(String, bool)> {
    let (names, swap): (&[&str], bool) = match op {
        CmpOp::Lt => (&["lt", "<"], false),
        CmpOp::Gt => (&["lt", "<"], true),
        CmpOp::Le => (&["le", "<="], false),
        CmpOp::Ge => (&["le", "<="], true),
        CmpOp::Ne => (&["neq", "!="], false),
        CmpOp::Eq => return Ok(("=".into(), false)),
    };
    for n in names {
        if lang.get(n).is_some() {
            return Ok((n.to_string(), swap));
        }
    }
    Err(Error::UnknownRelation(format!(
        "`{}` needs a relation named `{}` in the language",
        op.symbol(),
        names[0]
    )))
}

struct Flatten<'a> {
    lang: &'a Language,
    in_use: Vec<String>,
    exists: Vec<String>,
    atoms: Vec<(String, Vec<Term>)>,
}

impl Flatten<'_> {
    fn walk(&mut self, f: &Formula, rename: &HashMap<String, String>) -> Result<()> {
        let sub = |t: &Term| match t {
            Term::Var(v) => Term::Var(rename.get(v).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        };
        match f {
            Formula::True => {}
            Formula::And(gs) => {
                for g in gs {
                    self.walk(g, rename)?;
                }
            }
            Formula::Exists(vs, g) => {
                let mut inner = rename.clone();
                for v in vs {
                    let mut fresh = v.clone();
                    let mut k = 1;
                    while self.in_use.contains(&fresh) {
                        fresh = format!("{v}_{k}");
                        k += 1;
                    }
                    self.in_use.push(fresh.clone());
                    self.exists.push(fresh.clone());
                    inner.insert(v.clone(), fresh);
                }
                self.walk(g, &inner)?;
            }
            Formula::Cmp(op, a, b) => {
                let (rel, swap) = sugar_relation(self.lang, *op)?;
                let (a, b) = if swap {
                    (sub(b), sub(a))
                } else {
                    (sub(a), sub(b))
                };
                self.atoms.push((rel, vec![a, b]));
            }
            Formula::Edge(a, b) => {
                if self.lang.get("E").is_none() {
                    return Err(Error::UnknownRelation("E".into()));
                }
                self.atoms.push(("E".into(), vec![sub(a), sub(b)]));
            }
            Formula::Rel(name, args) => {
                self.atoms
                    .push((name.clone(), args.iter().map(sub).collect()));
            }
            Formula::False => {
                return Err(Error::InvalidArgument(
                    "`false` is not a primitive positive formula".into(),
                ))
            }
            Formula::Not(_) | Formula::Or(_) => {
                return Err(Error::InvalidArgument(
                    "negation and disjunction are not allowed in a primitive positive formula"
                        .into(),
                ))
            }
        }
        Ok(())
    }
}

/// Parses a pp formula over a language; free variables in order of first
/// appearance.
pub fn parse_pp(text: &str, lang: &Language) -> Result<PpFormula> {
    parse_pp_impl(text, lang, None)
}

/// Parses a pp formula with an explicit free-variable order.
pub fn parse_pp_with_free(text: &str, lang: &Language, free: &[String]) -> Result<PpFormula> {
    parse_pp_impl(text, lang, Some(free))
}

fn parse_pp_impl(text: &str, lang: &Language, free: Option<&[String]>) -> Result<PpFormula> {
    let f = parser::parse(
        text,
        parser::Mode {
            positive_conjunctive: true,
        },
    )?;
    let found = f.free_vars();
    let free: Vec<String> = match free {
        Some(list) => {
            if let Some(v) = found.iter().find(|v| !list.contains(v)) {
                return Err(Error::UnknownVariable(v.clone()));
            }
            list.to_vec()
        }
        None => found,
    };
    let mut fl = Flatten {
        lang,
        in_use: free.clone(),
        exists: Vec::new(),
        atoms: Vec::new(),
    };
    fl.walk(&f, &HashMap::new())?;
    let names: Vec<String> = free.iter().chain(fl.exists.iter()).cloned().collect();
    let mut atoms = Vec::with_capacity(fl.atoms.len());
    for (rel, args) in fl.atoms {
        if rel != "=" {
            let r = lang
                .get(&rel)
                .ok_or_else(|| Error::UnknownRelation(rel.clone()))?;
            if r.arity() != args.len() {
                return Err(Error::ArityMismatch {
                    expected: r.arity(),
                    found: args.len(),
                });
            }
        }
        let args = args
            .iter()
            .map(|t| match t {
                Term::Var(v) => names
                    .iter()
                    .position(|n| n == v)
                    .map(PpTerm::Var)
                    .ok_or_else(|| Error::UnknownVariable(v.clone())),
                Term::Const(c) => {
                    if *c < lang.constants.count() {
                        Ok(PpTerm::Const(*c))
                    } else {
                        Err(Error::InvalidConstants(format!(
                            "constant {c} is not declared"
                        )))
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        atoms.push(PpAtom { rel, args });
    }
    Ok(PpFormula {
        free,
        exists: fl.exists,
        atoms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typespace::enumerate_types;

    fn rel(text: &str, base: Base, vars: &[&str]) -> Relation {
        normalize(&parse_qf(text, base, vars).unwrap()).unwrap()
    }

    #[test]
    fn betweenness_cyclic_separation_sizes() {
        let betw = rel("x<y & y<z | z<y & y<x", Base::QOrder, &["x", "y", "z"]);
        assert_eq!(betw.len(), 2);
        let cycl = rel(
            "x<y & y<z | y<z & z<x | z<x & x<y",
            Base::QOrder,
            &["x", "y", "z"],
        );
        assert_eq!(cycl.len(), 3);
        let sep = builtin("Sep").unwrap();
        assert_eq!(sep.len(), 8);
        assert!(sep.types.iter().all(|t| t.is_discrete()));
    }

    #[test]
    fn render_examples() {
        let lt = rel("x<y", Base::QOrder, &["x", "y"]);
        assert_eq!(render(&lt), "x<y");
        let none = rel("x!=x", Base::QOrder, &["x", "y"]);
        assert_eq!(render(&none), "false");
        let r3 = builtin("R3").unwrap();
        assert_eq!(r3.len(), 4);
        assert_eq!(render(&r3).split(" | ").count(), 4);
    }

    #[test]
    fn render_then_normalize_is_identity() {
        for base in Base::ALL {
            let ts = enumerate_types(base, 3, &Constants::none()).unwrap();
            // every third type, to get a non-trivial subset
            let types = ts.iter().step_by(3).cloned().collect();
            let r = Relation::new("r", TypeSpace::new(base, 3), types).unwrap();
            let back = parse_rendered(&render(&r), &r.space, &default_vars(3)).unwrap();
            assert_eq!(back.types, r.types, "{base}");
        }
    }

    #[test]
    fn render_with_constants() {
        let space = TypeSpace::with_constants(Base::QOrder, 2, Constants::new(1)).unwrap();
        let r = Relation::from_predicate("r", space.clone(), |t| {
            t.cmp_points(0, 2) == Ordering::Less && t.cmp_points(2, 1) == Ordering::Less
        })
        .unwrap();
        assert_eq!(render(&r), "x<0 & 0<y");
        let back = parse_rendered(&render(&r), &space, &default_vars(2)).unwrap();
        assert_eq!(back, r.clone().renamed(""));
    }

    #[test]
    fn true_and_false_everywhere() {
        for base in Base::ALL {
            for k in 0..=4 {
                let vars: Vec<String> = (0..k).map(|i| format!("v{i}")).collect();
                let vr: Vec<&str> = vars.iter().map(String::as_str).collect();
                let all = enumerate_types(base, k, &Constants::none()).unwrap();
                let t = rel("true", base, &vr);
                assert_eq!(t.len(), all.len());
                if k > 0 {
                    let f = rel("v0!=v0", base, &vr);
                    assert!(f.is_empty());
                }
            }
        }
    }

    #[test]
    fn unknown_relation_and_arity_errors() {
        assert!(matches!(
            parse_qf("Foo(x,y)", Base::QOrder, &["x", "y"]),
            Err(Error::UnknownRelation(_))
        ));
        assert!(matches!(
            parse_qf("Betw(x,y)", Base::QOrder, &["x", "y"]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(parse_qf("x<y", Base::RandomGraph, &["x", "y"]).is_err());
        assert!(parse_qf("E(x,y)", Base::QOrder, &["x", "y"]).is_err());
        assert!(matches!(
            parse_qf("x<w", Base::QOrder, &["x", "y"]),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn pp_parsing() {
        let betw = Language::from_builtins("betw", Base::QOrder, &["Betw"]).unwrap();
        let f = parse_pp("Ez. Betw(x,z,y)", &betw).unwrap();
        assert_eq!(f.free, vec!["x", "y"]);
        assert_eq!(f.exists, vec!["z"]);
        assert_eq!(f.to_string(), "Ez. Betw(x,z,y)");
        let sep = Language::from_builtins("sep", Base::QOrder, &["Sep"]).unwrap();
        let g = parse_pp("Eu. Sep(u,x,y,z)", &sep).unwrap();
        assert_eq!(g.free.len(), 3);
        let lt = Language::from_builtins("lt", Base::QOrder, &["lt"]).unwrap();
        let h = parse_pp("x<y", &lt).unwrap();
        assert!(h.exists.is_empty());
        assert_eq!(h.atoms[0].rel, "lt");
        assert!(matches!(
            parse_pp("x<y | y<x", &lt),
            Err(Error::Syntax { .. })
        ));
        assert!(parse_pp("!x<y", &lt).is_err());
        assert!(matches!(
            parse_pp("x!=y", &lt),
            Err(Error::UnknownRelation(_))
        ));
        assert!(matches!(
            parse_pp("Betw(x,y,z)", &lt),
            Err(Error::UnknownRelation(_))
        ));
    }

    #[test]
    fn pp_bound_variables_are_renamed_apart() {
        let lt = Language::from_builtins("lt", Base::QOrder, &["lt"]).unwrap();
        let f = parse_pp_with_free("x<y & Ex. x<y", &lt, &["x".into(), "y".into()]).unwrap();
        assert_eq!(f.exists, vec!["x_1"]);
        assert_eq!(f.atoms[1].args, vec![PpTerm::Var(2), PpTerm::Var(1)]);
    }
}
