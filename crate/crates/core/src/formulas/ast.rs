use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// The `i`-th constant of the language, written as a numeral.
    Const(usize),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn needs_order(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

/// Syntax tree shared by the quantifier-free and pp front ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Edge(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl Formula {
    /// Free variables in order of first appearance.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let note = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) | Formula::Edge(a, b) => {
                note(a, bound, out);
                note(b, bound, out);
            }
            Formula::Rel(_, args) => {
                for a in args {
                    note(a, bound, out);
                }
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    g.collect_free(bound, out);
                }
            }
            Formula::Exists(vs, g) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                g.collect_free(bound, out);
                bound.truncate(depth);
            }
        }
    }

    /// Largest constant index used, if any.
    pub fn max_constant(&self) -> Option<usize> {
        let of = |t: &Term| match t {
            Term::Const(c) => Some(*c),
            Term::Var(_) => None,
        };
        match self {
            Formula::True | Formula::False => None,
            Formula::Cmp(_, a, b) | Formula::Edge(a, b) => of(a).max(of(b)),
            Formula::Rel(_, args) => args.iter().filter_map(of).max(),
            Formula::Not(g) | Formula::Exists(_, g) => g.max_constant(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().filter_map(Formula::max_constant).max(),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Exists(..) => true,
            Formula::Not(g) => g.has_quantifier(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().any(Formula::has_quantifier),
            _ => false,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, g: &Formula, parent_and: bool) -> fmt::Result {
    let wrap = match g {
        Formula::Or(gs) => gs.len() > 1,
        Formula::And(gs) => !parent_and && gs.len() > 1,
        Formula::Exists(..) => true,
        _ => false,
    };
    if wrap {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Cmp(op, a, b) => write!(f, "{a}{}{b}", op.symbol()),
            Formula::Edge(a, b) => write!(f, "E({a},{b})"),
            Formula::Rel(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Not(g) => match **g {
                Formula::And(_) | Formula::Or(_) | Formula::Exists(..) => write!(f, "!({g})"),
                _ => write!(f, "!{g}"),
            },
            Formula::And(gs) => {
                if gs.is_empty() {
                    return f.write_str("true");
                }
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    write_child(f, g, true)?;
                }
                Ok(())
            }
            Formula::Or(gs) => {
                if gs.is_empty() {
                    return f.write_str("false");
                }
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    match g {
                        Formula::Exists(..) => write!(f, "({g})")?,
                        _ => write!(f, "{g}")?,
                    }
                }
                Ok(())
            }
            Formula::Exists(vs, g) => write!(f, "E{}. {g}", vs.join(" ")),
        }
    }
}
