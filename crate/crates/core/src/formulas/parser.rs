//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := 'E' vars '.' formula | disj
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '(' formula ')' | 'true' | 'false'
//!          | Name '(' terms ')' | term op term | 'E' vars '.' formula
//! term    := [a-z][a-z0-9_]* | numeral
//! op      := '<' | '<=' | '=' | '!=' | '>' | '>='
//! ```
//!
//! `exists` and `∃` are accepted for `E`; `∧ ∨ ¬ ≠ ≤ ≥` are accepted too.

use super::ast::{CmpOp, Formula, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Exists,
    Cmp(CmpOp),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        let peek = bytes.get(i + 1).map(|p| p.1);
        let mut step = 1;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' | '∧' => {
                if c == '&' && peek == Some('&') {
                    step = 2;
                }
                Tok::And
            }
            '|' | '∨' => {
                if c == '|' && peek == Some('|') {
                    step = 2;
                }
                Tok::Or
            }
            '¬' | '~' => Tok::Not,
            '∃' => Tok::Exists,
            '≠' => Tok::Cmp(CmpOp::Ne),
            '≤' => Tok::Cmp(CmpOp::Le),
            '≥' => Tok::Cmp(CmpOp::Ge),
            '!' => {
                if peek == Some('=') {
                    step = 2;
                    Tok::Cmp(CmpOp::Ne)
                } else {
                    Tok::Not
                }
            }
            '<' => {
                if peek == Some('=') {
                    step = 2;
                    Tok::Cmp(CmpOp::Le)
                } else {
                    Tok::Cmp(CmpOp::Lt)
                }
            }
            '>' => {
                if peek == Some('=') {
                    step = 2;
                    Tok::Cmp(CmpOp::Ge)
                } else {
                    Tok::Cmp(CmpOp::Gt)
                }
            }
            '=' => {
                if peek == Some('=') {
                    step = 2;
                }
                Tok::Cmp(CmpOp::Eq)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].1.is_ascii_digit() {
                    j += 1;
                }
                let end = bytes.get(j).map_or(text.len(), |p| p.0);
                let n = text[pos..end].parse().map_err(|_| Error::Syntax {
                    pos,
                    msg: "numeral too large".into(),
                })?;
                step = j - i;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].1.is_ascii_alphanumeric() || bytes[j].1 == '_') {
                    j += 1;
                }
                let end = bytes.get(j).map_or(text.len(), |p| p.0);
                step = j - i;
                Tok::Ident(text[pos..end].to_string())
            }
            other => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((pos, tok));
        i += step;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

pub(crate) fn is_var_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_lowercase())
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Parser switches: whether `|` and `!` are permitted.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Mode {
    pub positive_conjunctive: bool,
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    mode: Mode,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    /// Is the current identifier the start of an existential block?
    fn exists_head(&self) -> Option<Option<String>> {
        match self.peek() {
            Tok::Exists => Some(None),
            Tok::Ident(s) if s == "exists" => Some(None),
            Tok::Ident(s) if *self.peek2() != Tok::LParen => {
                if s == "E" {
                    Some(None)
                } else if let Some(rest) = s.strip_prefix('E') {
                    is_var_name(rest).then(|| Some(rest.to_string()))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let f = self.disj()?;
        Ok(f)
    }

    fn exists(&mut self, first: Option<String>) -> Result<Formula> {
        self.bump();
        let mut vars: Vec<String> = first.into_iter().collect();
        loop {
            match self.peek().clone() {
                Tok::Ident(v) if is_var_name(&v) => {
                    self.bump();
                    vars.push(v);
                }
                Tok::Comma => {
                    self.bump();
                }
                Tok::Dot => {
                    self.bump();
                    break;
                }
                _ => return self.err("expected variable or `.` in quantifier"),
            }
        }
        if vars.is_empty() {
            return self.err("quantifier without variables");
        }
        let body = self.formula()?;
        Ok(Formula::Exists(vars, Box::new(body)))
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conj()?];
        while *self.peek() == Tok::Or {
            if self.mode.positive_conjunctive {
                return self.err("disjunction is not allowed in a primitive positive formula");
            }
            self.bump();
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        if let Some(first) = self.exists_head() {
            return self.exists(first);
        }
        match self.peek().clone() {
            Tok::Not => {
                if self.mode.positive_conjunctive {
                    return self.err("negation is not allowed in a primitive positive formula");
                }
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" && *self.peek2() != Tok::LParen => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" && *self.peek2() != Tok::LParen => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) if *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.term()?);
                        match self.peek() {
                            Tok::Comma => {
                                self.bump();
                            }
                            Tok::RParen => break,
                            _ => return self.err("expected `,` or `)`"),
                        }
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                if s == "E" {
                    if args.len() != 2 {
                        return self.err("E takes two arguments");
                    }
                    let b = args.pop().unwrap();
                    let a = args.pop().unwrap();
                    return Ok(Formula::Edge(a, b));
                }
                Ok(Formula::Rel(s, args))
            }
            Tok::Ident(_) | Tok::Num(_) => {
                let a = self.term()?;
                let op = match self.peek() {
                    Tok::Cmp(op) => *op,
                    _ => return self.err("expected a comparison"),
                };
                self.bump();
                let b = self.term()?;
                Ok(Formula::Cmp(op, a, b))
            }
            Tok::End => self.err("unexpected end of input"),
            _ => self.err("expected an atom"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Const(n))
            }
            Tok::Ident(v) if is_var_name(&v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(v) => self.err(format!("`{v}` is not a variable name")),
            _ => self.err("expected a variable or numeral"),
        }
    }
}

pub(crate) fn parse(text: &str, mode: Mode) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, mode };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses any formula of the grammar (quantifiers and all connectives).
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse(
        text,
        Mode {
            positive_conjunctive: false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::Var(s.into())
    }

    #[test]
    fn betweenness_shape() {
        let f = parse_formula("x<y & y<z | z<y & y<x").unwrap();
        match f {
            Formula::Or(ds) => {
                assert_eq!(ds.len(), 2);
                assert_eq!(
                    ds[0],
                    Formula::And(vec![
                        Formula::Cmp(CmpOp::Lt, v("x"), v("y")),
                        Formula::Cmp(CmpOp::Lt, v("y"), v("z"))
                    ])
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edge_and_negation() {
        let f = parse_formula("E(x,y) & !(x=y)").unwrap();
        assert_eq!(
            f,
            Formula::And(vec![
                Formula::Edge(v("x"), v("y")),
                Formula::Not(Box::new(Formula::Cmp(CmpOp::Eq, v("x"), v("y"))))
            ])
        );
    }

    #[test]
    fn quantifier_spellings() {
        let want = Formula::Exists(
            vec!["z".into()],
            Box::new(Formula::Rel("Betw".into(), vec![v("x"), v("z"), v("y")])),
        );
        for s in [
            "Ez. Betw(x,z,y)",
            "E z. Betw(x,z,y)",
            "exists z. Betw(x,z,y)",
            "∃z. Betw(x,z,y)",
        ] {
            assert_eq!(parse_formula(s).unwrap(), want, "{s}");
        }
        let f = parse_formula("Eu1 u2. R(u1,u2)").unwrap();
        assert_eq!(f.free_vars(), Vec::<String>::new());
    }

    #[test]
    fn constants_and_relations_named_like_quantifiers() {
        let f = parse_formula("E6(x1,x2,y1,y2,z1,z2) & T3(0,x1,x2)").unwrap();
        assert_eq!(f.max_constant(), Some(0));
        assert_eq!(f.free_vars(), vec!["x1", "x2", "y1", "y2", "z1", "z2"]);
    }

    #[test]
    fn unicode_aliases() {
        let a = parse_formula("x≠y ∧ ¬E(x,y) ∨ x≤y").unwrap();
        let b = parse_formula("x!=y & !E(x,y) | x<=y").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("x < & y") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("(x<y").is_err());
        assert!(parse_formula("x<y)").is_err());
        let pp = Mode {
            positive_conjunctive: true,
        };
        assert!(matches!(
            parse("x<y | y<x", pp),
            Err(Error::Syntax { pos: 4, .. })
        ));
        assert!(parse("!x<y", pp).is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "x<y & y<z | z<y & y<x",
            "Ez. Betw(x,z,y)",
            "!(x=y | E(x,y)) & T3(0,x,y)",
            "true",
            "x!=y & (x<=y | y>=x)",
        ] {
            let f = parse_formula(s).unwrap();
            let again = parse_formula(&f.to_string()).unwrap();
            assert_eq!(f, again, "{s} -> {f}");
        }
    }
}
