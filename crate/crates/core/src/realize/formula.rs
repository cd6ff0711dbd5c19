use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::literal::parse_nat;
use crate::nat::Nat;
use crate::universe::{hf_to_v, mkset, omega, vnat_host, Hf};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Term {
    Var(String),
    Lit(Nat),
}

/// Set-theoretic formulas over `V`. Quantifier bounds are terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Formula {
    Eq(Term, Term),
    In(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    AllIn(String, Term, Box<Formula>),
    ExIn(String, Term, Box<Formula>),
    All(String, Box<Formula>),
    Ex(String, Box<Formula>),
}

/// Assignment of set trees to variable names.
pub type Env = BTreeMap<String, Nat>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} is bound twice on one path")]
    Rebound(String),
    #[error("parse error at offset {at}: {msg}")]
    Parse { at: usize, msg: String },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn subst(&self, x: &str, v: &Nat) -> Term {
        match self {
            Term::Var(y) if y == x => Term::Lit(v.clone()),
            t => t.clone(),
        }
    }

    /// The value of a closed term.
    pub fn value(&self) -> Result<&Nat, FormulaError> {
        match self {
            Term::Lit(n) => Ok(n),
            Term::Var(x) => Err(FormulaError::UnboundVariable(x.clone())),
        }
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn member(a: Term, b: Term) -> Formula {
        Formula::In(a, b)
    }

    pub fn and(p: Formula, q: Formula) -> Formula {
        Formula::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Formula, q: Formula) -> Formula {
        Formula::Or(Box::new(p), Box::new(q))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Formula) -> Formula {
        Formula::Not(Box::new(p))
    }

    pub fn implies(p: Formula, q: Formula) -> Formula {
        Formula::Implies(Box::new(p), Box::new(q))
    }

    pub fn all_in(x: &str, t: Term, p: Formula) -> Formula {
        Formula::AllIn(x.to_string(), t, Box::new(p))
    }

    pub fn ex_in(x: &str, t: Term, p: Formula) -> Formula {
        Formula::ExIn(x.to_string(), t, Box::new(p))
    }

    pub fn all(x: &str, p: Formula) -> Formula {
        Formula::All(x.to_string(), Box::new(p))
    }

    pub fn ex(x: &str, p: Formula) -> Formula {
        Formula::Ex(x.to_string(), Box::new(p))
    }

    pub fn parse(src: &str) -> Result<Formula, FormulaError> {
        let sx = parse_sexpr(src)?;
        let f = formula(&sx)?;
        f.check_scoping()?;
        Ok(f)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(x) = t {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
        };
        match self {
            Formula::Eq(a, b) | Formula::In(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Formula::Not(p) => p.collect_free(bound, out),
            Formula::AllIn(x, t, p) | Formula::ExIn(x, t, p) => {
                term(t, bound);
                bound.push(x.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            Formula::All(x, p) | Formula::Ex(x, p) => {
                bound.push(x.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// No variable is bound twice along one path, and no bound variable
    /// shadows a free one.
    pub fn check_scoping(&self) -> Result<(), FormulaError> {
        let free = self.free_vars();
        self.scoping(&mut free.into_iter().collect())
    }

    fn scoping(&self, seen: &mut Vec<String>) -> Result<(), FormulaError> {
        match self {
            Formula::Eq(..) | Formula::In(..) => Ok(()),
            Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
                p.scoping(seen)?;
                q.scoping(seen)
            }
            Formula::Not(p) => p.scoping(seen),
            Formula::AllIn(x, _, p)
            | Formula::ExIn(x, _, p)
            | Formula::All(x, p)
            | Formula::Ex(x, p) => {
                if seen.contains(x) {
                    return Err(FormulaError::Rebound(x.clone()));
                }
                seen.push(x.clone());
                let r = p.scoping(seen);
                seen.pop();
                r
            }
        }
    }

    /// Replace free occurrences of `x` by the literal `v`.
    pub fn subst(&self, x: &str, v: &Nat) -> Formula {
        let s = |p: &Formula| Box::new(p.subst(x, v));
        match self {
            Formula::Eq(a, b) => Formula::Eq(a.subst(x, v), b.subst(x, v)),
            Formula::In(a, b) => Formula::In(a.subst(x, v), b.subst(x, v)),
            Formula::And(p, q) => Formula::And(s(p), s(q)),
            Formula::Or(p, q) => Formula::Or(s(p), s(q)),
            Formula::Implies(p, q) => Formula::Implies(s(p), s(q)),
            Formula::Not(p) => Formula::Not(s(p)),
            Formula::AllIn(y, t, p) => {
                let body = if y == x { p.clone() } else { s(p) };
                Formula::AllIn(y.clone(), t.subst(x, v), body)
            }
            Formula::ExIn(y, t, p) => {
                let body = if y == x { p.clone() } else { s(p) };
                Formula::ExIn(y.clone(), t.subst(x, v), body)
            }
            Formula::All(y, p) if y != x => Formula::All(y.clone(), s(p)),
            Formula::Ex(y, p) if y != x => Formula::Ex(y.clone(), s(p)),
            f => f.clone(),
        }
    }

    /// Substitute the environment; fails on any variable left free.
    pub fn close(&self, env: &Env) -> Result<Formula, FormulaError> {
        let mut f = self.clone();
        for x in self.free_vars() {
            let v = env
                .get(&x)
                .ok_or_else(|| FormulaError::UnboundVariable(x.clone()))?;
            f = f.subst(&x, v);
        }
        Ok(f)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Lit(n) if *n == omega() => f.write_str("omega"),
            Term::Lit(n) => write!(f, "#{}", n.brief(24)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::In(a, b) => write!(f, "(in {a} {b})"),
            Formula::And(p, q) => write!(f, "(and {p} {q})"),
            Formula::Or(p, q) => write!(f, "(or {p} {q})"),
            Formula::Not(p) => write!(f, "(not {p})"),
            Formula::Implies(p, q) => write!(f, "(-> {p} {q})"),
            Formula::AllIn(x, t, p) => write!(f, "(all-in {x} {t} {p})"),
            Formula::ExIn(x, t, p) => write!(f, "(ex-in {x} {t} {p})"),
            Formula::All(x, p) => write!(f, "(all {x} {p})"),
            Formula::Ex(x, p) => write!(f, "(ex {x} {p})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Sexpr {
    Atom(String, usize),
    List(Vec<Sexpr>, usize),
}

impl Sexpr {
    fn at(&self) -> usize {
        match self {
            Sexpr::Atom(_, at) | Sexpr::List(_, at) => *at,
        }
    }
}

fn perr(at: usize, msg: impl Into<String>) -> FormulaError {
    FormulaError::Parse {
        at,
        msg: msg.into(),
    }
}

fn parse_sexpr(src: &str) -> Result<Sexpr, FormulaError> {
    let bytes = src.as_bytes();
    let mut pos = 0;
    let out = sexpr(src, bytes, &mut pos)?;
    skip(bytes, &mut pos);
    if pos != bytes.len() {
        return Err(perr(pos, "trailing input"));
    }
    Ok(out)
}

fn skip(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b';' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn sexpr(src: &str, bytes: &[u8], pos: &mut usize) -> Result<Sexpr, FormulaError> {
    skip(bytes, pos);
    let start = *pos;
    match bytes.get(start) {
        None => Err(perr(start, "unexpected end of input")),
        Some(b')') => Err(perr(start, "unexpected ')'")),
        Some(b'(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip(bytes, pos);
                match bytes.get(*pos) {
                    None => return Err(perr(start, "unclosed '('")),
                    Some(b')') => {
                        *pos += 1;
                        return Ok(Sexpr::List(items, start));
                    }
                    _ => items.push(sexpr(src, bytes, pos)?),
                }
            }
        }
        Some(&open @ (b'{' | b'<')) => {
            let close = if open == b'{' { b'}' } else { b'>' };
            let mut depth = 0;
            while *pos < bytes.len() {
                let c = bytes[*pos];
                *pos += 1;
                if c == open {
                    depth += 1;
                } else if c == close {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(Sexpr::Atom(src[start..*pos].to_string(), start));
                    }
                }
            }
            Err(perr(start, "unclosed literal"))
        }
        Some(_) => {
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && !matches!(bytes[*pos], b'(' | b')' | b';')
            {
                *pos += 1;
            }
            Ok(Sexpr::Atom(src[start..*pos].to_string(), start))
        }
    }
}

fn ident(s: &Sexpr) -> Result<String, FormulaError> {
    match s {
        Sexpr::Atom(a, _)
            if a.chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_') =>
        {
            Ok(a.clone())
        }
        _ => Err(perr(s.at(), "expected a variable name")),
    }
}

fn term(s: &Sexpr) -> Result<Term, FormulaError> {
    match s {
        Sexpr::Atom(a, at) => {
            if a == "omega" {
                Ok(Term::Lit(omega()))
            } else if a.starts_with(['{', '<']) || a.starts_with(|c: char| c.is_ascii_digit()) {
                parse_nat(a)
                    .map(Term::Lit)
                    .map_err(|e| perr(*at, e.to_string()))
            } else {
                ident(s).map(Term::Var)
            }
        }
        Sexpr::List(items, at) => {
            let head = match items.first() {
                Some(Sexpr::Atom(h, _)) => h.as_str(),
                _ => return Err(perr(*at, "expected a term")),
            };
            let args = &items[1..];
            match (head, args) {
                ("hf", [Sexpr::Atom(lit, lat)]) => Hf::parse(lit)
                    .map(|h| Term::Lit(hf_to_v(&h)))
                    .map_err(|e| perr(*lat, format!("{e:?}"))),
                ("vnat", [Sexpr::Atom(n, nat)]) => n
                    .parse::<u64>()
                    .map(|n| Term::Lit(vnat_host(n)))
                    .map_err(|_| perr(*nat, "vnat takes a small natural")),
                ("set", elems) => {
                    let mut vals = Vec::with_capacity(elems.len());
                    for e in elems {
                        match term(e)? {
                            Term::Lit(v) => vals.push(v),
                            Term::Var(_) => {
                                return Err(perr(e.at(), "set elements must be literals"))
                            }
                        }
                    }
                    Ok(Term::Lit(mkset(&vals)))
                }
                _ => Err(perr(*at, format!("unknown term form {head}"))),
            }
        }
    }
}

fn formula(s: &Sexpr) -> Result<Formula, FormulaError> {
    let Sexpr::List(items, at) = s else {
        return Err(perr(s.at(), "expected a formula"));
    };
    let Some(Sexpr::Atom(head, _)) = items.first() else {
        return Err(perr(*at, "expected an operator"));
    };
    let args = &items[1..];
    let f = |i: usize| formula(&args[i]);
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(perr(
                *at,
                format!("{head} takes {n} arguments, got {}", args.len()),
            ))
        }
    };
    Ok(match head.as_str() {
        "=" => {
            arity(2)?;
            Formula::Eq(term(&args[0])?, term(&args[1])?)
        }
        "in" => {
            arity(2)?;
            Formula::In(term(&args[0])?, term(&args[1])?)
        }
        "and" => {
            arity(2)?;
            Formula::and(f(0)?, f(1)?)
        }
        "or" => {
            arity(2)?;
            Formula::or(f(0)?, f(1)?)
        }
        "not" => {
            arity(1)?;
            Formula::not(f(0)?)
        }
        "->" => {
            arity(2)?;
            Formula::implies(f(0)?, f(1)?)
        }
        "all-in" | "ex-in" => {
            arity(3)?;
            let x = ident(&args[0])?;
            let t = term(&args[1])?;
            let p = Box::new(f(2)?);
            if head == "all-in" {
                Formula::AllIn(x, t, p)
            } else {
                Formula::ExIn(x, t, p)
            }
        }
        "all" | "ex" => {
            arity(2)?;
            let x = ident(&args[0])?;
            let p = Box::new(f(1)?);
            if head == "all" {
                Formula::All(x, p)
            } else {
                Formula::Ex(x, p)
            }
        }
        other => return Err(perr(*at, format!("unknown connective {other}"))),
    })
}
