//! Index transformers: S-m-n, closures, the recursion theorem, and a small
//! expression language compiled to codes.

use super::code::{
    cases_code, compose, const_code, declared_arity, efun, prim, proj, smn_clause, succ_code, univ,
    PrimOp,
};
use crate::nat::Nat;

/// `Sb0(p, q)`: fixes the first argument of `p` to `q`.
///
/// With `k` one less than the declared arity of `p`, the result is
/// `<1, k, p, const(k,q), proj(k,0), .., proj(k,k-1)>`.
pub fn smn(p: &Nat, q: &Nat) -> Nat {
    let k = declared_arity(p).saturating_sub(1);
    let mut inner = Vec::with_capacity(k + 1);
    inner.push(const_code(k, q.clone()));
    inner.extend((0..k).map(|i| proj(k, i)));
    compose(k, p.clone(), inner)
}

/// Index of `x -> {p}(x, params..)`.
pub fn close_over(p: &Nat, params: &[Nat]) -> Nat {
    let mut inner = Vec::with_capacity(params.len() + 1);
    inner.push(proj(1, 0));
    inner.extend(params.iter().map(|a| const_code(1, a.clone())));
    compose(1, p.clone(), inner)
}

/// Recursion theorem: for `f` of arity `r+2`, a code `e` of arity `r+1` with
/// `{e}(x..) = {f}(e, x..)`.
///
/// `h(y, x..) = f(Sb0(y, y), x..)` and `e = Sb0(h, h)`; the inner `Sb0` runs
/// through the S-m-n clause, so unfolding `e` costs a fixed number of steps.
pub fn fix(f: &Nat) -> Nat {
    let n = declared_arity(f).max(2);
    let mut inner = Vec::with_capacity(n);
    inner.push(compose(n, smn_clause(0), vec![proj(n, 0), proj(n, 0)]));
    inner.extend((1..n).map(|i| proj(n, i)));
    let h = compose(n, f.clone(), inner);
    smn(&h, &h)
}

/// Clause applications spent unfolding `fix(f)` before `f` itself is entered,
/// for an `f` of declared arity `n`.
pub fn fix_overhead(n: usize) -> u64 {
    // outer compose + const + (n-1) projections, h's compose + smn compose
    // (1 + 2 projections + smn clause) + (n-1) projections
    let k = n as u64 - 1;
    (1 + 1 + k) + (1 + 4 + k)
}

/// Expressions over positional arguments, compiled to codes of a fixed arity.
///
/// Evaluation is strict except in [`Expr::IfEq`], which selects a branch code
/// and only then runs it.
#[derive(Debug, Clone)]
pub enum Expr {
    Arg(usize),
    Lit(Nat),
    Succ(Box<Expr>),
    Prim(PrimOp, Vec<Expr>),
    /// Call a fixed code.
    Call(Nat, Vec<Expr>),
    /// Call a code computed at run time.
    Apply(Box<Expr>, Vec<Expr>),
    /// The S-m-n function on two computed values.
    Smn(Box<Expr>, Box<Expr>),
    IfEq {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    /// `E(p -> {body}(p, args..))`
    Search(Nat, Vec<Expr>),
}

impl Expr {
    pub fn arg(i: usize) -> Expr {
        Expr::Arg(i)
    }

    pub fn lit(n: impl Into<Nat>) -> Expr {
        Expr::Lit(n.into())
    }

    pub fn succ(e: Expr) -> Expr {
        Expr::Succ(Box::new(e))
    }

    pub fn pair(a: Expr, b: Expr) -> Expr {
        Expr::Prim(PrimOp::Pair, vec![a, b])
    }

    pub fn fst(a: Expr) -> Expr {
        Expr::Prim(PrimOp::Fst, vec![a])
    }

    pub fn snd(a: Expr) -> Expr {
        Expr::Prim(PrimOp::Snd, vec![a])
    }

    pub fn pred(a: Expr) -> Expr {
        Expr::Prim(PrimOp::Pred, vec![a])
    }

    pub fn call(code: Nat, args: Vec<Expr>) -> Expr {
        Expr::Call(code, args)
    }

    pub fn apply(f: Expr, args: Vec<Expr>) -> Expr {
        Expr::Apply(Box::new(f), args)
    }

    pub fn smn(p: Expr, q: Expr) -> Expr {
        Expr::Smn(Box::new(p), Box::new(q))
    }

    /// Nested S-m-n: the index of `x.. -> {p}(params.., x..)`.
    pub fn close(p: Expr, params: Vec<Expr>) -> Expr {
        params.into_iter().fold(p, Expr::smn)
    }

    pub fn if_eq(lhs: Expr, rhs: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::IfEq {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
    }

    pub fn search(body: Nat, args: Vec<Expr>) -> Expr {
        Expr::Search(body, args)
    }

    /// Compile to a code taking `arity` arguments.
    pub fn compile(&self, arity: usize) -> Nat {
        let k = arity;
        let all = |es: &[Expr]| es.iter().map(|e| e.compile(k)).collect::<Vec<_>>();
        match self {
            Expr::Arg(i) => {
                assert!(*i < k, "argument {i} out of range for arity {k}");
                proj(k, *i)
            }
            Expr::Lit(n) => const_code(k, n.clone()),
            Expr::Succ(e) => match **e {
                Expr::Arg(i) => succ_code(k, i),
                _ => compose(k, succ_code(1, 0), vec![e.compile(k)]),
            },
            Expr::Prim(op, es) => {
                assert_eq!(op.arity(), es.len());
                compose(k, prim(*op), all(es))
            }
            Expr::Call(c, es) => compose(k, c.clone(), all(es)),
            Expr::Apply(f, es) => {
                let mut inner = vec![f.compile(k)];
                inner.extend(all(es));
                compose(k, univ(es.len() + 1), inner)
            }
            Expr::Smn(p, q) => compose(k, smn_clause(0), vec![p.compile(k), q.compile(k)]),
            Expr::IfEq {
                lhs,
                rhs,
                then,
                otherwise,
            } => {
                let select = compose(
                    k,
                    cases_code(0),
                    vec![
                        const_code(k, then.compile(k)),
                        const_code(k, otherwise.compile(k)),
                        lhs.compile(k),
                        rhs.compile(k),
                    ],
                );
                let mut inner = vec![select];
                inner.extend((0..k).map(|i| proj(k, i)));
                compose(k, univ(k + 1), inner)
            }
            Expr::Search(body, es) => compose(k, efun(es.len(), body.clone()), all(es)),
        }
    }
}

/// Unary code returning `entries[x]` for `x < entries.len()` and `default` otherwise.
pub fn table(entries: &[Nat], default: Nat) -> Nat {
    let mut e = Expr::Lit(default);
    for (i, v) in entries.iter().enumerate().rev() {
        e = Expr::if_eq(Expr::arg(0), Expr::lit(i), Expr::Lit(v.clone()), e);
    }
    e.compile(1)
}

/// The value every unary application of `code` returns, when that can be read
/// off the code: constants and projections of constant components.
pub fn constant_unary_value(code: &Nat) -> Option<Nat> {
    use super::code::{decode, Head};
    match decode(code).ok()? {
        Head::Const { arity: 1, value } => Some(value),
        Head::Compose {
            arity: 1,
            outer,
            inner,
        } => {
            let Head::Proj { arity, index } = decode(&outer).ok()? else {
                return None;
            };
            if arity != inner.len() {
                return None;
            }
            // every component must converge on any single argument
            for c in &inner {
                match decode(c).ok()? {
                    Head::Const { arity: 1, .. } | Head::Proj { arity: 1, .. } => {}
                    _ => return None,
                }
            }
            match decode(&inner[index]).ok()? {
                Head::Const { value, .. } => Some(value),
                _ => None,
            }
        }
        _ => None,
    }
}
