//! Set trees: hereditarily finite literals, the von Neumann naturals, `omega`,
//! and the equality type `gl`.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use super::types::{fin, nat_type, sup};
use crate::kernel::{fix, proj, smn, table, Expr};
use crate::nat::Nat;

/// A hereditarily finite set literal such as `{{},{{}}}`. Element order and
/// repetitions are kept as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hf(pub Vec<Hf>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad set literal at byte {at}: {msg}")]
pub struct HfParseError {
    pub at: usize,
    pub msg: &'static str,
}

impl Hf {
    pub fn empty() -> Hf {
        Hf(Vec::new())
    }

    pub fn parse(src: &str) -> Result<Hf, HfParseError> {
        let bytes: Vec<(usize, u8)> = src
            .bytes()
            .enumerate()
            .filter(|(_, b)| !b.is_ascii_whitespace())
            .collect();
        let mut pos = 0;
        let set = parse_set(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(HfParseError {
                at: bytes[pos].0,
                msg: "trailing input",
            });
        }
        Ok(set)
    }

    /// Nesting depth; `{}` has rank 0.
    pub fn rank(&self) -> usize {
        self.0.iter().map(|a| a.rank() + 1).max().unwrap_or(0)
    }

    /// Sorted, duplicate-free form; two literals denote the same set iff their
    /// canonical forms are identical.
    pub fn canonical(&self) -> Hf {
        let mut items: Vec<Hf> = self.0.iter().map(Hf::canonical).collect();
        items.sort();
        items.dedup();
        Hf(items)
    }

    pub fn extensionally_equal(&self, other: &Hf) -> bool {
        self.canonical() == other.canonical()
    }

    /// The von Neumann numeral `n`.
    pub fn von_neumann(n: usize) -> Hf {
        Hf((0..n).map(Hf::von_neumann).collect())
    }
}

fn parse_set(bytes: &[(usize, u8)], pos: &mut usize) -> Result<Hf, HfParseError> {
    let at = |p: usize| bytes.get(p).map(|b| b.0).unwrap_or(usize::MAX);
    if bytes.get(*pos).map(|b| b.1) != Some(b'{') {
        return Err(HfParseError {
            at: at(*pos),
            msg: "expected '{'",
        });
    }
    *pos += 1;
    let mut items = Vec::new();
    if bytes.get(*pos).map(|b| b.1) == Some(b'}') {
        *pos += 1;
        return Ok(Hf(items));
    }
    loop {
        items.push(parse_set(bytes, pos)?);
        match bytes.get(*pos).map(|b| b.1) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(Hf(items));
            }
            _ => {
                return Err(HfParseError {
                    at: at(*pos),
                    msg: "expected ',' or '}'",
                })
            }
        }
    }
}

impl fmt::Display for Hf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// `x -> x`
pub fn identity() -> Nat {
    proj(1, 0)
}

/// Tree with branching type `fin k` whose `i`-th subtree is `elements[i]`;
/// the empty set is `sup(fin 0, x -> x)`.
pub fn mkset(elements: &[Nat]) -> Nat {
    if elements.is_empty() {
        return sup(&fin(0u64), &identity());
    }
    sup(&fin(elements.len()), &table(elements, Nat::zero()))
}

pub fn hf_to_v(s: &Hf) -> Nat {
    let elems: Vec<Nat> = s.0.iter().map(hf_to_v).collect();
    mkset(&elems)
}

fn bar_e(a: Expr) -> Expr {
    Expr::fst(Expr::snd(a))
}

fn tilde_e(a: Expr) -> Expr {
    Expr::snd(Expr::snd(a))
}

fn tagged_e(tag: u64, n: Expr, e: Expr) -> Expr {
    Expr::pair(Expr::lit(tag), Expr::pair(n, e))
}

fn at(f: Expr, x: Expr) -> Expr {
    Expr::apply(f, vec![x])
}

/// Code of the two-place function `gl`: `{gl_code()}(a, b)` is the type whose
/// elements realize `a = b`.
///
/// ```text
/// a gl b = sigma(pi(bar a, x. sigma(bar b, y. ~a x gl ~b y)),
///                z. pi(bar b, y. sigma(bar a, x. ~a x gl ~b y)))
/// ```
pub fn gl_code() -> Nat {
    static GL: OnceLock<Nat> = OnceLock::new();
    GL.get_or_init(|| {
        use Expr as E;
        let (s, a, b) = (E::arg(0), E::arg(1), E::arg(2));
        // (self, a, b, x, y) and (self, a, b, y, x)
        let l2 = E::apply(
            E::arg(0),
            vec![
                at(tilde_e(E::arg(1)), E::arg(3)),
                at(tilde_e(E::arg(2)), E::arg(4)),
            ],
        )
        .compile(5);
        let l4 = E::apply(
            E::arg(0),
            vec![
                at(tilde_e(E::arg(1)), E::arg(4)),
                at(tilde_e(E::arg(2)), E::arg(3)),
            ],
        )
        .compile(5);
        let params4 = || vec![E::arg(0), E::arg(1), E::arg(2), E::arg(3)];
        let l1 = tagged_e(3, bar_e(E::arg(2)), E::close(E::Lit(l2), params4())).compile(4);
        let l3 = tagged_e(3, bar_e(E::arg(1)), E::close(E::Lit(l4), params4())).compile(4);
        let params3 = || vec![s.clone(), a.clone(), b.clone()];
        let left = tagged_e(4, bar_e(a.clone()), E::close(E::Lit(l1), params3()));
        let right = tagged_e(4, bar_e(b.clone()), E::close(E::Lit(l3), params3()));
        let body = tagged_e(3, left, E::smn(E::Lit(proj(2, 0)), right));
        fix(&body.compile(3))
    })
    .clone()
}

/// `{le}(k, m) = 1` if `k <= m`, else 0.
fn le_code() -> Nat {
    use Expr as E;
    let body = E::if_eq(
        E::arg(1),
        E::lit(0u64),
        E::lit(1u64),
        E::if_eq(
            E::arg(2),
            E::lit(0u64),
            E::lit(0u64),
            E::apply(E::arg(0), vec![E::pred(E::arg(1)), E::pred(E::arg(2))]),
        ),
    );
    fix(&body.compile(3))
}

/// `{r}(self, n, k) = {self}(k)` if `k <= n`, else 0.
fn restrict_code() -> Nat {
    use Expr as E;
    E::if_eq(
        E::call(le_code(), vec![E::arg(2), E::arg(1)]),
        E::lit(1u64),
        E::apply(E::arg(0), vec![E::arg(2)]),
        E::lit(0u64),
    )
    .compile(3)
}

/// Code `d` with `{d}(0) = sup(fin 0, x -> x)` and
/// `{d}(n+1) = sup(fin (n+1), d|n)`, where `{d|n}(k) = {d}(k)` for `k <= n`
/// and 0 otherwise.
pub fn numeral_code() -> Nat {
    static D: OnceLock<Nat> = OnceLock::new();
    D.get_or_init(|| {
        use Expr as E;
        let body = E::if_eq(
            E::arg(1),
            E::lit(0u64),
            E::Lit(mkset(&[])),
            tagged_e(
                5,
                E::pair(E::lit(0u64), E::arg(1)),
                E::close(E::Lit(restrict_code()), vec![E::arg(0), E::pred(E::arg(1))]),
            ),
        );
        fix(&body.compile(2))
    })
    .clone()
}

/// `sup(nat, d)`.
pub fn omega() -> Nat {
    sup(&nat_type(), &numeral_code())
}

/// The subtree selector `d|n` of the numeral `n + 1`, built on the host side.
pub fn restriction_index(n: u64) -> Nat {
    smn(&smn(&restrict_code(), &numeral_code()), &Nat::from(n))
}

/// Host-side construction of the numeral `n`, matching `{d}(n)`.
pub fn vnat_host(n: u64) -> Nat {
    if n == 0 {
        return mkset(&[]);
    }
    sup(&fin(n), &restriction_index(n - 1))
}
