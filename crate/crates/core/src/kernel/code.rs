//! Decoded view of a code and constructors for every clause head.
//!
//! Clause (0) heads are `<0,k,c,..>` with `c` selecting constant (0), projection
//! (1), successor (2), definition by cases (4) or the S-m-n function (5). Tag 6 is
//! reserved for the primitive recursive pairing operations, see [`PrimOp`].

use std::fmt;

use crate::nat::{Nat, Opaque, TupleError};

/// Primitive recursive initial functions `<0,k,6,op>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimOp {
    /// `j(m0, m1)`
    Pair,
    /// `(m0)_0`, with 0 for numbers outside the range of `j`
    Fst,
    /// `(m0)_1`, with 0 for numbers outside the range of `j`
    Snd,
    /// `m0 - 1`, truncated at 0
    Pred,
}

impl PrimOp {
    pub fn arity(self) -> usize {
        match self {
            PrimOp::Pair => 2,
            PrimOp::Fst | PrimOp::Snd | PrimOp::Pred => 1,
        }
    }

    pub fn index(self) -> u64 {
        match self {
            PrimOp::Pair => 0,
            PrimOp::Fst => 1,
            PrimOp::Snd => 2,
            PrimOp::Pred => 3,
        }
    }

    fn from_index(i: u64) -> Option<PrimOp> {
        Some(match i {
            0 => PrimOp::Pair,
            1 => PrimOp::Fst,
            2 => PrimOp::Snd,
            3 => PrimOp::Pred,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Const {
        arity: usize,
        value: Nat,
    },
    Proj {
        arity: usize,
        index: usize,
    },
    Succ {
        arity: usize,
        index: usize,
    },
    /// `<0,K,4>` applied to `p,q,r,s,m..`
    Cases {
        arity: usize,
    },
    /// `<0,K,5>` applied to `p,q,m..`
    Smn {
        arity: usize,
    },
    Prim {
        arity: usize,
        op: PrimOp,
    },
    /// `<1,k,b,c0..c(k'-1)>`
    Compose {
        arity: usize,
        outer: Nat,
        inner: Vec<Nat>,
    },
    /// `<2,K>` applied to `b,m..`
    Univ {
        arity: usize,
    },
    /// `<3,k,b>`
    Efun {
        arity: usize,
        body: Nat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    Malformed,
    Opaque(Opaque),
}

impl Head {
    /// The arity field as written in the code.
    pub fn declared_arity(&self) -> usize {
        match *self {
            Head::Const { arity, .. }
            | Head::Proj { arity, .. }
            | Head::Succ { arity, .. }
            | Head::Cases { arity }
            | Head::Smn { arity }
            | Head::Prim { arity, .. }
            | Head::Compose { arity, .. }
            | Head::Univ { arity }
            | Head::Efun { arity, .. } => arity,
        }
    }

    pub fn clause_name(&self) -> &'static str {
        match self {
            Head::Const { .. } => "const",
            Head::Proj { .. } => "proj",
            Head::Succ { .. } => "succ",
            Head::Cases { .. } => "cases",
            Head::Smn { .. } => "smn",
            Head::Prim { .. } => "prim",
            Head::Compose { .. } => "compose",
            Head::Univ { .. } => "univ",
            Head::Efun { .. } => "efun",
        }
    }

    pub fn encode(&self) -> Nat {
        let n = |w: usize| Nat::from(w);
        match self {
            Head::Const { arity, value } => Nat::tuple(&[n(0), n(*arity), n(0), value.clone()]),
            Head::Proj { arity, index } => Nat::tuple(&[n(0), n(*arity), n(1), n(*index)]),
            Head::Succ { arity, index } => Nat::tuple(&[n(0), n(*arity), n(2), n(*index)]),
            Head::Cases { arity } => Nat::tuple(&[n(0), n(*arity), n(4)]),
            Head::Smn { arity } => Nat::tuple(&[n(0), n(*arity), n(5)]),
            Head::Prim { arity, op } => Nat::tuple(&[n(0), n(*arity), n(6), Nat::from(op.index())]),
            Head::Compose {
                arity,
                outer,
                inner,
            } => {
                let mut items = vec![n(1), n(*arity), outer.clone()];
                items.extend(inner.iter().cloned());
                Nat::tuple(&items)
            }
            Head::Univ { arity } => Nat::tuple(&[n(2), n(*arity)]),
            Head::Efun { arity, body } => Nat::tuple(&[n(3), n(*arity), body.clone()]),
        }
    }
}

// Arity fields too large for memory can never match an argument list.
fn arity_of(x: &Nat) -> usize {
    x.to_usize().unwrap_or(usize::MAX)
}

/// Decode the clause head of `raw`.
pub fn decode(raw: &Nat) -> Result<Head, DecodeError> {
    let items = match raw.as_tuple() {
        Ok(items) => items,
        Err(TupleError::NotATupleCode) => return Err(DecodeError::Malformed),
        Err(TupleError::Opaque(o)) => {
            if raw.is_symbolic_pair() && !could_be_code(raw) {
                return Err(DecodeError::Malformed);
            }
            return Err(DecodeError::Opaque(o));
        }
    };
    let small = |i: usize| items.get(i).and_then(Nat::to_u64);
    match (small(0), items.len()) {
        (Some(0), 4) => {
            let arity = arity_of(&items[1]);
            match small(2) {
                Some(0) => Ok(Head::Const {
                    arity,
                    value: items[3].clone(),
                }),
                Some(c @ (1 | 2)) => {
                    let index = items[3].to_usize().ok_or(DecodeError::Malformed)?;
                    if index >= arity {
                        return Err(DecodeError::Malformed);
                    }
                    Ok(if c == 1 {
                        Head::Proj { arity, index }
                    } else {
                        Head::Succ { arity, index }
                    })
                }
                Some(6) => {
                    let op = small(3)
                        .and_then(PrimOp::from_index)
                        .ok_or(DecodeError::Malformed)?;
                    if op.arity() != arity {
                        return Err(DecodeError::Malformed);
                    }
                    Ok(Head::Prim { arity, op })
                }
                _ => Err(DecodeError::Malformed),
            }
        }
        (Some(0), 3) => {
            let arity = arity_of(&items[1]);
            match small(2) {
                Some(4) => Ok(Head::Cases { arity }),
                Some(5) => Ok(Head::Smn { arity }),
                _ => Err(DecodeError::Malformed),
            }
        }
        (Some(1), len) if len >= 3 => Ok(Head::Compose {
            arity: arity_of(&items[1]),
            outer: items[2].clone(),
            inner: items[3..].to_vec(),
        }),
        (Some(2), 2) => Ok(Head::Univ {
            arity: arity_of(&items[1]),
        }),
        (Some(3), 3) => Ok(Head::Efun {
            arity: arity_of(&items[1]),
            body: items[2].clone(),
        }),
        _ => Err(DecodeError::Malformed),
    }
}

/// Residue test for a symbolic pair: every head with three or more components
/// is divisible by 30, and `<2,K>` is `8 * 3^(K+1)`.
fn could_be_code(raw: &Nat) -> bool {
    if raw.residue(2) != 0 {
        return false;
    }
    if raw.residue(30) == 0 {
        return true;
    }
    raw.residue(16) == 8 && raw.residue(5) != 0 && raw.residue(7) != 0
}

/// Declared arity of a code, 1 for anything that does not decode.
pub fn declared_arity(code: &Nat) -> usize {
    decode(code).map(|h| h.declared_arity()).unwrap_or(1)
}

pub fn const_code(arity: usize, value: impl Into<Nat>) -> Nat {
    Head::Const {
        arity,
        value: value.into(),
    }
    .encode()
}

pub fn proj(arity: usize, index: usize) -> Nat {
    Head::Proj { arity, index }.encode()
}

pub fn succ_code(arity: usize, index: usize) -> Nat {
    Head::Succ { arity, index }.encode()
}

/// Definition by cases over exactly `p,q,r,s` plus `extra` trailing arguments.
pub fn cases_code(extra: usize) -> Nat {
    Head::Cases { arity: extra + 4 }.encode()
}

/// The S-m-n clause applied to `p,q` plus `extra` trailing arguments.
pub fn smn_clause(extra: usize) -> Nat {
    Head::Smn { arity: extra + 2 }.encode()
}

pub fn prim(op: PrimOp) -> Nat {
    Head::Prim {
        arity: op.arity(),
        op,
    }
    .encode()
}

pub fn compose(arity: usize, outer: Nat, inner: Vec<Nat>) -> Nat {
    Head::Compose {
        arity,
        outer,
        inner,
    }
    .encode()
}

/// `<2,K>`: apply the first argument, as a code, to the remaining `K-1`.
pub fn univ(arity: usize) -> Nat {
    Head::Univ { arity }.encode()
}

pub fn efun(arity: usize, body: Nat) -> Nat {
    Head::Efun { arity, body }.encode()
}

/// A decoded code together with its raw number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    pub raw: Nat,
    pub view: Result<Head, DecodeError>,
}

impl Code {
    pub fn new(raw: Nat) -> Code {
        let view = decode(&raw);
        Code { raw, view }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Const { arity, value } => write!(f, "const[{arity}]({value})"),
            Head::Proj { arity, index } => write!(f, "proj[{arity}]({index})"),
            Head::Succ { arity, index } => write!(f, "succ[{arity}]({index})"),
            Head::Cases { arity } => write!(f, "cases[{arity}]"),
            Head::Smn { arity } => write!(f, "smn[{arity}]"),
            Head::Prim { op, .. } => write!(f, "{op:?}"),
            Head::Compose { arity, inner, .. } => write!(f, "compose[{arity}]/{}", inner.len()),
            Head::Univ { arity } => write!(f, "univ[{arity}]"),
            Head::Efun { arity, .. } => write!(f, "E[{arity}]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heads_round_trip() {
        let heads = vec![
            Head::Const {
                arity: 1,
                value: Nat::from(7u64),
            },
            Head::Proj { arity: 2, index: 1 },
            Head::Succ { arity: 2, index: 0 },
            Head::Cases { arity: 4 },
            Head::Smn { arity: 3 },
            Head::Prim {
                arity: 2,
                op: PrimOp::Pair,
            },
            Head::Compose {
                arity: 1,
                outer: proj(1, 0),
                inner: vec![proj(1, 0)],
            },
            Head::Univ { arity: 2 },
            Head::Efun {
                arity: 1,
                body: proj(2, 0),
            },
        ];
        for h in heads {
            assert_eq!(decode(&h.encode()), Ok(h));
        }
    }

    #[test]
    fn small_codes_have_exact_values() {
        // <0,1,0,7> = 2 * 3^2 * 5 * 7^8
        assert_eq!(const_code(1, 7u64), Nat::from(2u64 * 9 * 5 * 5_764_801));
        assert_eq!(proj(2, 0), Nat::from(2u64 * 27 * 25 * 7));
    }

    #[test]
    fn malformed_shapes() {
        for raw in [0u64, 1, 10, 2, 108] {
            assert_eq!(
                decode(&Nat::from(raw)),
                Err(DecodeError::Malformed),
                "{raw}"
            );
        }
        // projection index out of range
        let bad = Nat::tuple(&[0u64.into(), 2u64.into(), 1u64.into(), 2u64.into()]);
        assert_eq!(decode(&bad), Err(DecodeError::Malformed));
        // clause (0) has no tag 3
        let bad = Nat::tuple(&[0u64.into(), 1u64.into(), 3u64.into(), 0u64.into()]);
        assert_eq!(decode(&bad), Err(DecodeError::Malformed));
        // primitive with the wrong arity
        let bad = Nat::tuple(&[0u64.into(), 1u64.into(), 6u64.into(), 0u64.into()]);
        assert_eq!(decode(&bad), Err(DecodeError::Malformed));
    }
}
