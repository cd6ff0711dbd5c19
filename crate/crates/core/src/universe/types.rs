//! Type codes built with the pairing function.

use crate::nat::Nat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeView {
    /// `(0,n)`: the type `{0..n-1}`
    Fin(Nat),
    /// `(1,0)`
    Nat,
    /// `(2,(a,b))`: binary sum
    Pl(Nat, Nat),
    /// `(3,(n,e))`: dependent sum over `n` of `{e}(k)`
    Sigma(Nat, Nat),
    /// `(4,(n,e))`: dependent product
    Pi(Nat, Nat),
    /// `(5,(n,e))`: a well-founded tree with branching type `n`
    Sup(Nat, Nat),
    /// No tag applies.
    Foreign,
    /// The tag could not be read off a symbolic value.
    Opaque,
}

fn tagged(tag: u64, body: &Nat) -> Nat {
    Nat::pair(&Nat::from(tag), body)
}

pub fn fin(n: impl Into<Nat>) -> Nat {
    tagged(0, &n.into())
}

pub fn nat_type() -> Nat {
    tagged(1, &Nat::zero())
}

pub fn pl(a: &Nat, b: &Nat) -> Nat {
    tagged(2, &Nat::pair(a, b))
}

pub fn sigma(n: &Nat, e: &Nat) -> Nat {
    tagged(3, &Nat::pair(n, e))
}

pub fn pi(n: &Nat, e: &Nat) -> Nat {
    tagged(4, &Nat::pair(n, e))
}

pub fn sup(n: &Nat, e: &Nat) -> Nat {
    tagged(5, &Nat::pair(n, e))
}

pub fn view(t: &Nat) -> TypeView {
    use crate::nat::PairError;
    let (tag, body) = match t.unpair() {
        Ok(p) => p,
        Err(PairError::NotAPair) => return TypeView::Foreign,
        Err(PairError::Opaque(_)) => return TypeView::Opaque,
    };
    let Some(tag) = tag.to_u64() else {
        return TypeView::Foreign;
    };
    match tag {
        0 => TypeView::Fin(body),
        1 if body.is_zero() => TypeView::Nat,
        2..=5 => match body.unpair() {
            Ok((a, b)) => match tag {
                2 => TypeView::Pl(a, b),
                3 => TypeView::Sigma(a, b),
                4 => TypeView::Pi(a, b),
                _ => TypeView::Sup(a, b),
            },
            Err(PairError::NotAPair) => TypeView::Foreign,
            Err(PairError::Opaque(_)) => TypeView::Opaque,
        },
        _ => TypeView::Foreign,
    }
}

/// Branching type of a tree code.
pub fn bar(alpha: &Nat) -> Option<Nat> {
    match view(alpha) {
        TypeView::Sup(n, _) => Some(n),
        _ => None,
    }
}

/// Subtree selector of a tree code.
pub fn tilde_code(alpha: &Nat) -> Option<Nat> {
    match view(alpha) {
        TypeView::Sup(_, e) => Some(e),
        _ => None,
    }
}
