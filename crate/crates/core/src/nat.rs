//! Exact natural numbers with a symbolic form for values too large to materialize.
//!
//! Codes nest: a composition code carries its sub-codes in prime exponents, so a
//! code of depth three is already a number with billions of digits. Values below
//! `2^SMALL_BITS` are stored as integers. Above that bound a value is kept as the
//! structure it was built from: either a prime-power tuple `<m1,..,mk>` or a pair
//! `j(n,m) = (n+m)^2 + n + 1`. Both encodings are injective, so structural
//! comparison inside one form is exact. Questions that would need the digits of a
//! symbolic value (is this tuple code also in the range of `j`?) are answered with
//! [`Opaque`] unless modular residues settle them.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Values with at most this many bits are stored as integers.
pub const SMALL_BITS: u64 = 1024;

/// Moduli used to separate symbolic values of different forms.
const SEPARATING_PRIMES: [u64; 6] = [
    2_147_483_647,
    2_147_483_629,
    2_147_483_587,
    2_147_483_579,
    2_147_483_563,
    2_147_483_549,
];

/// A question about a symbolic value that cannot be settled without its digits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("opaque arithmetic: {0}")]
pub struct Opaque(pub &'static str);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleError {
    #[error("not a tuple code")]
    NotATupleCode,
    #[error(transparent)]
    Opaque(#[from] Opaque),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("not in the range of the pairing function")]
    NotAPair,
    #[error(transparent)]
    Opaque(#[from] Opaque),
}

#[derive(Clone)]
pub struct Nat(Repr);

#[derive(Clone)]
enum Repr {
    Word(u64),
    Big(Arc<BigUint>),
    Tuple(Arc<Node>),
    Pair(Arc<Node>),
}

struct Node {
    items: Vec<Nat>,
    hash: u64,
}

impl Node {
    fn new(tag: u8, items: Vec<Nat>) -> Arc<Node> {
        let mut h = DefaultHasher::new();
        tag.hash(&mut h);
        items.len().hash(&mut h);
        for it in &items {
            it.hash(&mut h);
        }
        Arc::new(Node {
            items,
            hash: h.finish(),
        })
    }
}

fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 240_000;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                let mut j = i * i;
                while j < LIMIT {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..LIMIT).filter(|&k| sieve[k]).map(|k| k as u64).collect()
    })
}

/// The `i`-th prime, 0-based (`nth_prime(0) == 2`).
pub fn nth_prime(i: usize) -> u64 {
    primes()[i]
}

impl Nat {
    pub fn zero() -> Nat {
        Nat(Repr::Word(0))
    }

    pub fn one() -> Nat {
        Nat(Repr::Word(1))
    }

    fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(w) => Nat(Repr::Word(w)),
            None => Nat(Repr::Big(Arc::new(b))),
        }
    }

    /// Integer value, if this value is stored as an integer.
    pub fn to_biguint(&self) -> Option<BigUint> {
        match &self.0 {
            Repr::Word(w) => Some(BigUint::from(*w)),
            Repr::Big(b) => Some((**b).clone()),
            _ => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|w| usize::try_from(w).ok())
    }

    /// True when the value is held as an integer rather than symbolically.
    pub fn is_small(&self) -> bool {
        matches!(self.0, Repr::Word(_) | Repr::Big(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Word(0))
    }

    /// Prime-power code `p1^(m1+1) * ... * pk^(mk+1)`; the empty tuple is 1.
    pub fn tuple(items: &[Nat]) -> Nat {
        if items.is_empty() {
            return Nat::one();
        }
        let mut estimate = 0f64;
        let mut exps = Vec::with_capacity(items.len());
        for (i, m) in items.iter().enumerate() {
            let Some(e) = m.to_u64().and_then(|w| w.checked_add(1)) else {
                return Nat::symbolic_tuple(items);
            };
            if i >= primes().len() {
                return Nat::symbolic_tuple(items);
            }
            estimate += e as f64 * (nth_prime(i) as f64).log2();
            if estimate > (SMALL_BITS + 8) as f64 {
                return Nat::symbolic_tuple(items);
            }
            exps.push(e);
        }
        let mut acc = BigUint::one();
        for (i, e) in exps.into_iter().enumerate() {
            acc *= BigUint::from(nth_prime(i)).pow(e as u32);
        }
        if acc.bits() > SMALL_BITS {
            Nat::symbolic_tuple(items)
        } else {
            Nat::from_big(acc)
        }
    }

    fn symbolic_tuple(items: &[Nat]) -> Nat {
        Nat(Repr::Tuple(Node::new(0, items.to_vec())))
    }

    /// Inverse of [`Nat::tuple`].
    pub fn as_tuple(&self) -> Result<Vec<Nat>, TupleError> {
        match &self.0 {
            Repr::Word(0) => Err(TupleError::NotATupleCode),
            Repr::Word(w) => decode_word(*w),
            Repr::Big(b) => decode_big(b),
            Repr::Tuple(node) => Ok(node.items.clone()),
            Repr::Pair(_) => {
                // a non-empty tuple code is even
                if self.residue(2) != 0 {
                    Err(TupleError::NotATupleCode)
                } else {
                    Err(Opaque("tuple decoding of a symbolic pair").into())
                }
            }
        }
    }

    /// Display form cut to at most `max` characters, for messages.
    pub fn brief(&self, max: usize) -> String {
        let full = match &self.0 {
            Repr::Word(w) => return w.to_string(),
            _ => self.to_string(),
        };
        if full.len() <= max {
            return full;
        }
        let mut cut = max.saturating_sub(2);
        while !full.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}..", &full[..cut])
    }

    pub(crate) fn is_symbolic_pair(&self) -> bool {
        matches!(self.0, Repr::Pair(_))
    }

    /// The pairing function `j(n,m) = (n+m)^2 + n + 1`.
    pub fn pair(n: &Nat, m: &Nat) -> Nat {
        if let (Repr::Word(a), Repr::Word(b)) = (&n.0, &m.0) {
            let s = *a as u128 + *b as u128;
            if let Some(sq) = s.checked_mul(s) {
                if let Some(v) = sq.checked_add(*a as u128 + 1) {
                    return match u64::try_from(v) {
                        Ok(w) => Nat(Repr::Word(w)),
                        Err(_) => Nat::from_big(BigUint::from(v)),
                    };
                }
            }
        }
        if let (Some(a), Some(b)) = (n.to_biguint(), m.to_biguint()) {
            let s = &a + &b;
            let v = &s * &s + a + 1u32;
            if v.bits() <= SMALL_BITS {
                return Nat::from_big(v);
            }
        }
        Nat(Repr::Pair(Node::new(1, vec![n.clone(), m.clone()])))
    }

    /// Inverse of [`Nat::pair`], `(x)_0` and `(x)_1`.
    pub fn unpair(&self) -> Result<(Nat, Nat), PairError> {
        match &self.0 {
            Repr::Word(0) => Err(PairError::NotAPair),
            Repr::Word(w) => {
                let y = w - 1;
                let s = y.sqrt();
                let n = y - s * s;
                if n <= s {
                    Ok((Nat(Repr::Word(n)), Nat(Repr::Word(s - n))))
                } else {
                    Err(PairError::NotAPair)
                }
            }
            Repr::Big(b) => {
                let y = &**b - 1u32;
                let s = y.sqrt();
                let n = &y - &s * &s;
                if n <= s {
                    let m = &s - &n;
                    Ok((Nat::from_big(n), Nat::from_big(m)))
                } else {
                    Err(PairError::NotAPair)
                }
            }
            Repr::Pair(node) => Ok((node.items[0].clone(), node.items[1].clone())),
            Repr::Tuple(_) => Err(Opaque("unpairing a symbolic tuple code").into()),
        }
    }

    pub fn fst(&self) -> Result<Nat, PairError> {
        self.unpair().map(|(a, _)| a)
    }

    pub fn snd(&self) -> Result<Nat, PairError> {
        self.unpair().map(|(_, b)| b)
    }

    pub fn succ(&self) -> Result<Nat, Opaque> {
        match &self.0 {
            Repr::Word(w) => Ok(match w.checked_add(1) {
                Some(v) => Nat(Repr::Word(v)),
                None => Nat::from_big(BigUint::from(*w) + 1u32),
            }),
            Repr::Big(b) => {
                let v = &**b + 1u32;
                if v.bits() > SMALL_BITS {
                    Err(Opaque("successor overflows the integer range"))
                } else {
                    Ok(Nat::from_big(v))
                }
            }
            _ => Err(Opaque("successor of a symbolic value")),
        }
    }

    /// Truncated predecessor: `pred(0) = 0`.
    pub fn pred(&self) -> Result<Nat, Opaque> {
        match &self.0 {
            Repr::Word(w) => Ok(Nat(Repr::Word(w.saturating_sub(1)))),
            Repr::Big(b) => Ok(Nat::from_big(&**b - 1u32)),
            _ => Err(Opaque("predecessor of a symbolic value")),
        }
    }

    /// Numeric equality. Exact except for symbolic values of different forms that
    /// agree modulo every separating prime.
    pub fn num_eq(&self, other: &Nat) -> Result<bool, Opaque> {
        match (&self.0, &other.0) {
            (Repr::Word(a), Repr::Word(b)) => Ok(a == b),
            (Repr::Big(a), Repr::Big(b)) => Ok(a == b),
            (Repr::Word(_), Repr::Big(_)) | (Repr::Big(_), Repr::Word(_)) => Ok(false),
            (Repr::Word(_) | Repr::Big(_), _) | (_, Repr::Word(_) | Repr::Big(_)) => Ok(false),
            (Repr::Tuple(a), Repr::Tuple(b)) | (Repr::Pair(a), Repr::Pair(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ok(true);
                }
                if a.items.len() != b.items.len() {
                    return Ok(false);
                }
                let mut opaque = None;
                for (x, y) in a.items.iter().zip(&b.items) {
                    match x.num_eq(y) {
                        Ok(true) => {}
                        Ok(false) => return Ok(false),
                        Err(e) => opaque = Some(e),
                    }
                }
                match opaque {
                    None => Ok(true),
                    Some(e) => Err(e),
                }
            }
            _ => {
                if SEPARATING_PRIMES
                    .iter()
                    .any(|&p| self.residue(p) != other.residue(p))
                {
                    Ok(false)
                } else {
                    Err(Opaque("symbolic tuple and pair agree on all residues"))
                }
            }
        }
    }

    /// Numeric order.
    pub fn num_cmp(&self, other: &Nat) -> Result<Ordering, Opaque> {
        match (self.to_biguint(), other.to_biguint()) {
            (Some(a), Some(b)) => Ok(a.cmp(&b)),
            (Some(_), None) => Ok(Ordering::Less),
            (None, Some(_)) => Ok(Ordering::Greater),
            (None, None) => {
                if self.num_eq(other)? {
                    Ok(Ordering::Equal)
                } else {
                    Err(Opaque("ordering of two symbolic values"))
                }
            }
        }
    }

    /// `self mod m` for `1 <= m < 2^32`, computed without materializing the value.
    pub fn residue(&self, m: u64) -> u64 {
        assert!((1..(1 << 32)).contains(&m), "modulus out of range");
        if m == 1 {
            return 0;
        }
        match &self.0 {
            Repr::Word(w) => w % m,
            Repr::Big(b) => (&**b % m).to_u64().unwrap_or(0),
            Repr::Pair(node) => {
                let a = node.items[0].residue(m);
                let b = node.items[1].residue(m);
                let s = (a + b) % m;
                (s * s % m + a + 1) % m
            }
            Repr::Tuple(node) => {
                let mut acc = 1 % m;
                for (i, item) in node.items.iter().enumerate() {
                    let p = nth_prime(i);
                    let f = match item.to_u64().and_then(|w| w.checked_add(1)) {
                        Some(e) => pow_mod(p, e, m),
                        None => {
                            // exponent >= 2^64 > log2(m): generalized Euler reduction
                            let phi = totient(m);
                            let e = (item.residue(phi) + 1) % phi + phi;
                            pow_mod(p, e, m)
                        }
                    };
                    acc = acc * f % m;
                }
                acc
            }
        }
    }
}

fn decode_word(mut w: u64) -> Result<Vec<Nat>, TupleError> {
    let mut out = Vec::new();
    let mut i = 0;
    while w > 1 {
        let p = nth_prime(i);
        let mut e = 0u64;
        while w.is_multiple_of(p) {
            w /= p;
            e += 1;
        }
        if e == 0 {
            return Err(TupleError::NotATupleCode);
        }
        out.push(Nat(Repr::Word(e - 1)));
        i += 1;
    }
    Ok(out)
}

fn decode_big(b: &BigUint) -> Result<Vec<Nat>, TupleError> {
    let mut rest = b.clone();
    let mut out = Vec::new();
    let mut i = 0;
    while !rest.is_one() {
        let p = BigUint::from(nth_prime(i));
        let mut e = 0u64;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&rest, &p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e == 0 {
            return Err(TupleError::NotATupleCode);
        }
        out.push(Nat(Repr::Word(e - 1)));
        i += 1;
    }
    Ok(out)
}

fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc = 1u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

fn totient(m: u64) -> u64 {
    thread_local! {
        static CACHE: std::cell::RefCell<HashMap<u64, u64>> = std::cell::RefCell::new(HashMap::new());
    }
    if let Some(v) = CACHE.with(|c| c.borrow().get(&m).copied()) {
        return v;
    }
    let mut n = m;
    let mut phi = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    CACHE.with(|c| c.borrow_mut().insert(m, phi));
    phi
}

impl From<u64> for Nat {
    fn from(w: u64) -> Nat {
        Nat(Repr::Word(w))
    }
}

impl From<usize> for Nat {
    fn from(w: usize) -> Nat {
        Nat(Repr::Word(w as u64))
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Nat {
        assert!(
            b.bits() <= SMALL_BITS,
            "integer too large; build it as a tuple or pair"
        );
        Nat::from_big(b)
    }
}

/// Structural equality. Coincides with numeric equality except on the (never
/// observed) overlap of symbolic tuples and symbolic pairs; use [`Nat::num_eq`]
/// where the distinction matters.
impl PartialEq for Nat {
    fn eq(&self, other: &Nat) -> bool {
        match (&self.0, &other.0) {
            (Repr::Word(a), Repr::Word(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            (Repr::Tuple(a), Repr::Tuple(b)) | (Repr::Pair(a), Repr::Pair(b)) => {
                Arc::ptr_eq(a, b) || (a.hash == b.hash && a.items == b.items)
            }
            _ => false,
        }
    }
}

impl Eq for Nat {}

impl Hash for Nat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Word(w) => {
                0u8.hash(state);
                w.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
            Repr::Tuple(n) | Repr::Pair(n) => {
                2u8.hash(state);
                n.hash.hash(state);
            }
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Word(w) => write!(f, "{w}"),
            Repr::Big(b) => write!(f, "{b}"),
            Repr::Tuple(node) => {
                f.write_str("<")?;
                for (i, it) in node.items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(">")
            }
            Repr::Pair(node) => write!(f, "({},{})", node.items[0], node.items[1]),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Nat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
