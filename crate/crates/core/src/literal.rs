//! Text forms of naturals and type codes.
//!
//! ```text
//! nat   := decimal | '<' nat (',' nat)* '>' | '(' nat ',' nat ')' | '{' ... '}'
//! type  := 'fin' nat | 'nat' | 'pl(' type ',' type ')'
//!        | ('sigma' | 'pi' | 'sup') '(' type ',' nat ')' | nat
//! ```
//!
//! `<..>` is a prime-power tuple, `(a,b)` the pairing function, and `{..}` a
//! hereditarily finite set embedded as a set tree. Upper-case names stand for
//! built-in codes, see [`named`].

use num_bigint::BigUint;
use thiserror::Error;

use crate::nat::Nat;
use crate::universe::{fin, hf_to_v, nat_type, pi, pl, sigma, sup, Hf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {what} at offset {at} in {src:?}")]
pub struct LiteralError {
    pub src: String,
    pub at: usize,
    pub what: &'static str,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err(&self, what: &'static str) -> LiteralError {
        LiteralError {
            src: self.src.to_string(),
            at: self.pos,
            what,
        }
    }

    fn ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, s: &str) -> bool {
        self.ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &'static str) -> Result<(), LiteralError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(s))
        }
    }

    fn word(&mut self) -> &'a str {
        self.ws();
        let start = self.pos;
        while self
            .rest()
            .starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_' || c == '+')
        {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn done(&mut self) -> Result<(), LiteralError> {
        self.ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.err("end of input"))
        }
    }

    fn nat(&mut self) -> Result<Nat, LiteralError> {
        self.ws();
        if self.eat("<") {
            let mut items = vec![self.nat()?];
            while self.eat(",") {
                items.push(self.nat()?);
            }
            self.expect(">")?;
            return Ok(Nat::tuple(&items));
        }
        if self.eat("(") {
            let a = self.nat()?;
            self.expect(",")?;
            let b = self.nat()?;
            self.expect(")")?;
            return Ok(Nat::pair(&a, &b));
        }
        if self.rest().starts_with('{') {
            let start = self.pos;
            let mut depth = 0usize;
            for (i, c) in self.rest().char_indices() {
                match c {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            self.pos = start + i + 1;
                            let hf = Hf::parse(&self.src[start..self.pos])
                                .map_err(|_| self.err("set literal"))?;
                            return Ok(hf_to_v(&hf));
                        }
                    }
                    _ => {}
                }
            }
            return Err(self.err("closing brace"));
        }
        let at = self.pos;
        let w = self.word();
        if let Some(v) = named(w) {
            return Ok(v);
        }
        if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) {
            self.pos = at;
            return Err(self.err("natural"));
        }
        let v: BigUint = w.parse().map_err(|_| self.err("natural"))?;
        Ok(Nat::from(v))
    }

    fn ty(&mut self) -> Result<Nat, LiteralError> {
        self.ws();
        let save = self.pos;
        let w = self.word();
        match w {
            "fin" => self.nat().map(fin),
            "nat" => Ok(nat_type()),
            "pl" => {
                self.expect("(")?;
                let a = self.ty()?;
                self.expect(",")?;
                let b = self.ty()?;
                self.expect(")")?;
                Ok(pl(&a, &b))
            }
            "sigma" | "pi" | "sup" => {
                self.expect("(")?;
                let n = self.ty()?;
                self.expect(",")?;
                let e = self.nat()?;
                self.expect(")")?;
                Ok(match w {
                    "sigma" => sigma(&n, &e),
                    "pi" => pi(&n, &e),
                    _ => sup(&n, &e),
                })
            }
            _ => {
                self.pos = save;
                self.nat()
            }
        }
    }
}

/// Built-in codes by name.
///
/// | name | code |
/// |------|------|
/// | `ID` | unary identity |
/// | `SUCC` | unary successor |
/// | `B2` | `{b}(p, x) = 0` iff `p = 2` |
/// | `B+` | binary constant 1 |
/// | `GL` | the equality type former |
/// | `D` | numeral map, `{D}(n)` is the set tree of `n` |
/// | `OMEGA` | `sup(nat, D)` |
/// | `TAG` | `{TAG}(n, e) = ({e}(n))0` |
/// | `LPO`, `LPO_LITERAL` | the disjunction transform and its uninverted variant |
pub fn named(name: &str) -> Option<Nat> {
    use crate::kernel::{const_code, proj, succ_code, zero_at};
    Some(match name {
        "ID" => proj(1, 0),
        "SUCC" => succ_code(1, 0),
        "B2" => zero_at(2),
        "B+" => const_code(2, 1u64),
        "GL" => crate::universe::gl_code(),
        "D" => crate::universe::numeral_code(),
        "OMEGA" => crate::universe::omega(),
        "TAG" => crate::realize::tag_code(),
        "LPO" => crate::realize::lpo_code(false),
        "LPO_LITERAL" => crate::realize::lpo_code(true),
        _ => return None,
    })
}

/// Parse a natural: decimal, `<a,b,..>`, `(a,b)` or `{..}`.
pub fn parse_nat(src: &str) -> Result<Nat, LiteralError> {
    let mut c = Cursor::new(src);
    let v = c.nat()?;
    c.done()?;
    Ok(v)
}

/// Parse a type code literal such as `pl(fin 1, fin 3)`.
pub fn parse_type(src: &str) -> Result<Nat, LiteralError> {
    let mut c = Cursor::new(src);
    let v = c.ty()?;
    c.done()?;
    Ok(v)
}
