//! Fuel-bounded evaluation of the computation relation.
//!
//! Every clause application costs one unit of fuel. The E-functional also pays
//! one unit per probed argument on top of the probe's own cost. A result that is
//! reached within the budget is exactly the value of the unique derivation; a
//! run that halts with [`Outcome::Stuck`] has no derivation at any fuel.

use std::collections::HashMap;
use std::fmt;

use parking_lot::{Mutex, RwLock};
use serde::Serialize;
use thiserror::Error;

use super::code::{decode, DecodeError, Head, PrimOp};
use super::smn;
use crate::nat::{Nat, PairError};

/// Why no derivation exists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum StuckReason {
    /// The code matches no clause shape.
    Malformed,
    /// The argument count contradicts the clause shape.
    ArgCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum UnknownCause {
    Fuel,
    /// A step needed digits of a value that is only held symbolically.
    Opaque(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Converged(Nat),
    Stuck(StuckReason),
    Unknown { spent: u64, cause: UnknownCause },
}

impl Outcome {
    pub fn value(&self) -> Option<&Nat> {
        match self {
            Outcome::Converged(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged(_))
    }

    /// Converged or Stuck.
    pub fn is_definite(&self) -> bool {
        !matches!(self, Outcome::Unknown { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Converged(n) => write!(f, "Converged {n}"),
            Outcome::Stuck(StuckReason::Malformed) => f.write_str("Stuck Malformed"),
            Outcome::Stuck(StuckReason::ArgCount { expected, got }) => {
                write!(f, "Stuck ArgCount (expected {expected}, got {got})")
            }
            Outcome::Unknown {
                spent,
                cause: UnknownCause::Fuel,
            } => write!(f, "Unknown (fuel {spent} spent)"),
            Outcome::Unknown {
                cause: UnknownCause::Opaque(why),
                ..
            } => write!(f, "Unknown ({why})"),
        }
    }
}

/// Attests that `code`, with the probed argument at `position` and the other
/// arguments fixed to `context`, yields `prefix[p]` for `p < tail_from` and
/// `tail_value > 0` for every `p >= tail_from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TotalityCertificate {
    pub code: Nat,
    pub position: usize,
    pub context: Vec<Nat>,
    pub prefix: Vec<Nat>,
    pub tail_from: u64,
    pub tail_value: Nat,
}

impl TotalityCertificate {
    pub fn args_at(&self, p: u64) -> Vec<Nat> {
        let mut args = self.context.clone();
        let pos = self.position.min(args.len());
        args.insert(pos, Nat::from(p));
        args
    }

    pub fn value_at(&self, p: u64) -> &Nat {
        self.prefix.get(p as usize).unwrap_or(&self.tail_value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("tail value must be positive")]
    ZeroTail,
    #[error("prefix has {got} entries but tail starts at {tail_from}")]
    PrefixLength { got: usize, tail_from: u64 },
    #[error("position {position} exceeds the {len} context arguments")]
    Position { position: usize, len: usize },
    #[error("at argument {at}: certificate says {claimed}, evaluation gives {actual}")]
    Mismatch {
        at: u64,
        claimed: Nat,
        actual: Outcome,
    },
}

/// Tail entries evaluated at registration beyond the prefix.
pub const TAIL_SPOT_CHECKS: u64 = 16;

/// One clause application, recorded when tracing.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEvent {
    pub depth: usize,
    pub clause: &'static str,
    pub code: Nat,
    pub args: Vec<Nat>,
    pub result: Option<Nat>,
    /// The E-functional answered 0 from a certificate.
    pub certified: bool,
}

#[derive(Debug, Clone)]
enum Halt {
    Stuck(StuckReason),
    Fuel,
    Opaque(&'static str),
}

#[derive(Debug, Clone)]
enum Final {
    Value(Nat),
    Stuck(StuckReason),
    Opaque(&'static str),
}

const MEMO_LIMIT: usize = 1 << 20;

/// Cached results: (code, args) to result and its cost.
type Memo = HashMap<(Nat, Vec<Nat>), (Final, u64)>;

/// Evaluator state: registered certificates and a result cache.
///
/// The cache stores final results with their exact fuel cost, so a lookup under a
/// smaller remaining budget reports fuel exhaustion just as re-evaluation would.
pub struct Machine {
    certs: RwLock<Vec<TotalityCertificate>>,
    memo: Mutex<Memo>,
    memo_enabled: bool,
}

impl Default for Machine {
    fn default() -> Self {
        Machine::new()
    }
}

impl Machine {
    pub fn new() -> Machine {
        Machine {
            certs: RwLock::new(Vec::new()),
            memo: Mutex::new(HashMap::new()),
            memo_enabled: true,
        }
    }

    /// A machine without the result cache.
    pub fn uncached() -> Machine {
        Machine {
            memo_enabled: false,
            ..Machine::new()
        }
    }

    pub fn certificates(&self) -> Vec<TotalityCertificate> {
        self.certs.read().clone()
    }

    /// Validate `cert` against the evaluator and register it.
    pub fn register(&self, cert: TotalityCertificate, fuel: u64) -> Result<(), CertificateError> {
        if cert.tail_value.is_zero() {
            return Err(CertificateError::ZeroTail);
        }
        if cert.prefix.len() as u64 != cert.tail_from {
            return Err(CertificateError::PrefixLength {
                got: cert.prefix.len(),
                tail_from: cert.tail_from,
            });
        }
        if cert.position > cert.context.len() {
            return Err(CertificateError::Position {
                position: cert.position,
                len: cert.context.len(),
            });
        }
        for p in 0..cert.tail_from + TAIL_SPOT_CHECKS {
            let claimed = cert.value_at(p);
            let actual = self.apply(&cert.code, &cert.args_at(p), fuel);
            let ok = matches!(&actual, Outcome::Converged(v) if v.num_eq(claimed) == Ok(true));
            if !ok {
                return Err(CertificateError::Mismatch {
                    at: p,
                    claimed: claimed.clone(),
                    actual,
                });
            }
        }
        let mut certs = self.certs.write();
        if !certs.contains(&cert) {
            certs.push(cert);
        }
        Ok(())
    }

    /// The registered certificate for `code` at `position` with the given context.
    pub fn certificate(
        &self,
        code: &Nat,
        position: usize,
        context: &[Nat],
    ) -> Option<TotalityCertificate> {
        self.certs
            .read()
            .iter()
            .find(|c| c.position == position && &c.code == code && c.context == context)
            .cloned()
    }

    pub fn clear_cache(&self) {
        self.memo.lock().clear();
    }

    /// Evaluate `code` on `args` with at most `fuel` clause applications.
    pub fn apply(&self, code: &Nat, args: &[Nat], fuel: u64) -> Outcome {
        let mut run = Run {
            machine: self,
            left: fuel,
            depth: 0,
            trace: None,
            use_memo: self.memo_enabled,
        };
        let r = run.eval(code, args);
        finish(r, fuel, run.left)
    }

    /// Like [`Machine::apply`], also returning one event per clause application.
    pub fn apply_traced(&self, code: &Nat, args: &[Nat], fuel: u64) -> (Outcome, Vec<TraceEvent>) {
        let mut run = Run {
            machine: self,
            left: fuel,
            depth: 0,
            trace: Some(Vec::new()),
            use_memo: false,
        };
        let r = run.eval(code, args);
        let trace = run.trace.take().unwrap_or_default();
        (finish(r, fuel, run.left), trace)
    }

    /// Fuel consumed by a run that reaches a final result, `None` on exhaustion.
    pub fn cost(&self, code: &Nat, args: &[Nat], fuel: u64) -> Option<u64> {
        let mut run = Run {
            machine: self,
            left: fuel,
            depth: 0,
            trace: None,
            use_memo: self.memo_enabled,
        };
        match run.eval(code, args) {
            Err(Halt::Fuel) => None,
            _ => Some(fuel - run.left),
        }
    }

    fn certified_tail(&self, body: &Nat, context: &[Nat]) -> Option<u64> {
        self.certs
            .read()
            .iter()
            .filter(|c| c.position == 0 && &c.code == body && c.context == context)
            .filter(|c| c.prefix.iter().all(|v| !v.is_zero()))
            .map(|c| c.tail_from)
            .min()
    }
}

fn finish(r: Result<Nat, Halt>, fuel: u64, left: u64) -> Outcome {
    match r {
        Ok(n) => Outcome::Converged(n),
        Err(Halt::Stuck(s)) => Outcome::Stuck(s),
        Err(Halt::Fuel) => Outcome::Unknown {
            spent: fuel,
            cause: UnknownCause::Fuel,
        },
        Err(Halt::Opaque(why)) => Outcome::Unknown {
            spent: fuel - left,
            cause: UnknownCause::Opaque(why),
        },
    }
}

struct Run<'m> {
    machine: &'m Machine,
    left: u64,
    depth: usize,
    trace: Option<Vec<TraceEvent>>,
    use_memo: bool,
}

fn check_len(expected: usize, got: usize) -> Result<(), Halt> {
    if expected == got {
        Ok(())
    } else {
        Err(Halt::Stuck(StuckReason::ArgCount { expected, got }))
    }
}

fn opaque_pair(e: PairError) -> Result<Nat, Halt> {
    match e {
        PairError::NotAPair => Ok(Nat::zero()),
        PairError::Opaque(o) => Err(Halt::Opaque(o.0)),
    }
}

impl Run<'_> {
    fn tick(&mut self) -> Result<(), Halt> {
        if self.left == 0 {
            return Err(Halt::Fuel);
        }
        self.left -= 1;
        Ok(())
    }

    fn eval(&mut self, code: &Nat, args: &[Nat]) -> Result<Nat, Halt> {
        stacker::maybe_grow(128 * 1024, 8 * 1024 * 1024, || self.eval_memo(code, args))
    }

    fn eval_memo(&mut self, code: &Nat, args: &[Nat]) -> Result<Nat, Halt> {
        if !self.use_memo {
            return self.eval_node(code, args);
        }
        let key = (code.clone(), args.to_vec());
        let hit = self.machine.memo.lock().get(&key).cloned();
        if let Some((fin, cost)) = hit {
            if cost > self.left {
                self.left = 0;
                return Err(Halt::Fuel);
            }
            self.left -= cost;
            return match fin {
                Final::Value(n) => Ok(n),
                Final::Stuck(s) => Err(Halt::Stuck(s)),
                Final::Opaque(w) => Err(Halt::Opaque(w)),
            };
        }
        let before = self.left;
        let r = self.eval_node(code, args);
        let fin = match &r {
            Ok(n) => Final::Value(n.clone()),
            Err(Halt::Stuck(s)) => Final::Stuck(s.clone()),
            Err(Halt::Opaque(w)) => Final::Opaque(w),
            Err(Halt::Fuel) => return r,
        };
        let mut memo = self.machine.memo.lock();
        if memo.len() >= MEMO_LIMIT {
            memo.clear();
        }
        memo.insert(key, (fin, before - self.left));
        r
    }

    fn eval_node(&mut self, code: &Nat, args: &[Nat]) -> Result<Nat, Halt> {
        self.tick()?;
        let head = match decode(code) {
            Ok(h) => h,
            Err(DecodeError::Malformed) => return Err(Halt::Stuck(StuckReason::Malformed)),
            Err(DecodeError::Opaque(o)) => return Err(Halt::Opaque(o.0)),
        };
        let slot = self.trace.as_mut().map(|t| {
            t.push(TraceEvent {
                depth: self.depth,
                clause: head.clause_name(),
                code: code.clone(),
                args: args.to_vec(),
                result: None,
                certified: false,
            });
            t.len() - 1
        });
        self.depth += 1;
        let r = self.step(&head, args, slot);
        self.depth -= 1;
        if let (Some(i), Ok(v)) = (slot, &r) {
            if let Some(t) = self.trace.as_mut() {
                t[i].result = Some(v.clone());
            }
        }
        r
    }

    fn step(&mut self, head: &Head, args: &[Nat], slot: Option<usize>) -> Result<Nat, Halt> {
        match head {
            Head::Const { arity, value } => {
                check_len(*arity, args.len())?;
                Ok(value.clone())
            }
            Head::Proj { arity, index } => {
                check_len(*arity, args.len())?;
                Ok(args[*index].clone())
            }
            Head::Succ { arity, index } => {
                check_len(*arity, args.len())?;
                args[*index].succ().map_err(|o| Halt::Opaque(o.0))
            }
            Head::Cases { arity } => {
                // the head <0,k+3,4> is applied to k+4 arguments; accept either reading
                if args.len() < 4 || (args.len() != *arity && args.len() != arity + 1) {
                    return Err(Halt::Stuck(StuckReason::ArgCount {
                        expected: (*arity).max(4),
                        got: args.len(),
                    }));
                }
                let same = args[2].num_eq(&args[3]).map_err(|o| Halt::Opaque(o.0))?;
                Ok(if same {
                    args[0].clone()
                } else {
                    args[1].clone()
                })
            }
            Head::Smn { arity } => {
                if args.len() < 2 {
                    return Err(Halt::Stuck(StuckReason::ArgCount {
                        expected: 2,
                        got: args.len(),
                    }));
                }
                check_len(*arity, args.len())?;
                Ok(smn(&args[0], &args[1]))
            }
            Head::Prim { arity, op } => {
                check_len(*arity, args.len())?;
                match op {
                    PrimOp::Pair => Ok(Nat::pair(&args[0], &args[1])),
                    PrimOp::Fst => args[0].fst().or_else(opaque_pair),
                    PrimOp::Snd => args[0].snd().or_else(opaque_pair),
                    PrimOp::Pred => args[0].pred().map_err(|o| Halt::Opaque(o.0)),
                }
            }
            Head::Compose {
                arity,
                outer,
                inner,
            } => {
                check_len(*arity, args.len())?;
                let mut qs = Vec::with_capacity(inner.len());
                for c in inner {
                    qs.push(self.eval(c, args)?);
                }
                self.eval(outer, &qs)
            }
            Head::Univ { arity } => {
                if args.is_empty() {
                    return Err(Halt::Stuck(StuckReason::ArgCount {
                        expected: (*arity).max(1),
                        got: 0,
                    }));
                }
                check_len(*arity, args.len())?;
                self.eval(&args[0], &args[1..])
            }
            Head::Efun { arity, body } => {
                check_len(*arity, args.len())?;
                let tail = self.machine.certified_tail(body, args);
                let mut probe_args = Vec::with_capacity(args.len() + 1);
                probe_args.push(Nat::zero());
                probe_args.extend_from_slice(args);
                let mut p = 0u64;
                loop {
                    if tail.is_some_and(|t| p >= t) {
                        if let (Some(i), Some(t)) = (slot, self.trace.as_mut()) {
                            t[i].certified = true;
                        }
                        return Ok(Nat::zero());
                    }
                    self.tick()?;
                    probe_args[0] = Nat::from(p);
                    let v = self.eval(body, &probe_args)?;
                    if v.is_zero() {
                        return Ok(Nat::from(p + 1));
                    }
                    p += 1;
                }
            }
        }
    }
}
