use std::collections::BTreeSet;

use erec_core::kernel::{const_code, Machine};
use erec_core::realize::{run_lpo, Branch, Env, Formula, LpoInstance, PredSpec, Realizer, Term};
use erec_core::universe::{hf_to_v, lookup, tilde_code, Hf, Universe};
use erec_core::{Nat, Verdict};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::ensure;
use crate::gen;

fn hf(s: &str) -> Nat {
    hf_to_v(&Hf::parse(s).expect("literal"))
}

fn lit(s: &str) -> Term {
    Term::Lit(hf(s))
}

// each set with a second spelling
const SETS: [(&str, &str); 6] = [
    ("{}", "{}"),
    ("{{}}", "{{},{}}"),
    ("{{{}}}", "{{{}},{{}}}"),
    ("{{},{{}}}", "{{{}},{}}"),
    ("{{{{}}}}", "{{{{}}},{{{}}}}"),
    ("{{},{{{}}}}", "{{{{}}},{},{}}"),
];

fn members(s: &str) -> Vec<String> {
    Hf::parse(s)
        .expect("literal")
        .0
        .iter()
        .map(|h| h.to_string())
        .collect()
}

fn true_atom(r: &mut gen::Rand) -> Formula {
    let (a, b) = SETS[r.gen_range(0..SETS.len())];
    if r.gen_bool(0.5) {
        return Formula::eq(lit(a), lit(b));
    }
    let (s, _) = *SETS[1..].choose(r).unwrap();
    let xs = members(s);
    let x = xs.choose(r).unwrap();
    Formula::member(lit(x), lit(s))
}

fn false_atom(r: &mut gen::Rand) -> Formula {
    loop {
        let (a, _) = SETS[r.gen_range(0..SETS.len())];
        let (b, _) = SETS[r.gen_range(0..SETS.len())];
        if a == b {
            continue;
        }
        return if r.gen_bool(0.5) {
            Formula::eq(lit(a), lit(b))
        } else if members(b).iter().any(|m| {
            Hf::parse(m)
                .unwrap()
                .extensionally_equal(&Hf::parse(a).unwrap())
        }) {
            continue;
        } else {
            Formula::member(lit(a), lit(b))
        };
    }
}

fn swap(w: &Nat) -> Option<Nat> {
    let (a, b) = w.unpair().ok()?;
    (a != b).then(|| Nat::pair(&b, &a))
}

fn flip(w: &Nat) -> Option<Nat> {
    let (t, x) = w.unpair().ok()?;
    let t = t.to_u64().filter(|&t| t < 2)?;
    Some(Nat::pair(&Nat::from(1 - t), &x))
}

struct Case {
    kind: &'static str,
    phi: Formula,
    good: Vec<Nat>,
    bad: Vec<(&'static str, Nat, Formula)>,
}

impl Case {
    fn new(kind: &'static str, phi: Formula, good: Nat) -> Case {
        Case {
            kind,
            phi,
            good: vec![good],
            bad: vec![],
        }
    }

    fn mutant(mut self, how: &'static str, w: Option<Nat>) -> Case {
        if let Some(w) = w {
            self.bad.push((how, w, self.phi.clone()));
        }
        self
    }
}

fn case(r: &mut gen::Rand, re: &Realizer<'_, '_>, kind: usize) -> Option<Case> {
    let synth = |phi: &Formula| re.synthesize(phi, &Env::new()).ok().flatten();
    Some(match kind {
        0 => {
            let phi = Formula::and(true_atom(r), true_atom(r));
            let w = synth(&phi)?;
            Case::new("and", phi, w.clone()).mutant("component swap", swap(&w))
        }
        1 => {
            let (t, f) = (true_atom(r), false_atom(r));
            let phi = if r.gen_bool(0.5) {
                Formula::or(t, f)
            } else {
                Formula::or(f, t)
            };
            let w = synth(&phi)?;
            Case::new("or", phi, w.clone())
                .mutant("tag flip", flip(&w))
                .mutant("component swap", swap(&w))
        }
        2 => {
            let concl = if r.gen_bool(0.5) {
                Formula::and(true_atom(r), true_atom(r))
            } else {
                Formula::or(false_atom(r), true_atom(r))
            };
            let phi = Formula::implies(true_atom(r), concl.clone());
            let w = synth(&concl)?;
            let k = |v: Option<Nat>| v.map(|v| const_code(1, v));
            Case::new("implies", phi, const_code(1, w.clone()))
                .mutant("tag flip", k(flip(&w)))
                .mutant("component swap", k(swap(&w)))
        }
        3 => {
            // every element of s is in s, beside a false disjunct
            let (s, _) = *SETS[1..].choose(r).unwrap();
            let f = false_atom(r);
            let left = r.gen_bool(0.5);
            let body = |x: Term| {
                let m = Formula::member(x, lit(s));
                if left {
                    Formula::or(m, f.clone())
                } else {
                    Formula::or(f.clone(), m)
                }
            };
            let phi = Formula::all_in("x", lit(s), body(Term::var("x")));
            let w = synth(&phi)?;
            let f = tilde_code(&hf(s))?;
            let n = members(s).len();
            let keys: Vec<Nat> = (0..n as u64).map(Nat::from).collect();
            let mut ws = Vec::new();
            for k in &keys {
                let c = re
                    .universe()
                    .apply(&f, std::slice::from_ref(k))
                    .value()?
                    .clone();
                ws.push(synth(&body(Term::Lit(c)))?);
            }
            let flipped: Option<Vec<Nat>> = ws.iter().map(flip).collect();
            let swapped: Option<Vec<Nat>> = ws.iter().map(swap).collect();
            Case::new("all-in", phi, w)
                .mutant("tag flip", flipped.map(|v| lookup(&keys, &v)))
                .mutant("component swap", swapped.map(|v| lookup(&keys, &v)))
        }
        4 => {
            // a unique witness among extensionally distinct members
            let s = ["{{},{{}}}", "{{},{{{}}}}", "{{{{}}},{{}},{}}"]
                .choose(r)
                .unwrap();
            let xs = members(s);
            let i = r.gen_range(0..xs.len());
            let target = if r.gen_bool(0.5) {
                xs[i].clone()
            } else {
                SETS.iter()
                    .find(|(a, _)| *a == xs[i])
                    .map(|(_, b)| b.to_string())
                    .unwrap_or(xs[i].clone())
            };
            let mut body = Formula::eq(Term::var("x"), lit(&target));
            if r.gen_bool(0.5) {
                body = Formula::and(body, true_atom(r));
            }
            let phi = Formula::ex_in("x", lit(s), body);
            let w = synth(&phi)?;
            let (k, body) = w.unpair().ok()?;
            let other = Nat::from((i as u64 + 1) % xs.len() as u64);
            Case::new("ex-in", phi, w.clone())
                .mutant("component swap", swap(&w))
                .mutant(
                    "witness change",
                    (k != other).then(|| Nat::pair(&other, &body)),
                )
        }
        5 => {
            let samples = ["{}", "{{}}", "{{{}}}", "{{},{{}}}"];
            let i = r.gen_range(0..samples.len());
            let (_, spelled) = SETS.iter().find(|(a, _)| *a == samples[i]).unwrap();
            let target = if r.gen_bool(0.5) { samples[i] } else { spelled };
            let mut body = Formula::eq(Term::var("x"), lit(target));
            if r.gen_bool(0.5) {
                body = Formula::and(body, true_atom(r));
            }
            let phi = Formula::ex("x", body);
            let w = synth(&phi)?;
            let (_, body) = w.unpair().ok()?;
            let wrong = hf(samples[(i + 1) % samples.len()]);
            Case::new("ex", phi, w.clone())
                .mutant("component swap", swap(&w))
                .mutant("witness change", Some(Nat::pair(&wrong, &body)))
        }
        6 => {
            let empty = || Formula::member(Term::var("x"), lit("{}"));
            let t = true_atom(r);
            let wt = synth(&t)?;
            // the flipped tag must land on a side that needs a pair
            let (body, v, inner) = match r.gen_range(0..3) {
                0 => (
                    Formula::or(empty(), Formula::not(empty())),
                    Nat::pair(&Nat::one(), &Nat::zero()),
                    false,
                ),
                1 => (Formula::or(t, empty()), Nat::pair(&Nat::zero(), &wt), false),
                _ => (
                    Formula::and(Formula::not(empty()), Formula::or(empty(), t)),
                    Nat::pair(&Nat::zero(), &Nat::pair(&Nat::one(), &wt)),
                    true,
                ),
            };
            let phi = Formula::all("x", body);
            let flipped = if inner {
                v.unpair()
                    .ok()
                    .and_then(|(a, b)| flip(&b).map(|b| Nat::pair(&a, &b)))
            } else {
                flip(&v)
            };
            let k = |v: Option<Nat>| v.map(|v| const_code(1, v));
            Case::new("all", phi, const_code(1, v.clone()))
                .mutant("tag flip", k(flipped))
                .mutant("component swap", k(swap(&v)))
        }
        _ => {
            let f = false_atom(r);
            let t = true_atom(r);
            let any = Nat::from(r.gen_range(1..1000u64));
            let mut c = Case::new("not", Formula::not(f), Nat::zero());
            c.good.push(any.clone());
            c.bad.push(("refuted negation", any, Formula::not(t)));
            c
        }
    })
}

pub fn metamorphic() -> Result<String, String> {
    const CASES: usize = 200;
    let m = Machine::new();
    let u = Universe::new(&m);
    let re = Realizer::new(&u);
    let mut rng = gen::rng(7);
    let mut seen = BTreeSet::new();
    let (mut done, mut mutants, mut attempts) = (0, 0, 0);
    while done < CASES {
        attempts += 1;
        ensure(attempts < 20 * CASES, || {
            format!("only {done} distinct cases generated")
        })?;
        let kind = done % 8;
        let Some(c) = case(&mut rng, &re, kind) else {
            return Err(format!("no realizer constructed for a {kind} case"));
        };
        if c.bad.is_empty() || !seen.insert(format!("{} {:?}", c.phi, c.good)) {
            continue;
        }
        for w in &c.good {
            let v = re.check(w, &c.phi);
            // universal statements over all sets are only ever spot-checked
            let ok = if c.kind == "all" {
                !v.is_no()
            } else {
                v.is_yes()
            };
            ensure(ok, || {
                format!("{} case {}: {} rejected: {v}", c.kind, c.phi, w.brief(40))
            })?;
        }
        for (how, w, phi) in &c.bad {
            let v = re.check(w, phi);
            ensure(matches!(v, Verdict::No(_)), || {
                format!("{} case {phi}: {how} {} accepted: {v}", c.kind, w.brief(40))
            })?;
            mutants += 1;
        }
        done += 1;
    }
    Ok(format!(
        "{done} cases over 8 connectives, {mutants} mutants rejected"
    ))
}

fn never(p: &str, r: &str, b: &str) -> LpoInstance {
    LpoInstance {
        pred: PredSpec::Never,
        var: "x".into(),
        p: Formula::parse(p).expect("formula"),
        r: Formula::parse(r).expect("formula"),
        env: Env::from([("B".to_string(), hf(b))]),
    }
}

pub fn lpo() -> Result<String, String> {
    let m = Machine::new();
    let u = Universe::new(&m);
    let re = Realizer::new(&u);
    let hits = [
        "n==0",
        "n==1",
        "n==3",
        "n==7",
        "n<2",
        "n<5",
        "n>=2",
        "n>=6",
        "n in {2,5}",
        "n in {1,4}",
    ];
    for src in hits {
        let pred: PredSpec = src.parse().map_err(|e| format!("{e:?}"))?;
        let inst = LpoInstance::with_defaults(pred.clone());
        let rep = run_lpo(&re, &inst, false, true).map_err(|e| format!("{src}: {e}"))?;
        let first = pred.first().ok_or(format!("{src} never holds"))?;
        ensure(rep.branch == Some(Branch::Exists(first)), || {
            format!("{src}: {:?}", rep.branch)
        })?;
        ensure(rep.verdict.is_yes() && rep.is_correct(&pred), || {
            format!("{src}: {}", rep.verdict)
        })?;
        let lit = run_lpo(&re, &inst, true, true).map_err(|e| format!("{src}: {e}"))?;
        ensure(!lit.is_correct(&pred) && !lit.verdict.is_yes(), || {
            format!("{src}: the sg tag gave {:?}, {}", lit.branch, lit.verdict)
        })?;
    }
    let empty = [
        LpoInstance::with_defaults(PredSpec::Never),
        never("(in x B)", "(not (in x B))", "{{{{}}}}"),
        never("(= x B)", "(not (= x B))", "{{{}}}"),
        never("(in B x)", "(not (in B x))", "{{{}}}"),
        never("(in x {})", "(= B B)", "{{}}"),
        never("(and (in x B) (= {} {}))", "(not (in x B))", "{{{{}}}}"),
        never(
            "(or (in x {}) (= x B))",
            "(and (not (in x {})) (not (= x B)))",
            "{{{}}}",
        ),
        never("(in x B)", "(not (in x B))", "{{{{}}},{{{{}}}}}"),
        never("(in B x)", "(not (in B x))", "{{{{}}}}"),
        never("(= x B)", "(not (= x B))", "{{},{{{}}}}"),
    ];
    for (i, inst) in empty.iter().enumerate() {
        let phi = inst.formula();
        let rep = run_lpo(&re, inst, false, true).map_err(|e| format!("family {i}, {phi}: {e}"))?;
        ensure(rep.family.certificate.is_some(), || {
            format!("family {i}: no certificate")
        })?;
        ensure(rep.branch == Some(Branch::Forall), || {
            format!("family {i}, {phi}: {:?}", rep.branch)
        })?;
        ensure(rep.is_correct(&PredSpec::Never), || {
            format!("family {i}, {phi}: {}", rep.verdict)
        })?;
        ensure(rep.verdict.evidence().contains("21 instances"), || {
            format!("family {i}, {phi}: {}", rep.verdict)
        })?;
    }
    Ok(format!(
        "{} families with a witness, {} without; sg tag fails all {} witness cases",
        hits.len(),
        empty.len(),
        hits.len()
    ))
}
