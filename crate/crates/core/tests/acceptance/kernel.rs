use erec_core::kernel::{
    cases_code, compose, const_code, declared_arity, efun, fix, fix_overhead, prim, proj, smn,
    smn_clause, succ_code, univ, zero_at, Expr, Machine, Outcome, PrimOp, StuckReason,
    TotalityCertificate,
};
use erec_core::Nat;
use rand::Rng;

use crate::ensure;
use crate::gen;

fn n(w: u64) -> Nat {
    Nat::from(w)
}

fn ns(ws: &[u64]) -> Vec<Nat> {
    ws.iter().map(|&w| n(w)).collect()
}

fn conv(w: impl Into<Nat>) -> Outcome {
    Outcome::Converged(w.into())
}

struct Row {
    clause: &'static str,
    code: Nat,
    args: Vec<Nat>,
    expect: Outcome,
    cert: Option<TotalityCertificate>,
}

fn row(clause: &'static str, code: Nat, args: Vec<Nat>, expect: Outcome) -> Row {
    Row {
        clause,
        code,
        args,
        expect,
        cert: None,
    }
}

fn cert(code: &Nat, context: Vec<Nat>, prefix: Vec<Nat>, tail: u64) -> Option<TotalityCertificate> {
    Some(TotalityCertificate {
        code: code.clone(),
        position: 0,
        tail_from: prefix.len() as u64,
        context,
        prefix,
        tail_value: n(tail),
    })
}

/// `(p, m..) -> 0 if p = m_i else 1`, of arity `k + 1`.
fn zero_when_equal(k: usize, i: usize) -> Nat {
    compose(
        k + 1,
        cases_code(0),
        vec![
            const_code(k + 1, 0u64),
            const_code(k + 1, 1u64),
            proj(k + 1, 0),
            proj(k + 1, i + 1),
        ],
    )
}

fn table() -> Vec<Row> {
    let pr = |a: u64, b: u64| Nat::pair(&n(a), &n(b));
    let mut rows = vec![
        row("0 const", const_code(0, 5u64), vec![], conv(5u64)),
        row("0 const", const_code(2, 7u64), ns(&[1, 2]), conv(7u64)),
        row("0 const", const_code(1, 0u64), ns(&[9]), conv(0u64)),
        row("0 proj", proj(1, 0), ns(&[4]), conv(4u64)),
        row("0 proj", proj(3, 2), ns(&[1, 2, 3]), conv(3u64)),
        row("0 proj", proj(2, 0), ns(&[8, 9]), conv(8u64)),
        row("0 succ", succ_code(1, 0), ns(&[0]), conv(1u64)),
        row("0 succ", succ_code(3, 1), ns(&[5, 6, 7]), conv(7u64)),
        row("0 succ", succ_code(2, 1), ns(&[9, 41]), conv(42u64)),
        row(
            "0 cases r=s",
            cases_code(0),
            ns(&[10, 20, 3, 3]),
            conv(10u64),
        ),
        row(
            "0 cases r=s",
            cases_code(1),
            ns(&[10, 20, 5, 5, 99]),
            conv(10u64),
        ),
        row(
            "0 cases r=s",
            cases_code(2),
            ns(&[1, 2, 0, 0, 7, 8]),
            conv(1u64),
        ),
        row(
            "0 cases r!=s",
            cases_code(0),
            ns(&[10, 20, 3, 4]),
            conv(20u64),
        ),
        row(
            "0 cases r!=s",
            cases_code(1),
            ns(&[10, 20, 6, 5, 0]),
            conv(20u64),
        ),
        row(
            "0 cases r!=s",
            cases_code(2),
            ns(&[1, 2, 0, 1, 7, 8]),
            conv(2u64),
        ),
        row(
            "0 smn",
            smn_clause(0),
            vec![proj(2, 0), n(5)],
            conv(smn(&proj(2, 0), &n(5))),
        ),
        row(
            "0 smn",
            smn_clause(1),
            vec![succ_code(2, 1), n(3), n(4)],
            conv(smn(&succ_code(2, 1), &n(3))),
        ),
        row(
            "0 smn",
            smn_clause(2),
            vec![n(17), n(0), n(1), n(2)],
            conv(smn(&n(17), &n(0))),
        ),
        row("0 prim", prim(PrimOp::Pair), ns(&[1, 2]), conv(pr(1, 2))),
        row("0 prim", prim(PrimOp::Fst), vec![pr(3, 4)], conv(3u64)),
        row("0 prim", prim(PrimOp::Snd), vec![pr(3, 4)], conv(4u64)),
        row("0 prim", prim(PrimOp::Pred), ns(&[0]), conv(0u64)),
        row(
            "1 compose",
            compose(1, succ_code(1, 0), vec![succ_code(1, 0)]),
            ns(&[3]),
            conv(5u64),
        ),
        row(
            "1 compose",
            compose(2, prim(PrimOp::Pair), vec![proj(2, 1), proj(2, 0)]),
            ns(&[1, 2]),
            conv(pr(2, 1)),
        ),
        row(
            "1 compose",
            compose(1, const_code(0, 4u64), vec![]),
            ns(&[7]),
            conv(4u64),
        ),
        row(
            "1 compose",
            compose(1, proj(2, 1), vec![const_code(1, 9u64), succ_code(1, 0)]),
            ns(&[0]),
            conv(1u64),
        ),
        row(
            "2 univ",
            univ(2),
            vec![const_code(1, 7u64), n(9)],
            conv(7u64),
        ),
        row("2 univ", univ(3), vec![proj(2, 1), n(1), n(2)], conv(2u64)),
        row("2 univ", univ(1), vec![const_code(0, 5u64)], conv(5u64)),
        row("3.2 least zero", efun(1, zero_at(2)), ns(&[0]), conv(3u64)),
        row("3.2 least zero", efun(1, zero_at(0)), ns(&[0]), conv(1u64)),
        row(
            "3.2 least zero",
            efun(1, zero_when_equal(1, 0)),
            ns(&[6]),
            conv(7u64),
        ),
        row(
            "3.2 least zero",
            efun(2, zero_when_equal(2, 1)),
            ns(&[0, 4]),
            conv(5u64),
        ),
        row(
            "stuck",
            n(10),
            vec![],
            Outcome::Stuck(StuckReason::Malformed),
        ),
        row(
            "stuck",
            const_code(1, 7u64),
            ns(&[1, 2]),
            Outcome::Stuck(StuckReason::ArgCount {
                expected: 1,
                got: 2,
            }),
        ),
        row(
            "stuck",
            univ(2),
            vec![n(10), n(0)],
            Outcome::Stuck(StuckReason::Malformed),
        ),
    ];
    let plus = const_code(2, 1u64);
    let mut r = row("3.1 no zero", efun(1, plus.clone()), ns(&[0]), conv(0u64));
    r.cert = cert(&plus, ns(&[0]), vec![], 1);
    rows.push(r);
    let three = const_code(3, 2u64);
    let mut r = row(
        "3.1 no zero",
        efun(2, three.clone()),
        ns(&[1, 4]),
        conv(0u64),
    );
    r.cert = cert(&three, ns(&[1, 4]), vec![], 2);
    rows.push(r);
    // 2 at p = 5, 1 elsewhere
    let bump = compose(
        2,
        cases_code(0),
        vec![
            const_code(2, 2u64),
            const_code(2, 1u64),
            proj(2, 0),
            proj(2, 1),
        ],
    );
    let mut r = row("3.1 no zero", efun(1, bump.clone()), ns(&[5]), conv(0u64));
    r.cert = cert(&bump, ns(&[5]), ns(&[1, 1, 1, 1, 1, 2]), 1);
    rows.push(r);
    rows
}

pub fn clauses() -> Result<String, String> {
    let rows = table();
    let mut per: std::collections::BTreeMap<&str, usize> = Default::default();
    for (i, r) in rows.iter().enumerate() {
        let m = Machine::new();
        if let Some(c) = &r.cert {
            m.register(c.clone(), 1_000)
                .map_err(|e| format!("row {i} certificate: {e}"))?;
        }
        let got = m.apply(&r.code, &r.args, 1_000);
        ensure(got == r.expect, || {
            format!("row {i} ({}): expected {}, got {got}", r.clause, r.expect)
        })?;
        *per.entry(r.clause).or_default() += 1;
    }
    if let Some((c, k)) = per.iter().find(|(_, &k)| k < 3) {
        return Err(format!("clause {c} has only {k} cases"));
    }
    Ok(format!("{} cases over {} clauses", rows.len(), per.len()))
}

pub fn fuel_probes() -> Result<String, String> {
    const PROBES: usize = 100_000;
    const LOW: u64 = 40;
    const HIGH: u64 = 400;
    let mut rng = gen::rng(2);
    let m = Machine::new();
    let fresh = Machine::uncached();
    let mut converged = 0;
    for i in 0..PROBES {
        let arity = rng.gen_range(0..4);
        let depth = rng.gen_range(0..4);
        let code = gen::code(&mut rng, arity, depth);
        let given = if rng.gen_bool(0.05) { arity + 1 } else { arity };
        let args = gen::args(&mut rng, given);
        let lo = m.apply(&code, &args, LOW);
        let hi = m.apply(&code, &args, HIGH);
        if lo.is_definite() {
            ensure(lo == hi, || {
                format!("probe {i}: {code} on {args:?}: fuel {LOW} gave {lo}, {HIGH} gave {hi}")
            })?;
        }
        if i % 16 == 0 {
            let again = fresh.apply(&code, &args, HIGH);
            ensure(again == hi, || {
                format!("probe {i}: {code} on {args:?}: {hi} then {again}")
            })?;
        }
        converged += hi.is_converged() as usize;
    }
    Ok(format!(
        "{PROBES} probes, {converged} converged at fuel {HIGH}"
    ))
}

fn same(built: &Outcome, direct: &Outcome) -> bool {
    match (built, direct) {
        (Outcome::Unknown { cause: a, .. }, Outcome::Unknown { cause: b, .. }) => a == b,
        (a, b) => a == b,
    }
}

/// `f(e, x..)` that may call `e`.
fn recursive_body(rng: &mut gen::Rand, arity: usize) -> Nat {
    if rng.gen_bool(0.5) {
        let depth = rng.gen_range(0..3);
        return gen::code(rng, arity + 1, depth);
    }
    let x = Expr::arg(1);
    let rest: Vec<Expr> = (2..=arity).map(Expr::arg).collect();
    let mut call_args = vec![Expr::pred(x.clone())];
    call_args.extend(rest);
    let recurse = Expr::apply(Expr::arg(0), call_args);
    let step = match rng.gen_range(0..3) {
        0 => Expr::succ(recurse),
        1 => Expr::pair(x.clone(), recurse),
        _ => recurse,
    };
    let base = Expr::lit(rng.gen_range(0..5u64));
    Expr::if_eq(x, Expr::lit(0u64), base, step).compile(arity + 1)
}

pub fn laws() -> Result<String, String> {
    const CASES: usize = 1_000;
    let mut rng = gen::rng(4);
    let m = Machine::new();
    let mut converged = [0, 0];
    for i in 0..CASES {
        let arity = rng.gen_range(0..4);
        let depth = rng.gen_range(0..4);
        let p = gen::code(&mut rng, arity + 1, depth);
        let q = gen::small(&mut rng);
        let k = declared_arity(&p).saturating_sub(1);
        let args = gen::args(&mut rng, k);
        let fuel = rng.gen_range(10..2_000);
        let mut direct = vec![q.clone()];
        direct.extend(args.iter().cloned());
        let d = m.apply(&p, &direct, fuel);
        let b = m.apply(&smn(&p, &q), &args, fuel + k as u64 + 2);
        ensure(same(&b, &d), || {
            format!("smn case {i}: p = {p}, q = {q}, m = {args:?}: {b} vs {d}")
        })?;
        converged[0] += d.is_converged() as usize;
    }
    for i in 0..CASES {
        let arity = rng.gen_range(1..4);
        let f = recursive_body(&mut rng, arity);
        let e = fix(&f);
        let n = declared_arity(&f).max(2);
        let x = gen::args(&mut rng, n - 1);
        let fuel = rng.gen_range(10..4_000);
        let mut direct = vec![e.clone()];
        direct.extend(x.iter().cloned());
        let d = m.apply(&f, &direct, fuel);
        let b = m.apply(&e, &x, fuel + fix_overhead(n));
        ensure(same(&b, &d), || {
            format!("fix case {i}: f = {f}, x = {x:?}: {b} vs {d}")
        })?;
        converged[1] += d.is_converged() as usize;
    }
    Ok(format!(
        "{CASES} s-m-n instances ({} converged), {CASES} fixed points ({} converged)",
        converged[0], converged[1]
    ))
}
