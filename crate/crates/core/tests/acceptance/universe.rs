use std::collections::BTreeSet;

use erec_core::kernel::{table, Machine, DEFAULT_FUEL};
use erec_core::realize::{Env, Formula, Realizer, Term};
use erec_core::universe::{
    fin, hf_to_v, omega, pi, pl, sigma, tilde_code, vnat, vnat_host, Elements, Hf, Universe,
};
use erec_core::{Nat, Verdict};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::ensure;
use crate::gen;

/// Types built from `fin 0..=3` by sums and by dependent sums and products
/// over bases of size at most 3, nested at most `rank` deep. Ranks
/// above one are sampled.
fn hf_types(rank: usize, per_rank: usize) -> Vec<Nat> {
    let mut rng = gen::rng(5);
    let mut all: Vec<Nat> = (0..=3u64).map(fin).collect();
    let mut below = all.clone();
    for r in 1..=rank {
        let mut fresh = Vec::new();
        for a in &below {
            for b in &below {
                fresh.push(pl(a, b));
            }
        }
        let mut families = vec![vec![]];
        for k in 1..=3 {
            let mut level = vec![vec![]];
            for _ in 0..k {
                level = level
                    .into_iter()
                    .flat_map(|prefix: Vec<Nat>| {
                        below.iter().map(move |t| {
                            let mut p = prefix.clone();
                            p.push(t.clone());
                            p
                        })
                    })
                    .collect();
            }
            families.extend(level);
        }
        for fam in &families {
            let base = fin(fam.len() as u64);
            let f = table(fam, fin(0u64));
            fresh.push(sigma(&base, &f));
            fresh.push(pi(&base, &f));
        }
        if r > 1 {
            fresh.shuffle(&mut rng);
            fresh.truncate(per_rank);
        }
        below = all.iter().chain(&fresh).cloned().collect();
        below.shuffle(&mut rng);
        below.truncate(6 + rng.gen_range(0..3));
        all.extend(fresh);
    }
    all
}

pub fn complementarity() -> Result<String, String> {
    let m = Machine::new();
    let u = Universe::new(&m);
    let again = Machine::new();
    let u2 = Universe::new(&again);
    let types = hf_types(3, 1500);
    let (mut yes, mut no) = (0, 0);
    for t in &types {
        let tu = u.in_universe(t);
        ensure(tu.is_yes(), || format!("{} is not a type code: {tu}", t))?;
        let listed = match u.elements(t) {
            Elements::Finite(xs) => Some(xs),
            _ => None,
        };
        for x in 0..=32u64 {
            let x = Nat::from(x);
            let v = u.member(&x, t);
            let w = u2.member(&x, t);
            ensure(v.label() == w.label(), || {
                format!("{x} in {}: {v} then {w}", t.brief(60))
            })?;
            match &v {
                Verdict::Unknown(why) => {
                    return Err(format!("{x} in {}: unknown, {why}", t.brief(60)))
                }
                Verdict::Yes(_) => yes += 1,
                Verdict::No(_) => no += 1,
            }
            if let Some(xs) = &listed {
                ensure(v.is_yes() == xs.contains(&x), || {
                    format!("{x} in {}: {v}, but elements are {xs:?}", t.brief(60))
                })?;
            }
        }
    }
    Ok(format!(
        "{} types, 33 probes each: {yes} yes, {no} no, 0 unknown",
        types.len()
    ))
}

/// Literals of every set of rank at most 3, in a few spellings.
fn hf_literals() -> Vec<String> {
    let v2 = ["{}", "{{}}", "{{{}}}", "{{},{{}}}"];
    let alt = ["{}", "{{},{}}", "{{{}}}", "{{{}},{}}"];
    let mut out = BTreeSet::new();
    for mask in 0..16usize {
        let picked: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let plain: Vec<&str> = picked.iter().map(|&i| v2[i]).collect();
        out.insert(format!("{{{}}}", plain.join(",")));
        let mut other: Vec<&str> = picked.iter().rev().map(|&i| alt[i]).collect();
        if let (true, Some(&first)) = (other.len() < 4, other.first()) {
            other.push(first);
        }
        out.insert(format!("{{{}}}", other.join(",")));
    }
    out.into_iter().collect()
}

pub fn equality() -> Result<String, String> {
    let m = Machine::new();
    let u = Universe::new(&m);
    let r = Realizer::new(&u);
    let lits = hf_literals();
    let sets: Vec<(Hf, Nat)> = lits
        .iter()
        .map(|s| {
            let h = Hf::parse(s).expect("literal");
            let v = hf_to_v(&h);
            (h, v)
        })
        .collect();
    let mut equal = 0;
    for (i, (ha, a)) in sets.iter().enumerate() {
        ensure(ha.rank() <= 3, || {
            format!("{} has rank {}", lits[i], ha.rank())
        })?;
        for (j, (hb, b)) in sets.iter().enumerate() {
            let phi = Formula::eq(Term::Lit(a.clone()), Term::Lit(b.clone()));
            let found = r
                .search(&phi, &Env::new(), 512)
                .map_err(|e| e.to_string())?;
            let same = ha.extensionally_equal(hb);
            ensure(found.realizer.is_some() == same, || {
                format!(
                    "{} = {}: search found {:?}, oracle says {same}",
                    lits[i], lits[j], found.realizer
                )
            })?;
            equal += same as usize;
        }
    }
    let n = sets.len();
    Ok(format!("{n} literals, {} pairs, {equal} equal", n * n))
}

pub fn omega_canonical() -> Result<String, String> {
    let m = Machine::new();
    let d = tilde_code(&omega()).ok_or("omega is not a tree")?;
    for k in 0..=20u64 {
        let got = m.apply(&d, &[Nat::from(k)], DEFAULT_FUEL);
        let want = vnat(&m, k, DEFAULT_FUEL);
        ensure(got.value().is_some() && got == want, || {
            format!("at {k}: {got} vs {want}")
        })?;
        ensure(got.value() == Some(&vnat_host(k)), || {
            format!("at {k}: {got} differs from the host numeral")
        })?;
    }
    Ok("n = 0..=20".into())
}
