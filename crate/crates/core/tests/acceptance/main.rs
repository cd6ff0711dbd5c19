//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod gen;
mod kernel;
mod lfp;
mod realize;
mod universe;

use std::time::{Duration, Instant};

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: Check,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "clause conformance",
            limit: Duration::from_secs(5),
            run: kernel::clauses,
        },
        Criterion {
            id: 2,
            name: "determinism and fuel monotonicity",
            limit: Duration::from_secs(60),
            run: kernel::fuel_probes,
        },
        Criterion {
            id: 3,
            name: "least fixed point oracles",
            limit: Duration::from_secs(120),
            run: lfp::oracles,
        },
        Criterion {
            id: 4,
            name: "s-m-n and recursion laws",
            limit: Duration::from_secs(30),
            run: kernel::laws,
        },
        Criterion {
            id: 5,
            name: "membership complementarity",
            limit: Duration::from_secs(60),
            run: universe::complementarity,
        },
        Criterion {
            id: 6,
            name: "equality type decides extensional equality",
            limit: Duration::from_secs(120),
            run: universe::equality,
        },
        Criterion {
            id: 7,
            name: "realizer clause structure",
            limit: Duration::from_secs(30),
            run: realize::metamorphic,
        },
        Criterion {
            id: 8,
            name: "disjunction transform end to end",
            limit: Duration::from_secs(60),
            run: realize::lpo,
        },
        Criterion {
            id: 9,
            name: "omega canonicity",
            limit: Duration::from_secs(5),
            run: universe::omega_canonical,
        },
    ];
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for c in criteria
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
    {
        let start = Instant::now();
        let res = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let res = match res {
            Ok(detail) if took > c.limit => {
                Err(format!("{detail}; over the {} s limit", c.limit.as_secs()))
            }
            r => r,
        };
        match res {
            Ok(detail) => println!(
                "PASS {}. {} ({detail}) [{:.2} s]",
                c.id,
                c.name,
                took.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL {}. {}: {why} [{:.2} s]",
                    c.id,
                    c.name,
                    took.as_secs_f64()
                );
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

/// `Err` with a message unless `cond`.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}
