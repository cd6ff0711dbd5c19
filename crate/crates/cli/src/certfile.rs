//! Certificate files.
//!
//! ```toml
//! code = "B+"
//! position = 0
//! context = ["0"]
//! prefix = [[0, "1"], [1, "1"]]
//! tail_from = 2
//! tail_value = "1"
//! ```
//!
//! Naturals are strings in any literal form. `prefix` lists `(p, value)`
//! pairs for every `p < tail_from`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use erec_core::kernel::TotalityCertificate;
use erec_core::literal::parse_nat;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertFile {
    code: String,
    #[serde(default)]
    position: usize,
    #[serde(default)]
    context: Vec<String>,
    #[serde(default)]
    prefix: Vec<(u64, String)>,
    tail_from: u64,
    tail_value: String,
}

pub fn parse(src: &str) -> Result<TotalityCertificate> {
    let f: CertFile = toml::from_str(src).context("certificate file")?;
    let mut prefix = Vec::with_capacity(f.prefix.len());
    for (i, (p, v)) in f.prefix.iter().enumerate() {
        if *p != i as u64 {
            bail!("prefix entry {i} is for position {p}; entries must be 0, 1, 2, ..");
        }
        prefix.push(parse_nat(v)?);
    }
    Ok(TotalityCertificate {
        code: parse_nat(&f.code)?,
        position: f.position,
        context: f
            .context
            .iter()
            .map(|c| parse_nat(c))
            .collect::<Result<_, _>>()?,
        prefix,
        tail_from: f.tail_from,
        tail_value: parse_nat(&f.tail_value)?,
    })
}

pub fn load(path: &Path) -> Result<TotalityCertificate> {
    let src =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&src).with_context(|| format!("in {}", path.display()))
}
