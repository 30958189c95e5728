//! Test families by name or from a TOML file.
//!
//! Names: `graded` (all monomials with |β|, |γ| ≤ 2), `graded:K`, and
//! `degree:N` (all monomials of total degree ≤ N). A file lists symbols as
//!
//! ```toml
//! [[symbols]]
//! name = "|w1|^2"
//! terms = [{ beta = [1, 0], gamma = [1, 0], re = 1.0 }]
//! ```

use std::path::Path;

use eigenlimit_core::{MultiIndex, PolySymbol, TestFamily, C64};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    beta: Vec<u32>,
    gamma: Vec<u32>,
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    name: String,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    symbols: Vec<RawSymbol>,
}

fn parse_count(selector: &str, value: &str) -> Result<u32> {
    value.parse().map_err(|_| CliError::Argument(format!("bad family name `{selector}`")))
}

/// Resolves a family name, falling back to a file path.
pub fn resolve_family(selector: &str, dim: usize) -> Result<TestFamily> {
    match selector.split_once(':') {
        None if selector == "graded" => return Ok(TestFamily::graded(dim, 2)),
        Some(("graded", k)) => return Ok(TestFamily::graded(dim, parse_count(selector, k)?)),
        Some(("degree", n)) => return Ok(TestFamily::up_to_degree(dim, parse_count(selector, n)?)),
        _ => {}
    }
    let path = Path::new(selector);
    let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: selector.to_string(), source })?;
    parse_family(&text, dim, selector)
}

pub fn parse_family(text: &str, dim: usize, path: &str) -> Result<TestFamily> {
    let fail = |message: String| CliError::Family { path: path.to_string(), message };
    let raw: RawFamily = toml::from_str(text).map_err(|e| fail(e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.symbols.len());
    for (i, s) in raw.symbols.into_iter().enumerate() {
        let mut a = PolySymbol::zero(dim);
        for (k, t) in s.terms.into_iter().enumerate() {
            if t.beta.len() != dim || t.gamma.len() != dim {
                return Err(fail(format!("symbols[{i}].terms[{k}]: exponents need {dim} entries")));
            }
            a = a.add(&PolySymbol::monomial(MultiIndex::new(t.beta), MultiIndex::new(t.gamma), C64::new(t.re, t.im)));
        }
        entries.push((s.name, a));
    }
    TestFamily::new(dim, entries).map_err(|e| fail(e.to_string()))
}
