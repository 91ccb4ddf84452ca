//! Argument syntax: words, cylinders, function descriptors and n-ranges.

use std::fs;

use fbound_core::averaging::VertexFunction;
use fbound_core::boundary::{Cylinder, StepFunction};
use fbound_core::error::{Error, Result};
use fbound_core::exact::{parse_rational, QuadExt};
use fbound_core::word::{parse_word, Rank, ReducedWord};

/// Letters or signed generators; `e` is the identity.
pub fn word(text: &str, rank: Rank) -> Result<ReducedWord> {
    if text.trim() == "e" {
        return Ok(ReducedWord::identity());
    }
    parse_word(text, rank)
}

pub fn cylinder(text: &str, rank: Rank) -> Result<Cylinder> {
    let c: Cylinder = text.parse()?;
    if let Cylinder::Word(_) = &c {
        rank.check_word(&c.word())?;
    }
    Ok(c)
}

fn read(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))
}

/// `chi:WORD`, `const:RATIONAL` or `table:FILE`.
pub fn vertex_function(text: &str, rank: Rank) -> Result<VertexFunction> {
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("function descriptor `{text}` needs a kind prefix")))?;
    match kind {
        "chi" => VertexFunction::chi(word(arg, rank)?),
        "const" => Ok(VertexFunction::Constant(parse_rational(arg)?)),
        "table" => VertexFunction::parse_table(&read(arg)?, rank),
        _ => Err(Error::Parse(format!("unknown function kind `{kind}` (chi, const, table)"))),
    }
}

/// `cyl:CYLINDER`, `const:RATIONAL` or `json:FILE`.
pub fn step_function(text: &str, rank: Rank) -> Result<StepFunction> {
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("step function descriptor `{text}` needs a kind prefix")))?;
    match kind {
        "cyl" => StepFunction::indicator(rank, &cylinder(arg, rank)?),
        "const" => Ok(StepFunction::constant(rank, QuadExt::from_rational(parse_rational(arg)?, rank.q()))),
        "json" => {
            let f: StepFunction =
                serde_json::from_str(&read(arg)?).map_err(|e| Error::Parse(format!("{arg}: {e}")))?;
            if f.rank() != rank {
                return Err(Error::RankMismatch(rank.get(), f.rank().get()));
            }
            Ok(f)
        }
        _ => Err(Error::Parse(format!("unknown step function kind `{kind}` (cyl, const, json)"))),
    }
}

/// `N`, `A..B` (inclusive) or `A,B,C`.
pub fn n_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("bad n-range `{text}`: use N, A..B or A,B,C"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let ns = if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if ns.is_empty() {
        return Err(bad());
    }
    Ok(ns)
}
