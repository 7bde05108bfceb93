//! Families of `t`-subsets with pairwise intersections of size at most two.
//!
//! If such a family has empty common intersection, its union has at least
//! `min{2t, 3t − 6}` elements. The checker verifies the hypotheses, then the
//! conclusion, and returns a minimal subfamily with empty intersection.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Block = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub t: usize,
    /// Size of the union of all blocks.
    pub n_effective: usize,
    /// `min{2t, 3t − 6}`.
    pub required: i64,
    /// `None` when the hypotheses hold.
    pub hypothesis_violation: Option<String>,
    /// Whether the conclusion holds; `None` when the hypotheses fail.
    pub holds: Option<bool>,
    /// Indices of a minimal subfamily with empty intersection.
    pub certificate: Vec<usize>,
}

fn intersect_all<'a>(blocks: impl Iterator<Item = &'a Block>) -> Block {
    let mut it = blocks;
    let Some(first) = it.next() else { return Block::new() };
    it.fold(first.clone(), |acc, b| acc.intersection(b).copied().collect())
}

/// Runs the checker on `family`.
pub fn check_block_intersection_bound(family: &[Block]) -> BlockCheck {
    let t = family.first().map_or(0, |b| b.len());
    let union: Block = family.iter().flatten().copied().collect();
    let required = (2 * t as i64).min(3 * t as i64 - 6);
    let mut report = BlockCheck {
        t,
        n_effective: union.len(),
        required,
        hypothesis_violation: None,
        holds: None,
        certificate: Vec::new(),
    };
    let violation = if family.is_empty() {
        Some("family is empty".to_string())
    } else if let Some(i) = family.iter().position(|b| b.len() != t) {
        Some(format!("block {i} has size {} but block 0 has size {t}", family[i].len()))
    } else if !intersect_all(family.iter()).is_empty() {
        Some("blocks share a common element".to_string())
    } else {
        let mut bad = None;
        'outer: for i in 0..family.len() {
            for j in i + 1..family.len() {
                let common = family[i].intersection(&family[j]).count();
                if common > 2 {
                    bad = Some(format!("blocks {i} and {j} share {common} elements"));
                    break 'outer;
                }
            }
        }
        bad
    };
    if violation.is_some() {
        report.hypothesis_violation = violation;
        return report;
    }
    let mut keep: Vec<usize> = (0..family.len()).collect();
    let mut k = 0;
    while k < keep.len() {
        let trial: Vec<usize> = keep.iter().copied().filter(|&x| x != keep[k]).collect();
        if !trial.is_empty() && intersect_all(trial.iter().map(|&x| &family[x])).is_empty() {
            keep = trial;
        } else {
            k += 1;
        }
    }
    report.holds = Some(union.len() as i64 >= required && keep.len() <= 4);
    report.certificate = keep;
    report
}

/// One block per line, whitespace-separated indices; blank lines and `#` comments are skipped.
pub fn parse_family(text: &str) -> Result<Vec<Block>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut block = Block::new();
        for tok in line.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad index {tok:?}", lineno + 1)))?;
            if !block.insert(v) {
                return Err(Error::Format(format!("line {}: index {v} repeated", lineno + 1)));
            }
        }
        out.push(block);
    }
    Ok(out)
}

pub fn format_family(family: &[Block]) -> String {
    family
        .iter()
        .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

/// A random family of `t`-subsets of `[n]` meeting the hypotheses, or `None`
/// if `attempts` tries all fail.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, n: usize, t: usize, attempts: usize) -> Option<Vec<Block>> {
    if t == 0 || t > n {
        return None;
    }
    let ground: Vec<usize> = (0..n).collect();
    for _ in 0..attempts {
        let mut family: Vec<Block> = Vec::new();
        let mut misses = 0;
        while misses < 50 {
            let b: Block = ground.choose_multiple(rng, t).copied().collect();
            if family.iter().any(|x| x.intersection(&b).count() > 2 || *x == b) {
                misses += 1;
                continue;
            }
            family.push(b);
            if intersect_all(family.iter()).is_empty() {
                return Some(family);
            }
        }
    }
    None
}
