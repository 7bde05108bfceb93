//! Two-parity codes on the Desarguesian spread that meet the counting bound.
//!
//! The main family places nodes on `ℋ_c` for `c` in two norm cosets `b₁Σ`, `b₂Σ`
//! and repairs each node through `W_b = {(x, b x^q)}` for the opposite coset.
//! Three short lengths (q = 3, n ∈ {6, 7} and q = 4, n = 9) fall below that
//! range and are built from hit sets on the conjugate spread instead.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{binomial, default_points, for_each_subset, ArrayCode, DEFAULT_MDS_CAP};
use crate::error::{Error, Result};
use crate::field::{Extension, Field};
use crate::geometry::{conjugate_member, desarguesian_member, desarguesian_spread, projective_line, LineIndex};
use crate::linalg::{gaussian_binomial, ProjPoint, Subspace};
use crate::repair::{projective_count, repair_report, search_all, RepairWitness};

/// A 2×2 matrix over GF(q^ℓ), row-major.
pub type Mat2 = [[u32; 2]; 2];

/// `Σ = ker N`, sorted; also checks it equals `{u^{q−1} : u ≠ 0}`.
pub fn norm_kernel(ext: &Extension) -> Result<Vec<u32>> {
    let top = ext.top();
    let mut by_norm = Vec::new();
    for a in 1..top.q() {
        if ext.norm(a)? == 1 {
            by_norm.push(a);
        }
    }
    let powers: BTreeSet<u32> = (1..top.q())
        .map(|u| top.pow(u, ext.base().q() as u64 - 1))
        .collect();
    if powers.iter().copied().collect::<Vec<_>>() != by_norm {
        return Err(Error::Inconsistent("norm kernel differs from the (q-1)-power image".into()));
    }
    Ok(by_norm)
}

/// `W_b = {(x, b x^q) : x ∈ GF(q^ℓ)}`.
pub fn wb_subspace(ext: &Extension, b: u32) -> Result<Subspace> {
    let top = ext.top();
    top.check(b)?;
    if b == 0 {
        return Err(Error::InvalidParameters("W_b needs b != 0".into()));
    }
    let theta = top.generator_x();
    let rows: Vec<Vec<u32>> = (0..ext.ell())
        .map(|i| {
            let x = top.pow(theta, i as u64);
            ext.embed_pair(x, top.mul(b, ext.frobenius(x)))
        })
        .collect::<Result<_>>()?;
    Subspace::span(ext.base(), 2 * ext.ell() as usize, &rows)
}

/// Choices made while building a main-range two-parity code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoParityPlan {
    pub q: u32,
    pub ell: u32,
    pub n: usize,
    pub sigma: Vec<u32>,
    pub b1: u32,
    pub b2: u32,
    /// `b₁Σ`, sorted.
    pub c1: Vec<u32>,
    /// `b₂Σ`, sorted.
    pub c2: Vec<u32>,
    /// Node indices in node order.
    pub omega: Vec<LineIndex>,
    /// The `b` of each node's planted witness `W_b`.
    pub witness_b: Vec<u32>,
    /// Column points each node had to contain.
    pub required_points: Vec<Vec<ProjPoint>>,
}

/// Choices made for one of the exceptional lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalPlan {
    pub case: ExceptionalCase,
    /// `g₁ = I, g₂, g₃`.
    pub g: Vec<Mat2>,
    /// `B(W^{(g_i)})`, computed.
    pub hit_sets: Vec<Vec<LineIndex>>,
    pub omega: Vec<LineIndex>,
    /// `r(s)` per node, 1-based.
    pub assignment: Vec<usize>,
    pub required_points: Vec<Vec<ProjPoint>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plan {
    TwoParity(TwoParityPlan),
    Exceptional(ExceptionalPlan),
}

/// A constructed code with its planted repair witnesses.
#[derive(Clone, Debug)]
pub struct Construction {
    pub ext: Extension,
    pub code: ArrayCode,
    pub witnesses: Vec<RepairWitness>,
    /// Spread index of each node.
    pub indices: Vec<LineIndex>,
    pub plan: Plan,
}

impl Construction {
    pub fn labels(&self) -> Vec<String> {
        self.indices.iter().map(|&s| element_label(&self.ext, s)).collect()
    }
}

/// Distinct points `ℙ(W_i ∩ ℋ_j)` over `i ≠ j`, per node `j`.
fn required_points(f: &Field, subs: &[Subspace], ws: &[Subspace], ell: usize) -> Result<Vec<Vec<ProjPoint>>> {
    let mut out = Vec::with_capacity(subs.len());
    for (j, hj) in subs.iter().enumerate() {
        let mut pts: Vec<ProjPoint> = Vec::new();
        for (i, w) in ws.iter().enumerate() {
            if i == j {
                continue;
            }
            let meet = w.intersection(f, hj)?;
            match meet.dim() {
                0 => {}
                1 => {
                    let p = meet.projective_points(f).remove(0);
                    if !pts.contains(&p) {
                        pts.push(p);
                    }
                }
                d => {
                    return Err(Error::Inconsistent(format!(
                        "witness of node {i} meets node {j} in dimension {d}"
                    )))
                }
            }
        }
        if pts.len() > ell {
            return Err(Error::Inconsistent(format!("node {j} must contain {} points but ℓ = {ell}", pts.len())));
        }
        pts.sort();
        out.push(pts);
    }
    Ok(out)
}

fn assemble(
    ext: &Extension,
    subs: &[Subspace],
    ws: &[Subspace],
) -> Result<(ArrayCode, Vec<RepairWitness>, Vec<Vec<ProjPoint>>)> {
    let f = ext.base();
    let ell = ext.ell() as usize;
    let required = required_points(f, subs, ws, ell)?;
    let points: Vec<Vec<ProjPoint>> = subs
        .iter()
        .zip(&required)
        .map(|(h, req)| default_points(f, h, req))
        .collect::<Result<_>>()?;
    let code = ArrayCode::from_intrinsic(f.clone(), subs, &points)?;
    if !code.is_mds(DEFAULT_MDS_CAP)?.is_mds() {
        return Err(Error::Inconsistent("construction is not MDS".into()));
    }
    let t = projective_count(2, ext.ell(), f.q())? as usize;
    let mut witnesses = Vec::with_capacity(subs.len());
    for (i, w) in ws.iter().enumerate() {
        let wit = RepairWitness::new(&code, i, w.clone())?;
        if wit.total_intersection() != t || wit.total_captured() != t {
            return Err(Error::Inconsistent(format!(
                "planted witness of node {i} scores ({}, {}), expected {t}",
                wit.total_intersection(),
                wit.total_captured()
            )));
        }
        witnesses.push(wit);
    }
    Ok((code, witnesses, required))
}

/// Smallest and largest admissible lengths `min{2t, 3t−6} ..= q^ℓ + 1`.
pub fn two_parity_range(q: u32, ell: u32) -> Result<(usize, usize)> {
    let t = projective_count(2, ell, q)?;
    let lo = (2 * t).min(3 * t - 6).max(3);
    Ok((lo as usize, q.pow(ell) as usize + 1))
}

/// An `(n, n−2, ℓ)` MDS code with `α_i = λ_i = t_ℓ(q)` at every node.
pub fn build_two_parity_code(q: u32, ell: u32, n: usize) -> Result<Construction> {
    if q < 3 {
        return Err(Error::InvalidParameters("the two-parity construction needs q >= 3".into()));
    }
    if ell < 2 {
        return Err(Error::InvalidParameters("the two-parity construction needs ℓ >= 2".into()));
    }
    let (lo, hi) = two_parity_range(q, ell)?;
    if n < lo || n > hi {
        return Err(Error::InvalidParameters(format!("n = {n} outside [{lo}, {hi}] for q = {q}, ℓ = {ell}")));
    }
    let t = projective_count(2, ell, q)? as usize;
    if n < 2 * t {
        let case = match (q, ell, n) {
            (3, 2, 6) => ExceptionalCase::Q3N6,
            (3, 2, 7) => ExceptionalCase::Q3N7,
            (4, 2, 9) => ExceptionalCase::Q4N9,
            _ => return Err(Error::Inconsistent(format!("no construction for q = {q}, ℓ = {ell}, n = {n}"))),
        };
        return build_exceptional(case);
    }
    let ext = Extension::standard(q, ell)?;
    let top = ext.top();
    let sigma = norm_kernel(&ext)?;
    let b1 = 1u32;
    let n1 = ext.norm(b1)?;
    let mut b2 = None;
    for a in 1..top.q() {
        if ext.norm(a)? != n1 {
            b2 = Some(a);
            break;
        }
    }
    let b2 = b2.ok_or_else(|| Error::Inconsistent("norm map is constant".into()))?;
    let coset = |b: u32| -> Vec<u32> {
        let mut c: Vec<u32> = sigma.iter().map(|&s| top.mul(b, s)).collect();
        c.sort();
        c
    };
    let (c1, c2) = (coset(b1), coset(b2));
    let mut chosen: BTreeSet<LineIndex> = c1.iter().chain(&c2).map(|&c| LineIndex::Finite(c)).collect();
    for idx in projective_line(&ext) {
        if chosen.len() == n {
            break;
        }
        chosen.insert(idx);
    }
    let omega: Vec<LineIndex> = chosen.into_iter().collect();
    let subs: Vec<Subspace> = omega.iter().map(|&c| desarguesian_member(&ext, c)).collect();
    let witness_b: Vec<u32> = omega
        .iter()
        .map(|c| match c {
            LineIndex::Finite(a) if c1.binary_search(a).is_ok() => b2,
            _ => b1,
        })
        .collect();
    let (w1, w2) = (wb_subspace(&ext, b1)?, wb_subspace(&ext, b2)?);
    let ws: Vec<Subspace> = witness_b
        .iter()
        .map(|&b| if b == b1 { w1.clone() } else { w2.clone() })
        .collect();
    let (code, witnesses, required_points) = assemble(&ext, &subs, &ws)?;
    let plan = TwoParityPlan {
        q,
        ell,
        n,
        sigma,
        b1,
        b2,
        c1,
        c2,
        omega: omega.clone(),
        witness_b,
        required_points,
    };
    Ok(Construction { ext, code, witnesses, indices: omega, plan: Plan::TwoParity(plan) })
}

/// `B(W) = {s : W ∩ ℋ̃_s ≠ {0}}` over the conjugate spread.
pub fn hit_set(ext: &Extension, w: &Subspace) -> Result<Vec<LineIndex>> {
    let f = ext.base();
    let mut out = Vec::new();
    for s in projective_line(ext) {
        if w.intersect_dim(f, &conjugate_member(ext, s))? > 0 {
            out.push(s);
        }
    }
    Ok(out)
}

/// `s ↦ (a s + b)/(c s + d)` on ℙ¹(GF(q^ℓ)).
pub fn mobius(ext: &Extension, g: &Mat2, s: LineIndex) -> LineIndex {
    let top = ext.top();
    let [[a, b], [c, d]] = *g;
    let (num, den) = match s {
        LineIndex::Finite(x) => (top.add(top.mul(a, x), b), top.add(top.mul(c, x), d)),
        LineIndex::Infinity => (a, c),
    };
    match top.div(num, den) {
        Some(v) => LineIndex::Finite(v),
        None => LineIndex::Infinity,
    }
}

/// `W^{(g)} = g(GF(q)²)` for an invertible `g` over GF(q²).
pub fn g_subspace(ext: &Extension, g: &Mat2) -> Result<Subspace> {
    if ext.ell() != 2 {
        return Err(Error::InvalidParameters("W^(g) is defined for ℓ = 2".into()));
    }
    let top = ext.top();
    let [[a, b], [c, d]] = *g;
    if top.sub(top.mul(a, d), top.mul(b, c)) == 0 {
        return Err(Error::InvalidParameters("g is singular".into()));
    }
    let rows = vec![ext.embed_pair(a, c)?, ext.embed_pair(b, d)?];
    Subspace::span(ext.base(), 4, &rows)
}

/// The three lengths that the coset construction cannot reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExceptionalCase {
    Q3N6,
    Q3N7,
    Q4N9,
}

impl ExceptionalCase {
    pub const ALL: [ExceptionalCase; 3] = [ExceptionalCase::Q3N6, ExceptionalCase::Q3N7, ExceptionalCase::Q4N9];

    pub fn q(self) -> u32 {
        match self {
            ExceptionalCase::Q4N9 => 4,
            _ => 3,
        }
    }

    pub fn n(self) -> usize {
        match self {
            ExceptionalCase::Q3N6 => 6,
            ExceptionalCase::Q3N7 => 7,
            ExceptionalCase::Q4N9 => 9,
        }
    }

    /// `g₂` and `g₃` as top-field matrices.
    fn generators(self) -> [Mat2; 2] {
        match self {
            // ω = 3, −ω = 6 in GF(9) = GF(3)[ω]/(ω² + 1).
            ExceptionalCase::Q3N6 | ExceptionalCase::Q3N7 => [[[3, 1], [0, 1]], [[0, 6], [1, 3]]],
            // α = 2, α + 1 = 3 in GF(16) = GF(2)[α]/(α⁴ + α + 1).
            ExceptionalCase::Q4N9 => [[[2, 0], [0, 1]], [[1, 2], [3, 1]]],
        }
    }
}

impl fmt::Display for ExceptionalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExceptionalCase::Q3N6 => "q3n6",
            ExceptionalCase::Q3N7 => "q3n7",
            ExceptionalCase::Q4N9 => "q4n9",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ExceptionalCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q3n6" => Ok(ExceptionalCase::Q3N6),
            "q3n7" => Ok(ExceptionalCase::Q3N7),
            "q4n9" => Ok(ExceptionalCase::Q4N9),
            _ => Err(Error::InvalidParameters(format!("unknown exceptional case {s:?}"))),
        }
    }
}

/// Human-readable name of a projective-line index.
///
/// GF(9) elements print as `a+bω` (`ω² = −1`), GF(16) elements as products of
/// `α` and `β = α⁵`, everything else as its integer encoding.
pub fn element_label(ext: &Extension, s: LineIndex) -> String {
    let x = match s {
        LineIndex::Infinity => return "∞".into(),
        LineIndex::Finite(x) => x,
    };
    let top = ext.top();
    match (top.p(), top.m()) {
        (3, 2) => {
            let (a, b) = (x % 3, x / 3);
            let head = if a == 0 { String::new() } else { a.to_string() };
            match b {
                0 => a.to_string(),
                1 if a == 0 => "ω".into(),
                1 => format!("{head}+ω"),
                _ => format!("{head}−ω"),
            }
        }
        (2, 4) => {
            let named = [(0, "0"), (1, "1"), (2, "α"), (6, "β"), (7, "β²"), (8, "α³"), (12, "αβ"), (14, "αβ²")];
            if let Some((_, name)) = named.iter().find(|(v, _)| *v == x) {
                return (*name).into();
            }
            let k = (0..15).find(|&k| top.pow(2, k) == x).expect("α is primitive");
            format!("α^{k}")
        }
        _ => x.to_string(),
    }
}

/// The three hit sets printed for each exceptional field, as labels.
pub fn published_hit_sets(q: u32) -> Option<[Vec<&'static str>; 3]> {
    match q {
        3 => Some([
            vec!["∞", "0", "1", "2"],
            vec!["∞", "1", "1+ω", "1−ω"],
            vec!["0", "2", "1+ω", "1−ω"],
        ]),
        4 => Some([
            vec!["∞", "0", "1", "β", "β²"],
            vec!["∞", "0", "α", "αβ", "αβ²"],
            vec!["α", "β", "β²", "α³", "αβ²"],
        ]),
        _ => None,
    }
}

/// Hit-set construction for `q3n6`, `q3n7` and `q4n9`.
pub fn build_exceptional(case: ExceptionalCase) -> Result<Construction> {
    let ext = Extension::standard(case.q(), 2)?;
    let [g2, g3] = case.generators();
    let g: Vec<Mat2> = vec![[[1, 0], [0, 1]], g2, g3];
    let ws: Vec<Subspace> = g.iter().map(|m| g_subspace(&ext, m)).collect::<Result<_>>()?;
    let base_line: Vec<LineIndex> = {
        let mut v: Vec<LineIndex> = ext
            .base()
            .elements()
            .map(|a| LineIndex::Finite(ext.lift(a)))
            .chain(std::iter::once(LineIndex::Infinity))
            .collect();
        v.sort();
        v
    };
    let mut hit_sets = Vec::with_capacity(3);
    for (m, w) in g.iter().zip(&ws) {
        let b = hit_set(&ext, w)?;
        let mut moved: Vec<LineIndex> = base_line.iter().map(|&s| mobius(&ext, m, s)).collect();
        moved.sort();
        if moved != b {
            return Err(Error::Inconsistent("hit set differs from the transported base line".into()));
        }
        hit_sets.push(b);
    }
    if hit_sets[0].iter().any(|s| hit_sets[1].contains(s) && hit_sets[2].contains(s)) {
        return Err(Error::Inconsistent("the three hit sets share a point".into()));
    }
    let mut omega: BTreeSet<LineIndex> = hit_sets.iter().flatten().copied().collect();
    if case == ExceptionalCase::Q3N7 {
        // ω = 3.
        omega.insert(LineIndex::Finite(3));
    }
    let omega: Vec<LineIndex> = omega.into_iter().collect();
    let assignment: Vec<usize> = omega
        .iter()
        .map(|s| hit_sets.iter().position(|b| !b.contains(s)).map(|i| i + 1))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Inconsistent("a node lies in every hit set".into()))?;
    let subs: Vec<Subspace> = omega.iter().map(|&s| conjugate_member(&ext, s)).collect();
    let node_ws: Vec<Subspace> = assignment.iter().map(|&r| ws[r - 1].clone()).collect();
    let (code, witnesses, required_points) = assemble(&ext, &subs, &node_ws)?;
    let plan = ExceptionalPlan {
        case,
        g,
        hit_sets,
        omega: omega.clone(),
        assignment,
        required_points,
    };
    Ok(Construction { ext, code, witnesses, indices: omega, plan: Plan::Exceptional(plan) })
}

/// How lengths below the threshold were searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// Spread-restricted search at one length below the threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BelowThreshold {
    pub n: usize,
    pub mode: SubsetMode,
    pub subsets_checked: usize,
    /// Codes in which at least one node reaches `α_i = t`.
    pub codes_with_attaining_node: usize,
    /// Codes in which every node reaches `α_i = t`, i.e. the bound is met.
    pub codes_all_attaining: usize,
    pub example_attaining_node: Option<(Vec<LineIndex>, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleLength {
    pub n: usize,
    pub lines_in_spread: bool,
    pub attained: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub q: u32,
    pub threshold: usize,
    pub max_n: usize,
    pub admissible: Vec<AdmissibleLength>,
    pub below: Vec<BelowThreshold>,
}

impl ConverseReport {
    /// Every admissible length is realised and no shorter spread code meets the bound.
    pub fn holds(&self) -> bool {
        self.admissible.iter().all(|a| a.lines_in_spread && a.attained)
            && self.below.iter().all(|b| b.codes_all_attaining == 0)
    }
}

fn scan_subset(ext: &Extension, lines: &[Subspace], t: usize, budget: u128) -> Result<(bool, bool, usize)> {
    let code = ArrayCode::from_subspaces(ext.base().clone(), lines)?;
    let res = search_all(&code, budget)?;
    if !res.mode.is_exhaustive() {
        return Err(Error::BudgetExceeded { needed: gaussian_binomial(4, 2, ext.base().q()), budget });
    }
    let attaining: Vec<usize> = res
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, a)| a.as_ref().map(|(v, _)| *v) == Some(t))
        .map(|(i, _)| i)
        .collect();
    let all = attaining.len() == lines.len();
    Ok((!attaining.is_empty(), all, attaining.first().copied().unwrap_or(0)))
}

/// Spread-restricted converse for `ℓ = r = 2`.
///
/// Lengths `min{2q+2, 3q−3} ..= q²+1` are built and checked exhaustively. Each
/// shorter length is searched over all `n`-subsets of the spread when there are
/// at most `exhaustive_cap` of them, and over `samples` seeded subsets otherwise.
pub fn regular_spread_converse_check(
    q: u32,
    exhaustive_cap: u128,
    samples: usize,
    seed: u64,
    budget: u128,
) -> Result<ConverseReport> {
    let (threshold, max_n) = two_parity_range(q, 2)?;
    let ext = Extension::standard(q, 2)?;
    let spread = desarguesian_spread(&ext);
    let t = q as usize + 1;
    let mut admissible = Vec::new();
    for n in threshold..=max_n {
        let c = build_two_parity_code(q, 2, n)?;
        let lines_in_spread = c.code.node_subspaces().iter().all(|h| spread.spread.contains(h));
        let report = repair_report(&c.code, budget)?;
        let attained = report.all_attained() && report.violations.is_empty();
        admissible.push(AdmissibleLength { n, lines_in_spread, attained });
    }
    let total = spread.spread.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = Vec::new();
    for n in 3..threshold {
        let count = binomial(total as u64, n as u64);
        let mut entry = BelowThreshold {
            n,
            mode: SubsetMode::Exhaustive,
            subsets_checked: 0,
            codes_with_attaining_node: 0,
            codes_all_attaining: 0,
            example_attaining_node: None,
        };
        let visit = |subset: &[usize], entry: &mut BelowThreshold| -> Result<()> {
            let lines: Vec<Subspace> = subset.iter().map(|&i| spread.spread.members[i].clone()).collect();
            let (some, all, node) = scan_subset(&ext, &lines, t, budget)?;
            entry.subsets_checked += 1;
            if some {
                entry.codes_with_attaining_node += 1;
                if entry.example_attaining_node.is_none() {
                    let labels = subset.iter().map(|&i| spread.labels[i]).collect();
                    entry.example_attaining_node = Some((labels, node));
                }
            }
            if all {
                entry.codes_all_attaining += 1;
            }
            Ok(())
        };
        if count <= exhaustive_cap {
            let mut failure = None;
            for_each_subset(total, n, |s| match visit(s, &mut entry) {
                Ok(()) => true,
                Err(e) => {
                    failure = Some(e);
                    false
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
        } else {
            entry.mode = SubsetMode::Sampled { samples, seed };
            let all: Vec<usize> = (0..total).collect();
            for _ in 0..samples {
                let mut s: Vec<usize> = all.choose_multiple(&mut rng, n).copied().collect();
                s.sort();
                visit(&s, &mut entry)?;
            }
        }
        below.push(entry);
    }
    Ok(ConverseReport { q, threshold, max_n, admissible, below })
}

/// Labels of a hit set in index order.
pub fn hit_set_labels(ext: &Extension, set: &[LineIndex]) -> Vec<String> {
    set.iter().map(|&s| element_label(ext, s)).collect()
}
