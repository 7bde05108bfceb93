//! Spreads of PG(2ℓ−1, q) and the regulus machinery of PG(3, q).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Extension, Field};
use crate::linalg::{enumerate_subspaces, ProjPoint, Subspace};

/// A point of the projective line over GF(q^ℓ): a field element or ∞.
///
/// Finite indices sort by their integer encoding and ∞ sorts last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LineIndex {
    Finite(u32),
    Infinity,
}

impl fmt::Display for LineIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineIndex::Finite(a) => write!(f, "{a}"),
            LineIndex::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for LineIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "∞" => Ok(LineIndex::Infinity),
            _ => s
                .parse()
                .map(LineIndex::Finite)
                .map_err(|_| Error::Format(format!("bad projective-line index {s:?}"))),
        }
    }
}

/// All of ℙ¹(GF(q^ℓ)) in index order.
pub fn projective_line(ext: &Extension) -> Vec<LineIndex> {
    ext.top()
        .elements()
        .map(LineIndex::Finite)
        .chain(std::iter::once(LineIndex::Infinity))
        .collect()
}

fn span_pairs(ext: &Extension, pairs: impl Iterator<Item = (u32, u32)>) -> Subspace {
    let ell = ext.ell() as usize;
    let rows: Vec<Vec<u32>> = pairs
        .map(|(a, b)| ext.embed_pair(a, b).expect("elements in range"))
        .collect();
    Subspace::span(ext.base(), 2 * ell, &rows).expect("consistent length")
}

fn power_basis(ext: &Extension) -> Vec<u32> {
    let theta = ext.top().generator_x();
    (0..ext.ell()).map(|i| ext.top().pow(theta, i as u64)).collect()
}

/// `ℋ_a = {(x, a x)}` or `ℋ_∞ = {(0, y)}`.
pub fn desarguesian_member(ext: &Extension, index: LineIndex) -> Subspace {
    let top = ext.top();
    let basis = power_basis(ext);
    match index {
        LineIndex::Finite(a) => span_pairs(ext, basis.iter().map(|&x| (x, top.mul(a, x)))),
        LineIndex::Infinity => span_pairs(ext, basis.iter().map(|&y| (0, y))),
    }
}

/// `ℋ̃_s = {(s x, x)}` or `ℋ̃_∞ = {(x, 0)}`.
pub fn conjugate_member(ext: &Extension, index: LineIndex) -> Subspace {
    let top = ext.top();
    let basis = power_basis(ext);
    match index {
        LineIndex::Finite(s) => span_pairs(ext, basis.iter().map(|&x| (top.mul(s, x), x))),
        LineIndex::Infinity => span_pairs(ext, basis.iter().map(|&x| (x, 0))),
    }
}

/// A family of ℓ-dimensional subspaces of GF(q)^{2ℓ} claimed to be a spread.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spread {
    pub ell: usize,
    pub members: Vec<Subspace>,
}

impl Spread {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, line: &Subspace) -> bool {
        self.members.contains(line)
    }

    /// Index of the member containing the projective point (first match).
    pub fn member_through(&self, f: &Field, point: &ProjPoint) -> Option<usize> {
        self.members
            .iter()
            .position(|m| m.contains(f, point.representative()).unwrap_or(false))
    }
}

/// A spread whose members are labelled by ℙ¹(GF(q^ℓ)).
#[derive(Clone, Debug)]
pub struct LabelledSpread {
    pub spread: Spread,
    pub labels: Vec<LineIndex>,
}

impl LabelledSpread {
    pub fn member(&self, index: LineIndex) -> Option<&Subspace> {
        self.labels
            .iter()
            .position(|&l| l == index)
            .map(|i| &self.spread.members[i])
    }
}

/// The standard Desarguesian spread `{ℋ_a}` ∪ `{ℋ_∞}`.
pub fn desarguesian_spread(ext: &Extension) -> LabelledSpread {
    let labels = projective_line(ext);
    let members = labels.iter().map(|&i| desarguesian_member(ext, i)).collect();
    LabelledSpread { spread: Spread { ell: ext.ell() as usize, members }, labels }
}

/// The conjugate Desarguesian spread `{ℋ̃_s}` ∪ `{ℋ̃_∞}`.
pub fn conjugate_spread(ext: &Extension) -> LabelledSpread {
    let labels = projective_line(ext);
    let members = labels.iter().map(|&i| conjugate_member(ext, i)).collect();
    LabelledSpread { spread: Spread { ell: ext.ell() as usize, members }, labels }
}

/// Outcome of a partition check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpreadVerdict {
    Spread,
    Uncovered(ProjPoint),
    Overcovered { point: ProjPoint, members: Vec<usize> },
}

impl SpreadVerdict {
    pub fn is_spread(&self) -> bool {
        matches!(self, SpreadVerdict::Spread)
    }
}

/// Checks that the members' nonzero vectors partition GF(q)^{2ℓ} \ {0}.
pub fn is_spread(f: &Field, members: &[Subspace]) -> Result<SpreadVerdict> {
    let Some(first) = members.first() else {
        return Err(Error::InvalidParameters("empty member list".into()));
    };
    let ambient = first.ambient_dim();
    if ambient % 2 != 0 {
        return Err(Error::Dimension(format!("ambient dimension {ambient} is odd")));
    }
    let ell = ambient / 2;
    for m in members {
        if m.ambient_dim() != ambient || m.dim() != ell {
            return Err(Error::Dimension(format!(
                "member of dimension {} in ambient {}, expected {ell} in {ambient}",
                m.dim(),
                m.ambient_dim()
            )));
        }
    }
    let mut cover: BTreeMap<ProjPoint, Vec<usize>> = BTreeMap::new();
    for (i, m) in members.iter().enumerate() {
        for p in m.projective_points(f) {
            cover.entry(p).or_default().push(i);
        }
    }
    if let Some((point, owners)) = cover.iter().find(|(_, owners)| owners.len() > 1) {
        return Ok(SpreadVerdict::Overcovered { point: point.clone(), members: owners.clone() });
    }
    for p in Subspace::full(ambient).projective_points(f) {
        if !cover.contains_key(&p) {
            return Ok(SpreadVerdict::Uncovered(p));
        }
    }
    Ok(SpreadVerdict::Spread)
}

/// q+1 pairwise skew lines of PG(3,q) together with their q+1 transversals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Regulus {
    pub lines: Vec<Subspace>,
    pub transversals: Vec<Subspace>,
}

impl Regulus {
    /// The opposite regulus: the roles of lines and transversals swapped.
    pub fn opposite(&self) -> Regulus {
        Regulus { lines: self.transversals.clone(), transversals: self.lines.clone() }
    }

    pub fn contains(&self, line: &Subspace) -> bool {
        self.lines.binary_search(line).is_ok()
    }

    /// Intersection points of every line with every transversal, row by row.
    pub fn grid(&self, f: &Field) -> Result<Vec<Vec<ProjPoint>>> {
        self.lines
            .iter()
            .map(|l| {
                self.transversals
                    .iter()
                    .map(|t| {
                        let meet = l.intersection(f, t)?;
                        if meet.dim() != 1 {
                            return Err(Error::Inconsistent("line and transversal do not meet in a point".into()));
                        }
                        Ok(meet.projective_points(f).remove(0))
                    })
                    .collect()
            })
            .collect()
    }
}

/// How a regularity check covered the triples of a spread.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TripleMode {
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

impl TripleMode {
    /// Exhaustive for q ≤ 4, otherwise 2000 seeded samples.
    pub fn auto(q: u32, seed: u64) -> Self {
        if q <= 4 {
            TripleMode::Exhaustive
        } else {
            TripleMode::Sampled { trials: 2000, seed }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub mode: TripleMode,
    pub triples_checked: usize,
    /// Member indices of a triple whose regulus leaves the spread.
    pub failing_triple: Option<[usize; 3]>,
}

/// PG(3,q) with its full line set cached.
#[derive(Clone, Debug)]
pub struct Pg3 {
    field: Field,
    lines: Vec<Subspace>,
}

fn meets(f: &Field, a: &Subspace, b: &Subspace) -> bool {
    a.intersect_dim(f, b).expect("same ambient") > 0
}

impl Pg3 {
    pub fn new(field: Field) -> Result<Self> {
        let lines = enumerate_subspaces(&field, 4, 2, u128::MAX)?.collect();
        Ok(Pg3 { field, lines })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn lines(&self) -> &[Subspace] {
        &self.lines
    }

    fn check_line(&self, l: &Subspace) -> Result<()> {
        if l.ambient_dim() != 4 || l.dim() != 2 {
            return Err(Error::Dimension("expected a line of PG(3,q)".into()));
        }
        Ok(())
    }

    /// Every line of PG(3,q) meeting all of `set`.
    pub fn transversals(&self, set: &[Subspace]) -> Vec<Subspace> {
        self.lines
            .iter()
            .filter(|m| set.iter().all(|l| meets(&self.field, m, l)))
            .cloned()
            .collect()
    }

    fn regulus_from_lines(&self, lines: &[Subspace]) -> Result<Regulus> {
        let transversals = self.transversals(lines);
        let q1 = self.q() as usize + 1;
        let mut regulus_lines = self.transversals(&transversals);
        regulus_lines.sort();
        if transversals.len() != q1 || regulus_lines.len() != q1 {
            return Err(Error::Inconsistent(format!(
                "expected {q1} lines and transversals, found {} and {}",
                regulus_lines.len(),
                transversals.len()
            )));
        }
        let mut transversals = transversals;
        transversals.sort();
        Ok(Regulus { lines: regulus_lines, transversals })
    }

    /// The unique regulus through three pairwise skew lines.
    pub fn regulus_through(&self, l1: &Subspace, l2: &Subspace, l3: &Subspace) -> Result<Regulus> {
        for l in [l1, l2, l3] {
            self.check_line(l)?;
        }
        let f = &self.field;
        if meets(f, l1, l2) || meets(f, l1, l3) || meets(f, l2, l3) {
            return Err(Error::InvalidParameters("lines are not pairwise skew".into()));
        }
        self.regulus_from_lines(&[l1.clone(), l2.clone(), l3.clone()])
    }

    /// `R(m) = {L ∈ s : L ∩ m ≠ 0}` for a line `m` outside the spread.
    pub fn transversal_regulus(&self, m: &Subspace, s: &Spread) -> Result<Regulus> {
        self.check_line(m)?;
        if s.contains(m) {
            return Err(Error::InvalidParameters("line belongs to the spread".into()));
        }
        let hit: Vec<Subspace> = s
            .members
            .iter()
            .filter(|l| meets(&self.field, l, m))
            .cloned()
            .collect();
        if hit.len() != self.q() as usize + 1 {
            return Err(Error::Inconsistent(format!("line meets {} spread members", hit.len())));
        }
        let regulus = self.regulus_from_lines(&hit)?;
        if regulus.lines != {
            let mut h = hit.clone();
            h.sort();
            h
        } {
            return Err(Error::Inconsistent("spread lines met by the line do not form a regulus".into()));
        }
        Ok(regulus)
    }

    /// Whether `ℛ(L₁,L₂,L₃) ⊆ s` for all (or sampled) triples of members.
    pub fn is_regular_spread(&self, s: &Spread, mode: TripleMode) -> Result<RegularityReport> {
        if s.ell != 2 {
            return Err(Error::InvalidParameters("regularity is defined for line spreads (ℓ = 2)".into()));
        }
        let members: BTreeSet<&Subspace> = s.members.iter().collect();
        let n = s.members.len();
        let check = |i: usize, j: usize, k: usize| -> Result<bool> {
            let reg = self.regulus_through(&s.members[i], &s.members[j], &s.members[k])?;
            Ok(reg.lines.iter().all(|l| members.contains(l)))
        };
        let mut checked = 0;
        match mode {
            TripleMode::Exhaustive => {
                for i in 0..n {
                    for j in i + 1..n {
                        for k in j + 1..n {
                            checked += 1;
                            if !check(i, j, k)? {
                                return Ok(RegularityReport {
                                    regular: false,
                                    mode,
                                    triples_checked: checked,
                                    failing_triple: Some([i, j, k]),
                                });
                            }
                        }
                    }
                }
            }
            TripleMode::Sampled { trials, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..trials {
                    let mut idx = sample(&mut rng, n, 3).into_vec();
                    idx.sort_unstable();
                    checked += 1;
                    if !check(idx[0], idx[1], idx[2])? {
                        return Ok(RegularityReport {
                            regular: false,
                            mode,
                            triples_checked: checked,
                            failing_triple: Some([idx[0], idx[1], idx[2]]),
                        });
                    }
                }
            }
        }
        Ok(RegularityReport { regular: true, mode, triples_checked: checked, failing_triple: None })
    }

    /// Replaces a regulus contained in `s` by its opposite regulus.
    pub fn replace_regulus(&self, s: &Spread, regulus: &Regulus) -> Result<Spread> {
        if !regulus.lines.iter().all(|l| s.contains(l)) {
            return Err(Error::InvalidParameters("regulus is not contained in the spread".into()));
        }
        let mut members: Vec<Subspace> = s
            .members
            .iter()
            .filter(|l| !regulus.contains(l))
            .cloned()
            .collect();
        members.extend(regulus.transversals.iter().cloned());
        Ok(Spread { ell: s.ell, members })
    }

    /// Every line spread of PG(3,q), found by exact cover over points; stops after `limit`.
    pub fn enumerate_spreads(&self, limit: usize) -> Vec<Spread> {
        let f = &self.field;
        let points = Subspace::full(4).projective_points(f);
        let point_id: BTreeMap<&ProjPoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let line_points: Vec<Vec<usize>> = self
            .lines
            .iter()
            .map(|l| l.projective_points(f).iter().map(|p| point_id[p]).collect())
            .collect();
        let mut through: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for (li, pts) in line_points.iter().enumerate() {
            for &p in pts {
                through[p].push(li);
            }
        }
        let mut covered = vec![false; points.len()];
        let mut chosen = Vec::new();
        let mut out = Vec::new();

        fn search(
            covered: &mut Vec<bool>,
            chosen: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
            through: &[Vec<usize>],
            line_points: &[Vec<usize>],
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            let Some(p) = covered.iter().position(|&c| !c) else {
                out.push(chosen.clone());
                return;
            };
            for &li in &through[p] {
                if line_points[li].iter().any(|&x| covered[x]) {
                    continue;
                }
                for &x in &line_points[li] {
                    covered[x] = true;
                }
                chosen.push(li);
                search(covered, chosen, out, through, line_points, limit);
                chosen.pop();
                for &x in &line_points[li] {
                    covered[x] = false;
                }
            }
        }

        search(&mut covered, &mut chosen, &mut out, &through, &line_points, limit);
        out.into_iter()
            .map(|idx| Spread { ell: 2, members: idx.into_iter().map(|i| self.lines[i].clone()).collect() })
            .collect()
    }
}
