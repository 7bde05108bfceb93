//! (n, k, ℓ) MDS array codes given by a block parity-check matrix
//! `H = [H_1 … H_n]`, together with their intrinsic data: node subspaces
//! `ℋ_i = col(H_i)` and column point sets `X_i`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, DEFAULT_AMBIENT_CAP};
use crate::linalg::{enumerate_subspaces, random_full_rank, Matrix, ProjPoint, Subspace};

/// Default cap on the number of r-subsets `is_mds` will examine.
pub const DEFAULT_MDS_CAP: u128 = 1_000_000;

#[derive(Clone, Debug)]
pub struct ArrayCode {
    field: Field,
    n: usize,
    k: usize,
    ell: usize,
    blocks: Vec<Matrix>,
    node_subspaces: Vec<Subspace>,
    column_points: Vec<Vec<ProjPoint>>,
}

impl PartialEq for ArrayCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.k == other.k
            && self.ell == other.ell
            && self.blocks == other.blocks
    }
}

/// A codeword split into its `n` blocks of `ℓ` symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codeword {
    pub blocks: Vec<Vec<u32>>,
}

/// Result of the MDS check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MdsVerdict {
    Mds,
    /// The listed (0-based) nodes have a singular `H_I`.
    Fails { subset: Vec<usize> },
    /// More than `cap` subsets; nothing was concluded.
    NotVerified { subsets: u128, cap: u128 },
}

impl MdsVerdict {
    pub fn is_mds(&self) -> bool {
        matches!(self, MdsVerdict::Mds)
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `visit` on every `r`-subset of `0..n` in lexicographic order until it returns `false`.
pub fn for_each_subset(n: usize, r: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `q^ℓ + r − 1`, the largest possible length of an MDS array code with these parameters.
pub fn length_bound(q: u32, ell: u32, r: u32) -> Result<u64> {
    if r < 2 {
        return Err(Error::InvalidParameters(format!("length bound needs r >= 2, got {r}")));
    }
    Ok((q as u64).pow(ell) + r as u64 - 1)
}

/// Points of `subspace` starting with `required`, completed greedily by the
/// lexicographically smallest points keeping the set independent, then sorted.
pub fn default_points(f: &Field, subspace: &Subspace, required: &[ProjPoint]) -> Result<Vec<ProjPoint>> {
    let ell = subspace.dim();
    let mut chosen: Vec<ProjPoint> = Vec::with_capacity(ell);
    let rank_of = |pts: &[ProjPoint]| -> usize {
        let rows: Vec<Vec<u32>> = pts.iter().map(|p| p.representative().to_vec()).collect();
        Matrix::from_rows(&rows, subspace.ambient_dim()).map(|m| m.rank(f)).unwrap_or(0)
    };
    for p in required {
        if chosen.contains(p) {
            continue;
        }
        if !subspace.contains(f, p.representative())? {
            return Err(Error::InvalidCode(format!("required point {p:?} lies outside the node subspace")));
        }
        chosen.push(p.clone());
        if rank_of(&chosen) != chosen.len() {
            return Err(Error::InvalidCode("required points are linearly dependent".into()));
        }
    }
    if chosen.len() > ell {
        return Err(Error::InvalidCode(format!("{} required points exceed ℓ = {ell}", chosen.len())));
    }
    for p in subspace.projective_points(f) {
        if chosen.len() == ell {
            break;
        }
        if chosen.contains(&p) {
            continue;
        }
        chosen.push(p);
        if rank_of(&chosen) != chosen.len() {
            chosen.pop();
        }
    }
    chosen.sort();
    Ok(chosen)
}

impl ArrayCode {
    /// Builds a code from its parity-check blocks (each `rℓ × ℓ`).
    pub fn from_blocks(field: Field, ell: usize, blocks: Vec<Matrix>) -> Result<Self> {
        let n = blocks.len();
        if ell == 0 {
            return Err(Error::InvalidCode("sub-packetization must be at least 1".into()));
        }
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidCode("a code needs at least one node".into()));
        };
        let ambient = first.rows();
        if ambient % ell != 0 || ambient == 0 {
            return Err(Error::InvalidCode(format!("block height {ambient} is not a positive multiple of ℓ = {ell}")));
        }
        let r = ambient / ell;
        if r >= n {
            return Err(Error::InvalidCode(format!("redundancy r = {r} requires more than {n} nodes (k >= 1)")));
        }
        let size = (field.q() as u128).checked_pow(ambient as u32).unwrap_or(u128::MAX);
        if size > DEFAULT_AMBIENT_CAP {
            return Err(Error::TooLarge { size, cap: DEFAULT_AMBIENT_CAP });
        }
        let mut node_subspaces = Vec::with_capacity(n);
        let mut column_points = Vec::with_capacity(n);
        for (i, b) in blocks.iter().enumerate() {
            if b.rows() != ambient || b.cols() != ell {
                return Err(Error::InvalidCode(format!(
                    "block {i} is {}x{}, expected {ambient}x{ell}",
                    b.rows(),
                    b.cols()
                )));
            }
            b.check_entries(&field)?;
            if b.rank(&field) != ell {
                return Err(Error::InvalidCode(format!("block {i} does not have full column rank {ell}")));
            }
            node_subspaces.push(Subspace::column_space(&field, b));
            let mut pts: Vec<ProjPoint> = b
                .col_vecs()
                .iter()
                .map(|c| ProjPoint::from_vector(&field, c).expect("full-rank columns are nonzero"))
                .collect();
            pts.sort();
            column_points.push(pts);
        }
        Ok(ArrayCode { field, n, k: n - r, ell, blocks, node_subspaces, column_points })
    }

    /// Realizes intrinsic data: the columns of `H_i` are the normalized
    /// representatives of `X_i` in sorted order.
    pub fn from_intrinsic(field: Field, subspaces: &[Subspace], points: &[Vec<ProjPoint>]) -> Result<Self> {
        if subspaces.len() != points.len() {
            return Err(Error::InvalidCode("one point set per node subspace is required".into()));
        }
        let Some(first) = subspaces.first() else {
            return Err(Error::InvalidCode("a code needs at least one node".into()));
        };
        let ell = first.dim();
        let ambient = first.ambient_dim();
        let mut blocks = Vec::with_capacity(subspaces.len());
        for (i, (h, x)) in subspaces.iter().zip(points).enumerate() {
            if h.dim() != ell || h.ambient_dim() != ambient {
                return Err(Error::InvalidCode(format!("node subspace {i} has the wrong dimension")));
            }
            let mut x = x.clone();
            x.sort();
            x.dedup();
            if x.len() != ell {
                return Err(Error::InvalidCode(format!("node {i} needs {ell} distinct column points")));
            }
            for p in &x {
                if p.ambient_dim() != ambient || !h.contains(&field, p.representative())? {
                    return Err(Error::InvalidCode(format!("column point of node {i} lies outside its subspace")));
                }
            }
            let cols: Vec<Vec<u32>> = x.iter().map(|p| p.representative().to_vec()).collect();
            let block = Matrix::from_cols(&cols, ambient)?;
            if block.rank(&field) != ell {
                return Err(Error::InvalidCode(format!("column points of node {i} do not span its subspace")));
            }
            blocks.push(block);
        }
        let code = Self::from_blocks(field, ell, blocks)?;
        debug_assert_eq!(code.node_subspaces, subspaces);
        Ok(code)
    }

    /// Node subspaces with default column points.
    pub fn from_subspaces(field: Field, subspaces: &[Subspace]) -> Result<Self> {
        let points = subspaces
            .iter()
            .map(|h| default_points(&field, h, &[]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_intrinsic(field, subspaces, &points)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn r(&self) -> usize {
        self.n - self.k
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn ambient_dim(&self) -> usize {
        self.r() * self.ell
    }

    pub fn block(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn node_subspace(&self, i: usize) -> &Subspace {
        &self.node_subspaces[i]
    }

    pub fn node_subspaces(&self) -> &[Subspace] {
        &self.node_subspaces
    }

    pub fn column_points(&self, i: usize) -> &[ProjPoint] {
        &self.column_points[i]
    }

    /// The full `rℓ × nℓ` parity-check matrix.
    pub fn parity_check(&self) -> Matrix {
        self.blocks[1..]
            .iter()
            .fold(self.blocks[0].clone(), |acc, b| acc.hstack(b).expect("equal heights"))
    }

    /// Dimension of `ker(H)`, which is `kℓ` for a full-row-rank `H`.
    pub fn dimension(&self) -> usize {
        self.n * self.ell - self.parity_check().rank(&self.field)
    }

    /// Checks that every `H_I` (|I| = r) is invertible, and that `Σ_{j∈I} ℋ_j = 𝕍`
    /// gives the same answer.
    pub fn is_mds(&self, cap: u128) -> Result<MdsVerdict> {
        let (n, r) = (self.n, self.r());
        let subsets = binomial(n as u64, r as u64);
        if subsets > cap {
            return Ok(MdsVerdict::NotVerified { subsets, cap });
        }
        let full = self.ambient_dim();
        let mut failing = None;
        let mut disagreement = None;
        for_each_subset(n, r, |idx| {
            let block = idx[1..]
                .iter()
                .fold(self.blocks[idx[0]].clone(), |acc, &j| acc.hstack(&self.blocks[j]).expect("equal heights"));
            let invertible = block.inverse(&self.field).is_some();
            let sum = idx[1..].iter().fold(self.node_subspaces[idx[0]].clone(), |acc, &j| {
                acc.sum(&self.field, &self.node_subspaces[j]).expect("same ambient")
            });
            let spanning = sum.dim() == full;
            if invertible != spanning {
                disagreement = Some(idx.to_vec());
                return false;
            }
            if !invertible {
                failing = Some(idx.to_vec());
                return false;
            }
            true
        });
        if let Some(idx) = disagreement {
            return Err(Error::Inconsistent(format!("matrix and subspace MDS forms disagree on {idx:?}")));
        }
        Ok(match failing {
            Some(subset) => MdsVerdict::Fails { subset },
            None => MdsVerdict::Mds,
        })
    }

    /// `Σ_i H_i C_i`.
    pub fn syndrome(&self, cw: &Codeword) -> Result<Vec<u32>> {
        if cw.blocks.len() != self.n {
            return Err(Error::Dimension(format!("{} blocks for a length-{} code", cw.blocks.len(), self.n)));
        }
        let mut acc = vec![0u32; self.ambient_dim()];
        for (h, c) in self.blocks.iter().zip(&cw.blocks) {
            let part = h.mul_vec(&self.field, c)?;
            for (a, b) in acc.iter_mut().zip(part) {
                *a = self.field.add(*a, b);
            }
        }
        Ok(acc)
    }

    pub fn is_codeword(&self, cw: &Codeword) -> Result<bool> {
        Ok(self.syndrome(cw)?.iter().all(|&x| x == 0))
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            field: self.field.spec(),
            n: self.n,
            k: self.k,
            ell: self.ell,
            blocks: self.blocks.iter().map(|b| b.row_vecs()).collect(),
            column_points: self
                .column_points
                .iter()
                .map(|pts| pts.iter().map(|p| p.representative().to_vec()).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("code files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodeFile = serde_json::from_str(text)?;
        file.into_code()
    }
}

/// On-disk form of an array code. Blocks are listed row by row; column points
/// are normalized vectors. Field elements use the base-p digit encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub field: FieldSpec,
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub blocks: Vec<Vec<Vec<u32>>>,
    pub column_points: Vec<Vec<Vec<u32>>>,
}

impl CodeFile {
    pub fn into_code(self) -> Result<ArrayCode> {
        let field = Field::from_spec(&self.field)?;
        if self.blocks.len() != self.n || self.column_points.len() != self.n {
            return Err(Error::Format(format!("expected {} blocks and point lists", self.n)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::Format(format!("k = {} must satisfy 1 <= k < n = {}", self.k, self.n)));
        }
        let ambient = (self.n - self.k) * self.ell;
        let blocks = self
            .blocks
            .iter()
            .map(|rows| Matrix::from_rows(rows, self.ell))
            .collect::<Result<Vec<_>>>()?;
        if blocks.iter().any(|b| b.rows() != ambient) {
            return Err(Error::Format(format!("every block must have {ambient} rows")));
        }
        let code = ArrayCode::from_blocks(field, self.ell, blocks)?;
        for (i, listed) in self.column_points.into_iter().enumerate() {
            let mut pts = listed
                .into_iter()
                .map(|v| ProjPoint::from_normalized(code.field(), v))
                .collect::<Result<Vec<_>>>()?;
            pts.sort();
            if pts != code.column_points[i] {
                return Err(Error::Format(format!("column points of node {i} do not match its block")));
            }
        }
        Ok(code)
    }
}

/// Samples node subspaces one at a time, rejecting any candidate that breaks
/// the r-wise spanning condition; restarts when stuck. Columns of each block
/// are a uniformly random basis. Returns `None` after `retry_cap` rejections.
const RESTART_AFTER: usize = 256;

pub fn random_mds_code<R: Rng + ?Sized>(
    field: &Field,
    n: usize,
    ell: usize,
    r: usize,
    retry_cap: usize,
    rng: &mut R,
) -> Result<Option<ArrayCode>> {
    if r == 0 || n <= r || ell == 0 {
        return Err(Error::InvalidParameters(format!("need 1 <= r < n and ℓ >= 1, got n={n} r={r} ℓ={ell}")));
    }
    let ambient = r * ell;
    let mut blocks: Vec<Matrix> = Vec::with_capacity(n);
    let mut subs: Vec<Subspace> = Vec::with_capacity(n);
    let mut rejections = 0;
    let mut stuck = 0;
    while blocks.len() < n {
        if rejections >= retry_cap {
            return Ok(None);
        }
        if stuck >= RESTART_AFTER {
            blocks.clear();
            subs.clear();
            stuck = 0;
        }
        let block = random_full_rank(field, ell, ambient, rng).transpose();
        let cand = Subspace::column_space(field, &block);
        let mut ok = true;
        let m = subs.len();
        for_each_subset(m, (r - 1).min(m), |idx| {
            // Fewer than r−1 existing nodes: the sum must still be direct.
            let sum = idx.iter().fold(cand.clone(), |acc, &j| acc.sum(field, &subs[j]).unwrap());
            ok = sum.dim() == (idx.len() + 1) * ell;
            ok
        });
        if ok {
            blocks.push(block);
            subs.push(cand);
            stuck = 0;
        } else {
            rejections += 1;
            stuck += 1;
        }
    }
    Ok(Some(ArrayCode::from_blocks(field.clone(), ell, blocks)?))
}

/// Largest family of ℓ-subspaces of GF(q)^{rℓ} satisfying the r-wise spanning
/// condition, by exhaustive backtracking over the subspace enumeration.
pub fn max_spanning_family(field: &Field, ell: usize, r: usize, budget: u128) -> Result<Vec<Subspace>> {
    if r < 2 {
        return Err(Error::InvalidParameters("r must be at least 2".into()));
    }
    let ambient = r * ell;
    let all: Vec<Subspace> = enumerate_subspaces(field, ambient, ell, budget)?.collect();
    let upper = length_bound(field.q(), ell as u32, r as u32)? as usize;

    // Pairwise sums must be direct; precompute that relation.
    let count = all.len();
    let mut direct = vec![false; count * count];
    for a in 0..count {
        for b in a + 1..count {
            let d = all[a].intersect_dim(field, &all[b])? == 0;
            direct[a * count + b] = d;
            direct[b * count + a] = d;
        }
    }

    struct Search<'a> {
        field: &'a Field,
        all: &'a [Subspace],
        direct: &'a [bool],
        count: usize,
        r: usize,
        ambient: usize,
        upper: usize,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn compatible(&self, chosen: &[usize], cand: usize) -> bool {
            if !chosen.iter().all(|&c| self.direct[c * self.count + cand]) {
                return false;
            }
            if self.r == 2 {
                return true;
            }
            let mut ok = true;
            for_each_subset(chosen.len(), (self.r - 1).min(chosen.len()), |idx| {
                let sum = idx.iter().fold(self.all[cand].clone(), |acc, &j| {
                    acc.sum(self.field, &self.all[chosen[j]]).unwrap()
                });
                let want = if idx.len() == self.r - 1 { self.ambient } else { (idx.len() + 1) * self.all[cand].dim() };
                ok = sum.dim() == want;
                ok
            });
            ok
        }

        fn run(&mut self, chosen: &mut Vec<usize>, start: usize) {
            if chosen.len() > self.best.len() {
                self.best = chosen.clone();
            }
            if self.best.len() == self.upper {
                return;
            }
            if chosen.len() + (self.count - start) <= self.best.len() {
                return;
            }
            for cand in start..self.count {
                if chosen.len() + (self.count - cand) <= self.best.len() {
                    return;
                }
                if self.compatible(chosen, cand) {
                    chosen.push(cand);
                    self.run(chosen, cand + 1);
                    chosen.pop();
                    if self.best.len() == self.upper {
                        return;
                    }
                }
            }
        }
    }

    let mut search = Search { field, all: &all, direct: &direct, count, r, ambient, upper, best: Vec::new() };
    // Any family may be moved so that its first member is the first subspace
    // in the enumeration (GL acts transitively), so fix it.
    let mut chosen = vec![0];
    search.run(&mut chosen, 1);
    Ok(search.best.iter().map(|&i| all[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::desarguesian_spread;
    use crate::field::Extension;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn des_code(q: u32, n: usize) -> ArrayCode {
        let ext = Extension::standard(q, 2).unwrap();
        let members = desarguesian_spread(&ext).spread.members;
        ArrayCode::from_subspaces(ext.base().clone(), &members[..n]).unwrap()
    }

    #[test]
    fn desarguesian_members_give_mds_codes() {
        let code = des_code(3, 10);
        assert_eq!((code.n(), code.k(), code.ell()), (10, 8, 2));
        assert!(code.is_mds(DEFAULT_MDS_CAP).unwrap().is_mds());
        assert_eq!(code.dimension(), code.k() * code.ell());
        for i in 0..code.n() {
            assert_eq!(code.node_subspace(i).dim(), 2);
            assert_eq!(code.column_points(i).len(), 2);
        }
    }

    #[test]
    fn duplicated_subspace_fails_mds_on_that_pair() {
        let ext = Extension::standard(3, 2).unwrap();
        let m = desarguesian_spread(&ext).spread.members;
        let subs = vec![m[0].clone(), m[0].clone(), m[1].clone()];
        let code = ArrayCode::from_subspaces(ext.base().clone(), &subs).unwrap();
        assert_eq!(code.is_mds(DEFAULT_MDS_CAP).unwrap(), MdsVerdict::Fails { subset: vec![0, 1] });
    }

    #[test]
    fn mds_cap_reports_not_verified() {
        let code = des_code(3, 10);
        assert!(matches!(code.is_mds(10).unwrap(), MdsVerdict::NotVerified { subsets: 45, cap: 10 }));
    }

    #[test]
    fn intrinsic_rejects_bad_point_sets() {
        let ext = Extension::standard(3, 2).unwrap();
        let f = ext.base();
        let m = desarguesian_spread(&ext).spread.members;
        let p = m[0].projective_points(f).remove(0);
        let err = ArrayCode::from_intrinsic(f.clone(), &m[..3], &[vec![p.clone(), p.clone()], vec![], vec![]]);
        assert!(err.is_err());
        let single = ArrayCode::from_subspaces(f.clone(), &[Subspace::full(2)]);
        assert!(single.is_err());
    }

    #[test]
    fn intrinsic_round_trip() {
        let code = des_code(3, 6);
        let again = ArrayCode::from_intrinsic(
            code.field().clone(),
            code.node_subspaces(),
            &(0..code.n()).map(|i| code.column_points(i).to_vec()).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(again, code);
    }

    #[test]
    fn serialization_round_trip_and_rank_check() {
        let code = des_code(3, 4);
        let text = code.to_json();
        let back = ArrayCode::from_json(&text).unwrap();
        assert_eq!(back, code);
        assert_eq!(back.to_json(), text);
        let mut file = code.to_file();
        file.blocks[1] = vec![vec![1, 1], vec![0, 0], vec![0, 0], vec![0, 0]];
        assert!(file.into_code().is_err());
        assert!(ArrayCode::from_json("{\"field\": 3}").is_err());
    }

    #[test]
    fn length_bound_values() {
        assert_eq!(length_bound(3, 2, 2).unwrap(), 10);
        assert_eq!(length_bound(2, 2, 3).unwrap(), 6);
        assert!(length_bound(2, 2, 1).is_err());
    }

    #[test]
    fn triple_wise_spanning_family_of_five() {
        let f = Field::prime(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let code = (0..50)
            .find_map(|_| random_mds_code(&f, 5, 2, 3, 10_000, &mut rng).unwrap())
            .expect("a (5,2,2) code over GF(2) exists");
        assert_eq!(code.r(), 3);
        assert!(code.is_mds(DEFAULT_MDS_CAP).unwrap().is_mds());
    }

    #[test]
    fn subsets_are_enumerated_lexicographically() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(10, 5), 252);
    }
}
