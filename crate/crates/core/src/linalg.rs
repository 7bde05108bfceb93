//! Dense matrices over GF(q), canonical subspaces and projective points.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// Default cap on the number of subspaces an enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Row-major dense matrix of field elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn new(rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from rows; `cols` is needed for the empty case.
    pub fn from_rows(rows: &[Vec<u32>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Dimension(format!("row of length {} in a {cols}-column matrix", row.len())));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_cols(cols: &[Vec<u32>], rows: usize) -> Result<Self> {
        Ok(Self::from_rows(cols, rows)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn check_entries(&self, f: &Field) -> Result<()> {
        for &x in &self.data {
            f.check(x)?;
        }
        Ok(())
    }

    pub fn mul(&self, f: &Field, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * out.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, f: &Field, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!("cannot stack {} and {} columns", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!("cannot join {} and {} rows", self.rows, other.rows)));
        }
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref_pivots(&self, f: &Field) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(sel) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if sel != row {
                for c in 0..m.cols {
                    m.data.swap(sel * m.cols + c, row * m.cols + c);
                }
            }
            let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
            for c in col..m.cols {
                let v = m.get(row, c);
                m.set(row, c, f.mul(v, inv));
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = f.sub(m.get(r, c), f.mul(factor, m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rref(&self, f: &Field) -> (Matrix, usize) {
        let (m, pivots) = self.rref_pivots(f);
        (m, pivots.len())
    }

    /// Rank by forward elimination on a scratch copy.
    pub fn rank(&self, f: &Field) -> usize {
        let mut m = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(sel) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
                continue;
            };
            if sel != rank {
                for c in 0..cols {
                    m.swap(sel * cols + c, rank * cols + c);
                }
            }
            let inv = f.inv(m[rank * cols + col]).expect("pivot is nonzero");
            for r in rank + 1..rows {
                let factor = f.mul(m[r * cols + col], inv);
                if factor == 0 {
                    continue;
                }
                for c in col..cols {
                    m[r * cols + c] = f.sub(m[r * cols + c], f.mul(factor, m[rank * cols + c]));
                }
            }
            rank += 1;
        }
        rank
    }

    /// Null space `{v : self·v = 0}` as a canonical subspace of GF(q)^cols.
    pub fn kernel(&self, f: &Field) -> Subspace {
        let (r, pivots) = self.rref_pivots(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let vectors: Vec<Vec<u32>> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![0u32; self.cols];
                v[fc] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(i, fc));
                }
                v
            })
            .collect();
        Subspace::span(f, self.cols, &vectors).expect("kernel vectors have the ambient length")
    }

    pub fn inverse(&self, f: &Field) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Matrix::identity(n)).ok()?;
        let (r, pivots) = aug.rref_pivots(f);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Some(inv)
    }

    /// Indices of columns that are not identically zero.
    pub fn nonzero_cols(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&c| (0..self.rows).any(|r| self.get(r, c) != 0))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }
}

/// A subspace of GF(q)^d stored by its reduced row echelon basis.
///
/// The basis has no zero rows, so two values are equal exactly when they
/// describe the same subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::zeros(0, ambient) }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { ambient, basis: Matrix::identity(ambient) }
    }

    /// Row space of `m`.
    pub fn row_space(f: &Field, m: &Matrix) -> Self {
        let (r, rank) = m.rref(f);
        let data = r.data[..rank * m.cols].to_vec();
        Subspace { ambient: m.cols, basis: Matrix { rows: rank, cols: m.cols, data } }
    }

    /// Column space of `m`.
    pub fn column_space(f: &Field, m: &Matrix) -> Self {
        Self::row_space(f, &m.transpose())
    }

    pub fn span(f: &Field, ambient: usize, vectors: &[Vec<u32>]) -> Result<Self> {
        Ok(Self::row_space(f, &Matrix::from_rows(vectors, ambient)?))
    }

    /// Wraps a matrix already known to be in reduced row echelon form without zero rows.
    pub(crate) fn from_rref_unchecked(basis: Matrix) -> Self {
        Subspace { ambient: basis.cols, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::Dimension(format!(
                "ambient dimensions {} and {} differ",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn contains(&self, f: &Field, v: &[u32]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::Dimension(format!("vector of length {} in ambient {}", v.len(), self.ambient)));
        }
        if v.iter().all(|&x| x == 0) {
            return Ok(true);
        }
        let stacked = self.basis.vstack(&Matrix::from_rows(&[v.to_vec()], self.ambient)?)?;
        Ok(stacked.rank(f) == self.dim())
    }

    /// `{y : ⟨x, y⟩ = 0 for all x in self}`; a vector lies in `self` iff every
    /// annihilator basis row pairs to zero with it.
    pub fn annihilator(&self, f: &Field) -> Subspace {
        if self.dim() == 0 {
            return Self::full(self.ambient);
        }
        self.basis.kernel(f)
    }

    pub fn sum(&self, f: &Field, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        Ok(Self::row_space(f, &self.basis.vstack(&other.basis)?))
    }

    /// `dim u + dim v − rank([u; v])`.
    pub fn intersect_dim(&self, f: &Field, other: &Subspace) -> Result<usize> {
        self.same_ambient(other)?;
        let stacked = self.basis.vstack(&other.basis)?;
        Ok(self.dim() + other.dim() - stacked.rank(f))
    }

    pub fn intersection(&self, f: &Field, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(self.ambient));
        }
        // x = a·U lies in V iff A·(a·U)ᵀ = 0 for the annihilator A of V.
        let ann = other.annihilator(f);
        if ann.dim() == 0 {
            return Ok(self.clone());
        }
        let system = ann.basis.mul(f, &self.basis.transpose())?;
        let coeffs = system.kernel(f);
        let m = coeffs.basis.mul(f, &self.basis)?;
        Ok(Self::row_space(f, &m))
    }

    pub fn is_subspace_of(&self, f: &Field, other: &Subspace) -> Result<bool> {
        Ok(self.intersect_dim(f, other)? == self.dim())
    }

    /// Linear combinations `Σ c_i b_i` for every coefficient vector, in odometer order.
    pub fn vectors(&self, f: &Field) -> Vec<Vec<u32>> {
        let q = f.q() as usize;
        let d = self.dim();
        let total = q.pow(d as u32);
        (0..total)
            .map(|index| {
                let mut v = vec![0u32; self.ambient];
                let mut rest = index;
                for i in 0..d {
                    let c = (rest % q) as u32;
                    rest /= q;
                    if c != 0 {
                        for (x, &b) in v.iter_mut().zip(self.basis.row(i)) {
                            *x = f.add(*x, f.mul(c, b));
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// All 1-dimensional subspaces, sorted by normalized representative.
    pub fn projective_points(&self, f: &Field) -> Vec<ProjPoint> {
        let points: BTreeSet<ProjPoint> = self
            .vectors(f)
            .into_iter()
            .filter_map(|v| ProjPoint::from_vector(f, &v))
            .collect();
        points.into_iter().collect()
    }

    /// Image under a linear map given by a square matrix acting on column vectors.
    pub fn transform(&self, f: &Field, g: &Matrix) -> Result<Subspace> {
        if g.rows != self.ambient || g.cols != self.ambient {
            return Err(Error::Dimension("transform must be square of ambient size".into()));
        }
        let image = g.mul(f, &self.basis.transpose())?.transpose();
        Ok(Self::row_space(f, &image))
    }
}

/// A point of projective space: a nonzero vector scaled so its first nonzero
/// coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint(Vec<u32>);

impl ProjPoint {
    pub fn from_vector(f: &Field, v: &[u32]) -> Option<Self> {
        let lead = *v.iter().find(|&&x| x != 0)?;
        let inv = f.inv(lead).expect("nonzero");
        Some(ProjPoint(v.iter().map(|&x| f.mul(x, inv)).collect()))
    }

    pub fn representative(&self) -> &[u32] {
        &self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_subspace(&self, f: &Field) -> Subspace {
        Subspace::span(f, self.0.len(), std::slice::from_ref(&self.0)).expect("consistent length")
    }

    /// Accepts only already-normalized vectors.
    pub fn from_normalized(f: &Field, v: Vec<u32>) -> Result<Self> {
        let p = ProjPoint::from_vector(f, &v)
            .ok_or_else(|| Error::Format("the zero vector is not a projective point".into()))?;
        if p.0 != v {
            return Err(Error::Format(format!("point {v:?} is not normalized")));
        }
        Ok(p)
    }
}

/// Number of `s`-dimensional subspaces of GF(q)^d, saturating at `u128::MAX`.
pub fn gaussian_binomial(d: u32, s: u32, q: u32) -> u128 {
    if s > d {
        return 0;
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 0..s {
        let num = q.checked_pow(d - i).map(|x| x - 1);
        let den = q.pow(i + 1) - 1;
        match num.and_then(|n| acc.checked_mul(n)) {
            Some(x) => acc = x / den,
            None => return u128::MAX,
        }
    }
    acc
}

/// Deterministic stream of all `s`-dimensional subspaces of GF(q)^d: pivot
/// sets in lexicographic order, then free entries in odometer order.
pub struct SubspaceIter<'f> {
    field: &'f Field,
    d: usize,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    started: bool,
}

pub fn enumerate_subspaces(f: &Field, d: usize, s: usize, budget: u128) -> Result<SubspaceIter<'_>> {
    if s > d {
        return Err(Error::InvalidParameters(format!("subspace dimension {s} exceeds ambient {d}")));
    }
    let needed = gaussian_binomial(d as u32, s as u32, f.q());
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut it = SubspaceIter {
        field: f,
        d,
        pivots: Some((0..s).collect()),
        free: Vec::new(),
        counter: Vec::new(),
        started: false,
    };
    it.reset_free();
    Ok(it)
}

impl SubspaceIter<'_> {
    fn reset_free(&mut self) {
        let Some(pivots) = &self.pivots else { return };
        self.free = pivots
            .iter()
            .enumerate()
            .flat_map(|(row, &p)| {
                (p + 1..self.d)
                    .filter(|c| !pivots.contains(c))
                    .map(move |c| (row, c))
            })
            .collect();
        self.counter = vec![0; self.free.len()];
        self.started = false;
    }

    fn next_pivots(&mut self) {
        let Some(p) = &mut self.pivots else { return };
        let s = p.len();
        let d = self.d;
        let mut i = s;
        while i > 0 {
            i -= 1;
            if p[i] < d - s + i {
                p[i] += 1;
                for j in i + 1..s {
                    p[j] = p[j - 1] + 1;
                }
                self.reset_free();
                return;
            }
        }
        self.pivots = None;
    }

    fn advance_counter(&mut self) -> bool {
        let q = self.field.q();
        for digit in self.counter.iter_mut() {
            *digit += 1;
            if *digit < q {
                return true;
            }
            *digit = 0;
        }
        false
    }
}

impl Iterator for SubspaceIter<'_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            let pivots = self.pivots.clone()?;
            if self.started && !self.advance_counter() {
                self.next_pivots();
                continue;
            }
            self.started = true;
            let mut m = Matrix::zeros(pivots.len(), self.d);
            for (row, &p) in pivots.iter().enumerate() {
                m.set(row, p, 1);
            }
            for (&(row, c), &v) in self.free.iter().zip(&self.counter) {
                m.set(row, c, v);
            }
            return Some(Subspace::from_rref_unchecked(m));
        }
    }
}

/// Uniformly random `s`-dimensional subspace, via a random full-rank `s×d` matrix.
pub fn random_subspace<R: Rng + ?Sized>(f: &Field, d: usize, s: usize, rng: &mut R) -> Subspace {
    Subspace::row_space(f, &random_full_rank(f, s, d, rng))
}

/// Uniformly random `rows×cols` matrix of full row rank (`rows ≤ cols`).
pub fn random_full_rank<R: Rng + ?Sized>(f: &Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    assert!(rows <= cols, "full row rank needs rows <= cols");
    loop {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..f.q())).collect();
        let m = Matrix { rows, cols, data };
        if m.rank(f) == rows {
            return m;
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(f: &Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(0..f.q())).collect();
    Matrix { rows, cols, data }
}
