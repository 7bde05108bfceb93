//! Erase one node of a codeword and rebuild it from helper transmissions.
//!
//! Helper `j` reads only the coordinates of `C_j` at nonzero columns of
//! `M H_j` and sends the ℓ-vector `(M H_j) C_j`. Its bandwidth is counted as
//! `rank(M H_j)`, the information content of that vector, not its length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{ArrayCode, Codeword};
use crate::error::{Error, Result};
use crate::repair::{bw_of_scheme, io_of_scheme, RepairWitness};

/// The codeword `Σ c_k v_k` for kernel basis vectors `v_k` of `H`.
pub fn codeword_from_coefficients(code: &ArrayCode, coeffs: &[u32]) -> Result<Codeword> {
    let f = code.field();
    let kernel = code.parity_check().kernel(f);
    let basis = kernel.basis();
    if coeffs.len() != basis.rows() {
        return Err(Error::Dimension(format!("{} coefficients for a {}-dimensional code", coeffs.len(), basis.rows())));
    }
    let mut flat = vec![0u32; code.n() * code.ell()];
    for (k, &c) in coeffs.iter().enumerate() {
        f.check(c)?;
        for (x, &v) in flat.iter_mut().zip(basis.row(k)) {
            *x = f.add(*x, f.mul(c, v));
        }
    }
    Ok(Codeword { blocks: flat.chunks(code.ell()).map(|c| c.to_vec()).collect() })
}

/// A uniformly random codeword, deterministic per seed.
pub fn sample_codeword(code: &ArrayCode, seed: u64) -> Result<Codeword> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = code.q();
    let dim = code.dimension();
    let coeffs: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..q)).collect();
    codeword_from_coefficients(code, &coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelperTrace {
    pub helper: usize,
    /// `rank(M H_j)`.
    pub downloaded: usize,
    /// `nz(M H_j)`.
    pub accessed: usize,
    pub read_coordinates: Vec<usize>,
    pub transmitted: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTrace {
    pub node: usize,
    pub helpers: Vec<HelperTrace>,
    pub recovered: Vec<u32>,
    pub original: Vec<u32>,
    pub matches: bool,
}

impl RepairTrace {
    pub fn downloaded(&self) -> usize {
        self.helpers.iter().map(|h| h.downloaded).sum()
    }

    pub fn accessed(&self) -> usize {
        self.helpers.iter().map(|h| h.accessed).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("failed node: {}\n", self.node);
        for h in &self.helpers {
            out.push_str(&format!(
                "helper {}: downloaded={} accessed={} read={:?} sent={:?}\n",
                h.helper, h.downloaded, h.accessed, h.read_coordinates, h.transmitted
            ));
        }
        out.push_str(&format!("total downloaded: {}\n", self.downloaded()));
        out.push_str(&format!("total accessed: {}\n", self.accessed()));
        out.push_str(&format!("recovered: {:?}\n", self.recovered));
        out.push_str(&format!("match: {}\n", self.matches));
        out
    }
}

/// Runs the repair of `witness.node` with the failed block hidden.
pub fn erase_and_repair(code: &ArrayCode, cw: &Codeword, witness: &RepairWitness) -> Result<RepairTrace> {
    let f = code.field();
    let i = witness.node;
    if cw.blocks.len() != code.n() || cw.blocks.iter().any(|b| b.len() != code.ell()) {
        return Err(Error::Dimension("codeword shape does not match the code".into()));
    }
    let m = &witness.matrix;
    let own = m.mul(f, code.block(i))?;
    let inv = own
        .inverse(f)
        .ok_or_else(|| Error::InvalidWitness(format!("M·H_{i} is singular")))?;
    let mut helpers = Vec::with_capacity(code.n() - 1);
    let mut acc = vec![0u32; code.ell()];
    for j in (0..code.n()).filter(|&j| j != i) {
        let a = m.mul(f, code.block(j))?;
        let read = a.nonzero_cols();
        let mut masked = vec![0u32; code.ell()];
        for &c in &read {
            masked[c] = cw.blocks[j][c];
        }
        let sent = a.mul_vec(f, &masked)?;
        for (x, &y) in acc.iter_mut().zip(&sent) {
            *x = f.add(*x, y);
        }
        helpers.push(HelperTrace {
            helper: j,
            downloaded: a.rank(f),
            accessed: read.len(),
            read_coordinates: read,
            transmitted: sent,
        });
    }
    let recovered: Vec<u32> = inv.mul_vec(f, &acc)?.into_iter().map(|x| f.neg(x)).collect();
    let original = cw.blocks[i].clone();
    let matches = recovered == original;
    Ok(RepairTrace { node: i, helpers, recovered, original, matches })
}

/// Whether adding `delta` to an accessed coordinate of a helper is visible in
/// the recovered block or the parity residual.
pub fn tamper_is_detected(
    code: &ArrayCode,
    cw: &Codeword,
    witness: &RepairWitness,
    helper: usize,
    coordinate: usize,
    delta: u32,
) -> Result<bool> {
    let f = code.field();
    if helper == witness.node || helper >= code.n() || coordinate >= code.ell() || delta == 0 {
        return Err(Error::InvalidParameters("tamper target must be a helper coordinate with nonzero delta".into()));
    }
    let clean = erase_and_repair(code, cw, witness)?;
    let mut bad = cw.clone();
    bad.blocks[helper][coordinate] = f.add(bad.blocks[helper][coordinate], delta);
    let trace = erase_and_repair(code, &bad, witness)?;
    let mut rebuilt = bad;
    rebuilt.blocks[witness.node] = trace.recovered.clone();
    Ok(trace.recovered != clean.recovered || !code.is_codeword(&rebuilt)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub node: usize,
    pub trials: usize,
    pub exact: usize,
    pub downloaded: usize,
    pub accessed: usize,
    pub analytic_bandwidth: usize,
    pub analytic_io: usize,
    pub counters_match: bool,
}

impl SimulationSummary {
    pub fn passed(&self) -> bool {
        self.exact == self.trials && self.counters_match
    }

    pub fn to_text(&self) -> String {
        format!(
            "node: {}\ntrials: {}\nexact: {}\ndownloaded: {}\naccessed: {}\nanalytic_bandwidth: {}\nanalytic_io: {}\ncounters_match: {}\n",
            self.node,
            self.trials,
            self.exact,
            self.downloaded,
            self.accessed,
            self.analytic_bandwidth,
            self.analytic_io,
            self.counters_match
        )
    }
}

/// `trials` repairs on codewords seeded `seed, seed+1, …`.
pub fn simulate(code: &ArrayCode, witness: &RepairWitness, trials: usize, seed: u64) -> Result<SimulationSummary> {
    let bw = bw_of_scheme(code, witness)?;
    let io = io_of_scheme(code, witness)?;
    let mut exact = 0;
    let mut counters_match = true;
    let (mut downloaded, mut accessed) = (bw, io);
    for t in 0..trials {
        let cw = sample_codeword(code, seed.wrapping_add(t as u64))?;
        let trace = erase_and_repair(code, &cw, witness)?;
        if trace.matches {
            exact += 1;
        }
        downloaded = trace.downloaded();
        accessed = trace.accessed();
        counters_match &= downloaded == bw && accessed == io;
    }
    Ok(SimulationSummary {
        node: witness.node,
        trials,
        exact,
        downloaded,
        accessed,
        analytic_bandwidth: bw,
        analytic_io: io,
        counters_match,
    })
}
