//! Finite fields GF(p^m) and field extensions GF(q^ℓ) / GF(q).
//!
//! Elements are plain `u32` values. An element `a` of GF(p^m) stands for the
//! polynomial `c_0 + c_1 x + … + c_{m-1} x^{m-1}` whose coefficients are the
//! base-`p` digits of `a` (least significant digit first), reduced modulo a
//! fixed monic irreducible polynomial.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the order of a single field.
pub const DEFAULT_FIELD_CAP: u128 = 1 << 16;

/// Default cap on the number of vectors of an ambient space GF(q)^d.
pub const DEFAULT_AMBIENT_CAP: u128 = 1 << 24;

const ADD_TABLE_LIMIT: u32 = 256;

/// Serializable description of a field: characteristic, degree and modulus
/// coefficients listed low-to-high (the leading 1 included).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

/// Arithmetic context for GF(p^m).
#[derive(Clone)]
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u32>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^m` with `p` prime, if possible.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

// Polynomials over GF(p) as coefficient vectors, low-to-high.

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    debug_assert_eq!(b[db], 1);
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        for (i, &c) in b.iter().enumerate() {
            let sub = (lead as u64 * c as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn monic_from_index(index: u64, degree: u32, p: u32) -> Vec<u32> {
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut rest = index;
    for _ in 0..degree {
        coeffs.push((rest % p as u64) as u32);
        rest /= p as u64;
    }
    coeffs.push(1);
    coeffs
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() as u32 - 1;
    for d in 1..=deg / 2 {
        for index in 0..(p as u64).pow(d) {
            let divisor = monic_from_index(index, d, p);
            if poly_rem(modulus, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The irreducible monic polynomial of degree `m` over GF(p) whose lower
/// coefficients, read as base-`p` digits, form the smallest integer.
pub fn default_modulus(p: u32, m: u32) -> Vec<u32> {
    if m == 1 {
        return vec![0, 1];
    }
    (0..(p as u64).pow(m))
        .map(|index| monic_from_index(index, m, p))
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial of every degree exists")
}

impl Field {
    /// GF(p^m) with the given modulus or the default one, under the default size cap.
    pub fn new(p: u32, m: u32, modulus: Option<Vec<u32>>) -> Result<Self> {
        Self::with_cap(p, m, modulus, DEFAULT_FIELD_CAP)
    }

    pub fn with_cap(p: u32, m: u32, modulus: Option<Vec<u32>>, cap: u128) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidParameters("extension degree must be at least 1".into()));
        }
        let size = (p as u128).checked_pow(m).unwrap_or(u128::MAX);
        if size > cap || size > u32::MAX as u128 {
            return Err(Error::TooLarge { size, cap });
        }
        let modulus = match modulus {
            Some(poly) => {
                if poly.len() != m as usize + 1 || poly[m as usize] != 1 || poly.iter().any(|&c| c >= p) {
                    return Err(Error::BadModulus { degree: m, p });
                }
                if !is_irreducible(&poly, p) {
                    return Err(Error::ReducibleModulus(poly));
                }
                poly
            }
            None => default_modulus(p, m),
        };
        let q = size as u32;
        let mut field = Field {
            p,
            m,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            neg: Vec::new(),
            add: Vec::new(),
        };
        field.neg = (0..q).map(|a| field.digitwise(a, 0, |x, _| (p - x) % p)).collect();
        if q <= ADD_TABLE_LIMIT {
            let mut table = vec![0; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = field.digitwise(a, b, |x, y| (x + y) % p);
                }
            }
            field.add = table;
        }
        field.build_log_tables();
        Ok(field)
    }

    /// The prime field GF(p).
    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1, None)
    }

    /// GF(q) with the default modulus, for a prime power `q`.
    pub fn of_order(q: u32) -> Result<Self> {
        let (p, m) = prime_power(q)
            .ok_or_else(|| Error::InvalidParameters(format!("{q} is not a prime power")))?;
        Self::new(p, m, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        Self::new(spec.p, spec.m, Some(spec.modulus.clone()))
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.p, m: self.m, modulus: self.modulus.clone() }
    }

    fn digitwise(&self, a: u32, b: u32, op: impl Fn(u32, u32) -> u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let (mut out, mut scale) = (0u32, 1u32);
        for _ in 0..self.m {
            out += op(a % self.p, b % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale = scale.wrapping_mul(self.p);
        }
        out
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let da = self.to_poly(a);
        let db = self.to_poly(b);
        let mut prod = vec![0u32; da.len() + db.len() - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        self.from_poly(&poly_rem(&prod, &self.modulus, self.p))
    }

    fn build_log_tables(&mut self) {
        let order = self.q - 1;
        let generator = (1..self.q)
            .find(|&g| {
                let mut x = 1u32;
                for k in 1..=order {
                    x = self.mul_slow(x, g);
                    if x == 1 {
                        return k == order;
                    }
                }
                false
            })
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for k in 0..order {
            exp[k as usize] = x;
            exp[(k + order) as usize] = x;
            log[x as usize] = k;
            x = self.mul_slow(x, generator);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field order p^m.
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.q
    }

    pub fn check(&self, a: u32) -> Result<u32> {
        if a < self.q {
            Ok(a)
        } else {
            Err(Error::ElementOutOfRange { value: a, q: self.q })
        }
    }

    /// Base-`p` digits of `a`, i.e. its polynomial coefficients, trimmed.
    pub fn to_poly(&self, a: u32) -> Vec<u32> {
        let mut digits = Vec::with_capacity(self.m as usize);
        let mut rest = a;
        for _ in 0..self.m {
            digits.push(rest % self.p);
            rest /= self.p;
        }
        poly_trim(&mut digits);
        if digits.is_empty() {
            digits.push(0);
        }
        digits
    }

    pub fn from_poly(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c % self.p)
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.add.is_empty() {
            self.digitwise(a, b, |x, y| (x + y) % self.p)
        } else {
            self.add[(a * self.q + b) as usize]
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            let order = self.q - 1;
            Some(self.exp[((order - self.log[a as usize]) % order) as usize])
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.q - 1) as u64;
        let k = (self.log[a as usize] as u64 % order) * (e % order) % order;
        self.exp[k as usize]
    }

    /// The element `x` of the polynomial representation (a root of the modulus).
    pub fn generator_x(&self) -> u32 {
        if self.m == 1 {
            self.from_poly(&[self.p - self.modulus[0] % self.p])
        } else {
            self.p
        }
    }

    /// Evaluates a polynomial whose coefficients are elements of this field.
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

/// GF(q^ℓ) viewed as an ℓ-dimensional vector space over GF(q), with the
/// power basis `1, x, …, x^{ℓ-1}` of the top field's polynomial variable.
#[derive(Clone, Debug)]
pub struct Extension {
    base: Field,
    top: Field,
    ell: u32,
    embed: Vec<u32>,
    restrict: Vec<Option<u32>>,
    coords: Vec<Vec<u32>>,
    from_coords: Vec<u32>,
}

impl Extension {
    /// Builds GF(q^ℓ) over `base`, using `top_modulus` (degree m·ℓ over GF(p)) or the default.
    pub fn new(base: Field, ell: u32, top_modulus: Option<Vec<u32>>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameters("extension degree must be at least 1".into()));
        }
        let top = Field::new(base.p(), base.m() * ell, top_modulus)?;
        let q = base.q();
        // Subfield embedding: send the base variable to the smallest root of the base modulus.
        let base_mod = base.modulus();
        let root = top
            .elements()
            .find(|&g| top.eval(base_mod, g) == 0)
            .ok_or_else(|| Error::Inconsistent("base modulus has no root in the top field".into()))?;
        let embed: Vec<u32> = base
            .elements()
            .map(|a| {
                let digits = base.to_poly(a);
                top.eval(&digits, root)
            })
            .collect();
        let mut restrict = vec![None; top.q() as usize];
        for (a, &img) in embed.iter().enumerate() {
            if restrict[img as usize].is_some() {
                return Err(Error::Inconsistent("subfield embedding is not injective".into()));
            }
            restrict[img as usize] = Some(a as u32);
        }
        if q <= ADD_TABLE_LIMIT {
            for a in base.elements() {
                for b in base.elements() {
                    if embed[base.mul(a, b) as usize] != top.mul(embed[a as usize], embed[b as usize])
                        || embed[base.add(a, b) as usize] != top.add(embed[a as usize], embed[b as usize])
                    {
                        return Err(Error::Inconsistent("subfield embedding is not a homomorphism".into()));
                    }
                }
            }
        }
        let theta = top.generator_x();
        let powers: Vec<u32> = (0..ell).map(|i| top.pow(theta, i as u64)).collect();
        let top_q = top.q() as usize;
        let mut coords = vec![Vec::new(); top_q];
        let mut from_coords = vec![0u32; top_q];
        for (index, slot) in from_coords.iter_mut().enumerate() {
            let mut c = Vec::with_capacity(ell as usize);
            let mut rest = index as u32;
            for _ in 0..ell {
                c.push(rest % q);
                rest /= q;
            }
            let value = c
                .iter()
                .zip(&powers)
                .fold(0, |acc, (&ci, &pw)| top.add(acc, top.mul(embed[ci as usize], pw)));
            if !coords[value as usize].is_empty() {
                return Err(Error::Inconsistent("power basis is not a basis".into()));
            }
            coords[value as usize] = c;
            *slot = value;
        }
        Ok(Extension { base, top, ell, embed, restrict, coords, from_coords })
    }

    /// GF(q^ℓ) over GF(q) with default moduli throughout.
    pub fn standard(q: u32, ell: u32) -> Result<Self> {
        Self::new(Field::of_order(q)?, ell, None)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn top(&self) -> &Field {
        &self.top
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// Image of a base-field element inside the top field.
    pub fn lift(&self, a: u32) -> u32 {
        self.embed[a as usize]
    }

    /// Preimage of a top-field element lying in the subfield GF(q).
    pub fn lower(&self, a: u32) -> Option<u32> {
        self.restrict.get(a as usize).copied().flatten()
    }

    /// GF(q)-coordinates of `a` in the power basis.
    pub fn coords(&self, a: u32) -> Result<&[u32]> {
        self.top.check(a)?;
        Ok(&self.coords[a as usize])
    }

    pub fn from_coords(&self, c: &[u32]) -> Result<u32> {
        if c.len() != self.ell as usize {
            return Err(Error::Dimension(format!("expected {} coordinates, got {}", self.ell, c.len())));
        }
        let q = self.base.q();
        let mut index = 0usize;
        for &ci in c.iter().rev() {
            self.base.check(ci)?;
            index = index * q as usize + ci as usize;
        }
        Ok(self.from_coords[index])
    }

    /// `a ↦ a^q`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.top.pow(a, self.base.q() as u64)
    }

    /// The norm `∏_{i<ℓ} a^{q^i}`, returned as a base-field element.
    pub fn norm(&self, a: u32) -> Result<u32> {
        self.top.check(a)?;
        let mut acc = 1u32;
        let mut conj = a;
        for _ in 0..self.ell {
            acc = self.top.mul(acc, conj);
            conj = self.frobenius(conj);
        }
        self.lower(acc)
            .ok_or_else(|| Error::Inconsistent(format!("norm of {a} left the base field")))
    }

    /// Coordinates of `(a, b) ∈ GF(q^ℓ)²` as a vector of GF(q)^{2ℓ}.
    pub fn embed_pair(&self, a: u32, b: u32) -> Result<Vec<u32>> {
        let mut v = self.coords(a)?.to_vec();
        v.extend_from_slice(self.coords(b)?);
        Ok(v)
    }

    pub fn unembed_pair(&self, v: &[u32]) -> Result<(u32, u32)> {
        let ell = self.ell as usize;
        if v.len() != 2 * ell {
            return Err(Error::Dimension(format!("expected {} coordinates, got {}", 2 * ell, v.len())));
        }
        Ok((self.from_coords(&v[..ell])?, self.from_coords(&v[ell..])?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli_match_fixed_polynomials() {
        assert_eq!(default_modulus(3, 2), vec![1, 0, 1]);
        assert_eq!(default_modulus(2, 4), vec![1, 1, 0, 0, 1]);
        assert_eq!(default_modulus(2, 2), vec![1, 1, 1]);
        assert_eq!(Field::prime(5).unwrap().modulus(), &[0, 1]);
    }

    #[test]
    fn gf9_omega_squares_to_minus_one() {
        let f = Field::new(3, 2, Some(vec![1, 0, 1])).unwrap();
        let omega = 3;
        assert_eq!(f.mul(omega, omega), f.neg(1));
    }

    #[test]
    fn gf16_alpha_relation() {
        let f = Field::new(2, 4, Some(vec![1, 1, 0, 0, 1])).unwrap();
        let alpha = 2;
        let a4 = f.pow(alpha, 4);
        assert_eq!(f.add(f.add(a4, alpha), 1), 0);
        // α generates the whole multiplicative group.
        assert_eq!((1..16).map(|k| f.pow(alpha, k)).filter(|&x| x == 1).count(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Field::new(4, 1, None), Err(Error::NotPrime(4))));
        assert!(matches!(Field::new(2, 2, Some(vec![1, 0, 1])), Err(Error::ReducibleModulus(_))));
        assert!(matches!(Field::new(2, 2, Some(vec![1, 1, 2])), Err(Error::BadModulus { .. })));
        assert!(matches!(Field::new(2, 20, None), Err(Error::TooLarge { .. })));
        assert!(Field::of_order(6).is_err());
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2u32, 3, 4, 5, 7, 8, 9, 16] {
            let f = Field::of_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                    assert_eq!(f.add(a, b), f.add(b, a));
                    for c in f.elements() {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn norm_is_multiplicative_and_surjective() {
        for (q, ell) in [(2, 2), (3, 2), (4, 2), (2, 3), (5, 2), (2, 4), (3, 3)] {
            let ext = Extension::standard(q, ell).unwrap();
            let top = ext.top();
            assert_eq!(ext.norm(1).unwrap(), 1);
            if top.q() <= 256 {
                for a in top.elements() {
                    for b in top.elements() {
                        let lhs = ext.norm(top.mul(a, b)).unwrap();
                        let rhs = ext.base().mul(ext.norm(a).unwrap(), ext.norm(b).unwrap());
                        assert_eq!(lhs, rhs);
                    }
                }
            }
            let mut image: Vec<u32> = (1..top.q()).map(|a| ext.norm(a).unwrap()).collect();
            image.sort_unstable();
            image.dedup();
            assert_eq!(image, (1..q).collect::<Vec<_>>());
        }
    }

    #[test]
    fn norm_kernel_sizes() {
        let count = |q, ell| {
            let ext = Extension::standard(q, ell).unwrap();
            (1..ext.top().q()).filter(|&a| ext.norm(a).unwrap() == 1).count()
        };
        assert_eq!(count(3, 2), 4);
        assert_eq!(count(4, 2), 5);
    }

    #[test]
    fn embed_pair_examples() {
        let ext = Extension::standard(3, 2).unwrap();
        assert_eq!(ext.embed_pair(0, 0).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(ext.embed_pair(1, 3).unwrap(), vec![1, 0, 0, 1]);
        assert!(ext.embed_pair(9, 0).is_err());
    }

    #[test]
    fn gf4_sits_inside_gf16_as_beta_powers() {
        let ext = Extension::standard(4, 2).unwrap();
        let top = ext.top();
        let beta = top.pow(2, 5);
        let mut sub: Vec<u32> = ext.base().elements().map(|a| ext.lift(a)).collect();
        sub.sort_unstable();
        let mut expected = vec![0, 1, beta, top.mul(beta, beta)];
        expected.sort_unstable();
        assert_eq!(sub, expected);
    }

    #[test]
    fn embed_is_linear_over_base() {
        let ext = Extension::standard(4, 2).unwrap();
        let (base, top) = (ext.base(), ext.top());
        for a in top.elements() {
            for b in top.elements() {
                let va = ext.coords(a).unwrap().to_vec();
                let vb = ext.coords(b).unwrap().to_vec();
                let sum: Vec<u32> = va.iter().zip(&vb).map(|(&x, &y)| base.add(x, y)).collect();
                assert_eq!(ext.coords(top.add(a, b)).unwrap(), sum.as_slice());
            }
            for c in base.elements() {
                let scaled: Vec<u32> = ext.coords(a).unwrap().iter().map(|&x| base.mul(c, x)).collect();
                assert_eq!(ext.coords(top.mul(ext.lift(c), a)).unwrap(), scaled.as_slice());
            }
        }
    }
}
