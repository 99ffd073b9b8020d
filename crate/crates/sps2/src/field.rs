//! Arithmetic in F_q and its extensions F_{q^k}.
//!
//! A [`Field`] carries the prime q, the extension degree k and a monic
//! irreducible modulus of degree k.  A [`Scalar`] is a coefficient vector of
//! length k over F_q; base-field elements are embedded as degree-0 vectors,
//! so circuit data over F_q and identity-test points over F_{q^k} share one
//! representation.  Inversion uses the extended Euclidean algorithm on the
//! modulus so it works uniformly for every k ≥ 1.

use crate::{Error, Result};
use rand::Rng;

/// An element of F_{q^k}: coefficients of 1, x, …, x^{k-1}, reduced mod q.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Scalar(pub(crate) Vec<u64>);

impl Scalar {
    /// Raw coefficient access (length k, low degree first).
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }
}

/// Field parameters: F_{q^k} = F_q[x]/(modulus).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    q: u64,
    k: usize,
    /// Coefficients of the monic modulus below the leading x^k term.
    modulus: Vec<u64>,
}

// ---------------------------------------------------------------------------
// Base-field helpers (u64 arithmetic mod q).
// ---------------------------------------------------------------------------

pub(crate) fn addq(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

pub(crate) fn subq(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

pub(crate) fn mulq(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub(crate) fn negq(a: u64, q: u64) -> u64 {
    if a == 0 {
        0
    } else {
        q - a
    }
}

pub(crate) fn powq(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1 % q;
    while e > 0 {
        if e & 1 == 1 {
            r = mulq(r, a, q);
        }
        a = mulq(a, a, q);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero element of F_q (q prime) by Fermat.
pub(crate) fn invq(a: u64, q: u64) -> u64 {
    debug_assert!(a % q != 0);
    powq(a % q, q - 2, q)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Univariate polynomials over F_q, used only to build/validate the modulus.
// ---------------------------------------------------------------------------

fn bp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn bp_rem(mut a: Vec<u64>, b: &[u64], q: u64) -> Vec<u64> {
    debug_assert!(!b.is_empty() && *b.last().unwrap() != 0);
    let db = b.len() - 1;
    let lead_inv = invq(b[db], q);
    while a.len() > db {
        let c = mulq(*a.last().unwrap(), lead_inv, q);
        let shift = a.len() - 1 - db;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                a[shift + i] = subq(a[shift + i], mulq(c, bi, q), q);
            }
        }
        a.pop();
        bp_trim(&mut a);
    }
    a
}

fn bp_mulmod(a: &[u64], b: &[u64], m: &[u64], q: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut t = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            t[i + j] = addq(t[i + j], mulq(ai, bj, q), q);
        }
    }
    bp_trim(&mut t);
    bp_rem(t, m, q)
}

fn bp_powmod(base: &[u64], mut e: u64, m: &[u64], q: u64) -> Vec<u64> {
    let mut r = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = bp_mulmod(&r, &b, m, q);
        }
        b = bp_mulmod(&b, &b, m, q);
        e >>= 1;
    }
    r
}

fn bp_gcd(mut a: Vec<u64>, mut b: Vec<u64>, q: u64) -> Vec<u64> {
    bp_trim(&mut a);
    bp_trim(&mut b);
    while !b.is_empty() {
        let r = bp_rem(a, &b, q);
        a = b;
        b = r;
    }
    // Normalize monic.
    if let Some(&lead) = a.last() {
        let li = invq(lead, q);
        for c in a.iter_mut() {
            *c = mulq(*c, li, q);
        }
    }
    a
}

/// x^{q^i} mod m, computed by iterated q-th powers.
fn frobenius_power(i: usize, m: &[u64], q: u64) -> Vec<u64> {
    let mut r = vec![0u64, 1]; // x
    for _ in 0..i {
        r = bp_powmod(&r, q, m, q);
    }
    r
}

/// Distinct-degree irreducibility test: gcd(x^{q^i} − x, m) = 1 for i < k and
/// x^{q^k} ≡ x (mod m).
fn is_irreducible(m_low: &[u64], q: u64) -> bool {
    let k = m_low.len();
    let mut m = m_low.to_vec();
    m.push(1); // monic leading term
    let x = vec![0u64, 1];
    for i in 1..k {
        let mut fi = frobenius_power(i, &m, q);
        // fi − x
        while fi.len() < 2 {
            fi.push(0);
        }
        fi[1] = subq(fi[1], 1, q);
        bp_trim(&mut fi);
        let g = bp_gcd(fi, m.clone(), q);
        if g.len() != 1 {
            return false;
        }
    }
    frobenius_power(k, &m, q) == x
}

// ---------------------------------------------------------------------------
// Field construction and arithmetic.
// ---------------------------------------------------------------------------

impl Field {
    /// The base field F_q (k = 1, modulus x − 0 by convention).
    pub fn base(q: u64) -> Result<Field> {
        if !is_prime(q) {
            return Err(Error::Precondition(format!("{q} is not prime")));
        }
        Ok(Field {
            q,
            k: 1,
            modulus: vec![0],
        })
    }

    /// Build F_{q^k} with a random monic irreducible modulus of degree k.
    pub fn extension(q: u64, k: usize, rng: &mut impl Rng) -> Result<Field> {
        if !is_prime(q) {
            return Err(Error::Precondition(format!("{q} is not prime")));
        }
        if k == 0 {
            return Err(Error::Precondition("extension degree must be ≥ 1".into()));
        }
        if k == 1 {
            return Field::base(q);
        }
        loop {
            let m: Vec<u64> = (0..k).map(|_| rng.gen_range(0..q)).collect();
            if is_irreducible(&m, q) {
                return Ok(Field { q, k, modulus: m });
            }
        }
    }

    /// Reconstruct a field from stored parameters, revalidating them.
    pub fn from_parts(q: u64, k: usize, modulus: Vec<u64>) -> Result<Field> {
        if !is_prime(q) {
            return Err(Error::Precondition(format!("{q} is not prime")));
        }
        if modulus.len() != k || k == 0 {
            return Err(Error::Precondition("modulus degree must equal k".into()));
        }
        if modulus.iter().any(|&c| c >= q) {
            return Err(Error::Precondition("modulus coefficients not reduced".into()));
        }
        if k > 1 && !is_irreducible(&modulus, q) {
            return Err(Error::Precondition("modulus is reducible".into()));
        }
        Ok(Field { q, k, modulus })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// |F_{q^k}| = q^k.  Panics on overflow; desk-scale fields fit easily.
    pub fn size(&self) -> u64 {
        let mut s: u64 = 1;
        for _ in 0..self.k {
            s = s.checked_mul(self.q).expect("field size overflows u64");
        }
        s
    }

    pub fn zero(&self) -> Scalar {
        Scalar(vec![0; self.k])
    }

    pub fn one(&self) -> Scalar {
        self.embed(1)
    }

    /// Embed a base-field element.
    pub fn embed(&self, a: u64) -> Scalar {
        let mut c = vec![0; self.k];
        c[0] = a % self.q;
        Scalar(c)
    }

    /// Build a scalar from explicit coefficients (length must be k).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<Scalar> {
        if coeffs.len() != self.k {
            return Err(Error::ArityMismatch(format!(
                "scalar has {} coefficients, field degree is {}",
                coeffs.len(),
                self.k
            )));
        }
        Ok(Scalar(coeffs.iter().map(|&c| c % self.q).collect()))
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    /// Base-field membership: all higher coefficients zero.
    pub fn as_base(&self, a: &Scalar) -> Option<u64> {
        if a.0[1..].iter().all(|&c| c == 0) {
            Some(a.0[0])
        } else {
            None
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| addq(x, y, self.q))
                .collect(),
        )
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| subq(x, y, self.q))
                .collect(),
        )
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        Scalar(a.0.iter().map(|&x| negq(x, self.q)).collect())
    }

    /// Multiply by a base-field constant.
    pub fn scale_base(&self, a: &Scalar, c: u64) -> Scalar {
        Scalar(a.0.iter().map(|&x| mulq(x, c, self.q)).collect())
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        let k = self.k;
        let q = self.q;
        if k == 1 {
            return Scalar(vec![mulq(a.0[0], b.0[0], q)]);
        }
        let mut t = vec![0u64; 2 * k - 1];
        for (i, &ai) in a.0.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.0.iter().enumerate() {
                t[i + j] = addq(t[i + j], mulq(ai, bj, q), q);
            }
        }
        // Reduce x^{k+j} := −Σ modulus[i]·x^{i+j}.
        for j in (k..2 * k - 1).rev() {
            let c = t[j];
            if c == 0 {
                continue;
            }
            t[j] = 0;
            for (i, &mi) in self.modulus.iter().enumerate() {
                if mi != 0 {
                    t[j - k + i] = subq(t[j - k + i], mulq(c, mi, q), q);
                }
            }
        }
        t.truncate(k);
        Scalar(t)
    }

    /// Inverse of a nonzero element, via extended Euclid on the modulus.
    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        let q = self.q;
        if self.k == 1 {
            return Ok(Scalar(vec![invq(a.0[0], q)]));
        }
        // Extended Euclid over F_q[x] on (a, modulus).
        let mut m = self.modulus.clone();
        m.push(1);
        let mut r0 = m;
        let mut r1 = a.0.clone();
        bp_trim(&mut r1);
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            // r0 = qt·r1 + r2
            let db = r1.len() - 1;
            let lead_inv = invq(r1[db], q);
            let mut rem = r0.clone();
            let mut quot = vec![0u64; rem.len().saturating_sub(db)];
            while rem.len() > db {
                let c = mulq(*rem.last().unwrap(), lead_inv, q);
                let shift = rem.len() - 1 - db;
                quot[shift] = c;
                if c != 0 {
                    for (i, &bi) in r1.iter().enumerate() {
                        rem[shift + i] = subq(rem[shift + i], mulq(c, bi, q), q);
                    }
                }
                rem.pop();
                bp_trim(&mut rem);
            }
            bp_trim(&mut quot);
            // s2 = s0 − quot·s1
            let mut s2 = s0.clone();
            if !quot.is_empty() && !s1.is_empty() {
                let prod_len = quot.len() + s1.len() - 1;
                if s2.len() < prod_len {
                    s2.resize(prod_len, 0);
                }
                for (i, &qi) in quot.iter().enumerate() {
                    if qi == 0 {
                        continue;
                    }
                    for (j, &sj) in s1.iter().enumerate() {
                        s2[i + j] = subq(s2[i + j], mulq(qi, sj, q), q);
                    }
                }
            }
            bp_trim(&mut s2);
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        // r0 = gcd (a nonzero constant since modulus is irreducible).
        debug_assert_eq!(r0.len(), 1);
        let gi = invq(r0[0], q);
        let mut out = vec![0u64; self.k];
        for (i, &c) in s0.iter().enumerate() {
            out[i] = mulq(c, gi, q);
        }
        Ok(Scalar(out))
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// Uniform element of F_{q^k}.
    pub fn random(&self, rng: &mut impl Rng) -> Scalar {
        Scalar((0..self.k).map(|_| rng.gen_range(0..self.q)).collect())
    }

    pub fn random_nonzero(&self, rng: &mut impl Rng) -> Scalar {
        loop {
            let a = self.random(rng);
            if !self.is_zero(&a) {
                return a;
            }
        }
    }

    /// Uniform base-field element, embedded.
    pub fn random_base(&self, rng: &mut impl Rng) -> Scalar {
        self.embed(rng.gen_range(0..self.q))
    }
}

/// Smallest k with q^k ≥ 2^bits, for sizing identity-test sample spaces.
pub fn extension_degree_for_bits(q: u64, bits: u32) -> usize {
    let target = 1u128 << bits;
    let mut k = 1usize;
    let mut s = q as u128;
    while s < target {
        s *= q as u128;
        k += 1;
    }
    k
}
