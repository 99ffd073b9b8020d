//! Univariate polynomials over F_{q^k}: exact arithmetic, gcd, modular
//! exponentiation and root finding.
//!
//! Root finding first isolates the split part via gcd(x^{q^k} − x, g), then
//! applies probabilistic equal-degree splitting — the (q^k−1)/2 power map for
//! odd q and trace-map splitting in characteristic 2.  Only degree-1 factors
//! are ever needed by the callers.

use crate::field::{Field, Scalar};
use crate::{Error, Result};
use rand::Rng;

/// Coefficient list, low degree first, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    pub c: Vec<Scalar>,
}

impl UniPoly {
    pub fn zero() -> UniPoly {
        UniPoly { c: vec![] }
    }

    pub fn from_coeffs(field: &Field, mut c: Vec<Scalar>) -> UniPoly {
        while c.last().map(|x| field.is_zero(x)).unwrap_or(false) {
            c.pop();
        }
        UniPoly { c }
    }

    pub fn constant(field: &Field, a: Scalar) -> UniPoly {
        UniPoly::from_coeffs(field, vec![a])
    }

    pub fn x(field: &Field) -> UniPoly {
        UniPoly {
            c: vec![field.zero(), field.one()],
        }
    }

    /// x − a.
    pub fn linear_root(field: &Field, a: &Scalar) -> UniPoly {
        UniPoly {
            c: vec![field.neg(a), field.one()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, field: &Field, a: &Scalar) -> Scalar {
        let mut acc = field.zero();
        for coeff in self.c.iter().rev() {
            acc = field.add(&field.mul(&acc, a), coeff);
        }
        acc
    }

    pub fn add(&self, field: &Field, other: &UniPoly) -> UniPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.c.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.add(&a, &b));
        }
        UniPoly::from_coeffs(field, out)
    }

    pub fn sub(&self, field: &Field, other: &UniPoly) -> UniPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i).cloned().unwrap_or_else(|| field.zero());
            let b = other.c.get(i).cloned().unwrap_or_else(|| field.zero());
            out.push(field.sub(&a, &b));
        }
        UniPoly::from_coeffs(field, out)
    }

    pub fn scale(&self, field: &Field, s: &Scalar) -> UniPoly {
        UniPoly::from_coeffs(field, self.c.iter().map(|x| field.mul(x, s)).collect())
    }

    pub fn mul(&self, field: &Field, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![field.zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                out[i + j] = field.add(&out[i + j], &field.mul(a, b));
            }
        }
        UniPoly::from_coeffs(field, out)
    }

    /// Quotient and remainder with remainder degree < divisor degree.
    pub fn divrem(&self, field: &Field, divisor: &UniPoly) -> Result<(UniPoly, UniPoly)> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let db = divisor.deg().unwrap();
        let lead_inv = field.inv(divisor.c.last().unwrap())?;
        let mut rem = self.c.clone();
        let mut quot = vec![field.zero(); self.c.len().saturating_sub(db)];
        while rem.len() > db {
            let c = field.mul(rem.last().unwrap(), &lead_inv);
            let shift = rem.len() - 1 - db;
            if !field.is_zero(&c) {
                quot[shift] = c.clone();
                for (i, b) in divisor.c.iter().enumerate() {
                    rem[shift + i] = field.sub(&rem[shift + i], &field.mul(&c, b));
                }
            }
            rem.pop();
            while rem.last().map(|x| field.is_zero(x)).unwrap_or(false) {
                rem.pop();
            }
        }
        Ok((
            UniPoly::from_coeffs(field, quot),
            UniPoly::from_coeffs(field, rem),
        ))
    }

    pub fn rem(&self, field: &Field, divisor: &UniPoly) -> Result<UniPoly> {
        Ok(self.divrem(field, divisor)?.1)
    }

    /// Monic multiple (scaled by inverse of leading coefficient).
    pub fn monic(&self, field: &Field) -> UniPoly {
        match self.c.last() {
            None => UniPoly::zero(),
            Some(lead) => self.scale(field, &field.inv(lead).expect("nonzero lead")),
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, field: &Field, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(field, &b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic(field)
        }
    }

    /// self^e mod m.
    pub fn powmod(&self, field: &Field, mut e: u64, m: &UniPoly) -> Result<UniPoly> {
        let mut r = UniPoly::constant(field, field.one()).rem(field, m)?;
        let mut b = self.rem(field, m)?;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(field, &b).rem(field, m)?;
            }
            b = b.mul(field, &b).rem(field, m)?;
            e >>= 1;
        }
        Ok(r)
    }

    /// ∏ (x − a_i).
    pub fn from_roots(field: &Field, roots: &[Scalar]) -> UniPoly {
        let mut p = UniPoly::constant(field, field.one());
        for r in roots {
            p = p.mul(field, &UniPoly::linear_root(field, r));
        }
        p
    }
}

/// All distinct roots of a nonzero polynomial in F_{q^k}.
pub fn roots(p: &UniPoly, field: &Field, rng: &mut impl Rng) -> Result<Vec<Scalar>> {
    if p.is_zero() {
        return Err(Error::Precondition("zero polynomial has every root".into()));
    }
    if p.deg() == Some(0) {
        return Ok(vec![]);
    }
    let monic = p.monic(field);
    // Split part: gcd(x^{q^k} − x, p).
    let xq = UniPoly::x(field).powmod(field, field.size(), &monic)?;
    let split = xq.sub(field, &UniPoly::x(field)).gcd(field, &monic);
    let mut out = Vec::new();
    split_linear(&split, field, rng, &mut out)?;
    out.sort();
    Ok(out)
}

/// Equal-degree splitting of a monic squarefree product of linear factors.
fn split_linear(
    g: &UniPoly,
    field: &Field,
    rng: &mut impl Rng,
    out: &mut Vec<Scalar>,
) -> Result<()> {
    match g.deg() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            // x + c0 (monic): root is −c0.
            out.push(field.neg(&g.c[0]));
            return Ok(());
        }
        _ => {}
    }
    for _ in 0..64 {
        let splitter = if field.q() % 2 == 1 {
            // ((x + a)^{(q^k−1)/2} − 1) shares a nontrivial gcd with g whp.
            let a = field.random(rng);
            let shifted = UniPoly::from_coeffs(field, vec![a, field.one()]);
            let h = shifted.powmod(field, (field.size() - 1) / 2, g)?;
            h.sub(field, &UniPoly::constant(field, field.one()))
        } else {
            // Characteristic 2: trace map T(a·x) = Σ_i (a·x)^{2^i}.
            let a = field.random_nonzero(rng);
            let ax = UniPoly::from_coeffs(field, vec![field.zero(), a]);
            let mut term = ax.rem(field, g)?;
            let mut acc = term.clone();
            for _ in 1..field.k() {
                term = term.mul(field, &term).rem(field, g)?;
                acc = acc.add(field, &term);
            }
            acc
        };
        let d = splitter.gcd(field, g);
        if let Some(dd) = d.deg() {
            if dd > 0 && dd < g.deg().unwrap() {
                let (quot, rem) = g.divrem(field, &d)?;
                debug_assert!(rem.is_zero());
                split_linear(&d, field, rng, out)?;
                split_linear(&quot, field, rng, out)?;
                return Ok(());
            }
        }
    }
    Err(Error::ResampleExhausted(
        "equal-degree splitting failed to split".into(),
    ))
}

/// All common roots in F_{q^k} of a list of polynomials (gcd, then roots).
pub fn uni_gcd_roots(polys: &[UniPoly], field: &Field, rng: &mut impl Rng) -> Result<Vec<Scalar>> {
    let mut g = UniPoly::zero();
    for p in polys {
        if !p.is_zero() {
            g = if g.is_zero() { p.clone() } else { g.gcd(field, p) };
        }
    }
    if g.is_zero() {
        return Err(Error::Precondition(
            "all polynomials are zero: infinite solution set".into(),
        ));
    }
    if g.deg() == Some(0) {
        return Ok(vec![]);
    }
    roots(&g, field, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn upoly(field: &Field, coeffs: &[u64]) -> UniPoly {
        UniPoly::from_coeffs(field, coeffs.iter().map(|&c| field.embed(c)).collect())
    }

    #[test]
    fn roots_of_x2_minus_1_over_f7() {
        let field = Field::base(7).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let p = upoly(&field, &[6, 0, 1]); // x² − 1
        let r = uni_gcd_roots(&[p], &field, &mut rng).unwrap();
        assert_eq!(r, vec![field.embed(1), field.embed(6)]);
    }

    #[test]
    fn forced_common_root() {
        let field = Field::base(7).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let polys = [
            upoly(&field, &[4, 1]),        // x − 3
            upoly(&field, &[4, 1]),        // x − 3
            upoly(&field, &[4, 5, 1]),     // x² − 2x − 3 = (x−3)(x+1)
        ];
        let r = uni_gcd_roots(&polys, &field, &mut rng).unwrap();
        assert_eq!(r, vec![field.embed(3)]);
    }

    #[test]
    fn all_zero_input_rejected() {
        let field = Field::base(5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        assert!(uni_gcd_roots(&[UniPoly::zero()], &field, &mut rng).is_err());
    }

    #[test]
    fn random_poly_lists_match_exhaustive_scan_over_f13() {
        let field = Field::base(13).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..300 {
            let count = rng.gen_range(1..4);
            let polys: Vec<UniPoly> = (0..count)
                .map(|_| {
                    let deg = rng.gen_range(1..6usize);
                    let mut c: Vec<Scalar> = (0..=deg).map(|_| field.random(&mut rng)).collect();
                    if field.is_zero(c.last().unwrap()) {
                        *c.last_mut().unwrap() = field.one();
                    }
                    UniPoly::from_coeffs(&field, c)
                })
                .collect();
            let got = uni_gcd_roots(&polys, &field, &mut rng).unwrap();
            let want: Vec<Scalar> = (0..13)
                .map(|a| field.embed(a))
                .filter(|a| polys.iter().all(|p| field.is_zero(&p.eval(&field, a))))
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn split_products_recover_their_roots() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let field = Field::extension(13, 6, &mut rng).unwrap();
        for _ in 0..25 {
            let count = rng.gen_range(1..6usize);
            let mut planted: Vec<Scalar> = Vec::new();
            while planted.len() < count {
                let a = field.random(&mut rng);
                if !planted.contains(&a) {
                    planted.push(a);
                }
            }
            let p = UniPoly::from_roots(&field, &planted);
            let mut got = roots(&p, &field, &mut rng).unwrap();
            got.sort();
            planted.sort();
            assert_eq!(got, planted);
        }
    }

    #[test]
    fn roots_in_characteristic_two_extension() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let field = Field::extension(2, 8, &mut rng).unwrap();
        for _ in 0..20 {
            let mut planted: Vec<Scalar> = Vec::new();
            while planted.len() < 4 {
                let a = field.random(&mut rng);
                if !planted.contains(&a) {
                    planted.push(a);
                }
            }
            let p = UniPoly::from_roots(&field, &planted);
            let mut got = roots(&p, &field, &mut rng).unwrap();
            got.sort();
            planted.sort();
            assert_eq!(got, planted);
        }
    }

    #[test]
    fn divrem_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let field = Field::extension(5, 3, &mut rng).unwrap();
        for _ in 0..100 {
            let a = UniPoly::from_coeffs(
                &field,
                (0..8).map(|_| field.random(&mut rng)).collect(),
            );
            let mut bc: Vec<Scalar> = (0..4).map(|_| field.random(&mut rng)).collect();
            *bc.last_mut().unwrap() = field.random_nonzero(&mut rng);
            let b = UniPoly::from_coeffs(&field, bc);
            let (q, r) = a.divrem(&field, &b).unwrap();
            assert_eq!(q.mul(&field, &b).add(&field, &r), a);
            assert!(r.deg().map(|d| d < b.deg().unwrap()).unwrap_or(true));
        }
    }
}
