//! Dense multivariate polynomials over F_{q^k}.
//!
//! The representation is a coefficient table keyed by exponent vectors in
//! graded-lexicographic order (deterministic serialization, leading-term
//! division).  Desk-scale sizes only: the callers stay below ~10 variables
//! and degree ~10, where exactness and simplicity dominate.

use crate::field::{Field, Scalar};
use crate::linalg::LinearForm;
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Exponent vector with graded-lex ordering.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An affine form Σ coeffs[j]·x_j + constant used as a substitution target.
#[derive(Clone, Debug)]
pub struct AffineForm {
    pub coeffs: Vec<Scalar>,
    pub constant: Scalar,
}

impl AffineForm {
    /// The identity substitution x_i ↦ x_i in an out_n-variable space.
    pub fn variable(field: &Field, out_n: usize, i: usize) -> AffineForm {
        let mut coeffs = vec![field.zero(); out_n];
        coeffs[i] = field.one();
        AffineForm {
            coeffs,
            constant: field.zero(),
        }
    }

    pub fn constant(field: &Field, out_n: usize, value: Scalar) -> AffineForm {
        AffineForm {
            coeffs: vec![field.zero(); out_n],
            constant: value,
        }
    }

    /// Lift a base-field linear form, scaled by 1.
    pub fn from_linear(field: &Field, form: &LinearForm) -> AffineForm {
        AffineForm {
            coeffs: form.coeffs.iter().map(|&c| field.embed(c)).collect(),
            constant: field.zero(),
        }
    }
}

/// Dense multivariate polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DensePoly {
    pub n: usize,
    pub terms: BTreeMap<Monomial, Scalar>,
}

impl DensePoly {
    pub fn zero(n: usize) -> DensePoly {
        DensePoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: &Field, n: usize, value: Scalar) -> DensePoly {
        let mut p = DensePoly::zero(n);
        if !field.is_zero(&value) {
            p.terms.insert(Monomial(vec![0; n]), value);
        }
        p
    }

    /// Degree-1 polynomial from a base-field linear form.
    pub fn from_linear(field: &Field, form: &LinearForm) -> DensePoly {
        let n = form.n();
        let mut p = DensePoly::zero(n);
        for (i, &c) in form.coeffs.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0u16; n];
                e[i] = 1;
                p.terms.insert(Monomial(e), field.embed(c));
            }
        }
        p
    }

    /// Degree-≤1 polynomial from an affine form.
    pub fn from_affine(field: &Field, n: usize, form: &AffineForm) -> DensePoly {
        debug_assert_eq!(form.coeffs.len(), n);
        let mut p = DensePoly::zero(n);
        for (i, c) in form.coeffs.iter().enumerate() {
            if !field.is_zero(c) {
                let mut e = vec![0u16; n];
                e[i] = 1;
                p.terms.insert(Monomial(e), c.clone());
            }
        }
        if !field.is_zero(&form.constant) {
            p.terms.insert(Monomial(vec![0; n]), form.constant.clone());
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for constants and for the zero polynomial).
    pub fn deg(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.total_degree());
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    /// Variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        (0..self.n).filter(|&i| used[i]).collect()
    }

    fn insert_add(&mut self, field: &Field, m: Monomial, v: Scalar) {
        if field.is_zero(&v) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = field.add(e.get(), &v);
                if field.is_zero(&s) {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, field: &Field, other: &DensePoly) -> DensePoly {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.insert_add(field, m.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, field: &Field, other: &DensePoly) -> DensePoly {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, v) in &other.terms {
            out.insert_add(field, m.clone(), field.neg(v));
        }
        out
    }

    pub fn scale(&self, field: &Field, s: &Scalar) -> DensePoly {
        let mut out = DensePoly::zero(self.n);
        for (m, v) in &self.terms {
            out.insert_add(field, m.clone(), field.mul(v, s));
        }
        out
    }

    pub fn mul(&self, field: &Field, other: &DensePoly) -> DensePoly {
        debug_assert_eq!(self.n, other.n);
        let mut out = DensePoly::zero(self.n);
        for (ma, va) in &self.terms {
            for (mb, vb) in &other.terms {
                out.insert_add(field, ma.mul(mb), field.mul(va, vb));
            }
        }
        out
    }

    pub fn eval(&self, field: &Field, point: &[Scalar]) -> Scalar {
        debug_assert_eq!(point.len(), self.n);
        // Memoized powers per variable up to the max exponent used.
        let mut maxe = vec![0u16; self.n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                maxe[i] = maxe[i].max(e);
            }
        }
        let powers: Vec<Vec<Scalar>> = (0..self.n)
            .map(|i| {
                let mut p = vec![field.one()];
                for e in 1..=maxe[i] as usize {
                    p.push(field.mul(&p[e - 1], &point[i]));
                }
                p
            })
            .collect();
        let mut acc = field.zero();
        for (m, v) in &self.terms {
            let mut t = v.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = field.mul(&t, &powers[i][e as usize]);
                }
            }
            acc = field.add(&acc, &t);
        }
        acc
    }

    /// Leading (graded-lex greatest) term.
    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient p/d, or a signalled non-divisibility failure.
    ///
    /// A single divisor is a Gröbner basis of the ideal it generates, so the
    /// leading-term division loop leaves remainder 0 exactly when d | p.
    pub fn exact_divide(&self, field: &Field, d: &DensePoly) -> Result<DensePoly> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        debug_assert_eq!(self.n, d.n);
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        let dc_inv = field.inv(&dc)?;
        let mut rem = self.clone();
        let mut quot = DensePoly::zero(self.n);
        while let Some((rm, rc)) = rem.leading() {
            if !dm.divides(rm) {
                return Err(Error::NotDivisible);
            }
            let qm = rm.quotient(&dm);
            let qc = field.mul(rc, &dc_inv);
            // rem -= (qc·qm)·d
            let mut t = DensePoly::zero(self.n);
            t.terms.insert(qm.clone(), qc.clone());
            rem = rem.sub(field, &t.mul(field, d));
            quot.insert_add(field, qm, qc);
        }
        Ok(quot)
    }

    /// Substitute every variable by an affine form over an out_n-variable
    /// space; subs must have length n.
    pub fn substitute_linear(
        &self,
        field: &Field,
        subs: &[AffineForm],
        out_n: usize,
    ) -> Result<DensePoly> {
        if subs.len() != self.n {
            return Err(Error::ArityMismatch(format!(
                "{} substitutions for {} variables",
                subs.len(),
                self.n
            )));
        }
        let mut maxe = vec![0u16; self.n];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                maxe[i] = maxe[i].max(e);
            }
        }
        // Memoized powers of each substitution polynomial.
        let powers: Vec<Vec<DensePoly>> = (0..self.n)
            .map(|i| {
                let base = DensePoly::from_affine(field, out_n, &subs[i]);
                let mut p = vec![DensePoly::constant(field, out_n, field.one())];
                for e in 1..=maxe[i] as usize {
                    p.push(p[e - 1].mul(field, &base));
                }
                p
            })
            .collect();
        let mut out = DensePoly::zero(out_n);
        for (m, v) in &self.terms {
            let mut t = DensePoly::constant(field, out_n, v.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(field, &powers[i][e as usize]);
                }
            }
            out = out.add(field, &t);
        }
        Ok(out)
    }

    /// View as a univariate polynomial in `var`; fails if any other variable
    /// occurs.
    pub fn to_unipoly(&self, field: &Field, var: usize) -> Result<crate::unipoly::UniPoly> {
        let mut coeffs: Vec<Scalar> = Vec::new();
        for (m, v) in &self.terms {
            for (i, &e) in m.0.iter().enumerate() {
                if i != var && e > 0 {
                    return Err(Error::Precondition(format!(
                        "variable {i} occurs; polynomial is not univariate in {var}"
                    )));
                }
            }
            let e = m.0[var] as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, field.zero());
            }
            coeffs[e] = v.clone();
        }
        Ok(crate::unipoly::UniPoly::from_coeffs(field, coeffs))
    }

    /// Coefficients as a univariate polynomial in `var` with DensePoly
    /// coefficients in the remaining variables (exponent of `var` zeroed).
    pub fn coeffs_in_var(&self, field: &Field, var: usize) -> Vec<DensePoly> {
        let maxe = self
            .terms
            .keys()
            .map(|m| m.0[var] as usize)
            .max()
            .unwrap_or(0);
        let mut out = vec![DensePoly::zero(self.n); maxe + 1];
        for (m, v) in &self.terms {
            let e = m.0[var] as usize;
            let mut rest = m.clone();
            rest.0[var] = 0;
            out[e].insert_add(field, rest, v.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_poly(field: &Field, n: usize, deg: usize, rng: &mut impl Rng) -> DensePoly {
        let mut p = DensePoly::zero(n);
        for _ in 0..8 {
            let mut e = vec![0u16; n];
            let mut left = deg;
            for x in e.iter_mut() {
                let take = rng.gen_range(0..=left);
                *x = take as u16;
                left -= take;
            }
            p.insert_add(field, Monomial(e), field.random(rng));
        }
        p
    }

    #[test]
    fn difference_of_squares_over_f7() {
        let field = Field::base(7).unwrap();
        let a = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 1]));
        let b = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 6]));
        let p = a.mul(&field, &b);
        let mut want = DensePoly::zero(2);
        want.terms.insert(Monomial(vec![2, 0]), field.embed(1));
        want.terms.insert(Monomial(vec![0, 2]), field.embed(6));
        assert_eq!(p, want);
    }

    #[test]
    fn additive_identity() {
        let field = Field::base(5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let p = random_poly(&field, 3, 4, &mut rng);
        assert_eq!(p.add(&field, &DensePoly::zero(3)), p);
    }

    #[test]
    fn eval_is_multiplicative() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let field = Field::extension(5, 3, &mut rng).unwrap();
        for _ in 0..100 {
            let p = random_poly(&field, 3, 3, &mut rng);
            let q = random_poly(&field, 3, 3, &mut rng);
            let pt: Vec<Scalar> = (0..3).map(|_| field.random(&mut rng)).collect();
            assert_eq!(
                p.mul(&field, &q).eval(&field, &pt),
                field.mul(&p.eval(&field, &pt), &q.eval(&field, &pt))
            );
        }
    }

    #[test]
    fn exact_division_examples() {
        let field = Field::base(7).unwrap();
        // (x1²−x2²)/(x1−x2) = x1+x2
        let sum = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 1]));
        let diff = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 6]));
        let p = sum.mul(&field, &diff);
        assert_eq!(p.exact_divide(&field, &diff).unwrap(), sum);
        // p/p = 1
        assert_eq!(
            p.exact_divide(&field, &p).unwrap(),
            DensePoly::constant(&field, 2, field.one())
        );
        // Non-divisibility is signalled.
        let x1 = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 0]));
        assert!(matches!(
            sum.exact_divide(&field, &x1),
            Err(Error::NotDivisible)
        ));
    }

    #[test]
    fn random_products_divide_back() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let field = Field::base(11).unwrap();
        for _ in 0..100 {
            let forms: Vec<DensePoly> = (0..4)
                .map(|_| {
                    let coeffs: Vec<u64> = (0..3).map(|_| rng.gen_range(0..11)).collect();
                    DensePoly::from_linear(&field, &LinearForm::new(coeffs))
                })
                .filter(|p| !p.is_zero())
                .collect();
            if forms.len() < 2 {
                continue;
            }
            let mut prod = forms[0].clone();
            for f in &forms[1..] {
                prod = prod.mul(&field, f);
            }
            let quot = prod.exact_divide(&field, &forms[0]).unwrap();
            let mut rest = forms[1].clone();
            for f in &forms[2..] {
                rest = rest.mul(&field, f);
            }
            assert_eq!(quot, rest);
            assert_eq!(quot.mul(&field, &forms[0]), prod);
        }
    }

    #[test]
    fn substitution_examples() {
        let field = Field::base(7).unwrap();
        // x1·x2 with x1 ← x3+x4 (in a 4-variable target space).
        let mut p = DensePoly::zero(2);
        p.terms.insert(Monomial(vec![1, 1]), field.embed(1));
        let subs = vec![
            AffineForm::from_linear(&field, &LinearForm::new(vec![0, 0, 1, 1])),
            AffineForm::variable(&field, 4, 1),
        ];
        let got = p.substitute_linear(&field, &subs, 4).unwrap();
        let mut want = DensePoly::zero(4);
        want.terms.insert(Monomial(vec![0, 1, 1, 0]), field.embed(1));
        want.terms.insert(Monomial(vec![0, 1, 0, 1]), field.embed(1));
        assert_eq!(got, want);
    }

    #[test]
    fn substitute_all_scalars_equals_eval() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let field = Field::extension(7, 2, &mut rng).unwrap();
        for _ in 0..50 {
            let p = random_poly(&field, 4, 4, &mut rng);
            let pt: Vec<Scalar> = (0..4).map(|_| field.random(&mut rng)).collect();
            let subs: Vec<AffineForm> = pt
                .iter()
                .map(|v| AffineForm::constant(&field, 1, v.clone()))
                .collect();
            let c = p.substitute_linear(&field, &subs, 1).unwrap();
            let want = p.eval(&field, &pt);
            if field.is_zero(&want) {
                assert!(c.is_zero());
            } else {
                assert_eq!(c.terms.len(), 1);
                assert_eq!(c.terms.get(&Monomial(vec![0])), Some(&want));
            }
        }
    }

    #[test]
    fn substitution_commutes_with_eval() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let field = Field::extension(5, 2, &mut rng).unwrap();
        for _ in 0..50 {
            let p = random_poly(&field, 3, 3, &mut rng);
            let subs: Vec<AffineForm> = (0..3)
                .map(|_| AffineForm {
                    coeffs: (0..2).map(|_| field.random(&mut rng)).collect(),
                    constant: field.random(&mut rng),
                })
                .collect();
            let s = p.substitute_linear(&field, &subs, 2).unwrap();
            let pt: Vec<Scalar> = (0..2).map(|_| field.random(&mut rng)).collect();
            let image: Vec<Scalar> = subs
                .iter()
                .map(|a| {
                    let mut acc = a.constant.clone();
                    for (c, x) in a.coeffs.iter().zip(&pt) {
                        acc = field.add(&acc, &field.mul(c, x));
                    }
                    acc
                })
                .collect();
            assert_eq!(s.eval(&field, &pt), p.eval(&field, &image));
        }
    }

    #[test]
    fn graded_lex_leading_term() {
        let field = Field::base(5).unwrap();
        let mut p = DensePoly::zero(2);
        p.terms.insert(Monomial(vec![0, 3]), field.embed(1));
        p.terms.insert(Monomial(vec![2, 0]), field.embed(2));
        // Degree 3 beats degree 2 under the graded order.
        assert_eq!(p.leading().unwrap().0, &Monomial(vec![0, 3]));
    }
}
