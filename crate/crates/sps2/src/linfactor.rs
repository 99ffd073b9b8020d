//! Extraction of all base-field linear factors (with multiplicity) of a
//! black-box homogeneous polynomial, and the linear/nonlinear split.
//!
//! The algorithm avoids general black-box factorization.  One pass applies a
//! random base-field variable change (so factors have a nonzero x1
//! coefficient whp), fixes a random extension anchor on the remaining
//! coordinates, and recovers each factor's slope against every other
//! variable from root pairs of univariate slices; the per-variable pieces
//! are glued by the invariant β = ℓ(0, α_2, …, α_n), which is constant
//! across slices for one factor and distinct across factors whp.  Candidates
//! are verified by a vanishing test on V(ℓ), and multiplicities are read off
//! exactly as the valuation at the crossing parameter of a random line
//! through V(ℓ).  Passes with fresh variable changes repeat until several
//! consecutive passes discover nothing new, which bounds the probability of
//! missing a factor whose x1 coefficient kept vanishing.

use crate::field::{Field, Scalar};
use crate::linalg::{nullspace_basis, IsoMap, LinearForm};
use crate::oracle::{dense_interpolate, PolyOracle};
use crate::unipoly::{roots, UniPoly};
use crate::{Error, Result};
use rand::Rng;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Consecutive discovery-free passes required before declaring completeness.
const EMPTY_PASSES: usize = 5;
/// Anchor resamples per pass before giving up on β-invariant collisions.
const ANCHOR_RETRIES: usize = 8;
/// Trials for the hyperplane vanishing tests.
const VANISH_TRIALS: usize = 3;

/// The linear/nonlinear split of a black-box polynomial.
pub struct LinNonLinSplit {
    /// Normalized base-field linear factors with multiplicities.
    pub lin: Vec<(LinearForm, usize)>,
    /// Oracle for f / ∏ lin (division-backed; generic points only).
    pub nonlin: PolyOracle,
    /// Degree of the nonlinear part: d − Σ multiplicities.
    pub t: usize,
    /// Scalar with scale·∏lin·nonlin ≡ input; identically 1 here because
    /// the cofactor absorbs the constant.
    pub scale: Scalar,
}

/// Random point of the hyperplane V(ℓ) over the extension.
fn random_hyperplane_point(
    field: &Field,
    ell: &LinearForm,
    rng: &mut impl Rng,
) -> Vec<Scalar> {
    let n = ell.n();
    let basis = nullspace_basis(&[ell.coeffs.clone()], field.q());
    let mut pt = vec![field.zero(); n];
    for b in &basis {
        let c = field.random(rng);
        for (i, &bi) in b.iter().enumerate() {
            if bi != 0 {
                pt[i] = field.add(&pt[i], &field.scale_base(&c, bi));
            }
        }
    }
    pt
}

/// Does the oracle vanish identically on V(ℓ)?  Exact for true factors;
/// one-sided error (d/q^k)^trials otherwise.
pub fn vanishes_on_hyperplane(
    o: &PolyOracle,
    ell: &LinearForm,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<bool> {
    let field = o.field().clone();
    let mut done = 0;
    let mut misses = 0;
    while done < trials {
        let pt = random_hyperplane_point(&field, ell, rng);
        match o.eval(&pt) {
            Ok(v) => {
                if !field.is_zero(&v) {
                    return Ok(false);
                }
                done += 1;
            }
            Err(_) => {
                misses += 1;
                if misses > 64 {
                    return Err(Error::ResampleExhausted(
                        "hyperplane test kept hitting indeterminate points".into(),
                    ));
                }
            }
        }
    }
    Ok(true)
}

/// Valuation at s = 0 of o(p0 + s·w) for p0 ∈ V(ℓ) and a generic direction:
/// exactly the multiplicity of ℓ in the polynomial (whp; min of two draws).
fn line_multiplicity(
    o: &PolyOracle,
    ell: &LinearForm,
    rng: &mut impl Rng,
) -> Result<usize> {
    let field = o.field().clone();
    let d = o.d();
    let mut best: Option<usize> = None;
    let mut draws = 0;
    let mut attempts = 0;
    while draws < 2 {
        attempts += 1;
        if attempts > 16 {
            return Err(Error::ResampleExhausted(
                "degenerate lines kept appearing in multiplicity extraction".into(),
            ));
        }
        let p0 = random_hyperplane_point(&field, ell, rng);
        let w = crate::oracle::random_point(&field, o.n(), rng);
        if field.is_zero(&ell.eval(&field, &w)) {
            continue;
        }
        // Univariate restriction along the line, as an arity-1 oracle.
        let inner = o.clone();
        let f2 = field.clone();
        let p0c = p0.clone();
        let wc = w.clone();
        let line = PolyOracle::new(
            1,
            d,
            Rc::new((*field).clone()),
            "line-restricted",
            Rc::new(move |s| {
                let pt: Vec<Scalar> = p0c
                    .iter()
                    .zip(&wc)
                    .map(|(a, b)| f2.add(a, &f2.mul(&s[0], b)))
                    .collect();
                inner.eval(&pt)
            }),
        );
        let poly = dense_interpolate(&line, &[0], d, rng)?;
        let u = poly.to_unipoly(&field, 0)?;
        if u.is_zero() {
            // The whole line lies in the zero set; degenerate draw.
            continue;
        }
        let val = u
            .c
            .iter()
            .position(|c| !field.is_zero(c))
            .unwrap_or(u.c.len());
        best = Some(best.map_or(val, |b: usize| b.min(val)));
        draws += 1;
    }
    Ok(best.unwrap())
}

/// One extraction pass: returns verified-free *candidate* normalized forms
/// found through a fresh random variable change and anchor.
fn extraction_pass(o: &PolyOracle, rng: &mut impl Rng) -> Result<Vec<LinearForm>> {
    let field = o.field().clone();
    let n = o.n();
    let q = field.q();
    let d = o.d();
    let iso = IsoMap::random(n, q, rng);
    let op = o.compose_iso(&iso)?;
    'anchor: for _ in 0..ANCHOR_RETRIES {
        // Anchor values for coordinates 2..n (index 1..n−1).
        let anchor: Vec<Scalar> = (0..n).map(|_| field.random(rng)).collect();
        // Per slice j: β → slope c_j (None marks an ambiguous β).
        let mut per_slice: Vec<BTreeMap<Scalar, Option<u64>>> = Vec::with_capacity(n - 1);
        for j in 1..n {
            let mut assignments = BTreeMap::new();
            for i in 1..n {
                if i != j {
                    assignments.insert(i, anchor[i].clone());
                }
            }
            let oj = op.restrict_vars(&assignments)?; // arity 2: (x1, x_j)
            // Three random columns x_j = u: two produce root pairs, the
            // third confirms.
            let mut cols: Vec<Scalar> = Vec::new();
            while cols.len() < 3 {
                let u = field.random(rng);
                if !cols.contains(&u) {
                    cols.push(u);
                }
            }
            let mut col_polys: Vec<UniPoly> = Vec::with_capacity(3);
            for u in &cols {
                let mut asn = BTreeMap::new();
                asn.insert(1usize, u.clone());
                let col = oj.restrict_vars(&asn)?;
                let p = dense_interpolate(&col, &[0], d, rng)?;
                col_polys.push(p.to_unipoly(&field, 0)?);
            }
            if col_polys.iter().any(|p| p.is_zero()) {
                continue 'anchor; // degenerate column; the anchor is bad
            }
            let r1 = roots(&col_polys[0], &field, rng)?;
            let r2 = roots(&col_polys[1], &field, rng)?;
            let du = field.sub(&cols[0], &cols[1]);
            let du_inv = field.inv(&du).expect("distinct columns");
            let mut cands: BTreeMap<Scalar, Option<u64>> = BTreeMap::new();
            for a in &r1 {
                for b in &r2 {
                    // Factor x1 + c·x_j + β_j: at x_j = u the root is
                    // −(c·u + β_j); slope c = (b − a)·? derived from the
                    // two columns.
                    let c = field.mul(&field.sub(b, a), &du_inv);
                    let Some(cb) = field.as_base(&c) else {
                        continue;
                    };
                    let beta_j = field.sub(&field.neg(a), &field.scale_base(&cols[0], cb));
                    // Confirmation on the third column.
                    let r3 = field.neg(&field.add(
                        &field.scale_base(&cols[2], cb),
                        &beta_j,
                    ));
                    if !field.is_zero(&col_polys[2].eval(&field, &r3)) {
                        continue;
                    }
                    // Slice-independent invariant β = β_j + c·α_j.
                    let beta = field.add(&beta_j, &field.scale_base(&anchor[j], cb));
                    match cands.entry(beta) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(Some(cb));
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            if *e.get() != Some(cb) {
                                *e.get_mut() = None; // collision: ambiguous β
                            }
                        }
                    }
                }
            }
            per_slice.push(cands);
        }
        // Glue: β values present in every slice assemble one form.
        let mut out = Vec::new();
        let first = per_slice[0].clone();
        for (beta, c1) in first {
            let mut coeffs = vec![0u64; n];
            coeffs[0] = 1;
            let mut complete = true;
            let mut ambiguous = !matches!(c1, Some(_));
            if let Some(c) = c1 {
                coeffs[1] = c;
            }
            for (j, slice) in per_slice.iter().enumerate().skip(1) {
                match slice.get(&beta) {
                    None => {
                        complete = false;
                        break;
                    }
                    Some(None) => ambiguous = true,
                    Some(Some(c)) => coeffs[j + 1] = *c,
                }
            }
            if !complete {
                continue; // spurious slice-local line
            }
            if ambiguous {
                continue 'anchor; // a real bucket collided; new anchor
            }
            let lhat = LinearForm::new(coeffs);
            out.push(iso.unapply_form(&lhat).normalized(q));
        }
        return Ok(out);
    }
    Err(Error::ResampleExhausted(
        "β-invariant collisions persisted across anchor resamples".into(),
    ))
}

/// Univariate special case: recover base-field roots with multiplicity by
/// direct interpolation and exact division.
fn extract_univariate(o: &PolyOracle, rng: &mut impl Rng) -> Result<Vec<(LinearForm, usize)>> {
    let field = o.field().clone();
    let p = dense_interpolate(o, &[0], o.d(), rng)?;
    let mut u = p.to_unipoly(&field, 0)?;
    if u.is_zero() {
        return Err(Error::Precondition("zero polynomial".into()));
    }
    let mut out = Vec::new();
    for a in 0..field.q() {
        let root = field.embed(a);
        let lin = UniPoly::linear_root(&field, &root);
        let mut mult = 0;
        loop {
            let (quot, rem) = u.divrem(&field, &lin)?;
            if !rem.is_zero() {
                break;
            }
            u = quot;
            mult += 1;
        }
        if mult > 0 {
            // x1 − a, normalized; homogeneous inputs only ever yield a = 0.
            let form = if a == 0 {
                LinearForm::unit(1, 0)
            } else {
                continue; // inhomogeneous artifact: not a homogeneous factor
            };
            out.push((form, mult));
        }
    }
    Ok(out)
}

/// All base-field linear factors of a homogeneous black-box polynomial, as
/// normalized forms with exact multiplicities.
pub fn extract_linear_factors(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<Vec<(LinearForm, usize)>> {
    if o.zero_test(2, rng)? {
        return Err(Error::Precondition("zero polynomial has no factorization".into()));
    }
    if o.d() == 0 || o.n() == 0 {
        return Ok(vec![]);
    }
    if o.n() == 1 {
        return extract_univariate(o, rng);
    }
    let mut found: BTreeMap<LinearForm, usize> = BTreeMap::new();
    let mut total = 0usize;
    let mut streak = 0usize;
    while streak < EMPTY_PASSES && total < o.d() {
        let candidates = extraction_pass(o, rng)?;
        let mut discovered = false;
        for ell in candidates {
            if found.contains_key(&ell) {
                continue;
            }
            if !vanishes_on_hyperplane(o, &ell, VANISH_TRIALS, rng)? {
                continue;
            }
            let mult = line_multiplicity(o, &ell, rng)?;
            if mult == 0 {
                continue;
            }
            total += mult;
            found.insert(ell, mult);
            discovered = true;
        }
        if discovered {
            streak = 0;
        } else {
            streak += 1;
        }
    }
    debug_assert!(total <= o.d());
    Ok(found.into_iter().collect())
}

/// Exact evaluation of the nonlinear cofactor at an arbitrary point,
/// including points where some linear factor vanishes (where the pointwise
/// division oracle is indeterminate).  The full polynomial is interpolated
/// along a random line through the point; the known linear factors become
/// explicit univariate linear factors of that restriction and are divided
/// out exactly, leaving the cofactor's value at parameter 0.
pub fn eval_nonlin_at(
    o: &PolyOracle,
    lin: &[(LinearForm, usize)],
    point: &[Scalar],
    rng: &mut impl Rng,
) -> Result<Scalar> {
    let field = o.field().clone();
    let d = o.d();
    'attempt: for _ in 0..8 {
        let w = crate::oracle::random_point(&field, o.n(), rng);
        if lin
            .iter()
            .any(|(f, _)| field.is_zero(&f.eval(&field, &w)))
        {
            continue;
        }
        let inner = o.clone();
        let f2 = field.clone();
        let p0 = point.to_vec();
        let wc = w.clone();
        let line = PolyOracle::new(
            1,
            d,
            Rc::new((*field).clone()),
            "line-restricted",
            Rc::new(move |s| {
                let pt: Vec<Scalar> = p0
                    .iter()
                    .zip(&wc)
                    .map(|(a, b)| f2.add(a, &f2.mul(&s[0], b)))
                    .collect();
                inner.eval(&pt)
            }),
        );
        let mut u = dense_interpolate(&line, &[0], d, rng)?.to_unipoly(&field, 0)?;
        for (form, mult) in lin {
            let a = form.eval(&field, point);
            let b = form.eval(&field, &w);
            let div = UniPoly::from_coeffs(&field, vec![a, b]);
            for _ in 0..*mult {
                let (quot, rem) = u.divrem(&field, &div)?;
                if !rem.is_zero() {
                    // The line hit a coincidence; a fresh direction fixes it
                    // when the factor multiset is genuine.
                    continue 'attempt;
                }
                u = quot;
            }
        }
        return Ok(u.eval(&field, &field.zero()));
    }
    Err(Error::ResampleExhausted(
        "no usable direction for cofactor evaluation".into(),
    ))
}

/// Split into Lin·NonLin: extract the factors and expose the cofactor as a
/// division-backed oracle of degree t = d − Σ multiplicities.
pub fn split_lin_nonlin(o: &PolyOracle, rng: &mut impl Rng) -> Result<LinNonLinSplit> {
    let field = o.field().clone();
    let lin = extract_linear_factors(o, rng)?;
    let s: usize = lin.iter().map(|(_, m)| m).sum();
    let nonlin = o.divide_by_linear_factors(&lin, field.one())?;
    Ok(LinNonLinSplit {
        lin,
        t: o.d() - s,
        nonlin,
        scale: field.one(),
    })
}

/// Exhaustive projective-scan cross-check: every normalized base-field form
/// is trial-tested for dividing the oracle, with multiplicities from line
/// valuations.  Only tractable for small q^n; used as the test oracle.
pub fn exhaustive_linear_factors(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<Vec<(LinearForm, usize)>> {
    let field = o.field().clone();
    let q = field.q();
    let n = o.n();
    let count = q
        .checked_pow(n as u32)
        .filter(|&c| c <= 2_000_000)
        .ok_or_else(|| Error::ConfigGate("projective scan too large".into()))?;
    let mut out = Vec::new();
    for idx in 0..count {
        let mut coeffs = Vec::with_capacity(n);
        let mut t = idx;
        for _ in 0..n {
            coeffs.push(t % q);
            t /= q;
        }
        let form = LinearForm::new(coeffs);
        if form.is_zero() || form.normalized(q) != form {
            continue;
        }
        // Cheap rejection first, then a confirmed vanishing test.
        if !vanishes_on_hyperplane(o, &form, 2, rng)? {
            continue;
        }
        if !vanishes_on_hyperplane(o, &form, VANISH_TRIALS, rng)? {
            continue;
        }
        let mult = line_multiplicity(o, &form, rng)?;
        if mult > 0 {
            out.push((form, mult));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_instance, InstanceMode};
    use crate::mpoly::DensePoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn dense_oracle(field: &Rc<Field>, p: DensePoly) -> PolyOracle {
        PolyOracle::from_dense(field.clone(), p)
    }

    #[test]
    fn product_of_two_coordinates() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let x1 = DensePoly::from_linear(&field, &LinearForm::unit(3, 0));
        let x2 = DensePoly::from_linear(&field, &LinearForm::unit(3, 1));
        let o = dense_oracle(&field, x1.mul(&field, &x2));
        let got = extract_linear_factors(&o, &mut rng).unwrap();
        assert_eq!(
            got,
            vec![(LinearForm::unit(3, 1), 1), (LinearForm::unit(3, 0), 1)]
        );
    }

    #[test]
    fn irreducible_quadratic_cofactor_over_f3() {
        // (x1+x2)·(x1²+x2²): x²+1 has no roots over F_3, so only one factor.
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let field = Rc::new(Field::extension(3, 13, &mut rng).unwrap());
        let s = DensePoly::from_linear(&field, &LinearForm::new(vec![1, 1]));
        let sq = |f: &LinearForm| {
            let p = DensePoly::from_linear(&field, f);
            p.mul(&field, &p)
        };
        let quad = sq(&LinearForm::unit(2, 0)).add(&field, &sq(&LinearForm::unit(2, 1)));
        let o = dense_oracle(&field, s.mul(&field, &quad));
        let got = extract_linear_factors(&o, &mut rng).unwrap();
        assert_eq!(got, vec![(LinearForm::new(vec![1, 1]), 1)]);
    }

    #[test]
    fn repeated_factors_with_multiplicity() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        let a = LinearForm::new(vec![1, 2, 0]);
        let b = LinearForm::new(vec![0, 1, 3]);
        let pa = DensePoly::from_linear(&field, &a);
        let pb = DensePoly::from_linear(&field, &b);
        let prod = pa
            .mul(&field, &pa)
            .mul(&field, &pa)
            .mul(&field, &pb)
            .scale(&field, &field.embed(4));
        let o = dense_oracle(&field, prod);
        let mut got = extract_linear_factors(&o, &mut rng).unwrap();
        got.sort();
        let mut want = vec![(a.normalized(5), 3), (b.normalized(5), 1)];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn matches_exhaustive_scan_on_random_circuits() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        for _ in 0..10 {
            let inst = random_instance(4, 4, &field, 4, InstanceMode::General, &mut rng).unwrap();
            let mut got = extract_linear_factors(&inst.oracle, &mut rng).unwrap();
            let mut want = exhaustive_linear_factors(&inst.oracle, &mut rng).unwrap();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn split_roundtrip_and_self_check() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        // d independent forms: t = 0, nonlin constant.
        let forms: Vec<LinearForm> = (0..3).map(|i| LinearForm::unit(4, i)).collect();
        let mut prod = DensePoly::constant(&field, 4, field.embed(2));
        for f in &forms {
            prod = prod.mul(&field, &DensePoly::from_linear(&field, f));
        }
        let o = dense_oracle(&field, prod);
        let split = split_lin_nonlin(&o, &mut rng).unwrap();
        assert_eq!(split.t, 0);
        assert_eq!(split.lin.len(), 3);
        // The cofactor oracle is the constant 2.
        let (_, v) = split.nonlin.eval_resampling(&mut rng, 64).unwrap();
        assert_eq!(v, field.embed(2));
        // Re-extraction on the cofactor finds nothing.
        assert!(extract_linear_factors(&split.nonlin, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn planted_gcd_is_recovered_exactly() {
        // G·(T1+T2) with nonlinear T1+T2: the linear part is exactly G.
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        for _ in 0..5 {
            let inst = random_instance(5, 5, &field, 5, InstanceMode::General, &mut rng).unwrap();
            if inst.truth.g.is_empty() {
                continue;
            }
            let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();
            let mut got: Vec<LinearForm> = Vec::new();
            for (f, m) in &split.lin {
                for _ in 0..*m {
                    got.push(f.clone());
                }
            }
            got.sort();
            let mut want = inst.truth.g.clone();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn zero_oracle_is_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        let o = dense_oracle(&field, DensePoly::zero(3));
        assert!(extract_linear_factors(&o, &mut rng).is_err());
    }

    #[test]
    fn multiplicity_sum_is_bounded_by_degree() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        for _ in 0..5 {
            let inst = random_instance(5, 4, &field, 4, InstanceMode::General, &mut rng).unwrap();
            let got = extract_linear_factors(&inst.oracle, &mut rng).unwrap();
            let s: usize = got.iter().map(|(_, m)| m).sum();
            assert!(s <= 4);
        }
    }
}
