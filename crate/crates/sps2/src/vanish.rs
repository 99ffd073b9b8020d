//! Codimension-2 subspaces on which the nonlinear part of a black-box
//! polynomial vanishes.
//!
//! The main routine restricts a randomly re-based oracle to five-variable
//! slices, interpolates the nonlinear part of each slice, solves for all
//! vanishing pairs of the special shape (x1 − ℓ1′, x2 − ℓ2′) with
//! ℓ′ ∈ sp{x3, x4, x_i}, glues the per-slice solutions through a random
//! shear fixing x1..x4, and keeps only glued pairs that pass a randomized
//! vanishing test of the nonlinear part on the assembled subspace.  A
//! brute-force enumerator over all canonical codimension-2 subspaces serves
//! as the exact cross-check at small sizes.

use crate::field::{Field, Scalar};
use crate::linalg::{nullspace_basis, rref, IsoMap, LinearForm};
use crate::linfactor::{eval_nonlin_at, split_lin_nonlin};
use crate::mpoly::{AffineForm, DensePoly};
use crate::oracle::{dense_interpolate, PolyOracle};
use crate::unipoly::{roots, UniPoly};
use crate::{Error, Result};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Largest base field for the q³ enumeration in the per-slice solver.
const SOLVER_Q_GATE: u64 = 31;
/// Independent rounds whose verified outputs are unioned.
const ROUNDS: usize = 3;
/// Random points sampled on each assembled subspace during verification.
const VERIFY_POINTS: usize = 40;

/// A codimension-2 subspace V(ℓ1, ℓ2), stored as the canonical reduced
/// row echelon basis of the 2-dimensional span of the two forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CodimTwoSpace {
    rows: [LinearForm; 2],
}

impl CodimTwoSpace {
    /// Canonicalize a pair of independent forms.
    pub fn new(a: &LinearForm, b: &LinearForm, q: u64) -> Result<CodimTwoSpace> {
        let (rows, _) = rref(&[a.coeffs.clone(), b.coeffs.clone()], q);
        if rows.len() != 2 {
            return Err(Error::Precondition(
                "dependent forms cannot span a codimension-2 subspace".into(),
            ));
        }
        Ok(CodimTwoSpace {
            rows: [LinearForm::new(rows[0].clone()), LinearForm::new(rows[1].clone())],
        })
    }

    pub fn forms(&self) -> (&LinearForm, &LinearForm) {
        (&self.rows[0], &self.rows[1])
    }

    pub fn n(&self) -> usize {
        self.rows[0].n()
    }

    /// Basis of the subspace itself (the joint nullspace of the two forms).
    pub fn basis(&self, q: u64) -> Vec<Vec<u64>> {
        nullspace_basis(&[self.rows[0].coeffs.clone(), self.rows[1].coeffs.clone()], q)
    }

    /// A uniformly random extension-field point of the subspace.
    pub fn random_point(&self, field: &Field, rng: &mut impl Rng) -> Vec<Scalar> {
        let basis = self.basis(field.q());
        let n = self.n();
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
}

/// A vanishing pair of the special slice shape: (x1 − ℓ1′, x2 − ℓ2′) with
/// ℓ′ having base coefficients on (x3, x4, x_slice).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpecialPair {
    pub l1: [u64; 3],
    pub l2: [u64; 3],
}

fn substitution_form(field: &Field, out_n: usize, coeffs: &[u64; 3], vars: [usize; 3]) -> AffineForm {
    let mut c = vec![field.zero(); out_n];
    for (j, &v) in vars.iter().enumerate() {
        c[v] = field.embed(coeffs[j]);
    }
    AffineForm {
        coeffs: c,
        constant: field.zero(),
    }
}

/// Substitute x1 ← ℓ1′ (and optionally x2 ← ℓ2′) in a 5-variable polynomial.
fn substitute_pair(
    field: &Field,
    p: &DensePoly,
    l1: &[u64; 3],
    l2: Option<&[u64; 3]>,
) -> Result<DensePoly> {
    let mut subs: Vec<AffineForm> = (0..5).map(|i| AffineForm::variable(field, 5, i)).collect();
    subs[0] = substitution_form(field, 5, l1, [2, 3, 4]);
    if let Some(z) = l2 {
        subs[1] = substitution_form(field, 5, z, [2, 3, 4]);
    }
    p.substitute_linear(field, &subs, 5)
}

/// Linear factors x2 − z3·x3 − c of a polynomial in (x2, x3), recovered as
/// root pairs across two random x3-columns; only base slopes are kept.
fn bivariate_line_candidates(
    field: &Field,
    h: &DensePoly,
    rng: &mut impl Rng,
) -> Result<Vec<(u64, Scalar)>> {
    for _ in 0..6 {
        let v1 = field.random(rng);
        let v2 = field.random(rng);
        if v1 == v2 {
            continue;
        }
        let column = |v: &Scalar| -> Result<UniPoly> {
            let mut subs: Vec<AffineForm> =
                (0..5).map(|i| AffineForm::variable(field, 5, i)).collect();
            subs[2] = AffineForm::constant(field, 5, v.clone());
            h.substitute_linear(field, &subs, 5)?.to_unipoly(field, 1)
        };
        let p1 = column(&v1)?;
        let p2 = column(&v2)?;
        if p1.is_zero() || p2.is_zero() {
            continue;
        }
        let r1 = roots(&p1, field, rng)?;
        let r2 = roots(&p2, field, rng)?;
        let dv_inv = field.inv(&field.sub(&v1, &v2))?;
        let mut out = Vec::new();
        for a in &r1 {
            for b in &r2 {
                // x2 = z3·x3 + c: slope from the two columns.
                let z = field.mul(&field.sub(a, b), &dv_inv);
                if let Some(z3) = field.as_base(&z) {
                    let c = field.sub(a, &field.scale_base(&v1, z3));
                    out.push((z3, c));
                }
            }
        }
        return Ok(out);
    }
    Err(Error::ResampleExhausted(
        "degenerate columns persisted in the slice solver".into(),
    ))
}

/// All special-shape vanishing pairs of a 5-variable polynomial: enumerate
/// ℓ1′ over the q³ base triples; for each, recover ℓ2′ candidates from
/// bivariate restrictions and keep those that annihilate the polynomial
/// symbolically.
pub fn solve_special_codim2_5var(
    p: &DensePoly,
    field: &Field,
    rng: &mut impl Rng,
) -> Result<Vec<SpecialPair>> {
    if p.n != 5 {
        return Err(Error::ArityMismatch("slice solver needs 5 variables".into()));
    }
    if p.is_zero() {
        return Err(Error::Precondition("slice solver needs a nonzero input".into()));
    }
    let q = field.q();
    if q > SOLVER_Q_GATE {
        return Err(Error::ConfigGate(format!(
            "slice solver enumerates q³ candidates; q = {q} exceeds {SOLVER_Q_GATE}"
        )));
    }
    let triples = || {
        (0..q.pow(3)).map(move |idx| {
            [idx % q, (idx / q) % q, (idx / (q * q)) % q]
        })
    };
    // Cheap admissibility filter.  Fix x3 ← e (a non-base extension
    // element) and base values for x4, x5.  If (x2 − z3x3 − z4x4 − z5x5)
    // divides p(ℓ1′, x2, …) for base z's, then the univariate
    // p(ℓ1′(e,a4,a5), x2, e, a4, a5) has the root z3·e + (z4a4 + z5a5),
    // which lies in the q²-element lattice {b·e + b′}.  A random
    // polynomial over the big field almost never has such a root, so the
    // expensive ℓ2′ recovery below runs only for the handful of surviving
    // ℓ1′.  A true ℓ1′ always survives, so completeness is unaffected.
    let e = loop {
        let c = field.random(rng);
        if field.as_base(&c).is_none() {
            break c;
        }
    };
    let a4 = field.embed(rng.gen_range(0..q));
    let a5 = field.embed(rng.gen_range(0..q));
    let pa = {
        let mut subs: Vec<AffineForm> =
            (0..5).map(|i| AffineForm::variable(field, 5, i)).collect();
        subs[2] = AffineForm::constant(field, 5, e.clone());
        subs[3] = AffineForm::constant(field, 5, a4.clone());
        subs[4] = AffineForm::constant(field, 5, a5.clone());
        p.substitute_linear(field, &subs, 5)?
    };
    // pa depends only on (x1, x2): organize as x2-columns of univariates
    // in x1 for fast per-ℓ1′ evaluation.
    let cols: Vec<UniPoly> = pa
        .coeffs_in_var(field, 1)
        .iter()
        .map(|c| c.to_unipoly(field, 0))
        .collect::<Result<_>>()?;
    // All q² lattice points b·e + b′, precomputed once.
    let lattice: Vec<Scalar> = (0..q)
        .flat_map(|b| {
            let be = field.scale_base(&e, b);
            (0..q)
                .map(move |bp| field.add(&be, &field.embed(bp)))
                .collect::<Vec<_>>()
        })
        .collect();
    let admissible = |l1: &[u64; 3]| -> bool {
        let mut v = field.scale_base(&e, l1[0]);
        v = field.add(&v, &field.scale_base(&a4, l1[1]));
        v = field.add(&v, &field.scale_base(&a5, l1[2]));
        let ha = UniPoly::from_coeffs(
            field,
            cols.iter().map(|c| c.eval(field, &v)).collect(),
        );
        if ha.is_zero() {
            // Degenerate collapse: fall through to the exact path.
            return true;
        }
        if ha.deg() == Some(0) {
            return false;
        }
        lattice
            .iter()
            .any(|pt| field.is_zero(&ha.eval(field, pt)))
    };
    let mut found: BTreeSet<SpecialPair> = BTreeSet::new();
    for l1 in triples() {
        if !admissible(&l1) {
            continue;
        }
        let h = substitute_pair(field, p, &l1, None)?;
        if h.is_zero() {
            // x1 − ℓ1′ already annihilates p: every ℓ2′ qualifies.
            for l2 in triples() {
                found.insert(SpecialPair { l1, l2 });
            }
            continue;
        }
        // Two independent (x4, x5) restrictions; intersect by slope and
        // solve a 2×2 system for the (x4, x5) coefficients.
        let mut candidates: BTreeSet<[u64; 3]> = BTreeSet::new();
        for _ in 0..2 {
            let (u4, u5) = (field.random(rng), field.random(rng));
            let (w4, w5) = (field.random(rng), field.random(rng));
            // det = u4·w5 − u5·w4 must be nonzero for the 2×2 solve.
            let det = field.sub(&field.mul(&u4, &w5), &field.mul(&u5, &w4));
            if field.is_zero(&det) {
                continue;
            }
            let det_inv = field.inv(&det)?;
            let restrict = |a: &Scalar, b: &Scalar| -> Result<DensePoly> {
                let mut subs: Vec<AffineForm> =
                    (0..5).map(|i| AffineForm::variable(field, 5, i)).collect();
                subs[3] = AffineForm::constant(field, 5, a.clone());
                subs[4] = AffineForm::constant(field, 5, b.clone());
                h.substitute_linear(field, &subs, 5)
            };
            let h1 = restrict(&u4, &u5)?;
            let h2 = restrict(&w4, &w5)?;
            if h1.is_zero() || h2.is_zero() {
                continue;
            }
            let c1 = bivariate_line_candidates(field, &h1, rng)?;
            let c2 = bivariate_line_candidates(field, &h2, rng)?;
            for (z3, c) in &c1 {
                for (z3b, cb) in &c2 {
                    if z3 != z3b {
                        continue;
                    }
                    // Solve z4·u4 + z5·u5 = c, z4·w4 + z5·w5 = c′.
                    let z4 = field.mul(
                        &field.sub(&field.mul(c, &w5), &field.mul(cb, &u5)),
                        &det_inv,
                    );
                    let z5 = field.mul(
                        &field.sub(&field.mul(cb, &u4), &field.mul(c, &w4)),
                        &det_inv,
                    );
                    if let (Some(b4), Some(b5)) = (field.as_base(&z4), field.as_base(&z5)) {
                        candidates.insert([*z3, b4, b5]);
                    }
                }
            }
        }
        for l2 in candidates {
            if substitute_pair(field, p, &l1, Some(&l2))?.is_zero() {
                found.insert(SpecialPair { l1, l2 });
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// One glued tuple before verification: full coefficient vectors of
/// ℓ1, ℓ2 over x3..xn (in the re-based coordinates).
struct GluedPair {
    l1: Vec<u64>,
    l2: Vec<u64>,
}

/// Branch cap when several tuples of a slice share the matching key.
const GLUE_BRANCH_CAP: usize = 16;

/// Glue per-slice tuples into full-length pairs.  Tuples arising from the
/// same subspace share their (x3, x4) coefficients, so slices are matched
/// on that key; an ambiguous key branches over all combinations (bounded)
/// rather than guessing — the caller verifies every assembly against the
/// oracle, so spurious branches are filtered, never returned.
fn glue_slices(slices: &[Vec<SpecialPair>], n: usize) -> Vec<GluedPair> {
    // Index every slice's pairs by the shared-coefficient key.
    type Key = ((u64, u64), (u64, u64));
    let keyed: Vec<BTreeMap<Key, Vec<&SpecialPair>>> = slices
        .iter()
        .map(|s| {
            let mut m: BTreeMap<Key, Vec<&SpecialPair>> = BTreeMap::new();
            for pair in s {
                let key = ((pair.l1[0], pair.l1[1]), (pair.l2[0], pair.l2[1]));
                m.entry(key).or_default().push(pair);
            }
            m
        })
        .collect();
    let mut out = Vec::new();
    'tuples: for base in &slices[0] {
        // Coefficients over x3..xn, indexed from x3 = position 0.
        let mut l1 = vec![0u64; n - 2];
        let mut l2 = vec![0u64; n - 2];
        l1[0] = base.l1[0];
        l1[1] = base.l1[1];
        l1[2] = base.l1[2];
        l2[0] = base.l2[0];
        l2[1] = base.l2[1];
        l2[2] = base.l2[2];
        let key = ((base.l1[0], base.l1[1]), (base.l2[0], base.l2[1]));
        let mut partial = vec![GluedPair { l1, l2 }];
        for (offset, m) in keyed.iter().enumerate().skip(1) {
            let Some(matches) = m.get(&key) else {
                continue 'tuples; // the subspace is invisible in this slice
            };
            let mut next = Vec::new();
            for g in &partial {
                for cand in matches {
                    let mut l1 = g.l1.clone();
                    let mut l2 = g.l2.clone();
                    l1[offset + 2] = cand.l1[2];
                    l2[offset + 2] = cand.l2[2];
                    next.push(GluedPair { l1, l2 });
                    if next.len() >= GLUE_BRANCH_CAP {
                        break;
                    }
                }
                if next.len() >= GLUE_BRANCH_CAP {
                    break;
                }
            }
            partial = next;
        }
        out.append(&mut partial);
    }
    out
}

/// One full pass of the slice-solve-and-glue pipeline; every returned
/// subspace has passed the randomized vanishing verification.
fn vanishing_round(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<BTreeSet<CodimTwoSpace>> {
    let field = o.field().clone();
    let n = o.n();
    let q = field.q();
    let iso = IsoMap::random(n, q, rng);
    let g = o.compose_iso(&iso)?;
    let split_g = split_lin_nonlin(&g, rng)?;
    if split_g.t == 0 {
        return Ok(BTreeSet::new()); // constant nonlinear part vanishes nowhere
    }
    let t = split_g.t;
    // Per-slice solve.
    let mut slices: Vec<Vec<SpecialPair>> = Vec::new();
    for i in 4..n {
        let mut assignments = BTreeMap::new();
        for j in 4..n {
            if j != i {
                assignments.insert(j, field.zero());
            }
        }
        let gi = g.restrict_vars(&assignments)?;
        let split_i = split_lin_nonlin(&gi, rng)?;
        if split_i.t != t {
            return Err(Error::Degenerate(
                "slice nonlinear degree disagrees with the full split".into(),
            ));
        }
        let p = dense_interpolate(&split_i.nonlin, &[0, 1, 2, 3, 4], t, rng)?;
        for (_, c) in p.terms.iter() {
            if field.as_base(c).is_none() {
                return Err(Error::Degenerate(
                    "interpolated slice has non-base coefficients".into(),
                ));
            }
        }
        let pairs = solve_special_codim2_5var(&p, &field, rng)?;
        let bound = 3usize.saturating_mul((t as usize).pow(7));
        if pairs.len() > bound {
            return Err(Error::Internal(format!(
                "slice solution count {} exceeds 3t⁷ = {bound}; input rank below 5?",
                pairs.len()
            )));
        }
        slices.push(pairs);
    }
    // Glue across slices (single slice: nothing to glue).
    let glued: Vec<GluedPair> = if n == 5 {
        slices[0]
            .iter()
            .map(|p| GluedPair {
                l1: p.l1.to_vec(),
                l2: p.l2.to_vec(),
            })
            .collect()
    } else {
        glue_slices(&slices, n)
    };
    // Verify each assembly on the nonlinear part of g and map back.
    let mut out = BTreeSet::new();
    for pair in glued {
        let to_form = |coeffs: &[u64], pivot: usize| {
            let mut v = vec![0u64; n];
            v[pivot] = 1;
            for (j, &c) in coeffs.iter().enumerate() {
                v[j + 2] = (q - c % q) % q;
            }
            LinearForm::new(v)
        };
        let f1 = to_form(&pair.l1, 0);
        let f2 = to_form(&pair.l2, 1);
        let space_g = CodimTwoSpace::new(&f1, &f2, q)?;
        let mut ok = true;
        for _ in 0..VERIFY_POINTS {
            let pt = space_g.random_point(&field, rng);
            let v = eval_nonlin_at(&g, &split_g.lin, &pt, rng)?;
            if !field.is_zero(&v) {
                ok = false;
                break;
            }
        }
        if ok {
            let b1 = iso.unapply_form(&f1);
            let b2 = iso.unapply_form(&f2);
            out.insert(CodimTwoSpace::new(&b1, &b2, q)?);
        }
    }
    Ok(out)
}

/// Deterministically complete 5-variable search: interpolate the nonlinear
/// part once and run the slice solver under every pivot-pair coordinate
/// permutation.  Any 2-dimensional span has reduced-echelon pivots at some
/// coordinate pair (j1, j2); permuting (j1, j2) to the front puts it in the
/// solver's special shape, so no span can hide behind an unlucky basis.
/// The solver's membership check is symbolic, so no further verification
/// is needed.
fn vanishing_n5(o: &PolyOracle, rng: &mut impl Rng) -> Result<BTreeSet<CodimTwoSpace>> {
    let field = o.field().clone();
    let q = field.q();
    let split = split_lin_nonlin(o, rng)?;
    if split.t == 0 {
        return Ok(BTreeSet::new());
    }
    let p = dense_interpolate(&split.nonlin, &[0, 1, 2, 3, 4], split.t, rng)?;
    let mut out = BTreeSet::new();
    for j1 in 0..5usize {
        for j2 in (j1 + 1)..5 {
            let mut order = vec![j1, j2];
            order.extend((0..5).filter(|&c| c != j1 && c != j2));
            // Rename variables: old coordinate order[k] becomes new x_{k}.
            let mut new_pos = [0usize; 5];
            for (k, &old) in order.iter().enumerate() {
                new_pos[old] = k;
            }
            let subs: Vec<AffineForm> = (0..5)
                .map(|i| AffineForm::variable(&field, 5, new_pos[i]))
                .collect();
            let pp = p.substitute_linear(&field, &subs, 5)?;
            for pair in solve_special_codim2_5var(&pp, &field, rng)? {
                let to_form = |pivot: usize, coeffs: &[u64; 3]| {
                    let mut v = vec![0u64; 5];
                    v[order[pivot]] = 1;
                    for (m, &c) in coeffs.iter().enumerate() {
                        v[order[m + 2]] = (q - c % q) % q;
                    }
                    LinearForm::new(v)
                };
                out.insert(CodimTwoSpace::new(
                    &to_form(0, &pair.l1),
                    &to_form(1, &pair.l2),
                    q,
                )?);
            }
        }
    }
    Ok(out)
}

/// All codimension-2 subspaces on which the nonlinear part of the oracle's
/// polynomial vanishes.  Five variables use the deterministic fixed-pivot
/// search; for more variables, independent verified rounds are unioned, so
/// a subspace missed by one round's random choices is recovered by another;
/// soundness rests on the per-subspace vanishing test.
pub fn compute_vanishing_codim2(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<BTreeSet<CodimTwoSpace>> {
    if o.n() < 5 {
        return Err(Error::Precondition(
            "codimension-2 search needs at least 5 variables".into(),
        ));
    }
    if o.n() == 5 {
        let out = vanishing_n5(o, rng)?;
        let bound = 3usize.saturating_mul(o.d().pow(7));
        if out.len() > bound {
            return Err(Error::Internal(format!(
                "vanishing set size {} exceeds 3d⁷ = {bound}",
                out.len()
            )));
        }
        return Ok(out);
    }
    let mut out: BTreeSet<CodimTwoSpace> = BTreeSet::new();
    let mut last_err: Option<Error> = None;
    let mut successes = 0;
    for _ in 0..ROUNDS {
        // One retry per round for degenerate random choices.
        let mut round_result = vanishing_round(o, rng);
        if round_result.is_err() {
            round_result = vanishing_round(o, rng);
        }
        match round_result {
            Ok(set) => {
                out.extend(set);
                successes += 1;
            }
            Err(e) => last_err = Some(e),
        }
    }
    if successes == 0 {
        return Err(last_err.unwrap_or_else(|| Error::Internal("no rounds ran".into())));
    }
    let bound = 3usize.saturating_mul(o.d().pow(7));
    if out.len() > bound {
        return Err(Error::Internal(format!(
            "vanishing set size {} exceeds 3d⁷ = {bound}",
            out.len()
        )));
    }
    Ok(out)
}

/// Exhaustive cross-check: enumerate every canonical codimension-2 subspace
/// of F_q^n and test vanishing of the (densely interpolated) polynomial on
/// it symbolically.  Exact; only tractable for small q, n.
pub fn brute_force_codim2(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<BTreeSet<CodimTwoSpace>> {
    let field = o.field().clone();
    let q = field.q();
    let n = o.n();
    let spaces = q
        .checked_pow(2 * (n as u32).saturating_sub(2))
        .filter(|&c| c <= 2_000_000)
        .ok_or_else(|| Error::ConfigGate("codimension-2 enumeration too large".into()))?;
    let _ = spaces;
    let all_vars: Vec<usize> = (0..n).collect();
    let p = dense_interpolate(o, &all_vars, o.d(), rng)?;
    let mut out = BTreeSet::new();
    // Enumerate reduced-echelon 2×n rank-2 matrices by pivot columns.
    for j1 in 0..n {
        for j2 in (j1 + 1)..n {
            let free1: Vec<usize> = ((j1 + 1)..n).filter(|&c| c != j2).collect();
            let free2: Vec<usize> = ((j2 + 1)..n).collect();
            let total_free = free1.len() + free2.len();
            let combos = q.pow(total_free as u32);
            for idx in 0..combos {
                let mut r1 = vec![0u64; n];
                let mut r2 = vec![0u64; n];
                r1[j1] = 1;
                r2[j2] = 1;
                let mut rem = idx;
                for &c in &free1 {
                    r1[c] = rem % q;
                    rem /= q;
                }
                for &c in &free2 {
                    r2[c] = rem % q;
                    rem /= q;
                }
                // Restrict the polynomial to the joint nullspace and check
                // for the zero polynomial.
                let basis = nullspace_basis(&[r1.clone(), r2.clone()], q);
                let subs: Vec<AffineForm> = (0..n)
                    .map(|i| {
                        let mut coeffs = vec![field.zero(); basis.len()];
                        for (bidx, b) in basis.iter().enumerate() {
                            coeffs[bidx] = field.embed(b[i]);
                        }
                        AffineForm {
                            coeffs,
                            constant: field.zero(),
                        }
                    })
                    .collect();
                let restricted = p.substitute_linear(&field, &subs, basis.len())?;
                if restricted.is_zero() {
                    out.insert(CodimTwoSpace::new(
                        &LinearForm::new(r1),
                        &LinearForm::new(r2),
                        q,
                    )?);
                }
            }
        }
    }
    Ok(out)
}
