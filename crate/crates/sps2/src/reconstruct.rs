//! Reconstruction drivers for fan-in-2 depth-3 circuits.
//!
//! Four entry points share the same contract — each returns a verified
//! circuit or an honest failure, never an unverified output:
//!
//! * [`low_rank_reconstruct`] — expresses the nonlinear part as an r-variate
//!   polynomial over a small independent set of candidate forms;
//! * [`corner_case_reconstruct`] — handles one gate being a pure power of a
//!   single linear form;
//! * [`reconstruct_with_known_gate_factors`] — rebuilds the circuit when
//!   independent linear factors of one multiplication gate are supplied;
//! * [`high_rank_reconstruct`] — searches candidate forms and their
//!   ordinary lines to feed the known-factors routine.

use crate::candidates::compute_candidate_forms;
use crate::circuit::{equivalent_pit, Gate, SpsCircuit};
use crate::field::Scalar;
use crate::linalg::{
    make_isomorphism, span_max_independent, span_membership, span_rank, LinearForm,
};
use crate::linfactor::{eval_nonlin_at, extract_linear_factors, split_lin_nonlin, LinNonLinSplit};
use crate::mpoly::AffineForm;
use crate::oracle::{dense_interpolate, random_point, restricted_index_map, lift_form, Indeterminate, PolyOracle};
use crate::unipoly::{uni_gcd_roots, UniPoly};
use crate::vanish::{compute_vanishing_codim2, CodimTwoSpace};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::time::{Duration, Instant};

/// Tunable thresholds for the drivers.  The asymptotic quantities of the
/// underlying analysis are configuration values here; the terminal identity
/// test is always the correctness gate, so caps can only cause extra
/// failures, never wrong outputs.
#[derive(Debug, Clone)]
pub struct ReconstructionConfig {
    /// Low-rank search cap on the subset size r.
    pub r_max: usize,
    /// Minimum ordinary-line count |X| per candidate in the high-rank path.
    pub tau_x: usize,
    /// Part size when partitioning X.
    pub tau_b: usize,
    /// Target independent-set size fed to the known-factors routine
    /// (effective value is min(tau_r, available)).
    pub tau_r: usize,
    /// Trials for the final verification of every returned circuit.
    pub pit_trials: usize,
    /// Cap on enumerated independent subsets per r in the low-rank search.
    pub max_subsets_per_r: usize,
}

impl ReconstructionConfig {
    pub fn for_degree(d: usize) -> ReconstructionConfig {
        let log_d = (d.max(2) as f64).log2().ceil() as usize;
        ReconstructionConfig {
            r_max: 6,
            tau_x: 4,
            tau_b: 3,
            tau_r: 60 * log_d + 61,
            pit_trials: 40,
            max_subsets_per_r: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconStatus {
    /// A circuit was produced and passed the randomized identity test.
    Success,
    /// The driver's structural hypotheses do not hold for this input.
    NotApplicable,
    /// The search space was exhausted without a verified circuit.
    Failed,
}

/// Outcome of a driver run.
#[derive(Debug)]
pub struct ReconResult {
    pub status: ReconStatus,
    pub circuit: Option<SpsCircuit>,
    pub fan_in: Option<usize>,
    /// Oracle queries charged to the input black box.
    pub queries: u64,
    pub elapsed: Duration,
}

impl ReconResult {
    fn finish(status: ReconStatus, circuit: Option<SpsCircuit>, o: &PolyOracle, start: Instant) -> ReconResult {
        let fan_in = circuit.as_ref().map(|c| c.k());
        ReconResult {
            status,
            circuit,
            fan_in,
            queries: o.queries(),
            elapsed: start.elapsed(),
        }
    }
}

/// Evaluate scale such that o = scale·∏factors^mult at a generic point
/// (resampled); callers must already know the product structure is exact.
fn product_scale(
    o: &PolyOracle,
    factors: &[(LinearForm, usize)],
    rng: &mut impl Rng,
) -> Result<Scalar> {
    let field = o.field().clone();
    for _ in 0..64 {
        let p = random_point(&field, o.n(), rng);
        let mut denom = field.one();
        for (f, m) in factors {
            let v = f.eval(&field, &p);
            if field.is_zero(&v) {
                denom = field.zero();
                break;
            }
            denom = field.mul(&denom, &field.pow(&v, *m as u64));
        }
        if field.is_zero(&denom) {
            continue;
        }
        if let Ok(num) = o.eval(&p) {
            return field.div(&num, &denom);
        }
    }
    Err(Error::ResampleExhausted(
        "could not find a generic point for scale recovery".into(),
    ))
}

/// Extract the full split of an oracle: Some((factors, scale)) iff the
/// polynomial is exactly scale·∏factors (multiplicities summing to the
/// degree), None otherwise.
fn full_split(
    o: &PolyOracle,
    rng: &mut impl Rng,
) -> Result<Option<(Vec<(LinearForm, usize)>, Scalar)>> {
    let factors = extract_linear_factors(o, rng)?;
    let total: usize = factors.iter().map(|(_, m)| m).sum();
    if total != o.d() {
        return Ok(None);
    }
    let scale = product_scale(o, &factors, rng)?;
    Ok(Some((factors, scale)))
}

/// Verify a candidate circuit against the input and wrap it on success.
fn gate_pit(
    o: &PolyOracle,
    circuit: &SpsCircuit,
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
) -> Result<bool> {
    equivalent_pit(o, &circuit.oracle(), cfg.pit_trials.max(2), rng)
}

// ---------------------------------------------------------------------------
// Low-rank driver.
// ---------------------------------------------------------------------------

/// Enumerate independent r-subsets of the pool in lexicographic order, up
/// to `cap` subsets; prefix independence prunes the search.
fn independent_subsets(pool: &[LinearForm], r: usize, q: u64, cap: usize) -> Vec<Vec<usize>> {
    fn rec(
        pool: &[LinearForm],
        r: usize,
        q: u64,
        cap: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= cap {
            return;
        }
        if chosen.len() == r {
            out.push(chosen.clone());
            return;
        }
        for i in start..pool.len() {
            chosen.push(i);
            let forms: Vec<LinearForm> = chosen.iter().map(|&j| pool[j].clone()).collect();
            if span_rank(&forms, q) == chosen.len() {
                rec(pool, r, q, cap, i + 1, chosen, out);
            }
            chosen.pop();
            if out.len() >= cap {
                return;
            }
        }
    }
    let mut out = Vec::new();
    rec(pool, r, q, cap, 0, &mut Vec::new(), &mut out);
    out
}

/// Reconstruct by expressing the nonlinear part as an r-variate polynomial
/// h(ℓ_1,…,ℓ_r) over an independent subset of the forms spanning the
/// vanishing subspaces; r is searched in ascending order.
pub fn low_rank_reconstruct(
    o: &PolyOracle,
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
) -> Result<ReconResult> {
    let start = Instant::now();
    let field = o.field().clone();
    let q = field.q();
    let n = o.n();
    let split = split_lin_nonlin(o, rng)?;
    if split.t == 0 {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    }
    let s_set = compute_vanishing_codim2(&split.nonlin, rng)?;
    // The nonlinear part is division-backed, so restricted slices can fall
    // entirely inside a divisor hyperplane and evaluate nowhere.  When dense
    // interpolation is affordable, recover it exactly once up front; the
    // per-subset composition and restriction below then run symbolically.
    let nonlin_poly = if (split.t as u64 + 1).pow(n as u32) <= 200_000 {
        let active: Vec<usize> = (0..n).collect();
        Some(dense_interpolate(&split.nonlin, &active, split.t, rng)?)
    } else {
        None
    };
    // Pool: every form appearing in a vanishing subspace's canonical basis.
    let mut pool_set: BTreeSet<LinearForm> = BTreeSet::new();
    for space in &s_set {
        let (a, b) = space.forms();
        pool_set.insert(a.normalized(q));
        pool_set.insert(b.normalized(q));
    }
    let pool: Vec<LinearForm> = pool_set.into_iter().collect();
    if pool.is_empty() {
        return Ok(ReconResult::finish(ReconStatus::Failed, None, o, start));
    }
    let s: usize = split.lin.iter().map(|(_, m)| m).sum();
    for r in 1..=cfg.r_max.min(pool.len()) {
        for subset in independent_subsets(&pool, r, q, cfg.max_subsets_per_r) {
            let forms: Vec<LinearForm> = subset.iter().map(|&i| pool[i].clone()).collect();
            let gamma = make_isomorphism(&forms, n, q)?;
            // Coordinates outside the subset are fixed to 0; the terminal
            // identity test guards against any loss this introduces.
            let h = if let Some(p) = &nonlin_poly {
                // Exact path: compose with γ⁻¹ and zero the tail
                // coordinates symbolically.
                let subs: Vec<AffineForm> = (0..n)
                    .map(|j| {
                        let mut unit = vec![0u64; n];
                        unit[j] = 1;
                        let row = gamma.apply_form(&LinearForm::new(unit));
                        AffineForm {
                            coeffs: row.coeffs.iter().map(|&c| field.embed(c)).collect(),
                            constant: field.zero(),
                        }
                    })
                    .collect();
                let composed = p.substitute_linear(&field, &subs, n)?;
                let reduce: Vec<AffineForm> = (0..n)
                    .map(|j| {
                        if j < r {
                            AffineForm::variable(&field, r, j)
                        } else {
                            AffineForm::constant(&field, r, field.zero())
                        }
                    })
                    .collect();
                composed.substitute_linear(&field, &reduce, r)?
            } else {
                let composed = split.nonlin.compose_iso(&gamma)?;
                let mut assign = BTreeMap::new();
                for j in r..n {
                    assign.insert(j, field.zero());
                }
                let reduced = composed.restrict_vars(&assign)?;
                match reduced.zero_test(4, rng) {
                    Ok(true) => continue,
                    Ok(false) => {}
                    // The slice can sit inside a divisor hyperplane of the
                    // division-backed oracle; such subsets carry no usable
                    // information, so skip them.
                    Err(Error::ResampleExhausted(_)) => continue,
                    Err(e) => return Err(e),
                }
                let active: Vec<usize> = (0..r).collect();
                match dense_interpolate(&reduced, &active, split.t, rng) {
                    Ok(h) => h,
                    Err(_) => continue,
                }
            };
            if h.is_zero() || !h.is_homogeneous() || h.deg() != split.t {
                continue;
            }
            // One gate per monomial of h.
            let mut gates = Vec::new();
            for (mono, coeff) in &h.terms {
                let mut factors: Vec<LinearForm> = Vec::new();
                for (f, m) in &split.lin {
                    for _ in 0..*m {
                        factors.push(f.clone());
                    }
                }
                for (i, &e) in mono.0.iter().enumerate() {
                    for _ in 0..e {
                        factors.push(forms[i].clone());
                    }
                }
                gates.push(Gate {
                    coeff: field.mul(coeff, &split.scale),
                    factors,
                });
            }
            let k = gates.len();
            let bound = (o.d() - s).pow(r as u32);
            if k > bound {
                return Err(Error::Internal(format!(
                    "low-rank fan-in {k} exceeds (d−s)^r = {bound}"
                )));
            }
            let circuit = SpsCircuit::new(field.clone(), n, o.d(), gates)?;
            if gate_pit(o, &circuit, cfg, rng)? {
                return Ok(ReconResult::finish(ReconStatus::Success, Some(circuit), o, start));
            }
        }
    }
    Ok(ReconResult::finish(ReconStatus::Failed, None, o, start))
}

// ---------------------------------------------------------------------------
// Corner-case driver.
// ---------------------------------------------------------------------------

/// Corner reconstruction given precomputed split and candidate forms; used
/// directly by the high-rank driver to avoid recomputing them.
fn corner_with_candidates(
    o: &PolyOracle,
    split: &LinNonLinSplit,
    candidates: &[LinearForm],
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
    start: Instant,
) -> Result<ReconResult> {
    let field = o.field().clone();
    let q = field.q();
    let n = o.n();
    let t = split.t;
    'candidate: for ell1 in candidates {
        let phi = make_isomorphism(std::slice::from_ref(ell1), n, q)?;
        let h = split.nonlin.compose_iso(&phi)?;
        // Factors of the restriction to V(ℓ1).
        let mut zero_x1 = BTreeMap::new();
        zero_x1.insert(0usize, field.zero());
        let h0 = h.restrict_vars(&zero_x1)?;
        if h0.zero_test(4, rng)? {
            continue;
        }
        let Some((h0_factors, _)) = full_split(&h0, rng)? else {
            continue;
        };
        let index_map = restricted_index_map(n, &zero_x1);
        let lifted: Vec<LinearForm> = h0_factors
            .iter()
            .map(|(f, _)| lift_form(f, &index_map, n))
            .collect();
        let indep = span_max_independent(&lifted, q);
        if indep.len() < 2 {
            continue;
        }
        let (ell2, ell3) = (lifted[indep[0]].clone(), lifted[indep[1]].clone());
        let delta_iso = make_isomorphism(&[LinearForm::unit(n, 0), ell2, ell3], n, q)?;
        let g_full = h.compose_iso(&delta_iso)?;
        // Randomize the remaining coordinates and interpolate the
        // trivariate image; retry once on a degenerate draw.
        let mut tri = None;
        for _ in 0..2 {
            let mut assign = BTreeMap::new();
            for j in 3..n {
                assign.insert(j, field.random(rng));
            }
            let g3 = g_full.restrict_vars(&assign)?;
            let p = match dense_interpolate(&g3, &[0, 1, 2], t, rng) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let has_x3 = p.terms.keys().any(|m| m.0[2] > 0);
            if !p.is_zero() && has_x3 {
                tri = Some(p);
                break;
            }
        }
        let Some(p) = tri else { continue };
        // Substitute x2 = y·x1: bucket coefficients by (deg x1 + deg x2,
        // deg x3); buckets touching x3 give the univariate system in y.
        let mut buckets: BTreeMap<(u16, u16), Vec<Scalar>> = BTreeMap::new();
        for (mono, coeff) in &p.terms {
            let (a, b, c) = (mono.0[0], mono.0[1], mono.0[2]);
            let entry = buckets.entry((a + b, c)).or_default();
            if entry.len() <= b as usize {
                entry.resize(b as usize + 1, field.zero());
            }
            entry[b as usize] = field.add(&entry[b as usize], coeff);
        }
        let system: Vec<UniPoly> = buckets
            .iter()
            .filter(|((_, c), _)| *c > 0)
            .map(|(_, coeffs)| UniPoly::from_coeffs(&field, coeffs.clone()))
            .collect();
        if system.is_empty() || system.iter().all(|p| p.is_zero()) {
            continue;
        }
        let ys = match uni_gcd_roots(&system, &field, rng) {
            Ok(r) => r,
            Err(_) => continue,
        };
        for y0 in ys {
            // Full substitution x2 = y0·x1; the image must reduce to a
            // single monomial δ·x1^t (in particular, independent of x3).
            let mut reduced: BTreeMap<(u16, u16), Scalar> = BTreeMap::new();
            for (mono, coeff) in &p.terms {
                let (a, b, c) = (mono.0[0], mono.0[1], mono.0[2]);
                let v = field.mul(coeff, &field.pow(&y0, b as u64));
                let key = (a + b, c);
                let slot = reduced.entry(key).or_insert_with(|| field.zero());
                *slot = field.add(slot, &v);
            }
            reduced.retain(|_, v| !field.is_zero(v));
            if reduced.len() != 1 {
                continue;
            }
            let ((xd, x3d), delta) = reduced.into_iter().next().unwrap();
            if x3d != 0 || xd as usize != t {
                continue;
            }
            debug_assert!(!field.is_zero(&delta));
            // Test whether NonLin − δ·ℓ1^t is a product of linear forms.
            let nl = split.nonlin.clone();
            let f2 = field.clone();
            let l1 = ell1.clone();
            let dl = delta.clone();
            let tt = t as u64;
            let power_term = PolyOracle::new(
                n,
                t,
                field.clone(),
                "corner-power",
                Rc::new(move |pt| Ok(f2.mul(&dl, &f2.pow(&l1.eval(&f2, pt), tt)))),
            );
            let residual = nl.difference(&power_term)?;
            let Some((v_factors, v_scale)) = full_split(&residual, rng)? else {
                continue;
            };
            // Assemble: f = ∏Lin · (δ·ℓ1^t + v_scale·∏V).
            let lin_expanded: Vec<LinearForm> = split
                .lin
                .iter()
                .flat_map(|(f, m)| std::iter::repeat(f.clone()).take(*m))
                .collect();
            let mut g1 = lin_expanded.clone();
            g1.extend(std::iter::repeat(ell1.clone()).take(t));
            let mut g2 = lin_expanded;
            for (f, m) in &v_factors {
                g2.extend(std::iter::repeat(f.clone()).take(*m));
            }
            let circuit = SpsCircuit::new(
                field.clone(),
                n,
                o.d(),
                vec![
                    Gate {
                        coeff: field.mul(&delta, &split.scale),
                        factors: g1,
                    },
                    Gate {
                        coeff: field.mul(&v_scale, &split.scale),
                        factors: g2,
                    },
                ],
            )?;
            if gate_pit(o, &circuit, cfg, rng)? {
                return Ok(ReconResult::finish(ReconStatus::Success, Some(circuit), o, start));
            }
            continue 'candidate;
        }
    }
    Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start))
}

/// Reconstruct when one gate is a pure power α·ℓ^t of a single linear
/// form; iterates candidate forms and solves for the scalar.
pub fn corner_case_reconstruct(
    o: &PolyOracle,
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
) -> Result<ReconResult> {
    let start = Instant::now();
    let split = split_lin_nonlin(o, rng)?;
    if split.t == 0 {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    }
    let s_set = compute_vanishing_codim2(&split.nonlin, rng)?;
    let l = compute_candidate_forms(&split.nonlin, split.t, &s_set, rng)?;
    corner_with_candidates(o, &split, l.forms(), cfg, rng, start)
}

// ---------------------------------------------------------------------------
// Merging restricted factorizations.
// ---------------------------------------------------------------------------

/// Inputs of the merge: for each i in [r], the full linear-form split of
/// the polynomial restricted to x_i = 0, lifted back to n variables
/// (coefficient 0 at position i), normalized, with multiplicities.
#[derive(Debug, Clone)]
pub struct GlueState {
    pub q: u64,
    pub n: usize,
    pub u_sets: Vec<Vec<(LinearForm, usize)>>,
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // q prime; a ≠ 0 mod q.
    let mut result = 1u64;
    let mut base = a % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    result
}

fn zeroed_at(f: &LinearForm, i: usize) -> LinearForm {
    let mut c = f.coeffs.clone();
    c[i] = 0;
    LinearForm::new(c)
}

/// Merge the per-coordinate restricted factorizations into one multiset of
/// full forms.  Conservative: every inconsistency is a merge failure, the
/// result is never a guess — the terminal consistency check re-derives
/// every input multiset from the output.
pub fn merge_restricted_factorizations(gs: &GlueState) -> Result<Vec<(LinearForm, usize)>> {
    let r = gs.u_sets.len();
    let q = gs.q;
    if r < 2 {
        return Err(Error::Precondition("merge needs at least two restrictions".into()));
    }
    let card: Vec<usize> = gs
        .u_sets
        .iter()
        .map(|u| u.iter().map(|(_, m)| m).sum())
        .collect();
    if card.iter().any(|&c| c != card[0]) {
        return Err(Error::MergeFailure(format!(
            "restricted splits have unequal cardinalities {card:?}"
        )));
    }
    let mut merged: Vec<(LinearForm, usize)> = Vec::new();
    let mut u1: Vec<(LinearForm, usize)> = gs.u_sets[0].clone();
    'outer: while let Some((ell1, m)) = u1.first().cloned() {
        for i in 1..r {
            let target = zeroed_at(&ell1, i);
            if target.is_zero() {
                continue; // restriction degenerates; other coordinates decide
            }
            // Matches: u ∈ U_i with u|x1=0 proportional to ℓ1|xi=0.
            let mut matches: Vec<(LinearForm, usize)> = Vec::new();
            for (u, mu) in &gs.u_sets[i] {
                let u_res = zeroed_at(u, 0);
                if !u_res.is_zero() && u_res.proportional(&target, q) {
                    matches.push((u.clone(), *mu));
                }
            }
            let total: usize = matches.iter().map(|(_, mu)| mu).sum();
            if total != m {
                continue;
            }
            // Glue each match: scale u so the shared coordinates agree
            // exactly, then import the x1 coefficient.
            let pivot = target.coeffs.iter().position(|&c| c != 0).expect("nonzero");
            let mut ok = true;
            let mut glued: Vec<(LinearForm, usize)> = Vec::new();
            for (u, mu) in &matches {
                let s = target.coeffs[pivot] * inv_mod(u.coeffs[pivot], q) % q;
                let scaled = u.scaled(s, q);
                // Consistency on every coordinate outside {0, i}.
                if (0..gs.n)
                    .any(|j| j != 0 && j != i && scaled.coeffs[j] != ell1.coeffs[j])
                {
                    ok = false;
                    break;
                }
                let mut full = ell1.coeffs.clone();
                full[0] = scaled.coeffs[0];
                glued.push((LinearForm::new(full).normalized(q), *mu));
            }
            if !ok {
                continue;
            }
            merged.extend(glued);
            u1.remove(0);
            continue 'outer;
        }
        return Err(Error::MergeFailure(format!(
            "no coordinate glues {:?} with multiplicity {m}",
            ell1.coeffs
        )));
    }
    // Terminal consistency: the output reproduces every input multiset.
    for (i, u_i) in gs.u_sets.iter().enumerate() {
        let mut derived: BTreeMap<LinearForm, usize> = BTreeMap::new();
        for (f, m) in &merged {
            let res = zeroed_at(f, i).normalized(q);
            if res.is_zero() {
                return Err(Error::MergeFailure(
                    "merged form vanishes under a restriction".into(),
                ));
            }
            *derived.entry(res).or_insert(0) += m;
        }
        let mut expected: BTreeMap<LinearForm, usize> = BTreeMap::new();
        for (f, m) in u_i {
            *expected.entry(f.normalized(q)).or_insert(0) += m;
        }
        if derived != expected {
            return Err(Error::MergeFailure(format!(
                "restriction at coordinate {i} does not reproduce its input split"
            )));
        }
    }
    // Collapse duplicates.
    let mut counts: BTreeMap<LinearForm, usize> = BTreeMap::new();
    for (f, m) in merged {
        *counts.entry(f).or_insert(0) += m;
    }
    Ok(counts.into_iter().collect())
}

// ---------------------------------------------------------------------------
// Reconstruction with known gate factors.
// ---------------------------------------------------------------------------

/// Oracle for the polynomial restricted to x_i = 0 after exact division by
/// the stripped coordinate powers; evaluation works even on the stripped
/// hyperplanes via line interpolation.
fn restricted_quotient_oracle(
    g0: &PolyOracle,
    strip: &[(LinearForm, usize)],
    i: usize,
    seed: u64,
) -> PolyOracle {
    let field = g0.field().clone();
    let n = g0.n();
    let total: usize = strip.iter().map(|(_, m)| m).sum();
    let inner = g0.clone();
    let strip = strip.to_vec();
    let cell = RefCell::new(ChaCha12Rng::seed_from_u64(seed));
    let f2 = field.clone();
    PolyOracle::new(
        n - 1,
        g0.d() - total,
        field,
        "restricted-quotient",
        Rc::new(move |p| {
            let mut full = Vec::with_capacity(n);
            let mut it = p.iter();
            for j in 0..n {
                if j == i {
                    full.push(f2.zero());
                } else {
                    full.push(it.next().expect("arity").clone());
                }
            }
            let mut rng = cell.borrow_mut();
            eval_nonlin_at(&inner, &strip, &full, &mut *rng).map_err(|_| Indeterminate)
        }),
    )
}

/// Rebuild the circuit given r ≥ 2 independent linear forms that all
/// divide the same multiplication gate.
pub fn reconstruct_with_known_gate_factors(
    o: &PolyOracle,
    ys: &[LinearForm],
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
) -> Result<ReconResult> {
    let start = Instant::now();
    let field = o.field().clone();
    let q = field.q();
    let n = o.n();
    let r = ys.len();
    if r < 2 {
        return Err(Error::Precondition("need at least two known factors".into()));
    }
    if span_rank(ys, q) != r {
        return Err(Error::Precondition("known factors must be independent".into()));
    }
    // Coordinate powers to strip: multiplicity of each y_i as a linear
    // factor of f itself.
    let f_factors = extract_linear_factors(o, rng)?;
    let phi = make_isomorphism(ys, n, q)?;
    let g0 = o.compose_iso(&phi)?;
    let mut strip: Vec<(LinearForm, usize)> = Vec::new();
    for (i, y) in ys.iter().enumerate() {
        let norm = y.normalized(q);
        let e = f_factors
            .iter()
            .find(|(f, _)| *f == norm)
            .map(|(_, m)| *m)
            .unwrap_or(0);
        if e > 0 {
            strip.push((LinearForm::unit(n, i), e));
        }
    }
    let stripped_total: usize = strip.iter().map(|(_, m)| m).sum();
    let g = if strip.is_empty() {
        g0.clone()
    } else {
        g0.divide_by_linear_factors(&strip, field.one())?
    };
    // Per-coordinate restricted splits.
    let mut u_sets: Vec<Vec<(LinearForm, usize)>> = Vec::new();
    for i in 0..r {
        let gi = if strip.is_empty() {
            let mut a = BTreeMap::new();
            a.insert(i, field.zero());
            g.restrict_vars(&a)?
        } else {
            restricted_quotient_oracle(&g0, &strip, i, rng.gen())
        };
        if gi.zero_test(6, rng)? {
            return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
        }
        let Some((factors, _)) = full_split(&gi, rng)? else {
            return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
        };
        let mut a = BTreeMap::new();
        a.insert(i, field.zero());
        let index_map = restricted_index_map(n, &a);
        u_sets.push(
            factors
                .iter()
                .map(|(f, m)| (lift_form(f, &index_map, n).normalized(q), *m))
                .collect(),
        );
    }
    let gs = GlueState { q, n, u_sets };
    let u = match merge_restricted_factorizations(&gs) {
        Ok(u) => u,
        Err(Error::MergeFailure(_)) => {
            return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start))
        }
        Err(e) => return Err(e),
    };
    // Scalar α: at a generic point of the hyperplane x1 = 0, g equals
    // α·∏U (the gate containing x1 vanishes there).
    let mut alpha = None;
    for _ in 0..64 {
        let mut p = random_point(&field, n, rng);
        p[0] = field.zero();
        let mut denom = field.one();
        for (f, m) in &u {
            let v = f.eval(&field, &p);
            if field.is_zero(&v) {
                denom = field.zero();
                break;
            }
            denom = field.mul(&denom, &field.pow(&v, *m as u64));
        }
        if field.is_zero(&denom) {
            continue;
        }
        let val = if strip.is_empty() {
            match g.eval(&p) {
                Ok(v) => v,
                Err(_) => continue,
            }
        } else {
            match eval_nonlin_at(&g0, &strip, &p, rng) {
                Ok(v) => v,
                Err(_) => continue,
            }
        };
        alpha = Some(field.div(&val, &denom)?);
        break;
    }
    let Some(alpha) = alpha else {
        return Err(Error::ResampleExhausted("alpha recovery failed".into()));
    };
    if field.is_zero(&alpha) {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    }
    // Residual g − α·∏U must be the other gate: a full product of forms.
    let f2 = field.clone();
    let u2 = u.clone();
    let a2 = alpha.clone();
    let gate_u_oracle = PolyOracle::new(
        n,
        g.d(),
        field.clone(),
        "merged-gate",
        Rc::new(move |p| {
            let mut acc = a2.clone();
            for (f, m) in &u2 {
                acc = f2.mul(&acc, &f2.pow(&f.eval(&f2, p), *m as u64));
            }
            Ok(acc)
        }),
    );
    let residual = g.difference(&gate_u_oracle)?;
    let Some((v, beta)) = full_split(&residual, rng)? else {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    };
    if field.is_zero(&beta) {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    }
    // Back to the original coordinates: f = ∏y_i^{e_i}·(α∏U + β∏V).
    let mut shared: Vec<LinearForm> = Vec::new();
    for (f, m) in &strip {
        let y = phi.unapply_form(f);
        shared.extend(std::iter::repeat(y).take(*m));
    }
    let expand = |ms: &[(LinearForm, usize)]| -> Vec<LinearForm> {
        let mut out = shared.clone();
        for (f, m) in ms {
            let orig = phi.unapply_form(f);
            out.extend(std::iter::repeat(orig).take(*m));
        }
        out
    };
    debug_assert_eq!(
        stripped_total + g.d(),
        o.d(),
        "stripped powers and quotient degree must sum to d"
    );
    let circuit = SpsCircuit::new(
        field.clone(),
        n,
        o.d(),
        vec![
            Gate {
                coeff: alpha,
                factors: expand(&u),
            },
            Gate {
                coeff: beta,
                factors: expand(&v),
            },
        ],
    )?;
    if gate_pit(o, &circuit, cfg, rng)? {
        Ok(ReconResult::finish(ReconStatus::Success, Some(circuit), o, start))
    } else {
        Ok(ReconResult::finish(ReconStatus::Failed, None, o, start))
    }
}

// ---------------------------------------------------------------------------
// High-rank driver.
// ---------------------------------------------------------------------------

/// Full reconstruction for high-rank inputs: corner path first, then the
/// candidate-form search feeding the known-factors routine.
pub fn high_rank_reconstruct(
    o: &PolyOracle,
    cfg: &ReconstructionConfig,
    rng: &mut impl Rng,
) -> Result<ReconResult> {
    let start = Instant::now();
    let field = o.field().clone();
    let q = field.q();
    let split = split_lin_nonlin(o, rng)?;
    if split.t == 0 {
        return Ok(ReconResult::finish(ReconStatus::NotApplicable, None, o, start));
    }
    let s_set = compute_vanishing_codim2(&split.nonlin, rng)?;
    let l = compute_candidate_forms(&split.nonlin, split.t, &s_set, rng)?;
    // Corner structure is handled first.
    let corner = corner_with_candidates(o, &split, l.forms(), cfg, rng, start)?;
    if corner.status == ReconStatus::Success {
        return Ok(corner);
    }
    let forms = l.forms();
    for ell in forms {
        // Ordinary partners of ℓ within L: sp{ℓ, ℓ′} meets L only in the
        // two generators.
        let mut partners: Vec<LinearForm> = Vec::new();
        'partner: for other in forms {
            if other == ell || other.proportional(ell, q) {
                continue;
            }
            let pair = [ell.clone(), other.clone()];
            for third in forms {
                if third == ell || third == other {
                    continue;
                }
                if span_membership(&pair, third, q) {
                    continue 'partner;
                }
            }
            partners.push(other.clone());
        }
        let indep = span_max_independent(&partners, q);
        let x_set: Vec<LinearForm> = indep.iter().map(|&i| partners[i].clone()).collect();
        if x_set.len() < cfg.tau_x {
            continue;
        }
        for part in x_set.chunks(cfg.tau_b) {
            // Split the part by whether the nonlinear part vanishes on
            // V(ℓ, ℓ′): vanishing partners divide the opposite gate.
            let mut side_vanish: Vec<LinearForm> = Vec::new();
            let mut side_other: Vec<LinearForm> = Vec::new();
            for lp in part {
                let space = CodimTwoSpace::new(ell, lp, q)?;
                if s_set.contains(&space) {
                    side_vanish.push(lp.clone());
                } else {
                    side_other.push(lp.clone());
                }
            }
            let larger = if side_vanish.len() >= side_other.len() {
                side_vanish
            } else {
                side_other
            };
            if larger.len() < 2 {
                continue;
            }
            let take = cfg.tau_r.min(larger.len());
            let ys = &larger[..take];
            match reconstruct_with_known_gate_factors(o, ys, cfg, rng) {
                Ok(res) if res.status == ReconStatus::Success => {
                    // Report elapsed for the whole driver run, not just the
                    // final rebuild phase.
                    return Ok(ReconResult {
                        elapsed: start.elapsed(),
                        ..res
                    });
                }
                Ok(_) => continue,
                Err(Error::MergeFailure(_)) | Err(Error::ResampleExhausted(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ReconResult::finish(ReconStatus::Failed, None, o, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{decompose, random_instance, structural_match, InstanceMode};
    use crate::field::Field;
    use crate::mpoly::DensePoly;
    use std::rc::Rc;

    fn form(v: Vec<u64>) -> LinearForm {
        LinearForm::new(v)
    }

    fn product_oracle(field: &Rc<Field>, n: usize, forms: &[LinearForm]) -> PolyOracle {
        let mut p = DensePoly::constant(field, n, field.one());
        for f in forms {
            p = p.mul(field, &DensePoly::from_linear(field, f));
        }
        PolyOracle::from_dense(field.clone(), p)
    }

    #[test]
    fn merge_trivial_shared_form() {
        let gs = GlueState {
            q: 5,
            n: 4,
            u_sets: vec![
                vec![(form(vec![0, 0, 1, 0]), 1)],
                vec![(form(vec![0, 0, 1, 0]), 1)],
            ],
        };
        let u = merge_restricted_factorizations(&gs).unwrap();
        assert_eq!(u, vec![(form(vec![0, 0, 1, 0]), 1)]);
    }

    #[test]
    fn merge_recovers_planted_multiset() {
        let q = 7;
        let n = 5;
        let truth = vec![
            (form(vec![1, 2, 3, 0, 1]), 1),
            (form(vec![2, 1, 0, 1, 1]), 2),
            (form(vec![0, 0, 1, 1, 0]), 1),
        ];
        let restrict = |i: usize| -> Vec<(LinearForm, usize)> {
            truth
                .iter()
                .map(|(f, m)| (zeroed_at(f, i).normalized(q), *m))
                .collect()
        };
        let gs = GlueState {
            q,
            n,
            u_sets: vec![restrict(0), restrict(1), restrict(2)],
        };
        let mut u = merge_restricted_factorizations(&gs).unwrap();
        u.sort();
        let mut expected: Vec<(LinearForm, usize)> = truth
            .iter()
            .map(|(f, m)| (f.normalized(q), *m))
            .collect();
        expected.sort();
        assert_eq!(u, expected);
    }

    #[test]
    fn merge_rejects_inconsistent_multisets() {
        let q = 7;
        let n = 5;
        let truth = vec![
            (form(vec![1, 2, 3, 0, 1]), 1),
            (form(vec![2, 1, 0, 1, 1]), 1),
        ];
        let restrict = |i: usize| -> Vec<(LinearForm, usize)> {
            truth
                .iter()
                .map(|(f, m)| (zeroed_at(f, i).normalized(q), *m))
                .collect()
        };
        let mut bad = restrict(1);
        bad[0].0 = form(vec![1, 0, 1, 1, 1]); // corrupt one entry
        let gs = GlueState {
            q,
            n,
            u_sets: vec![restrict(0), bad],
        };
        assert!(matches!(
            merge_restricted_factorizations(&gs),
            Err(Error::MergeFailure(_))
        ));
    }

    #[test]
    fn known_factors_toy_r2() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        // f = x1x2x3 + x4x5x6; known factors x1, x2 of the first gate.
        let t1 = product_oracle(
            &field,
            6,
            &[
                form(vec![1, 0, 0, 0, 0, 0]),
                form(vec![0, 1, 0, 0, 0, 0]),
                form(vec![0, 0, 1, 0, 0, 0]),
            ],
        );
        let t2 = product_oracle(
            &field,
            6,
            &[
                form(vec![0, 0, 0, 1, 0, 0]),
                form(vec![0, 0, 0, 0, 1, 0]),
                form(vec![0, 0, 0, 0, 0, 1]),
            ],
        );
        let f = t1.difference(&t2).unwrap();
        let cfg = ReconstructionConfig::for_degree(3);
        let ys = vec![form(vec![1, 0, 0, 0, 0, 0]), form(vec![0, 1, 0, 0, 0, 0])];
        let res = reconstruct_with_known_gate_factors(&f, &ys, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::Success);
        let c = res.circuit.unwrap();
        assert_eq!(c.k(), 2);
        assert!(equivalent_pit(&f, &c.oracle(), 40, &mut rng).unwrap());
    }

    #[test]
    fn known_factors_roundtrip_on_generated_instance() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let field = Rc::new(Field::extension(13, 6, &mut rng).unwrap());
        let inst = random_instance(8, 4, &field, 8, InstanceMode::General, &mut rng).unwrap();
        let cfg = ReconstructionConfig::for_degree(4);
        // Feed independent factors of gate 1 from the ground truth.
        let q = 13;
        let gate1: Vec<LinearForm> = inst.truth.t1.clone();
        let idx = span_max_independent(&gate1, q);
        assert!(idx.len() >= 2);
        let ys: Vec<LinearForm> = idx.iter().map(|&i| gate1[i].clone()).collect();
        let res =
            reconstruct_with_known_gate_factors(&inst.oracle, &ys, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::Success);
        let c = res.circuit.unwrap();
        let got = decompose(&c).unwrap();
        assert!(structural_match(&got, &inst.truth));
    }

    #[test]
    fn low_rank_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let inst = random_instance(6, 3, &field, 5, InstanceMode::LowRank, &mut rng).unwrap();
        let cfg = ReconstructionConfig::for_degree(3);
        let res = low_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::Success);
        let c = res.circuit.unwrap();
        assert!(equivalent_pit(&inst.oracle, &c.oracle(), 40, &mut rng).unwrap());
        let s: usize = 0; // generated low-rank instances have no shared linear part by construction here
        let _ = s;
        assert!(c.k() <= 3usize.pow(5));
    }

    #[test]
    fn low_rank_pure_product_not_applicable() {
        let mut rng = ChaCha12Rng::seed_from_u64(44);
        let field = Rc::new(Field::extension(5, 9, &mut rng).unwrap());
        let f = product_oracle(
            &field,
            5,
            &[
                form(vec![1, 0, 0, 0, 0]),
                form(vec![0, 1, 1, 0, 0]),
                form(vec![0, 0, 0, 1, 4]),
            ],
        );
        let cfg = ReconstructionConfig::for_degree(3);
        let res = low_rank_reconstruct(&f, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::NotApplicable);
    }

    #[test]
    fn corner_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(45);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let inst = random_instance(6, 4, &field, 5, InstanceMode::Corner, &mut rng).unwrap();
        let cfg = ReconstructionConfig::for_degree(4);
        let res = corner_case_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::Success);
        let c = res.circuit.unwrap();
        assert!(equivalent_pit(&inst.oracle, &c.oracle(), 40, &mut rng).unwrap());
        let got = decompose(&c).unwrap();
        assert!(structural_match(&got, &inst.truth));
    }

    #[test]
    fn high_rank_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(46);
        let field = Rc::new(Field::extension(13, 6, &mut rng).unwrap());
        let inst = random_instance(8, 4, &field, 8, InstanceMode::General, &mut rng).unwrap();
        let cfg = ReconstructionConfig::for_degree(4);
        let res = high_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        assert_eq!(res.status, ReconStatus::Success);
        let c = res.circuit.unwrap();
        assert!(equivalent_pit(&inst.oracle, &c.oracle(), 40, &mut rng).unwrap());
        let got = decompose(&c).unwrap();
        assert!(structural_match(&got, &inst.truth));
    }
}
