//! Candidate linear forms derived from the codimension-2 vanishing set.
//!
//! A normalized form ℓ is a candidate when (1) it spans the intersection of
//! the spans of two distinct vanishing subspaces and (2) the nonlinear part
//! restricted to the hyperplane V(ℓ) is a nonzero product of base-field
//! linear forms.  The module also provides the definitional brute force
//! over all normalized forms and the ground-truth partition of a candidate
//! set used by the structural tests.

use crate::linalg::{intersect_two_planes, make_isomorphism, span_rank, LinearForm, PlaneIntersection};
use crate::linfactor::extract_linear_factors;
use crate::oracle::PolyOracle;
use crate::vanish::CodimTwoSpace;
use crate::{Error, Result};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Trials for the nonzero check on the restricted oracle.
const RESTRICT_ZERO_TRIALS: usize = 12;

/// The candidate linear forms, with the generating pair of vanishing
/// subspaces retained per form for diagnostics.  Equality ignores
/// provenance.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    forms: Vec<LinearForm>,
    provenance: BTreeMap<LinearForm, (CodimTwoSpace, CodimTwoSpace)>,
}

impl PartialEq for CandidateSet {
    fn eq(&self, other: &CandidateSet) -> bool {
        self.forms == other.forms
    }
}
impl Eq for CandidateSet {}

impl CandidateSet {
    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn contains(&self, ell: &LinearForm, q: u64) -> bool {
        let norm = ell.normalized(q);
        self.forms.binary_search(&norm).is_ok()
    }

    /// The pair of vanishing subspaces whose span intersection produced the
    /// form (first pair encountered).
    pub fn provenance(&self, ell: &LinearForm) -> Option<&(CodimTwoSpace, CodimTwoSpace)> {
        self.provenance.get(ell)
    }
}

/// Does the nonlinear part restricted to V(ℓ) survive and split into
/// exactly `t` base-field linear factors (with multiplicity)?
pub fn restricts_to_split_product(
    nonlin: &PolyOracle,
    t: usize,
    ell: &LinearForm,
    rng: &mut impl Rng,
) -> Result<bool> {
    let field = nonlin.field().clone();
    let q = field.q();
    let iso = make_isomorphism(&[ell.clone()], nonlin.n(), q)?;
    let mut assignment = BTreeMap::new();
    assignment.insert(0, field.zero());
    let restricted = nonlin.compose_iso(&iso)?.restrict_vars(&assignment)?;
    // A division-backed oracle is indeterminate on its divisor hyperplanes;
    // when ℓ lies on one, the restriction cannot be evaluated anywhere and
    // every probe starves.  Treat that as a failed test rather than an
    // error: such a form is dropped, never silently accepted.
    match restricted.zero_test(RESTRICT_ZERO_TRIALS, rng) {
        Ok(true) => return Ok(false),
        Ok(false) => {}
        Err(Error::ResampleExhausted(_)) => return Ok(false),
        Err(e) => return Err(e),
    }
    // A homogeneous restriction is either identically zero or has degree
    // exactly t, so a full split is equivalent to multiplicities summing
    // to t.
    match extract_linear_factors(&restricted, rng) {
        Ok(factors) => Ok(factors.iter().map(|(_, m)| m).sum::<usize>() == t),
        Err(Error::ResampleExhausted(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Build the candidate set from the vanishing subspaces: one form per pair
/// of subspaces with a one-dimensional span intersection, filtered by the
/// restricted-splitting test.
pub fn compute_candidate_forms(
    nonlin: &PolyOracle,
    t: usize,
    s_set: &BTreeSet<CodimTwoSpace>,
    rng: &mut impl Rng,
) -> Result<CandidateSet> {
    let q = nonlin.field().q();
    let spaces: Vec<&CodimTwoSpace> = s_set.iter().collect();
    let mut provenance: BTreeMap<LinearForm, (CodimTwoSpace, CodimTwoSpace)> = BTreeMap::new();
    let mut seen: BTreeSet<LinearForm> = BTreeSet::new();
    for (i, a) in spaces.iter().enumerate() {
        for b in spaces.iter().skip(i + 1) {
            let (a1, a2) = a.forms();
            let (b1, b2) = b.forms();
            if let PlaneIntersection::Line(ell) = intersect_two_planes(a1, a2, b1, b2, q)? {
                let norm = ell.normalized(q);
                if seen.insert(norm.clone()) {
                    provenance.insert(norm, ((*a).clone(), (*b).clone()));
                }
            }
        }
    }
    let mut forms = Vec::new();
    let mut kept_provenance = BTreeMap::new();
    for ell in seen {
        if restricts_to_split_product(nonlin, t, &ell, rng)? {
            if let Some(pair) = provenance.remove(&ell) {
                kept_provenance.insert(ell.clone(), pair);
            }
            forms.push(ell);
        }
    }
    forms.sort();
    let bound = s_set.len() * s_set.len();
    if forms.len() > bound {
        return Err(Error::Internal(format!(
            "candidate count {} exceeds |S|² = {bound}",
            forms.len()
        )));
    }
    Ok(CandidateSet {
        forms,
        provenance: kept_provenance,
    })
}

/// Enumerate every normalized nonzero form of F_q^n.
pub fn all_normalized_forms(n: usize, q: u64) -> Vec<LinearForm> {
    let mut out = BTreeSet::new();
    let total = q.pow(n as u32);
    for idx in 1..total {
        let mut v = vec![0u64; n];
        let mut rem = idx;
        for c in v.iter_mut() {
            *c = rem % q;
            rem /= q;
        }
        out.insert(LinearForm::new(v).normalized(q));
    }
    out.into_iter().collect()
}

/// Definitional brute force: test both defining conditions for every
/// normalized form of the space.  Gated to small q^n.
pub fn definitional_candidate_forms(
    nonlin: &PolyOracle,
    t: usize,
    s_set: &BTreeSet<CodimTwoSpace>,
    rng: &mut impl Rng,
) -> Result<CandidateSet> {
    let q = nonlin.field().q();
    let n = nonlin.n();
    if q.pow(n as u32) > 1_000_000 {
        return Err(Error::ConfigGate(
            "definitional candidate scan enumerates q^n forms".into(),
        ));
    }
    let spaces: Vec<&CodimTwoSpace> = s_set.iter().collect();
    let mut forms = Vec::new();
    let mut provenance = BTreeMap::new();
    'forms: for ell in all_normalized_forms(n, q) {
        for (i, a) in spaces.iter().enumerate() {
            for b in spaces.iter().skip(i + 1) {
                let (a1, a2) = a.forms();
                let (b1, b2) = b.forms();
                let hit = matches!(
                    intersect_two_planes(a1, a2, b1, b2, q)?,
                    PlaneIntersection::Line(v) if v == ell
                );
                if hit && restricts_to_split_product(nonlin, t, &ell, rng)? {
                    provenance.insert(ell.clone(), ((*a).clone(), (*b).clone()));
                    forms.push(ell);
                    continue 'forms;
                }
            }
        }
    }
    forms.sort();
    Ok(CandidateSet { forms, provenance })
}

/// Ground-truth partition of a candidate set against a known gate
/// factorization.
#[derive(Debug, Clone)]
pub struct CandidatePartition {
    /// Candidates dividing the product of the two gates.
    pub good: Vec<LinearForm>,
    /// Candidates dividing neither gate.
    pub bad: Vec<LinearForm>,
    /// Gate factors missed by the candidate set entirely.
    pub others: Vec<LinearForm>,
    /// Linear factors of the gate sum (supplied by the caller).
    pub factors: Vec<LinearForm>,
}

impl CandidatePartition {
    pub fn good_dim(&self, q: u64) -> usize {
        span_rank(&self.good, q)
    }
    pub fn bad_dim(&self, q: u64) -> usize {
        span_rank(&self.bad, q)
    }
    pub fn others_dim(&self, q: u64) -> usize {
        span_rank(&self.others, q)
    }
    pub fn factors_dim(&self, q: u64) -> usize {
        span_rank(&self.factors, q)
    }
}

/// Split a candidate set by the known gate factors (union of both gates'
/// factor lists, duplicates allowed) and the known linear factors of the
/// gate sum.
pub fn partition_candidates(
    l: &CandidateSet,
    gate_factors: &[LinearForm],
    sum_factors: &[LinearForm],
    q: u64,
) -> CandidatePartition {
    let gate_set: BTreeSet<LinearForm> =
        gate_factors.iter().map(|f| f.normalized(q)).collect();
    let cand_set: BTreeSet<LinearForm> = l.forms.iter().cloned().collect();
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for ell in &l.forms {
        if gate_set.contains(ell) {
            good.push(ell.clone());
        } else {
            bad.push(ell.clone());
        }
    }
    let others: Vec<LinearForm> = gate_set
        .iter()
        .filter(|g| !cand_set.contains(*g))
        .cloned()
        .collect();
    let factors: Vec<LinearForm> = sum_factors
        .iter()
        .map(|f| f.normalized(q))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    CandidatePartition {
        good,
        bad,
        others,
        factors,
    }
}
