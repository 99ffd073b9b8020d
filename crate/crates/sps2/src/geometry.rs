//! Ordinary-line computations on projective point sets over F_q.
//!
//! A *proper set* stores pairwise non-proportional nonzero points.  A line
//! sp{t,s} is *ordinary* from an anchor t into a proper set S when it meets
//! S in no point besides (scalar multiples of) t and s.  Two executable
//! bounds accompany the definitions: a witness anchor whose ordinary lines
//! span at least dim(sp S)/(log₂|S| + 2) dimensions, and the dichotomy that
//! an independent set T with no ordinary lines into S has |T| ≤ log₂|S| + 1.
//! Logarithms are base 2 throughout.

use crate::linalg::{rank_of, rref, LinearForm};
use crate::{Error, Result};

/// A set of projectively normalized nonzero points in F_q^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperSet {
    pub q: u64,
    pub n: usize,
    points: Vec<Vec<u64>>,
}

/// Normalize a point so its first nonzero coordinate is 1.
fn normalize_point(p: &[u64], q: u64) -> Option<Vec<u64>> {
    let form = LinearForm::new(p.to_vec());
    if form.is_zero() {
        return None;
    }
    Some(form.normalized(q).coeffs)
}

impl ProperSet {
    /// Build from arbitrary points: zero points are rejected, proportional
    /// duplicates collapse to one representative.
    pub fn new(q: u64, n: usize, points: &[Vec<u64>]) -> Result<ProperSet> {
        let mut norm: Vec<Vec<u64>> = Vec::new();
        for p in points {
            if p.len() != n {
                return Err(Error::ArityMismatch(format!(
                    "point has {} coordinates, expected {n}",
                    p.len()
                )));
            }
            let Some(v) = normalize_point(p, q) else {
                return Err(Error::Precondition("zero point in proper set".into()));
            };
            if !norm.contains(&v) {
                norm.push(v);
            }
        }
        Ok(ProperSet { q, n, points: norm })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }

    /// Dimension of the linear span of the set.
    pub fn span_dim(&self) -> usize {
        rank_of(&self.points, self.q)
    }
}

/// Canonical key for a 2-dimensional span: its reduced row echelon rows.
fn canonical_span(a: &[u64], b: &[u64], q: u64) -> Vec<Vec<u64>> {
    let (rows, _) = rref(&[a.to_vec(), b.to_vec()], q);
    rows
}

/// Set of ordinary lines from one anchor, stored as canonical 2×n echelon
/// pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinaryLineSet {
    pub spans: Vec<Vec<Vec<u64>>>,
}

impl OrdinaryLineSet {
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Dimension of the sum of all the 2-dimensional spans.
    pub fn union_span_dim(&self, q: u64) -> usize {
        let rows: Vec<Vec<u64>> = self.spans.iter().flatten().cloned().collect();
        rank_of(&rows, q)
    }
}

/// All ordinary lines from anchor t into S, by exhaustive pairwise rank
/// scan: sp{t,s} is kept iff no third member of S lies on it.
pub fn ordinary_lines(t: &[u64], s_set: &ProperSet) -> Result<OrdinaryLineSet> {
    let q = s_set.q;
    let Some(t_norm) = normalize_point(t, q) else {
        return Err(Error::Precondition("zero anchor for ordinary lines".into()));
    };
    let mut spans: Vec<Vec<Vec<u64>>> = Vec::new();
    for s in s_set.points() {
        if rank_of(&[t_norm.clone(), s.clone()], q) < 2 {
            continue; // s proportional to the anchor: no line
        }
        let mut ordinary = true;
        for other in s_set.points() {
            if other == s || *other == t_norm {
                continue;
            }
            if rank_of(&[t_norm.clone(), s.clone(), other.clone()], q) == 2 {
                ordinary = false;
                break;
            }
        }
        if ordinary {
            let key = canonical_span(&t_norm, s, q);
            if !spans.contains(&key) {
                spans.push(key);
            }
        }
    }
    Ok(OrdinaryLineSet { spans })
}

pub fn log2(x: usize) -> f64 {
    (x as f64).log2()
}

/// The anchor t ∈ T whose ordinary lines into S span the largest space,
/// with that dimension.  The accompanying bound states that the returned
/// dimension is at least dim(sp S)/(log₂|S| + 2) whenever T is an
/// independent set of size ≥ log₂|S| + 2.
pub fn prop2_witness(s_set: &ProperSet, t_set: &ProperSet) -> Result<(Vec<u64>, usize)> {
    if t_set.span_dim() != t_set.len() {
        return Err(Error::Precondition("anchor set T must be independent".into()));
    }
    if (t_set.len() as f64) < log2(s_set.len()) + 2.0 {
        return Err(Error::Precondition(format!(
            "need |T| ≥ log₂|S| + 2 = {:.2}, got {}",
            log2(s_set.len()) + 2.0,
            t_set.len()
        )));
    }
    let mut best: Option<(Vec<u64>, usize)> = None;
    for t in t_set.points() {
        let lines = ordinary_lines(t, s_set)?;
        let dim = lines.union_span_dim(s_set.q);
        if best.as_ref().map_or(true, |(_, b)| dim > *b) {
            best = Some((t.clone(), dim));
        }
    }
    best.ok_or_else(|| Error::Precondition("empty anchor set".into()))
}

/// Always-true dichotomy: either some anchor in T has an ordinary line into
/// S, or T is small (|T| ≤ log₂|S| + 1).
pub fn ordinary_free_bound_check(s_set: &ProperSet, t_set: &ProperSet) -> Result<bool> {
    if s_set.is_empty() {
        return Err(Error::Precondition("S must be nonempty".into()));
    }
    if t_set.span_dim() != t_set.len() {
        return Err(Error::Precondition("anchor set T must be independent".into()));
    }
    for t in t_set.points() {
        if !ordinary_lines(t, s_set)?.is_empty() {
            return Ok(true);
        }
    }
    Ok((t_set.len() as f64) <= log2(s_set.len()) + 1.0)
}
