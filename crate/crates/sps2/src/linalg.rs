//! Linear forms over F_q and exact linear algebra: rank/span queries,
//! intersection of two planes, and invertible variable changes.
//!
//! Projective normalization is "first nonzero coefficient = 1"; all
//! membership-up-to-scalar questions reduce to exact equality of normalized
//! forms.

use crate::field::{addq, invq, mulq, negq, subq, Field, Scalar};
use crate::{Error, Result};
use rand::Rng;

/// A homogeneous linear form: a coefficient vector of length n over F_q.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinearForm {
    pub coeffs: Vec<u64>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<u64>) -> Self {
        LinearForm { coeffs }
    }

    /// The i-th unit form x_{i+1}.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut c = vec![0; n];
        c[i] = 1;
        LinearForm { coeffs: c }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Projectively normalized copy: first nonzero coefficient scaled to 1.
    pub fn normalized(&self, q: u64) -> LinearForm {
        match self.coeffs.iter().position(|&c| c != 0) {
            None => self.clone(),
            Some(i) => {
                let inv = invq(self.coeffs[i], q);
                LinearForm {
                    coeffs: self.coeffs.iter().map(|&c| mulq(c, inv, q)).collect(),
                }
            }
        }
    }

    /// Split into (normalized form, leading scalar): self = scalar·normalized.
    pub fn normalized_with_scalar(&self, q: u64) -> (LinearForm, u64) {
        match self.coeffs.iter().position(|&c| c != 0) {
            None => (self.clone(), 0),
            Some(i) => (self.normalized(q), self.coeffs[i]),
        }
    }

    pub fn scaled(&self, c: u64, q: u64) -> LinearForm {
        LinearForm {
            coeffs: self.coeffs.iter().map(|&x| mulq(x, c, q)).collect(),
        }
    }

    pub fn add(&self, other: &LinearForm, q: u64) -> LinearForm {
        LinearForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| addq(a, b, q))
                .collect(),
        }
    }

    pub fn sub(&self, other: &LinearForm, q: u64) -> LinearForm {
        LinearForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| subq(a, b, q))
                .collect(),
        }
    }

    /// Equality up to a nonzero scalar.
    pub fn proportional(&self, other: &LinearForm, q: u64) -> bool {
        self.normalized(q) == other.normalized(q)
    }

    /// Evaluate at a point of F_{q^k}^n.
    pub fn eval(&self, field: &Field, point: &[Scalar]) -> Scalar {
        debug_assert_eq!(point.len(), self.coeffs.len());
        let mut acc = field.zero();
        for (c, p) in self.coeffs.iter().zip(point) {
            if *c != 0 {
                acc = field.add(&acc, &field.scale_base(p, *c));
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Row reduction and span queries over F_q.
// ---------------------------------------------------------------------------

/// Reduced row echelon form; returns (rref rows with zero rows dropped,
/// pivot column indices).
pub fn rref(rows: &[Vec<u64>], q: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        // Find a pivot at or below row r.
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = invq(m[r][c], q);
        for x in m[r].iter_mut() {
            *x = mulq(*x, inv, q);
        }
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..ncols {
                    let s = mulq(f, m[r][j], q);
                    m[i][j] = subq(m[i][j], s, q);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank_of(rows: &[Vec<u64>], q: u64) -> usize {
    rref(rows, q).0.len()
}

pub fn span_rank(forms: &[LinearForm], q: u64) -> usize {
    let rows: Vec<Vec<u64>> = forms.iter().map(|f| f.coeffs.clone()).collect();
    rank_of(&rows, q)
}

/// A canonical basis (rref rows) of the span.
pub fn span_basis(forms: &[LinearForm], q: u64) -> Vec<LinearForm> {
    let rows: Vec<Vec<u64>> = forms.iter().map(|f| f.coeffs.clone()).collect();
    rref(&rows, q).0.into_iter().map(LinearForm::new).collect()
}

/// Is v in the span of the given forms?
pub fn span_membership(forms: &[LinearForm], v: &LinearForm, q: u64) -> bool {
    let base = span_rank(forms, q);
    let mut all: Vec<LinearForm> = forms.to_vec();
    all.push(v.clone());
    span_rank(&all, q) == base
}

/// Greedy maximal independent subset in input order; returns indices.
pub fn span_max_independent(forms: &[LinearForm], q: u64) -> Vec<usize> {
    let mut chosen: Vec<LinearForm> = Vec::new();
    let mut idx = Vec::new();
    for (i, f) in forms.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        if !span_membership(&chosen, f, q) {
            chosen.push(f.clone());
            idx.push(i);
        }
    }
    idx
}

/// Complete an independent list to a basis of F_q^n using the
/// lexicographically first unit vectors that keep independence.
pub fn span_complete_basis(forms: &[LinearForm], n: usize, q: u64) -> Result<Vec<LinearForm>> {
    let mut out: Vec<LinearForm> = forms.to_vec();
    if span_rank(&out, q) != out.len() {
        return Err(Error::Precondition("forms are dependent".into()));
    }
    for i in 0..n {
        if out.len() == n {
            break;
        }
        let e = LinearForm::unit(n, i);
        if !span_membership(&out, &e, q) {
            out.push(e);
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}

/// Basis of the right nullspace {x : A·x = 0} of an m×n matrix.
pub fn nullspace_basis(rows: &[Vec<u64>], q: u64) -> Vec<Vec<u64>> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let (r, pivots) = rref(rows, q);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![0u64; ncols];
        v[fc] = 1;
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = negq(r[ri][fc], q);
        }
        basis.push(v);
    }
    basis
}

/// Inverse of a square matrix, or None if singular.
pub fn invert_matrix(mat: &[Vec<u64>], q: u64) -> Option<Vec<Vec<u64>>> {
    let n = mat.len();
    let mut aug: Vec<Vec<u64>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u64::from(j == i)));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, q);
    aug = r;
    if pivots != (0..n).collect::<Vec<_>>() {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

// ---------------------------------------------------------------------------
// Intersection of two planes (2-dimensional spans).
// ---------------------------------------------------------------------------

/// Outcome of intersecting two planes sp{p1,q1} and sp{p2,q2}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaneIntersection {
    /// One-dimensional intersection, spanned by the normalized form.
    Line(LinearForm),
    /// The planes meet only in 0 (stacked rank 4).
    Disjoint,
    /// The planes coincide (stacked rank 2).
    Equal,
}

pub fn intersect_two_planes(
    p1: &LinearForm,
    q1: &LinearForm,
    p2: &LinearForm,
    q2: &LinearForm,
    q: u64,
) -> Result<PlaneIntersection> {
    if span_rank(&[p1.clone(), q1.clone()], q) != 2 || span_rank(&[p2.clone(), q2.clone()], q) != 2
    {
        return Err(Error::Precondition("input pair is dependent".into()));
    }
    let stacked = [p1, q1, p2, q2];
    let rows: Vec<Vec<u64>> = stacked.iter().map(|f| f.coeffs.clone()).collect();
    match rank_of(&rows, q) {
        2 => Ok(PlaneIntersection::Equal),
        4 => Ok(PlaneIntersection::Disjoint),
        3 => {
            // Solve x1·p1 + x2·q1 + x3·p2 + x4·q2 = 0: right nullspace of the
            // n×4 matrix whose columns are the four forms.
            let n = p1.n();
            let cols: Vec<Vec<u64>> = (0..n)
                .map(|i| stacked.iter().map(|f| f.coeffs[i]).collect())
                .collect();
            let ns = nullspace_basis(&cols, q);
            debug_assert_eq!(ns.len(), 1);
            let x = &ns[0];
            let v = p1.scaled(x[0], q).add(&q1.scaled(x[1], q), q);
            debug_assert!(!v.is_zero());
            Ok(PlaneIntersection::Line(v.normalized(q)))
        }
        r => Err(Error::Internal(format!("impossible stacked rank {r}"))),
    }
}

// ---------------------------------------------------------------------------
// Invertible variable changes.
// ---------------------------------------------------------------------------

/// An invertible n×n change of variables over F_q, stored with its inverse.
///
/// With rows ℓ_1..ℓ_n of `mat`, the induced map on polynomials sends ℓ_i to
/// x_i: the transformed polynomial evaluated at p equals the original at
/// `mat⁻¹·p` (see [`IsoMap::eval_point`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoMap {
    n: usize,
    q: u64,
    mat: Vec<Vec<u64>>,
    inv: Vec<Vec<u64>>,
}

impl IsoMap {
    pub fn identity(n: usize, q: u64) -> IsoMap {
        let id: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        IsoMap {
            n,
            q,
            mat: id.clone(),
            inv: id,
        }
    }

    /// Build from an explicit matrix; fails if singular.
    pub fn from_matrix(mat: Vec<Vec<u64>>, q: u64) -> Result<IsoMap> {
        let n = mat.len();
        let inv = invert_matrix(&mat, q)
            .ok_or_else(|| Error::Precondition("matrix is singular".into()))?;
        Ok(IsoMap { n, q, mat, inv })
    }

    /// Uniform random invertible change of variables (rejection sampling).
    pub fn random(n: usize, q: u64, rng: &mut impl Rng) -> IsoMap {
        loop {
            let mat: Vec<Vec<u64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect())
                .collect();
            if let Ok(m) = IsoMap::from_matrix(mat, q) {
                return m;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inverse(&self) -> IsoMap {
        IsoMap {
            n: self.n,
            q: self.q,
            mat: self.inv.clone(),
            inv: self.mat.clone(),
        }
    }

    /// The point at which the original oracle must be queried so the
    /// composed oracle realizes the variable change: mat⁻¹·p.
    pub fn eval_point(&self, field: &Field, p: &[Scalar]) -> Vec<Scalar> {
        mat_vec(&self.inv, field, p)
    }

    /// Image of a linear form under the change (row·mat⁻¹): sends row i of
    /// `mat` to the unit form x_{i+1}.
    pub fn apply_form(&self, f: &LinearForm) -> LinearForm {
        row_mat(&f.coeffs, &self.inv, self.q)
    }

    /// Preimage of a linear form (row·mat): sends x_{i+1} back to row i.
    pub fn unapply_form(&self, f: &LinearForm) -> LinearForm {
        row_mat(&f.coeffs, &self.mat, self.q)
    }
}

fn mat_vec(m: &[Vec<u64>], field: &Field, p: &[Scalar]) -> Vec<Scalar> {
    m.iter()
        .map(|row| {
            let mut acc = field.zero();
            for (c, x) in row.iter().zip(p) {
                if *c != 0 {
                    acc = field.add(&acc, &field.scale_base(x, *c));
                }
            }
            acc
        })
        .collect()
}

fn row_mat(row: &[u64], m: &[Vec<u64>], q: u64) -> LinearForm {
    let n = m.len();
    let mut out = vec![0u64; n];
    for (i, &c) in row.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = addq(*o, mulq(c, m[i][j], q), q);
        }
    }
    LinearForm::new(out)
}

/// Construct the change of variables sending the given independent forms
/// ℓ_1..ℓ_r to x_1..x_r, completed deterministically with unit vectors.
pub fn make_isomorphism(forms: &[LinearForm], n: usize, q: u64) -> Result<IsoMap> {
    let basis = span_complete_basis(forms, n, q)?;
    let mat: Vec<Vec<u64>> = basis.into_iter().map(|f| f.coeffs).collect();
    IsoMap::from_matrix(mat, q)
}
