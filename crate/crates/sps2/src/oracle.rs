//! Black-box polynomial access and its combinator algebra.
//!
//! A [`PolyOracle`] is an evaluation map over F_{q^k}^n with a variable count
//! and a degree bound.  Oracles are closed under composition with invertible
//! variable changes, restriction of variables, and division by known linear
//! factors; the latter can hit divisor hyperplanes, which is signalled as a
//! first-class [`Indeterminate`] outcome that sampling callers retry.

use crate::field::{Field, Scalar};
use crate::linalg::{IsoMap, LinearForm};
use crate::mpoly::{DensePoly, Monomial};
use crate::{Error, Result};
use rand::Rng;
use std::cell::Cell;
use std::collections::BTreeMap;
use std::rc::Rc;

/// Signal: an evaluation hit a divisor hyperplane; resample the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Indeterminate;

pub type EvalResult = std::result::Result<Scalar, Indeterminate>;

/// Black-box evaluation access to a polynomial.
#[derive(Clone)]
pub struct PolyOracle {
    n: usize,
    d: usize,
    field: Rc<Field>,
    eval: Rc<dyn Fn(&[Scalar]) -> EvalResult>,
    queries: Rc<Cell<u64>>,
    provenance: &'static str,
}

impl PolyOracle {
    pub fn new(
        n: usize,
        d: usize,
        field: Rc<Field>,
        provenance: &'static str,
        eval: Rc<dyn Fn(&[Scalar]) -> EvalResult>,
    ) -> PolyOracle {
        PolyOracle {
            n,
            d,
            field,
            eval,
            queries: Rc::new(Cell::new(0)),
            provenance,
        }
    }

    /// Oracle backed by an explicit dense polynomial.
    pub fn from_dense(field: Rc<Field>, poly: DensePoly) -> PolyOracle {
        let n = poly.n;
        let d = poly.deg();
        let f = field.clone();
        PolyOracle::new(
            n,
            d,
            field,
            "dense-backed",
            Rc::new(move |p| Ok(poly.eval(&f, p))),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> &Rc<Field> {
        &self.field
    }

    pub fn provenance(&self) -> &'static str {
        self.provenance
    }

    /// Weakly consistent query counter for benchmarks.
    pub fn queries(&self) -> u64 {
        self.queries.get()
    }

    pub fn eval(&self, point: &[Scalar]) -> EvalResult {
        debug_assert_eq!(point.len(), self.n);
        self.queries.set(self.queries.get() + 1);
        (self.eval)(point)
    }

    /// Evaluate, retrying with caller-supplied fresh points on indeterminate
    /// results.
    pub fn eval_resampling(
        &self,
        rng: &mut impl Rng,
        budget: usize,
    ) -> Result<(Vec<Scalar>, Scalar)> {
        for _ in 0..budget {
            let p = random_point(&self.field, self.n, rng);
            if let Ok(v) = self.eval(&p) {
                return Ok((p, v));
            }
        }
        Err(Error::ResampleExhausted(
            "random evaluation kept hitting divisor hyperplanes".into(),
        ))
    }

    /// Oracle computing the image of the polynomial under the variable
    /// change: the new oracle at p evaluates the original at mat⁻¹·p, so a
    /// factor ℓ_i (row i of the map) becomes x_i.
    pub fn compose_iso(&self, m: &IsoMap) -> Result<PolyOracle> {
        if m.n() != self.n {
            return Err(Error::ArityMismatch(format!(
                "isomorphism over {} variables, oracle over {}",
                m.n(),
                self.n
            )));
        }
        let inner = self.clone();
        let iso = m.clone();
        let field = self.field.clone();
        Ok(PolyOracle::new(
            self.n,
            self.d,
            self.field.clone(),
            "iso-composed",
            Rc::new(move |p| inner.eval(&iso.eval_point(&field, p))),
        ))
    }

    /// Restrict the assigned variables to fixed scalars; the result is an
    /// oracle over the remaining variables, kept in increasing original
    /// order (see [`restricted_index_map`]).
    pub fn restrict_vars(&self, assignments: &BTreeMap<usize, Scalar>) -> Result<PolyOracle> {
        if let Some(&i) = assignments.keys().find(|&&i| i >= self.n) {
            return Err(Error::ArityMismatch(format!(
                "assigned variable {i} out of range for arity {}",
                self.n
            )));
        }
        let inner = self.clone();
        let assigned = assignments.clone();
        let n_rem = self.n - assignments.len();
        let n_full = self.n;
        Ok(PolyOracle::new(
            n_rem,
            self.d,
            self.field.clone(),
            "restricted",
            Rc::new(move |p| {
                let mut full = Vec::with_capacity(n_full);
                let mut it = p.iter();
                for i in 0..n_full {
                    match assigned.get(&i) {
                        Some(v) => full.push(v.clone()),
                        None => full.push(it.next().expect("arity checked").clone()),
                    }
                }
                inner.eval(&full)
            }),
        ))
    }

    /// Divide by scale·∏ℓ^mult; evaluations on a divisor hyperplane are
    /// indeterminate and must be resampled by the caller.
    pub fn divide_by_linear_factors(
        &self,
        factors: &[(LinearForm, usize)],
        scale: Scalar,
    ) -> Result<PolyOracle> {
        if self.field.is_zero(&scale) {
            return Err(Error::DivisionByZero);
        }
        let total: usize = factors.iter().map(|(_, m)| m).sum();
        if total > self.d {
            return Err(Error::Precondition(format!(
                "dividing degree-{} oracle by {} linear factors",
                self.d, total
            )));
        }
        for (f, _) in factors {
            if f.n() != self.n {
                return Err(Error::ArityMismatch("factor arity mismatch".into()));
            }
            if f.is_zero() {
                return Err(Error::DivisionByZero);
            }
        }
        let inner = self.clone();
        let field = self.field.clone();
        let factors = factors.to_vec();
        Ok(PolyOracle::new(
            self.n,
            self.d - total,
            self.field.clone(),
            "factor-divided",
            Rc::new(move |p| {
                let mut denom = scale.clone();
                for (f, mult) in &factors {
                    let v = f.eval(&field, p);
                    if field.is_zero(&v) {
                        return Err(Indeterminate);
                    }
                    denom = field.mul(&denom, &field.pow(&v, *mult as u64));
                }
                let num = inner.eval(p)?;
                Ok(field.div(&num, &denom).expect("denominator nonzero"))
            }),
        ))
    }

    /// Difference oracle o1 − o2 (for identity testing).
    pub fn difference(&self, other: &PolyOracle) -> Result<PolyOracle> {
        if self.n != other.n {
            return Err(Error::ArityMismatch("difference of mismatched arities".into()));
        }
        let a = self.clone();
        let b = other.clone();
        let field = self.field.clone();
        Ok(PolyOracle::new(
            self.n,
            self.d.max(other.d),
            self.field.clone(),
            "difference",
            Rc::new(move |p| Ok(field.sub(&a.eval(p)?, &b.eval(p)?))),
        ))
    }

    /// Randomized identity test over the full extension field: "zero" iff
    /// every trial evaluation is 0.  One-sided error ≤ (d/q^k)^trials for
    /// nonzero polynomials; exact on the zero polynomial.
    pub fn zero_test(&self, trials: usize, rng: &mut impl Rng) -> Result<bool> {
        assert!(trials >= 1);
        let mut done = 0;
        let mut misses = 0;
        while done < trials {
            let p = random_point(&self.field, self.n, rng);
            match self.eval(&p) {
                Ok(v) => {
                    if !self.field.is_zero(&v) {
                        return Ok(false);
                    }
                    done += 1;
                }
                Err(Indeterminate) => {
                    misses += 1;
                    if misses > 64 + 8 * trials {
                        return Err(Error::ResampleExhausted(
                            "identity test kept hitting divisor hyperplanes".into(),
                        ));
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Uniform random point of F_{q^k}^n.
pub fn random_point(field: &Field, n: usize, rng: &mut impl Rng) -> Vec<Scalar> {
    (0..n).map(|_| field.random(rng)).collect()
}

/// New-index → original-index map induced by a restriction.
pub fn restricted_index_map(n: usize, assignments: &BTreeMap<usize, Scalar>) -> Vec<usize> {
    (0..n).filter(|i| !assignments.contains_key(i)).collect()
}

/// Lift a linear form over the restricted variables back to n variables,
/// placing zeros at the assigned positions.
pub fn lift_form(form: &LinearForm, index_map: &[usize], n: usize) -> LinearForm {
    debug_assert_eq!(form.n(), index_map.len());
    let mut out = vec![0u64; n];
    for (j, &orig) in index_map.iter().enumerate() {
        out[orig] = form.coeffs[j];
    }
    LinearForm::new(out)
}

// ---------------------------------------------------------------------------
// Dense interpolation from a tensor grid.
// ---------------------------------------------------------------------------

/// Invert a square matrix of scalars (Gauss-Jordan); None if singular.
fn invert_scalar_matrix(field: &Field, m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !field.is_zero(&aug[r][col]))?;
        aug.swap(col, piv);
        let inv = field.inv(&aug[col][col]).ok()?;
        for x in aug[col].iter_mut() {
            *x = field.mul(x, &inv);
        }
        for r in 0..n {
            if r != col && !field.is_zero(&aug[r][col]) {
                let f = aug[r][col].clone();
                for c in 0..2 * n {
                    let s = field.mul(&f, &aug[col][c]);
                    aug[r][c] = field.sub(&aug[r][c], &s);
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Recover the exact dense polynomial of degree ≤ t from evaluations on a
/// (t+1)^|active| tensor grid of random extension points.  Inactive
/// variables are queried at 0 (callers restrict them beforehand).  Grids
/// that hit indeterminate points of divided oracles are re-drawn with fresh
/// offsets.
pub fn dense_interpolate(
    o: &PolyOracle,
    active: &[usize],
    t: usize,
    rng: &mut impl Rng,
) -> Result<DensePoly> {
    let field = o.field().clone();
    let m = active.len();
    for &v in active {
        if v >= o.n() {
            return Err(Error::ArityMismatch(format!("active variable {v} out of range")));
        }
    }
    let points_per_var = t + 1;
    let grid_size = (points_per_var as u128).checked_pow(m as u32);
    match grid_size {
        Some(g) if g <= 4_000_000 => {}
        _ => {
            return Err(Error::ConfigGate(format!(
                "interpolation grid {points_per_var}^{m} too large"
            )))
        }
    }
    if (field.size() as usize) < points_per_var {
        return Err(Error::ConfigGate(format!(
            "field of size {} cannot supply {points_per_var} distinct grid points",
            field.size()
        )));
    }
    if m == 0 {
        let v = o
            .eval(&vec![field.zero(); o.n()])
            .map_err(|_| Error::ResampleExhausted("constant slice indeterminate at 0".into()))?;
        return Ok(DensePoly::constant(&field, o.n(), v));
    }
    'attempt: for _ in 0..8 {
        // Distinct random points per active variable.
        let mut pts: Vec<Vec<Scalar>> = Vec::with_capacity(m);
        for _ in 0..m {
            let mut axis: Vec<Scalar> = Vec::with_capacity(points_per_var);
            while axis.len() < points_per_var {
                let a = field.random(rng);
                if !axis.contains(&a) {
                    axis.push(a);
                }
            }
            pts.push(axis);
        }
        // Evaluate the grid (mixed-radix index over axes).
        let total = (points_per_var as usize).pow(m as u32);
        let mut values: Vec<Scalar> = Vec::with_capacity(total);
        let mut point = vec![field.zero(); o.n()];
        for flat in 0..total {
            let mut rest = flat;
            for (ai, &var) in active.iter().enumerate() {
                let idx = rest % points_per_var;
                rest /= points_per_var;
                point[var] = pts[ai][idx].clone();
            }
            match o.eval(&point) {
                Ok(v) => values.push(v),
                Err(Indeterminate) => continue 'attempt,
            }
        }
        // Per-axis inverse Vandermonde transforms: values → coefficients.
        for (ai, axis) in pts.iter().enumerate() {
            let vmat: Vec<Vec<Scalar>> = axis
                .iter()
                .map(|x| {
                    let mut row = Vec::with_capacity(points_per_var);
                    let mut p = field.one();
                    for _ in 0..points_per_var {
                        row.push(p.clone());
                        p = field.mul(&p, x);
                    }
                    row
                })
                .collect();
            let vinv = invert_scalar_matrix(&field, &vmat)
                .ok_or_else(|| Error::Internal("Vandermonde with distinct nodes singular".into()))?;
            let stride = (points_per_var as usize).pow(ai as u32);
            let block = stride * points_per_var;
            for start in 0..total / block {
                for off in 0..stride {
                    let base = start * block + off;
                    let col: Vec<Scalar> = (0..points_per_var)
                        .map(|r| values[base + r * stride].clone())
                        .collect();
                    for (r, row) in vinv.iter().enumerate() {
                        let mut acc = field.zero();
                        for (c, entry) in row.iter().enumerate() {
                            acc = field.add(&acc, &field.mul(entry, &col[c]));
                        }
                        values[base + r * stride] = acc;
                    }
                }
            }
        }
        // Collect nonzero coefficients into a polynomial over all n vars.
        let mut out = DensePoly::zero(o.n());
        for (flat, v) in values.into_iter().enumerate() {
            if field.is_zero(&v) {
                continue;
            }
            let mut e = vec![0u16; o.n()];
            let mut rest = flat;
            for &var in active {
                e[var] = (rest % points_per_var) as u16;
                rest /= points_per_var;
            }
            out.terms.insert(Monomial(e), v);
        }
        return Ok(out);
    }
    Err(Error::ResampleExhausted(
        "interpolation grids kept hitting indeterminate points".into(),
    ))
}
