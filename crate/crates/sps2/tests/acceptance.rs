//! End-to-end acceptance suite: every algorithmic component is checked
//! against an independent brute-force oracle at desk scale, and the three
//! reconstruction drivers are exercised on seeded instance batches with
//! pinned success-rate and runtime thresholds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::candidates::{
    compute_candidate_forms, definitional_candidate_forms, partition_candidates,
};
use sps2::circuit::{
    decompose, equivalent_pit, random_instance, structural_match, InstanceMode,
};
use sps2::field::{extension_degree_for_bits, Field};
use sps2::geometry::{log2, ordinary_free_bound_check, prop2_witness, ProperSet};
use sps2::linalg::{span_rank, IsoMap, LinearForm};
use sps2::linfactor::{exhaustive_linear_factors, extract_linear_factors, split_lin_nonlin};
use sps2::mpoly::DensePoly;
use sps2::oracle::{dense_interpolate, random_point, PolyOracle};
use sps2::reconstruct::{
    corner_case_reconstruct, high_rank_reconstruct, low_rank_reconstruct, ReconStatus,
    ReconstructionConfig,
};
use sps2::unipoly::{uni_gcd_roots, UniPoly};
use sps2::vanish::{brute_force_codim2, compute_vanishing_codim2};
use std::rc::Rc;
use std::time::{Duration, Instant};

fn ext_field(q: u64, rng: &mut impl Rng) -> Rc<Field> {
    let k = extension_degree_for_bits(q, 20);
    Rc::new(Field::extension(q, k, rng).unwrap())
}

fn random_form(n: usize, q: u64, rng: &mut impl Rng) -> LinearForm {
    loop {
        let v: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let f = LinearForm::new(v);
        if !f.is_zero() {
            return f.normalized(q);
        }
    }
}

fn product_poly(field: &Rc<Field>, n: usize, forms: &[LinearForm]) -> DensePoly {
    let mut p = DensePoly::constant(field, n, field.one());
    for f in forms {
        p = p.mul(field, &DensePoly::from_linear(field, f));
    }
    p
}

/// Linear-factor extraction agrees exactly (multiset with multiplicity,
/// normalized forms) with the exhaustive projective scan on 200 seeded
/// instances across q ∈ {5, 7, 11}; any residual failures must be loud
/// errors, never a silently wrong factor list.
#[test]
fn linear_factor_extraction_matches_projective_scan() {
    let start = Instant::now();
    let qs = [5u64, 7, 11];
    let mut ok = 0usize;
    let mut loud = 0usize;
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(10_000 + seed);
        let q = qs[(seed % 3) as usize];
        let field = ext_field(q, &mut rng);
        let n = 3 + (seed as usize / 3) % 3; // 3..=5
        let d = 2 + (seed as usize / 9) % 5; // 2..=6
        let max_rank = n.min(2 * d);
        let rank = 2 + (seed as usize) % (max_rank - 1);
        let inst =
            random_instance(n, d, &field, rank, InstanceMode::General, &mut rng).unwrap();
        match extract_linear_factors(&inst.oracle, &mut rng) {
            Ok(mut fast) => {
                let mut slow = exhaustive_linear_factors(&inst.oracle, &mut rng).unwrap();
                fast.sort();
                slow.sort();
                assert_eq!(
                    fast, slow,
                    "silent extraction mismatch on seed {seed} (n={n}, d={d}, q={q})"
                );
                ok += 1;
            }
            Err(_) => loud += 1,
        }
    }
    assert!(ok >= 198, "only {ok}/200 extractions matched ({loud} loud failures)");
    assert!(
        start.elapsed() < Duration::from_secs(300),
        "extraction sweep took {:?}",
        start.elapsed()
    );
}

/// The codimension-2 vanishing set of the nonlinear part equals the
/// exhaustive scan over all canonical rank-2 row spaces on 30 rank-5
/// instances, and its size respects the 3·d^7 degree bound.
#[test]
fn vanishing_subspaces_match_brute_force() {
    let start = Instant::now();
    for seed in 0..30u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(20_000 + seed);
        let q = if seed % 2 == 0 { 5 } else { 7 };
        let field = ext_field(q, &mut rng);
        let d = 3 + (seed as usize) % 3; // 3..=5
        let inst =
            random_instance(5, d, &field, 5, InstanceMode::General, &mut rng).unwrap();
        let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();
        let fast = compute_vanishing_codim2(&split.nonlin, &mut rng).unwrap();
        let slow = brute_force_codim2(&split.nonlin, &mut rng).unwrap();
        assert_eq!(fast, slow, "vanishing-set mismatch on seed {seed} (d={d}, q={q})");
        assert!(
            fast.len() <= 3 * d.pow(7),
            "|S| = {} exceeds 3·d^7 on seed {seed}",
            fast.len()
        );
    }
    assert!(
        start.elapsed() < Duration::from_secs(600),
        "vanishing sweep took {:?}",
        start.elapsed()
    );
}

/// The candidate-form search equals the definitional scan over every
/// normalized form of the space on 20 instances.
#[test]
fn candidate_forms_match_definitional_scan() {
    for seed in 0..20u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(30_000 + seed);
        let q = if seed % 2 == 0 { 5 } else { 7 };
        let field = ext_field(q, &mut rng);
        let rank = 4 + (seed as usize) % 2;
        let inst =
            random_instance(5, 4, &field, rank, InstanceMode::General, &mut rng).unwrap();
        let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();
        let s = compute_vanishing_codim2(&split.nonlin, &mut rng).unwrap();
        let fast = compute_candidate_forms(&split.nonlin, split.t, &s, &mut rng).unwrap();
        let slow =
            definitional_candidate_forms(&split.nonlin, split.t, &s, &mut rng).unwrap();
        assert_eq!(fast, slow, "candidate-set mismatch on seed {seed} (q={q})");
        assert!(fast.len() <= s.len() * s.len());
    }
}

/// Partitioning the candidate set by the ground-truth gate factors obeys
/// the span bounds on 50 instances: candidates dividing neither gate span
/// at most log₂d + 2 dimensions, gate factors missed by the candidate set
/// span at most 2, hence candidates dividing the gates span at least
/// rank − 2.
#[test]
fn candidate_partition_bounds_hold() {
    let q = 7u64;
    let mut outer = ChaCha12Rng::seed_from_u64(31_000);
    let field = ext_field(q, &mut outer);
    let mut checked = 0usize;
    let mut seed = 0u64;
    while checked < 50 {
        seed += 1;
        assert!(seed < 400, "could not collect 50 instances meeting the hypotheses");
        let mut rng = ChaCha12Rng::seed_from_u64(31_000 + seed);
        let inst =
            random_instance(5, 4, &field, 5, InstanceMode::General, &mut rng).unwrap();
        // Both gate-factor spans must be at least 2-dimensional for the
        // partition bounds to apply.
        if span_rank(&inst.truth.t1, q) < 2 || span_rank(&inst.truth.t2, q) < 2 {
            continue;
        }
        let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();
        let s = compute_vanishing_codim2(&split.nonlin, &mut rng).unwrap();
        let l = compute_candidate_forms(&split.nonlin, split.t, &s, &mut rng).unwrap();
        let gate_factors: Vec<LinearForm> = inst
            .truth
            .t1
            .iter()
            .chain(inst.truth.t2.iter())
            .cloned()
            .collect();
        let sum_factors: Vec<LinearForm> =
            split.lin.iter().map(|(f, _)| f.clone()).collect();
        let part = partition_candidates(&l, &gate_factors, &sum_factors, q);
        let d = inst.circuit.d;
        let log_bound = ((d as f64).log2() + 2.0).floor() as usize;
        assert!(
            part.bad_dim(q) <= log_bound,
            "bad-candidate span {} > log₂d + 2 on seed {seed}",
            part.bad_dim(q)
        );
        assert!(
            part.others_dim(q) <= 2,
            "missed gate factors span {} > 2 on seed {seed}",
            part.others_dim(q)
        );
        assert!(
            part.good_dim(q) + 2 >= inst.truth.rank,
            "good candidates span only {} of rank {} on seed {seed}",
            part.good_dim(q),
            inst.truth.rank
        );
        checked += 1;
    }
}

/// Full-rank round trip: 100 seeded rank-8 instances in 8 variables are
/// reconstructed with ≥ 95% success; every success passes a 40-trial
/// identity test and matches the planted gates exactly (the representation
/// is unique in this regime).  Median wall time per instance ≤ 30 s.
#[test]
fn high_rank_roundtrip_batch() {
    let mut times = Vec::with_capacity(100);
    let mut successes = 0usize;
    let cfg = ReconstructionConfig::for_degree(4);
    for seed in 0..100u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(40_000 + seed);
        let field = Rc::new(Field::extension(13, 6, &mut rng).unwrap());
        let inst =
            random_instance(8, 4, &field, 8, InstanceMode::General, &mut rng).unwrap();
        let res = high_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        times.push(res.elapsed);
        if res.status == ReconStatus::Success {
            let c = res.circuit.expect("success must carry a circuit");
            assert!(
                equivalent_pit(&c.oracle(), &inst.oracle, 40, &mut rng).unwrap(),
                "reconstruction returned an inequivalent circuit on seed {seed}"
            );
            assert!(
                structural_match(&decompose(&c).unwrap(), &inst.truth),
                "gate structure differs from the plant on seed {seed}"
            );
            successes += 1;
        }
    }
    assert!(successes >= 95, "only {successes}/100 high-rank round trips succeeded");
    times.sort();
    assert!(
        times[50] <= Duration::from_secs(30),
        "median wall time {:?} exceeds 30 s",
        times[50]
    );
}

/// Pure-power round trip: 50 seeded instances with one gate equal to
/// α·y^4 are reconstructed with ≥ 95% success and exact structural match;
/// instances without a pure-power gate never yield a wrong output from the
/// same path.
#[test]
fn corner_roundtrip_batch() {
    let cfg = ReconstructionConfig::for_degree(4);
    let mut successes = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(50_000 + seed);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let inst =
            random_instance(6, 4, &field, 5, InstanceMode::Corner, &mut rng).unwrap();
        let res = corner_case_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        if res.status == ReconStatus::Success {
            let c = res.circuit.expect("success must carry a circuit");
            assert!(
                equivalent_pit(&c.oracle(), &inst.oracle, 40, &mut rng).unwrap(),
                "inequivalent corner output on seed {seed}"
            );
            assert!(
                structural_match(&decompose(&c).unwrap(), &inst.truth),
                "corner gate structure differs from the plant on seed {seed}"
            );
            successes += 1;
        }
    }
    assert!(successes >= 48, "only {successes}/50 corner round trips succeeded");

    // Routing: inputs whose gates are not pure powers must not produce a
    // wrong circuit through the pure-power path (honest failure is fine).
    for seed in 0..5u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(55_000 + seed);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let inst =
            random_instance(6, 4, &field, 5, InstanceMode::General, &mut rng).unwrap();
        let res = corner_case_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        if res.status == ReconStatus::Success {
            let c = res.circuit.expect("success must carry a circuit");
            assert!(
                equivalent_pit(&c.oracle(), &inst.oracle, 40, &mut rng).unwrap(),
                "wrong output for a non-pure-power input on seed {seed}"
            );
        }
    }
}

/// Low-rank round trip: 50 seeded rank-5 instances are reconstructed as
/// identity-tested circuits of fan-in at most (d−s)^5, each within the
/// per-instance time budget.
#[test]
fn low_rank_roundtrip_batch() {
    for seed in 0..50u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(60_000 + seed);
        let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
        let d = 3 + (seed as usize) % 2; // 3..=4
        let inst =
            random_instance(5, d, &field, 5, InstanceMode::LowRank, &mut rng).unwrap();
        let cfg = ReconstructionConfig::for_degree(d);
        let res = low_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
        assert_eq!(
            res.status,
            ReconStatus::Success,
            "low-rank reconstruction failed on seed {seed} (d={d})"
        );
        assert!(
            res.elapsed <= Duration::from_secs(300),
            "seed {seed} took {:?}",
            res.elapsed
        );
        let c = res.circuit.expect("success must carry a circuit");
        let s: usize = inst.truth.g.len();
        assert!(
            c.k() <= (d - s).pow(5),
            "fan-in {} exceeds (d−s)^5 = {} on seed {seed}",
            c.k(),
            (d - s).pow(5)
        );
        assert!(
            equivalent_pit(&c.oracle(), &inst.oracle, 40, &mut rng).unwrap(),
            "inequivalent low-rank output on seed {seed}"
        );
    }
}

fn random_proper(q: u64, n: usize, count: usize, rng: &mut impl Rng) -> ProperSet {
    let mut pts = Vec::new();
    while pts.len() < count {
        let p: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        if p.iter().any(|&x| x != 0) {
            pts.push(p);
        }
    }
    ProperSet::new(q, n, &pts).unwrap()
}

fn random_independent(q: u64, n: usize, size: usize, rng: &mut impl Rng) -> ProperSet {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    while rows.len() < size {
        let p: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let mut cand = rows.clone();
        cand.push(p);
        if sps2::linalg::rank_of(&cand, q) == cand.len() {
            rows = cand;
        }
    }
    ProperSet::new(q, n, &rows).unwrap()
}

/// Ordinary-line bounds on 100 random (S, T) pairs: the best anchor's
/// ordinary lines span at least dim(sp S)/(log₂|S| + 2) dimensions; and on
/// 200 trials the dichotomy holds that an independent anchor set with no
/// ordinary lines into S must have at most log₂|S| + 1 elements.
#[test]
fn ordinary_line_bounds_hold() {
    let q = 5u64;
    for trial in 0..100u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(70_000 + trial);
        let n = 8 + (trial as usize) % 5; // 8..=12
        let want = 8 + (trial as usize * 7) % 57; // 8..=64
        let s_set = random_proper(q, n, want, &mut rng);
        let t_size = (log2(s_set.len()).ceil() as usize + 2).min(n);
        let t_set = random_independent(q, n, t_size, &mut rng);
        let (_, dim) = prop2_witness(&s_set, &t_set).unwrap();
        let bound = s_set.span_dim() as f64 / (log2(s_set.len()) + 2.0);
        assert!(
            dim as f64 >= bound - 1e-9,
            "witness dim {dim} below bound {bound:.3} on trial {trial}"
        );
    }
    for trial in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(75_000 + trial);
        let n = 6 + (trial as usize) % 7; // 6..=12
        let s_set = random_proper(q, n, 4 + (trial as usize * 5) % 45, &mut rng);
        let t_set = random_independent(q, n, 2 + (trial as usize) % (n - 1), &mut rng);
        assert!(
            ordinary_free_bound_check(&s_set, &t_set).unwrap(),
            "ordinary-line dichotomy violated on trial {trial}"
        );
    }
}

/// Identity-test calibration: the zero oracle is reported zero on 10⁴
/// evaluations (one-sided completeness is exact), and 10³ planted nonzero
/// products over a field of size ≥ 2^20 are all flagged within 2 trials.
#[test]
fn identity_test_calibration() {
    let mut rng = ChaCha12Rng::seed_from_u64(80_000);
    let field = Rc::new(Field::extension(13, 6, &mut rng).unwrap());
    let fz = field.clone();
    let zero = PolyOracle::new(
        4,
        3,
        field.clone(),
        "zero",
        Rc::new(move |_| Ok(fz.zero())),
    );
    assert!(zero.zero_test(10_000, &mut rng).unwrap());

    for seed in 0..1000u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(81_000 + seed);
        let forms: Vec<LinearForm> = (0..4).map(|_| random_form(4, 13, &mut rng)).collect();
        let o = PolyOracle::from_dense(field.clone(), product_poly(&field, 4, &forms));
        assert!(
            !o.zero_test(2, &mut rng).unwrap(),
            "nonzero product not flagged within 2 trials on seed {seed}"
        );
    }
}

/// Infrastructure round trips, 10³ randomized cases each: change of
/// variables composed with its inverse is the identity; dividing out
/// linear factors then multiplying them back restores the oracle; dense
/// interpolation from evaluations reproduces the polynomial; common roots
/// via gcd equal the exhaustive scan over F_13.
#[test]
fn infrastructure_roundtrips() {
    let mut rng = ChaCha12Rng::seed_from_u64(90_000);
    let q = 7u64;
    let field = Rc::new(Field::extension(q, 2, &mut rng).unwrap());

    // Change of variables: o ∘ M ∘ M⁻¹ = o.
    for _ in 0..1000 {
        let forms: Vec<LinearForm> = (0..3).map(|_| random_form(4, q, &mut rng)).collect();
        let o = PolyOracle::from_dense(field.clone(), product_poly(&field, 4, &forms));
        let iso = IsoMap::random(4, q, &mut rng);
        let back = o
            .compose_iso(&iso)
            .unwrap()
            .compose_iso(&iso.inverse())
            .unwrap();
        let p = random_point(&field, 4, &mut rng);
        assert_eq!(back.eval(&p).unwrap(), o.eval(&p).unwrap());
    }

    // Divide by known linear factors, multiply back pointwise.
    for _ in 0..1000 {
        let f1 = random_form(4, q, &mut rng);
        let m = 1 + rng.gen_range(0..2usize);
        let rest: Vec<LinearForm> = (0..2).map(|_| random_form(4, q, &mut rng)).collect();
        let mut all = vec![f1.clone(); m];
        all.extend(rest);
        let o = PolyOracle::from_dense(field.clone(), product_poly(&field, 4, &all));
        let quo = o
            .divide_by_linear_factors(&[(f1.clone(), m)], field.one())
            .unwrap();
        // Pick a point off the divisor hyperplane.
        let p = loop {
            let p = random_point(&field, 4, &mut rng);
            if !field.is_zero(&f1.eval(&field, &p)) {
                break p;
            }
        };
        let back = field.mul(
            &quo.eval(&p).unwrap(),
            &field.pow(&f1.eval(&field, &p), m as u64),
        );
        assert_eq!(back, o.eval(&p).unwrap());
    }

    // Interpolation round trip on random trivariate polynomials.
    for _ in 0..1000 {
        let mut p = DensePoly::constant(&field, 3, field.random(&mut rng));
        for _ in 0..rng.gen_range(1..=3usize) {
            let forms: Vec<LinearForm> =
                (0..rng.gen_range(1..=3usize)).map(|_| random_form(3, q, &mut rng)).collect();
            p = p.add(&field, &product_poly(&field, 3, &forms));
        }
        let o = PolyOracle::from_dense(field.clone(), p.clone());
        let interp = dense_interpolate(&o, &[0, 1, 2], 3, &mut rng).unwrap();
        assert!(p.sub(&field, &interp).is_zero());
    }

    // Common roots via gcd vs exhaustive scan over F_13.
    let f13 = Rc::new(Field::base(13).unwrap());
    for _ in 0..1000 {
        let shared: Vec<_> = (0..rng.gen_range(0..=2usize))
            .map(|_| f13.embed(rng.gen_range(0..13)))
            .collect();
        let polys: Vec<UniPoly> = (0..rng.gen_range(2..=3usize))
            .map(|_| {
                let mut roots = shared.clone();
                for _ in 0..rng.gen_range(0..=3usize) {
                    roots.push(f13.embed(rng.gen_range(0..13)));
                }
                UniPoly::from_roots(&f13, &roots)
            })
            .collect();
        let mut fast = uni_gcd_roots(&polys, &f13, &mut rng).unwrap();
        let mut slow: Vec<_> = (0..13u64)
            .map(|x| f13.embed(x))
            .filter(|x| polys.iter().all(|p| f13.is_zero(&p.eval(&f13, x))))
            .collect();
        let key = |s: &sps2::field::Scalar| s.coeffs().to_vec();
        fast.sort_by_key(key);
        slow.sort_by_key(key);
        fast.dedup();
        slow.dedup();
        assert_eq!(fast, slow);
    }
}
