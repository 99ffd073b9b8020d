//! Compute the set S of codimension-2 linear subspaces on which the
//! nonlinear part of a fan-in-2 circuit vanishes, from black-box access
//! only, and cross-check it against the exhaustive brute-force scan.
//!
//! These subspaces are the geometric fingerprint of the two product gates:
//! every span{ℓ, ℓ′} with ℓ a factor of T1 and ℓ′ a factor of T2 kills
//! both gates at once.
//!
//! Run with: cargo run --release --example vanishing_subspaces

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{random_instance, InstanceMode};
use sps2::field::Field;
use sps2::linfactor::split_lin_nonlin;
use sps2::vanish::{brute_force_codim2, compute_vanishing_codim2};
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(43);
    let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
    // n = 5 keeps the exhaustive cross-check below affordable (the scan
    // enumerates all q^{2(n-2)} canonical rank-2 row spaces).
    let inst = random_instance(5, 3, &field, 5, InstanceMode::LowRank, &mut rng).unwrap();
    let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();

    let s = compute_vanishing_codim2(&split.nonlin, &mut rng).unwrap();
    println!("|S| = {} vanishing codim-2 subspaces (canonical basis rows):", s.len());
    for sp in &s {
        let (a, b) = sp.forms();
        println!("  span{{{:?}, {:?}}}", a.coeffs, b.coeffs);
    }

    // Independent check: enumerate every codim-2 subspace symbolically.
    let slow = brute_force_codim2(&split.nonlin, &mut rng).unwrap();
    assert_eq!(s, slow);
    println!("\nmatches the exhaustive scan over all rank-2 row spaces");

    // The degree-based cap on |S|.
    let t = split.t;
    assert!(s.len() <= 3 * t.pow(7));
    println!("|S| = {} ≤ 3·t^7 = {}", s.len(), 3 * t.pow(7));
}
