//! Randomized polynomial identity testing over extension fields: pick the
//! extension degree so |F| clears a target size, then distinguish equal
//! and unequal black boxes with a handful of random evaluations.
//!
//! Run with: cargo run --release --example identity_testing

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{equivalent_pit, random_instance, InstanceMode};
use sps2::field::{extension_degree_for_bits, Field};
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let q = 13;
    // Smallest k with q^k >= 2^20; a degree-d identity test then errs with
    // probability at most d/q^k < 2^-18 per trial.
    let k = extension_degree_for_bits(q, 20);
    println!("q = {q}: extension degree {k} gives |F| = {}^{k} ≥ 2^20", q);
    let field = Rc::new(Field::extension(q, k, &mut rng).unwrap());

    let inst = random_instance(6, 3, &field, 5, InstanceMode::General, &mut rng).unwrap();
    let o = inst.circuit.oracle();

    // Same polynomial: equivalent under any number of trials.
    assert!(equivalent_pit(&o, &inst.oracle, 10, &mut rng).unwrap());
    println!("circuit vs its own oracle: equivalent (10 trials)");

    // Perturb one gate scalar: caught essentially immediately.
    let mut other = inst.circuit.clone();
    other.gates[0].coeff = field.add(&other.gates[0].coeff, &field.one());
    assert!(!equivalent_pit(&o, &other.oracle(), 2, &mut rng).unwrap());
    println!("scalar-perturbed copy: flagged different within 2 trials");

    // The zero polynomial is never misflagged: completeness is one-sided.
    let zero = o.difference(&inst.circuit.oracle()).unwrap();
    assert!(zero.zero_test(100, &mut rng).unwrap());
    println!("difference with itself: reported zero on all 100 trials");
}
