//! Corner-case reconstruction: one gate is a pure power α·y^d of a single
//! linear form.  The candidate-form search finds y, a change of variables
//! sends it to x1, and the remaining gate is recovered by separating the
//! x1-free part of a trivariate projection.
//!
//! Run with: cargo run --release --example reconstruct_corner

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{decompose, equivalent_pit, random_instance, structural_match, InstanceMode};
use sps2::field::Field;
use sps2::reconstruct::{corner_case_reconstruct, ReconStatus, ReconstructionConfig};
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(45);
    let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
    let inst = random_instance(6, 4, &field, 5, InstanceMode::Corner, &mut rng).unwrap();

    let pure = |t: &[sps2::linalg::LinearForm]| t.iter().all(|f| f == &t[0]);
    let y = if pure(&inst.truth.t1) { &inst.truth.t1[0] } else { &inst.truth.t2[0] };
    println!("planted pure-power gate: α·({:?})^{}", y.coeffs, inst.truth.t1.len());

    let cfg = ReconstructionConfig::for_degree(4);
    let result = corner_case_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
    assert_eq!(result.status, ReconStatus::Success);
    let circuit = result.circuit.unwrap();

    println!(
        "reconstructed fan-in {} circuit in {:.2?} ({} oracle queries)",
        circuit.k(),
        result.elapsed,
        result.queries
    );
    assert!(equivalent_pit(&circuit.oracle(), &inst.oracle, 40, &mut rng).unwrap());
    let got = decompose(&circuit).unwrap();
    assert!(structural_match(&got, &inst.truth));
    println!("identity test and structural comparison both pass");
}
