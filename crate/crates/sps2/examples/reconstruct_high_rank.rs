//! Full round trip in the high-rank regime: generate a rank-8 fan-in-2
//! circuit in 8 variables, hand only its black box to the reconstruction
//! driver, and check the output both by randomized identity testing and
//! by exact structural comparison (high rank makes the circuit unique).
//!
//! Run with: cargo run --release --example reconstruct_high_rank

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{decompose, equivalent_pit, random_instance, structural_match, InstanceMode};
use sps2::field::Field;
use sps2::reconstruct::{high_rank_reconstruct, ReconStatus, ReconstructionConfig};
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(46);
    // q = 13 with extension degree 6 puts the evaluation field above 2^20,
    // so identity tests have error probability well below 1e-6 per trial.
    let field = Rc::new(Field::extension(13, 6, &mut rng).unwrap());
    let inst = random_instance(8, 4, &field, 8, InstanceMode::General, &mut rng).unwrap();

    let cfg = ReconstructionConfig::for_degree(4);
    let result = high_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
    assert_eq!(result.status, ReconStatus::Success);
    let circuit = result.circuit.unwrap();

    println!(
        "reconstructed fan-in {} circuit in {:.2?} using {} oracle queries",
        circuit.k(),
        result.elapsed,
        result.queries
    );

    // Identity test against the original black box.
    assert!(equivalent_pit(&circuit.oracle(), &inst.oracle, 40, &mut rng).unwrap());
    println!("passes a 40-trial randomized identity test");

    // In the high-rank regime the representation is unique, so the gates
    // must match the plant exactly (up to scalars and gate swap).
    let got = decompose(&circuit).unwrap();
    assert!(structural_match(&got, &inst.truth));
    println!("gate structure matches the planted circuit exactly");
}
