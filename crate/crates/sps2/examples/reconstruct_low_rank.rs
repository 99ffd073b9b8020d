//! Low-rank reconstruction: when the non-shared factors span only r
//! dimensions, the black box is an r-variate polynomial in disguise.  The
//! driver finds an independent r-subset of forms from the vanishing
//! subspaces, interpolates the r-variate polynomial, and expands it as a
//! (possibly larger fan-in) depth-3 circuit with one gate per monomial.
//!
//! Run with: cargo run --release --example reconstruct_low_rank

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{equivalent_pit, random_instance, InstanceMode};
use sps2::field::Field;
use sps2::reconstruct::{low_rank_reconstruct, ReconStatus, ReconstructionConfig};
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(43);
    let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());
    let inst = random_instance(6, 3, &field, 5, InstanceMode::LowRank, &mut rng).unwrap();
    println!("planted rank {}, degree {}", inst.truth.rank, inst.circuit.d);

    let cfg = ReconstructionConfig::for_degree(3);
    let result = low_rank_reconstruct(&inst.oracle, &cfg, &mut rng).unwrap();
    assert_eq!(result.status, ReconStatus::Success);
    let circuit = result.circuit.unwrap();

    // The output may use more than two gates (one per monomial of the
    // r-variate expansion), but is bounded by d^r and verified by PIT.
    println!(
        "reconstructed fan-in {} circuit in {:.2?} ({} oracle queries)",
        circuit.k(),
        result.elapsed,
        result.queries
    );
    assert!(equivalent_pit(&circuit.oracle(), &inst.oracle, 40, &mut rng).unwrap());
    println!("passes a 40-trial randomized identity test");
}
