//! Split a black-box polynomial into its linear part (all linear factors
//! over the base field, with multiplicities) and a nonlinear residual that
//! has no base-field linear factors, using only evaluations.
//!
//! Run with: cargo run --release --example linear_factor_split

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{random_instance, InstanceMode};
use sps2::field::Field;
use sps2::linfactor::split_lin_nonlin;
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let field = Rc::new(Field::extension(7, 8, &mut rng).unwrap());

    // d = 5 with rank 4 leaves room for a shared linear factor G.
    let inst = random_instance(5, 5, &field, 4, InstanceMode::General, &mut rng).unwrap();
    println!(
        "planted shared factors: {:?}",
        inst.truth.g.iter().map(|f| &f.coeffs).collect::<Vec<_>>()
    );

    // Black-box split: the algorithm sees only the oracle.
    let split = split_lin_nonlin(&inst.oracle, &mut rng).unwrap();
    println!("recovered linear part (normalized form, multiplicity):");
    for (form, mult) in &split.lin {
        println!("  {:?} ^ {mult}", form.coeffs);
    }
    println!("nonlinear residual degree t = {}", split.t);

    // Sanity: the recovered multiset matches the plant.
    let mut planted: Vec<Vec<u64>> = inst
        .truth
        .g
        .iter()
        .map(|f| f.normalized(field.q()).coeffs.clone())
        .collect();
    planted.sort();
    let mut got: Vec<Vec<u64>> = split
        .lin
        .iter()
        .flat_map(|(f, m)| std::iter::repeat(f.coeffs.clone()).take(*m))
        .collect();
    got.sort();
    assert_eq!(planted, got);
    println!("\nrecovered linear part equals the planted shared factors");
}
