//! Generate a seeded random fan-in-2 circuit, inspect its canonical
//! G·(c1·T1 + c2·T2) decomposition, and round-trip it through the JSON
//! file format.
//!
//! Run with: cargo run --release --example generate_and_inspect

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sps2::circuit::{random_instance, InstanceMode, SpsCircuit};
use sps2::field::Field;
use std::rc::Rc;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    // Evaluation field F_{7^2}; circuit data stays over F_7.
    let field = Rc::new(Field::extension(7, 2, &mut rng).unwrap());
    let inst = random_instance(5, 4, &field, 5, InstanceMode::General, &mut rng).unwrap();

    println!("n = {}, d = {}, top fan-in = {}", inst.circuit.n, inst.circuit.d, inst.circuit.k());
    let t = &inst.truth;
    println!("shared factors G: {:?}", t.g.iter().map(|f| &f.coeffs).collect::<Vec<_>>());
    println!("T1 factors:       {:?}", t.t1.iter().map(|f| &f.coeffs).collect::<Vec<_>>());
    println!("T2 factors:       {:?}", t.t2.iter().map(|f| &f.coeffs).collect::<Vec<_>>());
    println!("rank sp(T1 ∪ T2) = {}", t.rank);

    // JSON round trip is canonical: serialize, parse, serialize again.
    let json = inst.circuit.to_json();
    let back = SpsCircuit::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
    println!("\ncircuit JSON ({} bytes) round-trips byte-identically", json.len());

    // The oracle evaluates the same polynomial as the explicit circuit.
    let o = inst.circuit.oracle();
    let pt = sps2::oracle::random_point(&field, 5, &mut rng);
    assert_eq!(o.eval(&pt).unwrap(), inst.circuit.eval(&pt));
    println!("oracle and circuit agree at a random point of F_{{7^2}}^5");
}
