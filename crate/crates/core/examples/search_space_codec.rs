//! Walks a few swarm coordinates through the hyperparameter codec.
//!
//! ```text
//! cargo run --example search_space_codec
//! ```

use ldwpso::space::{baseline_params, canonical_space};

fn main() {
    let space = canonical_space();
    println!("{} dimensions", space.dim());
    for (p, (lo, hi)) in space.params().iter().zip(space.continuous_bounds()) {
        println!("  {:<32} [{lo:>8.3}, {hi:>8.3}]", p.label);
    }

    let base = baseline_params();
    let x = space.encode(&base).unwrap();
    println!("\nbaseline   {base}\nencoded    {x:?}");

    // Out-of-range and non-finite coordinates still decode to a valid network.
    let wild = [3.5, 100.5, -2.0, 1.7, 0.49, 0.5, 9.0, f64::NAN, 4.2, 200.6, 55.5, 1.4];
    println!("\ncoordinates {wild:?}\ndecoded     {}", space.decode(&wild).unwrap());
}
