//! Saves a network's parameters to a file and restores them into a fresh
//! network of the same shape.
//!
//! ```text
//! cargo run --example save_load_network -- [path]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter};

use ldwpso::nn::{Network, Tensor};
use ldwpso::space::baseline_params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("lenet5.params").display().to_string());
    let params = baseline_params();
    let mut trained = Network::build(&params, (1, 28, 28), 7)?;
    trained.save_parameters(BufWriter::new(File::create(&path)?))?;
    println!("wrote {} parameters to {path}", trained.parameter_count());

    let mut restored = Network::build(&params, (1, 28, 28), 8)?;
    restored.load_parameters(BufReader::new(File::open(&path)?))?;

    let x = Tensor::from_vec(vec![2, 1, 28, 28], (0..2 * 784).map(|i| (i % 17) as f64 / 16.0).collect());
    let a = trained.forward(&x)?;
    let b = restored.forward(&x)?;
    println!("identical outputs: {}", a.data() == b.data());
    Ok(())
}
