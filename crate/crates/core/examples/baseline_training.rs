//! Trains the LeNet-5 baseline on MNIST and prints per-epoch test accuracy.
//!
//! ```text
//! cargo run --release --example baseline_training -- data/mnist 5 [train_subset] [seed] [input_scale]
//! ```

use std::time::Instant;

use ldwpso::data::{load_mnist_dir, subsample, Split};
use ldwpso::nn::{train_with, Network, TrainConfig, LEARNING_RATE};
use ldwpso::space::baseline_params;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "data/mnist".into());
    let epochs: usize = args.next().map_or(Ok(5), |s| s.parse())?;
    let subset: Option<usize> = args.next().filter(|s| s != "-").map(|s| s.parse()).transpose()?;
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let scale: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;

    let mut train_set = load_mnist_dir(&dir, Split::Train)?;
    if let Some(n) = subset {
        train_set = subsample(&train_set, n, 0)?;
    }
    let mut test_set = load_mnist_dir(&dir, Split::Test)?;
    for d in [&mut train_set, &mut test_set] {
        d.images.data_mut().iter_mut().for_each(|v| *v *= scale);
    }
    let params = baseline_params();
    println!("baseline: {params}");

    let mut net = Network::build(&params, train_set.sample_shape(), seed)?;
    let cfg = TrainConfig {
        epochs,
        batch_size: params.batch_size,
        learning_rate: LEARNING_RATE,
        optimizer: params.optimizer,
        seed: seed + 1,
    };
    let start = Instant::now();
    train_with(&mut net, &train_set, &cfg, &test_set, |s| {
        println!(
            "epoch {:>2}  loss {:.4}  test accuracy {:.2}%  ({:.1}s)",
            s.epoch,
            s.train_loss,
            100.0 * s.eval_accuracy,
            start.elapsed().as_secs_f64()
        );
    })?;
    Ok(())
}
