//! Linear-decreasing versus constant inertia weight on sphere and Rastrigin.
//!
//! Prints the median final gBest fitness over 20 seeds for each schedule.
//!
//! ```text
//! cargo run --release --example bench_schedules -- [first_seed] [dim] [iterations]
//! ```

use ldwpso::bench::BenchFunction;
use ldwpso::swarm::{optimize, PsoConfig, WeightSchedule};

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let first_seed = args.next().unwrap_or(1000);
    let dim = args.next().unwrap_or(10) as usize;
    let iterations = args.next().unwrap_or(100) as usize;
    let schedules = [
        WeightSchedule::LinearDecreasing { w_max: 0.9, w_min: 0.4 },
        WeightSchedule::Constant(0.4),
        WeightSchedule::Constant(0.9),
        WeightSchedule::Random,
    ];
    for f in [BenchFunction::sphere(dim), BenchFunction::rastrigin(dim)] {
        println!("{} D={dim}, N=10, {iterations} iterations, seeds {first_seed}..{}", f.name, first_seed + 19);
        for schedule in schedules {
            let finals: Vec<f64> = (first_seed..first_seed + 20)
                .map(|seed| {
                    let cfg = PsoConfig {
                        swarm_size: 10,
                        max_iterations: iterations,
                        weight_schedule: schedule,
                        seed,
                        ..PsoConfig::default()
                    };
                    optimize(&cfg, &f.bounds, |x| f.eval(x)).unwrap().best_fitness
                })
                .collect();
            let label = match schedule {
                WeightSchedule::Constant(w) => format!("constant {w}"),
                other => other.name().to_string(),
            };
            println!(
                "  {label:<18} median {:.4e}  worst {:.4e}",
                median(finals.clone()),
                finals.iter().cloned().fold(0.0, f64::max)
            );
        }
    }
}
