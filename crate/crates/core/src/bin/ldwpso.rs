use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use ldwpso::experiment::{
    compare, comparison_table, prepare_data, read_report_rows, run_baseline, run_bench, run_ldwpso,
    schedule_from_parts, write_comparison_csv, DatasetKind, ExperimentConfig, ExperimentError, FitnessTarget,
};
use ldwpso::swarm::{PsoConfig, WeightSchedule};

#[derive(Parser)]
#[command(name = "ldwpso", version, about = "Particle swarm hyperparameter search for a LeNet-5 style CNN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the baseline configuration R times and report per-epoch test accuracy.
    Baseline(ExperimentArgs),
    /// Search hyperparameters with the swarm, retrain the best, R times.
    Ldwpso(ExperimentArgs),
    /// Run the swarm on an analytic test function and write its history.
    Bench(BenchArgs),
    /// Combine a baseline and an ldwpso report into one comparison table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SwarmArgs {
    #[arg(long)]
    swarm_size: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    cognitive: Option<f64>,
    #[arg(long)]
    social: Option<f64>,
    /// linear-decreasing, constant or random
    #[arg(long)]
    weight_schedule: Option<String>,
    #[arg(long)]
    w_max: Option<f64>,
    #[arg(long)]
    w_min: Option<f64>,
    #[arg(long)]
    constant_weight: Option<f64>,
    #[arg(long)]
    velocity_clamp: Option<f64>,
}

impl SwarmArgs {
    fn apply(&self, pso: &mut PsoConfig) -> Result<(), ExperimentError> {
        if let Some(v) = self.swarm_size {
            pso.swarm_size = v;
        }
        if let Some(v) = self.iterations {
            pso.max_iterations = v;
        }
        if let Some(v) = self.cognitive {
            pso.cognitive = v;
        }
        if let Some(v) = self.social {
            pso.social = v;
        }
        if let Some(v) = self.velocity_clamp {
            pso.velocity_clamp_fraction = v;
        }
        if self.weight_schedule.is_some()
            || self.w_max.is_some()
            || self.w_min.is_some()
            || self.constant_weight.is_some()
        {
            let (cur_max, cur_min, cur_const) = match pso.weight_schedule {
                WeightSchedule::LinearDecreasing { w_max, w_min } => (Some(w_max), Some(w_min), None),
                WeightSchedule::Constant(w) => (None, None, Some(w)),
                WeightSchedule::Random => (None, None, None),
            };
            let name = self.weight_schedule.as_deref().unwrap_or(match pso.weight_schedule {
                WeightSchedule::Constant(_) => "constant",
                WeightSchedule::Random => "random",
                WeightSchedule::LinearDecreasing { .. } => "linear-decreasing",
            });
            pso.weight_schedule = schedule_from_parts(
                Some(name),
                self.w_max.or(cur_max),
                self.w_min.or(cur_min),
                self.constant_weight.or(cur_const),
            )?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// mnist or cifar10
    #[arg(long)]
    dataset: Option<DatasetKind>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Epochs of every reported training run.
    #[arg(long)]
    epochs: Option<usize>,
    /// Epochs of each training run inside the swarm's objective.
    #[arg(long)]
    fitness_epochs: Option<usize>,
    #[arg(long)]
    train_subset: Option<usize>,
    #[arg(long)]
    eval_subset: Option<usize>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    /// validation or test
    #[arg(long)]
    fitness_target: Option<FitnessTarget>,
    /// Pixel multiplier after 1/255 scaling (255 = raw bytes).
    #[arg(long)]
    input_scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    swarm: SwarmArgs,
    /// Report CSV; companion files are written next to it.
    #[arg(long)]
    out: PathBuf,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::new(self.dataset.unwrap_or(DatasetKind::Mnist)),
        };
        if let Some(d) = self.dataset {
            if d != c.dataset {
                c.dataset = d;
                c.eval_epochs = d.default_eval_epochs();
                c.fitness_epochs = c.eval_epochs;
                c.data_dir = PathBuf::from("data").join(d.as_str());
            }
        }
        if let Some(v) = &self.data_dir {
            c.data_dir = v.clone();
        }
        if let Some(v) = self.repeats {
            c.repeats = v;
        }
        if let Some(v) = self.epochs {
            c.eval_epochs = v;
        }
        if let Some(v) = self.fitness_epochs {
            c.fitness_epochs = v;
        }
        if self.train_subset.is_some() {
            c.train_subset = self.train_subset;
        }
        if self.eval_subset.is_some() {
            c.eval_subset = self.eval_subset;
        }
        if let Some(v) = self.validation_fraction {
            c.validation_fraction = v;
        }
        if let Some(v) = self.fitness_target {
            c.fitness_target = v;
        }
        if let Some(v) = self.input_scale {
            c.input_scale = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        self.swarm.apply(&mut c.pso)?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct BenchArgs {
    /// sphere or rastrigin
    #[arg(long, default_value = "sphere")]
    function: String,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    swarm: SwarmArgs,
    /// Also run a constant-weight swarm and write both histories.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long)]
    ldwpso: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// `dir/name.csv` -> `dir/name_<suffix>.csv`
fn companion(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn baseline(args: &ExperimentArgs) -> Result<(), ExperimentError> {
    let cfg = args.resolve()?;
    let data = prepare_data(&cfg)?;
    let report = run_baseline(&cfg, &data)?;
    report.write_csv(create(&args.out)?)?;
    print!("{}", report.summary());
    info!("wrote {}", args.out.display());
    Ok(())
}

fn ldwpso(args: &ExperimentArgs) -> Result<(), ExperimentError> {
    let cfg = args.resolve()?;
    let data = prepare_data(&cfg)?;
    let run = run_ldwpso(&cfg, &data)?;
    run.report.write_csv(create(&args.out)?)?;
    run.report.write_hyperparams_csv(create(&companion(&args.out, "hyperparams"))?)?;
    run.write_history_csv(create(&companion(&args.out, "history"))?)?;
    run.write_evaluations_csv(create(&companion(&args.out, "evaluations"))?)?;
    print!("{}", run.report.summary());
    for (r, p) in run.report.chosen.iter().enumerate() {
        println!("repeat {}: {p}", r + 1);
    }
    info!("wrote {} and companions", args.out.display());
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<(), ExperimentError> {
    let mut pso = PsoConfig { seed: args.seed, ..PsoConfig::default() };
    args.swarm.apply(&mut pso)?;
    let mut runs = vec![(args.out.clone(), pso.clone())];
    if args.compare {
        let constant = WeightSchedule::Constant(args.swarm.constant_weight.unwrap_or(0.4));
        let ldw = PsoConfig { weight_schedule: WeightSchedule::default(), ..pso.clone() };
        let ldw = match pso.weight_schedule {
            WeightSchedule::LinearDecreasing { .. } => pso.clone(),
            _ => ldw,
        };
        runs = vec![
            (companion(&args.out, "linear-decreasing"), ldw),
            (companion(&args.out, "constant"), PsoConfig { weight_schedule: constant, ..pso }),
        ];
    }
    for (path, cfg) in runs {
        let outcome = run_bench(&cfg, &args.function, args.dim)?;
        outcome.write_history_csv(create(&path)?)?;
        println!(
            "{} {}D, {}: initial gbest {:e}, final gbest {:e} after {} evaluations -> {}",
            args.function,
            args.dim,
            cfg.weight_schedule.name(),
            outcome.initial_best_fitness,
            outcome.best_fitness,
            outcome.evaluations,
            path.display()
        );
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), ExperimentError> {
    let read = |p: &Path| -> Result<_, ExperimentError> { read_report_rows(File::open(p)?) };
    let rows = compare(&read(&args.baseline)?, &read(&args.ldwpso)?)?;
    write_comparison_csv(&rows, create(&args.out)?)?;
    print!("{}", comparison_table(&rows));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Baseline(a) => baseline(a),
        Command::Ldwpso(a) => ldwpso(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
