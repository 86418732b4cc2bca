use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;

use super::config::{DatasetKind, ExperimentConfig, FitnessTarget};
use super::report::RunReport;
use super::ExperimentError;
use crate::bench::BenchFunction;
use crate::data::{self, Dataset, Split};
use crate::nn::{train, Network, NnError, TrainConfig, LEARNING_RATE};
use crate::space::{HyperParams, SearchSpace};
use crate::swarm::{self, Evaluate, PsoConfig, PsoOutcome, StepRecord, SwarmState};

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `tag` under `parent`. Distinct tags give independent streams.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix(parent ^ mix(tag))
}

mod tag {
    pub const DATA_SUBSET: u64 = 1;
    pub const EVAL_SUBSET: u64 = 2;
    pub const VALIDATION: u64 = 3;
    pub const BASELINE: u64 = 10;
    pub const LDWPSO: u64 = 11;
    pub const INIT: u64 = 20;
    pub const SHUFFLE: u64 = 21;
    pub const SWARM: u64 = 22;
    pub const FITNESS_INIT: u64 = 23;
    pub const FITNESS_SHUFFLE: u64 = 24;
}

/// Seeds of repeat `repeat` (0-based) of `method`.
fn repeat_seed(master: u64, method: u64, repeat: usize) -> u64 {
    derive_seed(derive_seed(master, method), repeat as u64)
}

/// The datasets an experiment trains and evaluates on.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Training data of every reported run.
    pub train: Dataset,
    /// Untouched data every reported accuracy is measured on.
    pub test: Dataset,
    /// Training data inside the swarm's objective.
    pub fitness_train: Dataset,
    /// Data the objective's accuracy is measured on.
    pub fitness_eval: Dataset,
}

/// Loads the configured dataset and cuts the subsets and the fitness split.
/// Missing or malformed files fail here, before any training.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData, ExperimentError> {
    cfg.validate()?;
    let (train, test) = match cfg.dataset {
        DatasetKind::Mnist => {
            (data::load_mnist_dir(&cfg.data_dir, Split::Train)?, data::load_mnist_dir(&cfg.data_dir, Split::Test)?)
        }
        DatasetKind::Cifar10 => {
            (data::load_cifar10_dir(&cfg.data_dir, Split::Train)?, data::load_cifar10_dir(&cfg.data_dir, Split::Test)?)
        }
    };
    let (train, test) = if cfg.input_scale == 1.0 {
        (train, test)
    } else {
        (rescale(train, cfg.input_scale), rescale(test, cfg.input_scale))
    };
    let train = match cfg.train_subset {
        Some(n) => data::subsample(&train, n, derive_seed(cfg.seed, tag::DATA_SUBSET))?,
        None => train,
    };
    let test = match cfg.eval_subset {
        Some(n) => data::subsample(&test, n, derive_seed(cfg.seed, tag::EVAL_SUBSET))?,
        None => test,
    };
    let (fitness_train, fitness_eval) = match cfg.fitness_target {
        FitnessTarget::Validation => {
            data::split(&train, 1.0 - cfg.validation_fraction, derive_seed(cfg.seed, tag::VALIDATION))?
        }
        FitnessTarget::Test => (train.clone(), test.clone()),
    };
    if fitness_train.is_empty() || fitness_eval.is_empty() {
        return Err(ExperimentError::Config("the fitness split leaves an empty part".into()));
    }
    info!(
        "{}: train {}, test {}, fitness train {}, fitness eval {} ({})",
        cfg.dataset,
        train.len(),
        test.len(),
        fitness_train.len(),
        fitness_eval.len(),
        cfg.fitness_target
    );
    Ok(PreparedData { train, test, fitness_train, fitness_eval })
}

fn rescale(mut ds: Dataset, factor: f64) -> Dataset {
    ds.images.data_mut().iter_mut().for_each(|v| *v *= factor);
    ds
}

/// Trains `params` from `init_seed` and returns test accuracy (percent) per epoch.
fn train_reported(
    params: &HyperParams,
    data: &PreparedData,
    epochs: usize,
    init_seed: u64,
    shuffle_seed: u64,
) -> Result<Vec<f64>, NnError> {
    let mut net = Network::build(params, data.train.sample_shape(), init_seed)?;
    let cfg = TrainConfig {
        epochs,
        batch_size: params.batch_size,
        learning_rate: LEARNING_RATE,
        optimizer: params.optimizer,
        seed: shuffle_seed,
    };
    let stats = train(&mut net, &data.train, &cfg, &data.test)?;
    Ok(stats.iter().map(|s| 100.0 * s.eval_accuracy).collect())
}

fn map_training_error(e: NnError, method: &str, repeat: usize) -> ExperimentError {
    match e {
        NnError::Diverged { epoch } => ExperimentError::Diverged { method: method.into(), repeat: repeat + 1, epoch },
        other => ExperimentError::Network(other),
    }
}

/// Trains the baseline configuration once per repeat.
pub fn run_baseline(cfg: &ExperimentConfig, data: &PreparedData) -> Result<RunReport, ExperimentError> {
    cfg.validate()?;
    let mut accuracies = Vec::with_capacity(cfg.repeats);
    let start = Instant::now();
    for r in 0..cfg.repeats {
        let seed = repeat_seed(cfg.seed, tag::BASELINE, r);
        let acc = train_reported(
            &cfg.baseline,
            data,
            cfg.eval_epochs,
            derive_seed(seed, tag::INIT),
            derive_seed(seed, tag::SHUFFLE),
        )
        .map_err(|e| map_training_error(e, "baseline", r))?;
        info!("baseline repeat {}/{}: final accuracy {:.2}%", r + 1, cfg.repeats, acc.last().unwrap());
        accuracies.push(acc);
    }
    Ok(RunReport {
        method: "baseline".into(),
        dataset: cfg.dataset.to_string(),
        accuracies,
        chosen: vec![cfg.baseline; cfg.repeats],
        timings: vec![("training".into(), start.elapsed())],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStatus {
    Ok,
    /// A feature map would shrink to nothing.
    Rejected,
    Diverged,
}

impl EvalStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalStatus::Ok => "ok",
            EvalStatus::Rejected => "rejected",
            EvalStatus::Diverged => "diverged",
        }
    }
}

/// Outcome of training one configuration inside the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `1 - accuracy`, or infinity for rejected and diverged configurations.
    pub fitness: f64,
    /// Accuracy on the fitness split, as a fraction.
    pub accuracy: Option<f64>,
    pub status: EvalStatus,
    pub reason: String,
}

/// One row of the evaluation log.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalLogEntry {
    /// 1-based.
    pub repeat: usize,
    /// 0 for the initial swarm, `k` for iteration `k - 1`.
    pub round: usize,
    pub particle: usize,
    pub params: HyperParams,
    pub evaluation: Evaluation,
    /// The configuration was already trained earlier in this repeat.
    pub cached: bool,
}

/// Fitness of a position: decode, build, train on the fitness split and
/// score `1 - accuracy`. Results are memoized per configuration, since the
/// training seeds are fixed within a repeat.
struct CnnObjective<'a> {
    space: &'a SearchSpace,
    data: &'a PreparedData,
    epochs: usize,
    init_seed: u64,
    shuffle_seed: u64,
    pool: rayon::ThreadPool,
    cache: Mutex<HashMap<HyperParams, Evaluation>>,
}

impl CnnObjective<'_> {
    fn decode(&self, position: &[f64]) -> HyperParams {
        self.space.decode(position).expect("space validated and bounds match its dimension")
    }

    fn evaluate_params(&self, params: &HyperParams) -> Evaluation {
        let fail = |status, reason: String| Evaluation { fitness: f64::INFINITY, accuracy: None, status, reason };
        let start = Instant::now();
        let mut net = match Network::build(params, self.data.fitness_train.sample_shape(), self.init_seed) {
            Ok(n) => n,
            Err(e) => return fail(EvalStatus::Rejected, e.to_string()),
        };
        let cfg = TrainConfig {
            epochs: self.epochs,
            batch_size: params.batch_size,
            learning_rate: LEARNING_RATE,
            optimizer: params.optimizer,
            seed: self.shuffle_seed,
        };
        match train(&mut net, &self.data.fitness_train, &cfg, &self.data.fitness_eval) {
            Ok(stats) => {
                let acc = stats.last().unwrap().eval_accuracy;
                info!("evaluated {params}: accuracy {:.2}% in {:.1?}", 100.0 * acc, start.elapsed());
                Evaluation { fitness: 1.0 - acc, accuracy: Some(acc), status: EvalStatus::Ok, reason: String::new() }
            }
            Err(e @ NnError::Diverged { .. }) => fail(EvalStatus::Diverged, e.to_string()),
            Err(e) => fail(EvalStatus::Rejected, e.to_string()),
        }
    }

    fn lookup(&self, params: &HyperParams) -> Evaluation {
        self.cache.lock().unwrap()[params].clone()
    }
}

impl Evaluate for CnnObjective<'_> {
    fn evaluate_all(&self, positions: &[Vec<f64>]) -> Vec<f64> {
        let params: Vec<HyperParams> = positions.iter().map(|p| self.decode(p)).collect();
        let mut fresh: Vec<HyperParams> = Vec::new();
        {
            let cache = self.cache.lock().unwrap();
            for p in &params {
                if !cache.contains_key(p) && !fresh.contains(p) {
                    fresh.push(*p);
                }
            }
        }
        let results: Vec<Evaluation> =
            self.pool.install(|| fresh.par_iter().map(|p| self.evaluate_params(p)).collect());
        let mut cache = self.cache.lock().unwrap();
        for (p, e) in fresh.into_iter().zip(results) {
            if e.status != EvalStatus::Ok {
                warn!("{p}: {} ({})", e.status.as_str(), e.reason);
            }
            cache.insert(p, e);
        }
        params.iter().map(|p| cache[p].fitness).collect()
    }
}

/// Everything one LDWPSO experiment produces.
#[derive(Debug, Clone)]
pub struct LdwpsoRun {
    pub report: RunReport,
    /// Per repeat: the swarm's trajectory summary.
    pub searches: Vec<PsoOutcome>,
    pub evaluations: Vec<EvalLogEntry>,
}

/// Runs the swarm search, then retrains its best configuration, per repeat.
pub fn run_ldwpso(cfg: &ExperimentConfig, data: &PreparedData) -> Result<LdwpsoRun, ExperimentError> {
    cfg.validate()?;
    let bounds = cfg.space.continuous_bounds();
    let workers = cfg.effective_workers();
    let mut accuracies = Vec::with_capacity(cfg.repeats);
    let mut chosen = Vec::with_capacity(cfg.repeats);
    let mut searches = Vec::with_capacity(cfg.repeats);
    let mut evaluations = Vec::new();
    let (mut search_time, mut retrain_time) = (Duration::ZERO, Duration::ZERO);

    for r in 0..cfg.repeats {
        let seed = repeat_seed(cfg.seed, tag::LDWPSO, r);
        let objective = CnnObjective {
            space: &cfg.space,
            data,
            epochs: cfg.fitness_epochs,
            init_seed: derive_seed(seed, tag::FITNESS_INIT),
            shuffle_seed: derive_seed(seed, tag::FITNESS_SHUFFLE),
            pool: rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?,
            cache: Mutex::new(HashMap::new()),
        };
        let pso = PsoConfig { seed: derive_seed(seed, tag::SWARM), ..cfg.pso.clone() };

        let t = Instant::now();
        let mut seen: Vec<HyperParams> = Vec::new();
        let mut log_round = |round: usize, positions: &[Vec<f64>], log: &mut Vec<EvalLogEntry>| {
            for (i, x) in positions.iter().enumerate() {
                let params = objective.decode(x);
                let cached = seen.contains(&params);
                if !cached {
                    seen.push(params);
                }
                log.push(EvalLogEntry {
                    repeat: r + 1,
                    round,
                    particle: i,
                    params,
                    evaluation: objective.lookup(&params),
                    cached,
                });
            }
        };

        let (mut state, initial) =
            SwarmState::initialize(&pso, &bounds, &objective).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let initial_positions: Vec<Vec<f64>> = state.particles().iter().map(|p| p.position.clone()).collect();
        log_round(0, &initial_positions, &mut evaluations);
        if initial.iter().all(|f| f.is_infinite()) {
            return Err(ExperimentError::AllInfeasible { repeat: r + 1 });
        }
        let initial_best_fitness = state.gbest_fitness();
        let mut history = Vec::with_capacity(pso.max_iterations);
        let mut n_evals = initial.len();
        while !state.is_finished() {
            let StepRecord { iteration, weight, positions, fitness, gbest_fitness } =
                state.step(&objective).map_err(|e| ExperimentError::Config(e.to_string()))?;
            n_evals += fitness.len();
            log_round(iteration + 1, &positions, &mut evaluations);
            history.push(swarm::HistoryEntry { iteration, gbest_fitness, weight });
            info!(
                "ldwpso repeat {}/{} iteration {}/{}: w {:.3}, gbest fitness {:.4}",
                r + 1,
                cfg.repeats,
                iteration + 1,
                pso.max_iterations,
                weight,
                gbest_fitness
            );
        }
        search_time += t.elapsed();
        let best = objective.decode(state.gbest_position());
        info!("ldwpso repeat {}/{}: chose {best}", r + 1, cfg.repeats);
        searches.push(PsoOutcome {
            best_position: state.gbest_position().to_vec(),
            best_fitness: state.gbest_fitness(),
            initial_best_fitness,
            history,
            evaluations: n_evals,
        });

        let t = Instant::now();
        let acc =
            train_reported(&best, data, cfg.eval_epochs, derive_seed(seed, tag::INIT), derive_seed(seed, tag::SHUFFLE))
                .map_err(|e| map_training_error(e, "ldwpso", r))?;
        retrain_time += t.elapsed();
        info!("ldwpso repeat {}/{}: final accuracy {:.2}%", r + 1, cfg.repeats, acc.last().unwrap());
        accuracies.push(acc);
        chosen.push(best);
    }
    Ok(LdwpsoRun {
        report: RunReport {
            method: "ldwpso".into(),
            dataset: cfg.dataset.to_string(),
            accuracies,
            chosen,
            timings: vec![("search".into(), search_time), ("retraining".into(), retrain_time)],
        },
        searches,
        evaluations,
    })
}

impl LdwpsoRun {
    /// Columns: `repeat,iteration,gbest_fitness,weight_used`.
    pub fn write_history_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["repeat", "iteration", "gbest_fitness", "weight_used"])?;
        for (r, s) in self.searches.iter().enumerate() {
            for h in &s.history {
                w.write_record([
                    (r + 1).to_string(),
                    h.iteration.to_string(),
                    h.gbest_fitness.to_string(),
                    h.weight.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One row per objective call, including cache hits.
    pub fn write_evaluations_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["repeat", "round", "particle"];
        header.extend(HyperParams::FIELD_NAMES);
        header.extend(["fitness", "accuracy", "status", "cached", "reason"]);
        w.write_record(&header)?;
        for e in &self.evaluations {
            let mut rec = vec![e.repeat.to_string(), e.round.to_string(), e.particle.to_string()];
            rec.extend(e.params.fields().into_iter().map(|(_, v)| v));
            rec.extend([
                e.evaluation.fitness.to_string(),
                e.evaluation.accuracy.map_or_else(String::new, |a| a.to_string()),
                e.evaluation.status.as_str().to_string(),
                e.cached.to_string(),
                e.evaluation.reason.clone(),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the swarm on an analytic function.
pub fn run_bench(pso: &PsoConfig, function: &str, dim: usize) -> Result<PsoOutcome, ExperimentError> {
    let f = BenchFunction::by_name(function, dim).ok_or_else(|| {
        ExperimentError::Config(format!("unknown function `{function}` (expected sphere or rastrigin)"))
    })?;
    swarm::optimize(pso, &f.bounds, |x| f.eval(x)).map_err(|e| ExperimentError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;
    use crate::space::baseline_params;
    use crate::swarm::WeightSchedule;

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let mut all: Vec<u64> = Vec::new();
        for m in [tag::BASELINE, tag::LDWPSO] {
            for r in 0..30 {
                let s = repeat_seed(7, m, r);
                for t in [tag::INIT, tag::SHUFFLE, tag::SWARM, tag::FITNESS_INIT, tag::FITNESS_SHUFFLE] {
                    all.push(derive_seed(s, t));
                }
            }
        }
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(repeat_seed(7, tag::BASELINE, 0), repeat_seed(8, tag::BASELINE, 0));
    }

    fn tiny_data() -> PreparedData {
        let make = |n: usize| {
            let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
            let pixels = (0..n * 784).map(|i| ((i / 784) % 2) as f64 * ((i % 28) as f64 / 28.0)).collect();
            Dataset::new(Tensor::from_vec(vec![n, 1, 28, 28], pixels), labels, "tiny")
        };
        PreparedData { train: make(12), test: make(6), fitness_train: make(10), fitness_eval: make(4) }
    }

    fn tiny_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(DatasetKind::Mnist);
        c.space = c
            .space
            .clone()
            .with_param(crate::space::ParamSpec::int_range("filters_c1", "Number of filters in C1", 4, 5))
            .unwrap()
            .with_param(crate::space::ParamSpec::int_range("filters_c2", "Number of filters in C2", 4, 5))
            .unwrap()
            .with_param(crate::space::ParamSpec::int_range("neurons_fc1", "Number of neurons in FC1", 4, 8))
            .unwrap();
        c.eval_epochs = 2;
        c.fitness_epochs = 1;
        c.repeats = 2;
        c.pso = PsoConfig { swarm_size: 3, max_iterations: 2, ..PsoConfig::default() };
        c.workers = 2;
        c.seed = 5;
        c
    }

    #[test]
    fn baseline_report_shape() {
        let mut cfg = tiny_config();
        cfg.baseline =
            HyperParams { filters_c1: 4, filters_c2: 4, neurons_fc1: 8, neurons_fc2: 8, ..baseline_params() };
        let rep = run_baseline(&cfg, &tiny_data()).unwrap();
        assert_eq!(rep.repeats(), 2);
        assert_eq!(rep.epochs(), 2);
        assert!(rep.accuracies.iter().flatten().all(|a| (0.0..=100.0).contains(a)));
    }

    #[test]
    fn ldwpso_logs_every_evaluation_and_is_deterministic() {
        let cfg = tiny_config();
        let data = tiny_data();
        let a = run_ldwpso(&cfg, &data).unwrap();
        assert_eq!(a.evaluations.len(), 2 * 3 * 3);
        assert_eq!(a.report.chosen.len(), 2);
        for s in &a.searches {
            assert_eq!(s.history.len(), 2);
            assert_eq!(s.evaluations, 9);
            assert_eq!(s.history[0].weight, 0.9);
            assert!(s.history.windows(2).all(|w| w[1].gbest_fitness <= w[0].gbest_fitness));
        }
        for e in &a.evaluations {
            e.params.validate().unwrap();
            let acc = e.evaluation.accuracy.unwrap();
            assert_eq!(e.evaluation.fitness, 1.0 - acc);
        }
        let mut single = cfg.clone();
        single.workers = 1;
        let b = run_ldwpso(&single, &data).unwrap();
        let csv = |r: &LdwpsoRun| {
            let mut buf = Vec::new();
            r.report.write_csv(&mut buf).unwrap();
            r.write_history_csv(&mut buf).unwrap();
            r.write_evaluations_csv(&mut buf).unwrap();
            r.report.write_hyperparams_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(csv(&a), csv(&b));
    }

    #[test]
    fn all_rejected_initial_swarm_aborts() {
        let mut cfg = tiny_config();
        cfg.repeats = 1;
        let mut data = tiny_data();
        // 5x5 inputs collapse under every kernel in the space.
        let small = |n: usize| Dataset::new(Tensor::zeros(vec![n, 1, 5, 5]), vec![0; n], "small");
        data.fitness_train = small(4);
        data.fitness_eval = small(2);
        assert!(matches!(run_ldwpso(&cfg, &data), Err(ExperimentError::AllInfeasible { repeat: 1 })));
    }

    #[test]
    fn bench_runs_and_rejects_unknown_names() {
        let pso = PsoConfig { swarm_size: 5, max_iterations: 20, seed: 1, ..PsoConfig::default() };
        let out = run_bench(&pso, "rastrigin", 2).unwrap();
        assert_eq!(out.history.len(), 20);
        assert_eq!(out, run_bench(&pso, "rastrigin", 2).unwrap());
        assert!(matches!(run_bench(&pso, "ackley", 2), Err(ExperimentError::Config(_))));
        let c = PsoConfig { weight_schedule: WeightSchedule::Constant(0.4), ..pso };
        assert!(run_bench(&c, "sphere", 3).unwrap().history.iter().all(|h| h.weight == 0.4));
    }
}
