//! Particle swarm optimization with pluggable inertia-weight schedules.
//!
//! The engine minimizes. Each iteration moves every particle (velocity then
//! position), evaluates the whole swarm as one batch, updates personal bests
//! on strict improvement and finally updates the global best from the best
//! personal best. All random draws for an iteration happen before the batch
//! is dispatched, so results do not depend on how evaluations are scheduled.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SwarmError {
    #[error("invalid swarm configuration: {0}")]
    Config(String),
    #[error("iteration {iter} is past the budget of {iter_max}")]
    IterationOutOfRange { iter: usize, iter_max: usize },
    #[error("expected {expected} dimensions, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid bound ({low}, {high}) in dimension {dim}")]
    Bounds { dim: usize, low: f64, high: f64 },
    #[error("the swarm has already run its full iteration budget")]
    Finished,
}

/// How the inertia weight evolves over the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSchedule {
    /// Decreases linearly from `w_max` at iteration 0 to `w_min` at `iter_max`.
    LinearDecreasing {
        w_max: f64,
        w_min: f64,
    },
    Constant(f64),
    /// Fresh draw from `0.5 + U[0,1)/2` each iteration.
    Random,
}

impl WeightSchedule {
    pub fn weight<R: Rng + ?Sized>(&self, iter: usize, iter_max: usize, rng: &mut R) -> Result<f64, SwarmError> {
        if iter_max == 0 || iter > iter_max {
            return Err(SwarmError::IterationOutOfRange { iter, iter_max });
        }
        Ok(match *self {
            WeightSchedule::LinearDecreasing { w_max, w_min } => {
                // (iter_max - iter)/iter_max * (w_max - w_min) + w_min, written as a
                // convex combination so both endpoints come out exact.
                let remaining = (iter_max - iter) as f64 / iter_max as f64;
                remaining * w_max + (1.0 - remaining) * w_min
            }
            WeightSchedule::Constant(w) => w,
            WeightSchedule::Random => 0.5 + rng.random::<f64>() / 2.0,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightSchedule::LinearDecreasing { .. } => "linear-decreasing",
            WeightSchedule::Constant(_) => "constant",
            WeightSchedule::Random => "random",
        }
    }
}

impl Default for WeightSchedule {
    fn default() -> Self {
        WeightSchedule::LinearDecreasing { w_max: 0.9, w_min: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub cognitive: f64,
    pub social: f64,
    pub weight_schedule: WeightSchedule,
    /// Per-dimension velocity limit as a fraction of the dimension's range.
    pub velocity_clamp_fraction: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            max_iterations: 10,
            cognitive: 2.0,
            social: 2.0,
            weight_schedule: WeightSchedule::default(),
            velocity_clamp_fraction: 0.5,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), SwarmError> {
        let bad = |m: &str| Err(SwarmError::Config(m.into()));
        if self.swarm_size == 0 {
            return bad("swarm_size must be at least 1");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.cognitive >= 0.0 && self.social >= 0.0) {
            return bad("acceleration coefficients must be non-negative");
        }
        if !(self.velocity_clamp_fraction > 0.0 && self.velocity_clamp_fraction <= 1.0) {
            return bad("velocity_clamp_fraction must lie in (0, 1]");
        }
        match self.weight_schedule {
            WeightSchedule::LinearDecreasing { w_max, w_min } if w_max.is_nan() || w_min.is_nan() || w_max < w_min => {
                bad("w_max must be at least w_min")
            }
            WeightSchedule::Constant(w) if !w.is_finite() => bad("constant weight must be finite"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
}

/// Something that scores a batch of positions. Lower is better.
pub trait Evaluate {
    fn evaluate_all(&self, positions: &[Vec<f64>]) -> Vec<f64>;
}

/// Evaluates positions one after another on the calling thread.
pub struct Serial<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Evaluate for Serial<F> {
    fn evaluate_all(&self, positions: &[Vec<f64>]) -> Vec<f64> {
        positions.iter().map(|p| (self.0)(p)).collect()
    }
}

/// Evaluates a batch on a dedicated worker pool.
pub struct Pooled<F> {
    objective: F,
    pool: rayon::ThreadPool,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Pooled<F> {
    pub fn new(objective: F, workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .expect("failed to build evaluation pool");
        Self { objective, pool }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Evaluate for Pooled<F> {
    fn evaluate_all(&self, positions: &[Vec<f64>]) -> Vec<f64> {
        self.pool.install(|| positions.par_iter().map(|p| (self.objective)(p)).collect())
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

/// One step of the velocity rule for a single particle.
///
/// `r_cognitive` and `r_social` hold the per-dimension uniform draws. The
/// result is clamped to `[-v_max[d], v_max[d]]`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    position: &[f64],
    velocity: &[f64],
    best_position: &[f64],
    global_best: &[f64],
    w: f64,
    cognitive: f64,
    social: f64,
    r_cognitive: &[f64],
    r_social: &[f64],
    v_max: &[f64],
) -> Vec<f64> {
    (0..position.len())
        .map(|d| {
            let v = w * velocity[d]
                + cognitive * r_cognitive[d] * (best_position[d] - position[d])
                + social * r_social[d] * (global_best[d] - position[d]);
            v.clamp(-v_max[d], v_max[d])
        })
        .collect()
}

/// Moves `position` by `velocity` and clamps each coordinate into its bounds.
pub fn position_update(position: &[f64], velocity: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    position.iter().zip(velocity).zip(bounds).map(|((x, v), &(lo, hi))| (x + v).clamp(lo, hi)).collect()
}

/// What happened during one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 0-based iteration index.
    pub iteration: usize,
    pub weight: f64,
    /// Positions evaluated this iteration, in particle order.
    pub positions: Vec<Vec<f64>>,
    /// Fitness of each evaluated position (non-finite mapped to +inf).
    pub fitness: Vec<f64>,
    pub gbest_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct SwarmState {
    config: PsoConfig,
    bounds: Vec<(f64, f64)>,
    v_max: Vec<f64>,
    particles: Vec<Particle>,
    gbest_position: Vec<f64>,
    gbest_fitness: f64,
    iteration: usize,
    rng: ChaCha8Rng,
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<(), SwarmError> {
    for (dim, &(low, high)) in bounds.iter().enumerate() {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(SwarmError::Bounds { dim, low, high });
        }
    }
    Ok(())
}

impl SwarmState {
    /// Places particles uniformly in the box, draws velocities uniformly in
    /// `[-v_max, v_max]` and evaluates the initial swarm.
    ///
    /// Returns the state together with the initial evaluations.
    pub fn initialize<E: Evaluate + ?Sized>(
        config: &PsoConfig,
        bounds: &[(f64, f64)],
        evaluator: &E,
    ) -> Result<(Self, Vec<f64>), SwarmError> {
        config.validate()?;
        check_bounds(bounds)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let v_max: Vec<f64> = bounds.iter().map(|(lo, hi)| config.velocity_clamp_fraction * (hi - lo)).collect();
        let mut positions = Vec::with_capacity(config.swarm_size);
        let mut velocities = Vec::with_capacity(config.swarm_size);
        for _ in 0..config.swarm_size {
            positions.push(bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect());
            velocities.push(v_max.iter().map(|&vm| vm * (2.0 * rng.random::<f64>() - 1.0)).collect());
        }
        Self::assemble(config, bounds, v_max, positions, velocities, rng, evaluator)
    }

    /// Like [`initialize`](Self::initialize) but with caller-chosen starting
    /// positions and velocities. Velocities are clamped to the limit.
    pub fn with_initial<E: Evaluate + ?Sized>(
        config: &PsoConfig,
        bounds: &[(f64, f64)],
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        evaluator: &E,
    ) -> Result<(Self, Vec<f64>), SwarmError> {
        config.validate()?;
        check_bounds(bounds)?;
        if positions.len() != config.swarm_size || velocities.len() != config.swarm_size {
            return Err(SwarmError::Config("one position and velocity per particle required".into()));
        }
        let d = bounds.len();
        for v in positions.iter().chain(&velocities) {
            if v.len() != d {
                return Err(SwarmError::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        let v_max: Vec<f64> = bounds.iter().map(|(lo, hi)| config.velocity_clamp_fraction * (hi - lo)).collect();
        let positions = positions.iter().map(|x| position_update(x, &vec![0.0; d], bounds)).collect();
        let velocities =
            velocities.into_iter().map(|v| v.iter().zip(&v_max).map(|(v, m)| v.clamp(-m, *m)).collect()).collect();
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::assemble(config, bounds, v_max, positions, velocities, rng, evaluator)
    }

    fn assemble<E: Evaluate + ?Sized>(
        config: &PsoConfig,
        bounds: &[(f64, f64)],
        v_max: Vec<f64>,
        positions: Vec<Vec<f64>>,
        velocities: Vec<Vec<f64>>,
        rng: ChaCha8Rng,
        evaluator: &E,
    ) -> Result<(Self, Vec<f64>), SwarmError> {
        let fitness: Vec<f64> = evaluator.evaluate_all(&positions).into_iter().map(sanitize).collect();
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(velocities)
            .zip(&fitness)
            .map(|((position, velocity), &f)| Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_fitness: f,
            })
            .collect();
        let mut state = Self {
            config: config.clone(),
            bounds: bounds.to_vec(),
            v_max,
            gbest_position: particles[0].best_position.clone(),
            gbest_fitness: particles[0].best_fitness,
            particles,
            iteration: 0,
            rng,
        };
        state.update_global_best();
        Ok((state, fitness))
    }

    fn update_global_best(&mut self) {
        // First strictly smallest pBest, so ties go to the lowest index.
        let mut k = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.best_fitness < self.particles[k].best_fitness {
                k = i;
            }
        }
        if self.particles[k].best_fitness < self.gbest_fitness {
            self.gbest_fitness = self.particles[k].best_fitness;
            self.gbest_position = self.particles[k].best_position.clone();
        }
    }

    /// Runs one full iteration: move, evaluate, update pBest then gBest.
    pub fn step<E: Evaluate + ?Sized>(&mut self, evaluator: &E) -> Result<StepRecord, SwarmError> {
        if self.is_finished() {
            return Err(SwarmError::Finished);
        }
        let iteration = self.iteration;
        let w = self.config.weight_schedule.weight(iteration, self.config.max_iterations, &mut self.rng)?;
        let d = self.bounds.len();
        let mut r_p = vec![0.0; d];
        let mut r_g = vec![0.0; d];
        for p in &mut self.particles {
            for j in 0..d {
                r_p[j] = self.rng.random::<f64>();
                r_g[j] = self.rng.random::<f64>();
            }
            p.velocity = velocity_update(
                &p.position,
                &p.velocity,
                &p.best_position,
                &self.gbest_position,
                w,
                self.config.cognitive,
                self.config.social,
                &r_p,
                &r_g,
                &self.v_max,
            );
            p.position = position_update(&p.position, &p.velocity, &self.bounds);
        }
        let positions: Vec<Vec<f64>> = self.particles.iter().map(|p| p.position.clone()).collect();
        let fitness: Vec<f64> = evaluator.evaluate_all(&positions).into_iter().map(sanitize).collect();
        for (p, &f) in self.particles.iter_mut().zip(&fitness) {
            if f < p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position.clone();
            }
        }
        self.update_global_best();
        self.iteration += 1;
        Ok(StepRecord { iteration, weight: w, positions, fitness, gbest_fitness: self.gbest_fitness })
    }

    pub fn is_finished(&self) -> bool {
        self.iteration >= self.config.max_iterations
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn gbest_position(&self) -> &[f64] {
        &self.gbest_position
    }

    pub fn gbest_fitness(&self) -> f64 {
        self.gbest_fitness
    }

    /// Number of completed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn velocity_limits(&self) -> &[f64] {
        &self.v_max
    }

    pub fn config(&self) -> &PsoConfig {
        &self.config
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub gbest_fitness: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// gBest fitness after initialization, before the first iteration.
    pub initial_best_fitness: f64,
    /// One entry per iteration.
    pub history: Vec<HistoryEntry>,
    pub evaluations: usize,
}

impl PsoOutcome {
    /// Writes the history as CSV with columns `iteration,gbest_fitness,weight_used`.
    pub fn write_history_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "gbest_fitness", "weight_used"])?;
        for h in &self.history {
            w.write_record([h.iteration.to_string(), h.gbest_fitness.to_string(), h.weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the full loop on a single thread.
pub fn optimize<F: Fn(&[f64]) -> f64>(
    config: &PsoConfig,
    bounds: &[(f64, f64)],
    objective: F,
) -> Result<PsoOutcome, SwarmError> {
    optimize_with(config, bounds, &Serial(objective), |_| {})
}

/// Runs the full loop with any evaluation backend, calling `observe` after
/// every iteration.
pub fn optimize_with<E, O>(
    config: &PsoConfig,
    bounds: &[(f64, f64)],
    evaluator: &E,
    mut observe: O,
) -> Result<PsoOutcome, SwarmError>
where
    E: Evaluate + ?Sized,
    O: FnMut(&StepRecord),
{
    let (mut state, initial) = SwarmState::initialize(config, bounds, evaluator)?;
    let mut evaluations = initial.len();
    let initial_best_fitness = state.gbest_fitness();
    let mut history = Vec::with_capacity(config.max_iterations);
    while !state.is_finished() {
        let record = state.step(evaluator)?;
        evaluations += record.fitness.len();
        history.push(HistoryEntry {
            iteration: record.iteration,
            gbest_fitness: record.gbest_fitness,
            weight: record.weight,
        });
        observe(&record);
    }
    Ok(PsoOutcome {
        best_position: state.gbest_position().to_vec(),
        best_fitness: state.gbest_fitness(),
        initial_best_fitness,
        history,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Mutex;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn ldw() -> WeightSchedule {
        WeightSchedule::LinearDecreasing { w_max: 0.9, w_min: 0.4 }
    }

    #[test]
    fn linear_weight_endpoints_and_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ldw().weight(0, 10, &mut rng).unwrap(), 0.9);
        assert_eq!(ldw().weight(10, 10, &mut rng).unwrap(), 0.4);
        assert_eq!(ldw().weight(5, 10, &mut rng).unwrap(), 0.65);
        assert_eq!(ldw().weight(11, 10, &mut rng), Err(SwarmError::IterationOutOfRange { iter: 11, iter_max: 10 }));
    }

    #[test]
    fn constant_and_random_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(WeightSchedule::Constant(0.7).weight(4, 10, &mut rng).unwrap(), 0.7);
        for i in 0..=100 {
            let w = WeightSchedule::Random.weight(i, 100, &mut rng).unwrap();
            assert!((0.5..1.0).contains(&w));
        }
    }

    #[test]
    fn velocity_update_by_hand() {
        // 0.5*1 + 2*0.5*(2-0) + 2*0.5*(4-0)
        let v = velocity_update(&[0.0], &[1.0], &[2.0], &[4.0], 0.5, 2.0, 2.0, &[0.5], &[0.5], &[f64::INFINITY]);
        assert_eq!(v, vec![6.5]);
        let v = velocity_update(&[3.0], &[1.5], &[3.0], &[3.0], 0.7, 2.0, 2.0, &[0.3], &[0.9], &[10.0]);
        assert_eq!(v, vec![0.7 * 1.5]);
        let v = velocity_update(&[1.0], &[5.0], &[2.0], &[9.0], 0.0, 2.0, 2.0, &[0.0], &[0.0], &[10.0]);
        assert_eq!(v, vec![0.0]);
        let v = velocity_update(&[0.0], &[1.0], &[2.0], &[4.0], 0.5, 2.0, 2.0, &[0.5], &[0.5], &[3.0]);
        assert_eq!(v, vec![3.0]);
    }

    #[test]
    fn position_update_clamps() {
        let b = [(-10.0, 10.0)];
        assert_eq!(position_update(&[1.0], &[6.5], &b), vec![7.5]);
        assert_eq!(position_update(&[1.0], &[0.0], &b), vec![1.0]);
        assert_eq!(position_update(&[9.0], &[5.0], &b), vec![10.0]);
        assert_eq!(position_update(&[-9.0], &[-5.0], &b), vec![-10.0]);
    }

    #[test]
    fn rejects_bad_configs() {
        let b = [(-1.0, 1.0)];
        let cfg = PsoConfig { swarm_size: 0, ..Default::default() };
        assert!(matches!(optimize(&cfg, &b, sphere), Err(SwarmError::Config(_))));
        let cfg = PsoConfig { max_iterations: 0, ..Default::default() };
        assert!(matches!(optimize(&cfg, &b, sphere), Err(SwarmError::Config(_))));
        let cfg = PsoConfig { velocity_clamp_fraction: 0.0, ..Default::default() };
        assert!(matches!(optimize(&cfg, &b, sphere), Err(SwarmError::Config(_))));
        let cfg = PsoConfig {
            weight_schedule: WeightSchedule::LinearDecreasing { w_max: 0.4, w_min: 0.9 },
            ..Default::default()
        };
        assert!(matches!(optimize(&cfg, &b, sphere), Err(SwarmError::Config(_))));
        assert!(matches!(optimize(&PsoConfig::default(), &[(1.0, -1.0)], sphere), Err(SwarmError::Bounds { .. })));
    }

    #[test]
    fn sphere_improves() {
        let cfg = PsoConfig { max_iterations: 100, ..Default::default() };
        let out = optimize(&cfg, &[(-5.12, 5.12); 10], sphere).unwrap();
        assert!(out.best_fitness < out.initial_best_fitness);
        assert_eq!(out.history.len(), 100);
        assert_eq!(out.evaluations, 10 * 101);
        for w in out.history.windows(2) {
            assert!(w[1].gbest_fitness <= w[0].gbest_fitness);
        }
        assert_eq!(out.history[0].weight, 0.9);
    }

    #[test]
    fn frozen_particle_never_moves() {
        let cfg = PsoConfig {
            swarm_size: 1,
            max_iterations: 20,
            cognitive: 0.0,
            social: 0.0,
            weight_schedule: WeightSchedule::Constant(0.5),
            ..Default::default()
        };
        let ev = Serial(sphere);
        let (mut s, _) =
            SwarmState::with_initial(&cfg, &[(-5.0, 5.0)], vec![vec![1.25]], vec![vec![0.0]], &ev).unwrap();
        while !s.is_finished() {
            s.step(&ev).unwrap();
        }
        assert_eq!(s.particles()[0].position, vec![1.25]);
        assert_eq!(s.gbest_position(), &[1.25]);
        assert_eq!(s.gbest_fitness(), 1.5625);
    }

    #[test]
    fn non_finite_fitness_never_becomes_best() {
        let cfg = PsoConfig { swarm_size: 6, max_iterations: 15, ..Default::default() };
        let out = optimize(&cfg, &[(-5.0, 5.0); 2], |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { sphere(x) }).unwrap();
        assert!(out.best_fitness.is_finite());
        assert!(out.best_position[0] <= 0.0);
    }

    #[test]
    fn all_infinite_keeps_infinite_gbest() {
        let cfg = PsoConfig { swarm_size: 3, max_iterations: 2, ..Default::default() };
        let out = optimize(&cfg, &[(-1.0, 1.0)], |_: &[f64]| f64::INFINITY).unwrap();
        assert_eq!(out.best_fitness, f64::INFINITY);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let cfg = PsoConfig { swarm_size: 4, max_iterations: 1, ..Default::default() };
        let ev = Serial(|_: &[f64]| 1.0);
        let (s, _) = SwarmState::initialize(&cfg, &[(-1.0, 1.0); 2], &ev).unwrap();
        assert_eq!(s.gbest_position(), s.particles()[0].position.as_slice());
    }

    #[test]
    fn pooled_matches_serial() {
        let cfg = PsoConfig { swarm_size: 8, max_iterations: 25, seed: 11, ..Default::default() };
        let b = [(-5.12, 5.12); 4];
        let a = optimize(&cfg, &b, sphere).unwrap();
        let p = optimize_with(&cfg, &b, &Pooled::new(sphere, 3), |_| {}).unwrap();
        assert_eq!(a, p);
    }

    #[test]
    fn history_csv_layout() {
        let cfg = PsoConfig { swarm_size: 2, max_iterations: 3, ..Default::default() };
        let out = optimize(&cfg, &[(-1.0, 1.0)], sphere).unwrap();
        let mut buf = Vec::new();
        out.write_history_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,gbest_fitness,weight_used");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[1].ends_with(",0.9"));
    }

    proptest! {
        #[test]
        fn linear_schedule_endpoints_exact(a in 0.0f64..5.0, delta in 0.0f64..5.0, m in 1usize..1000) {
            let b = a - delta;
            let s = WeightSchedule::LinearDecreasing { w_max: a, w_min: b };
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            prop_assert_eq!(s.weight(0, m, &mut rng).unwrap(), a);
            prop_assert_eq!(s.weight(m, m, &mut rng).unwrap(), b);
            let mid = s.weight(m / 2, m, &mut rng).unwrap();
            prop_assert!(mid <= a && mid >= b);
        }

        #[test]
        fn pbest_dominates_every_visited_point(seed in any::<u64>(), n in 1usize..8, iters in 1usize..20) {
            let cfg = PsoConfig { swarm_size: n, max_iterations: iters, seed, ..Default::default() };
            let bounds = [(-5.12, 5.12); 3];
            let ev = Serial(sphere);
            let (mut s, init) = SwarmState::initialize(&cfg, &bounds, &ev).unwrap();
            let mut seen: Vec<Vec<f64>> = init.iter().map(|&f| vec![f]).collect();
            while !s.is_finished() {
                let rec = s.step(&ev).unwrap();
                for (i, f) in rec.fitness.iter().enumerate() {
                    seen[i].push(*f);
                }
                for (p, log) in s.particles().iter().zip(&seen) {
                    prop_assert!(log.iter().all(|&f| p.best_fitness <= f));
                    prop_assert_eq!(p.best_fitness, sphere(&p.best_position));
                }
            }
        }
    }

    #[test]
    fn evaluation_log_matches_record() {
        let log = Mutex::new(Vec::new());
        let cfg = PsoConfig { swarm_size: 3, max_iterations: 4, ..Default::default() };
        let out = optimize(&cfg, &[(-2.0, 2.0); 2], |x: &[f64]| {
            log.lock().unwrap().push(x.to_vec());
            sphere(x)
        })
        .unwrap();
        assert_eq!(log.lock().unwrap().len(), out.evaluations);
    }
}
