use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use toml::Value;

use super::ExperimentError;
use crate::space::{baseline_params, canonical_space, HyperParams, ParamKind, ParamSpec, SearchSpace};
use crate::swarm::{PsoConfig, WeightSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Cifar10,
}

impl DatasetKind {
    /// Training length of every reported run.
    pub fn default_eval_epochs(self) -> usize {
        match self {
            DatasetKind::Mnist => 5,
            DatasetKind::Cifar10 => 10,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Cifar10 => "cifar10",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mnist" => Ok(DatasetKind::Mnist),
            "cifar10" => Ok(DatasetKind::Cifar10),
            _ => Err(format!("unknown dataset `{s}` (expected mnist or cifar10)")),
        }
    }
}

/// Which split the swarm's fitness is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessTarget {
    /// A held-out part of the training data.
    Validation,
    Test,
}

impl fmt::Display for FitnessTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessTarget::Validation => "validation",
            FitnessTarget::Test => "test",
        })
    }
}

impl FromStr for FitnessTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "validation" => Ok(FitnessTarget::Validation),
            "test" => Ok(FitnessTarget::Test),
            _ => Err(format!("unknown fitness target `{s}` (expected validation or test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    /// Directory holding the dataset's files.
    pub data_dir: PathBuf,
    /// Epochs of every reported training run.
    pub eval_epochs: usize,
    /// Epochs of each training run inside the swarm's objective.
    pub fitness_epochs: usize,
    pub repeats: usize,
    pub pso: PsoConfig,
    pub train_subset: Option<usize>,
    /// Size of the test subset used for reporting (and for fitness in test mode).
    pub eval_subset: Option<usize>,
    pub validation_fraction: f64,
    pub fitness_target: FitnessTarget,
    /// Multiplier applied to every loaded pixel after the 1/255 scaling;
    /// 255 feeds the network raw byte values.
    pub input_scale: f64,
    /// Master seed; every other seed derives from it.
    pub seed: u64,
    /// Evaluation threads; 0 means one per available core.
    pub workers: usize,
    pub space: SearchSpace,
    pub baseline: HyperParams,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetKind) -> Self {
        let epochs = dataset.default_eval_epochs();
        Self {
            dataset,
            data_dir: PathBuf::from("data").join(dataset.as_str()),
            eval_epochs: epochs,
            fitness_epochs: epochs,
            repeats: 30,
            pso: PsoConfig::default(),
            train_subset: None,
            eval_subset: None,
            validation_fraction: 0.1,
            fitness_target: FitnessTarget::Validation,
            input_scale: 1.0,
            seed: 0,
            workers: 0,
            space: canonical_space(),
            baseline: baseline_params(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.eval_epochs == 0 || self.fitness_epochs == 0 {
            return bad("eval_epochs and fitness_epochs must be at least 1".into());
        }
        if self.fitness_target == FitnessTarget::Validation
            && !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0)
        {
            return bad(format!("validation_fraction {} must lie in (0, 1)", self.validation_fraction));
        }
        if !(self.input_scale.is_finite() && self.input_scale > 0.0) {
            return bad(format!("input_scale {} must be positive and finite", self.input_scale));
        }
        if self.train_subset == Some(0) || self.eval_subset == Some(0) {
            return bad("subset sizes must be at least 1".into());
        }
        self.pso.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.space.check_network_compatible().map_err(|e| ExperimentError::Config(e.to_string()))?;
        self.baseline.validate().map_err(|e| ExperimentError::Config(format!("baseline: {e}")))?;
        Ok(())
    }

    pub fn effective_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// Reads a TOML file.
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        file.into_config()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dataset: Option<String>,
    data_dir: Option<PathBuf>,
    eval_epochs: Option<usize>,
    fitness_epochs: Option<usize>,
    repeats: Option<usize>,
    train_subset: Option<usize>,
    eval_subset: Option<usize>,
    validation_fraction: Option<f64>,
    fitness_target: Option<String>,
    input_scale: Option<f64>,
    seed: Option<u64>,
    workers: Option<usize>,
    swarm_size: Option<usize>,
    max_iterations: Option<usize>,
    cognitive: Option<f64>,
    social: Option<f64>,
    weight_schedule: Option<String>,
    w_max: Option<f64>,
    w_min: Option<f64>,
    constant_weight: Option<f64>,
    velocity_clamp_fraction: Option<f64>,
    space: Option<toml::Table>,
    baseline: Option<toml::Table>,
}

impl FileConfig {
    fn into_config(self) -> Result<ExperimentConfig, ExperimentError> {
        let cfg_err = ExperimentError::Config;
        let dataset = match &self.dataset {
            Some(s) => s.parse().map_err(cfg_err)?,
            None => DatasetKind::Mnist,
        };
        let mut c = ExperimentConfig::new(dataset);
        if let Some(v) = self.data_dir {
            c.data_dir = v;
        }
        if let Some(v) = self.eval_epochs {
            c.eval_epochs = v;
            c.fitness_epochs = v;
        }
        if let Some(v) = self.fitness_epochs {
            c.fitness_epochs = v;
        }
        if let Some(v) = self.repeats {
            c.repeats = v;
        }
        c.train_subset = self.train_subset;
        c.eval_subset = self.eval_subset;
        if let Some(v) = self.validation_fraction {
            c.validation_fraction = v;
        }
        if let Some(s) = &self.fitness_target {
            c.fitness_target = s.parse().map_err(cfg_err)?;
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
        if let Some(v) = self.swarm_size {
            c.pso.swarm_size = v;
        }
        if let Some(v) = self.max_iterations {
            c.pso.max_iterations = v;
        }
        if let Some(v) = self.cognitive {
            c.pso.cognitive = v;
        }
        if let Some(v) = self.social {
            c.pso.social = v;
        }
        if let Some(v) = self.velocity_clamp_fraction {
            c.pso.velocity_clamp_fraction = v;
        }
        c.pso.weight_schedule =
            schedule_from_parts(self.weight_schedule.as_deref(), self.w_max, self.w_min, self.constant_weight)?;
        if let Some(table) = &self.space {
            c.space = space_from_table(c.space, table)?;
        }
        if let Some(table) = &self.baseline {
            c.baseline = baseline_from_table(c.baseline, table)?;
        }
        Ok(c)
    }
}

/// Builds a schedule from its name and optional parameters. Missing values
/// fall back to 0.9, 0.4 and a constant weight of 0.4.
pub fn schedule_from_parts(
    name: Option<&str>,
    w_max: Option<f64>,
    w_min: Option<f64>,
    constant: Option<f64>,
) -> Result<WeightSchedule, ExperimentError> {
    let (default_max, default_min) = match WeightSchedule::default() {
        WeightSchedule::LinearDecreasing { w_max, w_min } => (w_max, w_min),
        _ => unreachable!(),
    };
    match name.unwrap_or("linear-decreasing") {
        "linear-decreasing" | "ldw" => Ok(WeightSchedule::LinearDecreasing {
            w_max: w_max.unwrap_or(default_max),
            w_min: w_min.unwrap_or(default_min),
        }),
        "constant" => Ok(WeightSchedule::Constant(constant.unwrap_or(default_min))),
        "random" => Ok(WeightSchedule::Random),
        other => Err(ExperimentError::Config(format!(
            "unknown weight schedule `{other}` (expected linear-decreasing, constant or random)"
        ))),
    }
}

fn space_from_table(space: SearchSpace, table: &toml::Table) -> Result<SearchSpace, ExperimentError> {
    let err = |m: String| ExperimentError::Config(format!("[space] {m}"));
    let mut space = space;
    for (key, value) in table {
        let current = space.param(key).ok_or_else(|| err(format!("unknown parameter `{key}`")))?.clone();
        let kind = match (&current.kind, value) {
            (ParamKind::IntRange { .. }, Value::Array(a)) if a.len() == 2 => {
                match (a[0].as_integer(), a[1].as_integer()) {
                    (Some(low), Some(high)) => ParamKind::IntRange { low, high },
                    _ => return Err(err(format!("`{key}` expects [low, high] integers"))),
                }
            }
            (ParamKind::Categorical(_), Value::Array(a)) => {
                let labels = a
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => Ok(s.clone()),
                        Value::Integer(i) => Ok(i.to_string()),
                        _ => Err(err(format!("`{key}` expects a list of labels"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ParamKind::Categorical(labels)
            }
            _ => return Err(err(format!("`{key}` has the wrong shape"))),
        };
        let spec = ParamSpec { kind, ..current };
        space = space.with_param(spec).map_err(|e| err(e.to_string()))?;
    }
    Ok(space)
}

fn baseline_from_table(base: HyperParams, table: &toml::Table) -> Result<HyperParams, ExperimentError> {
    let err = |m: String| ExperimentError::Config(format!("[baseline] {m}"));
    let space = canonical_space();
    let mut merged = toml::Table::try_from(base).map_err(|e| err(e.to_string()))?;
    for (key, value) in table {
        let name = space.param(key).map(|p| p.name.clone()).ok_or_else(|| err(format!("unknown parameter `{key}`")))?;
        let value = match value {
            Value::String(s) => Value::String(s.to_ascii_lowercase()),
            v => v.clone(),
        };
        merged.insert(name, value);
    }
    let params: HyperParams = merged.try_into().map_err(|e: toml::de::Error| err(e.to_string()))?;
    params.validate().map_err(|e| err(e.to_string()))?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Activation;

    #[test]
    fn empty_file_gives_full_scale_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::new(DatasetKind::Mnist));
        assert_eq!(c.repeats, 30);
        assert_eq!(c.pso.swarm_size, 10);
        assert_eq!(c.pso.max_iterations, 10);
        assert_eq!(c.eval_epochs, 5);
        assert_eq!(ExperimentConfig::new(DatasetKind::Cifar10).eval_epochs, 10);
        c.validate().unwrap();
    }

    #[test]
    fn keys_override_defaults() {
        let c = ExperimentConfig::from_toml(
            r#"
            dataset = "cifar10"
            eval_epochs = 4
            fitness_epochs = 2
            repeats = 3
            train_subset = 5000
            fitness_target = "test"
            swarm_size = 4
            max_iterations = 3
            weight_schedule = "constant"
            constant_weight = 0.7
            input_scale = 255.0
            "#,
        )
        .unwrap();
        assert_eq!(c.dataset, DatasetKind::Cifar10);
        assert_eq!((c.eval_epochs, c.fitness_epochs, c.repeats), (4, 2, 3));
        assert_eq!(c.train_subset, Some(5000));
        assert_eq!(c.fitness_target, FitnessTarget::Test);
        assert_eq!((c.pso.swarm_size, c.pso.max_iterations), (4, 3));
        assert_eq!(c.pso.weight_schedule, WeightSchedule::Constant(0.7));
        assert_eq!(c.input_scale, 255.0);
    }

    #[test]
    fn space_and_baseline_tables_accept_row_labels() {
        let c = ExperimentConfig::from_toml(
            r#"
            [space]
            "Number of filters in C1" = [4, 20]
            kernel_c2 = [3, 5]
            [baseline]
            "Activation function in FC2" = "ReLU"
            batch_size = 32
            "#,
        )
        .unwrap();
        assert_eq!(c.space.param("filters_c1").unwrap().kind, ParamKind::IntRange { low: 4, high: 20 });
        assert_eq!(c.space.param("kernel_c2").unwrap().kind, ParamKind::Categorical(vec!["3".into(), "5".into()]));
        assert_eq!(c.baseline.act_fc2, Activation::Relu);
        assert_eq!(c.baseline.batch_size, 32);
        c.validate().unwrap();
    }

    #[test]
    fn bad_files_are_config_errors() {
        for text in [
            "unknown_key = 1",
            "dataset = \"imagenet\"",
            "fitness_target = \"train\"",
            "weight_schedule = \"chaotic\"",
            "[space]\nfilters_c1 = [\"a\", \"b\"]",
            "[space]\nnot_a_param = [1, 2]",
            "[baseline]\nbatch_size = 500",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(ExperimentError::Config(_))), "{text}");
        }
        let mut c = ExperimentConfig::new(DatasetKind::Mnist);
        c.validation_fraction = 1.0;
        assert!(c.validate().is_err());
        c.fitness_target = FitnessTarget::Test;
        c.validate().unwrap();
        c.input_scale = 0.0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig::from_toml("[space]\nfilters_c1 = [1, 300]").unwrap();
        assert!(c.validate().is_err());
    }
}
