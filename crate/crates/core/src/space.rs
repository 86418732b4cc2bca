//! Hyperparameter search space for the LeNet-5 style network and the codec
//! between concrete configurations and the continuous coordinates a swarm
//! moves through.
//!
//! Every parameter occupies one coordinate. Integer ranges embed as the
//! integer itself, categorical parameters embed as the index of the label in
//! their (fixed) list. Decoding rounds half away from zero and clamps, so any
//! real vector of the right length decodes to a valid configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Padding added on both sides of every dimension's continuous interval so
/// that boundary values are reachable by rounding with near-equal measure.
pub const BOUND_PADDING: f64 = 0.499;

pub const FILTERS_RANGE: (i64, i64) = (4, 100);
pub const NEURONS_RANGE: (i64, i64) = (4, 200);
pub const BATCH_RANGE: (i64, i64) = (10, 100);
pub const KERNEL_SIZES: [usize; 3] = [3, 5, 7];

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("parameter `{0}` has an empty integer range")]
    EmptyRange(String),
    #[error("categorical parameter `{0}` has no labels")]
    NoLabels(String),
    #[error("categorical parameter `{name}` repeats label `{label}`")]
    DuplicateLabel { name: String, label: String },
    #[error("parameter name `{0}` appears more than once")]
    DuplicateName(String),
    #[error("position has {found} coordinates, space has {expected} dimensions")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("space has no parameter `{0}`")]
    MissingParam(String),
    #[error("parameter `{name}` has the wrong kind for a network configuration")]
    WrongKind { name: String },
    #[error("value `{value}` is not allowed for parameter `{name}`")]
    InvalidValue { name: String, value: String },
}

/// Activation functions selectable for each convolution and dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Relu, Activation::Tanh];

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

/// Gradient-based training rule used to fit a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    /// Inclusive integer interval.
    IntRange { low: i64, high: i64 },
    /// Ordered labels; the position of a label is its coordinate.
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    /// Identifier used in configuration files and CSV headers.
    pub name: String,
    /// Human readable row label.
    pub label: String,
    pub kind: ParamKind,
}

impl ParamSpec {
    pub fn int_range(name: &str, label: &str, low: i64, high: i64) -> Self {
        Self { name: name.into(), label: label.into(), kind: ParamKind::IntRange { low, high } }
    }

    pub fn categorical<S: ToString>(name: &str, label: &str, labels: &[S]) -> Self {
        Self {
            name: name.into(),
            label: label.into(),
            kind: ParamKind::Categorical(labels.iter().map(ToString::to_string).collect()),
        }
    }

    fn validate(&self) -> Result<(), SpaceError> {
        match &self.kind {
            ParamKind::IntRange { low, high } if low > high => Err(SpaceError::EmptyRange(self.name.clone())),
            ParamKind::IntRange { .. } => Ok(()),
            ParamKind::Categorical(labels) => {
                if labels.is_empty() {
                    return Err(SpaceError::NoLabels(self.name.clone()));
                }
                for (i, l) in labels.iter().enumerate() {
                    if labels[..i].contains(l) {
                        return Err(SpaceError::DuplicateLabel { name: self.name.clone(), label: l.clone() });
                    }
                }
                Ok(())
            }
        }
    }

    /// Continuous interval searched for this parameter.
    pub fn continuous_bounds(&self) -> (f64, f64) {
        match &self.kind {
            ParamKind::IntRange { low, high } => (*low as f64 - BOUND_PADDING, *high as f64 + BOUND_PADDING),
            ParamKind::Categorical(labels) => (-BOUND_PADDING, (labels.len() - 1) as f64 + BOUND_PADDING),
        }
    }

    fn decode_coordinate(&self, x: f64) -> Value<'_> {
        match &self.kind {
            ParamKind::IntRange { low, high } => Value::Int(round_clamp(x, *low, *high)),
            ParamKind::Categorical(labels) => {
                let idx = round_clamp(x, 0, labels.len() as i64 - 1) as usize;
                Value::Label(&labels[idx])
            }
        }
    }
}

/// Rounds half away from zero and clamps into `[low, high]`. NaN maps to `low`.
fn round_clamp(x: f64, low: i64, high: i64) -> i64 {
    let r = x.round();
    if r.is_nan() {
        low
    } else {
        r.clamp(low as f64, high as f64) as i64
    }
}

enum Value<'a> {
    Int(i64),
    Label(&'a str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    params: Vec<ParamSpec>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self, SpaceError> {
        for (i, p) in params.iter().enumerate() {
            p.validate()?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(SpaceError::DuplicateName(p.name.clone()));
            }
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// Looks a parameter up by identifier or by row label.
    pub fn param(&self, key: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == key || p.label == key)
    }

    fn index_of(&self, name: &str) -> Result<usize, SpaceError> {
        self.params.iter().position(|p| p.name == name).ok_or_else(|| SpaceError::MissingParam(name.into()))
    }

    pub fn continuous_bounds(&self) -> Vec<(f64, f64)> {
        self.params.iter().map(ParamSpec::continuous_bounds).collect()
    }

    /// Replaces the definition of an existing parameter, keeping its position.
    pub fn with_param(mut self, spec: ParamSpec) -> Result<Self, SpaceError> {
        spec.validate()?;
        let idx = self.index_of(&spec.name)?;
        self.params[idx] = spec;
        Ok(self)
    }

    /// Checks that this space can be decoded into a [`HyperParams`]: every
    /// network parameter is present with the right kind and only admits values
    /// inside the network's legal ranges.
    pub fn check_network_compatible(&self) -> Result<(), SpaceError> {
        for (name, expect) in NETWORK_PARAMS {
            let p = &self.params[self.index_of(name)?];
            match (&p.kind, expect) {
                (ParamKind::IntRange { low, high }, Expect::Int(lo, hi)) => {
                    if *low < lo || *high > hi {
                        return Err(SpaceError::InvalidValue {
                            name: p.name.clone(),
                            value: format!("{low}..={high}"),
                        });
                    }
                }
                (ParamKind::Categorical(labels), Expect::Kernel) => {
                    for l in labels {
                        parse_kernel(name, l)?;
                    }
                }
                (ParamKind::Categorical(labels), Expect::Activation) => {
                    for l in labels {
                        parse_label::<Activation>(name, l)?;
                    }
                }
                (ParamKind::Categorical(labels), Expect::Optimizer) => {
                    for l in labels {
                        parse_label::<OptimizerKind>(name, l)?;
                    }
                }
                _ => return Err(SpaceError::WrongKind { name: p.name.clone() }),
            }
        }
        Ok(())
    }

    /// Maps a coordinate vector to a concrete configuration.
    ///
    /// Out-of-bounds and non-finite coordinates are clamped, so the only
    /// failure modes are a length mismatch or a space that does not describe
    /// the network's parameters.
    pub fn decode(&self, position: &[f64]) -> Result<HyperParams, SpaceError> {
        if position.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch { expected: self.dim(), found: position.len() });
        }
        let value = |name: &str| -> Result<Value<'_>, SpaceError> {
            let i = self.index_of(name)?;
            Ok(self.params[i].decode_coordinate(position[i]))
        };
        let int = |name: &str| -> Result<usize, SpaceError> {
            match value(name)? {
                Value::Int(v) => Ok(v as usize),
                Value::Label(_) => Err(SpaceError::WrongKind { name: name.into() }),
            }
        };
        let label = |name: &str| -> Result<&str, SpaceError> {
            match value(name)? {
                Value::Label(l) => Ok(l),
                Value::Int(_) => Err(SpaceError::WrongKind { name: name.into() }),
            }
        };
        let act = |name: &str| parse_label::<Activation>(name, label(name)?);

        let params = HyperParams {
            filters_c1: int("filters_c1")?,
            filters_c2: int("filters_c2")?,
            kernel_c1: parse_kernel("kernel_c1", label("kernel_c1")?)?,
            kernel_c2: parse_kernel("kernel_c2", label("kernel_c2")?)?,
            act_c1: act("act_c1")?,
            act_c2: act("act_c2")?,
            act_fc1: act("act_fc1")?,
            act_fc2: act("act_fc2")?,
            neurons_fc1: int("neurons_fc1")?,
            neurons_fc2: int("neurons_fc2")?,
            batch_size: int("batch_size")?,
            optimizer: parse_label::<OptimizerKind>("optimizer", label("optimizer")?)?,
        };
        params.validate()?;
        Ok(params)
    }

    /// Inverse of [`decode`](Self::decode) on valid configurations.
    pub fn encode(&self, params: &HyperParams) -> Result<Vec<f64>, SpaceError> {
        let fields = params.fields();
        let mut out = Vec::with_capacity(self.dim());
        for p in &self.params {
            let (_, value) =
                fields.iter().find(|(n, _)| *n == p.name).ok_or_else(|| SpaceError::MissingParam(p.name.clone()))?;
            let coord = match &p.kind {
                ParamKind::IntRange { low, high } => {
                    let v: i64 = value.parse().map_err(|_| SpaceError::WrongKind { name: p.name.clone() })?;
                    if v < *low || v > *high {
                        return Err(SpaceError::InvalidValue { name: p.name.clone(), value: value.clone() });
                    }
                    v as f64
                }
                ParamKind::Categorical(labels) => labels
                    .iter()
                    .position(|l| l.eq_ignore_ascii_case(value))
                    .ok_or_else(|| SpaceError::InvalidValue { name: p.name.clone(), value: value.clone() })?
                    as f64,
            };
            out.push(coord);
        }
        Ok(out)
    }
}

fn parse_label<T: FromStr>(name: &str, label: &str) -> Result<T, SpaceError> {
    label.parse().map_err(|_| SpaceError::InvalidValue { name: name.into(), value: label.into() })
}

fn parse_kernel(name: &str, label: &str) -> Result<usize, SpaceError> {
    match label.trim().parse::<usize>() {
        Ok(k) if KERNEL_SIZES.contains(&k) => Ok(k),
        _ => Err(SpaceError::InvalidValue { name: name.into(), value: label.into() }),
    }
}

enum Expect {
    Int(i64, i64),
    Kernel,
    Activation,
    Optimizer,
}

const NETWORK_PARAMS: [(&str, Expect); 12] = [
    ("filters_c1", Expect::Int(FILTERS_RANGE.0, FILTERS_RANGE.1)),
    ("filters_c2", Expect::Int(FILTERS_RANGE.0, FILTERS_RANGE.1)),
    ("kernel_c1", Expect::Kernel),
    ("kernel_c2", Expect::Kernel),
    ("act_c1", Expect::Activation),
    ("act_c2", Expect::Activation),
    ("act_fc1", Expect::Activation),
    ("act_fc2", Expect::Activation),
    ("neurons_fc1", Expect::Int(NEURONS_RANGE.0, NEURONS_RANGE.1)),
    ("neurons_fc2", Expect::Int(NEURONS_RANGE.0, NEURONS_RANGE.1)),
    ("batch_size", Expect::Int(BATCH_RANGE.0, BATCH_RANGE.1)),
    ("optimizer", Expect::Optimizer),
];

/// The twelve-parameter space searched by the swarm, in the order
/// C1 filters, C2 filters, C1 kernel, C2 kernel, four activations, FC1/FC2
/// neurons, batch size, optimizer.
pub fn canonical_space() -> SearchSpace {
    let acts = ["sigmoid", "relu", "tanh"];
    SearchSpace::new(vec![
        ParamSpec::int_range("filters_c1", "Number of filters in C1", 4, 100),
        ParamSpec::int_range("filters_c2", "Number of filters in C2", 4, 100),
        ParamSpec::categorical("kernel_c1", "Size of kernel in C1", &KERNEL_SIZES),
        ParamSpec::categorical("kernel_c2", "Size of kernel in C2", &KERNEL_SIZES),
        ParamSpec::categorical("act_c1", "Activation function in C1", &acts),
        ParamSpec::categorical("act_c2", "Activation function in C2", &acts),
        ParamSpec::categorical("act_fc1", "Activation function in FC1", &acts),
        ParamSpec::categorical("act_fc2", "Activation function in FC2", &acts),
        ParamSpec::int_range("neurons_fc1", "Number of neurons in FC1", 4, 200),
        ParamSpec::int_range("neurons_fc2", "Number of neurons in FC2", 4, 200),
        ParamSpec::int_range("batch_size", "Batch size in the training", 10, 100),
        ParamSpec::categorical("optimizer", "Optimizer", &["adam", "sgd"]),
    ])
    .expect("canonical space is well formed")
}

/// A concrete network and training configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperParams {
    pub filters_c1: usize,
    pub filters_c2: usize,
    pub kernel_c1: usize,
    pub kernel_c2: usize,
    pub act_c1: Activation,
    pub act_c2: Activation,
    pub act_fc1: Activation,
    pub act_fc2: Activation,
    pub neurons_fc1: usize,
    pub neurons_fc2: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
}

impl HyperParams {
    /// Field names in canonical order, matching the CSV column order.
    pub const FIELD_NAMES: [&'static str; 12] = [
        "filters_c1",
        "filters_c2",
        "kernel_c1",
        "kernel_c2",
        "act_c1",
        "act_c2",
        "act_fc1",
        "act_fc2",
        "neurons_fc1",
        "neurons_fc2",
        "batch_size",
        "optimizer",
    ];

    pub fn validate(&self) -> Result<(), SpaceError> {
        let check = |name: &str, v: usize, (lo, hi): (i64, i64)| {
            if (v as i64) < lo || (v as i64) > hi {
                Err(SpaceError::InvalidValue { name: name.into(), value: v.to_string() })
            } else {
                Ok(())
            }
        };
        check("filters_c1", self.filters_c1, FILTERS_RANGE)?;
        check("filters_c2", self.filters_c2, FILTERS_RANGE)?;
        check("neurons_fc1", self.neurons_fc1, NEURONS_RANGE)?;
        check("neurons_fc2", self.neurons_fc2, NEURONS_RANGE)?;
        check("batch_size", self.batch_size, BATCH_RANGE)?;
        for (name, k) in [("kernel_c1", self.kernel_c1), ("kernel_c2", self.kernel_c2)] {
            if !KERNEL_SIZES.contains(&k) {
                return Err(SpaceError::InvalidValue { name: name.into(), value: k.to_string() });
            }
        }
        Ok(())
    }

    /// `(name, value)` pairs in canonical order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.filters_c1.to_string(),
            self.filters_c2.to_string(),
            self.kernel_c1.to_string(),
            self.kernel_c2.to_string(),
            self.act_c1.to_string(),
            self.act_c2.to_string(),
            self.act_fc1.to_string(),
            self.act_fc2.to_string(),
            self.neurons_fc1.to_string(),
            self.neurons_fc2.to_string(),
            self.batch_size.to_string(),
            self.optimizer.to_string(),
        ];
        Self::FIELD_NAMES.into_iter().zip(values).collect()
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C1 {}x{}k {} | C2 {}x{}k {} | FC1 {} {} | FC2 {} {} | batch {} | {}",
            self.filters_c1,
            self.kernel_c1,
            self.act_c1,
            self.filters_c2,
            self.kernel_c2,
            self.act_c2,
            self.neurons_fc1,
            self.act_fc1,
            self.neurons_fc2,
            self.act_fc2,
            self.batch_size,
            self.optimizer
        )
    }
}

/// The fixed LeNet-5 comparison configuration.
pub fn baseline_params() -> HyperParams {
    HyperParams {
        filters_c1: 6,
        filters_c2: 16,
        kernel_c1: 5,
        kernel_c2: 5,
        act_c1: Activation::Sigmoid,
        act_c2: Activation::Sigmoid,
        act_fc1: Activation::Sigmoid,
        act_fc2: Activation::Sigmoid,
        neurons_fc1: 120,
        neurons_fc2: 84,
        batch_size: 10,
        optimizer: OptimizerKind::Sgd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_space_matches_table() {
        let s = canonical_space();
        assert_eq!(s.dim(), 12);
        let f1 = s.param("Number of filters in C1").unwrap();
        assert_eq!(f1.kind, ParamKind::IntRange { low: 4, high: 100 });
        let opt = s.param("Optimizer").unwrap();
        assert_eq!(opt.kind, ParamKind::Categorical(vec!["adam".into(), "sgd".into()]));
        assert_eq!(s.param("neurons_fc2").unwrap().kind, ParamKind::IntRange { low: 4, high: 200 });
        assert_eq!(s.param("batch_size").unwrap().kind, ParamKind::IntRange { low: 10, high: 100 });
        s.check_network_compatible().unwrap();
    }

    #[test]
    fn baseline_is_lenet5() {
        let b = baseline_params();
        assert_eq!((b.filters_c1, b.filters_c2), (6, 16));
        assert_eq!((b.kernel_c1, b.kernel_c2), (5, 5));
        assert_eq!(b.act_fc2, Activation::Sigmoid);
        assert_eq!((b.neurons_fc1, b.neurons_fc2), (120, 84));
        assert_eq!(b.batch_size, 10);
        assert_eq!(b.optimizer, OptimizerKind::Sgd);
        b.validate().unwrap();
    }

    #[test]
    fn bounds_follow_padding_rule() {
        let s = canonical_space();
        let b = s.continuous_bounds();
        assert_eq!(b[0], (3.501, 100.499));
        assert_eq!(b[2], (-0.499, 2.499));
        assert_eq!(b[11], (-0.499, 1.499));
    }

    #[test]
    fn decode_rounds_and_clamps() {
        let s = canonical_space();
        let mut x = s.encode(&baseline_params()).unwrap();
        x[0] = 5.4;
        x[2] = 1.7;
        x[4] = -3.0;
        let p = s.decode(&x).unwrap();
        assert_eq!(p.filters_c1, 5);
        assert_eq!(p.kernel_c1, 7);
        assert_eq!(p.act_c1, Activation::Sigmoid);

        x[0] = 4.5;
        assert_eq!(s.decode(&x).unwrap().filters_c1, 5, "half rounds away from zero");
        x[0] = 1e9;
        assert_eq!(s.decode(&x).unwrap().filters_c1, 100);
        x[0] = f64::NAN;
        assert_eq!(s.decode(&x).unwrap().filters_c1, 4);
    }

    #[test]
    fn encode_uses_identity_and_index() {
        let s = canonical_space();
        let mut p = baseline_params();
        p.kernel_c1 = 7;
        let x = s.encode(&p).unwrap();
        assert_eq!(x[0], 6.0);
        assert_eq!(x[2], 2.0);
        assert_eq!(x[11], 1.0);
        assert_eq!(s.decode(&x).unwrap(), p);
    }

    #[test]
    fn decode_rejects_wrong_length() {
        let s = canonical_space();
        assert_eq!(s.decode(&[0.0; 11]), Err(SpaceError::DimensionMismatch { expected: 12, found: 11 }));
    }

    #[test]
    fn encode_rejects_label_outside_set() {
        let s = canonical_space()
            .with_param(ParamSpec::categorical("act_c1", "Activation function in C1", &["sigmoid", "tanh"]))
            .unwrap();
        let mut p = baseline_params();
        p.act_c1 = Activation::Relu;
        assert!(matches!(s.encode(&p), Err(SpaceError::InvalidValue { .. })));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert_eq!(
            SearchSpace::new(vec![ParamSpec::int_range("a", "a", 5, 4)]),
            Err(SpaceError::EmptyRange("a".into()))
        );
        assert_eq!(
            SearchSpace::new(vec![ParamSpec::categorical::<&str>("a", "a", &[])]),
            Err(SpaceError::NoLabels("a".into()))
        );
        assert!(matches!(
            SearchSpace::new(vec![ParamSpec::categorical("a", "a", &["x", "x"])]),
            Err(SpaceError::DuplicateLabel { .. })
        ));
        assert_eq!(
            SearchSpace::new(vec![ParamSpec::int_range("a", "a", 1, 4), ParamSpec::int_range("a", "b", 1, 4)]),
            Err(SpaceError::DuplicateName("a".into()))
        );
    }

    #[test]
    fn narrowed_space_must_stay_within_network_limits() {
        let s =
            canonical_space().with_param(ParamSpec::int_range("filters_c1", "Number of filters in C1", 2, 50)).unwrap();
        assert!(s.check_network_compatible().is_err());
        let s =
            canonical_space().with_param(ParamSpec::categorical("kernel_c1", "Size of kernel in C1", &[3, 4])).unwrap();
        assert!(s.check_network_compatible().is_err());
    }

    prop_compose! {
        fn any_params()(
            f1 in 4usize..=100, f2 in 4usize..=100,
            k1 in 0usize..3, k2 in 0usize..3,
            a in proptest::array::uniform4(0usize..3),
            n1 in 4usize..=200, n2 in 4usize..=200,
            batch in 10usize..=100, adam in any::<bool>(),
        ) -> HyperParams {
            HyperParams {
                filters_c1: f1, filters_c2: f2,
                kernel_c1: KERNEL_SIZES[k1], kernel_c2: KERNEL_SIZES[k2],
                act_c1: Activation::ALL[a[0]], act_c2: Activation::ALL[a[1]],
                act_fc1: Activation::ALL[a[2]], act_fc2: Activation::ALL[a[3]],
                neurons_fc1: n1, neurons_fc2: n2, batch_size: batch,
                optimizer: if adam { OptimizerKind::Adam } else { OptimizerKind::Sgd },
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(p in any_params()) {
            let s = canonical_space();
            prop_assert_eq!(s.decode(&s.encode(&p).unwrap()).unwrap(), p);
        }

        #[test]
        fn decode_is_total(x in proptest::collection::vec(-1e6f64..1e6, 12)) {
            let p = canonical_space().decode(&x).unwrap();
            prop_assert!(p.validate().is_ok());
        }
    }
}
