use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{Activation, Conv2d, Dense, Flatten, Layer, MaxPool2, SoftmaxOutput};
use super::{NnError, Tensor};
use crate::data::{Dataset, NUM_CLASSES};
use crate::space::HyperParams;

/// Smallest probability fed to `ln` in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
    input_shape: (usize, usize, usize),
    forward_batch: Option<usize>,
}

/// Layer recipe used by [`Network::from_spec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv { filters: usize, kernel: usize, activation: Activation },
    MaxPool,
    Flatten,
    Dense { neurons: usize, activation: Activation },
    SoftmaxOutput { classes: usize },
}

impl Network {
    /// Builds an arbitrary stack, checking shapes along the way.
    pub fn from_spec(specs: &[LayerSpec], input_shape: (usize, usize, usize), seed: u64) -> Result<Self, NnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut c, mut h, mut w) = input_shape;
        let mut flat: Option<usize> = None;
        let mut layers = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let layer = match *spec {
                LayerSpec::Conv { filters, kernel, activation } => {
                    if flat.is_some() {
                        return Err(NnError::Shape(format!("layer {i}: convolution after flatten")));
                    }
                    if h < kernel || w < kernel {
                        return Err(NnError::SpatialCollapse { layer: i, height: h, width: w });
                    }
                    let mut conv = Conv2d::new(c, filters, kernel, activation, &mut rng);
                    conv.propagate_input_grad = i > 0;
                    (c, h, w) = (filters, h - kernel + 1, w - kernel + 1);
                    Layer::Conv2d(conv)
                }
                LayerSpec::MaxPool => {
                    (h, w) = (MaxPool2::output_side(h), MaxPool2::output_side(w));
                    if h == 0 || w == 0 {
                        return Err(NnError::SpatialCollapse { layer: i, height: h, width: w });
                    }
                    Layer::MaxPool(MaxPool2::default())
                }
                LayerSpec::Flatten => {
                    flat = Some(c * h * w);
                    Layer::Flatten(Flatten::default())
                }
                LayerSpec::Dense { neurons, activation } => {
                    let inputs = flat.ok_or_else(|| NnError::Shape(format!("layer {i}: dense before flatten")))?;
                    flat = Some(neurons);
                    Layer::Dense(Dense::new(inputs, neurons, activation, &mut rng))
                }
                LayerSpec::SoftmaxOutput { classes } => {
                    let inputs = flat.ok_or_else(|| NnError::Shape(format!("layer {i}: output before flatten")))?;
                    flat = Some(classes);
                    Layer::Output(SoftmaxOutput::new(inputs, classes, &mut rng))
                }
            };
            layers.push(layer);
        }
        if !matches!(layers.last(), Some(Layer::Output(_))) {
            return Err(NnError::Shape("network must end in a softmax output".into()));
        }
        Ok(Self { layers, input_shape, forward_batch: None })
    }

    /// Instantiates the LeNet-5 style stack for a configuration:
    /// conv, pool, conv, pool, flatten, dense, dense, softmax over 10 classes.
    pub fn build(params: &HyperParams, input_shape: (usize, usize, usize), seed: u64) -> Result<Self, NnError> {
        Self::from_spec(&lenet_spec(params), input_shape, seed)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        self.input_shape
    }

    pub fn num_classes(&self) -> usize {
        match self.layers.last() {
            Some(Layer::Output(o)) => o.dense.outputs,
            _ => unreachable!("validated at construction"),
        }
    }

    /// Width of the flattened feature vector entering the first dense layer.
    pub fn flattened_len(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            Layer::Dense(d) => Some(d.inputs),
            Layer::Output(o) => Some(o.dense.inputs),
            _ => None,
        })
    }

    /// Class probabilities for a `(B, C, H, W)` batch. Caches what
    /// [`backward`](Self::backward) needs.
    pub fn forward(&mut self, batch: &Tensor) -> Result<Tensor, NnError> {
        let s = batch.shape();
        let (c, h, w) = self.input_shape;
        if s.len() != 4 || s[1..] != [c, h, w] || s[0] == 0 {
            return Err(NnError::Shape(format!("batch shape {s:?} does not match input (B, {c}, {h}, {w})")));
        }
        let mut x = self.layers[0].forward(batch);
        for layer in &mut self.layers[1..] {
            x = layer.forward(&x);
        }
        self.forward_batch = Some(s[0]);
        Ok(x)
    }

    /// Fills every parameter gradient of the cross-entropy loss for the most
    /// recent forward batch. `targets` is one-hot `(B, classes)`.
    pub fn backward(&mut self, targets: &Tensor) -> Result<(), NnError> {
        let b = self.forward_batch.ok_or(NnError::BackwardBeforeForward)?;
        if targets.shape() != [b, self.num_classes()] {
            return Err(NnError::Shape(format!("targets {:?} do not match batch of {b}", targets.shape())));
        }
        let mut grad: Option<Tensor> = None;
        for layer in self.layers.iter_mut().rev() {
            grad = match layer {
                Layer::Output(l) => Some(l.backward(targets)),
                Layer::Dense(l) => Some(l.backward(grad.as_ref().unwrap())),
                Layer::Flatten(l) => Some(l.backward(grad.as_ref().unwrap())),
                Layer::MaxPool(l) => Some(l.backward(grad.as_ref().unwrap())),
                Layer::Conv2d(l) => l.backward(grad.as_ref().unwrap()),
            };
        }
        Ok(())
    }

    /// Drops cached activations so an idle network holds only parameters.
    pub fn clear_cache(&mut self) {
        self.layers.iter_mut().for_each(Layer::clear_cache);
        self.forward_batch = None;
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn gradients(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(Layer::grads).collect()
    }

    pub fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        self.layers.iter_mut().flat_map(Layer::params_and_grads).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    /// Writes parameters as: layer count (u64), then per parameterized layer
    /// its tensor count, and per tensor its rank and dimensions (all u64), then
    /// every value as f64. All little-endian.
    pub fn save_parameters<W: Write>(&self, mut out: W) -> Result<(), NnError> {
        let layers: Vec<Vec<&Tensor>> = self.layers.iter().map(Layer::params).filter(|p| !p.is_empty()).collect();
        let mut put = |v: u64| out.write_all(&v.to_le_bytes());
        put(layers.len() as u64)?;
        for ts in &layers {
            put(ts.len() as u64)?;
            for t in ts {
                put(t.shape().len() as u64)?;
                for &d in t.shape() {
                    put(d as u64)?;
                }
            }
        }
        for t in layers.iter().flatten() {
            for v in t.data() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Loads parameters written by [`save_parameters`](Self::save_parameters)
    /// into a network of the same architecture.
    pub fn load_parameters<R: Read>(&mut self, mut input: R) -> Result<(), NnError> {
        let mut word = [0u8; 8];
        let mut get = |input: &mut R| -> Result<u64, NnError> {
            input.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let expected: Vec<Vec<Vec<usize>>> = self
            .layers
            .iter()
            .map(|l| l.params().iter().map(|t| t.shape().to_vec()).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
        let mismatch = || NnError::Format("parameter file does not match this architecture".into());
        if get(&mut input)? as usize != expected.len() {
            return Err(mismatch());
        }
        for shapes in &expected {
            if get(&mut input)? as usize != shapes.len() {
                return Err(mismatch());
            }
            for shape in shapes {
                if get(&mut input)? as usize != shape.len() {
                    return Err(mismatch());
                }
                for &d in shape {
                    if get(&mut input)? as usize != d {
                        return Err(mismatch());
                    }
                }
            }
        }
        for t in self.parameters_mut() {
            for v in t.data_mut() {
                input.read_exact(&mut word)?;
                *v = f64::from_le_bytes(word);
            }
        }
        Ok(())
    }
}

fn lenet_spec(p: &HyperParams) -> [LayerSpec; 8] {
    [
        LayerSpec::Conv { filters: p.filters_c1, kernel: p.kernel_c1, activation: p.act_c1.into() },
        LayerSpec::MaxPool,
        LayerSpec::Conv { filters: p.filters_c2, kernel: p.kernel_c2, activation: p.act_c2.into() },
        LayerSpec::MaxPool,
        LayerSpec::Flatten,
        LayerSpec::Dense { neurons: p.neurons_fc1, activation: p.act_fc1.into() },
        LayerSpec::Dense { neurons: p.neurons_fc2, activation: p.act_fc2.into() },
        LayerSpec::SoftmaxOutput { classes: NUM_CLASSES },
    ]
}

/// Mean negative log-likelihood of the one-hot `targets` under `probabilities`.
pub fn cross_entropy(probabilities: &Tensor, targets: &Tensor) -> f64 {
    assert_eq!(probabilities.shape(), targets.shape(), "probabilities and targets differ in shape");
    let n = probabilities.shape()[0] as f64;
    let total: f64 = probabilities
        .data()
        .iter()
        .zip(targets.data())
        .filter(|(_, &d)| d != 0.0)
        .map(|(&y, &d)| d * y.max(PROB_FLOOR).ln())
        .sum();
    -total / n
}

pub fn one_hot(labels: &[u8], classes: usize) -> Tensor {
    let mut t = Tensor::zeros(vec![labels.len(), classes]);
    for (row, &l) in t.data_mut().chunks_exact_mut(classes).zip(labels) {
        row[l as usize] = 1.0;
    }
    t
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

const EVAL_BATCH: usize = 64;

/// Fraction of samples whose most probable class equals the label.
pub fn accuracy(network: &mut Network, dataset: &Dataset) -> Result<f64, NnError> {
    if dataset.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let classes = network.num_classes();
    let mut correct = 0usize;
    let order: Vec<usize> = (0..dataset.len()).collect();
    for chunk in order.chunks(EVAL_BATCH) {
        let (x, labels) = dataset.batch(chunk);
        let probs = network.forward(&x)?;
        correct +=
            probs.data().chunks_exact(classes).zip(&labels).filter(|(row, &l)| argmax(row) == l as usize).count();
    }
    network.clear_cache();
    Ok(correct as f64 / dataset.len() as f64)
}
