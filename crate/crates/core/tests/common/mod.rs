#![allow(dead_code)]

use ldwpso::nn::{cross_entropy, one_hot, Activation, LayerSpec, Network, Optimizer, Tensor};
use ldwpso::space::OptimizerKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;
/// Magnitude below which two gradient entries are compared absolutely.
pub const FD_FLOOR: f64 = 1e-8;
pub const GRADIENT_SEEDS: u64 = 24;

const ACTS: [Activation; 3] = [Activation::Sigmoid, Activation::Relu, Activation::Tanh];
const CLASSES: usize = 5;
const BATCH: usize = 3;

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(FD_FLOOR)
}

/// A random network on 1x8x8 inputs with a random batch and targets.
///
/// Even seeds use conv(2, k3), pool, dense 4, dense 3. Odd seeds insert a
/// second convolution so the input gradient of a convolution is exercised.
pub struct Instance {
    pub net: Network,
    pub x: Tensor,
    pub targets: Tensor,
    pub activations: [Activation; 3],
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let s = seed as usize;
    let acts = [ACTS[s % 3], ACTS[(s / 3) % 3], ACTS[(s / 9 + s) % 3]];
    let mut spec = vec![LayerSpec::Conv { filters: 2, kernel: 3, activation: acts[0] }, LayerSpec::MaxPool];
    if seed % 2 == 1 {
        spec.push(LayerSpec::Conv { filters: 2, kernel: 2, activation: acts[1] });
    }
    spec.extend([
        LayerSpec::Flatten,
        LayerSpec::Dense { neurons: 4, activation: acts[1] },
        LayerSpec::Dense { neurons: 3, activation: acts[2] },
        LayerSpec::SoftmaxOutput { classes: CLASSES },
    ]);
    let mut net = Network::from_spec(&spec, (1, 8, 8), seed).unwrap();
    for p in net.parameters_mut() {
        for v in p.data_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    let x = Tensor::from_vec(vec![BATCH, 1, 8, 8], (0..BATCH * 64).map(|_| rng.random_range(-1.0..1.0)).collect());
    let labels: Vec<u8> = (0..BATCH).map(|_| rng.random_range(0..CLASSES as u8)).collect();
    Instance { net, x, targets: one_hot(&labels, CLASSES), activations: acts }
}

fn loss(net: &mut Network, x: &Tensor, targets: &Tensor) -> f64 {
    let p = net.forward(x).unwrap();
    cross_entropy(&p, targets)
}

pub fn analytic_gradients(inst: &mut Instance) -> Vec<Vec<f64>> {
    inst.net.forward(&inst.x).unwrap();
    inst.net.backward(&inst.targets).unwrap();
    inst.net.gradients().iter().map(|g| g.data().to_vec()).collect()
}

/// Central differences of the loss with respect to every parameter.
pub fn numeric_gradients(inst: &mut Instance) -> Vec<Vec<f64>> {
    let shapes: Vec<usize> = inst.net.parameters().iter().map(|t| t.len()).collect();
    let mut out = Vec::with_capacity(shapes.len());
    for (t, &n) in shapes.iter().enumerate() {
        let mut g = vec![0.0; n];
        for (j, gj) in g.iter_mut().enumerate() {
            let orig = inst.net.parameters()[t].data()[j];
            inst.net.parameters_mut()[t].data_mut()[j] = orig + FD_STEP;
            let up = loss(&mut inst.net, &inst.x, &inst.targets);
            inst.net.parameters_mut()[t].data_mut()[j] = orig - FD_STEP;
            let down = loss(&mut inst.net, &inst.x, &inst.targets);
            inst.net.parameters_mut()[t].data_mut()[j] = orig;
            *gj = (up - down) / (2.0 * FD_STEP);
        }
        out.push(g);
    }
    out
}

/// Per parameter tensor: owning layer kind and worst relative error.
pub fn compare(net: &Network, a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<(&'static str, f64)> {
    let kinds: Vec<&'static str> =
        net.layers().iter().flat_map(|l| std::iter::repeat_n(l.kind(), l.params().len())).collect();
    kinds
        .into_iter()
        .zip(a.iter().zip(b))
        .map(|(k, (a, b))| (k, a.iter().zip(b).map(|(&x, &y)| relative_error(x, y)).fold(0.0, f64::max)))
        .collect()
}

/// Worst relative error between backprop and finite differences.
pub fn gradient_check(seed: u64) -> Vec<(&'static str, f64)> {
    let mut inst = instance(seed);
    let analytic = analytic_gradients(&mut inst);
    let numeric = numeric_gradients(&mut inst);
    compare(&inst.net, &analytic, &numeric)
}

/// Takes one optimizer step from the analytic gradients, recovers the
/// gradient each parameter actually moved by (inverting the first-step
/// update rule), and compares it with finite differences.
pub fn optimizer_check(seed: u64, kind: OptimizerKind) -> Vec<(&'static str, f64)> {
    const LR: f64 = 0.01;
    const EPS: f64 = 1e-8;
    let mut inst = instance(seed);
    let numeric = numeric_gradients(&mut inst);
    let before: Vec<Vec<f64>> = inst.net.parameters().iter().map(|t| t.data().to_vec()).collect();
    analytic_gradients(&mut inst);
    let mut opt = Optimizer::new(kind, LR);
    opt.step(&mut inst.net);
    let applied: Vec<Vec<f64>> = inst
        .net
        .parameters()
        .iter()
        .zip(&before)
        .map(|(after, before)| {
            after
                .data()
                .iter()
                .zip(before)
                .map(|(&w1, &w0)| {
                    let u = (w0 - w1) / LR;
                    match kind {
                        OptimizerKind::Sgd => u,
                        // u = g / (|g| + eps)
                        OptimizerKind::Adam => EPS * u / (1.0 - u.abs()),
                    }
                })
                .collect()
        })
        .collect();
    compare(&inst.net, &applied, &numeric)
}
