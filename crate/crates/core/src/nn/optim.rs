use super::Network;
use crate::space::OptimizerKind;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Parameter update rule with whatever state it carries between steps.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd {
        learning_rate: f64,
    },
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        step: i32,
        first_moment: Vec<Vec<f64>>,
        second_moment: Vec<Vec<f64>>,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { learning_rate },
            OptimizerKind::Adam => Optimizer::Adam {
                learning_rate,
                beta1: ADAM_BETA1,
                beta2: ADAM_BETA2,
                epsilon: ADAM_EPSILON,
                step: 0,
                first_moment: Vec::new(),
                second_moment: Vec::new(),
            },
        }
    }

    /// Applies one update using the gradients currently stored in `network`.
    pub fn step(&mut self, network: &mut Network) {
        match self {
            Optimizer::Sgd { learning_rate } => {
                for (p, g) in network.params_and_grads() {
                    for (w, g) in p.data_mut().iter_mut().zip(g.data()) {
                        *w -= *learning_rate * g;
                    }
                }
            }
            Optimizer::Adam { learning_rate, beta1, beta2, epsilon, step, first_moment, second_moment } => {
                let pairs = network.params_and_grads();
                if first_moment.is_empty() {
                    *first_moment = pairs.iter().map(|(p, _)| vec![0.0; p.len()]).collect();
                    *second_moment = first_moment.clone();
                }
                *step += 1;
                let c1 = 1.0 - beta1.powi(*step);
                let c2 = 1.0 - beta2.powi(*step);
                for (((p, g), m), v) in pairs.into_iter().zip(first_moment.iter_mut()).zip(second_moment.iter_mut()) {
                    for (((w, &g), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = *beta1 * *m + (1.0 - *beta1) * g;
                        *v = *beta2 * *v + (1.0 - *beta2) * g * g;
                        let m_hat = *m / c1;
                        let v_hat = *v / c2;
                        *w -= *learning_rate * m_hat / (v_hat.sqrt() + *epsilon);
                    }
                }
            }
        }
    }
}
