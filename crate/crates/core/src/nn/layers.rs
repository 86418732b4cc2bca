use rand::Rng;

use super::gemm::gemm;
use super::Tensor;

/// Elementwise nonlinearity applied after a convolution or dense product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output `a`.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl From<crate::space::Activation> for Activation {
    fn from(a: crate::space::Activation) -> Self {
        match a {
            crate::space::Activation::Sigmoid => Activation::Sigmoid,
            crate::space::Activation::Relu => Activation::Relu,
            crate::space::Activation::Tanh => Activation::Tanh,
        }
    }
}

fn glorot<R: Rng + ?Sized>(n: usize, fan_in: usize, fan_out: usize, rng: &mut R) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..=limit)).collect()
}

/// Valid (unpadded) stride-1 convolution followed by an activation.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_channels: usize,
    pub filters: usize,
    pub kernel: usize,
    pub activation: Activation,
    /// `(filters, in_channels, kernel, kernel)`
    pub weight: Tensor,
    pub bias: Tensor,
    pub grad_weight: Tensor,
    pub grad_bias: Tensor,
    /// The first layer never needs the gradient with respect to its input.
    pub propagate_input_grad: bool,
    input_shape: Vec<usize>,
    cols: Vec<f64>,
    output: Option<Tensor>,
}

impl Conv2d {
    pub fn new<R: Rng + ?Sized>(
        in_channels: usize,
        filters: usize,
        kernel: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let k2 = kernel * kernel;
        let weight = Tensor::from_vec(
            vec![filters, in_channels, kernel, kernel],
            glorot(filters * in_channels * k2, in_channels * k2, filters * k2, rng),
        );
        Self {
            in_channels,
            filters,
            kernel,
            activation,
            grad_weight: Tensor::zeros(weight.shape().to_vec()),
            weight,
            bias: Tensor::zeros(vec![filters]),
            grad_bias: Tensor::zeros(vec![filters]),
            propagate_input_grad: true,
            input_shape: Vec::new(),
            cols: Vec::new(),
            output: None,
        }
    }

    pub fn output_side(&self, side: usize) -> Option<usize> {
        (side >= self.kernel).then(|| side - self.kernel + 1)
    }

    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        let s = input.shape();
        let (b, c, h, w) = (s[0], s[1], s[2], s[3]);
        assert_eq!(c, self.in_channels, "conv input channels");
        let k = self.kernel;
        let (oh, ow) = (h - k + 1, w - k + 1);
        let p = oh * ow;
        let ckk = c * k * k;
        let bp = b * p;

        // cols: (c*k*k) x (b*oh*ow); row (ch, ki, kj), column (sample, y, x).
        self.cols.clear();
        self.cols.resize(ckk * bp, 0.0);
        let x = input.data();
        for ch in 0..c {
            for ki in 0..k {
                for kj in 0..k {
                    let row = (ch * k + ki) * k + kj;
                    let dst = &mut self.cols[row * bp..(row + 1) * bp];
                    for n in 0..b {
                        let plane = &x[(n * c + ch) * h * w..];
                        for y in 0..oh {
                            let src = &plane[(y + ki) * w + kj..(y + ki) * w + kj + ow];
                            dst[n * p + y * ow..n * p + y * ow + ow].copy_from_slice(src);
                        }
                    }
                }
            }
        }

        let f = self.filters;
        let mut z = vec![0.0; f * bp];
        gemm(f, ckk, bp, self.weight.data(), false, &self.cols, false, 0.0, &mut z);

        let mut out = Tensor::zeros(vec![b, f, oh, ow]);
        let o = out.data_mut();
        let bias = self.bias.data();
        for fi in 0..f {
            for n in 0..b {
                let src = &z[fi * bp + n * p..fi * bp + (n + 1) * p];
                let dst = &mut o[(n * f + fi) * p..(n * f + fi + 1) * p];
                for (d, &v) in dst.iter_mut().zip(src) {
                    *d = self.activation.apply(v + bias[fi]);
                }
            }
        }
        self.input_shape = s.to_vec();
        self.output = Some(out.clone());
        out
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Option<Tensor> {
        let out = self.output.as_ref().expect("conv backward without forward");
        let (b, c, h, w) = (self.input_shape[0], self.input_shape[1], self.input_shape[2], self.input_shape[3]);
        let k = self.kernel;
        let (oh, ow) = (h - k + 1, w - k + 1);
        let p = oh * ow;
        let ckk = c * k * k;
        let bp = b * p;
        let f = self.filters;

        let mut dz = vec![0.0; f * bp];
        let (g, a) = (grad_out.data(), out.data());
        let gb = self.grad_bias.data_mut();
        for fi in 0..f {
            let mut sum = 0.0;
            for n in 0..b {
                let base = (n * f + fi) * p;
                let dst = &mut dz[fi * bp + n * p..fi * bp + (n + 1) * p];
                for q in 0..p {
                    let v = g[base + q] * self.activation.derivative_from_output(a[base + q]);
                    dst[q] = v;
                    sum += v;
                }
            }
            gb[fi] = sum;
        }

        gemm(f, bp, ckk, &dz, false, &self.cols, true, 0.0, self.grad_weight.data_mut());

        if !self.propagate_input_grad {
            return None;
        }
        let mut dcols = vec![0.0; ckk * bp];
        gemm(ckk, f, bp, self.weight.data(), true, &dz, false, 0.0, &mut dcols);
        let mut dx = Tensor::zeros(self.input_shape.clone());
        let d = dx.data_mut();
        for ch in 0..c {
            for ki in 0..k {
                for kj in 0..k {
                    let row = (ch * k + ki) * k + kj;
                    let src = &dcols[row * bp..(row + 1) * bp];
                    for n in 0..b {
                        let plane = (n * c + ch) * h * w;
                        for y in 0..oh {
                            let dst = &mut d[plane + (y + ki) * w + kj..plane + (y + ki) * w + kj + ow];
                            for (t, s) in dst.iter_mut().zip(&src[n * p + y * ow..n * p + y * ow + ow]) {
                                *t += s;
                            }
                        }
                    }
                }
            }
        }
        Some(dx)
    }

    pub fn clear_cache(&mut self) {
        self.cols = Vec::new();
        self.output = None;
    }
}

/// 2x2 max pooling with stride 2; odd trailing rows and columns are dropped.
#[derive(Debug, Clone, Default)]
pub struct MaxPool2 {
    input_shape: Vec<usize>,
    argmax: Vec<usize>,
}

impl MaxPool2 {
    pub fn output_side(side: usize) -> usize {
        side / 2
    }

    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        let s = input.shape();
        let (b, c, h, w) = (s[0], s[1], s[2], s[3]);
        let (oh, ow) = (h / 2, w / 2);
        let mut out = Tensor::zeros(vec![b, c, oh, ow]);
        self.argmax.clear();
        self.argmax.reserve(b * c * oh * ow);
        let x = input.data();
        let o = out.data_mut();
        let mut t = 0;
        for plane in 0..b * c {
            let base = plane * h * w;
            for y in 0..oh {
                for xo in 0..ow {
                    let i0 = base + 2 * y * w + 2 * xo;
                    // Scan order picks the first maximum on ties.
                    let mut best = i0;
                    for cand in [i0 + 1, i0 + w, i0 + w + 1] {
                        if x[cand] > x[best] {
                            best = cand;
                        }
                    }
                    o[t] = x[best];
                    self.argmax.push(best);
                    t += 1;
                }
            }
        }
        self.input_shape = s.to_vec();
        out
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let mut dx = Tensor::zeros(self.input_shape.clone());
        let d = dx.data_mut();
        for (&i, &g) in self.argmax.iter().zip(grad_out.data()) {
            d[i] += g;
        }
        dx
    }
}

#[derive(Debug, Clone, Default)]
pub struct Flatten {
    input_shape: Vec<usize>,
}

impl Flatten {
    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        self.input_shape = input.shape().to_vec();
        let b = self.input_shape[0];
        let rest = input.len() / b.max(1);
        input.clone().reshape(vec![b, rest])
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        grad_out.clone().reshape(self.input_shape.clone())
    }
}

/// Fully connected layer followed by an activation.
#[derive(Debug, Clone)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    /// `(outputs, inputs)`
    pub weight: Tensor,
    pub bias: Tensor,
    pub grad_weight: Tensor,
    pub grad_bias: Tensor,
    input: Option<Tensor>,
    output: Option<Tensor>,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let weight = Tensor::from_vec(vec![outputs, inputs], glorot(outputs * inputs, inputs, outputs, rng));
        Self {
            inputs,
            outputs,
            activation,
            grad_weight: Tensor::zeros(weight.shape().to_vec()),
            weight,
            bias: Tensor::zeros(vec![outputs]),
            grad_bias: Tensor::zeros(vec![outputs]),
            input: None,
            output: None,
        }
    }

    fn affine(&self, input: &Tensor) -> Tensor {
        let b = input.shape()[0];
        assert_eq!(input.shape()[1], self.inputs, "dense input width");
        let mut z = Tensor::zeros(vec![b, self.outputs]);
        gemm(b, self.inputs, self.outputs, input.data(), false, self.weight.data(), true, 0.0, z.data_mut());
        for row in z.data_mut().chunks_exact_mut(self.outputs) {
            for (v, bias) in row.iter_mut().zip(self.bias.data()) {
                *v += bias;
            }
        }
        z
    }

    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        let mut z = self.affine(input);
        let act = self.activation;
        z.data_mut().iter_mut().for_each(|v| *v = act.apply(*v));
        self.input = Some(input.clone());
        self.output = Some(z.clone());
        z
    }

    /// Backward pass given the gradient with respect to the pre-activation.
    fn backward_linear(&mut self, dz: &Tensor) -> Tensor {
        let input = self.input.as_ref().expect("dense backward without forward");
        let b = input.shape()[0];
        gemm(self.outputs, b, self.inputs, dz.data(), true, input.data(), false, 0.0, self.grad_weight.data_mut());
        let gb = self.grad_bias.data_mut();
        gb.fill(0.0);
        for row in dz.data().chunks_exact(self.outputs) {
            for (g, v) in gb.iter_mut().zip(row) {
                *g += v;
            }
        }
        let mut dx = Tensor::zeros(vec![b, self.inputs]);
        gemm(b, self.outputs, self.inputs, dz.data(), false, self.weight.data(), false, 0.0, dx.data_mut());
        dx
    }

    pub fn backward(&mut self, grad_out: &Tensor) -> Tensor {
        let out = self.output.as_ref().expect("dense backward without forward");
        let act = self.activation;
        let dz: Vec<f64> =
            grad_out.data().iter().zip(out.data()).map(|(g, a)| g * act.derivative_from_output(*a)).collect();
        let dz = Tensor::from_vec(grad_out.shape().to_vec(), dz);
        self.backward_linear(&dz)
    }

    pub fn clear_cache(&mut self) {
        self.input = None;
        self.output = None;
    }
}

/// Dense layer producing class logits followed by a softmax.
#[derive(Debug, Clone)]
pub struct SoftmaxOutput {
    pub dense: Dense,
    probabilities: Option<Tensor>,
}

impl SoftmaxOutput {
    pub fn new<R: Rng + ?Sized>(inputs: usize, classes: usize, rng: &mut R) -> Self {
        Self { dense: Dense::new(inputs, classes, Activation::Identity, rng), probabilities: None }
    }

    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        let mut z = self.dense.affine(input);
        let k = self.dense.outputs;
        for row in z.data_mut().chunks_exact_mut(k) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            row.iter_mut().for_each(|v| *v /= sum);
        }
        self.dense.input = Some(input.clone());
        self.probabilities = Some(z.clone());
        z
    }

    /// Fused softmax and cross-entropy gradient: `(y - d) / B`.
    pub fn backward(&mut self, targets: &Tensor) -> Tensor {
        let y = self.probabilities.as_ref().expect("output backward without forward");
        assert_eq!(y.shape(), targets.shape(), "targets must match output shape");
        let b = y.shape()[0] as f64;
        let dz: Vec<f64> = y.data().iter().zip(targets.data()).map(|(y, d)| (y - d) / b).collect();
        let dz = Tensor::from_vec(y.shape().to_vec(), dz);
        self.dense.backward_linear(&dz)
    }

    pub fn clear_cache(&mut self) {
        self.dense.clear_cache();
        self.probabilities = None;
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Conv2d(Conv2d),
    MaxPool(MaxPool2),
    Flatten(Flatten),
    Dense(Dense),
    Output(SoftmaxOutput),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::MaxPool(_) => "maxpool",
            Layer::Flatten(_) => "flatten",
            Layer::Dense(_) => "dense",
            Layer::Output(_) => "softmax-output",
        }
    }

    pub fn forward(&mut self, input: &Tensor) -> Tensor {
        match self {
            Layer::Conv2d(l) => l.forward(input),
            Layer::MaxPool(l) => l.forward(input),
            Layer::Flatten(l) => l.forward(input),
            Layer::Dense(l) => l.forward(input),
            Layer::Output(l) => l.forward(input),
        }
    }

    /// Parameter tensors, weight before bias.
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&l.weight, &l.bias],
            Layer::Dense(l) => vec![&l.weight, &l.bias],
            Layer::Output(l) => vec![&l.dense.weight, &l.dense.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Dense(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Output(l) => vec![&mut l.dense.weight, &mut l.dense.bias],
            _ => Vec::new(),
        }
    }

    pub fn grads(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv2d(l) => vec![&l.grad_weight, &l.grad_bias],
            Layer::Dense(l) => vec![&l.grad_weight, &l.grad_bias],
            Layer::Output(l) => vec![&l.dense.grad_weight, &l.dense.grad_bias],
            _ => Vec::new(),
        }
    }

    pub fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        match self {
            Layer::Conv2d(l) => vec![(&mut l.weight, &l.grad_weight), (&mut l.bias, &l.grad_bias)],
            Layer::Dense(l) => vec![(&mut l.weight, &l.grad_weight), (&mut l.bias, &l.grad_bias)],
            Layer::Output(l) => {
                let d = &mut l.dense;
                vec![(&mut d.weight, &d.grad_weight), (&mut d.bias, &d.grad_bias)]
            }
            _ => Vec::new(),
        }
    }

    pub fn clear_cache(&mut self) {
        match self {
            Layer::Conv2d(l) => l.clear_cache(),
            Layer::Dense(l) => l.clear_cache(),
            Layer::Output(l) => l.clear_cache(),
            Layer::MaxPool(l) => l.argmax = Vec::new(),
            Layer::Flatten(_) => {}
        }
    }
}
