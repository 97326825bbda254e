use rand::Rng;

/// Activation applied by a parameterized layer. `Softmax` layers emit raw
/// logits; the model normalizes them and the loss differentiates through them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Softmax,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Softmax => "softmax",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "softmax" => Some(Activation::Softmax),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Fully connected. `params` holds the `outputs x inputs` weight matrix
    /// row-major, followed by `outputs` biases.
    Dense {
        inputs: usize,
        outputs: usize,
        activation: Activation,
        params: Vec<f64>,
    },
    /// 2-D convolution with a `(1, kernel_width)` kernel, stride 1 and same
    /// padding over a channels-last `height x width x in_channels` input.
    /// `params` holds `filters x kernel_width x in_channels` weights followed
    /// by `filters` biases.
    Conv2d {
        height: usize,
        width: usize,
        in_channels: usize,
        filters: usize,
        kernel_width: usize,
        activation: Activation,
        params: Vec<f64>,
    },
    /// Inverted dropout: active only in training, scaling kept units by `1/(1-rate)`.
    Dropout { rate: f64 },
    Flatten,
}

impl Layer {
    pub fn dense(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Layer::Dense {
            inputs,
            outputs,
            activation,
            params: vec![0.0; inputs * outputs + outputs],
        }
    }

    pub fn conv2d(
        height: usize,
        width: usize,
        in_channels: usize,
        filters: usize,
        kernel_width: usize,
        activation: Activation,
    ) -> Self {
        Layer::Conv2d {
            height,
            width,
            in_channels,
            filters,
            kernel_width,
            activation,
            params: vec![0.0; filters * kernel_width * in_channels + filters],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense { .. } => "dense",
            Layer::Conv2d { .. } => "conv2d",
            Layer::Dropout { .. } => "dropout",
            Layer::Flatten => "flatten",
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Layer::Dense { params, .. } | Layer::Conv2d { params, .. } => params,
            _ => &[],
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Layer::Dense { params, .. } | Layer::Conv2d { params, .. } => params,
            _ => &mut [],
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        match self {
            Layer::Dense { outputs, .. } => *outputs,
            Layer::Conv2d {
                height,
                width,
                filters,
                ..
            } => height * width * filters,
            _ => input_len,
        }
    }

    /// Glorot uniform weights, zero biases.
    pub fn init_glorot<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (fan_in, fan_out, n_weights) = match self {
            Layer::Dense { inputs, outputs, .. } => (*inputs, *outputs, *inputs * *outputs),
            Layer::Conv2d {
                in_channels,
                filters,
                kernel_width,
                ..
            } => (
                *kernel_width * *in_channels,
                *kernel_width * *filters,
                *filters * *kernel_width * *in_channels,
            ),
            _ => return,
        };
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let params = self.params_mut();
        for w in &mut params[..n_weights] {
            *w = rng.random_range(-limit..limit);
        }
        params[n_weights..].fill(0.0);
    }

    /// Forward pass for one example. `mask` receives the dropout mask when a
    /// training RNG is supplied.
    pub(crate) fn forward<R: Rng + ?Sized>(
        &self,
        input: &[f64],
        train_rng: Option<&mut R>,
        mask: &mut Option<Vec<f64>>,
    ) -> Vec<f64> {
        match self {
            Layer::Dense {
                inputs,
                outputs,
                activation,
                params,
            } => {
                let (w, b) = params.split_at(inputs * outputs);
                let mut out: Vec<f64> = w
                    .chunks_exact(*inputs)
                    .zip(b)
                    .map(|(row, bias)| bias + dot(row, input))
                    .collect();
                if *activation == Activation::Relu {
                    relu_in_place(&mut out);
                }
                out
            }
            Layer::Conv2d {
                height,
                width,
                in_channels,
                filters,
                kernel_width,
                activation,
                params,
            } => {
                let (k, b) = params.split_at(filters * kernel_width * in_channels);
                let pad = kernel_width / 2;
                let mut out = vec![0.0; height * width * filters];
                for h in 0..*height {
                    for x in 0..*width {
                        let o = &mut out[(h * width + x) * filters..][..*filters];
                        o.copy_from_slice(b);
                        for t in 0..*kernel_width {
                            let Some(src) = (x + t).checked_sub(pad).filter(|s| *s < *width) else {
                                continue;
                            };
                            let inp = &input[(h * width + src) * in_channels..][..*in_channels];
                            for (f, of) in o.iter_mut().enumerate() {
                                let kf = &k[(f * kernel_width + t) * in_channels..][..*in_channels];
                                *of += dot(kf, inp);
                            }
                        }
                    }
                }
                if *activation == Activation::Relu {
                    relu_in_place(&mut out);
                }
                out
            }
            Layer::Dropout { rate } => match train_rng {
                Some(rng) if *rate > 0.0 => {
                    let keep = 1.0 / (1.0 - rate);
                    let m: Vec<f64> = input
                        .iter()
                        .map(|_| if rng.random::<f64>() < *rate { 0.0 } else { keep })
                        .collect();
                    let out = input.iter().zip(&m).map(|(x, m)| x * m).collect();
                    *mask = Some(m);
                    out
                }
                _ => input.to_vec(),
            },
            Layer::Flatten => input.to_vec(),
        }
    }

    /// Backpropagates `grad_out` (gradient w.r.t. this layer's output) and
    /// accumulates parameter gradients into `grads`. Returns the gradient
    /// w.r.t. the input when `need_input_grad` is set.
    pub(crate) fn backward(
        &self,
        input: &[f64],
        output: &[f64],
        mask: Option<&[f64]>,
        grad_out: &[f64],
        grads: &mut [f64],
        need_input_grad: bool,
    ) -> Option<Vec<f64>> {
        match self {
            Layer::Dense {
                inputs,
                outputs,
                activation,
                params,
            } => {
                let gz = activation_grad(*activation, output, grad_out);
                let n_w = inputs * outputs;
                let (gw, gb) = grads.split_at_mut(n_w);
                for ((row, g), bias) in gw.chunks_exact_mut(*inputs).zip(&gz).zip(gb.iter_mut()) {
                    *bias += g;
                    if *g != 0.0 {
                        for (r, x) in row.iter_mut().zip(input) {
                            *r += g * x;
                        }
                    }
                }
                need_input_grad.then(|| {
                    let mut gin = vec![0.0; *inputs];
                    for (row, g) in params[..n_w].chunks_exact(*inputs).zip(&gz) {
                        if *g != 0.0 {
                            for (gi, w) in gin.iter_mut().zip(row) {
                                *gi += g * w;
                            }
                        }
                    }
                    gin
                })
            }
            Layer::Conv2d {
                height,
                width,
                in_channels,
                filters,
                kernel_width,
                activation,
                params,
            } => {
                let gz = activation_grad(*activation, output, grad_out);
                let n_k = filters * kernel_width * in_channels;
                let (k, _) = params.split_at(n_k);
                let (gk, gb) = grads.split_at_mut(n_k);
                let pad = kernel_width / 2;
                let mut gin = need_input_grad.then(|| vec![0.0; input.len()]);
                for h in 0..*height {
                    for x in 0..*width {
                        let g = &gz[(h * width + x) * filters..][..*filters];
                        for (b, gf) in gb.iter_mut().zip(g) {
                            *b += gf;
                        }
                        for t in 0..*kernel_width {
                            let Some(src) = (x + t).checked_sub(pad).filter(|s| *s < *width) else {
                                continue;
                            };
                            let at = (h * width + src) * in_channels;
                            let inp = &input[at..][..*in_channels];
                            for (f, gf) in g.iter().enumerate() {
                                if *gf == 0.0 {
                                    continue;
                                }
                                let off = (f * kernel_width + t) * in_channels;
                                for (c, xi) in inp.iter().enumerate() {
                                    gk[off + c] += gf * xi;
                                }
                                if let Some(gin) = gin.as_mut() {
                                    for c in 0..*in_channels {
                                        gin[at + c] += gf * k[off + c];
                                    }
                                }
                            }
                        }
                    }
                }
                gin
            }
            Layer::Dropout { .. } => need_input_grad.then(|| match mask {
                Some(m) => grad_out.iter().zip(m).map(|(g, m)| g * m).collect(),
                None => grad_out.to_vec(),
            }),
            Layer::Flatten => need_input_grad.then(|| grad_out.to_vec()),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn activation_grad(act: Activation, output: &[f64], grad_out: &[f64]) -> Vec<f64> {
    match act {
        Activation::Relu => grad_out
            .iter()
            .zip(output)
            .map(|(g, a)| if *a > 0.0 { *g } else { 0.0 })
            .collect(),
        Activation::Softmax => grad_out.to_vec(),
    }
}
