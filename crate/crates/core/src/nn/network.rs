//! Dense feed-forward network: affine layers with optional batch
//! normalization on pre-activations, inverted dropout on hidden activations,
//! and a softmax output head. Training-mode forward caches everything the
//! analytic backward pass needs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::activation::{softmax, Activation};
use super::matrix::{affine, col_sums, matmul_nn, matmul_tn, Matrix};

/// Numerical floor inside the batch-norm inverse square root.
pub const BN_EPS: f64 = 1e-8;
/// Exponential moving average weight for the running statistics.
pub const BN_MOMENTUM: f64 = 0.9;

/// Network shape and regularization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    /// Drop probability for inverted dropout on hidden activations.
    pub p_drop: f64,
    pub batch_norm: bool,
    /// Seed for weight initialization.
    pub seed: u64,
}

impl NetworkConfig {
    /// Defaults: 16 inputs, five hidden layers of 128, softplus, dropout 0.2,
    /// batch norm on.
    pub fn new(output_dim: usize) -> Self {
        NetworkConfig {
            input_dim: 16,
            hidden: vec![128; 5],
            output_dim,
            activation: Activation::Softplus,
            p_drop: 0.2,
            batch_norm: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.iter().any(|&w| w == 0) {
            return Err("all layer widths must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.p_drop) {
            return Err("p_drop must be in [0, 1)".into());
        }
        Ok(())
    }
}

/// Per-unit batch normalization parameters and running statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    fn new(width: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; width],
            beta: vec![0.0; width],
            running_mean: vec![0.0; width],
            running_var: vec![1.0; width],
        }
    }
}

/// One dense layer; hidden layers optionally carry batch norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// out×in weight matrix.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub batch_norm: Option<BatchNorm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub config: NetworkConfig,
    pub layers: Vec<Layer>,
}

struct BnCache {
    mean: Vec<f64>,
    inv_std: Vec<f64>,
    xhat: Matrix,
}

struct LayerCache {
    /// Input to the affine transform.
    input: Matrix,
    /// Affine output (pre batch norm).
    z: Matrix,
    bn: Option<BnCache>,
    /// Pre-activation after batch norm (equals `z` without batch norm).
    u: Matrix,
    /// Inverted-dropout multipliers (0 or 1/(1-p)), present in train mode
    /// when p_drop > 0.
    mask: Option<Matrix>,
}

/// Everything the backward pass needs from one training-mode forward.
pub struct ForwardCache {
    hidden: Vec<LayerCache>,
    output_input: Matrix,
    pub probs: Matrix,
}

/// Gradients for one layer, mirroring its parameter shapes.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub gamma: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Network {
    /// Builds a network with seeded uniform init in ±sqrt(6/(fan_in+fan_out))
    /// and zero biases.
    pub fn init(config: NetworkConfig) -> Network {
        config.validate().expect("invalid network config");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut dims = vec![config.input_dim];
        dims.extend(&config.hidden);
        dims.push(config.output_dim);

        let mut layers = Vec::with_capacity(dims.len() - 1);
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut weights = Matrix::zeros(fan_out, fan_in);
            for w in &mut weights.data {
                *w = rng.gen_range(-bound..=bound);
            }
            let is_hidden = l + 1 < dims.len() - 1;
            layers.push(Layer {
                weights,
                bias: vec![0.0; fan_out],
                batch_norm: (config.batch_norm && is_hidden).then(|| BatchNorm::new(fan_out)),
            });
        }
        Network { config, layers }
    }

    /// Training-mode forward: batch statistics for batch norm (running stats
    /// updated as a side effect) and freshly drawn dropout masks.
    pub fn forward_train(&mut self, x: &Matrix, rng: &mut ChaCha8Rng) -> ForwardCache {
        assert_eq!(x.cols, self.config.input_dim, "input width mismatch");
        let n_hidden = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut current = x.clone();

        for layer in &mut self.layers[..n_hidden] {
            let input = current;
            let z = affine(&input, &layer.weights, &layer.bias);
            let (u, bn_cache) = match &mut layer.batch_norm {
                Some(bn) => {
                    let (u, cache) = bn_forward_train(bn, &z);
                    (u, Some(cache))
                }
                None => (z.clone(), None),
            };
            let act = self.config.activation;
            let mut a = Matrix::zeros(u.rows, u.cols);
            for (av, &uv) in a.data.iter_mut().zip(&u.data) {
                *av = act.apply(uv);
            }
            let mask = if self.config.p_drop > 0.0 {
                let keep = 1.0 - self.config.p_drop;
                let scale = 1.0 / keep;
                let mut m = Matrix::zeros(a.rows, a.cols);
                for mv in &mut m.data {
                    *mv = if rng.gen_bool(keep) { scale } else { 0.0 };
                }
                for (av, &mv) in a.data.iter_mut().zip(&m.data) {
                    *av *= mv;
                }
                Some(m)
            } else {
                None
            };
            current = a;
            hidden.push(LayerCache {
                input,
                z,
                bn: bn_cache,
                u,
                mask,
            });
        }

        let out_layer = &self.layers[n_hidden];
        let logits = affine(&current, &out_layer.weights, &out_layer.bias);
        ForwardCache {
            hidden,
            output_input: current,
            probs: softmax(&logits),
        }
    }

    /// Inference-mode forward: running statistics, no dropout. Deterministic.
    pub fn forward_infer(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols, self.config.input_dim, "input width mismatch");
        let n_hidden = self.layers.len() - 1;
        let mut current = x.clone();
        for layer in &self.layers[..n_hidden] {
            let mut u = affine(&current, &layer.weights, &layer.bias);
            if let Some(bn) = &layer.batch_norm {
                for i in 0..u.rows {
                    let row = u.row_mut(i);
                    for (j, v) in row.iter_mut().enumerate() {
                        let inv = 1.0 / (bn.running_var[j] + BN_EPS).sqrt();
                        *v = bn.gamma[j] * (*v - bn.running_mean[j]) * inv + bn.beta[j];
                    }
                }
            }
            let act = self.config.activation;
            for v in &mut u.data {
                *v = act.apply(*v);
            }
            current = u;
        }
        let out_layer = &self.layers[n_hidden];
        softmax(&affine(&current, &out_layer.weights, &out_layer.bias))
    }

    /// Analytic gradients of the mean cross-entropy loss for the batch that
    /// produced `cache`, with respect to every parameter tensor.
    pub fn backward(&self, cache: &ForwardCache, class_indices: &[usize]) -> Gradients {
        let n = cache.probs.rows;
        assert_eq!(class_indices.len(), n, "label count mismatch");
        let n_hidden = self.layers.len() - 1;

        // Softmax + cross-entropy head: dlogits = (probs - onehot) / n.
        let mut dz = cache.probs.clone();
        for (i, &class) in class_indices.iter().enumerate() {
            let row = dz.row_mut(i);
            row[class] -= 1.0;
            for v in row {
                *v /= n as f64;
            }
        }

        let out_layer = &self.layers[n_hidden];
        let mut grads = vec![LayerGrads {
            weights: matmul_tn(&dz, &cache.output_input),
            bias: col_sums(&dz),
            gamma: None,
            beta: None,
        }];
        let mut d_out = matmul_nn(&dz, &out_layer.weights);

        for l in (0..n_hidden).rev() {
            let layer = &self.layers[l];
            let lc = &cache.hidden[l];

            // Dropout backward: same mask, same scale.
            if let Some(mask) = &lc.mask {
                for (dv, &mv) in d_out.data.iter_mut().zip(&mask.data) {
                    *dv *= mv;
                }
            }
            // Activation backward at the post-batch-norm pre-activation.
            let act = self.config.activation;
            for (dv, &uv) in d_out.data.iter_mut().zip(&lc.u.data) {
                *dv *= act.derivative(uv);
            }

            let (dz, dgamma, dbeta) = match (&layer.batch_norm, &lc.bn) {
                (Some(bn), Some(bnc)) => {
                    let (dz, dg, db) = bn_backward(bn, bnc, &lc.z, &d_out);
                    (dz, Some(dg), Some(db))
                }
                _ => (d_out, None, None),
            };

            grads.push(LayerGrads {
                weights: matmul_tn(&dz, &lc.input),
                bias: col_sums(&dz),
                gamma: dgamma,
                beta: dbeta,
            });
            d_out = matmul_nn(&dz, &layer.weights);
        }

        grads.reverse();
        Gradients { layers: grads }
    }

    /// All trainable tensors in a fixed order (weights, bias, then gamma and
    /// beta where present, per layer). The optimizer relies on this order.
    pub fn param_tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            out.push(layer.weights.data.as_mut_slice());
            out.push(layer.bias.as_mut_slice());
            if let Some(bn) = &mut layer.batch_norm {
                out.push(bn.gamma.as_mut_slice());
                out.push(bn.beta.as_mut_slice());
            }
        }
        out
    }
}

impl Gradients {
    /// Gradient tensors in the same order as [`Network::param_tensors_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.push(layer.weights.data.as_slice());
            out.push(layer.bias.as_slice());
            if let Some(g) = &layer.gamma {
                out.push(g.as_slice());
            }
            if let Some(b) = &layer.beta {
                out.push(b.as_slice());
            }
        }
        out
    }
}

fn bn_forward_train(bn: &mut BatchNorm, z: &Matrix) -> (Matrix, BnCache) {
    let (n, d) = (z.rows, z.cols);
    let nf = n as f64;
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, &v) in mean.iter_mut().zip(z.row(i)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }
    let mut var = vec![0.0; d];
    for i in 0..n {
        for ((s, &v), m) in var.iter_mut().zip(z.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut var {
        *s /= nf;
    }

    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + BN_EPS).sqrt()).collect();
    let mut xhat = Matrix::zeros(n, d);
    let mut u = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let h = (z.get(i, j) - mean[j]) * inv_std[j];
            xhat.set(i, j, h);
            u.set(i, j, bn.gamma[j] * h + bn.beta[j]);
        }
    }

    for j in 0..d {
        bn.running_mean[j] = BN_MOMENTUM * bn.running_mean[j] + (1.0 - BN_MOMENTUM) * mean[j];
        bn.running_var[j] = BN_MOMENTUM * bn.running_var[j] + (1.0 - BN_MOMENTUM) * var[j];
    }

    (u, BnCache { mean, inv_std, xhat })
}

/// Full batch-norm backward: returns (dz, dgamma, dbeta) given the gradient
/// at the batch-norm output.
fn bn_backward(
    bn: &BatchNorm,
    cache: &BnCache,
    z: &Matrix,
    du: &Matrix,
) -> (Matrix, Vec<f64>, Vec<f64>) {
    let (n, d) = (z.rows, z.cols);
    let nf = n as f64;
    let mut dgamma = vec![0.0; d];
    let mut dbeta = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            dgamma[j] += du.get(i, j) * cache.xhat.get(i, j);
            dbeta[j] += du.get(i, j);
        }
    }

    // dxhat = du * gamma; then the standard reduction over batch statistics.
    let mut sum_dxhat = vec![0.0; d];
    let mut sum_dxhat_xhat = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            let dxh = du.get(i, j) * bn.gamma[j];
            sum_dxhat[j] += dxh;
            sum_dxhat_xhat[j] += dxh * cache.xhat.get(i, j);
        }
    }
    let mut dz = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let dxh = du.get(i, j) * bn.gamma[j];
            let v = (cache.inv_std[j] / nf)
                * (nf * dxh - sum_dxhat[j] - cache.xhat.get(i, j) * sum_dxhat_xhat[j]);
            dz.set(i, j, v);
        }
    }
    let _ = &cache.mean;
    (dz, dgamma, dbeta)
}

/// Mean categorical cross-entropy over the batch, with the log clamped at
/// 1e-12 so exact-zero probabilities stay finite.
pub fn cross_entropy(probs: &Matrix, class_indices: &[usize]) -> f64 {
    assert_eq!(probs.rows, class_indices.len(), "label count mismatch");
    let mut total = 0.0;
    for (i, &class) in class_indices.iter().enumerate() {
        total -= probs.get(i, class).max(1e-12).ln();
    }
    total / probs.rows as f64
}
