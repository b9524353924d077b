//! A small multilayer perceptron with optional Brownian ReLU layers.
//!
//! A Brownian layer adds `α W(z)` noise to its ReLU output in the forward
//! pass and multiplies the upstream gradient by `H(z) + α D_{n,v} W(z)` in the
//! backward pass. Forward and backward noise are drawn independently. The
//! head is a linear layer followed by softmax cross-entropy.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::brownian::{backward_activation, forward_activation, heaviside, BrownianSpec};
use crate::error::{Error, Result};
use crate::math::{exp, ln, sqrt};
use crate::rng::{Seed, Tag};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Relu,
    Brownian(BrownianSpec),
}

impl Activation {
    fn is_silent(&self) -> bool {
        match self {
            Activation::Relu => true,
            Activation::Brownian(b) => b.alpha() == 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpSpec {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    seed: u64,
}

impl MlpSpec {
    /// `widths` runs from the input width to the class count; there is one
    /// activation per hidden layer.
    pub fn new(widths: Vec<usize>, activations: Vec<Activation>, seed: u64) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArgument("need at least input and output widths"));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArgument("layer widths must be positive"));
        }
        if activations.len() != widths.len() - 2 {
            return Err(Error::DimensionMismatch {
                expected: widths.len() - 2,
                got: activations.len(),
            });
        }
        Ok(MlpSpec {
            widths,
            activations,
            seed,
        })
    }

    pub fn relu(widths: Vec<usize>, seed: u64) -> Result<Self> {
        let hidden = widths.len().saturating_sub(2);
        MlpSpec::new(widths, vec![Activation::Relu; hidden], seed)
    }

    /// `[128x3, 64x3]` hidden layers.
    pub fn standard(inputs: usize, classes: usize, seed: u64) -> Self {
        let mut w = vec![inputs];
        w.extend([128, 128, 128, 64, 64, 64]);
        w.push(classes);
        MlpSpec::relu(w, seed).expect("fixed architecture")
    }

    /// A deeper, overfitting-prone variant, `[128x6, 64x6]`.
    pub fn adversarial(inputs: usize, classes: usize, seed: u64) -> Self {
        let mut w = vec![inputs];
        w.extend([128; 6]);
        w.extend([64; 6]);
        w.push(classes);
        MlpSpec::relu(w, seed).expect("fixed architecture")
    }

    /// Replaces the activation of hidden layer `layer` (0-based).
    pub fn with_activation(mut self, layer: usize, act: Activation) -> Result<Self> {
        match self.activations.get_mut(layer) {
            Some(a) => *a = act,
            None => return Err(Error::InvalidArgument("hidden layer index out of range")),
        }
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn classes(&self) -> usize {
        *self.widths.last().expect("nonempty")
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn parameter_count(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Weights (`fan_out x fan_in`, row-major) and biases of one affine map.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            biases: vec![0.0; fan_out],
        }
    }

    /// `out = x Wᵀ + b` for every row of `x`.
    fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows, self.fan_out);
        for r in 0..x.rows {
            let xr = x.row(r);
            let or = out.row_mut(r);
            for (j, o) in or.iter_mut().enumerate() {
                let w = &self.weights[j * self.fan_in..(j + 1) * self.fan_in];
                *o = self.biases[j] + w.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn coord(&self, i: usize) -> &f64 {
        if i < self.weights.len() {
            &self.weights[i]
        } else {
            &self.biases[i - self.weights.len()]
        }
    }

    fn coord_mut(&mut self, i: usize) -> &mut f64 {
        if i < self.weights.len() {
            &mut self.weights[i]
        } else {
            let k = i - self.weights.len();
            &mut self.biases[k]
        }
    }
}

/// Parameters (or gradients) of every layer, input side first.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub layers: Vec<Layer>,
}

impl Params {
    pub fn zeros_like(spec: &MlpSpec) -> Self {
        Params {
            layers: spec
                .widths
                .windows(2)
                .map(|w| Layer::zeros(w[0], w[1]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat coordinate `i`: layers in order, weights before biases.
    pub fn get(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.len() {
                return *l.coord(i);
            }
            i -= l.len();
        }
        panic!("parameter index out of range")
    }

    pub fn set(&mut self, mut i: usize, value: f64) {
        for l in &mut self.layers {
            if i < l.len() {
                *l.coord_mut(i) = value;
                return;
            }
            i -= l.len();
        }
        panic!("parameter index out of range")
    }

    /// `self -= rate * grad`.
    pub fn sgd_step(&mut self, grad: &Params, rate: f64) {
        for (p, g) in self.layers.iter_mut().zip(&grad.layers) {
            for (a, b) in p.weights.iter_mut().zip(&g.weights) {
                *a -= rate * b;
            }
            for (a, b) in p.biases.iter_mut().zip(&g.biases) {
                *a -= rate * b;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|x| x.is_finite()))
    }
}

/// He initialization: weights `N(0, 2/fan_in)`, zero biases, drawn from the
/// spec's seed.
pub fn init_params(spec: &MlpSpec) -> Params {
    let mut rng = Seed(spec.seed).stream(Tag::Init, 0);
    let mut params = Params::zeros_like(spec);
    for layer in &mut params.layers {
        let scale = sqrt(2.0 / layer.fan_in as f64);
        for w in &mut layer.weights {
            let z: f64 = rng.sample(StandardNormal);
            *w = scale * z;
        }
    }
    params
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    /// Deterministic ReLU unless noise at evaluation is requested.
    Eval { noise: bool },
}

/// Values saved by [`forward`] for [`backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cache {
    /// Input to each affine layer.
    inputs: Vec<Matrix>,
    /// Pre-activations of each hidden layer.
    pre: Vec<Matrix>,
}

impl Cache {
    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre
    }
}

fn check_shapes(params: &Params, spec: &MlpSpec) -> Result<()> {
    if params.layers.len() != spec.layer_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.layer_count(),
            got: params.layers.len(),
        });
    }
    for (l, w) in params.layers.iter().zip(spec.widths.windows(2)) {
        if l.fan_in != w[0] || l.fan_out != w[1] {
            return Err(Error::DimensionMismatch {
                expected: w[0] * w[1],
                got: l.fan_in * l.fan_out,
            });
        }
    }
    Ok(())
}

/// Logits for every row of `batch`.
pub fn forward<R: Rng + ?Sized>(
    params: &Params,
    batch: &Matrix,
    spec: &MlpSpec,
    mode: Mode,
    rng: &mut R,
) -> Result<(Matrix, Cache)> {
    check_shapes(params, spec)?;
    if batch.cols != spec.inputs() {
        return Err(Error::DimensionMismatch {
            expected: spec.inputs(),
            got: batch.cols,
        });
    }
    let noisy = match mode {
        Mode::Train => true,
        Mode::Eval { noise } => noise,
    };
    let hidden = spec.activations.len();
    let mut inputs = Vec::with_capacity(hidden + 1);
    let mut pre = Vec::with_capacity(hidden);
    let mut x = batch.clone();
    for (i, layer) in params.layers.iter().enumerate() {
        let z = layer.apply(&x);
        if z.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { layer: i });
        }
        inputs.push(x);
        if i == hidden {
            return Ok((z, Cache { inputs, pre }));
        }
        let mut a = z.clone();
        match (&spec.activations[i], noisy) {
            (Activation::Brownian(b), true) => {
                for v in &mut a.data {
                    *v = forward_activation(*v, b, rng);
                }
            }
            _ => {
                for v in &mut a.data {
                    *v = v.max(0.0);
                }
            }
        }
        if a.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation { layer: i });
        }
        pre.push(z);
        x = a;
    }
    unreachable!("the head layer returns")
}

/// Mean softmax cross-entropy over the batch and its gradient with respect
/// to the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[u32]) -> Result<(f64, Matrix)> {
    if labels.len() != logits.rows {
        return Err(Error::DimensionMismatch {
            expected: logits.rows,
            got: labels.len(),
        });
    }
    let m = logits.rows as f64;
    let mut grad = Matrix::zeros(logits.rows, logits.cols);
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let y = y as usize;
        if y >= logits.cols {
            return Err(Error::InvalidArgument("label out of range"));
        }
        let z = logits.row(r);
        let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let g = grad.row_mut(r);
        let mut total = 0.0;
        for (gi, zi) in g.iter_mut().zip(z) {
            *gi = exp(zi - top);
            total += *gi;
        }
        loss += ln(total) + top - z[y];
        for gi in g.iter_mut() {
            *gi /= total * m;
        }
        g[y] -= 1.0 / m;
    }
    Ok((loss / m, grad))
}

/// Backpropagates `upstream = ∂L/∂logits` through the network. Brownian
/// layers draw their gradient multipliers from `rng`.
pub fn backward_from<R: Rng + ?Sized>(
    params: &Params,
    upstream: &Matrix,
    cache: &Cache,
    spec: &MlpSpec,
    rng: &mut R,
) -> Result<Params> {
    check_shapes(params, spec)?;
    if cache.inputs.len() != spec.layer_count() || upstream.cols != spec.classes() {
        return Err(Error::DimensionMismatch {
            expected: spec.classes(),
            got: upstream.cols,
        });
    }
    let mut grads = Params::zeros_like(spec);
    let mut delta = upstream.clone();
    for i in (0..params.layers.len()).rev() {
        let layer = &params.layers[i];
        let x = &cache.inputs[i];
        let g = &mut grads.layers[i];
        for r in 0..delta.rows {
            let dr = delta.row(r);
            let xr = x.row(r);
            for (j, &d) in dr.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[j] += d;
                let gw = &mut g.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                for (w, xv) in gw.iter_mut().zip(xr) {
                    *w += d * xv;
                }
            }
        }
        if i == 0 {
            break;
        }
        let mut below = Matrix::zeros(delta.rows, layer.fan_in);
        for r in 0..delta.rows {
            let dr = delta.row(r);
            let br = below.row_mut(r);
            for (j, &d) in dr.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let w = &layer.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                for (b, wv) in br.iter_mut().zip(w) {
                    *b += d * wv;
                }
            }
        }
        let z = &cache.pre[i - 1];
        match &spec.activations[i - 1] {
            Activation::Brownian(b) => {
                for (d, &zv) in below.data.iter_mut().zip(&z.data) {
                    *d *= backward_activation(zv, b, rng);
                }
            }
            Activation::Relu => {
                for (d, &zv) in below.data.iter_mut().zip(&z.data) {
                    *d *= heaviside(zv);
                }
            }
        }
        delta = below;
    }
    Ok(grads)
}

/// Gradient of the mean cross-entropy loss.
pub fn backward<R: Rng + ?Sized>(
    params: &Params,
    logits: &Matrix,
    labels: &[u32],
    cache: &Cache,
    spec: &MlpSpec,
    rng: &mut R,
) -> Result<Params> {
    let (_, upstream) = softmax_cross_entropy(logits, labels)?;
    backward_from(params, &upstream, cache, spec, rng)
}

/// Mean loss of the noiseless network.
pub fn deterministic_loss(params: &Params, batch: &Matrix, labels: &[u32], spec: &MlpSpec) -> Result<f64> {
    let mut rng = Seed(0).stream(Tag::Noise, 0);
    let (logits, _) = forward(params, batch, spec, Mode::Eval { noise: false }, &mut rng)?;
    Ok(softmax_cross_entropy(&logits, labels)?.0)
}

/// Feature rows in `[0, 1]` with class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<u32>,
    class_count: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<u32>, class_count: usize) -> Result<Self> {
        if features.rows != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows,
                got: labels.len(),
            });
        }
        if labels.iter().any(|&l| l as usize >= class_count) {
            return Err(Error::InvalidArgument("label id not below class count"));
        }
        Ok(Dataset {
            features,
            labels,
            class_count,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.cols
    }

    /// Rows `idx` in the given order.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        let cols = self.features.cols;
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx {
            data.extend_from_slice(self.features.row(i));
        }
        Dataset {
            features: Matrix {
                rows: idx.len(),
                cols,
                data,
            },
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }

    /// Seeded random partition into `(first, rest)` with
    /// `round(fraction * len)` rows in `first`.
    pub fn split(&self, fraction: f64, seed: Seed) -> (Dataset, Dataset) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seed.stream(Tag::Split, 0));
        let k = ((fraction.clamp(0.0, 1.0) * self.len() as f64) + 0.5) as usize;
        (self.select(&idx[..k]), self.select(&idx[k..]))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub top1: f64,
    pub top3: f64,
}

/// Whether `target` is among the `k` largest entries, ties going to the
/// lower index.
fn in_top_k(row: &[f64], target: usize, k: usize) -> bool {
    let t = row[target];
    let ahead = row
        .iter()
        .enumerate()
        .filter(|&(j, &z)| z > t || (z == t && j < target))
        .count();
    ahead < k
}

/// Top-1 and top-3 accuracy of a logit matrix.
pub fn score(logits: &Matrix, labels: &[u32]) -> Metrics {
    let m = labels.len() as f64;
    let mut top1 = 0usize;
    let mut top3 = 0usize;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        top1 += in_top_k(row, y as usize, 1) as usize;
        top3 += in_top_k(row, y as usize, 3) as usize;
    }
    Metrics {
        top1: top1 as f64 / m,
        top3: top3 as f64 / m,
    }
}

/// Accuracy on `data`; noise, if requested, comes from the `(seed, Noise)`
/// substream reserved for evaluation.
pub fn evaluate(params: &Params, data: &Dataset, spec: &MlpSpec, noise: bool, seed: Seed) -> Result<Metrics> {
    let mut rng = seed.stream(Tag::Noise, u64::MAX);
    let (logits, _) = forward(params, &data.features, spec, Mode::Eval { noise }, &mut rng)?;
    Ok(score(&logits, &data.labels))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Fraction of the training set used, in `(0, 1]`.
    pub data_pct: f64,
    pub noise_at_eval: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            learning_rate: 0.05,
            data_pct: 1.0,
            noise_at_eval: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be at least 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive"));
        }
        if !(self.data_pct > 0.0 && self.data_pct <= 1.0) {
            return Err(Error::InvalidArgument("data_pct must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval: Metrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub params: Params,
    pub trace: Vec<EpochRecord>,
    /// Number of training rows after applying `data_pct`.
    pub train_rows: usize,
}

/// Minibatch SGD on a `data_pct` subset of `train_set` (fixed per `seed`),
/// evaluating on `eval_set` after every epoch. Initialization uses the spec's
/// seed; subset, shuffle order and activation noise use separate substreams
/// of `seed`.
pub fn train(
    spec: &MlpSpec,
    train_set: &Dataset,
    eval_set: &Dataset,
    cfg: &TrainConfig,
    seed: Seed,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("training set is empty"));
    }
    for d in [train_set, eval_set] {
        if d.width() != spec.inputs() {
            return Err(Error::DimensionMismatch {
                expected: spec.inputs(),
                got: d.width(),
            });
        }
    }
    let (subset, _) = train_set.split(cfg.data_pct, seed.child(Tag::Split, 1));
    if subset.is_empty() {
        return Err(Error::InvalidArgument("data_pct leaves no training rows"));
    }
    let mut params = init_params(spec);
    let mut shuffle = seed.stream(Tag::Shuffle, 0);
    let mut noise = seed.stream(Tag::Noise, 0);
    let silent = spec.activations.iter().all(Activation::is_silent);
    let mut order: Vec<usize> = (0..subset.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch = subset.select(chunk);
            let (logits, cache) = forward(&params, &batch.features, spec, Mode::Train, &mut noise)?;
            let (loss, upstream) = softmax_cross_entropy(&logits, &batch.labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            loss_sum += loss * chunk.len() as f64;
            let grads = backward_from(&params, &upstream, &cache, spec, &mut noise)?;
            params.sgd_step(&grads, cfg.learning_rate);
        }
        if !params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let eval = evaluate(&params, eval_set, spec, cfg.noise_at_eval && !silent, seed)?;
        trace.push(EpochRecord {
            epoch,
            train_loss: loss_sum / subset.len() as f64,
            eval,
        });
    }
    Ok(TrainReport {
        params,
        trace,
        train_rows: subset.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (MlpSpec, Matrix, Vec<u32>) {
        let spec = MlpSpec::relu(vec![3, 5, 4, 3], 11).unwrap();
        let mut rng = Seed(2).stream(Tag::Points, 0);
        let data: Vec<f64> = (0..6 * 3).map(|_| rng.random::<f64>()).collect();
        (spec, Matrix::from_vec(6, 3, data).unwrap(), vec![0, 1, 2, 1, 0, 2])
    }

    #[test]
    fn spec_validation() {
        assert!(MlpSpec::new(vec![4], vec![], 0).is_err());
        assert!(MlpSpec::new(vec![4, 3, 2], vec![], 0).is_err());
        assert!(MlpSpec::new(vec![4, 0, 2], vec![Activation::Relu], 0).is_err());
        let s = MlpSpec::standard(64, 10, 0);
        assert_eq!(s.widths(), &[64, 128, 128, 128, 64, 64, 64, 10]);
        assert!(s.clone().with_activation(6, Activation::Relu).is_err());
    }

    #[test]
    fn parameter_count_of_small_net() {
        let spec = MlpSpec::relu(vec![4, 3, 2], 0).unwrap();
        assert_eq!(spec.parameter_count(), 23);
        assert_eq!(init_params(&spec).len(), 23);
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let spec = MlpSpec::relu(vec![4, 3, 2], 5).unwrap();
        let a = init_params(&spec);
        assert_eq!(a, init_params(&spec));
        assert!(a.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
        assert_ne!(a, init_params(&spec.with_seed(6)));
    }

    #[test]
    fn flat_coordinates_round_trip() {
        let spec = MlpSpec::relu(vec![4, 3, 2], 5).unwrap();
        let mut p = init_params(&spec);
        p.set(14, 7.5);
        assert_eq!(p.layers[0].biases[2], 7.5);
        assert_eq!(p.get(14), 7.5);
        p.set(15, -1.0);
        assert_eq!(p.layers[1].weights[0], -1.0);
    }

    #[test]
    fn cross_entropy_of_uniform_logits() {
        let logits = Matrix::zeros(2, 4);
        let (loss, grad) = softmax_cross_entropy(&logits, &[0, 3]).unwrap();
        assert!((loss - ln(4.0)).abs() < 1e-15);
        assert!((grad.row(0)[0] - (0.25 - 1.0) / 2.0).abs() < 1e-15);
        assert!((grad.row(0)[1] - 0.125).abs() < 1e-15);
        assert!(softmax_cross_entropy(&logits, &[0, 4]).is_err());
    }

    #[test]
    fn relu_forward_ignores_mode() {
        let (spec, x, _) = toy();
        let p = init_params(&spec);
        let mut r1 = Seed(1).stream(Tag::Noise, 0);
        let mut r2 = Seed(2).stream(Tag::Noise, 0);
        let (a, _) = forward(&p, &x, &spec, Mode::Train, &mut r1).unwrap();
        let (b, _) = forward(&p, &x, &spec, Mode::Eval { noise: true }, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let (spec, _, _) = toy();
        let p = init_params(&spec);
        let mut rng = Seed(1).stream(Tag::Noise, 0);
        assert!(forward(&p, &Matrix::zeros(2, 4), &spec, Mode::Train, &mut rng).is_err());
    }

    #[test]
    fn non_finite_activation_names_layer() {
        let (spec, x, _) = toy();
        let mut p = init_params(&spec);
        p.layers[1].biases[0] = f64::INFINITY;
        let mut rng = Seed(1).stream(Tag::Noise, 0);
        let err = forward(&p, &x, &spec, Mode::Train, &mut rng).unwrap_err();
        assert_eq!(err, Error::NonFiniteActivation { layer: 1 });
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (spec, x, y) = toy();
        let p = init_params(&spec);
        let mut rng = Seed(1).stream(Tag::Noise, 0);
        let (logits, cache) = forward(&p, &x, &spec, Mode::Train, &mut rng).unwrap();
        let g = backward(&p, &logits, &y, &cache, &spec, &mut rng).unwrap();
        let h = 1e-5;
        for i in 0..p.len() {
            let mut plus = p.clone();
            plus.set(i, p.get(i) + h);
            let mut minus = p.clone();
            minus.set(i, p.get(i) - h);
            let fd = (deterministic_loss(&plus, &x, &y, &spec).unwrap()
                - deterministic_loss(&minus, &x, &y, &spec).unwrap())
                / (2.0 * h);
            let a = g.get(i);
            let scale = a.abs().max(fd.abs()).max(1e-6);
            assert!((a - fd).abs() / scale < 1e-4, "coord {i}: {a} vs {fd}");
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let (spec, x, _) = toy();
        let b = BrownianSpec::new(3, 1.0, 0.5).unwrap();
        let spec = spec.with_activation(0, Activation::Brownian(b)).unwrap();
        let p = init_params(&spec);
        let mut rng = Seed(1).stream(Tag::Noise, 0);
        let (_, cache) = forward(&p, &x, &spec, Mode::Train, &mut rng).unwrap();
        let g = backward_from(&p, &Matrix::zeros(6, 3), &cache, &spec, &mut rng).unwrap();
        assert_eq!(g, Params::zeros_like(&spec));
    }

    #[test]
    fn top_k_tie_break_prefers_lower_index() {
        let logits = Matrix::zeros(10, 10);
        let labels: Vec<u32> = (0..10).collect();
        let m = score(&logits, &labels);
        assert_eq!(m.top1, 0.1);
        assert_eq!(m.top3, 0.3);
        let mut onehot = Matrix::zeros(3, 4);
        for (r, c) in [(0, 2), (1, 0), (2, 3)] {
            onehot.data[r * 4 + c] = 1.0;
        }
        let m = score(&onehot, &[2, 0, 3]);
        assert_eq!((m.top1, m.top3), (1.0, 1.0));
    }

    #[test]
    fn dataset_checks_labels() {
        let f = Matrix::zeros(2, 3);
        assert!(Dataset::new(f.clone(), vec![0, 2], 2).is_err());
        assert!(Dataset::new(f.clone(), vec![0], 2).is_err());
        let d = Dataset::new(f, vec![0, 1], 2).unwrap();
        let (a, b) = d.split(0.5, Seed(1));
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn train_config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { data_pct: 0.0, ..TrainConfig::default() },
            TrainConfig { data_pct: 1.5, ..TrainConfig::default() },
            TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn divergence_reports_epoch() {
        let (spec, x, y) = toy();
        let d = Dataset::new(x, y, 3).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e200,
            epochs: 3,
            ..TrainConfig::default()
        };
        let err = train(&spec, &d, &d, &cfg, Seed(0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { epoch: 0 } | Error::NonFiniteActivation { .. }), "{err:?}");
    }
}
