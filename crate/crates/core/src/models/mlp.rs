//! Single-hidden-layer perceptron: 25 tanh units into a sigmoid output.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::scalar::{real, real_of, Real};

use super::adam::Adam;
use super::dataset::FrameDataset;
use super::lr::{bce_from_logit, sigmoid};
use super::{ModelError, TrainConfig};

pub const HIDDEN_UNITS: usize = 25;

/// `p = sigmoid(out_w . tanh(Wx + hidden_b) + out_b)`.
///
/// `hidden_weights` is row-major `hidden x input`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel<R: Real = f64> {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub hidden_weights: Vec<R>,
    pub hidden_bias: Vec<R>,
    pub out_weights: Vec<R>,
    pub out_bias: R,
}

#[derive(Debug, Clone)]
pub struct MlpGrad<R: Real = f64> {
    pub hidden_weights: Vec<R>,
    pub hidden_bias: Vec<R>,
    pub out_weights: Vec<R>,
    pub out_bias: R,
}

impl<R: Real> MlpModel<R> {
    /// Seeded symmetric-uniform initialization with bound `1/sqrt(fan_in)`;
    /// biases start at zero.
    pub fn init(input_dim: usize, hidden_dim: usize, rng: &mut Rng) -> Self {
        let hb = 1.0 / (input_dim as f64).sqrt();
        let ob = 1.0 / (hidden_dim as f64).sqrt();
        MlpModel {
            input_dim,
            hidden_dim,
            hidden_weights: (0..hidden_dim * input_dim)
                .map(|_| real::<R>(rng.range_f64(-hb, hb)))
                .collect(),
            hidden_bias: vec![R::zero(); hidden_dim],
            out_weights: (0..hidden_dim)
                .map(|_| real::<R>(rng.range_f64(-ob, ob)))
                .collect(),
            out_bias: R::zero(),
        }
    }

    pub fn width(&self) -> usize {
        self.input_dim
    }

    fn hidden_row(&self, j: usize) -> &[R] {
        &self.hidden_weights[j * self.input_dim..(j + 1) * self.input_dim]
    }

    /// Hidden activations and output logit for one frame.
    fn forward(&self, x: &[R]) -> (Vec<R>, R) {
        debug_assert_eq!(x.len(), self.input_dim);
        let mut hidden = Vec::with_capacity(self.hidden_dim);
        let mut z2 = self.out_bias;
        for j in 0..self.hidden_dim {
            let mut z = self.hidden_bias[j];
            for (w, v) in self.hidden_row(j).iter().zip(x.iter()) {
                z = z + *w * *v;
            }
            let h = z.tanh();
            z2 = z2 + self.out_weights[j] * h;
            hidden.push(h);
        }
        (hidden, z2)
    }

    pub fn predict_proba(&self, x: &[R]) -> R {
        sigmoid(self.forward(x).1)
    }
}

/// Class-weighted BCE plus `l2 * (||hidden_w||^2 + ||out_w||^2)` (biases
/// unregularized), with the backpropagated gradient.
pub fn mlp_loss_grad<R: Real>(
    model: &MlpModel<R>,
    ds: &FrameDataset<R>,
    batch: &[usize],
    class_weights: (R, R),
    l2: f64,
) -> (R, MlpGrad<R>) {
    assert!(!batch.is_empty());
    let (d, hd) = (model.input_dim, model.hidden_dim);
    let inv_b = R::one() / real_of::<R>(batch.len());
    let l2 = real::<R>(l2);
    let two = real::<R>(2.0);
    let mut loss = R::zero();
    let mut grad = MlpGrad {
        hidden_weights: vec![R::zero(); hd * d],
        hidden_bias: vec![R::zero(); hd],
        out_weights: vec![R::zero(); hd],
        out_bias: R::zero(),
    };
    for &i in batch {
        let x = ds.feature_row(i);
        let y = if ds.label(i) { R::one() } else { R::zero() };
        let w_s = ds.weight_of(i, class_weights);
        let (hidden, z2) = model.forward(x);
        loss = loss + w_s * bce_from_logit(z2, y);
        let dz2 = w_s * (sigmoid(z2) - y) * inv_b;
        grad.out_bias = grad.out_bias + dz2;
        for (j, &h) in hidden.iter().enumerate() {
            grad.out_weights[j] = grad.out_weights[j] + dz2 * h;
            let dz1 = dz2 * model.out_weights[j] * (R::one() - h * h);
            grad.hidden_bias[j] = grad.hidden_bias[j] + dz1;
            let row = &mut grad.hidden_weights[j * d..(j + 1) * d];
            for (g, v) in row.iter_mut().zip(x.iter()) {
                *g = *g + dz1 * *v;
            }
        }
    }
    loss = loss * inv_b;
    for (g, w) in grad
        .hidden_weights
        .iter_mut()
        .zip(model.hidden_weights.iter())
    {
        *g = *g + two * l2 * *w;
        loss = loss + l2 * *w * *w;
    }
    for (g, w) in grad.out_weights.iter_mut().zip(model.out_weights.iter()) {
        *g = *g + two * l2 * *w;
        loss = loss + l2 * *w * *w;
    }
    (loss, grad)
}

/// Trains the MLP with mini-batch Adam; deterministic in `cfg.seed`.
pub fn train_mlp<R: Real>(ds: &FrameDataset<R>, cfg: &TrainConfig) -> Result<MlpModel<R>, ModelError> {
    ds.check_two_classes()?;
    let d = ds.width();
    let class_weights = ds.class_weights();
    let mut rng = Rng::new(cfg.seed);
    let mut model = MlpModel::init(d, HIDDEN_UNITS, &mut rng);
    let n_params = HIDDEN_UNITS * d + HIDDEN_UNITS + HIDDEN_UNITS + 1;
    let mut adam: Adam<R> = Adam::new(n_params, cfg.learning_rate);
    let mut order: Vec<usize> = (0..ds.n_frames()).collect();
    let mut flat = vec![R::zero(); n_params];
    let mut flat_g = vec![R::zero(); n_params];
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grad) = mlp_loss_grad(&model, ds, batch, class_weights, cfg.l2_mlp);
            pack(&model, &mut flat);
            pack_grad(&grad, &mut flat_g);
            adam.step(&mut flat, &flat_g);
            unpack(&flat, &mut model);
        }
    }
    Ok(model)
}

fn pack<R: Real>(m: &MlpModel<R>, flat: &mut [R]) {
    let (a, b) = (m.hidden_weights.len(), m.hidden_bias.len());
    let c = m.out_weights.len();
    flat[..a].copy_from_slice(&m.hidden_weights);
    flat[a..a + b].copy_from_slice(&m.hidden_bias);
    flat[a + b..a + b + c].copy_from_slice(&m.out_weights);
    flat[a + b + c] = m.out_bias;
}

fn pack_grad<R: Real>(g: &MlpGrad<R>, flat: &mut [R]) {
    let (a, b) = (g.hidden_weights.len(), g.hidden_bias.len());
    let c = g.out_weights.len();
    flat[..a].copy_from_slice(&g.hidden_weights);
    flat[a..a + b].copy_from_slice(&g.hidden_bias);
    flat[a + b..a + b + c].copy_from_slice(&g.out_weights);
    flat[a + b + c] = g.out_bias;
}

fn unpack<R: Real>(flat: &[R], m: &mut MlpModel<R>) {
    let (a, b) = (m.hidden_weights.len(), m.hidden_bias.len());
    let c = m.out_weights.len();
    m.hidden_weights.copy_from_slice(&flat[..a]);
    m.hidden_bias.copy_from_slice(&flat[a..a + b]);
    m.out_weights.copy_from_slice(&flat[a + b..a + b + c]);
    m.out_bias = flat[a + b + c];
}
