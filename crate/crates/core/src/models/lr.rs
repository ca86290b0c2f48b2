//! Logistic regression trained with class-weighted BCE and L2 regularization.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::scalar::{real, real_of, Real};

use super::adam::Adam;
use super::dataset::FrameDataset;
use super::{ModelError, TrainConfig};

/// Linear model over one frame: `p = sigmoid(w . x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel<R: Real = f64> {
    pub weights: Vec<R>,
    pub bias: R,
}

/// Gradient with the same shape as the model.
#[derive(Debug, Clone)]
pub struct LrGrad<R: Real = f64> {
    pub weights: Vec<R>,
    pub bias: R,
}

/// Numerically stable logistic function.
pub(super) fn sigmoid<R: Real>(z: R) -> R {
    if z >= R::zero() {
        R::one() / (R::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (R::one() + e)
    }
}

/// Stable `-[y ln p + (1-y) ln(1-p)]` straight from the logit.
pub(super) fn bce_from_logit<R: Real>(z: R, y: R) -> R {
    z.max(R::zero()) - z * y + (R::one() + (-z.abs()).exp()).ln()
}

impl<R: Real> LrModel<R> {
    pub fn zeros(width: usize) -> Self {
        LrModel {
            weights: vec![R::zero(); width],
            bias: R::zero(),
        }
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, x: &[R]) -> R {
        debug_assert_eq!(x.len(), self.weights.len());
        let mut z = self.bias;
        for (w, v) in self.weights.iter().zip(x.iter()) {
            z = z + *w * *v;
        }
        z
    }

    pub fn predict_proba(&self, x: &[R]) -> R {
        sigmoid(self.logit(x))
    }
}

/// Class-weighted BCE plus `l2 * ||w||^2` (bias unregularized), with its
/// analytic gradient: the quantity minimized by [`train_lr`] and checked
/// against finite differences in the test suite.
pub fn lr_loss_grad<R: Real>(
    model: &LrModel<R>,
    ds: &FrameDataset<R>,
    batch: &[usize],
    class_weights: (R, R),
    l2: f64,
) -> (R, LrGrad<R>) {
    assert!(!batch.is_empty());
    let d = model.width();
    let inv_b = R::one() / real_of::<R>(batch.len());
    let l2 = real::<R>(l2);
    let mut loss = R::zero();
    let mut gw = vec![R::zero(); d];
    let mut gb = R::zero();
    for &i in batch {
        let x = ds.feature_row(i);
        let y = if ds.label(i) { R::one() } else { R::zero() };
        let w_s = ds.weight_of(i, class_weights);
        let z = model.logit(x);
        loss = loss + w_s * bce_from_logit(z, y);
        let dz = w_s * (sigmoid(z) - y) * inv_b;
        for (g, v) in gw.iter_mut().zip(x.iter()) {
            *g = *g + dz * *v;
        }
        gb = gb + dz;
    }
    loss = loss * inv_b;
    let two = real::<R>(2.0);
    for (g, w) in gw.iter_mut().zip(model.weights.iter()) {
        *g = *g + two * l2 * *w;
        loss = loss + l2 * *w * *w;
    }
    (loss, LrGrad { weights: gw, bias: gb })
}

/// Trains logistic regression with mini-batch Adam; deterministic in
/// `cfg.seed`.
pub fn train_lr<R: Real>(ds: &FrameDataset<R>, cfg: &TrainConfig) -> Result<LrModel<R>, ModelError> {
    ds.check_two_classes()?;
    let d = ds.width();
    let class_weights = ds.class_weights();
    let mut model = LrModel::zeros(d);
    let mut adam: Adam<R> = Adam::new(d + 1, cfg.learning_rate);
    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..ds.n_frames()).collect();
    let mut flat = vec![R::zero(); d + 1];
    let mut flat_g = vec![R::zero(); d + 1];
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let (_, grad) = lr_loss_grad(&model, ds, batch, class_weights, cfg.l2_lr);
            flat[..d].copy_from_slice(&model.weights);
            flat[d] = model.bias;
            flat_g[..d].copy_from_slice(&grad.weights);
            flat_g[d] = grad.bias;
            adam.step(&mut flat, &flat_g);
            model.weights.copy_from_slice(&flat[..d]);
            model.bias = flat[d];
        }
    }
    Ok(model)
}
