//! Random forest of Gini-grown binary decision trees.

use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::scalar::{real, Real};

use super::dataset::FrameDataset;
use super::{ModelError, TrainConfig};

pub const N_TREES: usize = 50;

/// Flat-arena decision tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<R: Real = f64> {
    pub nodes: Vec<Node<R>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node<R: Real = f64> {
    /// Positive-class fraction of the training samples that reached it.
    Leaf { p: R },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: u16,
        threshold: R,
        left: u32,
        right: u32,
    },
}

impl<R: Real> Tree<R> {
    pub fn predict(&self, x: &[R]) -> R {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p } => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// Bagged ensemble of [`N_TREES`] trees; prediction is the mean of the leaf
/// fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel<R: Real = f64> {
    pub input_dim: usize,
    pub seed: u64,
    pub trees: Vec<Tree<R>>,
}

impl<R: Real> RfModel<R> {
    pub fn width(&self) -> usize {
        self.input_dim
    }

    pub fn predict_proba(&self, x: &[R]) -> R {
        let sum = self
            .trees
            .iter()
            .map(|t| t.predict(x))
            .fold(R::zero(), |a, v| a + v);
        sum / real::<R>(self.trees.len() as f64)
    }
}

/// Gini impurity of a node with the given class counts: `1 - p+^2 - p-^2`.
pub fn gini(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let pp = pos as f64 / n;
    let pn = neg as f64 / n;
    1.0 - pp * pp - pn * pn
}

/// Trains the forest: each tree fits a bootstrap resample of the frames,
/// samples `floor(sqrt(width))` candidate features per node, takes the split
/// minimizing size-weighted child Gini, and grows until nodes are pure or
/// hold fewer than two samples. Deterministic in `cfg.seed`.
pub fn train_rf<R: Real>(ds: &FrameDataset<R>, cfg: &TrainConfig) -> Result<RfModel<R>, ModelError> {
    ds.check_two_classes()?;
    let m_try = (ds.width() as f64).sqrt().floor().max(1.0) as usize;
    let root = Rng::new(cfg.seed);
    let trees = (0..N_TREES)
        .map(|t| {
            let mut rng = root.fork(t as u64);
            let n = ds.n_frames();
            let sample: Vec<u32> = (0..n).map(|_| rng.below(n) as u32).collect();
            grow_tree(ds, sample, m_try, &mut rng)
        })
        .collect();
    Ok(RfModel {
        input_dim: ds.width(),
        seed: cfg.seed,
        trees,
    })
}

fn leaf<R: Real>(pos: usize, total: usize) -> Node<R> {
    Node::Leaf {
        p: real::<R>(pos as f64 / total as f64),
    }
}

fn grow_tree<R: Real>(
    ds: &FrameDataset<R>,
    root_samples: Vec<u32>,
    m_try: usize,
    rng: &mut Rng,
) -> Tree<R> {
    let mut nodes: Vec<Node<R>> = vec![Node::Leaf { p: R::zero() }];
    let mut work: Vec<(usize, Vec<u32>)> = vec![(0, root_samples)];

    while let Some((slot, samples)) = work.pop() {
        let total = samples.len();
        let pos = samples.iter().filter(|&&i| ds.label(i as usize)).count();
        if pos == 0 || pos == total || total < 2 {
            nodes[slot] = leaf(pos, total);
            continue;
        }

        let candidates = rng.sample_distinct(ds.width(), m_try);
        let mut best: Option<(usize, R, f64)> = None; // feature, threshold, impurity
        let mut scratch: Vec<(R, bool)> = Vec::with_capacity(total);
        for &feat in &candidates {
            scratch.clear();
            scratch.extend(samples.iter().map(|&i| {
                (
                    ds.feature_row(i as usize)[feat],
                    ds.label(i as usize),
                )
            }));
            scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut pos_left = 0usize;
            for i in 1..total {
                if scratch[i - 1].1 {
                    pos_left += 1;
                }
                let (lo, hi) = (scratch[i - 1].0, scratch[i].0);
                if lo == hi {
                    continue;
                }
                let left_n = i;
                let right_n = total - i;
                let impurity = (left_n as f64 * gini(pos_left, left_n - pos_left)
                    + right_n as f64 * gini(pos - pos_left, right_n - (pos - pos_left)))
                    / total as f64;
                if best.as_ref().is_none_or(|b| impurity < b.2) {
                    // Midpoint, nudged down to `lo` if rounding lands on `hi`
                    // so both children stay nonempty under `<=`.
                    let half = real::<R>(0.5);
                    let mut thr = (lo + hi) * half;
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some((feat, thr, impurity));
                }
            }
        }

        match best {
            None => nodes[slot] = leaf(pos, total), // all candidates constant
            Some((feat, thr, _)) => {
                let (left_samples, right_samples): (Vec<u32>, Vec<u32>) = samples
                    .iter()
                    .partition(|&&i| ds.feature_row(i as usize)[feat] <= thr);
                debug_assert!(!left_samples.is_empty() && !right_samples.is_empty());
                let left = nodes.len() as u32;
                nodes.push(Node::Leaf { p: R::zero() });
                let right = nodes.len() as u32;
                nodes.push(Node::Leaf { p: R::zero() });
                nodes[slot] = Node::Split {
                    feature: feat as u16,
                    threshold: thr,
                    left,
                    right,
                };
                work.push((left as usize, left_samples));
                work.push((right as usize, right_samples));
            }
        }
    }
    Tree { nodes }
}
