//! Adaptive-moment gradient descent.

use crate::scalar::{real, Real};

/// Adam state over a flat parameter vector.
///
/// Standard constants: β1 = 0.9, β2 = 0.999, ε = 1e-8, with bias-corrected
/// first and second moments.
#[derive(Debug, Clone)]
pub struct Adam<R: Real> {
    m: Vec<R>,
    v: Vec<R>,
    t: u64,
    lr: R,
    beta1: R,
    beta2: R,
    eps: R,
}

impl<R: Real> Adam<R> {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Adam {
            m: vec![R::zero(); n_params],
            v: vec![R::zero(); n_params],
            t: 0,
            lr: real(learning_rate),
            beta1: real(0.9),
            beta2: real(0.999),
            eps: real(1e-8),
        }
    }

    pub fn step(&mut self, params: &mut [R], grads: &[R]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let one = R::one();
        let bc1 = one - self.beta1.powi(self.t as i32);
        let bc2 = one - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}
