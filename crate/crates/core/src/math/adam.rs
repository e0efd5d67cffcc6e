//! First-order optimizer with per-parameter adaptive step sizes.

use crate::math::params::{ParamId, ParamStore};
use crate::math::tape::Gradients;

/// Moment-estimate optimizer over a fixed set of parameter arrays.
#[derive(Debug, Clone)]
pub struct Adam {
    params: Vec<ParamId>,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParamStore, params: Vec<ParamId>, lr: f64) -> Self {
        let m = params.iter().map(|&p| vec![0.0; store.values(p).len()]).collect();
        let v = params.iter().map(|&p| vec![0.0; store.values(p).len()]).collect();
        Self { params, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m, v }
    }

    pub fn params(&self) -> &[ParamId] {
        &self.params
    }

    /// Applies one update. Parameters absent from the gradients are treated
    /// as having zero gradient (their moments still decay).
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (i, &p) in self.params.iter().enumerate() {
            let values = store.values_mut(p);
            let g_owned;
            let g: &[f64] = match grads.param(p) {
                Some(g) => g,
                None => {
                    g_owned = vec![0.0; values.len()];
                    &g_owned
                }
            };
            for k in 0..values.len() {
                let m = &mut self.m[i][k];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g[k];
                let v = &mut self.v[i][k];
                *v = self.beta2 * *v + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                values[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::tape::Tape;

    #[test]
    fn minimizes_a_quadratic() {
        let mut store = ParamStore::new();
        let w = store.vector("w", vec![5.0, -4.0]);
        let mut opt = Adam::new(&store, vec![w], 0.1);
        for _ in 0..500 {
            let mut tape = Tape::new();
            let wn = tape.param(&store, w);
            let sq = tape.mul(wn, wn);
            let loss = tape.sum(sq);
            let grads = tape.backward(loss);
            opt.step(&mut store, &grads);
        }
        for &v in store.values(w) {
            assert!(v.abs() < 1e-3, "did not converge: {v}");
        }
    }

    #[test]
    fn zero_gradient_step_is_small() {
        let mut store = ParamStore::new();
        let w = store.vector("w", vec![1.0]);
        let mut opt = Adam::new(&store, vec![w], 0.1);
        let mut tape = Tape::new();
        let c = tape.scalar(1.0);
        let loss = tape.sum(c); // w never touches the loss
        let grads = tape.backward(loss);
        opt.step(&mut store, &grads);
        assert!((store.values(w)[0] - 1.0).abs() < 1e-9);
    }
}
