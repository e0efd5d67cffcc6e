//! Fully connected layer over the tape.

use crate::error::{CoreError, Result};
use crate::math::params::{ParamId, ParamStore};
use crate::math::rng::Rng;
use crate::math::tape::{matvec_into, NodeId, Tape};

/// W x + b with W stored row-major (out_dim x in_dim).
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub w: ParamId,
    pub b: ParamId,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl DenseLayer {
    /// Xavier-uniform weights, zero biases.
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, out_dim: usize, rng: &mut Rng) -> Self {
        let w = store.xavier(format!("{name}.w"), out_dim, in_dim, rng);
        let b = store.zeros(format!("{name}.b"), out_dim);
        Self { w, b, in_dim, out_dim }
    }

    /// Forward pass recorded on the tape for gradient replay.
    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: NodeId) -> Result<NodeId> {
        if tape.value(x).len() != self.in_dim {
            return Err(CoreError::DimMismatch(format!(
                "dense layer expects input of length {}, got {}",
                self.in_dim,
                tape.value(x).len()
            )));
        }
        let w = tape.param(store, self.w);
        let b = tape.param(store, self.b);
        let wx = tape.matvec(w, x, self.out_dim, self.in_dim);
        Ok(tape.add(wx, b))
    }

    /// Plain forward pass; arithmetic order matches [`DenseLayer::forward`]
    /// exactly so both paths agree bitwise.
    pub fn forward_values(&self, store: &ParamStore, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim {
            return Err(CoreError::DimMismatch(format!(
                "dense layer expects input of length {}, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.out_dim];
        matvec_into(store.values(self.w), x, self.out_dim, self.in_dim, &mut out);
        let b = store.values(self.b);
        for (o, bi) in out.iter_mut().zip(b) {
            *o += *bi;
        }
        Ok(out)
    }
}
