//! Gated recurrent cell.
//!
//! Standard formulation:
//!   z  = sigmoid(W_z x + U_z h + b_z)
//!   r  = sigmoid(W_r x + U_r h + b_r)
//!   hc = tanh(W_h x + U_h (r * h) + b_h)
//!   h' = (1 - z) * h + z * hc

use crate::error::{CoreError, Result};
use crate::math::params::{ParamId, ParamStore};
use crate::math::rng::Rng;
use crate::math::tape::{matvec_into, sigmoid, NodeId, Tape};

/// Update / reset / candidate weights for one gated recurrent cell.
#[derive(Debug, Clone)]
pub struct GruCellParams {
    pub w_z: ParamId,
    pub u_z: ParamId,
    pub b_z: ParamId,
    pub w_r: ParamId,
    pub u_r: ParamId,
    pub b_r: ParamId,
    pub w_h: ParamId,
    pub u_h: ParamId,
    pub b_h: ParamId,
    pub in_dim: usize,
    pub hidden_dim: usize,
}

impl GruCellParams {
    pub fn new(store: &mut ParamStore, name: &str, in_dim: usize, hidden_dim: usize, rng: &mut Rng) -> Self {
        let mut mat = |store: &mut ParamStore, suffix: &str, cols: usize, rng: &mut Rng| {
            store.xavier(format!("{name}.{suffix}"), hidden_dim, cols, rng)
        };
        let w_z = mat(store, "w_z", in_dim, rng);
        let u_z = mat(store, "u_z", hidden_dim, rng);
        let b_z = store.zeros(format!("{name}.b_z"), hidden_dim);
        let w_r = mat(store, "w_r", in_dim, rng);
        let u_r = mat(store, "u_r", hidden_dim, rng);
        let b_r = store.zeros(format!("{name}.b_r"), hidden_dim);
        let w_h = mat(store, "w_h", in_dim, rng);
        let u_h = mat(store, "u_h", hidden_dim, rng);
        let b_h = store.zeros(format!("{name}.b_h"), hidden_dim);
        Self { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h, in_dim, hidden_dim }
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        vec![
            self.w_z, self.u_z, self.b_z, self.w_r, self.u_r, self.b_r, self.w_h, self.u_h,
            self.b_h,
        ]
    }

    fn check_dims(&self, x_len: usize, h_len: usize) -> Result<()> {
        if x_len != self.in_dim || h_len != self.hidden_dim {
            return Err(CoreError::DimMismatch(format!(
                "gru cell expects x of length {} and h of length {}, got {} and {}",
                self.in_dim, self.hidden_dim, x_len, h_len
            )));
        }
        Ok(())
    }

    /// One recurrent step recorded on the tape.
    pub fn step(&self, tape: &mut Tape, store: &ParamStore, x: NodeId, h_prev: NodeId) -> Result<NodeId> {
        self.check_dims(tape.value(x).len(), tape.value(h_prev).len())?;
        let (d_h, d_in) = (self.hidden_dim, self.in_dim);

        let gate = |tape: &mut Tape, w: ParamId, u: ParamId, b: ParamId, hx: NodeId| {
            let wn = tape.param(store, w);
            let un = tape.param(store, u);
            let bn = tape.param(store, b);
            let wx = tape.matvec(wn, x, d_h, d_in);
            let uh = tape.matvec(un, hx, d_h, d_h);
            let s = tape.add(wx, uh);
            tape.add(s, bn)
        };

        let z_pre = gate(tape, self.w_z, self.u_z, self.b_z, h_prev);
        let z = tape.sigmoid(z_pre);
        let r_pre = gate(tape, self.w_r, self.u_r, self.b_r, h_prev);
        let r = tape.sigmoid(r_pre);
        let rh = tape.mul(r, h_prev);
        let c_pre = gate(tape, self.w_h, self.u_h, self.b_h, rh);
        let candidate = tape.tanh(c_pre);

        let keep = tape.affine(z, -1.0, 1.0); // 1 - z
        let kept = tape.mul(keep, h_prev);
        let new = tape.mul(z, candidate);
        Ok(tape.add(kept, new))
    }

    /// Plain forward step; mirrors [`GruCellParams::step`] operation for
    /// operation so the two paths agree bitwise.
    pub fn step_values(&self, store: &ParamStore, x: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(x.len(), h_prev.len())?;
        let (d_h, d_in) = (self.hidden_dim, self.in_dim);

        let gate = |w: ParamId, u: ParamId, b: ParamId, hx: &[f64]| -> Vec<f64> {
            let mut wx = vec![0.0; d_h];
            matvec_into(store.values(w), x, d_h, d_in, &mut wx);
            let mut uh = vec![0.0; d_h];
            matvec_into(store.values(u), hx, d_h, d_h, &mut uh);
            let bv = store.values(b);
            (0..d_h).map(|i| (wx[i] + uh[i]) + bv[i]).collect()
        };

        let z: Vec<f64> = gate(self.w_z, self.u_z, self.b_z, h_prev)
            .into_iter()
            .map(sigmoid)
            .collect();
        let r: Vec<f64> = gate(self.w_r, self.u_r, self.b_r, h_prev)
            .into_iter()
            .map(sigmoid)
            .collect();
        let rh: Vec<f64> = r.iter().zip(h_prev).map(|(&ri, &hi)| ri * hi).collect();
        let candidate: Vec<f64> = gate(self.w_h, self.u_h, self.b_h, &rh)
            .into_iter()
            .map(f64::tanh)
            .collect();

        Ok((0..d_h)
            .map(|i| (z[i] * -1.0 + 1.0) * h_prev[i] + z[i] * candidate[i])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_cell(d_in: usize, d_h: usize) -> (ParamStore, GruCellParams) {
        let mut store = ParamStore::new();
        let mut zmat = |store: &mut ParamStore, n: &str, cols: usize| {
            store.add(
                crate::math::params::ParamArray::new(n, vec![d_h, cols], vec![0.0; d_h * cols])
                    .unwrap(),
            )
        };
        let w_z = zmat(&mut store, "w_z", d_in);
        let u_z = zmat(&mut store, "u_z", d_h);
        let b_z = store.zeros("b_z", d_h);
        let w_r = zmat(&mut store, "w_r", d_in);
        let u_r = zmat(&mut store, "u_r", d_h);
        let b_r = store.zeros("b_r", d_h);
        let w_h = zmat(&mut store, "w_h", d_in);
        let u_h = zmat(&mut store, "u_h", d_h);
        let b_h = store.zeros("b_h", d_h);
        (
            store,
            GruCellParams { w_z, u_z, b_z, w_r, u_r, b_r, w_h, u_h, b_h, in_dim: d_in, hidden_dim: d_h },
        )
    }

    #[test]
    fn zero_params_zero_hidden_is_fixed_point() {
        let (store, cell) = zero_cell(3, 4);
        let h = cell.step_values(&store, &[1.0, -2.0, 0.5], &[0.0; 4]).unwrap();
        assert_eq!(h, vec![0.0; 4]);
    }

    #[test]
    fn zero_params_ones_hidden_halves() {
        // z = sigmoid(0) = 0.5, candidate = tanh(0) = 0, so h' = 0.5 * h.
        let (store, cell) = zero_cell(3, 4);
        let h = cell.step_values(&store, &[1.0, 2.0, 3.0], &[1.0; 4]).unwrap();
        assert_eq!(h, vec![0.5; 4]);
    }

    #[test]
    fn tape_and_plain_agree_bitwise() {
        let mut store = ParamStore::new();
        let mut rng = Rng::new(3);
        let cell = GruCellParams::new(&mut store, "g", 5, 6, &mut rng);
        let x: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let h: Vec<f64> = (0..6).map(|_| rng.normal()).collect();

        let mut tape = Tape::new();
        let xn = tape.constant(&x);
        let hn = tape.constant(&h);
        let out = cell.step(&mut tape, &store, xn, hn).unwrap();
        let plain = cell.step_values(&store, &x, &h).unwrap();
        assert_eq!(tape.value(out), plain.as_slice());
    }

    #[test]
    fn rejects_mismatched_dims() {
        let (store, cell) = zero_cell(3, 4);
        assert!(cell.step_values(&store, &[1.0, 2.0], &[0.0; 4]).is_err());
        assert!(cell.step_values(&store, &[1.0, 2.0, 3.0], &[0.0; 3]).is_err());
    }
}
